//! Subcommand implementations. Each returns the CSV printed to stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use stiffrib::asymptotics::{
    empirical_measure, format_density_csv, format_theta_csv, limit_value, optimal_density, theta_study, Exponent,
    StudyStructure,
};
use stiffrib::bounds::{lambda_p_constant, upper_bound_lambda_weighted, LengthBoundContext};
use stiffrib::discretize::{discretize_with_band, DEFAULT_BAND_FACTOR};
use stiffrib::geometry::io::format_sigma;
use stiffrib::geometry::{build_tiled_sigma, fit_measure_to_grid, Domain, SigmaNetwork};
use stiffrib::maxdist::{distance_raster, max_distance};
use stiffrib::optimize::{
    certify, default_tile, format_history_csv, maximize_lambda_with, minimize_maxdist_with, OptimizeOptions, Strategy,
};
use stiffrib::spectral::{lambda_p, lambda_p_on_grid, SolverOptions};

use crate::config::Config;
use crate::CliError;

/// Output directory from the `out` key.
struct Artifacts(Option<PathBuf>);

impl Artifacts {
    fn new(cfg: &Config) -> Result<Self, CliError> {
        let dir = cfg.path("out");
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::Io(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Artifacts(dir))
    }

    fn write(&self, name: &str, content: &str) -> Result<(), CliError> {
        if let Some(d) = &self.0 {
            let path = d.join(name);
            fs::write(&path, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn finite_exponent(cfg: &Config) -> Result<f64, CliError> {
    let p = cfg.exponent(2.0)?;
    if p > 1.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(CliError::Usage(format!("this command needs 1 < p < inf, got p={p}")))
    }
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

pub fn solve(cfg: &Config) -> Result<String, CliError> {
    cfg.check_keys(&["domain", "sigma", "p", "h", "rho", "sigma_coef", "band", "tol", "out"])?;
    let out = Artifacts::new(cfg)?;
    let p = finite_exponent(cfg)?;
    let domain = cfg.domain()?;
    let sigma = cfg.sigma(&domain, p)?;
    let (rho, sc) = (cfg.coefficient("rho")?, cfg.coefficient("sigma_coef")?);
    rho.check_positive(&domain)?;
    sc.check_positive(&domain)?;
    let h = cfg.positive("h", 1.0 / 64.0)?;
    let opts = SolverOptions {
        band_factor: cfg.positive("band", DEFAULT_BAND_FACTOR)?,
        tol: cfg.positive("tol", SolverOptions::default().tol)?,
        ..SolverOptions::default()
    };
    let grid = discretize_with_band(&domain, &sigma, h, opts.band_factor)?;
    let r = lambda_p_on_grid(&grid, &rho, &sc, p, &opts)?;
    warn(&r.warnings);
    let csv = format!(
        "p,h,lambda,residual,iterations,components,component,converged\n{},{},{},{},{},{},{},{}\n",
        p, h, r.lambda, r.residual, r.iterations, r.component_count, r.component_id, r.converged
    );
    out.write("solve.csv", &csv)?;
    out.write("eigenfunction.txt", &grid.format_raster(&grid.to_node_values(&r.eigenfunction)))?;
    out.write("classes.txt", &grid.format_classes())?;
    Ok(csv)
}

/// Rows `(h, lambda, extrapolated, observed order)`; the extrapolation
/// assumes error `C h^order`.
pub fn richardson(hs: &[f64], lambdas: &[f64], order: f64) -> Vec<(f64, f64, Option<f64>, Option<f64>)> {
    (0..hs.len())
        .map(|k| {
            let extrapolated = (k >= 1).then(|| {
                let r = (hs[k - 1] / hs[k]).powf(order);
                lambdas[k] + (lambdas[k] - lambdas[k - 1]) / (r - 1.0)
            });
            let observed = (k >= 2).then(|| {
                let (d1, d2) = (lambdas[k - 1] - lambdas[k - 2], lambdas[k] - lambdas[k - 1]);
                (d1 / d2).abs().ln() / (hs[k - 1] / hs[k]).ln()
            });
            (hs[k], lambdas[k], extrapolated, observed.filter(|o| o.is_finite()))
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn refine(cfg: &Config) -> Result<String, CliError> {
    cfg.check_keys(&["domain", "sigma", "p", "hs", "rho", "sigma_coef", "order", "out"])?;
    let out = Artifacts::new(cfg)?;
    let p = finite_exponent(cfg)?;
    let hs = cfg.f64_list("hs", &[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0])?;
    if hs.iter().any(|h| !(*h > 0.0)) || hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Usage("hs must be positive and strictly decreasing".into()));
    }
    let order = cfg.positive("order", 2.0)?;
    let domain = cfg.domain()?;
    let sigma = cfg.sigma(&domain, p)?;
    let (rho, sc) = (cfg.coefficient("rho")?, cfg.coefficient("sigma_coef")?);
    let mut lambdas = Vec::with_capacity(hs.len());
    for &h in &hs {
        let r = lambda_p(&domain, &sigma, &rho, &sc, p, h)?;
        warn(&r.warnings);
        lambdas.push(r.lambda);
    }
    let mut csv = String::from("h,lambda,extrapolated,observed_order\n");
    for (h, l, e, o) in richardson(&hs, &lambdas, order) {
        let _ = writeln!(csv, "{h},{l},{},{}", cell(e), cell(o));
    }
    out.write("refine.csv", &csv)?;
    Ok(csv)
}

pub fn bound(cfg: &Config) -> Result<String, CliError> {
    cfg.check_keys(&["domain", "sigma", "p", "h", "rho", "sigma_coef", "out"])?;
    let out = Artifacts::new(cfg)?;
    let p = cfg.exponent(2.0)?;
    let domain = cfg.domain()?;
    let sigma = cfg.sigma(&domain, p)?;
    let (rho, sc) = (cfg.coefficient("rho")?, cfg.coefficient("sigma_coef")?);
    let ctx = LengthBoundContext::for_configuration(&domain, &sigma)?;
    let t = max_distance(&domain, &sigma, 1e-6 * domain.bbox().diameter()).t;
    let (bound, lambda) = if p.is_infinite() {
        (1.0 / ctx.tbar, Some(1.0 / t))
    } else {
        let bound = upper_bound_lambda_weighted(&domain, &sigma, p, &rho, &sc)?;
        let lambda = match cfg.opt_f64("h")? {
            Some(h) if p > 1.0 => {
                let r = lambda_p(&domain, &sigma, &rho, &sc, p, h)?;
                warn(&r.warnings);
                Some(r.lambda)
            }
            _ => None,
        };
        (bound, lambda)
    };
    let csv = format!(
        "p,length,kappa,tbar,T,bound,lambda\n{p},{},{},{},{t},{bound},{}\n",
        ctx.sigma_len,
        ctx.kappa,
        ctx.tbar,
        cell(lambda)
    );
    out.write("bound.csv", &csv)?;
    Ok(csv)
}

pub fn study(cfg: &Config, grid: bool) -> Result<String, CliError> {
    cfg.check_keys(&["p", "n_list", "cells_per_gap", "out"])?;
    let out = Artifacts::new(cfg)?;
    let p = cfg.exponent(2.0)?;
    let exponent = if p.is_infinite() {
        Exponent::Infinity
    } else if p > 1.0 {
        Exponent::Finite(p)
    } else {
        return Err(CliError::Usage("studies need p > 1 or p = inf".into()));
    };
    let structure = if grid { StudyStructure::Grid } else { StudyStructure::Comb };
    let ns = cfg.usize_list("n_list", &[1, 2, 4, 8])?;
    let cells = cfg.integer("cells_per_gap", 16usize)?;
    let csv = format_theta_csv(&theta_study(exponent, structure, &ns, cells)?);
    out.write(if grid { "grid_study.csv" } else { "comb_study.csv" }, &csv)?;
    Ok(csv)
}

pub fn gamma_study(cfg: &Config) -> Result<String, CliError> {
    cfg.check_keys(&["domain", "rho", "sigma_coef", "p", "L_list", "tile_side", "out"])?;
    let out = Artifacts::new(cfg)?;
    let p = finite_exponent(cfg)?;
    let domain = cfg.domain()?;
    let (rho, sc) = (cfg.coefficient("rho")?, cfg.coefficient("sigma_coef")?);
    let budgets = cfg.f64_list("L_list", &[50.0, 100.0, 200.0])?;
    let s = cfg.positive("tile_side", 0.25 * extent(&domain))?;
    let limit = limit_value(&rho, &sc, p, &domain)?;
    let fitted = fit_measure_to_grid(&optimal_density(&rho, &sc, p, &domain)?, s, &domain)?;
    let mut csv = String::from("L,length,max_deviation,limit\n");
    for &l in &budgets {
        let sigma = build_tiled_sigma(l, &fitted, &default_tile(), &domain)?;
        let rows = empirical_measure(&sigma, s)?.compare(&fitted)?;
        let dev = rows.iter().map(|r| r.relative_deviation()).fold(0.0, f64::max);
        let _ = writeln!(csv, "{l},{},{dev},{limit}", sigma.length());
        out.write(&format!("density_L{l}.csv"), &format_density_csv(&rows))?;
    }
    out.write("gamma.csv", &csv)?;
    Ok(csv)
}

fn extent(domain: &Domain) -> f64 {
    let b = domain.bbox();
    b.width().max(b.height())
}

pub fn optimize(cfg: &Config) -> Result<String, CliError> {
    cfg.check_keys(&[
        "domain",
        "rho",
        "sigma_coef",
        "p",
        "L",
        "strategy",
        "h_search",
        "h_final",
        "eval_budget",
        "seed",
        "tile_side",
        "fill",
        "orientations",
        "out",
    ])?;
    let out = Artifacts::new(cfg)?;
    let p = cfg.exponent(2.0)?;
    if p <= 1.0 {
        return Err(CliError::Usage("optimize needs p > 1 or p = inf".into()));
    }
    let domain = cfg.domain()?;
    let budget = cfg.positive("L", 10.0)?;
    let strategy: Strategy = cfg.get("strategy").unwrap_or("portfolio").parse()?;
    let eval_budget = cfg.integer("eval_budget", 200usize)?;
    let seed = cfg.integer("seed", 0u64)?;
    let opts = OptimizeOptions {
        h_search: cfg.opt_f64("h_search")?,
        h_final: cfg.opt_f64("h_final")?,
        tile_side: cfg.opt_f64("tile_side")?,
        sampled_orientations: cfg.integer("orientations", OptimizeOptions::default().sampled_orientations)?,
        fill: cfg.f64_or("fill", OptimizeOptions::default().fill)?,
    };
    let report = if p.is_infinite() {
        minimize_maxdist_with(&domain, budget, strategy, seed, eval_budget, &opts)?
    } else {
        let (rho, sc) = (cfg.coefficient("rho")?, cfg.coefficient("sigma_coef")?);
        maximize_lambda_with(&domain, &rho, &sc, p, budget, strategy, seed, eval_budget, &opts)?
    };
    let cert = certify(&report, &domain, p)?;
    let csv = format!(
        "objective,strategy,L,length,value,bound,gap,evaluations,exhausted,seed,label\n{},{},{},{},{},{},{},{},{},{},{}\n",
        report.objective.name(),
        report.strategy,
        budget,
        report.sigma.length(),
        report.value,
        cert.bound,
        cert.gap,
        report.evaluations,
        report.exhausted,
        seed,
        report.label.replace(',', ";")
    );
    out.write("optimize.csv", &csv)?;
    out.write("best_sigma.txt", &format_sigma(&report.sigma))?;
    out.write("history.csv", &format_history_csv(&report.history))?;
    Ok(csv)
}

pub fn maxdist(cfg: &Config) -> Result<String, CliError> {
    cfg.check_keys(&["domain", "sigma", "tolerance", "h", "out"])?;
    let out = Artifacts::new(cfg)?;
    let domain = cfg.domain()?;
    let sigma = cfg.sigma(&domain, f64::INFINITY)?;
    let tol = cfg.positive("tolerance", 1e-6)?;
    let r = max_distance(&domain, &sigma, tol);
    let ctx = LengthBoundContext::for_configuration(&domain, &sigma)?;
    let l = sigma.length();
    let csv = format!(
        "L,T,x,y,h,level,tbar,LT\n{l},{},{},{},{},{},{},{}\n",
        r.t,
        r.argmax.x,
        r.argmax.y,
        r.h,
        r.level,
        ctx.tbar,
        l * r.t
    );
    out.write("maxdist.csv", &csv)?;
    if out.0.is_some() {
        let h = cfg.positive("h", extent(&domain) / 128.0)?;
        out.write("distance.txt", &distance_raster(&domain, &sigma, h))?;
    }
    Ok(csv)
}

pub fn constants(cfg: &Config) -> Result<String, CliError> {
    cfg.check_keys(&["p_list", "t_list", "domain", "sigma", "out"])?;
    let out = Artifacts::new(cfg)?;
    let ps = cfg.f64_list("p_list", &[1.0, 2.0, 3.0])?;
    let ts = cfg.f64_list("t_list", &[0.01, 0.02, 0.05, 0.1])?;
    let mut table_p = String::from("p,Lambda_p\n");
    for p in ps {
        let _ = writeln!(table_p, "{p},{}", lambda_p_constant(p)?);
    }
    let domain = cfg.domain()?;
    let sigma: SigmaNetwork = cfg.sigma(&domain, 2.0)?;
    let ctx = LengthBoundContext::for_configuration(&domain, &sigma)?;
    let table_tbar = format!("length,area,kappa,tbar\n{},{},{},{}\n", ctx.sigma_len, ctx.area, ctx.kappa, ctx.tbar);
    let mut table_h = String::from("t,H\n");
    for t in ts {
        if !(t >= 0.0) {
            return Err(CliError::Usage(format!("t_list entries must be non-negative, got {t}")));
        }
        let _ = writeln!(table_h, "{t},{}", ctx.h_of_t(t));
    }
    out.write("constants.csv", &table_p)?;
    out.write("tbar.csv", &table_tbar)?;
    out.write("h_of_t.csv", &table_h)?;
    Ok(format!("{table_p}\n{table_tbar}\n{table_h}"))
}
