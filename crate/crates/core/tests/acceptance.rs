//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are computed literally and are
//! expected to print FAIL; the run aborts if one of them passes or if any
//! other criterion fails.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stiffrib::asymptotics::{empirical_measure, limit_value, theta_study, Exponent, StudyStructure};
use stiffrib::bounds::{lambda2_rectangle, lambda_p_constant, upper_bound_lambda, LengthBoundContext};
use stiffrib::discretize::sublevel_area;
use stiffrib::geometry::structures::{linked_teeth, uniform_levels};
use stiffrib::geometry::{
    build_comb, build_grid_structure, build_oblique_comb, build_tiled_sigma, fit_measure_to_grid, CoefficientField,
    DensityField, Domain, Point, SigmaNetwork,
};
use stiffrib::maxdist::{max_distance, theta_infinity_certificate};
use stiffrib::optimize::{default_tile, maximize_lambda, Strategy};
use stiffrib::spectral::{lambda2, lambda_1d, lambda_p};

/// lambda_p^(1/p) on the square decreases in p (toward 1/inradius = 2 from
/// above), so the literal "increasing" trend cannot hold.
const KNOWN_UNATTAINABLE: &[usize] = &[12];

type Criterion<'a> = (usize, &'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unit() -> CoefficientField {
    CoefficientField::Constant(1.0)
}

fn empty() -> SigmaNetwork {
    SigmaNetwork::point(Point::new(0.0, 0.0))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Random trees in the unit square: every new vertex hangs off an earlier one.
fn random_networks(count: usize, seed: u64) -> Vec<SigmaNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=7);
            let mut verts = vec![Point::new(rng.random(), rng.random())];
            let mut edges = Vec::new();
            for k in 1..n {
                verts.push(Point::new(rng.random(), rng.random()));
                edges.push((rng.random_range(0..k), k));
            }
            SigmaNetwork::new(verts, edges).unwrap()
        })
        .collect()
}

fn structured_networks() -> Vec<(String, SigmaNetwork)> {
    let mut out = Vec::new();
    for n in [1usize, 2, 4] {
        out.push((format!("comb:{n}"), build_comb(n)));
        out.push((format!("grid:{n}"), build_grid_structure(n)));
    }
    for n in [2usize, 4] {
        for angle in [FRAC_PI_4, FRAC_PI_3] {
            out.push((format!("oblique:{n}:{angle:.3}"), build_oblique_comb(n, angle)));
        }
    }
    out
}

fn all_networks() -> Vec<(String, SigmaNetwork)> {
    let mut out: Vec<_> = random_networks(25, 2024)
        .into_iter()
        .enumerate()
        .map(|(i, s)| (format!("random#{i}"), s))
        .collect();
    out.extend(structured_networks());
    out
}

fn square_oracle() -> Outcome {
    let d = Domain::unit_square();
    let exact = 2.0 * PI * PI;
    let start = Instant::now();
    let fine = lambda2(&d, &empty(), &unit(), &unit(), 1.0 / 256.0).unwrap().lambda;
    let secs = start.elapsed().as_secs_f64();
    let seq: Vec<f64> = [32.0, 64.0, 128.0]
        .iter()
        .map(|&k| lambda2(&d, &empty(), &unit(), &unit(), 1.0 / k).unwrap().lambda)
        .chain([fine])
        .collect();
    let errs: Vec<f64> = seq.iter().map(|v| (v - exact).abs()).collect();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]) && seq.windows(2).all(|w| w[1] > w[0]);
    let pass = rel(fine, exact) <= 0.005 && secs < 60.0 && monotone;
    outcome(pass, format!("lambda={fine:.5} rel={:.2e} time={secs:.1}s sequence={seq:.4?}", rel(fine, exact)))
}

fn comb_rectangle_identity() -> Outcome {
    let d = Domain::unit_square();
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2usize, 4, 8] {
        let r = lambda2(&d, &build_comb(n), &unit(), &unit(), 1.0 / (16 * n) as f64).unwrap();
        let e = rel(r.lambda, lambda2_rectangle(n));
        pass &= e <= 0.02 && r.component_count == n;
        detail.push(format!("n={n} rel={e:.2e} components={}", r.component_count));
    }
    outcome(pass, detail.join("; "))
}

fn comb_certificate() -> Outcome {
    let rows = theta_study(Exponent::Finite(2.0), StudyStructure::Comb, &[2, 4, 8, 16], 16).unwrap();
    // (n+2)^2 / (pi^2 (n^2+1))
    let exact: Vec<f64> = [2.0f64, 4.0, 8.0, 16.0]
        .iter()
        .map(|n| (n + 2.0).powi(2) / (PI * PI * (n * n + 1.0)))
        .collect();
    let paper = [0.3242, 0.2147, 0.1558, 0.1277];
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let close = ratios.iter().zip(&paper).all(|(r, e)| rel(*r, *e) <= 0.03);
    let above_limit = ratios.iter().all(|r| *r > 1.0 / (PI * PI));
    let exact_close = ratios.iter().zip(&exact).all(|(r, e)| rel(*r, *e) <= 0.03);
    outcome(
        decreasing && close && above_limit && exact_close,
        format!("ratios={ratios:.4?} closed_form={exact:.4?}"),
    )
}

fn grid_versus_comb() -> Outcome {
    let d = Domain::unit_square();
    let h = 1.0 / 256.0;
    let grid = build_grid_structure(8);
    let comb = build_comb(16);
    let lg = lambda2(&d, &grid, &unit(), &unit(), h).unwrap().lambda;
    let lc = lambda2(&d, &comb, &unit(), &unit(), h).unwrap().lambda;
    let og = grid.length().powi(2) / lg;
    let oc = comb.length().powi(2) / lc;
    let factor = og / oc;
    outcome(
        (1.6..=2.4).contains(&factor),
        format!("lengths {}/{} factor={factor:.4}", grid.length(), comb.length()),
    )
}

fn upper_bound_dominance(nets: &[(String, SigmaNetwork)]) -> Outcome {
    let d = Domain::unit_square();
    let h = 1.0 / 64.0;
    let mut worst: (f64, String) = (0.0, String::new());
    for p in [1.5, 2.0, 3.0] {
        for (name, s) in nets {
            let lam = lambda_p(&d, s, &unit(), &unit(), p, h).unwrap().lambda;
            let ub = upper_bound_lambda(&d, s, p).unwrap();
            if lam / ub > worst.0 {
                worst = (lam / ub, format!("{name} p={p}"));
            }
        }
    }
    outcome(
        worst.0 <= 1.05,
        format!("{} configurations x 3 exponents, max lambda/bound={:.4} at {}", nets.len(), worst.0, worst.1),
    )
}

fn sublevel_area_bound(nets: &[(String, SigmaNetwork)]) -> Outcome {
    let d = Domain::unit_square();
    let h = 1.0 / 256.0;
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut min_gap = f64::INFINITY;
    for (_, s) in nets {
        let ctx = LengthBoundContext::for_configuration(&d, s).unwrap();
        for t in [0.02, 0.05, 0.1] {
            let area = sublevel_area(&d, s, t, h).unwrap();
            let bound = ctx.h_of_t(t) * (1.0 + 5.0 * h);
            worst = worst.max(area / bound);
            pass &= area <= bound;
        }
        let t = max_distance(&d, s, 1e-6).t;
        min_gap = min_gap.min(t - ctx.tbar);
        pass &= ctx.tbar <= t;
    }
    outcome(pass, format!("max area/bound={worst:.4} min(T - tbar)={min_gap:.4}"))
}

fn one_dimensional_oracle() -> Outcome {
    let mut pass = lambda_p_constant(1.0).unwrap() == 2.0;
    let mut detail = vec![format!("Lambda_1={}", lambda_p_constant(1.0).unwrap())];
    for p in [1.5, 2.0, 3.0, 4.0] {
        let e = rel(lambda_1d(p, 2000).unwrap(), lambda_p_constant(p).unwrap());
        pass &= e <= 0.01;
        detail.push(format!("p={p} rel={e:.2e}"));
    }
    outcome(pass, detail.join("; "))
}

fn max_distance_exactness(random: &[SigmaNetwork]) -> Outcome {
    let d = Domain::unit_square();
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let comb = build_comb(n);
        let t = max_distance(&d, &comb, 1e-6).t;
        let scaled = comb.length() * t;
        let e1 = (t - 0.5 / n as f64).abs();
        let e2 = (scaled - (n + 2) as f64 / (2 * n) as f64).abs();
        pass &= e1 <= 1e-3 && e2 <= 1e-3;
        detail.push(format!("n={n} |T-1/2n|={e1:.1e} |LT-(n+2)/2n|={e2:.1e}"));
    }
    let mut margin = f64::INFINITY;
    for s in random {
        let l = s.length();
        margin = margin.min(l * max_distance(&d, s, 1e-6).t - theta_infinity_certificate(l));
    }
    pass &= margin >= 0.0;
    detail.push(format!("certificate margin={margin:.4}"));
    outcome(pass, detail.join("; "))
}

fn nonconstant_coefficients() -> Outcome {
    let d = Domain::unit_square();
    let rho = CoefficientField::AffineSquared { a: 1.0, b: 1.0, c: 0.0 };
    let limit = limit_value(&rho, &unit(), 2.0, &d).unwrap();
    let limit_err = (limit - 2.25 / (PI * PI)).abs();

    let budget = 24.0;
    let report = maximize_lambda(&d, &rho, &unit(), 2.0, budget, Strategy::AdaptedTiling, 7, 60).unwrap();
    let h = report.h_final;
    let mut baselines = vec![build_comb(22)];
    for m in 1.. {
        match linked_teeth(&d, PI / 2.0, &uniform_levels(&d, PI / 2.0, m)) {
            Ok(s) if s.length() <= budget => baselines.push(s),
            _ => break,
        }
    }
    let best_uniform = baselines
        .iter()
        .map(|s| lambda2(&d, s, &rho, &unit(), h).unwrap().lambda)
        .fold(0.0, f64::max);
    let margin = report.value / best_uniform - 1.0;
    outcome(
        limit_err <= 1e-6 && margin >= 0.01,
        format!(
            "limit err={limit_err:.1e}; adapted={:.3} ({}) uniform={best_uniform:.3} margin={:.2}% h=1/{:.0}",
            report.value,
            report.label,
            100.0 * margin,
            1.0 / h
        ),
    )
}

fn density_convergence() -> Outcome {
    let d = Domain::unit_square();
    let s = 0.25;
    let fitted = fit_measure_to_grid(&DensityField::uniform(&d), s, &d).unwrap();
    let devs: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&l| {
            let sigma = build_tiled_sigma(l, &fitted, &default_tile(), &d).unwrap();
            let rows = empirical_measure(&sigma, s).unwrap().compare(&fitted).unwrap();
            rows.iter().map(|r| r.relative_deviation()).fold(0.0, f64::max)
        })
        .collect();
    let pass = devs.windows(2).all(|w| w[1] < w[0]) && devs[2] <= 0.10;
    outcome(pass, format!("max cell deviation at L=50,100,200: {devs:.4?}"))
}

fn scaling_law() -> Outcome {
    let d = Domain::unit_square();
    let a = 0.5;
    let small = d.scaled(a);
    let sigma = build_comb(2);
    let small_sigma = sigma.map_points(|x| Point::new(a * x.x, a * x.y));
    let h = 1.0 / 48.0;
    let mut pass = true;
    let mut detail = Vec::new();
    for p in [2.0, 3.0] {
        let big = lambda_p(&d, &sigma, &unit(), &unit(), p, h).unwrap().lambda;
        let little = lambda_p(&small, &small_sigma, &unit(), &unit(), p, a * h).unwrap().lambda;
        let e = rel(little, a.powf(-p) * big);
        pass &= e <= 0.01;
        detail.push(format!("p={p} rel={e:.2e}"));
    }
    outcome(pass, detail.join("; "))
}

fn infinity_trend() -> Outcome {
    let d = Domain::unit_square();
    let h = 1.0 / 32.0;
    let vals: Vec<f64> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&p| lambda_p(&d, &empty(), &unit(), &unit(), p, h).unwrap().lambda.powf(1.0 / p))
        .collect();
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let near = rel(vals[2], 2.0) <= 0.25;
    outcome(increasing && near, format!("lambda_p^(1/p) at p=2,4,8: {vals:.4?}"))
}

fn main() -> ExitCode {
    let nets = all_networks();
    let random: Vec<SigmaNetwork> = random_networks(25, 2024);
    let criteria: Vec<Criterion> = vec![
        (1, "square oracle", Box::new(square_oracle)),
        (2, "comb/rectangle identity", Box::new(comb_rectangle_identity)),
        (3, "comb certificate ratios", Box::new(comb_certificate)),
        (4, "grid versus comb factor", Box::new(grid_versus_comb)),
        (5, "upper bound dominance", Box::new(|| upper_bound_dominance(&nets))),
        (6, "sublevel area bound", Box::new(|| sublevel_area_bound(&nets))),
        (7, "one-dimensional constants", Box::new(one_dimensional_oracle)),
        (8, "max-distance exactness", Box::new(|| max_distance_exactness(&random))),
        (9, "nonconstant coefficients", Box::new(nonconstant_coefficients)),
        (10, "density convergence", Box::new(density_convergence)),
        (11, "scaling law", Box::new(scaling_law)),
        (12, "p to infinity trend", Box::new(infinity_trend)),
    ];
    let only: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut unexpected = 0;
    for (id, name, run) in &criteria {
        if only.is_some_and(|o| o != *id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let known = KNOWN_UNATTAINABLE.contains(id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if known { " (known unattainable)" } else { "" };
        println!(
            "criterion {id:>2} {tag}{note}: {name}: {} [{:.1}s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if o.pass == known {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criterion outcome(s) differ from expectation");
        ExitCode::FAILURE
    }
}
