//! Network placement under a length budget: maximizing the first eigenvalue
//! and minimizing the maximum distance.
//!
//! Candidates are scored at a coarse search resolution; the winner is
//! filled up to the budget with hair segments and re-evaluated at the final
//! resolution.

mod anneal;
mod candidates;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::optimal_density;
use crate::bounds::{upper_bound_lambda_weighted, LengthBoundContext};
use crate::error::{Error, Result};
use crate::geometry::{CoefficientField, DensityField, Domain, SigmaNetwork};
use crate::maxdist::max_distance;
use crate::spectral::lambda_p;

pub use candidates::{default_tile, fill_budget};

/// Search strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Uniformly spaced linked teeth over orientations and offsets.
    CombFamily,
    /// Networks following the optimal length density.
    AdaptedTiling,
    /// Simulated annealing from the comb-family winner.
    Anneal,
    /// Best of all the above.
    Portfolio,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comb-family" => Ok(Strategy::CombFamily),
            "adapted-tiling" => Ok(Strategy::AdaptedTiling),
            "anneal" => Ok(Strategy::Anneal),
            "portfolio" => Ok(Strategy::Portfolio),
            other => Err(Error::InvalidInput(format!(
                "unknown strategy {other:?} (comb-family, adapted-tiling, anneal, portfolio)"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::CombFamily => "comb-family",
            Strategy::AdaptedTiling => "adapted-tiling",
            Strategy::Anneal => "anneal",
            Strategy::Portfolio => "portfolio",
        })
    }
}

/// What is optimized.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective {
    /// Maximize `lambda_p` with the given coefficients.
    Eigen {
        p: f64,
        rho: CoefficientField,
        sigma_coef: CoefficientField,
    },
    /// Minimize the maximum distance to the network and the boundary.
    MaxDistance,
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::Eigen { .. } => "eigen",
            Objective::MaxDistance => "maxdist",
        }
    }

    fn maximizes(&self) -> bool {
        matches!(self, Objective::Eigen { .. })
    }
}

/// Tuning knobs.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeOptions {
    /// Grid spacing while searching; defaults to
    /// `min(extent/48, extent/(4(L+1)))`.
    pub h_search: Option<f64>,
    /// Grid spacing of the reported value; defaults to
    /// `min(extent/128, extent/(12(L+1)))`.
    pub h_final: Option<f64>,
    /// Lattice side for the tiling construction; defaults to `extent/4`.
    pub tile_side: Option<f64>,
    /// Random orientations added to `0, pi/4, pi/2`.
    pub sampled_orientations: usize,
    /// Returned networks are filled to at least this fraction of `L`.
    pub fill: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            h_search: None,
            h_final: None,
            tile_side: None,
            sampled_orientations: 2,
            fill: 0.98,
        }
    }
}

/// One evaluation of the search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub value: f64,
    /// Best value so far.
    pub best: f64,
}

/// Outcome of an optimization.
#[derive(Clone, Debug)]
pub struct OptimizationReport {
    pub sigma: SigmaNetwork,
    /// Objective of `sigma` at `h_final` (eigenvalue) or to `1e-6` relative
    /// tolerance (maximum distance).
    pub value: f64,
    pub objective: Objective,
    pub strategy: Strategy,
    /// Which candidate won.
    pub label: String,
    pub evaluations: usize,
    pub history: Vec<HistoryEntry>,
    pub seed: u64,
    pub budget: f64,
    /// True when the evaluation budget ran out before the search finished.
    pub exhausted: bool,
    pub h_search: f64,
    pub h_final: f64,
}

/// CSV with header `iteration,value,best`.
pub fn format_history_csv(history: &[HistoryEntry]) -> String {
    let mut out = String::from("iteration,value,best\n");
    for h in history {
        out.push_str(&format!("{},{},{}\n", h.iteration, h.value, h.best));
    }
    out
}

struct Evaluator<'a> {
    domain: &'a Domain,
    objective: &'a Objective,
    h_search: f64,
    max_evals: usize,
    evals: usize,
    history: Vec<HistoryEntry>,
    best: Option<(f64, SigmaNetwork, String)>,
    exhausted: bool,
}

impl Evaluator<'_> {
    /// Score to maximize: `ln lambda` or `-ln T`.
    fn score(&self, value: f64) -> f64 {
        if self.objective.maximizes() {
            value.ln()
        } else {
            -value.ln()
        }
    }

    fn value(&self, sigma: &SigmaNetwork, h: f64, tol: f64) -> Option<f64> {
        match self.objective {
            Objective::Eigen { p, rho, sigma_coef } => lambda_p(self.domain, sigma, rho, sigma_coef, *p, h)
                .ok()
                .map(|r| r.lambda),
            Objective::MaxDistance => Some(max_distance(self.domain, sigma, tol).t),
        }
    }

    /// Evaluates `sigma` at search resolution; `None` once the budget is
    /// spent (sets `exhausted`) or when the objective cannot be computed.
    fn eval(&mut self, sigma: &SigmaNetwork, label: &str) -> Option<f64> {
        if self.evals >= self.max_evals {
            self.exhausted = true;
            return None;
        }
        self.evals += 1;
        let tol = 1e-4 * self.domain.bbox().diameter();
        let value = self.value(sigma, self.h_search, tol)?;
        let better = match &self.best {
            None => true,
            Some((b, _, _)) => self.score(value) > self.score(*b),
        };
        if better {
            self.best = Some((value, sigma.clone(), label.to_string()));
        }
        let best = self.best.as_ref().map_or(value, |b| b.0);
        self.history.push(HistoryEntry {
            iteration: self.evals,
            value,
            best,
        });
        Some(value)
    }

    fn spent(&self) -> bool {
        self.evals >= self.max_evals
    }
}

fn extent(domain: &Domain) -> f64 {
    let b = domain.bbox();
    b.width().max(b.height())
}

/// Maximizes `lambda_p^{sigma,rho}(domain \ Sigma)` over connected networks
/// of length at most `budget`.
#[allow(clippy::too_many_arguments)]
pub fn maximize_lambda(
    domain: &Domain,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    budget: f64,
    strategy: Strategy,
    seed: u64,
    eval_budget: usize,
) -> Result<OptimizationReport> {
    maximize_lambda_with(domain, rho, sigma_coef, p, budget, strategy, seed, eval_budget, &OptimizeOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn maximize_lambda_with(
    domain: &Domain,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    budget: f64,
    strategy: Strategy,
    seed: u64,
    eval_budget: usize,
    opts: &OptimizeOptions,
) -> Result<OptimizationReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("eigenvalue optimization needs 1 < p < inf, got {p}")));
    }
    rho.check_positive(domain)?;
    sigma_coef.check_positive(domain)?;
    let objective = Objective::Eigen {
        p,
        rho: *rho,
        sigma_coef: *sigma_coef,
    };
    run(domain, objective, budget, strategy, seed, eval_budget, opts)
}

/// Minimizes `max_x d(x, Sigma ∪ ∂domain)` over connected networks of
/// length at most `budget`.
pub fn minimize_maxdist(
    domain: &Domain,
    budget: f64,
    strategy: Strategy,
    seed: u64,
    eval_budget: usize,
) -> Result<OptimizationReport> {
    minimize_maxdist_with(domain, budget, strategy, seed, eval_budget, &OptimizeOptions::default())
}

pub fn minimize_maxdist_with(
    domain: &Domain,
    budget: f64,
    strategy: Strategy,
    seed: u64,
    eval_budget: usize,
    opts: &OptimizeOptions,
) -> Result<OptimizationReport> {
    run(domain, Objective::MaxDistance, budget, strategy, seed, eval_budget, opts)
}

/// Independent random streams per search stage.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn run(
    domain: &Domain,
    objective: Objective,
    budget: f64,
    strategy: Strategy,
    seed: u64,
    eval_budget: usize,
    opts: &OptimizeOptions,
) -> Result<OptimizationReport> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::InvalidInput(format!("budget must be positive, got {budget}")));
    }
    if eval_budget == 0 {
        return Err(Error::InvalidInput("evaluation budget must be positive".into()));
    }
    let e = extent(domain);
    let h_search = opts.h_search.unwrap_or((e / 48.0).min(e / (4.0 * (budget + 1.0))));
    let h_final = opts.h_final.unwrap_or((e / 128.0).min(e / (12.0 * (budget + 1.0))));
    let mut ev = Evaluator {
        domain,
        objective: &objective,
        h_search,
        max_evals: eval_budget,
        evals: 0,
        history: Vec::new(),
        best: None,
        exhausted: false,
    };
    let angles = candidates::orientations(&mut stream(seed, 0), opts.sampled_orientations);

    let run_comb = |ev: &mut Evaluator| {
        for c in candidates::comb_family(domain, budget, &angles) {
            if ev.eval(&c.sigma, &c.label).is_none() && ev.spent() {
                break;
            }
        }
    };
    let run_adapted = |ev: &mut Evaluator| -> Result<bool> {
        let density = match &objective {
            Objective::Eigen { p, rho, sigma_coef } => optimal_density(rho, sigma_coef, *p, domain)?,
            Objective::MaxDistance => DensityField::uniform(domain),
        };
        let side = opts.tile_side.unwrap_or(e / 4.0);
        let cands = candidates::adapted_family(domain, budget, &density, side, &angles);
        let any = !cands.is_empty();
        for c in cands {
            if ev.eval(&c.sigma, &c.label).is_none() && ev.spent() {
                break;
            }
        }
        Ok(any)
    };

    match strategy {
        Strategy::CombFamily => run_comb(&mut ev),
        Strategy::AdaptedTiling => {
            if !run_adapted(&mut ev)? {
                run_comb(&mut ev);
            }
        }
        Strategy::Anneal => {
            let share = eval_budget / 2;
            ev.max_evals = share.max(1);
            run_comb(&mut ev);
            ev.max_evals = eval_budget;
            ev.exhausted = false;
            anneal_stage(&mut ev, budget, &mut stream(seed, 1));
        }
        Strategy::Portfolio => {
            ev.max_evals = (eval_budget / 3).max(1);
            run_comb(&mut ev);
            ev.max_evals = (2 * eval_budget / 3).max(ev.evals + 1);
            ev.exhausted = false;
            run_adapted(&mut ev)?;
            ev.max_evals = eval_budget;
            ev.exhausted = false;
            anneal_stage(&mut ev, budget, &mut stream(seed, 1));
        }
    }

    let Some((_, best, label)) = ev.best.clone() else {
        return Err(Error::Infeasible(format!(
            "no evaluable network of length at most {budget} was found"
        )));
    };
    let filled = fill_budget(&best, domain, budget, opts.fill);
    let value = ev
        .value(&filled, h_final, 1e-6 * domain.bbox().diameter())
        .ok_or_else(|| Error::Infeasible("final evaluation failed".into()))?;
    Ok(OptimizationReport {
        sigma: filled,
        value,
        objective: objective.clone(),
        strategy,
        label,
        evaluations: ev.evals,
        history: ev.history,
        seed,
        budget,
        exhausted: ev.exhausted,
        h_search,
        h_final,
    })
}

/// Simulated annealing from the current best until the evaluation budget
/// is spent.
fn anneal_stage(ev: &mut Evaluator, budget: f64, rng: &mut ChaCha8Rng) {
    let Some((start_value, start, _)) = ev.best.clone() else {
        return;
    };
    let e = extent(ev.domain);
    let remaining = ev.max_evals.saturating_sub(ev.evals);
    if remaining == 0 {
        return;
    }
    let scale = anneal::MoveScale {
        slide: 0.25 * e / (budget + 1.0) * (10.0 / (remaining as f64).sqrt()).min(1.0),
        spur: 4.0 * e / (budget + 1.0),
        budget,
    };
    // Calibration on probe moves from the start.
    let probes = (remaining / 5).clamp(1, 100);
    let mut losses = Vec::new();
    let mut cur = (start.clone(), ev.score(start_value));
    for _ in 0..probes {
        let Some(next) = anneal::propose(&start, ev.domain, &scale, rng) else {
            continue;
        };
        let Some(v) = ev.eval(&next, "anneal") else {
            if ev.spent() {
                return;
            }
            continue;
        };
        let s = ev.score(v);
        if s < cur.1 {
            losses.push(cur.1 - s);
        }
    }
    let mean = (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64);
    let t0 = anneal::calibrate(mean);
    let mut k = 0;
    let mut failures = 0;
    while !ev.spent() && failures < 10_000 {
        let Some(next) = anneal::propose(&cur.0, ev.domain, &scale, rng) else {
            failures += 1;
            continue;
        };
        let Some(v) = ev.eval(&next, "anneal") else {
            continue;
        };
        let s = ev.score(v);
        let t = anneal::temperature(t0, k);
        k += 1;
        let u: f64 = rand::Rng::random(rng);
        if s >= cur.1 || u < ((s - cur.1) / t).exp() {
            cur = (next, s);
        }
    }
}

/// An optimality certificate: the achieved value against a bound valid for
/// every admissible network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub achieved: f64,
    /// Upper bound for eigenvalues, lower bound for maximum distances.
    pub bound: f64,
    /// `bound / achieved` (eigenvalue) or `achieved / bound` (distance),
    /// at least one up to discretization error.
    pub gap: f64,
}

/// Certifies a report with the length bounds. For eigenvalue reports `p`
/// must be the exponent that was optimized.
pub fn certify(report: &OptimizationReport, domain: &Domain, p: f64) -> Result<Certificate> {
    match &report.objective {
        Objective::Eigen { p: q, rho, sigma_coef } => {
            if (p - q).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "report was optimized for p = {q}, not {p}"
                )));
            }
            let bound = upper_bound_lambda_weighted(domain, &report.sigma, p, rho, sigma_coef)?;
            Ok(Certificate {
                achieved: report.value,
                bound,
                gap: bound / report.value,
            })
        }
        Objective::MaxDistance => {
            let ctx = LengthBoundContext::for_configuration(domain, &report.sigma)?;
            Ok(Certificate {
                achieved: report.value,
                bound: ctx.tbar,
                gap: report.value / ctx.tbar,
            })
        }
    }
}

#[cfg(test)]
mod tests;
