use super::*;
use crate::bounds::lambda2_rectangle;
use crate::geometry::{build_comb, Point};
use crate::maxdist::theta_infinity_certificate;
use crate::spectral::lambda2;

fn unit() -> CoefficientField {
    CoefficientField::Constant(1.0)
}

fn check_report(r: &OptimizationReport, domain: &Domain) {
    assert!(r.sigma.is_connected());
    assert!(r.sigma.lies_within(domain));
    let len = r.sigma.length();
    assert!(len <= r.budget * (1.0 + 1e-12) && len >= 0.98 * r.budget, "length {len}");
    let maximize = r.objective.maximizes();
    for w in r.history.windows(2) {
        if maximize {
            assert!(w[1].best >= w[0].best);
        } else {
            assert!(w[1].best <= w[0].best);
        }
    }
    assert!(r.evaluations <= r.history.len().max(r.evaluations));
}

#[test]
fn strategy_names_round_trip() {
    for s in ["comb-family", "adapted-tiling", "anneal", "portfolio"] {
        assert_eq!(s.parse::<Strategy>().unwrap().to_string(), s);
    }
    assert!("greedy".parse::<Strategy>().is_err());
}

#[test]
fn comb_family_beats_the_comb() {
    let d = Domain::unit_square();
    let opts = OptimizeOptions {
        h_final: Some(1.0 / 128.0),
        ..OptimizeOptions::default()
    };
    let r = maximize_lambda_with(&d, &unit(), &unit(), 2.0, 18.0, Strategy::CombFamily, 1, 60, &opts).unwrap();
    check_report(&r, &d);
    let comb = lambda2(&d, &build_comb(16), &unit(), &unit(), 1.0 / 128.0).unwrap().lambda;
    assert!(r.value >= comb, "{} < {comb}", r.value);
    assert!(comb > 0.97 * lambda2_rectangle(16));
}

#[test]
fn deterministic_for_a_seed() {
    let d = Domain::unit_square();
    let a = minimize_maxdist(&d, 6.0, Strategy::Portfolio, 11, 60).unwrap();
    let b = minimize_maxdist(&d, 6.0, Strategy::Portfolio, 11, 60).unwrap();
    assert_eq!(a.sigma, b.sigma);
    assert_eq!(a.history, b.history);
    assert_eq!(a.value, b.value);
}

#[test]
fn maxdist_matches_comb_and_certificate() {
    let d = Domain::unit_square();
    for n in [2usize, 4, 8] {
        let l = (n + 2) as f64;
        let r = minimize_maxdist(&d, l, Strategy::CombFamily, 5, 100).unwrap();
        check_report(&r, &d);
        assert!(r.value <= 0.5 / n as f64 * 1.05, "n={n}: {}", r.value);
        assert!(l * r.value >= theta_infinity_certificate(l));
        let cert = certify(&r, &d, f64::INFINITY).unwrap();
        assert!(cert.achieved >= cert.bound && cert.gap >= 1.0);
    }
}

#[test]
fn large_budget_scaled_distance() {
    let d = Domain::unit_square();
    let r = minimize_maxdist(&d, 120.0, Strategy::CombFamily, 2, 40).unwrap();
    let scaled = 120.0 * r.value;
    assert!((0.5 - 1e-9..=0.65).contains(&scaled), "{scaled}");
    assert!(scaled >= theta_infinity_certificate(120.0));
}

#[test]
fn anneal_never_loses_its_start() {
    let d = Domain::unit_square();
    let comb = minimize_maxdist(&d, 5.0, Strategy::CombFamily, 9, 30).unwrap();
    let ann = minimize_maxdist(&d, 5.0, Strategy::Anneal, 9, 120).unwrap();
    check_report(&ann, &d);
    let first_best = |r: &OptimizationReport| r.history.iter().map(|h| h.best).fold(f64::INFINITY, f64::min);
    assert!(first_best(&ann) <= first_best(&comb) + 1e-12);
    assert!(ann.history.len() > comb.history.len());
}

#[test]
fn anneal_on_eigenvalues_is_monotone() {
    let d = Domain::unit_square();
    let opts = OptimizeOptions {
        h_search: Some(1.0 / 24.0),
        h_final: Some(1.0 / 48.0),
        ..OptimizeOptions::default()
    };
    let r = maximize_lambda_with(&d, &unit(), &unit(), 2.0, 3.0, Strategy::Anneal, 4, 60, &opts).unwrap();
    check_report(&r, &d);
    assert_eq!(r.evaluations, 60);
}

#[test]
fn tiny_budget_keeps_the_spectrum_above_the_empty_square() {
    let d = Domain::unit_square();
    let opts = OptimizeOptions {
        h_final: Some(1.0 / 64.0),
        ..OptimizeOptions::default()
    };
    let r = maximize_lambda_with(&d, &unit(), &unit(), 2.0, 0.01, Strategy::Portfolio, 3, 30, &opts).unwrap();
    check_report(&r, &d);
    let empty = lambda2(&d, &SigmaNetwork::point(Point::new(0.0, 0.0)), &unit(), &unit(), 1.0 / 64.0)
        .unwrap()
        .lambda;
    assert!(r.value >= empty * (1.0 - 1e-9));
}

#[test]
fn exhausted_budget_is_flagged() {
    let d = Domain::unit_square();
    let r = minimize_maxdist(&d, 6.0, Strategy::CombFamily, 1, 2).unwrap();
    assert!(r.exhausted);
    assert_eq!(r.evaluations, 2);
}

#[test]
fn certificate_for_eigen_report() {
    let d = Domain::unit_square();
    let opts = OptimizeOptions {
        h_final: Some(1.0 / 96.0),
        ..OptimizeOptions::default()
    };
    let r = maximize_lambda_with(&d, &unit(), &unit(), 2.0, 6.0, Strategy::CombFamily, 1, 40, &opts).unwrap();
    let cert = certify(&r, &d, 2.0).unwrap();
    assert!(cert.gap.is_finite() && cert.gap > 1.0);
    assert!(certify(&r, &d, 3.0).is_err());
}

#[test]
fn history_csv_header() {
    let csv = format_history_csv(&[HistoryEntry { iteration: 1, value: 2.0, best: 2.0 }]);
    assert_eq!(csv, "iteration,value,best\n1,2,2\n");
}

#[test]
fn rejects_bad_inputs() {
    let d = Domain::unit_square();
    assert!(maximize_lambda(&d, &unit(), &unit(), 1.0, 5.0, Strategy::CombFamily, 0, 10).is_err());
    assert!(minimize_maxdist(&d, 0.0, Strategy::CombFamily, 0, 10).is_err());
    assert!(minimize_maxdist(&d, 5.0, Strategy::CombFamily, 0, 0).is_err());
}
