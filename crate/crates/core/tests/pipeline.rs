use stiffrib::bounds::{upper_bound_lambda, LengthBoundContext};
use stiffrib::geometry::io::{parse_domain, parse_sigma};
use stiffrib::geometry::CoefficientField;
use stiffrib::maxdist::max_distance;
use stiffrib::spectral::{lambda2, lambda_p};

const ANNULUS: &str = "\
# square with a square hole
outer: 0 0 2 0 2 2 0 2
hole: 0.8 0.8 1.2 0.8 1.2 1.2 0.8 1.2
";

const SPOKE: &str = "\
v 1 0
v 1 0.8
e 0 1
";

#[test]
fn holed_domain_from_files() {
    let d = parse_domain(ANNULUS).unwrap();
    assert_eq!(d.boundary_components(), 2);
    assert!((d.area() - 3.84).abs() < 1e-12);
    let s = parse_sigma(SPOKE).unwrap();
    assert!(s.lies_within(&d));

    let unit = CoefficientField::Constant(1.0);
    let with = lambda2(&d, &s, &unit, &unit, 1.0 / 40.0).unwrap();
    let point = parse_sigma("v 0 0\n").unwrap();
    let without = lambda2(&d, &point, &unit, &unit, 1.0 / 40.0).unwrap();
    assert!(with.lambda > without.lambda);
    assert!(with.converged && with.eigenfunction.iter().all(|v| *v >= 0.0));

    for p in [1.5, 2.0, 3.0] {
        let l = lambda_p(&d, &s, &unit, &unit, p, 1.0 / 40.0).unwrap().lambda;
        assert!(l <= upper_bound_lambda(&d, &s, p).unwrap(), "p={p}");
    }

    let ctx = LengthBoundContext::for_configuration(&d, &s).unwrap();
    assert_eq!(ctx.kappa, 2);
    assert!(ctx.tbar <= max_distance(&d, &s, 1e-6).t);
}

#[test]
fn parse_errors_report_lines() {
    let err = parse_domain("outer: 0 0 1 0 1 1 0 1\nhole: 0.2 0.2 0.4\n").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    let err = parse_sigma("v 0 0\ne 0 1\n").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}
