use std::fmt;

use super::domain::Domain;
use super::primitives::{BoundingBox, Point};
use crate::error::{Error, Result};

/// A closed-form scalar field used for the weights `rho` and `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientField {
    /// `c`
    Constant(f64),
    /// `a + b x + c y`
    Affine { a: f64, b: f64, c: f64 },
    /// `(a + b x + c y)^2`
    AffineSquared { a: f64, b: f64, c: f64 },
    /// `a + b |x - x0|^2`
    RadialQuadratic { a: f64, b: f64, x0: f64, y0: f64 },
    /// `a exp(b x)`
    Exponential { a: f64, b: f64 },
}

impl Default for CoefficientField {
    fn default() -> Self {
        CoefficientField::Constant(1.0)
    }
}

impl CoefficientField {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            CoefficientField::Constant(c) => c,
            CoefficientField::Affine { a, b, c } => a + b * p.x + c * p.y,
            CoefficientField::AffineSquared { a, b, c } => {
                let v = a + b * p.x + c * p.y;
                v * v
            }
            CoefficientField::RadialQuadratic { a, b, x0, y0 } => {
                a + b * p.dist(Point::new(x0, y0)).powi(2)
            }
            CoefficientField::Exponential { a, b } => a * (b * p.x).exp(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            CoefficientField::Constant(_) => true,
            CoefficientField::Affine { b, c, .. } | CoefficientField::AffineSquared { b, c, .. } => {
                b == 0.0 && c == 0.0
            }
            CoefficientField::RadialQuadratic { b, .. } | CoefficientField::Exponential { b, .. } => {
                b == 0.0
            }
        }
    }

    /// Exact `(min, max)` of the field over a closed box.
    pub fn range_over(&self, bbox: &BoundingBox) -> (f64, f64) {
        let corners = bbox.corners();
        let corner_range = |f: &dyn Fn(Point) -> f64| {
            corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| {
                let v = f(q);
                (lo.min(v), hi.max(v))
            })
        };
        match *self {
            CoefficientField::Constant(c) => (c, c),
            CoefficientField::Affine { .. } | CoefficientField::Exponential { .. } => {
                // Monotone along every axis, so extremes sit at corners.
                corner_range(&|q| self.eval(q))
            }
            CoefficientField::AffineSquared { a, b, c } => {
                let (lo, hi) = corner_range(&|q| a + b * q.x + c * q.y);
                let max = lo.abs().max(hi.abs()).powi(2);
                let min = if lo <= 0.0 && hi >= 0.0 {
                    0.0
                } else {
                    lo.abs().min(hi.abs()).powi(2)
                };
                (min, max)
            }
            CoefficientField::RadialQuadratic { a, b, x0, y0 } => {
                let c = Point::new(x0, y0);
                let near = bbox.clamp(c).dist(c).powi(2);
                let far = corners
                    .iter()
                    .map(|q| q.dist(c).powi(2))
                    .fold(0.0, f64::max);
                if b >= 0.0 {
                    (a + b * near, a + b * far)
                } else {
                    (a + b * far, a + b * near)
                }
            }
        }
    }

    /// Rejects fields that are not strictly positive on the domain closure.
    pub fn check_positive(&self, domain: &Domain) -> Result<()> {
        let (min, _) = self.range_over(&domain.bbox());
        if !(min > 0.0) || !min.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coefficient {self} is not strictly positive on the domain (min {min})"
            )));
        }
        Ok(())
    }

    /// Parses `kind=<constant|affine|affine2|radialq|exp> params=<csv>`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut params: Option<Vec<f64>> = None;
        for token in text.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("expected key=value, got '{token}'"))
            })?;
            match key {
                "kind" => kind = Some(value.to_string()),
                "params" => {
                    let parsed = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::InvalidInput(format!("bad params '{value}': {e}")))?;
                    params = Some(parsed);
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "unknown coefficient key '{key}'"
                    )))
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::InvalidInput("missing kind=".into()))?;
        let params = params.unwrap_or_default();
        let want = match kind.as_str() {
            "constant" => 1,
            "affine" | "affine2" => 3,
            "radialq" => 4,
            "exp" => 2,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown coefficient kind '{other}'"
                )))
            }
        };
        if params.len() != want {
            return Err(Error::InvalidInput(format!(
                "kind {kind} takes {want} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient parameter".into()));
        }
        let p = &params;
        Ok(match kind.as_str() {
            "constant" => CoefficientField::Constant(p[0]),
            "affine" => CoefficientField::Affine { a: p[0], b: p[1], c: p[2] },
            "affine2" => CoefficientField::AffineSquared { a: p[0], b: p[1], c: p[2] },
            "radialq" => CoefficientField::RadialQuadratic {
                a: p[0],
                b: p[1],
                x0: p[2],
                y0: p[3],
            },
            _ => CoefficientField::Exponential { a: p[0], b: p[1] },
        })
    }
}

impl fmt::Display for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CoefficientField::Constant(c) => write!(f, "kind=constant params={c}"),
            CoefficientField::Affine { a, b, c } => write!(f, "kind=affine params={a},{b},{c}"),
            CoefficientField::AffineSquared { a, b, c } => {
                write!(f, "kind=affine2 params={a},{b},{c}")
            }
            CoefficientField::RadialQuadratic { a, b, x0, y0 } => {
                write!(f, "kind=radialq params={a},{b},{x0},{y0}")
            }
            CoefficientField::Exponential { a, b } => write!(f, "kind=exp params={a},{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let c = CoefficientField::parse("kind=radialq params=1,0.5,0.25,0.75").unwrap();
        assert_eq!(
            c,
            CoefficientField::RadialQuadratic { a: 1.0, b: 0.5, x0: 0.25, y0: 0.75 }
        );
        assert_eq!(CoefficientField::parse(&c.to_string()).unwrap(), c);
        assert!(CoefficientField::parse("kind=affine params=1,2").is_err());
        assert!(CoefficientField::parse("kind=cubic params=1").is_err());
    }

    #[test]
    fn positivity() {
        let d = Domain::unit_square();
        assert!(CoefficientField::Affine { a: 1.0, b: 1.0, c: 0.0 }.check_positive(&d).is_ok());
        assert!(CoefficientField::Affine { a: 0.5, b: -1.0, c: 0.0 }.check_positive(&d).is_err());
        assert!(CoefficientField::AffineSquared { a: 1.0, b: 1.0, c: 0.0 }
            .check_positive(&d)
            .is_ok());
        assert!(CoefficientField::AffineSquared { a: -0.5, b: 1.0, c: 0.0 }
            .check_positive(&d)
            .is_err());
        assert!(CoefficientField::RadialQuadratic { a: 1.0, b: -1.0, x0: 0.0, y0: 0.0 }
            .check_positive(&d)
            .is_err());
    }

    fn any_field() -> impl Strategy<Value = CoefficientField> {
        prop_oneof![
            (-2.0..2.0f64).prop_map(CoefficientField::Constant),
            (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
                .prop_map(|(a, b, c)| CoefficientField::Affine { a, b, c }),
            (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
                .prop_map(|(a, b, c)| CoefficientField::AffineSquared { a, b, c }),
            (-2.0..2.0f64, -2.0..2.0f64, -1.0..2.0f64, -1.0..2.0f64)
                .prop_map(|(a, b, x0, y0)| CoefficientField::RadialQuadratic { a, b, x0, y0 }),
            (0.1..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| CoefficientField::Exponential { a, b }),
        ]
    }

    proptest! {
        #[test]
        fn range_brackets_samples(field in any_field(), sx in 0.0..1.0f64, sy in 0.0..1.0f64) {
            let bbox = Domain::unit_square().bbox();
            let (lo, hi) = field.range_over(&bbox);
            let v = field.eval(Point::new(sx, sy));
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
