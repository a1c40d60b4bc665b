//! Flat `key=value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use stiffrib::asymptotics::optimal_density;
use stiffrib::geometry::io::{parse_domain, parse_sigma};
use stiffrib::geometry::{
    build_comb, build_grid_structure, build_oblique_comb, build_tiled_sigma, fit_measure_to_grid, CoefficientField,
    DensityField, Domain, Point, SigmaNetwork,
};
use stiffrib::optimize::default_tile;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
enum Origin {
    Line(usize),
    Override,
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, (String, Origin)>,
    /// Directory of the config file; relative paths resolve against it.
    base: Option<PathBuf>,
}

fn split_pair(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then_some((k, v.trim()))
}

/// Parses a number, accepting `a/b` fractions and `inf`.
pub fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    if matches!(t, "inf" | "infinity" | "Inf") {
        return Some(f64::INFINITY);
    }
    if let Some((a, b)) = t.split_once('/') {
        let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
        return (b != 0.0).then_some(a / b);
    }
    t.parse().ok()
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_pair(line)
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got '{line}'", i + 1)))?;
            if values.insert(k.to_string(), (v.to_string(), Origin::Line(i + 1))).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key '{k}'", i + 1)));
            }
        }
        Ok(Config { values, base: None })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn apply_override(&mut self, text: &str) -> Result<(), CliError> {
        let (k, v) =
            split_pair(text).ok_or_else(|| CliError::Usage(format!("override '{text}' is not key=value")))?;
        self.values.insert(k.to_string(), (v.to_string(), Origin::Override));
        Ok(())
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (k, (_, origin)) in &self.values {
            if !allowed.contains(&k.as_str()) {
                return Err(self.error_at(origin, format!("unknown key '{k}' (allowed: {})", allowed.join(", "))));
            }
        }
        Ok(())
    }

    fn error_at(&self, origin: &Origin, msg: String) -> CliError {
        match origin {
            Origin::Line(n) => CliError::Usage(format!("config line {n}: {msg}")),
            Origin::Override => CliError::Usage(format!("override: {msg}")),
        }
    }

    fn bad(&self, key: &str, msg: impl Into<String>) -> CliError {
        let (value, origin) = &self.values[key];
        self.error_at(origin, format!("{key}={value}: {}", msg.into()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let p = PathBuf::from(self.get(key)?);
        Some(match &self.base {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_number(v).ok_or_else(|| self.bad(key, "not a number")),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|_| self.f64_or(key, 0.0)).transpose()
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.bad(key, "must be positive and finite"))
        }
    }

    pub fn integer<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| self.bad(key, "not a non-negative integer")),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|t| parse_number(t).ok_or_else(|| self.bad(key, format!("'{}' is not a number", t.trim()))))
                .collect(),
        }
    }

    pub fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| self.bad(key, format!("'{}' is not an integer", t.trim()))))
                .collect(),
        }
    }

    /// Exponent `p`: `1`, a number above one, or `inf`.
    pub fn exponent(&self, default: f64) -> Result<f64, CliError> {
        let p = self.f64_or("p", default)?;
        if p >= 1.0 {
            Ok(p)
        } else {
            Err(self.bad("p", "must be 1, greater than 1, or inf"))
        }
    }

    pub fn coefficient(&self, key: &str) -> Result<CoefficientField, CliError> {
        match self.get(key) {
            None => Ok(CoefficientField::Constant(1.0)),
            Some(v) => match parse_number(v) {
                Some(c) => Ok(CoefficientField::Constant(c)),
                None => CoefficientField::parse(v).map_err(|e| self.bad(key, e.to_string())),
            },
        }
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        match self.path("domain") {
            None => Ok(Domain::unit_square()),
            Some(path) => {
                let text = fs::read_to_string(&path)
                    .map_err(|e| CliError::Usage(format!("cannot read domain {}: {e}", path.display())))?;
                parse_domain(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
            }
        }
    }

    /// The network from the `sigma` key: a generator spec or a file path.
    /// Without the key the network is the lowest-leftmost domain vertex.
    pub fn sigma(&self, domain: &Domain, p: f64) -> Result<SigmaNetwork, CliError> {
        let Some(spec) = self.get("sigma") else {
            let corner = domain
                .outer()
                .iter()
                .copied()
                .min_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
                .expect("domains have vertices");
            return Ok(SigmaNetwork::point(corner));
        };
        if let Some(sigma) = self.generator(spec, domain, p)? {
            return Ok(sigma);
        }
        let path = self.path("sigma").expect("key is present");
        let text = fs::read_to_string(&path)
            .map_err(|e| self.bad("sigma", format!("not a generator and unreadable as a file: {e}")))?;
        parse_sigma(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    fn generator(&self, spec: &str, domain: &Domain, p: f64) -> Result<Option<SigmaNetwork>, CliError> {
        let parts: Vec<&str> = spec.split(':').collect();
        let count = |t: &str| -> Result<usize, CliError> {
            match t.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(self.bad("sigma", format!("'{t}' is not a positive integer"))),
            }
        };
        let num = |t: &str| parse_number(t).ok_or_else(|| self.bad("sigma", format!("'{t}' is not a number")));
        let sigma = match parts.as_slice() {
            ["comb", n] => build_comb(count(n)?),
            ["grid", n] => build_grid_structure(count(n)?),
            ["oblique", n, angle] => build_oblique_comb(count(n)?, num(angle)?),
            ["point", x, y] => SigmaNetwork::point(Point::new(num(x)?, num(y)?)),
            ["tiled", l, s] => {
                let density = if p.is_finite() && p > 1.0 {
                    optimal_density(&self.coefficient("rho")?, &self.coefficient("sigma_coef")?, p, domain)
                        .map_err(CliError::from)?
                } else {
                    DensityField::uniform(domain)
                };
                let fitted = fit_measure_to_grid(&density, num(s)?, domain)?;
                build_tiled_sigma(num(l)?, &fitted, &default_tile(), domain)?
            }
            [kind, ..] if matches!(*kind, "comb" | "grid" | "oblique" | "point" | "tiled") => {
                return Err(self.bad(
                    "sigma",
                    "generators are comb:n, grid:n, oblique:n:angle, point:x:y, tiled:L:s",
                ))
            }
            _ => return Ok(None),
        };
        Ok(Some(sigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/128"), Some(1.0 / 128.0));
        assert_eq!(parse_number(" 2.5 "), Some(2.5));
        assert_eq!(parse_number("inf"), Some(f64::INFINITY));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("x"), None);
    }

    #[test]
    fn file_then_overrides() {
        let mut c = Config::parse("# comment\np = 3\n\nh=1/64 # trailing\n").unwrap();
        assert_eq!(c.f64_or("p", 2.0).unwrap(), 3.0);
        c.apply_override("p=inf").unwrap();
        assert_eq!(c.exponent(2.0).unwrap(), f64::INFINITY);
        assert_eq!(c.f64_or("h", 0.0).unwrap(), 1.0 / 64.0);
        assert_eq!(c.f64_or("missing", 7.0).unwrap(), 7.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Config::parse("p=2\nnonsense\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let c = Config::parse("\nh=abc\n").unwrap();
        assert!(c.f64_or("h", 1.0).unwrap_err().to_string().contains("line 2"));
        assert!(c.check_keys(&["p"]).unwrap_err().to_string().contains("unknown key 'h'"));
        assert!(Config::parse("a=1\na=2").is_err());
    }

    #[test]
    fn generators() {
        let d = Domain::unit_square();
        let sigma = |spec: &str| {
            let mut c = Config::default();
            c.apply_override(&format!("sigma={spec}")).unwrap();
            c.sigma(&d, 2.0)
        };
        assert_eq!(sigma("comb:4").unwrap(), build_comb(4));
        assert_eq!(sigma("grid:2").unwrap(), build_grid_structure(2));
        assert!((sigma("oblique:3:0.7").unwrap().length() - build_oblique_comb(3, 0.7).length()).abs() < 1e-12);
        assert_eq!(sigma("point:0.5:0").unwrap().length(), 0.0);
        assert!(sigma("tiled:60:0.5").unwrap().length() <= 60.0);
        assert!(sigma("comb:0").is_err());
        assert!(sigma("grid").is_err());
        assert!(sigma("/no/such/file").is_err());
        assert_eq!(Config::default().sigma(&d, 2.0).unwrap(), SigmaNetwork::point(Point::new(0.0, 0.0)));
    }

    #[test]
    fn coefficients() {
        let mut c = Config::default();
        c.apply_override("rho=kind=affine params=1,1,0").unwrap();
        c.apply_override("sigma_coef=2").unwrap();
        assert_eq!(c.coefficient("rho").unwrap(), CoefficientField::Affine { a: 1.0, b: 1.0, c: 0.0 });
        assert_eq!(c.coefficient("sigma_coef").unwrap(), CoefficientField::Constant(2.0));
        c.apply_override("rho=kind=cubic").unwrap();
        assert!(c.coefficient("rho").is_err());
    }
}
