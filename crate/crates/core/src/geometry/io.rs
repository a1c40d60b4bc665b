//! Plain-text formats for domains and networks.
//!
//! Domain files hold one `outer:` line and any number of `hole:` lines, each
//! followed by whitespace-separated coordinates `x0 y0 x1 y1 ...`. Network
//! files hold `v <x> <y>` lines followed by `e <i> <j>` lines with 0-based
//! vertex indices. Blank lines and `#` comments are ignored in both.

use std::fmt::Write as _;

use super::domain::Domain;
use super::network::SigmaNetwork;
use super::primitives::Point;
use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("'{tok}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("'{tok}' is not finite")));
    }
    Ok(v)
}

fn parse_polygon(line: usize, body: &str) -> Result<Vec<Point>> {
    let coords = body
        .split_whitespace()
        .map(|t| parse_f64(line, t))
        .collect::<Result<Vec<_>>>()?;
    if coords.len() % 2 != 0 {
        return Err(Error::parse(line, "odd number of coordinates"));
    }
    if coords.len() < 6 {
        return Err(Error::parse(line, "a polygon needs at least three vertices"));
    }
    Ok(coords.chunks(2).map(|c| Point::new(c[0], c[1])).collect())
}

pub fn parse_domain(text: &str) -> Result<Domain> {
    let mut outer = None;
    let mut holes = Vec::new();
    for (no, line) in content_lines(text) {
        if let Some(body) = line.strip_prefix("outer:") {
            if outer.is_some() {
                return Err(Error::parse(no, "second outer boundary"));
            }
            outer = Some(parse_polygon(no, body)?);
        } else if let Some(body) = line.strip_prefix("hole:") {
            holes.push(parse_polygon(no, body)?);
        } else {
            return Err(Error::parse(no, format!("expected 'outer:' or 'hole:', got '{line}'")));
        }
    }
    let outer = outer.ok_or_else(|| Error::parse(0, "missing outer boundary"))?;
    Domain::new(outer, holes)
}

fn push_polygon(out: &mut String, tag: &str, poly: &[Point]) {
    out.push_str(tag);
    for p in poly {
        let _ = write!(out, " {} {}", p.x, p.y);
    }
    out.push('\n');
}

pub fn format_domain(domain: &Domain) -> String {
    let mut out = String::new();
    push_polygon(&mut out, "outer:", domain.outer());
    for h in domain.holes() {
        push_polygon(&mut out, "hole:", h);
    }
    out
}

pub fn parse_sigma(text: &str) -> Result<SigmaNetwork> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (no, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["v", x, y] => {
                if !edges.is_empty() {
                    return Err(Error::parse(no, "vertex after the first edge"));
                }
                vertices.push(Point::new(parse_f64(no, x)?, parse_f64(no, y)?));
            }
            ["e", i, j] => {
                let idx = |t: &str| -> Result<usize> {
                    let k: usize = t
                        .parse()
                        .map_err(|_| Error::parse(no, format!("'{t}' is not an index")))?;
                    if k >= vertices.len() {
                        return Err(Error::parse(no, format!("vertex {k} does not exist")));
                    }
                    Ok(k)
                };
                let (a, b) = (idx(i)?, idx(j)?);
                if a == b {
                    return Err(Error::parse(no, "edge joins a vertex to itself"));
                }
                edges.push((a, b));
            }
            _ => return Err(Error::parse(no, format!("expected 'v x y' or 'e i j', got '{line}'"))),
        }
    }
    if vertices.is_empty() {
        return Err(Error::parse(0, "network has no vertices"));
    }
    SigmaNetwork::new(vertices, edges)
}

pub fn format_sigma(sigma: &SigmaNetwork) -> String {
    let mut out = String::new();
    for v in sigma.vertices() {
        let _ = writeln!(out, "v {} {}", v.x, v.y);
    }
    for (i, j) in sigma.edges() {
        let _ = writeln!(out, "e {i} {j}");
    }
    out
}
