//! Text descriptors for bodies, regions, matrices and counts.

use anyhow::{anyhow, bail, Context, Result};
use crofton_core::convex::ConvexBody;
use crofton_core::grassmann::Region;

pub const BODY_HELP: &str = "supported bodies: disk, ball [r], square [s], segment <x> <y> [<z>], \
ellipse <a> <b>, ellipsoid <a> <b> <c>, sums like 'disk + segment 1 0', scaled terms like '2*disk', @file.json";

pub const REGION_HELP: &str = "supported regions: unit-square, unit-cube, segment <x> <y> [<z>], \
parallelotope <edge>; <edge>[; ...], polygon <x> <y>; <x> <y>; ..., @file.json";

fn numbers(words: &[&str]) -> Result<Vec<f64>> {
    words
        .iter()
        .map(|w| w.parse::<f64>().map_err(|_| anyhow!("'{w}' is not a number")))
        .collect()
}

/// Sample counts such as `1000`, `1e6` or `1_000_000`.
pub fn parse_count(s: &str) -> Result<u64> {
    let t = s.trim().replace('_', "");
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = t.parse().map_err(|_| anyhow!("'{s}' is not a count"))?;
    if !(x >= 0.0) || x.fract() != 0.0 || x > 1e15 {
        bail!("'{s}' is not a non-negative integer count");
    }
    Ok(x as u64)
}

/// Rows separated by `;`, entries by whitespace or `,`.
pub fn parse_rows(s: &str) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| numbers(&r.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        bail!("empty matrix '{s}'");
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        bail!("rows of '{s}' have different lengths");
    }
    Ok(rows)
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(|w| w.parse::<usize>().map_err(|_| anyhow!("'{w}' is not a dimension")))
        .collect()
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    numbers(&s.split(|c: char| c == ',' || c.is_whitespace()).filter(|w| !w.is_empty()).collect::<Vec<_>>())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {path}"))
}

fn parse_term(term: &str, dim: usize) -> Result<ConvexBody> {
    let term = term.trim();
    if let Some((coef, rest)) = term.split_once('*') {
        let c: f64 = coef.trim().parse().map_err(|_| anyhow!("bad coefficient in '{term}'"))?;
        if !(c >= 0.0) {
            bail!("coefficient in '{term}' must be non-negative");
        }
        return Ok(ConvexBody::sum(vec![(c, parse_term(rest, dim)?)]));
    }
    if let Some(path) = term.strip_prefix('@') {
        return Ok(read_json(path.trim())?);
    }
    let words: Vec<&str> = term.split_whitespace().collect();
    let Some((head, args)) = words.split_first() else { bail!("empty body descriptor") };
    let args = numbers(args)?;
    let body = match (head.to_ascii_lowercase().as_str(), args.as_slice()) {
        ("disk", []) => ConvexBody::ball(2, 1.0),
        ("disk", [r]) => ConvexBody::ball(2, *r),
        ("ball", []) => ConvexBody::ball(dim, 1.0),
        ("ball", [r]) => ConvexBody::ball(dim, *r),
        ("square", []) => ConvexBody::zonotope(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        ("square", [s]) => ConvexBody::zonotope(vec![vec![*s, 0.0], vec![0.0, *s]]),
        ("segment", v) if v.len() >= 2 => ConvexBody::segment(v),
        ("ellipse", [a, b]) => ConvexBody::diagonal_ellipsoid(&[a * a, b * b])?,
        ("ellipsoid", [a, b, c]) => ConvexBody::diagonal_ellipsoid(&[a * a, b * b, c * c])?,
        _ => bail!("unknown body '{term}'; {BODY_HELP}"),
    };
    Ok(body)
}

/// One body; `dim` is used only for `ball` without an explicit dimension.
pub fn parse_body(s: &str, dim: usize) -> Result<ConvexBody> {
    let terms: Vec<&str> = s.split('+').map(str::trim).collect();
    let body = if terms.len() == 1 {
        parse_term(terms[0], dim)?
    } else {
        ConvexBody::sum(terms.iter().map(|t| Ok((1.0, parse_term(t, dim)?))).collect::<Result<_>>()?)
    };
    body.validate().map_err(|e| anyhow!("body '{s}': {e}"))?;
    Ok(body)
}

pub fn parse_bodies(s: &str, dim: usize) -> Result<Vec<ConvexBody>> {
    let bodies: Vec<ConvexBody> =
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| parse_body(t, dim)).collect::<Result<_>>()?;
    if bodies.is_empty() {
        bail!("no bodies given; {BODY_HELP}");
    }
    Ok(bodies)
}

pub fn parse_region(s: &str) -> Result<Region> {
    let t = s.trim();
    if let Some(path) = t.strip_prefix('@') {
        return read_json(path.trim());
    }
    let (head, rest) = t.split_once(char::is_whitespace).unwrap_or((t, ""));
    let region = match head.to_ascii_lowercase().as_str() {
        "unit-square" if rest.trim().is_empty() => Region::unit_square(),
        "unit-cube" if rest.trim().is_empty() => Region::Parallelotope {
            origin: vec![-0.5; 3],
            edges: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        },
        "segment" => {
            let v = parse_f64_list(rest)?;
            Region::segment(vec![0.0; v.len()], v)
        }
        "parallelotope" => {
            let edges = parse_rows(rest)?;
            Region::Parallelotope { origin: vec![0.0; edges[0].len()], edges }
        }
        "polygon" => {
            let rows = parse_rows(rest)?;
            if rows[0].len() != 2 {
                bail!("polygon vertices must be points in the plane");
            }
            Region::Polygon { vertices: rows.into_iter().map(|r| [r[0], r[1]]).collect() }
        }
        _ => bail!("unknown region '{s}'; {REGION_HELP}"),
    };
    Ok(region)
}
