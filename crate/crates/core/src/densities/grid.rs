//! Piecewise-constant densities on regular grids, and the plain-text raster
//! format used to load them.
//!
//! File format (comma separated, `#` starts a comment line):
//!
//! ```text
//! n,2
//! lo,-1,-1
//! hi,1,1
//! resolution,64,64
//! values
//! 0.25,0.25,...
//! ```
//!
//! Values follow in row-major order, the first coordinate varying slowest;
//! any number of values per line is accepted. Values are cell averages and
//! are renormalised to unit mass on load.

use rand::Rng;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridData {
    pub fn new(
        lo: Vec<f64>,
        hi: Vec<f64>,
        resolution: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || hi.len() != dim || resolution.len() != dim {
            return Err(invalid("grid", "lo, hi and resolution must share one dimension"));
        }
        for k in 0..dim {
            if !(hi[k] > lo[k]) {
                return Err(invalid("grid.hi", format!("hi[{k}] must exceed lo[{k}]")));
            }
            if resolution[k] == 0 {
                return Err(invalid("grid.resolution", "resolution must be positive"));
            }
        }
        let cells: usize = resolution.iter().product();
        if values.len() != cells {
            return Err(invalid(
                "grid.values",
                format!("expected {cells} values, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("grid.values", "values must be finite and nonnegative"));
        }
        Ok(Self {
            dim,
            lo,
            hi,
            resolution,
            values,
        })
    }

    pub fn cell_width(&self, k: usize) -> f64 {
        (self.hi[k] - self.lo[k]) / self.resolution[k] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.cell_width(k)).product()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(invalid("grid.values", "grid has zero mass"));
        }
        self.values.iter_mut().for_each(|v| *v /= m);
        Ok(self)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            idx[k] = flat % self.resolution[k];
            flat /= self.resolution[k];
        }
        idx
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + (i as f64 + 0.5) * self.cell_width(k))
            .collect()
    }

    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0;
        for k in 0..self.dim {
            let r = (x[k] - self.lo[k]) / self.cell_width(k);
            if !(r >= 0.0) || r >= self.resolution[k] as f64 {
                return None;
            }
            flat = flat * self.resolution[k] + r as usize;
        }
        Some(flat)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.locate(x).map_or(0.0, |i| self.values[i])
    }

    /// Largest distance from the origin to a point of the box.
    pub fn support_radius(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.lo[k].abs().max(self.hi[k].abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, cumulative: &[f64]) -> Vec<f64> {
        let total = *cumulative.last().unwrap();
        let target = rng.gen::<f64>() * total;
        let cell = cumulative.partition_point(|&c| c <= target).min(self.values.len() - 1);
        let idx = self.multi_index(cell);
        (0..self.dim)
            .map(|k| self.lo[k] + (idx[k] as f64 + rng.gen::<f64>()) * self.cell_width(k))
            .collect()
    }

    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.values
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect()
    }

    pub fn same_lattice(&self, other: &GridData) -> bool {
        self.dim == other.dim
            && self.resolution == other.resolution
            && self.lo == other.lo
            && self.hi == other.hi
    }
}

fn parse_nums<T: std::str::FromStr>(fields: &[&str], what: &str) -> Result<Vec<T>> {
    fields
        .iter()
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("bad {what} entry `{}`", s.trim())))
        })
        .collect()
}

/// Parse the raster format described in the module docs.
pub fn parse_grid(text: &str) -> Result<GridData> {
    let mut n: Option<usize> = None;
    let mut lo = None;
    let mut hi = None;
    let mut res = None;
    let mut values: Vec<f64> = Vec::new();
    let mut in_values = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').filter(|s| !s.trim().is_empty()).collect();
        if in_values {
            values.extend(parse_nums::<f64>(&fields, "value")?);
            continue;
        }
        match fields[0].trim() {
            "n" => n = parse_nums::<usize>(&fields[1..], "n")?.first().copied(),
            "lo" => lo = Some(parse_nums::<f64>(&fields[1..], "lo")?),
            "hi" => hi = Some(parse_nums::<f64>(&fields[1..], "hi")?),
            "resolution" => res = Some(parse_nums::<usize>(&fields[1..], "resolution")?),
            "values" => in_values = true,
            other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing `n` header".into()))?;
    let lo = lo.ok_or_else(|| Error::Parse("missing `lo` header".into()))?;
    let hi = hi.ok_or_else(|| Error::Parse("missing `hi` header".into()))?;
    let res = res.ok_or_else(|| Error::Parse("missing `resolution` header".into()))?;
    if lo.len() != n || hi.len() != n || res.len() != n {
        return Err(Error::Parse(format!("header vectors must have {n} entries")));
    }
    GridData::new(lo, hi, res, values)?.normalized()
}

pub fn load_grid(path: &std::path::Path) -> Result<GridData> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_grid(&text)
}

pub fn format_grid(g: &GridData) -> String {
    let join = |v: &[String]| v.join(",");
    let mut out = String::new();
    out.push_str(&format!("n,{}\n", g.dim));
    out.push_str(&format!("lo,{}\n", join(&g.lo.iter().map(|v| v.to_string()).collect::<Vec<_>>())));
    out.push_str(&format!("hi,{}\n", join(&g.hi.iter().map(|v| v.to_string()).collect::<Vec<_>>())));
    out.push_str(&format!(
        "resolution,{}\n",
        join(&g.resolution.iter().map(|v| v.to_string()).collect::<Vec<_>>())
    ));
    out.push_str("values\n");
    let row = *g.resolution.last().unwrap();
    for chunk in g.values.chunks(row) {
        out.push_str(&join(&chunk.iter().map(|v| v.to_string()).collect::<Vec<_>>()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_normalisation() {
        let g = GridData::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![2, 2], vec![1.0, 2.0, 3.0, 4.0])
            .unwrap()
            .normalized()
            .unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-14);
        let back = parse_grid(&format_grid(&g)).unwrap();
        assert_eq!(back.resolution, g.resolution);
        for (a, b) in back.values.iter().zip(&g.values) {
            assert!((a - b).abs() < 1e-15);
        }
        // first coordinate slowest: cell (1, 0) holds the third value
        assert_eq!(g.eval(&[0.5, -0.5]), g.values[2]);
        assert_eq!(g.eval(&[1.5, 0.0]), 0.0);
    }

    #[test]
    fn parse_errors_name_the_problem() {
        assert!(matches!(parse_grid("n,2\nlo,0,0\n"), Err(Error::Parse(_))));
        let bad = "n,1\nlo,0\nhi,1\nresolution,3\nvalues\n1,2\n";
        assert!(matches!(parse_grid(bad), Err(Error::InvalidParameter { .. })));
        let neg = "n,1\nlo,0\nhi,1\nresolution,2\nvalues\n1,-2\n";
        assert!(parse_grid(neg).is_err());
        assert!(parse_grid("bogus,1\n").is_err());
    }
}
