//! Discrete plug-in measures `ρₙ = Σᵢ ηᵢ δ_{xᵢ}`.
//!
//! No extra `1/n` is applied on top of the weights: i.i.d. samples carry
//! `ηᵢ = 1/n`, Riemann grids carry `ηᵢ = p(xᵢ)·v` with `v` the cell volume.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{ensure_finite, invalid, Error, Result};

/// Points in `ℝ^d` with nonnegative weights. Points are pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    coords: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

fn coord_key(x: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 compare equal and must merge
    x.iter().map(|&v| if v == 0.0 { 0 } else { v.to_bits() }).collect()
}

impl WeightedSample {
    /// Builds a sample, merging exactly coincident points by summing weights.
    /// The first occurrence of each point fixes its position in the output.
    pub fn new(points: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(invalid("points", "zero-dimensional points"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut merged: Vec<f64> = Vec::with_capacity(points.len());
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(points.len());
        for (x, &w) in points.iter().zip(weights) {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            ensure_finite(x, "sample point")?;
            if !w.is_finite() {
                return Err(Error::NonFinite { context: "sample weight" });
            }
            if w < 0.0 {
                return Err(invalid("weights", format!("negative weight {w}")));
            }
            match seen.get(&coord_key(x)) {
                Some(&j) => merged[j] += w,
                None => {
                    seen.insert(coord_key(x), merged.len());
                    merged.push(w);
                    coords.extend_from_slice(x);
                }
            }
        }
        Ok(Self {
            coords,
            weights: merged,
            dim,
        })
    }

    /// Monte Carlo measure: every point gets weight `1/n` before merging.
    pub fn from_iid_sample(points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        let w = 1.0 / points.len() as f64;
        Self::new(points, &vec![w; points.len()])
    }

    /// Riemann measure on a lattice: `ηᵢ = p(xᵢ)·v`. Nodes where `p = 0` keep
    /// a zero weight.
    pub fn riemann_from_density<F>(grid: &Lattice, density: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let v = grid.cell_volume();
        let nodes = grid.nodes();
        let mut weights = Vec::with_capacity(nodes.len());
        for (index, x) in nodes.iter().enumerate() {
            let value = density(x);
            if value.is_nan() || value < 0.0 {
                return Err(Error::NegativeDensity { index, value });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite { context: "density value" });
            }
            weights.push(value * v);
        }
        Self::new(&nodes, &weights)
    }

    /// Reads a CSV with header `x1,..,xd[,weight]`. Without a weight column
    /// the weights are uniform `1/n`.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let table = read_points_csv(path)?;
        match table.weights {
            Some(w) => Self::new(&table.points, &w),
            None => Self::from_iid_sample(&table.points),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σᵢ ηᵢ`.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ f² dρₙ`.
    pub fn quadratic_form<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.points()
            .zip(&self.weights)
            .map(|(x, w)| {
                let v = f(x);
                w * v * v
            })
            .sum()
    }
}

/// Rows of a point CSV, in file order, before any merging.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTable {
    pub points: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

/// Parses a CSV whose header is `x1,..,xd` with an optional trailing
/// `weight` column. Numbers use a decimal point and no grouping. Errors
/// name the offending line.
pub fn read_points_csv(path: impl AsRef<Path>) -> Result<PointTable> {
    let path = path.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => parse_err(1, format!("{other:?}")),
        })?;
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let has_weight = names.last() == Some(&"weight");
    let dim = names.len() - usize::from(has_weight);
    if dim == 0 {
        return Err(parse_err(1, "header names no coordinate columns".into()));
    }
    for (j, name) in names[..dim].iter().enumerate() {
        if *name != format!("x{}", j + 1) {
            return Err(parse_err(1, format!("expected column `x{}`, found `{name}`", j + 1)));
        }
    }

    let mut points = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != names.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        let mut row = Vec::with_capacity(names.len());
        for (field, name) in record.iter().zip(&names) {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("column `{name}`: `{field}` is not a finite number")))?;
            row.push(v);
        }
        if has_weight {
            let w = row.pop().expect("weight column");
            if w < 0.0 {
                return Err(parse_err(line, format!("negative weight {w}")));
            }
            weights.push(w);
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(PointTable {
        points,
        weights: has_weight.then_some(weights),
    })
}

/// An axis-aligned lattice of cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    axes: Vec<(f64, f64, usize)>,
}

impl Lattice {
    /// `counts[j]` cells of equal width on `[lo[j], hi[j]]`, one node per cell center.
    pub fn new(axes: Vec<(f64, f64, usize)>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("lattice", "no axes"));
        }
        for &(lo, hi, m) in &axes {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid("lattice", format!("bad interval [{lo}, {hi}]")));
            }
            if m == 0 {
                return Err(invalid("lattice", "zero cells along an axis"));
            }
        }
        Ok(Self { axes })
    }

    /// The same `m`-cell axis on `[lo, hi]` in each of `dim` coordinates.
    pub fn cube(lo: f64, hi: f64, m: usize, dim: usize) -> Result<Self> {
        Self::new(vec![(lo, hi, m); dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.2).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|&(lo, hi, m)| (hi - lo) / m as f64).product()
    }

    /// Nodes in row-major order, last coordinate fastest.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let ticks: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|&(lo, hi, m)| {
                let h = (hi - lo) / m as f64;
                (0..m).map(|i| lo + (i as f64 + 0.5) * h).collect()
            })
            .collect();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; ticks.len()];
        loop {
            out.push(idx.iter().zip(&ticks).map(|(&i, t)| t[i]).collect());
            let mut j = ticks.len();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < ticks[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(name: &str, body: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("christoffel-measure-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn iid_weights_are_uniform() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0], vec![5.0]];
        let s = WeightedSample::from_iid_sample(&pts).unwrap();
        assert_eq!(s.weights(), &[0.25; 4]);
        let one = WeightedSample::from_iid_sample(&[vec![3.0, 1.0]]).unwrap();
        assert_eq!(one.weights(), &[1.0]);
        assert!(matches!(WeightedSample::from_iid_sample(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn duplicates_merge() {
        let pts = vec![vec![0.5, 1.0], vec![2.0, 0.0], vec![0.5, 1.0]];
        let s = WeightedSample::from_iid_sample(&pts).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        let f = |x: &[f64]| x[0].sin() + 3.0 * x[1];
        let raw: f64 = pts.iter().map(|x| f(x).powi(2) / 3.0).sum();
        assert!((s.quadratic_form(f) - raw).abs() < 1e-14);

        let z = WeightedSample::from_iid_sample(&[vec![0.0], vec![-0.0]]).unwrap();
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(WeightedSample::new(&[vec![0.0]], &[-1.0]).is_err());
        assert!(WeightedSample::new(&[vec![0.0]], &[f64::NAN]).is_err());
        assert!(WeightedSample::new(&[vec![f64::INFINITY]], &[1.0]).is_err());
        assert!(WeightedSample::new(&[vec![0.0], vec![1.0, 2.0]], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn riemann_unit_density() {
        let grid = Lattice::cube(-1.0, 1.0, 2, 1).unwrap();
        let s = WeightedSample::riemann_from_density(&grid, |_| 1.0).unwrap();
        assert_eq!(s.point(0), &[-0.5]);
        assert_eq!(s.point(1), &[0.5]);
        assert_eq!(s.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn riemann_keeps_zero_weights() {
        let grid = Lattice::cube(-1.0, 1.0, 10, 1).unwrap();
        let s = WeightedSample::riemann_from_density(&grid, |x| if x[0] < 0.0 { 0.0 } else { 2.0 }).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.weights()[..5].iter().all(|&w| w == 0.0));
        assert!(s.weights()[5..].iter().all(|&w| w > 0.0));
    }

    #[test]
    fn riemann_negative_density_names_node() {
        let grid = Lattice::cube(0.0, 1.0, 4, 1).unwrap();
        let err = WeightedSample::riemann_from_density(&grid, |x| if x[0] > 0.6 { -1.0 } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NegativeDensity { index: 2, .. }));
    }

    #[test]
    fn lattice_row_major() {
        let g = Lattice::cube(0.0, 2.0, 2, 2).unwrap();
        assert_eq!(
            g.nodes(),
            vec![vec![0.5, 0.5], vec![0.5, 1.5], vec![1.5, 0.5], vec![1.5, 1.5]]
        );
        assert_eq!(g.cell_volume(), 1.0);
    }

    #[test]
    fn csv_without_weights() {
        let p = write_tmp("a.csv", "x1\n0.0\n1.0\n");
        let s = WeightedSample::load_csv(&p).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn csv_with_weights() {
        let p = write_tmp("b.csv", "x1,x2,weight\n0.0,1.0,0.2\n1.0,1.0,0.8\n");
        let s = WeightedSample::load_csv(&p).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.weights(), &[0.2, 0.8]);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let p = write_tmp("c.csv", "x1\nabc\n");
        match WeightedSample::load_csv(&p).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        let p = write_tmp("d.csv", "x1,x2\n0,1\n2\n");
        match WeightedSample::load_csv(&p).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let p = write_tmp("e.csv", "x1,weight\n0,1\n1,-0.5\n");
        match WeightedSample::load_csv(&p).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let p = write_tmp("f.csv", "y1\n0\n");
        assert!(matches!(WeightedSample::load_csv(&p), Err(Error::Parse { line: 1, .. })));
    }
}
