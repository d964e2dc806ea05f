//! Coordinate charts: dimension, ordered coordinate names, a rectangular
//! domain, per-coordinate periodicity and an orientation sign.
//!
//! Sampling is a deterministic tensor grid. Non-periodic coordinates keep an
//! interior margin of 5% of the box on each side; periodic coordinates are
//! sampled uniformly on `[a, b)` so the seam is never duplicated.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::GeomError;

const INTERIOR_MARGIN: f64 = 0.05;

#[derive(Debug)]
pub struct Chart {
    coords: Vec<Arc<str>>,
    domain: Vec<(f64, f64)>,
    periodic: Vec<bool>,
    orientation: i8,
}

pub type ChartRef = Arc<Chart>;

impl Chart {
    pub fn new(
        coords: Vec<&str>,
        domain: Vec<(f64, f64)>,
        periodic: Vec<bool>,
        orientation: i8,
    ) -> Result<ChartRef, GeomError> {
        let names: Vec<Arc<str>> = coords.iter().map(|s| Arc::from(*s)).collect();
        if names.is_empty() {
            return Err(GeomError::InvalidChart("chart must have dimension >= 1".into()));
        }
        if names.len() != domain.len() || names.len() != periodic.len() {
            return Err(GeomError::InvalidChart(
                "coords, domain and periodic lists must have equal length".into(),
            ));
        }
        for i in 0..names.len() {
            for j in (i + 1)..names.len() {
                if names[i] == names[j] {
                    return Err(GeomError::InvalidChart(format!(
                        "duplicate coordinate name `{}`",
                        names[i]
                    )));
                }
            }
        }
        for (i, &(a, b)) in domain.iter().enumerate() {
            if !(a < b) {
                return Err(GeomError::InvalidChart(format!(
                    "domain of `{}` must satisfy a < b (got [{a}, {b}])",
                    names[i]
                )));
            }
        }
        if orientation != 1 && orientation != -1 {
            return Err(GeomError::InvalidChart("orientation must be +1 or -1".into()));
        }
        Ok(Arc::new(Chart {
            coords: names,
            domain,
            periodic,
            orientation,
        }))
    }

    /// Euclidean box with all coordinates on `[-1, 1]`, orientation +1.
    pub fn euclidean(coords: Vec<&str>) -> ChartRef {
        let n = coords.len();
        Chart::new(coords, vec![(-1.0, 1.0); n], vec![false; n], 1).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Arc<str>] {
        &self.coords
    }

    pub fn coord_name(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c.as_ref() == name)
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn is_periodic(&self, i: usize) -> bool {
        self.periodic[i]
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    /// New chart extended by one trailing coordinate (used for products
    /// with a line or a circle factor).
    pub fn extend(
        &self,
        name: &str,
        range: (f64, f64),
        periodic: bool,
    ) -> Result<ChartRef, GeomError> {
        let mut coords: Vec<&str> = self.coords.iter().map(|c| c.as_ref()).collect();
        coords.push(name);
        let mut domain = self.domain.clone();
        domain.push(range);
        let mut per = self.periodic.clone();
        per.push(periodic);
        Chart::new(coords, domain, per, self.orientation)
    }

    /// Per-axis sample positions for `points_per_axis` grid points.
    fn axis_samples(&self, i: usize, points_per_axis: usize) -> Vec<f64> {
        let (a, b) = self.domain[i];
        let p = points_per_axis.max(1);
        if self.periodic[i] {
            let step = (b - a) / p as f64;
            return (0..p).map(|k| a + k as f64 * step).collect();
        }
        let margin = INTERIOR_MARGIN * (b - a);
        let (lo, hi) = (a + margin, b - margin);
        if p == 1 {
            return vec![0.5 * (lo + hi)];
        }
        let step = (hi - lo) / (p - 1) as f64;
        (0..p).map(|k| lo + k as f64 * step).collect()
    }

    /// Deterministic tensor grid over the (margined) domain.
    pub fn grid(&self, points_per_axis: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| self.axis_samples(i, points_per_axis))
            .collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim()];
        for _ in 0..total {
            out.push(idx.iter().enumerate().map(|(i, &k)| axes[i][k]).collect());
            for i in (0..self.dim()).rev() {
                idx[i] += 1;
                if idx[i] < axes[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
        out
    }

    /// Seeded uniform interior points, used to certify construction-time
    /// invariants (symmetry tags, torsion flags, duality certificates).
    pub fn seeded_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                (0..self.dim())
                    .map(|i| {
                        let (a, b) = self.domain[i];
                        let margin = if self.periodic[i] { 0.0 } else { INTERIOR_MARGIN * (b - a) };
                        rng.gen_range((a + margin)..(b - margin))
                    })
                    .collect()
            })
            .collect()
    }
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
            && self.domain == other.domain
            && self.periodic == other.periodic
            && self.orientation == other.orientation
    }
}

/// Two fields must live on the same chart to be combined.
pub fn same_chart(a: &ChartRef, b: &ChartRef) -> Result<(), GeomError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(GeomError::ChartMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_respects_margin_and_periodicity() {
        let chart = Chart::new(
            vec!["t", "s"],
            vec![(-1.0, 1.0), (0.0, 4.0)],
            vec![false, true],
            1,
        )
        .unwrap();
        let grid = chart.grid(4);
        assert_eq!(grid.len(), 16);
        for pt in &grid {
            assert!(pt[0] >= -0.9 - 1e-12 && pt[0] <= 0.9 + 1e-12);
            assert!(pt[1] >= 0.0 && pt[1] < 4.0); // seam never duplicated
        }
        // periodic axis: evenly spaced, 0,1,2,3
        let mut s_vals: Vec<f64> = grid.iter().map(|p| p[1]).collect();
        s_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s_vals.dedup();
        assert_eq!(s_vals, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn grid_endpoint_hits_margined_bound() {
        // right margin edge lands exactly on t = 0 for this box
        let chart = Chart::new(vec!["t"], vec![(-1.9, 0.1)], vec![false], 1).unwrap();
        let grid = chart.grid(4);
        let last = grid.last().unwrap()[0];
        assert!((last - 0.0).abs() < 1e-12, "got {last}");
    }

    #[test]
    fn rejects_bad_charts() {
        assert!(Chart::new(vec!["a", "a"], vec![(0.0, 1.0); 2], vec![false; 2], 1).is_err());
        assert!(Chart::new(vec!["a"], vec![(1.0, 0.0)], vec![false], 1).is_err());
        assert!(Chart::new(vec!["a"], vec![(0.0, 1.0)], vec![false], 2).is_err());
    }
}
