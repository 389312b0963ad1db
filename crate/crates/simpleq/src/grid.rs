//! Uniform radial grids and sampled radial fields.
//!
//! A field f(|x|) on R^3 is stored as its samples f(r_j) on the nodes
//! r_j = j*dr, j = 0..=n, with r_max = n*dr. Volume integrals carry the
//! 4*pi*r^2 weight; the weighted combination r_j*f(r_j) is formed on demand
//! so the 1/r bookkeeping at the origin never enters stored data.

use crate::error::{Result, SimpleqError};
use std::f64::consts::PI;
use std::sync::Arc;

/// Uniform radial discretization of [0, r_max] with nodes r_j = j*dr.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n_points: usize,
    spacing: f64,
}

impl RadialGrid {
    /// A grid with `n_points` intervals of width `spacing` (nodes 0..=n_points).
    pub fn new(n_points: usize, spacing: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(SimpleqError::InvalidGrid {
                reason: format!("need at least 2 intervals, got {n_points}"),
            });
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(SimpleqError::InvalidGrid {
                reason: format!("spacing must be positive and finite, got {spacing}"),
            });
        }
        Ok(Self { n_points, spacing })
    }

    /// Grid covering [0, r_max] with `n_points` intervals.
    pub fn with_r_max(n_points: usize, r_max: f64) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(SimpleqError::InvalidGrid {
                reason: format!("r_max must be positive and finite, got {r_max}"),
            });
        }
        Self::new(n_points, r_max / n_points as f64)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn r_max(&self) -> f64 {
        self.n_points as f64 * self.spacing
    }

    /// Number of stored samples (nodes 0..=n_points).
    pub fn node_count(&self) -> usize {
        self.n_points + 1
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.node_count()).map(|j| self.node(j))
    }

    /// Conjugate sine-transform wavenumbers k_m = m*pi/r_max, m = 1..n_points.
    pub fn wavenumber(&self, m: usize) -> f64 {
        m as f64 * PI / self.r_max()
    }

    /// Number of spectral samples carried by the transform pairing.
    pub fn mode_count(&self) -> usize {
        self.n_points - 1
    }
}

/// Samples of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    /// Wraps sample values; every value must be finite and the length must
    /// equal the grid's node count.
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(SimpleqError::GridMismatch {
                left: grid.node_count(),
                right: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SimpleqError::NonFiniteField { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.node_count();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }
}

/// Trapezoid approximation of 4*pi * Int_0^{r_max} r^2 f(r) dr.
///
/// The r=0 endpoint contributes nothing through the r^2 weight, so the rule
/// reduces to full weights at interior nodes and a half weight at r_max.
pub fn integrate_radial(f: &RadialField) -> f64 {
    let g = f.grid();
    let dr = g.spacing();
    let vals = f.values();
    let n = g.n_points();
    let mut acc = 0.0;
    for j in 1..n {
        let r = g.node(j);
        acc += r * r * vals[j];
    }
    let rn = g.r_max();
    acc += 0.5 * rn * rn * vals[n];
    4.0 * PI * dr * acc
}

/// ||f - g||_1 with the 4*pi*r^2 volume weight.
pub fn l1_distance(f: &RadialField, g: &RadialField) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(SimpleqError::GridMismatch {
            left: f.values().len(),
            right: g.values().len(),
        });
    }
    let diff: Vec<f64> = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let field = RadialField {
        grid: f.grid().clone(),
        values: diff,
    };
    Ok(integrate_radial(&field))
}

/// Largest excursion of f below `lo` or above `hi`; 0 when f stays in [lo, hi].
pub fn pointwise_max_violation(f: &RadialField, lo: f64, hi: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for &v in f.values() {
        worst = worst.max(lo - v).max(v - hi);
    }
    worst.max(0.0)
}
