//! Linear operators of the problem: the Yukawa resolvent G_e = (-Lap + 4e)^-1,
//! the full resolvent K_e = (-Lap + 4e + V)^-1, and the zero-energy scattering
//! problem that defines the scattering length.

use crate::error::{Result, SimpleqError};
use crate::grid::{integrate_radial, RadialField, RadialGrid};
use crate::transform::{inverse_radial_fourier, radial_fourier};
use std::sync::Arc;

/// Solution of the zero-energy scattering problem -Lap phi = (1 - phi) V.
///
/// The scattering length is read off two ways: from the far field of phi
/// (w = r*phi tends to a) and from the integral identity
/// 4 pi a = Int V (1 - phi) dx. The integral converges faster in grid
/// spacing, so `a` adopts it; both are kept so disagreement is visible.
#[derive(Debug, Clone)]
pub struct ScatteringResult {
    pub phi: RadialField,
    pub a_boundary: f64,
    pub a_integral: f64,
    pub a: f64,
}

/// Applies G_e = (-Lap + 4e)^-1 by spectral division ghat(k) / (k^2 + 4e).
pub fn apply_yukawa(g: &RadialField, e: f64) -> Result<RadialField> {
    if !(e > 0.0) {
        return Err(SimpleqError::NonPositiveEnergy { e });
    }
    let mut gh = radial_fourier(g);
    let grid = gh.grid().clone();
    let vals: Vec<f64> = gh
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k = grid.wavenumber(i + 1);
            v / (k * k + 4.0 * e)
        })
        .collect();
    gh = crate::transform::SpectralField::new(grid, vals)?;
    Ok(inverse_radial_fourier(&gh))
}

/// Tridiagonal factorization of -w'' + (4e + V) w on w = r f with w(0) = 0
/// and the Robin far-field closure w_N = w_{N-1} / (1 + 2 sqrt(e) dr), which
/// encodes the homogeneous decay rate 2 sqrt(e).
pub(crate) struct ResolventSystem {
    // Thomas factors: c[i] = modified upper diagonal, inv_d[i] = 1/pivot
    c: Vec<f64>,
    inv_d: Vec<f64>,
    lower: f64,
    zeta: f64,
}

impl ResolventSystem {
    pub(crate) fn new(v: &RadialField, e: f64) -> Result<Self> {
        let grid = v.grid();
        let n = grid.n_points();
        let dr = grid.spacing();
        let lower = -1.0 / (dr * dr);
        let zeta = 1.0 / (1.0 + 2.0 * e.sqrt() * dr);
        // unknowns w_1..w_{N-1}
        let m = n - 1;
        let mut c = vec![0.0; m];
        let mut inv_d = vec![0.0; m];
        let mut prev_c = 0.0;
        for i in 0..m {
            let vj = v.values()[i + 1];
            let mut diag = 2.0 / (dr * dr) + 4.0 * e + vj;
            if i == m - 1 {
                // eliminate w_N through the Robin closure
                diag += lower * zeta;
            }
            let pivot = diag - lower * prev_c;
            if pivot <= 0.0 || !pivot.is_finite() {
                return Err(SimpleqError::SingularSystem { row: i });
            }
            inv_d[i] = 1.0 / pivot;
            prev_c = if i < m - 1 { lower * inv_d[i] } else { 0.0 };
            c[i] = prev_c;
        }
        Ok(Self { c, inv_d, lower, zeta })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        let mut w = vec![0.0; m];
        let mut prev = 0.0;
        for i in 0..m {
            prev = (rhs[i] - self.lower * prev) * self.inv_d[i];
            w[i] = prev;
        }
        for i in (0..m - 1).rev() {
            w[i] -= self.c[i] * w[i + 1];
        }
        w
    }

    pub(crate) fn zeta(&self) -> f64 {
        self.zeta
    }
}

/// Applies K_e = (-Lap + 4e + V)^-1 by a direct tridiagonal solve on w = r f.
pub fn apply_resolvent(g: &RadialField, v: &RadialField, e: f64) -> Result<RadialField> {
    if !(e > 0.0) {
        return Err(SimpleqError::NonPositiveEnergy { e });
    }
    if !g.same_grid(v) {
        return Err(SimpleqError::GridMismatch {
            left: g.values().len(),
            right: v.values().len(),
        });
    }
    let grid = g.grid().clone();
    let n = grid.n_points();
    let sys = ResolventSystem::new(v, e)?;
    let rhs: Vec<f64> = (1..n).map(|j| grid.node(j) * g.values()[j]).collect();
    let w = sys.solve(&rhs);
    let mut values = vec![0.0; grid.node_count()];
    for j in 1..n {
        values[j] = w[j - 1] / grid.node(j);
    }
    values[n] = w[n - 2] * sys.zeta() / grid.r_max();
    // quadratic (even) extrapolation to the origin
    let r1 = grid.node(1);
    let r2 = grid.node(2);
    values[0] = (values[1] * r2 * r2 - values[2] * r1 * r1) / (r2 * r2 - r1 * r1);
    RadialField::new(grid, values)
}

/// Solves the scattering problem -w'' + V w = r V with w(0) = 0 and a
/// constant far field (w' = 0 at r_max, since phi -> a/r means w -> a).
pub fn solve_scattering(v: &RadialField) -> Result<ScatteringResult> {
    let grid = v.grid().clone();
    let n = grid.n_points();
    let dr = grid.spacing();
    let vmax = v.values().iter().cloned().fold(0.0, f64::max);
    if vmax < 0.0 || v.values().iter().any(|&x| x < 0.0) {
        return Err(SimpleqError::InvalidPotential {
            reason: "scattering requires V >= 0".into(),
        });
    }
    let v_end = v.values()[n];
    if vmax > 0.0 && v_end > 1e-12 * vmax {
        return Err(SimpleqError::PotentialNotDecayed {
            r_max: grid.r_max(),
            ratio: v_end / vmax,
        });
    }

    // Thomas on w_1..w_N, Neumann row at j = N
    let m = n;
    let inv_h2 = 1.0 / (dr * dr);
    let mut c = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut prev_c = 0.0;
    let mut prev_w = 0.0;
    for i in 0..m {
        let j = i + 1;
        let diag = if j < n {
            2.0 * inv_h2 + v.values()[j]
        } else {
            inv_h2 + v.values()[j]
        };
        let lower = if i == 0 { 0.0 } else { -inv_h2 };
        let pivot = diag - lower * prev_c;
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(SimpleqError::SingularSystem { row: i });
        }
        let upper = if j < n { -inv_h2 } else { 0.0 };
        prev_c = upper / pivot;
        c[i] = prev_c;
        prev_w = (grid.node(j) * v.values()[j] - lower * prev_w) / pivot;
        w[i] = prev_w;
    }
    for i in (0..m - 1).rev() {
        let next = w[i + 1];
        w[i] -= c[i] * next;
    }

    let mut phi_vals = vec![0.0; grid.node_count()];
    for j in 1..=n {
        phi_vals[j] = w[j - 1] / grid.node(j);
    }
    let r1 = grid.node(1);
    let r2 = grid.node(2);
    phi_vals[0] = (phi_vals[1] * r2 * r2 - phi_vals[2] * r1 * r1) / (r2 * r2 - r1 * r1);
    let phi = RadialField::new(grid.clone(), phi_vals)?;

    let a_boundary = w[m - 1];
    let integrand = RadialField::new(
        grid,
        v.values()
            .iter()
            .zip(phi.values())
            .map(|(vv, ph)| vv * (1.0 - ph))
            .collect(),
    )?;
    let a_integral = integrate_radial(&integrand) / (4.0 * std::f64::consts::PI);
    Ok(ScatteringResult {
        phi,
        a_boundary,
        a_integral,
        a: a_integral,
    })
}

/// Scattering length of a potential spec on an automatically sized fine grid.
pub fn scattering_length(spec: &crate::potential::PotentialSpec) -> Result<ScatteringResult> {
    let r_max = (spec.support_radius() + 5.0 * spec.range_scale()).max(10.0 * spec.range_scale());
    let n = ((r_max / (spec.range_scale() / 400.0)).ceil() as usize).clamp(4096, 65536);
    let grid = Arc::new(RadialGrid::with_r_max(n, r_max)?);
    let v = spec.sample(grid)?;
    solve_scattering(&v)
}
