//! Internal solve engine.
//!
//! The iteration state lives in two coupled representations:
//!   * u_n sampled on a composite radial grid (uniform fine core covering the
//!     potential, geometric extension out to R_K = core + 15/sqrt(e) so the
//!     Robin closure sits many Yukawa lengths past every integrand),
//!   * uhat_n sampled on graded Gauss-Legendre wavenumber panels.
//!
//! One step, given (uhat_{n-1}, rho_{n-1} = 1/b_{n-1}, a_{n-1}):
//!   c      = IFT[uhat_{n-1}^2]          (quadrature over the k panels)
//!   u_n    = K_e(V + 2 e rho_{n-1} c)   (tridiagonal solve on w = r u)
//!   b_n    = (1/2e) Int (1 - u_n) V     (trapezoid on the composite grid)
//!   s_n(k) = FT[(1 - u_n) V](k)         (compact integrand, same grid)
//!   uhat_n = (s_n + 2 e rho_{n-1} uhat_{n-1}^2) / (k^2 + 4e)
//!   a_n    = (b_n + a_{n-1}^2 / b_{n-1}) / 2
//!
//! The uhat update is the exact Fourier transform of the u_n equation, and
//! a_n is its k -> 0 limit, so the telescoping identity holds to rounding and
//! the scalar bookkeeping never loses the mass that the r^-4 tail carries
//! beyond any finite grid.

use crate::error::{Result, SimpleqError};
use crate::potential::PotentialSpec;
use std::f64::consts::PI;

/// How a solve terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// (b_n - a_n)/b_n fell below the bracket tolerance.
    BracketClosed,
    /// The constraint sequence b_n stalled below the tolerance over a window;
    /// the mass sequence a_n keeps climbing at its slow exact rate.
    ConstraintStalled,
    /// max_iter was reached first.
    IterationLimit,
}

pub(crate) struct EngineConfig {
    pub bracket_tol: f64,
    pub max_iter: usize,
    pub min_iter: usize,
    pub stall_window: usize,
    pub fine_spacing_scale: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            bracket_tol: 1e-10,
            max_iter: 100_000,
            min_iter: 200,
            stall_window: 64,
            fine_spacing_scale: 1.0,
        }
    }
}

pub(crate) struct Engine {
    pub e: f64,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    /// 4 pi w_j r_j^2 trapezoid weights (volume integrals)
    pub wr2: Vec<f64>,
    /// 4 pi w_j r_j weights (sine transforms, divide by k outside)
    pub wr1: Vec<f64>,
    /// index of the last node of the uniform fine core
    pub n_fine: usize,
    pub kq: Vec<f64>,
    pub wk: Vec<f64>,
    /// sin(k_q r_j), row-major by k node
    table: Vec<f64>,
    // Thomas factors for -w'' + (4e + V) w with Robin closure
    thom_c: Vec<f64>,
    thom_inv_d: Vec<f64>,
    thom_lower: Vec<f64>,
    zeta: f64,
    pub int_v: f64,
}

/// Composite radial grid: uniform fine core, then geometric growth with the
/// step capped at a twelfth of the Yukawa length. Returns the nodes and the
/// index of the last fine-core node.
fn composite_nodes(e: f64, r_fine_max: f64, dr_fine: f64, r_k: f64) -> (Vec<f64>, usize) {
    let cap = (1.0 / (24.0 * e.sqrt())).max(dr_fine);
    let n_fine = (r_fine_max / dr_fine).ceil() as usize;
    let mut r: Vec<f64> = (0..=n_fine).map(|j| j as f64 * dr_fine).collect();
    let mut h = dr_fine;
    while *r.last().unwrap() < r_k {
        h = (h * 1.04).min(cap);
        let next = r.last().unwrap() + h;
        r.push(next);
    }
    (r, n_fine)
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
                x[i] = -z;
                x[n - 1 - i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                w[n - 1 - i] = w[i];
                break;
            }
        }
    }
    (x, w)
}

/// Graded geometric panels [k_lo, k_max] with 16-point Gauss-Legendre rule
/// per panel; k_lo sits far below the kink scale of uhat at the origin.
fn k_panels(e: f64, k_max: f64) -> (Vec<f64>, Vec<f64>) {
    let w_u = 1.0 / (1.0 / (2.0 * e) + 1.0).sqrt();
    let k_lo = w_u * 1e-7;
    let mut edges = vec![0.0, k_lo];
    while *edges.last().unwrap() < k_max {
        let next = (edges.last().unwrap() * 1.5).min(k_max);
        edges.push(next);
    }
    let (xg, wg) = gauss_legendre(16);
    let mut ks = Vec::new();
    let mut ws = Vec::new();
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (xi, wi) in xg.iter().zip(&wg) {
            ks.push(mid + half * xi);
            ws.push(half * wi);
        }
    }
    (ks, ws)
}

impl Engine {
    pub(crate) fn new(e: f64, spec: &PotentialSpec, cfg: &EngineConfig) -> Result<Self> {
        if !(e > 0.0 && e.is_finite()) {
            return Err(SimpleqError::InvalidParams {
                reason: format!("energy must be positive and finite, got {e}"),
            });
        }
        let range = spec.range_scale();
        let r_fine_max = spec.support_radius() + 2.0 * range;
        let dr_fine = (range / 80.0 * cfg.fine_spacing_scale).min(1.0 / (20.0 * e.sqrt()));
        let r_k = r_fine_max + 15.0 / e.sqrt();
        let (r, n_fine) = composite_nodes(e, r_fine_max, dr_fine, r_k);
        let n = r.len();
        let v: Vec<f64> = r.iter().map(|&rr| spec.eval(rr)).collect();
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(SimpleqError::InvalidPotential {
                reason: "potential must be finite and non-negative on the solve grid".into(),
            });
        }

        let mut wr2 = vec![0.0; n];
        let mut wr1 = vec![0.0; n];
        for j in 0..n {
            let w = if j == 0 {
                0.5 * (r[1] - r[0])
            } else if j == n - 1 {
                0.5 * (r[n - 1] - r[n - 2])
            } else {
                0.5 * (r[j + 1] - r[j - 1])
            };
            wr2[j] = 4.0 * PI * w * r[j] * r[j];
            wr1[j] = 4.0 * PI * w * r[j];
        }
        let int_v: f64 = wr2.iter().zip(&v).map(|(w, vv)| w * vv).sum();
        if !(int_v > 0.0) {
            return Err(SimpleqError::DegeneratePotential { int_v });
        }

        let spectral_reach = match spec {
            PotentialSpec::SquareWell { .. } | PotentialSpec::Tabulated { .. } => 80.0,
            _ => 40.0,
        };
        let k_max = spectral_reach / range + 5.0 * e.sqrt();
        let (kq, wk) = k_panels(e, k_max);

        let mut table = vec![0.0; kq.len() * n];
        for (q, &k) in kq.iter().enumerate() {
            let row = &mut table[q * n..(q + 1) * n];
            // stable rotation recurrence over the uniform fine core
            let (s_step, c_step) = (k * dr_fine).sin_cos();
            let mut s = 0.0f64;
            let mut c = 1.0f64;
            for (j, slot) in row.iter_mut().enumerate().take(n_fine + 1) {
                *slot = s;
                let s_next = s * c_step + c * s_step;
                c = c * c_step - s * s_step;
                s = s_next;
                if j % 4096 == 4095 {
                    let (se, ce) = (k * (j + 1) as f64 * dr_fine).sin_cos();
                    s = se;
                    c = ce;
                }
            }
            for j in n_fine + 1..n {
                row[j] = (k * r[j]).sin();
            }
        }

        // Thomas factors on the nonuniform grid
        let m = n - 2; // unknowns w_1..w_{n-2}
        let mut thom_lower = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut diag = vec![0.0; m];
        for i in 0..m {
            let j = i + 1;
            let hm = r[j] - r[j - 1];
            let hp = r[j + 1] - r[j];
            thom_lower[i] = -2.0 / (hm * (hm + hp));
            upper[i] = -2.0 / (hp * (hm + hp));
            diag[i] = 2.0 / (hm * hp) + 4.0 * e + v[j];
        }
        let zeta = 1.0 / (1.0 + 2.0 * e.sqrt() * (r[n - 1] - r[n - 2]));
        diag[m - 1] += upper[m - 1] * zeta;
        let mut thom_c = vec![0.0; m];
        let mut thom_inv_d = vec![0.0; m];
        let mut prev_c = 0.0;
        for i in 0..m {
            let pivot = diag[i] - thom_lower[i] * prev_c;
            if pivot <= 0.0 || !pivot.is_finite() {
                return Err(SimpleqError::SingularSystem { row: i });
            }
            thom_inv_d[i] = 1.0 / pivot;
            prev_c = if i < m - 1 { upper[i] * thom_inv_d[i] } else { 0.0 };
            thom_c[i] = prev_c;
        }

        Ok(Self {
            e,
            r,
            v,
            wr2,
            wr1,
            n_fine,
            kq,
            wk,
            table,
            thom_c,
            thom_inv_d,
            thom_lower,
            zeta,
            int_v,
        })
    }

    /// K_e applied to g sampled on the composite grid.
    pub(crate) fn apply_ke(&self, g: &[f64]) -> Vec<f64> {
        let n = self.r.len();
        let m = n - 2;
        let mut w = vec![0.0; m];
        let mut prev = 0.0;
        for i in 0..m {
            let rhs = self.r[i + 1] * g[i + 1];
            prev = (rhs - self.thom_lower[i] * prev) * self.thom_inv_d[i];
            w[i] = prev;
        }
        for i in (0..m - 1).rev() {
            w[i] -= self.thom_c[i] * w[i + 1];
        }
        let mut u = vec![0.0; n];
        for i in 0..m {
            u[i + 1] = w[i] / self.r[i + 1];
        }
        u[n - 1] = w[m - 1] * self.zeta / self.r[n - 1];
        let (r1, r2) = (self.r[1], self.r[2]);
        u[0] = (u[1] * r2 * r2 - u[2] * r1 * r1) / (r2 * r2 - r1 * r1);
        u
    }

    pub(crate) fn run(&self, cfg: &EngineConfig) -> Result<EngineOutcome> {
        let e = self.e;
        let n_nodes = self.r.len();
        let jmax = self.n_fine.min(n_nodes - 1);
        let mut b = self.int_v / (2.0 * e);
        let mut a = 0.0f64;
        let mut rho = 1.0 / b;
        let mut uhat = vec![0.0; self.kq.len()];
        let mut fv = vec![0.0; jmax + 1];
        // conv holds IFT[uhat^2] of the previous step (normalized); zero at start
        let mut conv = vec![0.0; n_nodes];
        let mut u = vec![0.0; n_nodes];
        let mut trace: Vec<(f64, f64)> = Vec::with_capacity(1024);
        let mut stop = StopReason::IterationLimit;

        for step in 1..=cfg.max_iter {
            let g: Vec<f64> = self
                .v
                .iter()
                .zip(&conv)
                .map(|(vv, cc)| vv + 2.0 * e * rho * cc)
                .collect();
            u = self.apply_ke(&g);
            let b_new: f64 = self
                .wr2
                .iter()
                .zip(&u)
                .zip(&self.v)
                .map(|((w, uu), vv)| w * (1.0 - uu) * vv)
                .sum::<f64>()
                / (2.0 * e);
            if !(b_new > 0.0) {
                return Err(SimpleqError::IterationBreakdown {
                    step,
                    value: 2.0 * e * b_new,
                });
            }
            for (j, slot) in fv.iter_mut().enumerate() {
                *slot = self.wr1[j] * (1.0 - u[j]) * self.v[j];
            }
            // fused table pass: s_n per row, the uhat_n update (which still
            // uses rho_{n-1}), and the accumulation of conv for the next step
            let mut origin = 0.0;
            conv.iter_mut().for_each(|x| *x = 0.0);
            for (q, sh) in uhat.iter_mut().enumerate() {
                let k = self.kq[q];
                let row = &self.table[q * n_nodes..(q + 1) * n_nodes];
                let mut s_q = 0.0;
                for (f, t) in fv.iter().zip(row) {
                    s_q += f * t;
                }
                s_q /= k;
                *sh = (s_q + 2.0 * e * rho * *sh * *sh) / (k * k + 4.0 * e);
                let amp = self.wk[q] * k * *sh * *sh;
                origin += amp * k;
                for (cj, tj) in conv[1..].iter_mut().zip(&row[1..]) {
                    *cj += amp * tj;
                }
            }
            let norm = 2.0 * PI * PI;
            for (cj, rj) in conv.iter_mut().zip(&self.r).skip(1) {
                *cj /= norm * rj;
            }
            conv[0] = origin / norm;

            a = 0.5 * (b_new + a * a / b);
            trace.push((a, b_new));
            let gap = (b_new - a) / b_new;
            b = b_new;
            rho = 1.0 / b;

            if gap < cfg.bracket_tol {
                stop = StopReason::BracketClosed;
                break;
            }
            let window = cfg.stall_window;
            if step >= cfg.min_iter.max(window + 1) {
                let prior = trace[trace.len() - 1 - window].1;
                if ((prior - b) / b).abs() < cfg.bracket_tol {
                    stop = StopReason::ConstraintStalled;
                    break;
                }
            }
        }

        // residual of the fixed-point map at the final iterate; conv already
        // holds IFT[uhat_final^2]
        let g: Vec<f64> = self
            .v
            .iter()
            .zip(&conv)
            .map(|(vv, cc)| vv + 2.0 * e * rho * cc)
            .collect();
        let phi_u = self.apply_ke(&g);
        let mut num = 0.0;
        let mut den = 0.0;
        for ((w, uu), pp) in self.wr2.iter().zip(&u).zip(&phi_u) {
            num += w * (uu - pp).abs();
            den += w * uu.abs();
        }

        let beta_moment = {
            let m: f64 = self
                .wr2
                .iter()
                .zip(&self.r)
                .zip(&u)
                .zip(&self.v)
                .map(|(((w, rr), uu), vv)| w * rr * rr * (1.0 - uu) * vv)
                .sum();
            rho / (12.0 * e) * m
        };

        Ok(EngineOutcome {
            u_nodes: u,
            a,
            b,
            rho,
            trace,
            converged: stop != StopReason::IterationLimit,
            stop,
            residual: if den > 0.0 { num / den } else { 0.0 },
            beta_moment,
            int_v: self.int_v,
        })
    }

    /// FT[(1-u) V](k) at arbitrary k >= 0 for the converged field.
    pub(crate) fn source_transform_at(&self, u: &[f64], k: f64) -> f64 {
        let jmax = self.n_fine.min(self.r.len() - 1);
        if k == 0.0 {
            return (0..=jmax)
                .map(|j| self.wr2[j] * (1.0 - u[j]) * self.v[j])
                .sum();
        }
        let mut acc = 0.0;
        for j in 1..=jmax {
            acc += self.wr1[j] * (1.0 - u[j]) * self.v[j] * (k * self.r[j]).sin();
        }
        acc / k
    }
}

pub(crate) struct EngineOutcome {
    pub u_nodes: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub trace: Vec<(f64, f64)>,
    pub converged: bool,
    pub stop: StopReason,
    pub residual: f64,
    pub beta_moment: f64,
    pub int_v: f64,
}

/// Evaluates s(k_m) = FT[(1-u)V](k_m) on the uniform wavenumber lattice
/// k_m = m pi / r_max for m = 1..modes, summing the fine-core quadrature with
/// a rotation recurrence per radial node.
pub(crate) fn lattice_source_transform(
    engine: &Engine,
    u: &[f64],
    r_max: f64,
    modes: usize,
) -> Vec<f64> {
    let jmax = engine.n_fine.min(engine.r.len() - 1);
    let mut out = vec![0.0; modes];
    let dk = PI / r_max;
    for j in 1..=jmax {
        let f = engine.wr1[j] * (1.0 - u[j]) * engine.v[j];
        if f == 0.0 {
            continue;
        }
        let theta = dk * engine.r[j];
        let (s_step, c_step) = theta.sin_cos();
        let mut s = 0.0f64;
        let mut c = 1.0f64;
        for (m, slot) in out.iter_mut().enumerate() {
            let s_next = s * c_step + c * s_step;
            c = c * c_step - s * s_step;
            s = s_next;
            if m % 8192 == 8191 {
                let (se, ce) = (theta * (m + 1) as f64).sin_cos();
                s = se;
                c = ce;
            }
            *slot += f * s;
        }
    }
    for (m, slot) in out.iter_mut().enumerate() {
        *slot /= (m + 1) as f64 * dk;
    }
    out
}
