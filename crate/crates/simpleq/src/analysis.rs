//! Quantitative analysis: rho(e) curves, low/high-density asymptotics, the
//! r^-4 tail law, convexity diagnostics, and reference comparisons.

use crate::error::{Result, SimpleqError};
use crate::grid::{integrate_radial, RadialField};
use crate::operators::scattering_length;
use crate::potential::PotentialSpec;
use crate::solver::{solve_scalars, IterationTrace, ScalarSolve, Solution, SolveParams};
use std::f64::consts::PI;

/// One sampled point of the density curve, with the certified enclosure
/// rho in [rho_lo, rho_hi] = [1/b_final, 1/a_final].
#[derive(Debug, Clone, Copy)]
pub struct CurveRow {
    pub e: f64,
    pub rho: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub e_over_4pi_rho: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Sampled rho(e) for one potential.
#[derive(Debug, Clone)]
pub struct EnergyCurve {
    pub rows: Vec<CurveRow>,
    pub potential: String,
    pub scattering_length: f64,
    pub int_v: f64,
    pub warnings: Vec<String>,
}

impl EnergyCurve {
    pub fn rho_range(&self) -> (f64, f64) {
        let lo = self.rows.first().map_or(f64::NAN, |r| r.rho);
        let hi = self.rows.last().map_or(f64::NAN, |r| r.rho);
        (lo, hi)
    }

    fn monotone_in_rho(&self) -> std::result::Result<(), usize> {
        for (i, w) in self.rows.windows(2).enumerate() {
            if w[1].rho <= w[0].rho {
                return Err(i);
            }
        }
        Ok(())
    }
}

fn curve_row(out: &ScalarSolve) -> CurveRow {
    CurveRow {
        e: out.e,
        rho: out.rho,
        rho_lo: 1.0 / out.b_final,
        rho_hi: 1.0 / out.a_final,
        e_over_4pi_rho: out.e / (4.0 * PI * out.rho),
        converged: out.converged,
        iterations: out.iterations,
    }
}

fn make_curve(
    spec: &PotentialSpec,
    e_values: &[f64],
    outcomes: Vec<Result<ScalarSolve>>,
) -> Result<EnergyCurve> {
    let mut rows = Vec::with_capacity(e_values.len());
    let mut warnings = Vec::new();
    let mut int_v = 0.0;
    for (i, res) in outcomes.into_iter().enumerate() {
        match res {
            Ok(out) => {
                if !out.converged {
                    warnings.push(format!("solve at e = {:e} did not converge", out.e));
                }
                int_v = out.int_v;
                rows.push(curve_row(&out));
            }
            Err(err) => {
                return Err(SimpleqError::InvalidParams {
                    reason: format!("solve at e = {:e} failed: {err}", e_values[i]),
                });
            }
        }
    }
    let curve_warn: Vec<String> = rows
        .windows(2)
        .filter(|w| w[1].rho <= w[0].rho)
        .map(|w| {
            format!(
                "rho(e) monotonicity violated between e = {:e} and e = {:e}",
                w[0].e, w[1].e
            )
        })
        .collect();
    warnings.extend(curve_warn);
    let sc = scattering_length(spec)?;
    Ok(EnergyCurve {
        rows,
        potential: spec.to_string(),
        scattering_length: sc.a,
        int_v,
        warnings,
    })
}

fn validate_e_values(e_values: &[f64]) -> Result<()> {
    if e_values.is_empty() {
        return Err(SimpleqError::TooFewPoints {
            context: "curve tracing".into(),
            needed: 1,
            got: 0,
        });
    }
    for w in e_values.windows(2) {
        if w[1] <= w[0] {
            return Err(SimpleqError::InvalidParams {
                reason: "e values must be strictly increasing".into(),
            });
        }
    }
    if e_values[0] <= 0.0 {
        return Err(SimpleqError::InvalidParams {
            reason: "e values must be positive".into(),
        });
    }
    Ok(())
}

/// Traces rho(e) with one scalar solve per energy, sequentially.
pub fn trace_curve_serial(
    spec: &PotentialSpec,
    e_values: &[f64],
    params: &SolveParams,
) -> Result<EnergyCurve> {
    validate_e_values(e_values)?;
    let outcomes: Vec<Result<ScalarSolve>> = e_values
        .iter()
        .map(|&e| solve_scalars(spec, &SolveParams { e, ..params.clone() }))
        .collect();
    make_curve(spec, e_values, outcomes)
}

/// Traces rho(e), running solves in parallel when the `parallel` feature is
/// enabled; rows are ordered by e regardless.
pub fn trace_curve(
    spec: &PotentialSpec,
    e_values: &[f64],
    params: &SolveParams,
) -> Result<EnergyCurve> {
    validate_e_values(e_values)?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let outcomes: Vec<Result<ScalarSolve>> = e_values
            .par_iter()
            .map(|&e| solve_scalars(spec, &SolveParams { e, ..params.clone() }))
            .collect();
        make_curve(spec, e_values, outcomes)
    }
    #[cfg(not(feature = "parallel"))]
    {
        trace_curve_serial(spec, e_values, params)
    }
}

/// Log-spaced energies, inclusive of both endpoints.
pub fn log_spaced(e_min: f64, e_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(e_min > 0.0 && e_max > e_min) || count < 2 {
        return Err(SimpleqError::InvalidParams {
            reason: format!("need 0 < e_min < e_max and count >= 2, got [{e_min}, {e_max}] x {count}"),
        });
    }
    let l0 = e_min.ln();
    let l1 = e_max.ln();
    Ok((0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

// --- monotone cubic interpolation ------------------------------------------

/// Fritsch-Carlson monotone piecewise-cubic interpolant.
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            if d[i - 1] * d[i] <= 0.0 {
                m[i] = 0.0;
            } else {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        Self { x, y, m }
    }

    fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&xq).unwrap()) {
            Ok(i) => return self.y[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }
}

/// Inverts the sampled curve: e(rho_target) by monotone piecewise-cubic
/// interpolation of (ln rho, ln e). Monotonicity of rho(e) is conjectural,
/// so a non-monotone sample aborts loudly rather than interpolating junk.
pub fn invert_curve(curve: &EnergyCurve, rho_target: f64) -> Result<f64> {
    if curve.rows.len() < 2 {
        return Err(SimpleqError::TooFewPoints {
            context: "curve inversion".into(),
            needed: 2,
            got: curve.rows.len(),
        });
    }
    if let Err(row) = curve.monotone_in_rho() {
        return Err(SimpleqError::NonMonotoneCurve { row });
    }
    let (lo, hi) = curve.rho_range();
    if !(rho_target >= lo && rho_target <= hi) {
        return Err(SimpleqError::OutOfRange {
            value: rho_target,
            lo,
            hi,
        });
    }
    let x: Vec<f64> = curve.rows.iter().map(|r| r.rho.ln()).collect();
    let y: Vec<f64> = curve.rows.iter().map(|r| r.e.ln()).collect();
    Ok(Pchip::new(x, y).eval(rho_target.ln()).exp())
}

// --- asymptotics -------------------------------------------------------------

/// The low-density expansion constant 128 / (15 sqrt(pi)).
pub fn lhy_constant() -> f64 {
    128.0 / (15.0 * PI.sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct LhyPoint {
    pub rho: f64,
    pub rho_a3: f64,
    pub c_hat: f64,
}

/// Measured low-density correction coefficients
/// c_hat = (e / (2 pi rho a) - 1) / sqrt(rho a^3) on dilute rows
/// (rho a^3 <= 1e-4); c_hat tends to [`lhy_constant`] as rho -> 0.
pub fn lhy_check(curve: &EnergyCurve) -> Vec<LhyPoint> {
    let a = curve.scattering_length;
    curve
        .rows
        .iter()
        .filter(|r| r.converged && r.rho * a * a * a <= 1e-4)
        .map(|r| {
            let rho_a3 = r.rho * a * a * a;
            let c_hat = (r.e / (2.0 * PI * r.rho * a) - 1.0) / rho_a3.sqrt();
            LhyPoint {
                rho: r.rho,
                rho_a3,
                c_hat,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct HighDensityPoint {
    pub rho: f64,
    pub ratio: f64,
}

/// ratio = e / ((rho/2) Int V) per row; bounded by 1 from above and tends to
/// 1 from below as rho grows.
pub fn high_density_check(curve: &EnergyCurve, int_v: f64) -> Vec<HighDensityPoint> {
    curve
        .rows
        .iter()
        .map(|r| HighDensityPoint {
            rho: r.rho,
            ratio: r.e / (0.5 * r.rho * int_v),
        })
        .collect()
}

// --- structure-factor curvature ----------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct BetaEstimate {
    /// (rho / 12 e) Int |x|^2 (1 - u) V dx by moment quadrature.
    pub moment: f64,
    /// Curvature of S at k = 0 fitted on the three smallest wavenumbers.
    pub small_k_fit: f64,
}

impl BetaEstimate {
    pub fn relative_gap(&self) -> f64 {
        (self.moment - self.small_k_fit).abs() / self.moment
    }
}

/// Moment-quadrature beta for arbitrary sampled fields (test/diagnostic path).
pub fn beta_moment_of(u: &RadialField, v: &RadialField, rho: f64, e: f64) -> Result<f64> {
    if !u.same_grid(v) {
        return Err(SimpleqError::GridMismatch {
            left: u.values().len(),
            right: v.values().len(),
        });
    }
    let grid = u.grid().clone();
    let weighted = RadialField::new(
        grid.clone(),
        (0..grid.node_count())
            .map(|j| {
                let r = grid.node(j);
                r * r * (1.0 - u.values()[j]) * v.values()[j]
            })
            .collect(),
    )?;
    Ok(rho / (12.0 * e) * integrate_radial(&weighted))
}

/// The kappa^2 coefficient of S(kappa) = 1 - beta kappa^2 + O(kappa^4),
/// from the solver's moment quadrature, cross-checked against a quadratic
/// fit of S on the three smallest spectral nodes.
pub fn extract_beta(sol: &Solution) -> Result<BetaEstimate> {
    let moment = sol.beta_moment;
    if !(moment > 0.0) {
        return Err(SimpleqError::NonPositiveBeta { beta: moment });
    }
    if sol.s_of_k.values().len() < 3 {
        return Err(SimpleqError::TooFewPoints {
            context: "beta small-k fit".into(),
            needed: 3,
            got: sol.s_of_k.values().len(),
        });
    }
    let s0 = sol.s_at_zero;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..3 {
        let k = sol.s_of_k.wavenumber(i);
        let x = k * k;
        let y = (s0 - sol.s_of_k.values()[i]) / s0;
        num += x * y;
        den += x * x;
    }
    Ok(BetaEstimate {
        moment,
        small_k_fit: num / den,
    })
}

// --- tail decay ----------------------------------------------------------------

/// Result of the far-field power-law fit of u.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayReport {
    /// Fitted exponent p in u ~ alpha / r^p (reported positive).
    pub exponent: f64,
    pub alpha_hat: f64,
    /// (1 / (pi^2 rho)) sqrt(1/(2e) + beta)
    pub alpha_pred: f64,
    pub beta: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// RMS of log-residuals about the fitted line.
    pub rms_log_residual: f64,
    /// False when the residual exceeds the power-law plausibility threshold.
    pub power_law: bool,
}

impl DecayReport {
    pub fn amplitude_deviation(&self) -> f64 {
        (self.alpha_hat - self.alpha_pred).abs() / self.alpha_pred
    }
}

pub const POWER_LAW_RMS_THRESHOLD: f64 = 0.05;

/// Least-squares log-log fit over a window on a positive sampled profile.
fn log_log_fit(r: &[f64], u: &[f64]) -> (f64, f64, f64) {
    let n = r.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (&ri, &ui) in r.iter().zip(u) {
        let x = ri.ln();
        let y = ui.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for (&ri, &ui) in r.iter().zip(u) {
        let resid = ui.ln() - (slope * ri.ln() + intercept);
        ss += resid * resid;
    }
    (slope, intercept, (ss / n).sqrt())
}

/// Fits the algebraic tail of a converged solution over a window that starts
/// past the Yukawa-scale transient (r >= 5/(2 sqrt e), >= 5 potential ranges,
/// and >= 8% of r_max to escape the subleading 1/r correction) and ends at
/// 40% of r_max where reflection images are still negligible.
pub fn decay_fit(sol: &Solution) -> Result<DecayReport> {
    let e = sol.e;
    let grid = sol.u.grid();
    let r_max = grid.r_max();
    let range = sol.potential.range_scale();
    let r_lo = (5.0 / (2.0 * e.sqrt()))
        .max(5.0 * range)
        .max(0.08 * r_max);
    let r_hi = 0.4 * r_max;
    if r_lo >= r_hi {
        return Err(SimpleqError::EmptyFitWindow {
            reason: format!(
                "window [{r_lo:.1}, {r_hi:.1}] is empty; enlarge r_max (currently {r_max:.1})"
            ),
        });
    }
    let floor = 1e-13;
    let mut rs = Vec::new();
    let mut us = Vec::new();
    for j in 0..grid.node_count() {
        let r = grid.node(j);
        if r >= r_lo && r <= r_hi && sol.u.values()[j] > 100.0 * floor {
            rs.push(r);
            us.push(sol.u.values()[j]);
        }
    }
    if rs.len() < 16 {
        return Err(SimpleqError::EmptyFitWindow {
            reason: format!(
                "only {} usable points in [{r_lo:.1}, {r_hi:.1}]; tail below resolution floor",
                rs.len()
            ),
        });
    }
    let (slope, intercept, rms) = log_log_fit(&rs, &us);
    let beta = sol.beta_moment;
    let alpha_pred = (1.0 / (2.0 * e) + beta).sqrt() / (PI * PI * sol.rho);
    Ok(DecayReport {
        exponent: -slope,
        alpha_hat: intercept.exp(),
        alpha_pred,
        beta,
        window: (r_lo, r_hi),
        points: rs.len(),
        rms_log_residual: rms,
        power_law: rms <= POWER_LAW_RMS_THRESHOLD,
    })
}

// --- convexity ------------------------------------------------------------------

/// Centered second differences of rho*e with respect to rho on the irregular
/// sample, scaled by 1/(4 pi). Positive profiles support convexity of the
/// energy density; the low/high-rho limits are a and 2.
pub fn convexity_profile(curve: &EnergyCurve) -> Result<Vec<(f64, f64)>> {
    if curve.rows.len() < 3 {
        return Err(SimpleqError::TooFewPoints {
            context: "convexity profile".into(),
            needed: 3,
            got: curve.rows.len(),
        });
    }
    if let Err(row) = curve.monotone_in_rho() {
        return Err(SimpleqError::NonMonotoneCurve { row });
    }
    let rho: Vec<f64> = curve.rows.iter().map(|r| r.rho).collect();
    let f: Vec<f64> = curve.rows.iter().map(|r| r.rho * r.e).collect();
    let mut out = Vec::with_capacity(rho.len() - 2);
    for i in 1..rho.len() - 1 {
        let h1 = rho[i] - rho[i - 1];
        let h2 = rho[i + 1] - rho[i];
        let d2 = 2.0 * (h1 * f[i + 1] - (h1 + h2) * f[i] + h2 * f[i - 1])
            / (h1 * h2 * (h1 + h2));
        out.push((rho[i], d2 / (4.0 * PI)));
    }
    Ok(out)
}

// --- reference comparison ----------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub max_rel_deviation: f64,
    pub points_used: usize,
    pub points_skipped: usize,
}

/// Max relative deviation of reference rows (rho, e) from the interpolated
/// curve; rows outside the sampled rho range are skipped with a count.
pub fn compare_reference(
    curve: &EnergyCurve,
    reference: &[(f64, f64)],
) -> Result<ComparisonReport> {
    let mut max_dev = 0.0f64;
    let mut used = 0;
    let mut skipped = 0;
    for &(rho_ref, e_ref) in reference {
        match invert_curve(curve, rho_ref) {
            Ok(e_curve) => {
                max_dev = max_dev.max((e_curve - e_ref).abs() / e_ref);
                used += 1;
            }
            Err(SimpleqError::OutOfRange { .. }) => skipped += 1,
            Err(other) => return Err(other),
        }
    }
    Ok(ComparisonReport {
        max_rel_deviation: max_dev,
        points_used: used,
        points_skipped: skipped,
    })
}

// --- convergence rate ---------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct RateReport {
    /// Log-log slope of the mass deficit 1/rho - a_n over the window; the
    /// exact step identity makes this sequence logistic (slope near -1).
    pub mass_slope: f64,
    /// Log-log slope of the constraint deficit b_n - b_final; this is the
    /// field convergence rate (around -3.5 for the exponential potential).
    pub constraint_slope: f64,
    /// max over the run of n (a_n - b_n)^2.
    pub rate_bound: f64,
    pub window: (usize, usize),
}

/// Measures convergence rates over the stable midrange n in [10, 200]
/// (clipped to 80% of the recorded trace).
pub fn convergence_rate(trace: &IterationTrace) -> Result<RateReport> {
    let n = trace.len();
    if n < 20 {
        return Err(SimpleqError::TooFewPoints {
            context: "convergence rate".into(),
            needed: 20,
            got: n,
        });
    }
    let b_final = trace.steps[n - 1].b;
    let hi = 200.min((n as f64 * 0.8) as usize).max(20);
    let lo = 10;
    let mut rate_bound = 0.0f64;
    for s in &trace.steps {
        rate_bound = rate_bound.max(s.n as f64 * (s.a - s.b) * (s.a - s.b));
    }
    let slope_of = |value: &dyn Fn(&crate::solver::TraceStep) -> f64| -> f64 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &trace.steps {
            if s.n < lo || s.n > hi {
                continue;
            }
            let v = value(s);
            if v > 1e-300 {
                xs.push((s.n as f64).ln());
                ys.push(v.ln());
            }
        }
        if xs.len() < 5 {
            return 0.0;
        }
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-300 {
            0.0
        } else {
            (n * sxy - sx * sy) / denom
        }
    };
    let mass_slope = slope_of(&|s| b_final - s.a);
    let constraint_slope = slope_of(&|s| s.b - b_final);
    Ok(RateReport {
        mass_slope,
        constraint_slope,
        rate_bound,
        window: (lo, hi),
    })
}
