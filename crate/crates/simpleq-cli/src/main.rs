//! Command-line front end: single solves, density-curve sweeps, scattering,
//! tail analysis, convexity and asymptotics diagnostics, and reference
//! comparison. Outputs are CSV/JSON (17-significant-digit floats) plus
//! optional deterministic SVG plots.
//!
//! Exit codes: 0 success, 1 solver non-convergence, 2 invalid input.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use simpleq::analysis::{
    compare_reference, convexity_profile, decay_fit, extract_beta, high_density_check,
    lhy_check, lhy_constant, log_spaced, trace_curve, trace_curve_serial, EnergyCurve,
};
use simpleq::io as sio;
use simpleq::operators::scattering_length;
use simpleq::potential::PotentialSpec;
use simpleq::solver::{solve, SolveParams};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "simpleq",
    about = "Bose-gas simple-equation solver and analysis toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Potential: exp:A[,range] | gauss:A[,range] | well:v0,R | file:path.csv
    #[arg(long)]
    potential: String,
    /// Relative stopping tolerance for the iteration bracket/stall
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// Output grid node count (power of two recommended)
    #[arg(long)]
    grid_n: Option<usize>,
    /// Output grid radius
    #[arg(long)]
    grid_rmax: Option<f64>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct RangeFlags {
    #[arg(long)]
    e_min: f64,
    #[arg(long)]
    e_max: f64,
    #[arg(long)]
    points: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at a single energy; writes solution.json, u.csv, s_of_k.csv
    Solve {
        #[command(flatten)]
        flags: SolverFlags,
        #[arg(long)]
        e: f64,
    },
    /// Trace rho(e) over a log-spaced energy grid; writes curve.csv
    Curve {
        #[command(flatten)]
        flags: SolverFlags,
        #[command(flatten)]
        range: RangeFlags,
        /// Also write curve.svg
        #[arg(long)]
        svg: bool,
    },
    /// Zero-energy scattering solve; writes scattering.json and phi.csv
    Scattering {
        #[command(flatten)]
        flags: SolverFlags,
    },
    /// Far-field power-law fit at one energy; writes decay.json and u.csv
    Decay {
        #[command(flatten)]
        flags: SolverFlags,
        #[arg(long)]
        e: f64,
    },
    /// Convexity profile of rho*e along a curve; writes convexity.csv
    Convexity {
        #[command(flatten)]
        flags: SolverFlags,
        #[command(flatten)]
        range: RangeFlags,
        #[arg(long)]
        svg: bool,
    },
    /// Dilute/dense asymptotics along a curve; writes asymptotics.json
    Asymptotics {
        #[command(flatten)]
        flags: SolverFlags,
        #[command(flatten)]
        range: RangeFlags,
    },
    /// Compare a saved curve against reference (rho, e) data
    Compare {
        /// curve.csv written by the curve command
        #[arg(long)]
        curve: PathBuf,
        /// reference CSV with header rho,e
        #[arg(long)]
        reference: PathBuf,
    },
}

fn params_from(flags: &SolverFlags, e: f64) -> SolveParams {
    SolveParams {
        e,
        bracket_tol: flags.tol,
        max_iter: flags.max_iter,
        grid_n: flags.grid_n,
        grid_r_max: flags.grid_rmax,
        fine_spacing_scale: 1.0,
    }
}

/// SIMPLEQ_THREADS caps curve parallelism; 0 forces the serial path.
fn thread_cap() -> Option<usize> {
    std::env::var("SIMPLEQ_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
}

fn traced_curve(
    spec: &PotentialSpec,
    es: &[f64],
    params: &SolveParams,
) -> anyhow::Result<EnergyCurve> {
    let curve = match thread_cap() {
        Some(0) => trace_curve_serial(spec, es, params)?,
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building thread pool")?;
            pool.install(|| trace_curve(spec, es, params))?
        }
        _ => trace_curve(spec, es, params)?,
    };
    for w in &curve.warnings {
        eprintln!("warning: {w}");
    }
    Ok(curve)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve { flags, e } => {
            let spec = PotentialSpec::parse(&flags.potential)?;
            let sol = solve(&spec, &params_from(&flags, e))?;
            sio::write_solution_json(&flags.out.join("solution.json"), &sol)?;
            sio::write_radial_csv(&flags.out.join("u.csv"), &sol.u)?;
            sio::write_spectral_csv(&flags.out.join("s_of_k.csv"), &sol.s_of_k)?;
            println!(
                "e = {:e}  rho = {:.12e}  iterations = {}  converged = {}",
                sol.e, sol.rho, sol.iterations, sol.converged
            );
            Ok(if sol.converged { 0 } else { 1 })
        }
        Command::Curve { flags, range, svg } => {
            let spec = PotentialSpec::parse(&flags.potential)?;
            let es = log_spaced(range.e_min, range.e_max, range.points)?;
            let curve = traced_curve(&spec, &es, &params_from(&flags, range.e_min))?;
            sio::write_curve_csv(&flags.out.join("curve.csv"), &curve)?;
            write_curve_meta(&flags.out.join("curve_meta.json"), &curve)?;
            if svg {
                let svg_text = simpleq::plot::curve_svg(&curve)?;
                sio::write_atomic(&flags.out.join("curve.svg"), &svg_text)?;
            }
            println!(
                "curve: {} rows, rho in [{:.6e}, {:.6e}], a = {:.8}",
                curve.rows.len(),
                curve.rows.first().map_or(f64::NAN, |r| r.rho),
                curve.rows.last().map_or(f64::NAN, |r| r.rho),
                curve.scattering_length
            );
            Ok(if curve.rows.iter().all(|r| r.converged) { 0 } else { 1 })
        }
        Command::Scattering { flags } => {
            let spec = PotentialSpec::parse(&flags.potential)?;
            let res = scattering_length(&spec)?;
            let json = serde_json::json!({
                "a": res.a,
                "a_integral": res.a_integral,
                "a_boundary": res.a_boundary,
                "relative_gap": (res.a_boundary - res.a_integral).abs() / res.a_integral.abs(),
            });
            sio::write_atomic(
                &flags.out.join("scattering.json"),
                &format!("{}\n", serde_json::to_string_pretty(&json)?),
            )?;
            sio::write_radial_csv(&flags.out.join("phi.csv"), &res.phi)?;
            println!(
                "a = {:.10}  (boundary read-off {:.10})",
                res.a, res.a_boundary
            );
            Ok(0)
        }
        Command::Decay { flags, e } => {
            let spec = PotentialSpec::parse(&flags.potential)?;
            let mut params = params_from(&flags, e);
            if params.grid_r_max.is_none() {
                // the tail window needs room past the default solve radius
                params.grid_r_max = Some(150.0 / e.sqrt());
            }
            let sol = solve(&spec, &params)?;
            let report = decay_fit(&sol)?;
            let beta = extract_beta(&sol)?;
            let json = serde_json::json!({
                "e": e,
                "rho": sol.rho,
                "exponent": report.exponent,
                "alpha_hat": report.alpha_hat,
                "alpha_pred": report.alpha_pred,
                "beta_moment": beta.moment,
                "beta_small_k_fit": beta.small_k_fit,
                "window": { "r_lo": report.window.0, "r_hi": report.window.1 },
                "points": report.points,
                "rms_log_residual": report.rms_log_residual,
                "power_law": report.power_law,
            });
            sio::write_atomic(
                &flags.out.join("decay.json"),
                &format!("{}\n", serde_json::to_string_pretty(&json)?),
            )?;
            sio::write_radial_csv(&flags.out.join("u.csv"), &sol.u)?;
            println!(
                "tail exponent = {:.4}, amplitude = {:.6e} (predicted {:.6e})",
                report.exponent, report.alpha_hat, report.alpha_pred
            );
            Ok(if sol.converged { 0 } else { 1 })
        }
        Command::Convexity { flags, range, svg } => {
            let spec = PotentialSpec::parse(&flags.potential)?;
            let es = log_spaced(range.e_min, range.e_max, range.points)?;
            let curve = traced_curve(&spec, &es, &params_from(&flags, range.e_min))?;
            let profile = convexity_profile(&curve)?;
            let mut text = String::from("rho,second_diff\n");
            for (rho, d2) in &profile {
                text.push_str(&sio::fmt_f64(*rho));
                text.push(',');
                text.push_str(&sio::fmt_f64(*d2));
                text.push('\n');
            }
            sio::write_atomic(&flags.out.join("convexity.csv"), &text)?;
            if svg {
                let svg_text =
                    simpleq::plot::convexity_svg(&profile, curve.scattering_length)?;
                sio::write_atomic(&flags.out.join("convexity.svg"), &svg_text)?;
            }
            let all_positive = profile.iter().all(|&(_, d2)| d2 > 0.0);
            println!(
                "convexity: {} interior points, all positive: {all_positive}",
                profile.len()
            );
            Ok(if curve.rows.iter().all(|r| r.converged) { 0 } else { 1 })
        }
        Command::Asymptotics { flags, range } => {
            let spec = PotentialSpec::parse(&flags.potential)?;
            let es = log_spaced(range.e_min, range.e_max, range.points)?;
            let curve = traced_curve(&spec, &es, &params_from(&flags, range.e_min))?;
            let lhy = lhy_check(&curve);
            let dense = high_density_check(&curve, curve.int_v);
            println!("dilute limit: c_hat -> {:.6}", lhy_constant());
            for p in &lhy {
                println!(
                    "  rho = {:.4e}  rho a^3 = {:.3e}  c_hat = {:.4}",
                    p.rho, p.rho_a3, p.c_hat
                );
            }
            if let Some(last) = dense.last() {
                println!(
                    "dense limit: e / ((rho/2) Int V) = {:.6} at rho = {:.4e}",
                    last.ratio, last.rho
                );
            }
            let json = serde_json::json!({
                "lhy_constant": lhy_constant(),
                "scattering_length": curve.scattering_length,
                "lhy": lhy.iter().map(|p| {
                    serde_json::json!({"rho": p.rho, "rho_a3": p.rho_a3, "c_hat": p.c_hat})
                }).collect::<Vec<_>>(),
                "high_density": dense.iter().map(|p| {
                    serde_json::json!({"rho": p.rho, "ratio": p.ratio})
                }).collect::<Vec<_>>(),
            });
            sio::write_atomic(
                &flags.out.join("asymptotics.json"),
                &format!("{}\n", serde_json::to_string_pretty(&json)?),
            )?;
            Ok(if curve.rows.iter().all(|r| r.converged) { 0 } else { 1 })
        }
        Command::Compare { curve, reference } => {
            let rows = sio::read_curve_csv(&curve)?;
            let reference_rows = sio::read_reference_csv(&reference)?;
            let curve = EnergyCurve {
                rows,
                potential: String::new(),
                scattering_length: f64::NAN,
                int_v: f64::NAN,
                warnings: Vec::new(),
            };
            let report = compare_reference(&curve, &reference_rows)?;
            if report.points_skipped > 0 {
                eprintln!(
                    "warning: {} reference rows outside the sampled density range were skipped",
                    report.points_skipped
                );
            }
            if report.points_used == 0 {
                return Err(anyhow!("no reference rows overlap the curve"));
            }
            println!(
                "max relative deviation over {} reference points: {:.6e}",
                report.points_used, report.max_rel_deviation
            );
            Ok(0)
        }
    }
}

fn write_curve_meta(path: &Path, curve: &EnergyCurve) -> anyhow::Result<()> {
    let json = serde_json::json!({
        "potential": curve.potential,
        "scattering_length": curve.scattering_length,
        "int_v": curve.int_v,
        "rows": curve.rows.len(),
        "converged_rows": curve.rows.iter().filter(|r| r.converged).count(),
        "iterations": curve.rows.iter().map(|r| r.iterations).collect::<Vec<_>>(),
        "warnings": curve.warnings,
    });
    sio::write_atomic(path, &format!("{}\n", serde_json::to_string_pretty(&json)?))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
