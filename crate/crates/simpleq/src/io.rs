//! File formats: two-column CSV for fields and spectra, curve CSV, solution
//! JSON. Floats are printed with 17 significant digits so every file
//! round-trips to the exact f64, and writes go through a temp file + rename
//! so failures never leave partial outputs.

use crate::analysis::EnergyCurve;
use crate::error::{Result, SimpleqError};
use crate::grid::RadialField;
use crate::solver::Solution;
use crate::transform::SpectralField;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Full-precision decimal text for an f64 (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> SimpleqError {
    SimpleqError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(contents.as_bytes()).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn radial_csv(f: &RadialField) -> String {
    let mut out = String::with_capacity(f.values().len() * 48);
    out.push_str("r,value\n");
    for (j, &v) in f.values().iter().enumerate() {
        out.push_str(&fmt_f64(f.grid().node(j)));
        out.push(',');
        out.push_str(&fmt_f64(v));
        out.push('\n');
    }
    out
}

pub fn write_radial_csv(path: &Path, f: &RadialField) -> Result<()> {
    write_atomic(path, &radial_csv(f))
}

pub fn spectral_csv(f: &SpectralField) -> String {
    let mut out = String::with_capacity(f.values().len() * 48);
    out.push_str("k,value\n");
    for (i, &v) in f.values().iter().enumerate() {
        out.push_str(&fmt_f64(f.wavenumber(i)));
        out.push(',');
        out.push_str(&fmt_f64(v));
        out.push('\n');
    }
    out
}

pub fn write_spectral_csv(path: &Path, f: &SpectralField) -> Result<()> {
    write_atomic(path, &spectral_csv(f))
}

pub fn curve_csv(curve: &EnergyCurve) -> String {
    let mut out = String::from("e,rho,rho_lo,rho_hi,e_over_4pi_rho\n");
    for row in &curve.rows {
        out.push_str(&fmt_f64(row.e));
        out.push(',');
        out.push_str(&fmt_f64(row.rho));
        out.push(',');
        out.push_str(&fmt_f64(row.rho_lo));
        out.push(',');
        out.push_str(&fmt_f64(row.rho_hi));
        out.push(',');
        out.push_str(&fmt_f64(row.e_over_4pi_rho));
        out.push('\n');
    }
    out
}

pub fn write_curve_csv(path: &Path, curve: &EnergyCurve) -> Result<()> {
    write_atomic(path, &curve_csv(curve))
}

/// Solution summary JSON.
pub fn solution_json(sol: &Solution) -> String {
    let grid = sol.u.grid();
    let value = serde_json::json!({
        "e": sol.e,
        "rho": sol.rho,
        "a_final": sol.a_final,
        "b_final": sol.b_final,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "stop_reason": sol.stop,
        "residual_fixed_point": sol.residual_fixed_point,
        "constraint_residual": sol.constraint_residual,
        "s_at_zero": sol.s_at_zero,
        "beta_moment": sol.beta_moment,
        "int_v": sol.int_v,
        "grid": {
            "n": grid.n_points(),
            "dr": grid.spacing(),
            "rmax": grid.r_max(),
        },
        "potential": sol.potential.to_string(),
    });
    serde_json::to_string_pretty(&value).expect("solution JSON serialization")
}

pub fn write_solution_json(path: &Path, sol: &Solution) -> Result<()> {
    let mut text = solution_json(sol);
    text.push('\n');
    write_atomic(path, &text)
}

fn parse_two_columns(path: &Path, what: &str, header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if idx == 0 {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() == 2 && cols[0].eq_ignore_ascii_case(header[0]) {
                continue; // header row
            }
        }
        let mut parts = line.split(',');
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.map(str::trim)
                .ok_or_else(|| SimpleqError::MalformedInput {
                    what: what.into(),
                    line: idx + 1,
                    reason: "expected two comma-separated columns".into(),
                })?
                .parse::<f64>()
                .map_err(|e| SimpleqError::MalformedInput {
                    what: what.into(),
                    line: idx + 1,
                    reason: e.to_string(),
                })
        };
        let x = parse(parts.next())?;
        let y = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(SimpleqError::MalformedInput {
                what: what.into(),
                line: idx + 1,
                reason: "expected exactly two columns".into(),
            });
        }
        rows.push((x, y));
    }
    if rows.is_empty() {
        return Err(SimpleqError::MalformedInput {
            what: what.into(),
            line: 0,
            reason: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// Reads a tabulated potential CSV (`r,V` with header).
pub fn read_potential_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    parse_two_columns(path, "potential table".into(), ["r", "V"])
}

/// Reads reference data CSV (`rho,e` with header).
pub fn read_reference_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    parse_two_columns(path, "reference data".into(), ["rho", "e"])
}

/// Reads a previously written curve CSV.
pub fn read_curve_csv(path: &Path) -> Result<Vec<crate::analysis::CurveRow>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (idx == 0 && line.starts_with('e')) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(SimpleqError::MalformedInput {
                what: "curve".into(),
                line: idx + 1,
                reason: format!("expected 5 columns, got {}", cols.len()),
            });
        }
        let mut vals = [0.0f64; 5];
        for (slot, tok) in vals.iter_mut().zip(&cols) {
            *slot = tok.parse().map_err(|e: std::num::ParseFloatError| {
                SimpleqError::MalformedInput {
                    what: "curve".into(),
                    line: idx + 1,
                    reason: e.to_string(),
                }
            })?;
        }
        rows.push(crate::analysis::CurveRow {
            e: vals[0],
            rho: vals[1],
            rho_lo: vals[2],
            rho_hi: vals[3],
            e_over_4pi_rho: vals[4],
            converged: true,
            iterations: 0,
        });
    }
    if rows.is_empty() {
        return Err(SimpleqError::MalformedInput {
            what: "curve".into(),
            line: 0,
            reason: "no data rows".into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use std::sync::Arc;

    #[test]
    fn radial_csv_round_trips_exactly() {
        let grid = Arc::new(RadialGrid::with_r_max(16, 4.0).unwrap());
        let f = RadialField::from_fn(grid, |r| (1.0 + r).recip() * 0.123456789012345678).unwrap();
        let text = radial_csv(&f);
        for (line, (j, &v)) in text.lines().skip(1).zip(f.values().iter().enumerate()) {
            let mut parts = line.split(',');
            let r: f64 = parts.next().unwrap().parse().unwrap();
            let val: f64 = parts.next().unwrap().parse().unwrap();
            assert_eq!(r, f.grid().node(j));
            assert_eq!(val, v);
        }
    }

    #[test]
    fn reference_reader_accepts_header_and_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.csv");
        std::fs::write(&path, "rho,e\n# comment\n1.0e-3,2.5e-3\n2e-3,6e-3\n").unwrap();
        let rows = read_reference_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], (1.0e-3, 2.5e-3));
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "r,V\n0.0,1.0\n0.5,not_a_number\n").unwrap();
        match read_potential_csv(&path) {
            Err(SimpleqError::MalformedInput { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed-input error, got {other:?}"),
        }
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert!(std::fs::read_dir(dir.path()).unwrap().count() == 1);
    }
}
