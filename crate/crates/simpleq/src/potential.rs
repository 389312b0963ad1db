//! Repulsive interaction potentials: built-in families and tabulated data.

use crate::error::{Result, SimpleqError};
use crate::grid::{integrate_radial, RadialField, RadialGrid};
use std::sync::Arc;

/// A non-negative radial potential with exponential-decay metadata.
///
/// Every family satisfies V(r) <= A exp(-B r) beyond its range scale, which
/// is the hypothesis the tail analysis relies on. Tabulated input is accepted
/// as-is; integrability beyond what the table shows is the caller's to judge.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// A * exp(-r / range)
    Exponential { amplitude: f64, range: f64 },
    /// A * exp(-(r / range)^2)
    Gaussian { amplitude: f64, range: f64 },
    /// v0 on [0, radius], zero outside
    SquareWell { v0: f64, radius: f64 },
    /// Piecewise-linear interpolation of (r, V) pairs, clamped at zero
    /// outside the table when `zero_extend` is set.
    Tabulated {
        table: Vec<(f64, f64)>,
        zero_extend: bool,
    },
}

impl PotentialSpec {
    pub fn exponential(amplitude: f64, range: f64) -> Result<Self> {
        check_positive(amplitude, "amplitude")?;
        check_positive(range, "range")?;
        Ok(Self::Exponential { amplitude, range })
    }

    pub fn gaussian(amplitude: f64, range: f64) -> Result<Self> {
        check_positive(amplitude, "amplitude")?;
        check_positive(range, "range")?;
        Ok(Self::Gaussian { amplitude, range })
    }

    pub fn square_well(v0: f64, radius: f64) -> Result<Self> {
        check_positive(v0, "well depth")?;
        check_positive(radius, "well radius")?;
        Ok(Self::SquareWell { v0, radius })
    }

    /// Table rows must have strictly increasing r >= 0 and non-negative V.
    pub fn tabulated(table: Vec<(f64, f64)>, zero_extend: bool) -> Result<Self> {
        if table.len() < 2 {
            return Err(SimpleqError::InvalidPotential {
                reason: format!("table needs at least 2 rows, got {}", table.len()),
            });
        }
        let mut prev = -1.0;
        for (i, &(r, v)) in table.iter().enumerate() {
            if !(r.is_finite() && v.is_finite()) {
                return Err(SimpleqError::InvalidPotential {
                    reason: format!("non-finite table entry at row {i}"),
                });
            }
            if r < 0.0 || r <= prev {
                return Err(SimpleqError::InvalidPotential {
                    reason: format!("table radii must be non-negative and strictly increasing (row {i})"),
                });
            }
            if v < 0.0 {
                return Err(SimpleqError::InvalidPotential {
                    reason: format!("negative potential value {v} at row {i}; V must be non-negative"),
                });
            }
            prev = r;
        }
        Ok(Self::Tabulated { table, zero_extend })
    }

    /// Pointwise value V(r).
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Exponential { amplitude, range } => amplitude * (-r / range).exp(),
            Self::Gaussian { amplitude, range } => {
                let x = r / range;
                amplitude * (-x * x).exp()
            }
            Self::SquareWell { v0, radius } => {
                if r <= *radius {
                    *v0
                } else {
                    0.0
                }
            }
            Self::Tabulated { table, .. } => {
                if r <= table[0].0 {
                    return table[0].1;
                }
                if r >= table[table.len() - 1].0 {
                    return 0.0;
                }
                let idx = table.partition_point(|&(rt, _)| rt <= r);
                let (r0, v0) = table[idx - 1];
                let (r1, v1) = table[idx];
                v0 + (v1 - v0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// Characteristic range scale (interpolation/grid sizing).
    pub fn range_scale(&self) -> f64 {
        match self {
            Self::Exponential { range, .. } | Self::Gaussian { range, .. } => *range,
            Self::SquareWell { radius, .. } => *radius,
            Self::Tabulated { table, .. } => table[table.len() - 1].0.max(f64::MIN_POSITIVE),
        }
    }

    /// Radius beyond which the potential is negligible relative to its peak
    /// (below ~1e-16 of it for the smooth families).
    pub fn support_radius(&self) -> f64 {
        match self {
            Self::Exponential { range, .. } => 38.0 * range,
            Self::Gaussian { range, .. } => 6.2 * range,
            Self::SquareWell { radius, .. } => *radius,
            Self::Tabulated { table, .. } => table[table.len() - 1].0,
        }
    }

    /// Decay-envelope constants (A, B) with V(r) <= A exp(-B r) past the range.
    pub fn decay_envelope(&self) -> (f64, f64) {
        match self {
            Self::Exponential { amplitude, range } => (*amplitude, 1.0 / range),
            Self::Gaussian { amplitude, range } => (*amplitude, 1.0 / range),
            // compactly supported families decay faster than any exponential
            Self::SquareWell { v0, radius } => (*v0, 64.0 / radius),
            Self::Tabulated { table, .. } => {
                let peak = table.iter().map(|&(_, v)| v).fold(0.0, f64::max);
                let r_end = table[table.len() - 1].0;
                (peak, 64.0 / r_end.max(f64::MIN_POSITIVE))
            }
        }
    }

    /// Samples V on a grid; tabulated specs must cover [0, r_max] unless they
    /// declare zero-extension.
    pub fn sample(&self, grid: Arc<RadialGrid>) -> Result<RadialField> {
        if let Self::Tabulated { table, zero_extend } = self {
            let r_end = table[table.len() - 1].0;
            if !zero_extend && r_end < grid.r_max() {
                return Err(SimpleqError::InvalidPotential {
                    reason: format!(
                        "table ends at r = {r_end} < r_max = {}; re-tabulate or declare zero extension",
                        grid.r_max()
                    ),
                });
            }
        }
        RadialField::from_fn(grid, |r| self.eval(r))
    }

    /// Int V(x) dx over R^3 by grid quadrature.
    pub fn integral_v(&self, grid: Arc<RadialGrid>) -> Result<f64> {
        Ok(integrate_radial(&self.sample(grid)?))
    }

    /// Parses a CLI spec string: `exp:A[,range]`, `gauss:A[,range]`,
    /// `well:v0,R`, `file:path.csv`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |reason: String| SimpleqError::InvalidPotential { reason };
        let (family, args) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("expected FAMILY:ARGS, got `{s}`")))?;
        let nums = |args: &str| -> Result<Vec<f64>> {
            args.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("`{t}` is not a number in `{s}`")))
                })
                .collect()
        };
        match family {
            "exp" => {
                let v = nums(args)?;
                match v.as_slice() {
                    [a] => Self::exponential(*a, 1.0),
                    [a, r] => Self::exponential(*a, *r),
                    _ => Err(bad(format!("exp takes 1 or 2 numbers, got {}", v.len()))),
                }
            }
            "gauss" => {
                let v = nums(args)?;
                match v.as_slice() {
                    [a] => Self::gaussian(*a, 1.0),
                    [a, r] => Self::gaussian(*a, *r),
                    _ => Err(bad(format!("gauss takes 1 or 2 numbers, got {}", v.len()))),
                }
            }
            "well" => {
                let v = nums(args)?;
                match v.as_slice() {
                    [v0, radius] => Self::square_well(*v0, *radius),
                    _ => Err(bad(format!("well takes 2 numbers (v0,R), got {}", v.len()))),
                }
            }
            "file" => {
                let table = crate::io::read_potential_csv(std::path::Path::new(args))?;
                Self::tabulated(table, true)
            }
            other => Err(bad(format!("unknown potential family `{other}`"))),
        }
    }
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(SimpleqError::InvalidPotential {
            reason: format!("{what} must be positive and finite, got {x}"),
        })
    }
}

impl std::fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Exponential { amplitude, range } => write!(f, "exp:{amplitude},{range}"),
            Self::Gaussian { amplitude, range } => write!(f, "gauss:{amplitude},{range}"),
            Self::SquareWell { v0, radius } => write!(f, "well:{v0},{radius}"),
            Self::Tabulated { table, .. } => write!(f, "tabulated[{} rows]", table.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid(n: usize, r_max: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::with_r_max(n, r_max).unwrap())
    }

    #[test]
    fn exponential_samples_match_definition() {
        let spec = PotentialSpec::exponential(1.0, 1.0).unwrap();
        let f = spec.sample(grid(64, 8.0)).unwrap();
        for (j, &v) in f.values().iter().enumerate() {
            let r = f.grid().node(j);
            assert_relative_eq!(v, (-r).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn square_well_is_an_indicator() {
        let spec = PotentialSpec::square_well(3.0, 2.0).unwrap();
        assert_eq!(spec.eval(1.9), 3.0);
        assert_eq!(spec.eval(2.0), 3.0);
        assert_eq!(spec.eval(2.1), 0.0);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let spec =
            PotentialSpec::tabulated(vec![(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)], true).unwrap();
        assert_relative_eq!(spec.eval(0.5), 1.5);
        assert_relative_eq!(spec.eval(1.5), 0.5);
        assert_eq!(spec.eval(3.0), 0.0);
    }

    #[test]
    fn tabulated_rejects_negative_values() {
        let err = PotentialSpec::tabulated(vec![(0.0, 1.0), (1.0, -0.5)], true);
        assert!(matches!(err, Err(SimpleqError::InvalidPotential { .. })));
    }

    #[test]
    fn tabulated_without_extension_must_cover_grid() {
        let spec = PotentialSpec::tabulated(vec![(0.0, 1.0), (1.0, 0.0)], false).unwrap();
        assert!(spec.sample(grid(64, 8.0)).is_err());
    }

    #[test]
    fn integral_of_exponential_is_8pi() {
        let spec = PotentialSpec::exponential(1.0, 1.0).unwrap();
        let val = spec.integral_v(grid(16384, 60.0)).unwrap();
        assert_relative_eq!(val, 8.0 * PI, max_relative = 1e-8);
    }

    #[test]
    fn integral_of_gaussian_is_pi_to_three_halves() {
        let spec = PotentialSpec::gaussian(1.0, 1.0).unwrap();
        let val = spec.integral_v(grid(16384, 40.0)).unwrap();
        assert_relative_eq!(val, PI.powf(1.5), max_relative = 1e-8);
    }

    #[test]
    fn integral_of_zero_table_is_zero() {
        let spec = PotentialSpec::tabulated(vec![(0.0, 0.0), (1.0, 0.0)], true).unwrap();
        assert_eq!(spec.integral_v(grid(256, 8.0)).unwrap(), 0.0);
    }

    #[test]
    fn integral_is_stable_under_refinement() {
        let spec = PotentialSpec::exponential(1.0, 1.0).unwrap();
        let coarse = spec.integral_v(grid(2048, 50.0)).unwrap();
        let fine = spec.integral_v(grid(4096, 50.0)).unwrap();
        // O(dr^2) or better: halving dr moves the value by well under dr^2
        let dr = 50.0 / 2048.0;
        assert!(((coarse - fine) / fine).abs() <= dr * dr);
    }

    #[test]
    fn parse_round_trips_families() {
        assert_eq!(
            PotentialSpec::parse("exp:1.0").unwrap(),
            PotentialSpec::exponential(1.0, 1.0).unwrap()
        );
        assert_eq!(
            PotentialSpec::parse("gauss:2.0,0.5").unwrap(),
            PotentialSpec::gaussian(2.0, 0.5).unwrap()
        );
        assert_eq!(
            PotentialSpec::parse("well:10,1.5").unwrap(),
            PotentialSpec::square_well(10.0, 1.5).unwrap()
        );
        assert!(PotentialSpec::parse("sombrero:1").is_err());
        assert!(PotentialSpec::parse("exp:abc").is_err());
    }
}
