//! Property tests for the quadrature and transform invariants.

use proptest::prelude::*;
use simpleq::grid::{integrate_radial, l1_distance, RadialField, RadialGrid};
use simpleq::potential::PotentialSpec;
use simpleq::transform::autoconvolve;
use std::sync::Arc;

fn grid(n: usize, r_max: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::with_r_max(n, r_max).unwrap())
}

/// Random smooth-ish field: a few Gaussian bumps with bounded amplitudes.
fn bump_field(params: &[(f64, f64, f64)], g: &Arc<RadialGrid>) -> RadialField {
    RadialField::from_fn(g.clone(), |r| {
        params
            .iter()
            .map(|&(amp, center, width)| amp * (-(r - center) * (r - center) / (width * width)).exp())
            .sum()
    })
    .unwrap()
}

fn bump_params() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec(
        (
            -2.0f64..2.0,   // amplitude (either sign)
            0.0f64..6.0,    // center
            0.3f64..1.5,    // width
        ),
        1..4,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadrature_is_linear(params_f in bump_params(), params_g in bump_params(),
                            alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let g = grid(512, 20.0);
        let f1 = bump_field(&params_f, &g);
        let f2 = bump_field(&params_g, &g);
        let combo = RadialField::new(
            g.clone(),
            f1.values().iter().zip(f2.values()).map(|(a, b)| alpha * a + beta * b).collect(),
        ).unwrap();
        let lhs = integrate_radial(&combo);
        let rhs = alpha * integrate_radial(&f1) + beta * integrate_radial(&f2);
        let abs_f1 = RadialField::new(g.clone(), f1.values().iter().map(|x| x.abs()).collect()).unwrap();
        let abs_f2 = RadialField::new(g, f2.values().iter().map(|x| x.abs()).collect()).unwrap();
        let budget = 1e-12 * (alpha.abs() * integrate_radial(&abs_f1)
            + beta.abs() * integrate_radial(&abs_f2))
            + 1e-300;
        prop_assert!((lhs - rhs).abs() <= budget.max(1e-10));
    }

    #[test]
    fn quadrature_of_nonnegative_is_nonnegative(params in bump_params()) {
        let g = grid(256, 20.0);
        let f = bump_field(&params, &g);
        let nonneg = RadialField::new(g, f.values().iter().map(|x| x.abs()).collect()).unwrap();
        prop_assert!(integrate_radial(&nonneg) >= 0.0);
    }

    #[test]
    fn l1_distance_matches_independent_quadrature(params_f in bump_params(),
                                                  params_g in bump_params()) {
        let g = grid(512, 20.0);
        let f1 = bump_field(&params_f, &g);
        let f2 = bump_field(&params_g, &g);
        let via_l1 = l1_distance(&f1, &f2).unwrap();
        let diff = RadialField::new(
            g,
            f1.values().iter().zip(f2.values()).map(|(a, b)| (a - b).abs()).collect(),
        ).unwrap();
        let direct = integrate_radial(&diff);
        prop_assert!((via_l1 - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn potential_samples_are_nonnegative(amp in 0.01f64..50.0, range in 0.1f64..4.0,
                                         which in 0usize..3) {
        let spec = match which {
            0 => PotentialSpec::exponential(amp, range).unwrap(),
            1 => PotentialSpec::gaussian(amp, range).unwrap(),
            _ => PotentialSpec::square_well(amp, range).unwrap(),
        };
        let g = grid(256, 30.0);
        let f = spec.sample(g).unwrap();
        prop_assert!(f.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn autoconvolution_mass_identity(params in bump_params()) {
        // Int (f*f) = (Int f)^2 for fields decayed inside the grid
        let g = grid(1024, 30.0);
        let f0 = bump_field(&params, &g);
        let f = RadialField::new(
            g,
            f0.values().iter().map(|x| x.abs() + 1e-3).collect(),
        ).unwrap();
        // taper the constant offset so the field decays before r_max
        let g2 = f.grid().clone();
        let tapered = RadialField::new(
            g2.clone(),
            (0..g2.node_count())
                .map(|j| f.values()[j] * (-(g2.node(j) / 8.0).powi(4)).exp())
                .collect(),
        ).unwrap();
        let conv = autoconvolve(&tapered);
        let total = integrate_radial(&tapered);
        let mass = integrate_radial(&conv);
        prop_assert!(
            (mass - total * total).abs() <= 1e-8 * total * total,
            "mass identity violated: {} vs {}", mass, total * total
        );
        // non-negative input convolves to non-negative output up to ringing,
        // measured relative to the convolution's own scale
        let peak = conv.values().iter().cloned().fold(0.0f64, f64::max);
        let floor = conv.values().iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(floor > -1e-12 * peak.max(1.0), "floor {} vs peak {}", floor, peak);
    }
}
