//! Property tests for the utility and cost families: derivative consistency
//! against central finite differences, inverse round-trips, monotonicity,
//! and convexity.

use dermkt_core::{CostSpec, UtilitySpec};
use proptest::prelude::*;

#[test]
fn marginal_matches_finite_difference_at_anchor() {
    // Central finite difference of the value at z = 3, eta = 1.5.
    let u = UtilitySpec::isoelastic(1.5);
    let h = 1e-4;
    let fd = (u.value(3.0 + h).unwrap() - u.value(3.0 - h).unwrap()) / (2.0 * h);
    let analytic = u.marginal(3.0).unwrap();
    assert!(
        (analytic - fd).abs() <= 1e-6,
        "analytic {analytic} vs fd {fd}"
    );
}

#[test]
fn inverse_round_trip_anchors() {
    for &eta in &[0.5, 1.0, 3.0] {
        let u = UtilitySpec::isoelastic(eta);
        for &m in &[0.1, 1.0, 10.0] {
            let z = u.inverse_marginal(m).unwrap();
            let back = u.marginal(z).unwrap();
            assert!(
                (back - m).abs() <= 1e-12 * m.abs().max(1.0),
                "eta {eta}, m {m}: round trip gave {back}"
            );
        }
    }
}

proptest! {
    #[test]
    fn marginal_is_strictly_decreasing(
        eta in 0.05f64..5.0,
        z1 in 1e-3f64..1000.0,
        gap in 1e-3f64..100.0,
    ) {
        let u = UtilitySpec::isoelastic(eta);
        let z2 = z1 + gap;
        prop_assert!(u.marginal(z1).unwrap() > u.marginal(z2).unwrap());
    }

    #[test]
    fn inverse_marginal_inverts_marginal(
        eta in 0.1f64..4.0,
        z in 1e-3f64..1000.0,
    ) {
        let u = UtilitySpec::isoelastic(eta);
        let m = u.marginal(z).unwrap();
        let back = u.inverse_marginal(m).unwrap();
        prop_assert!(
            (back - z).abs() <= 1e-10 * z.abs().max(1.0),
            "z {} -> m {} -> z {}", z, m, back
        );
    }

    #[test]
    fn utility_finite_difference_on_grid(
        eta in 0.1f64..4.0,
        z in 0.05f64..900.0,
    ) {
        let u = UtilitySpec::isoelastic(eta);
        let h = 1e-5 * z.max(1.0);
        let fd = (u.value(z + h).unwrap() - u.value(z - h).unwrap()) / (2.0 * h);
        prop_assert!((u.marginal(z).unwrap() - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
    }

    #[test]
    fn cost_is_convex(
        alpha in 0.001f64..0.1,
        beta in 0.0f64..5.0,
        y1 in 0.0f64..1000.0,
        y2 in 0.0f64..1000.0,
        t in 0.0f64..1.0,
    ) {
        let c = CostSpec::quadratic(alpha, beta, 0.0, 1000.0);
        let blend = t * y1 + (1.0 - t) * y2;
        prop_assert!(
            c.value(blend) <= t * c.value(y1) + (1.0 - t) * c.value(y2) + 1e-12
                + 1e-12 * c.value(y1).abs().max(c.value(y2).abs())
        );
    }

    #[test]
    fn cost_finite_difference(
        alpha in 0.001f64..0.1,
        beta in 0.0f64..5.0,
        y in 1.0f64..999.0,
    ) {
        let c = CostSpec::quadratic(alpha, beta, 0.0, 1000.0);
        let h = 1e-4;
        let fd = (c.value(y + h) - c.value(y - h)) / (2.0 * h);
        prop_assert!((c.marginal(y) - fd).abs() <= 1e-5);
    }
}
