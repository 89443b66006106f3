mod common;

use common::*;

#[test]
fn lti_bound_contains_sampled_srg_points() {
    let s = lti_soundness(50, 10_000, 11);
    assert!(s.samples > 450_000);
    assert_eq!(s.violations, 0, "{s:?}");
}

#[test]
fn sector_bound_contains_sampled_srg_points() {
    let s = sector_soundness(20, 10_000, 12);
    assert_eq!(s.violations, 0, "{s:?}");
}

#[test]
fn lti_bound_tightens_with_more_base_points() {
    let r = tightness_trend(&[5, 11, 41, 161], 400);
    assert!(r.windows(2).all(|w| w[1] <= w[0]), "{r:?}");
}

#[test]
fn example1_transform_matches_closed_form() {
    for (k1, k2) in [(2.0, 3.0), (0.5, 1.5)] {
        let e = loop_transform_error(k1, k2);
        assert!(e < 1e-9, "({k1}, {k2}): {e}");
    }
}
