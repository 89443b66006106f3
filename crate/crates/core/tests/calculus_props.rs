mod common;

use common::*;
use proptest::prelude::*;
use srgkit::region::{self, CalcConfig, CoverRegion, DiskAlgebraRegion};
use srgkit::C64;

fn disk() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, 0.1..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn disk_identities_hold(a in disk(), b in disk(), alpha in prop_oneof![-3.0..-0.2f64, 0.2..3.0f64], shift in -2.0..2.0f64) {
        prop_assert!(disk_identities(a, b, alpha, shift, 120).is_ok(), "{:?}", disk_identities(a, b, alpha, shift, 120));
    }

    #[test]
    fn inverse_of_interval_disk(mu in 0.1..3.0f64, width in 0.05..3.0f64, negate in any::<bool>()) {
        let (lo, hi) = if negate { (-mu - width, -mu) } else { (mu, mu + width) };
        let inv = region::disk::inverse((0.5 * (lo + hi), 0.5 * (hi - lo))).unwrap();
        let expect = DiskAlgebraRegion::interval(1.0 / hi, 1.0 / lo);
        let (c0, r0) = inv.as_disk().unwrap();
        let (c1, r1) = expect.as_disk().unwrap();
        prop_assert!((c0 - c1).abs() < 1e-12 && (r0 - r1).abs() < 1e-12);
    }

    #[test]
    fn chord_of_circle_is_disk(c in -3.0..3.0f64, r in 0.2..2.0f64) {
        prop_assert!(circle_chord(c, r, 100).is_ok());
    }

    #[test]
    fn products_and_sums_stay_symmetric(a in disk(), b in disk()) {
        let cfg = CalcConfig::with_cells(100);
        let ca = region::to_cover(&DiskAlgebraRegion::disk(a.0, a.1), 0.05).unwrap();
        let cb = region::to_cover(&DiskAlgebraRegion::disk(b.0, b.1), 0.05).unwrap();
        for r in [region::minkowski_product(&ca, &cb, &cfg).unwrap(), region::improved_sum(&ca, &cb, &cfg).unwrap()] {
            prop_assert!(r.conjugate_defect() < 1e-9 * (1.0 + region::rmin(&r)));
        }
    }

    #[test]
    fn product_contains_pointwise_products(a in disk(), b in disk()) {
        let cfg = CalcConfig::with_cells(100);
        let da = DiskAlgebraRegion::disk(a.0, a.1);
        let db = DiskAlgebraRegion::disk(b.0, b.1);
        let p = region::minkowski_product(&region::to_cover(&da, 0.05).unwrap(), &region::to_cover(&db, 0.05).unwrap(), &cfg).unwrap();
        let sa = sample_region(&da, a.1 / 6.0);
        let sb = sample_region(&db, b.1 / 6.0);
        let prods: Vec<C64> = sa.iter().flat_map(|x| sb.iter().map(move |y| x * y)).collect();
        prop_assert!(covers_all(&p, &prods, 1e-9).is_ok());
    }

    #[test]
    fn rmin_bounds_every_point(pts in prop::collection::vec((-5.0..5.0f64, 0.0..5.0f64), 1..40), eps in 0.0..0.5f64) {
        let pts: Vec<C64> = pts.into_iter().map(|(x, y)| C64::new(x, y)).collect();
        let c = CoverRegion::symmetric(&pts, eps);
        let r = region::rmin(&c);
        prop_assert!(pts.iter().all(|p| p.norm() + eps <= r + 1e-12));
    }

    #[test]
    fn dist_is_a_lower_bound(a in disk(), b in disk()) {
        let da = DiskAlgebraRegion::disk(a.0, a.1);
        let db = DiskAlgebraRegion::disk(b.0, b.1);
        let d = region::dist(&region::to_cover(&da, 0.02).unwrap(), &region::to_cover(&db, 0.02).unwrap());
        let exact = ((a.0 - b.0).abs() - a.1 - b.1).max(0.0);
        prop_assert!(d <= exact + 1e-12);
        prop_assert!(d >= exact - 0.1);
    }
}

#[test]
fn improved_sum_and_product_inclusions() {
    improved_inclusions(&annulus(2.0, 1.0, 0.5), &annulus(-1.0, 0.8, 0.3), 120).unwrap();
    improved_inclusions(&annulus(-1.5, 1.0, 0.6), &DiskAlgebraRegion::disk(0.5, 0.4), 120).unwrap();
}
