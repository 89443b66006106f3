//! Images of cell sets under binary maps.
//!
//! For the maps used here (sum, product and the loop map x/(1+xy)) every
//! boundary point of F(A, B) is the image of a pair of boundary points, up
//! to the origin when a factor can vanish. The engine marks the images of all
//! boundary cell pairs (each pair is a ball, so the marking is conservative),
//! then fills the enclosed components that belong to the image. A component
//! is filled when a genuine image point lands in it, or when a conservative
//! preimage test cannot rule it out.

use super::cells::{ArcSide, CellSet, Marker};
use super::{CalcConfig, Completion, RegionError};
use crate::par;
use num_complex::Complex64 as C64;
use std::sync::atomic::{AtomicBool, Ordering};

pub(crate) trait PairMap: Sync {
    fn eval(&self, a: C64, b: C64) -> C64;
    /// Radius around `eval(a, b)` containing the image of
    /// `ball(a, ra) × ball(b, rb)`; `None` near a singularity.
    fn spread(&self, a: C64, ra: f64, b: C64, rb: f64) -> Option<(C64, f64)>;
    /// The x with F(x, y) = z for y near `b`, with a radius covering all
    /// y in `ball(b, rb)`.
    fn pre_first(&self, z: C64, b: C64, rb: f64) -> Option<(C64, f64)>;
    /// Whether the origin may be a boundary point not reached by boundary pairs.
    fn origin_exception(&self, a_has_zero: bool, b_has_zero: bool) -> bool;
}

pub(crate) struct SumMap;
pub(crate) struct ProdMap;
/// (x, y) ↦ x / (1 + x y), the closure (x⁻¹ + y)⁻¹ written without the
/// intermediate unbounded set.
pub(crate) struct LoopMap;

impl PairMap for SumMap {
    fn eval(&self, a: C64, b: C64) -> C64 {
        a + b
    }
    fn spread(&self, a: C64, ra: f64, b: C64, rb: f64) -> Option<(C64, f64)> {
        Some((a + b, ra + rb))
    }
    fn pre_first(&self, z: C64, b: C64, rb: f64) -> Option<(C64, f64)> {
        Some((z - b, rb))
    }
    fn origin_exception(&self, _: bool, _: bool) -> bool {
        false
    }
}

impl PairMap for ProdMap {
    fn eval(&self, a: C64, b: C64) -> C64 {
        a * b
    }
    fn spread(&self, a: C64, ra: f64, b: C64, rb: f64) -> Option<(C64, f64)> {
        Some((a * b, a.norm_sqr().sqrt() * rb + b.norm_sqr().sqrt() * ra + ra * rb))
    }
    fn pre_first(&self, z: C64, b: C64, rb: f64) -> Option<(C64, f64)> {
        let m = b.norm_sqr().sqrt();
        if m <= rb {
            return None;
        }
        Some((z / b, z.norm_sqr().sqrt() * rb / ((m - rb) * m)))
    }
    fn origin_exception(&self, a0: bool, b0: bool) -> bool {
        a0 || b0
    }
}

impl PairMap for LoopMap {
    fn eval(&self, a: C64, b: C64) -> C64 {
        a / (1.0 + a * b)
    }
    fn spread(&self, a: C64, ra: f64, b: C64, rb: f64) -> Option<(C64, f64)> {
        let d = 1.0 + a * b;
        let dn = d.norm_sqr().sqrt();
        let am = a.norm_sqr().sqrt();
        let m = dn - (am * rb + b.norm_sqr().sqrt() * ra + ra * rb);
        if m <= 0.0 {
            return None;
        }
        Some((a / d, (ra + am * (am + ra) * rb) / (m * dn)))
    }
    fn pre_first(&self, z: C64, b: C64, rb: f64) -> Option<(C64, f64)> {
        let d = 1.0 - z * b;
        let dn = d.norm_sqr().sqrt();
        let m = dn - z.norm_sqr().sqrt() * rb;
        if m <= 0.0 {
            return None;
        }
        Some((z / d, z.norm_sqr() * rb / (m * dn)))
    }
    fn origin_exception(&self, a0: bool, _: bool) -> bool {
        a0
    }
}

type Bounds = (f64, f64, f64, f64);

fn merge(p: Bounds, q: Bounds) -> Bounds {
    (p.0.min(q.0), p.1.min(q.1), p.2.max(q.2), p.3.max(q.3))
}

const EMPTY_BOUNDS: Bounds = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);

fn centers_of(s: &CellSet, cells: &[(i64, i64)]) -> Vec<C64> {
    cells.iter().map(|&(i, j)| s.center(i, j)).collect()
}

/// Bounding box of the image balls over a sample of boundary pairs.
fn sampled_bounds<M: PairMap>(map: &M, a: &CellSet, b: &CellSet) -> Bounds {
    let sa = centers_of(a, &sample(&a.boundary(), 300));
    let sb = centers_of(b, &sample(&b.boundary(), 300));
    let (ra, rb) = (a.cell_radius(), b.cell_radius());
    let mut bd = EMPTY_BOUNDS;
    for &x in &sa {
        for &y in &sb {
            if let Some((w, s)) = map.spread(x, ra, y, rb) {
                bd = merge(bd, (w.re - s, w.im - s, w.re + s, w.im + s));
            }
        }
    }
    bd
}

fn exact_bounds<M: PairMap>(map: &M, ba: &[C64], ra: f64, bb: &[C64], rb: f64) -> Bounds {
    par::fold_chunks(
        ba,
        32,
        EMPTY_BOUNDS,
        |mut acc, chunk| {
            for &x in chunk {
                for &y in bb {
                    if let Some((w, s)) = map.spread(x, ra, y, rb) {
                        acc = merge(acc, (w.re - s, w.im - s, w.re + s, w.im + s));
                    }
                }
            }
            acc
        },
        merge,
    )
}

/// Lattice spacing giving roughly `cfg.cells` cells across the image.
pub(crate) fn choose_h<M: PairMap>(map: &M, a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> f64 {
    let bd = sampled_bounds(map, a, b);
    let ext = (bd.2 - bd.0).max(bd.3 - bd.1);
    if !ext.is_finite() || ext <= 0.0 {
        return a.h.min(b.h).max(1e-12);
    }
    ext / cfg.cells.max(8) as f64
}

fn sample<T: Copy>(v: &[T], max: usize) -> Vec<T> {
    if v.len() <= max {
        return v.to_vec();
    }
    let step = v.len() as f64 / max as f64;
    (0..max).map(|k| v[(k as f64 * step) as usize]).collect()
}

/// Conservative cover of F(A, B) on the lattice of spacing `h` through 0.
pub(crate) fn image<M: PairMap>(map: &M, a: &CellSet, b: &CellSet, h: f64, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
    if a.is_empty() || b.is_empty() {
        return Ok(CellSet::empty(h, 0.0));
    }
    let ba = centers_of(a, &a.boundary());
    let bb = centers_of(b, &b.boundary());
    let (ra, rb) = (a.cell_radius(), b.cell_radius());
    let zero = map.origin_exception(a.min_modulus() <= 0.0, b.min_modulus() <= 0.0);
    let mut bd = sampled_bounds(map, a, b);
    if !(bd.0.is_finite() && bd.1.is_finite() && bd.2.is_finite() && bd.3.is_finite()) {
        return Err(RegionError::Singular);
    }
    // Sampled bounds usually suffice; a missed ball triggers one exact pass.
    let grow = 0.05 * (bd.2 - bd.0).max(bd.3 - bd.1) + 4.0 * h;
    bd = (bd.0 - grow, bd.1 - grow, bd.2 + grow, bd.3 + grow);
    let mk = loop {
        if zero {
            bd = merge(bd, (0.0, 0.0, 0.0, 0.0));
        }
        let mk = Marker::new(h, 0.0, C64::new(bd.0, bd.1), C64::new(bd.2, bd.3), 2)?;
        let sp = mk.splats();
        let singular = AtomicBool::new(false);
        let overflow = AtomicBool::new(false);
        par::for_each_chunk(&ba, 32, |chunk| {
            for &x in chunk {
                for &y in &bb {
                    match map.spread(x, ra, y, rb) {
                        Some((w, s)) => {
                            if !mk.splat(&sp, w, s) {
                                overflow.store(true, Ordering::Relaxed);
                            }
                        }
                        None => singular.store(true, Ordering::Relaxed),
                    }
                }
            }
        });
        if singular.load(Ordering::Relaxed) {
            return Err(RegionError::Singular);
        }
        if overflow.load(Ordering::Relaxed) {
            bd = exact_bounds(map, &ba, ra, &bb, rb);
            continue;
        }
        mk.flush(sp);
        break mk;
    };
    if zero {
        mk.mark_ball(C64::new(0.0, 0.0), 0.0);
    }

    let comps = mk.components();
    let n = comps.sizes.len();
    let mut keep = vec![false; n];
    let sa = centers_of(a, &a.sample_cells(cfg.seeds));
    let sb = centers_of(b, &b.sample_cells(cfg.seeds));
    for &x in &sa {
        for &y in &sb {
            let w = map.eval(x, y);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            if let Some((di, dj)) = mk.local_index(w) {
                let (nx, _) = mk.dims();
                keep[comps.label[dj * nx + di] as usize] = true;
            }
        }
    }
    keep[0] = false;
    keep[comps.outer as usize] = false;
    let pending: Vec<usize> = (1..n).filter(|&l| !keep[l] && l != comps.outer as usize).collect();
    if !pending.is_empty() {
        let field = a.distance_field();
        let bc = b.centers();
        for (k, &l) in pending.iter().enumerate() {
            if k >= cfg.max_tests {
                keep[l] = true;
                continue;
            }
            let (di, dj) = comps.reps[l];
            let z = mk.local_center(di, dj);
            keep[l] = par::fold_chunks(
                &bc,
                4096,
                false,
                |acc, chunk| {
                    acc || chunk.iter().any(|&y| match map.pre_first(z, y, rb) {
                        None => true,
                        Some((t, s)) => field.lower_bound(t) <= s + ra,
                    })
                },
                |p, q| p || q,
            );
        }
    }
    Ok(mk.fill(&comps, &keep).symmetrize())
}

pub(crate) fn sum(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
    let h = choose_h(&SumMap, a, b, cfg);
    image(&SumMap, a, b, h, cfg)
}

pub(crate) fn product(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
    let h = choose_h(&ProdMap, a, b, cfg);
    image(&ProdMap, a, b, h, cfg)
}

/// Sum bound with chord completions; the two-term intersection when
/// `cfg.completion` is improved and neither operand has the chord property.
pub(crate) fn completed_sum(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
    let ac = a.chord();
    if ac.same_cells(a) {
        return sum(a, b, cfg);
    }
    let bc = b.chord();
    if bc.same_cells(b) {
        return sum(a, b, cfg);
    }
    let h = choose_h(&SumMap, a, b, cfg);
    let t1 = image(&SumMap, &ac, b, h, cfg)?;
    match cfg.completion {
        Completion::Plain => Ok(t1),
        Completion::Improved => {
            let t2 = image(&SumMap, a, &bc, h, cfg)?;
            Ok(t1.intersect(&t2))
        }
    }
}

/// Product bound with arc completions; four terms when improved.
pub(crate) fn completed_product(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
    let h = choose_h(&ProdMap, a, b, cfg);
    let ap = a.arc(ArcSide::Right)?;
    let t1 = image(&ProdMap, &ap, b, h, cfg)?;
    if cfg.completion == Completion::Plain {
        return Ok(t1);
    }
    let bp = b.arc(ArcSide::Right)?;
    let am = a.arc(ArcSide::Left)?;
    let bm = b.arc(ArcSide::Left)?;
    let mut out = t1;
    for (x, y) in [(a, &bp), (&am, b), (a, &bm)] {
        if out.is_empty() {
            break;
        }
        let t = image(&ProdMap, x, y, h, cfg)?;
        out = out.intersect(&t);
    }
    Ok(out)
}

/// Cover of (A⁻¹ + B)⁻¹ with the chord-completed sum inside the inverse.
///
/// `a_inverse_chord` tells that A⁻¹ is known to have the chord property
/// (for instance A is a real-centered disk avoiding 0).
pub(crate) fn closure(a: &CellSet, b: &CellSet, a_inverse_chord: bool, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
    let bc = b.chord();
    let h = choose_h(&LoopMap, a, &bc, cfg);
    if a_inverse_chord || bc.same_cells(b) {
        return image(&LoopMap, a, b, h, cfg);
    }
    let t2 = image(&LoopMap, a, &bc, h, cfg)?;
    if cfg.completion == Completion::Plain {
        return Ok(t2);
    }
    // A⁻¹ bounded: also use the term with the completed inverse of A.
    let Some(ai) = a.invert(a.h)? else {
        return Ok(t2);
    };
    let aic = ai.chord();
    let Some(at) = aic.invert(a.h)? else {
        return Ok(t2);
    };
    let t1 = image(&LoopMap, &at, b, h, cfg)?;
    Ok(t1.intersect(&t2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(h: f64, c: C64, r: f64) -> CellSet {
        let k = ((c.norm() + r) / h).ceil() as i64 + 2;
        CellSet::from_predicate(h, 0.0, (-k, k), (-k, k), |z| (z - c).norm() <= r).unwrap()
    }

    fn cfg() -> CalcConfig {
        CalcConfig { cells: 200, ..CalcConfig::default() }
    }

    #[test]
    fn sum_of_disks_is_disk() {
        let a = disk(0.02, C64::new(1.0, 0.0), 0.5);
        let b = disk(0.02, C64::new(-3.0, 0.0), 1.0);
        let s = sum(&a, &b, &cfg()).unwrap();
        assert!(s.touches(C64::new(-2.0, 0.0), 0.0));
        assert!(s.touches(C64::new(-2.0, 1.4), 0.0));
        assert!(!s.touches(C64::new(-2.0, 1.6), 0.0));
        let r = s.rmin();
        assert!((3.5..3.6).contains(&r), "{r}");
    }

    #[test]
    fn product_of_unit_disks_stays_in_unit_disk() {
        let a = disk(0.01, C64::new(0.0, 0.0), 1.0);
        let p = product(&a, &a, &cfg()).unwrap();
        assert!(p.rmin() < 1.1);
        assert!(p.touches(C64::new(0.0, 0.0), 0.0));
        assert!(p.touches(C64::new(0.5, 0.5), 0.0));
    }

    #[test]
    fn closure_matches_disk_formula() {
        // A = D_{[1,2]}, B = {0.5}: (A⁻¹ + 0.5)⁻¹ = D_{[1/(1+0.5), 1/(0.5+0.5)]}
        let a = disk(0.005, C64::new(1.5, 0.0), 0.5);
        let b = CellSet::rasterize_balls(&[C64::new(0.5, 0.0)], 0.0, 1e-4, 0.0).unwrap();
        let s = closure(&a, &b, true, &cfg()).unwrap();
        assert!(s.touches(C64::new(2.0 / 3.0, 0.0), 0.0));
        assert!(s.touches(C64::new(1.0, 0.0), 0.0));
        assert!(!s.touches(C64::new(1.1, 0.0), 0.0));
        assert!(!s.touches(C64::new(0.55, 0.0), 0.0));
    }

    #[test]
    fn annulus_hole_is_not_filled() {
        let ring = {
            let h = 0.01;
            let k = 130;
            CellSet::from_predicate(h, 0.0, (-k, k), (-k, k), |z| z.norm() >= 0.8 && z.norm() <= 1.2).unwrap()
        };
        let pt = CellSet::rasterize_balls(&[C64::new(0.0, 0.0)], 0.0, 1e-4, 0.0).unwrap();
        let s = sum(&ring, &pt, &cfg()).unwrap();
        assert!(!s.touches(C64::new(0.0, 0.0), 0.3));
        assert!(s.touches(C64::new(1.0, 0.0), 0.0));
    }
}
