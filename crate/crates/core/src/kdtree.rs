//! Static 2-d tree over complex points for nearest-neighbour distances.

use num_complex::Complex64 as C64;

pub struct KdTree {
    pts: Vec<C64>,
}

#[inline]
fn coord(p: &C64, axis: usize) -> f64 {
    if axis == 0 {
        p.re
    } else {
        p.im
    }
}

impl KdTree {
    pub fn new(mut pts: Vec<C64>) -> Self {
        build(&mut pts, 0);
        KdTree { pts }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Distance from `q` to the nearest stored point (∞ when empty).
    pub fn nearest(&self, q: C64) -> f64 {
        let mut best = f64::INFINITY;
        search(&self.pts, q, 0, &mut best);
        best.sqrt()
    }
}

fn build(p: &mut [C64], axis: usize) {
    if p.len() <= 1 {
        return;
    }
    let mid = p.len() / 2;
    p.select_nth_unstable_by(mid, |a, b| coord(a, axis).total_cmp(&coord(b, axis)));
    let (lo, hi) = p.split_at_mut(mid);
    build(lo, 1 - axis);
    build(&mut hi[1..], 1 - axis);
}

fn search(p: &[C64], q: C64, axis: usize, best: &mut f64) {
    if p.is_empty() {
        return;
    }
    let mid = p.len() / 2;
    let m = p[mid];
    let d2 = (m - q).norm_sqr();
    if d2 < *best {
        *best = d2;
    }
    let diff = coord(&q, axis) - coord(&m, axis);
    let (near, far) = if diff < 0.0 { (&p[..mid], &p[mid + 1..]) } else { (&p[mid + 1..], &p[..mid]) };
    search(near, q, 1 - axis, best);
    if diff * diff < *best {
        search(far, q, 1 - axis, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn agrees_with_linear_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<C64> = (0..500).map(|_| C64::new(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0))).collect();
        let t = KdTree::new(pts.clone());
        for _ in 0..200 {
            let q = C64::new(rng.random_range(-4.0..4.0), rng.random_range(-2.0..2.0));
            let brute = pts.iter().map(|p| (p - q).norm()).fold(f64::INFINITY, f64::min);
            assert!((t.nearest(q) - brute).abs() < 1e-12);
        }
    }
}
