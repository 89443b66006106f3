//! Lattice cell sets.
//!
//! A [`CellSet`] stores a set of cells of the lattice with centers
//! `(x0 + i h, j h)`. The represented set is the union of the closed cell
//! squares inflated by `delta`. Every cell square sits inside the closed ball
//! of radius `h/√2 + delta` around its center, which is how a cell set is
//! exported as an ε-cover.

use super::RegionError;
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

/// Hard cap on raster size, in cells.
pub const MAX_CELLS: usize = 400_000_000;

#[derive(Clone, Debug)]
pub struct CellSet {
    pub h: f64,
    pub x0: f64,
    pub delta: f64,
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    bits: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcSide {
    /// Arc⁺: angles |θ| ≤ |φ| (toward the positive real axis).
    Right,
    /// Arc⁻: angles |θ| ≥ |φ| (toward the negative real axis).
    Left,
}

impl CellSet {
    pub fn empty(h: f64, x0: f64) -> Self {
        CellSet { h, x0, delta: 0.0, i0: 0, j0: 0, nx: 0, ny: 0, bits: Vec::new() }
    }

    pub(crate) fn with_box(h: f64, x0: f64, i0: i64, j0: i64, nx: usize, ny: usize) -> Result<Self, RegionError> {
        let n = nx.checked_mul(ny).ok_or(RegionError::TooLarge(usize::MAX))?;
        if n > MAX_CELLS {
            return Err(RegionError::TooLarge(n));
        }
        Ok(CellSet { h, x0, delta: 0.0, i0, j0, nx, ny, bits: vec![false; n] })
    }

    /// Cells `(i, j)` for which `keep(center)` holds, scanning the index box.
    pub(crate) fn from_predicate<F>(h: f64, x0: f64, ir: (i64, i64), jr: (i64, i64), keep: F) -> Result<Self, RegionError>
    where
        F: Fn(C64) -> bool + Sync + Send,
    {
        if ir.1 < ir.0 || jr.1 < jr.0 {
            return Ok(CellSet::empty(h, x0));
        }
        let nx = (ir.1 - ir.0 + 1) as usize;
        let ny = (jr.1 - jr.0 + 1) as usize;
        let mut s = CellSet::with_box(h, x0, ir.0, jr.0, nx, ny)?;
        let rows = crate::par::map_range(ny, |r| {
            let j = jr.0 + r as i64;
            (0..nx)
                .map(|c| keep(C64::new(x0 + (ir.0 + c as i64) as f64 * h, j as f64 * h)))
                .collect::<Vec<bool>>()
        });
        for (r, row) in rows.into_iter().enumerate() {
            s.bits[r * nx..(r + 1) * nx].copy_from_slice(&row);
        }
        Ok(s.trim())
    }

    /// Set built from explicit lattice indices.
    pub(crate) fn from_indices(h: f64, x0: f64, delta: f64, idx: &[(i64, i64)]) -> Result<Self, RegionError> {
        if idx.is_empty() {
            let mut e = CellSet::empty(h, x0);
            e.delta = delta;
            return Ok(e);
        }
        let ilo = idx.iter().map(|c| c.0).min().unwrap();
        let ihi = idx.iter().map(|c| c.0).max().unwrap();
        let jlo = idx.iter().map(|c| c.1).min().unwrap();
        let jhi = idx.iter().map(|c| c.1).max().unwrap();
        let mut s = CellSet::with_box(h, x0, ilo, jlo, (ihi - ilo + 1) as usize, (jhi - jlo + 1) as usize)?;
        s.delta = delta;
        for &(i, j) in idx {
            let k = s.idx(i, j).unwrap();
            s.bits[k] = true;
        }
        Ok(s)
    }

    #[inline]
    fn idx(&self, i: i64, j: i64) -> Option<usize> {
        let di = i - self.i0;
        let dj = j - self.j0;
        if di < 0 || dj < 0 || di >= self.nx as i64 || dj >= self.ny as i64 {
            None
        } else {
            Some(dj as usize * self.nx + di as usize)
        }
    }

    #[inline]
    pub fn get(&self, i: i64, j: i64) -> bool {
        self.idx(i, j).map(|k| self.bits[k]).unwrap_or(false)
    }

    #[inline]
    pub fn center(&self, i: i64, j: i64) -> C64 {
        C64::new(self.x0 + i as f64 * self.h, j as f64 * self.h)
    }

    /// Radius of the ball around a center that contains its inflated cell.
    pub fn cell_radius(&self) -> f64 {
        self.h * FRAC_1_SQRT_2 + self.delta
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn cells(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for dj in 0..self.ny {
            for di in 0..self.nx {
                if self.bits[dj * self.nx + di] {
                    out.push((self.i0 + di as i64, self.j0 + dj as i64));
                }
            }
        }
        out
    }

    pub fn centers(&self) -> Vec<C64> {
        self.cells().into_iter().map(|(i, j)| self.center(i, j)).collect()
    }

    /// Cells with at least one of the eight neighbours absent.
    pub fn boundary(&self) -> Vec<(i64, i64)> {
        self.cells()
            .into_iter()
            .filter(|&(i, j)| {
                (-1..=1).any(|di| (-1..=1).any(|dj| (di != 0 || dj != 0) && !self.get(i + di, j + dj)))
            })
            .collect()
    }

    /// Every `step`-th cell, used for seeding and cheap extent estimates.
    pub(crate) fn sample_cells(&self, max: usize) -> Vec<(i64, i64)> {
        let all = self.cells();
        if all.len() <= max {
            return all;
        }
        let step = all.len() as f64 / max as f64;
        (0..max).map(|k| all[(k as f64 * step) as usize]).collect()
    }

    pub fn index_of(&self, z: C64) -> (i64, i64) {
        (((z.re - self.x0) / self.h).round() as i64, (z.im / self.h).round() as i64)
    }

    /// Upper bound on the largest modulus in the set.
    pub fn rmin(&self) -> f64 {
        let hh = self.h / 2.0;
        self.cells()
            .into_iter()
            .map(|(i, j)| {
                let c = self.center(i, j);
                (c.re.abs() + hh).hypot(c.im.abs() + hh)
            })
            .fold(f64::NEG_INFINITY, f64::max)
            + self.delta
    }

    /// Lower bound on the smallest modulus in the set.
    pub fn min_modulus(&self) -> f64 {
        let hh = self.h / 2.0;
        self.cells()
            .into_iter()
            .map(|(i, j)| {
                let c = self.center(i, j);
                let dx = (c.re.abs() - hh).max(0.0);
                let dy = (c.im.abs() - hh).max(0.0);
                dx.hypot(dy)
            })
            .fold(f64::INFINITY, f64::min)
            - self.delta
    }

    /// True when some inflated cell comes within `r` of `z`.
    pub fn touches(&self, z: C64, r: f64) -> bool {
        let reach = r + self.delta;
        let (ci, cj) = self.index_of(z);
        let k = ((reach / self.h).ceil() as i64).saturating_add(1);
        let hh = self.h / 2.0;
        let (i_end, j_end) = (self.i0 + self.nx as i64 - 1, self.j0 + self.ny as i64 - 1);
        let (ilo, ihi) = (ci.saturating_sub(k).max(self.i0), ci.saturating_add(k).min(i_end));
        let (jlo, jhi) = (cj.saturating_sub(k).max(self.j0), cj.saturating_add(k).min(j_end));
        for i in ilo..=ihi {
            for j in jlo..=jhi {
                if self.get(i, j) {
                    let c = self.center(i, j);
                    let dx = ((z.re - c.re).abs() - hh).max(0.0);
                    let dy = ((z.im - c.im).abs() - hh).max(0.0);
                    if dx.hypot(dy) <= reach {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn same_grid(&self, other: &CellSet) -> bool {
        let tol = 1e-12 * self.h.max(other.h);
        (self.h - other.h).abs() <= tol && (self.x0 - other.x0).abs() <= tol
    }

    /// Same lattice, same margin and the same cells.
    pub fn same_cells(&self, other: &CellSet) -> bool {
        if !self.same_grid(other) || (self.delta - other.delta).abs() > 1e-15 {
            return false;
        }
        let a = self.cells();
        let b = other.cells();
        a == b
    }

    /// Shrink the bitmap to the bounding box of the set cells.
    pub fn trim(self) -> Self {
        let cells = self.cells();
        if cells.is_empty() {
            let mut e = CellSet::empty(self.h, self.x0);
            e.delta = self.delta;
            return e;
        }
        let (mut ilo, mut ihi, mut jlo, mut jhi) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &(i, j) in &cells {
            ilo = ilo.min(i);
            ihi = ihi.max(i);
            jlo = jlo.min(j);
            jhi = jhi.max(j);
        }
        if ilo == self.i0 && jlo == self.j0 && (ihi - ilo + 1) as usize == self.nx && (jhi - jlo + 1) as usize == self.ny {
            return self;
        }
        let nx = (ihi - ilo + 1) as usize;
        let ny = (jhi - jlo + 1) as usize;
        let mut out = CellSet { h: self.h, x0: self.x0, delta: self.delta, i0: ilo, j0: jlo, nx, ny, bits: vec![false; nx * ny] };
        for (i, j) in cells {
            let k = out.idx(i, j).unwrap();
            out.bits[k] = true;
        }
        out
    }

    /// Union with the mirror image about the real axis.
    pub fn symmetrize(&self) -> CellSet {
        if self.is_empty() {
            return self.clone();
        }
        let jm = self.j0.abs().max((self.j0 + self.ny as i64 - 1).abs());
        let ny = (2 * jm + 1) as usize;
        let mut out = CellSet { h: self.h, x0: self.x0, delta: self.delta, i0: self.i0, j0: -jm, nx: self.nx, ny, bits: vec![false; self.nx * ny] };
        for (i, j) in self.cells() {
            let a = out.idx(i, j).unwrap();
            let b = out.idx(i, -j).unwrap();
            out.bits[a] = true;
            out.bits[b] = true;
        }
        out.trim()
    }

    /// Intersection of two sets on the same lattice.
    pub fn intersect(&self, other: &CellSet) -> CellSet {
        debug_assert!(self.same_grid(other));
        let a = self.absorb_margin();
        let b = other.absorb_margin();
        let mut out = a.clone();
        for k in 0..out.bits.len() {
            if out.bits[k] {
                let i = out.i0 + (k % out.nx) as i64;
                let j = out.j0 + (k / out.nx) as i64;
                out.bits[k] = b.get(i, j);
            }
        }
        out.trim()
    }

    /// Re-express the set with `delta = 0` on the same lattice.
    pub fn absorb_margin(&self) -> CellSet {
        if self.delta <= 0.0 {
            return self.clone();
        }
        let k = (self.delta / self.h).ceil() as i64 + 1;
        let kk = k as usize;
        let nx = self.nx + 2 * kk;
        let ny = self.ny + 2 * kk;
        let mut out = CellSet { h: self.h, x0: self.x0, delta: 0.0, i0: self.i0 - k, j0: self.j0 - k, nx, ny, bits: vec![false; nx * ny] };
        let mut offsets = Vec::new();
        for di in -k..=k {
            for dj in -k..=k {
                let dx = ((di.abs() as f64) - 1.0).max(0.0) * self.h;
                let dy = ((dj.abs() as f64) - 1.0).max(0.0) * self.h;
                if dx.hypot(dy) <= self.delta {
                    offsets.push((di, dj));
                }
            }
        }
        for (i, j) in self.cells() {
            for &(di, dj) in &offsets {
                let q = out.idx(i + di, j + dj).unwrap();
                out.bits[q] = true;
            }
        }
        out.trim()
    }

    /// Exact image under multiplication by a nonzero real.
    pub fn scale(&self, alpha: f64) -> CellSet {
        let h = self.h * alpha.abs();
        let x0 = self.x0 * alpha;
        if alpha > 0.0 {
            let mut out = self.clone();
            out.h = h;
            out.x0 = x0;
            out.delta = self.delta * alpha;
            return out;
        }
        let mut out = CellSet {
            h,
            x0,
            delta: self.delta * alpha.abs(),
            i0: -(self.i0 + self.nx as i64 - 1),
            j0: -(self.j0 + self.ny as i64 - 1),
            nx: self.nx,
            ny: self.ny,
            bits: vec![false; self.bits.len()],
        };
        for (i, j) in self.cells() {
            let k = out.idx(-i, -j).unwrap();
            out.bits[k] = true;
        }
        out
    }

    pub fn shift(&self, c: f64) -> CellSet {
        let mut out = self.clone();
        out.x0 += c;
        out
    }

    /// Mark every cell that meets one of the closed balls `(p, r)`.
    pub fn rasterize_balls(points: &[C64], r: f64, h: f64, x0: f64) -> Result<CellSet, RegionError> {
        if points.is_empty() {
            return Ok(CellSet::empty(h, x0));
        }
        let (lo, hi) = bbox(points.iter().copied());
        let m = Marker::new(h, x0, lo - C64::new(r, r), hi + C64::new(r, r), 2)?;
        crate::par::for_each_chunk(points, 4096, |chunk| {
            for &p in chunk {
                m.mark_ball(p, r);
            }
        });
        Ok(m.into_cells().symmetrize())
    }

    /// Vertical chord completion. Exact on the lattice; the margin is kept.
    pub fn chord(&self) -> CellSet {
        if self.is_empty() {
            return self.clone();
        }
        let mut top = vec![-1i64; self.nx];
        for (i, j) in self.cells() {
            let c = (i - self.i0) as usize;
            top[c] = top[c].max(j.abs());
        }
        let jm = *top.iter().max().unwrap();
        let ny = (2 * jm + 1) as usize;
        let mut out = CellSet { h: self.h, x0: self.x0, delta: self.delta, i0: self.i0, j0: -jm, nx: self.nx, ny, bits: vec![false; self.nx * ny] };
        for (c, &t) in top.iter().enumerate() {
            if t < 0 {
                continue;
            }
            for j in -t..=t {
                let k = out.idx(self.i0 + c as i64, j).unwrap();
                out.bits[k] = true;
            }
        }
        out
    }

    /// Arc completion about the origin, conservative on the lattice.
    ///
    /// Each inflated cell is treated as a ball; its completion is bounded by a
    /// modulus band and an angle limit, accumulated in radial bins of width h/2.
    pub fn arc(&self, side: ArcSide) -> Result<CellSet, RegionError> {
        if self.is_empty() {
            return Ok(CellSet::empty(self.h, self.x0));
        }
        let r = self.cell_radius();
        let bw = self.h / 2.0;
        let cells = self.cells();
        let rho_max = cells.iter().map(|&(i, j)| self.center(i, j).norm()).fold(0.0, f64::max) + r;
        let rho_min = cells.iter().map(|&(i, j)| self.center(i, j).norm()).fold(f64::INFINITY, f64::min) - r;
        let nb = (rho_max / bw).ceil() as usize + 2;
        let fill = match side {
            ArcSide::Right => -1.0,
            ArcSide::Left => 10.0,
        };
        let mut bins = vec![fill; nb];
        let mut extreme: f64 = fill;
        for &(i, j) in &cells {
            let c = self.center(i, j);
            let m = c.norm();
            let th = c.arg().abs();
            let dth = if r >= m { PI } else { (r / m).asin() };
            let val = match side {
                ArcSide::Right => (th + dth).min(PI),
                ArcSide::Left => (th - dth).max(0.0),
            };
            let klo = ((m - r).max(0.0) / bw).floor() as usize;
            let khi = (((m + r) / bw).floor() as usize).min(nb - 1);
            for b in &mut bins[klo..=khi] {
                *b = match side {
                    ArcSide::Right => b.max(val),
                    ArcSide::Left => b.min(val),
                };
            }
            extreme = match side {
                ArcSide::Right => extreme.max(val),
                ArcSide::Left => extreme.min(val),
            };
        }
        let (xlo, xhi, ymax) = sector_bbox(rho_min.max(0.0), rho_max, side, extreme);
        let h = self.h;
        let ir = (((xlo - self.x0) / h).floor() as i64 - 1, ((xhi - self.x0) / h).ceil() as i64 + 1);
        let jm = (ymax / h).ceil() as i64 + 1;
        let x0 = self.x0;
        let out = CellSet::from_predicate(h, x0, ir, (-jm, jm), |c| {
            let (mlo, mhi) = square_modulus(c, h / 2.0);
            if mlo > rho_max {
                return false;
            }
            let (tlo, thi) = square_abs_arg(c, h / 2.0);
            let klo = (mlo / bw).floor() as usize;
            let khi = ((mhi / bw).floor() as usize).min(nb - 1);
            if klo >= nb {
                return false;
            }
            bins[klo..=khi].iter().any(|&b| match side {
                ArcSide::Right => b >= 0.0 && b >= tlo,
                ArcSide::Left => b <= PI && b <= thi,
            })
        })?;
        Ok(out.symmetrize())
    }

    /// Image under z ↦ 1/z̄ rasterized on a lattice of spacing `h_out`.
    /// `None` when some inflated cell touches the origin.
    pub fn invert(&self, h_out: f64) -> Result<Option<CellSet>, RegionError> {
        let r = self.cell_radius();
        let cells = self.centers();
        if cells.iter().any(|c| c.norm() <= r) {
            return Ok(None);
        }
        let balls: Vec<(C64, f64)> = cells
            .iter()
            .map(|&c| {
                let m = c.norm();
                (c / (m * m), r / (m * (m - r)))
            })
            .collect();
        let (lo, hi) = bbox_balls(&balls);
        let mk = Marker::new(h_out, 0.0, lo, hi, 2)?;
        crate::par::for_each_chunk(&balls, 4096, |chunk| {
            for &(c, rr) in chunk {
                mk.mark_ball(c, rr);
            }
        });
        Ok(Some(mk.into_cells().symmetrize()))
    }

    /// Run-length rows for plotting: `(j, i_start, i_end)` inclusive.
    pub fn runs(&self) -> Vec<(i64, i64, i64)> {
        let mut out = Vec::new();
        for dj in 0..self.ny {
            let mut di = 0;
            while di < self.nx {
                if self.bits[dj * self.nx + di] {
                    let s = di;
                    while di < self.nx && self.bits[dj * self.nx + di] {
                        di += 1;
                    }
                    out.push((self.j0 + dj as i64, self.i0 + s as i64, self.i0 + di as i64 - 1));
                } else {
                    di += 1;
                }
            }
        }
        out
    }

    /// One cell from each 8-connected component.
    pub fn component_reps(&self) -> Vec<(i64, i64)> {
        let (nx, ny) = (self.nx, self.ny);
        let mut seen = vec![false; self.bits.len()];
        let mut reps = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || seen[start] {
                continue;
            }
            reps.push((self.i0 + (start % nx) as i64, self.j0 + (start / nx) as i64));
            seen[start] = true;
            stack.push(start);
            while let Some(k) = stack.pop() {
                let (x, y) = ((k % nx) as i64, (k / nx) as i64);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (a, b) = (x + dx, y + dy);
                        if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                            continue;
                        }
                        let q = b as usize * nx + a as usize;
                        if self.bits[q] && !seen[q] {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        reps
    }

    /// Squared Euclidean distance transform in cell units, row-major over the box.
    pub fn distance_field(&self) -> DistanceField {
        let (nx, ny) = (self.nx, self.ny);
        let inf = 1e20;
        let mut f: Vec<f64> = self.bits.iter().map(|&b| if b { 0.0 } else { inf }).collect();
        let mut buf = vec![0.0; nx.max(ny)];
        let mut col = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = f[j * nx + i];
            }
            edt_1d(&col, &mut buf[..ny]);
            for j in 0..ny {
                f[j * nx + i] = buf[j];
            }
        }
        for j in 0..ny {
            let row: Vec<f64> = f[j * nx..(j + 1) * nx].to_vec();
            edt_1d(&row, &mut buf[..nx]);
            f[j * nx..(j + 1) * nx].copy_from_slice(&buf[..nx]);
        }
        DistanceField { h: self.h, x0: self.x0, i0: self.i0, j0: self.j0, nx, ny, d2: f }
    }
}

/// Euclidean distance transform of a cell set, queried for lower bounds.
pub struct DistanceField {
    h: f64,
    x0: f64,
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    d2: Vec<f64>,
}

impl DistanceField {
    /// Lower bound on the distance from `t` to the nearest set cell center.
    pub fn lower_bound(&self, t: C64) -> f64 {
        if self.nx == 0 {
            return f64::INFINITY;
        }
        let fi = (t.re - self.x0) / self.h - self.i0 as f64;
        let fj = t.im / self.h - self.j0 as f64;
        let ci = fi.round().clamp(0.0, (self.nx - 1) as f64);
        let cj = fj.round().clamp(0.0, (self.ny - 1) as f64);
        let e = (fi - ci).hypot(fj - cj);
        let d = self.d2[cj as usize * self.nx + ci as usize].sqrt();
        let bx = (-fi).max(fi - (self.nx - 1) as f64).max(0.0);
        let by = (-fj).max(fj - (self.ny - 1) as f64).max(0.0);
        (d - e).max(bx.hypot(by)) * self.h
    }
}

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0;
    for (q, dq) in d.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dd = q as f64 - p as f64;
        *dq = dd * dd + f[p];
    }
}

/// Concurrent bitmap used while marking balls.
pub(crate) struct Marker {
    pub h: f64,
    pub x0: f64,
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    words: Vec<AtomicU64>,
}

impl Marker {
    /// Box covering `[lo, hi]` with `pad` extra cells on each side.
    pub fn new(h: f64, x0: f64, lo: C64, hi: C64, pad: i64) -> Result<Self, RegionError> {
        if !(lo.re.is_finite() && lo.im.is_finite() && hi.re.is_finite() && hi.im.is_finite()) {
            return Err(RegionError::Unbounded);
        }
        let i0 = ((lo.re - x0) / h).floor() as i64 - pad;
        let i1 = ((hi.re - x0) / h).ceil() as i64 + pad;
        let j0 = (lo.im / h).floor() as i64 - pad;
        let j1 = (hi.im / h).ceil() as i64 + pad;
        let nx = (i1 - i0 + 1) as usize;
        let ny = (j1 - j0 + 1) as usize;
        let n = nx.saturating_mul(ny);
        if n > MAX_CELLS {
            return Err(RegionError::TooLarge(n));
        }
        let words = (0..n.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
        Ok(Marker { h, x0, i0, j0, nx, ny, words })
    }

    #[inline]
    fn set_local(&self, di: usize, dj: usize) {
        let k = dj * self.nx + di;
        let bit = 1u64 << (k & 63);
        let w = &self.words[k >> 6];
        if w.load(Ordering::Relaxed) & bit == 0 {
            w.fetch_or(bit, Ordering::Relaxed);
        }
    }

    #[inline]
    pub fn get_local(&self, di: usize, dj: usize) -> bool {
        let k = dj * self.nx + di;
        self.words[k >> 6].load(Ordering::Relaxed) & (1u64 << (k & 63)) != 0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn local_center(&self, di: usize, dj: usize) -> C64 {
        C64::new(self.x0 + (self.i0 + di as i64) as f64 * self.h, (self.j0 + dj as i64) as f64 * self.h)
    }

    pub fn local_index(&self, z: C64) -> Option<(usize, usize)> {
        let i = ((z.re - self.x0) / self.h).round() as i64 - self.i0;
        let j = (z.im / self.h).round() as i64 - self.j0;
        if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
            None
        } else {
            Some((i as usize, j as usize))
        }
    }

    /// Per-cell store of the largest ball radius centered in each cell.
    pub fn splats(&self) -> Splats {
        Splats { radius: (0..self.nx * self.ny).map(|_| AtomicU32::new(0)).collect() }
    }

    /// Record the ball `(c, r)` against the cell containing `c`. Returns
    /// false, recording nothing, when the ball leaves the box.
    #[inline]
    pub fn splat(&self, sp: &Splats, c: C64, r: f64) -> bool {
        let lo = self.local_center(0, 0);
        let hi = self.local_center(self.nx - 1, self.ny - 1);
        let m = r + self.h;
        if !(c.re - m >= lo.re && c.im - m >= lo.im && c.re + m <= hi.re && c.im + m <= hi.im) {
            return false;
        }
        let Some((i, j)) = self.local_index(c) else {
            return false;
        };
        // rounded up to f32, kept positive so that 0 means unused
        let v = ((r * (1.0 + 1e-6)) as f32).max(f32::MIN_POSITIVE).to_bits();
        let slot = &sp.radius[j * self.nx + i];
        if slot.load(Ordering::Relaxed) < v {
            slot.fetch_max(v, Ordering::Relaxed);
        }
        true
    }

    /// Mark the balls recorded in `sp`, each grown by the offset of its
    /// center within the cell.
    pub fn flush(&self, sp: Splats) {
        let grow = self.h * FRAC_1_SQRT_2;
        for (k, slot) in sp.radius.into_iter().enumerate() {
            let v = slot.into_inner();
            if v != 0 {
                let c = self.local_center(k % self.nx, k / self.nx);
                self.mark_ball(c, f32::from_bits(v) as f64 + grow);
            }
        }
    }

    /// Mark every cell whose closed square meets the closed ball `(c, r)`.
    pub fn mark_ball(&self, c: C64, r: f64) {
        let rr = (r * (1.0 + 1e-12) + 1e-12 * self.h) / self.h;
        let fx = (c.re - self.x0) / self.h - self.i0 as f64;
        let fy = c.im / self.h - self.j0 as f64;
        let ilo = ((fx - rr - 0.5).ceil() as i64).max(0);
        let ihi = ((fx + rr + 0.5).floor() as i64).min(self.nx as i64 - 1);
        for i in ilo..=ihi {
            let dx = ((i as f64 - fx).abs() - 0.5).max(0.0);
            if dx > rr {
                continue;
            }
            let ry = (rr * rr - dx * dx).sqrt();
            let jlo = ((fy - ry - 0.5).ceil() as i64).max(0);
            let jhi = ((fy + ry + 0.5).floor() as i64).min(self.ny as i64 - 1);
            for j in jlo..=jhi {
                self.set_local(i as usize, j as usize);
            }
        }
    }

    pub fn into_cells(self) -> CellSet {
        let n = self.nx * self.ny;
        let bits = (0..n).map(|k| self.words[k >> 6].load(Ordering::Relaxed) & (1u64 << (k & 63)) != 0).collect();
        CellSet { h: self.h, x0: self.x0, delta: 0.0, i0: self.i0, j0: self.j0, nx: self.nx, ny: self.ny, bits }.trim()
    }

    /// Label the 4-connected components of unmarked cells. Label 0 is a
    /// marked cell; the component touching the box edge is returned as `outer`.
    pub fn components(&self) -> Components {
        let (nx, ny) = (self.nx, self.ny);
        let mut label = vec![0u32; nx * ny];
        let mut sizes = vec![0usize];
        let mut reps = vec![(0usize, 0usize)];
        let mut stack = Vec::new();
        let mut next = 1u32;
        for start in 0..nx * ny {
            if label[start] != 0 || self.get_local(start % nx, start / nx) {
                continue;
            }
            label[start] = next;
            stack.push(start);
            let mut size = 0;
            while let Some(k) = stack.pop() {
                size += 1;
                let (i, j) = (k % nx, k / nx);
                let mut visit = |ii: usize, jj: usize| {
                    let q = jj * nx + ii;
                    if label[q] == 0 && !self.get_local(ii, jj) {
                        label[q] = next;
                        stack.push(q);
                    }
                };
                if i > 0 {
                    visit(i - 1, j);
                }
                if i + 1 < nx {
                    visit(i + 1, j);
                }
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < ny {
                    visit(i, j + 1);
                }
            }
            sizes.push(size);
            reps.push((start % nx, start / nx));
            next += 1;
        }
        let outer = if nx * ny > 0 { label[0] } else { 0 };
        Components { label, sizes, reps, outer }
    }

    /// Marked cells plus every cell whose component label is in `keep`.
    pub fn fill(self, comps: &Components, keep: &[bool]) -> CellSet {
        for (k, &l) in comps.label.iter().enumerate() {
            if l != 0 && keep[l as usize] {
                self.set_local(k % self.nx, k / self.nx);
            }
        }
        self.into_cells()
    }
}

pub(crate) struct Splats {
    radius: Vec<AtomicU32>,
}

pub(crate) struct Components {
    pub label: Vec<u32>,
    pub sizes: Vec<usize>,
    pub reps: Vec<(usize, usize)>,
    pub outer: u32,
}

pub(crate) fn bbox<I: Iterator<Item = C64>>(pts: I) -> (C64, C64) {
    let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (lo, hi)
}

pub(crate) fn bbox_balls(balls: &[(C64, f64)]) -> (C64, C64) {
    let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(c, r) in balls {
        lo.re = lo.re.min(c.re - r);
        lo.im = lo.im.min(c.im - r);
        hi.re = hi.re.max(c.re + r);
        hi.im = hi.im.max(c.im + r);
    }
    (lo, hi)
}

/// Modulus range over the closed square of half-width `hh` centered at `c`.
fn square_modulus(c: C64, hh: f64) -> (f64, f64) {
    let dx = (c.re.abs() - hh).max(0.0);
    let dy = (c.im.abs() - hh).max(0.0);
    (dx.hypot(dy), (c.re.abs() + hh).hypot(c.im.abs() + hh))
}

/// Range of |arg z| over the closed square of half-width `hh` centered at `c`.
fn square_abs_arg(c: C64, hh: f64) -> (f64, f64) {
    let (xl, xh, yl, yh) = (c.re - hh, c.re + hh, c.im - hh, c.im + hh);
    if xl <= 0.0 && xh >= 0.0 && yl <= 0.0 && yh >= 0.0 {
        return (0.0, PI);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, y) in [(xl, yl), (xl, yh), (xh, yl), (xh, yh)] {
        let a = y.atan2(x).abs();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    if yl <= 0.0 && yh >= 0.0 {
        if xh > 0.0 {
            lo = 0.0;
        }
        if xl < 0.0 {
            hi = PI;
        }
    }
    (lo, hi)
}

/// Bounding box of the symmetric annular sector swept by an arc completion.
fn sector_bbox(rmin: f64, rmax: f64, side: ArcSide, theta: f64) -> (f64, f64, f64) {
    match side {
        ArcSide::Right => {
            let t = theta.clamp(0.0, PI);
            let xlo = (rmax * t.cos()).min(rmin * t.cos());
            let ymax = if t >= PI / 2.0 { rmax } else { rmax * t.sin() };
            (xlo, rmax, ymax)
        }
        ArcSide::Left => {
            let t = theta.clamp(0.0, PI);
            let xhi = (rmax * t.cos()).max(rmin * t.cos());
            let ymax = if t <= PI / 2.0 { rmax } else { rmax * t.sin() };
            (-rmax, xhi, ymax)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(h: f64, c: f64, r: f64) -> CellSet {
        let k = ((c.abs() + r) / h).ceil() as i64 + 2;
        CellSet::from_predicate(h, 0.0, (-k, k), (-k, k), |z| (z - c).norm() <= r).unwrap()
    }

    #[test]
    fn edt_matches_brute_force() {
        let s = disk(0.1, 0.3, 0.5);
        let f = s.distance_field();
        let pts = s.centers();
        for &t in &[C64::new(1.5, 0.2), C64::new(-0.4, -0.9), C64::new(0.3, 0.0), C64::new(5.0, 5.0)] {
            let exact = pts.iter().map(|p| (p - t).norm()).fold(f64::INFINITY, f64::min);
            let lb = f.lower_bound(t);
            assert!(lb <= exact + 1e-12, "{lb} > {exact}");
        }
    }

    #[test]
    fn chord_of_ring_is_disk() {
        let h = 0.02;
        let k = 60;
        let ring = CellSet::from_predicate(h, 0.0, (-k, k), (-k, k), |z| (z.norm() - 1.0).abs() <= h).unwrap();
        let c = ring.chord();
        assert!(c.get(0, 0));
        assert!(c.get(10, -20));
        assert!(!c.get(0, 55));
    }

    #[test]
    fn scale_by_negative_reflects() {
        let s = disk(0.05, 1.5, 0.5);
        let t = s.scale(-1.0);
        let (lo, hi) = bbox(t.centers().into_iter());
        assert!(hi.re < -0.9 && lo.re > -2.1);
    }

    #[test]
    fn arc_right_of_point_pair_is_half_circle() {
        let h = 0.01;
        let s = CellSet::rasterize_balls(&[C64::new(0.0, 1.0), C64::new(0.0, -1.0)], 0.0, h, 0.0).unwrap();
        let a = s.arc(ArcSide::Right).unwrap();
        assert!(a.touches(C64::new(1.0, 0.0), 0.0));
        assert!(a.touches(C64::from_polar(1.0, std::f64::consts::FRAC_PI_4), 0.0));
        assert!(!a.touches(C64::new(-0.8, 0.0), 0.05));
        assert!(!a.touches(C64::new(0.5, 0.0), 0.05));
    }

    #[test]
    fn absorb_margin_covers_inflation() {
        let mut s = disk(0.1, 0.0, 0.3);
        s.delta = 0.15;
        let t = s.absorb_margin();
        assert_eq!(t.delta, 0.0);
        assert!(t.touches(C64::new(0.4, 0.0), 0.0));
    }
}
