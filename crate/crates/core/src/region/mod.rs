//! Conjugate-symmetric regions of the extended complex plane and the set
//! calculus used to bound scaled relative graphs.
//!
//! Two carriers are used. [`DiskAlgebraRegion`] is the exact
//! intersection-of-disks-minus-union-of-disks form produced by LTI bounds and
//! sector bounds. [`CoverRegion`] is a finite cloud of points with a cover
//! radius ε, meaning the true set lies inside the union of the closed ε-balls
//! (plus ∞ when flagged). Every operation returns a cover that contains the
//! exact result.
//!
//! Covers produced by the calculus sit on a square lattice and carry its
//! spacing in [`CoverRegion::lattice`]; internally they are handled as
//! [`CellSet`]s, which keeps sums, products and completions tight.

mod cells;
mod engine;

pub use cells::{ArcSide, CellSet, DistanceField};

use crate::kdtree::KdTree;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("region is empty")]
    Empty,
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("loop map is singular on the given regions (they are not separated)")]
    Singular,
    #[error("region is unbounded")]
    Unbounded,
    #[error("raster of {0} cells exceeds the size limit; coarsen the resolution")]
    TooLarge(usize),
    #[error("invalid region: {0}")]
    Invalid(String),
}

/// Completion rule used where a sum or product needs the chord or arc property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Completion {
    /// Intersection of all completion variants.
    #[default]
    Improved,
    /// Complete the first operand only.
    Plain,
}

/// Resolution and fill settings for the lattice calculus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalcConfig {
    /// Target number of lattice cells across the extent of each result.
    pub cells: usize,
    /// Interior samples per operand used to seed the fill.
    pub seeds: usize,
    /// Enclosed components tested rigorously per operation; the rest are kept.
    pub max_tests: usize,
    pub completion: Completion,
}

impl Default for CalcConfig {
    fn default() -> Self {
        CalcConfig { cells: 1200, seeds: 160, max_tests: 64, completion: Completion::Improved }
    }
}

impl CalcConfig {
    pub fn with_cells(cells: usize) -> Self {
        CalcConfig { cells, ..Self::default() }
    }
}

/// ⋂ upper disks ∖ ⋃ lower disks, all centered on the real axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskAlgebraRegion {
    /// `(center, radius)` of disks whose intersection contains the set.
    pub upper: Vec<(f64, f64)>,
    /// `(center, radius)` of open disks removed from the set.
    #[serde(default)]
    pub lower: Vec<(f64, f64)>,
    #[serde(default)]
    pub infinity: bool,
}

impl DiskAlgebraRegion {
    pub fn disk(center: f64, radius: f64) -> Self {
        DiskAlgebraRegion { upper: vec![(center, radius)], lower: vec![], infinity: false }
    }

    /// D_{[μ,λ]}: the disk with diameter [μ, λ] on the real axis.
    pub fn interval(mu: f64, lambda: f64) -> Self {
        Self::disk((mu + lambda) / 2.0, (lambda - mu).abs() / 2.0)
    }

    pub fn point(c: f64) -> Self {
        Self::disk(c, 0.0)
    }

    pub fn validate(&self) -> Result<(), RegionError> {
        for &(c, r) in self.upper.iter().chain(&self.lower) {
            if !c.is_finite() || !r.is_finite() || r < 0.0 {
                return Err(RegionError::Invalid(format!("disk ({c}, {r})")));
            }
        }
        if self.upper.is_empty() {
            return Err(RegionError::Unbounded);
        }
        Ok(())
    }

    pub fn contains(&self, z: C64) -> bool {
        self.contains_tol(z, 0.0)
    }

    /// Membership with the upper disks grown and the lower disks shrunk by `tol`.
    pub fn contains_tol(&self, z: C64, tol: f64) -> bool {
        self.upper.iter().all(|&(c, r)| (z - c).norm() <= r + tol) && !self.lower.iter().any(|&(c, r)| (z - c).norm() < r - tol)
    }

    /// The single disk when the region is one upper disk and nothing removed.
    pub fn as_disk(&self) -> Option<(f64, f64)> {
        if self.upper.len() == 1 && self.lower.iter().all(|d| d.1 == 0.0) {
            Some(self.upper[0])
        } else {
            None
        }
    }

    /// Exact image under z ↦ αz for real α.
    pub fn scaled(&self, alpha: f64) -> Self {
        let f = |&(c, r): &(f64, f64)| (c * alpha, r * alpha.abs());
        DiskAlgebraRegion { upper: self.upper.iter().map(f).collect(), lower: self.lower.iter().map(f).collect(), infinity: self.infinity && alpha != 0.0 }
    }

    /// Exact image under z ↦ z + c.
    pub fn shifted(&self, c: f64) -> Self {
        let f = |&(x, r): &(f64, f64)| (x + c, r);
        DiskAlgebraRegion { upper: self.upper.iter().map(f).collect(), lower: self.lower.iter().map(f).collect(), infinity: self.infinity }
    }

    /// Bounding box of the upper-disk intersection: `(x_lo, x_hi, y_max)`.
    pub fn bbox(&self) -> Option<(f64, f64, f64)> {
        if self.upper.is_empty() {
            return None;
        }
        let xl = self.upper.iter().map(|&(c, r)| c - r).fold(f64::NEG_INFINITY, f64::max);
        let xh = self.upper.iter().map(|&(c, r)| c + r).fold(f64::INFINITY, f64::min);
        let ym = self.upper.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
        Some((xl, xh, ym))
    }

    /// Cells of the lattice with spacing `h` (through 0) whose closed squares
    /// may meet the region.
    pub fn to_cells(&self, h: f64) -> Result<CellSet, RegionError> {
        self.validate()?;
        let (xl, xh, ym) = self.bbox().unwrap();
        if xl > xh {
            return Ok(CellSet::empty(h, 0.0));
        }
        let hh = h / 2.0;
        let ir = ((xl / h).floor() as i64 - 1, (xh / h).ceil() as i64 + 1);
        let jm = (ym / h).ceil() as i64 + 1;
        let upper = self.upper.clone();
        let lower = self.lower.clone();
        let s = CellSet::from_predicate(h, 0.0, ir, (-jm, jm), move |z| {
            let near = |c: f64| {
                let dx = ((z.re - c).abs() - hh).max(0.0);
                let dy = (z.im.abs() - hh).max(0.0);
                dx.hypot(dy)
            };
            let far = |c: f64| ((z.re - c).abs() + hh).hypot(z.im.abs() + hh);
            upper.iter().all(|&(c, r)| near(c) <= r * (1.0 + 1e-12) + 1e-15) && !lower.iter().any(|&(c, r)| far(c) < r * (1.0 - 1e-12))
        })?;
        Ok(s.symmetrize())
    }

    /// Lattice spacing so that the region spans about `cells` cells.
    pub fn auto_h(&self, cells: usize) -> f64 {
        let (xl, xh, ym) = self.bbox().unwrap_or((0.0, 1.0, 1.0));
        let ext = (xh - xl).max(2.0 * ym).max(0.0);
        let scale = xl.abs().max(xh.abs()).max(1e-300);
        if ext <= 1e-12 * scale {
            return (1e-9 * scale).max(1e-300);
        }
        ext / cells.max(8) as f64
    }

    /// Upper bound on the largest modulus in the region.
    pub fn rmin(&self, cfg: &CalcConfig) -> Result<f64, RegionError> {
        if self.infinity {
            return Ok(f64::INFINITY);
        }
        if let Some((c, r)) = self.as_disk() {
            return Ok(c.abs() + r);
        }
        let cells = self.to_cells(self.auto_h(cfg.cells))?;
        if cells.is_empty() {
            return Ok(0.0);
        }
        Ok(cells.rmin())
    }
}

/// Lattice metadata of a cover: points are `(x0 + i h, j h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeInfo {
    pub h: f64,
    pub x0: f64,
}

/// Finite cloud of points; the true set is inside the union of closed
/// `epsilon`-balls, plus ∞ when `infinity` is set, plus every z with
/// |z| ≥ `beyond` when that radius is finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverRegion {
    #[serde(with = "pairs")]
    pub points: Vec<C64>,
    pub epsilon: f64,
    #[serde(default)]
    pub infinity: bool,
    #[serde(default = "infinite", skip_serializing_if = "is_infinite")]
    pub beyond: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeInfo>,
}

fn infinite() -> f64 {
    f64::INFINITY
}

fn is_infinite(x: &f64) -> bool {
    x.is_infinite()
}

mod pairs {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(pts: &[C64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(pts.iter().map(|p| [p.re, p.im]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let v: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|[a, b]| C64::new(a, b)).collect())
    }
}

impl CoverRegion {
    pub fn new(points: Vec<C64>, epsilon: f64) -> Self {
        CoverRegion { points, epsilon, infinity: false, beyond: f64::INFINITY, lattice: None }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), 0.0)
    }

    /// Conjugate-closed cloud from arbitrary points.
    pub fn symmetric(points: &[C64], epsilon: f64) -> Self {
        let mut pts = points.to_vec();
        pts.extend(points.iter().filter(|p| p.im != 0.0).map(|p| p.conj()));
        Self::new(pts, epsilon)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && !self.infinity && self.beyond.is_infinite()
    }

    pub fn is_bounded(&self) -> bool {
        !self.infinity && self.beyond.is_infinite()
    }

    pub fn from_cells(c: &CellSet) -> Self {
        CoverRegion {
            points: c.centers(),
            epsilon: c.cell_radius(),
            infinity: false,
            beyond: f64::INFINITY,
            lattice: if c.is_empty() { None } else { Some(LatticeInfo { h: c.h, x0: c.x0 }) },
        }
    }

    /// Bounded finite part as lattice cells. Lattice covers convert exactly;
    /// other clouds are rasterized at about `cfg.cells` cells across.
    pub fn to_cells(&self, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
        if let Some(l) = self.lattice {
            let delta = (self.epsilon - l.h * FRAC_1_SQRT_2).max(0.0);
            let mut idx = Vec::with_capacity(self.points.len());
            let mut on_lattice = l.h > 0.0;
            for p in &self.points {
                let fi = (p.re - l.x0) / l.h;
                let fj = p.im / l.h;
                let (i, j) = (fi.round(), fj.round());
                if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 {
                    on_lattice = false;
                    break;
                }
                idx.push((i as i64, j as i64));
            }
            if on_lattice {
                return CellSet::from_indices(l.h, l.x0, delta, &idx);
            }
        }
        let h = self.raster_h(cfg);
        CellSet::rasterize_balls(&self.points, self.epsilon, h, 0.0)
    }

    fn raster_h(&self, cfg: &CalcConfig) -> f64 {
        if self.points.is_empty() {
            return 1.0;
        }
        let (lo, hi) = cells::bbox(self.points.iter().copied());
        let ext = (hi.re - lo.re).max(hi.im - lo.im) + 2.0 * self.epsilon;
        let scale = self.points.iter().map(|p| p.norm()).fold(1e-300, f64::max);
        let mut h = ext / cfg.cells.max(8) as f64;
        if self.epsilon > 0.0 {
            h = h.max(self.epsilon / 4.0);
        }
        if h <= 1e-12 * scale {
            h = 1e-9 * scale.max(1e-300);
        }
        h
    }

    /// Smallest modulus bound of the finite part (0 when a ball reaches 0).
    fn min_modulus(&self) -> f64 {
        self.points.iter().map(|p| (p.norm() - self.epsilon).max(0.0)).fold(f64::INFINITY, f64::min)
    }

    fn cloud_rmin(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max) + self.epsilon
    }

    /// True when `z` lies in one of the ε-balls (with slack `tol`).
    pub fn covers(&self, z: C64, tol: f64) -> bool {
        if z.norm() >= self.beyond {
            return true;
        }
        if let Some(l) = self.lattice {
            if let Ok(c) = self.to_cells(&CalcConfig::default()) {
                if c.h == l.h {
                    return c.touches(z, tol);
                }
            }
        }
        self.points.iter().any(|p| (p - z).norm() <= self.epsilon + tol)
    }

    /// Largest distance between a point and the nearest conjugate point.
    pub fn conjugate_defect(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let t = KdTree::new(self.points.clone());
        self.points.iter().map(|p| t.nearest(p.conj())).fold(0.0, f64::max)
    }
}

/// JSON-facing union of both carriers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    DiskAlgebra(DiskAlgebraRegion),
    Cover(CoverRegion),
}

impl Region {
    pub fn to_cover(&self, cfg: &CalcConfig) -> Result<CoverRegion, RegionError> {
        match self {
            Region::DiskAlgebra(d) => {
                let mut c = CoverRegion::from_cells(&d.to_cells(d.auto_h(cfg.cells))?);
                c.infinity = d.infinity;
                Ok(c)
            }
            Region::Cover(c) => Ok(c.clone()),
        }
    }

    pub fn to_cells(&self, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
        match self {
            Region::DiskAlgebra(d) => d.to_cells(d.auto_h(cfg.cells)),
            Region::Cover(c) => c.to_cells(cfg),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Region::DiskAlgebra(d) => !d.infinity,
            Region::Cover(c) => c.is_bounded(),
        }
    }

    pub fn rmin(&self, cfg: &CalcConfig) -> Result<f64, RegionError> {
        match self {
            Region::DiskAlgebra(d) => d.rmin(cfg),
            Region::Cover(c) => Ok(rmin(c)),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Result<Region, RegionError> {
        match self {
            Region::DiskAlgebra(d) if alpha != 0.0 => Ok(Region::DiskAlgebra(d.scaled(alpha))),
            Region::DiskAlgebra(_) => Err(RegionError::ZeroScale),
            Region::Cover(c) => Ok(Region::Cover(scale_real(c, alpha)?)),
        }
    }

    pub fn shifted(&self, c: f64) -> Region {
        match self {
            Region::DiskAlgebra(d) => Region::DiskAlgebra(d.shifted(c)),
            Region::Cover(r) => Region::Cover(shift_real(r, c)),
        }
    }

    /// True when the region is known to have the chord property.
    pub fn has_chord(&self, cfg: &CalcConfig) -> bool {
        match self {
            Region::DiskAlgebra(d) if d.lower.iter().all(|l| l.1 == 0.0) => true,
            _ => self.to_cells(cfg).map(|c| c.chord().same_cells(&c)).unwrap_or(false),
        }
    }

    /// Whether the inverse of the region is known to have the chord property:
    /// true for a single real-centered disk not containing 0.
    pub fn inverse_has_chord(&self) -> bool {
        match self {
            Region::DiskAlgebra(d) => d.as_disk().map(|(c, r)| c.abs() > r).unwrap_or(false),
            Region::Cover(_) => false,
        }
    }
}

impl From<DiskAlgebraRegion> for Region {
    fn from(d: DiskAlgebraRegion) -> Self {
        Region::DiskAlgebra(d)
    }
}

impl From<CoverRegion> for Region {
    fn from(c: CoverRegion) -> Self {
        Region::Cover(c)
    }
}

/// Superset cover of a disk algebra on a grid of spacing `resolution`.
pub fn to_cover(r: &DiskAlgebraRegion, resolution: f64) -> Result<CoverRegion, RegionError> {
    if !(resolution > 0.0) {
        return Err(RegionError::Invalid("resolution must be positive".into()));
    }
    r.validate()?;
    if let Some(&(c, _)) = r.upper.iter().find(|d| d.1 == 0.0) {
        let z = C64::new(c, 0.0);
        let pts = if r.contains(z) { vec![z] } else { vec![] };
        let mut out = CoverRegion::new(pts, 0.0);
        out.infinity = r.infinity;
        return Ok(out);
    }
    let cells = r.to_cells(resolution)?;
    if cells.is_empty() && !r.infinity {
        return Ok(CoverRegion::empty());
    }
    let mut out = CoverRegion::from_cells(&cells);
    out.infinity = r.infinity;
    Ok(out)
}

pub fn scale_real(r: &CoverRegion, alpha: f64) -> Result<CoverRegion, RegionError> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(RegionError::ZeroScale);
    }
    Ok(CoverRegion {
        points: r.points.iter().map(|p| p * alpha).collect(),
        epsilon: r.epsilon * alpha.abs(),
        infinity: r.infinity,
        beyond: r.beyond * alpha.abs(),
        lattice: r.lattice.map(|l| LatticeInfo { h: l.h * alpha.abs(), x0: l.x0 * alpha }),
    })
}

pub fn shift_real(r: &CoverRegion, c: f64) -> CoverRegion {
    CoverRegion {
        points: r.points.iter().map(|p| p + c).collect(),
        epsilon: r.epsilon,
        infinity: r.infinity,
        beyond: if r.beyond.is_finite() { (r.beyond - c.abs()).max(0.0) } else { r.beyond },
        lattice: r.lattice.map(|l| LatticeInfo { h: l.h, x0: l.x0 + c }),
    }
}

/// Pointwise modulus inversion ρe^{jφ} ↦ ρ⁻¹e^{jφ}.
///
/// Points whose ball reaches 0 are dropped; their images lie beyond
/// 1/(|p| + ε), recorded in `beyond`, and ∞ is flagged. The remaining balls
/// map into balls of radius ε/(δ(δ−ε)), δ the smallest kept modulus.
pub fn mobius_inverse(r: &CoverRegion) -> CoverRegion {
    let eps = r.epsilon;
    let kept: Vec<C64> = r.points.iter().copied().filter(|p| p.norm() > eps).collect();
    let dropped = r.points.iter().filter(|p| p.norm() <= eps).map(|p| p.norm()).fold(f64::NEG_INFINITY, f64::max);
    let mut out = CoverRegion::new(kept.iter().map(|p| p / p.norm_sqr()).collect(), 0.0);
    if eps > 0.0 && !kept.is_empty() {
        let d = kept.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        out.epsilon = eps / (d * (d - eps));
    }
    if dropped.is_finite() {
        out.infinity = true;
        out.beyond = 1.0 / (dropped + eps);
        if kept.is_empty() {
            log::warn!("every point of the region reaches the origin; inverse degenerates to a neighbourhood of infinity");
        }
    }
    if r.infinity {
        out.points.push(C64::new(0.0, 0.0));
    }
    if r.beyond.is_finite() {
        let rad = if r.beyond > 0.0 { 1.0 / r.beyond } else { f64::INFINITY };
        if !rad.is_finite() {
            out.beyond = 0.0;
        } else if out.epsilon >= rad {
            out.points.push(C64::new(0.0, 0.0));
        } else {
            // cover D_rad(0) by grid points at spacing √2·ε (ε raised if needed)
            let mut e = out.epsilon;
            let per_side = |e: f64| (2.0 * rad / (e * std::f64::consts::SQRT_2)).ceil() as usize + 1;
            if e <= 0.0 || per_side(e) > 64 {
                e = 2.0 * rad / (63.0 * std::f64::consts::SQRT_2);
                out.epsilon = out.epsilon.max(e);
            }
            let n = per_side(e);
            let step = 2.0 * rad / (n - 1).max(1) as f64;
            for a in 0..n {
                for b in 0..n {
                    out.points.push(C64::new(-rad + a as f64 * step, -rad + b as f64 * step));
                }
            }
        }
        out.infinity = true;
    }
    out
}

fn sum_flags(a: &CoverRegion, b: &CoverRegion, out: &mut CoverRegion) {
    out.infinity = a.infinity || b.infinity;
    let mut beyond = f64::INFINITY;
    if a.beyond.is_finite() && b.beyond.is_finite() {
        beyond = 0.0;
    } else if a.beyond.is_finite() {
        beyond = (a.beyond - b.cloud_rmin()).max(0.0);
    } else if b.beyond.is_finite() {
        beyond = (b.beyond - a.cloud_rmin()).max(0.0);
    }
    out.beyond = beyond;
}

fn product_flags(a: &CoverRegion, b: &CoverRegion, out: &mut CoverRegion) {
    let nonempty = |x: &CoverRegion| !x.is_empty();
    out.infinity = (a.infinity && nonempty(b)) || (b.infinity && nonempty(a));
    let mut beyond = f64::INFINITY;
    if a.beyond.is_finite() {
        beyond = beyond.min(if b.points.is_empty() { f64::INFINITY } else { a.beyond * b.min_modulus() });
        if b.beyond.is_finite() {
            beyond = beyond.min(a.beyond * b.beyond);
        }
    }
    if b.beyond.is_finite() {
        beyond = beyond.min(if a.points.is_empty() { f64::INFINITY } else { b.beyond * a.min_modulus() });
    }
    out.beyond = beyond;
}

fn binary<F>(a: &CoverRegion, b: &CoverRegion, cfg: &CalcConfig, f: F) -> Result<CoverRegion, RegionError>
where
    F: Fn(&CellSet, &CellSet, &CalcConfig) -> Result<CellSet, RegionError>,
{
    if a.points.is_empty() || b.points.is_empty() {
        return Ok(CoverRegion::empty());
    }
    let ca = a.to_cells(cfg)?;
    let cb = b.to_cells(cfg)?;
    Ok(CoverRegion::from_cells(&f(&ca, &cb, cfg)?))
}

/// Minkowski sum {a + b}.
pub fn minkowski_sum(a: &CoverRegion, b: &CoverRegion, cfg: &CalcConfig) -> Result<CoverRegion, RegionError> {
    let mut out = binary(a, b, cfg, engine::sum)?;
    sum_flags(a, b, &mut out);
    Ok(out)
}

/// Minkowski product {a·b}.
pub fn minkowski_product(a: &CoverRegion, b: &CoverRegion, cfg: &CalcConfig) -> Result<CoverRegion, RegionError> {
    let mut out = binary(a, b, cfg, engine::product)?;
    product_flags(a, b, &mut out);
    Ok(out)
}

/// ⋃ [z, z̄] over the region.
pub fn chord_completion(r: &CoverRegion, cfg: &CalcConfig) -> Result<CoverRegion, RegionError> {
    if r.points.is_empty() {
        return Ok(r.clone());
    }
    let mut out = CoverRegion::from_cells(&r.to_cells(cfg)?.chord());
    out.infinity = r.infinity;
    out.beyond = if r.beyond.is_finite() { 0.0 } else { f64::INFINITY };
    Ok(out)
}

/// ⋃ Arc⁺(z, z̄) (right) or ⋃ Arc⁻(z, z̄) (left) over the region.
pub fn arc_completion(r: &CoverRegion, side: ArcSide, cfg: &CalcConfig) -> Result<CoverRegion, RegionError> {
    if r.points.is_empty() {
        return Ok(r.clone());
    }
    let mut out = CoverRegion::from_cells(&r.to_cells(cfg)?.arc(side)?);
    out.infinity = r.infinity;
    out.beyond = r.beyond;
    Ok(out)
}

/// (a^c + b) ∩ (a + b^c).
pub fn improved_sum(a: &CoverRegion, b: &CoverRegion, cfg: &CalcConfig) -> Result<CoverRegion, RegionError> {
    let mut out = binary(a, b, cfg, engine::completed_sum)?;
    sum_flags(a, b, &mut out);
    Ok(out)
}

/// (a⁺b) ∩ (ab⁺) ∩ (a⁻b) ∩ (ab⁻).
pub fn improved_product(a: &CoverRegion, b: &CoverRegion, cfg: &CalcConfig) -> Result<CoverRegion, RegionError> {
    let mut out = binary(a, b, cfg, engine::completed_product)?;
    product_flags(a, b, &mut out);
    Ok(out)
}

/// (a⁻¹ + b)⁻¹ with the chord completion of the inner sum, computed through
/// the map x/(1 + xy) so that an unbounded a⁻¹ never has to be stored.
///
/// Fails with [`RegionError::Singular`] when 1 + xy can vanish, i.e. when a⁻¹
/// and −b are not separated.
pub fn closure(a: &CellSet, b: &CellSet, a_inverse_chord: bool, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
    engine::closure(a, b, a_inverse_chord, cfg)
}

/// Lattice versions of the calculus for callers that keep [`CellSet`]s.
pub mod lattice {
    use super::{engine, CalcConfig, CellSet, RegionError};

    pub fn sum(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
        engine::completed_sum(a, b, cfg)
    }

    pub fn product(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
        engine::completed_product(a, b, cfg)
    }

    pub fn plain_sum(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
        engine::sum(a, b, cfg)
    }

    pub fn plain_product(a: &CellSet, b: &CellSet, cfg: &CalcConfig) -> Result<CellSet, RegionError> {
        engine::product(a, b, cfg)
    }
}

/// Ball-overlap intersection: points of either cover whose ball meets a ball
/// of the other. Contains the true intersection.
pub fn intersect(a: &CoverRegion, b: &CoverRegion) -> CoverRegion {
    if a.points.is_empty() || b.points.is_empty() {
        let mut e = CoverRegion::empty();
        e.infinity = a.infinity && b.infinity;
        return e;
    }
    let reach = a.epsilon + b.epsilon;
    let ta = KdTree::new(a.points.clone());
    let tb = KdTree::new(b.points.clone());
    let mut pts: Vec<C64> = a.points.iter().copied().filter(|p| tb.nearest(*p) <= reach).collect();
    pts.extend(b.points.iter().copied().filter(|p| ta.nearest(*p) <= reach));
    let mut out = CoverRegion::new(pts, a.epsilon.max(b.epsilon));
    out.infinity = a.infinity && b.infinity;
    out
}

/// Upper bound on the radius of the smallest origin-centered disk containing
/// the region; ∞ when the region is unbounded.
pub fn rmin(r: &CoverRegion) -> f64 {
    if !r.is_bounded() {
        return f64::INFINITY;
    }
    if let (Some(_), Ok(c)) = (r.lattice, r.to_cells(&CalcConfig::default())) {
        if !c.is_empty() {
            return c.rmin();
        }
    }
    r.cloud_rmin()
}

/// Lower bound on the distance between two regions.
pub fn dist(a: &CoverRegion, b: &CoverRegion) -> f64 {
    if a.infinity && b.infinity {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    if a.beyond.is_finite() {
        if b.beyond.is_finite() {
            return 0.0;
        }
        best = best.min((a.beyond - b.cloud_rmin()).max(0.0));
    }
    if b.beyond.is_finite() {
        best = best.min((b.beyond - a.cloud_rmin()).max(0.0));
    }
    if a.points.is_empty() || b.points.is_empty() {
        return if best.is_finite() { best } else { f64::INFINITY };
    }
    let (small, large) = if a.points.len() <= b.points.len() { (a, b) } else { (b, a) };
    let tree = KdTree::new(large.points.clone());
    let d = crate::par::fold_chunks(&small.points, 2048, f64::INFINITY, |m, c| c.iter().fold(m, |m, p| m.min(tree.nearest(*p))), f64::min);
    best.min((d - a.epsilon - b.epsilon).max(0.0))
}

fn tolerance_tree(r: &CoverRegion) -> KdTree {
    KdTree::new(r.points.clone())
}

/// True when the sampled vertical chords of every point stay within `tol`
/// of the cover.
pub fn has_chord_property(r: &CoverRegion, tol: f64) -> bool {
    if r.points.is_empty() {
        return true;
    }
    if r.lattice.is_some() {
        if let Ok(c) = r.to_cells(&CalcConfig::default()) {
            if c.chord().same_cells(&c) {
                return true;
            }
        }
    }
    let t = tolerance_tree(r);
    let step = tol.max(r.epsilon).max(1e-12);
    r.points.iter().all(|p| {
        let n = (2.0 * p.im.abs() / step).ceil() as usize;
        (0..=n).all(|k| {
            let y = -p.im.abs() + 2.0 * p.im.abs() * k as f64 / n.max(1) as f64;
            t.nearest(C64::new(p.re, y)) <= tol
        })
    })
}

/// True when the sampled arcs (right: toward the positive real axis, left:
/// toward the negative one) of every point stay within `tol` of the cover.
pub fn has_arc_property(r: &CoverRegion, side: ArcSide, tol: f64) -> bool {
    if r.points.is_empty() {
        return true;
    }
    let t = tolerance_tree(r);
    let step = tol.max(r.epsilon).max(1e-12);
    r.points.iter().all(|p| {
        let rho = p.norm();
        if rho == 0.0 {
            return true;
        }
        let phi = p.arg().abs();
        let (lo, hi) = match side {
            ArcSide::Right => (0.0, phi),
            ArcSide::Left => (phi, std::f64::consts::PI),
        };
        let n = ((hi - lo) * rho / step).ceil() as usize;
        (0..=n).all(|k| {
            let th = lo + (hi - lo) * k as f64 / n.max(1) as f64;
            let z = C64::from_polar(rho, th);
            t.nearest(z) <= tol && t.nearest(z.conj()) <= tol
        })
    })
}

/// Exact disk identities used for checks and for cheap paths.
pub mod disk {
    use super::DiskAlgebraRegion;

    pub fn sum(a: (f64, f64), b: (f64, f64)) -> DiskAlgebraRegion {
        DiskAlgebraRegion::disk(a.0 + b.0, a.1 + b.1)
    }

    pub fn scale(a: (f64, f64), alpha: f64) -> DiskAlgebraRegion {
        DiskAlgebraRegion::disk(a.0 * alpha, a.1 * alpha.abs())
    }

    pub fn shift(a: (f64, f64), c: f64) -> DiskAlgebraRegion {
        DiskAlgebraRegion::disk(a.0 + c, a.1)
    }

    /// D_{[μ,λ]}⁻¹ = D_{[1/λ,1/μ]} for a disk avoiding 0.
    pub fn inverse(a: (f64, f64)) -> Option<DiskAlgebraRegion> {
        let (mu, lambda) = (a.0 - a.1, a.0 + a.1);
        if mu <= 0.0 && lambda >= 0.0 {
            return None;
        }
        Some(DiskAlgebraRegion::interval(1.0 / lambda, 1.0 / mu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_json_roundtrip() {
        let d = Region::DiskAlgebra(DiskAlgebraRegion { upper: vec![(1.0, 2.0)], lower: vec![(0.0, 0.5)], infinity: false });
        let s = serde_json::to_string(&d).unwrap();
        assert!(s.contains("\"kind\":\"disk_algebra\""));
        assert_eq!(serde_json::from_str::<Region>(&s).unwrap(), d);
        let c = Region::Cover(CoverRegion::new(vec![C64::new(1.0, 2.0)], 0.1));
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"points\":[[1.0,2.0]]"));
        assert_eq!(serde_json::from_str::<Region>(&s).unwrap(), c);
    }

    #[test]
    fn point_disk_gives_exact_point() {
        let c = to_cover(&DiskAlgebraRegion::point(1.0), 0.01).unwrap();
        assert_eq!(c.points, vec![C64::new(1.0, 0.0)]);
        assert_eq!(c.epsilon, 0.0);
    }

    #[test]
    fn rmin_and_dist_examples() {
        let cfg = CalcConfig::default();
        let a = DiskAlgebraRegion::interval(-2.0, -1.0);
        assert_eq!(a.rmin(&cfg).unwrap(), 2.0);
        assert_eq!(rmin(&CoverRegion::new(vec![C64::new(0.0, 0.0)], 0.0)), 0.0);
        let far = to_cover(&DiskAlgebraRegion::disk(5.0, 1.0), 0.01).unwrap();
        let near = to_cover(&DiskAlgebraRegion::disk(0.0, 1.0), 0.01).unwrap();
        let d = dist(&far, &near);
        assert!(d <= 3.0 && d > 2.97, "{d}");
    }

    #[test]
    fn inverse_of_point_near_zero_marks_beyond() {
        let r = CoverRegion::new(vec![C64::new(0.05, 0.0), C64::new(2.0, 0.0)], 0.1);
        let inv = mobius_inverse(&r);
        assert!(inv.infinity);
        assert!((inv.beyond - 1.0 / 0.15).abs() < 1e-12);
        assert!(rmin(&inv).is_infinite());
    }
}
