//! Oracles shared by the integration tests and the acceptance target.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srgkit::lti::{self, StateSpace, Tf};
use srgkit::models;
use srgkit::nonlin::{self, NamedNonlinearity, SectorBound};
use srgkit::region::{self, CalcConfig, CellSet, CoverRegion, DiskAlgebraRegion};
use srgkit::C64;

/// SRG point of a pair with difference `du` and output difference `dy`,
/// upper half-plane representative.
pub fn srg_point(du: &[C64], dy: &[C64]) -> Option<C64> {
    let nu: f64 = du.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let ny: f64 = dy.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if nu < 1e-12 {
        return None;
    }
    if ny < 1e-14 * nu {
        return Some(C64::new(0.0, 0.0));
    }
    let ip: f64 = du.iter().zip(dy).map(|(a, b)| (a.conj() * b).re).sum();
    let cos = (ip / (nu * ny)).clamp(-1.0, 1.0);
    Some(C64::from_polar(ny / nu, cos.acos()))
}

/// Random stable square system with `m` channels and `n` states.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, m: usize) -> StateSpace {
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
    let shift = a.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let margin = rng.random_range(0.05..1.0);
    for i in 0..n {
        a[(i, i)] -= shift + margin;
    }
    let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.5..1.5));
    let c = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.5..1.5));
    let d = DMatrix::from_fn(m, m, |_, _| if rng.random_bool(0.5) { rng.random_range(-0.5..0.5) } else { 0.0 });
    StateSpace::new(a, b, c, d).unwrap()
}

#[derive(Debug, Default)]
pub struct Soundness {
    pub systems: usize,
    pub samples: usize,
    pub violations: usize,
    pub worst: f64,
}

/// Monte-Carlo check of the LTI bound: inputs with a few random spectral
/// lines at random (off-grid) frequencies, SRG points from Parseval.
pub fn lti_soundness(systems: usize, samples: usize, seed: u64) -> Soundness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Soundness { systems, ..Default::default() };
    for _ in 0..systems {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let g = random_stable(&mut rng, n, m);
        let (grid, ups, lam) = lti::auto_grids(&g).unwrap();
        let bound = lti::lti_srg_bound(&g, &ups, &lam, &grid, lti::Inflation::default()).unwrap();
        let lo = grid.omegas[1].ln();
        let hi = grid.omegas.last().unwrap().ln();
        let scale = bound.upper.iter().map(|d| d.0.abs() + d.1).fold(0.0, f64::max);
        for _ in 0..samples {
            let lines = rng.random_range(1..=3);
            let mut du = Vec::new();
            let mut dy = Vec::new();
            for _ in 0..lines {
                let w = if rng.random_bool(0.05) { 0.0 } else { rng.random_range(lo..hi).exp() };
                let h = g.freq_response(w).unwrap();
                let u = DVector::from_fn(m, |_, _| C64::new(rng.random_range(-1.0..1.0), if w == 0.0 { 0.0 } else { rng.random_range(-1.0..1.0) }));
                let y = &h * &u;
                du.extend(u.iter());
                dy.extend(y.iter());
            }
            let Some(z) = srg_point(&du, &dy) else { continue };
            out.samples += 1;
            let excess = excess(&bound, z);
            if excess > 1e-9 * scale.max(1.0) {
                out.violations += 1;
                out.worst = out.worst.max(excess);
            }
        }
    }
    out
}

/// How far `z` lies outside a disk algebra region (0 when inside).
pub fn excess(r: &DiskAlgebraRegion, z: C64) -> f64 {
    let up = r.upper.iter().map(|&(c, rad)| (z - c).norm() - rad).fold(0.0, f64::max);
    let low = r.lower.iter().map(|&(c, rad)| rad - (z - c).norm()).fold(0.0, f64::max);
    up.max(low)
}

/// Monte-Carlo check of the sector bound for random diagonal piecewise-linear
/// nonlinearities with slopes inside each channel's sector.
pub fn sector_soundness(sectors: usize, samples: usize, seed: u64) -> Soundness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Soundness { systems: sectors, ..Default::default() };
    for _ in 0..sectors {
        let m = rng.random_range(1..=4);
        let mut channels = Vec::new();
        let mut nls = Vec::new();
        for _ in 0..m {
            let a: f64 = rng.random_range(-3.0..3.0);
            let b: f64 = rng.random_range(-3.0..3.0);
            let (mu, la) = (a.min(b), a.max(b));
            channels.push((mu, la));
            nls.push(NamedNonlinearity::PiecewiseSlope {
                knee: rng.random_range(0.1..2.0),
                inner: rng.random_range(mu..=la),
                outer: rng.random_range(mu..=la),
            });
        }
        let incremental = rng.random_bool(0.5);
        let s = SectorBound::new(channels, incremental).unwrap();
        let bound = nonlin::diagonal_nl_region(&s);
        for _ in 0..samples {
            let t = rng.random_range(1..=6);
            let x1: Vec<f64> = (0..m * t).map(|_| rng.random_range(-4.0..4.0)).collect();
            let x2: Vec<f64> = if incremental { (0..m * t).map(|_| rng.random_range(-4.0..4.0)).collect() } else { vec![0.0; m * t] };
            let du: Vec<C64> = x1.iter().zip(&x2).map(|(a, b)| C64::new(a - b, 0.0)).collect();
            let dy: Vec<C64> = (0..m * t).map(|k| C64::new(nls[k % m].eval(x1[k]) - nls[k % m].eval(x2[k]), 0.0)).collect();
            let Some(z) = srg_point(&du, &dy) else { continue };
            out.samples += 1;
            let e = excess(&bound, z);
            if e > 1e-9 {
                out.violations += 1;
                out.worst = out.worst.max(e);
            }
        }
    }
    out
}

/// Points of a disk algebra region on a grid of spacing `h`.
pub fn sample_region(r: &DiskAlgebraRegion, h: f64) -> Vec<C64> {
    let (lo, hi, ih) = r.bbox().unwrap();
    let mut pts = Vec::new();
    let mut x = lo;
    while x <= hi {
        let mut y = -ih;
        while y <= ih {
            let z = C64::new(x, y);
            if r.contains(z) {
                pts.push(z);
            }
            y += h;
        }
        x += h;
    }
    pts
}

fn lattice(c: &CoverRegion) -> CellSet {
    c.to_cells(&CalcConfig::default()).unwrap()
}

/// Every point of `pts` lies in the cover (with slack `tol`).
pub fn covers_all(c: &CoverRegion, pts: &[C64], tol: f64) -> Result<(), String> {
    let cells = lattice(c);
    match pts.iter().find(|z| !cells.touches(**z, tol)) {
        Some(z) => Err(format!("{z} not covered")),
        None => Ok(()),
    }
}

/// Every ball of `c` stays within `slack` of the region `r`.
pub fn within(c: &CoverRegion, r: &DiskAlgebraRegion, slack: f64) -> Result<(), String> {
    match c.points.iter().map(|p| (p, excess(r, *p))).find(|(_, e)| *e > c.epsilon + slack) {
        Some((p, e)) => Err(format!("cover point {p} lies {e} outside")),
        None => Ok(()),
    }
}

/// Every ball of `inner` meets `outer` (with slack `tol`).
pub fn cover_inside(inner: &CoverRegion, outer: &CoverRegion, tol: f64) -> Result<(), String> {
    let cells = lattice(outer);
    match inner.points.iter().find(|p| !cells.touches(**p, inner.epsilon + tol)) {
        Some(p) => Err(format!("{p} outside")),
        None => Ok(()),
    }
}

fn close(a: f64, b: f64) -> Result<(), String> {
    if (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
        Ok(())
    } else {
        Err(format!("{a} != {b}"))
    }
}

fn same_disk(r: &DiskAlgebraRegion, c: f64, rad: f64) -> Result<(), String> {
    let (c0, r0) = r.as_disk().ok_or("not a single disk")?;
    close(c0, c)?;
    close(r0, rad)
}

/// Disk identities (exact) and their cover counterparts (ε-tolerant).
pub fn disk_identities(a: (f64, f64), b: (f64, f64), alpha: f64, shift: f64, cells: usize) -> Result<(), String> {
    let cfg = CalcConfig::with_cells(cells);
    let da = DiskAlgebraRegion::disk(a.0, a.1);
    let db = DiskAlgebraRegion::disk(b.0, b.1);
    same_disk(&region::disk::sum(a, b), a.0 + b.0, a.1 + b.1)?;
    same_disk(&da.scaled(alpha), alpha * a.0, alpha.abs() * a.1)?;
    same_disk(&da.shifted(shift), a.0 + shift, a.1)?;
    let (mu, la) = (a.0 - a.1, a.0 + a.1);
    if mu > 0.0 || la < 0.0 {
        let inv = region::disk::inverse(a).ok_or("inverse refused")?;
        same_disk(&inv, 0.5 * (1.0 / mu + 1.0 / la), 0.5 * (1.0 / mu - 1.0 / la).abs())?;
    }

    let res = |r: &DiskAlgebraRegion| r.auto_h(cells);
    let ca = region::to_cover(&da, res(&da)).map_err(|e| e.to_string())?;
    let cb = region::to_cover(&db, res(&db)).map_err(|e| e.to_string())?;
    let exact_sum = region::disk::sum(a, b);
    let s = region::minkowski_sum(&ca, &cb, &cfg).map_err(|e| e.to_string())?;
    let h = s.lattice.map(|l| l.h).unwrap_or(0.0);
    covers_all(&s, &sample_region(&exact_sum, exact_sum.upper[0].1 / 20.0), 1e-9)?;
    within(&s, &exact_sum, ca.epsilon + cb.epsilon + 2.0 * h)?;

    let sc = region::scale_real(&ca, alpha).map_err(|e| e.to_string())?;
    within(&sc, &da.scaled(alpha), alpha.abs() * ca.epsilon)?;
    covers_all(&sc, &sample_region(&da.scaled(alpha), alpha.abs() * a.1 / 20.0), 1e-9)?;
    let sh = region::shift_real(&ca, shift);
    within(&sh, &da.shifted(shift), ca.epsilon)?;

    if mu > 0.0 || la < 0.0 {
        let inv = region::disk::inverse(a).unwrap();
        let ci = region::mobius_inverse(&ca);
        if ci.is_bounded() {
            let (ic, ir) = inv.as_disk().unwrap();
            covers_all(&ci, &sample_region(&inv, ir / 20.0), 1e-9)?;
            let d = ca.points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
            let grow = ca.epsilon / (d * (d - ca.epsilon)).max(1e-300);
            within(&ci, &DiskAlgebraRegion::disk(ic, ir), ci.epsilon + grow)?;
        }
    }
    for r in [&s, &sc, &sh] {
        let defect = r.conjugate_defect();
        if defect > 1e-9 * (1.0 + region::rmin(r)) {
            return Err(format!("conjugate defect {defect}"));
        }
    }
    Ok(())
}

/// Chord completion of a sampled circle recovers the disk.
pub fn circle_chord(center: f64, radius: f64, cells: usize) -> Result<(), String> {
    let cfg = CalcConfig::with_cells(cells);
    let pts: Vec<C64> = (0..2000).map(|k| C64::new(center, 0.0) + C64::from_polar(radius, std::f64::consts::TAU * k as f64 / 2000.0)).collect();
    let eps = radius / cells as f64;
    let circle = CoverRegion::new(pts, eps);
    let c = region::chord_completion(&circle, &cfg).map_err(|e| e.to_string())?;
    let disk = DiskAlgebraRegion::disk(center, radius);
    covers_all(&c, &sample_region(&disk, radius / 25.0), 1e-9)?;
    let h = c.lattice.map(|l| l.h).unwrap_or(0.0);
    within(&c, &disk, eps + 2.0 * h)?;
    if !region::has_chord_property(&c, 2.0 * c.epsilon) {
        return Err("chord completion lacks the chord property".into());
    }
    Ok(())
}

/// A − B annulus, non-convex enough for the completions to matter.
pub fn annulus(c: f64, outer: f64, inner: f64) -> DiskAlgebraRegion {
    DiskAlgebraRegion { upper: vec![(c, outer)], lower: vec![(c, inner)], infinity: false }
}

/// Improved completions contain every sampled a+b (a·b) and stay inside each
/// single-completion variant.
pub fn improved_inclusions(a: &DiskAlgebraRegion, b: &DiskAlgebraRegion, cells: usize) -> Result<(), String> {
    let cfg = CalcConfig::with_cells(cells);
    let ca = region::to_cover(a, a.auto_h(cells)).map_err(|e| e.to_string())?;
    let cb = region::to_cover(b, b.auto_h(cells)).map_err(|e| e.to_string())?;
    let sa = sample_region(a, a.bbox().unwrap().2 / 12.0);
    let sb = sample_region(b, b.bbox().unwrap().2 / 12.0);
    let sums: Vec<C64> = sa.iter().flat_map(|x| sb.iter().map(move |y| x + y)).collect();
    let prods: Vec<C64> = sa.iter().flat_map(|x| sb.iter().map(move |y| x * y)).collect();

    let isum = region::improved_sum(&ca, &cb, &cfg).map_err(|e| e.to_string())?;
    covers_all(&isum, &sums, 1e-9)?;
    let tol = isum.lattice.map(|l| 2.0 * l.h).unwrap_or(0.0);
    let chord_a = region::chord_completion(&ca, &cfg).map_err(|e| e.to_string())?;
    let variant = region::minkowski_sum(&chord_a, &cb, &cfg).map_err(|e| e.to_string())?;
    cover_inside(&isum, &variant, tol + variant.lattice.map(|l| 2.0 * l.h).unwrap_or(0.0))?;

    let iprod = region::improved_product(&ca, &cb, &cfg).map_err(|e| e.to_string())?;
    covers_all(&iprod, &prods, 1e-9)?;
    let tol = iprod.lattice.map(|l| 2.0 * l.h).unwrap_or(0.0);
    let arc_a = region::arc_completion(&ca, region::ArcSide::Right, &cfg).map_err(|e| e.to_string())?;
    let variant = region::minkowski_product(&arc_a, &cb, &cfg).map_err(|e| e.to_string())?;
    cover_inside(&iprod, &variant, tol + variant.lattice.map(|l| 2.0 * l.h).unwrap_or(0.0))?;
    for r in [&isum, &iprod] {
        if r.conjugate_defect() > 1e-9 * (1.0 + region::rmin(r)) {
            return Err("completion broke conjugate symmetry".into());
        }
    }
    Ok(())
}

/// The fixed square system used for the tightness trend.
pub fn tightness_system() -> StateSpace {
    let d = lti::poly_mul(&[1.0, 1.0], &[1.0, 0.6, 4.0]);
    StateSpace::from_tf_matrix(&[
        vec![Tf::new(&[1.0, 2.0], &d), Tf::new(&[0.5], &[1.0, 3.0])],
        vec![Tf::new(&[-0.3], &[1.0, 2.0]), Tf::new(&[2.0, 1.0], &d)],
    ])
    .unwrap()
}

/// rmin of the LTI bound for |Υ| = |Λ| = n on the default frequency grid.
pub fn tightness_trend(ns: &[usize], cells: usize) -> Vec<f64> {
    let g = tightness_system();
    let cfg = CalcConfig::with_cells(cells);
    ns.iter()
        .map(|&n| {
            let (grid, ups, lam) = lti::auto_grids_with(&g, lti::DEFAULT_GRID_POINTS, n).unwrap();
            lti::lti_srg_bound(&g, &ups, &lam, &grid, lti::Inflation::default()).unwrap().rmin(&cfg).unwrap()
        })
        .collect()
}

/// Largest deviation of the transformed example-1 model from the closed-form
/// transfer functions, over the model's default frequency grid.
pub fn loop_transform_error(k1: f64, k2: f64) -> f64 {
    let ex = models::example1(k1, k2).unwrap();
    let g = &ex.model.g;
    let grid = lti::frequency_grid(g, lti::DEFAULT_GRID_POINTS);
    // independent evaluation straight from the polynomial coefficients
    let poly = |c: &[f64], s: C64| c.iter().fold(C64::new(0.0, 0.0), |acc, &x| acc * s + x);
    let mut worst: f64 = 0.0;
    for &w in &grid.omegas {
        let s = C64::new(0.0, w);
        let kk = poly(&[1.0], s) / poly(&[1.0, 1.0], s);
        let pp = poly(&[30.0], s) / poly(&[1.0, 8.0, -20.0], s);
        let pt = pp / (1.0 + k2 * pp);
        let l = k1 * pt * kk;
        let sens = 1.0 / (1.0 + l);
        #[rustfmt::skip]
        let expect = DMatrix::from_row_slice(3, 3, &[
            -sens * pt * kk, -sens * pt * kk, sens * kk,
            sens * pt, sens * pt, sens * l,
            sens * pt, sens * pt, sens * l,
        ]);
        let got = g.freq_response(w).unwrap();
        let scale = expect.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let err = (got - expect).iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;
        worst = worst.max(err);
    }
    worst
}
