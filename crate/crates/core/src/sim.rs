//! Time-domain simulation of LFR loops and empirical gain estimates.
//!
//! The loop is ẋ = A x + B_w w + B_u u, z = C_z x + D_zw w + D_zu u,
//! w = Φ(z), y = C_y x + D_yw w + D_yu u, started from x = 0 and integrated
//! with classical RK4. Inputs are sampled on the integration grid and
//! interpolated linearly at the half steps.

use crate::analysis::LfrModel;
use crate::lti::StateSpace;
use crate::models::Example;
use crate::nonlin::NamedNonlinearity;
use crate::par;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("algebraic loop is not a contraction (|D_zw| * Lipschitz = {0:.3})")]
    AlgebraicLoop(f64),
    #[error("algebraic loop did not converge at t = {0}")]
    NoConvergence(f64),
    #[error("state diverged at t = {0}")]
    Diverged(f64),
    #[error("invalid simulation settings: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    /// Step size; derived from the fastest pole when absent.
    pub dt: Option<f64>,
    /// Horizon; 50 slowest time constants when absent.
    pub horizon: Option<f64>,
    /// Upper limit on the number of steps when dt or horizon is derived.
    pub max_steps: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: None, horizon: None, max_steps: 20_000, max_iters: 200, tol: 1e-12 }
    }
}

impl SimConfig {
    /// Step size and horizon for `g`.
    pub fn resolve(&self, g: &StateSpace) -> Result<(f64, f64), SimError> {
        let poles = g.poles();
        let fast = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let slow = poles.iter().map(|p| p.re.abs()).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        let fast = if fast > 0.0 { fast } else { 1.0 };
        let slow = if slow.is_finite() { slow } else { fast };
        let mut dt = self.dt.unwrap_or(0.02 / fast);
        let mut horizon = self.horizon.unwrap_or(50.0 / slow);
        if !(dt > 0.0 && horizon > 0.0 && dt.is_finite() && horizon.is_finite()) {
            return Err(SimError::Invalid(format!("dt = {dt}, horizon = {horizon}")));
        }
        let steps = horizon / dt;
        if steps > self.max_steps as f64 {
            if self.dt.is_none() {
                // coarser steps stay well inside the RK4 stability region
                dt = (horizon / self.max_steps as f64).min(0.5 / fast);
            }
            if self.horizon.is_none() {
                horizon = horizon.min(dt * self.max_steps as f64);
            }
        }
        Ok((dt, horizon))
    }
}

/// Uniformly sampled multichannel signal, one vector per sample.
#[derive(Clone, Debug)]
pub struct Signal {
    pub dt: f64,
    pub samples: Vec<DVector<f64>>,
}

impl Signal {
    pub fn zeros(dt: f64, n: usize, channels: usize) -> Self {
        Signal { dt, samples: vec![DVector::zeros(channels); n] }
    }

    pub fn channels(&self) -> usize {
        self.samples.first().map_or(0, |v| v.len())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// L2 norm over the sampled horizon (rectangle rule).
    pub fn l2(&self) -> f64 {
        (self.samples.iter().map(|v| v.norm_squared()).sum::<f64>() * self.dt).sqrt()
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        Signal { dt: self.dt, samples }
    }

    pub fn add(&self, other: &Signal) -> Signal {
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Signal { dt: self.dt, samples }
    }
}

/// Signals recorded along a simulation.
#[derive(Clone, Debug)]
pub struct Trace {
    pub u: Signal,
    pub z: Signal,
    pub w: Signal,
    pub y: Signal,
}

impl Trace {
    /// CSV with columns t, u*, z*, w*, y*.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for (name, s) in [("u", &self.u), ("z", &self.z), ("w", &self.w), ("y", &self.y)] {
            for k in 0..s.channels() {
                let _ = write!(out, ",{name}{}", k + 1);
            }
        }
        out.push('\n');
        for i in 0..self.u.len() {
            let _ = write!(out, "{}", i as f64 * self.u.dt);
            for s in [&self.u, &self.z, &self.w, &self.y] {
                for v in s.samples[i].iter() {
                    let _ = write!(out, ",{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

struct Loop<'a> {
    a: DMatrix<f64>,
    bw: DMatrix<f64>,
    bu: DMatrix<f64>,
    cz: DMatrix<f64>,
    cy: DMatrix<f64>,
    dzw: DMatrix<f64>,
    dzu: DMatrix<f64>,
    dyw: DMatrix<f64>,
    dyu: DMatrix<f64>,
    phi: &'a [NamedNonlinearity],
    direct: bool,
    max_iters: usize,
    tol: f64,
}

impl<'a> Loop<'a> {
    fn new(m: &LfrModel, phi: &'a [NamedNonlinearity], cfg: &SimConfig) -> Result<Self, SimError> {
        let p = &m.partition;
        let g = &m.g;
        if phi.len() != p.w_cols.len() || p.z_rows.len() != p.w_cols.len() {
            return Err(SimError::Dimension(format!(
                "{} nonlinearities for {} z and {} w channels",
                phi.len(),
                p.z_rows.len(),
                p.w_cols.len()
            )));
        }
        let rows = |mat: &DMatrix<f64>, r: &[usize]| mat.select_rows(r);
        let dzw = rows(&g.d, &p.z_rows).select_columns(&p.w_cols);
        let gain = if dzw.is_empty() { 0.0 } else { dzw.singular_values().max() };
        let lip = phi.iter().map(|f| f.lipschitz()).fold(0.0, f64::max);
        let direct = gain == 0.0;
        if !direct && gain * lip >= 1.0 {
            return Err(SimError::AlgebraicLoop(gain * lip));
        }
        Ok(Loop {
            a: g.a.clone(),
            bw: g.b.select_columns(&p.w_cols),
            bu: g.b.select_columns(&p.u_cols),
            cz: rows(&g.c, &p.z_rows),
            cy: rows(&g.c, &p.y_rows),
            dzu: rows(&g.d, &p.z_rows).select_columns(&p.u_cols),
            dyw: rows(&g.d, &p.y_rows).select_columns(&p.w_cols),
            dyu: rows(&g.d, &p.y_rows).select_columns(&p.u_cols),
            dzw,
            phi,
            direct,
            max_iters: cfg.max_iters,
            tol: cfg.tol,
        })
    }

    fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(z.len(), z.iter().zip(self.phi).map(|(v, f)| f.eval(*v)))
    }

    /// Solve z = C_z x + D_zw Φ(z) + D_zu u, starting from `guess` for w.
    fn outputs(&self, x: &DVector<f64>, u: &DVector<f64>, guess: &DVector<f64>, t: f64) -> Result<(DVector<f64>, DVector<f64>), SimError> {
        let base = &self.cz * x + &self.dzu * u;
        if self.direct {
            let w = self.apply(&base);
            return Ok((base, w));
        }
        let mut w = guess.clone();
        for _ in 0..self.max_iters {
            let z = &base + &self.dzw * &w;
            let next = self.apply(&z);
            let step = (&next - &w).amax();
            w = next;
            if step <= self.tol * (1.0 + w.amax()) {
                let z = &base + &self.dzw * &w;
                return Ok((z, w));
            }
        }
        Err(SimError::NoConvergence(t))
    }

    fn deriv(&self, x: &DVector<f64>, u: &DVector<f64>, guess: &DVector<f64>, t: f64) -> Result<(DVector<f64>, DVector<f64>), SimError> {
        let (_, w) = self.outputs(x, u, guess, t)?;
        Ok((&self.a * x + &self.bw * &w + &self.bu * u, w))
    }
}

/// Simulate the loop from rest under `input` (u channels), on the input's
/// own sample grid.
pub fn simulate_lfr(m: &LfrModel, phi: &[NamedNonlinearity], input: &Signal, cfg: &SimConfig) -> Result<Trace, SimError> {
    let lp = Loop::new(m, phi, cfg)?;
    let nu = m.partition.u_cols.len();
    if input.channels() != nu {
        return Err(SimError::Dimension(format!("input has {} channels, model expects {nu}", input.channels())));
    }
    let dt = input.dt;
    let n = input.len();
    let mut x = DVector::zeros(m.g.states());
    let mut w = DVector::zeros(phi.len());
    let mut z_out = Vec::with_capacity(n);
    let mut w_out = Vec::with_capacity(n);
    let mut y_out = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * dt;
        let u0 = &input.samples[k];
        let (z, wk) = lp.outputs(&x, u0, &w, t)?;
        y_out.push(&lp.cy * &x + &lp.dyw * &wk + &lp.dyu * u0);
        z_out.push(z);
        w_out.push(wk.clone());
        w = wk;
        if k + 1 == n {
            break;
        }
        let u1 = &input.samples[k + 1];
        let um = (u0 + u1) * 0.5;
        let (k1, _) = lp.deriv(&x, u0, &w, t)?;
        let (k2, _) = lp.deriv(&(&x + &k1 * (dt / 2.0)), &um, &w, t)?;
        let (k3, _) = lp.deriv(&(&x + &k2 * (dt / 2.0)), &um, &w, t)?;
        let (k4, _) = lp.deriv(&(&x + &k3 * dt), u1, &w, t)?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if !x.iter().all(|v| v.is_finite()) || x.amax() > 1e12 {
            return Err(SimError::Diverged(t));
        }
    }
    Ok(Trace {
        u: input.clone(),
        z: Signal { dt, samples: z_out },
        w: Signal { dt, samples: w_out },
        y: Signal { dt, samples: y_out },
    })
}

/// Kind of random excitation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Excitation {
    Multisine,
    FilteredNoise,
}

/// Random excitation with `n` samples. Frequencies are drawn log-uniformly
/// from `band`, amplitudes log-uniformly over two decades.
pub fn excitation(kind: Excitation, rng: &mut ChaCha8Rng, channels: usize, n: usize, dt: f64, band: (f64, f64)) -> Signal {
    let mut s = Signal::zeros(dt, n, channels);
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.random_range(lo.ln()..=hi.ln())).exp();
    for c in 0..channels {
        let amp = log_uniform(rng, 0.1, 10.0);
        match kind {
            Excitation::Multisine => {
                let tones: Vec<(f64, f64, f64)> = (0..8)
                    .map(|_| (rng.random_range(0.2..1.0), log_uniform(rng, band.0, band.1), rng.random_range(0.0..std::f64::consts::TAU)))
                    .collect();
                let norm: f64 = tones.iter().map(|t| t.0).sum();
                for (k, v) in s.samples.iter_mut().enumerate() {
                    let t = k as f64 * dt;
                    v[c] = amp / norm * tones.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum::<f64>();
                }
            }
            Excitation::FilteredNoise => {
                let cutoff = log_uniform(rng, band.0, band.1);
                let alpha = 1.0 - (-cutoff * dt).exp();
                let normal = Normal::new(0.0, 1.0).expect("unit normal");
                // keeps the filtered variance near amp² across cutoffs
                let gain = amp * (2.0 / alpha).sqrt();
                let mut state = 0.0;
                for v in s.samples.iter_mut() {
                    state += alpha * (normal.sample(rng) - state);
                    v[c] = gain * state;
                }
            }
        }
    }
    s
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GainOptions {
    pub multisine_pairs: usize,
    pub noise_pairs: usize,
    pub seed: u64,
    /// Incremental pairs (u1, u2); otherwise u2 = 0.
    pub incremental: bool,
    pub sim: SimConfig,
}

impl Default for GainOptions {
    fn default() -> Self {
        GainOptions { multisine_pairs: 20, noise_pairs: 20, seed: 7, incremental: true, sim: SimConfig::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GainEstimate {
    /// Largest observed ratio ‖y1 − y2‖ / ‖u1 − u2‖.
    pub value: f64,
    pub num_pairs: usize,
    /// Seed of the maximizing pair; [`excitation_pair_seeded`] regenerates it.
    pub best_pair_seed: u64,
    pub best_kind: Excitation,
    pub dt: f64,
    pub horizon: f64,
}

/// Seed of pair `k` in a run seeded with `seed`.
pub fn pair_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64)
}

/// Excitation pair `k` of a run.
pub fn excitation_pair(ex: &Example, opts: &GainOptions, k: usize, dt: f64, n: usize) -> (Excitation, Signal, Signal) {
    let kind = if k < opts.multisine_pairs { Excitation::Multisine } else { Excitation::FilteredNoise };
    excitation_pair_seeded(ex, kind, pair_seed(opts.seed, k), opts.incremental, dt, n)
}

/// Excitation pair of the given kind drawn from `seed`.
pub fn excitation_pair_seeded(ex: &Example, kind: Excitation, seed: u64, incremental: bool, dt: f64, n: usize) -> (Excitation, Signal, Signal) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = ex.model.partition.u_cols.len();
    let horizon = dt * n as f64;
    let band = (2.0 / horizon, 0.2 / dt);
    let u1 = excitation(kind, &mut rng, nu, n, dt, band);
    let u2 = if incremental {
        let other = if rng.random_bool(0.5) { kind } else { Excitation::FilteredNoise };
        let d = excitation(other, &mut rng, nu, n, dt, band);
        if rng.random_bool(0.5) { u1.add(&d) } else { d }
    } else {
        Signal::zeros(dt, n, nu)
    };
    (kind, u1, u2)
}

/// Lower estimate of the (incremental) L2 gain of `ex` from random
/// excitation pairs; pairs run in parallel and are reproducible by seed.
pub fn empirical_gain(ex: &Example, opts: &GainOptions) -> Result<GainEstimate, SimError> {
    let (dt, horizon) = opts.sim.resolve(&ex.model.g)?;
    let n = (horizon / dt).ceil() as usize + 1;
    let total = opts.multisine_pairs + opts.noise_pairs;
    if total == 0 {
        return Err(SimError::Invalid("no excitation pairs".into()));
    }
    let results = par::map_range(total, |k| -> Result<(f64, Excitation), SimError> {
        let (kind, u1, u2) = excitation_pair(ex, opts, k, dt, n);
        let du = u1.sub(&u2).l2();
        if du == 0.0 {
            return Ok((0.0, kind));
        }
        let y1 = simulate_lfr(&ex.model, &ex.nonlinearities, &u1, &opts.sim)?.y;
        let y2 = simulate_lfr(&ex.model, &ex.nonlinearities, &u2, &opts.sim)?.y;
        Ok((y1.sub(&y2).l2() / du, kind))
    });
    let mut best = GainEstimate { value: 0.0, num_pairs: total, best_pair_seed: pair_seed(opts.seed, 0), best_kind: Excitation::Multisine, dt, horizon };
    for (k, r) in results.into_iter().enumerate() {
        let (g, kind) = r?;
        if g > best.value {
            best.value = g;
            best.best_pair_seed = pair_seed(opts.seed, k);
            best.best_kind = kind;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{Partition, PhiSpec};
    use crate::nonlin::SectorBound;

    /// ẋ = −x + w + u, z = x, w = φ(z), y = x.
    fn scalar_loop(phi: NamedNonlinearity) -> Example {
        let g = StateSpace::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        Example {
            model: LfrModel {
                name: "scalar".into(),
                g,
                partition: Partition::leading(1, 1, 1, 1),
                phi: PhiSpec::Sector(SectorBound::uniform(-1.0, 0.0, 1, true).unwrap()),
            },
            nonlinearities: vec![phi],
        }
    }

    #[test]
    fn linear_loop_matches_closed_form() {
        // φ = −id closes to ẋ = −2x + u; the step response is (1 − e^{−2t}) / 2
        let ex = scalar_loop(NamedNonlinearity::Linear { k: -1.0 });
        let dt = 1e-3;
        let mut u = Signal::zeros(dt, 3001, 1);
        for v in u.samples.iter_mut() {
            v[0] = 1.0;
        }
        let tr = simulate_lfr(&ex.model, &ex.nonlinearities, &u, &SimConfig::default()).unwrap();
        let t: f64 = 3.0;
        let exact = (1.0 - (-2.0 * t).exp()) / 2.0;
        assert!((tr.y.samples[3000][0] - exact).abs() < 1e-9);
    }

    #[test]
    fn gain_estimate_is_reproducible_and_below_h_infinity_norm() {
        let ex = scalar_loop(NamedNonlinearity::Linear { k: -1.0 });
        let opts = GainOptions { multisine_pairs: 3, noise_pairs: 3, ..GainOptions::default() };
        let a = empirical_gain(&ex, &opts).unwrap();
        let b = empirical_gain(&ex, &opts).unwrap();
        assert_eq!(a.value, b.value);
        // closed loop 1/(s + 2) has H∞ norm ½
        assert!(a.value <= 0.5 + 1e-6 && a.value > 0.05, "{}", a.value);
    }

    #[test]
    fn algebraic_loop_refused_when_not_contractive() {
        let mut ex = scalar_loop(NamedNonlinearity::Linear { k: -1.0 });
        ex.model.g.d[(0, 0)] = 2.0;
        let u = Signal::zeros(0.01, 10, 1);
        assert!(matches!(
            simulate_lfr(&ex.model, &ex.nonlinearities, &u, &SimConfig::default()),
            Err(SimError::AlgebraicLoop(_))
        ));
    }

    #[test]
    fn algebraic_loop_solved_by_iteration() {
        // z = x + 0.5 w, w = −z  ⇒  w = −2x/3
        let mut ex = scalar_loop(NamedNonlinearity::Linear { k: -1.0 });
        ex.model.g.d[(0, 0)] = 0.5;
        let mut u = Signal::zeros(0.01, 2, 1);
        u.samples[0][0] = 1.0;
        let lp = Loop::new(&ex.model, &ex.nonlinearities, &SimConfig::default()).unwrap();
        let (_, w) = lp.outputs(&DVector::from_element(1, 1.0), &DVector::zeros(1), &DVector::zeros(1), 0.0).unwrap();
        assert!((w[0] + 2.0 / 3.0).abs() < 1e-10);
    }
}
