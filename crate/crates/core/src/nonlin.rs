//! Sector bounds of diagonal static nonlinearities, their disk bounds and
//! concrete scalar nonlinearities used for simulation.

use crate::region::DiskAlgebraRegion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NonlinError {
    #[error("channel {0}: lower sector bound exceeds upper bound")]
    Inverted(usize),
    #[error("sector has no channels")]
    Empty,
    #[error("channel count mismatch: {0} vs {1}")]
    Channels(usize, usize),
    #[error("scale of channel {0} must be positive")]
    Scale(usize),
    #[error("invalid nonlinearity: {0}")]
    Invalid(String),
}

/// Per-channel sector [μ_i, λ_i], incremental (slopes) or not (rays).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorBound {
    pub incremental: bool,
    pub channels: Vec<(f64, f64)>,
}

impl SectorBound {
    pub fn new(channels: Vec<(f64, f64)>, incremental: bool) -> Result<Self, NonlinError> {
        let s = SectorBound { incremental, channels };
        s.validate()?;
        Ok(s)
    }

    pub fn uniform(mu: f64, lambda: f64, n: usize, incremental: bool) -> Result<Self, NonlinError> {
        Self::new(vec![(mu, lambda); n], incremental)
    }

    pub fn validate(&self) -> Result<(), NonlinError> {
        if self.channels.is_empty() {
            return Err(NonlinError::Empty);
        }
        for (i, &(m, l)) in self.channels.iter().enumerate() {
            if !(m <= l) || !m.is_finite() || !l.is_finite() {
                return Err(NonlinError::Inverted(i));
            }
        }
        Ok(())
    }

    /// Common sector [min μ_i, max λ_i].
    pub fn hull(&self) -> (f64, f64) {
        let mu = self.channels.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let la = self.channels.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        (mu, la)
    }
}

/// D_{[μ,λ]} with μ = min μ_i and λ = max λ_i; bounds the SRG (incremental)
/// or the scaled graph at 0 (non-incremental) of the diagonal operator.
pub fn diagonal_nl_region(s: &SectorBound) -> DiskAlgebraRegion {
    let (mu, la) = s.hull();
    DiskAlgebraRegion::interval(mu, la)
}

/// D_γ(0): bound for any operator with (incremental) gain at most γ.
pub fn gain_ball(gamma: f64) -> DiskAlgebraRegion {
    DiskAlgebraRegion::disk(0.0, gamma.abs())
}

/// Sector of σ_i·φ_i + κ_i·id.
pub fn loop_transform_sector(s: &SectorBound, kappa: &[f64], scale: &[f64]) -> Result<SectorBound, NonlinError> {
    let n = s.channels.len();
    if kappa.len() != n {
        return Err(NonlinError::Channels(n, kappa.len()));
    }
    if scale.len() != n {
        return Err(NonlinError::Channels(n, scale.len()));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if !(scale[i] > 0.0) {
            return Err(NonlinError::Scale(i));
        }
        let (m, l) = s.channels[i];
        out.push((scale[i] * m + kappa[i], scale[i] * l + kappa[i]));
    }
    SectorBound::new(out, s.incremental)
}

/// Per-channel (κ_i, σ_i) mapping every channel onto the common sector `target`.
pub fn normalizing_transform(s: &SectorBound, target: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>), NonlinError> {
    s.validate()?;
    let (tm, tl) = target;
    if !(tm <= tl) {
        return Err(NonlinError::Inverted(0));
    }
    let mut kappa = Vec::new();
    let mut scale = Vec::new();
    for &(m, l) in &s.channels {
        let sg = if l > m && tl > tm { (tl - tm) / (l - m) } else { 1.0 };
        scale.push(sg);
        kappa.push(tm - sg * m);
    }
    Ok((kappa, scale))
}

/// Concrete scalar nonlinearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NamedNonlinearity {
    /// x on [−limit, limit], clipped outside.
    Saturation { limit: f64 },
    /// gain·tanh(x) + linear·x.
    Tanh {
        gain: f64,
        #[serde(default)]
        linear: f64,
    },
    /// −tanh(x).
    NegatedTanh,
    /// Slope `inner` on [−knee, knee] and `outer` beyond, continuous.
    PiecewiseSlope { knee: f64, inner: f64, outer: f64 },
    Linear { k: f64 },
    /// Piecewise-linear interpolation through (xs, ys), extended linearly.
    Table { xs: Vec<f64>, ys: Vec<f64> },
    /// scale·base(x) + kappa·x.
    Transformed { base: Box<NamedNonlinearity>, kappa: f64, scale: f64 },
}

impl NamedNonlinearity {
    pub fn transformed(self, kappa: f64, scale: f64) -> Self {
        NamedNonlinearity::Transformed { base: Box::new(self), kappa, scale }
    }

    pub fn validate(&self) -> Result<(), NonlinError> {
        match self {
            NamedNonlinearity::Saturation { limit } if !(*limit > 0.0) => Err(NonlinError::Invalid("saturation limit must be positive".into())),
            NamedNonlinearity::PiecewiseSlope { knee, .. } if !(*knee >= 0.0) => Err(NonlinError::Invalid("knee must be nonnegative".into())),
            NamedNonlinearity::Table { xs, ys } => {
                if xs.len() < 2 || xs.len() != ys.len() || xs.windows(2).any(|w| !(w[1] > w[0])) {
                    Err(NonlinError::Invalid("table needs at least two strictly increasing abscissae".into()))
                } else {
                    Ok(())
                }
            }
            NamedNonlinearity::Transformed { base, scale, .. } => {
                if !(*scale > 0.0) {
                    return Err(NonlinError::Invalid("scale must be positive".into()));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NamedNonlinearity::Saturation { limit } => x.clamp(-limit, *limit),
            NamedNonlinearity::Tanh { gain, linear } => gain * x.tanh() + linear * x,
            NamedNonlinearity::NegatedTanh => -x.tanh(),
            NamedNonlinearity::PiecewiseSlope { knee, inner, outer } => {
                if x.abs() <= *knee {
                    inner * x
                } else {
                    outer * x - (outer - inner) * knee * x.signum()
                }
            }
            NamedNonlinearity::Linear { k } => k * x,
            NamedNonlinearity::Table { xs, ys } => {
                let n = xs.len();
                let k = match xs.partition_point(|&v| v <= x) {
                    0 => 0,
                    i if i >= n => n - 2,
                    i => i - 1,
                };
                ys[k] + (ys[k + 1] - ys[k]) * (x - xs[k]) / (xs[k + 1] - xs[k])
            }
            NamedNonlinearity::Transformed { base, kappa, scale } => scale * base.eval(x) + kappa * x,
        }
    }

    /// Largest slope magnitude; used for algebraic-loop contraction checks.
    pub fn lipschitz(&self) -> f64 {
        let (m, l) = self.incremental_sector();
        m.abs().max(l.abs())
    }

    /// Declared incremental sector [inf slope, sup slope].
    pub fn incremental_sector(&self) -> (f64, f64) {
        match self {
            NamedNonlinearity::Saturation { .. } => (0.0, 1.0),
            NamedNonlinearity::Tanh { gain, linear } => (linear + gain.min(0.0), linear + gain.max(0.0)),
            NamedNonlinearity::NegatedTanh => (-1.0, 0.0),
            NamedNonlinearity::PiecewiseSlope { inner, outer, .. } => (inner.min(*outer), inner.max(*outer)),
            NamedNonlinearity::Linear { k } => (*k, *k),
            NamedNonlinearity::Table { xs, ys } => {
                let s = xs.windows(2).zip(ys.windows(2)).map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0]));
                s.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
            }
            NamedNonlinearity::Transformed { base, kappa, scale } => {
                let (m, l) = base.incremental_sector();
                (scale * m + kappa, scale * l + kappa)
            }
        }
    }
}

/// Outcome of a sampled sector check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorCheck {
    pub ok: bool,
    /// First violating pair (x, y); y = 0 for the non-incremental check.
    pub witness: Option<(f64, f64)>,
}

/// Sampled check of μ(x−y)² ≤ (x−y)(φ(x)−φ(y)) ≤ λ(x−y)² on [−10, 10]
/// (or μx² ≤ xφ(x) ≤ λx² when not incremental). Half of the pairs are
/// close together to probe local slopes.
pub fn verify_sector(nl: &NamedNonlinearity, sector: (f64, f64), incremental: bool, samples: usize, seed: u64) -> SectorCheck {
    let (mu, la) = sector;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let x: f64 = rng.random_range(-10.0..10.0);
        let y: f64 = if !incremental {
            0.0
        } else if k % 2 == 0 {
            rng.random_range(-10.0..10.0)
        } else {
            x + rng.random_range(-1e-3..1e-3)
        };
        let d = x - y;
        if d == 0.0 {
            continue;
        }
        let (fx, fy) = (nl.eval(x), if incremental { nl.eval(y) } else { 0.0 });
        let v = d * (fx - fy);
        // relative slack plus the rounding error of fx − fy
        let tol = 1e-9 * d * d + 8.0 * f64::EPSILON * d.abs() * (fx.abs() + fy.abs() + x.abs() + y.abs());
        if v < mu * d * d - tol || v > la * d * d + tol {
            return SectorCheck { ok: false, witness: Some((x, y)) };
        }
    }
    SectorCheck { ok: true, witness: None }
}
