//! Continuous-time LTI systems: realizations, frequency response, singular
//! value sweeps and the disk-algebra bound on the SRG of a stable system.

use crate::par;
use crate::region::DiskAlgebraRegion;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LtiError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("SRG bound requires stable LTI operator (max real part of eigenvalues {0:.3e})")]
    NotHurwitz(f64),
    #[error("singular frequency response solve at omega = {0}")]
    Singular(f64),
    #[error("invalid system: {0}")]
    Invalid(String),
}

/// Margin on eigenvalue real parts for the stability check.
pub const HURWITZ_MARGIN: f64 = 1e-9;

/// (A, B, C, D) realization of G(s) = C(sI − A)⁻¹B + D.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SsJson", into = "SsJson")]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct SsJson {
    #[serde(rename = "A", default)]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B", default)]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C", default)]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, name: &str) -> Result<DMatrix<f64>, LtiError> {
    if rows.is_empty() {
        return Ok(DMatrix::zeros(nrows, ncols));
    }
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(LtiError::Dimension(format!("{name} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl TryFrom<SsJson> for StateSpace {
    type Error = LtiError;

    fn try_from(j: SsJson) -> Result<Self, LtiError> {
        let q = j.d.len();
        let p = j.d.first().map(|r| r.len()).unwrap_or(0);
        let n = j.a.len();
        let a = rows_to_matrix(&j.a, n, n, "A")?;
        let b = rows_to_matrix(&j.b, n, p, "B")?;
        let c = rows_to_matrix(&j.c, q, n, "C")?;
        let d = rows_to_matrix(&j.d, q, p, "D")?;
        StateSpace::new(a, b, c, d)
    }
}

impl From<StateSpace> for SsJson {
    fn from(s: StateSpace) -> Self {
        SsJson { a: matrix_to_rows(&s.a), b: matrix_to_rows(&s.b), c: matrix_to_rows(&s.c), d: matrix_to_rows(&s.d) }
    }
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self, LtiError> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n || c.nrows() != d.nrows() || b.ncols() != d.ncols() {
            return Err(LtiError::Dimension(format!(
                "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).chain(d.iter()).any(|x| !x.is_finite()) {
            return Err(LtiError::Invalid("non-finite entry".into()));
        }
        Ok(StateSpace { a, b, c, d })
    }

    /// Memoryless gain.
    pub fn static_gain(d: DMatrix<f64>) -> Self {
        let (q, p) = d.shape();
        StateSpace { a: DMatrix::zeros(0, 0), b: DMatrix::zeros(0, p), c: DMatrix::zeros(q, 0), d }
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.d.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.d.nrows()
    }

    pub fn poles(&self) -> Vec<C64> {
        if self.states() == 0 {
            return Vec::new();
        }
        self.a.complex_eigenvalues().iter().copied().collect()
    }

    pub fn max_pole_real(&self) -> f64 {
        self.poles().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_hurwitz(&self) -> bool {
        self.max_pole_real() < -HURWITZ_MARGIN
    }

    pub fn require_hurwitz(&self) -> Result<(), LtiError> {
        if self.is_hurwitz() {
            Ok(())
        } else {
            Err(LtiError::NotHurwitz(self.max_pole_real()))
        }
    }

    /// G(s) at an arbitrary complex point.
    pub fn eval(&self, s: C64) -> Option<DMatrix<C64>> {
        let d = self.d.map(|x| C64::new(x, 0.0));
        if self.states() == 0 {
            return Some(d);
        }
        let n = self.states();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { s - self.a[(i, j)] } else { C64::new(-self.a[(i, j)], 0.0) });
        let x = m.lu().solve(&self.b.map(|x| C64::new(x, 0.0)))?;
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return None;
        }
        Some(self.c.map(|x| C64::new(x, 0.0)) * x + d)
    }

    /// G(jω); ω = ∞ returns D.
    pub fn freq_response(&self, omega: f64) -> Result<DMatrix<C64>, LtiError> {
        if omega.is_infinite() {
            return Ok(self.d.map(|x| C64::new(x, 0.0)));
        }
        self.eval(C64::new(0.0, omega)).ok_or(LtiError::Singular(omega))
    }

    /// Subsystem keeping the given output rows and input columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<StateSpace, LtiError> {
        if rows.iter().any(|&r| r >= self.outputs()) || cols.iter().any(|&c| c >= self.inputs()) {
            return Err(LtiError::Dimension("index out of range".into()));
        }
        let b = self.b.select_columns(cols);
        let c = self.c.select_rows(rows);
        let d = self.d.select_rows(rows).select_columns(cols);
        StateSpace::new(self.a.clone(), b, c, d)
    }

    /// G_α = [G; 0] − [αI; 0], padded to max(p, q) outputs.
    pub fn shifted(&self, alpha: f64) -> StateSpace {
        let (q, p) = (self.outputs(), self.inputs());
        let n = p.max(q);
        let mut c = DMatrix::zeros(n, self.states());
        c.rows_mut(0, q).copy_from(&self.c);
        let mut d = DMatrix::zeros(n, p);
        d.rows_mut(0, q).copy_from(&self.d);
        for i in 0..p {
            d[(i, i)] -= alpha;
        }
        StateSpace { a: self.a.clone(), b: self.b.clone(), c, d }
    }

    /// Output scaled on the left and input on the right: L·G·R.
    pub fn scaled(&self, left: &DMatrix<f64>, right: &DMatrix<f64>) -> Result<StateSpace, LtiError> {
        if left.ncols() != self.outputs() || right.nrows() != self.inputs() {
            return Err(LtiError::Dimension("scaling".into()));
        }
        StateSpace::new(self.a.clone(), &self.b * right, left * &self.c, left * &self.d * right)
    }

    /// g2 ∘ g1 (g1 first).
    pub fn series(g1: &StateSpace, g2: &StateSpace) -> Result<StateSpace, LtiError> {
        if g1.outputs() != g2.inputs() {
            return Err(LtiError::Dimension("series: output of first must match input of second".into()));
        }
        let (n1, n2) = (g1.states(), g2.states());
        let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&g1.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&g2.b * &g1.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&g2.a);
        let mut b = DMatrix::zeros(n1 + n2, g1.inputs());
        b.rows_mut(0, n1).copy_from(&g1.b);
        b.rows_mut(n1, n2).copy_from(&(&g2.b * &g1.d));
        let mut c = DMatrix::zeros(g2.outputs(), n1 + n2);
        c.columns_mut(0, n1).copy_from(&(&g2.d * &g1.c));
        c.columns_mut(n1, n2).copy_from(&g2.c);
        StateSpace::new(a, b, c, &g2.d * &g1.d)
    }

    /// Negative feedback y = g(u − h y).
    pub fn feedback(g: &StateSpace, h: &StateSpace) -> Result<StateSpace, LtiError> {
        if g.outputs() != h.inputs() || h.outputs() != g.inputs() {
            return Err(LtiError::Dimension("feedback: loop dimensions".into()));
        }
        let q = g.outputs();
        let e = (DMatrix::identity(q, q) + &g.d * &h.d).try_inverse().ok_or_else(|| LtiError::Invalid("feedback loop is not well-posed".into()))?;
        let (ng, nh) = (g.states(), h.states());
        // yg = E (Cg xg − Dg Ch xh + Dg u)
        let yx_g = &e * &g.c;
        let yx_h = -(&e * &g.d * &h.c);
        let yu = &e * &g.d;
        // e_in = u − Ch xh − Dh yg
        let ex_g = -(&h.d * &yx_g);
        let ex_h = -(&h.c) - &h.d * &yx_h;
        let eu = DMatrix::identity(g.inputs(), g.inputs()) - &h.d * &yu;
        let n = ng + nh;
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (ng, ng)).copy_from(&(&g.a + &g.b * &ex_g));
        a.view_mut((0, ng), (ng, nh)).copy_from(&(&g.b * &ex_h));
        a.view_mut((ng, 0), (nh, ng)).copy_from(&(&h.b * &yx_g));
        a.view_mut((ng, ng), (nh, nh)).copy_from(&(&h.a + &h.b * &yx_h));
        let mut b = DMatrix::zeros(n, g.inputs());
        b.rows_mut(0, ng).copy_from(&(&g.b * &eu));
        b.rows_mut(ng, nh).copy_from(&(&h.b * &yu));
        let mut c = DMatrix::zeros(q, n);
        c.columns_mut(0, ng).copy_from(&yx_g);
        c.columns_mut(ng, nh).copy_from(&yx_h);
        StateSpace::new(a, b, c, yu)
    }

    /// Realization of a matrix of scalar transfer functions (not minimal).
    pub fn from_tf_matrix(entries: &[Vec<Tf>]) -> Result<StateSpace, LtiError> {
        let q = entries.len();
        let p = entries.first().map(|r| r.len()).unwrap_or(0);
        if q == 0 || p == 0 || entries.iter().any(|r| r.len() != p) {
            return Err(LtiError::Dimension("transfer matrix must be rectangular and nonempty".into()));
        }
        let parts: Vec<Vec<StateSpace>> = entries.iter().map(|r| r.iter().map(Tf::to_ss).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
        let n: usize = parts.iter().flatten().map(|s| s.states()).sum();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, p);
        let mut c = DMatrix::zeros(q, n);
        let mut d = DMatrix::zeros(q, p);
        let mut k = 0;
        for (i, row) in parts.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let m = s.states();
                a.view_mut((k, k), (m, m)).copy_from(&s.a);
                b.view_mut((k, j), (m, 1)).copy_from(&s.b);
                c.view_mut((i, k), (1, m)).copy_from(&s.c);
                d[(i, j)] = s.d[(0, 0)];
                k += m;
            }
        }
        StateSpace::new(a, b, c, d)
    }
}

/// Scalar rational transfer function; coefficients in descending powers of s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tf {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

fn poly_eval(c: &[f64], s: C64) -> C64 {
    c.iter().fold(C64::new(0.0, 0.0), |acc, &x| acc * s + x)
}

fn strip(c: &[f64]) -> Vec<f64> {
    let k = c.iter().position(|&x| x != 0.0).unwrap_or(c.len());
    c[k..].to_vec()
}

/// Product of polynomials in descending powers.
pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl Tf {
    pub fn new(num: &[f64], den: &[f64]) -> Self {
        Tf { num: num.to_vec(), den: den.to_vec() }
    }

    pub fn constant(k: f64) -> Self {
        Tf::new(&[k], &[1.0])
    }

    pub fn eval(&self, s: C64) -> C64 {
        poly_eval(&self.num, s) / poly_eval(&self.den, s)
    }

    /// Controllable canonical realization.
    pub fn to_ss(&self) -> Result<StateSpace, LtiError> {
        let den = strip(&self.den);
        let num = strip(&self.num);
        if den.is_empty() {
            return Err(LtiError::Invalid("zero denominator".into()));
        }
        if num.len() > den.len() {
            return Err(LtiError::Invalid("improper transfer function".into()));
        }
        let n = den.len() - 1;
        let lead = den[0];
        let den: Vec<f64> = den.iter().map(|x| x / lead).collect();
        let mut nm = vec![0.0; n + 1 - num.len()];
        nm.extend(num.iter().map(|x| x / lead));
        let d = nm[0];
        // strictly proper remainder: nm − d·den, coefficients of s^{n-1..0}
        let r: Vec<f64> = (1..=n).map(|k| nm[k] - d * den[k]).collect();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        for k in 0..n {
            a[(n - 1, k)] = -den[n - k];
        }
        let mut b = DMatrix::zeros(n, 1);
        if n > 0 {
            b[(n - 1, 0)] = 1.0;
        }
        let c = DMatrix::from_fn(1, n, |_, k| r[n - 1 - k]);
        StateSpace::new(a, b, c, DMatrix::from_element(1, 1, d))
    }
}

/// Frequencies in rad/s at which G(jω) is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omegas: Vec<f64>,
}

impl FrequencyGrid {
    /// ω = 0 plus `n` log-spaced points on [lo, hi].
    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        let mut omegas = vec![0.0];
        let (a, b) = (lo.log10(), hi.log10());
        for k in 0..n {
            let t = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
            omegas.push(10f64.powf(a + t * (b - a)));
        }
        FrequencyGrid { omegas }
    }
}

/// Extremal singular values over a frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaProfile {
    pub frequencies: Vec<f64>,
    pub sigma_max: Vec<f64>,
    pub sigma_min: Vec<f64>,
    pub sup_estimate: f64,
    pub inf_estimate: f64,
    pub sampled_estimate: bool,
}

impl SigmaProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega,sigma_max,sigma_min\n");
        for k in 0..self.frequencies.len() {
            s.push_str(&format!("{},{},{}\n", self.frequencies[k], self.sigma_max[k], self.sigma_min[k]));
        }
        s
    }
}

/// Largest and smallest singular value of a (tall or square) matrix.
pub fn sigma_pair(m: &DMatrix<C64>) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let s = m.singular_values();
    let hi = s.iter().copied().fold(0.0, f64::max);
    let lo = if m.nrows() >= m.ncols() { s.iter().copied().fold(f64::INFINITY, f64::min) } else { 0.0 };
    (hi, lo)
}

/// [M; 0] − [αI; 0] padded to max(p, q) rows.
pub fn shifted_matrix(m: &DMatrix<C64>, alpha: f64) -> DMatrix<C64> {
    let (q, p) = m.shape();
    let n = p.max(q);
    let mut out = DMatrix::zeros(n, p);
    out.rows_mut(0, q).copy_from(m);
    for i in 0..p {
        out[(i, i)] -= alpha;
    }
    out
}

const GOLDEN: f64 = 0.618_033_988_749_895;

/// Golden-section search for the extremum of `f` on [a, b]; `sign` = 1 for
/// a maximum, −1 for a minimum. Returns the best value seen.
fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, sign: f64, tol: f64) -> f64 {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (sign * f(x1), sign * f(x2));
    let mut best = f1.max(f2);
    let mut it = 0;
    while (b - a) > tol * b.abs().max(1e-12) && it < 200 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = sign * f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = sign * f(x2);
        }
        best = best.max(f1).max(f2);
        it += 1;
    }
    sign * best
}

/// Frequency-response samples of a system, reused across shifts α.
pub struct ResponseCache<'a> {
    ss: &'a StateSpace,
    grid: Vec<f64>,
    values: Vec<DMatrix<C64>>,
    at_infinity: DMatrix<C64>,
}

impl<'a> ResponseCache<'a> {
    pub fn new(ss: &'a StateSpace, grid: &FrequencyGrid) -> Result<Self, LtiError> {
        if grid.omegas.is_empty() {
            return Err(LtiError::Invalid("empty frequency grid".into()));
        }
        let values: Vec<Result<DMatrix<C64>, LtiError>> = par::map(&grid.omegas, |&w| ss.freq_response(w));
        let values = values.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(ResponseCache { ss, grid: grid.omegas.clone(), values, at_infinity: ss.freq_response(f64::INFINITY)? })
    }

    /// σ̄ and σ̲ of G_α along the grid, refined near the extrema.
    pub fn profile(&self, alpha: f64) -> SigmaProfile {
        let pairs: Vec<(f64, f64)> = self.values.iter().map(|g| sigma_pair(&shifted_matrix(g, alpha))).collect();
        let sigma_max: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let sigma_min: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (inf_hi, inf_lo) = sigma_pair(&shifted_matrix(&self.at_infinity, alpha));
        let eval = |w: f64, k: usize| -> f64 {
            match self.ss.freq_response(w) {
                Ok(g) => {
                    let p = sigma_pair(&shifted_matrix(&g, alpha));
                    if k == 0 {
                        p.0
                    } else {
                        p.1
                    }
                }
                Err(_) => f64::NAN,
            }
        };
        let n = self.grid.len();
        let refine = |vals: &[f64], k: usize, sign: f64| -> f64 {
            let mut best = 0usize;
            for i in 0..n {
                if sign * vals[i] > sign * vals[best] {
                    best = i;
                }
            }
            let lo = self.grid[best.saturating_sub(1)];
            let hi = self.grid[(best + 1).min(n - 1)];
            let r = if hi > lo { golden(|w| eval(w, k), lo, hi, sign, 1e-9) } else { vals[best] };
            if r.is_nan() {
                vals[best]
            } else if sign > 0.0 {
                r.max(vals[best])
            } else {
                r.min(vals[best])
            }
        };
        let sup = refine(&sigma_max, 0, 1.0).max(inf_hi);
        let inf = refine(&sigma_min, 1, -1.0).min(inf_lo);
        SigmaProfile { frequencies: self.grid.clone(), sigma_max, sigma_min, sup_estimate: sup, inf_estimate: inf.max(0.0), sampled_estimate: true }
    }
}

/// σ̄/σ̲ extrema of G over a grid (G itself, α = 0).
pub fn sigma_extrema(ss: &StateSpace, grid: &FrequencyGrid) -> Result<SigmaProfile, LtiError> {
    ss.require_hurwitz()?;
    Ok(ResponseCache::new(ss, grid)?.profile(0.0))
}

/// Safety factors applied to sampled singular-value extrema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inflation {
    pub upper: f64,
    pub lower: f64,
}

impl Default for Inflation {
    fn default() -> Self {
        Inflation { upper: 1.001, lower: 0.999 }
    }
}

/// ⋂_{α∈Υ} D_{σ̄(G_α)}(α) ∖ ⋃_{α∈Λ} D_{σ̲(G_α)}(α).
pub fn lti_srg_bound(ss: &StateSpace, upsilon: &[f64], lambda: &[f64], grid: &FrequencyGrid, inflation: Inflation) -> Result<DiskAlgebraRegion, LtiError> {
    ss.require_hurwitz()?;
    if upsilon.is_empty() {
        return Err(LtiError::Invalid("Upsilon must be nonempty".into()));
    }
    let cache = ResponseCache::new(ss, grid)?;
    let upper = par::map(upsilon, |&a| (a, cache.profile(a).sup_estimate * inflation.upper));
    let lower = par::map(lambda, |&a| (a, cache.profile(a).inf_estimate * inflation.lower));
    Ok(DiskAlgebraRegion { upper, lower, infinity: false })
}

/// Disk-algebra SRG bound of a constant matrix.
pub fn matrix_srg_bound(m: &DMatrix<C64>, upsilon: &[f64], lambda: &[f64]) -> DiskAlgebraRegion {
    let upper = upsilon.iter().map(|&a| (a, sigma_pair(&shifted_matrix(m, a)).0)).collect();
    let lower = lambda.iter().map(|&a| (a, sigma_pair(&shifted_matrix(m, a)).1)).collect();
    DiskAlgebraRegion { upper, lower, infinity: false }
}

/// `n` evenly spaced points on [−r, r] (just {0} when r = 0).
pub fn base_points(r: f64, n: usize) -> Vec<f64> {
    if r <= 0.0 || n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|k| -r + 2.0 * r * k as f64 / (n - 1) as f64).collect()
}

pub const DEFAULT_GRID_POINTS: usize = 400;
pub const DEFAULT_BASE_POINTS: usize = 41;

/// Default frequency grid and base points Υ = Λ.
pub fn auto_grids(ss: &StateSpace) -> Result<(FrequencyGrid, Vec<f64>, Vec<f64>), LtiError> {
    auto_grids_with(ss, DEFAULT_GRID_POINTS, DEFAULT_BASE_POINTS)
}

pub fn auto_grids_with(ss: &StateSpace, grid_points: usize, base: usize) -> Result<(FrequencyGrid, Vec<f64>, Vec<f64>), LtiError> {
    ss.require_hurwitz()?;
    let grid = frequency_grid(ss, grid_points);
    let sup = ResponseCache::new(ss, &grid)?.profile(0.0).sup_estimate;
    let pts = base_points(sup, base);
    Ok((grid, pts.clone(), pts))
}

/// Log grid over [1e-3·min|λ|, 1e3·max|λ|] plus ω = 0; {0} for static gains.
pub fn frequency_grid(ss: &StateSpace, n: usize) -> FrequencyGrid {
    let mags: Vec<f64> = ss.poles().iter().map(|p| p.norm()).filter(|m| *m > 0.0).collect();
    if mags.is_empty() {
        return FrequencyGrid { omegas: vec![0.0] };
    }
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    FrequencyGrid::log(1e-3 * lo, 1e3 * hi, n)
}
