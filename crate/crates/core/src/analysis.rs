//! Stability and gain certificates for feedback interconnections and LFR
//! systems, the homotopy separation sweep and loop transformations.

use crate::lti::{self, Inflation, LtiError, StateSpace};
use crate::nonlin::{self, NonlinError, SectorBound};
use crate::par;
use crate::region::{self, CalcConfig, CellSet, DiskAlgebraRegion, Region, RegionError};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("loop transformation needed: G must be stable (max pole real part {0:.4})")]
    Unstable(f64),
    #[error("{0} has unbounded SRG; a finite rmin is required")]
    Unbounded(String),
    #[error("non-incremental analysis requires the interconnection to be assumed well-posed")]
    WellposednessRequired,
    #[error("invalid model: {0}")]
    Model(String),
    #[error("constant-gain loop I - D_zw K is singular")]
    SingularTransform,
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Nonlin(#[from] NonlinError),
}

impl AnalysisError {
    /// True for violated model hypotheses (as opposed to bad input).
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            AnalysisError::Unstable(_) | AnalysisError::Unbounded(_) | AnalysisError::WellposednessRequired | AnalysisError::SingularTransform | AnalysisError::Lti(LtiError::NotHurwitz(_))
        )
    }
}

/// Which rows of G are z / y and which columns are w / u.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub z_rows: Vec<usize>,
    pub y_rows: Vec<usize>,
    pub w_cols: Vec<usize>,
    pub u_cols: Vec<usize>,
}

impl Partition {
    /// z first, then y; w first, then u.
    pub fn leading(nz: usize, q: usize, nw: usize, p: usize) -> Self {
        Partition { z_rows: (0..nz).collect(), y_rows: (nz..nz + q).collect(), w_cols: (0..nw).collect(), u_cols: (nw..nw + p).collect() }
    }

    fn check(&self, rows: usize, cols: usize) -> Result<(), AnalysisError> {
        let exhaustive = |a: &[usize], b: &[usize], n: usize, what: &str| -> Result<(), AnalysisError> {
            let mut seen = vec![false; n];
            for &k in a.iter().chain(b) {
                if k >= n || seen[k] {
                    return Err(AnalysisError::Model(format!("{what} index sets must be disjoint and within 0..{n}")));
                }
                seen[k] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(AnalysisError::Model(format!("{what} index sets must cover 0..{n}")));
            }
            Ok(())
        };
        exhaustive(&self.z_rows, &self.y_rows, rows, "row")?;
        exhaustive(&self.w_cols, &self.u_cols, cols, "column")?;
        if self.z_rows.is_empty() || self.w_cols.is_empty() || self.y_rows.is_empty() || self.u_cols.is_empty() {
            return Err(AnalysisError::Model("every channel group needs at least one index".into()));
        }
        Ok(())
    }
}

/// SRG source for Φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSpec {
    Sector(SectorBound),
    Region { region: Region, incremental: bool },
}

impl PhiSpec {
    pub fn incremental(&self) -> bool {
        match self {
            PhiSpec::Sector(s) => s.incremental,
            PhiSpec::Region { incremental, .. } => *incremental,
        }
    }

    pub fn region(&self) -> Region {
        match self {
            PhiSpec::Sector(s) => Region::DiskAlgebra(nonlin::diagonal_nl_region(s)),
            PhiSpec::Region { region, .. } => region.clone(),
        }
    }
}

/// y = R u with R = G_yw Φ (I − G_zw Φ)⁻¹ G_zu + G_yu.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LfrModel {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "G")]
    pub g: StateSpace,
    pub partition: Partition,
    pub phi: PhiSpec,
}

/// The four blocks of G.
pub struct Blocks {
    pub zw: StateSpace,
    pub zu: StateSpace,
    pub yw: StateSpace,
    pub yu: StateSpace,
}

impl LfrModel {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        self.partition.check(self.g.outputs(), self.g.inputs())?;
        if let PhiSpec::Sector(s) = &self.phi {
            s.validate()?;
            if s.channels.len() != self.partition.w_cols.len() || s.channels.len() != self.partition.z_rows.len() {
                return Err(AnalysisError::Model(format!(
                    "diagonal Φ has {} channels but n_z = {}, n_w = {}",
                    s.channels.len(),
                    self.partition.z_rows.len(),
                    self.partition.w_cols.len()
                )));
            }
        }
        Ok(())
    }

    pub fn blocks(&self) -> Result<Blocks, AnalysisError> {
        let p = &self.partition;
        Ok(Blocks {
            zw: self.g.select(&p.z_rows, &p.w_cols)?,
            zu: self.g.select(&p.z_rows, &p.u_cols)?,
            yw: self.g.select(&p.y_rows, &p.w_cols)?,
            yu: self.g.select(&p.y_rows, &p.u_cols)?,
        })
    }

    /// (n_z, q, n_w, p).
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let p = &self.partition;
        (p.z_rows.len(), p.y_rows.len(), p.w_cols.len(), p.u_cols.len())
    }
}

/// Settings shared by the certification routines.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub tau_points: usize,
    /// Double the τ grid until r changes by less than 1%.
    pub refine_tau: bool,
    pub calc: CalcConfig,
    pub grid_points: usize,
    pub base_points: usize,
    pub inflation: Inflation,
    pub assume_wellposed: bool,
    /// Force the non-incremental path regardless of the Φ flag.
    pub non_incremental: bool,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            tau_points: 101,
            refine_tau: false,
            calc: CalcConfig::default(),
            grid_points: lti::DEFAULT_GRID_POINTS,
            base_points: lti::DEFAULT_BASE_POINTS,
            inflation: Inflation::default(),
            assume_wellposed: false,
            non_incremental: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// Size and radius of a named intermediate region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub rmin: f64,
    pub cells: usize,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub verdict: Verdict,
    pub separation_r: f64,
    pub tau_at_min: f64,
    pub gain_bound: f64,
    pub incremental: bool,
    pub wellposed_claim: bool,
    pub causal_claim: bool,
    pub intermediate_regions: BTreeMap<String, RegionSummary>,
    /// Separation per τ.
    pub tau_table: Vec<(f64, f64)>,
    pub settings: AnalysisSettings,
    pub notes: Vec<String>,
    /// Lattice sets for plotting; not serialized.
    #[serde(skip)]
    pub regions: BTreeMap<String, CellSet>,
    /// Exact LTI and Φ bounds.
    pub disk_regions: BTreeMap<String, DiskAlgebraRegion>,
}

impl AnalysisReport {
    fn record(&mut self, name: &str, c: CellSet) {
        let summary = RegionSummary { rmin: if c.is_empty() { 0.0 } else { c.rmin() }, cells: c.count(), epsilon: c.cell_radius() };
        self.intermediate_regions.insert(name.to_string(), summary);
        self.regions.insert(name.to_string(), c);
    }
}

/// Uniform τ grid on [0, 1] including both ends.
pub fn tau_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

/// Result of the homotopy separation sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub r: f64,
    pub tau_min: f64,
    pub table: Vec<(f64, f64)>,
}

/// Lower bound on min over τ of dist(h1⁻¹, −τ h2) for lattice sets.
///
/// Only boundary cells of h1 are inverted; a component of −τ h2 lying wholly
/// inside h1⁻¹ is caught by testing one representative per component.
pub fn separation_cells(h1: &CellSet, h2: &CellSet, taus: &[f64]) -> Separation {
    if h1.is_empty() || h2.is_empty() {
        return Separation { r: f64::INFINITY, tau_min: 0.0, table: taus.iter().map(|&t| (t, f64::INFINITY)).collect() };
    }
    let e1 = h1.cell_radius();
    let e2 = h2.cell_radius();
    let bd: Vec<C64> = h1.boundary().into_iter().map(|(i, j)| h1.center(i, j)).collect();
    let r2 = h2.rmin();
    let reps: Vec<C64> = h2.component_reps().into_iter().map(|(i, j)| h2.center(i, j)).collect();
    let field = h2.distance_field();
    let table: Vec<(f64, f64)> = taus
        .iter()
        .map(|&tau| {
            for &z in &reps {
                let s = -tau * z;
                if s.norm() > 1e-300 && h1.touches(s.conj().inv(), 0.0) {
                    return (tau, 0.0);
                }
            }
            let d = par::fold_chunks(
                &bd,
                512,
                f64::INFINITY,
                |m, chunk| {
                    chunk.iter().fold(m, |m, &p| {
                        let a = p.norm();
                        let lb2 = 1.0 / (a + e1) - tau * r2;
                        let mut b = lb2;
                        if a > e1 {
                            let w = p.conj().inv();
                            let nn = if tau > 0.0 { tau * field.lower_bound(-w / tau) } else { w.norm() };
                            let lb1 = nn - e1 / (a * (a - e1)) - tau * e2;
                            b = b.max(lb1);
                        }
                        m.min(b)
                    })
                },
                f64::min,
            );
            (tau, d.max(0.0))
        })
        .collect();
    let (tau_min, r) = table.iter().copied().fold((0.0, f64::INFINITY), |acc, (t, d)| if d < acc.1 { (t, d) } else { acc });
    Separation { r, tau_min, table }
}

/// Separation over a τ grid, optionally doubling the grid until r settles.
pub fn separation_sweep(h1: &Region, h2: &Region, tau: &[f64], refine: bool, cfg: &CalcConfig) -> Result<Separation, AnalysisError> {
    if !h1.is_bounded() {
        return Err(AnalysisError::Unbounded("H1".into()));
    }
    if !h2.is_bounded() {
        return Err(AnalysisError::Unbounded("H2".into()));
    }
    let c1 = h1.to_cells(cfg)?;
    let c2 = h2.to_cells(cfg)?;
    Ok(sweep_refined(&c1, &c2, tau, refine))
}

fn sweep_refined(c1: &CellSet, c2: &CellSet, tau: &[f64], refine: bool) -> Separation {
    let mut sep = separation_cells(c1, c2, tau);
    if refine {
        let mut n = tau.len().max(2);
        for _ in 0..4 {
            n = 2 * n - 1;
            let next = separation_cells(c1, c2, &tau_grid(n));
            let settled = (next.r - sep.r).abs() <= 0.01 * sep.r.abs().max(1e-300);
            sep = next;
            if settled {
                break;
            }
        }
    }
    sep
}

/// Feedback interconnection [H1, H2] = (H1⁻¹ + H2)⁻¹.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackProblem {
    pub h1_region: Region,
    pub h2_region: Region,
    pub incremental: bool,
    #[serde(default)]
    pub wellposedness_assumed: bool,
}

/// Source of one operator's SRG bound in a feedback file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSpec {
    Lti(StateSpace),
    Sector(SectorBound),
    Region(Region),
}

impl OperatorSpec {
    /// SRG bound; LTI operators must be stable.
    pub fn region(&self, settings: &AnalysisSettings) -> Result<Region, AnalysisError> {
        match self {
            OperatorSpec::Lti(g) => {
                g.require_hurwitz()?;
                let (grid, ups, lam) = lti::auto_grids_with(g, settings.grid_points, settings.base_points)?;
                Ok(Region::DiskAlgebra(lti::lti_srg_bound(g, &ups, &lam, &grid, settings.inflation)?))
            }
            OperatorSpec::Sector(s) => {
                s.validate()?;
                Ok(Region::DiskAlgebra(nonlin::diagonal_nl_region(s)))
            }
            OperatorSpec::Region(r) => Ok(r.clone()),
        }
    }

    /// Whether the bound holds incrementally (region files are taken as such).
    pub fn incremental(&self) -> bool {
        match self {
            OperatorSpec::Sector(s) => s.incremental,
            _ => true,
        }
    }
}

/// Feedback file: two operators and an optional override of the
/// incremental flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSpec {
    pub h1: OperatorSpec,
    pub h2: OperatorSpec,
    #[serde(default)]
    pub incremental: Option<bool>,
}

impl FeedbackSpec {
    pub fn problem(&self, settings: &AnalysisSettings) -> Result<FeedbackProblem, AnalysisError> {
        Ok(FeedbackProblem {
            h1_region: self.h1.region(settings)?,
            h2_region: self.h2.region(settings)?,
            incremental: self.incremental.unwrap_or(self.h1.incremental() && self.h2.incremental()),
            wellposedness_assumed: settings.assume_wellposed,
        })
    }
}

/// Separation test and gain bound for [H1, H2].
///
/// The gain bound is the smaller of 1/r and the radius of the closed-loop
/// region (H1⁻¹ + H2)⁻¹ evaluated at τ = 1.
pub fn feedback_certify(fp: &FeedbackProblem, tau: &[f64], settings: &AnalysisSettings) -> Result<AnalysisReport, AnalysisError> {
    let incremental = fp.incremental && !settings.non_incremental;
    if !incremental && !fp.wellposedness_assumed && !settings.assume_wellposed {
        return Err(AnalysisError::WellposednessRequired);
    }
    if !fp.h1_region.is_bounded() {
        return Err(AnalysisError::Unbounded("H1".into()));
    }
    if !fp.h2_region.is_bounded() {
        return Err(AnalysisError::Unbounded("H2".into()));
    }
    let cfg = &settings.calc;
    let mut report = empty_report(incremental, settings);
    let c1 = fp.h1_region.to_cells(cfg)?;
    let mut c2 = fp.h2_region.to_cells(cfg)?;
    if !fp.h1_region.has_chord(cfg) && !fp.h2_region.has_chord(cfg) {
        log::warn!("neither region has the chord property; completing H2");
        report.notes.push("H2 replaced by its chord completion (neither region had the chord property)".into());
        c2 = c2.chord();
    }
    if let Region::DiskAlgebra(d) = &fp.h1_region {
        report.disk_regions.insert("h1".into(), d.clone());
    }
    if let Region::DiskAlgebra(d) = &fp.h2_region {
        report.disk_regions.insert("h2".into(), d.clone());
    }
    let sep = sweep_refined(&c1, &c2, tau, settings.refine_tau);
    report.separation_r = sep.r;
    report.tau_at_min = sep.tau_min;
    report.tau_table = sep.table.clone();
    report.record("h1", c1.clone());
    report.record("h2", c2.clone());
    if sep.r > 0.0 {
        let mut gain = 1.0 / sep.r;
        match region::closure(&c1, &c2, fp.h1_region.inverse_has_chord(), cfg) {
            Ok(cl) => {
                if !cl.is_empty() {
                    gain = gain.min(cl.rmin());
                }
                report.record("closed_loop", cl);
            }
            Err(RegionError::Singular) => report.notes.push("closed-loop region not evaluated: loop map singular on the lattice cover".into()),
            Err(e) => return Err(e.into()),
        }
        report.gain_bound = gain;
        report.verdict = Verdict::Certified;
        report.wellposed_claim = incremental;
        report.causal_claim = false;
    }
    if !incremental {
        report.notes.push("well-posedness assumed, not concluded; causality not claimed".into());
    }
    Ok(report)
}

fn empty_report(incremental: bool, settings: &AnalysisSettings) -> AnalysisReport {
    AnalysisReport {
        verdict: Verdict::NotCertified,
        separation_r: 0.0,
        tau_at_min: 0.0,
        gain_bound: f64::INFINITY,
        incremental,
        wellposed_claim: false,
        causal_claim: false,
        intermediate_regions: BTreeMap::new(),
        tau_table: Vec::new(),
        settings: settings.clone(),
        notes: vec!["singular-value extrema are sampled estimates with safety inflation".into()],
        regions: BTreeMap::new(),
        disk_regions: BTreeMap::new(),
    }
}

/// Disk-algebra SRG bounds of the four blocks of G.
pub fn block_regions(m: &LfrModel, settings: &AnalysisSettings) -> Result<[DiskAlgebraRegion; 4], AnalysisError> {
    let b = m.blocks()?;
    let grid = lti::frequency_grid(&m.g, settings.grid_points);
    let one = |s: &StateSpace| -> Result<DiskAlgebraRegion, AnalysisError> {
        let sup = lti::ResponseCache::new(s, &grid)?.profile(0.0).sup_estimate;
        let pts = lti::base_points(sup, settings.base_points);
        Ok(lti::lti_srg_bound(s, &pts, &pts, &grid, settings.inflation)?)
    };
    Ok([one(&b.zw)?, one(&b.zu)?, one(&b.yw)?, one(&b.yu)?])
}

/// Certificate for an LFR model: separation of Φ⁻¹ and τ G_zw over the τ
/// grid, then the gain bound
/// rmin(G_yu + G_yw (Φ⁻¹ − G_zw)⁻¹ G_zu) evaluated at τ = 1 with completed
/// sums and products at every step.
pub fn lfr_certify(m: &LfrModel, tau: &[f64], settings: &AnalysisSettings) -> Result<AnalysisReport, AnalysisError> {
    m.validate()?;
    if !m.g.is_hurwitz() {
        return Err(AnalysisError::Unstable(m.g.max_pole_real()));
    }
    let incremental = m.phi.incremental() && !settings.non_incremental;
    if !incremental && !settings.assume_wellposed {
        return Err(AnalysisError::WellposednessRequired);
    }
    let phi = m.phi.region();
    if !phi.is_bounded() {
        return Err(AnalysisError::Unbounded("Phi".into()));
    }
    let cfg = &settings.calc;
    let [zw, zu, yw, yu] = block_regions(m, settings)?;
    let mut report = empty_report(incremental, settings);
    report.notes.push("gain bound evaluated at tau = 1; tau < 1 enters only the separation test".into());
    let neg_zw = zw.scaled(-1.0);
    for (name, d) in [("g_zw", &zw), ("g_zu", &zu), ("g_yw", &yw), ("g_yu", &yu)] {
        report.disk_regions.insert(name.into(), d.clone());
    }
    if let Region::DiskAlgebra(d) = &phi {
        report.disk_regions.insert("phi".into(), d.clone());
    }
    let c_phi = phi.to_cells(cfg)?;
    let c_zw = neg_zw.to_cells(neg_zw.auto_h(cfg.cells))?;
    let sep = sweep_refined(&c_phi, &c_zw, tau, settings.refine_tau);
    report.separation_r = sep.r;
    report.tau_at_min = sep.tau_min;
    report.tau_table = sep.table.clone();
    report.record("phi", c_phi.clone());
    report.record("g_zw", c_zw.scale(-1.0));
    if sep.r <= 0.0 {
        report.notes.push("Phi^-1 and tau*G_zw are not separated on the tau grid".into());
        return Ok(report);
    }
    let loop_region = match region::closure(&c_phi, &c_zw, phi.inverse_has_chord(), cfg) {
        Ok(c) => c,
        Err(RegionError::Singular) => {
            report.notes.push("loop map singular on the lattice cover; increase resolution".into());
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    let c_yw = yw.to_cells(yw.auto_h(cfg.cells))?;
    let c_zu = zu.to_cells(zu.auto_h(cfg.cells))?;
    let c_yu = yu.to_cells(yu.auto_h(cfg.cells))?;
    let s3 = region::lattice::product(&c_yw, &loop_region, cfg)?;
    let s4 = region::lattice::product(&s3, &c_zu, cfg)?;
    let s5 = region::lattice::sum(&s4, &c_yu, cfg)?;
    report.gain_bound = if s5.is_empty() { 0.0 } else { s5.rmin() };
    report.verdict = Verdict::Certified;
    report.wellposed_claim = incremental;
    report.causal_claim = incremental;
    if !incremental {
        report.notes.push("non-incremental path: well-posedness assumed, causality not claimed".into());
    }
    report.record("g_zu", c_zu);
    report.record("g_yw", c_yw);
    report.record("g_yu", c_yu);
    report.record("loop", loop_region);
    report.record("s3", s3);
    report.record("s4", s4);
    report.record("result", s5);
    Ok(report)
}

/// Loop transformation w = S⁻¹w̃ + K z, i.e. Φ̃ = S(Φ − K).
///
/// Returns the model whose G absorbs the constant-gain loop and the output
/// scaling of Φ; for diagonal sector specs the sector is transformed as well.
pub fn loop_transform_lfr(m: &LfrModel, k: &DMatrix<f64>, scale: &[f64]) -> Result<LfrModel, AnalysisError> {
    m.validate()?;
    let (nz, _, nw, _) = m.dims();
    if k.shape() != (nw, nz) || scale.len() != nw {
        return Err(AnalysisError::Model(format!("K must be {nw}x{nz} and S must have {nw} entries")));
    }
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(AnalysisError::Model("S must be positive".into()));
    }
    let p = &m.partition;
    let g = &m.g;
    let bw = g.b.select_columns(&p.w_cols);
    let bu = g.b.select_columns(&p.u_cols);
    let cz = g.c.select_rows(&p.z_rows);
    let cy = g.c.select_rows(&p.y_rows);
    let dzw = g.d.select_rows(&p.z_rows).select_columns(&p.w_cols);
    let dzu = g.d.select_rows(&p.z_rows).select_columns(&p.u_cols);
    let dyw = g.d.select_rows(&p.y_rows).select_columns(&p.w_cols);
    let dyu = g.d.select_rows(&p.y_rows).select_columns(&p.u_cols);
    let mm = (DMatrix::identity(nz, nz) - &dzw * k).try_inverse().ok_or(AnalysisError::SingularTransform)?;
    let sinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(nw, scale.iter().map(|s| 1.0 / s)));
    let kmc = k * &mm * &cz;
    let kmd_w = DMatrix::identity(nw, nw) + k * &mm * &dzw;
    let kmd_u = k * &mm * &dzu;
    let a = &g.a + &bw * &kmc;
    let bw2 = &bw * &kmd_w * &sinv;
    let bu2 = &bu + &bw * &kmd_u;
    let cz2 = &mm * &cz;
    let dzw2 = &mm * &dzw * &sinv;
    let dzu2 = &mm * &dzu;
    let cy2 = &cy + &dyw * &kmc;
    let dyw2 = &dyw * &kmd_w * &sinv;
    let dyu2 = &dyu + &dyw * &kmd_u;

    let mut b = g.b.clone();
    let mut c = g.c.clone();
    let mut d = g.d.clone();
    for (t, &col) in p.w_cols.iter().enumerate() {
        b.set_column(col, &bw2.column(t));
    }
    for (t, &col) in p.u_cols.iter().enumerate() {
        b.set_column(col, &bu2.column(t));
    }
    for (t, &row) in p.z_rows.iter().enumerate() {
        c.set_row(row, &cz2.row(t));
        for (s, &col) in p.w_cols.iter().enumerate() {
            d[(row, col)] = dzw2[(t, s)];
        }
        for (s, &col) in p.u_cols.iter().enumerate() {
            d[(row, col)] = dzu2[(t, s)];
        }
    }
    for (t, &row) in p.y_rows.iter().enumerate() {
        c.set_row(row, &cy2.row(t));
        for (s, &col) in p.w_cols.iter().enumerate() {
            d[(row, col)] = dyw2[(t, s)];
        }
        for (s, &col) in p.u_cols.iter().enumerate() {
            d[(row, col)] = dyu2[(t, s)];
        }
    }
    let g2 = StateSpace::new(a, b, c, d)?;
    let phi = transform_phi(&m.phi, k, scale)?;
    Ok(LfrModel { name: m.name.clone(), g: g2, partition: p.clone(), phi })
}

fn transform_phi(phi: &PhiSpec, k: &DMatrix<f64>, scale: &[f64]) -> Result<PhiSpec, AnalysisError> {
    let off_diagonal = (0..k.nrows()).any(|i| (0..k.ncols()).any(|j| i != j && k[(i, j)] != 0.0));
    match phi {
        PhiSpec::Sector(s) => {
            if off_diagonal || k.nrows() != k.ncols() {
                return Err(AnalysisError::Model("sector transform needs a diagonal K".into()));
            }
            let kappa: Vec<f64> = (0..scale.len()).map(|i| -scale[i] * k[(i, i)]).collect();
            Ok(PhiSpec::Sector(nonlin::loop_transform_sector(s, &kappa, scale)?))
        }
        PhiSpec::Region { region, incremental } => {
            let k0 = if k.is_empty() { 0.0 } else { k[(0, 0)] };
            let uniform_k = !off_diagonal && (0..k.nrows().min(k.ncols())).all(|i| k[(i, i)] == k0);
            let s0 = scale.first().copied().unwrap_or(1.0);
            if !uniform_k || scale.iter().any(|&s| s != s0) {
                return Err(AnalysisError::Model("region-valued Phi needs K = kI and S = sI".into()));
            }
            Ok(PhiSpec::Region { region: region.shifted(-k0).scaled(s0)?, incremental: *incremental })
        }
    }
}

/// One row of a loop-transform sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa: Vec<f64>,
    pub stable: bool,
    pub verdict: Option<Verdict>,
    pub gain_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub best: Option<(Vec<f64>, f64)>,
    pub table: Vec<SweepRow>,
}

/// Grid search over candidate shifts, each turned into a model by `build`.
pub fn transform_sweep_with<F>(candidates: &[Vec<f64>], tau: &[f64], settings: &AnalysisSettings, build: F) -> Result<SweepResult, AnalysisError>
where
    F: Fn(&[f64]) -> Result<LfrModel, AnalysisError>,
{
    let mut table = Vec::new();
    for kappa in candidates {
        let m = match build(kappa) {
            Ok(m) => m,
            Err(AnalysisError::SingularTransform) => {
                table.push(SweepRow { kappa: kappa.clone(), stable: false, verdict: None, gain_bound: f64::INFINITY });
                continue;
            }
            Err(e) => return Err(e),
        };
        if !m.g.is_hurwitz() {
            table.push(SweepRow { kappa: kappa.clone(), stable: false, verdict: None, gain_bound: f64::INFINITY });
            continue;
        }
        let r = lfr_certify(&m, tau, settings)?;
        table.push(SweepRow { kappa: kappa.clone(), stable: true, verdict: Some(r.verdict), gain_bound: r.gain_bound });
    }
    let best = table
        .iter()
        .filter(|r| r.verdict == Some(Verdict::Certified))
        .min_by(|a, b| a.gain_bound.total_cmp(&b.gain_bound))
        .map(|r| (r.kappa.clone(), r.gain_bound));
    Ok(SweepResult { best, table })
}

/// Grid search over diagonal shifts K = diag(κ) with S = I.
pub fn transform_sweep(m: &LfrModel, candidates: &[Vec<f64>], tau: &[f64], settings: &AnalysisSettings) -> Result<SweepResult, AnalysisError> {
    let nw = m.partition.w_cols.len();
    transform_sweep_with(candidates, tau, settings, |kappa| {
        if kappa.len() != nw {
            return Err(AnalysisError::Model(format!("candidate needs {nw} shifts")));
        }
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(kappa));
        loop_transform_lfr(m, &k, &vec![1.0; nw])
    })
}

/// Operator dimensions as (outputs, inputs).
pub type Dims = (usize, usize);

/// Interconnection whose dimensions are checked before any SRG calculus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interconnection {
    /// outer ∘ inner.
    Series { inner: Dims, outer: Dims },
    Parallel { a: Dims, b: Dims },
}

/// Dimension check; returns warnings for the zero-padding interpretations.
pub fn validate_dimensions(op: &Interconnection) -> Result<Vec<String>, AnalysisError> {
    let mut warn = Vec::new();
    match *op {
        Interconnection::Series { inner, outer } => {
            let (q_r, _) = inner;
            let (_, p_t) = outer;
            if q_r > p_t {
                return Err(AnalysisError::Model(format!("series: inner output dimension {q_r} exceeds outer input dimension {p_t}")));
            }
            if q_r < p_t {
                warn.push(format!("series: inner output ({q_r}) is embedded into the outer input space ({p_t}) by zero padding"));
            }
        }
        Interconnection::Parallel { a, b } => {
            if a != b {
                warn.push(format!("parallel: dimensions {a:?} and {b:?} differ; smaller operator is zero padded"));
            }
        }
    }
    Ok(warn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_of_point_from_disk() {
        let cfg = CalcConfig::default();
        let h1 = Region::DiskAlgebra(DiskAlgebraRegion::interval(-2.0, -1.0));
        let h2 = Region::DiskAlgebra(DiskAlgebraRegion::point(0.0));
        let s = separation_sweep(&h1, &h2, &tau_grid(11), false, &cfg).unwrap();
        assert!(s.r <= 0.5 && s.r > 0.49, "{}", s.r);
    }

    #[test]
    fn small_gain_with_unit_forward_path() {
        let fp = FeedbackProblem {
            h1_region: Region::DiskAlgebra(DiskAlgebraRegion::point(1.0)),
            h2_region: Region::DiskAlgebra(DiskAlgebraRegion::disk(0.0, 0.5)),
            incremental: true,
            wellposedness_assumed: false,
        };
        let r = feedback_certify(&fp, &tau_grid(101), &AnalysisSettings::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert!(r.separation_r <= 0.5 && r.separation_r > 0.49);
        assert!(r.gain_bound >= 2.0 && r.gain_bound < 2.05, "{}", r.gain_bound);
    }

    #[test]
    fn overlap_is_not_certified() {
        let fp = FeedbackProblem {
            h1_region: Region::DiskAlgebra(DiskAlgebraRegion::point(1.0)),
            h2_region: Region::DiskAlgebra(DiskAlgebraRegion::disk(0.0, 1.5)),
            incremental: true,
            wellposedness_assumed: false,
        };
        let r = feedback_certify(&fp, &tau_grid(11), &AnalysisSettings::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotCertified);
        assert_eq!(r.separation_r, 0.0);
    }

    #[test]
    fn non_incremental_needs_assumption() {
        let fp = FeedbackProblem {
            h1_region: Region::DiskAlgebra(DiskAlgebraRegion::point(1.0)),
            h2_region: Region::DiskAlgebra(DiskAlgebraRegion::disk(0.0, 0.5)),
            incremental: false,
            wellposedness_assumed: false,
        };
        assert!(matches!(feedback_certify(&fp, &tau_grid(3), &AnalysisSettings::default()), Err(AnalysisError::WellposednessRequired)));
    }

    #[test]
    fn dimension_rules() {
        assert!(validate_dimensions(&Interconnection::Series { inner: (3, 2), outer: (2, 3) }).unwrap().is_empty());
        assert!(validate_dimensions(&Interconnection::Parallel { a: (2, 3), b: (2, 3) }).unwrap().is_empty());
        assert!(validate_dimensions(&Interconnection::Series { inner: (4, 2), outer: (2, 3) }).is_err());
        assert_eq!(validate_dimensions(&Interconnection::Series { inner: (2, 2), outer: (2, 3) }).unwrap().len(), 1);
    }
}
