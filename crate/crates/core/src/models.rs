//! Built-in example systems.

use crate::analysis::{self, loop_transform_lfr, AnalysisError, AnalysisReport, AnalysisSettings, Verdict, FeedbackProblem, LfrModel, Partition, PhiSpec};
use crate::lti::{self, poly_mul, StateSpace, Tf};
use crate::nonlin::{self, NamedNonlinearity, SectorBound};
use crate::region::Region;
use crate::sim::{self, GainEstimate, GainOptions, SimError};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A model together with the concrete nonlinearities it is simulated with.
#[derive(Clone, Debug)]
pub struct Example {
    pub model: LfrModel,
    pub nonlinearities: Vec<NamedNonlinearity>,
}

pub fn controller_k() -> Tf {
    Tf::new(&[1.0], &[1.0, 1.0])
}

/// 3 / ((s − 2)(s/10 + 1)).
pub fn plant_p() -> Tf {
    Tf::new(&[30.0], &poly_mul(&[1.0, -2.0], &[1.0, 10.0]))
}

/// Lur'e loop with a saturated controller, untransformed.
///
/// Inputs (w1, w2, u), outputs (z1, z2, y) with z1 = K(u − y),
/// z2 = y = P(w1 + w2). The plant is unstable, so this model only serves as
/// the starting point of a loop transformation.
pub fn example1_base() -> LfrModel {
    let k = controller_k().to_ss().expect("proper");
    let p = plant_p().to_ss().expect("proper");
    let (np, nk) = (p.states(), k.states());
    let n = np + nk;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (np, np)).copy_from(&p.a);
    a.view_mut((np, 0), (nk, np)).copy_from(&(-(&k.b * &p.c)));
    a.view_mut((np, np), (nk, nk)).copy_from(&k.a);
    let mut b = DMatrix::zeros(n, 3);
    b.view_mut((0, 0), (np, 1)).copy_from(&p.b);
    b.view_mut((0, 1), (np, 1)).copy_from(&p.b);
    b.view_mut((np, 2), (nk, 1)).copy_from(&k.b);
    let mut c = DMatrix::zeros(3, n);
    c.view_mut((0, np), (1, nk)).copy_from(&k.c);
    c.view_mut((1, 0), (1, np)).copy_from(&p.c);
    c.view_mut((2, 0), (1, np)).copy_from(&p.c);
    let g = StateSpace::new(a, b, c, DMatrix::zeros(3, 3)).expect("consistent dimensions");
    LfrModel {
        name: "example1-base".into(),
        g,
        partition: Partition::leading(2, 1, 2, 1),
        phi: PhiSpec::Sector(SectorBound { incremental: true, channels: vec![(0.0, 1.0), (1.0, 2.0)] }),
    }
}

/// Shifted Lur'e loop for the pair (κ1, κ2).
///
/// G is the base model closed with w = w̃ + diag(κ1, −κ2) z, which reproduces
/// the transfer blocks −S P̃ K, S P̃, S K, S L with P̃ = P/(1 + κ2 P),
/// L = κ1 P̃ K and S = 1/(1 + L). Φ̃ = (sat − κ1·id, φ2 − κ2·id) with sectors
/// [−κ1, 1 − κ1] and [1 − κ2, 2 − κ2].
pub fn example1(k1: f64, k2: f64) -> Result<Example, AnalysisError> {
    let base = example1_base();
    let k = DMatrix::from_diagonal(&DVector::from_column_slice(&[k1, -k2]));
    let mut model = loop_transform_lfr(&base, &k, &[1.0, 1.0])?;
    model.name = format!("example1-k{k1}-{k2}");
    model.phi = PhiSpec::Sector(SectorBound::new(vec![(-k1, 1.0 - k1), (1.0 - k2, 2.0 - k2)], true)?);
    let sat = NamedNonlinearity::Saturation { limit: 1.0 };
    let phi2 = NamedNonlinearity::PiecewiseSlope { knee: 1.0, inner: 1.0, outer: 2.0 };
    Ok(Example { model, nonlinearities: vec![sat.transformed(-k1, 1.0), phi2.transformed(-k2, 1.0)] })
}

/// Two-mass spring-damper parameters.
#[derive(Clone, Copy, Debug)]
pub struct MsdParams {
    pub m1: f64,
    pub m2: f64,
    pub k1: f64,
    pub k2: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
    pub k12: f64,
}

impl Default for MsdParams {
    fn default() -> Self {
        MsdParams { m1: 0.5, m2: 3.0, k1: 1.0, k2: 2.0, d1: 0.3, d2: 1.0, d12: 1.0, k12: 0.5 }
    }
}

/// Mass-spring-damper in LFR form: states (x1, ẋ1, x2, ẋ2), inputs
/// (w1, w2, w3, u1, u2) = (φ(x1), φ(x2), φ12(x1 − x2), u1, u2), outputs
/// (z1, z2, z3, y1, y2) = (x1, x2, x1 − x2, x1, x2).
pub fn msd_base(p: MsdParams) -> LfrModel {
    let MsdParams { m1, m2, k1, k2, d1, d2, d12, k12 } = p;
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 0.0, 0.0,
        (-k1 - k12) / m1, (-d1 - d12) / m1, k12 / m1, d12 / m1,
        0.0, 0.0, 0.0, 1.0,
        k12 / m2, d12 / m2, (-k2 - k12) / m2, (-d2 - d12) / m2,
    ]);
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(4, 5, &[
        0.0, 0.0, 0.0, 0.0, 0.0,
        1.0 / m1, 0.0, 1.0 / m1, 1.0 / m1, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 1.0 / m2, -1.0 / m2, 0.0, 1.0 / m2,
    ]);
    #[rustfmt::skip]
    let c = DMatrix::from_row_slice(5, 4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        1.0, 0.0, -1.0, 0.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
    ]);
    let g = StateSpace::new(a, b, c, DMatrix::zeros(5, 5)).expect("consistent dimensions");
    LfrModel {
        name: "msd-base".into(),
        g,
        partition: Partition::leading(3, 2, 3, 2),
        phi: PhiSpec::Sector(SectorBound { incremental: true, channels: vec![(-1.0, 0.0), (-1.0, 0.0), (-1.0, 1.0)] }),
    }
}

/// Mass-spring-damper with φ = −tanh, φ12 = 2 tanh − id, normalized to the
/// common sector [−½, ½] by K = diag(−½, −½, 0), S = diag(1, 1, ½).
pub fn example2() -> Result<Example, AnalysisError> {
    let base = msd_base(MsdParams::default());
    let k = DMatrix::from_diagonal(&DVector::from_column_slice(&[-0.5, -0.5, 0.0]));
    let mut model = loop_transform_lfr(&base, &k, &[1.0, 1.0, 0.5])?;
    model.name = "example2-msd".into();
    let phi = NamedNonlinearity::NegatedTanh.transformed(0.5, 1.0);
    let phi12 = NamedNonlinearity::Tanh { gain: 2.0, linear: -1.0 }.transformed(0.0, 0.5);
    Ok(Example { model, nonlinearities: vec![phi.clone(), phi, phi12] })
}

fn p_entries() -> Vec<Vec<Tf>> {
    let d3 = [1.0, 5.0, 2.0, 1.0];
    vec![vec![Tf::new(&[0.1], &[1.0, 1.0]), Tf::new(&[1.0], &d3)], vec![Tf::new(&[0.1], &d3), Tf::new(&[0.2], &[1.0, 5.0])]]
}

fn h2_entries() -> Vec<Vec<Tf>> {
    vec![vec![Tf::new(&[1.7], &[1.0, 2.0, 1.0]), Tf::constant(0.0)], vec![Tf::constant(0.0), Tf::new(&[1.7], &[1.0, 3.0, 3.0])]]
}

pub fn example3_p() -> StateSpace {
    StateSpace::from_tf_matrix(&p_entries()).expect("proper entries")
}

pub fn example3_h2() -> StateSpace {
    StateSpace::from_tf_matrix(&h2_entries()).expect("proper entries")
}

/// G = P(I + H2 P)⁻¹.
pub fn example3_g() -> StateSpace {
    StateSpace::feedback(&example3_p(), &example3_h2()).expect("well-posed")
}

pub const EXAMPLE3_GAMMA_SQ: f64 = 0.1;

/// Norm-bounded feedback around G, and the same loop as an LFR for
/// simulation (z = y = G(w + u), w = Φ(z)) with Φ = √0.1·tanh per channel.
pub fn example3() -> Result<(FeedbackProblem, Example), AnalysisError> {
    let g = example3_g();
    let gamma = EXAMPLE3_GAMMA_SQ.sqrt();
    let (grid, ups, lam) = lti::auto_grids(&g)?;
    let fp = FeedbackProblem {
        h1_region: Region::DiskAlgebra(lti::lti_srg_bound(&g, &ups, &lam, &grid, lti::Inflation::default())?),
        h2_region: Region::DiskAlgebra(nonlin::gain_ball(gamma)),
        incremental: false,
        wellposedness_assumed: true,
    };
    let n = g.states();
    let mut b = DMatrix::zeros(n, 4);
    b.columns_mut(0, 2).copy_from(&g.b);
    b.columns_mut(2, 2).copy_from(&g.b);
    let mut c = DMatrix::zeros(4, n);
    c.rows_mut(0, 2).copy_from(&g.c);
    c.rows_mut(2, 2).copy_from(&g.c);
    let mut d = DMatrix::zeros(4, 4);
    for (r, cc) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
        d.view_mut((r, cc), (2, 2)).copy_from(&g.d);
    }
    let lfr = LfrModel {
        name: "example3-T".into(),
        g: StateSpace::new(g.a.clone(), b, c, d).expect("consistent dimensions"),
        partition: Partition::leading(2, 2, 2, 2),
        phi: PhiSpec::Region { region: Region::DiskAlgebra(nonlin::gain_ball(gamma)), incremental: false },
    };
    let nl = NamedNonlinearity::Tanh { gain: gamma, linear: 0.0 };
    Ok((fp, Example { model: lfr, nonlinearities: vec![nl.clone(), nl] }))
}

/// Analysis settings used when reproducing example `n` (1, 2 or 3).
///
/// The mass-spring-damper loop chains four operations on large regions and
/// gets a finer lattice. Example 3 runs the non-incremental path, which needs
/// well-posedness as an assumption.
pub fn example_settings(n: u8) -> AnalysisSettings {
    let mut s = AnalysisSettings::default();
    match n {
        2 => s.calc.cells = 1600,
        3 => {
            s.assume_wellposed = true;
            s.non_incremental = true;
        }
        _ => {}
    }
    s
}

#[derive(Debug, Error)]
pub enum ReproduceError {
    #[error("unknown example {0}; expected 1, 2 or 3")]
    Unknown(u8),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// How a computed value is compared with its reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Within 10% of the reference.
    Near,
    /// Strictly below the reference.
    Below,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub case: String,
    pub reference: f64,
    pub computed: f64,
    pub relation: Relation,
    pub verdict: Verdict,
    /// Empirical gain from simulation, when run.
    pub sim_gain: Option<f64>,
}

impl ReferenceRow {
    pub fn rel_err(&self) -> f64 {
        (self.computed - self.reference) / self.reference
    }

    pub fn pass(&self) -> bool {
        let value_ok = match self.relation {
            Relation::Near => self.rel_err().abs() <= 0.10,
            Relation::Below => self.computed < self.reference,
        };
        let sim_ok = self.sim_gain.is_none_or(|g| g <= self.computed);
        self.verdict == Verdict::Certified && value_ok && sim_ok
    }
}

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    pub simulate: bool,
    pub seed: u64,
    /// Lattice cells override.
    pub cells: Option<usize>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions { simulate: true, seed: 7, cells: None }
    }
}

/// Output of [`reproduce`]: comparison rows, the underlying reports (keyed
/// by a short case tag) and simulation estimates.
#[derive(Debug)]
pub struct Reproduction {
    pub rows: Vec<ReferenceRow>,
    pub reports: Vec<(String, AnalysisReport)>,
    pub gains: Vec<(String, GainEstimate)>,
}

impl Reproduction {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| case | reference | computed | rel. error | check | simulated gain | pass |\n|---|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let check = match r.relation {
                Relation::Near => "within 10%",
                Relation::Below => "below",
            };
            let sim = r.sim_gain.map_or("-".to_string(), |g| format!("{g:.4}"));
            s.push_str(&format!(
                "| {} | {:.2} | {:.4} | {:+.1}% | {} | {} | {} |\n",
                r.case,
                r.reference,
                r.computed,
                100.0 * r.rel_err(),
                check,
                sim,
                if r.pass() { "yes" } else { "no" }
            ));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("case,reference,computed,rel_err,relation,verdict,sim_gain,pass\n");
        for r in &self.rows {
            let sim = r.sim_gain.map_or(String::new(), |g| g.to_string());
            s.push_str(&format!(
                "\"{}\",{},{},{},{:?},{:?},{},{}\n",
                r.case,
                r.reference,
                r.computed,
                r.rel_err(),
                r.relation,
                r.verdict,
                sim,
                r.pass()
            ));
        }
        s
    }
}

fn simulated(ex: &Example, incremental: bool, opts: &ReproduceOptions) -> Result<Option<GainEstimate>, SimError> {
    if !opts.simulate {
        return Ok(None);
    }
    let g = GainOptions { seed: opts.seed, incremental, ..GainOptions::default() };
    sim::empirical_gain(ex, &g).map(Some)
}

/// Run example `n` (1, 2 or 3) through certification and, optionally, the
/// simulation cross-check.
pub fn reproduce(n: u8, opts: &ReproduceOptions) -> Result<Reproduction, ReproduceError> {
    let mut settings = example_settings(n);
    if let Some(c) = opts.cells {
        settings.calc.cells = c;
    }
    let tau = analysis::tau_grid(settings.tau_points);
    let mut out = Reproduction { rows: Vec::new(), reports: Vec::new(), gains: Vec::new() };
    let lfr_case = |tag: &str, case: String, ex: Example, reference: f64, out: &mut Reproduction| -> Result<(), ReproduceError> {
        let report = analysis::lfr_certify(&ex.model, &tau, &settings)?;
        let gain = if report.verdict == Verdict::Certified { simulated(&ex, true, opts)? } else { None };
        out.rows.push(ReferenceRow {
            case,
            reference,
            computed: report.gain_bound,
            relation: Relation::Near,
            verdict: report.verdict,
            sim_gain: gain.as_ref().map(|g| g.value),
        });
        out.reports.push((tag.to_string(), report));
        if let Some(g) = gain {
            out.gains.push((tag.to_string(), g));
        }
        Ok(())
    };
    match n {
        1 => {
            lfr_case("k2-3", "example 1, kappa = (2, 3)".into(), example1(2.0, 3.0)?, 2.33, &mut out)?;
            lfr_case("k0.5-1.5", "example 1, kappa = (0.5, 1.5)".into(), example1(0.5, 1.5)?, 6.13, &mut out)?;
        }
        2 => lfr_case("msd", "example 2".into(), example2()?, 12.09, &mut out)?,
        3 => {
            let (fp, ex) = example3()?;
            let report = analysis::feedback_certify(&fp, &tau, &settings)?;
            let gain = if report.verdict == Verdict::Certified { simulated(&ex, false, opts)? } else { None };
            let sim_gain = gain.as_ref().map(|g| g.value);
            for (case, reference, relation) in [("example 3", 1.79, Relation::Near), ("example 3 vs IQC bound", 4.05, Relation::Below)] {
                out.rows.push(ReferenceRow { case: case.into(), reference, computed: report.gain_bound, relation, verdict: report.verdict, sim_gain });
            }
            out.reports.push(("feedback".into(), report));
            if let Some(g) = gain {
                out.gains.push(("feedback".into(), g));
            }
        }
        k => return Err(ReproduceError::Unknown(k)),
    }
    Ok(out)
}

/// 1×3 transfer row s/(s+1), s²/(s²+s+1), 1/(2s+1).
pub fn lti_example_g1() -> StateSpace {
    let row = vec![Tf::new(&[1.0, 0.0], &[1.0, 1.0]), Tf::new(&[1.0, 0.0, 0.0], &[1.0, 1.0, 1.0]), Tf::new(&[1.0], &[2.0, 1.0])];
    StateSpace::from_tf_matrix(&[row]).expect("proper entries")
}

/// 3×2 transfer matrix.
pub fn lti_example_g2() -> StateSpace {
    let q = [1.0, 1.0, 1.0];
    let rows = vec![
        vec![Tf::new(&[1.0, 0.0, 0.0], &q), Tf::new(&[1.0], &[2.0, 1.0])],
        vec![Tf::new(&[1.0, 1.0], &poly_mul(&[1.0, 3.0], &q)), Tf::new(&[1.0, 3.0], &[1.0, 1.0])],
        vec![Tf::new(&[1.0, 0.0, -1.0], &poly_mul(&[1.0, 3.0], &[1.0, 2.0])), Tf::new(&[1.0, 0.0], &[1.0, 2.0])],
    ];
    StateSpace::from_tf_matrix(&rows).expect("proper entries")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_models_are_stable() {
        assert!(!example1_base().g.is_hurwitz());
        assert!(example1(2.0, 3.0).unwrap().model.g.is_hurwitz());
        assert!(example1(0.5, 1.5).unwrap().model.g.is_hurwitz());
        assert!(example2().unwrap().model.g.is_hurwitz());
        assert!(example3_g().is_hurwitz());
    }

    #[test]
    fn msd_input_matrix_layout() {
        let m = msd_base(MsdParams::default());
        assert_eq!(m.g.b[(1, 0)], 2.0);
        assert_eq!(m.g.b[(3, 1)], 1.0 / 3.0);
        assert_eq!(m.g.b[(3, 2)], -1.0 / 3.0);
    }
}
