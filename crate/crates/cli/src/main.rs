//! `srgkit` command-line front end.
//!
//! Exit codes: 0 ok or certified, 2 input error, 3 model hypothesis violated,
//! 4 not certified, 1 when writing outputs fails.

mod out;
mod reproduce;

use clap::{Args, Parser, Subcommand, ValueEnum};
use out::{single_disk, verdict_code, OutDir};
use serde::{Deserialize, Serialize};
use srgkit::analysis::{self, AnalysisError, AnalysisSettings, FeedbackSpec, LfrModel, Verdict};
use srgkit::lti::{self, LtiError, StateSpace};
use srgkit::models::{self, Example};
use srgkit::nonlin::{self, NamedNonlinearity, NonlinError, SectorBound};
use srgkit::region::{self, ArcSide, CalcConfig, Completion, Region, RegionError};
use srgkit::sim::{self, GainOptions, SimConfig, SimError};
use srgkit::C64;
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("cannot write {0}: {1}")]
    Io(String, std::io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Io(..) => 1,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        if e.is_hypothesis() {
            CliError::Hypothesis(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<LtiError> for CliError {
    fn from(e: LtiError) -> Self {
        AnalysisError::from(e).into()
    }
}

impl From<RegionError> for CliError {
    fn from(e: RegionError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NonlinError> for CliError {
    fn from(e: NonlinError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::AlgebraicLoop(_) => CliError::Hypothesis(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "srgkit", version, about = "Scaled relative graph analysis of LTI and nonlinear feedback systems")]
struct Cli {
    /// Directory receiving all outputs and manifest.json.
    #[arg(long, global = true, env = "SRGKIT_OUT", default_value = "srgkit-out")]
    out: PathBuf,
    /// Log level (error, warn, info, debug).
    #[arg(long, global = true, env = "SRGKIT_LOG", default_value = "warn")]
    log: String,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum CompletionArg {
    Improved,
    Plain,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CalcArgs {
    /// Lattice spacing as a fraction of each region's extent.
    #[arg(long, env = "SRGKIT_RESOLUTION")]
    resolution: Option<f64>,
    /// Completion used by sums and products.
    #[arg(long, env = "SRGKIT_COMPLETION", value_enum, default_value = "improved")]
    completion: CompletionArg,
}

impl CalcArgs {
    fn config(&self, base: CalcConfig) -> Result<CalcConfig, CliError> {
        let mut cfg = base;
        if let Some(r) = self.resolution {
            if !(r > 0.0 && r < 1.0) {
                return Err(CliError::Input(format!("resolution must lie in (0, 1), got {r}")));
            }
            cfg.cells = (1.0 / r).ceil() as usize;
        }
        cfg.completion = match self.completion {
            CompletionArg::Improved => Completion::Improved,
            CompletionArg::Plain => Completion::Plain,
        };
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct GridArgs {
    /// Frequency grid size for singular-value sweeps.
    #[arg(long, env = "SRGKIT_GRID_POINTS", default_value_t = lti::DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Number of real base points in Υ and Λ.
    #[arg(long, env = "SRGKIT_BASE_POINTS", default_value_t = lti::DEFAULT_BASE_POINTS)]
    base_points: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct AnalysisArgs {
    #[command(flatten)]
    calc: CalcArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Number of τ values in [0, 1] for the separation sweep.
    #[arg(long, env = "SRGKIT_TAU_POINTS", default_value_t = 101)]
    tau_points: usize,
    /// Refine the τ grid until the separation settles.
    #[arg(long, env = "SRGKIT_REFINE_TAU")]
    refine_tau: bool,
    /// Acknowledge that the interconnection is well-posed (needed for
    /// non-incremental analysis).
    #[arg(long, env = "SRGKIT_ASSUME_WELLPOSED")]
    assume_wellposed: bool,
    /// Use the non-incremental path even for incremental bounds.
    #[arg(long, env = "SRGKIT_NON_INCREMENTAL")]
    non_incremental: bool,
}

impl AnalysisArgs {
    fn settings(&self, base: AnalysisSettings) -> Result<AnalysisSettings, CliError> {
        let mut s = base;
        s.calc = self.calc.config(s.calc)?;
        s.grid_points = self.grid.grid_points;
        s.base_points = self.grid.base_points;
        s.tau_points = self.tau_points;
        s.refine_tau = self.refine_tau;
        s.assume_wellposed = self.assume_wellposed;
        s.non_incremental = self.non_incremental;
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum RegionOp {
    Inverse,
    Scale,
    Shift,
    Sum,
    Product,
    ImprovedSum,
    ImprovedProduct,
    Chord,
    Arc,
    Intersect,
    ToCover,
    Rmin,
    Dist,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, ValueEnum, Serialize)]
enum ExampleId {
    #[value(name = "1")]
    One,
    #[value(name = "1a")]
    OneA,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// SRG bound of a stable state-space model.
    SrgLti {
        model: PathBuf,
        /// Comma-separated upper base points Υ (default: automatic).
        #[arg(long, env = "SRGKIT_UPSILON")]
        upsilon: Option<String>,
        /// Comma-separated lower base points Λ (default: Υ).
        #[arg(long, env = "SRGKIT_LAMBDA")]
        lambda: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// SRG bound of a constant complex matrix ({"re": [[..]], "im": [[..]]}).
    SrgMatrix {
        matrix: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// Region of a sector bound, or of a named nonlinearity with a sampled
    /// check of its declared sector.
    Sector {
        spec: PathBuf,
        #[arg(long, env = "SRGKIT_SAMPLES", default_value_t = 10_000)]
        samples: usize,
        #[arg(long, env = "SRGKIT_SEED", default_value_t = 7)]
        seed: u64,
        /// Check the non-incremental sector of a named nonlinearity.
        #[arg(long, env = "SRGKIT_NON_INCREMENTAL")]
        non_incremental: bool,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// Apply one region operation to region files.
    Region {
        #[arg(value_enum)]
        op: RegionOp,
        files: Vec<PathBuf>,
        /// Factor or offset for scale and shift.
        #[arg(long, env = "SRGKIT_ALPHA", allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, env = "SRGKIT_SIDE", value_enum, default_value = "right")]
        side: Side,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// Certify an LFR model and bound its gain.
    AnalyzeLfr {
        model: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Certify a feedback interconnection [H1, H2].
    AnalyzeFeedback {
        problem: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Try diagonal loop transformations K = diag(κ) on an LFR model.
    SweepTransform {
        model: PathBuf,
        /// Candidates separated by ';', entries by ',' (e.g. "2,3;0.5,1.5").
        #[arg(long, env = "SRGKIT_CANDIDATES", allow_hyphen_values = true)]
        candidates: String,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Empirical gain of an LFR model under random excitation.
    Simulate {
        model: PathBuf,
        /// JSON array of named nonlinearities (default: the model file's own).
        #[arg(long, env = "SRGKIT_NONLINEARITIES")]
        nonlinearities: Option<PathBuf>,
        #[arg(long, env = "SRGKIT_SEED", default_value_t = 7)]
        seed: u64,
        #[arg(long, env = "SRGKIT_MULTISINES", default_value_t = 20)]
        multisines: usize,
        #[arg(long, env = "SRGKIT_NOISE_PAIRS", default_value_t = 20)]
        noise_pairs: usize,
        /// Compare against the zero input instead of a second excitation.
        #[arg(long, env = "SRGKIT_NON_INCREMENTAL")]
        non_incremental: bool,
        #[arg(long, env = "SRGKIT_DT")]
        dt: Option<f64>,
        #[arg(long, env = "SRGKIT_HORIZON")]
        horizon: Option<f64>,
    },
    /// Rebuild a worked example end to end and compare with reference values.
    Reproduce {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
        /// Skip the simulation cross-check.
        #[arg(long, env = "SRGKIT_SKIP_SIM")]
        skip_sim: bool,
        #[arg(long, env = "SRGKIT_SEED", default_value_t = 7)]
        seed: u64,
        #[arg(long, env = "SRGKIT_RESOLUTION")]
        resolution: Option<f64>,
    },
    /// Write a built-in example model (with its nonlinearities) as JSON.
    ExportModel {
        #[arg(value_enum)]
        example: ExampleId,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SrgLti { .. } => "srg-lti",
            Command::SrgMatrix { .. } => "srg-matrix",
            Command::Sector { .. } => "sector",
            Command::Region { .. } => "region",
            Command::AnalyzeLfr { .. } => "analyze-lfr",
            Command::AnalyzeFeedback { .. } => "analyze-feedback",
            Command::SweepTransform { .. } => "sweep-transform",
            Command::Simulate { .. } => "simulate",
            Command::Reproduce { .. } => "reproduce",
            Command::ExportModel { .. } => "export-model",
        }
    }
}

/// LFR model file, optionally carrying the nonlinearities used in simulation.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    #[serde(flatten)]
    model: LfrModel,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nonlinearities: Vec<NamedNonlinearity>,
}

#[derive(Debug, Deserialize)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SectorFile {
    Bound(SectorBound),
    Named(NamedNonlinearity),
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Input(format!("bad number {t:?}: {e}"))))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    let mut out = OutDir::new(&cli.out);
    let name = cli.cmd.name();
    let started = std::time::Instant::now();
    let result = run(cli.cmd, &mut out);
    log::info!("{name} finished in {:.2?}", started.elapsed());
    let (code, err) = match result {
        Ok(code) => (code, None),
        Err(e) => {
            eprintln!("error: {e}");
            (e.code(), Some(e.to_string()))
        }
    };
    if let Err(e) = out.finish(name, code, err) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}

fn run(cmd: Command, out: &mut OutDir) -> Result<i32, CliError> {
    match cmd {
        Command::SrgLti { model, upsilon, lambda, grid, calc } => {
            let ss: StateSpace = out.read_json(&model)?;
            out.settings(&(&grid, &calc, &upsilon, &lambda));
            ss.require_hurwitz()?;
            let (freq, ups_auto, lam_auto) = lti::auto_grids_with(&ss, grid.grid_points, grid.base_points)?;
            let ups = match &upsilon {
                Some(s) => parse_list(s)?,
                None => ups_auto,
            };
            let lam = match (&lambda, &upsilon) {
                (Some(s), _) => parse_list(s)?,
                (None, Some(_)) => ups.clone(),
                (None, None) => lam_auto,
            };
            let bound = lti::lti_srg_bound(&ss, &ups, &lam, &freq, lti::Inflation::default())?;
            let profile = lti::sigma_extrema(&ss, &freq)?;
            out.write("sigma.csv", &profile.to_csv())?;
            let region = Region::DiskAlgebra(bound);
            let cells = region.to_cells(&calc.config(CalcConfig::default())?)?;
            println!("rmin = {}", cells.rmin());
            out.region("region", &region, &cells)?;
            Ok(0)
        }
        Command::SrgMatrix { matrix, grid, calc } => {
            let mf: MatrixFile = out.read_json(&matrix)?;
            out.settings(&(&grid, &calc));
            let m = complex_matrix(&mf)?;
            let sup = lti::sigma_pair(&m).0;
            let pts = lti::base_points(sup, grid.base_points);
            let region = Region::DiskAlgebra(lti::matrix_srg_bound(&m, &pts, &pts));
            let cells = region.to_cells(&calc.config(CalcConfig::default())?)?;
            println!("rmin = {}", cells.rmin());
            out.region("region", &region, &cells)?;
            Ok(0)
        }
        Command::Sector { spec, samples, seed, non_incremental, calc } => {
            let sf: SectorFile = out.read_json(&spec)?;
            out.settings(&(samples, seed, non_incremental, &calc));
            let (bound, named) = match sf {
                SectorFile::Bound(b) => (b, None),
                SectorFile::Named(nl) => {
                    nl.validate()?;
                    let s = nl.incremental_sector();
                    (SectorBound::new(vec![s], !non_incremental)?, Some(nl))
                }
            };
            bound.validate()?;
            let mut code = 0;
            if let Some(nl) = named {
                let check = nonlin::verify_sector(&nl, bound.channels[0], bound.incremental, samples, seed);
                out.write_json("sector_check.json", &check)?;
                if !check.ok {
                    eprintln!("declared sector violated at {:?}", check.witness);
                    code = 3;
                }
            }
            let region = Region::DiskAlgebra(nonlin::diagonal_nl_region(&bound));
            let cells = region.to_cells(&calc.config(CalcConfig::default())?)?;
            out.region("region", &region, &cells)?;
            Ok(code)
        }
        Command::Region { op, files, alpha, side, calc } => {
            out.settings(&(op, alpha, side, &calc));
            let cfg = calc.config(CalcConfig::default())?;
            let mut regions = Vec::new();
            for f in &files {
                let r: Region = out.read_json(f)?;
                if let Region::DiskAlgebra(d) = &r {
                    d.validate()?;
                }
                regions.push(r);
            }
            region_op(op, &regions, alpha, side, &cfg, out)
        }
        Command::AnalyzeLfr { model, analysis } => {
            let mf: ModelFile = out.read_json(&model)?;
            let settings = analysis.settings(AnalysisSettings::default())?;
            out.settings(&settings);
            let report = analysis::lfr_certify(&mf.model, &analysis::tau_grid(settings.tau_points), &settings)?;
            print_report(&report);
            out.report("", &report)?;
            Ok(verdict_code(report.verdict))
        }
        Command::AnalyzeFeedback { problem, analysis } => {
            let spec: FeedbackSpec = out.read_json(&problem)?;
            let settings = analysis.settings(AnalysisSettings::default())?;
            out.settings(&settings);
            let fp = spec.problem(&settings)?;
            let report = analysis::feedback_certify(&fp, &analysis::tau_grid(settings.tau_points), &settings)?;
            print_report(&report);
            out.report("", &report)?;
            Ok(verdict_code(report.verdict))
        }
        Command::SweepTransform { model, candidates, analysis } => {
            let mf: ModelFile = out.read_json(&model)?;
            let settings = analysis.settings(AnalysisSettings::default())?;
            out.settings(&(&settings, &candidates));
            let cands = candidates.split(';').map(parse_list).collect::<Result<Vec<_>, _>>()?;
            let res = analysis::transform_sweep(&mf.model, &cands, &analysis::tau_grid(settings.tau_points), &settings)?;
            let mut csv = String::from("kappa,stable,verdict,gain_bound\n");
            for row in &res.table {
                let k: Vec<String> = row.kappa.iter().map(|v| v.to_string()).collect();
                let verdict = row.verdict.map_or("skipped".to_string(), |v| format!("{v:?}"));
                csv.push_str(&format!("\"{}\",{},{},{}\n", k.join(" "), row.stable, verdict, row.gain_bound));
                println!("kappa = [{}]  stable = {}  verdict = {}  bound = {:.4}", k.join(", "), row.stable, verdict, row.gain_bound);
            }
            out.write("sweep.csv", &csv)?;
            out.write_json("sweep.json", &res)?;
            Ok(if res.best.is_some() { 0 } else { 4 })
        }
        Command::Simulate { model, nonlinearities, seed, multisines, noise_pairs, non_incremental, dt, horizon } => {
            let mf: ModelFile = out.read_json(&model)?;
            let nls = match &nonlinearities {
                Some(p) => out.read_json::<Vec<NamedNonlinearity>>(p)?,
                None => mf.nonlinearities.clone(),
            };
            if nls.is_empty() {
                return Err(CliError::Input("no nonlinearities given (use --nonlinearities or a model file that lists them)".into()));
            }
            for nl in &nls {
                nl.validate()?;
            }
            mf.model.validate()?;
            let opts = GainOptions {
                multisine_pairs: multisines,
                noise_pairs,
                seed,
                incremental: !non_incremental,
                sim: SimConfig { dt, horizon, ..SimConfig::default() },
            };
            out.settings(&opts);
            let ex = Example { model: mf.model, nonlinearities: nls };
            let est = sim::empirical_gain(&ex, &opts)?;
            println!("empirical gain = {:.6} over {} pairs", est.value, est.num_pairs);
            out.write_json("gain.json", &est)?;
            let n = (est.horizon / est.dt).ceil() as usize + 1;
            let (_, u1, _) = sim::excitation_pair_seeded(&ex, est.best_kind, est.best_pair_seed, opts.incremental, est.dt, n);
            let trace = sim::simulate_lfr(&ex.model, &ex.nonlinearities, &u1, &opts.sim)?;
            out.write("best_pair_signals.csv", &trace.to_csv())?;
            Ok(0)
        }
        Command::Reproduce { example, skip_sim, seed, resolution } => reproduce::run(example, skip_sim, seed, resolution, out),
        Command::ExportModel { example } => {
            let ex = match example {
                ExampleId::One => models::example1(2.0, 3.0)?,
                ExampleId::OneA => models::example1(0.5, 1.5)?,
                ExampleId::Two => models::example2()?,
                ExampleId::Three => models::example3()?.1,
            };
            let name = format!("{}.json", ex.model.name);
            out.write_json(&name, &ModelFile { model: ex.model, nonlinearities: ex.nonlinearities })?;
            println!("{name}");
            Ok(0)
        }
    }
}

fn complex_matrix(mf: &MatrixFile) -> Result<nalgebra::DMatrix<C64>, CliError> {
    let rows = mf.re.len();
    let cols = mf.re.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || mf.re.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input("matrix must be a nonempty rectangular array".into()));
    }
    if !mf.im.is_empty() && (mf.im.len() != rows || mf.im.iter().any(|r| r.len() != cols)) {
        return Err(CliError::Input("im must match the shape of re".into()));
    }
    Ok(nalgebra::DMatrix::from_fn(rows, cols, |i, j| {
        C64::new(mf.re[i][j], if mf.im.is_empty() { 0.0 } else { mf.im[i][j] })
    }))
}

fn print_report(r: &analysis::AnalysisReport) {
    match r.verdict {
        Verdict::Certified => println!("certified: separation {:.4} (min at tau = {:.3}), gain bound {:.4}", r.separation_r, r.tau_at_min, r.gain_bound),
        Verdict::NotCertified => println!("not certified: separation {:.4} at tau = {:.3}", r.separation_r, r.tau_at_min),
    }
    for n in &r.notes {
        println!("note: {n}");
    }
}

fn arity(op: RegionOp, regions: &[Region], n: usize) -> Result<(), CliError> {
    if regions.len() != n {
        return Err(CliError::Input(format!("{op:?} takes {n} region file(s), got {}", regions.len())));
    }
    Ok(())
}

fn need_alpha(op: RegionOp, alpha: Option<f64>) -> Result<f64, CliError> {
    alpha.ok_or_else(|| CliError::Input(format!("{op:?} needs --alpha")))
}

fn region_op(op: RegionOp, rs: &[Region], alpha: Option<f64>, side: Side, cfg: &CalcConfig, out: &mut OutDir) -> Result<i32, CliError> {
    let cover = |r: &Region| r.to_cover(cfg);
    let result: Region = match op {
        RegionOp::Rmin => {
            arity(op, rs, 1)?;
            println!("{}", rs[0].rmin(cfg)?);
            return Ok(0);
        }
        RegionOp::Dist => {
            arity(op, rs, 2)?;
            println!("{}", region::dist(&cover(&rs[0])?, &cover(&rs[1])?));
            return Ok(0);
        }
        RegionOp::Inverse => {
            arity(op, rs, 1)?;
            match single_disk(&rs[0]).and_then(region::disk::inverse) {
                Some(d) => Region::DiskAlgebra(d),
                None => Region::Cover(region::mobius_inverse(&cover(&rs[0])?)),
            }
        }
        RegionOp::Scale => {
            arity(op, rs, 1)?;
            rs[0].scaled(need_alpha(op, alpha)?)?
        }
        RegionOp::Shift => {
            arity(op, rs, 1)?;
            rs[0].shifted(need_alpha(op, alpha)?)
        }
        RegionOp::Sum | RegionOp::ImprovedSum => {
            arity(op, rs, 2)?;
            match (single_disk(&rs[0]), single_disk(&rs[1])) {
                (Some(a), Some(b)) => Region::DiskAlgebra(region::disk::sum(a, b)),
                _ if matches!(op, RegionOp::Sum) => Region::Cover(region::minkowski_sum(&cover(&rs[0])?, &cover(&rs[1])?, cfg)?),
                _ => Region::Cover(region::improved_sum(&cover(&rs[0])?, &cover(&rs[1])?, cfg)?),
            }
        }
        RegionOp::Product => {
            arity(op, rs, 2)?;
            Region::Cover(region::minkowski_product(&cover(&rs[0])?, &cover(&rs[1])?, cfg)?)
        }
        RegionOp::ImprovedProduct => {
            arity(op, rs, 2)?;
            Region::Cover(region::improved_product(&cover(&rs[0])?, &cover(&rs[1])?, cfg)?)
        }
        RegionOp::Chord => {
            arity(op, rs, 1)?;
            Region::Cover(region::chord_completion(&cover(&rs[0])?, cfg)?)
        }
        RegionOp::Arc => {
            arity(op, rs, 1)?;
            let s = match side {
                Side::Left => ArcSide::Left,
                Side::Right => ArcSide::Right,
            };
            Region::Cover(region::arc_completion(&cover(&rs[0])?, s, cfg)?)
        }
        RegionOp::Intersect => {
            arity(op, rs, 2)?;
            Region::Cover(region::intersect(&cover(&rs[0])?, &cover(&rs[1])?))
        }
        RegionOp::ToCover => {
            arity(op, rs, 1)?;
            Region::Cover(cover(&rs[0])?)
        }
    };
    let eps = match &result {
        Region::Cover(c) => c.epsilon,
        Region::DiskAlgebra(_) => 0.0,
    };
    let inputs: Vec<f64> = rs
        .iter()
        .map(|r| match r {
            Region::Cover(c) => c.epsilon,
            Region::DiskAlgebra(_) => 0.0,
        })
        .collect();
    println!("epsilon: inputs {inputs:?} -> result {eps}");
    let cells = match &result {
        Region::Cover(c) if !c.is_bounded() => {
            out.write_json("region.json", &result)?;
            println!("result is unbounded; only the JSON file was written");
            return Ok(0);
        }
        r => r.to_cells(cfg)?,
    };
    out.region("region", &result, &cells)?;
    Ok(0)
}
