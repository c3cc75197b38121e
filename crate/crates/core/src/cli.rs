//! Batch front end: one subcommand per analysis, each writing CSV/JSON
//! artifacts and the resolved configuration into the output directory.
//!
//! Exit status is 0 when every asserted invariant holds, 1 when one fails
//! and 2 when the run could not be carried out (bad configuration, solver
//! failure, I/O).
//!
//! | subcommand    | artifacts                                              |
//! |---------------|--------------------------------------------------------|
//! | `branches`    | `branch_table.csv` (`k,eps_0..eps_N,deps_0`), `report.json` |
//! | `sweep`       | `branches.csv`, `spacings.csv`, `histogram.csv`, `report.json` |
//! | `spacing`     | `spacings.csv`, `histogram.csv`, `report.json`          |
//! | `conductance` | `branches.csv`, `report.json`                           |
//! | `index`       | `report.json`                                           |
//! | `decouple`    | `decoupling.csv` (`D,max_dE,proj_dev`), `report.json`   |
//! | `toy`         | `branches.csv`, `spacings.csv`, `histogram.csv`, `report.json` |
//!
//! `branches.csv` has columns `phi,k,E,dE_dphi,j_k` where `k` is the branch
//! label; `spacings.csv` has `E_lower,E_upper,spacing,density,s` and
//! `histogram.csv` has `s_lo,s_hi,count`. Every run also writes `config.json`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flow::{
    edge_conductance, edge_levels_at, flow_report, spacing_stats_from_levels, sweep_flux,
    tracking_window, write_branches_csv, write_histogram_csv, write_spacings_csv, BranchSet,
    FlowReport, SpacingStats, SweepOptions,
};
use crate::index::{
    crossing_vs_index, decoupling_compare, fermi_levels, index_identities_check, random_projection,
    random_unitary, write_decoupling_csv, CrossingIndex, DecouplingTable,
};
use crate::io::{write_json, write_with};
use crate::model::{gap_window, sample_disorder, DisorderField, GridSpec, PhysicalParams};
use crate::spectra::{
    alpha_bound, branch_grid, edge_branches, min_fermi_velocity, BranchTable, FermiVelocity, Solver,
};
use crate::toymodel::{toy_suite, ToyReport};

#[derive(Debug, Parser)]
#[command(
    name = "qhedge",
    version,
    about = "Edge spectra of a flux-threaded quantum Hall cylinder"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed of the impurity field.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Flux steps per period.
    #[arg(long = "phi-steps", global = true)]
    pub phi_steps: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Clean dispersion table ε_n(k), Fermi velocity and flow bound.
    Branches,
    /// Full flux sweep and flow report.
    Sweep,
    /// Level spacing statistics at Φ = 0.
    Spacing,
    /// Flux-averaged edge conductance.
    Conductance,
    /// Crossing count against relative index, and index identities.
    Index,
    /// Decoupling of the edge from disorder beyond a distance D.
    Decouple,
    /// Exact chiral model suite.
    Toy,
}

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    /// One-line human summary.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Loads `--config` (or the defaults) and applies the flag overrides.
pub fn resolve_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = args.phi_steps {
        cfg.phi_steps = p;
    }
    if let Some(t) = args.threads {
        cfg.threads = Some(t);
    }
    cfg.validate()?;
    Ok(cfg.resolved())
}

struct Writer {
    dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.dir.join(name);
        write_json(&p, value)?;
        self.artifacts.push(p);
        Ok(())
    }

    fn csv<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let p = self.dir.join(name);
        write_with(&p, f)?;
        self.artifacts.push(p);
        Ok(())
    }

    fn finish(self, pass: bool, summary: String) -> Outcome {
        Outcome {
            pass,
            summary,
            artifacts: self.artifacts,
        }
    }
}

fn disorder(cfg: &RunConfig, grid: &GridSpec) -> DisorderField {
    sample_disorder(cfg.seed, grid, cfg.params.w)
}

fn sweep(cfg: &RunConfig) -> Result<BranchSet> {
    let grid = cfg.resolved_grid();
    let opts = SweepOptions {
        phi_steps: cfg.phi_steps,
        solver: Solver::Auto,
    };
    sweep_flux(&cfg.params, &grid, &disorder(cfg, &grid), &opts)
}

/// Clean dispersion table on the branch grid over `k ∈ [k_min, k_max]·√B`.
pub fn branch_table(
    params: &PhysicalParams,
    k_min: f64,
    k_max: f64,
    points: usize,
    n_max: usize,
) -> Result<BranchTable> {
    let s = params.b.sqrt();
    let ks: Vec<f64> = (0..points)
        .map(|i| s * (k_min + (k_max - k_min) * i as f64 / (points - 1) as f64))
        .collect();
    edge_branches(params, &branch_grid(params), &ks, n_max)
}

/// `v_F` over the flux values `phis` and the flow bound `α` it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityBound {
    pub fermi: FermiVelocity,
    /// `None` when the bound is vacuous.
    pub alpha: Option<f64>,
}

pub fn velocity_bound(
    params: &PhysicalParams,
    table: &BranchTable,
    phis: &[f64],
) -> Result<VelocityBound> {
    let (_, delta) = gap_window(params)?;
    let fermi = min_fermi_velocity(table, &delta, params.l, phis)?;
    let alpha = alpha_bound(fermi.v_f, params.b, params.w, params.delta)?.value();
    Ok(VelocityBound { fermi, alpha })
}

fn default_table(cfg: &RunConfig) -> Result<BranchTable> {
    let b = &cfg.branches;
    branch_table(&cfg.params, b.k_min, b.k_max, b.k_points, b.n_max)
}

#[derive(Debug, Serialize)]
struct BranchesReport {
    k_min: f64,
    k_max: f64,
    n_branches: usize,
    eps0_left: f64,
    eps0_left_error: f64,
    monotonicity_violations: usize,
    /// `max_k ((n + ½)B − ε_n(k))` per branch.
    landau_floor_deficits: Vec<f64>,
    bound: Option<VelocityBound>,
    pass: bool,
}

fn run_branches(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let table = default_table(cfg)?;
    let phis: Vec<f64> = (0..=cfg.phi_steps)
        .map(|p| 2.0 * PI * p as f64 / cfg.phi_steps as f64)
        .collect();
    let bound = match velocity_bound(&cfg.params, &table, &phis) {
        Ok(b) => Some(b),
        Err(Error::NoBranchInWindow { .. }) => None,
        Err(e) => return Err(e),
    };
    let eps0_left = table.eps[0][0];
    let eps0_left_error = (eps0_left - 0.5 * cfg.params.b).abs();
    let monotonicity_violations = table.monotonicity_violations(1e-12);
    let pass = eps0_left_error <= 1e-3 && monotonicity_violations == 0;
    let report = BranchesReport {
        k_min: table.k[0],
        k_max: *table.k.last().expect("nonempty k grid"),
        n_branches: table.n_branches(),
        eps0_left,
        eps0_left_error,
        monotonicity_violations,
        landau_floor_deficits: table.landau_floor_deficits(cfg.params.b),
        bound,
        pass,
    };
    w.csv("branch_table.csv", |b| table.write_csv(b))?;
    w.json("report.json", &report)?;
    let summary = format!(
        "ε_0(k_min) − B/2 = {:.2e}, {} monotonicity violations, v_F = {}",
        eps0_left_error,
        monotonicity_violations,
        bound.map_or("n/a".into(), |b| format!("{:.4}", b.fermi.v_f))
    );
    Ok((pass, summary))
}

/// Pass/fail of a sweep against the flow, shift, winding, spacing,
/// Feynman–Hellmann and conductance bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub bound: Option<VelocityBound>,
    pub report: FlowReport,
    pub fh_pass: bool,
    pub conductance_pass: bool,
    pub pass: bool,
}

/// Maximum accepted `|⟨ψ|∂H/∂Φ|ψ⟩ − ΔE/ΔΦ|`.
pub const FH_TOL: f64 = 1e-5;

pub fn sweep_report(cfg: &RunConfig, bs: &BranchSet) -> Result<SweepReport> {
    let table = default_table(cfg)?;
    let bound = match velocity_bound(&cfg.params, &table, &bs.phis) {
        Ok(b) => Some(b),
        Err(Error::NoBranchInWindow { .. }) => None,
        Err(e) => return Err(e),
    };
    let report = flow_report(
        bs,
        bound.map(|b| b.fermi.v_f),
        bound.and_then(|b| b.alpha),
        cfg.flow.rel_tol,
    )?;
    let fh_pass = report.fh_max_deviation <= FH_TOL;
    let conductance_pass = report.sigma_e_error <= 2.0 / bs.l;
    let pass = report.invariants_hold(cfg.flow.shift_tol * cfg.params.b)
        && report.spacing_violations == 0
        && fh_pass
        && conductance_pass;
    Ok(SweepReport {
        seed: cfg.seed,
        bound,
        report,
        fh_pass,
        conductance_pass,
        pass,
    })
}

fn run_sweep(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let bs = sweep(cfg)?;
    let r = sweep_report(cfg, &bs)?;
    w.csv("branches.csv", |b| write_branches_csv(&bs, b))?;
    if let Ok(stats) = spacing_stats_for(cfg, &bs, r.bound) {
        w.csv("spacings.csv", |b| write_spacings_csv(&stats, b))?;
        w.csv("histogram.csv", |b| write_histogram_csv(&stats, b))?;
    }
    w.json("report.json", &r)?;
    let f = &r.report;
    let summary =
        format!(
        "{} branches, L·dE/dΦ ∈ [{:.4}, {:.4}], shift residual {:.2e}, Q_F = {}, σ_e error {:.2e}",
        f.branches, f.flow.min_l_slope, f.flow.max_l_slope, f.shift.residual, f.q_f, f.sigma_e_error
    );
    Ok((r.pass, summary))
}

fn spacing_stats_for(
    cfg: &RunConfig,
    bs: &BranchSet,
    bound: Option<VelocityBound>,
) -> Result<SpacingStats> {
    spacing_stats_from_levels(
        &bs.levels_at(0),
        &bs.delta,
        bs.l,
        bs.b,
        bound.and_then(|b| b.alpha),
        cfg.flow.rel_tol,
    )
}

#[derive(Debug, Serialize)]
struct SpacingReport {
    levels: Vec<f64>,
    bound: Option<VelocityBound>,
    stats: SpacingStats,
    pass: bool,
}

fn run_spacing(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let grid = cfg.resolved_grid();
    let levels = edge_levels_at(&cfg.params, &grid, &disorder(cfg, &grid), 0.0, Solver::Auto)?;
    let table = default_table(cfg)?;
    let bound = match velocity_bound(&cfg.params, &table, &[0.0]) {
        Ok(b) => Some(b),
        Err(Error::NoBranchInWindow { .. }) => None,
        Err(e) => return Err(e),
    };
    let (_, delta) = gap_window(&cfg.params)?;
    let stats = spacing_stats_from_levels(
        &levels,
        &delta,
        cfg.params.l,
        cfg.params.b,
        bound.and_then(|b| b.alpha),
        cfg.flow.rel_tol,
    )?;
    let pass = stats.violations == 0;
    w.csv("spacings.csv", |b| write_spacings_csv(&stats, b))?;
    w.csv("histogram.csv", |b| write_histogram_csv(&stats, b))?;
    let summary = format!(
        "{} spacings, {} outside [{}, {:.4}]",
        stats.rows.len(),
        stats.violations,
        stats.lower_bound.map_or("-".into(), |x| format!("{x:.4}")),
        stats.upper_bound
    );
    w.json(
        "report.json",
        &SpacingReport {
            levels,
            bound,
            stats,
            pass,
        },
    )?;
    Ok((pass, summary))
}

#[derive(Debug, Serialize)]
struct ConductanceReport {
    l: f64,
    sigma_e: f64,
    exact: f64,
    error: f64,
    bound: f64,
    pass: bool,
}

fn run_conductance(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let bs = sweep(cfg)?;
    let sigma_e = edge_conductance(&bs, &bs.delta);
    let exact = 1.0 / (2.0 * PI);
    let r = ConductanceReport {
        l: bs.l,
        sigma_e,
        exact,
        error: (sigma_e - exact).abs(),
        bound: 2.0 / bs.l,
        pass: (sigma_e - exact).abs() <= 2.0 / bs.l,
    };
    w.csv("branches.csv", |b| write_branches_csv(&bs, b))?;
    w.json("report.json", &r)?;
    Ok((
        r.pass,
        format!("σ_e = {:.12}, |σ_e − 1/2π| = {:.3e}", r.sigma_e, r.error),
    ))
}

/// Index identities on `count` random projection triples of dimension `2..=max_dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TripleSummary {
    pub triples: usize,
    pub additivity_failures: usize,
    pub antisymmetry_failures: usize,
    pub invariance_failures: usize,
}

impl TripleSummary {
    pub fn pass(&self) -> bool {
        self.additivity_failures + self.antisymmetry_failures + self.invariance_failures == 0
    }
}

pub fn random_triples(seed: u64, count: usize, max_dim: usize) -> Result<TripleSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = TripleSummary {
        triples: count,
        additivity_failures: 0,
        antisymmetry_failures: 0,
        invariance_failures: 0,
    };
    for _ in 0..count {
        let n = rng.gen_range(2..=max_dim);
        let p = random_projection(n, rng.gen_range(0..=n), &mut rng)?;
        let q = random_projection(n, rng.gen_range(0..=n), &mut rng)?;
        let r = random_projection(n, rng.gen_range(0..=n), &mut rng)?;
        let u = random_unitary(n, &mut rng);
        let rep = index_identities_check(&p, &q, &r, &u);
        s.additivity_failures += usize::from(!rep.additivity);
        s.antisymmetry_failures += usize::from(!rep.antisymmetry);
        s.invariance_failures += usize::from(!rep.unitary_invariance);
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct IndexReport {
    crossings: Vec<CrossingIndex>,
    triples: TripleSummary,
    pass: bool,
}

fn run_index(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let bs = sweep(cfg)?;
    let crossings = fermi_levels(&bs, cfg.index.fermi_levels)
        .into_iter()
        .map(|f| crossing_vs_index(&bs, f))
        .collect::<Result<Vec<_>>>()?;
    let triples = random_triples(cfg.seed, cfg.index.triples, cfg.index.max_dim)?;
    let pass = crossings.iter().all(|c| c.equal && c.q_index == 1) && triples.pass();
    let summary = format!(
        "Q_F = {:?}, Tr P^c = {:?}, {} identity failures in {} triples",
        crossings.iter().map(|c| c.q_branches).collect::<Vec<_>>(),
        crossings.iter().map(|c| c.q_index).collect::<Vec<_>>(),
        triples.additivity_failures + triples.antisymmetry_failures + triples.invariance_failures,
        triples.triples
    );
    w.json(
        "report.json",
        &IndexReport {
            crossings,
            triples,
            pass,
        },
    )?;
    Ok((pass, summary))
}

/// Decay checks on a decoupling table with distances in units of `1/√B`.
pub fn decoupling_pass(table: &DecouplingTable, b: f64) -> bool {
    let four = 4.0 / b.sqrt() - 1e-12;
    table.monotone
        && table.fitted_slope.is_some_and(|s| s < 0.0)
        && table
            .rows
            .iter()
            .filter(|r| r.d >= four)
            .all(|r| r.projector_deviation < 1.0)
}

#[derive(Debug, Serialize)]
struct DecoupleReport {
    table: DecouplingTable,
    pass: bool,
}

fn run_decouple(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let grid = cfg.resolved_grid();
    let lb = cfg.params.magnetic_length();
    let ds: Vec<f64> = cfg.decouple.d.iter().map(|d| d * lb).collect();
    let window = tracking_window(&cfg.params)?;
    let table = decoupling_compare(
        &cfg.params,
        &grid,
        &disorder(cfg, &grid),
        &ds,
        cfg.decouple.phi,
        &window,
    )?;
    let pass = decoupling_pass(&table, cfg.params.b);
    w.csv("decoupling.csv", |b| write_decoupling_csv(&table, b))?;
    let summary = format!(
        "max|ΔE| = {:?}, fitted slope {}",
        table
            .rows
            .iter()
            .map(|r| format!("{:.2e}", r.max_energy_shift))
            .collect::<Vec<_>>(),
        table
            .fitted_slope
            .map_or("n/a".into(), |s| format!("{s:.3}"))
    );
    w.json("report.json", &DecoupleReport { table, pass })?;
    Ok((pass, summary))
}

#[derive(Debug, Serialize)]
struct ToyRunReport {
    report: ToyReport,
    pass: bool,
}

fn run_toy(cfg: &RunConfig, w: &mut Writer) -> Result<(bool, String)> {
    let t = &cfg.toy;
    let (report, bs, stats) = toy_suite(t.l, t.m_lo, t.m_hi, t.vbar, t.phi_steps, t.n_sites)?;
    let pass = report.pass(t.n_sites);
    w.csv("branches.csv", |b| write_branches_csv(&bs, b))?;
    w.csv("spacings.csv", |b| write_spacings_csv(&stats, b))?;
    w.csv("histogram.csv", |b| write_histogram_csv(&stats, b))?;
    let summary = format!(
        "shift {:.1e}, spacing {:.1e}, s {:.1e}, Q_F {:?}, σ_e error {:.1e}",
        report.shift_residual,
        report.spacing_error,
        report.s_error,
        report.q_f,
        report.sigma_e_error
    );
    w.json("report.json", &ToyRunReport { report, pass })?;
    Ok((pass, summary))
}

/// Runs `command` with a validated, resolved configuration.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let mut w = Writer::new(&cfg.out)?;
    w.json("config.json", &cfg)?;
    let (pass, summary) = match command {
        Command::Branches => run_branches(&cfg, &mut w),
        Command::Sweep => run_sweep(&cfg, &mut w),
        Command::Spacing => run_spacing(&cfg, &mut w),
        Command::Conductance => run_conductance(&cfg, &mut w),
        Command::Index => run_index(&cfg, &mut w),
        Command::Decouple => run_decouple(&cfg, &mut w),
        Command::Toy => run_toy(&cfg, &mut w),
    }?;
    Ok(w.finish(pass, summary))
}

/// Parses `args`, runs, prints a summary line and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match resolve_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(n) = cfg.threads {
        // a pool that already exists keeps its size; results do not depend on it
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let name = serde_json::to_value(cli.command)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    match run(cli.command, &cfg) {
        Ok(o) => {
            println!(
                "{name}: {} ({})",
                if o.pass { "pass" } else { "FAIL" },
                o.summary
            );
            if o.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "qhedge",
            "sweep",
            "--seed",
            "7",
            "--phi-steps",
            "64",
            "--threads",
            "2",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::Sweep);
        let cfg = resolve_config(&cli.common).unwrap();
        assert_eq!((cfg.seed, cfg.phi_steps, cfg.threads), (7, 64, Some(2)));
        assert!(cfg.grid.is_some());
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        assert!(Cli::try_parse_from(["qhedge", "fly"]).is_err());
    }

    #[test]
    fn toy_run_passes_and_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            out: dir.path().to_path_buf(),
            ..Default::default()
        };
        let o = run(Command::Toy, &cfg).unwrap();
        assert!(o.pass, "{}", o.summary);
        for f in [
            "config.json",
            "branches.csv",
            "spacings.csv",
            "histogram.csv",
            "report.json",
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
        let nonzero: Vec<&str> = hist
            .lines()
            .skip(1)
            .filter(|l| !l.ends_with(",0"))
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert!(nonzero[0].starts_with("1.0000000000000000e0,"));
    }

    #[test]
    fn random_triples_pass() {
        assert!(random_triples(5, 100, 12).unwrap().pass());
    }
}
