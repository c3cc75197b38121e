// Acceptance run: one line per criterion, nonzero exit if any fails.
//
// Sweeps are sequential and dominate the runtime (about 20 s at L = 20 and
// 90 s at L = 40 per sweep on one core in the test profile).

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use qhedge::cli::{branch_table, random_triples, run, sweep_report, Command, SweepReport};
use qhedge::config::RunConfig;
use qhedge::flow::{sweep_flux, BranchSet, SweepOptions};
use qhedge::hamiltonian::{
    build_flux_derivative, build_hamiltonian, gauge_shift_check, HermitianMatrix,
};
use qhedge::index::{crossing_vs_index, fermi_levels};
use qhedge::model::{sample_disorder, EnergyWindow, GridSpec, PhysicalParams};
use qhedge::spectra::{dense_eigen, eigen_window_with, Solver};
use qhedge::toymodel::toy_suite;

struct Criterion {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: Vec<String>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Self {
            id,
            name,
            pass: true,
            detail: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.detail
            .push(format!("    [{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.check(false, format!("{what}: error {e}"));
    }
}

struct Run {
    l: f64,
    seed: Option<u64>,
    bs: BranchSet,
    report: SweepReport,
    seconds: f64,
}

impl Run {
    fn tag(&self) -> String {
        match self.seed {
            Some(s) => format!("L={} seed={s}", self.l),
            None => format!("L={} clean", self.l),
        }
    }
}

fn config(l: f64, w: f64, seed: u64) -> RunConfig {
    RunConfig {
        params: PhysicalParams {
            l,
            w,
            delta: 0.05,
            ..Default::default()
        },
        seed,
        phi_steps: 128,
        ..Default::default()
    }
}

fn sweep(l: f64, seed: Option<u64>) -> qhedge::Result<Run> {
    let w = if seed.is_some() { 0.02 } else { 0.0 };
    let cfg = config(l, w, seed.unwrap_or(0));
    cfg.validate()?;
    let t = Instant::now();
    let grid = GridSpec::default_for(&cfg.params);
    let v = sample_disorder(cfg.seed, &grid, w);
    let opts = SweepOptions {
        phi_steps: cfg.phi_steps,
        solver: Solver::Auto,
    };
    let bs = sweep_flux(&cfg.params, &grid, &v, &opts)?;
    let report = sweep_report(&cfg, &bs)?;
    Ok(Run {
        l,
        seed,
        bs,
        report,
        seconds: t.elapsed().as_secs_f64(),
    })
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1, "toy model exactness");
    let t = Instant::now();
    match toy_suite(2.0 * PI, -8, 8, 0.0, 128, 128) {
        Ok((r, _, _)) => {
            let secs = t.elapsed().as_secs_f64();
            c.check(
                r.shift_residual <= 1e-12 && r.fourier_error <= 1e-12,
                format!(
                    "shift residual {:.1e}, Fourier levels {:.1e}",
                    r.shift_residual, r.fourier_error
                ),
            );
            c.check(
                r.spacing_error <= 1e-12 && r.s_error <= 1e-12,
                format!(
                    "spacing error {:.1e}, |s - 1| {:.1e}",
                    r.spacing_error, r.s_error
                ),
            );
            c.check(
                r.q_f.iter().all(|&q| q == 1) && r.q_index == r.q_f,
                format!("Q_F {:?}, Tr P^c {:?}", r.q_f, r.q_index),
            );
            c.check(
                r.sigma_e_error <= 1e-12,
                format!("|σ_e - 1/2π| {:.1e}", r.sigma_e_error),
            );
            c.check(
                r.pass(128),
                format!(
                    "max upwind error {:.1e}",
                    r.upwind_errors.iter().cloned().fold(0.0, f64::max)
                ),
            );
            c.check(secs < 1.0, format!("runtime {secs:.2} s"));
        }
        Err(e) => c.error("toy suite", e),
    }
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new(2, "clean edge branches");
    let t = Instant::now();
    let params = PhysicalParams::default();
    let b = RunConfig::default().branches;
    match branch_table(&params, b.k_min, b.k_max, b.k_points, b.n_max) {
        Ok(table) => {
            let secs = t.elapsed().as_secs_f64();
            let err = (table.eps[0][0] - 0.5).abs();
            c.check(
                err <= 1e-3,
                format!(
                    "ε_0({:.1}) = {:.6}, |ε_0 - B/2| = {err:.2e}",
                    table.k[0], table.eps[0][0]
                ),
            );
            let v = table.monotonicity_violations(1e-12);
            c.check(
                v == 0,
                format!(
                    "{v} monotonicity violations in {} branches",
                    table.n_branches()
                ),
            );
            c.check(secs < 10.0, format!("runtime {secs:.2} s"));
        }
        Err(e) => c.error("branch table", e),
    }
    c
}

fn criteria_3_to_7(runs: &[Run]) -> Vec<Criterion> {
    let mut c3 = Criterion::new(3, "spectral flow positivity");
    let mut c4 = Criterion::new(4, "velocity upper bound");
    let mut c5 = Criterion::new(5, "spectral shift and spacings");
    let mut c6 = Criterion::new(6, "winding and relative index");
    let mut c7 = Criterion::new(7, "conductance quantization");
    let limit = 3f64.sqrt() * 1.05;
    for r in runs.iter().filter(|r| r.seed.is_some()) {
        let f = &r.report.report;
        let alpha = r.report.bound.and_then(|b| b.alpha);
        c3.check(
            f.flow.pass() && r.seconds <= 600.0,
            format!(
                "{}: min L·dE/dΦ {:.4} over {} samples, α {}, {:.0} s",
                r.tag(),
                f.flow.min_l_slope,
                f.flow.samples,
                alpha.map_or("vacuous".into(), |a| format!("{a:.4}")),
                r.seconds
            ),
        );
        c4.check(
            f.flow.max_l_slope <= limit,
            format!(
                "{}: max L·dE/dΦ {:.4} (limit {limit:.4})",
                r.tag(),
                f.flow.max_l_slope
            ),
        );
        c5.check(
            f.shift.residual <= 1e-7,
            format!("{}: shift residual {:.1e}", r.tag(), f.shift.residual),
        );
        c5.check(
            f.spacing_violations == 0,
            format!(
                "{}: {} spacings {:.4?}, {} outside bounds",
                r.tag(),
                f.spacings.len(),
                f.spacings,
                f.spacing_violations
            ),
        );
        let mut qs = Vec::new();
        let mut ok = f.q_f == 1;
        for e in fermi_levels(&r.bs, 5) {
            match crossing_vs_index(&r.bs, e) {
                Ok(x) => {
                    ok &= x.equal && x.q_index == 1;
                    qs.push((x.q_branches, x.q_index));
                }
                Err(e) => {
                    ok = false;
                    c6.error(&r.tag(), e);
                }
            }
        }
        c6.check(
            ok && qs.len() == 5,
            format!("{}: (Q_F, Tr P^c) = {qs:?}", r.tag()),
        );
    }
    match random_triples(2024, 100, 12) {
        Ok(t) => c6.check(
            t.pass(),
            format!("index identities on {} random triples: {t:?}", t.triples),
        ),
        Err(e) => c6.error("random triples", e),
    }
    let mean = |l: f64| {
        let errs: Vec<f64> = runs
            .iter()
            .filter(|r| r.l == l)
            .map(|r| r.report.report.sigma_e_error)
            .collect();
        errs.iter().sum::<f64>() / errs.len().max(1) as f64
    };
    for r in runs {
        let f = &r.report.report;
        c7.check(
            f.sigma_e_error <= 2.0 / r.l,
            format!(
                "{}: σ_e {:.10}, error {:.2e}",
                r.tag(),
                f.sigma_e,
                f.sigma_e_error
            ),
        );
    }
    let (e20, e40) = (mean(20.0), mean(40.0));
    c7.check(
        e40 <= 0.7 * e20,
        format!(
            "mean error L=40 {e40:.2e} vs L=20 {e20:.2e}, ratio {:.3}",
            e40 / e20
        ),
    );
    vec![c3, c4, c5, c6, c7]
}

fn criterion_8(dir: &Path) -> Criterion {
    let mut c = Criterion::new(8, "decoupling decay");
    for seed in 1..=3 {
        let cfg = RunConfig {
            seed,
            out: dir.join(format!("decouple_{seed}")),
            ..Default::default()
        };
        match run(Command::Decouple, &cfg) {
            Ok(o) => c.check(o.pass, format!("seed {seed}: {}", o.summary)),
            Err(e) => c.error("decouple", e),
        }
    }
    c
}

fn dense_agreement(h: &HermitianMatrix, window: &EnergyWindow) -> qhedge::Result<f64> {
    let l = eigen_window_with(h, window, Solver::Lanczos)?;
    let (all, _) = dense_eigen(h);
    let d: Vec<f64> = all.into_iter().filter(|e| window.contains(*e)).collect();
    if d.len() != l.len() {
        return Ok(f64::INFINITY);
    }
    Ok(l.values
        .iter()
        .zip(&d)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn same_files(a: &Path, b: &Path) -> std::io::Result<bool> {
    let mut names: Vec<_> = fs::read_dir(a)?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<std::io::Result<_>>()?;
    names.sort();
    for n in names {
        // the echoed config records the output directory
        if n == "config.json" {
            continue;
        }
        if fs::read(a.join(&n))? != fs::read(b.join(&n))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn criterion_9(runs: &[Run], dir: &Path) -> Criterion {
    let mut c = Criterion::new(9, "property suites");
    let fh = runs
        .iter()
        .map(|r| r.report.report.fh_max_deviation)
        .fold(0.0, f64::max);
    c.check(
        fh <= 1e-5,
        format!("max |FH - finite difference| {fh:.2e} over all sweeps"),
    );

    for (l, seed, phi) in [(20.0, 1, 0.9), (40.0, 2, 4.1)] {
        let params = config(l, 0.02, seed).params;
        let grid = GridSpec::default_for(&params);
        let v = sample_disorder(seed, &grid, params.w);
        let res = build_hamiltonian(&params, &grid, &v, phi).and_then(|h| {
            let s = build_hamiltonian(&params, &grid, &v, phi + 2.0 * PI)?;
            Ok((
                h.hermiticity_deviation(),
                gauge_shift_check(&s, &h, &grid, l)?,
                h.dim(),
            ))
        });
        match res {
            Ok((herm, gauge, n)) => c.check(
                herm <= 1e-12 && gauge <= 1e-12,
                format!("L={l} n={n}: Hermiticity {herm:.1e}, gauge identity {gauge:.1e}"),
            ),
            Err(e) => c.error("gauge", e),
        }
    }

    let params = PhysicalParams {
        l: 2.0,
        w: 0.1,
        ..Default::default()
    };
    let grid = GridSpec {
        x_min: -3.0,
        x_max: 2.75,
        hx: 0.25,
        ny: 8,
    };
    let window = EnergyWindow::new(0.55, 1.45).expect("valid window");
    let mut worst = 0.0f64;
    let mut n = 0;
    for seed in 0..20u64 {
        let phi = 2.0 * PI * seed as f64 / 20.0;
        let v = sample_disorder(seed, &grid, params.w);
        match build_hamiltonian(&params, &grid, &v, phi).and_then(|h| {
            n = h.dim();
            dense_agreement(&h, &window)
        }) {
            Ok(d) => worst = worst.max(d),
            Err(e) => c.error("dense comparison", e),
        }
    }
    c.check(
        worst <= 1e-9 && n <= 400,
        format!("Lanczos vs dense on 20 matrices with n = {n}: max deviation {worst:.1e}"),
    );
    let dh = build_flux_derivative(&params, &grid, 0.3);
    c.check(
        dh.hermiticity_deviation() <= 1e-12,
        format!("∂H/∂Φ Hermiticity {:.1e}", dh.hermiticity_deviation()),
    );

    let small = RunConfig {
        params: PhysicalParams {
            l: 8.0,
            ..Default::default()
        },
        phi_steps: 64,
        ..Default::default()
    };
    for cmd in [
        Command::Sweep,
        Command::Index,
        Command::Decouple,
        Command::Toy,
    ] {
        let a = dir.join(format!("{cmd:?}_a"));
        let b = dir.join(format!("{cmd:?}_b"));
        let first = run(
            cmd,
            &RunConfig {
                out: a.clone(),
                ..small.clone()
            },
        );
        let second = RunConfig::load(&a.join("config.json")).and_then(|cfg| {
            run(
                cmd,
                &RunConfig {
                    out: b.clone(),
                    ..cfg
                },
            )
        });
        match (first, second) {
            (Ok(x), Ok(y)) => {
                let same = same_files(&a, &b).unwrap_or(false);
                c.check(
                    same && x.pass == y.pass,
                    format!(
                        "{cmd:?}: {} artifacts byte-identical on rerun from config.json",
                        x.artifacts.len()
                    ),
                );
            }
            (Err(e), _) | (_, Err(e)) => c.error("determinism", e),
        }
    }
    c
}

fn main() -> ExitCode {
    let started = Instant::now();
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create a scratch directory: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut criteria = vec![criterion_1(), criterion_2()];

    let mut runs = Vec::new();
    let mut sweep_errors = Criterion::new(0, "sweeps");
    for l in [20.0, 40.0] {
        for seed in [None, Some(1), Some(2), Some(3)] {
            match sweep(l, seed) {
                Ok(r) => {
                    eprintln!("  sweep {} done in {:.0} s", r.tag(), r.seconds);
                    runs.push(r);
                }
                Err(e) => sweep_errors.error(&format!("sweep L={l} seed={seed:?}"), e),
            }
        }
    }
    let mut flow = criteria_3_to_7(&runs);
    if !sweep_errors.pass {
        for c in &mut flow {
            c.pass = false;
            c.detail.extend(sweep_errors.detail.iter().cloned());
        }
    }
    criteria.extend(flow);
    criteria.push(criterion_8(dir.path()));
    criteria.push(criterion_9(&runs, dir.path()));

    let mut all = true;
    for c in &criteria {
        all &= c.pass;
        println!(
            "criterion {}: {} ({})",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.name
        );
        for d in &c.detail {
            println!("{d}");
        }
    }
    println!(
        "acceptance: {} in {:.0} s",
        if all { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
