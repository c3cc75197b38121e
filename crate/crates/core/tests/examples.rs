// Each example is compiled into its own module and its result checked.

use std::f64::consts::PI;

#[allow(dead_code)]
mod hamiltonian {
    include!("../examples/hamiltonian.rs");
}
#[allow(dead_code)]
mod edge_dispersion {
    include!("../examples/edge_dispersion.rs");
}
#[allow(dead_code)]
mod flux_sweep {
    include!("../examples/flux_sweep.rs");
}
#[allow(dead_code)]
mod level_spacing {
    include!("../examples/level_spacing.rs");
}
#[allow(dead_code)]
mod relative_index {
    include!("../examples/relative_index.rs");
}
#[allow(dead_code)]
mod decoupling {
    include!("../examples/decoupling.rs");
}
#[allow(dead_code)]
mod toy_model {
    include!("../examples/toy_model.rs");
}
#[allow(dead_code)]
mod batch_run {
    include!("../examples/batch_run.rs");
}

#[test]
fn hamiltonian_checks() {
    let c = hamiltonian::run_example().unwrap();
    assert_eq!(c.hermiticity, 0.0);
    assert!(c.gauge <= 1e-12, "{}", c.gauge);
    assert!(c.derivative <= 1e-6, "{}", c.derivative);
    assert!(c.bandwidth < c.dim);
}

#[test]
fn edge_dispersion_table() {
    let (table, bound) = edge_dispersion::run_example().unwrap();
    assert!((table.eps[0][0] - 0.5).abs() < 1e-3);
    assert_eq!(table.monotonicity_violations(1e-12), 0);
    assert!(bound.fermi.v_f > 0.0);
    let alpha = bound.alpha.unwrap();
    assert!(alpha > 0.0 && alpha < bound.fermi.v_f);
}

#[test]
fn flux_sweep_report() {
    let (bs, r) = flux_sweep::run_example().unwrap();
    assert!(!bs.branches.is_empty());
    assert!(r.flow.min_l_slope > 0.0);
    assert!(r.flow.max_l_slope <= 3f64.sqrt());
    assert!(r.shift.residual <= 1e-7);
    assert_eq!(r.q_f, 1);
    assert!(r.sigma_e_error <= 2.0 / bs.l);
}

#[test]
fn level_spacing_within_bounds() {
    let s = level_spacing::run_example().unwrap();
    assert!(!s.rows.is_empty());
    assert_eq!(s.violations, 0);
    for r in &s.rows {
        assert!(r.spacing <= 2.0 * PI * 3f64.sqrt() / 30.0);
    }
}

#[test]
fn relative_index_counts() {
    let (ind, triples, crossings) = relative_index::run_example().unwrap();
    assert_eq!(ind, -4);
    assert!(triples.pass());
    assert_eq!(crossings.len(), 5);
    for c in crossings {
        assert!(c.equal);
        assert_eq!(c.q_index, 1);
    }
}

#[test]
fn decoupling_decays() {
    let t = decoupling::run_example().unwrap();
    assert!(t.monotone);
    assert!(t.fitted_slope.unwrap() < 0.0);
    assert!(t
        .rows
        .iter()
        .filter(|r| r.d >= 4.0)
        .all(|r| r.projector_deviation < 1.0));
}

#[test]
fn toy_model_is_exact() {
    let r = toy_model::run_example().unwrap();
    assert!(r.pass(128));
    assert!(r.shift_residual <= 1e-12);
    assert_eq!(r.q_f, vec![1; 5]);
}

#[test]
fn batch_run_writes_artifacts() {
    let o = batch_run::run_example().unwrap();
    assert!(o.pass, "{}", o.summary);
    assert!(o.artifacts.iter().any(|p| p.ends_with("config.json")));
    assert!(o.artifacts.iter().all(|p| p.exists()));
}
