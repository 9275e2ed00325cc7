use std::f64::consts::TAU;
use std::sync::Arc;

use dhm_core::solver::{dirac_project, solve, SolverConfig, Termination};
use dhm_core::spinor::Spinor;
use dhm_core::{DomainChart, MapField, TargetGeometry, TwistedSpinorField};

fn perturbed(chart: Arc<DomainChart>) -> (MapField, TwistedSpinorField) {
    let phi = MapField::from_fn(chart.clone(), TargetGeometry::sphere(2), |[x, y]| {
        vec![0.05 * (2.0 * TAU * x).sin() + 0.03 * (3.0 * TAU * y).cos(), 0.04 * (2.0 * TAU * (x + y)).cos(), 1.0]
    })
    .unwrap();
    let s = Spinor::from_parts(0.6, 0.1, -0.2, 0.3);
    let psi = TwistedSpinorField::from_fn(chart, 3, |_| vec![s, Spinor::ZERO, Spinor::ZERO]).unwrap();
    let psi = psi.projected_tangent(&phi);
    (phi, psi)
}

#[test]
fn map_only_flow_decreases_dirichlet_energy() {
    let chart = Arc::new(DomainChart::torus(32, 1.0).unwrap());
    let (phi, psi) = perturbed(chart.clone());
    let mut cfg = SolverConfig::for_chart(&chart);
    cfg.spinor_norm_target = 0.0;
    cfg.max_iters = 400;
    let out = solve(&phi, &psi, &cfg).unwrap();
    let d: Vec<f64> = out.report.trace.iter().map(|r| r.dirichlet).collect();
    assert_eq!(d.len(), 401);
    assert!(d.windows(2).all(|w| w[1] <= w[0]));
    assert!(d[400] < 0.05 * d[0]);
}

#[test]
fn coupled_flow_reduces_residual() {
    let chart = Arc::new(DomainChart::torus(32, 1.0).unwrap());
    let (phi, psi) = perturbed(chart.clone());
    let mut cfg = SolverConfig::for_chart(&chart);
    cfg.spinor_norm_target = 0.5;
    cfg.max_iters = 500;
    let out = solve(&phi, &psi, &cfg).unwrap();
    let first = out.report.trace.first().unwrap().combined_residual();
    let last = out.report.trace.last().unwrap().combined_residual();
    assert!(last < 1e-2 * first, "{first:.3e} -> {last:.3e}");
    assert!((out.psi.l2_norm() - 0.5).abs() < 1e-12);
}

#[test]
fn exact_start_converges_immediately() {
    let chart = Arc::new(DomainChart::torus(16, 1.0).unwrap());
    let phi = MapField::constant(chart.clone(), TargetGeometry::sphere(2), &[0.0, 0.0, 1.0]).unwrap();
    let s = Spinor::from_parts(0.2, 0.0, 0.1, -0.4);
    let psi = TwistedSpinorField::from_fn(chart.clone(), 3, |_| vec![s, s * 0.5, Spinor::ZERO]).unwrap();
    let out = solve(&phi, &psi, &SolverConfig::for_chart(&chart)).unwrap();
    assert_eq!(out.report.termination, Termination::Converged);
    assert_eq!(out.report.iterations, 0);
}

#[test]
fn solve_is_deterministic() {
    let chart = Arc::new(DomainChart::torus(16, 1.0).unwrap());
    let (phi, psi) = perturbed(chart.clone());
    let mut cfg = SolverConfig::for_chart(&chart);
    cfg.max_iters = 60;
    let a = solve(&phi, &psi, &cfg).unwrap();
    let b = solve(&phi, &psi, &cfg).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.phi, b.phi);
}

#[test]
fn projection_from_seed_on_a_curved_map() {
    let chart = Arc::new(DomainChart::torus(24, 1.0).unwrap());
    let (phi, _) = perturbed(chart.clone());
    let mut cfg = SolverConfig::for_chart(&chart);
    cfg.power_iters = 6;
    let zero = TwistedSpinorField::zeros(chart, 3);
    let p = dirac_project(&phi, &zero, &cfg).unwrap();
    assert!(p.psi.tangency_defect(&phi) <= 1e-12);
    assert!(p.residual_ratio < 0.5, "{}", p.residual_ratio);
}
