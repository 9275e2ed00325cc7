//! Relaxation toward Dirac-harmonic pairs.
//!
//! The action is indefinite in `ψ`, so only the map is evolved by a gradient
//! flow: projected explicit Euler on `φ_t = τ(φ) − R(φ, ψ)`. The spinor is
//! kept in the near-kernel of the Dirac operator along the current map by
//! shifted inverse iteration on `B*B`, where `B = T ∂̸ T` and `T` is the
//! pointwise tangential projection.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{periodic_derivative, Axis, DomainChart};
use crate::error::{DhmError, Result};
use crate::fields::{
    action, curvature_term_unchecked, el_residual_on, energy, project_spinor_comps, tension, MapField,
    TwistedSpinorField,
};
use crate::spinor::{dirac_from_derivatives, Spinor};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Time step of the map flow; must not exceed `h²/8`.
    pub dt: f64,
    pub max_iters: usize,
    /// Convergence threshold on the sup norms of both residuals.
    pub residual_tol: f64,
    /// Refresh the spinor by [`dirac_project`] every this many steps.
    pub reproject_every: usize,
    /// L² norm imposed on the spinor; 0 runs the pure harmonic map flow with `ψ = 0`.
    pub spinor_norm_target: f64,
    /// Inverse-iteration steps per spinor refresh.
    pub power_iters: usize,
    /// Seed for the random starting spinor; 0 disables random seeding.
    pub seed: u64,
    /// Relative residual at which the inner conjugate-gradient solve stops.
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Record a trace row every this many steps (the last step is always recorded).
    pub trace_every: usize,
}

impl SolverConfig {
    /// Defaults for the given chart, with `dt` at the stability bound.
    pub fn for_chart(chart: &DomainChart) -> Self {
        Self {
            dt: stability_bound(chart),
            max_iters: 2000,
            residual_tol: 1e-6,
            reproject_every: 20,
            spinor_norm_target: 1.0,
            power_iters: 2,
            seed: 1,
            inner_tol: 1e-10,
            inner_max_iters: 5000,
            trace_every: 1,
        }
    }

    pub fn validate(&self, chart: &DomainChart) -> Result<()> {
        let bound = stability_bound(chart);
        if !(self.dt > 0.0 && self.dt <= bound) {
            return Err(DhmError::Precondition(format!(
                "time step {:.3e} outside (0, h^2/8 = {bound:.3e}]",
                self.dt
            )));
        }
        if !(self.residual_tol > 0.0) {
            return Err(DhmError::Precondition("residual tolerance must be positive".into()));
        }
        if self.reproject_every == 0 || self.power_iters == 0 || self.trace_every == 0 {
            return Err(DhmError::Precondition(
                "reproject_every, power_iters and trace_every must be at least 1".into(),
            ));
        }
        if !(self.spinor_norm_target >= 0.0 && self.spinor_norm_target.is_finite()) {
            return Err(DhmError::Precondition("spinor norm target must be finite and nonnegative".into()));
        }
        if !(self.inner_tol > 0.0) || self.inner_max_iters == 0 {
            return Err(DhmError::Precondition("inner solver tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// `h²/8`.
pub fn stability_bound(chart: &DomainChart) -> f64 {
    chart.h() * chart.h() / 8.0
}

// ----------------------------------------------------------------- map flow

/// One projected Euler step `φ′ = π(φ + dt (τ(φ) − R(φ, ψ)))`.
///
/// Nodes whose stencil is undefined (the boundary ring of a disk) are held
/// fixed.
pub fn flow_step(phi: &MapField, psi: &TwistedSpinorField, config: &SolverConfig) -> Result<MapField> {
    let chart = phi.chart();
    config.validate(chart)?;
    let psi = sanitized(phi, psi);
    let tau = tension(phi);
    let r = curvature_term_unchecked(phi, &psi);
    let target = phi.target();
    let k = phi.k();
    let mut comps = phi.comps().to_vec();
    let mut p = vec![0.0; k];
    for idx in 0..chart.len() {
        if !chart.stencil_valid(idx) {
            continue;
        }
        for i in 0..k {
            p[i] = comps[i][idx] + config.dt * (tau[i][idx] - r[i][idx]);
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(DhmError::Diverged { iteration: 0 });
        }
        let q = target.project_point(&p).map_err(|_| DhmError::Diverged { iteration: 0 })?;
        for i in 0..k {
            comps[i][idx] = q[i];
        }
    }
    MapField::new(chart.clone(), target, comps)
}

/// Tangent copy of `ψ` with undefined values (disk boundary ring) zeroed.
fn sanitized(phi: &MapField, psi: &TwistedSpinorField) -> TwistedSpinorField {
    let chart = phi.chart();
    let mut comps = psi.comps().to_vec();
    for c in comps.iter_mut() {
        for (idx, s) in c.iter_mut().enumerate() {
            if !s.is_finite() || !chart.stencil_valid(idx) {
                *s = Spinor::ZERO;
            }
        }
    }
    project_spinor_comps(phi, &mut comps);
    TwistedSpinorField::new(chart.clone(), comps).expect("same shape as the input")
}

// ---------------------------------------------------------- spinor projection

/// `B x = T ∂̸ T x` restricted to stencil-valid nodes.
struct DiracOperator<'a> {
    phi: &'a MapField,
    chart: &'a DomainChart,
}

impl DiracOperator<'_> {
    fn apply(&self, x: &[Vec<Spinor>]) -> Vec<Vec<Spinor>> {
        let g = self.chart.grid();
        let mut out: Vec<Vec<Spinor>> = x
            .iter()
            .map(|c| {
                let dx = periodic_derivative(g, c, Axis::X);
                let dy = periodic_derivative(g, c, Axis::Y);
                dx.iter().zip(&dy).map(|(a, b)| dirac_from_derivatives(*a, *b)).collect()
            })
            .collect();
        project_spinor_comps(self.phi, &mut out);
        for c in out.iter_mut() {
            for (idx, s) in c.iter_mut().enumerate() {
                if !self.chart.stencil_valid(idx) {
                    *s = Spinor::ZERO;
                }
            }
        }
        out
    }
}

fn dot(a: &[Vec<Spinor>], b: &[Vec<Spinor>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(s, t)| s.re_inner(t)).sum::<f64>()).sum()
}

fn axpy(y: &mut [Vec<Spinor>], a: f64, x: &[Vec<Spinor>]) {
    for (yc, xc) in y.iter_mut().zip(x) {
        for (s, t) in yc.iter_mut().zip(xc) {
            *s = *s + *t * a;
        }
    }
}

fn scale(x: &mut [Vec<Spinor>], a: f64) {
    for c in x.iter_mut() {
        for s in c.iter_mut() {
            *s = *s * a;
        }
    }
}

/// Conjugate gradients for `(B² + σ) y = b`, warm-started at `y`.
fn shifted_normal_cg(
    op: &DiracOperator,
    sigma: f64,
    b: &[Vec<Spinor>],
    y: &mut Vec<Vec<Spinor>>,
    tol: f64,
    max_iters: usize,
) -> Result<usize> {
    let apply = |v: &[Vec<Spinor>]| {
        let mut out = op.apply(&op.apply(v));
        axpy(&mut out, sigma, v);
        out
    };
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        y.iter_mut().for_each(|c| c.iter_mut().for_each(|s| *s = Spinor::ZERO));
        return Ok(0);
    }
    let mut r = b.to_vec();
    axpy(&mut r, -1.0, &apply(y));
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..max_iters {
        if rr.sqrt() <= tol * b_norm {
            return Ok(it);
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(DhmError::LinearSolve { iterations: it, residual: rr.sqrt() / b_norm });
        }
        let alpha = rr / pap;
        axpy(y, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pc, rc) in p.iter_mut().zip(&r) {
            for (s, t) in pc.iter_mut().zip(rc) {
                *s = *t + *s * beta;
            }
        }
    }
    if rr.sqrt() <= tol * b_norm {
        Ok(max_iters)
    } else {
        Err(DhmError::LinearSolve { iterations: max_iters, residual: rr.sqrt() / b_norm })
    }
}

/// Smooth random spinor from the lowest Fourier modes of the chart, so the
/// start carries no grid-scale content (centered differences annihilate the
/// checkerboard modes, which would otherwise pass for kernel elements).
fn smooth_random_spinor(chart: &Arc<DomainChart>, k: usize, seed: u64) -> Vec<Vec<Spinor>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wave = 2.0 * std::f64::consts::PI / chart.grid().side();
    let mut coef = Vec::new();
    for kx in -1i32..=1 {
        for ky in -1i32..=1 {
            let c: Vec<[f64; 8]> = (0..k).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
            coef.push(([kx as f64 * wave, ky as f64 * wave], c));
        }
    }
    (0..k)
        .map(|i| {
            (0..chart.len())
                .map(|idx| {
                    let [x, y] = chart.point(idx);
                    let mut s = Spinor::ZERO;
                    for (kv, c) in &coef {
                        let (sn, cs) = (kv[0] * x + kv[1] * y).sin_cos();
                        let a = &c[i];
                        s += Spinor::from_parts(a[0], a[1], a[2], a[3]) * cs + Spinor::from_parts(a[4], a[5], a[6], a[7]) * sn;
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Result of a spinor refresh.
#[derive(Debug, Clone)]
pub struct DiracProjection {
    pub psi: TwistedSpinorField,
    /// `|Bψ| / |ψ|`, an estimate of the smallest singular value of `B`.
    pub residual_ratio: f64,
    /// Conjugate-gradient iterations summed over the inverse-iteration steps.
    pub inner_iterations: usize,
}

/// Moves `ψ_init` toward the kernel of the Dirac operator along `φ` and
/// rescales it to `config.spinor_norm_target` in L².
pub fn dirac_project(phi: &MapField, psi_init: &TwistedSpinorField, config: &SolverConfig) -> Result<DiracProjection> {
    let chart = phi.chart().clone();
    if psi_init.k() != phi.k() {
        return Err(DhmError::Domain("spinor component count does not match the map".into()));
    }
    let mut x = sanitized(phi, psi_init).into_comps();
    if dot(&x, &x) == 0.0 {
        if config.seed == 0 {
            return Err(DhmError::Precondition("zero initial spinor and no random seed".into()));
        }
        x = smooth_random_spinor(&chart, phi.k(), config.seed);
        project_spinor_comps(phi, &mut x);
        for c in x.iter_mut() {
            for (idx, s) in c.iter_mut().enumerate() {
                if !chart.stencil_valid(idx) {
                    *s = Spinor::ZERO;
                }
            }
        }
    }
    let op = DiracOperator { phi, chart: &chart };
    // Well below the lowest nonzero eigenvalue of B² on a flat torus.
    let sigma = 1e-2 * (2.0 * std::f64::consts::PI / chart.grid().side()).powi(2);
    let mut inner = 0;
    let x_norm = dot(&x, &x).sqrt();
    scale(&mut x, 1.0 / x_norm);
    for _ in 0..config.power_iters {
        let mut b = x.clone();
        scale(&mut b, sigma);
        let mut y = x.clone();
        inner += shifted_normal_cg(&op, sigma, &b, &mut y, config.inner_tol, config.inner_max_iters)
            .map_err(|e| match e {
                DhmError::LinearSolve { iterations, residual } => {
                    DhmError::LinearSolve { iterations: inner + iterations, residual }
                }
                other => other,
            })?;
        let norm = dot(&y, &y).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(DhmError::LinearSolve { iterations: inner, residual: f64::NAN });
        }
        scale(&mut y, 1.0 / norm);
        x = y;
    }
    let bx = op.apply(&x);
    let residual_ratio = (dot(&bx, &bx) / dot(&x, &x)).sqrt();
    let psi = TwistedSpinorField::new(chart.clone(), x)?;
    let l2 = psi.l2_norm();
    let psi = psi.scaled(config.spinor_norm_target / l2);
    Ok(DiracProjection { psi, residual_ratio, inner_iterations: inner })
}

// -------------------------------------------------------------------- solve

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    Diverged,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIters => "max_iters",
            Termination::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub action: f64,
    pub energy: f64,
    pub dirichlet: f64,
    pub map_residual: f64,
    pub spinor_residual: f64,
    /// Latest `|Bψ|/|ψ|` from a spinor refresh.
    pub singular_value: Option<f64>,
    pub spinor_l4: f64,
}

impl TraceRow {
    /// `sup |τ − R| + sup |D̸ψ|`.
    pub fn combined_residual(&self) -> f64 {
        self.map_residual + self.spinor_residual
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub trace: Vec<TraceRow>,
    pub termination: Termination,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub phi: MapField,
    pub psi: TwistedSpinorField,
    pub report: SolveReport,
}

fn record(phi: &MapField, psi: &TwistedSpinorField, iteration: usize, sv: Option<f64>) -> Result<(TraceRow, bool)> {
    let mask = phi.chart().interior_mask();
    let res = el_residual_on(phi, psi, &mask);
    let row = TraceRow {
        iteration,
        action: action(phi, psi)?,
        energy: energy(phi, psi, None)?,
        dirichlet: phi.dirichlet_energy(),
        map_residual: res.map.sup,
        spinor_residual: res.spinor.sup,
        singular_value: sv,
        spinor_l4: psi.l4_norm(),
    };
    let finite = row.combined_residual().is_finite() && row.action.is_finite();
    Ok((row, finite))
}

/// Alternates [`flow_step`] with periodic [`dirac_project`] refreshes until
/// both residual sup norms are below `residual_tol`, `max_iters` steps have
/// run, or the flow breaks down. A breakdown is reported through
/// [`Termination::Diverged`] so that the partial trace survives.
pub fn solve(phi0: &MapField, psi0: &TwistedSpinorField, config: &SolverConfig) -> Result<SolveOutcome> {
    config.validate(phi0.chart())?;
    psi0.check_tangent(phi0).or_else(|e| match e {
        DhmError::Precondition(_) => Ok(()),
        other => Err(other),
    })?;
    let map_only = config.spinor_norm_target == 0.0;
    let mut phi = phi0.clone();
    let mut psi = if map_only { TwistedSpinorField::zeros(phi.chart().clone(), phi.k()) } else { sanitized(&phi, psi0) };
    let mut sv = None;
    let mut trace = Vec::new();
    let converged = |row: &TraceRow| row.map_residual <= config.residual_tol && row.spinor_residual <= config.residual_tol;

    let (row, finite) = record(&phi, &psi, 0, sv)?;
    trace.push(row);
    if !finite {
        return Ok(SolveOutcome { phi, psi, report: SolveReport { trace, termination: Termination::Diverged, iterations: 0 } });
    }
    if converged(&row) {
        return Ok(SolveOutcome { phi, psi, report: SolveReport { trace, termination: Termination::Converged, iterations: 0 } });
    }
    for it in 1..=config.max_iters {
        let diverged = |trace: Vec<TraceRow>, phi: MapField, psi: TwistedSpinorField| SolveOutcome {
            phi,
            psi,
            report: SolveReport { trace, termination: Termination::Diverged, iterations: it },
        };
        phi = match flow_step(&phi, &psi, config) {
            Ok(p) => p,
            Err(DhmError::Diverged { .. }) => return Ok(diverged(trace, phi, psi)),
            Err(e) => return Err(e),
        };
        if !map_only {
            psi = sanitized(&phi, &psi);
            if it % config.reproject_every == 0 {
                let proj = dirac_project(&phi, &psi, config)?;
                psi = proj.psi;
                sv = Some(proj.residual_ratio);
            }
        }
        let last = it == config.max_iters;
        let check = it % config.trace_every == 0 || last || it % config.reproject_every == 0;
        if !check {
            continue;
        }
        let (row, finite) = record(&phi, &psi, it, sv)?;
        if !finite {
            trace.push(row);
            return Ok(diverged(trace, phi, psi));
        }
        let done = converged(&row);
        if it % config.trace_every == 0 || last || done {
            trace.push(row);
        }
        if done {
            return Ok(SolveOutcome {
                phi,
                psi,
                report: SolveReport { trace, termination: Termination::Converged, iterations: it },
            });
        }
    }
    Ok(SolveOutcome {
        phi,
        psi,
        report: SolveReport { trace, termination: Termination::MaxIters, iterations: config.max_iters },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::TargetGeometry;

    fn chart(n: usize) -> Arc<DomainChart> {
        Arc::new(DomainChart::torus(n, 1.0).unwrap())
    }

    #[test]
    fn rejects_unstable_steps() {
        let c = chart(16);
        let mut cfg = SolverConfig::for_chart(&c);
        assert!(cfg.validate(&c).is_ok());
        cfg.dt *= 1.01;
        assert!(matches!(cfg.validate(&c), Err(DhmError::Precondition(_))));
    }

    #[test]
    fn constant_map_is_a_fixed_point() {
        let c = chart(16);
        let phi = MapField::constant(c.clone(), TargetGeometry::sphere(2), &[0.0, 1.0, 0.0]).unwrap();
        let psi = TwistedSpinorField::zeros(c.clone(), 3);
        let next = flow_step(&phi, &psi, &SolverConfig::for_chart(&c)).unwrap();
        assert_eq!(next, phi);
    }

    #[test]
    fn constant_map_kernel_is_recovered() {
        let c = chart(16);
        let phi = MapField::constant(c.clone(), TargetGeometry::sphere(2), &[0.0, 0.0, 1.0]).unwrap();
        let psi = TwistedSpinorField::zeros(c.clone(), 3);
        let mut cfg = SolverConfig::for_chart(&c);
        cfg.power_iters = 6;
        let out = dirac_project(&phi, &psi, &cfg).unwrap();
        assert!(out.residual_ratio <= 1e-8, "{}", out.residual_ratio);
        assert!((out.psi.l2_norm() - 1.0).abs() <= 1e-12);
        assert!(out.psi.tangency_defect(&phi) <= 1e-10);
        cfg.seed = 0;
        assert!(matches!(dirac_project(&phi, &psi, &cfg), Err(DhmError::Precondition(_))));
    }
}
