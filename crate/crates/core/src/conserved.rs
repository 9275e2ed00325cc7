//! Identities satisfied by Dirac-harmonic pairs, as numerical defects.
//!
//! Unconditional identities (Weitzenböck, self-adjointness) hold for any
//! smooth fields up to discretisation error. The others (symmetry and
//! conservation of the energy–momentum tensor, holomorphy of the quadratic
//! differential, Bochner, Pohozaev) only hold on solutions, which makes them
//! useful both as checks and as negative controls.

use std::sync::Arc;

use num_complex::Complex64;

use crate::chart::{Axis, DomainChart, FieldValue, MoebiusMap, Topology};
use crate::error::{DhmError, Result};
use crate::fields::{
    action, covariant_derivative, dirac_along_map_unchecked, energy, MapField, Norms, TwistedSpinorField,
};
use crate::spinor::{e1, e2, e_alpha, Spinor};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn field(chart: &Arc<DomainChart>, comps: Vec<Vec<Spinor>>) -> TwistedSpinorField {
    TwistedSpinorField::new(chart.clone(), comps).expect("operator output matches the chart")
}

fn re_pair(a: &[Vec<Spinor>], b: &[Vec<Spinor>], idx: usize) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[idx].re_inner(&y[idx])).sum()
}

fn sup_on(values: impl Iterator<Item = f64>, mask: &[bool]) -> f64 {
    let mut sup = 0.0f64;
    for (v, m) in values.zip(mask) {
        if *m {
            sup = if v.is_nan() || sup.is_nan() { f64::NAN } else { sup.max(v) };
        }
    }
    sup
}

// ------------------------------------------------------ energy–momentum tensor

/// `T_αβ = 2⟨φ_α, φ_β⟩ − δ_αβ |dφ|² + Re⟨ψ, e_α·∇̃_β ψ⟩`.
#[derive(Debug, Clone)]
pub struct EnergyMomentum {
    chart: Arc<DomainChart>,
    /// Components indexed `[α][β][node]`.
    pub t: [[Vec<f64>; 2]; 2],
}

pub fn energy_momentum(phi: &MapField, psi: &TwistedSpinorField) -> Result<EnergyMomentum> {
    psi.check_tangent(phi)?;
    let chart = phi.chart().clone();
    let n = chart.len();
    let d = phi.tangent_derivatives();
    let nabla = [covariant_derivative(phi, psi, Axis::X), covariant_derivative(phi, psi, Axis::Y)];
    let mut t: [[Vec<f64>; 2]; 2] = Default::default();
    for (a, axis) in Axis::BOTH.iter().enumerate() {
        for b in 0..2 {
            t[a][b] = (0..n)
                .map(|idx| {
                    let mut g = [[0.0; 2]; 2];
                    for i in 0..phi.k() {
                        for (p, q) in [(0, 0), (0, 1), (1, 1)] {
                            g[p][q] += d[p][i][idx] * d[q][i][idx];
                        }
                    }
                    g[1][0] = g[0][1];
                    let trace = if a == b { g[0][0] + g[1][1] } else { 0.0 };
                    let spin: f64 = (0..psi.k())
                        .map(|i| psi.comps()[i][idx].re_inner(&e_alpha(*axis, nabla[b][i][idx])))
                        .sum();
                    2.0 * g[a][b] - trace + spin
                })
                .collect();
        }
    }
    Ok(EnergyMomentum { chart, t })
}

impl EnergyMomentum {
    pub fn chart(&self) -> &Arc<DomainChart> {
        &self.chart
    }

    /// Norms of `T₁₂ − T₂₁` on `mask`.
    pub fn symmetry_defect(&self, mask: &[bool]) -> Norms {
        let dens: Vec<f64> = self.t[0][1].iter().zip(&self.t[1][0]).map(|(a, b)| (a - b).powi(2)).collect();
        Norms::of_density(&self.chart, &dens, mask)
    }

    /// Norms of the trace `T₁₁ + T₂₂`.
    pub fn trace_defect(&self, mask: &[bool]) -> Norms {
        let dens: Vec<f64> = self.t[0][0].iter().zip(&self.t[1][1]).map(|(a, b)| (a + b).powi(2)).collect();
        Norms::of_density(&self.chart, &dens, mask)
    }
}

/// `Σ_α D_α T_αβ` for `β = 1, 2`.
pub fn em_divergence(em: &EnergyMomentum) -> [Vec<f64>; 2] {
    let c = &em.chart;
    [0, 1].map(|b| {
        let dx = c.derivative(&em.t[0][b], Axis::X);
        let dy = c.derivative(&em.t[1][b], Axis::Y);
        dx.iter().zip(&dy).map(|(u, v)| u + v).collect()
    })
}

/// Norms of the divergence vector field on `mask`.
pub fn em_divergence_norms(em: &EnergyMomentum, mask: &[bool]) -> Norms {
    let [a, b] = em_divergence(em);
    let dens: Vec<f64> = a.iter().zip(&b).map(|(u, v)| u * u + v * v).collect();
    Norms::of_density(&em.chart, &dens, mask)
}

// ------------------------------------------------------ quadratic differential

/// Coefficient `T(z)` of the quadratic differential `T dz²`.
#[derive(Debug, Clone)]
pub struct QuadraticDifferential {
    chart: Arc<DomainChart>,
    pub t: Vec<Complex64>,
}

impl QuadraticDifferential {
    pub fn chart(&self) -> &Arc<DomainChart> {
        &self.chart
    }
}

/// Map part `|φ_x|² − |φ_y|² − 2i⟨φ_x, φ_y⟩` from two derivative vectors.
pub fn hopf_map_part(fx: &[f64], fy: &[f64]) -> Complex64 {
    let a: f64 = fx.iter().map(|v| v * v).sum::<f64>() - fy.iter().map(|v| v * v).sum::<f64>();
    let b: f64 = fx.iter().zip(fy).map(|(u, v)| u * v).sum();
    Complex64::new(a, -2.0 * b)
}

/// `T = (|φ_x|² − |φ_y|² − 2i⟨φ_x, φ_y⟩) + (Re⟨ψ, e₁·∇̃_x ψ⟩ − i Re⟨ψ, e₁·∇̃_y ψ⟩)`.
pub fn hopf_differential(phi: &MapField, psi: &TwistedSpinorField) -> Result<QuadraticDifferential> {
    psi.check_tangent(phi)?;
    let chart = phi.chart().clone();
    let d = phi.tangent_derivatives();
    let nx = covariant_derivative(phi, psi, Axis::X);
    let ny = covariant_derivative(phi, psi, Axis::Y);
    let t = (0..chart.len())
        .map(|idx| {
            let fx: Vec<f64> = (0..phi.k()).map(|i| d[0][i][idx]).collect();
            let fy: Vec<f64> = (0..phi.k()).map(|i| d[1][i][idx]).collect();
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..psi.k() {
                let p = psi.comps()[i][idx];
                s += Complex64::new(p.re_inner(&e1(nx[i][idx])), -p.re_inner(&e1(ny[i][idx])));
            }
            hopf_map_part(&fx, &fy) + s
        })
        .collect();
    Ok(QuadraticDifferential { chart, t })
}

/// Norms of `∂̄T = (D_x T + i D_y T)/2` on `mask`.
pub fn dbar_norms(q: &QuadraticDifferential, mask: &[bool]) -> Norms {
    let dx = q.chart.derivative(&q.t, Axis::X);
    let dy = q.chart.derivative(&q.t, Axis::Y);
    let dens: Vec<f64> = dx.iter().zip(&dy).map(|(a, b)| ((*a + I * b) * 0.5).norm_sqr()).collect();
    Norms::of_density(&q.chart, &dens, mask)
}

/// `sup |∂̄T|` over the interior mask of the chart.
pub fn dbar_defect(q: &QuadraticDifferential) -> f64 {
    dbar_norms(q, &q.chart.interior_mask()).sup
}

// ------------------------------------------------------ Weitzenböck and Bochner

/// `e₁e₂ · R(dφ(e₁), dφ(e₂))ψ`, the curvature term of the Weitzenböck formula.
fn weitzenboeck_curvature(phi: &MapField, psi: &TwistedSpinorField) -> Vec<Vec<Spinor>> {
    let chart = phi.chart();
    let k = phi.k();
    let n = chart.len();
    let target = phi.target();
    let mut out = vec![vec![Spinor::ZERO; n]; k];
    if !target.is_sphere() {
        return out;
    }
    let d = phi.tangent_derivatives();
    for idx in 0..n {
        let p = phi.value(idx);
        let x: Vec<f64> = (0..k).map(|i| d[0][i][idx]).collect();
        let y: Vec<f64> = (0..k).map(|i| d[1][i][idx]).collect();
        for j in 0..k {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            let col = target.curvature(&p, &x, &y, &target.tangent_project(&p, &e));
            let s = e1(e2(psi.comps()[j][idx]));
            for m in 0..k {
                out[m][idx] += s * col[m];
            }
        }
    }
    out
}

/// Both sides of `D̸²ψ = −Σ_α ∇̃_α∇̃_α ψ + ½ Σ_{α,β} e_α e_β R(φ_α, φ_β)ψ`
/// (the scalar-curvature term vanishes on a flat chart).
pub fn weitzenboeck_sides(phi: &MapField, psi: &TwistedSpinorField) -> Result<(Vec<Vec<Spinor>>, Vec<Vec<Spinor>>)> {
    psi.check_tangent(phi)?;
    let chart = phi.chart();
    let (d1, _) = dirac_along_map_unchecked(phi, psi);
    let (lhs, _) = dirac_along_map_unchecked(phi, &field(chart, d1));
    let mut rhs = weitzenboeck_curvature(phi, psi);
    for axis in Axis::BOTH {
        let first = field(chart, covariant_derivative(phi, psi, axis));
        let second = covariant_derivative(phi, &first, axis);
        for (r, s) in rhs.iter_mut().zip(&second) {
            for (a, b) in r.iter_mut().zip(s) {
                *a = *a - *b;
            }
        }
    }
    Ok((lhs, rhs))
}

/// `sup |LHS − RHS|` of the Weitzenböck formula over the interior mask.
pub fn weitzenboeck_defect(phi: &MapField, psi: &TwistedSpinorField) -> Result<f64> {
    let (lhs, rhs) = weitzenboeck_sides(phi, psi)?;
    let diff: Vec<Vec<Spinor>> =
        lhs.iter().zip(&rhs).map(|(a, b)| a.iter().zip(b).map(|(u, v)| *u - *v).collect()).collect();
    Ok(Norms::of(phi.chart(), &diff, &phi.chart().interior_mask()).sup)
}

/// `sup |∂̸²ψ + Δψ|` with the five-point Laplacian, componentwise; the flat
/// target form of the Weitzenböck formula.
pub fn lichnerowicz_defect(psi: &TwistedSpinorField) -> f64 {
    let chart = psi.chart();
    let mask = chart.interior_mask();
    let mut sup = 0.0f64;
    for c in psi.comps() {
        let d = crate::spinor::flat_dirac(c, chart);
        let dd = crate::spinor::flat_dirac(&d, chart);
        let lap = chart.laplacian(c);
        sup = sup.max(sup_on(dd.iter().zip(&lap).map(|(a, b)| (*a + *b).norm()), &mask));
    }
    sup
}

/// `sup |½Δ|ψ|² − Σ_α |∇̃_α ψ|² − Re⟨ψ, e₁e₂·R(φ₁, φ₂)ψ⟩|` over the interior.
///
/// Valid only when `D̸ψ = 0`; fails with a precondition error when
/// `sup |D̸ψ|` exceeds `tol`.
pub fn bochner_defect(phi: &MapField, psi: &TwistedSpinorField, tol: f64) -> Result<f64> {
    psi.check_tangent(phi)?;
    let chart = phi.chart();
    let mask = chart.interior_mask();
    let (dpsi, _) = dirac_along_map_unchecked(phi, psi);
    let measured = Norms::of(chart, &dpsi, &mask).sup;
    if !(measured <= tol) {
        return Err(DhmError::Precondition(format!(
            "Bochner identity needs a harmonic spinor: sup |Dirac psi| = {measured:.3e} exceeds {tol:.3e}"
        )));
    }
    let half_lap: Vec<f64> = chart.laplacian(&psi.norm_density()).iter().map(|v| 0.5 * v).collect();
    let nx = covariant_derivative(phi, psi, Axis::X);
    let ny = covariant_derivative(phi, psi, Axis::Y);
    let curv = weitzenboeck_curvature(phi, psi);
    let diff = (0..chart.len()).map(|idx| {
        let grad: f64 = (0..psi.k()).map(|i| nx[i][idx].norm_sqr() + ny[i][idx].norm_sqr()).sum();
        let c = re_pair(psi.comps(), &curv, idx);
        (half_lap[idx] - grad - c).abs()
    });
    Ok(sup_on(diff, &mask))
}

// ------------------------------------------------------------------ circles

/// Polar quantities sampled on one circle.
struct CircleSample {
    theta: f64,
    phi_r: Vec<f64>,
    phi_t: Vec<f64>,
    psi: Vec<Spinor>,
    psi_r: Vec<Spinor>,
    psi_t: Vec<Spinor>,
}

fn sample_circle(phi: &MapField, psi: &TwistedSpinorField, r: f64, n_theta: usize) -> Result<Vec<CircleSample>> {
    psi.check_tangent(phi)?;
    let chart = phi.chart();
    chart.check_circle_radius(r)?;
    if n_theta < 3 {
        return Err(DhmError::Domain("circle quadrature needs at least 3 angles".into()));
    }
    let d = phi.tangent_derivatives();
    let nx = covariant_derivative(phi, psi, Axis::X);
    let ny = covariant_derivative(phi, psi, Axis::Y);
    let k = phi.k();
    let mut out = Vec::with_capacity(n_theta);
    for (th, p) in chart.circle_points(r, n_theta) {
        let (c, s) = (th.cos(), th.sin());
        let mut sample = CircleSample {
            theta: th,
            phi_r: vec![0.0; k],
            phi_t: vec![0.0; k],
            psi: vec![Spinor::ZERO; k],
            psi_r: vec![Spinor::ZERO; k],
            psi_t: vec![Spinor::ZERO; k],
        };
        for i in 0..k {
            let (fx, fy) = (chart.interpolate(&d[0][i], p), chart.interpolate(&d[1][i], p));
            sample.phi_r[i] = c * fx + s * fy;
            sample.phi_t[i] = r * (-s * fx + c * fy);
            let (gx, gy) = (chart.interpolate(&nx[i], p), chart.interpolate(&ny[i], p));
            sample.psi[i] = chart.interpolate(&psi.comps()[i], p);
            sample.psi_r[i] = gx * c + gy * s;
            sample.psi_t[i] = (gx * (-s) + gy * c) * r;
        }
        let valid = sample.phi_r.iter().chain(&sample.phi_t).all(|v| v.is_valid())
            && sample.psi.iter().chain(&sample.psi_r).chain(&sample.psi_t).all(|v| v.is_valid());
        if !valid {
            return Err(DhmError::Domain(format!("fields undefined on the circle of radius {r}")));
        }
        out.push(sample);
    }
    Ok(out)
}

/// `∂_r · s` and `∂_θ · s` in Clifford multiplication.
fn radial_clifford(theta: f64, r: f64, s: Spinor) -> (Spinor, Spinor) {
    let (c, sn) = (theta.cos(), theta.sin());
    (e1(s) * c + e2(s) * sn, (e1(s) * (-sn) + e2(s) * c) * r)
}

/// Circle integrals of one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevCircle {
    pub radius: f64,
    /// `∫ r⁻²|φ_θ|² − ∫ |φ_r|² − ∫ Re⟨ψ, ∂_r·ψ_r⟩`.
    pub radial_defect: f64,
    /// `∫ r⁻²|φ_θ|² − ∫ |φ_r|² + r⁻² ∫ Re⟨ψ, ∂_θ·ψ_θ⟩`.
    pub angular_defect: f64,
    /// `E_r = ∫ |dφ|² dθ` on the circle.
    pub e_r: f64,
    /// `I_r = −∫ Re⟨ψ, ∂_r·ψ_r⟩ dθ`.
    pub i_r: f64,
    /// `E_r + ∫ |ψ||∇̃ψ| dθ`, the magnitude the defects are compared with.
    pub scale: f64,
}

pub fn pohozaev_circle(phi: &MapField, psi: &TwistedSpinorField, r: f64, n_theta: usize) -> Result<PohozaevCircle> {
    let samples = sample_circle(phi, psi, r, n_theta)?;
    let dth = 2.0 * std::f64::consts::PI / n_theta as f64;
    let (mut ang, mut rad, mut sr, mut st, mut spin_scale) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in &samples {
        ang += s.phi_t.iter().map(|v| v * v).sum::<f64>() / (r * r);
        rad += s.phi_r.iter().map(|v| v * v).sum::<f64>();
        let (mut a, mut b, mut m) = (0.0, 0.0, 0.0);
        for i in 0..s.psi.len() {
            let (cr, _) = radial_clifford(s.theta, r, s.psi_r[i]);
            let (_, ct) = radial_clifford(s.theta, r, s.psi_t[i]);
            a += s.psi[i].re_inner(&cr);
            b += s.psi[i].re_inner(&ct);
            m += s.psi[i].norm() * (s.psi_r[i].norm_sqr() + s.psi_t[i].norm_sqr() / (r * r)).sqrt();
        }
        sr += a;
        st += b;
        spin_scale += m;
    }
    let (ang, rad, sr, st, spin_scale) = (ang * dth, rad * dth, sr * dth, st * dth, spin_scale * dth);
    Ok(PohozaevCircle {
        radius: r,
        radial_defect: ang - rad - sr,
        angular_defect: ang - rad + st / (r * r),
        e_r: ang + rad,
        i_r: -sr,
        scale: ang + rad + spin_scale,
    })
}

/// Both equality defects of the circle identity at radius `r`.
pub fn pohozaev_defect(phi: &MapField, psi: &TwistedSpinorField, r: f64, n_theta: usize) -> Result<(f64, f64)> {
    let c = pohozaev_circle(phi, psi, r, n_theta)?;
    Ok((c.radial_defect, c.angular_defect))
}

/// `(E_r, I_r)`.
pub fn pohozaev_energies(phi: &MapField, psi: &TwistedSpinorField, r: f64, n_theta: usize) -> Result<(f64, f64)> {
    let c = pohozaev_circle(phi, psi, r, n_theta)?;
    Ok((c.e_r, c.i_r))
}

/// `sup_θ |Re[z²T(z)] − (r²|φ_r|² − |φ_θ|² − Re⟨ψ, ∂_θ·ψ_θ⟩)|` on a circle.
pub fn hopf_trace_defect(phi: &MapField, psi: &TwistedSpinorField, r: f64, n_theta: usize) -> Result<f64> {
    let q = hopf_differential(phi, psi)?;
    let samples = sample_circle(phi, psi, r, n_theta)?;
    let chart = phi.chart();
    let mut sup = 0.0f64;
    for s in &samples {
        let z = Complex64::from_polar(r, s.theta);
        let t = chart.interpolate(&q.t, [z.re, z.im]);
        let lhs = (z * z * t).re;
        let mut rhs = r * r * s.phi_r.iter().map(|v| v * v).sum::<f64>() - s.phi_t.iter().map(|v| v * v).sum::<f64>();
        for i in 0..s.psi.len() {
            let (_, ct) = radial_clifford(s.theta, r, s.psi_t[i]);
            rhs -= s.psi[i].re_inner(&ct);
        }
        sup = sup.max((lhs - rhs).abs());
    }
    Ok(sup)
}

// --------------------------------------------------------- conformal change

/// How the conformal factor `λ` of a Möbius map `f` is read off from `f′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LambdaConvention {
    /// `λ = |f′|`.
    AbsDerivative,
    /// `λ = |f′|²`.
    AbsDerivativeSquared,
    /// `λ = 1/|f′|`.
    InverseAbsDerivative,
}

impl LambdaConvention {
    pub const ALL: [LambdaConvention; 3] = [
        LambdaConvention::AbsDerivative,
        LambdaConvention::AbsDerivativeSquared,
        LambdaConvention::InverseAbsDerivative,
    ];

    pub fn lambda(self, abs_derivative: f64) -> f64 {
        match self {
            LambdaConvention::AbsDerivative => abs_derivative,
            LambdaConvention::AbsDerivativeSquared => abs_derivative * abs_derivative,
            LambdaConvention::InverseAbsDerivative => 1.0 / abs_derivative,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LambdaConvention::AbsDerivative => "lambda = |f'|",
            LambdaConvention::AbsDerivativeSquared => "lambda = |f'|^2",
            LambdaConvention::InverseAbsDerivative => "lambda = 1/|f'|",
        }
    }
}

/// Bilinear sample of a field that is extended by `far` outside the sampled
/// square; used for compactly supported data.
fn sample_plane<T: FieldValue>(chart: &DomainChart, field: &[T], p: [f64; 2], far: T) -> T {
    let half = 0.5 * chart.grid().side();
    let h = chart.h();
    if p[0] < -half || p[1] < -half || p[0] > half - h || p[1] > half - h {
        return far;
    }
    chart.interpolate(field, p)
}

/// The spin frame rotation carried along by `f`: `(f, g) ↦ (s̄ f, s g)/|s|`
/// with `s` the branch `1/(cz + d)` of `√f′`.
fn spin_rotate(spin: Complex64, s: Spinor) -> Spinor {
    let u = spin / spin.norm();
    Spinor::new(s.f * u.conj(), s.g * u)
}

fn far_value(phi: &MapField) -> Vec<f64> {
    // the corner node is outside every compact support used with this helper
    phi.value(0)
}

/// `φ̃ = φ∘f` and `ψ̃ = λ^{-1/2} ψ∘f` (with the spin frame rotation), sampled
/// by bilinear interpolation. Fields are extended outside the sampled square
/// by the corner value of `φ` and by `ψ = 0`.
pub fn conformal_pullback(
    phi: &MapField,
    psi: &TwistedSpinorField,
    f: &MoebiusMap,
    convention: LambdaConvention,
) -> Result<(MapField, TwistedSpinorField)> {
    psi.check_tangent(phi)?;
    let chart = phi.chart().clone();
    if chart.topology() != Topology::Torus {
        return Err(DhmError::Domain("conformal pullback is implemented for compactly supported torus data".into()));
    }
    let k = phi.k();
    let far = far_value(phi);
    let images: Vec<_> = (0..chart.len()).map(|idx| f.apply(chart.point(idx))).collect::<Result<_>>()?;
    let comps: Vec<Vec<f64>> = (0..k)
        .map(|i| images.iter().map(|img| sample_plane(&chart, &phi.comps()[i], img.point, far[i])).collect())
        .collect();
    let mut values = comps;
    let target = phi.target();
    for idx in 0..chart.len() {
        let p: Vec<f64> = (0..k).map(|i| values[i][idx]).collect();
        let p = target.project_point(&p)?;
        for i in 0..k {
            values[i][idx] = p[i];
        }
    }
    let new_phi = MapField::new(chart.clone(), target, values)?;
    let spin_comps: Vec<Vec<Spinor>> = (0..k)
        .map(|i| {
            images
                .iter()
                .map(|img| {
                    let s = sample_plane(&chart, &psi.comps()[i], img.point, Spinor::ZERO);
                    spin_rotate(img.spin, s) * convention.lambda(img.lambda).powf(-0.5)
                })
                .collect()
        })
        .collect();
    let new_psi = TwistedSpinorField::new(chart, spin_comps)?.projected_tangent(&new_phi);
    Ok((new_phi, new_psi))
}

/// Relative changes of action and energy under a conformal change, and the
/// pointwise defect of `D̸̃ψ̃ = λ^{-3/2} D̸ψ ∘ f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalDefect {
    /// `|L(φ, ψ) − L(φ̃, ψ̃)| / (1 + |L(φ, ψ)|)`.
    pub action: f64,
    /// Same for the energy `∫ |dφ|² + |ψ|⁴`.
    pub energy: f64,
    /// `sup |D̸̃ψ̃ − λ^{-3/2} D̸ψ∘f|` on the interior, relative to `sup |D̸̃ψ̃|`.
    pub pointwise: f64,
}

pub fn conformal_invariance_defect(
    phi: &MapField,
    psi: &TwistedSpinorField,
    f: &MoebiusMap,
    convention: LambdaConvention,
) -> Result<ConformalDefect> {
    let (new_phi, new_psi) = conformal_pullback(phi, psi, f, convention)?;
    let chart = phi.chart();
    let l0 = action(phi, psi)?;
    let l1 = action(&new_phi, &new_psi)?;
    let e0 = energy(phi, psi, None)?;
    let e1_ = energy(&new_phi, &new_psi, None)?;

    let (d_old, _) = dirac_along_map_unchecked(phi, psi);
    let (d_new, _) = dirac_along_map_unchecked(&new_phi, &new_psi);
    let mask = chart.interior_mask();
    let mut diff_sup = 0.0f64;
    let mut ref_sup = 0.0f64;
    for idx in 0..chart.len() {
        if !mask[idx] {
            continue;
        }
        let img = f.apply(chart.point(idx))?;
        let factor = convention.lambda(img.lambda).powf(-1.5);
        let mut diff = 0.0;
        let mut reference = 0.0;
        for i in 0..phi.k() {
            let pulled = spin_rotate(img.spin, sample_plane(chart, &d_old[i], img.point, Spinor::ZERO)) * factor;
            diff += (d_new[i][idx] - pulled).norm_sqr();
            reference += d_new[i][idx].norm_sqr();
        }
        diff_sup = diff_sup.max(diff.sqrt());
        ref_sup = ref_sup.max(reference.sqrt());
    }
    Ok(ConformalDefect {
        action: (l0 - l1).abs() / (1.0 + l0.abs()),
        energy: (e0 - e1_).abs() / (1.0 + e0.abs()),
        pointwise: if ref_sup > 0.0 { diff_sup / ref_sup } else { diff_sup },
    })
}

// ------------------------------------------------------------------ decay

/// One row of the decay table at radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub r: f64,
    /// `sup_{|x|=r} |dφ||x|`.
    pub dphi: f64,
    /// `sup_{|x|=r} |ψ||x|^{1/2}`.
    pub psi: f64,
    /// `sup_{|x|=r} |∇̃ψ||x|^{3/2}`.
    pub dpsi: f64,
    /// `∫_{r/2 < |x| ≤ r} |dφ|² + |ψ|⁴`.
    pub annulus_energy: f64,
    /// `∫_{D_{2r}} |dφ|²`.
    pub map_energy_2r: f64,
    /// `∫_{D_{2r}} |ψ|⁴`.
    pub spinor_energy_2r: f64,
    /// `dphi / (∫_{D_{2r}} |dφ|²)^{1/2}`, 0 when both vanish.
    pub map_ratio: f64,
    /// `(psi + dpsi) / (∫_{D_{2r}} |ψ|⁴)^{1/4}`, 0 when both vanish.
    pub spinor_ratio: f64,
    /// `F(r) = ∫_{D_r} |dφ|² + |ψ|⁴ + |∇̃ψ|^{4/3}`.
    pub growth: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Decay diagnostics around the origin for the given radii.
pub fn decay_profile(phi: &MapField, psi: &TwistedSpinorField, radii: &[f64]) -> Result<Vec<DecayRow>> {
    psi.check_tangent(phi)?;
    let chart = phi.chart();
    let n_theta = 4 * chart.n();
    let dphi2 = phi.dirichlet_density();
    let psi2 = psi.norm_density();
    let nx = covariant_derivative(phi, psi, Axis::X);
    let ny = covariant_derivative(phi, psi, Axis::Y);
    let dpsi2: Vec<f64> =
        (0..chart.len()).map(|idx| (0..psi.k()).map(|i| nx[i][idx].norm_sqr() + ny[i][idx].norm_sqr()).sum()).collect();
    let valid = chart.integration_mask();
    let radius: Vec<f64> = (0..chart.len()).map(|idx| {
        let [x, y] = chart.point(idx);
        x.hypot(y)
    }).collect();
    let region = |lo: f64, hi: f64| -> Vec<bool> {
        radius.iter().zip(&valid).map(|(r, v)| *v && *r > lo && *r <= hi).collect()
    };
    let e_psi: Vec<f64> = psi2.iter().map(|v| v * v).collect();
    let both: Vec<f64> = dphi2.iter().zip(&e_psi).map(|(a, b)| a + b).collect();
    let growth_density: Vec<f64> = (0..chart.len()).map(|idx| both[idx] + dpsi2[idx].powf(2.0 / 3.0)).collect();
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        chart.check_circle_radius(r)?;
        let mut sup = [0.0f64; 3];
        for (_, p) in chart.circle_points(r, n_theta) {
            let vals = [
                chart.interpolate(&dphi2, p).max(0.0).sqrt() * r,
                chart.interpolate(&psi2, p).max(0.0).sqrt() * r.sqrt(),
                chart.interpolate(&dpsi2, p).max(0.0).sqrt() * r.powf(1.5),
            ];
            for (s, v) in sup.iter_mut().zip(vals) {
                *s = s.max(v);
            }
        }
        let d2r = region(-1.0, 2.0 * r);
        let map_energy_2r = chart.integrate_masked(&dphi2, &d2r);
        let spinor_energy_2r = chart.integrate_masked(&e_psi, &d2r);
        rows.push(DecayRow {
            r,
            dphi: sup[0],
            psi: sup[1],
            dpsi: sup[2],
            annulus_energy: chart.integrate_masked(&both, &region(0.5 * r, r)),
            map_energy_2r,
            spinor_energy_2r,
            map_ratio: ratio(sup[0], map_energy_2r.sqrt()),
            spinor_ratio: ratio(sup[1] + sup[2], spinor_energy_2r.powf(0.25)),
            growth: chart.integrate_masked(&growth_density, &region(-1.0, r)),
        });
    }
    Ok(rows)
}
