//! Map fields, twisted spinor fields and the operators of the coupled system.
//!
//! Both field types store one grid per ambient component. Covariant
//! derivatives along the map are tangential projections of componentwise
//! flat derivatives, which is the extrinsic form of the pull-back
//! connection for an isometric embedding.

use std::sync::Arc;

use rayon::prelude::*;

use crate::chart::{Axis, DomainChart, FieldValue};
use crate::error::{DhmError, Result};
use crate::spinor::{dirac_from_derivatives, e_alpha, flat_dirac, Spinor};
use crate::target::TargetGeometry;

/// Tolerance of the pointwise on-manifold invariant.
pub const ON_MANIFOLD_TOL: f64 = 1e-10;
/// Relative tolerance of the tangency invariant.
pub const TANGENCY_TOL: f64 = 1e-10;

fn same_chart(a: &Arc<DomainChart>, b: &Arc<DomainChart>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(DhmError::ChartMismatch("fields live on different charts".into()))
    }
}

/// Sampled map `φ: M → N ⊂ R^K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapField {
    chart: Arc<DomainChart>,
    target: TargetGeometry,
    comps: Vec<Vec<f64>>,
}

impl MapField {
    pub fn new(chart: Arc<DomainChart>, target: TargetGeometry, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != target.ambient_dim() {
            return Err(DhmError::Domain(format!(
                "map has {} components, target needs {}",
                comps.len(),
                target.ambient_dim()
            )));
        }
        if comps.iter().any(|c| c.len() != chart.len()) {
            return Err(DhmError::Domain("map component length does not match grid".into()));
        }
        let field = Self { chart, target, comps };
        let defect = field.on_manifold_defect();
        if !(defect <= ON_MANIFOLD_TOL) {
            return Err(DhmError::Precondition(format!("map leaves the target: defect {defect:.3e}")));
        }
        Ok(field)
    }

    /// Samples `f` at every node and projects the samples onto the target.
    pub fn from_fn(
        chart: Arc<DomainChart>,
        target: TargetGeometry,
        f: impl Fn([f64; 2]) -> Vec<f64> + Sync,
    ) -> Result<Self> {
        let k = target.ambient_dim();
        let values: Vec<Vec<f64>> = (0..chart.len())
            .into_par_iter()
            .map(|idx| target.project_point(&f(chart.point(idx))))
            .collect::<Result<_>>()?;
        let comps = (0..k).map(|i| values.iter().map(|v| v[i]).collect()).collect();
        Self::new(chart, target, comps)
    }

    pub fn constant(chart: Arc<DomainChart>, target: TargetGeometry, p: &[f64]) -> Result<Self> {
        let p = target.project_point(p)?;
        Self::from_fn(chart, target, move |_| p.clone())
    }

    pub fn chart(&self) -> &Arc<DomainChart> {
        &self.chart
    }
    pub fn target(&self) -> TargetGeometry {
        self.target
    }
    pub fn k(&self) -> usize {
        self.comps.len()
    }
    pub fn comps(&self) -> &[Vec<f64>] {
        &self.comps
    }
    pub fn into_comps(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn value(&self, idx: usize) -> Vec<f64> {
        self.comps.iter().map(|c| c[idx]).collect()
    }

    /// `sup_x ||φ(x)| − 1|` on a sphere target, 0 for a flat one.
    pub fn on_manifold_defect(&self) -> f64 {
        if !self.target.is_sphere() {
            return 0.0;
        }
        (0..self.chart.len())
            .map(|idx| (self.comps.iter().map(|c| c[idx] * c[idx]).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Componentwise flat derivatives `D_α φ^i`, indexed `[α][i][node]`.
    pub fn derivatives(&self) -> [Vec<Vec<f64>>; 2] {
        Axis::BOTH.map(|a| self.comps.iter().map(|c| self.chart.derivative(c, a)).collect())
    }

    /// Derivatives projected onto `T_φ N`, the discrete `dφ(e_α)`.
    pub fn tangent_derivatives(&self) -> [Vec<Vec<f64>>; 2] {
        let mut d = self.derivatives();
        for da in d.iter_mut() {
            self.project_tangent_comps(da);
        }
        d
    }

    /// Projects a component-major ambient vector field onto `T_φ N` in place.
    pub fn project_tangent_comps(&self, v: &mut [Vec<f64>]) {
        if !self.target.is_sphere() {
            return;
        }
        let n = self.chart.len();
        for idx in 0..n {
            let c: f64 = (0..self.k()).map(|i| v[i][idx] * self.comps[i][idx]).sum();
            for i in 0..self.k() {
                v[i][idx] -= c * self.comps[i][idx];
            }
        }
    }

    /// `|dφ|²_g = ρ⁻¹ Σ_α |D_α φ|²` per node.
    pub fn dirichlet_density(&self) -> Vec<f64> {
        let mut d = density_from(&self.derivatives());
        for (k, v) in d.iter_mut().enumerate() {
            *v /= self.chart.conformal_factor(k);
        }
        d
    }

    /// `∫|dφ|²` over the integration mask.
    pub fn dirichlet_energy(&self) -> f64 {
        self.dirichlet_energy_on(&self.chart.integration_mask())
    }

    pub fn dirichlet_energy_on(&self, mask: &[bool]) -> f64 {
        self.chart.integrate_masked(&self.dirichlet_density(), mask)
    }
}

fn density_from(d: &[Vec<Vec<f64>>; 2]) -> Vec<f64> {
    let n = d[0][0].len();
    (0..n).map(|idx| d.iter().flat_map(|da| da.iter().map(move |c| c[idx] * c[idx])).sum()).collect()
}

/// Sampled spinor field along a map, `ψ = Σ_i ψ^i ⊗ ∂_{y^i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedSpinorField {
    chart: Arc<DomainChart>,
    comps: Vec<Vec<Spinor>>,
}

impl TwistedSpinorField {
    pub fn new(chart: Arc<DomainChart>, comps: Vec<Vec<Spinor>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(DhmError::Domain("spinor field needs at least one component".into()));
        }
        if comps.iter().any(|c| c.len() != chart.len()) {
            return Err(DhmError::Domain("spinor component length does not match grid".into()));
        }
        Ok(Self { chart, comps })
    }

    pub fn zeros(chart: Arc<DomainChart>, k: usize) -> Self {
        let n = chart.len();
        Self { chart, comps: vec![vec![Spinor::ZERO; n]; k] }
    }

    pub fn from_fn(
        chart: Arc<DomainChart>,
        k: usize,
        f: impl Fn([f64; 2]) -> Vec<Spinor> + Sync,
    ) -> Result<Self> {
        let values: Vec<Vec<Spinor>> = (0..chart.len()).into_par_iter().map(|idx| f(chart.point(idx))).collect();
        if values.iter().any(|v| v.len() != k) {
            return Err(DhmError::Domain("spinor sample has the wrong number of components".into()));
        }
        let comps = (0..k).map(|i| values.iter().map(|v| v[i]).collect()).collect();
        Self::new(chart, comps)
    }

    pub fn chart(&self) -> &Arc<DomainChart> {
        &self.chart
    }
    pub fn k(&self) -> usize {
        self.comps.len()
    }
    pub fn comps(&self) -> &[Vec<Spinor>] {
        &self.comps
    }
    pub fn comps_mut(&mut self) -> &mut [Vec<Spinor>] {
        &mut self.comps
    }
    pub fn into_comps(self) -> Vec<Vec<Spinor>> {
        self.comps
    }

    pub fn value(&self, idx: usize) -> Vec<Spinor> {
        self.comps.iter().map(|c| c[idx]).collect()
    }

    /// `|ψ|² = Σ_i |ψ^i|²` per node.
    pub fn norm_density(&self) -> Vec<f64> {
        (0..self.chart.len()).map(|idx| self.comps.iter().map(|c| c[idx].norm_sqr()).sum()).collect()
    }

    /// `sup_x |ψ(x)|` over valid nodes.
    pub fn scale(&self) -> f64 {
        self.norm_density().iter().filter(|v| v.is_finite()).fold(0.0f64, |a, b| a.max(*b)).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.chart.integrate(&self.norm_density()).sqrt()
    }

    pub fn l4_norm(&self) -> f64 {
        let d: Vec<f64> = self.norm_density().iter().map(|v| v * v).collect();
        self.chart.integrate(&d).powf(0.25)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let comps = self.comps.iter().map(|c| c.iter().map(|s| *s * a).collect()).collect();
        Self { chart: self.chart.clone(), comps }
    }

    /// `sup_x |Σ_i φ^i ψ^i|`, the size of the normal part on a sphere target.
    pub fn tangency_defect(&self, phi: &MapField) -> f64 {
        if !phi.target().is_sphere() {
            return 0.0;
        }
        (0..self.chart.len())
            .map(|idx| {
                let mut s = Spinor::ZERO;
                for (c, p) in self.comps.iter().zip(phi.comps()) {
                    s += c[idx] * p[idx];
                }
                s.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise projection onto `T_φ N ⊗ Σ`.
    pub fn projected_tangent(&self, phi: &MapField) -> Self {
        let mut comps = self.comps.clone();
        project_spinor_comps(phi, &mut comps);
        Self { chart: self.chart.clone(), comps }
    }

    pub fn check_tangent(&self, phi: &MapField) -> Result<()> {
        same_chart(&self.chart, phi.chart())?;
        if self.k() != phi.k() {
            return Err(DhmError::Domain(format!(
                "spinor has {} components, map has {}",
                self.k(),
                phi.k()
            )));
        }
        let defect = self.tangency_defect(phi);
        if !(defect <= TANGENCY_TOL * self.scale()) {
            return Err(DhmError::Precondition(format!(
                "spinor is not tangent along the map: normal part {defect:.3e} at field scale {:.3e}",
                self.scale()
            )));
        }
        Ok(())
    }
}

/// Removes the normal part `φ Σ_j φ^j ψ^j` of a component-major spinor field.
pub fn project_spinor_comps(phi: &MapField, comps: &mut [Vec<Spinor>]) {
    if !phi.target().is_sphere() {
        return;
    }
    let p = phi.comps();
    let n = phi.chart().len();
    let k = phi.k();
    for idx in 0..n {
        let mut s = Spinor::ZERO;
        for i in 0..k {
            s += comps[i][idx] * p[i][idx];
        }
        for i in 0..k {
            comps[i][idx] = comps[i][idx] - s * p[i][idx];
        }
    }
}

fn check_pair(phi: &MapField, psi: &TwistedSpinorField) -> Result<()> {
    psi.check_tangent(phi)
}

// ------------------------------------------------------------------ operators

/// Tension field `τ(φ)`: the tangential part of the five-point Laplacian.
pub fn tension(phi: &MapField) -> Vec<Vec<f64>> {
    let mut lap: Vec<Vec<f64>> = phi.comps().iter().map(|c| phi.chart().laplacian(c)).collect();
    phi.project_tangent_comps(&mut lap);
    lap
}

/// Covariant derivative `∇̃_α ψ`, component-major.
pub fn covariant_derivative(phi: &MapField, psi: &TwistedSpinorField, axis: Axis) -> Vec<Vec<Spinor>> {
    let mut d: Vec<Vec<Spinor>> = psi.comps().iter().map(|c| psi.chart().derivative(c, axis)).collect();
    project_spinor_comps(phi, &mut d);
    d
}

/// Componentwise flat Dirac operator `∂̸ψ^i`.
pub fn ambient_dirac(psi: &TwistedSpinorField) -> Vec<Vec<Spinor>> {
    psi.comps().iter().map(|c| flat_dirac(c, psi.chart())).collect()
}

/// `Σ_{i,α} (dφ(e_α))^i e_α·ψ^i`: the spinor coefficient of `−A(dφ(e_α), e_α·ψ)`
/// on the unit sphere, where `A(dφ(e_α), e_α·ψ) = −φ ⊗ Σ_{i,α} φ^i_α e_α·ψ^i`.
fn contracted_clifford(dphi: &[Vec<Vec<f64>>; 2], psi: &TwistedSpinorField, idx: usize) -> Spinor {
    let mut s = Spinor::ZERO;
    for (a, axis) in Axis::BOTH.iter().enumerate() {
        for (i, c) in psi.comps().iter().enumerate() {
            s += e_alpha(*axis, c[idx]) * dphi[a][i][idx];
        }
    }
    s
}

/// Dirac operator along the map and the normal defect
/// `N(∂̸ψ) − A(dφ(e_α), e_α·ψ)`, which vanishes in the continuum.
pub fn dirac_along_map(phi: &MapField, psi: &TwistedSpinorField) -> Result<(Vec<Vec<Spinor>>, Vec<Vec<Spinor>>)> {
    check_pair(phi, psi)?;
    Ok(dirac_along_map_unchecked(phi, psi))
}

pub(crate) fn dirac_along_map_unchecked(phi: &MapField, psi: &TwistedSpinorField) -> (Vec<Vec<Spinor>>, Vec<Vec<Spinor>>) {
    let raw = ambient_dirac(psi);
    let k = phi.k();
    let n = phi.chart().len();
    let mut tangential = raw.clone();
    project_spinor_comps(phi, &mut tangential);
    let mut normal = vec![vec![Spinor::ZERO; n]; k];
    if phi.target().is_sphere() {
        let dphi = phi.tangent_derivatives();
        let p = phi.comps();
        for idx in 0..n {
            let mut s = contracted_clifford(&dphi, psi, idx);
            for i in 0..k {
                s += raw[i][idx] * p[i][idx];
            }
            for i in 0..k {
                normal[i][idx] = s * p[i][idx];
            }
        }
    } else {
        for i in 0..k {
            for idx in 0..n {
                normal[i][idx] = raw[i][idx] - tangential[i][idx];
            }
        }
    }
    (tangential, normal)
}

/// Curvature term `R(φ, ψ) = P(A(dφ(e_α), e_α·ψ); ψ)`; on the unit sphere
/// `R^m = Σ_{j,α} φ^j_α Re⟨ψ^m, e_α·ψ^j⟩`.
pub fn curvature_term(phi: &MapField, psi: &TwistedSpinorField) -> Result<Vec<Vec<f64>>> {
    check_pair(phi, psi)?;
    Ok(curvature_term_unchecked(phi, psi))
}

pub(crate) fn curvature_term_unchecked(phi: &MapField, psi: &TwistedSpinorField) -> Vec<Vec<f64>> {
    let k = phi.k();
    let n = phi.chart().len();
    let mut out = vec![vec![0.0; n]; k];
    if !phi.target().is_sphere() {
        return out;
    }
    let dphi = phi.tangent_derivatives();
    for idx in 0..n {
        let s = contracted_clifford(&dphi, psi, idx);
        for m in 0..k {
            out[m][idx] = psi.comps()[m][idx].re_inner(&s);
        }
    }
    phi.project_tangent_comps(&mut out);
    out
}

/// The same curvature term assembled from the Riemann tensor of the target,
/// `½ Σ_{α,i,j} Re⟨ψ^i, e_α·ψ^j⟩ R(E_i, E_j) dφ(e_α)` with `E_i` the
/// tangential projections of the ambient basis vectors.
pub fn curvature_term_intrinsic(phi: &MapField, psi: &TwistedSpinorField) -> Result<Vec<Vec<f64>>> {
    check_pair(phi, psi)?;
    let target = phi.target();
    let k = phi.k();
    let n = phi.chart().len();
    let dphi = phi.tangent_derivatives();
    let mut out = vec![vec![0.0; n]; k];
    for idx in 0..n {
        let p = phi.value(idx);
        let basis: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                target.tangent_project(&p, &e)
            })
            .collect();
        for (a, axis) in Axis::BOTH.iter().enumerate() {
            let v: Vec<f64> = (0..k).map(|i| dphi[a][i][idx]).collect();
            for i in 0..k {
                for j in 0..k {
                    let c = psi.comps()[i][idx].re_inner(&e_alpha(*axis, psi.comps()[j][idx]));
                    if c == 0.0 {
                        continue;
                    }
                    let r = target.curvature(&p, &basis[i], &basis[j], &v);
                    for m in 0..k {
                        out[m][idx] += 0.5 * c * r[m];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Sup and L² norms over the interior of a residual.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub sup: f64,
    pub l2: f64,
}

impl Norms {
    /// Norms of a component-major field restricted to `mask`. Non-finite
    /// values inside the mask propagate to the result.
    pub fn of<T: FieldValue>(chart: &DomainChart, comps: &[Vec<T>], mask: &[bool]) -> Norms {
        let n = chart.len();
        let density: Vec<f64> =
            (0..n).map(|idx| comps.iter().map(|c| c[idx].magnitude().powi(2)).sum::<f64>()).collect();
        Self::of_density(chart, &density, mask)
    }

    /// Norms from a pointwise squared magnitude.
    pub fn of_density(chart: &DomainChart, density: &[f64], mask: &[bool]) -> Norms {
        let mut sup = 0.0f64;
        for (d, m) in density.iter().zip(mask) {
            if *m {
                sup = if d.is_nan() || sup.is_nan() { f64::NAN } else { sup.max(*d) };
            }
        }
        Norms { sup: sup.sqrt(), l2: chart.integrate_masked(density, mask).max(0.0).sqrt() }
    }
}

/// Residuals of the Euler–Lagrange system `τ(φ) = R(φ, ψ)`, `D̸ψ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ELResidual {
    pub map_residual: Vec<Vec<f64>>,
    pub spinor_residual: Vec<Vec<Spinor>>,
    pub normal_defect: Vec<Vec<Spinor>>,
    pub map: Norms,
    pub spinor: Norms,
    pub normal: Norms,
}

impl ELResidual {
    /// Recomputes the summary norms on a different mask.
    pub fn renormed(&self, chart: &DomainChart, mask: &[bool]) -> Self {
        let mut out = self.clone();
        out.map = Norms::of(chart, &self.map_residual, mask);
        out.spinor = Norms::of(chart, &self.spinor_residual, mask);
        out.normal = Norms::of(chart, &self.normal_defect, mask);
        out
    }
}

pub fn el_residual(phi: &MapField, psi: &TwistedSpinorField) -> Result<ELResidual> {
    check_pair(phi, psi)?;
    Ok(el_residual_on(phi, psi, &phi.chart().interior_mask()))
}

pub(crate) fn el_residual_on(phi: &MapField, psi: &TwistedSpinorField, mask: &[bool]) -> ELResidual {
    let chart = phi.chart();
    let tau = tension(phi);
    let r = curvature_term_unchecked(phi, psi);
    let map_residual: Vec<Vec<f64>> =
        tau.iter().zip(&r).map(|(t, c)| t.iter().zip(c).map(|(a, b)| a - b).collect()).collect();
    let (spinor_residual, normal_defect) = dirac_along_map_unchecked(phi, psi);
    ELResidual {
        map: Norms::of(chart, &map_residual, mask),
        spinor: Norms::of(chart, &spinor_residual, mask),
        normal: Norms::of(chart, &normal_defect, mask),
        map_residual,
        spinor_residual,
        normal_defect,
    }
}

/// Natural magnitudes against which residuals are compared: `sup |dφ|²` for
/// the map equation and `sup |∇̃ψ|` for the spinor equation (interior sup).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScale {
    pub map: f64,
    pub spinor: f64,
}

pub fn field_scale(phi: &MapField, psi: &TwistedSpinorField) -> FieldScale {
    let chart = phi.chart();
    let mask = chart.interior_mask();
    let dphi = Norms::of_density(chart, &phi.dirichlet_density(), &mask);
    let dx = covariant_derivative(phi, psi, Axis::X);
    let dy = covariant_derivative(phi, psi, Axis::Y);
    let dens: Vec<f64> = (0..chart.len())
        .map(|idx| (0..psi.k()).map(|i| dx[i][idx].norm_sqr() + dy[i][idx].norm_sqr()).sum())
        .collect();
    let dpsi = Norms::of_density(chart, &dens, &mask);
    FieldScale { map: dphi.sup * dphi.sup, spinor: dpsi.sup }
}

/// `∫ |dφ|² + Re⟨ψ, D̸ψ⟩` over the integration mask of the chart.
pub fn action(phi: &MapField, psi: &TwistedSpinorField) -> Result<f64> {
    check_pair(phi, psi)?;
    let chart = phi.chart();
    let (dpsi, _) = dirac_along_map_unchecked(phi, psi);
    let dens = phi.dirichlet_density();
    let integrand: Vec<f64> = (0..chart.len())
        .map(|idx| dens[idx] + (0..psi.k()).map(|i| psi.comps()[i][idx].re_inner(&dpsi[i][idx])).sum::<f64>())
        .collect();
    Ok(chart.integrate_masked(&integrand, &chart.integration_mask()))
}

/// `∫_region |dφ|² + |ψ|⁴`; `None` means the integration mask of the chart.
pub fn energy(phi: &MapField, psi: &TwistedSpinorField, region: Option<&[bool]>) -> Result<f64> {
    same_chart(phi.chart(), psi.chart())?;
    let chart = phi.chart();
    let dens = phi.dirichlet_density();
    let psi2 = psi.norm_density();
    let integrand: Vec<f64> = dens.iter().zip(&psi2).map(|(a, b)| a + b * b).collect();
    let default_mask;
    let mask = match region {
        Some(m) => m,
        None => {
            default_mask = chart.integration_mask();
            &default_mask
        }
    };
    Ok(chart.integrate_masked(&integrand, mask))
}

/// Complex `∫ Σ_i ⟨a^i, b^i⟩` over the integration mask.
pub fn complex_pairing(chart: &DomainChart, a: &[Vec<Spinor>], b: &[Vec<Spinor>]) -> num_complex::Complex64 {
    let mask = chart.integration_mask();
    let h2 = chart.h() * chart.h();
    let mut sum = num_complex::Complex64::new(0.0, 0.0);
    for idx in 0..chart.len() {
        if !mask[idx] {
            continue;
        }
        let w = chart.conformal_factor(idx) * h2;
        for (ai, bi) in a.iter().zip(b) {
            sum += ai[idx].inner(&bi[idx]) * w;
        }
    }
    sum
}

/// Per-node `Dirac(dx, dy)` for a single spinor grid given its derivatives.
pub fn dirac_from_grids(dx: &[Spinor], dy: &[Spinor]) -> Vec<Spinor> {
    dx.iter().zip(dy).map(|(a, b)| dirac_from_derivatives(*a, *b)).collect()
}
