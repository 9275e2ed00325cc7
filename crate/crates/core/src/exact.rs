//! Closed-form Dirac-harmonic pairs.
//!
//! * `(φ, 0)` with `φ` harmonic.
//! * `(y₀, ψ)` with `y₀` a point and `ψ` a harmonic spinor tangent at `y₀`.
//! * `(φ, ψ)` with `φ` conformal and `ψ = Σ_α e_α·Ψ ⊗ dφ(e_α)` for a twistor
//!   spinor `Ψ`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{Axis, DomainChart};
use crate::error::{DhmError, Result};
use crate::fields::{MapField, TwistedSpinorField};
use crate::spinor::{e_alpha, flat_dirac, twistor_eval, Spinor};
use crate::target::TargetGeometry;

/// `(2 Re z, 2 Im z, |z|² − 1)/(|z|² + 1)`; non-finite input maps to the north pole.
pub fn inverse_stereographic(z: Complex64) -> [f64; 3] {
    if !z.is_finite() {
        return [0.0, 0.0, 1.0];
    }
    let r2 = z.norm_sqr();
    if r2 > 1.0 {
        // evaluate through 1/z̄ to keep precision for large |z|
        let w = z.inv().conj();
        let [a, b, c] = inverse_stereographic(w);
        return [a, b, -c];
    }
    let d = 1.0 + r2;
    [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
}

/// Partial derivatives `(∂_u S, ∂_v S)` of the inverse stereographic
/// projection at `w = u + iv`.
fn inverse_stereographic_jacobian(w: Complex64) -> [[f64; 3]; 2] {
    let (u, v) = (w.re, w.im);
    let d = 1.0 + u * u + v * v;
    let d2 = d * d;
    [
        [2.0 * (d - 2.0 * u * u) / d2, -4.0 * u * v / d2, 4.0 * u / d2],
        [-4.0 * u * v / d2, 2.0 * (d - 2.0 * v * v) / d2, 4.0 * v / d2],
    ]
}

fn poly_eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn poly_derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

fn poly_degree(c: &[Complex64]) -> Option<usize> {
    c.iter().rposition(|a| a.norm() > 0.0)
}

/// Determinant by Gaussian elimination with partial pivoting.
fn determinant(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|a, b| m[*a][col].norm().total_cmp(&m[*b][col].norm())).unwrap();
        if m[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    det
}

/// `z ↦ p(z)/q(z)` with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

impl RationalMap {
    pub fn new(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        let dn = poly_degree(&num);
        let dd = poly_degree(&den).ok_or_else(|| DhmError::Domain("denominator is identically zero".into()))?;
        let mut num = num;
        let mut den = den;
        num.truncate(dn.map_or(1, |d| d + 1));
        den.truncate(dd + 1);
        if num.is_empty() {
            num.push(Complex64::new(0.0, 0.0));
        }
        if let Some(dn) = dn {
            if dn > 0 && dd > 0 {
                // a vanishing resultant means a common root
                let size = dn + dd;
                let mut syl = vec![vec![Complex64::new(0.0, 0.0); size]; size];
                for r in 0..dd {
                    for (k, a) in num.iter().rev().enumerate() {
                        syl[r][r + k] = *a;
                    }
                }
                for r in 0..dn {
                    for (k, a) in den.iter().rev().enumerate() {
                        syl[dd + r][r + k] = *a;
                    }
                }
                let scale: f64 =
                    num.iter().chain(&den).map(|a| a.norm()).fold(0.0, f64::max).powi(size as i32);
                if determinant(syl).norm() <= 1e-12 * scale {
                    return Err(DhmError::Domain("numerator and denominator share a root".into()));
                }
            }
        }
        Ok(Self { num, den })
    }

    /// `z ↦ z`.
    pub fn identity() -> Self {
        Self::affine(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// `z ↦ az + b`.
    pub fn affine(a: Complex64, b: Complex64) -> Self {
        Self { num: vec![b, a], den: vec![Complex64::new(1.0, 0.0)] }
    }

    /// `z ↦ c`.
    pub fn constant(c: Complex64) -> Self {
        Self { num: vec![c], den: vec![Complex64::new(1.0, 0.0)] }
    }

    /// `z ↦ zᵏ`.
    pub fn monomial(k: usize) -> Self {
        let mut num = vec![Complex64::new(0.0, 0.0); k + 1];
        num[k] = Complex64::new(1.0, 0.0);
        Self { num, den: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }
    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn degree(&self) -> usize {
        poly_degree(&self.num).unwrap_or(0).max(poly_degree(&self.den).unwrap_or(0))
    }

    /// `None` at a pole.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        let q = poly_eval(&self.den, z);
        if q.norm() == 0.0 {
            return None;
        }
        Some(poly_eval(&self.num, z) / q)
    }

    /// `R′(z)`, `None` at a pole.
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        let q = poly_eval(&self.den, z);
        if q.norm() == 0.0 {
            return None;
        }
        let p = poly_eval(&self.num, z);
        let dp = poly_eval(&poly_derivative(&self.num), z);
        let dq = poly_eval(&poly_derivative(&self.den), z);
        Some((dp * q - p * dq) / (q * q))
    }

    /// `S(R(x))`, with poles sent to the north pole.
    pub fn sample(&self, x: [f64; 2]) -> [f64; 3] {
        match self.eval(Complex64::new(x[0], x[1])) {
            Some(w) => inverse_stereographic(w),
            None => [0.0, 0.0, 1.0],
        }
    }

    /// Exact `(∂_x φ, ∂_y φ)` of `φ = S ∘ R` at a non-pole point.
    pub fn map_jacobian(&self, x: [f64; 2]) -> Result<[[f64; 3]; 2]> {
        let z = Complex64::new(x[0], x[1]);
        let (w, dw) = match (self.eval(z), self.derivative(z)) {
            (Some(w), Some(dw)) => (w, dw),
            _ => return Err(DhmError::Domain(format!("rational map has a pole at ({}, {})", x[0], x[1]))),
        };
        let [su, sv] = inverse_stereographic_jacobian(w);
        let mut out = [[0.0; 3]; 2];
        for i in 0..3 {
            out[0][i] = su[i] * dw.re + sv[i] * dw.im;
            out[1][i] = -su[i] * dw.im + sv[i] * dw.re;
        }
        Ok(out)
    }
}

/// `φ = S ∘ R` sampled on the chart, with poles sent to the north pole.
pub fn conformal_map_field(rmap: &RationalMap, chart: Arc<DomainChart>) -> Result<MapField> {
    let r = rmap.clone();
    MapField::from_fn(chart, TargetGeometry::sphere(2), move |x| r.sample(x).to_vec())
}

/// `(|φ_x|² − |φ_y|², ⟨φ_x, φ_y⟩)` from stencil derivatives: sup of each over `mask`.
pub fn conformality_defect(phi: &MapField, mask: &[bool]) -> (f64, f64) {
    let [dx, dy] = phi.derivatives();
    let mut out = (0.0f64, 0.0f64);
    for idx in 0..phi.chart().len() {
        if !mask[idx] {
            continue;
        }
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for i in 0..phi.k() {
            a += dx[i][idx] * dx[i][idx];
            b += dy[i][idx] * dy[i][idx];
            c += dx[i][idx] * dy[i][idx];
        }
        out.0 = out.0.max((a - b).abs());
        out.1 = out.1.max(c.abs());
    }
    out
}

/// `ψ^i = Σ_α (e_α·Ψ(x)) dφ(e_α)^i` for the twistor spinor `Ψ = Ψ0 + x·Ψ1`.
///
/// `dφ(e_α)` is the tangential projection of the centered derivative, so the
/// result is tangent along `φ` up to rounding at every resolution.
pub fn twistor_pushforward(phi: &MapField, psi0: Spinor, psi1: Spinor) -> TwistedSpinorField {
    let chart = phi.chart().clone();
    let dphi = phi.tangent_derivatives();
    let n = chart.len();
    let k = phi.k();
    let mut comps = vec![vec![Spinor::ZERO; n]; k];
    for idx in 0..n {
        let big = twistor_eval(psi0, psi1, chart.point(idx));
        for (a, axis) in Axis::BOTH.iter().enumerate() {
            let s = e_alpha(*axis, big);
            for i in 0..k {
                comps[i][idx] += s * dphi[a][i][idx];
            }
        }
    }
    TwistedSpinorField::new(chart, comps).expect("component lengths match the chart")
}

/// Parameters of the two trivial solution families.
#[derive(Debug, Clone)]
pub enum TrivialPair {
    /// `(φ, 0)`; the caller supplies a harmonic map.
    HarmonicMap { map: MapField },
    /// `(y₀, ψ)`; `spinor` holds `K` ambient components and is projected
    /// tangent to the target at `point`.
    ConstantMapHarmonicSpinor {
        chart: Arc<DomainChart>,
        target: TargetGeometry,
        point: Vec<f64>,
        spinor: Vec<Vec<Spinor>>,
        /// Admissible `sup |∂̸ψ|` relative to `max(1, sup |ψ|)`.
        tol: f64,
    },
}

pub fn trivial_pairs(params: TrivialPair) -> Result<(MapField, TwistedSpinorField)> {
    match params {
        TrivialPair::HarmonicMap { map } => {
            let zero = TwistedSpinorField::zeros(map.chart().clone(), map.k());
            Ok((map, zero))
        }
        TrivialPair::ConstantMapHarmonicSpinor { chart, target, point, spinor, tol } => {
            let map = MapField::constant(chart.clone(), target, &point)?;
            let psi = TwistedSpinorField::new(chart.clone(), spinor)?;
            if psi.k() != map.k() {
                return Err(DhmError::Domain("spinor component count does not match the target".into()));
            }
            let psi = psi.projected_tangent(&map);
            let mask = chart.interior_mask();
            let mut sup = 0.0f64;
            for c in psi.comps() {
                for (d, m) in flat_dirac(c, &chart).iter().zip(&mask) {
                    if *m {
                        sup = sup.max(d.norm());
                    }
                }
            }
            let bound = tol * psi.scale().max(1.0);
            if !(sup <= bound) {
                return Err(DhmError::Precondition(format!(
                    "spinor is not harmonic: sup |Dirac psi| = {sup:.3e} exceeds {bound:.3e}"
                )));
            }
            Ok((map, psi))
        }
    }
}

/// `φ(x, y) = (cos 2πx/L, sin 2πx/L, 0)`, a closed geodesic wrapped once
/// around a torus of side `L`.
pub fn geodesic_wrap(chart: Arc<DomainChart>) -> Result<MapField> {
    let k = 2.0 * std::f64::consts::PI / chart.grid().side();
    MapField::from_fn(chart, TargetGeometry::sphere(2), move |[x, _]| vec![(k * x).cos(), (k * x).sin(), 0.0])
}

// ------------------------------------------------------- non-solution fields

/// `exp(−s/(1 − s))` with `s = |x|²/R²`, a smooth bump supported in `|x| < R`.
pub fn bump(x: [f64; 2], radius: f64) -> f64 {
    let s = (x[0] * x[0] + x[1] * x[1]) / (radius * radius);
    if s >= 1.0 {
        0.0
    } else {
        (-s / (1.0 - s)).exp()
    }
}

struct Mode {
    k: [f64; 2],
    cos: Vec<f64>,
    sin: Vec<f64>,
}

fn random_modes(rng: &mut ChaCha8Rng, wave: f64, max_k: i32, width: usize, amplitude: f64) -> Vec<Mode> {
    let mut modes = Vec::new();
    for kx in -max_k..=max_k {
        for ky in 0..=max_k {
            if ky == 0 && kx < 0 {
                continue;
            }
            let decay = amplitude / (1.0 + (kx * kx + ky * ky) as f64);
            let mut coef = || (0..width).map(|_| rng.gen_range(-1.0..1.0) * decay).collect();
            modes.push(Mode { k: [kx as f64 * wave, ky as f64 * wave], cos: coef(), sin: coef() });
        }
    }
    modes
}

fn eval_modes(modes: &[Mode], x: [f64; 2], width: usize) -> Vec<f64> {
    let mut out = vec![0.0; width];
    for m in modes {
        let arg = m.k[0] * x[0] + m.k[1] * x[1];
        let (s, c) = arg.sin_cos();
        for i in 0..width {
            out[i] += m.cos[i] * c + m.sin[i] * s;
        }
    }
    out
}

fn spinors_from(parts: &[f64], k: usize) -> Vec<Spinor> {
    (0..k).map(|i| Spinor::from_parts(parts[4 * i], parts[4 * i + 1], parts[4 * i + 2], parts[4 * i + 3])).collect()
}

/// Smooth periodic fields on a torus built from random low Fourier modes
/// (wave numbers up to 2 per direction). The spinor is projected tangent.
/// These pairs are generically not solutions.
pub fn random_smooth_pair(
    chart: Arc<DomainChart>,
    target: TargetGeometry,
    seed: u64,
) -> Result<(MapField, TwistedSpinorField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = target.ambient_dim();
    let wave = 2.0 * std::f64::consts::PI / chart.grid().side();
    let base: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let map_modes = random_modes(&mut rng, wave, 2, k, 0.8);
    let spin_modes = random_modes(&mut rng, wave, 2, 4 * k, 1.0);
    let phi = MapField::from_fn(chart.clone(), target, |x| {
        let v = eval_modes(&map_modes, x, k);
        v.iter().zip(&base).map(|(a, b)| a + b).collect()
    })?;
    let psi = TwistedSpinorField::from_fn(chart, k, |x| spinors_from(&eval_modes(&spin_modes, x, 4 * k), k))?;
    Ok((phi.clone(), psi.projected_tangent(&phi)))
}

/// Random smooth fields supported in the disk `|x| < radius`: the map is
/// constant (`far`) outside, the spinor vanishes outside.
pub fn windowed_random_pair(
    chart: Arc<DomainChart>,
    far: &[f64],
    radius: f64,
    seed: u64,
) -> Result<(MapField, TwistedSpinorField)> {
    let target = TargetGeometry::sphere(far.len() - 1);
    let far = target.project_point(far)?;
    let k = far.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wave = std::f64::consts::PI / radius;
    let map_modes = random_modes(&mut rng, wave, 1, k, 1.5);
    let spin_modes = random_modes(&mut rng, wave, 1, 4 * k, 2.0);
    let phi = MapField::from_fn(chart.clone(), target, |x| {
        let w = bump(x, radius);
        let v = eval_modes(&map_modes, x, k);
        far.iter().zip(&v).map(|(a, b)| a + w * b).collect()
    })?;
    let psi = TwistedSpinorField::from_fn(chart, k, |x| {
        let w = bump(x, radius);
        spinors_from(&eval_modes(&spin_modes, x, 4 * k), k).into_iter().map(|s| s * w).collect()
    })?;
    Ok((phi.clone(), psi.projected_tangent(&phi)))
}

/// A constant pair `(y₀, ψ₀)` with the map perturbed to
/// `π(y₀ + ε δ)`, where `δ` mixes seeded Fourier modes of wave number 2 and
/// 3 and is scaled to `sup |δ| = 1`. The constant spinor (one value per
/// ambient component) is projected tangent along the perturbed map.
pub fn perturbed_constant_pair(
    chart: Arc<DomainChart>,
    target: TargetGeometry,
    point: &[f64],
    spinor: &[Spinor],
    amplitude: f64,
    seed: u64,
) -> Result<(MapField, TwistedSpinorField)> {
    let k = target.ambient_dim();
    if point.len() != k || spinor.len() != k {
        return Err(DhmError::Domain(format!("expected {k} ambient components")));
    }
    let p = target.project_point(point)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wave = 2.0 * std::f64::consts::PI / chart.grid().side();
    let modes: Vec<Mode> = random_modes(&mut rng, wave, 3, k, 1.0)
        .into_iter()
        .filter(|m| {
            let q = (m.k[0].abs().max(m.k[1].abs()) / wave).round();
            q >= 2.0
        })
        .collect();
    let delta: Vec<Vec<f64>> = (0..chart.len()).map(|idx| eval_modes(&modes, chart.point(idx), k)).collect();
    let sup = delta.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if sup > 0.0 { amplitude / sup } else { 0.0 };
    let mut phi_comps: Vec<Vec<f64>> = (0..k).map(|i| delta.iter().map(|d| p[i] + scale * d[i]).collect()).collect();
    for idx in 0..chart.len() {
        let v: Vec<f64> = phi_comps.iter().map(|c| c[idx]).collect();
        let q = target.project_point(&v)?;
        for i in 0..k {
            phi_comps[i][idx] = q[i];
        }
    }
    let phi = MapField::new(chart.clone(), target, phi_comps)?;
    let psi = TwistedSpinorField::new(chart.clone(), spinor.iter().map(|s| vec![*s; chart.len()]).collect())?;
    let psi = psi.projected_tangent(&phi);
    Ok((phi, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{curvature_term, el_residual};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn stereographic_values() {
        assert_eq!(inverse_stereographic(c(0.0, 0.0)), [0.0, 0.0, -1.0]);
        assert_eq!(inverse_stereographic(c(1.0, 0.0)), [1.0, 0.0, 0.0]);
        assert_eq!(inverse_stereographic(c(f64::INFINITY, 0.0)), [0.0, 0.0, 1.0]);
        let p = inverse_stereographic(c(1e8, 0.0));
        assert!((p[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stereographic_is_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let z = c(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let p = inverse_stereographic(z);
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((r - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn rational_map_basics() {
        let r = RationalMap::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(-0.5, 0.0)]).unwrap();
        assert_eq!(r.degree(), 1);
        assert!(r.eval(c(2.0, 0.0)).is_none());
        assert_eq!(r.sample([2.0, 0.0]), [0.0, 0.0, 1.0]);
        // (z − 1)/(z − 1) has a common root
        assert!(RationalMap::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(RationalMap::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]).is_err());
        assert_eq!(RationalMap::monomial(2).degree(), 2);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let r = RationalMap::new(vec![c(0.1, 0.2), c(1.0, -0.3), c(0.2, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.4)])
            .unwrap();
        let x = [0.3, -0.2];
        let j = r.map_jacobian(x).unwrap();
        let h = 1e-6;
        for (a, d) in [[h, 0.0], [0.0, h]].iter().enumerate() {
            let p = r.sample([x[0] + d[0], x[1] + d[1]]);
            let m = r.sample([x[0] - d[0], x[1] - d[1]]);
            for i in 0..3 {
                assert!(((p[i] - m[i]) / (2.0 * h) - j[a][i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn analytic_jacobian_is_conformal() {
        let r = RationalMap::new(vec![c(0.2, 0.0), c(1.0, 0.5), c(0.0, 0.3)], vec![c(1.0, 0.0), c(0.1, 0.1)])
            .unwrap();
        for k in 0..50 {
            let x = [-0.9 + 0.037 * k as f64, 0.6 - 0.021 * k as f64];
            let [fx, fy] = r.map_jacobian(x).unwrap();
            let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            let scale = dot(&fx, &fx);
            assert!((dot(&fx, &fx) - dot(&fy, &fy)).abs() <= 1e-13 * scale.max(1.0));
            assert!(dot(&fx, &fy).abs() <= 1e-13 * scale.max(1.0));
        }
    }

    #[test]
    fn constant_rational_map_gives_constant_field() {
        let chart = Arc::new(DomainChart::disk(16).unwrap());
        let phi = conformal_map_field(&RationalMap::constant(c(0.5, 0.5)), chart).unwrap();
        assert_eq!(phi.dirichlet_energy(), 0.0);
        let psi = twistor_pushforward(&phi, Spinor::from_parts(1.0, 0.0, 0.0, 0.0), Spinor::ZERO);
        assert_eq!(psi.scale(), 0.0);
    }

    #[test]
    fn pushforward_is_tangent_and_curvature_free() {
        let chart = Arc::new(DomainChart::torus(32, 2.0).unwrap().with_window(0.6).unwrap());
        let phi = conformal_map_field(&RationalMap::affine(c(1.2, 0.3), c(0.1, -0.2)), chart).unwrap();
        let psi = twistor_pushforward(&phi, Spinor::from_parts(1.0, 0.0, 0.0, 0.0), Spinor::from_parts(0.0, 0.3, 0.2, 0.0));
        assert!(psi.tangency_defect(&phi) <= 1e-12 * psi.scale());
        let r = curvature_term(&phi, &psi).unwrap();
        assert!(r.iter().flatten().all(|v| v.abs() <= 1e-12));
        let zero = twistor_pushforward(&phi, Spinor::ZERO, Spinor::ZERO);
        assert_eq!(zero.scale(), 0.0);
    }

    #[test]
    fn trivial_families() {
        let chart = Arc::new(DomainChart::torus(16, 1.0).unwrap());
        let s = Spinor::from_parts(0.3, 0.0, -1.0, 0.5);
        let (phi, psi) = trivial_pairs(TrivialPair::ConstantMapHarmonicSpinor {
            chart: chart.clone(),
            target: TargetGeometry::sphere(2),
            point: vec![0.0, 0.0, 1.0],
            spinor: vec![vec![s; 256], vec![s; 256], vec![s; 256]],
            tol: 1e-10,
        })
        .unwrap();
        let res = el_residual(&phi, &psi).unwrap();
        assert!(res.map.sup <= 1e-12 && res.spinor.sup <= 1e-12 && res.normal.sup <= 1e-12);

        // an affine twistor spinor with nonzero tangent Ψ1 is not harmonic
        let chart_w = Arc::new(DomainChart::torus(16, 1.0).unwrap().with_window(0.3).unwrap());
        let p1 = Spinor::from_parts(0.0, 0.0, 1.0, 0.0);
        let tw: Vec<Spinor> = (0..256).map(|k| twistor_eval(Spinor::ZERO, p1, chart_w.point(k))).collect();
        let err = trivial_pairs(TrivialPair::ConstantMapHarmonicSpinor {
            chart: chart_w,
            target: TargetGeometry::sphere(2),
            point: vec![0.0, 0.0, 1.0],
            spinor: vec![tw.clone(), vec![Spinor::ZERO; 256], vec![Spinor::ZERO; 256]],
            tol: 1e-8,
        });
        assert!(matches!(err, Err(DhmError::Precondition(_))));

        let (phi, psi) = trivial_pairs(TrivialPair::HarmonicMap { map: geodesic_wrap(chart).unwrap() }).unwrap();
        assert_eq!(psi.scale(), 0.0);
        assert!(el_residual(&phi, &psi).unwrap().map.sup < 1e-9);
    }
}
