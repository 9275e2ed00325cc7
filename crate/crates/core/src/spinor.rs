//! Two-component spinors on a flat surface and the flat Dirac operator.
//!
//! With respect to the standard frame `e₁ = ∂x`, `e₂ = ∂y`, Clifford
//! multiplication acts on `(f, g)` by the matrices
//!
//! ```text
//! e₁ = [[0, 1], [-1, 0]],    e₂ = [[0, i], [i, 0]]
//! ```
//!
//! so that `∂̸ = e₁ ∂x + e₂ ∂y = 2 (∂g/∂z̄, -∂f/∂z)`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::chart::{Axis, DomainChart, FieldValue};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor {
    pub f: Complex64,
    pub g: Complex64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor { f: Complex64 { re: 0.0, im: 0.0 }, g: Complex64 { re: 0.0, im: 0.0 } };

    pub fn new(f: Complex64, g: Complex64) -> Self {
        Self { f, g }
    }

    /// Spinor from `(Re f, Im f, Re g, Im g)`.
    pub fn from_parts(fr: f64, fi: f64, gr: f64, gi: f64) -> Self {
        Self { f: Complex64::new(fr, fi), g: Complex64::new(gr, gi) }
    }

    pub fn parts(&self) -> [f64; 4] {
        [self.f.re, self.f.im, self.g.re, self.g.im]
    }

    /// Hermitian product, antilinear in `self`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.f.conj() * other.f + self.g.conj() * other.g
    }

    /// `Re⟨self, other⟩`, the real pairing used in every real-valued quantity.
    pub fn re_inner(&self, other: &Spinor) -> f64 {
        self.f.re * other.f.re + self.f.im * other.f.im + self.g.re * other.g.re + self.g.im * other.g.im
    }

    pub fn norm_sqr(&self) -> f64 {
        self.f.norm_sqr() + self.g.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale_complex(&self, c: Complex64) -> Spinor {
        Spinor { f: self.f * c, g: self.g * c }
    }

    pub fn is_finite(&self) -> bool {
        self.f.is_finite() && self.g.is_finite()
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, o: Spinor) -> Spinor {
        Spinor { f: self.f + o.f, g: self.g + o.g }
    }
}

impl AddAssign for Spinor {
    fn add_assign(&mut self, o: Spinor) {
        self.f += o.f;
        self.g += o.g;
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, o: Spinor) -> Spinor {
        Spinor { f: self.f - o.f, g: self.g - o.g }
    }
}

impl Neg for Spinor {
    type Output = Spinor;
    fn neg(self) -> Spinor {
        Spinor { f: -self.f, g: -self.g }
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, a: f64) -> Spinor {
        Spinor { f: self.f * a, g: self.g * a }
    }
}

impl FieldValue for Spinor {
    fn zero() -> Self {
        Spinor::ZERO
    }
    fn invalid() -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        Spinor { f: nan, g: nan }
    }
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// A tangent vector of the domain in the standard frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameVector(pub [f64; 2]);

impl FrameVector {
    pub const E1: FrameVector = FrameVector([1.0, 0.0]);
    pub const E2: FrameVector = FrameVector([0.0, 1.0]);
    pub const FRAME: [FrameVector; 2] = [Self::E1, Self::E2];

    pub fn new(x: f64, y: f64) -> Self {
        Self([x, y])
    }

    pub fn norm(&self) -> f64 {
        self.0[0].hypot(self.0[1])
    }

    pub fn dot(&self, o: &FrameVector) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1]
    }
}

/// `v · s` for `v = v¹e₁ + v²e₂`.
pub fn clifford_mul(v: FrameVector, s: Spinor) -> Spinor {
    let [a, b] = v.0;
    let w = Complex64::new(a, b);
    // e₁(f, g) = (g, -f) and e₂(f, g) = (ig, if), so v(f, g) = ((a + ib) g, (-a + ib) f)
    Spinor { f: w * s.g, g: -w.conj() * s.f }
}

#[inline]
pub fn e1(s: Spinor) -> Spinor {
    Spinor { f: s.g, g: -s.f }
}

#[inline]
pub fn e2(s: Spinor) -> Spinor {
    Spinor { f: I * s.g, g: I * s.f }
}

/// `e_α · s` for a frame index `α ∈ {0, 1}`.
#[inline]
pub fn e_alpha(axis: Axis, s: Spinor) -> Spinor {
    match axis {
        Axis::X => e1(s),
        Axis::Y => e2(s),
    }
}

/// `e₁ · Dx s + e₂ · Dy s` from precomputed derivatives.
#[inline]
pub fn dirac_from_derivatives(dx: Spinor, dy: Spinor) -> Spinor {
    e1(dx) + e2(dy)
}

/// Discrete `∂̸` in frame form, `e₁ · Dx + e₂ · Dy`.
pub fn flat_dirac(field: &[Spinor], chart: &DomainChart) -> Vec<Spinor> {
    let dx = chart.derivative(field, Axis::X);
    let dy = chart.derivative(field, Axis::Y);
    dx.iter().zip(&dy).map(|(a, b)| dirac_from_derivatives(*a, *b)).collect()
}

/// Discrete `∂̸` in Cauchy–Riemann form, `2 (∂̄g, -∂f)` with
/// `∂ = ½(Dx - i Dy)` and `∂̄ = ½(Dx + i Dy)`.
pub fn flat_dirac_cauchy_riemann(field: &[Spinor], chart: &DomainChart) -> Vec<Spinor> {
    let f: Vec<Complex64> = field.iter().map(|s| s.f).collect();
    let g: Vec<Complex64> = field.iter().map(|s| s.g).collect();
    let (fx, fy) = (chart.derivative(&f, Axis::X), chart.derivative(&f, Axis::Y));
    let (gx, gy) = (chart.derivative(&g, Axis::X), chart.derivative(&g, Axis::Y));
    (0..field.len())
        .map(|k| {
            let dbar_g = (gx[k] + I * gy[k]) * 0.5;
            let d_f = (fx[k] - I * fy[k]) * 0.5;
            Spinor { f: dbar_g * 2.0, g: -d_f * 2.0 }
        })
        .collect()
}

/// The flat twistor spinor `Ψ0 + (x¹e₁ + x²e₂) · Ψ1`.
pub fn twistor_eval(psi0: Spinor, psi1: Spinor, x: [f64; 2]) -> Spinor {
    psi0 + clifford_mul(FrameVector(x), psi1)
}

/// Samples [`twistor_eval`] at every node of the chart.
pub fn twistor_field(psi0: Spinor, psi1: Spinor, chart: &DomainChart) -> Vec<Spinor> {
    (0..chart.len()).map(|k| twistor_eval(psi0, psi1, chart.point(k))).collect()
}

/// `sup_{x, α} |D_α Ψ + ½ e_α · ∂̸Ψ|` over the interior mask.
pub fn twistor_defect(field: &[Spinor], chart: &DomainChart) -> f64 {
    let dx = chart.derivative(field, Axis::X);
    let dy = chart.derivative(field, Axis::Y);
    let mask = chart.interior_mask();
    let mut sup = 0.0f64;
    for k in 0..field.len() {
        if !mask[k] {
            continue;
        }
        let d = dirac_from_derivatives(dx[k], dy[k]);
        let a = (dx[k] + e1(d) * 0.5).norm();
        let b = (dy[k] + e2(d) * 0.5).norm();
        sup = sup.max(a).max(b);
    }
    sup
}
