//! Flat two-dimensional charts: periodic tori and the unit disk.
//!
//! Every field is stored row-major with `y` as the outer index, one value
//! per node. Node `(i, j)` sits at `(-side/2 + i h, -side/2 + j h)`, so with
//! an even node count the origin is a grid node.
//!
//! Stencils are second-order centered differences. On the torus they wrap.
//! On the disk a node's output is only valid when every stencil neighbour
//! lies inside the closed unit disk; other outputs are set to
//! [`FieldValue::invalid`] (NaN), which then propagates through any
//! composed operator.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{DhmError, Result};

/// Value types that stencils and quadrature can act on.
pub trait FieldValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    /// Marker for outputs where a stencil is undefined.
    fn invalid() -> Self;
    fn is_valid(&self) -> bool;
    /// Pointwise magnitude used by sup/L² summaries.
    fn magnitude(&self) -> f64;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn invalid() -> Self {
        f64::NAN
    }
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl FieldValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn invalid() -> Self {
        Complex64::new(f64::NAN, f64::NAN)
    }
    fn is_valid(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Torus,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Uniform square grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    n: usize,
    side: f64,
    h: f64,
    topology: Topology,
}

impl Grid2D {
    pub fn new(n: usize, side: f64, topology: Topology) -> Result<Self> {
        if n < 8 {
            return Err(DhmError::Domain(format!("grid needs n >= 8 nodes per side, got {n}")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(DhmError::Domain(format!("grid side must be positive, got {side}")));
        }
        Ok(Self { n, side, h: side / n as f64, topology })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn side(&self) -> f64 {
        self.side
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn topology(&self) -> Topology {
        self.topology
    }
    pub fn len(&self) -> usize {
        self.n * self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -0.5 * self.side + i as f64 * self.h
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.coord(idx % self.n), self.coord(idx / self.n)]
    }

    #[inline]
    fn wrap(&self, i: usize, delta: isize) -> usize {
        (i as isize + delta).rem_euclid(self.n as isize) as usize
    }
}

/// A grid together with the metric data the operators need.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainChart {
    grid: Grid2D,
    conformal_factor: Option<Vec<f64>>,
    scalar_curvature: f64,
    window: Option<f64>,
    stencil_ok: Vec<bool>,
}

impl DomainChart {
    /// Periodic square of the given side, centred on the origin.
    pub fn torus(n: usize, side: f64) -> Result<Self> {
        Self::from_grid(Grid2D::new(n, side, Topology::Torus)?)
    }

    /// The unit disk sampled on the square `[-1, 1)²`.
    pub fn disk(n: usize) -> Result<Self> {
        Self::from_grid(Grid2D::new(n, 2.0, Topology::Disk)?)
    }

    pub fn from_grid(grid: Grid2D) -> Result<Self> {
        let stencil_ok = match grid.topology {
            Topology::Torus => vec![true; grid.len()],
            Topology::Disk => {
                let inside = |i: isize, j: isize| {
                    if i < 0 || j < 0 || i >= grid.n as isize || j >= grid.n as isize {
                        return false;
                    }
                    let (x, y) = (grid.coord(i as usize), grid.coord(j as usize));
                    x * x + y * y <= 1.0
                };
                (0..grid.len())
                    .map(|k| {
                        let (i, j) = ((k % grid.n) as isize, (k / grid.n) as isize);
                        inside(i, j)
                            && inside(i + 1, j)
                            && inside(i - 1, j)
                            && inside(i, j + 1)
                            && inside(i, j - 1)
                    })
                    .collect()
            }
        };
        Ok(Self { grid, conformal_factor: None, scalar_curvature: 0.0, window: None, stencil_ok })
    }

    /// Restrict interior summaries to the centred disk of radius `r`.
    pub fn with_window(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(DhmError::Domain(format!("window radius must be positive, got {r}")));
        }
        self.window = Some(r);
        Ok(self)
    }

    /// Attach a conformal factor `ρ` so that the metric is `ρ |dz|²`.
    ///
    /// The factor enters quadrature and the map energy density only; the
    /// spinor operators stay flat, so charts carrying a factor are meant for
    /// map-only quantities.
    pub fn with_conformal_factor(mut self, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != self.grid.len() {
            return Err(DhmError::Domain("conformal factor length does not match grid".into()));
        }
        if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(DhmError::Domain(format!("conformal factor must be positive, found {bad}")));
        }
        self.conformal_factor = Some(rho);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn n(&self) -> usize {
        self.grid.n
    }
    pub fn h(&self) -> f64 {
        self.grid.h
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn topology(&self) -> Topology {
        self.grid.topology
    }
    pub fn window(&self) -> Option<f64> {
        self.window
    }
    pub fn point(&self, idx: usize) -> [f64; 2] {
        self.grid.point(idx)
    }
    pub fn scalar_curvature(&self) -> f64 {
        self.scalar_curvature
    }

    pub fn conformal_factor(&self, idx: usize) -> f64 {
        self.conformal_factor.as_ref().map_or(1.0, |rho| rho[idx])
    }

    /// Same geometry at a different resolution (window and topology kept).
    pub fn refined(&self, n: usize) -> Result<Self> {
        let mut chart = Self::from_grid(Grid2D::new(n, self.grid.side, self.grid.topology)?)?;
        chart.window = self.window;
        Ok(chart)
    }

    /// Radius of the region on which interior identities are evaluated.
    pub fn interior_radius(&self) -> f64 {
        match self.grid.topology {
            Topology::Torus => self.window.unwrap_or(f64::INFINITY),
            Topology::Disk => {
                let margin = 1.0 - 4.0 * self.grid.h;
                self.window.map_or(margin, |w| w.min(margin))
            }
        }
    }

    /// Nodes on which identities are evaluated.
    pub fn interior_mask(&self) -> Vec<bool> {
        let r = self.interior_radius();
        (0..self.len())
            .map(|k| {
                let [x, y] = self.point(k);
                x * x + y * y <= r * r
            })
            .collect()
    }

    /// Nodes belonging to the chart domain (all nodes on the torus, the closed
    /// unit disk otherwise).
    pub fn domain_mask(&self) -> Vec<bool> {
        match self.grid.topology {
            Topology::Torus => vec![true; self.len()],
            Topology::Disk => (0..self.len())
                .map(|k| {
                    let [x, y] = self.point(k);
                    x * x + y * y <= 1.0
                })
                .collect(),
        }
    }

    /// Nodes at which stencil outputs are defined: every node of a torus, the
    /// stencil-valid nodes of a disk. Global integrals of derivative
    /// densities are taken over this set.
    pub fn integration_mask(&self) -> Vec<bool> {
        self.stencil_ok.clone()
    }

    /// Stencil-valid nodes whose stencil does not wrap across the edge of the
    /// square, for fields that are not periodic.
    pub fn unwrapped_mask(&self) -> Vec<bool> {
        let n = self.grid.n;
        (0..self.len())
            .map(|k| {
                let (i, j) = (k % n, k / n);
                self.stencil_ok[k] && i > 0 && j > 0 && i + 1 < n && j + 1 < n
            })
            .collect()
    }

    /// Whether the centered stencil at `idx` is defined.
    pub fn stencil_valid(&self, idx: usize) -> bool {
        self.stencil_ok[idx]
    }

    // ---------------------------------------------------------------- stencils

    /// Centered first derivative along `axis`.
    pub fn derivative<T: FieldValue>(&self, field: &[T], axis: Axis) -> Vec<T> {
        let mut out = periodic_derivative(&self.grid, field, axis);
        self.mask_invalid(&mut out);
        out
    }

    /// Five-point Laplacian.
    pub fn laplacian<T: FieldValue>(&self, field: &[T]) -> Vec<T> {
        assert_eq!(field.len(), self.len(), "field length does not match grid");
        let g = &self.grid;
        let inv_h2 = 1.0 / (g.h * g.h);
        let mut out = vec![T::zero(); g.len()];
        out.par_chunks_mut(g.n).enumerate().for_each(|(j, row)| {
            let (jp, jm) = (g.wrap(j, 1), g.wrap(j, -1));
            for (i, o) in row.iter_mut().enumerate() {
                let (ip, im) = (g.wrap(i, 1), g.wrap(i, -1));
                let c = field[g.idx(i, j)];
                let s = field[g.idx(ip, j)] + field[g.idx(im, j)] + field[g.idx(i, jp)] + field[g.idx(i, jm)]
                    - c * 4.0;
                *o = s * inv_h2;
            }
        });
        self.mask_invalid(&mut out);
        out
    }

    fn mask_invalid<T: FieldValue>(&self, out: &mut [T]) {
        if self.grid.topology == Topology::Disk {
            for (o, ok) in out.iter_mut().zip(&self.stencil_ok) {
                if !ok {
                    *o = T::invalid();
                }
            }
        }
    }

    // -------------------------------------------------------------- quadrature

    /// Node-sum quadrature over the chart domain, weighted by the conformal factor.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.integrate_masked(field, &self.domain_mask())
    }

    /// Node-sum quadrature restricted to `mask`.
    pub fn integrate_masked(&self, field: &[f64], mask: &[bool]) -> f64 {
        let h2 = self.grid.h * self.grid.h;
        field
            .iter()
            .zip(mask)
            .enumerate()
            .filter(|(_, (_, m))| **m)
            .map(|(k, (v, _))| v * self.conformal_factor(k))
            .sum::<f64>()
            * h2
    }

    /// Bilinear interpolation at an arbitrary point. Outside the sampled
    /// square of a disk chart the result is invalid.
    pub fn interpolate<T: FieldValue>(&self, field: &[T], p: [f64; 2]) -> T {
        let g = &self.grid;
        let u = (p[0] + 0.5 * g.side) / g.h;
        let v = (p[1] + 0.5 * g.side) / g.h;
        if !(u.is_finite() && v.is_finite()) {
            return T::invalid();
        }
        let (i0, j0) = (u.floor(), v.floor());
        let (s, t) = (u - i0, v - j0);
        let n = g.n as isize;
        let (i0, j0) = (i0 as isize, j0 as isize);
        let (ia, ib, ja, jb) = match g.topology {
            Topology::Torus => (
                i0.rem_euclid(n) as usize,
                (i0 + 1).rem_euclid(n) as usize,
                j0.rem_euclid(n) as usize,
                (j0 + 1).rem_euclid(n) as usize,
            ),
            Topology::Disk => {
                if i0 < 0 || j0 < 0 || i0 + 1 >= n || j0 + 1 >= n {
                    return T::invalid();
                }
                (i0 as usize, i0 as usize + 1, j0 as usize, j0 as usize + 1)
            }
        };
        field[g.idx(ia, ja)] * ((1.0 - s) * (1.0 - t))
            + field[g.idx(ib, ja)] * (s * (1.0 - t))
            + field[g.idx(ia, jb)] * ((1.0 - s) * t)
            + field[g.idx(ib, jb)] * (s * t)
    }

    /// Check that a centred circle of radius `r` can be sampled.
    pub fn check_circle_radius(&self, r: f64) -> Result<()> {
        let h = self.grid.h;
        let upper = match self.grid.topology {
            Topology::Disk => 1.0 - 4.0 * h,
            Topology::Torus => self.window.unwrap_or(0.5 * self.grid.side - 4.0 * h),
        };
        if !(r >= 4.0 * h && r <= upper) {
            return Err(DhmError::Domain(format!(
                "circle radius {r} outside the admissible range [{:.4}, {:.4}]",
                4.0 * h,
                upper
            )));
        }
        Ok(())
    }

    /// Angles and points of an equispaced circle sampling.
    pub fn circle_points(&self, r: f64, n_theta: usize) -> Vec<(f64, [f64; 2])> {
        (0..n_theta)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
                (th, [r * th.cos(), r * th.sin()])
            })
            .collect()
    }

    /// Trapezoidal `∫₀^{2π} f(r, θ) dθ` with bilinear interpolation.
    pub fn circle_integral(&self, field: &[f64], r: f64, n_theta: usize) -> Result<f64> {
        self.check_circle_radius(r)?;
        if n_theta < 3 {
            return Err(DhmError::Domain("circle quadrature needs at least 3 angles".into()));
        }
        let dth = 2.0 * std::f64::consts::PI / n_theta as f64;
        let mut sum = 0.0;
        for (_, p) in self.circle_points(r, n_theta) {
            let v = self.interpolate(field, p);
            if !v.is_valid() {
                return Err(DhmError::Domain(format!("field undefined on the circle of radius {r}")));
            }
            sum += v;
        }
        Ok(sum * dth)
    }
}

/// Centered difference with wrap-around on every topology. Callers that need
/// disk masking go through [`DomainChart::derivative`].
pub(crate) fn periodic_derivative<T: FieldValue>(g: &Grid2D, field: &[T], axis: Axis) -> Vec<T> {
    assert_eq!(field.len(), g.len(), "field length does not match grid");
    let inv_2h = 0.5 / g.h;
    let mut out = vec![T::zero(); g.len()];
    out.par_chunks_mut(g.n).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            let (a, b) = match axis {
                Axis::X => (g.idx(g.wrap(i, 1), j), g.idx(g.wrap(i, -1), j)),
                Axis::Y => (g.idx(i, g.wrap(j, 1)), g.idx(i, g.wrap(j, -1))),
            };
            *o = (field[a] - field[b]) * inv_2h;
        }
    });
    out
}

// -------------------------------------------------------------------- Möbius

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoebiusKind {
    DiskAutomorphism,
    PlaneSimilarity,
    General,
}

/// `z ↦ (az + b)/(cz + d)` normalised to `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub kind: MoebiusKind,
}

/// Image point together with the pointwise dilation and spin lift of a conformal map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalImage {
    pub point: [f64; 2],
    /// `|f′(x)|`.
    pub lambda: f64,
    /// The branch `1/(cz + d)` of `√f′`, used to carry spinor frames along.
    pub spin: Complex64,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one, kind: MoebiusKind::PlaneSimilarity }
    }

    /// `z ↦ αz + β` with `α ≠ 0`.
    pub fn similarity(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if alpha.norm() == 0.0 || !alpha.is_finite() || !beta.is_finite() {
            return Err(DhmError::Domain("similarity needs a finite nonzero scale".into()));
        }
        let s = alpha.sqrt();
        Ok(Self { a: s, b: beta / s, c: Complex64::new(0.0, 0.0), d: s.inv(), kind: MoebiusKind::PlaneSimilarity })
    }

    /// `z ↦ e^{iθ}(z − p)/(1 − p̄z)` with `|p| < 1`.
    pub fn disk_automorphism(p: Complex64, theta: f64) -> Result<Self> {
        if !(p.norm() < 1.0) {
            return Err(DhmError::Domain(format!("disk automorphism needs |p| < 1, got {}", p.norm())));
        }
        let k = 1.0 / (1.0 - p.norm_sqr()).sqrt();
        let rot = Complex64::from_polar(1.0, 0.5 * theta);
        Ok(Self {
            a: rot * k,
            b: -p * rot * k,
            c: -p.conj() * rot.conj() * k,
            d: rot.conj() * k,
            kind: MoebiusKind::DiskAutomorphism,
        })
    }

    pub fn from_coefficients(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-14 {
            return Err(DhmError::Domain("degenerate Möbius coefficients".into()));
        }
        let s = det.sqrt().inv();
        Ok(Self { a: a * s, b: b * s, c: c * s, d: d * s, kind: MoebiusKind::General })
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let kind = if self.kind == other.kind { self.kind } else { MoebiusKind::General };
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
            kind,
        }
    }

    pub fn apply(&self, x: [f64; 2]) -> Result<ConformalImage> {
        let z = Complex64::new(x[0], x[1]);
        let den = self.c * z + self.d;
        if den.norm() < 1e-300 {
            return Err(DhmError::Domain(format!("Möbius map has a pole at ({}, {})", x[0], x[1])));
        }
        let w = (self.a * z + self.b) / den;
        let spin = den.inv();
        Ok(ConformalImage { point: [w.re, w.im], lambda: spin.norm_sqr(), spin })
    }
}

/// `f(x)` and `λ(x) = |f′(x)|`.
pub fn moebius_apply(f: &MoebiusMap, x: [f64; 2]) -> Result<([f64; 2], f64)> {
    f.apply(x).map(|img| (img.point, img.lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_tiny_grids() {
        assert!(DomainChart::torus(4, 1.0).is_err());
        assert!(DomainChart::torus(16, 0.0).is_err());
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let c = DomainChart::torus(16, 1.0).unwrap();
        let f = vec![3.5; c.len()];
        assert!(c.derivative(&f, Axis::X).iter().all(|v| v.abs() < 1e-12));
        assert!(c.laplacian(&f).iter().all(|v| v.abs() < 1e-9));
    }

    fn sin_error(n: usize) -> f64 {
        let c = DomainChart::torus(n, 1.0).unwrap();
        let f: Vec<f64> = (0..c.len()).map(|k| (2.0 * PI * c.point(k)[0]).sin()).collect();
        let d = c.derivative(&f, Axis::X);
        (0..c.len())
            .map(|k| (d[k] - 2.0 * PI * (2.0 * PI * c.point(k)[0]).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn derivative_of_sine_is_second_order() {
        let (e1, e2) = (sin_error(32), sin_error(64));
        assert!(e1 < 0.05);
        let ratio = e1 / e2;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    fn window(r2: f64) -> f64 {
        if r2 >= 1.0 {
            0.0
        } else {
            (-r2 / (1.0 - r2)).exp()
        }
    }

    fn quadratic_laplacian_error(n: usize) -> f64 {
        // windowed x² + y² on a torus of side 4
        let c = DomainChart::torus(n, 4.0).unwrap();
        let f: Vec<f64> = (0..c.len())
            .map(|k| {
                let [x, y] = c.point(k);
                let r2 = x * x + y * y;
                r2 * window(r2 / 2.25)
            })
            .collect();
        let lap = c.laplacian(&f);
        let center = c.grid().idx(n / 2, n / 2);
        // the exact Laplacian of r² w(r²/a) at the origin is 4
        (lap[center] - 4.0).abs()
    }

    #[test]
    fn windowed_quadratic_laplacian_at_centre() {
        let (e1, e2) = (quadratic_laplacian_error(64), quadratic_laplacian_error(128));
        assert!(e1 < 1e-2, "{e1}");
        let ratio = e1 / e2;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn torus_quadrature() {
        let c = DomainChart::torus(32, 1.0).unwrap();
        assert!((c.integrate(&vec![1.0; c.len()]) - 1.0).abs() < 1e-14);
        let f: Vec<f64> = (0..c.len()).map(|k| (2.0 * PI * c.point(k)[0]).sin().powi(2)).collect();
        assert!((c.integrate(&f) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn circle_circumference() {
        let c = DomainChart::disk(64).unwrap();
        let one = vec![1.0; c.len()];
        let v = c.circle_integral(&one, 0.5, 256).unwrap() * 0.5;
        assert!((v - 2.0 * PI * 0.5).abs() < 1e-6);
        assert!(c.circle_integral(&one, 0.99, 256).is_err());
        assert!(c.circle_integral(&one, 0.0, 256).is_err());
    }

    #[test]
    fn disk_boundary_ring_is_invalid() {
        let c = DomainChart::disk(32).unwrap();
        let f = vec![1.0; c.len()];
        let d = c.derivative(&f, Axis::X);
        let corner = c.grid().idx(0, 0);
        assert!(d[corner].is_nan());
        let centre = c.grid().idx(16, 16);
        assert_eq!(d[centre], 0.0);
    }

    #[test]
    fn moebius_examples() {
        let (p, l) = moebius_apply(&MoebiusMap::identity(), [0.3, -0.2]).unwrap();
        assert_eq!(p, [0.3, -0.2]);
        assert_eq!(l, 1.0);

        let f = MoebiusMap::similarity(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        let (p, l) = moebius_apply(&f, [0.25, 0.5]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
        assert!((l - 2.0).abs() < 1e-14);

        let f = MoebiusMap::disk_automorphism(Complex64::new(0.3, 0.0), 0.0).unwrap();
        let (_, l) = moebius_apply(&f, [0.0, 0.0]).unwrap();
        // analytic derivative of (z − a)/(1 − āz) at 0 is 1 − |a|²
        assert!((l - 0.91).abs() < 1e-14);
        assert!((f.determinant() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn disk_automorphism_preserves_disk() {
        let f = MoebiusMap::disk_automorphism(Complex64::new(0.2, -0.4), 1.1).unwrap();
        for k in 0..64 {
            let th = k as f64 * 0.1;
            let (p, _) = moebius_apply(&f, [th.cos(), th.sin()]).unwrap();
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn moebius_pole_is_a_domain_error() {
        let f = MoebiusMap::disk_automorphism(Complex64::new(0.5, 0.0), 0.0).unwrap();
        assert!(f.apply([2.0, 0.0]).is_err());
    }
}
