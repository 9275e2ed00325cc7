//! Extrinsic geometry of the target manifold inside `R^K`.

use crate::error::{DhmError, Result};

/// Target manifold: the unit sphere `Sⁿ ⊂ R^{n+1}` or flat `R^K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetGeometry {
    Sphere { n: usize },
    Flat { k: usize },
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl TargetGeometry {
    pub fn sphere(n: usize) -> Self {
        TargetGeometry::Sphere { n }
    }

    pub fn flat(k: usize) -> Self {
        TargetGeometry::Flat { k }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            TargetGeometry::Sphere { n } => n + 1,
            TargetGeometry::Flat { k } => k,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, TargetGeometry::Sphere { .. })
    }

    fn check_len(&self, v: &[f64]) {
        assert_eq!(v.len(), self.ambient_dim(), "vector length does not match ambient dimension");
    }

    /// Nearest point of the target.
    pub fn project_point(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(p);
        match self {
            TargetGeometry::Sphere { .. } => {
                let r = norm(p);
                if !(r > 0.0 && r.is_finite()) {
                    return Err(DhmError::Domain(format!("cannot project |p| = {r} onto the sphere")));
                }
                Ok(p.iter().map(|x| x / r).collect())
            }
            TargetGeometry::Flat { .. } => Ok(p.to_vec()),
        }
    }

    /// Orthogonal projection of `x` onto `T_p N`.
    pub fn tangent_project(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.tangent_project_in_place(p, &mut out);
        out
    }

    pub fn tangent_project_in_place(&self, p: &[f64], x: &mut [f64]) {
        self.check_len(x);
        if self.is_sphere() {
            let c = dot(x, p);
            x.iter_mut().zip(p).for_each(|(xi, pi)| *xi -= c * pi);
        }
    }

    /// Second fundamental form `A(X, Y)`; inputs are projected to `T_p N` first.
    pub fn second_fundamental(&self, p: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
        match self {
            TargetGeometry::Sphere { .. } => {
                let c = dot(&self.tangent_project(p, x), &self.tangent_project(p, y));
                p.iter().map(|pi| -c * pi).collect()
            }
            TargetGeometry::Flat { k } => vec![0.0; *k],
        }
    }

    /// Shape operator `P(ξ; X)` with `⟨P(ξ; X), Y⟩ = ⟨A(X, Y), ξ⟩`.
    pub fn shape_operator(&self, p: &[f64], xi: &[f64], x: &[f64]) -> Vec<f64> {
        match self {
            TargetGeometry::Sphere { .. } => {
                let c = dot(xi, p);
                self.tangent_project(p, x).iter().map(|v| -c * v).collect()
            }
            TargetGeometry::Flat { k } => vec![0.0; *k],
        }
    }

    /// Riemann tensor `R(X, Y)Z` from the Gauss equation,
    /// `P(A(Y, Z); X) − P(A(X, Z); Y)`.
    pub fn curvature(&self, p: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let a = self.shape_operator(p, &self.second_fundamental(p, y, z), x);
        let b = self.shape_operator(p, &self.second_fundamental(p, x, z), y);
        a.iter().zip(&b).map(|(u, v)| u - v).collect()
    }

    /// Sectional curvature of the plane spanned by `X, Y` (0 for degenerate planes).
    pub fn sectional_curvature(&self, p: &[f64], x: &[f64], y: &[f64]) -> f64 {
        let (x, y) = (self.tangent_project(p, x), self.tangent_project(p, y));
        let area = dot(&x, &x) * dot(&y, &y) - dot(&x, &y).powi(2);
        if area <= 0.0 {
            return 0.0;
        }
        dot(&self.curvature(p, &x, &y, &y), &x) / area
    }
}
