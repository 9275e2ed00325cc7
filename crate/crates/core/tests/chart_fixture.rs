//! Intrinsic cross-check on a stereographic chart of the upper half-sphere.
//!
//! The map is given by chart coordinates `y(x)`, the spinor by coordinate
//! coefficients `ψ^i`. With `g = e^{2u} δ`, `u = log 2 − log(1 + |y|²)`, the
//! Christoffel symbols are `Γ^i_jk = δ^i_j u_k + δ^i_k u_j − δ_jk u_i` and the
//! curvature is `R(X, Y)Z = g(Y, Z)X − g(X, Z)Y`. Everything intrinsic is
//! pushed forward by `dF` and compared with the extrinsic operators.

use std::f64::consts::TAU;
use std::sync::Arc;

use dhm_core::fields::{covariant_derivative, curvature_term, tension};
use dhm_core::spinor::{e_alpha, Spinor};
use dhm_core::{Axis, DomainChart, MapField, TargetGeometry, TwistedSpinorField};

fn chart_y(x: [f64; 2]) -> [f64; 2] {
    [
        0.3 * (TAU * x[0]).sin() + 0.1 * (TAU * x[1]).cos(),
        0.2 * (TAU * (x[0] + x[1])).cos() - 0.1,
    ]
}

fn coeffs(x: [f64; 2]) -> [Spinor; 2] {
    let (a, b) = (TAU * x[0], TAU * x[1]);
    [
        Spinor::from_parts(a.cos(), 0.5 * b.sin(), 0.2, -0.3 * (a + b).sin()),
        Spinor::from_parts(-0.4, b.cos(), 0.3 * a.sin(), 0.7),
    ]
}

fn embed(y: [f64; 2]) -> Vec<f64> {
    let s = 1.0 + y[0] * y[0] + y[1] * y[1];
    vec![2.0 * y[0] / s, 2.0 * y[1] / s, 2.0 / s - 1.0]
}

/// Columns `∂_1 F`, `∂_2 F`.
fn embed_jacobian(y: [f64; 2]) -> [[f64; 3]; 2] {
    let s = 1.0 + y[0] * y[0] + y[1] * y[1];
    let col = |i: usize| {
        let mut c = [0.0; 3];
        for m in 0..2 {
            c[m] = if m == i { 2.0 / s } else { 0.0 } - 4.0 * y[m] * y[i] / (s * s);
        }
        c[2] = -4.0 * y[i] / (s * s);
        c
    };
    [col(0), col(1)]
}

fn grad_u(y: [f64; 2]) -> [f64; 2] {
    let s = 1.0 + y[0] * y[0] + y[1] * y[1];
    [-2.0 * y[0] / s, -2.0 * y[1] / s]
}

struct Fixture {
    chart: Arc<DomainChart>,
    y: [Vec<f64>; 2],
    dy: [[Vec<f64>; 2]; 2],
    phi: MapField,
    psi: TwistedSpinorField,
    coef: [Vec<Spinor>; 2],
}

fn fixture(n: usize) -> Fixture {
    let chart = Arc::new(DomainChart::torus(n, 1.0).unwrap());
    let pts: Vec<[f64; 2]> = (0..chart.len()).map(|k| chart.point(k)).collect();
    let y: [Vec<f64>; 2] = std::array::from_fn(|i| pts.iter().map(|&x| chart_y(x)[i]).collect());
    let dy = [
        [chart.derivative(&y[0], Axis::X), chart.derivative(&y[1], Axis::X)],
        [chart.derivative(&y[0], Axis::Y), chart.derivative(&y[1], Axis::Y)],
    ];
    let phi = MapField::new(
        chart.clone(),
        TargetGeometry::sphere(2),
        (0..3).map(|m| pts.iter().map(|&x| embed(chart_y(x))[m]).collect()).collect(),
    )
    .unwrap();
    let coef: [Vec<Spinor>; 2] = std::array::from_fn(|i| pts.iter().map(|&x| coeffs(x)[i]).collect());
    let psi = TwistedSpinorField::from_fn(chart.clone(), 3, |x| {
        let j = embed_jacobian(chart_y(x));
        let c = coeffs(x);
        (0..3).map(|m| c[0] * j[0][m] + c[1] * j[1][m]).collect()
    })
    .unwrap();
    Fixture { chart, y, dy, phi, psi, coef }
}

impl Fixture {
    fn yk(&self, k: usize) -> [f64; 2] {
        [self.y[0][k], self.y[1][k]]
    }
}

fn push_real(j: &[[f64; 3]; 2], v: [f64; 2]) -> [f64; 3] {
    std::array::from_fn(|m| v[0] * j[0][m] + v[1] * j[1][m])
}

fn tension_gap(n: usize) -> f64 {
    let fx = fixture(n);
    let lap = [fx.chart.laplacian(&fx.y[0]), fx.chart.laplacian(&fx.y[1])];
    let ext = tension(&fx.phi);
    let mut worst: f64 = 0.0;
    for k in 0..fx.chart.len() {
        let yk = fx.yk(k);
        let u = grad_u(yk);
        let mut t = [lap[0][k], lap[1][k]];
        for a in 0..2 {
            let v = [fx.dy[a][0][k], fx.dy[a][1][k]];
            let uv = u[0] * v[0] + u[1] * v[1];
            let vv = v[0] * v[0] + v[1] * v[1];
            for i in 0..2 {
                t[i] += 2.0 * v[i] * uv - vv * u[i];
            }
        }
        let p = push_real(&embed_jacobian(yk), t);
        for m in 0..3 {
            worst = worst.max((p[m] - ext[m][k]).abs());
        }
    }
    worst
}

fn connection_gap(n: usize) -> f64 {
    let fx = fixture(n);
    let mut worst: f64 = 0.0;
    for (a, axis) in Axis::BOTH.into_iter().enumerate() {
        let ext = covariant_derivative(&fx.phi, &fx.psi, axis);
        let dc = [fx.chart.derivative(&fx.coef[0], axis), fx.chart.derivative(&fx.coef[1], axis)];
        for k in 0..fx.chart.len() {
            let yk = fx.yk(k);
            let u = grad_u(yk);
            let v = [fx.dy[a][0][k], fx.dy[a][1][k]];
            let c = [fx.coef[0][k], fx.coef[1][k]];
            // Γ^i_jk ψ^j v^k = ψ^i (u·v) + v^i (u·ψ) − u^i (ψ·v)
            let uv = u[0] * v[0] + u[1] * v[1];
            let upsi = c[0] * u[0] + c[1] * u[1];
            let psiv = c[0] * v[0] + c[1] * v[1];
            let w: [Spinor; 2] = std::array::from_fn(|i| dc[i][k] + c[i] * uv + upsi * v[i] - psiv * u[i]);
            let j = embed_jacobian(yk);
            for m in 0..3 {
                let p = w[0] * j[0][m] + w[1] * j[1][m];
                worst = worst.max((p - ext[m][k]).norm());
            }
        }
    }
    worst
}

fn curvature_gap(n: usize) -> f64 {
    let fx = fixture(n);
    let ext = curvature_term(&fx.phi, &fx.psi).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..fx.chart.len() {
        let yk = fx.yk(k);
        let s = 1.0 + yk[0] * yk[0] + yk[1] * yk[1];
        let g = 4.0 / (s * s);
        let c = [fx.coef[0][k], fx.coef[1][k]];
        let mut r = [0.0; 2];
        for (a, axis) in Axis::BOTH.into_iter().enumerate() {
            let v = [fx.dy[a][0][k], fx.dy[a][1][k]];
            for i in 0..2 {
                for jj in 0..2 {
                    let b = 0.5 * c[i].re_inner(&e_alpha(axis, c[jj]));
                    // R(∂_i, ∂_j) v = g(∂_j, v) ∂_i − g(∂_i, v) ∂_j
                    r[i] += b * g * v[jj];
                    r[jj] -= b * g * v[i];
                }
            }
        }
        let p = push_real(&embed_jacobian(yk), r);
        for m in 0..3 {
            worst = worst.max((p[m] - ext[m][k]).abs());
        }
    }
    worst
}

fn assert_second_order(name: &str, gap: fn(usize) -> f64) {
    let (coarse, fine) = (gap(64), gap(128));
    let ratio = coarse / fine;
    assert!(fine < 1e-2, "{name}: gap {fine:.3e} at 128");
    assert!((3.4..=4.6).contains(&ratio), "{name}: ratio {ratio:.3} ({coarse:.3e} -> {fine:.3e})");
}

#[test]
fn tension_matches_christoffel_form() {
    assert_second_order("tension", tension_gap);
}

#[test]
fn spinor_connection_matches_christoffel_form() {
    assert_second_order("connection", connection_gap);
}

#[test]
fn curvature_term_matches_intrinsic_contraction() {
    assert_second_order("curvature", curvature_gap);
}
