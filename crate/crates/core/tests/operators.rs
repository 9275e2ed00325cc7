use std::sync::Arc;

use dhm_core::exact::{random_smooth_pair, twistor_pushforward, RationalMap};
use dhm_core::fields::{complex_pairing, curvature_term, dirac_along_map, el_residual};
use dhm_core::spinor::Spinor;
use dhm_core::{exact, DomainChart, TargetGeometry};
use num_complex::Complex64;
use proptest::prelude::*;

fn torus(n: usize) -> Arc<DomainChart> {
    Arc::new(DomainChart::torus(n, 2.0).unwrap())
}

#[test]
fn dirac_along_map_is_symmetric() {
    let chart = torus(32);
    let target = TargetGeometry::sphere(2);
    for t in 0..20u64 {
        let (phi, psi) = random_smooth_pair(chart.clone(), target, 100 + t).unwrap();
        let (_, xi) = random_smooth_pair(chart.clone(), target, 500 + t).unwrap();
        let xi = xi.projected_tangent(&phi);
        let (dpsi, _) = dirac_along_map(&phi, &psi).unwrap();
        let (dxi, _) = dirac_along_map(&phi, &xi).unwrap();
        let lhs = complex_pairing(&chart, psi.comps(), &dxi);
        let rhs = complex_pairing(&chart, &dpsi, xi.comps());
        let l2 = |c: &[Vec<Spinor>]| complex_pairing(&chart, c, c).re.sqrt();
        let scale = l2(psi.comps()) * l2(&dxi) + l2(&dpsi) * l2(xi.comps());
        let defect = (lhs - rhs).norm();
        assert!(defect <= 1e-11 * scale, "triple {t}: {defect:.3e} vs scale {scale:.3e}");
    }
}

#[test]
fn pushforward_residuals_shrink_quadratically() {
    let a = RationalMap::affine(Complex64::new(1.0, 0.2), Complex64::new(0.1, -0.1));
    let psi0 = Spinor::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let psi1 = Spinor::new(Complex64::new(0.0, 0.3), Complex64::new(0.2, 0.0));
    let sup = |n: usize| {
        let chart = Arc::new(DomainChart::torus(n, 2.0).unwrap().with_window(0.6).unwrap());
        let phi = exact::conformal_map_field(&a, chart).unwrap();
        let psi = twistor_pushforward(&phi, psi0, psi1);
        let r = el_residual(&phi, &psi).unwrap();
        (r.map.sup, r.spinor.sup)
    };
    let (m1, s1) = sup(64);
    let (m2, s2) = sup(128);
    for (name, c, f) in [("map", m1, m2), ("spinor", s1, s2)] {
        let ratio = c / f;
        assert!((3.4..=4.6).contains(&ratio), "{name} ratio {ratio:.3}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pushforward_curvature_term_vanishes(
        ar in -1.5f64..1.5, ai in -1.5f64..1.5, br in -0.3f64..0.3, bi in -0.3f64..0.3,
        p in proptest::array::uniform4(-1.0f64..1.0), q in proptest::array::uniform4(-1.0f64..1.0),
    ) {
        prop_assume!(ar.hypot(ai) > 0.2);
        let rmap = RationalMap::affine(Complex64::new(ar, ai), Complex64::new(br, bi));
        let chart = Arc::new(DomainChart::torus(24, 2.0).unwrap());
        let phi = exact::conformal_map_field(&rmap, chart).unwrap();
        let psi = twistor_pushforward(&phi, Spinor::from_parts(p[0], p[1], p[2], p[3]), Spinor::from_parts(q[0], q[1], q[2], q[3]));
        let r = curvature_term(&phi, &psi).unwrap();
        let scale = 1.0 + phi.dirichlet_density().iter().fold(0.0f64, |m, v| m.max(*v)).sqrt() * psi.scale() * psi.scale();
        let worst = r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(worst <= 1e-10 * scale, "{worst:.3e}");
    }

    #[test]
    fn random_pairs_are_admissible(seed in 0u64..1000) {
        let chart = torus(16);
        let (phi, psi) = random_smooth_pair(chart, TargetGeometry::sphere(2), seed).unwrap();
        prop_assert!(phi.on_manifold_defect() <= 1e-12);
        prop_assert!(psi.tangency_defect(&phi) <= 1e-12 * psi.scale().max(1.0));
    }
}
