use std::sync::Arc;

use dhm_core::conserved::{dbar_defect, energy_momentum, hopf_differential, hopf_map_part, pohozaev_circle};
use dhm_core::exact::{conformal_map_field, twistor_pushforward, RationalMap};
use dhm_core::spinor::Spinor;
use dhm_core::{DomainChart, MapField, MoebiusMap, TargetGeometry, TwistedSpinorField};
use num_complex::Complex64;
use proptest::prelude::*;

fn moebius() -> impl Strategy<Value = MoebiusMap> {
    prop_oneof![
        (0.5f64..2.0, 0.0f64..6.28, -0.5f64..0.5, -0.5f64..0.5)
            .prop_map(|(r, t, bx, by)| MoebiusMap::similarity(Complex64::from_polar(r, t), Complex64::new(bx, by)).unwrap()),
        (0.0f64..0.6, 0.0f64..6.28, 0.0f64..6.28)
            .prop_map(|(r, t, th)| MoebiusMap::disk_automorphism(Complex64::from_polar(r, t), th).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilation_is_multiplicative_under_composition(f in moebius(), g in moebius(), x in -0.5f64..0.5, y in -0.5f64..0.5) {
        let inner = g.apply([x, y]).unwrap();
        let outer = f.apply(inner.point).unwrap();
        let both = f.compose(&g).apply([x, y]).unwrap();
        prop_assert!((both.lambda - outer.lambda * inner.lambda).abs() <= 1e-12 * both.lambda.max(1.0));
        prop_assert!((both.point[0] - outer.point[0]).abs() <= 1e-12 && (both.point[1] - outer.point[1]).abs() <= 1e-12);
    }

    #[test]
    fn map_part_vanishes_for_rational_maps(ar in -2.0f64..2.0, ai in -2.0f64..2.0, x in -0.8f64..0.8, y in -0.8f64..0.8) {
        let rmap = RationalMap::new(
            vec![Complex64::new(0.1, 0.0), Complex64::new(ar, ai), Complex64::new(0.0, 0.5)],
            vec![Complex64::new(1.0, 0.0)],
        ).unwrap();
        let [fx, fy] = rmap.map_jacobian([x, y]).unwrap();
        let size: f64 = fx.iter().map(|v| v * v).sum();
        prop_assert!(hopf_map_part(&fx, &fy).norm() <= 1e-12 * (1.0 + size));
    }
}

#[test]
fn constant_pair_tensor_and_circles_vanish() {
    let chart = Arc::new(DomainChart::disk(64).unwrap());
    let phi = MapField::constant(chart.clone(), TargetGeometry::sphere(2), &[0.0, 0.0, 1.0]).unwrap();
    let s = Spinor::from_parts(0.3, -0.1, 0.2, 0.4);
    let psi = TwistedSpinorField::from_fn(chart.clone(), 3, |_| vec![s, s * 2.0, Spinor::ZERO]).unwrap();
    let t = energy_momentum(&phi, &psi).unwrap();
    let mask = chart.interior_mask();
    assert!(t.symmetry_defect(&mask).sup <= 1e-14);
    assert!(dbar_defect(&hopf_differential(&phi, &psi).unwrap()) <= 1e-12);
    for r in [0.25, 0.5, 0.75] {
        let c = pohozaev_circle(&phi, &psi, r, 256).unwrap();
        assert!(c.radial_defect.abs() <= 1e-12 && c.angular_defect.abs() <= 1e-12, "r = {r}: {c:?}");
    }
}

#[test]
fn twistor_dbar_defect_is_second_order_on_the_disk() {
    let d: Vec<f64> = [64, 128]
        .iter()
        .map(|&n| {
            let chart = Arc::new(DomainChart::disk(n).unwrap());
            let phi = conformal_map_field(&RationalMap::affine(Complex64::new(0.8, -0.3), Complex64::new(0.05, 0.1)), chart).unwrap();
            let psi = twistor_pushforward(&phi, Spinor::from_parts(0.5, 0.0, 0.0, 0.5), Spinor::from_parts(0.0, 0.2, -0.1, 0.0));
            dbar_defect(&hopf_differential(&phi, &psi).unwrap())
        })
        .collect();
    let ratio = d[0] / d[1];
    assert!((3.4..=4.6).contains(&ratio), "ratio {ratio:.3} ({:.3e} -> {:.3e})", d[0], d[1]);
}
