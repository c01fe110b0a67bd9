use defect_fields::condensate::{charge_by_intersection, winding_number, GradFProvider, LineSourceTensor};
use defect_fields::fields::observables_at;
use defect_fields::{Contour, DefectCurve, PhysicalParams, QuadraturePolicy, Vec3};
use proptest::prelude::*;

fn straight() -> GradFProvider {
    GradFProvider::for_curve(DefectCurve::straight_z(), QuadraturePolicy::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn winding_counts_enclosure(cx in -2.0..2.0f64, cy in -2.0..2.0f64, z in -3.0..3.0f64, r in 0.2..4.0f64) {
        let d = cx.hypot(cy);
        prop_assume!((r - d).abs() > 0.05);
        let c = Contour::circle(Vec3::new(cx, cy, z), r, Vec3::z(), 96).unwrap();
        let w = winding_number(&c, &straight()).unwrap();
        prop_assert_eq!(w.n, i64::from(r > d));
        prop_assert!(w.quality < 1e-9);
        prop_assert_eq!(winding_number(&c.reversed(), &straight()).unwrap().n, -w.n);
    }

    #[test]
    fn winding_equals_crossings_for_tilted_circles(
        cx in -1.5..1.5f64, cy in -1.5..1.5f64, r in 0.3..3.0f64,
        nx in -1.0..1.0f64, ny in -1.0..1.0f64, nz in 0.2..1.0f64,
    ) {
        let c = Contour::circle(Vec3::new(cx, cy, 0.0), r, Vec3::new(nx, ny, nz), 96).unwrap();
        let gf = straight();
        prop_assume!(gf.contour_clearance(&c) > 0.05);
        let n = winding_number(&c, &gf).unwrap().n;
        let k = charge_by_intersection(&c, &LineSourceTensor::new(DefectCurve::straight_z())).unwrap();
        prop_assert_eq!(n, k);
    }

    #[test]
    fn fields_scale_inversely_with_coupling(
        x in -3.0..3.0f64, y in -3.0..3.0f64, z in -1.0..1.0f64, e0 in 0.2..5.0f64, mv in 0.2..3.0f64,
    ) {
        prop_assume!(x.hypot(y) > 0.05);
        let p = Vec3::new(x, y, z);
        let a = observables_at(&straight(), &PhysicalParams::new(e0, mv).unwrap(), &p).unwrap();
        let b = observables_at(&straight(), &PhysicalParams::new(2.0 * e0, mv).unwrap(), &p).unwrap();
        let scale = a.field.max_abs().max(a.current.norm()).max(a.potential.norm());
        prop_assert!((a.field.dual() - 2.0 * b.field.dual()).norm() <= 1e-13 * scale);
        prop_assert!((a.current - 2.0 * b.current).norm() <= 1e-13 * scale);
        prop_assert!((a.potential - 2.0 * b.potential).norm() <= 1e-13 * scale);
        prop_assert_eq!(a.grad_f, b.grad_f);
    }

    #[test]
    fn field_tensor_is_antisymmetric(x in -3.0..3.0f64, y in -3.0..3.0f64, z in -1.0..1.0f64) {
        prop_assume!(x.hypot(y) > 0.05);
        let o = observables_at(&straight(), &PhysicalParams::new(1.0, 1.0).unwrap(), &Vec3::new(x, y, z)).unwrap();
        for i in 0..3 {
            prop_assert_eq!(o.field.get(i, i), 0.0);
            for j in 0..3 {
                prop_assert_eq!(o.field.get(i, j), -o.field.get(j, i));
            }
        }
    }

    #[test]
    fn translated_lines_superpose(
        a in -2.0..2.0f64, b in -2.0..2.0f64, x in -3.0..3.0f64, y in -3.0..3.0f64,
    ) {
        let l1 = DefectCurve::straight_z_through(a, b);
        let l2 = DefectCurve::straight_z_through(-b, a);
        let q = QuadraturePolicy::default();
        let pair = GradFProvider::for_curves([l1.clone(), l2.clone()], q);
        let p = Vec3::new(x, y, 0.3);
        prop_assume!(pair.clearance(&p) > 0.05);
        let params = PhysicalParams::new(0.7, 1.1).unwrap();
        let o = observables_at(&pair, &params, &p).unwrap();
        let o1 = observables_at(&GradFProvider::for_curve(l1, q), &params, &p).unwrap();
        let o2 = observables_at(&GradFProvider::for_curve(l2, q), &params, &p).unwrap();
        let tol = 1e-12 * (o1.current.norm() + o2.current.norm() + o1.grad_f.norm() + o2.grad_f.norm() + 1.0);
        prop_assert!((o.current - o1.current - o2.current).norm() <= tol);
        prop_assert!((o.grad_f - o1.grad_f - o2.grad_f).norm() <= tol);
    }
}
