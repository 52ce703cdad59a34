use localfield::decomp::{besov_norm, cz_decompose, suggest_start_scale, triebel_lizorkin_norm};
use localfield::exact::{rational_from_f64, ExactComplex};
use localfield::kernels::{atomic_decompose, unit_cells};
use localfield::operators::apply_tk;
use localfield::{fourier, AngularKernel, FieldConfig, FieldElement, Mode, TestFunction, TruncationSpec, Window};
use num_complex::Complex64;
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = FieldConfig> {
    (prop_oneof![Just(Mode::Padic), Just(Mode::Laurent)], prop_oneof![Just(2u32), Just(3), Just(5)])
        .prop_map(|(m, p)| FieldConfig::new(m, p).unwrap())
}

fn max_depth(field: &FieldConfig) -> i64 {
    match field.q() {
        2 => 5,
        3 => 3,
        _ => 2,
    }
}

fn window_in(field: FieldConfig) -> impl Strategy<Value = Window> {
    let d = max_depth(&field);
    (-3i64..=1, 1..=d).prop_map(|(a, depth)| Window { a, l: a + depth })
}

fn function_on(field: FieldConfig, w: Window) -> impl Strategy<Value = TestFunction> {
    let n = w.cells(&field).unwrap();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
        TestFunction::from_values(field, w, v.into_iter().map(|(x, y)| Complex64::new(x, y)).collect()).unwrap()
    })
}

fn function() -> impl Strategy<Value = TestFunction> {
    field_strategy().prop_flat_map(|f| window_in(f).prop_flat_map(move |w| function_on(f, w)))
}

/// Two functions on the same field.
fn pair() -> impl Strategy<Value = (TestFunction, TestFunction)> {
    field_strategy().prop_flat_map(|f| {
        (window_in(f), window_in(f)).prop_flat_map(move |(w1, w2)| (function_on(f, w1), function_on(f, w2)))
    })
}

fn element(field: FieldConfig) -> impl Strategy<Value = FieldElement> {
    let p = field.p();
    (-4i64..=2, prop::collection::vec(0..p, 0..6))
        .prop_map(move |(level, digits)| field.element(level, digits).unwrap())
}

fn kernel_on(field: FieldConfig) -> impl Strategy<Value = AngularKernel> {
    let m = if field.q() == 2 { 2 } else { 1 };
    let n = unit_cells(&field, m).unwrap();
    prop::collection::vec(-4i64..=4, n).prop_map(move |v| {
        let values: Vec<ExactComplex> = v
            .into_iter()
            .map(|x| ExactComplex::new(rational_from_f64(x as f64).unwrap(), rational_from_f64(0.0).unwrap()))
            .collect();
        AngularKernel::from_exact(field, m, values).unwrap().mean_zero_project()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn absolute_value_is_ultrametric_and_multiplicative(
        (field, x, y) in field_strategy().prop_flat_map(|f| (Just(f), element(f), element(f)))
    ) {
        let (ax, ay) = (field.abs(&x), field.abs(&y));
        prop_assert!(field.abs(&field.add(&x, &y)) <= ax.max(ay));
        if ax != ay {
            prop_assert_eq!(field.abs(&field.add(&x, &y)), ax.max(ay));
        }
        prop_assert_eq!(field.abs_exact(&field.mul(&x, &y)), field.abs_exact(&x) * field.abs_exact(&y));
    }

    #[test]
    fn haar_measure_is_translation_invariant(
        (f, h) in function().prop_flat_map(|f| { let fld = f.field(); (Just(f), element(fld)) })
    ) {
        let g = f.translate(&h).unwrap();
        for r in [1.0, 2.0, 3.0] {
            let (a, b) = (f.lr_norm(r).unwrap(), g.lr_norm(r).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
        prop_assert!((f.integral() - g.integral()).norm() <= 1e-12);
    }

    #[test]
    fn young_inequality(((f, g), r) in (pair(), prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(4.0)])) {
        let c = f.convolve(&g).unwrap();
        let bound = f.lr_norm(1.0).unwrap() * g.lr_norm(r).unwrap();
        prop_assert!(c.lr_norm(r).unwrap() <= bound * (1.0 + 1e-10) + 1e-14);
    }

    #[test]
    fn minkowski_in_all_three_scales((f, g) in pair(), s in 0.25f64..1.5, r in 1.0f64..4.0, t in 1.0f64..4.0) {
        let sum = f.add(&g).unwrap();
        let tol = |a: f64, b: f64| (a + b) * (1.0 + 1e-10) + 1e-14;
        prop_assert!(sum.lr_norm(r).unwrap() <= tol(f.lr_norm(r).unwrap(), g.lr_norm(r).unwrap()));
        let b = |h: &TestFunction| besov_norm(h, s, r, t).unwrap().value;
        prop_assert!(b(&sum) <= tol(b(&f), b(&g)));
        let tl = |h: &TestFunction| triebel_lizorkin_norm(h, s, r, t).unwrap().value;
        prop_assert!(tl(&sum) <= tol(tl(&f), tl(&g)));
    }

    #[test]
    fn norms_are_homogeneous(f in function(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let c = Complex64::new(re, im);
        let g = f.scale(c);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-11 * a.abs().max(b.abs()).max(1e-300);
        prop_assert!(close(g.lr_norm(2.0).unwrap(), c.norm() * f.lr_norm(2.0).unwrap()));
        prop_assert!(close(besov_norm(&g, 0.5, 2.0, 3.0).unwrap().value, c.norm() * besov_norm(&f, 0.5, 2.0, 3.0).unwrap().value));
        prop_assert!(close(
            triebel_lizorkin_norm(&g, 1.0, 1.5, 2.0).unwrap().value,
            c.norm() * triebel_lizorkin_norm(&f, 1.0, 1.5, 2.0).unwrap().value
        ));
    }

    #[test]
    fn fourier_round_trip_and_plancherel(f in function()) {
        let fh = fourier::forward(&f);
        prop_assert!(fourier::inverse(&fh).max_abs_diff(&f).unwrap() <= 1e-12);
        let n2 = f.lr_norm(2.0).unwrap();
        prop_assert!((fh.l2_norm() - n2).abs() <= 1e-10 * n2.max(1e-300));
    }

    #[test]
    fn h1_bound_dominates_l1_and_is_subadditive(
        (a, b) in field_strategy().prop_flat_map(|f| (kernel_on(f), kernel_on(f)))
    ) {
        let ha = atomic_decompose(&a).unwrap().h1_upper_bound;
        let hb = atomic_decompose(&b).unwrap().h1_upper_bound;
        let l1 = |k: &AngularKernel| k.values().iter().map(|v| v.norm()).sum::<f64>() / k.len() as f64
            * (1.0 - 1.0 / k.field().q() as f64);
        prop_assert!(l1(&a) <= ha * (1.0 + 1e-12) + 1e-15);
        let sum = a.add(&b).unwrap();
        let reconstructed_sum = {
            let da = atomic_decompose(&a).unwrap();
            let db = atomic_decompose(&b).unwrap();
            da.reconstruct(a.field(), a.resolution()).unwrap().add(&db.reconstruct(b.field(), b.resolution()).unwrap()).unwrap()
        };
        prop_assert_eq!(&reconstructed_sum, &sum);
        // Each level's coefficient is a sup norm of a linear Haar difference.
        let hs = atomic_decompose(&sum).unwrap().h1_upper_bound;
        prop_assert!(hs <= (ha + hb) * (1.0 + 1e-12) + 1e-15, "{} > {} + {}", hs, ha, hb);
    }

    #[test]
    fn truncated_operator_is_linear_in_f_and_kernel(
        (f, g, a, b, w) in field_strategy().prop_filter("q <= 3", |f| f.q() <= 3).prop_flat_map(|fld| {
            let w = Window { a: -1, l: 1 };
            (function_on(fld, w), function_on(fld, w), kernel_on(fld), kernel_on(fld), window_in(fld))
        }),
        k in -2i64..=1,
    ) {
        let spec = TruncationSpec::new(k, w.a, w.l).unwrap();
        let t = |h: &TestFunction, o: &AngularKernel| apply_tk(h, o, &spec).unwrap();
        let lhs = t(&f.add(&g).unwrap(), &a.add(&b).unwrap());
        let rhs = t(&f, &a).add(&t(&f, &b)).unwrap().add(&t(&g, &a)).unwrap().add(&t(&g, &b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn cz_decomposition_always_passes_exactly(
        f in function(), lambda in 0.05f64..2.0
    ) {
        let f = f.map_values(|v| Complex64::new(v.norm(), 0.0));
        let d = cz_decompose(&f, lambda, suggest_start_scale(&f, lambda).unwrap()).unwrap();
        prop_assert!(d.check().exact_pass());
    }
}
