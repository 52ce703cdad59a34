//! Library routines against the brute-force implementations in `oracle`.

use localfield::decomp::{besov_norm, littlewood_paley, triebel_lizorkin_norm};
use localfield::exact::{rational_from_f64, ExactComplex};
use localfield::kernels::{atom_sup_bound, taibleson_modulus, unit_cells};
use localfield::operators::{apply_b, apply_b_literal, apply_tk};
use localfield::{fourier, oracle, AngularKernel, Atom, FieldConfig, Mode, TestFunction, TruncationSpec, Window};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fields() -> Vec<FieldConfig> {
    let mut out = Vec::new();
    for mode in [Mode::Padic, Mode::Laurent] {
        for p in [2, 3, 5] {
            out.push(FieldConfig::new(mode, p).unwrap());
        }
    }
    out
}

fn random_function(field: FieldConfig, w: Window, rng: &mut ChaCha8Rng) -> TestFunction {
    let n = w.cells(&field).unwrap();
    let values = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    TestFunction::from_values(field, w, values).unwrap()
}

fn random_kernel(field: FieldConfig, rng: &mut ChaCha8Rng) -> AngularKernel {
    let m = if field.q() == 2 { 2 } else { 1 };
    let n = unit_cells(&field, m).unwrap();
    let values: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
    AngularKernel::new(field, m, &values).unwrap().mean_zero_project()
}

fn small_window(field: &FieldConfig) -> Window {
    if field.q() == 5 {
        Window { a: -1, l: 1 }
    } else {
        Window { a: -1, l: 2 }
    }
}

#[test]
fn transforms_match_naive_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for field in fields() {
        let f = random_function(field, small_window(&field), &mut rng);
        let fast = fourier::forward(&f);
        assert!(oracle::fourier_forward(&f).unwrap().max_abs_diff(&fast).unwrap() <= 1e-12);
        assert!(oracle::fourier_inverse(&fast).unwrap().max_abs_diff(&f).unwrap() <= 1e-12);
    }
}

#[test]
fn convolution_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for field in fields() {
        let f = random_function(field, small_window(&field), &mut rng);
        let g = random_function(field, Window { a: 0, l: 1 }, &mut rng);
        let naive = oracle::convolve(&f, &g).unwrap();
        assert!(f.convolve(&g).unwrap().max_abs_diff(&naive).unwrap() <= 1e-12);
    }
}

#[test]
fn truncated_operator_and_both_piece_readings_match_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for field in fields().into_iter().filter(|f| f.q() <= 3) {
        let f = random_function(field, small_window(&field), &mut rng);
        let kernel = random_kernel(field, &mut rng);
        let atom = Atom::new(kernel.scale(&ExactComplex::new(
            atom_sup_bound(field.q()) / rational_from_f64(kernel.sup_norm().max(1.0) * 2.0).unwrap(),
            rational_from_f64(0.0).unwrap(),
        )))
        .unwrap();
        for k in [-2, 0, 1] {
            let out = Window { a: -2, l: 2 };
            let spec = TruncationSpec::new(k, out.a, out.l).unwrap();
            let tk = apply_tk(&f, &kernel, &spec).unwrap();
            assert!(tk.max_abs_diff(&oracle::truncated_operator(&f, &kernel, k, out).unwrap()).unwrap() <= 1e-12);
            let b = apply_b(&f, &atom, &spec).unwrap();
            assert!(b.max_abs_diff(&oracle::truncated_operator(&f, atom.kernel(), k, out).unwrap()).unwrap() <= 1e-12);
            let lit = apply_b_literal(&f, &atom, &spec).unwrap();
            assert!(lit.max_abs_diff(&oracle::literal_b(&f, atom.kernel(), k, out).unwrap()).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn littlewood_paley_blocks_and_norms_match_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for field in fields() {
        let f = random_function(field, small_window(&field), &mut rng);
        for j in 0..=f.window().l {
            let fast = littlewood_paley(&f, j).unwrap().block;
            assert!(fast.max_abs_diff(&oracle::littlewood_paley(&f, j).unwrap()).unwrap() <= 1e-12);
        }
        for (s, r, t) in [(0.5, 2.0, 2.0), (1.0, 1.5, 3.0), (0.5, 3.0, 1.5)] {
            let b = besov_norm(&f, s, r, t).unwrap().value;
            let tl = triebel_lizorkin_norm(&f, s, r, t).unwrap().value;
            assert!((b - oracle::besov_norm(&f, s, r, t).unwrap()).abs() <= 1e-10 * b);
            assert!((tl - oracle::triebel_lizorkin_norm(&f, s, r, t).unwrap()).abs() <= 1e-10 * tl);
        }
    }
}

#[test]
fn taibleson_modulus_matches_direct_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for field in fields() {
        let kernel = random_kernel(field, &mut rng);
        for big_j in 1..=3 {
            let fast = taibleson_modulus(&kernel, big_j);
            assert!((fast - oracle::taibleson_modulus(&kernel, big_j)).abs() <= 1e-12, "{field:?} J={big_j}");
        }
    }
}
