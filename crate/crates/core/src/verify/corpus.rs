use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_zero, ExactComplex, Rational};
use crate::field::{Ball, FieldConfig};
use crate::kernels::{atom_sup_bound, unit_cells, AngularKernel};
use crate::testfn::{TestFunction, Window};

#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub field: FieldConfig,
    pub seed: u64,
    pub functions: Vec<TestFunction>,
    pub function_ids: Vec<String>,
    pub kernels: Vec<AngularKernel>,
    pub kernel_ids: Vec<String>,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub window: Window,
    pub kernel_resolutions: Vec<u32>,
}

/// The fixture kernel [1, −1, 0, …]: two cells of opposite sign at the
/// smallest resolution with at least two cells (m = 2 for q = 2).
pub fn two_cell_kernel(field: FieldConfig) -> AngularKernel {
    let m = if field.q() == 2 { 2 } else { 1 };
    let n = unit_cells(&field, m).expect("m >= 1");
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    values[0] = Complex64::new(1.0, 0.0);
    values[1] = Complex64::new(-1.0, 0.0);
    AngularKernel::new(field, m, &values).expect("length matches")
}

/// (q/(q−1)) (Φ_{1+𝔓²·} − Φ_{1+𝔭+𝔓²}) at resolution 2: two balls of equal
/// measure in 𝔇*, sup exactly at the atom bound.
pub fn balanced_atom(field: FieldConfig) -> AngularKernel {
    let n = unit_cells(&field, 2).expect("m = 2");
    let b = atom_sup_bound(field.q());
    let mut values = vec![exact_zero(); n];
    values[0] = ExactComplex::new(b.clone(), Rational::from_integer(0.into()));
    values[1] = ExactComplex::new(-b, Rational::from_integer(0.into()));
    AngularKernel::from_exact(field, 2, values).expect("length matches")
}

fn random_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect()
}

/// Fixtures Φ_𝔇 and Φ_𝔓, then `count − 2` random functions on `window`;
/// the fixture kernels, then one projected random kernel per resolution.
pub fn generate_corpus(field: FieldConfig, spec: &CorpusSpec) -> Result<Corpus> {
    if spec.count == 0 {
        return Err(Error::LengthMismatch { expected: 1, actual: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let one = Complex64::new(1.0, 0.0);
    let fixtures = [
        ("phi_D", TestFunction::from_indicator_combo(field, &[(one, Ball::ideal(0))])?),
        ("phi_P", TestFunction::from_indicator_combo(field, &[(one, Ball::ideal(1))])?),
    ];
    let mut functions = Vec::with_capacity(spec.count);
    let mut function_ids = Vec::with_capacity(spec.count);
    for (id, f) in fixtures.into_iter().take(spec.count) {
        functions.push(f);
        function_ids.push(id.to_string());
    }
    let n = spec.window.cells(&field)?;
    for i in functions.len()..spec.count {
        functions.push(TestFunction::from_values(field, spec.window, random_values(n, &mut rng))?);
        function_ids.push(format!("rand_{i:03}"));
    }
    let mut kernels = vec![two_cell_kernel(field), balanced_atom(field)];
    let mut kernel_ids = vec!["two_cell".to_string(), "balanced_atom".to_string()];
    for (i, &m) in spec.kernel_resolutions.iter().enumerate() {
        let values = random_values(unit_cells(&field, m)?, &mut rng);
        kernels.push(AngularKernel::new(field, m, &values)?.mean_zero_project());
        kernel_ids.push(format!("rand_m{m}_{i}"));
    }
    let description = format!(
        "{} functions ({} random on window ({}, {})), {} kernels ({} random, resolutions {:?})",
        functions.len(),
        functions.len().saturating_sub(2),
        spec.window.a,
        spec.window.l,
        kernels.len(),
        spec.kernel_resolutions.len(),
        spec.kernel_resolutions
    );
    Ok(Corpus { field, seed: spec.seed, functions, function_ids, kernels, kernel_ids, description })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::validate_atom;

    fn spec() -> CorpusSpec {
        CorpusSpec { seed: 42, count: 6, window: Window { a: -1, l: 2 }, kernel_resolutions: vec![2, 3] }
    }

    #[test]
    fn deterministic_and_counted() {
        let field = FieldConfig::padic(3).unwrap();
        let a = generate_corpus(field, &spec()).unwrap();
        let b = generate_corpus(field, &spec()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.functions.len(), 6);
        assert_eq!(a.kernels.len(), 4);
        assert!(a.kernels.iter().all(|k| k.is_mean_zero()));
        let other = generate_corpus(field, &CorpusSpec { seed: 43, ..spec() }).unwrap();
        assert_ne!(a.functions, other.functions);
    }

    #[test]
    fn fixtures_are_what_they_claim() {
        for q in [2, 3, 5] {
            let field = FieldConfig::laurent(q).unwrap();
            assert!(validate_atom(&balanced_atom(field)).valid);
            let k = two_cell_kernel(field);
            assert!(k.is_mean_zero());
            assert_eq!(k.values()[0], Complex64::new(1.0, 0.0));
        }
    }
}
