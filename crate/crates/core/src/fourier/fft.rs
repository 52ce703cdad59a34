//! Radix-p transforms on ℤ/p^n and (ℤ/p)^n.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// Sign of the exponent: `Negative` computes Σ v_h e^{-2πi uh/N}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Negative,
    Positive,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Negative => -1.0,
            Direction::Positive => 1.0,
        }
    }
}

/// exp(±2πi k/n) for k in 0..n, each from the exact fraction k/n.
fn roots(n: usize, dir: Direction) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let (s, c) = (dir.sign() * TAU * (k as f64 / n as f64)).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

fn digit_reverse(i: usize, p: usize, n: u32) -> usize {
    let (mut i, mut r) = (i, 0);
    for _ in 0..n {
        r = r * p + i % p;
        i /= p;
    }
    r
}

/// Reverses the base-p digits of every index: out[rev(i)] = v[i].
pub fn digit_reversal_permute(v: &[Complex64], p: usize, n: u32) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (i, &x) in v.iter().enumerate() {
        out[digit_reverse(i, p, n)] = x;
    }
    out
}

/// Cyclic DFT of length p^n by decimation in time.
pub fn cyclic(v: &[Complex64], p: usize, n: u32, dir: Direction) -> Vec<Complex64> {
    let size = v.len();
    debug_assert_eq!(size, p.pow(n));
    if n == 0 {
        return v.to_vec();
    }
    let w = roots(size, dir);
    let mut data = digit_reversal_permute(v, p, n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); p];
    let mut m = p;
    while m <= size {
        let ms = m / p;
        let stride = size / m;
        for b in (0..size).step_by(m) {
            for k in 0..ms {
                for (r, t) in scratch.iter_mut().enumerate() {
                    *t = data[b + r * ms + k] * w[(r * k * stride) % size];
                }
                for u in 0..p {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (r, t) in scratch.iter().enumerate() {
                        acc += t * w[((r * u) % p) * (size / p)];
                    }
                    data[b + u * ms + k] = acc;
                }
            }
        }
        m *= p;
    }
    data
}

/// Tensor-product DFT on (ℤ/p)^n: out[w] = Σ_h v_h exp(±2πi/p Σ_t w_t h_t),
/// with w_t, h_t the base-p digits.
pub fn vector(v: &[Complex64], p: usize, n: u32, dir: Direction) -> Vec<Complex64> {
    let size = v.len();
    debug_assert_eq!(size, p.pow(n));
    let w = roots(p, dir);
    let mut data = v.to_vec();
    let mut col = vec![Complex64::new(0.0, 0.0); p];
    let mut stride = 1;
    for _ in 0..n {
        for base in 0..size {
            if (base / stride) % p != 0 {
                continue;
            }
            for (r, c) in col.iter_mut().enumerate() {
                *c = data[base + r * stride];
            }
            for u in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for (r, c) in col.iter().enumerate() {
                    acc += c * w[(r * u) % p];
                }
                data[base + u * stride] = acc;
            }
        }
        stride *= p;
    }
    data
}
