//! Shared fixtures for integration tests. Randomized fixtures read their seed
//! from `FUCHSIA_SEED` when set.
#![allow(dead_code)]

use std::f64::consts::PI;

use fuchsia::equivalence::{Poly, QComplex, RationalFunction, RationalMatrix};
use fuchsia::linalg::ComplexMatrix;
use fuchsia::system::FuchsianSystem;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn seed(default: u64) -> u64 {
    std::env::var("FUCHSIA_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

pub fn rng(default: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed(default))
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| random_complex(rng)).unwrap()
}

/// Random matrix scaled to Frobenius norm `norm`.
pub fn random_matrix_with_norm(rng: &mut impl Rng, n: usize, norm: f64) -> ComplexMatrix {
    let m = random_matrix(rng, n);
    let f = m.frobenius_norm();
    m.scale(c(norm / f, 0.0))
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| random_complex(rng));
    m.qr().q()
}

/// `U diag(sigma) V^H` with singular values spread log-uniformly over
/// `[1, cond]`, both extremes attained.
pub fn matrix_with_condition(rng: &mut impl Rng, n: usize, cond: f64) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let sigma: Vec<f64> = (0..n)
        .map(|k| match k {
            0 => 1.0,
            k if k == n - 1 => cond,
            _ => cond.powf(rng.gen_range(0.0..1.0)),
        })
        .collect();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(sigma[i], 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    ComplexMatrix::try_from_dmatrix(u * d * v.adjoint()).unwrap()
}

/// Block-diagonal Jordan matrix from (eigenvalue, block sizes).
pub fn jordan_matrix(blocks: &[(Complex64, Vec<usize>)]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|(_, s)| s.iter().sum::<usize>()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut at = 0;
    for (lambda, sizes) in blocks {
        for &s in sizes {
            for k in 0..s {
                m[(at + k, at + k)] = *lambda;
                if k + 1 < s {
                    m[(at + k, at + k + 1)] = c(1.0, 0.0);
                }
            }
            at += s;
        }
    }
    ComplexMatrix::try_from_dmatrix(m).unwrap()
}

pub fn conjugate(p: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    &(p * m) * &p.inverse().unwrap()
}

/// Residues `B_j = diag(lambda_j)` with `sum_j B_j = 0`, real parts of the
/// eigenvalues in `(-0.45, 0.45)`.
pub fn commuting_system(rng: &mut impl Rng, p: usize, n: usize) -> FuchsianSystem {
    loop {
        let poles = separated_poles(rng, n);
        let mut diags: Vec<Vec<Complex64>> = (0..n - 1)
            .map(|_| {
                (0..p)
                    .map(|_| c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.15..0.15)))
                    .collect()
            })
            .collect();
        let last: Vec<Complex64> = (0..p)
            .map(|k| -diags.iter().map(|d| d[k]).sum::<Complex64>())
            .collect();
        if last.iter().any(|z| z.re.abs() >= 0.45) {
            continue;
        }
        diags.push(last);
        let residues = diags
            .iter()
            .map(|d| ComplexMatrix::from_diagonal(d))
            .collect();
        return FuchsianSystem::new(poles, residues, 1e-12).unwrap();
    }
}

/// Non-commuting residues with every `||B_j||_F <= max_norm`.
pub fn generic_system(rng: &mut impl Rng, p: usize, n: usize, max_norm: f64) -> FuchsianSystem {
    loop {
        let poles = separated_poles(rng, n);
        let mut residues: Vec<ComplexMatrix> = (0..n - 1)
            .map(|_| {
                let r = rng.gen_range(0.3..1.0) * max_norm / (n - 1) as f64;
                random_matrix_with_norm(rng, p, r)
            })
            .collect();
        let sum = residues
            .iter()
            .fold(ComplexMatrix::zeros(p), |acc, b| &acc + b);
        let last = -sum;
        if last.frobenius_norm() > max_norm {
            continue;
        }
        residues.push(last);
        return FuchsianSystem::new(poles, residues, 1e-12).unwrap();
    }
}

/// `n` poles in the unit-ish disc with pairwise distance at least 0.5.
pub fn separated_poles(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    loop {
        let poles: Vec<Complex64> = (0..n)
            .map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
            .collect();
        let ok = (0..n).all(|i| (i + 1..n).all(|j| (poles[i] - poles[j]).norm() >= 0.5));
        if ok {
            return poles;
        }
    }
}

/// `exp(2 pi i B)` for diagonal `B`, entrywise.
pub fn diagonal_generator(b: &ComplexMatrix) -> ComplexMatrix {
    let d: Vec<Complex64> = (0..b.dim())
        .map(|k| (c(0.0, 2.0 * PI) * b.get(k, k)).exp())
        .collect();
    ComplexMatrix::from_diagonal(&d)
}

pub fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}

/// Random Jordan data of total size `n`: eigenvalues `sep * k + 0.3i`,
/// block sizes at most `max_block`.
pub fn random_jordan_blocks(
    rng: &mut impl Rng,
    n: usize,
    sep: f64,
    max_block: usize,
) -> Vec<(Complex64, Vec<usize>)> {
    let mut blocks = Vec::new();
    let mut left = n;
    let mut k = 0;
    while left > 0 {
        let lambda = c(sep * k as f64, 0.3);
        k += 1;
        let mut mult = rng.gen_range(1..=left.min(4));
        left -= mult;
        let mut sizes = Vec::new();
        while mult > 0 {
            let s = rng.gen_range(1..=mult.min(max_block));
            sizes.push(s);
            mult -= s;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        blocks.push((lambda, sizes));
    }
    blocks
}

pub fn shape_of(blocks: &[(Complex64, Vec<usize>)]) -> Vec<Vec<usize>> {
    let mut s: Vec<Vec<usize>> = blocks.iter().map(|b| b.1.clone()).collect();
    s.sort();
    s
}

/// Residues `A_1 .. A_n` summing to zero with `||A_j||_F <= delta`.
pub fn small_residues(rng: &mut impl Rng, p: usize, n: usize, delta: f64) -> Vec<ComplexMatrix> {
    loop {
        let mut res: Vec<ComplexMatrix> = (0..n - 1)
            .map(|_| {
                let norm = rng.gen_range(0.5..1.0) * delta;
                random_matrix_with_norm(rng, p, norm)
            })
            .collect();
        let sum = res.iter().fold(ComplexMatrix::zeros(p), |acc, b| &acc + b);
        let last = -sum;
        if last.frobenius_norm() <= delta {
            res.push(last);
            return res;
        }
    }
}

pub fn random_q(rng: &mut impl Rng) -> QComplex {
    let re = (rng.gen_range(-5..=5), rng.gen_range(1..=4));
    let im = if rng.gen_bool(0.5) {
        (rng.gen_range(-3..=3), rng.gen_range(1..=3))
    } else {
        (0, 1)
    };
    QComplex::from_ratios(re.0, re.1, im.0, im.1)
}

pub fn random_poly(rng: &mut impl Rng, max_degree: usize) -> Poly {
    let d = rng.gen_range(0..=max_degree);
    Poly::from_coeffs((0..=d).map(|_| random_q(rng)).collect())
}

/// Numerator and denominator of degree at most `max_degree`.
pub fn random_rational(rng: &mut impl Rng, max_degree: usize) -> RationalFunction {
    let num = random_poly(rng, max_degree);
    loop {
        let den = random_poly(rng, max_degree);
        if !den.is_zero() {
            return RationalFunction::new(num, den).unwrap();
        }
    }
}

/// Sparse-ish random matrix: about a third of the entries are zero.
pub fn random_rational_matrix(rng: &mut impl Rng, n: usize, max_degree: usize) -> RationalMatrix {
    RationalMatrix::from_fn(n, |_, _| {
        if rng.gen_range(0..3) == 0 {
            RationalFunction::zero()
        } else {
            random_rational(rng, max_degree)
        }
    })
}

pub fn random_invertible_rational_matrix(
    rng: &mut impl Rng,
    n: usize,
    max_degree: usize,
) -> RationalMatrix {
    loop {
        let b = random_rational_matrix(rng, n, max_degree);
        if !b.determinant().is_zero() {
            return b;
        }
    }
}

pub fn random_invertible_poly_matrix(
    rng: &mut impl Rng,
    n: usize,
    max_degree: usize,
) -> RationalMatrix {
    loop {
        let b = RationalMatrix::from_fn(n, |_, _| {
            if rng.gen_range(0..3) == 0 {
                RationalFunction::zero()
            } else {
                RationalFunction::from_poly(random_poly(rng, max_degree))
            }
        });
        if !b.determinant().is_zero() {
            return b;
        }
    }
}
