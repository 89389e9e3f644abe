//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, selected from the 1-norm.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{one_norm, ComplexMatrix, LinalgError};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// More squarings than this means the result overflows anyway.
const MAX_SQUARINGS: i32 = 1100;

type M = DMatrix<Complex64>;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `exp(m)`. The zero matrix maps to the exact identity.
pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let a = m.as_dmatrix();
    let n = a.nrows();
    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    if !norm.is_finite() {
        return Err(LinalgError::ExpOverflow { norm });
    }
    let id = M::identity(n, n);

    let result = if norm <= THETA_9 {
        let a2 = a * a;
        let (u, v) = if norm <= THETA_3 {
            odd_even(a, &id, &[&a2], &PADE_3)
        } else if norm <= THETA_5 {
            let a4 = &a2 * &a2;
            odd_even(a, &id, &[&a2, &a4], &PADE_5)
        } else if norm <= THETA_7 {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            odd_even(a, &id, &[&a2, &a4, &a6], &PADE_7)
        } else {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let a8 = &a6 * &a2;
            odd_even(a, &id, &[&a2, &a4, &a6, &a8], &PADE_9)
        };
        solve_pade(&u, &v)?
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        if s > MAX_SQUARINGS {
            return Err(LinalgError::ExpOverflow { norm });
        }
        let scaled = a * real(0.5f64.powi(s));
        let (u, v) = pade_13(&scaled, &id);
        let mut r = solve_pade(&u, &v)?;
        for _ in 0..s {
            r = &r * &r;
        }
        r
    };
    ComplexMatrix::try_from_dmatrix(result).map_err(|_| LinalgError::ExpOverflow { norm })
}

/// Odd part `U = A (b1 I + b3 A^2 + ...)` and even part
/// `V = b0 I + b2 A^2 + ...` of a low-degree Padé numerator.
fn odd_even(a: &M, id: &M, even_powers: &[&M], b: &[f64]) -> (M, M) {
    let mut odd = id * real(b[1]);
    let mut even = id * real(b[0]);
    for (k, p) in even_powers.iter().enumerate() {
        odd += *p * real(b[2 * k + 3]);
        even += *p * real(b[2 * k + 2]);
    }
    (a * odd, even)
}

fn pade_13(a: &M, id: &M) -> (M, M) {
    let b = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]));
    let u =
        a * (inner_u + &a6 * real(b[7]) + &a4 * real(b[5]) + &a2 * real(b[3]) + id * real(b[1]));
    let inner_v = &a6 * (&a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]));
    let v = inner_v + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + id * real(b[0]);
    (u, v)
}

/// `(V - U)^{-1} (V + U)`.
fn solve_pade(u: &M, v: &M) -> Result<M, LinalgError> {
    let q = v - u;
    let p = v + u;
    q.lu().solve(&p).ok_or(LinalgError::Singular)
}
