//! Complex Schur decomposition: Householder reduction to Hessenberg form
//! followed by explicitly shifted QR sweeps with Wilkinson shifts.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LinalgError;

const ITERATIONS_PER_EIGENVALUE: usize = 60;
const EXCEPTIONAL_EVERY: usize = 11;

type M = DMatrix<Complex64>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Rotation `[[c, s], [-conj(s), c]]` (real `c`) mapping `(f, g)` to `(r, 0)`.
pub(crate) fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let nf = f.norm();
    let ng = g.norm();
    let norm = nf.hypot(ng);
    if ng == 0.0 || norm == 0.0 {
        return (1.0, zero());
    }
    if nf == 0.0 {
        return (0.0, g.conj() / ng);
    }
    (nf / norm, (f / nf) * g.conj() / norm)
}

/// `rows k, k+1 <- G [rows k, k+1]` over `cols`.
pub(crate) fn rotate_rows(m: &mut M, k: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let x = m[(k, j)];
        let y = m[(k + 1, j)];
        m[(k, j)] = x * c + s * y;
        m[(k + 1, j)] = -s.conj() * x + y * c;
    }
}

/// `cols k, k+1 <- [cols k, k+1] G^H` over `rows`.
pub(crate) fn rotate_cols(m: &mut M, k: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let x = m[(i, k)];
        let y = m[(i, k + 1)];
        m[(i, k)] = x * c + y * s.conj();
        m[(i, k + 1)] = -x * s + y * c;
    }
}

/// Returns `(Q, T)` with `m = Q T Q^H`, `Q` unitary, `T` upper triangular.
pub(crate) fn complex_schur(m: &M) -> Result<(M, M), LinalgError> {
    let n = m.nrows();
    let (mut q, mut h) = hessenberg(m);
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((q, h));
    }
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;

    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // Locate the active window [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut reference = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if reference == 0.0 {
                reference = scale;
            }
            if sub <= f64::EPSILON * reference || sub <= tiny {
                h[(lo, lo - 1)] = zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > ITERATIONS_PER_EIGENVALUE * n {
            return Err(LinalgError::NotConverged {
                what: "complex Schur iteration",
            });
        }

        let shift = if since_deflation.is_multiple_of(EXCEPTIONAL_EVERY) {
            h[(hi, hi)] + Complex64::new(0.75, 0.4) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotate_rows(&mut h, k, c, s, k..n);
            h[(k + 1, k)] = zero();
            rotations.push((k, c, s));
        }
        for &(k, c, s) in &rotations {
            rotate_cols(&mut h, k, c, s, 0..(k + 2).min(hi + 1));
            rotate_cols(&mut q, k, c, s, 0..n);
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }

    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = zero();
        }
    }
    Ok((q, h))
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Householder reduction `m = Q H Q^H`, `H` upper Hessenberg.
fn hessenberg(m: &M) -> (M, M) {
    let n = m.nrows();
    let mut h = m.clone();
    let mut q = M::identity(n, n);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x: Vec<Complex64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // h <- P h, P = I - 2 v v^H acting on rows k+1..n
        for j in 0..n {
            let dot: Complex64 = (0..len).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..len {
                h[(k + 1 + i, j)] -= v[i] * dot * 2.0;
            }
        }
        // h <- h P, q <- q P on columns k+1..n
        for target in [&mut h, &mut q] {
            for i in 0..n {
                let dot: Complex64 = (0..len).map(|l| target[(i, k + 1 + l)] * v[l]).sum();
                for l in 0..len {
                    target[(i, k + 1 + l)] -= dot * v[l].conj() * 2.0;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = zero();
        }
    }
    (q, h)
}
