use std::cmp::Ordering;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use super::{jordan_structure, ComplexMatrix, LinalgError};

/// Attempts with different fixed combinations of nullspace vectors.
const COMBINATION_ATTEMPTS: usize = 8;
/// A conjugator with a larger condition number is treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// Outcome of [`similarity_transform`].
#[derive(Debug, Clone, PartialEq)]
pub enum Similarity {
    /// `transform · a = b · transform`, with `transform` of unit Frobenius norm.
    Similar {
        transform: ComplexMatrix,
        residual: f64,
        condition: f64,
    },
    /// The Jordan structures differ; no conjugator exists.
    StructureMismatch,
    /// Structures agree but no invertible element of the Sylvester nullspace
    /// met the residual bound.
    NullspaceSearchFailed {
        nullity: usize,
        residual: f64,
        condition: f64,
    },
}

impl Similarity {
    pub fn transform(&self) -> Option<&ComplexMatrix> {
        match self {
            Similarity::Similar { transform, .. } => Some(transform),
            _ => None,
        }
    }

    pub fn is_similar(&self) -> bool {
        matches!(self, Similarity::Similar { .. })
    }
}

/// Finds invertible `S` with `S a = b S`, i.e. `b = S a S^-1`.
///
/// The Jordan structures are compared first; when they agree, `S` is taken
/// from the nullspace of `X -> X a - b X`, whose dimension is the commutant
/// dimension of the common structure. The residual bound is
/// `||S a - b S|| <= tol (||a|| + ||b||)` for `||S|| = 1`.
pub fn similarity_transform(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: f64,
) -> Result<Similarity, LinalgError> {
    let n = a.dim();
    if b.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            left: n,
            right: b.dim(),
        });
    }
    let sa = jordan_structure(a, tol)?;
    let sb = jordan_structure(b, tol)?;
    let scale = a.frobenius_norm().max(b.frobenius_norm()).max(1.0);
    if !sa.matches(&sb, 10.0 * tol * scale) {
        return Ok(Similarity::StructureMismatch);
    }
    let nullity = sa.commutant_dimension();

    let kernel = sylvester_kernel(a.as_dmatrix(), b.as_dmatrix(), nullity)?;
    let bound = tol * (a.frobenius_norm() + b.frobenius_norm());

    let mut best: Option<(ComplexMatrix, f64, f64)> = None;
    for attempt in 0..COMBINATION_ATTEMPTS {
        let mut s = DMatrix::<Complex64>::zeros(n, n);
        for (k, v) in kernel.iter().enumerate() {
            s += v * combination_coefficient(attempt, k);
        }
        let norm = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        s /= Complex64::new(norm, 0.0);
        let s = ComplexMatrix::from_dmatrix_unchecked(s);
        let residual = (&(&s * a) - &(b * &s)).frobenius_norm();
        let condition = s.condition_number();
        let better = match &best {
            None => true,
            Some((_, _, c)) => condition < *c,
        };
        if better {
            best = Some((s, residual, condition));
        }
        if condition < 1e3 {
            break;
        }
    }

    Ok(match best {
        Some((transform, residual, condition))
            if condition <= MAX_CONDITION && residual <= bound =>
        {
            Similarity::Similar {
                transform,
                residual,
                condition,
            }
        }
        Some((_, residual, condition)) => Similarity::NullspaceSearchFailed {
            nullity,
            residual,
            condition,
        },
        None => Similarity::NullspaceSearchFailed {
            nullity,
            residual: f64::INFINITY,
            condition: f64::INFINITY,
        },
    })
}

/// The `nullity` right singular vectors of the Sylvester operator with the
/// smallest singular values, reshaped to matrices.
fn sylvester_kernel(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    nullity: usize,
) -> Result<Vec<DMatrix<Complex64>>, LinalgError> {
    let n = a.nrows();
    let nn = n * n;
    // vec(X a - b X) = (a^T (x) I - I (x) b) vec(X), column-major vec.
    let op = DMatrix::from_fn(nn, nn, |row, col| {
        let (i, j) = (row % n, row / n);
        let (k, l) = (col % n, col / n);
        let mut v = Complex64::new(0.0, 0.0);
        if i == k {
            v += a[(l, j)];
        }
        if j == l {
            v -= b[(i, k)];
        }
        v
    });
    let svd = SVD::try_new(op, false, true, f64::EPSILON, 10_000)
        .ok_or(LinalgError::NotConverged { what: "SVD" })?;
    let v_t = svd.v_t.ok_or(LinalgError::NotConverged { what: "SVD" })?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[x]
            .partial_cmp(&svd.singular_values[y])
            .unwrap_or(Ordering::Equal)
    });
    Ok(order
        .into_iter()
        .take(nullity)
        .map(|r| DMatrix::from_fn(n, n, |i, j| v_t[(r, i + j * n)].conj()))
        .collect())
}

fn combination_coefficient(attempt: usize, k: usize) -> Complex64 {
    const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
    let phase = GOLDEN_ANGLE * (k as f64 + 1.0) + 1.3 * attempt as f64;
    let magnitude =
        1.0 + 0.5 * ((k as f64 + 1.0) * 0.618_033_988_749_895 + attempt as f64 * 0.31).fract();
    Complex64::from_polar(magnitude, phase)
}
