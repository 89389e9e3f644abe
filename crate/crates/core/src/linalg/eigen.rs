use std::cmp::Ordering;

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use super::schur::{complex_schur, givens, rotate_cols, rotate_rows};
use super::{check_tol, ComplexMatrix, LinalgError};

/// Default absolute clustering tolerance, applied after scaling by the
/// matrix norm.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Complex Schur form `m = Q T Q^H` with `T` upper triangular.
pub(crate) fn schur_form(
    m: &DMatrix<Complex64>,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), LinalgError> {
    complex_schur(m)
}

/// Orders by real part, treating real parts within `eps` as equal, then by
/// imaginary part.
pub(crate) fn cmp_eigenvalues(a: Complex64, b: Complex64, eps: f64) -> Ordering {
    if (a.re - b.re).abs() > eps {
        a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal)
    } else {
        a.im.partial_cmp(&b.im)
            .unwrap_or(Ordering::Equal)
            .then(a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal))
    }
}

/// Raw eigenvalues (with repetition), sorted.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let (_, t) = schur_form(m.as_dmatrix())?;
    let mut ev: Vec<Complex64> = t.diagonal().iter().copied().collect();
    let eps = 1e-12 * m.frobenius_norm().max(1.0);
    ev.sort_by(|a, b| cmp_eigenvalues(*a, *b, eps));
    Ok(ev)
}

/// Eigenvalues with algebraic multiplicities, clustered at the default
/// tolerance and sorted lexicographically by (Re, Im).
pub fn eigen_decompose(m: &ComplexMatrix) -> Result<Vec<Eigenvalue>, LinalgError> {
    let spectrum = ClusteredSpectrum::new(m, DEFAULT_CLUSTER_TOL)?;
    Ok(spectrum
        .clusters
        .iter()
        .map(|c| Eigenvalue {
            value: c.center,
            multiplicity: c.size(),
        })
        .collect())
}

/// One eigenvalue cluster together with the counts of Jordan blocks by
/// size, read off the rank sequence of its nilpotent part.
#[derive(Debug, Clone)]
pub(crate) struct Cluster {
    pub center: Complex64,
    pub members: Vec<usize>,
    /// `block_counts[j]` = number of blocks of size >= j + 1.
    pub block_counts: Vec<usize>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

pub(crate) struct ClusteredSpectrum {
    pub clusters: Vec<Cluster>,
}

impl ClusteredSpectrum {
    /// Clusters the spectrum of `m` at tolerance `tol`, measured after
    /// dividing `m` by the power of two just above `max(||m||_F, 1)`.
    ///
    /// A group of `k` computed eigenvalues is merged only when
    /// - every member lies within `2 tol^(1/k)` of the group mean, the
    ///   spread of a size-`k` Jordan block under a perturbation of size tol;
    /// - the group's restriction of `T - mean` (Schur form, group reordered
    ///   to the leading block) is numerically nilpotent with a valid rank
    ///   sequence.
    pub fn new(m: &ComplexMatrix, tol: f64) -> Result<Self, LinalgError> {
        check_tol(tol)?;
        // Power of two so that the scaling is exact.
        let scale = 2f64.powi(m.frobenius_norm().max(1.0).log2().ceil() as i32);
        let scaled = m.as_dmatrix() / Complex64::new(scale, 0.0);
        let (_, t) = schur_form(&scaled)?;
        let eig: Vec<Complex64> = t.diagonal().iter().copied().collect();
        let n = eig.len();

        let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        loop {
            let centers: Vec<Complex64> = groups.iter().map(|g| mean(&eig, g)).collect();
            let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
            for seed in 0..groups.len() {
                let mut others: Vec<usize> = (0..groups.len()).filter(|&g| g != seed).collect();
                others.sort_by(|&a, &b| {
                    let da = (centers[a] - centers[seed]).norm();
                    let db = (centers[b] - centers[seed]).norm();
                    da.partial_cmp(&db)
                        .unwrap_or(Ordering::Equal)
                        .then(a.cmp(&b))
                });
                let mut set = vec![seed];
                for &o in &others {
                    set.push(o);
                    let members: Vec<usize> = set
                        .iter()
                        .flat_map(|&g| groups[g].iter().copied())
                        .collect();
                    let k = members.len();
                    let mu = mean(&eig, &members);
                    let radius = members
                        .iter()
                        .map(|&i| (eig[i] - mu).norm())
                        .fold(0.0, f64::max);
                    if radius > merge_radius(k, tol) {
                        break;
                    }
                    let mut key = set.clone();
                    key.sort_unstable();
                    candidates.push((radius, key));
                }
            }
            candidates.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| a.1.cmp(&b.1))
            });
            candidates.dedup_by(|a, b| a.1 == b.1);

            let mut merged = None;
            for (_, set) in &candidates {
                let members: Vec<usize> = set
                    .iter()
                    .flat_map(|&g| groups[g].iter().copied())
                    .collect();
                if block_counts(&t, &eig, &members, tol)?.is_some() {
                    merged = Some(set.clone());
                    break;
                }
            }
            match merged {
                Some(set) => {
                    let mut union = Vec::new();
                    for &g in set.iter().rev() {
                        union.extend(groups.remove(g));
                    }
                    union.sort_unstable();
                    groups.push(union);
                }
                None => break,
            }
        }

        let mut clusters = Vec::with_capacity(groups.len());
        for members in groups {
            // Singletons are always consistent; merged groups were checked.
            let counts = block_counts(&t, &eig, &members, tol)?.unwrap_or_else(|| vec![1]);
            clusters.push(Cluster {
                center: mean(&eig, &members) * scale,
                members,
                block_counts: counts,
            });
        }

        for (i, a) in clusters.iter().enumerate() {
            for b in clusters.iter().skip(i + 1) {
                let distance = (a.center - b.center).norm();
                if distance <= 2.0 * tol * scale {
                    return Err(LinalgError::AmbiguousClustering {
                        first: a.center,
                        second: b.center,
                        distance,
                    });
                }
            }
        }

        let eps = 2.0 * tol * scale;
        clusters.sort_by(|a, b| cmp_eigenvalues(a.center, b.center, eps));
        Ok(Self { clusters })
    }
}

fn merge_radius(k: usize, tol: f64) -> f64 {
    2.0 * tol.powf(1.0 / k as f64)
}

fn mean(eig: &[Complex64], members: &[usize]) -> Complex64 {
    let sum: Complex64 = members.iter().map(|&i| eig[i]).sum();
    sum / members.len() as f64
}

/// Staircase deflation of the cluster `members` of the (scaled) Schur form
/// `t`: with `N = T11 - mean`, the nullity of `N` counts its Jordan blocks;
/// compressing `N` onto the orthogonal complement of its kernel shortens
/// every block by one, and the process repeats. Singular values at most
/// `tol` count as zero. Returns `None` when the cluster is not numerically
/// a single eigenvalue.
fn block_counts(
    t: &DMatrix<Complex64>,
    eig: &[Complex64],
    members: &[usize],
    tol: f64,
) -> Result<Option<Vec<usize>>, LinalgError> {
    let k = members.len();
    let mu = mean(eig, members);
    let mut nil = leading_block(t, members) - DMatrix::<Complex64>::identity(k, k) * mu;

    let mut counts = Vec::new();
    while nil.nrows() > 0 {
        let m = nil.nrows();
        let svd = SVD::try_new(nil.clone(), false, true, f64::EPSILON, MAX_SWEEPS)
            .ok_or(LinalgError::NotConverged { what: "SVD" })?;
        let v_t = svd
            .v_t
            .as_ref()
            .ok_or(LinalgError::NotConverged { what: "SVD" })?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap_or(Ordering::Equal)
        });
        let rank = order
            .iter()
            .filter(|&&i| svd.singular_values[i] > tol)
            .count();
        let nullity = m - rank;
        if nullity == 0 || counts.last().is_some_and(|&c| nullity > c) {
            return Ok(None);
        }
        counts.push(nullity);
        // Columns of V spanning the row space of N.
        let v_range = DMatrix::from_fn(m, rank, |i, j| v_t[(order[j], i)].conj());
        nil = v_range.adjoint() * &nil * &v_range;
    }
    Ok(Some(counts))
}

/// Reorders the triangular `t` by unitary similarity so that the diagonal
/// entries at `members` occupy the leading positions, and returns the
/// leading block.
fn leading_block(t: &DMatrix<Complex64>, members: &[usize]) -> DMatrix<Complex64> {
    let mut t = t.clone();
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    for (target, &start) in sorted.iter().enumerate() {
        let mut pos = start;
        while pos > target {
            swap_adjacent(&mut t, pos - 1);
            pos -= 1;
        }
    }
    let k = members.len();
    t.view((0, 0), (k, k)).into_owned()
}

/// Swaps diagonal entries `k` and `k + 1` of upper-triangular `t` with a
/// Givens rotation.
pub(crate) fn swap_adjacent(t: &mut DMatrix<Complex64>, k: usize) {
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    if t11 == t22 {
        return;
    }
    let (c, s) = givens(t[(k, k + 1)], t22 - t11);
    let n = t.nrows();
    rotate_rows(t, k, c, s, 0..n);
    rotate_cols(t, k, c, s, 0..n);
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_identity_and_nilpotent() {
        let d = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(2.0, 0.0)]);
        let ev = eigen_decompose(&d).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0].value - c(2.0, 0.0)).norm() < 1e-14);
        assert!((ev[1].value - c(3.0, 0.0)).norm() < 1e-14);
        assert_eq!((ev[0].multiplicity, ev[1].multiplicity), (1, 1));

        let ev = eigen_decompose(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].multiplicity, 3);
        assert!((ev[0].value - c(1.0, 0.0)).norm() < 1e-14);

        let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let ev = eigen_decompose(&nil).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].multiplicity, 2);
        assert!(ev[0].value.norm() < 1e-14);
    }

    #[test]
    fn ordering_is_lexicographic() {
        let d =
            ComplexMatrix::from_diagonal(&[c(1.0, 1.0), c(-1.0, 0.0), c(1.0, -1.0), c(0.0, 5.0)]);
        let ev: Vec<Complex64> = eigen_decompose(&d)
            .unwrap()
            .iter()
            .map(|e| e.value)
            .collect();
        let want = [c(-1.0, 0.0), c(0.0, 5.0), c(1.0, -1.0), c(1.0, 1.0)];
        for (a, b) in ev.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-13, "{ev:?}");
        }
    }

    #[test]
    fn swap_preserves_similarity() {
        let m = DMatrix::from_fn(4, 4, |i, j| {
            c(
                (i * 3 + j) as f64 * 0.37 - 1.0,
                (i as f64 - j as f64) * 0.21,
            )
        });
        let (q, t) = schur_form(&m).unwrap();
        let mut t2 = t.clone();
        swap_adjacent(&mut t2, 1);
        assert!((t2[(1, 1)] - t[(2, 2)]).norm() < 1e-14);
        // Same spectrum, still triangular up to roundoff, same Frobenius norm.
        let fro = |x: &DMatrix<Complex64>| x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((fro(&t) - fro(&t2)).abs() < 1e-10 * fro(&t));
        let back = &q * &t * q.adjoint();
        assert!((back - &m).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        let lead = leading_block(&t, &[3, 0]);
        let mut want = [t[(0, 0)], t[(3, 3)]];
        let mut got = [lead[(0, 0)], lead[(1, 1)]];
        want.sort_by(|a, b| cmp_eigenvalues(*a, *b, 0.0));
        got.sort_by(|a, b| cmp_eigenvalues(*a, *b, 0.0));
        assert!((want[0] - got[0]).norm() < 1e-12 && (want[1] - got[1]).norm() < 1e-12);
        assert!(lead[(1, 0)].norm() < 1e-12);
    }
}
