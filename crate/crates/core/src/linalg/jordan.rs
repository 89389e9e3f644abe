use num_complex::Complex64;

use super::eigen::ClusteredSpectrum;
use super::{ComplexMatrix, LinalgError};

/// Jordan blocks belonging to one eigenvalue cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlockGroup {
    pub eigenvalue: Complex64,
    /// Block sizes, sorted descending.
    pub sizes: Vec<usize>,
}

impl JordanBlockGroup {
    pub fn multiplicity(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Jordan normal form up to permutation of blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanStructure {
    pub blocks: Vec<JordanBlockGroup>,
    pub tolerance: f64,
}

impl JordanStructure {
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(JordanBlockGroup::multiplicity).sum()
    }

    /// Same block sizes per eigenvalue, eigenvalues paired within `eig_tol`.
    pub fn matches(&self, other: &Self, eig_tol: f64) -> bool {
        if self.blocks.len() != other.blocks.len() {
            return false;
        }
        let mut used = vec![false; other.blocks.len()];
        for a in &self.blocks {
            let hit = other.blocks.iter().enumerate().find(|(j, b)| {
                !used[*j] && b.sizes == a.sizes && (b.eigenvalue - a.eigenvalue).norm() <= eig_tol
            });
            match hit {
                Some((j, _)) => used[j] = true,
                None => return false,
            }
        }
        true
    }

    /// The block sizes with eigenvalues dropped, sorted; equal for similar
    /// matrices regardless of eigenvalue values.
    pub fn shape(&self) -> Vec<Vec<usize>> {
        let mut s: Vec<Vec<usize>> = self.blocks.iter().map(|b| b.sizes.clone()).collect();
        s.sort();
        s
    }

    /// Dimension of the commutant `{X : X J = J X}`, i.e. the nullity of the
    /// Sylvester operator `X -> X m - m X`.
    pub fn commutant_dimension(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| {
                b.sizes
                    .iter()
                    .flat_map(|&s| b.sizes.iter().map(move |&t| s.min(t)))
                    .sum::<usize>()
            })
            .sum()
    }
}

/// Jordan structure of `m`: eigenvalues clustered at `tol` (after scaling by
/// the Frobenius norm), block sizes from the rank sequence of each
/// cluster's nilpotent part with singular values thresholded at `tol`.
pub fn jordan_structure(m: &ComplexMatrix, tol: f64) -> Result<JordanStructure, LinalgError> {
    let spectrum = ClusteredSpectrum::new(m, tol)?;
    let blocks = spectrum
        .clusters
        .iter()
        .map(|c| JordanBlockGroup {
            eigenvalue: c.center,
            sizes: sizes_from_counts(&c.block_counts),
        })
        .collect();
    Ok(JordanStructure {
        blocks,
        tolerance: tol,
    })
}

/// `counts[j]` blocks of size >= j + 1 -> block sizes, descending.
fn sizes_from_counts(counts: &[usize]) -> Vec<usize> {
    let mut sizes = Vec::new();
    for (j, &c) in counts.iter().enumerate() {
        let next = counts.get(j + 1).copied().unwrap_or(0);
        for _ in 0..c.saturating_sub(next) {
            sizes.push(j + 1);
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}
