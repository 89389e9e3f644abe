use num_complex::Complex64;

use super::{monodromy_from, MonodromyError, MonodromyRepresentation};
use crate::linalg::{
    jordan_structure, similarity_transform, ComplexMatrix, JordanStructure, Similarity,
};
use crate::system::{galois_generators, is_non_resonant, FuchsianSystem, DEFAULT_RESONANCE_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Comparison tolerance for spectra and conjugator residuals.
    pub tol: f64,
    /// Integration tolerance for the monodromy computation.
    pub integration_tol: f64,
    /// Tolerance for Jordan structures and the similarity search.
    pub structure_tol: f64,
    pub resonance_tol: f64,
    pub base_point: Option<Complex64>,
}

impl VerifyOptions {
    /// Integration runs three orders of magnitude below the comparison
    /// tolerance; structures use the default clustering tolerance, or
    /// `tol` if that is tighter.
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            integration_tol: tol * 1e-3,
            structure_tol: crate::linalg::DEFAULT_CLUSTER_TOL.min(tol),
            resonance_tol: DEFAULT_RESONANCE_TOL,
            base_point: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleStatus {
    Pass,
    Fail,
    /// The pole is resonant; no claim is made.
    HypothesisUnmet,
}

#[derive(Debug, Clone)]
pub struct PoleVerdict {
    pub non_resonant: bool,
    /// Eigenvalues with multiplicities of `M_j` and `exp(2 pi i B_j)` agree
    /// within `tol`.
    pub spectrum_match: bool,
    pub structure_match: bool,
    pub monodromy_structure: JordanStructure,
    pub generator_structure: JordanStructure,
    /// `S` with `S exp(2 pi i B_j) S^-1 = M_j`, unit Frobenius norm.
    pub conjugator: Option<ComplexMatrix>,
    /// `||S exp(2 pi i B_j) - M_j S||_F`.
    pub conjugator_residual: Option<f64>,
    pub status: PoleStatus,
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub options: VerifyOptions,
    pub monodromy: MonodromyRepresentation,
    pub generators: Vec<ComplexMatrix>,
    pub poles: Vec<PoleVerdict>,
    /// `max_j ||M_j - M_j'||_F` where `M_j'` is recomputed at half the
    /// integration tolerance.
    pub cross_check_difference: f64,
    pub verdict: bool,
}

impl TheoremReport {
    pub fn resonant_poles(&self) -> Vec<usize> {
        self.poles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.status == PoleStatus::HypothesisUnmet)
            .map(|(j, _)| j)
            .collect()
    }
}

pub fn verify_theorem(sys: &FuchsianSystem, tol: f64) -> Result<TheoremReport, MonodromyError> {
    verify_theorem_with(sys, VerifyOptions::new(tol))
}

/// Compares every `M_j` with `exp(2 pi i B_j)`: eigenvalues, Jordan
/// structure, and an explicit conjugator. Resonant poles are reported as
/// [`PoleStatus::HypothesisUnmet`] and do not affect the verdict.
pub fn verify_theorem_with(
    sys: &FuchsianSystem,
    options: VerifyOptions,
) -> Result<TheoremReport, MonodromyError> {
    if !(options.tol > 0.0 && options.tol.is_finite()) {
        return Err(MonodromyError::BadTolerance { tol: options.tol });
    }
    let rep = monodromy_from(sys, options.base_point, options.integration_tol)?;
    let check = monodromy_from(sys, options.base_point, options.integration_tol / 2.0)?;
    let cross_check_difference = rep
        .matrices
        .iter()
        .zip(&check.matrices)
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max);

    let generators = galois_generators(sys)?.generators;
    let resonance = is_non_resonant(sys, options.resonance_tol)?;

    let mut poles = Vec::with_capacity(sys.pole_count());
    for (j, (m, g)) in rep.matrices.iter().zip(&generators).enumerate() {
        let non_resonant = !resonance.poles[j].is_resonant();
        let ms = jordan_structure(m, options.structure_tol)?;
        let gs = jordan_structure(g, options.structure_tol)?;
        let spectrum_match = same_spectrum(&ms, &gs, options.tol);
        let structure_match = ms.matches(&gs, options.tol);
        let (conjugator, conjugator_residual) =
            match similarity_transform(g, m, options.structure_tol)? {
                Similarity::Similar {
                    transform,
                    residual,
                    ..
                } => (Some(transform), Some(residual)),
                _ => (None, None),
            };
        let status = if !non_resonant {
            PoleStatus::HypothesisUnmet
        } else if spectrum_match
            && structure_match
            && conjugator_residual.is_some_and(|r| r <= options.tol)
        {
            PoleStatus::Pass
        } else {
            PoleStatus::Fail
        };
        poles.push(PoleVerdict {
            non_resonant,
            spectrum_match,
            structure_match,
            monodromy_structure: ms,
            generator_structure: gs,
            conjugator,
            conjugator_residual,
            status,
        });
    }
    let verdict = poles.iter().all(|p| p.status != PoleStatus::Fail);
    Ok(TheoremReport {
        options,
        monodromy: rep,
        generators,
        poles,
        cross_check_difference,
        verdict,
    })
}

/// Eigenvalue multisets agree: clusters pair up with equal algebraic
/// multiplicity and centers within `tol`.
fn same_spectrum(a: &JordanStructure, b: &JordanStructure, tol: f64) -> bool {
    if a.blocks.len() != b.blocks.len() {
        return false;
    }
    let mut used = vec![false; b.blocks.len()];
    a.blocks.iter().all(|x| {
        let hit = b.blocks.iter().enumerate().position(|(k, y)| {
            !used[k]
                && y.multiplicity() == x.multiplicity()
                && (y.eigenvalue - x.eigenvalue).norm() <= tol
        });
        match hit {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}
