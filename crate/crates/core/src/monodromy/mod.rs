//! Monodromy of a Fuchsian system by numerical analytic continuation.

mod integrate;
mod path;
mod verify;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError};
use crate::system::{FuchsianSystem, SystemError};

pub use integrate::{
    continue_identity, replay, Coefficients, Field, Mesh, Transfer, ERROR_SAFETY_FACTOR,
};
pub use path::{
    audit_clearance, build_loops, default_base_point, ContinuationPath, LoopSet, Orientation,
    Segment,
};
pub use verify::{
    verify_theorem, verify_theorem_with, PoleStatus, PoleVerdict, TheoremReport, VerifyOptions,
};

/// Tag recorded in every report so that monodromy data computed under
/// different loop conventions is not mixed.
pub const LOOP_CONVENTION: &str = "ccw-radial-angular/1";

#[derive(Debug, Error)]
pub enum MonodromyError {
    #[error("base point {base} is not usable (non-finite or on a pole)")]
    BadBasePoint { base: Complex64 },
    #[error("loop radius {radius:e} around pole {pole} is too small")]
    DegenerateGeometry { pole: usize, radius: f64 },
    #[error("path has no segments")]
    EmptyPath,
    #[error("segment {segment} does not start where the previous one ends")]
    Discontinuous { segment: usize },
    #[error("path comes within {clearance:e} of a pole")]
    PathHitsPole { clearance: f64 },
    #[error("step size underflow near z = {at}")]
    StepUnderflow { at: Complex64 },
    #[error("integration exceeded {steps} steps")]
    TooManySteps { steps: usize },
    #[error("non-finite value during integration")]
    NonFinite,
    #[error("tolerance must be positive and finite, got {tol}")]
    BadTolerance { tol: f64 },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Transfer matrix along `path` for the system: `Y(end) = T Y(start)` for
/// the fundamental solution with `Y(start) = I`.
pub fn continue_solution(
    sys: &FuchsianSystem,
    path: &ContinuationPath,
    tol: f64,
) -> Result<(ComplexMatrix, f64), MonodromyError> {
    let residues = dmatrices(sys.residues());
    let field = Field {
        poles: sys.poles(),
        residues: &residues,
    };
    let t = continue_identity(&field, path, tol)?;
    Ok((ComplexMatrix::try_from_dmatrix(t.matrix)?, t.error_estimate))
}

pub(crate) fn dmatrices(ms: &[ComplexMatrix]) -> Vec<DMatrix<Complex64>> {
    ms.iter().map(|m| m.as_dmatrix().clone()).collect()
}

#[derive(Debug, Clone)]
pub struct MonodromyRepresentation {
    pub base_point: Complex64,
    pub loops: LoopSet,
    /// `M_j`, in pole order.
    pub matrices: Vec<ComplexMatrix>,
    pub error_estimates: Vec<f64>,
    /// Integration meshes, one per loop.
    pub meshes: Vec<Mesh>,
}

impl MonodromyRepresentation {
    /// `M[order[n-1]] ... M[order[0]]`.
    pub fn ordered_product(&self) -> ComplexMatrix {
        ordered_product(&self.matrices, &self.loops.composition_order)
    }

    /// `||ordered_product - I||_F`.
    pub fn product_defect(&self) -> f64 {
        let p = self.matrices[0].dim();
        self.ordered_product().distance(&ComplexMatrix::identity(p))
    }

    /// `ERROR_SAFETY_FACTOR * sum of error estimates`.
    pub fn product_bound(&self) -> f64 {
        ERROR_SAFETY_FACTOR * self.error_estimates.iter().sum::<f64>()
    }

    pub fn product_identity_holds(&self) -> bool {
        self.product_defect() <= self.product_bound()
    }
}

pub fn ordered_product(matrices: &[ComplexMatrix], order: &[usize]) -> ComplexMatrix {
    let p = matrices[0].dim();
    order
        .iter()
        .fold(ComplexMatrix::identity(p), |acc, &j| &matrices[j] * &acc)
}

/// Monodromy matrices along the loops of [`build_loops`], computed in
/// parallel.
pub fn monodromy(
    sys: &FuchsianSystem,
    tol: f64,
) -> Result<MonodromyRepresentation, MonodromyError> {
    monodromy_from(sys, None, tol)
}

pub fn monodromy_from(
    sys: &FuchsianSystem,
    base: Option<Complex64>,
    tol: f64,
) -> Result<MonodromyRepresentation, MonodromyError> {
    let loops = build_loops(sys.poles(), base)?;
    let residues = dmatrices(sys.residues());
    let field = Field {
        poles: sys.poles(),
        residues: &residues,
    };
    let transfers: Vec<Transfer> = loops
        .loops
        .par_iter()
        .map(|l| continue_identity(&field, l, tol))
        .collect::<Result<_, _>>()?;
    let mut matrices = Vec::with_capacity(transfers.len());
    let mut error_estimates = Vec::with_capacity(transfers.len());
    let mut meshes = Vec::with_capacity(transfers.len());
    for t in transfers {
        matrices.push(ComplexMatrix::try_from_dmatrix(t.matrix)?);
        error_estimates.push(t.error_estimate);
        meshes.push(t.mesh);
    }
    Ok(MonodromyRepresentation {
        base_point: loops.base_point,
        loops,
        matrices,
        error_estimates,
        meshes,
    })
}
