//! Reconstruction of residues from monodromy matrices near the identity.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError};
use crate::monodromy::{
    build_loops, continue_identity, ordered_product, replay, Field, LoopSet, Mesh, MonodromyError,
    LOOP_CONVENTION,
};
use crate::system::{is_non_resonant, FuchsianSystem, SystemError, DEFAULT_RESONANCE_TOL};

pub const DEFAULT_PROXIMITY: f64 = 0.5;
pub const DEFAULT_PRODUCT_TOL: f64 = 1e-6;
/// Forward-map integration tolerance as a fraction of the solve tolerance.
const FORWARD_TOL_RATIO: f64 = 1e-2;
const DIFFERENCE_STEP: f64 = 1e-6;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Error)]
pub enum InverseError {
    #[error("at least two poles are required, got {0}")]
    TooFewPoles(usize),
    #[error("{poles} poles but {targets} targets")]
    LengthMismatch { poles: usize, targets: usize },
    #[error("target {index} is {found}x{found}, expected {expected}x{expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("poles {first} and {second} coincide")]
    DuplicatePole { first: usize, second: usize },
    #[error("pole {index} is not finite")]
    NonFinitePole { index: usize },
    #[error("target {index} is singular")]
    SingularTarget { index: usize },
    #[error(
        "target {index} is {distance:.3e} from the identity, beyond the proximity bound {bound}"
    )]
    TooFar {
        index: usize,
        distance: f64,
        bound: f64,
    },
    #[error("ordered product of targets is {defect:.3e} from the identity (tolerance {tol:.1e})")]
    ProductDefect { defect: f64, tol: f64 },
    #[error("loop convention {found:?} does not match {expected:?}")]
    ConventionMismatch {
        found: String,
        expected: &'static str,
    },
    #[error("tolerance must be positive and finite, got {tol}")]
    BadTolerance { tol: f64 },
    #[error(transparent)]
    Monodromy(#[from] MonodromyError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOptions {
    /// Bound on `||M_j - I||_F`; `None` skips the check.
    pub proximity: Option<f64>,
    pub product_tol: f64,
    pub base_point: Option<Complex64>,
    pub convention: String,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        Self {
            proximity: Some(DEFAULT_PROXIMITY),
            product_tol: DEFAULT_PRODUCT_TOL,
            base_point: None,
            convention: LOOP_CONVENTION.to_string(),
        }
    }
}

/// Poles and target monodromy matrices, validated against the loop set
/// they refer to.
#[derive(Debug, Clone)]
pub struct InverseProblemInstance {
    poles: Vec<Complex64>,
    targets: Vec<ComplexMatrix>,
    loops: LoopSet,
    product_defect: f64,
}

impl InverseProblemInstance {
    pub fn new(
        poles: Vec<Complex64>,
        targets: Vec<ComplexMatrix>,
        options: &InstanceOptions,
    ) -> Result<Self, InverseError> {
        if options.convention != LOOP_CONVENTION {
            return Err(InverseError::ConventionMismatch {
                found: options.convention.clone(),
                expected: LOOP_CONVENTION,
            });
        }
        if poles.len() != targets.len() {
            return Err(InverseError::LengthMismatch {
                poles: poles.len(),
                targets: targets.len(),
            });
        }
        if poles.len() < 2 {
            return Err(InverseError::TooFewPoles(poles.len()));
        }
        for (index, a) in poles.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(InverseError::NonFinitePole { index });
            }
            if let Some(first) = poles[..index].iter().position(|b| b == a) {
                return Err(InverseError::DuplicatePole {
                    first,
                    second: index,
                });
            }
        }
        let p = targets[0].dim();
        let identity = ComplexMatrix::identity(p);
        for (index, m) in targets.iter().enumerate() {
            if m.dim() != p {
                return Err(InverseError::DimensionMismatch {
                    index,
                    expected: p,
                    found: m.dim(),
                });
            }
            if m.inverse().is_err() {
                return Err(InverseError::SingularTarget { index });
            }
            if let Some(bound) = options.proximity {
                let distance = m.distance(&identity);
                if distance > bound {
                    return Err(InverseError::TooFar {
                        index,
                        distance,
                        bound,
                    });
                }
            }
        }
        let loops = build_loops(&poles, options.base_point)?;
        let product_defect =
            ordered_product(&targets, &loops.composition_order).distance(&identity);
        if !(product_defect <= options.product_tol) {
            return Err(InverseError::ProductDefect {
                defect: product_defect,
                tol: options.product_tol,
            });
        }
        Ok(Self {
            poles,
            targets,
            loops,
            product_defect,
        })
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn targets(&self) -> &[ComplexMatrix] {
        &self.targets
    }

    pub fn loops(&self) -> &LoopSet {
        &self.loops
    }

    pub fn base_point(&self) -> Complex64 {
        self.loops.base_point
    }

    pub fn product_defect(&self) -> f64 {
        self.product_defect
    }

    pub fn dimension(&self) -> usize {
        self.targets[0].dim()
    }
}

/// `A_j = (M_j - I) / (2 pi i)` for `j < n`, and `A_n = -sum_{j<n} A_j`.
pub fn first_order_seed(inst: &InverseProblemInstance) -> Vec<ComplexMatrix> {
    let p = inst.dimension();
    let n = inst.targets.len();
    let factor = Complex64::new(0.0, -1.0 / (2.0 * PI));
    let mut seed: Vec<ComplexMatrix> = inst.targets[..n - 1]
        .iter()
        .map(|m| (m - &ComplexMatrix::identity(p)).scale(factor))
        .collect();
    let sum = seed.iter().fold(ComplexMatrix::zeros(p), |acc, a| &acc + a);
    seed.push(-sum);
    seed
}

#[derive(Debug, Clone)]
pub struct InverseSolution {
    /// `A_1 .. A_n`, summing to zero.
    pub residues: Vec<ComplexMatrix>,
    /// `max_j ||monodromy_j(residues) - M_j||_F`.
    pub residual: f64,
    /// Residual after each accepted iterate, starting with the seed.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the recovered residues are non-resonant.
    pub non_resonant: bool,
}

impl InverseSolution {
    pub fn to_system(&self, inst: &InverseProblemInstance) -> Result<FuchsianSystem, InverseError> {
        let p = inst.dimension();
        let scale = self
            .residues
            .iter()
            .map(ComplexMatrix::frobenius_norm)
            .sum::<f64>();
        let tol = 1e-12 * scale.max(1.0) * p as f64;
        Ok(FuchsianSystem::new(
            inst.poles.clone(),
            self.residues.clone(),
            tol,
        )?)
    }
}

/// Gauss–Newton refinement of the first-order seed against the forward
/// monodromy map.
///
/// The unknowns are the real and imaginary parts of `A_1 .. A_{n-1}`;
/// `A_n` is eliminated through the zero-sum constraint. Each iteration
/// integrates the loops adaptively at `tol / 100`, then differentiates the
/// map by central differences with the integration meshes frozen, so the
/// differenced map is smooth. A step that does not reduce the residual is
/// halved until it does.
pub fn solve(
    inst: &InverseProblemInstance,
    tol: f64,
    max_iter: usize,
) -> Result<InverseSolution, InverseError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(InverseError::BadTolerance { tol });
    }
    let forward_tol = tol * FORWARD_TOL_RATIO;
    let p = inst.dimension();
    let n = inst.targets.len();
    let problem = Problem { inst, p, n };

    let mut x = problem.pack(&first_order_seed(inst));
    let mut eval = problem.evaluate(&x, forward_tol)?;
    let mut history = vec![eval.residual];
    let mut iterations = 0;

    while eval.residual > tol && iterations < max_iter {
        iterations += 1;
        let jac = problem.jacobian(&x, &eval.meshes)?;
        let rhs = -problem.residual_vector(&eval.matrices);
        let svd = jac.svd(true, true);
        let step = svd
            .solve(&rhs, f64::EPSILON * 1e3)
            .map_err(|_| LinalgError::NotConverged {
                what: "least squares",
            })?;

        let current = eval.sum_of_squares;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &x + &step * scale;
            let e = problem.evaluate(&trial, forward_tol)?;
            if e.sum_of_squares < current {
                accepted = Some((trial, e));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, e)) => {
                x = trial;
                eval = e;
                history.push(eval.residual);
            }
            None => break,
        }
    }

    let residues = problem.unpack(&x);
    let sys = FuchsianSystem::new(inst.poles.clone(), residues.clone(), f64::INFINITY)?;
    let non_resonant = is_non_resonant(&sys, DEFAULT_RESONANCE_TOL)?.is_non_resonant();
    Ok(InverseSolution {
        residues,
        residual: eval.residual,
        residual_history: history,
        iterations,
        converged: eval.residual <= tol,
        non_resonant,
    })
}

struct Problem<'a> {
    inst: &'a InverseProblemInstance,
    p: usize,
    n: usize,
}

struct Evaluation {
    matrices: Vec<DMatrix<Complex64>>,
    meshes: Vec<Mesh>,
    residual: f64,
    sum_of_squares: f64,
}

impl Problem<'_> {
    fn pack(&self, residues: &[ComplexMatrix]) -> DVector<f64> {
        let p2 = self.p * self.p;
        let mut x = DVector::zeros(2 * p2 * (self.n - 1));
        for (j, a) in residues[..self.n - 1].iter().enumerate() {
            for (k, z) in a.as_dmatrix().iter().enumerate() {
                x[2 * (j * p2 + k)] = z.re;
                x[2 * (j * p2 + k) + 1] = z.im;
            }
        }
        x
    }

    fn unpack_raw(&self, x: &DVector<f64>) -> Vec<DMatrix<Complex64>> {
        let p = self.p;
        let p2 = p * p;
        let mut out: Vec<DMatrix<Complex64>> = (0..self.n - 1)
            .map(|j| {
                DMatrix::from_iterator(
                    p,
                    p,
                    (0..p2).map(|k| Complex64::new(x[2 * (j * p2 + k)], x[2 * (j * p2 + k) + 1])),
                )
            })
            .collect();
        let mut last = DMatrix::zeros(p, p);
        for a in &out {
            last -= a;
        }
        out.push(last);
        out
    }

    fn unpack(&self, x: &DVector<f64>) -> Vec<ComplexMatrix> {
        self.unpack_raw(x)
            .into_iter()
            .map(|m| ComplexMatrix::try_from_dmatrix(m).expect("finite parameters"))
            .collect()
    }

    fn evaluate(&self, x: &DVector<f64>, forward_tol: f64) -> Result<Evaluation, InverseError> {
        let residues = self.unpack_raw(x);
        let field = Field {
            poles: &self.inst.poles,
            residues: &residues,
        };
        let transfers = self
            .inst
            .loops
            .loops
            .par_iter()
            .map(|l| continue_identity(&field, l, forward_tol))
            .collect::<Result<Vec<_>, _>>()?;
        let mut matrices = Vec::with_capacity(self.n);
        let mut meshes = Vec::with_capacity(self.n);
        for t in transfers {
            matrices.push(t.matrix);
            meshes.push(t.mesh);
        }
        let (residual, sum_of_squares) = self.misfit(&matrices);
        Ok(Evaluation {
            matrices,
            meshes,
            residual,
            sum_of_squares,
        })
    }

    fn misfit(&self, matrices: &[DMatrix<Complex64>]) -> (f64, f64) {
        let mut worst = 0.0f64;
        let mut total = 0.0;
        for (m, t) in matrices.iter().zip(&self.inst.targets) {
            let s: f64 = (m - t.as_dmatrix()).iter().map(|z| z.norm_sqr()).sum();
            worst = worst.max(s.sqrt());
            total += s;
        }
        (worst, total)
    }

    fn residual_vector(&self, matrices: &[DMatrix<Complex64>]) -> DVector<f64> {
        let p2 = self.p * self.p;
        let mut r = DVector::zeros(2 * p2 * self.n);
        for (j, (m, t)) in matrices.iter().zip(&self.inst.targets).enumerate() {
            for (k, (a, b)) in m.iter().zip(t.as_dmatrix().iter()).enumerate() {
                let d = a - b;
                r[2 * (j * p2 + k)] = d.re;
                r[2 * (j * p2 + k) + 1] = d.im;
            }
        }
        r
    }

    fn frozen(&self, x: &DVector<f64>, meshes: &[Mesh]) -> Result<DVector<f64>, InverseError> {
        let residues = self.unpack_raw(x);
        let field = Field {
            poles: &self.inst.poles,
            residues: &residues,
        };
        let matrices = self
            .inst
            .loops
            .loops
            .iter()
            .zip(meshes)
            .map(|(l, mesh)| replay(&field, l, mesh))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.residual_vector(&matrices))
    }

    fn jacobian(&self, x: &DVector<f64>, meshes: &[Mesh]) -> Result<DMatrix<f64>, InverseError> {
        let columns = (0..x.len())
            .into_par_iter()
            .map(|k| {
                let h = DIFFERENCE_STEP * x[k].abs().max(1.0);
                let mut plus = x.clone();
                plus[k] += h;
                let mut minus = x.clone();
                minus[k] -= h;
                let fp = self.frozen(&plus, meshes)?;
                let fm = self.frozen(&minus, meshes)?;
                Ok((fp - fm) / (plus[k] - minus[k]))
            })
            .collect::<Result<Vec<DVector<f64>>, InverseError>>()?;
        Ok(DMatrix::from_columns(&columns))
    }
}
