//! Fuchsian systems `df = (sum_i B_i / (z - a_i)) f dz` with finite poles and
//! residues summing to zero, so that infinity is a regular point.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{eigen_decompose, matrix_exp, ComplexMatrix, LinalgError};

/// Default tolerance for "differs by a nonzero integer".
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("a Fuchsian system needs at least two poles, got {0}")]
    TooFewPoles(usize),
    #[error("{poles} poles but {residues} residues")]
    LengthMismatch { poles: usize, residues: usize },
    #[error("residue {index} is {found}x{found}, expected {expected}x{expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("pole {index} is not finite")]
    NonFinitePole { index: usize },
    #[error("poles {first} and {second} coincide at {pole}")]
    DuplicatePole {
        first: usize,
        second: usize,
        pole: Complex64,
    },
    #[error("residues do not sum to zero: ||sum B_i|| = {defect:e} exceeds {tol:e}")]
    ResidueSum { defect: f64, tol: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Validated Fuchsian system. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FuchsianSystem {
    poles: Vec<Complex64>,
    residues: Vec<ComplexMatrix>,
    residue_sum_defect: f64,
}

impl FuchsianSystem {
    /// See [`validate_system`].
    pub fn new(
        poles: Vec<Complex64>,
        residues: Vec<ComplexMatrix>,
        tol: f64,
    ) -> Result<Self, SystemError> {
        validate_system(poles, residues, tol)
    }

    pub fn dimension(&self) -> usize {
        self.residues[0].dim()
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn residues(&self) -> &[ComplexMatrix] {
        &self.residues
    }

    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    /// Frobenius norm of `sum_i B_i`.
    pub fn residue_sum_defect(&self) -> f64 {
        self.residue_sum_defect
    }

    /// Coefficient matrix `sum_i B_i / (z - a_i)` at `z`.
    pub fn coefficient_at(&self, z: Complex64) -> ComplexMatrix {
        let p = self.dimension();
        let mut acc = ComplexMatrix::zeros(p);
        for (a, b) in self.poles.iter().zip(&self.residues) {
            acc = &acc + &b.scale(1.0 / (z - a));
        }
        acc
    }

    /// Minimum distance from `z` to any pole.
    pub fn distance_to_poles(&self, z: Complex64) -> f64 {
        self.poles
            .iter()
            .map(|a| (z - a).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds a [`FuchsianSystem`], checking that the poles are finite and
/// distinct, the residues are square of one dimension, and
/// `||sum B_i||_F <= tol`.
pub fn validate_system(
    poles: Vec<Complex64>,
    residues: Vec<ComplexMatrix>,
    tol: f64,
) -> Result<FuchsianSystem, SystemError> {
    if poles.len() != residues.len() {
        return Err(SystemError::LengthMismatch {
            poles: poles.len(),
            residues: residues.len(),
        });
    }
    if poles.len() < 2 {
        return Err(SystemError::TooFewPoles(poles.len()));
    }
    for (index, a) in poles.iter().enumerate() {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(SystemError::NonFinitePole { index });
        }
    }
    for i in 0..poles.len() {
        for j in (i + 1)..poles.len() {
            if poles[i] == poles[j] {
                return Err(SystemError::DuplicatePole {
                    first: i,
                    second: j,
                    pole: poles[i],
                });
            }
        }
    }
    let p = residues[0].dim();
    for (index, b) in residues.iter().enumerate() {
        if b.dim() != p {
            return Err(SystemError::DimensionMismatch {
                index,
                expected: p,
                found: b.dim(),
            });
        }
    }
    let sum = residues
        .iter()
        .fold(ComplexMatrix::zeros(p), |acc, b| &acc + b);
    let defect = sum.frobenius_norm();
    if !(defect <= tol) {
        return Err(SystemError::ResidueSum { defect, tol });
    }
    Ok(FuchsianSystem {
        poles,
        residues,
        residue_sum_defect: defect,
    })
}

/// Two eigenvalues of one residue with `upper - lower` within tolerance of
/// the positive integer `shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceWitness {
    pub lower: Complex64,
    pub upper: Complex64,
    pub shift: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleResonance {
    pub eigenvalues: Vec<(Complex64, usize)>,
    pub witnesses: Vec<ResonanceWitness>,
}

impl PoleResonance {
    pub fn is_resonant(&self) -> bool {
        !self.witnesses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonResonanceReport {
    pub poles: Vec<PoleResonance>,
}

impl NonResonanceReport {
    pub fn is_non_resonant(&self) -> bool {
        self.poles.iter().all(|p| !p.is_resonant())
    }

    pub fn resonant_poles(&self) -> Vec<usize> {
        self.poles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_resonant())
            .map(|(j, _)| j)
            .collect()
    }
}

/// Checks every residue for pairs of eigenvalues differing by a nonzero
/// integer: `|(mu - lambda) - k| <= tol` for some integer `k >= 1`.
pub fn is_non_resonant(sys: &FuchsianSystem, tol: f64) -> Result<NonResonanceReport, SystemError> {
    let mut poles = Vec::with_capacity(sys.pole_count());
    for b in sys.residues() {
        let eig: Vec<(Complex64, usize)> = eigen_decompose(b)?
            .into_iter()
            .map(|e| (e.value, e.multiplicity))
            .collect();
        poles.push(PoleResonance {
            witnesses: resonance_witnesses(&eig, tol),
            eigenvalues: eig,
        });
    }
    Ok(NonResonanceReport { poles })
}

fn resonance_witnesses(eig: &[(Complex64, usize)], tol: f64) -> Vec<ResonanceWitness> {
    let mut out = Vec::new();
    for (i, &(a, _)) in eig.iter().enumerate() {
        for (j, &(b, _)) in eig.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = b - a;
            let k = d.re.round();
            if k >= 1.0 && (d - Complex64::new(k, 0.0)).norm() <= tol {
                out.push(ResonanceWitness {
                    lower: a,
                    upper: b,
                    shift: k as i64,
                });
            }
        }
    }
    out
}

/// Generators `exp(2 pi i B_j)` in pole order, plus the poles at which the
/// non-resonance hypothesis fails (the generators are still returned).
#[derive(Debug, Clone, PartialEq)]
pub struct GaloisGenerators {
    pub generators: Vec<ComplexMatrix>,
    pub resonant_poles: Vec<usize>,
}

pub fn galois_generators(sys: &FuchsianSystem) -> Result<GaloisGenerators, SystemError> {
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let generators = sys
        .residues()
        .iter()
        .map(|b| matrix_exp(&b.scale(two_pi_i)))
        .collect::<Result<Vec<_>, _>>()?;
    let resonant_poles = is_non_resonant(sys, DEFAULT_RESONANCE_TOL)?.resonant_poles();
    Ok(GaloisGenerators {
        generators,
        resonant_poles,
    })
}

/// Split of one residue eigenvalue `lambda = integer_part + normalized_part`
/// with `0 <= Re normalized_part < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeveltRecord {
    pub lambda: Complex64,
    pub integer_part: i64,
    pub normalized_part: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeveltPole {
    pub records: Vec<LeveltRecord>,
}

impl LeveltPole {
    /// Distinct normalized exponents with total multiplicity, ordered so
    /// equal exponents are adjacent.
    pub fn exponent_groups(&self, tol: f64) -> Vec<(Complex64, usize)> {
        let mut groups: Vec<(Complex64, usize)> = Vec::new();
        for r in &self.records {
            match groups
                .iter_mut()
                .find(|(phi, _)| (*phi - r.normalized_part).norm() <= tol)
            {
                Some(g) => g.1 += r.multiplicity,
                None => groups.push((r.normalized_part, r.multiplicity)),
            }
        }
        groups
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeveltData {
    pub poles: Vec<LeveltPole>,
}

/// Integer / normalized split of every residue eigenvalue.
pub fn levelt_data(sys: &FuchsianSystem) -> Result<LeveltData, SystemError> {
    let mut poles = Vec::with_capacity(sys.pole_count());
    for b in sys.residues() {
        let records = eigen_decompose(b)?
            .into_iter()
            .map(|e| {
                let (integer_part, normalized_part) = split_exponent(e.value);
                LeveltRecord {
                    lambda: e.value,
                    integer_part,
                    normalized_part,
                    multiplicity: e.multiplicity,
                }
            })
            .collect();
        poles.push(LeveltPole { records });
    }
    Ok(LeveltData { poles })
}

/// `lambda = rho + phi`, `rho` integer, `0 <= Re phi < 1`. Real parts within
/// eigen-solver noise of an integer snap to it.
pub fn split_exponent(lambda: Complex64) -> (i64, Complex64) {
    let r = lambda.re;
    let nearest = r.round();
    let rho = if (r - nearest).abs() <= 1e-12 * lambda.norm().max(1.0) {
        nearest
    } else {
        r.floor()
    };
    let mut frac = r - rho;
    if frac < 0.0 {
        frac = 0.0;
    }
    debug_assert!(frac < 1.0);
    (rho as i64, Complex64::new(frac, lambda.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&d.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    fn two_pole(b: ComplexMatrix) -> FuchsianSystem {
        let minus = -&b;
        FuchsianSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![b, minus], 1e-12).unwrap()
    }

    #[test]
    fn validates_zero_sum() {
        let sys = FuchsianSystem::new(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![diag(&[0.5, -0.5]), diag(&[-0.5, 0.5])],
            1e-12,
        )
        .unwrap();
        assert_eq!(sys.dimension(), 2);
        assert_eq!(sys.residue_sum_defect(), 0.0);
    }

    #[test]
    fn reports_residue_sum_defect() {
        let err = FuchsianSystem::new(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
            1e-9,
        )
        .unwrap_err();
        match err {
            SystemError::ResidueSum { defect, .. } => {
                assert!((defect - 2.0 * 2f64.sqrt()).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_and_malformed() {
        let z = ComplexMatrix::zeros(2);
        let err = FuchsianSystem::new(
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            vec![z.clone(), z.clone()],
            1e-9,
        );
        assert!(matches!(
            err,
            Err(SystemError::DuplicatePole {
                first: 0,
                second: 1,
                ..
            })
        ));
        let err = FuchsianSystem::new(vec![c(0.0, 0.0)], vec![z.clone()], 1e-9);
        assert_eq!(err.unwrap_err(), SystemError::TooFewPoles(1));
        let err = FuchsianSystem::new(
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![z.clone(), ComplexMatrix::zeros(3)],
            1e-9,
        );
        assert!(matches!(
            err,
            Err(SystemError::DimensionMismatch { index: 1, .. })
        ));
        let err = FuchsianSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![z], 1e-9);
        assert!(matches!(err, Err(SystemError::LengthMismatch { .. })));
        let err = FuchsianSystem::new(
            vec![c(f64::INFINITY, 0.0), c(1.0, 0.0)],
            vec![ComplexMatrix::zeros(1), ComplexMatrix::zeros(1)],
            1e-9,
        );
        assert_eq!(err.unwrap_err(), SystemError::NonFinitePole { index: 0 });
    }

    #[test]
    fn resonance_classification() {
        let r = is_non_resonant(&two_pole(diag(&[0.3, 0.7])), 1e-8).unwrap();
        assert!(r.is_non_resonant());

        let r = is_non_resonant(&two_pole(diag(&[0.5, 1.5])), 1e-8).unwrap();
        assert!(!r.is_non_resonant());
        assert_eq!(r.resonant_poles(), vec![0, 1]);
        let w = r.poles[0].witnesses[0];
        assert!((w.lower - c(0.5, 0.0)).norm() < 1e-12 && (w.upper - c(1.5, 0.0)).norm() < 1e-12);
        assert_eq!(w.shift, 1);

        let r = is_non_resonant(&two_pole(diag(&[0.2, 0.2])), 1e-8).unwrap();
        assert!(r.is_non_resonant());
        assert_eq!(r.poles[0].eigenvalues.len(), 1);
    }

    #[test]
    fn generators() {
        let g = galois_generators(&two_pole(diag(&[0.5, -0.5]))).unwrap();
        assert!(g.generators[0].distance(&ComplexMatrix::identity(2).scale(c(-1.0, 0.0))) < 1e-14);
        assert_eq!(g.resonant_poles, vec![0, 1]);

        let g = galois_generators(&two_pole(ComplexMatrix::zeros(2))).unwrap();
        assert!(g
            .generators
            .iter()
            .all(|m| *m == ComplexMatrix::identity(2)));

        let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let g = galois_generators(&two_pole(nil)).unwrap();
        let want = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 2.0 * PI)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(g.generators[0].distance(&want) < 1e-14);

        let g = galois_generators(&two_pole(diag(&[0.0, 1.0]))).unwrap();
        assert_eq!(g.resonant_poles, vec![0, 1]);
    }

    #[test]
    fn exponent_split() {
        let (rho, phi) = split_exponent(c(2.3, 0.0));
        assert_eq!(rho, 2);
        assert!((phi - c(0.3, 0.0)).norm() < 1e-15);
        let (rho, phi) = split_exponent(c(-0.5, 0.0));
        assert_eq!((rho, phi), (-1, c(0.5, 0.0)));
        let (rho, phi) = split_exponent(c(0.0, 0.4));
        assert_eq!((rho, phi), (0, c(0.0, 0.4)));
        let (rho, phi) = split_exponent(c(-1e-17, 0.0));
        assert_eq!((rho, phi), (0, c(0.0, 0.0)));
        let (rho, _) = split_exponent(c(0.9999999999999998, 0.0));
        assert_eq!(rho, 1);
    }

    #[test]
    fn levelt_groups_equal_exponents() {
        let lv = levelt_data(&two_pole(diag(&[0.5, 1.5]))).unwrap();
        let pole = &lv.poles[0];
        assert_eq!(pole.records.len(), 2);
        assert_eq!(pole.exponent_groups(1e-9), vec![(c(0.5, 0.0), 2)]);
        let second = &lv.poles[1];
        assert_eq!(
            second
                .records
                .iter()
                .map(|r| r.integer_part)
                .collect::<Vec<_>>(),
            vec![-2, -1]
        );
    }
}
