use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::parse::parse_rational;
use super::poly::Poly;
use super::polymat::{lcm, PolyMatrix};
use super::rational::RationalFunction;
use super::EquivalenceError;
use crate::monodromy::Coefficients;

/// Square matrix over `C(z)`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<RationalFunction>,
}

impl RationalMatrix {
    pub fn from_rows(rows: Vec<Vec<RationalFunction>>) -> Result<Self, EquivalenceError> {
        let n = rows.len();
        if n == 0 {
            return Err(EquivalenceError::EmptyMatrix);
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(EquivalenceError::DimensionMismatch {
                left: n,
                right: bad.len(),
            });
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Parses every entry with [`parse_rational`].
    pub fn parse_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, EquivalenceError> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s.as_ref())).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        Self::from_rows(parsed)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> RationalFunction) -> Self {
        assert!(n > 0, "dimension must be positive");
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                RationalFunction::one()
            } else {
                RationalFunction::zero()
            }
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::from_fn(n, |_, _| RationalFunction::zero())
    }

    pub fn diagonal(d: Vec<RationalFunction>) -> Result<Self, EquivalenceError> {
        if d.is_empty() {
            return Err(EquivalenceError::EmptyMatrix);
        }
        Ok(Self::from_fn(d.len(), |i, j| {
            if i == j {
                d[i].clone()
            } else {
                RationalFunction::zero()
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RationalFunction) {
        self.entries[i * self.n + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<RationalFunction>> {
        self.entries.chunks(self.n).map(<[_]>::to_vec).collect()
    }

    /// Canonical text of each entry.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.entries
            .chunks(self.n)
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RationalFunction::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) * c)
    }

    /// Entrywise derivative.
    pub fn derivative(&self) -> Self {
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(RationalFunction::derivative)
                .collect(),
        }
    }

    fn check_dim(&self, o: &Self) -> Result<(), EquivalenceError> {
        if self.n == o.n {
            Ok(())
        } else {
            Err(EquivalenceError::DimensionMismatch {
                left: self.n,
                right: o.n,
            })
        }
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, EquivalenceError> {
        self.check_dim(o)?;
        Ok(self.mul_unchecked(o))
    }

    fn mul_unchecked(&self, o: &Self) -> Self {
        let (pa, da) = self.split();
        let (pb, db) = o.split();
        Self::join(&pa.mul(&pb), &[&da, &db])
    }

    /// `self = P / d` with `P` polynomial and `d` the monic lcm of the
    /// denominators.
    fn split(&self) -> (PolyMatrix, Poly) {
        let d = self
            .entries
            .iter()
            .fold(Poly::one(), |acc, e| lcm(&acc, e.denominator()));
        let p = self
            .entries
            .iter()
            .map(|e| e.numerator() * &d.exact_div(e.denominator()))
            .collect();
        (PolyMatrix { n: self.n, p }, d)
    }

    /// `P / (f_1 ... f_k)`, reduced entrywise one factor at a time, which
    /// keeps the gcds small.
    fn join(p: &PolyMatrix, factors: &[&Poly]) -> Self {
        let entries =
            p.p.iter()
                .map(|e| {
                    let mut num = e.clone();
                    let mut den = Poly::one();
                    for f in factors {
                        let g = Poly::gcd(&num, f);
                        num = num.exact_div(&g);
                        den = &den * &f.exact_div(&g);
                    }
                    RationalFunction::from_coprime(num, den)
                })
                .collect();
        Self { n: p.n, entries }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, EquivalenceError> {
        self.check_dim(o)?;
        Ok(Self::from_fn(self.n, |i, j| self.get(i, j) + o.get(i, j)))
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, EquivalenceError> {
        self.check_dim(o)?;
        Ok(Self::from_fn(self.n, |i, j| self.get(i, j) - o.get(i, j)))
    }

    pub fn determinant(&self) -> RationalFunction {
        let (p, d) = self.split();
        match p.det_adjugate() {
            Some((det, _)) => {
                RationalFunction::new(det, d.pow(self.n as u32)).expect("nonzero denominator")
            }
            None => RationalFunction::zero(),
        }
    }

    pub fn inverse(&self) -> Result<Self, EquivalenceError> {
        let (p, d) = self.split();
        let (det, adj) = p.det_adjugate().ok_or(EquivalenceError::Singular)?;
        Ok(Self::join(&adj.scale(&d), &[&det]))
    }

    /// Floating-point evaluation at `z`; entries with a pole at `z` give
    /// non-finite values.
    pub fn eval_f64(&self, z: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).eval_f64(z))
    }

    pub fn to_numeric(&self) -> NumericMatrix {
        NumericMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|r| (to_f64_coeffs(r.numerator()), to_f64_coeffs(r.denominator())))
                .collect(),
        }
    }
}

fn to_f64_coeffs(p: &Poly) -> Vec<Complex64> {
    p.coeffs().iter().map(|c| c.to_c64()).collect()
}

fn horner(cs: &[Complex64], z: Complex64) -> Complex64 {
    cs.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Rounded copy of a [`RationalMatrix`] for use as the coefficient field of
/// the numerical integrator.
#[derive(Debug, Clone)]
pub struct NumericMatrix {
    n: usize,
    entries: Vec<(Vec<Complex64>, Vec<Complex64>)>,
}

impl Coefficients for NumericMatrix {
    fn dimension(&self) -> usize {
        self.n
    }

    fn eval_into(&self, z: Complex64, out: &mut DMatrix<Complex64>) {
        for (k, (num, den)) in self.entries.iter().enumerate() {
            out[(k / self.n, k % self.n)] = horner(num, z) / horner(den, z);
        }
    }
}

impl Add for &RationalMatrix {
    type Output = RationalMatrix;
    fn add(self, o: &RationalMatrix) -> RationalMatrix {
        self.checked_add(o).expect("dimension mismatch")
    }
}

impl Sub for &RationalMatrix {
    type Output = RationalMatrix;
    fn sub(self, o: &RationalMatrix) -> RationalMatrix {
        self.checked_sub(o).expect("dimension mismatch")
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;
    fn mul(self, o: &RationalMatrix) -> RationalMatrix {
        self.checked_mul(o).expect("dimension mismatch")
    }
}

impl Neg for &RationalMatrix {
    type Output = RationalMatrix;
    fn neg(self) -> RationalMatrix {
        RationalMatrix {
            n: self.n,
            entries: self.entries.iter().map(|e| -e).collect(),
        }
    }
}

/// `[[a, b], [c, d]]` with canonical entries.
impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.n).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Monic `y^(n) + a_{n-1} y^(n-1) + ... + a_0 y = 0`; `coeffs[k] = a_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarEquation {
    coeffs: Vec<RationalFunction>,
}

impl ScalarEquation {
    pub fn new(coeffs: Vec<RationalFunction>) -> Result<Self, EquivalenceError> {
        if coeffs.is_empty() {
            return Err(EquivalenceError::ZeroOrder);
        }
        Ok(Self { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[RationalFunction] {
        &self.coeffs
    }
}

/// Superdiagonal ones, last row `(-a_0, ..., -a_{n-1})`.
pub fn companion_of_scalar(eq: &ScalarEquation) -> RationalMatrix {
    let n = eq.order();
    RationalMatrix::from_fn(n, |i, j| {
        if i == n - 1 {
            -&eq.coeffs[j]
        } else if j == i + 1 {
            RationalFunction::one()
        } else {
            RationalFunction::zero()
        }
    })
}

/// `(y, y', ..., y^(n-1))` as the companion-system vector. The input is
/// already in that order, so this only checks the arity.
pub fn scalar_solution_transfer<T: Clone>(
    eq: &ScalarEquation,
    samples: &[T],
) -> Result<Vec<T>, EquivalenceError> {
    if samples.len() != eq.order() {
        return Err(EquivalenceError::Arity {
            expected: eq.order(),
            found: samples.len(),
        });
    }
    Ok(samples.to_vec())
}

/// How the action matrix `D` of a module, with `∂e_i = sum_j D[i][j] e_j`,
/// is tied to the system matrix `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModuleConvention {
    /// `D = -A^t`. Flat sections `sum y_i e_i` then solve `Y' = AY`.
    NegTranspose,
    /// `D = A^t`, i.e. `∂e_i = sum_j a_{j,i} e_j`.
    PlusTranspose,
}

impl ModuleConvention {
    pub fn name(self) -> &'static str {
        match self {
            Self::NegTranspose => "neg-transpose",
            Self::PlusTranspose => "plus-transpose",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "neg-transpose" => Some(Self::NegTranspose),
            "plus-transpose" => Some(Self::PlusTranspose),
            _ => None,
        }
    }
}

/// Differential module with basis `e_1..e_n`; `action` gives `∂` on the
/// basis, read according to `convention`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialModule {
    action: RationalMatrix,
    convention: ModuleConvention,
}

impl DifferentialModule {
    pub fn new(action: RationalMatrix, convention: ModuleConvention) -> Self {
        Self { action, convention }
    }

    pub fn dimension(&self) -> usize {
        self.action.dim()
    }

    pub fn action(&self) -> &RationalMatrix {
        &self.action
    }

    pub fn convention(&self) -> ModuleConvention {
        self.convention
    }

    /// `∂` applied to the element with coordinates `y` (column vector).
    pub fn apply(&self, y: &[RationalFunction]) -> Result<Vec<RationalFunction>, EquivalenceError> {
        let n = self.dimension();
        if y.len() != n {
            return Err(EquivalenceError::Arity {
                expected: n,
                found: y.len(),
            });
        }
        let d = self.action.transpose();
        Ok((0..n)
            .map(|j| (0..n).fold(y[j].derivative(), |acc, i| &acc + &(d.get(j, i) * &y[i])))
            .collect())
    }
}

/// Module with `∂e = -A^t e`.
pub fn module_from_matrix(a: &RationalMatrix) -> DifferentialModule {
    DifferentialModule::new(-&a.transpose(), ModuleConvention::NegTranspose)
}

/// Reads `A` back from the module under its stored convention, then
/// applies `basis_change` as a gauge transformation if given.
pub fn matrix_from_module(
    m: &DifferentialModule,
    basis_change: Option<&RationalMatrix>,
) -> Result<RationalMatrix, EquivalenceError> {
    let a = match m.convention {
        ModuleConvention::NegTranspose => -&m.action.transpose(),
        ModuleConvention::PlusTranspose => m.action.transpose(),
    };
    match basis_change {
        Some(b) => gauge_transform(&a, b),
        None => Ok(a),
    }
}

/// `B^{-1} A B - B^{-1} B'`: the system satisfied by `Z` where `Y = BZ`.
pub fn gauge_transform(
    a: &RationalMatrix,
    b: &RationalMatrix,
) -> Result<RationalMatrix, EquivalenceError> {
    a.check_dim(b)?;
    // With A = P/p and B = Q/q the result is
    //   adj(Q) (P Q q - p (Q' q - Q q')) / (det(Q) p q)
    let (pa, da) = a.split();
    let (pb, db) = b.split();
    let (det, adj) = pb.det_adjugate().ok_or(EquivalenceError::Singular)?;
    let b_prime = pb.derivative().scale(&db).sub(&pb.scale(&db.derivative()));
    let inner = pa.mul(&pb).scale(&db).sub(&b_prime.scale(&da));
    Ok(RationalMatrix::join(&adj.mul(&inner), &[&det, &da, &db]))
}
