use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::poly::{Poly, QComplex};
use super::EquivalenceError;

/// Element of `C(z)` (exact complex rationals) in reduced form: the
/// denominator is monic and coprime to the numerator; zero is `0/1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl Default for RationalFunction {
    fn default() -> Self {
        Self::zero()
    }
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self, EquivalenceError> {
        if den.is_zero() {
            return Err(EquivalenceError::DivisionByZero);
        }
        let g = Poly::gcd(&num, &den);
        Ok(Self::from_coprime(num.exact_div(&g), den.exact_div(&g)))
    }

    /// Normalizes the leading coefficient of an already coprime pair.
    pub(crate) fn from_coprime(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let lead = den.leading().expect("nonzero denominator");
        if lead.is_one() {
            return Self { num, den };
        }
        let inv = lead.inv().expect("nonzero leading coefficient");
        Self {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: QComplex) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn z() -> Self {
        Self::from_poly(Poly::z())
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn inv(&self) -> Result<Self, EquivalenceError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, EquivalenceError> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        // powers of coprime polynomials stay coprime
        Self {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    /// `(n' d - n d') / d^2`, reduced.
    pub fn derivative(&self) -> Self {
        let num = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::new(num, &self.den * &self.den).expect("nonzero denominator")
    }

    /// `None` at a pole.
    pub fn eval(&self, z: &QComplex) -> Option<QComplex> {
        &self.num.eval(z) / &self.den.eval(z)
    }

    pub fn eval_f64(&self, z: Complex64) -> Complex64 {
        self.num.eval_f64(z) / self.den.eval_f64(z)
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, o: &RationalFunction) -> RationalFunction {
        // n1/d1 + n2/d2 with g = gcd(d1, d2): only g can share factors
        // with the new numerator
        let g = Poly::gcd(&self.den, &o.den);
        let d1 = self.den.exact_div(&g);
        let d2 = o.den.exact_div(&g);
        let t = &(&self.num * &d2) + &(&o.num * &d1);
        let h = Poly::gcd(&t, &g);
        RationalFunction::from_coprime(t.exact_div(&h), &d1 * &o.den.exact_div(&h))
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, o: &RationalFunction) -> RationalFunction {
        self + &(-o)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, o: &RationalFunction) -> RationalFunction {
        if self.is_zero() || o.is_zero() {
            return RationalFunction::zero();
        }
        let g1 = Poly::gcd(&self.num, &o.den);
        let g2 = Poly::gcd(&o.num, &self.den);
        RationalFunction::from_coprime(
            &self.num.exact_div(&g1) * &o.num.exact_div(&g2),
            &self.den.exact_div(&g2) * &o.den.exact_div(&g1),
        )
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

/// Canonical text: `(z^2+1)/(z-1)`, `3*z/(z+1)`, `1/z^2`, `z-2`.
impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.term_count() > 1 {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        if self.den.term_count() > 1 {
            write!(f, "/({})", self.den)
        } else {
            write!(f, "/{}", self.den)
        }
    }
}
