use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact complex rational `re + im i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl QComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den + (inum / iden) i`.
    pub fn from_ratios(num: i64, den: i64, inum: i64, iden: i64) -> Self {
        Self::new(
            BigRational::new(num.into(), den.into()),
            BigRational::new(inum.into(), iden.into()),
        )
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &QComplex {
    type Output = QComplex;
    fn add(self, o: &QComplex) -> QComplex {
        QComplex::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &QComplex {
    type Output = QComplex;
    fn sub(self, o: &QComplex) -> QComplex {
        QComplex::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &QComplex {
    type Output = QComplex;
    fn mul(self, o: &QComplex) -> QComplex {
        QComplex::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Div for &QComplex {
    type Output = Option<QComplex>;
    fn div(self, o: &QComplex) -> Option<QComplex> {
        o.inv().map(|inv| self * &inv)
    }
}

impl Neg for &QComplex {
    type Output = QComplex;
    fn neg(self) -> QComplex {
        QComplex::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_real(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_imag(r: &BigRational) -> String {
    let num = r.numer();
    let head = if num.is_one() {
        "i".to_string()
    } else if *num == -BigInt::one() {
        "-i".to_string()
    } else {
        format!("{num}i")
    };
    if r.denom().is_one() {
        head
    } else {
        format!("{head}/{}", r.denom())
    }
}

/// Canonical text: `3/2`, `2i/5`, `-i`, `3/2+2i/5`, `0`.
impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", fmt_real(&self.re)),
            (true, false) => write!(f, "{}", fmt_imag(&self.im)),
            (false, false) => {
                let sign = if self.im.is_positive() { "+" } else { "" };
                write!(f, "{}{sign}{}", fmt_real(&self.re), fmt_imag(&self.im))
            }
        }
    }
}

/// Polynomial in `z` with exact complex rational coefficients, stored
/// lowest degree first with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<QComplex>,
}

impl Poly {
    pub fn from_coeffs(mut coeffs: Vec<QComplex>) -> Self {
        while coeffs.last().is_some_and(QComplex::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: QComplex) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(QComplex::one())
    }

    /// The polynomial `z`.
    pub fn z() -> Self {
        Self::from_coeffs(vec![QComplex::zero(), QComplex::one()])
    }

    pub fn coeffs(&self) -> &[QComplex] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&QComplex> {
        self.coeffs.last()
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn scale(&self, c: &QComplex) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Divided by its leading coefficient; zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading().and_then(QComplex::inv) {
            Some(inv) => self.scale(&inv),
            None => Self::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &QComplex::from_int(k as i64))
                .collect(),
        )
    }

    /// Quotient and remainder; `None` when dividing by zero.
    pub fn div_rem(&self, d: &Poly) -> Option<(Poly, Poly)> {
        let dd = d.degree()?;
        let lead_inv = d.leading()?.inv()?;
        let mut rem = self.coeffs.clone();
        let nq = self.coeffs.len().saturating_sub(dd);
        let mut quot = vec![QComplex::zero(); nq];
        for k in (0..nq).rev() {
            let c = &rem[k + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * dc);
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Some((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.degree() == Some(0) || b.degree() == Some(0) || modp::coprime(a, b) {
            return Poly::one();
        }
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y).expect("nonzero divisor");
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    /// Quotient of a division known to be exact.
    pub(crate) fn exact_div(&self, d: &Poly) -> Poly {
        if d.is_one() {
            return self.clone();
        }
        self.div_rem(d).expect("nonzero divisor").0
    }

    pub fn eval(&self, z: &QComplex) -> QComplex {
        self.coeffs
            .iter()
            .rev()
            .fold(QComplex::zero(), |acc, c| &(&acc * z) + c)
    }

    pub fn eval_f64(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_c64())
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let zero = QComplex::zero();
        Poly::from_coeffs(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + o.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![QComplex::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

fn monomial(k: usize) -> String {
    match k {
        0 => String::new(),
        1 => "z".to_string(),
        _ => format!("z^{k}"),
    }
}

/// Canonical text, descending degree: `3*z^2-z+(1+i)`, `2i/5*z`, `0`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = monomial(k);
            if !c.re.is_zero() && !c.im.is_zero() {
                if !first {
                    write!(f, "+")?;
                }
                write!(f, "({c})")?;
                if k > 0 {
                    write!(f, "*{mono}")?;
                }
            } else {
                let negative = c.re.is_negative() || c.im.is_negative();
                let magnitude = if negative { -c } else { c.clone() };
                if negative {
                    write!(f, "-")?;
                } else if !first {
                    write!(f, "+")?;
                }
                if k == 0 {
                    write!(f, "{magnitude}")?;
                } else if magnitude.is_one() {
                    write!(f, "{mono}")?;
                } else {
                    write!(f, "{magnitude}*{mono}")?;
                }
            }
            first = false;
        }
        Ok(())
    }
}


/// Coprimality certificate through the map `Q(i) -> F_p`, `i -> s` with
/// `s^2 = -1`. If both leading coefficients survive the reduction, a common
/// factor over `Q(i)` would reduce to a common factor of the same degree, so
/// coprime images prove coprime inputs. `false` means "unknown".
mod modp {
    use num_bigint::BigInt;
    use num_traits::{Signed, ToPrimitive, Zero};

    use super::{Poly, QComplex};

    const P: u64 = 4_611_686_018_427_387_817;
    const SQRT_MINUS_ONE: u64 = 120_863_620_846_201_794;

    fn mul(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % P as u128) as u64
    }

    fn add(a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % P as u128) as u64
    }

    fn sub(a: u64, b: u64) -> u64 {
        add(a, P - b)
    }

    fn inv(a: u64) -> u64 {
        let (mut base, mut e, mut acc) = (a, P - 2, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn int(n: &BigInt) -> u64 {
        let r = n % BigInt::from(P);
        let r = if r.is_negative() {
            r + BigInt::from(P)
        } else {
            r
        };
        r.to_u64().expect("reduced below p")
    }

    fn reduce_q(q: &num_rational::BigRational) -> Option<u64> {
        let d = int(q.denom());
        (d != 0).then(|| mul(int(q.numer()), inv(d)))
    }

    fn reduce(c: &QComplex) -> Option<u64> {
        Some(add(reduce_q(&c.re)?, mul(SQRT_MINUS_ONE, reduce_q(&c.im)?)))
    }

    /// Image with a nonzero leading coefficient, low degree first.
    fn image(p: &Poly) -> Option<Vec<u64>> {
        let v = p.coeffs.iter().map(reduce).collect::<Option<Vec<u64>>>()?;
        (*v.last()? != 0).then_some(v)
    }

    fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    /// `a mod b` for trimmed, nonzero `b`.
    fn rem(mut a: Vec<u64>, b: &[u64]) -> Vec<u64> {
        let lead = inv(*b.last().expect("nonzero divisor"));
        while a.len() >= b.len() {
            let c = mul(*a.last().expect("nonempty"), lead);
            let shift = a.len() - b.len();
            for (j, &bj) in b.iter().enumerate() {
                a[shift + j] = sub(a[shift + j], mul(c, bj));
            }
            trim(&mut a);
        }
        a
    }

    pub(super) fn coprime(a: &Poly, b: &Poly) -> bool {
        if a.is_zero() || b.is_zero() {
            return false;
        }
        let (Some(mut x), Some(mut y)) = (image(a), image(b)) else {
            return false;
        };
        while !y.is_empty() {
            let r = rem(x, &y);
            x = y;
            y = r;
        }
        x.len() == 1 && !x[0].is_zero()
    }
}
