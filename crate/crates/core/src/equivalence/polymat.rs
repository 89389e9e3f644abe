//! Square polynomial matrices, used to do matrix work over `C(z)` with one
//! common denominator and a single reduction per entry at the end.

use super::poly::Poly;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PolyMatrix {
    pub n: usize,
    pub p: Vec<Poly>,
}

impl PolyMatrix {
    #[cfg(test)]
    pub fn identity(n: usize) -> Self {
        let p = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    Poly::one()
                } else {
                    Poly::zero()
                }
            })
            .collect();
        Self { n, p }
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.p[i * self.n + j]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let p = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                (0..n).fold(Poly::zero(), |acc, l| {
                    &acc + &(self.get(i, l) * o.get(l, j))
                })
            })
            .collect();
        Self { n, p }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            p: self.p.iter().zip(&o.p).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Poly) -> Self {
        Self {
            n: self.n,
            p: self.p.iter().map(|a| a * c).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self {
            n: self.n,
            p: self.p.iter().map(Poly::derivative).collect(),
        }
    }

    /// Fraction-free Gauss–Jordan on `[P | I]`. Returns `(det P, adj P)`,
    /// or `None` when `P` is singular.
    pub fn det_adjugate(&self) -> Option<(Poly, Self)> {
        let n = self.n;
        let w = 2 * n;
        let mut a: Vec<Vec<Poly>> = (0..n)
            .map(|i| {
                let mut row: Vec<Poly> = (0..n).map(|j| self.get(i, j).clone()).collect();
                row.extend((0..n).map(|j| if i == j { Poly::one() } else { Poly::zero() }));
                row
            })
            .collect();
        let mut prev = Poly::one();
        let mut negate = false;
        for k in 0..n {
            let piv = (k..n).find(|&r| !a[r][k].is_zero())?;
            if piv != k {
                a.swap(piv, k);
                negate = !negate;
            }
            let (head, rest) = a.split_at_mut(k);
            let (pivot_row, tail) = rest.split_first_mut().expect("row k exists");
            for row in head.iter_mut().chain(tail.iter_mut()) {
                let f = row[k].clone();
                for j in 0..w {
                    let v = &(&pivot_row[k] * &row[j]) - &(&f * &pivot_row[j]);
                    row[j] = v.exact_div(&prev);
                }
            }
            prev = pivot_row[k].clone();
        }
        // left block is now prev * I and the right block prev * P^{-1}
        let adj = Self {
            n,
            p: a.into_iter()
                .flat_map(|row| row.into_iter().skip(n))
                .collect(),
        };
        if negate {
            Some((-&prev, adj.scale(&-&Poly::one())))
        } else {
            Some((prev, adj))
        }
    }
}

/// Least common multiple, monic.
pub(crate) fn lcm(a: &Poly, b: &Poly) -> Poly {
    let g = Poly::gcd(a, b);
    (&a.exact_div(&g) * b).monic()
}
