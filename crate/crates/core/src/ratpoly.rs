//! Sparse polynomials and rational functions with rational coefficients in
//! up to three variables. These carry user input (affine maps, Hénon and
//! Jonquière data) before it is homogenized into [`HomPoly`] triples.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exactpoly::{Exponent, HomPoly};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    terms: BTreeMap<Exponent, BigRational>,
}

impl QPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert([0; 3], c);
        }
        p
    }

    pub fn integer(c: i64) -> Self {
        Self::constant(BigRational::from_integer(c.into()))
    }

    pub fn var(index: usize) -> Self {
        let mut e = [0; 3];
        e[index] = 1;
        Self::term(e, BigRational::one())
    }

    pub fn term(e: Exponent, c: BigRational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    /// Univariate polynomial in variable `index` from ascending coefficients.
    pub fn from_coeffs(index: usize, coeffs: &[BigRational]) -> Self {
        let mut p = Self::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = [0; 3];
            e[index] = k as u32;
            p = p.add(&Self::term(e, c.clone()));
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, index: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[index]).max()
    }

    pub fn is_constant(&self) -> bool {
        self.degree().unwrap_or(0) == 0
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            Some(BigRational::zero())
        } else if self.is_constant() {
            self.terms.get(&[0; 3]).cloned()
        } else {
            None
        }
    }

    /// Coefficient list in variable `index` (ascending), assuming univariate.
    pub fn univariate_coeffs(&self, index: usize) -> Vec<BigRational> {
        let n = self.degree_in(index).map_or(0, |d| d as usize + 1);
        let mut out = vec![BigRational::zero(); n];
        for (e, c) in &self.terms {
            out[e[index] as usize] += c;
        }
        out
    }

    pub fn uses_only(&self, index: usize) -> bool {
        self.terms
            .keys()
            .all(|e| (0..3).all(|i| i == index || e[i] == 0))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(*e).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        QPoly { terms }
    }

    pub fn neg(&self) -> Self {
        QPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        QPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<Exponent, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *terms.entry(e).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        QPoly { terms }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::integer(1);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Moves variable `from` to variable `to` (the target must be unused).
    pub fn rename(&self, from: usize, to: usize) -> Self {
        QPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = *e;
                    ne[to] += ne[from];
                    ne[from] = 0;
                    (ne, c.clone())
                })
                .collect(),
        }
    }

    /// Substitutes `values[i]` for variable `i`.
    pub fn compose(&self, values: &[QPoly; 3]) -> Self {
        let mut acc = Self::zero();
        for (e, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for i in 0..3 {
                if e[i] > 0 {
                    t = t.mul(&values[i].pow(e[i]));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Lcm of all coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QPoly({self})")
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        const NAMES: [&str; 3] = ["x", "y", "z"];
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let sep = match (i, c.is_negative()) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            write!(f, "{sep}{}", c.abs())?;
            for (k, name) in NAMES.iter().enumerate() {
                if e[k] > 0 {
                    write!(f, "*{name}^{}", e[k])?;
                }
            }
        }
        Ok(())
    }
}

/// Quotient `num / den` of two polynomials; never simplified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    pub num: QPoly,
    pub den: QPoly,
}

impl RatFunc {
    pub fn from_poly(p: QPoly) -> Self {
        RatFunc {
            num: p,
            den: QPoly::integer(1),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return RatFunc {
                num: self.num.add(&other.num),
                den: self.den.clone(),
            };
        }
        RatFunc {
            num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn neg(&self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RatFunc {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    /// `None` when dividing by zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if other.num.is_zero() {
            return None;
        }
        Some(RatFunc {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        })
    }

    /// The polynomial, when the denominator is a nonzero constant.
    pub fn as_poly(&self) -> Option<QPoly> {
        let d = self.den.constant_value()?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.scale(&d.recip()))
    }
}

/// Homogenizes three affine polynomials in `x, y` to `X, Y, Z` at their
/// common degree, clearing denominators jointly so the projective point is
/// unchanged.
pub fn homogenize_triple(parts: [&QPoly; 3]) -> [HomPoly; 3] {
    let degree = parts.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    let lcm = parts
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(&p.denominator_lcm()));
    let lcm = BigRational::from_integer(lcm);
    parts.map(|p| {
        HomPoly::from_terms(p.terms().map(|(e, c)| {
            let total = e[0] + e[1] + e[2];
            debug_assert_eq!(e[2], 0, "affine input uses only x and y");
            ([e[0], e[1], degree - total], (c * &lcm).to_integer())
        }))
        .expect("homogenized terms share a degree")
    })
}
