//! Exact homogeneous polynomials in `X, Y, Z` over arbitrary-precision integers.
//!
//! A [`HomPoly`] stores its terms sorted in descending graded-lex order
//! (which is plain lex order, since all exponents share one total degree),
//! so equal values always serialize identically.

mod gcd;
pub mod upoly;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use gcd::gcd_multivar;

/// Default hard cap on the degree produced by [`HomPoly::substitute`].
pub const DEFAULT_DEGREE_CAP: u32 = 1024;

/// Exponent triple `(a, b, c)` for `X^a Y^b Z^c`.
pub type Exponent = [u32; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: u32, right: u32 },
    #[error("terms are not homogeneous")]
    NotHomogeneous,
    #[error("result degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: u64, cap: u32 },
    #[error("division is not exact")]
    NotDivisible,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("exponent overflow")]
    ExponentOverflow,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HomPoly {
    terms: Vec<(Exponent, BigInt)>,
    degree: u32,
}

fn exp_degree(e: &Exponent) -> u64 {
    e.iter().map(|&v| v as u64).sum()
}

impl HomPoly {
    pub fn zero() -> Self {
        HomPoly {
            terms: Vec::new(),
            degree: 0,
        }
    }

    pub fn one() -> Self {
        Self::monomial([0, 0, 0], BigInt::one())
    }

    /// `X`, `Y` or `Z` for `index` 0, 1, 2.
    pub fn var(index: usize) -> Self {
        let mut e = [0; 3];
        e[index] = 1;
        Self::monomial(e, BigInt::one())
    }

    pub fn monomial(exp: Exponent, coeff: BigInt) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        HomPoly {
            degree: exp.iter().sum(),
            terms: vec![(exp, coeff)],
        }
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates and
    /// dropping zeros. All exponent triples must share one total degree.
    pub fn from_terms<I>(terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Exponent, BigInt)>,
    {
        let mut map: HashMap<Exponent, BigInt> = HashMap::new();
        let mut degree: Option<u64> = None;
        for (e, c) in terms {
            let d = exp_degree(&e);
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => return Err(PolyError::NotHomogeneous),
                _ => {}
            }
            *map.entry(e).or_insert_with(BigInt::zero) += c;
        }
        Ok(Self::from_map(map, degree.unwrap_or(0) as u32))
    }

    /// Rational terms, scaled by the lcm of the denominators.
    pub fn from_rational_terms<I>(terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Exponent, BigRational)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let lcm = terms
            .iter()
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        Self::from_terms(
            terms
                .into_iter()
                .map(|(e, c)| (e, (c * BigRational::from_integer(lcm.clone())).to_integer())),
        )
    }

    fn from_map(map: HashMap<Exponent, BigInt>, degree: u32) -> Self {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|t| std::cmp::Reverse(t.0));
        let degree = if terms.is_empty() { 0 } else { degree };
        HomPoly { terms, degree }
    }

    /// Terms in canonical (descending graded-lex) order.
    pub fn terms(&self) -> &[(Exponent, BigInt)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading_term(&self) -> Option<&(Exponent, BigInt)> {
        self.terms.first()
    }

    /// Gcd of all coefficients (non-negative; zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        let mut acc = BigInt::zero();
        for (_, c) in &self.terms {
            acc = acc.gcd(c);
            if acc.is_one() {
                break;
            }
        }
        acc
    }

    /// Componentwise minimum exponent over all terms.
    pub fn monomial_content(&self) -> Exponent {
        let mut m = [u32::MAX; 3];
        for (e, _) in &self.terms {
            for i in 0..3 {
                m[i] = m[i].min(e[i]);
            }
        }
        if self.terms.is_empty() {
            [0; 3]
        } else {
            m
        }
    }

    /// Divides out the integer content and makes the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.content();
        if self.terms[0].1.is_negative() {
            c = -c;
        }
        self.div_integer(&c)
            .expect("content divides every coefficient")
    }

    pub fn neg(&self) -> Self {
        HomPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
            degree: self.degree,
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        HomPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect(),
            degree: self.degree,
        }
    }

    /// Exact division of every coefficient by `k`.
    pub fn div_integer(&self, k: &BigInt) -> Result<Self, PolyError> {
        if k.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return Err(PolyError::NotDivisible);
            }
            terms.push((*e, q));
        }
        Ok(HomPoly {
            terms,
            degree: self.degree,
        })
    }

    pub fn mul_monomial(&self, m: &Exponent) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let mut ne = [0; 3];
            for i in 0..3 {
                ne[i] = e[i].checked_add(m[i]).ok_or(PolyError::ExponentOverflow)?;
            }
            terms.push((ne, c.clone()));
        }
        let degree = (self.degree as u64 + exp_degree(m))
            .try_into()
            .map_err(|_| PolyError::ExponentOverflow)?;
        Ok(HomPoly { terms, degree })
    }

    pub fn div_monomial(&self, m: &Exponent) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let mut ne = [0; 3];
            for i in 0..3 {
                ne[i] = e[i].checked_sub(m[i]).ok_or(PolyError::NotDivisible)?;
            }
            terms.push((ne, c.clone()));
        }
        Ok(HomPoly {
            terms,
            degree: self.degree - m.iter().sum::<u32>(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.degree != other.degree {
            return Err(PolyError::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        // merge two descending lists
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ea, ca) = &self.terms[i];
            let (eb, cb) = &other.terms[j];
            match ea.cmp(eb) {
                std::cmp::Ordering::Greater => {
                    terms.push((*ea, ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    terms.push((*eb, cb.clone()));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = ca + cb;
                    if !s.is_zero() {
                        terms.push((*ea, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend_from_slice(&self.terms[i..]);
        terms.extend_from_slice(&other.terms[j..]);
        let degree = if terms.is_empty() { 0 } else { self.degree };
        Ok(HomPoly { terms, degree })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let degree = self.degree + other.degree;
        let mut acc = Accumulator::new(degree, self.len().saturating_mul(other.len()));
        acc.add_product(&BigInt::one(), [0; 3], self, other);
        acc.finish()
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitutes the triple `s` for `(X, Y, Z)`, with the default degree cap.
    pub fn substitute(&self, s: &[HomPoly; 3]) -> Result<Self, PolyError> {
        self.substitute_capped(s, DEFAULT_DEGREE_CAP)
    }

    /// `self(s₀, s₁, s₂)`. The three substituted polynomials must share a
    /// degree `e ≥ 1` (zero polynomials are allowed in any slot); the result
    /// has degree `deg(self)·e` and that degree must not exceed `cap`.
    pub fn substitute_capped(&self, s: &[HomPoly; 3], cap: u32) -> Result<Self, PolyError> {
        let mut e: Option<u32> = None;
        for p in s.iter().filter(|p| !p.is_zero()) {
            match e {
                None => e = Some(p.degree),
                Some(prev) if prev != p.degree => {
                    return Err(PolyError::DegreeMismatch {
                        left: prev,
                        right: p.degree,
                    })
                }
                _ => {}
            }
        }
        let e = e.unwrap_or(1);
        let degree = self.degree as u64 * e as u64;
        if degree > cap as u64 {
            return Err(PolyError::DegreeCapExceeded { degree, cap });
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let degree = degree as u32;
        let mut powers = [
            PowerCache::new(&s[0]),
            PowerCache::new(&s[1]),
            PowerCache::new(&s[2]),
        ];
        let mut estimate = 0usize;
        for (ex, _) in &self.terms {
            let mut size = 1usize;
            for i in 0..3 {
                size = size.saturating_mul(powers[i].len_estimate(ex[i]));
            }
            estimate = estimate.saturating_add(size);
        }
        let mut acc = Accumulator::new(degree, estimate);
        for (ex, c) in &self.terms {
            // Monomial factors fold into a shift; at most two real products remain.
            let mut shift = [0u32; 3];
            let mut scale = c.clone();
            let mut factors: Vec<&HomPoly> = Vec::with_capacity(3);
            let mut vanishes = false;
            for i in 0..3 {
                powers[i].ensure(ex[i]);
            }
            for i in 0..3 {
                let p = powers[i].at(ex[i]);
                if p.is_zero() {
                    vanishes = true;
                    break;
                }
                if p.is_monomial() {
                    let (me, mc) = &p.terms[0];
                    for k in 0..3 {
                        shift[k] += me[k];
                    }
                    if !mc.is_one() {
                        scale *= mc;
                    }
                } else {
                    factors.push(p);
                }
            }
            if vanishes {
                continue;
            }
            match factors.len() {
                0 => acc.add_term(&shift, &scale),
                1 => acc.add_scaled(&scale, shift, factors[0]),
                2 => acc.add_product(&scale, shift, factors[0], factors[1]),
                _ => {
                    let ab = factors[0].mul(factors[1]);
                    acc.add_product(&scale, shift, &ab, factors[2]);
                }
            }
        }
        Ok(acc.finish())
    }

    /// Exact quotient `self / g`; fails if `g` does not divide `self`.
    pub fn divide_exact(&self, g: &HomPoly) -> Result<Self, PolyError> {
        if g.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if g.degree > self.degree {
            return Err(PolyError::NotDivisible);
        }
        if g.is_monomial() {
            let (e, c) = &g.terms[0];
            return self.div_monomial(e)?.div_integer(c);
        }
        let (ge, gc) = &g.terms[0];
        let mut rem: std::collections::BTreeMap<Exponent, BigInt> =
            self.terms.iter().cloned().collect();
        let mut quotient = Vec::new();
        while let Some((re, rc)) = rem.last_key_value() {
            let mut qe = [0u32; 3];
            for i in 0..3 {
                qe[i] = re[i].checked_sub(ge[i]).ok_or(PolyError::NotDivisible)?;
            }
            let (qc, r) = rc.div_rem(gc);
            if !r.is_zero() {
                return Err(PolyError::NotDivisible);
            }
            for (e, c) in &g.terms {
                let key = [e[0] + qe[0], e[1] + qe[1], e[2] + qe[2]];
                let entry = rem.entry(key).or_insert_with(BigInt::zero);
                *entry -= c * &qc;
                if entry.is_zero() {
                    rem.remove(&key);
                }
            }
            quotient.push((qe, qc));
        }
        Ok(HomPoly {
            terms: quotient,
            degree: self.degree - g.degree,
        })
    }

    /// Sign normalization: the leading coefficient becomes positive.
    pub fn sign_normalized(&self) -> Self {
        match self.terms.first() {
            Some((_, c)) if c.is_negative() => self.neg(),
            _ => self.clone(),
        }
    }

    pub fn evaluate(&self, point: &[BigInt; 3]) -> BigInt {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.clone();
                for i in 0..3 {
                    v *= num_traits::pow(point[i].clone(), e[i] as usize);
                }
                v
            })
            .sum()
    }
}

impl Default for HomPoly {
    fn default() -> Self {
        HomPoly::zero()
    }
}

impl fmt::Debug for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomPoly({self})")
    }
}

/// Canonical text form: signed `c*X^a*Y^b*Z^c` terms in descending order.
impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let sep = match (i, c.is_negative()) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            write!(f, "{sep}{}*X^{}*Y^{}*Z^{}", c.abs(), e[0], e[1], e[2])?;
        }
        Ok(())
    }
}

/// Lazily extended powers `p^0, p^1, …` of one substituted component.
struct PowerCache<'a> {
    base: &'a HomPoly,
    powers: Vec<HomPoly>,
}

impl<'a> PowerCache<'a> {
    fn new(base: &'a HomPoly) -> Self {
        PowerCache {
            base,
            powers: vec![HomPoly::one()],
        }
    }

    fn len_estimate(&self, n: u32) -> usize {
        if n == 0 || self.base.is_monomial() {
            1
        } else {
            // binomial-like growth; only used to pick a representation
            self.base.len().saturating_mul(n as usize)
        }
    }

    fn ensure(&mut self, n: u32) {
        while self.powers.len() <= n as usize {
            let next = self.powers.last().unwrap().mul(self.base);
            self.powers.push(next);
        }
    }

    fn at(&self, n: u32) -> &HomPoly {
        &self.powers[n as usize]
    }
}

/// Collects terms of one fixed degree, densely when the output is expected
/// to be dense and through a hash map otherwise.
enum Accumulator {
    Dense {
        degree: u32,
        slots: Vec<BigInt>,
    },
    Sparse {
        degree: u32,
        map: HashMap<(u32, u32), BigInt>,
    },
}

impl Accumulator {
    fn new(degree: u32, expected_products: usize) -> Self {
        let d = degree as usize;
        let dense_len = (d + 1) * (d + 2) / 2;
        if dense_len <= expected_products.saturating_mul(2) && dense_len <= 1 << 26 {
            Accumulator::Dense {
                degree,
                slots: vec![BigInt::zero(); dense_len],
            }
        } else {
            Accumulator::Sparse {
                degree,
                map: HashMap::with_capacity(expected_products.min(1 << 20)),
            }
        }
    }

    #[inline]
    fn slot(degree: u32, a: u32, b: u32) -> usize {
        // rows indexed by a; row a holds b = 0..=degree-a
        let (d, a, b) = (degree as usize, a as usize, b as usize);
        a * (2 * d + 3 - a) / 2 + b
    }

    #[inline]
    fn add_term(&mut self, e: &Exponent, c: &BigInt) {
        match self {
            Accumulator::Dense { degree, slots } => {
                let i = Self::slot(*degree, e[0], e[1]);
                slots[i] += c;
            }
            Accumulator::Sparse { map, .. } => {
                *map.entry((e[0], e[1])).or_insert_with(BigInt::zero) += c;
            }
        }
    }

    fn add_scaled(&mut self, scale: &BigInt, shift: Exponent, p: &HomPoly) {
        let unit = scale.is_one();
        for (e, c) in &p.terms {
            let key = [e[0] + shift[0], e[1] + shift[1], e[2] + shift[2]];
            if unit {
                self.add_term(&key, c);
            } else {
                self.add_term(&key, &(c * scale));
            }
        }
    }

    fn add_product(&mut self, scale: &BigInt, shift: Exponent, p: &HomPoly, q: &HomPoly) {
        let (p, q) = if p.len() <= q.len() { (p, q) } else { (q, p) };
        let unit = scale.is_one();
        for (ep, cp) in &p.terms {
            let cp = if unit { cp.clone() } else { cp * scale };
            let base = [ep[0] + shift[0], ep[1] + shift[1], ep[2] + shift[2]];
            for (eq, cq) in &q.terms {
                let key = [base[0] + eq[0], base[1] + eq[1], base[2] + eq[2]];
                self.add_term(&key, &(&cp * cq));
            }
        }
    }

    fn finish(self) -> HomPoly {
        match self {
            Accumulator::Dense { degree, mut slots } => {
                let d = degree;
                let mut terms = Vec::new();
                // descending lex: a from high to low, then b from high to low
                for a in (0..=d).rev() {
                    let row = Self::slot(d, a, 0);
                    for b in (0..=(d - a)).rev() {
                        let c = std::mem::take(&mut slots[row + b as usize]);
                        if !c.is_zero() {
                            terms.push(([a, b, d - a - b], c));
                        }
                    }
                }
                let degree = if terms.is_empty() { 0 } else { d };
                HomPoly { terms, degree }
            }
            Accumulator::Sparse { degree, map } => {
                let map = map
                    .into_iter()
                    .map(|((a, b), c)| ([a, b, degree - a - b], c))
                    .collect();
                HomPoly::from_map(map, degree)
            }
        }
    }
}
