//! Dense univariate polynomials over a gcd domain, with the subresultant
//! polynomial remainder sequence.
//!
//! `UPoly<BigInt>` is ℤ[t]; `UPoly<UPoly<BigInt>>` is ℤ[x][y], which is all
//! the multivariate gcd needs after dehomogenization.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Coefficient domain for [`UPoly`]: a commutative ring with exact division
/// and a normalized gcd.
pub trait GcdDomain: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `Some(q)` with `q * other == self`, `None` when the division is not exact.
    fn exact_div(&self, other: &Self) -> Option<Self>;
    /// Greatest common divisor with canonical sign (see [`GcdDomain::is_negative`]).
    fn gcd(&self, other: &Self) -> Self;
    /// Sign of the leading coefficient, recursively.
    fn is_negative(&self) -> bool;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn normalized(self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self
        }
    }

    fn pow(&self, mut exp: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

impl GcdDomain for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn exact_div(&self, other: &Self) -> Option<Self> {
        if Zero::is_zero(other) {
            return None;
        }
        let (q, r) = self.div_rem(other);
        Zero::is_zero(&r).then_some(q)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

/// Dense polynomial `Σ coeffs[i] t^i` with no trailing zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly<R> {
    coeffs: Vec<R>,
}

impl<R: GcdDomain> UPoly<R> {
    pub fn from_coeffs(mut coeffs: Vec<R>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn constant(c: R) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<R> {
        self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&R> {
        self.coeffs.last()
    }

    fn shifted_scaled_sub(&mut self, other: &Self, factor: &R, shift: usize) {
        if self.coeffs.len() < other.coeffs.len() + shift {
            self.coeffs.resize(other.coeffs.len() + shift, R::zero());
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            if !c.is_zero() {
                self.coeffs[i + shift] = self.coeffs[i + shift].sub(&c.mul(factor));
            }
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn scale(&self, factor: &R) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c.mul(factor)).collect())
    }

    fn div_scalar(&self, factor: &R) -> Option<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.exact_div(factor))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_coeffs(coeffs))
    }

    /// Gcd of the coefficients, sign-normalized; zero for the zero polynomial.
    pub fn content(&self) -> R {
        let mut acc = R::zero();
        for c in &self.coeffs {
            acc = acc.gcd(c);
            if acc.is_one() {
                break;
            }
        }
        acc
    }

    pub fn primitive_part(&self) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut content = self.content();
        if self.leading().is_some_and(|l| l.is_negative()) {
            content = content.neg();
        }
        self.div_scalar(&content)
            .expect("content divides every coefficient")
    }

    /// Pseudo-remainder: `lc(b)^(deg a - deg b + 1) · a mod b`.
    pub fn pseudo_rem(&self, b: &Self) -> Self {
        let db = b.degree().expect("pseudo-division by zero polynomial");
        let lc = b.leading().unwrap().clone();
        let mut r = self.clone();
        let Some(da) = r.degree() else { return r };
        if da < db {
            return r;
        }
        let mut steps = da - db + 1;
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.leading().unwrap().clone();
            r = r.scale(&lc);
            r.shifted_scaled_sub(b, &lr, dr - db);
            steps -= 1;
        }
        if steps > 0 {
            r = r.scale(&lc.pow(steps));
        }
        r
    }

    /// Exact long division; `None` if `b` does not divide `self`.
    pub fn exact_quotient(&self, b: &Self) -> Option<Self> {
        let db = b.degree()?;
        let lc = b.leading().unwrap();
        let mut r = self.clone();
        let Some(da) = r.degree() else {
            return Some(r);
        };
        if da < db {
            return None;
        }
        let mut q = vec![R::zero(); da - db + 1];
        while let Some(dr) = r.degree() {
            if dr < db {
                return None;
            }
            let qc = r.leading().unwrap().exact_div(lc)?;
            r.shifted_scaled_sub(b, &qc, dr - db);
            q[dr - db] = qc;
        }
        Some(Self::from_coeffs(q))
    }

    pub fn mul_poly(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::from_coeffs(Vec::new());
        }
        let mut out = vec![R::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Gcd by the subresultant remainder sequence, sign-normalized.
    pub fn subresultant_gcd(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() {
            return other.clone().normalized_poly();
        }
        if other.coeffs.is_empty() {
            return self.clone().normalized_poly();
        }
        let (mut a, mut b) = if self.degree() >= other.degree() {
            (self.clone(), other.clone())
        } else {
            (other.clone(), self.clone())
        };
        let content_gcd = a.content().gcd(&b.content());
        a = a.primitive_part();
        b = b.primitive_part();
        let mut g = R::one();
        let mut h = R::one();
        loop {
            let delta = a.degree().unwrap() - b.degree().unwrap();
            let r = a.pseudo_rem(&b);
            match r.degree() {
                None => break,
                Some(0) => {
                    return Self::constant(content_gcd);
                }
                Some(_) => {}
            }
            a = b;
            let divisor = g.mul(&h.pow(delta));
            b = r
                .div_scalar(&divisor)
                .expect("subresultant division is exact");
            g = a.leading().unwrap().clone();
            h = if delta == 0 {
                h
            } else {
                g.pow(delta)
                    .exact_div(&h.pow(delta - 1))
                    .expect("subresultant h-update is exact")
            };
        }
        b.primitive_part().scale(&content_gcd)
    }

    fn normalized_poly(self) -> Self {
        if self.leading().is_some_and(|l| l.is_negative()) {
            self.scale(&R::one().neg())
        } else {
            self
        }
    }
}

impl<R: GcdDomain> GcdDomain for UPoly<R> {
    fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }
    fn one() -> Self {
        Self::constant(R::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = R::zero();
        Self::from_coeffs(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).unwrap_or(&zero);
                    let b = other.coeffs.get(i).unwrap_or(&zero);
                    a.add(b)
                })
                .collect(),
        )
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        self.mul_poly(other)
    }
    fn neg(&self) -> Self {
        UPoly {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }
    fn exact_div(&self, other: &Self) -> Option<Self> {
        self.exact_quotient(other)
    }
    fn gcd(&self, other: &Self) -> Self {
        self.subresultant_gcd(other)
    }
    fn is_negative(&self) -> bool {
        self.leading().is_some_and(|l| l.is_negative())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(cs: &[i64]) -> UPoly<BigInt> {
        UPoly::from_coeffs(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    #[test]
    fn integer_gcd_of_factored_polys() {
        // (t-1)(t+2) and (t-1)(t-3)
        let a = zp(&[-2, 1, 1]);
        let b = zp(&[3, -4, 1]);
        assert_eq!(a.subresultant_gcd(&b), zp(&[-1, 1]));
    }

    #[test]
    fn gcd_keeps_common_integer_content() {
        let a = zp(&[4, 4]);
        let b = zp(&[6, 6]);
        assert_eq!(a.subresultant_gcd(&b), zp(&[2, 2]));
    }

    #[test]
    fn knuth_example_is_coprime() {
        // Knuth TAOCP 4.6.1 example: gcd is 1.
        let a = zp(&[-5, 2, 8, -3, -3, 0, 1, 0, 1]);
        let b = zp(&[21, -9, -4, 0, 5, 0, 3]);
        assert_eq!(a.subresultant_gcd(&b), zp(&[1]));
    }

    #[test]
    fn exact_quotient_detects_remainder() {
        let a = zp(&[-1, 0, 1]);
        assert_eq!(a.exact_quotient(&zp(&[1, 1])), Some(zp(&[-1, 1])));
        assert_eq!(a.exact_quotient(&zp(&[2, 1])), None);
    }

    #[test]
    fn bivariate_gcd() {
        // ℤ[x][y]: (y + x)(y - 1) and (y + x)(y + 2x)
        let c = |cs: &[i64]| zp(cs);
        let a = UPoly::from_coeffs(vec![c(&[0, -1]), c(&[-1, 1]), c(&[1])]);
        let b = UPoly::from_coeffs(vec![c(&[0, 0, 2]), c(&[0, 3]), c(&[1])]);
        let g = a.subresultant_gcd(&b);
        assert_eq!(g, UPoly::from_coeffs(vec![c(&[0, 1]), c(&[1])]));
    }
}
