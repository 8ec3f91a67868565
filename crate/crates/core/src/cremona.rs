//! Rational self-maps of the projective plane in normalized form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactpoly::{gcd_multivar, HomPoly, PolyError, DEFAULT_DEGREE_CAP};
use crate::parse::{parse_triple, ParseError};
use crate::ratpoly::{homogenize_triple, QPoly, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("all three components are zero")]
    AllZero,
    #[error("components have different degrees")]
    DegreeMismatch,
    #[error("the map is constant")]
    Constant,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("singular matrix")]
    Singular,
    #[error("exponent does not fit in 32 bits")]
    ExponentOverflow,
}

/// `[P₀ : P₁ : P₂]` with coprime components, integer content 1 and the
/// first nonzero component's leading coefficient positive. Equal maps of the
/// projective plane therefore compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMap {
    components: [HomPoly; 3],
    degree: u32,
}

impl RationalMap {
    pub fn identity() -> Self {
        RationalMap {
            components: [HomPoly::var(0), HomPoly::var(1), HomPoly::var(2)],
            degree: 1,
        }
    }

    pub fn components(&self) -> &[HomPoly; 3] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Normalizes a raw triple: removes the polynomial gcd and the integer
    /// content, then fixes the sign.
    pub fn make_map(raw: [HomPoly; 3]) -> Result<Self, MapError> {
        let mut degree = None;
        for p in raw.iter().filter(|p| !p.is_zero()) {
            match degree {
                None => degree = Some(p.degree()),
                Some(d) if d != p.degree() => return Err(MapError::DegreeMismatch),
                _ => {}
            }
        }
        let degree = degree.ok_or(MapError::AllZero)?;
        if degree == 0 {
            return Err(MapError::Constant);
        }

        let g = common_factor(&raw);
        let mut components = if g.degree() == 0 {
            raw
        } else {
            let mut out: [HomPoly; 3] = Default::default();
            for (o, p) in out.iter_mut().zip(raw.iter()) {
                *o = p.divide_exact(&g)?;
            }
            out
        };

        let content = components
            .iter()
            .fold(BigInt::zero(), |acc, p| acc.gcd(&p.content()));
        let lead_negative = components
            .iter()
            .find(|p| !p.is_zero())
            .and_then(|p| p.leading_term())
            .is_some_and(|(_, c)| c.is_negative());
        let scale = if lead_negative { -content } else { content };
        if !scale.is_one() {
            for p in components.iter_mut() {
                *p = p.div_integer(&scale)?;
            }
        }
        let degree = components
            .iter()
            .find(|p| !p.is_zero())
            .map(HomPoly::degree)
            .unwrap_or(0);
        if degree == 0 {
            return Err(MapError::Constant);
        }
        Ok(RationalMap { components, degree })
    }

    /// `(x, y) ↦ (p, q)` in affine coordinates, homogenized at
    /// `max(deg p, deg q)`.
    pub fn from_affine_pair(p: &QPoly, q: &QPoly) -> Result<Self, MapError> {
        let one = QPoly::integer(1);
        if p.is_constant() && q.is_constant() {
            return Err(MapError::Constant);
        }
        Self::make_map(homogenize_triple([p, q, &one]))
    }

    /// `(x, y) ↦ (r₁, r₂)` for rational functions, over the common
    /// denominator of both coordinates.
    pub fn from_rational_pair(r1: &RatFunc, r2: &RatFunc) -> Result<Self, MapError> {
        if r1.den.is_zero() || r2.den.is_zero() {
            return Err(MapError::ZeroDenominator);
        }
        let a = r1.num.mul(&r2.den);
        let b = r2.num.mul(&r1.den);
        let c = r1.den.mul(&r2.den);
        if a.is_zero() && b.is_zero() {
            return Err(MapError::Constant);
        }
        Self::make_map(homogenize_triple([&a, &b, &c]))
    }

    /// The torus map `(x, y) ↦ (x^a y^b, x^c y^d)` of `[[a, b], [c, d]]`.
    pub fn from_monomial_matrix(m: &MonomialMatrix) -> Result<Self, MapError> {
        if m.determinant().is_zero() {
            return Err(MapError::Singular);
        }
        let [alpha, beta, gamma] = m.lift_shift();
        let e = &m.entries;
        let exps = [
            [
                &alpha + &e[0][0],
                &beta + &e[0][1],
                &gamma - &e[0][0] - &e[0][1],
            ],
            [
                &alpha + &e[1][0],
                &beta + &e[1][1],
                &gamma - &e[1][0] - &e[1][1],
            ],
            [alpha, beta, gamma],
        ];
        let mut raw: [HomPoly; 3] = Default::default();
        for (slot, ex) in raw.iter_mut().zip(exps.iter()) {
            let mut u = [0u32; 3];
            for i in 0..3 {
                u[i] = ex[i].to_u32().ok_or(MapError::ExponentOverflow)?;
            }
            *slot = HomPoly::monomial(u, BigInt::one());
        }
        Self::make_map(raw)
    }

    /// `f ∘ g` (apply `g` first), with the default degree cap.
    pub fn compose(f: &Self, g: &Self) -> Result<Self, MapError> {
        Self::compose_capped(f, g, DEFAULT_DEGREE_CAP)
    }

    pub fn compose_capped(f: &Self, g: &Self, cap: u32) -> Result<Self, MapError> {
        let mut raw: [HomPoly; 3] = Default::default();
        for (slot, p) in raw.iter_mut().zip(f.components.iter()) {
            *slot = p.substitute_capped(&g.components, cap)?;
        }
        Self::make_map(raw)
    }

    /// `f^n` by repeated composition; `f^0` is the identity.
    pub fn iterate(f: &Self, n: u32) -> Result<Self, MapError> {
        Self::iterate_capped(f, n, DEFAULT_DEGREE_CAP)
    }

    pub fn iterate_capped(f: &Self, n: u32, cap: u32) -> Result<Self, MapError> {
        let mut acc = Self::identity();
        for _ in 0..n {
            acc = Self::compose_capped(&acc, f, cap)?;
        }
        Ok(acc)
    }

    pub fn projectively_equal(f: &Self, g: &Self) -> bool {
        f == g
    }

    /// Parses `[P₀ : P₁ : P₂]` and normalizes.
    pub fn parse(src: &str) -> Result<Self, MapError> {
        Self::make_map(parse_triple(src)?)
    }
}

/// Gcd of the nonzero components, smallest first so that a monomial
/// component short-circuits the polynomial remainder sequence.
fn common_factor(raw: &[HomPoly; 3]) -> HomPoly {
    let mut parts: Vec<&HomPoly> = raw.iter().filter(|p| !p.is_zero()).collect();
    parts.sort_by_key(|p| p.len());
    let mut g = parts[0].primitive_part();
    for p in &parts[1..] {
        if g.degree() == 0 {
            break;
        }
        g = gcd_multivar(&g, p);
    }
    g
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.components;
        write!(f, "[{a} : {b} : {c}]")
    }
}

impl fmt::Debug for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalMap(deg {}, {self})", self.degree)
    }
}

/// Integer 2×2 matrix `[[a, b], [c, d]]` of a monomial map.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MonomialMatrix {
    entries: [[BigInt; 2]; 2],
}

impl MonomialMatrix {
    pub fn new(entries: [[BigInt; 2]; 2]) -> Self {
        MonomialMatrix { entries }
    }

    pub fn from_i64(e: [[i64; 2]; 2]) -> Self {
        Self::new(e.map(|row| row.map(BigInt::from)))
    }

    pub fn identity() -> Self {
        Self::from_i64([[1, 0], [0, 1]])
    }

    pub fn entries(&self) -> &[[BigInt; 2]; 2] {
        &self.entries
    }

    pub fn determinant(&self) -> BigInt {
        let e = &self.entries;
        &e[0][0] * &e[1][1] - &e[0][1] * &e[1][0]
    }

    pub fn is_birational(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let cell = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        Self::new([[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]])
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc.mul(self))
    }

    /// Exponents `(α, β, γ)` of the smallest monomial `X^α Y^β Z^γ` that
    /// makes the lift `[x^a y^b : x^c y^d : 1]` polynomial.
    fn lift_shift(&self) -> [BigInt; 3] {
        let e = &self.entries;
        let zero = BigInt::zero();
        let alpha = zero.clone().max(-&e[0][0]).max(-&e[1][0]);
        let beta = zero.clone().max(-&e[0][1]).max(-&e[1][1]);
        let gamma = zero.max(&e[0][0] + &e[0][1]).max(&e[1][0] + &e[1][1]);
        [alpha, beta, gamma]
    }

    /// Degree of the monomial map, computed from the entries alone. The
    /// shifted lift has no common monomial factor, so nothing is cleared.
    pub fn lift_degree(&self) -> BigInt {
        let [a, b, c] = self.lift_shift();
        a + b + c
    }
}
