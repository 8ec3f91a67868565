//! Named generators with exact family metadata.

mod jonquiere;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cremona::{MapError, MonomialMatrix, RationalMap};
use crate::ratpoly::QPoly;

pub use jonquiere::JonqMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("Hénon polynomial must have degree at least 2, found {0}")]
    HenonDegree(u32),
    #[error("polynomial must be univariate in x")]
    NotUnivariate,
    #[error("alpha*delta - beta*gamma vanishes identically")]
    DegenerateMobius,
    #[error("gamma and delta are both constant")]
    TrivialJonquiere,
    #[error("leading coefficient a must be nonzero")]
    ZeroSlope,
    #[error("singular matrix")]
    Singular,
    #[error("{0}")]
    Cancellation(String),
    #[error("linear syllable entries do not fit in 64 bits")]
    MatrixOverflow,
}

/// Which of the four isometry types a generator (or measure) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Elliptic,
    Parabolic,
    Lineal,
    NonelementaryFree,
    Arithmetic,
}

impl FamilyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::Elliptic => "elliptic",
            FamilyTag::Parabolic => "parabolic",
            FamilyTag::Lineal => "lineal",
            FamilyTag::NonelementaryFree => "nonelementary_free",
            FamilyTag::Arithmetic => "arithmetic",
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "elliptic" => FamilyTag::Elliptic,
            "parabolic" => FamilyTag::Parabolic,
            "lineal" => FamilyTag::Lineal,
            "nonelementary_free" => FamilyTag::NonelementaryFree,
            "arithmetic" => FamilyTag::Arithmetic,
            other => return Err(format!("unknown family '{other}'")),
        })
    }
}

/// One factor of a tame automorphism: a linear map `v ↦ M v`, or the
/// elementary map `(x, y) ↦ (x + P(y), y)` with `P` univariate in `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Syllable {
    Linear([[i64; 2]; 2]),
    Elementary(QPoly),
}

/// A letter of a word: exact degree plus, for tame automorphisms, the
/// syllables whose composition (leftmost applied last) is the letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Letter {
    pub degree: u32,
    pub syllables: Vec<Syllable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FastRepr {
    Letter(Letter),
    Matrix(MonomialMatrix),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub map: RationalMap,
    /// Name of the inverse generator, when one was constructed.
    pub inverse: Option<String>,
    pub family: FamilyTag,
    /// `λ(f)` with `f*θ₊ = λ(f)θ₊`, for lineal and parabolic generators.
    pub lambda: Option<BigRational>,
    pub fast: Option<FastRepr>,
    /// Generators sharing a key lie in one elementary group.
    pub group_key: Option<String>,
    pub jonquiere: Option<JonqMap>,
}

impl Generator {
    pub fn new(name: impl Into<String>, map: RationalMap, family: FamilyTag) -> Self {
        Generator {
            name: name.into(),
            map,
            inverse: None,
            family,
            lambda: None,
            fast: None,
            group_key: None,
            jonquiere: None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.map.degree()
    }

    pub fn letter(&self) -> Option<&Letter> {
        match &self.fast {
            Some(FastRepr::Letter(l)) => Some(l),
            _ => None,
        }
    }

    pub fn matrix(&self) -> Option<&MonomialMatrix> {
        match &self.fast {
            Some(FastRepr::Matrix(m)) => Some(m),
            _ => None,
        }
    }
}

const SWAP: [[i64; 2]; 2] = [[0, 1], [1, 0]];
const CAT: [[i64; 2]; 2] = [[2, 1], [1, 1]];
const CAT_SQ: [[i64; 2]; 2] = [[5, 3], [3, 2]];
const CAT_INV: [[i64; 2]; 2] = [[1, -1], [-1, 2]];
const CAT_INV_SQ: [[i64; 2]; 2] = [[2, -3], [-3, 5]];

fn inverse_name(name: &str) -> String {
    format!("{name}^-1")
}

fn univariate_degree(p: &QPoly) -> Result<u32, FamilyError> {
    if !p.uses_only(0) {
        return Err(FamilyError::NotUnivariate);
    }
    Ok(p.degree().unwrap_or(0))
}

/// Hénon map `h = (y + P(x), x)` and `h⁻¹ = (y, x − P(y))`, named `name`
/// and `name^-1`.
pub fn henon(name: &str, p: &QPoly) -> Result<(Generator, Generator), FamilyError> {
    let d = univariate_degree(p)?;
    if d < 2 {
        return Err(FamilyError::HenonDegree(d));
    }
    let x = QPoly::var(0);
    let y = QPoly::var(1);
    let p_of_y = p.rename(0, 1);
    let fwd = RationalMap::from_affine_pair(&y.add(p), &x)?;
    let inv = RationalMap::from_affine_pair(&y, &x.sub(&p_of_y))?;
    let key = format!("henon:{p}");
    let d_q = BigRational::from_integer(d.into());
    let inv_name = inverse_name(name);

    let mut h = Generator::new(name, fwd, FamilyTag::Lineal);
    h.inverse = Some(inv_name.clone());
    h.lambda = Some(d_q.clone());
    h.group_key = Some(key.clone());
    h.fast = Some(FastRepr::Letter(Letter {
        degree: d,
        syllables: vec![Syllable::Elementary(p.clone()), Syllable::Linear(SWAP)],
    }));

    let mut hi = Generator::new(inv_name, inv, FamilyTag::Lineal);
    hi.inverse = Some(name.to_string());
    hi.lambda = Some(d_q.recip());
    hi.group_key = Some(key);
    hi.fast = Some(FastRepr::Letter(Letter {
        degree: d,
        syllables: vec![Syllable::Linear(SWAP), Syllable::Elementary(p.neg())],
    }));
    Ok((h, hi))
}

/// Jonquière map `(x, y) ↦ (ax + b, (α(x)y + β(x))/(γ(x)y + δ(x)))`.
pub fn jonquiere(
    name: &str,
    a: &BigRational,
    b: &BigRational,
    coeffs: [&QPoly; 4],
) -> Result<Generator, FamilyError> {
    if a.is_zero() {
        return Err(FamilyError::ZeroSlope);
    }
    for c in coeffs {
        univariate_degree(c)?;
    }
    let [alpha, beta, gamma, delta] = coeffs;
    if alpha.mul(delta).sub(&beta.mul(gamma)).is_zero() {
        return Err(FamilyError::DegenerateMobius);
    }
    if gamma.is_constant() && delta.is_constant() {
        return Err(FamilyError::TrivialJonquiere);
    }
    let j = JonqMap::new(a.clone(), b.clone(), coeffs);
    let mut g = Generator::new(name, j.to_rational_map()?, FamilyTag::Parabolic);
    g.lambda = Some(BigRational::one());
    g.group_key = Some("jonquiere".into());
    g.jonquiere = Some(j);
    Ok(g)
}

/// Monomial map of `m`; the caller chooses the family tag.
pub fn monomial(
    name: &str,
    m: &MonomialMatrix,
    family: FamilyTag,
) -> Result<Generator, FamilyError> {
    if m.determinant().is_zero() {
        return Err(FamilyError::Singular);
    }
    let map = RationalMap::from_monomial_matrix(m)?;
    let mut g = Generator::new(name, map, family);
    g.fast = Some(FastRepr::Matrix(m.clone()));
    Ok(g)
}

/// Projective linear map `[X : Y : Z] ↦ A·[X : Y : Z]`.
pub fn linear(name: &str, a: &[[BigRational; 3]; 3]) -> Result<Generator, FamilyError> {
    if det3(a).is_zero() {
        return Err(FamilyError::Singular);
    }
    let rows: Vec<QPoly> = a
        .iter()
        .map(|row| {
            row.iter().enumerate().fold(QPoly::zero(), |acc, (j, c)| {
                acc.add(&QPoly::var(j).scale(c))
            })
        })
        .collect();
    // x, y, z here stand for X, Y, Z; the rows are already homogeneous
    let lcm = rows.iter().fold(BigInt::one(), |acc, r| {
        num_integer::lcm(acc, r.denominator_lcm())
    });
    let lcm = BigRational::from_integer(lcm);
    let mut raw: [crate::exactpoly::HomPoly; 3] = Default::default();
    for (slot, r) in raw.iter_mut().zip(rows.iter()) {
        *slot = crate::exactpoly::HomPoly::from_terms(
            r.terms().map(|(e, c)| (*e, (c * &lcm).to_integer())),
        )
        .expect("linear forms are homogeneous");
    }
    let mut g = Generator::new(name, RationalMap::make_map(raw)?, FamilyTag::Elliptic);
    g.group_key = Some("linear".into());
    Ok(g)
}

fn det3(a: &[[BigRational; 3]; 3]) -> BigRational {
    let m = |i: usize, j: usize| &a[i][j];
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
        - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

/// The pair `F = e₁∘a`, `G = a∘e₂∘a²` with `eᵢ = (x + Pᵢ(y), y)` and the cat
/// map `a = (2x + y, x + y)`, followed by `F⁻¹` and `G⁻¹`.
///
/// Only `deg(P₁ + P₂) = max(deg P₁, deg P₂)` is enforced; `P₁ − P₂` may drop
/// degree. That difference appears only in words containing inverses.
pub fn arithmetic_pair(
    names: [&str; 2],
    p1: &QPoly,
    p2: &QPoly,
) -> Result<[Generator; 4], FamilyError> {
    let d1 = univariate_degree(p1)?;
    let d2 = univariate_degree(p2)?;
    for d in [d1, d2] {
        if d < 2 {
            return Err(FamilyError::HenonDegree(d));
        }
    }
    let sum_degree = p1.add(p2).degree().unwrap_or(0);
    if sum_degree != d1.max(d2) {
        return Err(FamilyError::Cancellation(format!(
            "deg(P1 + P2) = {sum_degree} is below max(deg P1, deg P2) = {}",
            d1.max(d2)
        )));
    }
    let x = QPoly::var(0);
    let y = QPoly::var(1);
    let elementary = |p: &QPoly| RationalMap::from_affine_pair(&x.add(&p.rename(0, 1)), &y);
    let linear = |m: [[i64; 2]; 2]| {
        let row = |r: [i64; 2]| x.scale(&int(r[0])).add(&y.scale(&int(r[1])));
        RationalMap::from_affine_pair(&row(m[0]), &row(m[1]))
    };
    let e1 = elementary(p1)?;
    let e2 = elementary(p2)?;
    let e1i = elementary(&p1.neg())?;
    let e2i = elementary(&p2.neg())?;
    let a = linear(CAT)?;
    let a2 = linear(CAT_SQ)?;
    let ai = linear(CAT_INV)?;
    let ai2 = linear(CAT_INV_SQ)?;

    let f = RationalMap::compose(&e1, &a)?;
    let g = RationalMap::compose(&a, &RationalMap::compose(&e2, &a2)?)?;
    let fi = RationalMap::compose(&ai, &e1i)?;
    let gi = RationalMap::compose(&ai2, &RationalMap::compose(&e2i, &ai)?)?;

    let [nf, ng] = names;
    let build = |name: String, inv: String, map, degree, syllables| {
        let mut gen = Generator::new(name, map, FamilyTag::Arithmetic);
        gen.inverse = Some(inv);
        gen.group_key = Some("arithmetic".into());
        gen.fast = Some(FastRepr::Letter(Letter { degree, syllables }));
        gen
    };
    use Syllable::{Elementary as E, Linear as L};
    Ok([
        build(
            nf.into(),
            inverse_name(nf),
            f,
            d1,
            vec![E(p1.clone()), L(CAT)],
        ),
        build(
            ng.into(),
            inverse_name(ng),
            g,
            d2,
            vec![L(CAT), E(p2.clone()), L(CAT_SQ)],
        ),
        build(
            inverse_name(nf),
            nf.into(),
            fi,
            d1,
            vec![L(CAT_INV), E(p1.neg())],
        ),
        build(
            inverse_name(ng),
            ng.into(),
            gi,
            d2,
            vec![L(CAT_INV_SQ), E(p2.neg()), L(CAT_INV)],
        ),
    ])
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Rebuilds the map of a syllable list; used to check tame data.
pub fn syllables_to_map(syllables: &[Syllable]) -> Result<RationalMap, FamilyError> {
    let x = QPoly::var(0);
    let y = QPoly::var(1);
    let mut acc = RationalMap::identity();
    for s in syllables {
        let m = match s {
            Syllable::Linear(m) => {
                let row = |r: [i64; 2]| x.scale(&int(r[0])).add(&y.scale(&int(r[1])));
                RationalMap::from_affine_pair(&row(m[0]), &row(m[1]))?
            }
            Syllable::Elementary(p) => RationalMap::from_affine_pair(&x.add(&p.rename(0, 1)), &y)?,
        };
        acc = RationalMap::compose(&acc, &m)?;
    }
    Ok(acc)
}
