//! Degree bookkeeping without polynomials.
//!
//! * [`FastEngine::FreeWord`]: letters of a free basis; the degree of a freely
//!   reduced word is the product of its letter degrees.
//! * [`FastEngine::Amalgam`]: tame automorphisms written as alternating linear
//!   and elementary syllables; the degree of a reduced alternating word is
//!   the product of its elementary degrees.
//! * [`FastEngine::Matrix`]: monomial maps as integer matrices.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::cremona::MonomialMatrix;
use crate::families::{Generator, Syllable};
use crate::numeric::{ln_biguint, ln_degree_product};
use crate::ratpoly::QPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FastError {
    #[error("generator '{0}' has no fast representation")]
    Missing(String),
    #[error("generators mix letter and matrix representations")]
    Mixed,
    #[error("letters without tame syllables need a declared free basis")]
    NeedsFreeBasis,
    #[error("free basis rejected: {0}")]
    NotFree(String),
    #[error("word leaves the reduced form the engine can handle: {0}")]
    Unsupported(&'static str),
    #[error("integer overflow in a linear syllable")]
    Overflow,
}

type Mat = [[i64; 2]; 2];
const IDENTITY: Mat = [[1, 0], [0, 1]];

fn mat_mul(a: &Mat, b: &Mat) -> Result<Mat, FastError> {
    let cell = |i: usize, j: usize| -> Option<i64> {
        a[i][0]
            .checked_mul(b[0][j])?
            .checked_add(a[i][1].checked_mul(b[1][j])?)
    };
    Ok([
        [
            cell(0, 0).ok_or(FastError::Overflow)?,
            cell(0, 1).ok_or(FastError::Overflow)?,
        ],
        [
            cell(1, 0).ok_or(FastError::Overflow)?,
            cell(1, 1).ok_or(FastError::Overflow)?,
        ],
    ])
}

/// A linear map is also elementary when its second coordinate depends on
/// `y` alone.
fn is_triangular(m: &Mat) -> bool {
    m[1][0] == 0
}

/// Elementary syllable as integer multiplicities of basis polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Elem {
    coords: Vec<i64>,
    degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Syl {
    L(Mat),
    E(Elem),
}

/// Distinct elementary polynomials of a measure, scaled jointly to integers.
#[derive(Debug, Clone)]
struct Basis {
    polys: Vec<QPoly>,
    /// `scaled[i][k]`: coefficient of `y^k` in `L · polys[i]`.
    scaled: Vec<Vec<i128>>,
}

impl Basis {
    fn build(polys: Vec<QPoly>) -> Result<Self, FastError> {
        let lcm = polys
            .iter()
            .fold(BigInt::one(), |acc, p| acc.lcm(&p.denominator_lcm()));
        let lcm = num_rational::BigRational::from_integer(lcm);
        let scaled = polys
            .iter()
            .map(|p| {
                p.univariate_coeffs(0)
                    .iter()
                    .map(|c| (c * &lcm).to_integer().to_i128().ok_or(FastError::Overflow))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Basis { polys, scaled })
    }

    /// Index and sign of `p` up to sign, if present.
    fn find(&self, p: &QPoly) -> Option<(usize, i64)> {
        let neg = p.neg();
        self.polys.iter().enumerate().find_map(|(i, b)| {
            if b == p {
                Some((i, 1))
            } else if *b == neg {
                Some((i, -1))
            } else {
                None
            }
        })
    }

    /// Degree of `Σ coords[i] · polys[i]`; `None` for the zero polynomial.
    fn degree(&self, coords: &[i64]) -> Result<Option<u32>, FastError> {
        let top = self.scaled.iter().map(Vec::len).max().unwrap_or(0);
        for k in (0..top).rev() {
            let mut acc: i128 = 0;
            for (c, row) in coords.iter().zip(&self.scaled) {
                if let Some(v) = row.get(k) {
                    acc = acc
                        .checked_add((*c as i128).checked_mul(*v).ok_or(FastError::Overflow)?)
                        .ok_or(FastError::Overflow)?;
                }
            }
            if acc != 0 {
                return Ok(Some(k as u32));
            }
        }
        Ok(None)
    }
}

#[derive(Debug, Clone)]
pub struct AmalgamEngine {
    basis: Basis,
    letters: Vec<Vec<Syl>>,
}

impl AmalgamEngine {
    fn new(letters: &[&[Syllable]]) -> Result<Self, FastError> {
        let mut polys: Vec<QPoly> = Vec::new();
        for s in letters.iter().flat_map(|l| l.iter()) {
            if let Syllable::Elementary(p) = s {
                if p.is_zero() {
                    continue;
                }
                let neg = p.neg();
                if !polys.iter().any(|b| *b == *p || *b == neg) {
                    polys.push(p.clone());
                }
            }
        }
        let basis = Basis::build(polys)?;
        let k = basis.polys.len();
        let mut out = Vec::with_capacity(letters.len());
        for l in letters {
            let mut syls = Vec::new();
            for s in l.iter() {
                match s {
                    Syllable::Linear(m) => syls.push(Syl::L(*m)),
                    Syllable::Elementary(p) => {
                        if p.is_zero() {
                            continue;
                        }
                        let (i, sign) = basis.find(p).expect("basis holds every polynomial");
                        let mut coords = vec![0; k];
                        coords[i] = sign;
                        syls.push(Syl::E(Elem {
                            coords,
                            degree: p.degree().unwrap_or(0),
                        }));
                    }
                }
            }
            out.push(syls);
        }
        Ok(AmalgamEngine {
            basis,
            letters: out,
        })
    }

    fn push_syllable(&self, st: &mut AmalgamState, s: &Syl) -> Result<(), FastError> {
        let AmalgamState { stack, counts } = st;
        match (stack.last_mut(), s) {
            (Some(Syl::L(top)), Syl::L(m)) => {
                let r = mat_mul(top, m)?;
                if r == IDENTITY {
                    stack.pop();
                } else {
                    *top = r;
                }
            }
            (Some(Syl::E(top)), Syl::E(e)) => {
                let old = top.degree;
                for (a, b) in top.coords.iter_mut().zip(&e.coords) {
                    *a = a.checked_add(*b).ok_or(FastError::Overflow)?;
                }
                let new = self.basis.degree(&top.coords)?;
                adjust(counts, old, -1);
                match new {
                    None => {
                        stack.pop();
                    }
                    Some(d) => {
                        top.degree = d;
                        adjust(counts, d, 1);
                    }
                }
            }
            (_, Syl::L(m)) if *m == IDENTITY => {}
            (_, s) => {
                check_interior(stack)?;
                if let Syl::E(e) = s {
                    adjust(counts, e.degree, 1);
                }
                stack.push(s.clone());
            }
        }
        Ok(())
    }
}

/// The current top is about to gain a neighbour on both sides; it must then
/// lie outside the intersection of the two factors.
fn check_interior(stack: &[Syl]) -> Result<(), FastError> {
    if stack.len() < 2 {
        return Ok(());
    }
    match stack.last() {
        Some(Syl::L(m)) if is_triangular(m) => Err(FastError::Unsupported(
            "a triangular linear syllable separates two elementary syllables",
        )),
        Some(Syl::E(e)) if e.degree <= 1 => Err(FastError::Unsupported(
            "an affine elementary syllable separates two linear syllables",
        )),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AmalgamState {
    stack: Vec<Syl>,
    /// `(degree, count)` of the elementary syllables on the stack.
    counts: Vec<(u32, u64)>,
}

/// Updates the `(degree, count)` tally; degrees 0 and 1 do not contribute.
fn adjust(counts: &mut Vec<(u32, u64)>, degree: u32, delta: i64) {
    if degree <= 1 {
        return;
    }
    match counts.iter_mut().find(|(d, _)| *d == degree) {
        Some((_, c)) => *c = (*c as i64 + delta) as u64,
        None => {
            debug_assert!(delta > 0);
            counts.push((degree, delta as u64));
        }
    }
}

impl AmalgamState {
    pub fn syllable_count(&self) -> usize {
        self.stack.len()
    }
}

#[derive(Debug, Clone)]
pub struct FreeWordEngine {
    inverse: Vec<Option<usize>>,
    degree: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeWordState {
    word: Vec<u32>,
    counts: Vec<(u32, u64)>,
}

impl FreeWordState {
    /// The freely reduced word as letter indices.
    pub fn word(&self) -> &[u32] {
        &self.word
    }
}

impl FreeWordEngine {
    pub fn new(inverse: Vec<Option<usize>>, degree: Vec<u32>) -> Self {
        FreeWordEngine { inverse, degree }
    }

    pub fn inverse_of(&self, letter: usize) -> Option<usize> {
        self.inverse[letter]
    }

    pub fn degree_of(&self, letter: usize) -> u32 {
        self.degree[letter]
    }

    pub fn letter_count(&self) -> usize {
        self.degree.len()
    }

    fn push(&self, st: &mut FreeWordState, letter: usize) {
        if let Some(&top) = st.word.last() {
            if self.inverse[top as usize] == Some(letter) {
                st.word.pop();
                adjust(&mut st.counts, self.degree[top as usize], -1);
                return;
            }
        }
        st.word.push(letter as u32);
        adjust(&mut st.counts, self.degree[letter], 1);
    }
}

/// A degree engine for one measure's atoms, indexed like the atoms.
#[derive(Debug, Clone)]
pub enum FastEngine {
    FreeWord(FreeWordEngine),
    Amalgam(AmalgamEngine),
    Matrix(Vec<MonomialMatrix>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FastState {
    FreeWord(FreeWordState),
    Amalgam(AmalgamState),
    Matrix(MonomialMatrix),
}

impl FastEngine {
    /// Chooses the engine for `gens`. Letter generators use the free-word
    /// rule only under a declared free basis, which is checked against the
    /// syllable data when every letter has it.
    pub fn new(gens: &[&Generator], free_basis: bool) -> Result<Self, FastError> {
        for g in gens {
            if g.fast.is_none() {
                return Err(FastError::Missing(g.name.clone()));
            }
        }
        if gens.iter().all(|g| g.matrix().is_some()) {
            return Ok(FastEngine::Matrix(
                gens.iter().map(|g| g.matrix().unwrap().clone()).collect(),
            ));
        }
        if !gens.iter().all(|g| g.letter().is_some()) {
            return Err(FastError::Mixed);
        }
        let letters: Vec<_> = gens.iter().map(|g| g.letter().unwrap()).collect();
        let tame = letters.iter().all(|l| !l.syllables.is_empty());
        let amalgam = if tame {
            let syl: Vec<&[Syllable]> = letters.iter().map(|l| l.syllables.as_slice()).collect();
            Some(AmalgamEngine::new(&syl)?)
        } else {
            None
        };
        if !free_basis {
            return amalgam
                .map(FastEngine::Amalgam)
                .ok_or(FastError::NeedsFreeBasis);
        }
        let inverse: Vec<Option<usize>> = gens
            .iter()
            .map(|g| {
                g.inverse
                    .as_ref()
                    .and_then(|n| gens.iter().position(|h| h.name == *n))
            })
            .collect();
        let degree: Vec<u32> = letters.iter().map(|l| l.degree).collect();
        let free = FreeWordEngine::new(inverse, degree);
        if let Some(am) = amalgam {
            validate_free_basis(gens, &free, &FastEngine::Amalgam(am))?;
        }
        Ok(FastEngine::FreeWord(free))
    }

    pub fn start(&self) -> FastState {
        match self {
            FastEngine::FreeWord(_) => FastState::FreeWord(FreeWordState::default()),
            FastEngine::Amalgam(_) => FastState::Amalgam(AmalgamState::default()),
            FastEngine::Matrix(_) => FastState::Matrix(MonomialMatrix::identity()),
        }
    }

    /// Appends letter `i` on the right: the state becomes `state ∘ gᵢ`.
    pub fn push(&self, state: &mut FastState, i: usize) -> Result<(), FastError> {
        match (self, state) {
            (FastEngine::FreeWord(e), FastState::FreeWord(st)) => {
                e.push(st, i);
                Ok(())
            }
            (FastEngine::Amalgam(e), FastState::Amalgam(st)) => {
                for s in &e.letters[i] {
                    e.push_syllable(st, s)?;
                }
                Ok(())
            }
            (FastEngine::Matrix(ms), FastState::Matrix(m)) => {
                *m = m.mul(&ms[i]);
                Ok(())
            }
            _ => panic!("state does not belong to this engine"),
        }
    }

    pub fn degree(&self, state: &FastState) -> BigUint {
        match state {
            FastState::FreeWord(st) => degree_product(&st.counts),
            FastState::Amalgam(st) => degree_product(&st.counts),
            FastState::Matrix(m) => m.lift_degree().to_biguint().expect("degrees are positive"),
        }
    }

    pub fn log_degree(&self, state: &FastState) -> f64 {
        match state {
            FastState::FreeWord(st) => ln_degree_product(&st.counts),
            FastState::Amalgam(st) => ln_degree_product(&st.counts),
            FastState::Matrix(_) => ln_biguint(&self.degree(state)),
        }
    }

    pub fn as_free_word(&self) -> Option<&FreeWordEngine> {
        match self {
            FastEngine::FreeWord(e) => Some(e),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FastEngine::FreeWord(_) => "free_word",
            FastEngine::Amalgam(_) => "amalgam",
            FastEngine::Matrix(_) => "matrix",
        }
    }
}

fn degree_product(counts: &[(u32, u64)]) -> BigUint {
    counts.iter().fold(BigUint::one(), |acc, &(d, k)| {
        acc * num_traits::pow(BigUint::from(d), k as usize)
    })
}

/// Every two-letter word that is not a cancelling pair must have the full
/// product degree in the amalgam, and each letter its declared degree.
fn validate_free_basis(
    gens: &[&Generator],
    free: &FreeWordEngine,
    amalgam: &FastEngine,
) -> Result<(), FastError> {
    let n = gens.len();
    for i in 0..n {
        let mut st = amalgam.start();
        amalgam
            .push(&mut st, i)
            .map_err(|e| FastError::NotFree(e.to_string()))?;
        if amalgam.degree(&st) != BigUint::from(free.degree_of(i)) {
            return Err(FastError::NotFree(format!(
                "letter '{}' does not have its declared degree",
                gens[i].name
            )));
        }
        for j in 0..n {
            if free.inverse_of(i) == Some(j) {
                continue;
            }
            let mut st = amalgam.start();
            let res = amalgam
                .push(&mut st, i)
                .and_then(|_| amalgam.push(&mut st, j));
            let expected = BigUint::from(free.degree_of(i)) * free.degree_of(j);
            match res {
                Ok(()) if amalgam.degree(&st) == expected => {}
                _ => {
                    return Err(FastError::NotFree(format!(
                        "'{}' followed by '{}' does not have degree {expected}",
                        gens[i].name, gens[j].name
                    )))
                }
            }
        }
    }
    Ok(())
}
