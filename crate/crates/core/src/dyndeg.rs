//! Dynamical degree `λ₁(f) = lim deg(fⁿ)^{1/n}`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::cremona::{MapError, MonomialMatrix, RationalMap};
use crate::exactpoly::PolyError;
use crate::fast::{FastEngine, FastError};
use crate::numeric::{ln_biguint, ln_rational};
use crate::walk::Measure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynDegError {
    #[error("word letters need a free basis: {0}")]
    NotFree(FastError),
    #[error("letter index {0} is out of range")]
    Letter(usize),
    #[error("lambda must be positive")]
    NonPositive,
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynDegEstimate {
    pub value: f64,
    pub log_value: f64,
    pub exact: bool,
    /// `(k, deg(f^k)^{1/k})`, only for inexact estimates.
    pub upper_bounds: Vec<(u32, f64)>,
    /// Exact `deg(f^k)` behind each bound.
    pub degrees: Vec<u32>,
    /// Set when the degree cap stopped the iteration before the budget.
    pub truncated: bool,
}

impl DynDegEstimate {
    fn exact(log_value: f64) -> Self {
        DynDegEstimate {
            value: log_value.exp(),
            log_value,
            exact: true,
            upper_bounds: Vec::new(),
            degrees: Vec::new(),
            truncated: false,
        }
    }

    /// Running minimum of the bound list.
    pub fn envelope(&self) -> Vec<f64> {
        self.upper_bounds
            .iter()
            .scan(f64::INFINITY, |m, &(_, b)| {
                *m = m.min(b);
                Some(*m)
            })
            .collect()
    }
}

/// Largest eigenvalue modulus of a 2×2 integer matrix.
pub fn spectral_radius(m: &MonomialMatrix) -> DynDegEstimate {
    let e = m.entries();
    let f = |v: &num_bigint::BigInt| v.to_f64().unwrap_or(f64::INFINITY);
    let (a, b, c, d) = (f(&e[0][0]), f(&e[0][1]), f(&e[1][0]), f(&e[1][1]));
    let trace = a + d;
    let det = a * d - b * c;
    let disc = trace * trace - 4.0 * det;
    let rho = if disc < 0.0 {
        det.abs().sqrt()
    } else {
        (trace.abs() + disc.sqrt()) / 2.0
    };
    DynDegEstimate {
        value: rho,
        log_value: rho.ln(),
        exact: true,
        upper_bounds: Vec::new(),
        degrees: Vec::new(),
        truncated: false,
    }
}

/// Product of letter degrees over the cyclic reduction of `word`, whose
/// entries index the atoms of a free-basis measure.
pub fn lambda1_word(measure: &Measure, word: &[usize]) -> Result<DynDegEstimate, DynDegError> {
    let engine = FastEngine::new(&measure.generators(), measure.free_basis())
        .map_err(DynDegError::NotFree)?;
    let free = engine
        .as_free_word()
        .ok_or(DynDegError::NotFree(FastError::NeedsFreeBasis))?;
    let mut reduced: Vec<usize> = Vec::with_capacity(word.len());
    for &l in word {
        if l >= free.letter_count() {
            return Err(DynDegError::Letter(l));
        }
        match reduced.last() {
            Some(&top) if free.inverse_of(top) == Some(l) => {
                reduced.pop();
            }
            _ => reduced.push(l),
        }
    }
    let (mut lo, mut hi) = (0, reduced.len());
    while hi - lo >= 2 && free.inverse_of(reduced[lo]) == Some(reduced[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    let degree = reduced[lo..hi]
        .iter()
        .fold(BigUint::one(), |acc, &l| acc * free.degree_of(l));
    let mut e = DynDegEstimate::exact(ln_biguint(&degree));
    e.value = degree.to_f64().unwrap_or(f64::INFINITY);
    Ok(e)
}

/// `max(λ, 1/λ)` for a lineal map with translation factor `λ`.
pub fn lambda1_lineal(lambda: &BigRational) -> Result<DynDegEstimate, DynDegError> {
    if !lambda.is_positive() {
        return Err(DynDegError::NonPositive);
    }
    let big = if lambda >= &BigRational::one() {
        lambda.clone()
    } else {
        lambda.recip()
    };
    let mut e = DynDegEstimate::exact(ln_rational(&big));
    e.value = big.to_f64().unwrap_or(f64::INFINITY);
    Ok(e)
}

/// Certified upper bound `min_k deg(f^k)^{1/k}` for `k ≤ budget`. Hitting
/// `cap` stops early and marks the estimate as truncated.
pub fn lambda1_fekete(
    f: &RationalMap,
    budget: u32,
    cap: u32,
) -> Result<DynDegEstimate, DynDegError> {
    if budget == 0 {
        return Err(DynDegError::ZeroBudget);
    }
    let mut acc = f.clone();
    let mut bounds = Vec::new();
    let mut degrees = Vec::new();
    let mut truncated = false;
    for k in 1..=budget {
        if k > 1 {
            match RationalMap::compose_capped(&acc, f, cap) {
                Ok(next) => acc = next,
                Err(MapError::Poly(PolyError::DegreeCapExceeded { .. })) if !bounds.is_empty() => {
                    truncated = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        let d = acc.degree();
        degrees.push(d);
        bounds.push((k, (d as f64).ln() / k as f64));
    }
    let log_value = bounds.iter().map(|&(_, l)| l).fold(f64::INFINITY, f64::min);
    Ok(DynDegEstimate {
        value: log_value.exp(),
        log_value,
        exact: false,
        upper_bounds: bounds.into_iter().map(|(k, l)| (k, l.exp())).collect(),
        degrees,
        truncated,
    })
}
