//! Seeded random walks `f_n = g₁ ∘ g₂ ∘ ⋯ ∘ g_n` over a finite measure.
//!
//! Trial `t` draws its letters from ChaCha8 keyed by `seed` on stream `t`;
//! the `i`-th letter consumes the `i`-th 64-bit output of that stream. The
//! ensemble is therefore a pure function of the configuration, whatever the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cremona::{MapError, RationalMap};
use crate::exactpoly::DEFAULT_DEGREE_CAP;
use crate::families::{FamilyTag, Generator, JonqMap};
use crate::fast::{FastEngine, FastError};
use crate::numeric::ln_bigint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("measure has no atoms")]
    Empty,
    #[error("weight of '{0}' is not positive")]
    NonPositiveWeight(String),
    #[error("weights sum to {0}, not 1")]
    WeightSum(BigRational),
    #[error("checkpoints must be sorted, distinct and end at the walk length {0}")]
    Checkpoints(usize),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Fast(#[from] FastError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub generator: Generator,
    pub weight: BigRational,
}

/// Finite probability measure on generators.
#[derive(Debug, Clone)]
pub struct Measure {
    atoms: Vec<Atom>,
    free_basis: bool,
    group_type: Option<FamilyTag>,
    cumulative: Vec<BigRational>,
    /// `thresholds[i] = ⌈cumulative[i]·2⁵³⌉`.
    thresholds: Vec<u64>,
}

const UNIFORM_BITS: u32 = 53;

impl Measure {
    pub fn new(
        atoms: Vec<Atom>,
        free_basis: bool,
        group_type: Option<FamilyTag>,
    ) -> Result<Self, WalkError> {
        if atoms.is_empty() {
            return Err(WalkError::Empty);
        }
        let mut total = BigRational::zero();
        let scale = BigRational::from_integer(BigInt::one() << UNIFORM_BITS);
        let mut thresholds = Vec::with_capacity(atoms.len());
        let mut cumulative = Vec::with_capacity(atoms.len());
        for a in &atoms {
            if !a.weight.is_positive() {
                return Err(WalkError::NonPositiveWeight(a.generator.name.clone()));
            }
            total += &a.weight;
            let t = (&total * &scale).ceil().to_integer();
            thresholds.push(t.to_u64().unwrap_or(u64::MAX));
            cumulative.push(total.clone());
        }
        if !total.is_one() {
            return Err(WalkError::WeightSum(total));
        }
        Ok(Measure {
            atoms,
            free_basis,
            group_type,
            cumulative,
            thresholds,
        })
    }

    /// Equal weights on the given generators.
    pub fn uniform(
        gens: Vec<Generator>,
        free_basis: bool,
        group_type: Option<FamilyTag>,
    ) -> Result<Self, WalkError> {
        let w = BigRational::new(1.into(), gens.len().max(1).into());
        let atoms = gens
            .into_iter()
            .map(|generator| Atom {
                generator,
                weight: w.clone(),
            })
            .collect();
        Self::new(atoms, free_basis, group_type)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn generators(&self) -> Vec<&Generator> {
        self.atoms.iter().map(|a| &a.generator).collect()
    }

    pub fn free_basis(&self) -> bool {
        self.free_basis
    }

    pub fn group_type(&self) -> Option<FamilyTag> {
        self.group_type
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.generator.name == name)
    }

    /// Inverse-CDF sampling with right-open intervals. `bits` is a uniform
    /// integer below `2⁵³`, i.e. the uniform real `bits·2⁻⁵³`.
    pub fn sample_bits(&self, bits: u64) -> usize {
        self.thresholds
            .partition_point(|&t| t <= bits)
            .min(self.atoms.len() - 1)
    }
}

/// Inverse-CDF sampling of an atom index for a uniform real in `[0, 1)`.
pub fn sample_letter(measure: &Measure, uniform: f64) -> usize {
    let last = measure.atoms.len() - 1;
    match BigRational::from_float(uniform) {
        Some(u) => measure.cumulative.partition_point(|c| *c <= u).min(last),
        None => last,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Symbolic,
    Fast,
    #[default]
    Auto,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Symbolic => "symbolic",
            Backend::Fast => "fast",
            Backend::Auto => "auto",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symbolic" => Ok(Backend::Symbolic),
            "fast" => Ok(Backend::Fast),
            "auto" => Ok(Backend::Auto),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub measure: Measure,
    pub length: usize,
    pub checkpoints: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub backend: Backend,
    pub degree_cap: u32,
}

impl WalkConfig {
    pub fn new(measure: Measure, length: usize, trials: u64, seed: u64, backend: Backend) -> Self {
        WalkConfig {
            measure,
            length,
            checkpoints: vec![length],
            trials,
            seed,
            backend,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        let ok = self.checkpoints.last() == Some(&self.length)
            && self.checkpoints.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(())
        } else {
            Err(WalkError::Checkpoints(self.length))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkSample {
    pub trial: u64,
    /// `log deg f_m` at each checkpoint `m`.
    pub log_degree: Vec<f64>,
}

/// Composition engine selected for a measure.
#[derive(Debug, Clone)]
pub enum Engine {
    Symbolic { cap: u32 },
    Jonquiere,
    Fast(FastEngine),
}

impl Engine {
    /// Resolves `backend` for `measure`. `Auto` prefers the fast engine and
    /// falls back to exact composition.
    pub fn select(measure: &Measure, backend: Backend, cap: u32) -> Result<Self, WalkError> {
        let gens = measure.generators();
        let symbolic = || {
            if gens.iter().all(|g| g.jonquiere.is_some()) {
                Engine::Jonquiere
            } else {
                Engine::Symbolic { cap }
            }
        };
        match backend {
            Backend::Symbolic => Ok(symbolic()),
            Backend::Fast => Ok(Engine::Fast(FastEngine::new(&gens, measure.free_basis)?)),
            Backend::Auto => Ok(match FastEngine::new(&gens, measure.free_basis) {
                Ok(e) => Engine::Fast(e),
                Err(_) => symbolic(),
            }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Engine::Symbolic { .. } => "symbolic".into(),
            Engine::Jonquiere => "symbolic (jonquiere)".into(),
            Engine::Fast(e) => format!("fast ({})", e.kind()),
        }
    }

    pub fn is_fast(&self) -> bool {
        matches!(self, Engine::Fast(_))
    }
}

/// Composes the letters left to right and records `log deg` at each
/// checkpoint (a step count, `0` meaning the identity).
pub fn apply_letters(
    measure: &Measure,
    letters: &[usize],
    checkpoints: &[usize],
    engine: &Engine,
) -> Result<Vec<f64>, WalkError> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut record = |step: usize, value: &mut dyn FnMut() -> Result<f64, WalkError>| {
        while next.peek() == Some(&&step) {
            next.next();
            out.push(value()?);
        }
        Ok::<(), WalkError>(())
    };
    match engine {
        Engine::Fast(e) => {
            let mut st = e.start();
            record(0, &mut || Ok(0.0))?;
            for (i, &l) in letters.iter().enumerate() {
                e.push(&mut st, l)?;
                record(i + 1, &mut || Ok(e.log_degree(&st)))?;
            }
        }
        Engine::Symbolic { cap } => {
            let mut acc = RationalMap::identity();
            record(0, &mut || Ok(0.0))?;
            for (i, &l) in letters.iter().enumerate() {
                acc = RationalMap::compose_capped(&acc, &measure.atoms[l].generator.map, *cap)?;
                record(i + 1, &mut || Ok(ln_bigint(&BigInt::from(acc.degree()))))?;
            }
        }
        Engine::Jonquiere => {
            let mut acc = JonqMap::identity();
            record(0, &mut || Ok(0.0))?;
            for (i, &l) in letters.iter().enumerate() {
                let j = measure.atoms[l]
                    .generator
                    .jonquiere
                    .as_ref()
                    .expect("jonquiere data");
                acc = acc.compose(j);
                record(i + 1, &mut || Ok(ln_bigint(&BigInt::from(acc.degree()))))?;
            }
        }
    }
    Ok(out)
}

/// The letters of trial `trial`.
pub fn sample_word(measure: &Measure, seed: u64, trial: u64, length: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..length)
        .map(|_| measure.sample_bits(rng.next_u64() >> (64 - UNIFORM_BITS)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct TrialFailure {
    pub trial: u64,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub samples: Vec<WalkSample>,
    pub failures: Vec<TrialFailure>,
    pub engine: String,
}

/// Runs every trial, in parallel, merged by trial index. Failed trials are
/// reported and left out of `samples`.
pub fn run_trials(config: &WalkConfig) -> Result<Ensemble, WalkError> {
    config.validate()?;
    let engine = Engine::select(&config.measure, config.backend, config.degree_cap)?;
    let results: Vec<Result<WalkSample, TrialFailure>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let word = sample_word(&config.measure, config.seed, t, config.length);
            apply_letters(&config.measure, &word, &config.checkpoints, &engine)
                .map(|log_degree| WalkSample {
                    trial: t,
                    log_degree,
                })
                .map_err(|e| TrialFailure {
                    trial: t,
                    error: e.to_string(),
                })
        })
        .collect();
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(f) => failures.push(f),
        }
    }
    Ok(Ensemble {
        samples,
        failures,
        engine: engine.name(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{henon, linear};
    use crate::parse::parse_univariate;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn henon_measure(w: BigRational) -> Measure {
        let (h, hi) = henon("h", &parse_univariate("x^2").unwrap()).unwrap();
        let rest = BigRational::one() - &w;
        Measure::new(
            vec![
                Atom {
                    generator: h,
                    weight: w,
                },
                Atom {
                    generator: hi,
                    weight: rest,
                },
            ],
            true,
            None,
        )
        .unwrap()
    }

    #[test]
    fn sampling_examples() {
        let m = henon_measure(q(1, 2));
        assert_eq!(sample_letter(&m, 0.25), 0);
        assert_eq!(sample_letter(&m, 0.75), 1);
        assert_eq!(sample_letter(&m, 0.5), 1);
        assert_eq!(sample_letter(&m, 0.0), 0);
        let gens: Vec<Generator> = (0..3)
            .map(|i| {
                let mut a = [
                    [q(0, 1), q(0, 1), q(0, 1)],
                    [q(0, 1), q(0, 1), q(0, 1)],
                    [q(0, 1), q(0, 1), q(0, 1)],
                ];
                for (k, row) in a.iter_mut().enumerate() {
                    row[k] = q(k as i64 + 1 + i, 1);
                }
                linear(&format!("l{i}"), &a).unwrap()
            })
            .collect();
        let weights = [q(1, 5), q(3, 10), q(1, 2)];
        let atoms = gens
            .into_iter()
            .zip(weights)
            .map(|(generator, weight)| Atom { generator, weight })
            .collect();
        let m3 = Measure::new(atoms, false, None).unwrap();
        assert_eq!(sample_letter(&m3, 0.5), 2);
        assert_eq!(sample_letter(&m3, 0.1999), 0);
        assert_eq!(sample_letter(&m3, 0.2), 1);
        assert_eq!(sample_letter(&m3, 0.999999), 2);
    }

    #[test]
    fn measure_validation() {
        let (h, hi) = henon("h", &parse_univariate("x^2").unwrap()).unwrap();
        let bad = Measure::new(
            vec![
                Atom {
                    generator: h.clone(),
                    weight: q(1, 2),
                },
                Atom {
                    generator: hi.clone(),
                    weight: q(1, 3),
                },
            ],
            true,
            None,
        );
        assert!(matches!(bad, Err(WalkError::WeightSum(_))));
        let neg = Measure::new(
            vec![
                Atom {
                    generator: h,
                    weight: q(3, 2),
                },
                Atom {
                    generator: hi,
                    weight: q(-1, 2),
                },
            ],
            true,
            None,
        );
        assert!(matches!(neg, Err(WalkError::NonPositiveWeight(_))));
        assert!(matches!(
            Measure::new(vec![], false, None),
            Err(WalkError::Empty)
        ));
    }

    #[test]
    fn henon_letters_symbolic_and_fast() {
        let m = henon_measure(q(1, 2));
        let fast = Engine::select(&m, Backend::Fast, DEFAULT_DEGREE_CAP).unwrap();
        let sym = Engine::select(&m, Backend::Symbolic, DEFAULT_DEGREE_CAP).unwrap();
        let cps = [0, 1, 2, 3, 4];
        let a = apply_letters(&m, &[0, 1, 0, 0], &cps, &fast).unwrap();
        let b = apply_letters(&m, &[0, 1, 0, 0], &cps, &sym).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[4], 4f64.ln());
        let c = apply_letters(&m, &[0, 0, 0], &[3], &sym).unwrap();
        assert_eq!(c, vec![8f64.ln()]);
    }

    #[test]
    fn elliptic_letters_stay_at_zero() {
        let a = [
            [q(1, 1), q(2, 1), q(0, 1)],
            [q(0, 1), q(1, 1), q(-1, 3)],
            [q(1, 1), q(0, 1), q(1, 1)],
        ];
        let g = linear("a", &a).unwrap();
        let m = Measure::uniform(vec![g], false, None).unwrap();
        let e = Engine::select(&m, Backend::Auto, DEFAULT_DEGREE_CAP).unwrap();
        let out = apply_letters(&m, &[0; 6], &[0, 2, 4, 6], &e).unwrap();
        assert_eq!(out, vec![0.0; 4]);
    }

    #[test]
    fn trials_are_deterministic() {
        let m = henon_measure(q(1, 2));
        let mut cfg = WalkConfig::new(m, 50, 40, 7, Backend::Fast);
        cfg.checkpoints = vec![10, 50];
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let c = pool.install(|| run_trials(&cfg).unwrap());
        assert_eq!(a.samples, c.samples);
        assert!(a.failures.is_empty());
        assert_eq!(a.samples.len(), 40);
    }

    #[test]
    fn zero_length_walk() {
        let cfg = WalkConfig::new(henon_measure(q(1, 2)), 0, 1, 1, Backend::Auto);
        let e = run_trials(&cfg).unwrap();
        assert_eq!(e.samples[0].log_degree, vec![0.0]);
    }

    #[test]
    fn cap_failures_are_counted() {
        let (h, _) = henon("h", &parse_univariate("x^2").unwrap()).unwrap();
        let m = Measure::uniform(vec![h], false, None).unwrap();
        let mut cfg = WalkConfig::new(m, 6, 3, 1, Backend::Symbolic);
        cfg.degree_cap = 16;
        let e = run_trials(&cfg).unwrap();
        assert!(e.samples.is_empty());
        assert_eq!(e.failures.len(), 3);
    }
}
