//! Predicted limit laws for `(log deg fₙ − nℓ)/√n` and goodness-of-fit.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use statrs::statistics::Statistics;
use thiserror::Error;

use crate::families::FamilyTag;
use crate::numeric::ln_rational;
use crate::walk::Measure;

/// Samples within this distance of zero count as exact for a Dirac target.
pub const DIRAC_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitError {
    #[error("atoms mix families {0} and {1}; declare a group type")]
    MixedFamilies(FamilyTag, FamilyTag),
    #[error("lineal atoms come from different groups; declare a group type")]
    MixedGroups,
    #[error("lineal atom '{0}' has no lambda")]
    MissingLambda(String),
    #[error("lambda of '{0}' must be positive")]
    NonPositiveLambda(String),
    #[error("no samples")]
    Empty,
    #[error("sigma must be positive")]
    Sigma,
    #[error("n must be positive")]
    ZeroSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Dirac,
    Gaussian,
    FoldedGaussian,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::Dirac => "dirac",
            Law::Gaussian => "gaussian",
            Law::FoldedGaussian => "folded_gaussian",
        })
    }
}

/// `ell` and `sigma` are `None` when they must be estimated from samples;
/// the drift is then known to be positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitLawPrediction {
    pub family: FamilyTag,
    pub law: Law,
    pub ell: Option<f64>,
    pub sigma: Option<f64>,
    /// `Λ_μ = Σ w log λ`, for lineal measures.
    pub lambda_mu: Option<f64>,
}

impl LimitLawPrediction {
    fn known(family: FamilyTag, law: Law, ell: f64, sigma: f64, lambda_mu: Option<f64>) -> Self {
        LimitLawPrediction {
            family,
            law,
            ell: Some(ell),
            sigma: Some(sigma),
            lambda_mu,
        }
    }

    fn estimated(family: FamilyTag) -> Self {
        LimitLawPrediction {
            family,
            law: Law::Gaussian,
            ell: None,
            sigma: None,
            lambda_mu: None,
        }
    }

    pub fn is_estimated(&self) -> bool {
        self.ell.is_none()
    }
}

fn resolve_family(measure: &Measure) -> Result<FamilyTag, LimitError> {
    if let Some(t) = measure.group_type() {
        return Ok(t);
    }
    let first = measure.atoms()[0].generator.family;
    if let Some(other) = measure
        .atoms()
        .iter()
        .map(|a| a.generator.family)
        .find(|&t| t != first)
    {
        return Err(LimitError::MixedFamilies(first, other));
    }
    if first == FamilyTag::Lineal {
        let keys: BTreeSet<_> = measure
            .atoms()
            .iter()
            .map(|a| a.generator.group_key.as_deref())
            .collect();
        if keys.len() > 1 {
            return Err(LimitError::MixedGroups);
        }
    }
    Ok(first)
}

/// `Π λᵢ^{wᵢ} = 1`, decided exactly when the exponents are small.
fn product_is_one(lambdas: &[BigRational], weights: &[BigRational], lambda_mu: f64) -> bool {
    let den = weights
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let mut prod = BigRational::one();
    for (l, w) in lambdas.iter().zip(weights) {
        let Some(e) = (w * BigRational::from_integer(den.clone()))
            .to_integer()
            .to_i32()
        else {
            return lambda_mu.abs() < 1e-12;
        };
        prod *= l.pow(e);
    }
    prod.is_one()
}

/// Limit law of `(log deg fₙ − nℓ)/√n` for the walk driven by `measure`.
pub fn predict(measure: &Measure) -> Result<LimitLawPrediction, LimitError> {
    let family = resolve_family(measure)?;
    let atoms = measure.atoms();
    let weights: Vec<f64> = atoms
        .iter()
        .map(|a| a.weight.to_f64().unwrap_or(0.0))
        .collect();
    Ok(match family {
        FamilyTag::Elliptic | FamilyTag::Parabolic => {
            LimitLawPrediction::known(family, Law::Dirac, 0.0, 0.0, None)
        }
        FamilyTag::Lineal => {
            let mut lambdas = Vec::with_capacity(atoms.len());
            for a in atoms {
                let l = a
                    .generator
                    .lambda
                    .clone()
                    .ok_or_else(|| LimitError::MissingLambda(a.generator.name.clone()))?;
                if l <= BigRational::from_integer(0.into()) {
                    return Err(LimitError::NonPositiveLambda(a.generator.name.clone()));
                }
                lambdas.push(l);
            }
            let logs: Vec<f64> = lambdas.iter().map(ln_rational).collect();
            let lambda_mu: f64 = logs.iter().zip(&weights).map(|(l, w)| w * l).sum();
            let raw: Vec<BigRational> = atoms.iter().map(|a| a.weight.clone()).collect();
            if product_is_one(&lambdas, &raw, lambda_mu) {
                let var: f64 = logs.iter().zip(&weights).map(|(l, w)| w * l * l).sum();
                let law = if var == 0.0 {
                    Law::Dirac
                } else {
                    Law::FoldedGaussian
                };
                LimitLawPrediction::known(family, law, 0.0, var.sqrt(), Some(0.0))
            } else {
                let var: f64 = logs
                    .iter()
                    .zip(&weights)
                    .map(|(l, w)| w * (l - lambda_mu).powi(2))
                    .sum();
                let law = if var == 0.0 {
                    Law::Dirac
                } else {
                    Law::Gaussian
                };
                LimitLawPrediction::known(family, law, lambda_mu.abs(), var.sqrt(), Some(lambda_mu))
            }
        }
        FamilyTag::NonelementaryFree => LimitLawPrediction::estimated(family),
        FamilyTag::Arithmetic => {
            let names: BTreeSet<&str> = atoms.iter().map(|a| a.generator.name.as_str()).collect();
            let positive = atoms.iter().all(|a| {
                a.generator
                    .inverse
                    .as_deref()
                    .is_none_or(|inv| !names.contains(inv))
            });
            if !positive {
                return Ok(LimitLawPrediction::estimated(family));
            }
            let degs: Vec<u32> = atoms.iter().map(|a| a.generator.degree()).collect();
            let logs: Vec<f64> = degs.iter().map(|&d| (d as f64).ln()).collect();
            let ell: f64 = logs.iter().zip(&weights).map(|(l, w)| w * l).sum();
            if degs.iter().all(|&d| d == degs[0]) {
                LimitLawPrediction::known(family, Law::Dirac, logs[0], 0.0, None)
            } else {
                let var: f64 = logs
                    .iter()
                    .zip(&weights)
                    .map(|(l, w)| w * (l - ell).powi(2))
                    .sum();
                LimitLawPrediction::known(family, Law::Gaussian, ell, var.sqrt(), None)
            }
        }
    })
}

/// `Φ(x/σ)`, through the musl `erfc`.
pub fn gaussian_cdf(sigma: f64, x: f64) -> f64 {
    0.5 * libm::erfc(-x / (sigma * std::f64::consts::SQRT_2))
}

/// CDF of `|N(0, σ²)|`.
pub fn folded_cdf(sigma: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        (gaussian_cdf(sigma, x) - gaussian_cdf(sigma, -x)).clamp(0.0, 1.0)
    }
}

/// `(v − nℓ)/√n` for each sample.
pub fn normalize(samples: &[f64], ell: f64, n: usize) -> Vec<f64> {
    let shift = n as f64 * ell;
    let scale = (n as f64).sqrt();
    samples.iter().map(|v| (v - shift) / scale).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Dirac,
    Gaussian(f64),
    FoldedGaussian(f64),
}

impl Target {
    pub fn law(self) -> Law {
        match self {
            Target::Dirac => Law::Dirac,
            Target::Gaussian(_) => Law::Gaussian,
            Target::FoldedGaussian(_) => Law::FoldedGaussian,
        }
    }

    pub fn sigma(self) -> f64 {
        match self {
            Target::Dirac => 0.0,
            Target::Gaussian(s) | Target::FoldedGaussian(s) => s,
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Target::Dirac => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Target::Gaussian(s) => gaussian_cdf(s, x),
            Target::FoldedGaussian(s) => folded_cdf(s, x),
        }
    }

    pub fn from_law(law: Law, sigma: f64) -> Self {
        match law {
            Law::Dirac => Target::Dirac,
            Law::Gaussian => Target::Gaussian(sigma),
            Law::FoldedGaussian => Target::FoldedGaussian(sigma),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSReport {
    pub statistic: f64,
    pub sample_count: usize,
    pub target: Target,
    pub threshold: f64,
}

impl KSReport {
    pub fn passed(&self) -> bool {
        self.statistic <= self.threshold
    }
}

/// Two-sided Kolmogorov–Smirnov distance between the empirical law of `z`
/// and `target`. A Dirac target scores the fraction of samples farther
/// than [`DIRAC_TOLERANCE`] from zero.
pub fn ks_statistic(z: &[f64], target: Target, threshold: f64) -> Result<KSReport, LimitError> {
    if z.is_empty() {
        return Err(LimitError::Empty);
    }
    if target.sigma() <= 0.0 && target != Target::Dirac {
        return Err(LimitError::Sigma);
    }
    let m = z.len() as f64;
    let statistic = match target {
        Target::Dirac => z.iter().filter(|v| v.abs() > DIRAC_TOLERANCE).count() as f64 / m,
        _ => {
            let mut sorted = z.to_vec();
            sorted.sort_by(f64::total_cmp);
            sorted
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let f = target.cdf(x);
                    let hi = (i + 1) as f64 / m;
                    let lo = i as f64 / m;
                    (hi - f).abs().max((lo - f).abs())
                })
                .fold(0.0, f64::max)
        }
    };
    Ok(KSReport {
        statistic,
        sample_count: z.len(),
        target,
        threshold,
    })
}

/// Fitted drift and spread at step `n`: `ℓ̂ = mean/n` and `σ̂` the sample
/// standard deviation of the z-scores around `ℓ̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub ell: f64,
    pub sigma: f64,
}

pub fn fit(samples: &[f64], n: usize) -> Result<Fit, LimitError> {
    if samples.is_empty() {
        return Err(LimitError::Empty);
    }
    if n == 0 {
        return Err(LimitError::ZeroSteps);
    }
    let ell = samples.mean() / n as f64;
    let z = normalize(samples, ell, n);
    let sigma = if z.len() < 2 { 0.0 } else { z.std_dev() };
    Ok(Fit { ell, sigma })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub left: f64,
    pub width: f64,
    pub count: u64,
}

/// Equal-width bins spanning the sample range, the last bin closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![Bin {
            left: lo,
            width: 0.0,
            count: values.len() as u64,
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| Bin {
            left: lo + k as f64 * width,
            width,
            count,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cremona::MonomialMatrix;
    use crate::families::{arithmetic_pair, henon, jonquiere, linear, monomial};
    use crate::parse::parse_univariate;
    use crate::walk::Atom;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn henon_measure(p: &str, w: BigRational) -> Measure {
        let (h, hi) = henon("h", &parse_univariate(p).unwrap()).unwrap();
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
    fn predict_examples() {
        let ln2 = 2f64.ln();
        let sym = predict(&henon_measure("x^2", q(1, 2))).unwrap();
        assert_eq!(sym.law, Law::FoldedGaussian);
        assert_eq!(sym.ell, Some(0.0));
        assert!((sym.sigma.unwrap() - ln2).abs() < 1e-12);
        assert_eq!(sym.lambda_mu, Some(0.0));

        let biased = predict(&henon_measure("x^2", q(7, 10))).unwrap();
        assert_eq!(biased.law, Law::Gaussian);
        assert!((biased.ell.unwrap() - 0.277259).abs() < 1e-6);
        assert!((biased.sigma.unwrap() - 0.84f64.sqrt() * ln2).abs() < 1e-12);
        assert!((biased.sigma.unwrap() - 0.635280).abs() < 1e-6);

        let a = [
            [q(1, 1), q(2, 1), q(0, 1)],
            [q(0, 1), q(1, 1), q(0, 1)],
            [q(0, 1), q(0, 1), q(1, 1)],
        ];
        let ell = Measure::uniform(vec![linear("a", &a).unwrap()], false, None).unwrap();
        let p = predict(&ell).unwrap();
        assert_eq!((p.law, p.ell, p.sigma), (Law::Dirac, Some(0.0), Some(0.0)));
    }

    #[test]
    fn predict_other_rows() {
        let (h, _) = henon("h", &parse_univariate("x^3").unwrap()).unwrap();
        let single = Measure::uniform(vec![h], false, None).unwrap();
        let p = predict(&single).unwrap();
        assert_eq!(p.law, Law::Dirac);
        assert!((p.ell.unwrap() - 3f64.ln()).abs() < 1e-12);

        let x = parse_univariate("x").unwrap();
        let one = parse_univariate("1").unwrap();
        let j = jonquiere("j", &q(1, 1), &q(0, 1), [&one, &x, &x, &one]).unwrap();
        let par = predict(&Measure::uniform(vec![j], false, None).unwrap()).unwrap();
        assert_eq!(par.law, Law::Dirac);

        let [f, g, fi, gi] = arithmetic_pair(
            ["F", "G"],
            &parse_univariate("x^2").unwrap(),
            &parse_univariate("x^2 + x").unwrap(),
        )
        .unwrap();
        let pos = Measure::uniform(vec![f.clone(), g.clone()], true, None).unwrap();
        let p = predict(&pos).unwrap();
        assert_eq!(p.law, Law::Dirac);
        assert!((p.ell.unwrap() - 2f64.ln()).abs() < 1e-12);
        let sym = Measure::uniform(vec![f, g, fi, gi], true, None).unwrap();
        assert!(predict(&sym).unwrap().is_estimated());

        let (h1, h1i) = henon("h1", &parse_univariate("x^2").unwrap()).unwrap();
        let (h2, h2i) = henon("h2", &parse_univariate("x^3").unwrap()).unwrap();
        let gens = vec![h1, h1i, h2, h2i];
        let undeclared = Measure::uniform(gens.clone(), false, None).unwrap();
        assert_eq!(predict(&undeclared), Err(LimitError::MixedGroups));
        let declared = Measure::uniform(gens, false, Some(FamilyTag::NonelementaryFree)).unwrap();
        let p = predict(&declared).unwrap();
        assert_eq!(p.law, Law::Gaussian);
        assert!(p.is_estimated());

        let m = monomial(
            "m",
            &MonomialMatrix::from_i64([[1, 1], [1, 0]]),
            FamilyTag::Lineal,
        )
        .unwrap();
        let mono = Measure::uniform(vec![m], false, None).unwrap();
        assert!(matches!(predict(&mono), Err(LimitError::MissingLambda(_))));
    }

    #[test]
    fn mixed_families_need_declaration() {
        let (h, _) = henon("h", &parse_univariate("x^2").unwrap()).unwrap();
        let a = [
            [q(1, 1), q(0, 1), q(0, 1)],
            [q(0, 1), q(2, 1), q(0, 1)],
            [q(0, 1), q(0, 1), q(1, 1)],
        ];
        let l = linear("l", &a).unwrap();
        let m = Measure::uniform(vec![h, l], false, None).unwrap();
        assert!(matches!(predict(&m), Err(LimitError::MixedFamilies(_, _))));
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(gaussian_cdf(1.0, 0.0), 0.5);
        assert!((gaussian_cdf(1.0, 1.0) - 0.8413447460685429).abs() < 1e-15);
        assert!((gaussian_cdf(2.0, -2.0) - 0.15865525393145707).abs() < 1e-15);
        assert_eq!(folded_cdf(1.0, 0.0), 0.0);
        assert!((folded_cdf(1.0, 1.0) - 0.6826894921370859).abs() < 1e-15);
        assert_eq!(folded_cdf(1.0, -1.0), 0.0);
    }

    #[test]
    fn cdf_against_midpoint_integration() {
        let density = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let steps = 200_000;
        let (a, b) = (-12.0, 1.0);
        let h = (b - a) / steps as f64;
        let integral: f64 = (0..steps)
            .map(|i| density(a + (i as f64 + 0.5) * h) * h)
            .sum();
        assert!((gaussian_cdf(1.0, 1.0) - integral).abs() < 1e-9);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[50.0], 0.5, 100), vec![0.0]);
        assert_eq!(normalize(&[10.0], 0.0, 100), vec![1.0]);
        let ln2 = 2f64.ln();
        let z = normalize(&[100.0 * ln2 + 10.0], ln2, 100)[0];
        assert!((z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_examples() {
        let r = ks_statistic(&[0.0], Target::Gaussian(1.0), 0.1).unwrap();
        assert_eq!(r.statistic, 0.5);
        assert!(!r.passed());
        let r = ks_statistic(&[0.0], Target::FoldedGaussian(1.0), 0.1).unwrap();
        assert_eq!(r.statistic, 1.0);
        let n = Normal::new(0.0, 1.0).unwrap();
        let m = 1000;
        let z: Vec<f64> = (1..=m)
            .map(|i| n.inverse_cdf((i as f64 - 0.5) / m as f64))
            .collect();
        let r = ks_statistic(&z, Target::Gaussian(1.0), 0.01).unwrap();
        assert!((r.statistic - 0.0005).abs() < 1e-9);
        assert!(r.passed());
        assert_eq!(
            ks_statistic(&[], Target::Dirac, 0.0),
            Err(LimitError::Empty)
        );
    }

    #[test]
    fn dirac_target() {
        let r = ks_statistic(&[0.0, 1e-12, -1e-10], Target::Dirac, 0.0).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed());
        let r = ks_statistic(&[0.0, 0.5, 0.0, 0.0], Target::Dirac, 0.0).unwrap();
        assert_eq!(r.statistic, 0.25);
        assert!(!r.passed());
    }

    #[test]
    fn fit_and_histogram() {
        let f = fit(&[10.0, 12.0, 14.0], 4).unwrap();
        assert_eq!(f.ell, 3.0);
        assert!((f.sigma - 1.0).abs() < 1e-12);
        let h = histogram(&[0.0, 0.1, 0.5, 1.0], 2);
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![2, 2]);
        assert_eq!(h[1].left, 0.5);
        let flat = histogram(&[3.0, 3.0], 4);
        assert_eq!(flat.len(), 1);
        assert_eq!(flat[0].count, 2);
    }
}
