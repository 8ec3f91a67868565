//! Named property suites run with a fixed internal seed.

use std::fmt;
use std::str::FromStr;

use cremona_core::cremona::{MonomialMatrix, RationalMap};
use cremona_core::families::{
    arithmetic_pair, henon, jonquiere, linear, monomial, FamilyTag, Generator,
};
use cremona_core::fast::FastEngine;
use cremona_core::limitlaw::{predict, Law};
use cremona_core::ratpoly::QPoly;
use cremona_core::walk::{Atom, Measure};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUITE_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Submult,
    SqrtSubadd,
    Functorial,
    FastOracle,
    Arithmetic,
    Table,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Submult,
        Suite::SqrtSubadd,
        Suite::Functorial,
        Suite::FastOracle,
        Suite::Arithmetic,
        Suite::Table,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Submult => "submult",
            Suite::SqrtSubadd => "sqrt_subadd",
            Suite::Functorial => "functorial",
            Suite::FastOracle => "fast_oracle",
            Suite::Arithmetic => "arithmetic",
            Suite::Table => "table",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                format!("unknown suite '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub cases: usize,
    pub counterexamples: usize,
    pub first: Option<String>,
}

impl VerifyReport {
    fn new(suite: Suite) -> Self {
        VerifyReport {
            suite: suite.name(),
            cases: 0,
            counterexamples: 0,
            first: None,
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.counterexamples += 1;
            if self.first.is_none() {
                self.first = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} cases, {} counterexamples",
            self.suite, self.cases, self.counterexamples
        )?;
        if let Some(c) = &self.first {
            write!(f, "\nfirst counterexample: {c}")?;
        }
        Ok(())
    }
}

pub fn run_suite(suite: Suite) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    match suite {
        Suite::Submult => submult(&mut rng, 500),
        Suite::SqrtSubadd => sqrt_subadd(&mut rng, 200),
        Suite::Functorial => functorial(&mut rng, 200),
        Suite::FastOracle => fast_oracle(&mut rng, 200, 100),
        Suite::Arithmetic => arithmetic(5),
        Suite::Table => table(),
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Univariate polynomial of exact degree `d` with coefficients in `[-3, 3]`.
pub fn random_poly(rng: &mut impl Rng, d: u32) -> QPoly {
    let mut coeffs: Vec<BigRational> = (0..d).map(|_| q(rng.gen_range(-3..=3), 1)).collect();
    let lead = *[-3, -2, -1, 1, 2, 3].choose(rng).expect("nonempty");
    coeffs.push(q(lead, 1));
    QPoly::from_coeffs(0, &coeffs)
}

/// Matrix with entries in `[-2, 2]` and determinant `±1`.
pub fn random_birational_matrix(rng: &mut impl Rng) -> MonomialMatrix {
    loop {
        let e = [
            [rng.gen_range(-2..=2), rng.gen_range(-2..=2)],
            [rng.gen_range(-2..=2), rng.gen_range(-2..=2)],
        ];
        let m = MonomialMatrix::from_i64(e);
        if m.is_birational() {
            return m;
        }
    }
}

/// Jonquière map with component degrees at most `max_degree`.
pub fn random_jonquiere(rng: &mut impl Rng, max_degree: u32) -> Generator {
    loop {
        let a = q(*[-2, -1, 1, 2].choose(rng).expect("nonempty"), 1);
        let b = q(rng.gen_range(-2..=2), 1);
        let c: Vec<QPoly> = (0..4)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    QPoly::zero()
                } else {
                    let d = rng.gen_range(0..=max_degree);
                    random_poly(rng, d)
                }
            })
            .collect();
        if let Ok(g) = jonquiere("j", &a, &b, [&c[0], &c[1], &c[2], &c[3]]) {
            return g;
        }
    }
}

fn random_linear(rng: &mut impl Rng) -> Generator {
    loop {
        let mut a: [[BigRational; 3]; 3] = Default::default();
        for row in a.iter_mut() {
            for x in row.iter_mut() {
                *x = q(rng.gen_range(-3..=3), 1);
            }
        }
        if let Ok(g) = linear("l", &a) {
            return g;
        }
    }
}

fn random_map(rng: &mut impl Rng) -> Generator {
    match rng.gen_range(0..4) {
        0 => {
            let d = rng.gen_range(2..=3);
            let (h, hi) = henon("h", &random_poly(rng, d)).expect("degree at least 2");
            if rng.gen_bool(0.5) {
                h
            } else {
                hi
            }
        }
        1 => monomial("m", &random_birational_matrix(rng), FamilyTag::Lineal).expect("birational"),
        2 => random_linear(rng),
        _ => random_jonquiere(rng, 3),
    }
}

const ORACLE_CAP: u32 = u32::MAX;

fn compose_word(gens: &[&Generator], word: &[usize]) -> Result<RationalMap, String> {
    let mut acc = RationalMap::identity();
    for &l in word {
        acc = RationalMap::compose_capped(&acc, &gens[l].map, ORACLE_CAP)
            .map_err(|e| e.to_string())?;
    }
    Ok(acc)
}

fn fast_degree(gens: &[&Generator], free: bool, word: &[usize]) -> Result<BigInt, String> {
    let e = FastEngine::new(gens, free).map_err(|e| e.to_string())?;
    let mut st = e.start();
    for &l in word {
        e.push(&mut st, l).map_err(|e| e.to_string())?;
    }
    Ok(e.degree(&st).into())
}

/// `deg(f∘g) ≤ deg f · deg g`.
pub fn submult(rng: &mut impl Rng, pairs: usize) -> VerifyReport {
    let mut r = VerifyReport::new(Suite::Submult);
    for _ in 0..pairs {
        let f = random_map(rng);
        let g = random_map(rng);
        let fg = RationalMap::compose_capped(&f.map, &g.map, ORACLE_CAP);
        let ok = matches!(&fg, Ok(m) if u64::from(m.degree()) <= u64::from(f.degree()) * u64::from(g.degree()));
        r.check(ok, || format!("f = {}, g = {}", f.map, g.map));
    }
    r
}

/// `√deg(f∘g) ≤ √deg f + √deg g` for Jonquière maps, decided in integers.
pub fn sqrt_subadd(rng: &mut impl Rng, pairs: usize) -> VerifyReport {
    let mut r = VerifyReport::new(Suite::SqrtSubadd);
    for _ in 0..pairs {
        let f = random_jonquiere(rng, 5);
        let g = random_jonquiere(rng, 5);
        let fg = RationalMap::compose_capped(&f.map, &g.map, ORACLE_CAP);
        let ok = match &fg {
            Ok(m) => sqrt_subadditive(m.degree().into(), f.degree().into(), g.degree().into()),
            Err(_) => false,
        };
        r.check(ok, || format!("f = {}, g = {}", f.map, g.map));
    }
    r
}

/// `√c ≤ √a + √b` without floating point.
pub fn sqrt_subadditive(c: u64, a: u64, b: u64) -> bool {
    c <= a + b || (c - a - b) * (c - a - b) <= 4 * a * b
}

/// `g_M ∘ g_N = g_{MN}` and `deg g_M` equals the lift degree.
pub fn functorial(rng: &mut impl Rng, pairs: usize) -> VerifyReport {
    let mut r = VerifyReport::new(Suite::Functorial);
    for _ in 0..pairs {
        let m = random_birational_matrix(rng);
        let n = random_birational_matrix(rng);
        let gm = RationalMap::from_monomial_matrix(&m).expect("birational");
        let gn = RationalMap::from_monomial_matrix(&n).expect("birational");
        let gmn = RationalMap::from_monomial_matrix(&m.mul(&n)).expect("birational");
        let composed = RationalMap::compose_capped(&gm, &gn, ORACLE_CAP);
        let ok = matches!(&composed, Ok(c) if *c == gmn)
            && BigInt::from(gmn.degree()) == m.mul(&n).lift_degree();
        r.check(ok, || {
            format!("M = {:?}, N = {:?}", m.entries(), n.entries())
        });
    }
    r
}

/// Fast-path degrees equal symbolic degrees on random Hénon words (one pair
/// of degree 2 or 3, or a degree-2 and a degree-3 pair together) and on
/// random monomial words.
pub fn fast_oracle(rng: &mut impl Rng, henon_words: usize, monomial_words: usize) -> VerifyReport {
    let mut r = VerifyReport::new(Suite::FastOracle);
    for _ in 0..henon_words {
        let mut gens = Vec::new();
        let mixed = rng.gen_bool(0.5);
        if mixed {
            for (name, d) in [("a", 2), ("b", 3)] {
                let (h, hi) = henon(name, &random_poly(rng, d)).expect("degree at least 2");
                gens.extend([h, hi]);
            }
        } else {
            let d = rng.gen_range(2..=3);
            let (h, hi) = henon("a", &random_poly(rng, d)).expect("degree at least 2");
            gens.extend([h, hi]);
        }
        let refs: Vec<&Generator> = gens.iter().collect();
        let len = rng.gen_range(1..=6);
        let word: Vec<usize> = (0..len).map(|_| rng.gen_range(0..refs.len())).collect();
        let sym = compose_word(&refs, &word).map(|m| BigInt::from(m.degree()));
        let fast = fast_degree(&refs, !mixed, &word);
        let ok = matches!((&sym, &fast), (Ok(a), Ok(b)) if a == b);
        r.check(ok, || {
            let names: Vec<&str> = word.iter().map(|&l| refs[l].name.as_str()).collect();
            format!(
                "henon word {names:?} over {:?}: symbolic {sym:?}, fast {fast:?}",
                refs.iter().map(|g| g.map.to_string()).collect::<Vec<_>>()
            )
        });
    }
    for _ in 0..monomial_words {
        let len = rng.gen_range(1..=12);
        let gens: Vec<Generator> = (0..len)
            .map(|i| {
                monomial(
                    &format!("m{i}"),
                    &random_birational_matrix(rng),
                    FamilyTag::Lineal,
                )
                .expect("birational")
            })
            .collect();
        let refs: Vec<&Generator> = gens.iter().collect();
        let word: Vec<usize> = (0..len).collect();
        let sym = compose_word(&refs, &word).map(|m| BigInt::from(m.degree()));
        let fast = fast_degree(&refs, false, &word);
        let ok = matches!((&sym, &fast), (Ok(a), Ok(b)) if a == b);
        r.check(ok, || {
            let ms: Vec<_> = refs
                .iter()
                .map(|g| g.matrix().map(|m| m.entries().clone()))
                .collect();
            format!("monomial word {ms:?}: symbolic {sym:?}, fast {fast:?}")
        });
    }
    r
}

/// Every positive word of length `1..=max_len` in the letters `F`, `G`
/// built from `P₁ = x²`, `P₂ = x² + x` has symbolic degree `2ⁿ`.
pub fn arithmetic(max_len: u32) -> VerifyReport {
    let mut r = VerifyReport::new(Suite::Arithmetic);
    let p1 = QPoly::from_coeffs(0, &[q(0, 1), q(0, 1), q(1, 1)]);
    let p2 = QPoly::from_coeffs(0, &[q(0, 1), q(1, 1), q(1, 1)]);
    let [f, g, _, _] = arithmetic_pair(["F", "G"], &p1, &p2).expect("valid pair");
    let letters = [&f, &g];
    for n in 1..=max_len {
        for bits in 0..(1u32 << n) {
            let word: Vec<usize> = (0..n).map(|i| ((bits >> i) & 1) as usize).collect();
            let deg = compose_word(&letters, &word).map(|m| m.degree());
            r.check(deg == Ok(1 << n), || {
                let w: String = word.iter().map(|&l| letters[l].name.as_str()).collect();
                format!("word {w}: degree {deg:?}, expected {}", 1u32 << n)
            });
        }
    }
    r
}

/// Expected `(law, ℓ, σ)` for one canonical measure; `None` means the
/// parameter must be estimated.
pub struct TableRow {
    pub label: &'static str,
    pub measure: Measure,
    pub law: Law,
    pub ell: Option<f64>,
    pub sigma: Option<f64>,
}

fn weighted(
    gens: Vec<Generator>,
    weights: &[BigRational],
    free: bool,
    tag: Option<FamilyTag>,
) -> Measure {
    let atoms = gens
        .into_iter()
        .zip(weights.iter().cloned())
        .map(|(generator, weight)| Atom { generator, weight })
        .collect();
    Measure::new(atoms, free, tag).expect("valid canonical measure")
}

/// Canonical measures, one per row of the elementary/non-elementary table.
pub fn table_rows() -> Vec<TableRow> {
    let ln2 = 2f64.ln();
    let p2 = QPoly::from_coeffs(0, &[q(0, 1), q(0, 1), q(1, 1)]);
    let p3 = QPoly::from_coeffs(0, &[q(0, 1), q(0, 1), q(0, 1), q(1, 1)]);
    let (h, hi) = henon("h", &p2).expect("valid");
    let (k, ki) = henon("k", &p3).expect("valid");
    let half = q(1, 2);
    let l1 = {
        let a = [
            [q(1, 1), q(2, 1), q(0, 1)],
            [q(0, 1), q(1, 1), q(-1, 3)],
            [q(1, 1), q(0, 1), q(1, 1)],
        ];
        linear("a", &a).expect("invertible")
    };
    let l2 = {
        let a = [
            [q(0, 1), q(1, 1), q(0, 1)],
            [q(1, 1), q(0, 1), q(0, 1)],
            [q(0, 1), q(0, 1), q(5, 1)],
        ];
        linear("b", &a).expect("invertible")
    };
    let x = QPoly::var(0);
    let one = QPoly::constant(BigRational::one());
    let j1 = jonquiere("j1", &q(1, 1), &q(1, 1), [&one, &x, &x, &one]).expect("valid");
    let j2 = jonquiere("j2", &q(1, 1), &q(0, 1), [&x, &one, &one, &x]).expect("valid");
    vec![
        TableRow {
            label: "elliptic",
            measure: weighted(vec![l1, l2], &[half.clone(), half.clone()], false, None),
            law: Law::Dirac,
            ell: Some(0.0),
            sigma: Some(0.0),
        },
        TableRow {
            label: "parabolic",
            measure: weighted(vec![j1, j2], &[half.clone(), half.clone()], false, None),
            law: Law::Dirac,
            ell: Some(0.0),
            sigma: Some(0.0),
        },
        TableRow {
            label: "lineal, Lambda = 0",
            measure: weighted(
                vec![h.clone(), hi.clone()],
                &[half.clone(), half.clone()],
                true,
                None,
            ),
            law: Law::FoldedGaussian,
            ell: Some(0.0),
            sigma: Some(ln2),
        },
        TableRow {
            label: "lineal, Lambda < 0",
            measure: weighted(
                vec![h.clone(), hi.clone()],
                &[q(3, 10), q(7, 10)],
                true,
                None,
            ),
            law: Law::Gaussian,
            ell: Some(0.4 * ln2),
            sigma: Some(0.84f64.sqrt() * ln2),
        },
        TableRow {
            label: "lineal, Lambda > 0",
            measure: weighted(
                vec![h.clone(), hi.clone()],
                &[q(7, 10), q(3, 10)],
                true,
                None,
            ),
            law: Law::Gaussian,
            ell: Some(0.4 * ln2),
            sigma: Some(0.84f64.sqrt() * ln2),
        },
        TableRow {
            label: "lineal, constant lambda",
            measure: weighted(vec![h.clone()], &[BigRational::one()], true, None),
            law: Law::Dirac,
            ell: Some(ln2),
            sigma: Some(0.0),
        },
        TableRow {
            label: "non-elementary",
            measure: weighted(
                vec![h, hi, k, ki],
                &[q(1, 4), q(1, 4), q(1, 4), q(1, 4)],
                false,
                Some(FamilyTag::NonelementaryFree),
            ),
            law: Law::Gaussian,
            ell: None,
            sigma: None,
        },
    ]
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        (None, None) => true,
        _ => false,
    }
}

pub fn table() -> VerifyReport {
    let mut r = VerifyReport::new(Suite::Table);
    for row in table_rows() {
        let p = predict(&row.measure);
        let ok = matches!(&p, Ok(p) if p.law == row.law && close(p.ell, row.ell) && close(p.sigma, row.sigma));
        r.check(ok, || format!("{}: got {p:?}", row.label));
    }
    r
}
