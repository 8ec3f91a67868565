use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cremona::{MapError, RationalMap};
use crate::exactpoly::upoly::{GcdDomain, UPoly};
use crate::ratpoly::{QPoly, RatFunc};

type ZPoly = UPoly<BigInt>;

/// A Jonquière map `(x, y) ↦ (ax + b, (α(x)y + β(x))/(γ(x)y + δ(x)))` kept
/// as an affine part and a projective 2×2 matrix over ℤ[x]. Composition in
/// this form avoids clearing large common factors in three variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JonqMap {
    a: BigRational,
    b: BigRational,
    /// `[[α, β], [γ, δ]]`, integer, coprime entries, first nonzero entry
    /// with positive leading coefficient.
    m: [[ZPoly; 2]; 2],
}

fn to_zpoly(p: &QPoly, scale: &BigInt) -> ZPoly {
    let coeffs = p.univariate_coeffs(0);
    let s = BigRational::from_integer(scale.clone());
    ZPoly::from_coeffs(coeffs.iter().map(|c| (c * &s).to_integer()).collect())
}

fn to_qpoly(p: &ZPoly, var: usize) -> QPoly {
    let coeffs: Vec<BigRational> = p
        .coeffs()
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    QPoly::from_coeffs(var, &coeffs)
}

impl JonqMap {
    pub fn new(a: BigRational, b: BigRational, coeffs: [&QPoly; 4]) -> Self {
        let lcm = coeffs
            .iter()
            .fold(BigInt::from(1), |acc, p| acc.lcm(&p.denominator_lcm()));
        let [al, be, ga, de] = coeffs.map(|p| to_zpoly(p, &lcm));
        let mut j = JonqMap {
            a,
            b,
            m: [[al, be], [ga, de]],
        };
        j.normalize();
        j
    }

    pub fn identity() -> Self {
        let one = ZPoly::constant(BigInt::from(1));
        let zero = ZPoly::from_coeffs(Vec::new());
        JonqMap {
            a: BigRational::one(),
            b: BigRational::zero(),
            m: [[one.clone(), zero.clone()], [zero, one]],
        }
    }

    fn normalize(&mut self) {
        let mut g = ZPoly::from_coeffs(Vec::new());
        for row in &self.m {
            for e in row {
                if !GcdDomain::is_zero(e) {
                    g = g.subresultant_gcd(e);
                }
            }
        }
        let lead_negative = self
            .m
            .iter()
            .flatten()
            .find(|e| !GcdDomain::is_zero(*e))
            .is_some_and(|e| e.is_negative());
        if lead_negative {
            g = g.neg();
        }
        if !g.is_one() {
            for row in self.m.iter_mut() {
                for e in row.iter_mut() {
                    *e = e.exact_quotient(&g).expect("gcd divides every entry");
                }
            }
        }
    }

    /// Each entry `P(x)` becomes `L^D · P((A x + B)/L)` where
    /// `ax + b = (A x + B)/L` and `D` is the largest entry degree.
    fn substitute_affine(&self, a: &BigRational, b: &BigRational) -> [[ZPoly; 2]; 2] {
        let l = a.denom().lcm(b.denom());
        let lq = BigRational::from_integer(l.clone());
        let big_a = (a * &lq).to_integer();
        let big_b = (b * &lq).to_integer();
        let lin = ZPoly::from_coeffs(vec![big_b, big_a]);
        let d = self
            .m
            .iter()
            .flatten()
            .filter_map(|e| e.degree())
            .max()
            .unwrap_or(0);
        let mut lin_pows = vec![ZPoly::constant(BigInt::from(1))];
        let mut l_pows = vec![BigInt::from(1)];
        for k in 1..=d {
            lin_pows.push(lin_pows[k - 1].mul_poly(&lin));
            l_pows.push(&l_pows[k - 1] * &l);
        }
        self.m.clone().map(|row| {
            row.map(|e| {
                let mut acc = ZPoly::from_coeffs(Vec::new());
                for (k, c) in e.coeffs().iter().enumerate() {
                    if Zero::is_zero(c) {
                        continue;
                    }
                    let scale = c * &l_pows[d - k];
                    acc = GcdDomain::add(&acc, &lin_pows[k].scale(&scale));
                }
                acc
            })
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let m1 = self.substitute_affine(&other.a, &other.b);
        let m2 = &other.m;
        let cell = |i: usize, j: usize| {
            GcdDomain::add(&m1[i][0].mul_poly(&m2[0][j]), &m1[i][1].mul_poly(&m2[1][j]))
        };
        let mut out = JonqMap {
            a: &self.a * &other.a,
            b: &self.a * &other.b + &self.b,
            m: [[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]],
        };
        out.normalize();
        out
    }

    /// Degree of the associated plane map: `max(deg N, 1 + deg D)` for the
    /// coprime pair `N = αy + β`, `D = γy + δ`.
    pub fn degree(&self) -> u64 {
        let row = |r: &[ZPoly; 2]| -> Option<u64> {
            let a = r[0].degree().map(|d| d as u64 + 1);
            let b = r[1].degree().map(|d| d as u64);
            a.max(b)
        };
        let n = row(&self.m[0]).unwrap_or(0);
        let d = row(&self.m[1]).unwrap_or(0);
        n.max(d + 1)
    }

    pub fn to_rational_map(&self) -> Result<RationalMap, MapError> {
        let x = QPoly::var(0);
        let y = QPoly::var(1);
        let r1 = RatFunc::from_poly(x.scale(&self.a).add(&QPoly::constant(self.b.clone())));
        let [[al, be], [ga, de]] = &self.m;
        let num = y.mul(&to_qpoly(al, 0)).add(&to_qpoly(be, 0));
        let den = y.mul(&to_qpoly(ga, 0)).add(&to_qpoly(de, 0));
        RationalMap::from_rational_pair(&r1, &RatFunc { num, den })
    }
}
