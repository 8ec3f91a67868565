use num_bigint::BigInt;

use super::upoly::{GcdDomain, UPoly};
use super::{Exponent, HomPoly};

type Bivariate = UPoly<UPoly<BigInt>>;

/// Greatest common divisor of two homogeneous polynomials.
///
/// The monomial content is split off first; the remaining parts are
/// dehomogenized at `Z = 1`, their gcd is taken in ℤ[X][Y] by the
/// subresultant sequence, and the result is rehomogenized. The answer is
/// primitive with a positive leading coefficient.
pub fn gcd_multivar(p: &HomPoly, q: &HomPoly) -> HomPoly {
    match (p.is_zero(), q.is_zero()) {
        (true, true) => return HomPoly::zero(),
        (true, false) => return q.primitive_part(),
        (false, true) => return p.primitive_part(),
        _ => {}
    }
    let mp = p.monomial_content();
    let mq = q.monomial_content();
    let m: Exponent = [mp[0].min(mq[0]), mp[1].min(mq[1]), mp[2].min(mq[2])];
    let monomial = HomPoly::monomial(m, BigInt::from(1));

    let p_rest = p.div_monomial(&mp).expect("monomial content divides");
    let q_rest = q.div_monomial(&mq).expect("monomial content divides");
    if p_rest.is_monomial() || q_rest.is_monomial() {
        return monomial;
    }
    let g = dehomogenize(&p_rest).subresultant_gcd(&dehomogenize(&q_rest));
    rehomogenize(&g).mul(&monomial).primitive_part()
}

/// `P(X, Y, 1)` as a polynomial in `Y` with coefficients in ℤ[X].
fn dehomogenize(p: &HomPoly) -> Bivariate {
    let ymax = p.terms().iter().map(|(e, _)| e[1]).max().unwrap_or(0) as usize;
    let mut rows: Vec<Vec<BigInt>> = vec![Vec::new(); ymax + 1];
    for (e, c) in p.terms() {
        let row = &mut rows[e[1] as usize];
        let a = e[0] as usize;
        if row.len() <= a {
            row.resize(a + 1, BigInt::from(0));
        }
        row[a] = c.clone();
    }
    UPoly::from_coeffs(rows.into_iter().map(UPoly::from_coeffs).collect())
}

fn rehomogenize(g: &Bivariate) -> HomPoly {
    let mut terms = Vec::new();
    let mut total = 0u32;
    for (b, row) in g.coeffs().iter().enumerate() {
        for (a, c) in row.coeffs().iter().enumerate() {
            if !GcdDomain::is_zero(c) {
                total = total.max((a + b) as u32);
                terms.push((a as u32, b as u32, c.clone()));
            }
        }
    }
    HomPoly::from_terms(
        terms
            .into_iter()
            .map(|(a, b, c)| ([a, b, total - a - b], c)),
    )
    .expect("rehomogenized terms share a degree")
}
