//! Scalar polynomials in n variables with exact rational coefficients.
//!
//! Just enough ring arithmetic for minor determinants and certificate
//! verification; no simplification beyond collecting like monomials.

use crate::multiindex::MultiIndex;
use crate::rational::{format_rat, rat_to_f64, Rat};
use num_complex::Complex64;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<MultiIndex, Rat>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| format!("{} ξ^{:?}", format_rat(c), a.entries()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn monomial(alpha: MultiIndex, coeff: Rat) -> Self {
        let n = alpha.dim();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(alpha, coeff);
        }
        Self { n, terms }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Rat {
        self.terms.get(alpha).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, coeff: &Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(alpha.clone()).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            // drop cancelled monomials so is_zero stays structural
            self.terms.remove(&alpha);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            out.terms.insert(a.clone(), -c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b), &(ca * cb));
            }
        }
        out
    }

    pub fn eval_rat(&self, xi: &[Rat]) -> Rat {
        assert_eq!(xi.len(), self.n);
        let mut acc = Rat::zero();
        for (a, c) in &self.terms {
            let mut m = c.clone();
            for (x, &p) in xi.iter().zip(a.entries()) {
                for _ in 0..p {
                    m *= x;
                }
            }
            acc += m;
        }
        acc
    }

    pub fn eval_f64(&self, xi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| rat_to_f64(c) * a.monomial_f64(xi))
            .sum()
    }

    pub fn eval_complex(&self, xi: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (a, c) in &self.terms {
            let mut m = Complex64::new(rat_to_f64(c), 0.0);
            for (x, &p) in xi.iter().zip(a.entries()) {
                m *= x.powu(p);
            }
            acc += m;
        }
        acc
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.order()).max()
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion along
/// the first row. Fine for the small symbol dimensions that occur here.
pub fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let size = m.len();
    assert!(size > 0 && m.iter().all(|row| row.len() == size));
    let n = m[0][0].nvars();
    if size == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero(n);
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let cof = entry.mul(&poly_det(&minor));
        if j % 2 == 0 {
            acc = acc.add(&cof);
        } else {
            acc = acc.sub(&cof);
        }
    }
    acc
}
