//! Multi-indices α ∈ ℕ₀ⁿ and the lexicographic symmetric-tensor basis.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Multi-index with a fixed ambient dimension.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "α{:?}", self.0)
    }
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// e_i as a multi-index.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |α| = Σ αᵢ.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// α − β componentwise, or `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.dim(), other.dim());
        let mut out = Vec::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Self(out))
    }

    /// ξ^α for a real vector.
    pub fn monomial_f64(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim());
        let mut acc = 1.0;
        for (x, &a) in xi.iter().zip(&self.0) {
            acc *= x.powi(a as i32);
        }
        acc
    }

    /// Multinomial weight |α|!/α!, the multiplicity of the monomial slot in
    /// the full tensor power.
    pub fn multiplicity(&self) -> u64 {
        let mut result = 1u64;
        let mut seen = 0u64;
        for &a in &self.0 {
            for j in 1..=u64::from(a) {
                seen += 1;
                result = result * seen / j;
            }
        }
        result
    }
}

/// All multi-indices of dimension `n` and order `k`, in lexicographic order
/// of the entry vectors. This is the fixed basis ordering used everywhere.
pub fn multi_indices(n: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fill(&mut out, &mut cur, 0, k);
    out.sort();
    out
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v;
        fill(out, cur, pos + 1, remaining - v);
    }
    cur[pos] = 0;
}

/// dim Sym^k(ℝⁿ) = C(n+k−1, k).
pub fn sym_dim(n: usize, k: u32) -> usize {
    let k = k as usize;
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..k {
        num *= n + i;
        den *= i + 1;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let idx = multi_indices(3, 2);
        assert_eq!(idx.len(), sym_dim(3, 2));
        assert_eq!(idx.len(), 6);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert!(idx.iter().all(|a| a.order() == 2));
        assert_eq!(idx[0], MultiIndex::new(vec![0, 0, 2]));
        assert_eq!(idx[5], MultiIndex::new(vec![2, 0, 0]));
    }

    #[test]
    fn multiplicities_are_multinomials() {
        assert_eq!(MultiIndex::new(vec![2, 0]).multiplicity(), 1);
        assert_eq!(MultiIndex::new(vec![1, 1]).multiplicity(), 2);
        assert_eq!(MultiIndex::new(vec![1, 1, 1]).multiplicity(), 6);
        assert_eq!(MultiIndex::new(vec![2, 1]).multiplicity(), 3);
        assert_eq!(MultiIndex::new(vec![4]).multiplicity(), 1);
    }

    #[test]
    fn monomials_evaluate() {
        let a = MultiIndex::new(vec![2, 1]);
        assert_eq!(a.monomial_f64(&[2.0, 3.0]), 12.0);
        assert_eq!(a.order(), 3);
    }
}
