//! Built-in operators with exact symbols.
//!
//! The catalog is the ground-truth table for the classifier tests: every
//! entry is constructed term by term from its definition, with deterministic
//! coefficient ordering (lexicographic multi-indices).

use crate::multiindex::{multi_indices, MultiIndex};
use crate::rational::{rat, rat_int, Rat, RatMatrix};
use crate::symbol::{full_derivative_symbol, HomogeneousSymbol, SymbolError};
use num_traits::Zero;
use std::collections::BTreeMap;

pub const CATALOG_NAMES: [&str; 8] = [
    "gradient",
    "higher_gradient",
    "laplacian",
    "wirtinger",
    "divcurl",
    "sym_gradient",
    "tracefree_sym_gradient",
    "escnotcell",
];

/// Builds the named operator at ambient dimension `n`; `k` selects the order
/// where the family has one (`higher_gradient`, `escnotcell`).
pub fn catalog(name: &str, n: usize, k: Option<u32>) -> Result<HomogeneousSymbol, SymbolError> {
    let unsupported = |reason: &str| SymbolError::Unsupported {
        name: name.to_string(),
        reason: reason.to_string(),
    };
    match name {
        "gradient" => {
            if n < 1 {
                return Err(unsupported("needs n ≥ 1"));
            }
            reject_order(name, k, None)?;
            let terms = (0..n)
                .map(|i| {
                    let mut m = RatMatrix::zeros(n, 1);
                    *m.at_mut(i, 0) = rat_int(1);
                    (MultiIndex::unit(n, i), m)
                })
                .collect();
            Ok(HomogeneousSymbol::new(n, 1, 1, n, terms)?.named("gradient"))
        }
        "higher_gradient" => {
            let k = k.ok_or_else(|| unsupported("needs an explicit order k"))?;
            if k < 1 {
                return Err(unsupported("needs k ≥ 1"));
            }
            Ok(full_derivative_symbol(n, k, 1).named(format!("higher_gradient_k{k}")))
        }
        "laplacian" => {
            reject_order(name, k, Some(2))?;
            let terms = (0..n)
                .map(|i| {
                    let mut alpha = vec![0u32; n];
                    alpha[i] = 2;
                    let mut m = RatMatrix::zeros(1, 1);
                    *m.at_mut(0, 0) = rat_int(-1);
                    (MultiIndex::new(alpha), m)
                })
                .collect();
            Ok(HomogeneousSymbol::new(n, 2, 1, 1, terms)?.named("laplacian"))
        }
        "wirtinger" => {
            if n != 2 {
                return Err(unsupported("the Wirtinger derivative lives on ℝ² ≅ ℂ"));
            }
            reject_order(name, k, Some(1))?;
            // ∂̄ = ½(∂₁ + i∂₂) on u₁ + iu₂, written as a real 2×2 system
            let a1 = RatMatrix::from_fn(2, 2, |r, c| {
                if r == c {
                    rat(1, 2)
                } else {
                    Rat::zero()
                }
            });
            let a2 = RatMatrix::from_fn(2, 2, |r, c| match (r, c) {
                (0, 1) => rat(-1, 2),
                (1, 0) => rat(1, 2),
                _ => Rat::zero(),
            });
            let terms = vec![(MultiIndex::unit(2, 0), a1), (MultiIndex::unit(2, 1), a2)];
            Ok(HomogeneousSymbol::new(2, 1, 2, 2, terms)?.named("wirtinger"))
        }
        "divcurl" => {
            if n != 2 {
                return Err(unsupported("the (div, curl) pair is the n = 2 operator"));
            }
            reject_order(name, k, Some(1))?;
            // u ↦ (∂₁u₁ + ∂₂u₂, −∂₂u₁ + ∂₁u₂), symbol [[ξ₁, ξ₂], [−ξ₂, ξ₁]]
            let a1 = RatMatrix::from_i64_rows(&[&[1, 0], &[0, 1]]);
            let a2 = RatMatrix::from_i64_rows(&[&[0, 1], &[-1, 0]]);
            let terms = vec![(MultiIndex::unit(2, 0), a1), (MultiIndex::unit(2, 1), a2)];
            Ok(HomogeneousSymbol::new(2, 1, 2, 2, terms)?.named("divcurl"))
        }
        "sym_gradient" => {
            if n < 2 {
                return Err(unsupported("needs n ≥ 2"));
            }
            reject_order(name, k, Some(1))?;
            Ok(sym_gradient_like(n, false)?.named("sym_gradient"))
        }
        "tracefree_sym_gradient" => {
            if n < 2 {
                return Err(unsupported("needs n ≥ 2"));
            }
            reject_order(name, k, Some(1))?;
            Ok(sym_gradient_like(n, true)?.named("tracefree_sym_gradient"))
        }
        "escnotcell" => {
            let k = k.unwrap_or(2);
            escnotcell(n, k, 2)
        }
        other => Err(SymbolError::UnknownOperator(other.to_string())),
    }
}

fn reject_order(name: &str, k: Option<u32>, fixed: Option<u32>) -> Result<(), SymbolError> {
    match (k, fixed) {
        (None, _) => Ok(()),
        (Some(k), Some(f)) if k == f => Ok(()),
        (Some(1), None) => Ok(()),
        (Some(k), _) => Err(SymbolError::Unsupported {
            name: name.to_string(),
            reason: format!("order k = {k} is not available for this operator"),
        }),
    }
}

/// E u = ½(Du + Duᵀ), optionally with the trace removed:
/// E^D u = E u − (div u / n) Id. Codomain stored in the lexicographic
/// order-2 multi-index basis with multiplicities as Gram weights.
fn sym_gradient_like(n: usize, trace_free: bool) -> Result<HomogeneousSymbol, SymbolError> {
    let basis = multi_indices(n, 2);
    let dim_w = basis.len();
    let w_weights: Vec<u64> = basis.iter().map(|b| b.multiplicity()).collect();
    let slot = |i: usize, j: usize| -> usize {
        let mut alpha = vec![0u32; n];
        alpha[i] += 1;
        alpha[j] += 1;
        basis.binary_search(&MultiIndex::new(alpha)).expect("slot exists")
    };
    let mut terms = Vec::new();
    for m in 0..n {
        let mut mat = RatMatrix::zeros(dim_w, n);
        for j in 0..n {
            // coefficient of ξ_m v_j in E_{ab} = ½(ξ_a v_b + ξ_b v_a)
            if m == j {
                *mat.at_mut(slot(m, m), j) += rat_int(1);
            } else {
                *mat.at_mut(slot(m.min(j), m.max(j)), j) += rat(1, 2);
            }
            if trace_free && m == j {
                // subtract (ξ·v)/n from each diagonal slot
                for d in 0..n {
                    *mat.at_mut(slot(d, d), j) -= rat(1, n as i64);
                }
            }
        }
        terms.push((MultiIndex::unit(n, m), mat));
    }
    HomogeneousSymbol::with_weights(n, 1, n, dim_w, terms, vec![1; n], w_weights)
}

/// The elliptic, strongly cancelling, non-ℂ-elliptic family: D^{k−1} composed
/// with the first-order system
///   u ↦ (∂₁u₁ + ∂₂u₂, ∂₂u₁ − ∂₁u₂, {∂ᵢu_j : i ≥ 3, 1 ≤ j ≤ N}).
/// The plane-wave (1, i, 0, …) ⊗ (1, i, 0, …) stays in the complex kernel,
/// while the ∂ᵢ rows restore real injectivity off the ξ₁ξ₂-plane.
pub fn escnotcell(n: usize, k: u32, cap_n: usize) -> Result<HomogeneousSymbol, SymbolError> {
    let unsupported = |reason: String| SymbolError::Unsupported {
        name: "escnotcell".to_string(),
        reason,
    };
    if n < 2 || cap_n < 2 {
        return Err(unsupported(format!("needs n ≥ 2 and N ≥ 2, got n = {n}, N = {cap_n}")));
    }
    if k < 2 {
        return Err(unsupported(format!(
            "needs k ≥ 2 (got k = {k}); at k = 1 the first-order block is not cancelling"
        )));
    }
    let extra = (n - 2) * cap_n;
    let dim_w1 = 2 + extra;
    let mut first_terms: Vec<(MultiIndex, RatMatrix)> = Vec::new();
    for m in 0..n {
        let mut mat = RatMatrix::zeros(dim_w1, cap_n);
        match m {
            0 => {
                *mat.at_mut(0, 0) = rat_int(1); // ∂₁u₁ in row 0
                *mat.at_mut(1, 1) = rat_int(-1); // −∂₁u₂ in row 1
            }
            1 => {
                *mat.at_mut(0, 1) = rat_int(1); // ∂₂u₂ in row 0
                *mat.at_mut(1, 0) = rat_int(1); // ∂₂u₁ in row 1
            }
            _ => {
                for j in 0..cap_n {
                    *mat.at_mut(2 + (m - 2) * cap_n + j, j) = rat_int(1);
                }
            }
        }
        if !mat.is_zero() {
            first_terms.push((MultiIndex::unit(n, m), mat));
        }
    }
    let first = HomogeneousSymbol::new(n, 1, cap_n, dim_w1, first_terms)?;
    let composed = compose_with_derivative(&first, k - 1)?;
    Ok(composed.named(format!("escnotcell_n{n}_k{k}_N{cap_n}")))
}

/// Symbol of D^l ∘ A: output slots (w, β) with |β| = l, weighted by the
/// symmetric multiplicity of β times the weight of w.
pub fn compose_with_derivative(
    a: &HomogeneousSymbol,
    l: u32,
) -> Result<HomogeneousSymbol, SymbolError> {
    if l == 0 {
        return Ok(a.clone());
    }
    let n = a.n();
    let basis = multi_indices(n, l);
    let slots = basis.len();
    let dim_w = a.dim_w() * slots;
    let mut w_weights = vec![1u64; dim_w];
    for w in 0..a.dim_w() {
        for (pos, beta) in basis.iter().enumerate() {
            w_weights[w * slots + pos] = a.w_weights()[w] * beta.multiplicity();
        }
    }
    let mut terms: BTreeMap<MultiIndex, RatMatrix> = BTreeMap::new();
    for (alpha, mat) in a.terms() {
        for (pos, beta) in basis.iter().enumerate() {
            let delta = alpha.add(beta);
            let entry = terms
                .entry(delta)
                .or_insert_with(|| RatMatrix::zeros(dim_w, a.dim_v()));
            for w in 0..a.dim_w() {
                for v in 0..a.dim_v() {
                    if !mat.at(w, v).is_zero() {
                        *entry.at_mut(w * slots + pos, v) += mat.at(w, v);
                    }
                }
            }
        }
    }
    HomogeneousSymbol::with_weights(
        n,
        a.order() + l,
        a.dim_v(),
        dim_w,
        terms.into_iter().collect(),
        a.v_weights().to_vec(),
        w_weights,
    )
}

/// ∂₁ on scalar maps of ℝⁿ: the textbook non-elliptic example. Not part of
/// the named catalog; used by the blow-up studies.
pub fn partial_derivative(n: usize, axis: usize) -> HomogeneousSymbol {
    assert!(axis < n);
    let mut m = RatMatrix::zeros(1, 1);
    *m.at_mut(0, 0) = rat_int(1);
    HomogeneousSymbol::new(n, 1, 1, 1, vec![(MultiIndex::unit(n, axis), m)])
        .expect("well-formed")
        .named(format!("partial_{}", axis + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn catalog_names_all_build() {
        for name in CATALOG_NAMES {
            let n = if name == "escnotcell" { 3 } else { 2 };
            let k = match name {
                "higher_gradient" => Some(3),
                "escnotcell" => Some(2),
                _ => None,
            };
            let sym = catalog(name, n, k).unwrap();
            assert!(sym.name().is_some());
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(catalog("biharmonic", 2, None), Err(SymbolError::UnknownOperator(_))));
    }

    #[test]
    fn wirtinger_needs_n2() {
        assert!(matches!(catalog("wirtinger", 3, None), Err(SymbolError::Unsupported { .. })));
    }

    #[test]
    fn sym_gradient_dims() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        assert_eq!((e.dim_w(), e.dim_v(), e.order()), (3, 2, 1));
        let e3 = catalog("sym_gradient", 3, None).unwrap();
        assert_eq!((e3.dim_w(), e3.dim_v()), (6, 3));
    }

    #[test]
    fn laplacian_r3_symbol_values() {
        let l = catalog("laplacian", 3, None).unwrap();
        let m = l.eval_real(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m[(0, 0)], -14.0);
    }

    #[test]
    fn tracefree_sym_gradient_images_are_trace_free() {
        let ed = catalog("tracefree_sym_gradient", 3, None).unwrap();
        let m = ed.eval_real(&[0.3, -0.9, 0.5]).unwrap();
        let basis = multi_indices(3, 2);
        for v in 0..3 {
            let mut trace = 0.0;
            for (pos, beta) in basis.iter().enumerate() {
                if beta.entries().contains(&2) {
                    trace += m[(pos, v)];
                }
            }
            assert!(trace.abs() < 1e-14);
        }
    }

    #[test]
    fn escnotcell_shape_and_complex_kernel() {
        let a = escnotcell(3, 2, 2).unwrap();
        assert_eq!(a.n(), 3);
        assert_eq!(a.order(), 2);
        assert_eq!(a.dim_v(), 2);
        assert_eq!(a.dim_w(), 12); // (2 + 1·2) rows × dim Sym¹(ℝ³) = 4 × 3
        // complex kernel vector (1, i) at ξ = (1, i, 0)
        let xi = [Complex64::ONE, Complex64::I, Complex64::ZERO];
        let m = a.eval_complex(&xi).unwrap();
        let img: Vec<Complex64> =
            (0..m.nrows()).map(|r| m[(r, 0)] + m[(r, 1)] * Complex64::I).collect();
        assert!(img.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn escnotcell_real_injectivity_spot_checks() {
        let a = escnotcell(3, 2, 2).unwrap();
        for xi in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.5, -0.5, 0.7]] {
            let m = a.eval_weighted(&xi).unwrap();
            let smin = m.svd(false, false).singular_values.min();
            assert!(smin > 0.1, "σ_min({xi:?}) = {smin}");
        }
    }

    #[test]
    fn higher_gradient_is_full_derivative() {
        let d2 = catalog("higher_gradient", 2, Some(2)).unwrap();
        assert_eq!(d2.dim_w(), 3);
        let m = d2.eval_real(&[2.0, 1.0]).unwrap();
        // slots lex: (0,2), (1,1), (2,0) → ξ₂², ξ₁ξ₂, ξ₁²
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(1, 0)], 2.0);
        assert_eq!(m[(2, 0)], 4.0);
    }

    #[test]
    fn compose_matches_pointwise_product() {
        let w = catalog("wirtinger", 2, None).unwrap();
        let c = compose_with_derivative(&w, 2).unwrap();
        assert_eq!(c.order(), 3);
        let xi = [0.7, -1.3];
        let a = w.eval_real(&xi).unwrap();
        let m = c.eval_real(&xi).unwrap();
        let basis = multi_indices(2, 2);
        for (pos, beta) in basis.iter().enumerate() {
            let mono = beta.monomial_f64(&xi);
            for r in 0..2 {
                for v in 0..2 {
                    let got = m[(r * basis.len() + pos, v)];
                    assert!((got - mono * a[(r, v)]).abs() < 1e-12);
                }
            }
        }
    }
}
