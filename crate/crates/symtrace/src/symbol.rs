//! Exact representation and evaluation of homogeneous matrix-valued symbols
//! A[ξ] = Σ_{|α|=k} ξ^α A_α with rational coefficient matrices.

use crate::multiindex::{multi_indices, sym_dim, MultiIndex};
use crate::poly::{poly_det, Poly};
use crate::rational::{format_rat, parse_rat, rat_from_f64, rat_to_f64, Rat, RatMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum SymbolError {
    #[error("frequency vector has dimension {actual}, symbol lives on ℝ^{expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("term α = {alpha:?} has |α| = {actual}, symbol order is {expected}")]
    BadTermOrder { alpha: Vec<u32>, expected: u32, actual: u32 },
    #[error("term matrix is {rows}×{cols}, expected {dim_w}×{dim_v}")]
    BadMatrixShape { rows: usize, cols: usize, dim_w: usize, dim_v: usize },
    #[error("symbol has no nonzero term")]
    EmptySymbol,
    #[error("invalid symbol parameters: {0}")]
    Invalid(String),
    #[error("plane basis vectors are linearly dependent")]
    DependentBasis,
    #[error("symbol is near-singular at this frequency: σ_min = {sigma_min:.3e} ≤ tol = {tol:.3e}")]
    NearSingular { sigma_min: f64, tol: f64 },
    #[error("dim W = {dim_w} < dim V = {dim_v}: symbol can never be injective")]
    TooFewRows { dim_v: usize, dim_w: usize },
    #[error("unknown operator name {0:?}")]
    UnknownOperator(String),
    #[error("unsupported combination for {name:?}: {reason}")]
    Unsupported { name: String, reason: String },
    #[error("operator spec parse error: {0}")]
    Parse(String),
}

/// A k-th order homogeneous symbol from V (dim `dim_v`) to W (dim `dim_w`).
///
/// The W basis may carry integer Gram multiplicities (`w_weights`): the inner
/// product on W is ⟨w, w'⟩ = Σ m_i w_i w'_i, so symmetric-tensor codomains in
/// multi-index storage keep their intrinsic Frobenius norm. All singular value
/// and projection computations go through the weighted evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousSymbol {
    n: usize,
    k: u32,
    dim_v: usize,
    dim_w: usize,
    terms: BTreeMap<MultiIndex, RatMatrix>,
    v_weights: Vec<u64>,
    w_weights: Vec<u64>,
    name: Option<String>,
}

impl HomogeneousSymbol {
    pub fn new(
        n: usize,
        k: u32,
        dim_v: usize,
        dim_w: usize,
        terms: Vec<(MultiIndex, RatMatrix)>,
    ) -> Result<Self, SymbolError> {
        Self::with_weights(n, k, dim_v, dim_w, terms, vec![1; dim_v], vec![1; dim_w])
    }

    pub fn with_weights(
        n: usize,
        k: u32,
        dim_v: usize,
        dim_w: usize,
        terms: Vec<(MultiIndex, RatMatrix)>,
        v_weights: Vec<u64>,
        w_weights: Vec<u64>,
    ) -> Result<Self, SymbolError> {
        if n == 0 || k == 0 || dim_v == 0 || dim_w == 0 {
            return Err(SymbolError::Invalid(format!(
                "n = {n}, k = {k}, dim V = {dim_v}, dim W = {dim_w} must all be positive"
            )));
        }
        if v_weights.len() != dim_v || w_weights.len() != dim_w {
            return Err(SymbolError::Invalid("weight vector lengths must match dims".into()));
        }
        if v_weights.iter().chain(&w_weights).any(|&w| w == 0) {
            return Err(SymbolError::Invalid("basis multiplicities must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for (alpha, mat) in terms {
            if alpha.dim() != n {
                return Err(SymbolError::DimensionMismatch { expected: n, actual: alpha.dim() });
            }
            if alpha.order() != k {
                return Err(SymbolError::BadTermOrder {
                    alpha: alpha.entries().to_vec(),
                    expected: k,
                    actual: alpha.order(),
                });
            }
            if mat.rows() != dim_w || mat.cols() != dim_v {
                return Err(SymbolError::BadMatrixShape {
                    rows: mat.rows(),
                    cols: mat.cols(),
                    dim_w,
                    dim_v,
                });
            }
            if !mat.is_zero() {
                map.insert(alpha, mat);
            }
        }
        if map.is_empty() {
            return Err(SymbolError::EmptySymbol);
        }
        Ok(Self { n, k, dim_v, dim_w, terms: map, v_weights, w_weights, name: None })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_w(&self) -> usize {
        self.dim_w
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &RatMatrix)> {
        self.terms.iter()
    }

    pub fn v_weights(&self) -> &[u64] {
        &self.v_weights
    }

    pub fn w_weights(&self) -> &[u64] {
        &self.w_weights
    }

    /// Σ_α ξ^α A_α in raw coordinates.
    pub fn eval_real(&self, xi: &[f64]) -> Result<DMatrix<f64>, SymbolError> {
        if xi.len() != self.n {
            return Err(SymbolError::DimensionMismatch { expected: self.n, actual: xi.len() });
        }
        let mut out = DMatrix::zeros(self.dim_w, self.dim_v);
        for (alpha, mat) in &self.terms {
            let m = alpha.monomial_f64(xi);
            if m == 0.0 {
                continue;
            }
            for r in 0..self.dim_w {
                for c in 0..self.dim_v {
                    out[(r, c)] += m * rat_to_f64(mat.at(r, c));
                }
            }
        }
        Ok(out)
    }

    /// Exact evaluation at a rational frequency.
    pub fn eval_rat(&self, xi: &[Rat]) -> Result<RatMatrix, SymbolError> {
        if xi.len() != self.n {
            return Err(SymbolError::DimensionMismatch { expected: self.n, actual: xi.len() });
        }
        let mut out = RatMatrix::zeros(self.dim_w, self.dim_v);
        for (alpha, mat) in &self.terms {
            let mut m = Rat::one();
            for (x, &p) in xi.iter().zip(alpha.entries()) {
                for _ in 0..p {
                    m *= x;
                }
            }
            if m.is_zero() {
                continue;
            }
            for r in 0..self.dim_w {
                for c in 0..self.dim_v {
                    if !mat.at(r, c).is_zero() {
                        *out.at_mut(r, c) += &m * mat.at(r, c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Σ_α ξ^α A_α with complex monomials; agrees with `eval_real` bitwise on
    /// the real parts when Im ξ = 0.
    pub fn eval_complex(&self, xi: &[Complex64]) -> Result<DMatrix<Complex64>, SymbolError> {
        if xi.len() != self.n {
            return Err(SymbolError::DimensionMismatch { expected: self.n, actual: xi.len() });
        }
        if xi.iter().all(|z| z.im == 0.0) {
            let re: Vec<f64> = xi.iter().map(|z| z.re).collect();
            let real = self.eval_real(&re)?;
            return Ok(real.map(|x| Complex64::new(x, 0.0)));
        }
        let mut out = DMatrix::zeros(self.dim_w, self.dim_v);
        for (alpha, mat) in &self.terms {
            let mut m = Complex64::ONE;
            for (x, &p) in xi.iter().zip(alpha.entries()) {
                m *= x.powu(p);
            }
            for r in 0..self.dim_w {
                for c in 0..self.dim_v {
                    out[(r, c)] += m * rat_to_f64(mat.at(r, c));
                }
            }
        }
        Ok(out)
    }

    /// Evaluation conjugated into the orthonormalized bases:
    /// diag(√m_W) · A[ξ] · diag(1/√m_V). Singular values of this matrix are
    /// the intrinsic singular values of A[ξ] : V → W.
    pub fn eval_weighted(&self, xi: &[f64]) -> Result<DMatrix<f64>, SymbolError> {
        let mut m = self.eval_real(xi)?;
        self.apply_weighting(&mut m);
        Ok(m)
    }

    pub fn eval_weighted_complex(
        &self,
        xi: &[Complex64],
    ) -> Result<DMatrix<Complex64>, SymbolError> {
        let mut m = self.eval_complex(xi)?;
        for r in 0..self.dim_w {
            let s = (self.w_weights[r] as f64).sqrt();
            for c in 0..self.dim_v {
                m[(r, c)] *= s;
            }
        }
        for c in 0..self.dim_v {
            let s = (self.v_weights[c] as f64).sqrt();
            for r in 0..self.dim_w {
                m[(r, c)] /= s;
            }
        }
        Ok(m)
    }

    fn apply_weighting(&self, m: &mut DMatrix<f64>) {
        for r in 0..self.dim_w {
            let s = (self.w_weights[r] as f64).sqrt();
            for c in 0..self.dim_v {
                m[(r, c)] *= s;
            }
        }
        for c in 0..self.dim_v {
            let s = (self.v_weights[c] as f64).sqrt();
            for r in 0..self.dim_w {
                m[(r, c)] /= s;
            }
        }
    }

    /// Entry (w, v) as a scalar polynomial in ξ.
    pub fn entry_poly(&self, w: usize, v: usize) -> Poly {
        let mut p = Poly::zero(self.n);
        for (alpha, mat) in &self.terms {
            p.add_term(alpha.clone(), mat.at(w, v));
        }
        p
    }

    /// Exact restriction Ã[s,t] = A[s e₁ + t e₂] to the plane spanned by two
    /// rational vectors. The returned symbol has n = 2 and inherits V, W and
    /// their weights.
    pub fn restrict_to_plane(
        &self,
        e1: &[Rat],
        e2: &[Rat],
    ) -> Result<HomogeneousSymbol, SymbolError> {
        if e1.len() != self.n || e2.len() != self.n {
            return Err(SymbolError::DimensionMismatch {
                expected: self.n,
                actual: e1.len().max(e2.len()),
            });
        }
        // Numeric rank-2 check, relative to the larger vector.
        let f1: Vec<f64> = e1.iter().map(rat_to_f64).collect();
        let f2: Vec<f64> = e2.iter().map(rat_to_f64).collect();
        let g = DMatrix::from_fn(2, self.n, |r, c| if r == 0 { f1[c] } else { f2[c] });
        let svals = g.svd(false, false).singular_values;
        let smax = svals.max();
        if smax == 0.0 || svals.min() <= 1e-9 * smax {
            return Err(SymbolError::DependentBasis);
        }
        // Expand (s e₁ + t e₂)^α = Π_i (s e₁ᵢ + t e₂ᵢ)^{αᵢ} exactly; collect
        // by the power of s.
        let mut new_terms: BTreeMap<MultiIndex, RatMatrix> = BTreeMap::new();
        for (alpha, mat) in &self.terms {
            // coeffs_by_s_power[p] = coefficient of s^p t^{k−p} in ξ^α
            let mut coeffs = vec![Rat::zero(); self.k as usize + 1];
            coeffs[0] = Rat::one();
            let mut cur_deg = 0usize;
            for (i, &a) in alpha.entries().iter().enumerate() {
                for _ in 0..a {
                    let mut next = vec![Rat::zero(); self.k as usize + 1];
                    for (p, c) in coeffs.iter().enumerate().take(cur_deg + 1) {
                        if c.is_zero() {
                            continue;
                        }
                        next[p + 1] += c * &e1[i];
                        next[p] += c * &e2[i];
                    }
                    coeffs = next;
                    cur_deg += 1;
                }
            }
            for (p, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let beta = MultiIndex::new(vec![p as u32, self.k - p as u32]);
                let scaled = mat.scale(c);
                new_terms
                    .entry(beta)
                    .and_modify(|m| *m = m.add(&scaled))
                    .or_insert(scaled);
            }
        }
        let terms: Vec<_> = new_terms.into_iter().collect();
        Self::with_weights(
            2,
            self.k,
            self.dim_v,
            self.dim_w,
            terms,
            self.v_weights.clone(),
            self.w_weights.clone(),
        )
    }

    /// Restriction along floating-point basis vectors; the floats are
    /// converted losslessly to rationals, so the expansion itself is exact.
    pub fn restrict_to_plane_f64(
        &self,
        e1: &[f64],
        e2: &[f64],
    ) -> Result<HomogeneousSymbol, SymbolError> {
        let conv = |v: &[f64]| -> Result<Vec<Rat>, SymbolError> {
            v.iter()
                .map(|&x| rat_from_f64(x).ok_or(SymbolError::Invalid(format!("non-finite {x}"))))
                .collect()
        };
        self.restrict_to_plane(&conv(e1)?, &conv(e2)?)
    }

    /// Left pseudoinverse A†[ξ] and the orthogonal projector A[ξ]A†[ξ] onto
    /// im A[ξ], both in the orthonormalized bases.
    pub fn pseudo_inverse_eval(
        &self,
        xi: &[f64],
        tol: f64,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>), SymbolError> {
        let a = self.eval_weighted(xi)?;
        let svd = a.clone().svd(true, true);
        let smin = svd.singular_values.min();
        if smin <= tol {
            return Err(SymbolError::NearSingular { sigma_min: smin, tol });
        }
        let pinv = svd.pseudo_inverse(0.0).map_err(|e| SymbolError::Invalid(e.to_string()))?;
        let projector = &a * &pinv;
        Ok((pinv, projector))
    }

    /// Determinants of every dimV×dimV row selection of A[ξ], as exact scalar
    /// polynomials of degree k·dimV. There are C(dimW, dimV) of them.
    pub fn minor_polynomials(&self) -> Result<Vec<Poly>, SymbolError> {
        if self.dim_w < self.dim_v {
            return Err(SymbolError::TooFewRows { dim_v: self.dim_v, dim_w: self.dim_w });
        }
        let poly_rows: Vec<Vec<Poly>> = (0..self.dim_w)
            .map(|w| (0..self.dim_v).map(|v| self.entry_poly(w, v)).collect())
            .collect();
        let mut out = Vec::new();
        let mut selection: Vec<usize> = (0..self.dim_v).collect();
        loop {
            let m: Vec<Vec<Poly>> = selection.iter().map(|&w| poly_rows[w].clone()).collect();
            out.push(poly_det(&m));
            // next combination in lexicographic order
            let mut i = self.dim_v;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if selection[i] != i + self.dim_w - self.dim_v {
                    break;
                }
                if i == 0 {
                    return Ok(out);
                }
            }
            selection[i] += 1;
            for j in i + 1..self.dim_v {
                selection[j] = selection[j - 1] + 1;
            }
        }
    }

    /// Symbol scaled by a rational constant.
    pub fn scaled(&self, c: &Rat) -> Result<HomogeneousSymbol, SymbolError> {
        if c.is_zero() {
            return Err(SymbolError::EmptySymbol);
        }
        let terms = self.terms.iter().map(|(a, m)| (a.clone(), m.scale(c))).collect();
        let mut s = Self::with_weights(
            self.n,
            self.k,
            self.dim_v,
            self.dim_w,
            terms,
            self.v_weights.clone(),
            self.w_weights.clone(),
        )?;
        s.name = self.name.clone();
        Ok(s)
    }

    /// Pre-converted floating-point form for hot evaluation loops.
    pub fn compile(&self) -> CompiledSymbol {
        let sqrt_w: Vec<f64> = self.w_weights.iter().map(|&w| (w as f64).sqrt()).collect();
        let inv_sqrt_v: Vec<f64> =
            self.v_weights.iter().map(|&w| 1.0 / (w as f64).sqrt()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(alpha, mat)| {
                let m = DMatrix::from_fn(self.dim_w, self.dim_v, |r, c| {
                    sqrt_w[r] * rat_to_f64(mat.at(r, c)) * inv_sqrt_v[c]
                });
                (alpha.entries().to_vec(), m)
            })
            .collect();
        CompiledSymbol { n: self.n, k: self.k, dim_v: self.dim_v, dim_w: self.dim_w, terms }
    }
}

/// Floating-point snapshot of a symbol in the orthonormalized bases.
#[derive(Clone, Debug)]
pub struct CompiledSymbol {
    pub n: usize,
    pub k: u32,
    pub dim_v: usize,
    pub dim_w: usize,
    terms: Vec<(Vec<u32>, DMatrix<f64>)>,
}

impl CompiledSymbol {
    pub fn eval(&self, xi: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim_w, self.dim_v);
        for (alpha, mat) in &self.terms {
            let mut m = 1.0;
            for (x, &p) in xi.iter().zip(alpha) {
                m *= x.powi(p as i32);
            }
            if m != 0.0 {
                out += mat * m;
            }
        }
        out
    }

    pub fn eval_complex(&self, eta: &[f64], nu: &[f64]) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim_w, self.dim_v);
        for (alpha, mat) in &self.terms {
            let mut m = Complex64::ONE;
            for (i, &p) in alpha.iter().enumerate() {
                m *= Complex64::new(eta[i], nu[i]).powu(p);
            }
            if m != Complex64::ZERO {
                for r in 0..self.dim_w {
                    for c in 0..self.dim_v {
                        out[(r, c)] += m * mat[(r, c)];
                    }
                }
            }
        }
        out
    }

    /// Smallest singular value of the weighted symbol at a real frequency.
    pub fn sigma_min(&self, xi: &[f64]) -> f64 {
        self.eval(xi).svd(false, false).singular_values.min()
    }

    /// Largest singular value at a real frequency.
    pub fn sigma_max(&self, xi: &[f64]) -> f64 {
        self.eval(xi).svd(false, false).singular_values.max()
    }

    /// Smallest singular value of the weighted symbol at η + iν.
    pub fn sigma_min_complex(&self, eta: &[f64], nu: &[f64]) -> f64 {
        self.eval_complex(eta, nu).svd(false, false).singular_values.min()
    }
}

/// The symbol of D^l acting on ℝ^{dim_v}-valued maps: output slot (i, β) with
/// |β| = l carries ∂^β uᵢ; multiplicities fold the symmetric-tensor norm into
/// the W inner product.
pub fn full_derivative_symbol(n: usize, l: u32, dim_v: usize) -> HomogeneousSymbol {
    assert!(l >= 1);
    let basis = multi_indices(n, l);
    let s = basis.len();
    let dim_w = dim_v * s;
    let mut w_weights = vec![1u64; dim_w];
    for i in 0..dim_v {
        for (pos, beta) in basis.iter().enumerate() {
            w_weights[i * s + pos] = beta.multiplicity();
        }
    }
    let terms = basis
        .iter()
        .enumerate()
        .map(|(pos, beta)| {
            let mut m = RatMatrix::zeros(dim_w, dim_v);
            for i in 0..dim_v {
                *m.at_mut(i * s + pos, i) = Rat::one();
            }
            (beta.clone(), m)
        })
        .collect();
    HomogeneousSymbol::with_weights(n, l, dim_v, dim_w, terms, vec![1; dim_v], w_weights)
        .expect("derivative symbol is well-formed")
        .named(format!("D^{l}"))
}

/// dim Sym^l for the ambient dimension of a symbol; re-exported for layout
/// computations on derivative tensors.
pub fn derivative_slots(n: usize, l: u32) -> usize {
    sym_dim(n, l)
}

// ---------------------------------------------------------------------------
// Operator spec files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermDoc {
    alpha: Vec<u32>,
    matrix: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct SymbolDoc {
    schema: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    n: usize,
    k: u32,
    #[serde(rename = "dimV")]
    dim_v: usize,
    #[serde(rename = "dimW")]
    dim_w: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_weights: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_weights: Option<Vec<u64>>,
    terms: Vec<TermDoc>,
}

pub const OPERATOR_SPEC_SCHEMA: &str = "operator-spec/v1";

impl HomogeneousSymbol {
    /// Serializes to the operator spec document (JSON text, rational entries
    /// as "p/q" strings).
    pub fn to_spec_string(&self) -> String {
        let doc = SymbolDoc {
            schema: OPERATOR_SPEC_SCHEMA.to_string(),
            name: self.name.clone(),
            n: self.n,
            k: self.k,
            dim_v: self.dim_v,
            dim_w: self.dim_w,
            v_weights: Some(self.v_weights.clone()),
            w_weights: Some(self.w_weights.clone()),
            terms: self
                .terms
                .iter()
                .map(|(alpha, mat)| TermDoc {
                    alpha: alpha.entries().to_vec(),
                    matrix: (0..self.dim_w)
                        .map(|r| (0..self.dim_v).map(|c| format_rat(mat.at(r, c))).collect())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("symbol doc serializes")
    }

    pub fn from_spec_string(text: &str) -> Result<Self, SymbolError> {
        let doc: SymbolDoc =
            serde_json::from_str(text).map_err(|e| SymbolError::Parse(e.to_string()))?;
        if doc.schema != OPERATOR_SPEC_SCHEMA {
            return Err(SymbolError::Parse(format!(
                "unsupported schema {:?}, expected {OPERATOR_SPEC_SCHEMA:?}",
                doc.schema
            )));
        }
        let mut terms = Vec::new();
        for term in &doc.terms {
            let alpha = MultiIndex::new(term.alpha.clone());
            if alpha.order() != doc.k {
                return Err(SymbolError::BadTermOrder {
                    alpha: term.alpha.clone(),
                    expected: doc.k,
                    actual: alpha.order(),
                });
            }
            if term.matrix.len() != doc.dim_w
                || term.matrix.iter().any(|row| row.len() != doc.dim_v)
            {
                return Err(SymbolError::Parse(format!(
                    "term α = {:?}: matrix must be dimW×dimV = {}×{}",
                    term.alpha, doc.dim_w, doc.dim_v
                )));
            }
            let mut m = RatMatrix::zeros(doc.dim_w, doc.dim_v);
            for (r, row) in term.matrix.iter().enumerate() {
                for (c, s) in row.iter().enumerate() {
                    *m.at_mut(r, c) = parse_rat(s).map_err(SymbolError::Parse)?;
                }
            }
            terms.push((alpha, m));
        }
        let v_weights = doc.v_weights.unwrap_or_else(|| vec![1; doc.dim_v]);
        let w_weights = doc.w_weights.unwrap_or_else(|| vec![1; doc.dim_w]);
        let mut sym =
            Self::with_weights(doc.n, doc.k, doc.dim_v, doc.dim_w, terms, v_weights, w_weights)?;
        sym.name = doc.name;
        Ok(sym)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{rat, rat_int};

    fn gradient2() -> HomogeneousSymbol {
        catalog::catalog("gradient", 2, None).unwrap()
    }

    #[test]
    fn eval_real_gradient() {
        // symbol of D is ξ itself
        let g = gradient2();
        let m = g.eval_real(&[1.0, 0.0]).unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m.ncols(), 1);
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(1, 0)], 0.0);
    }

    #[test]
    fn eval_real_sym_gradient_entry() {
        // sym(ξ⊗v) for ξ = e₁, v = e₂ has 1/2 in the off-diagonal slot
        let e = catalog::catalog("sym_gradient", 2, None).unwrap();
        let m = e.eval_real(&[1.0, 0.0]).unwrap();
        // W basis order for n = 2: (0,2) -> x₂², (1,1) -> x₁x₂, (2,0) -> x₁²
        let v = nalgebra::DVector::from_vec(vec![0.0, 1.0]);
        let w = m * v;
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 0.5);
        assert_eq!(w[2], 0.0);
    }

    #[test]
    fn eval_real_laplacian_unit_vector() {
        let l = catalog::catalog("laplacian", 2, None).unwrap();
        let m = l.eval_real(&[0.6, 0.8]).unwrap();
        assert!((m[(0, 0)] - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn eval_dimension_mismatch_is_structured() {
        let g = gradient2();
        match g.eval_real(&[1.0, 0.0, 0.0]) {
            Err(SymbolError::DimensionMismatch { expected: 2, actual: 3 }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn eval_complex_wirtinger_singular_at_one_i() {
        // ½(ξ₁ + iξ₂) = 0 at ξ = (1, i): the real 2×2 form becomes rank one
        // with kernel (1, −i)
        let w = catalog::catalog("wirtinger", 2, None).unwrap();
        let m = w.eval_complex(&[Complex64::ONE, Complex64::I]).unwrap();
        let v = [Complex64::ONE, -Complex64::I];
        for r in 0..2 {
            let img = m[(r, 0)] * v[0] + m[(r, 1)] * v[1];
            assert!(img.norm() < 1e-15);
        }
        let smin = m.svd(false, false).singular_values.min();
        assert!(smin < 1e-15);
    }

    #[test]
    fn eval_complex_laplacian_vanishes_at_one_i() {
        let l = catalog::catalog("laplacian", 2, None).unwrap();
        let m = l.eval_complex(&[Complex64::ONE, Complex64::I]).unwrap();
        assert!(m[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn eval_complex_gradient_nonzero_kernel_free() {
        let g = gradient2();
        let m = g.eval_complex(&[Complex64::ONE, Complex64::I]).unwrap();
        assert_eq!(m[(0, 0)], Complex64::ONE);
        assert_eq!(m[(1, 0)], Complex64::I);
    }

    #[test]
    fn eval_complex_real_part_matches_eval_real_bitwise() {
        let e = catalog::catalog("sym_gradient", 3, None).unwrap();
        let xi = [0.3, -1.7, 2.4];
        let zi: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let a = e.eval_real(&xi).unwrap();
        let b = e.eval_complex(&zi).unwrap();
        for r in 0..a.nrows() {
            for c in 0..a.ncols() {
                assert_eq!(a[(r, c)], b[(r, c)].re);
                assert_eq!(b[(r, c)].im, 0.0);
            }
        }
    }

    #[test]
    fn restrict_gradient_r3_to_coordinate_plane() {
        let g = catalog::catalog("gradient", 3, None).unwrap();
        let e1 = vec![rat_int(1), rat_int(0), rat_int(0)];
        let e2 = vec![rat_int(0), rat_int(1), rat_int(0)];
        let r = g.restrict_to_plane(&e1, &e2).unwrap();
        assert_eq!(r.n(), 2);
        let m = r.eval_real(&[2.0, 3.0]).unwrap();
        assert_eq!(m[(0, 0)], 2.0);
        assert_eq!(m[(1, 0)], 3.0);
        assert_eq!(m[(2, 0)], 0.0);
    }

    #[test]
    fn restrict_laplacian_r3_to_e1_e3() {
        let l = catalog::catalog("laplacian", 3, None).unwrap();
        let e1 = vec![rat_int(1), rat_int(0), rat_int(0)];
        let e3 = vec![rat_int(0), rat_int(0), rat_int(1)];
        let r = l.restrict_to_plane(&e1, &e3).unwrap();
        let m = r.eval_real(&[2.0, 3.0]).unwrap();
        assert!((m[(0, 0)] - (-13.0)).abs() < 1e-12);
    }

    #[test]
    fn restrict_sym_gradient_r3_acting_on_e3() {
        // hand oracle: sym(e₁⊗e₃) has entries 1/2 at (1,3) and (3,1)
        let e = catalog::catalog("sym_gradient", 3, None).unwrap();
        let e1 = vec![rat_int(1), rat_int(0), rat_int(0)];
        let e2 = vec![rat_int(0), rat_int(1), rat_int(0)];
        let r = e.restrict_to_plane(&e1, &e2).unwrap();
        let m = r.eval_rat(&[rat_int(1), rat_int(0)]).unwrap();
        // v = e₃; expect coefficient 1/2 in the (1,3) symmetric slot only
        let basis = multi_indices(3, 2);
        let mut expect = vec![Rat::zero(); basis.len()];
        for (pos, beta) in basis.iter().enumerate() {
            if beta.entries() == [1, 0, 1] {
                expect[pos] = rat(1, 2);
            }
        }
        for (pos, want) in expect.iter().enumerate() {
            assert_eq!(m.at(pos, 2), want, "slot {:?}", basis[pos]);
        }
    }

    #[test]
    fn restrict_rejects_dependent_basis() {
        let g = catalog::catalog("gradient", 3, None).unwrap();
        let e1 = vec![rat_int(1), rat_int(2), rat_int(0)];
        let e2 = vec![rat_int(2), rat_int(4), rat_int(0)];
        assert!(matches!(g.restrict_to_plane(&e1, &e2), Err(SymbolError::DependentBasis)));
    }

    #[test]
    fn pseudo_inverse_gradient() {
        let g = gradient2();
        let (pinv, proj) = g.pseudo_inverse_eval(&[1.0, 0.0], 1e-9).unwrap();
        assert!((pinv[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(pinv[(0, 1)].abs() < 1e-12);
        assert!((proj[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(proj[(1, 1)].abs() < 1e-12);
    }

    #[test]
    fn pseudo_inverse_wirtinger_is_scaled_rotation() {
        let w = catalog::catalog("wirtinger", 2, None).unwrap();
        let (pinv, proj) = w.pseudo_inverse_eval(&[0.0, 1.0], 1e-9).unwrap();
        // A[e₂] = ½ rotation by 90°, so A† = 2 · rotation by −90°
        let expect = [[0.0, 2.0], [-2.0, 0.0]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((pinv[(r, c)] - expect[r][c]).abs() < 1e-12);
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                let id = if r == c { 1.0 } else { 0.0 };
                assert!((proj[(r, c)] - id).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pseudo_inverse_rejects_singular_frequency() {
        let g = gradient2();
        match g.pseudo_inverse_eval(&[0.0, 0.0], 1e-9) {
            Err(SymbolError::NearSingular { sigma_min, .. }) => assert!(sigma_min <= 1e-9),
            other => panic!("expected near-singular error, got {other:?}"),
        }
    }

    #[test]
    fn minors_gradient() {
        let g = gradient2();
        let minors = g.minor_polynomials().unwrap();
        assert_eq!(minors.len(), 2);
        let vals: Vec<f64> = minors.iter().map(|p| p.eval_f64(&[3.0, 5.0])).collect();
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![3.0, 5.0]);
    }

    #[test]
    fn minors_wirtinger_single_quarter_norm() {
        // hand-expanded det of ½[[ξ₁, −ξ₂], [ξ₂, ξ₁]] = ¼(ξ₁² + ξ₂²)
        let w = catalog::catalog("wirtinger", 2, None).unwrap();
        let minors = w.minor_polynomials().unwrap();
        assert_eq!(minors.len(), 1);
        assert_eq!(minors[0].coeff(&MultiIndex::new(vec![2, 0])), rat(1, 4));
        assert_eq!(minors[0].coeff(&MultiIndex::new(vec![0, 2])), rat(1, 4));
        assert_eq!(minors[0].coeff(&MultiIndex::new(vec![1, 1])), rat_int(0));
    }

    #[test]
    fn minors_sym_gradient_count_and_exactness() {
        let e = catalog::catalog("sym_gradient", 2, None).unwrap();
        let minors = e.minor_polynomials().unwrap();
        assert_eq!(minors.len(), 3);
        assert!(minors.iter().all(|p| p.degree() == Some(2)));
    }

    #[test]
    fn minors_reject_wide_symbols() {
        // ∂₁ mapping ℝ² → ℝ (dim W < dim V)
        let mut m = RatMatrix::zeros(1, 2);
        *m.at_mut(0, 0) = rat_int(1);
        let s = HomogeneousSymbol::new(2, 1, 2, 1, vec![(MultiIndex::new(vec![1, 0]), m)]).unwrap();
        assert!(matches!(s.minor_polynomials(), Err(SymbolError::TooFewRows { .. })));
    }

    #[test]
    fn spec_file_roundtrip() {
        let e = catalog::catalog("sym_gradient", 3, None).unwrap();
        let text = e.to_spec_string();
        let back = HomogeneousSymbol::from_spec_string(&text).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn spec_file_rejects_bad_order() {
        let e = catalog::catalog("gradient", 2, None).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&e.to_spec_string()).unwrap();
        doc["terms"][0]["alpha"] = serde_json::json!([0, 2]);
        match HomogeneousSymbol::from_spec_string(&doc.to_string()) {
            Err(SymbolError::BadTermOrder { .. }) => {}
            other => panic!("expected order rejection, got {other:?}"),
        }
    }

    #[test]
    fn weighted_norm_matches_intrinsic_frobenius() {
        // |sym(ξ⊗v)|² = (|ξ|²|v|² + (ξ·v)²)/2
        let e = catalog::catalog("sym_gradient", 2, None).unwrap();
        let xi = [0.8, -0.6];
        let v = nalgebra::DVector::from_vec(vec![0.36, 1.12]);
        let image = e.eval_weighted(&xi).unwrap() * &v;
        let lhs = image.norm_squared();
        let xi_dot_v = xi[0] * v[0] + xi[1] * v[1];
        let rhs = ((xi[0] * xi[0] + xi[1] * xi[1]) * v.norm_squared() + xi_dot_v * xi_dot_v) / 2.0;
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }
}
