//! Decides the four operator classes (elliptic, cancelling, strongly
//! cancelling, ℂ-elliptic) with margins, re-verified witnesses, and exact
//! divisibility certificates D^d = B[D]∘A[D].
//!
//! Ellipticity and the two cancellation predicates are decided numerically
//! (sphere sweeps, randomized image intersection with stabilization);
//! ℂ-ellipticity is decided exactly whenever the certificate search succeeds
//! and refuted numerically through the complex symbol otherwise.

use crate::fields::{apply_symbol, derivative_tensor, random_trig_field, DiffMode, GridBox};
use crate::multiindex::{multi_indices, MultiIndex};
use crate::numeric::{
    image_basis, intersect_subspaces, minimize_on_sphere, relative_distance_to_subspace,
    sample_unit_vector, seeded_rng, shard_seed, sphere_samples,
};
use crate::rational::{format_rat, parse_rat, rat_to_f64, solve_exact_multi, Rat, RatMatrix};
use crate::symbol::{HomogeneousSymbol, SymbolError};
use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }

    pub fn is_no(self) -> bool {
        self == Verdict::No
    }
}

/// Knobs for the numeric predicates. Every randomized path is a pure
/// function of (symbol, config, seed).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub seed: u64,
    /// Sphere sample count for the ellipticity sweep.
    pub grid_density: usize,
    /// Local minimization restarts from the best grid points.
    pub polish_starts: usize,
    /// Relative σ_min threshold for the elliptic verdict.
    pub elliptic_tol: f64,
    /// Consecutive non-shrinking rounds before cancellation gives up.
    pub stabilization_rounds: usize,
    /// Principal-angle tolerance for subspace intersection.
    pub cancel_tol: f64,
    /// Random 2-planes tried by strong cancellation (plus coordinate planes).
    pub num_planes: usize,
    /// Certificate search depth; `None` means k + 4.
    pub d_max: Option<u32>,
    /// Multi-starts for the complex-kernel refutation.
    pub refute_starts: usize,
    /// Relative σ_min threshold on the complex sphere.
    pub complex_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            grid_density: 10_000,
            polish_starts: 32,
            elliptic_tol: 1e-6,
            stabilization_rounds: 20,
            cancel_tol: 1e-9,
            num_planes: 24,
            d_max: None,
            refute_starts: 32,
            complex_tol: 1e-7,
        }
    }
}

impl ClassifyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Cheaper settings for bulk property sweeps.
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            grid_density: 2_000,
            polish_starts: 12,
            num_planes: 12,
            refute_starts: 16,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllipticReport {
    pub verdict: Verdict,
    /// min over the unit sphere of σ_min(A[ξ]) (absolute).
    pub margin: f64,
    /// margin relative to the largest singular value seen.
    pub relative_margin: f64,
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CancelReport {
    pub verdict: Verdict,
    pub residual_dim: usize,
    /// Unit vector (raw W coordinates) in ∩ im A[ξ] when the verdict is no.
    pub witness_w: Option<Vec<f64>>,
    /// Worst re-verified distance of the witness to im A[ξ] over fresh
    /// samples.
    pub witness_defect: Option<f64>,
    pub samples_used: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrongCancelReport {
    pub verdict: Verdict,
    pub planes_checked: usize,
    pub witness_plane: Option<(Vec<f64>, Vec<f64>)>,
    pub witness_w: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexKernelWitness {
    pub eta: Vec<f64>,
    pub nu: Vec<f64>,
    pub v_re: Vec<f64>,
    pub v_im: Vec<f64>,
    /// |A[η+iν]v| for the unit kernel vector v.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CEllipticReport {
    pub verdict: Verdict,
    pub certificate_degree: Option<u32>,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
    pub witness: Option<ComplexKernelWitness>,
    /// Smallest relative σ_min found on the complex sphere by refutation.
    pub smallest_sigma: Option<f64>,
    pub d_max_used: u32,
    /// Set when the verdict came from the first-order equivalence
    /// (elliptic + strongly cancelling ⇒ ℂ-elliptic for k = 1) rather than
    /// from a certificate.
    pub derived_from_first_order: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema: String,
    pub tool_version: String,
    pub operator: Option<String>,
    pub n: usize,
    pub k: u32,
    pub dim_v: usize,
    pub dim_w: usize,
    pub elliptic: EllipticReport,
    pub cancelling: CancelReport,
    pub strongly_cancelling: StrongCancelReport,
    pub c_elliptic: CEllipticReport,
    pub config: ClassifyConfig,
}

pub const CLASSIFICATION_SCHEMA: &str = "classification-report/v1";

impl ClassificationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn verdicts(&self) -> [Verdict; 4] {
        [
            self.elliptic.verdict,
            self.cancelling.verdict,
            self.strongly_cancelling.verdict,
            self.c_elliptic.verdict,
        ]
    }
}

// ---------------------------------------------------------------------------
// Ellipticity
// ---------------------------------------------------------------------------

/// Margin sweep: quasi-uniform sphere sample of σ_min(A[ξ]) polished by
/// multi-start pattern search. Verdict yes when the relative margin clears
/// `elliptic_tol`, no when a frequency with σ_min < tol/10 · scale is found.
pub fn check_ellipticity(a: &HomogeneousSymbol, cfg: &ClassifyConfig) -> EllipticReport {
    let compiled = a.compile();
    if a.dim_w() < a.dim_v() {
        // injectivity is impossible; every frequency is a witness
        let mut xi = vec![0.0; a.n()];
        xi[0] = 1.0;
        return EllipticReport {
            verdict: Verdict::No,
            margin: 0.0,
            relative_margin: 0.0,
            witness: Some(xi),
            samples: 0,
        };
    }
    let samples = sphere_samples(a.n(), cfg.grid_density, shard_seed(cfg.seed, 0));
    let values: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|xi| {
            let svals = compiled.eval(xi).svd(false, false).singular_values;
            (svals.min(), svals.max())
        })
        .collect();
    let scale = values.iter().map(|v| v.1).fold(0.0f64, f64::max).max(1e-300);

    // polish from the most pessimistic grid points
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&i, &j| values[i].0.total_cmp(&values[j].0).then(i.cmp(&j)));
    let starts: Vec<&Vec<f64>> =
        order.iter().take(cfg.polish_starts.max(1)).map(|&i| &samples[i]).collect();
    let objective = |xi: &[f64]| compiled.sigma_min(xi);
    let polished: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|s| minimize_on_sphere(&objective, s, 3_000))
        .collect();
    let (mut best_xi, mut margin) = (samples[order[0]].clone(), values[order[0]].0);
    for (xi, val) in polished {
        if val < margin {
            margin = val;
            best_xi = xi;
        }
    }
    let relative_margin = margin / scale;
    let verdict = if relative_margin > cfg.elliptic_tol {
        Verdict::Yes
    } else if relative_margin < cfg.elliptic_tol / 10.0 {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    EllipticReport {
        verdict,
        margin,
        relative_margin,
        witness: if verdict == Verdict::No { Some(best_xi) } else { None },
        samples: samples.len(),
    }
}

// ---------------------------------------------------------------------------
// Cancellation
// ---------------------------------------------------------------------------

fn weighted_to_raw(a: &HomogeneousSymbol, w: &DVector<f64>) -> Vec<f64> {
    a.w_weights()
        .iter()
        .zip(w.iter())
        .map(|(&m, &v)| v / (m as f64).sqrt())
        .collect()
}

/// Iterated image intersection over random frequencies. The intersection
/// dimension stabilizing for `stabilization_rounds` fresh samples yields a
/// "no" with a unit witness in ∩ im A[ξ], re-verified on 200 fresh samples.
pub fn check_cancellation(a: &HomogeneousSymbol, cfg: &ClassifyConfig) -> CancelReport {
    let compiled = a.compile();
    let mut rng = seeded_rng(shard_seed(cfg.seed, 1));
    let rel_rank_tol = 1e-9;
    let first = sample_unit_vector(a.n(), &mut rng);
    let mut basis = image_basis(&compiled.eval(&first), rel_rank_tol);
    let mut unchanged = 0usize;
    let mut used = 1usize;
    let max_samples = 64 * (cfg.stabilization_rounds + 4);
    while used < max_samples {
        if basis.ncols() == 0 {
            return CancelReport {
                verdict: Verdict::Yes,
                residual_dim: 0,
                witness_w: None,
                witness_defect: None,
                samples_used: used,
            };
        }
        let xi = sample_unit_vector(a.n(), &mut rng);
        let img = image_basis(&compiled.eval(&xi), rel_rank_tol);
        let next = intersect_subspaces(&basis, &img, cfg.cancel_tol);
        used += 1;
        if next.ncols() == basis.ncols() {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        basis = next;
        if unchanged >= cfg.stabilization_rounds && basis.ncols() > 0 {
            // candidate residual direction: re-verify against fresh samples
            let witness = basis.column(0).into_owned();
            let mut worst: f64 = 0.0;
            for _ in 0..200 {
                let xi = sample_unit_vector(a.n(), &mut rng);
                let img = image_basis(&compiled.eval(&xi), rel_rank_tol);
                worst = worst.max(relative_distance_to_subspace(&witness, &img));
            }
            if worst < cfg.cancel_tol.sqrt() {
                return CancelReport {
                    verdict: Verdict::No,
                    residual_dim: basis.ncols(),
                    witness_w: Some(weighted_to_raw(a, &witness)),
                    witness_defect: Some(worst),
                    samples_used: used + 200,
                };
            }
            // witness failed: keep intersecting
            unchanged = 0;
        }
    }
    CancelReport {
        verdict: Verdict::Inconclusive,
        residual_dim: basis.ncols(),
        witness_w: None,
        witness_defect: None,
        samples_used: used,
    }
}

/// Re-checks that a W-direction (raw coordinates) lies in im A[ξ] for many
/// random ξ; used by the harness before blow-up runs.
pub fn verify_noncancelling_witness(
    a: &HomogeneousSymbol,
    witness_raw: &[f64],
    samples: usize,
    seed: u64,
) -> f64 {
    let compiled = a.compile();
    let weighted: Vec<f64> = a
        .w_weights()
        .iter()
        .zip(witness_raw)
        .map(|(&m, &v)| v * (m as f64).sqrt())
        .collect();
    let w = DVector::from_vec(weighted);
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let xi = sample_unit_vector(a.n(), &mut rng);
        let img = image_basis(&compiled.eval(&xi), 1e-9);
        worst = worst.max(relative_distance_to_subspace(&w, &img));
    }
    worst
}

/// Strong cancellation: cancellation of the restricted symbol on every
/// coordinate plane plus `num_planes` random planes. For n = 2 this is
/// exactly `check_cancellation`.
pub fn check_strong_cancellation(a: &HomogeneousSymbol, cfg: &ClassifyConfig) -> StrongCancelReport {
    if a.n() == 2 {
        let c = check_cancellation(a, cfg);
        return StrongCancelReport {
            verdict: c.verdict,
            planes_checked: 1,
            witness_plane: if c.verdict.is_no() {
                Some((vec![1.0, 0.0], vec![0.0, 1.0]))
            } else {
                None
            },
            witness_w: c.witness_w,
        };
    }
    let n = a.n();
    let mut planes: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut e1 = vec![0.0; n];
            let mut e2 = vec![0.0; n];
            e1[i] = 1.0;
            e2[j] = 1.0;
            planes.push((e1, e2));
        }
    }
    let mut rng = seeded_rng(shard_seed(cfg.seed, 2));
    for _ in 0..cfg.num_planes {
        let e1 = sample_unit_vector(n, &mut rng);
        // Gram-Schmidt a second direction against the first
        loop {
            let cand = sample_unit_vector(n, &mut rng);
            let dot: f64 = cand.iter().zip(&e1).map(|(a, b)| a * b).sum();
            let mut e2: Vec<f64> = cand.iter().zip(&e1).map(|(c, b)| c - dot * b).collect();
            let norm = e2.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for v in &mut e2 {
                    *v /= norm;
                }
                planes.push((e1.clone(), e2));
                break;
            }
        }
    }
    let sub_reports: Vec<(usize, CancelReport)> = planes
        .par_iter()
        .enumerate()
        .map(|(idx, (e1, e2))| {
            let sub_cfg = ClassifyConfig {
                seed: shard_seed(cfg.seed, 100 + idx as u64),
                ..cfg.clone()
            };
            let report = match a.restrict_to_plane_f64(e1, e2) {
                Ok(restricted) => check_cancellation(&restricted, &sub_cfg),
                // the symbol vanishes identically on this plane: every image
                // is {0}, so the plane intersection is trivially {0}
                Err(SymbolError::EmptySymbol) => CancelReport {
                    verdict: Verdict::Yes,
                    residual_dim: 0,
                    witness_w: None,
                    witness_defect: None,
                    samples_used: 0,
                },
                Err(e) => panic!("orthonormal plane basis must be independent: {e}"),
            };
            (idx, report)
        })
        .collect();
    let mut any_inconclusive = false;
    for (idx, sub) in &sub_reports {
        match sub.verdict {
            Verdict::No => {
                return StrongCancelReport {
                    verdict: Verdict::No,
                    planes_checked: planes.len(),
                    witness_plane: Some(planes[*idx].clone()),
                    witness_w: sub.witness_w.clone(),
                };
            }
            Verdict::Inconclusive => any_inconclusive = true,
            Verdict::Yes => {}
        }
    }
    StrongCancelReport {
        verdict: if any_inconclusive { Verdict::Inconclusive } else { Verdict::Yes },
        planes_checked: planes.len(),
        witness_plane: None,
        witness_w: None,
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

/// Exact degree-d left-inverse data: for every target multi-index α with
/// |α| = d, a homogeneous matrix polynomial C_α[ξ] of degree d − k from W to
/// V with ξ^α · Id_V = C_α[ξ] · A[ξ] as an exact polynomial identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub n: usize,
    pub order: u32,
    pub degree: u32,
    pub dim_v: usize,
    pub dim_w: usize,
    /// components[α][β] is the dimV×dimW coefficient of ξ^β in C_α.
    #[serde(skip)]
    pub components: BTreeMap<MultiIndex, BTreeMap<MultiIndex, RatMatrix>>,
}

/// Searches d = k, k+1, …, d_max for an exact certificate by matching
/// monomial coefficients of ξ^α Id_V = C_α[ξ] A[ξ] over ℚ. One elimination
/// per degree serves all targets α and all identity columns simultaneously.
/// Free variables are set to zero (minimum-support solutions under the
/// deterministic column-pivot elimination).
pub fn search_certificate(a: &HomogeneousSymbol, d_max: u32) -> Option<Certificate> {
    let k = a.order();
    assert!(d_max >= k, "d_max must be at least the operator order");
    for d in k..=d_max {
        if let Some(cert) = try_certificate_degree(a, d) {
            return Some(cert);
        }
    }
    None
}

fn try_certificate_degree(a: &HomogeneousSymbol, d: u32) -> Option<Certificate> {
    let n = a.n();
    let k = a.order();
    let mono_d = multi_indices(n, d);
    let mono_dk = multi_indices(n, d - k);
    let dim_v = a.dim_v();
    let dim_w = a.dim_w();
    // Unknowns for one identity row i: x[β, w] = C_β[i, w].
    // Equations for that row: Σ_{β + γ = δ} Σ_w x[β, w] A_γ[w, j] = [δ = α][j = i].
    let rows = mono_d.len() * dim_v;
    let cols = mono_dk.len() * dim_w;
    let mut m = RatMatrix::zeros(rows, cols);
    let terms: Vec<(&MultiIndex, &RatMatrix)> = a.terms().collect();
    for (b_idx, beta) in mono_dk.iter().enumerate() {
        for (gamma, mat) in &terms {
            let delta = beta.add(gamma);
            let d_idx = mono_d.binary_search(&delta).expect("delta has degree d");
            for j in 0..dim_v {
                for w in 0..dim_w {
                    if !mat.at(w, j).is_zero() {
                        let row = d_idx * dim_v + j;
                        let col = b_idx * dim_w + w;
                        *m.at_mut(row, col) += mat.at(w, j);
                    }
                }
            }
        }
    }
    // Right-hand sides: one per (target α, identity row i).
    let mut rhs = Vec::with_capacity(mono_d.len() * dim_v);
    for (a_idx, _alpha) in mono_d.iter().enumerate() {
        for i in 0..dim_v {
            let mut b = vec![Rat::zero(); rows];
            b[a_idx * dim_v + i] = Rat::one();
            rhs.push(b);
        }
    }
    let solutions = solve_exact_multi(&m, &rhs);
    if solutions.iter().any(Option::is_none) {
        return None;
    }
    let mut components: BTreeMap<MultiIndex, BTreeMap<MultiIndex, RatMatrix>> = BTreeMap::new();
    for (a_idx, alpha) in mono_d.iter().enumerate() {
        let mut per_beta: BTreeMap<MultiIndex, RatMatrix> = BTreeMap::new();
        for i in 0..dim_v {
            let x = solutions[a_idx * dim_v + i].as_ref().unwrap();
            for (b_idx, beta) in mono_dk.iter().enumerate() {
                for w in 0..dim_w {
                    let val = &x[b_idx * dim_w + w];
                    if !val.is_zero() {
                        let entry = per_beta
                            .entry(beta.clone())
                            .or_insert_with(|| RatMatrix::zeros(dim_v, dim_w));
                        *entry.at_mut(i, w) = val.clone();
                    }
                }
            }
        }
        components.insert(alpha.clone(), per_beta);
    }
    Some(Certificate { n, order: k, degree: d, dim_v, dim_w, components })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateCheck {
    pub exact_match: bool,
    /// Largest absolute coefficient defect of the re-expanded identity.
    pub max_defect: f64,
    /// Relative L² error of the grid consistency spot-check.
    pub grid_residual: f64,
}

/// Re-expands every C_α[ξ]·A[ξ] exactly and compares coefficient by
/// coefficient with ξ^α Id_V; also spot-checks on a random band-limited grid
/// field that the certificate reproduces D^d u from A[D]u.
pub fn verify_certificate(
    a: &HomogeneousSymbol,
    cert: &Certificate,
    seed: u64,
) -> Result<CertificateCheck, SymbolError> {
    if cert.n != a.n() || cert.order != a.order() || cert.dim_v != a.dim_v()
        || cert.dim_w != a.dim_w()
    {
        return Err(SymbolError::Invalid(
            "certificate dimensions do not match the symbol".into(),
        ));
    }
    let mono_d = multi_indices(a.n(), cert.degree);
    let mut max_defect = Rat::zero();
    let mut exact = true;
    for alpha in &mono_d {
        // expanded[δ] = Σ_{β+γ=δ} C_{α,β} · A_γ
        let mut expanded: BTreeMap<MultiIndex, RatMatrix> = BTreeMap::new();
        if let Some(per_beta) = cert.components.get(alpha) {
            for (beta, c_mat) in per_beta {
                for (gamma, a_mat) in a.terms() {
                    let delta = beta.add(gamma);
                    let prod = c_mat.mul(a_mat);
                    expanded
                        .entry(delta)
                        .and_modify(|m| *m = m.add(&prod))
                        .or_insert(prod);
                }
            }
        }
        for delta in &mono_d {
            let expect_identity = delta == alpha;
            let got = expanded.remove(delta);
            let target = if expect_identity {
                RatMatrix::identity(cert.dim_v)
            } else {
                RatMatrix::zeros(cert.dim_v, cert.dim_v)
            };
            let diff = match got {
                Some(m) => m.sub(&target),
                None => target.scale(&-Rat::one()),
            };
            let defect = diff.max_abs();
            if !defect.is_zero() {
                exact = false;
                if defect > max_defect {
                    max_defect = defect;
                }
            }
        }
    }

    // Grid spot-check: D^d u == Σ_β C_{·,β} ∂^β (A[D]u) on a band-limited u.
    let grid_residual = certificate_grid_residual(a, cert, seed)?;
    Ok(CertificateCheck {
        exact_match: exact,
        max_defect: rat_to_f64(&max_defect),
        grid_residual,
    })
}

fn certificate_grid_residual(
    a: &HomogeneousSymbol,
    cert: &Certificate,
    seed: u64,
) -> Result<f64, SymbolError> {
    let n = a.n();
    let res = if n <= 2 { 64 } else { 16 };
    let gbox = GridBox::unit(n);
    let u = random_trig_field(n, a.dim_v(), res, &gbox, 2, seed);
    let to_field_err = |e: crate::fields::FieldError| SymbolError::Invalid(e.to_string());
    let au = apply_symbol(a, &u, DiffMode::Spectral).map_err(to_field_err)?;
    let dku = derivative_tensor(&u, cert.degree, DiffMode::Spectral).map_err(to_field_err)?;
    let l = cert.degree - cert.order;
    let dau = derivative_tensor(&au, l, DiffMode::Spectral).map_err(to_field_err)?;
    let mono_d = multi_indices(n, cert.degree);
    let mono_l = multi_indices(n, l);
    let slots_l = mono_l.len();
    let size = dku.len();
    let mut err2 = 0.0f64;
    let mut ref2 = 0.0f64;
    for (a_idx, alpha) in mono_d.iter().enumerate() {
        let per_beta = cert.components.get(alpha);
        for i in 0..cert.dim_v {
            // target slot (i, α) in D^d u
            let target = dku.component(i * mono_d.len() + a_idx);
            let mut acc = vec![0.0f64; size];
            if let Some(per_beta) = per_beta {
                for (beta, c_mat) in per_beta {
                    let b_idx = mono_l.binary_search(beta).expect("beta has degree d−k");
                    for w in 0..cert.dim_w {
                        let coef = rat_to_f64(c_mat.at(i, w));
                        if coef != 0.0 {
                            // slot (w, β) in D^{d−k}(A[D]u)
                            let comp = dau.component(w * slots_l + b_idx);
                            for (acc_v, &v) in acc.iter_mut().zip(comp) {
                                *acc_v += coef * v;
                            }
                        }
                    }
                }
            }
            for (t, got) in target.iter().zip(&acc) {
                err2 += (t - got) * (t - got);
                ref2 += t * t;
            }
        }
    }
    Ok((err2 / ref2.max(1e-300)).sqrt())
}

// ---------------------------------------------------------------------------
// ℂ-ellipticity
// ---------------------------------------------------------------------------

/// Certificate search first; on failure, refutation by minimizing
/// σ_min(A[η+iν]) over the real 2n-sphere |η|² + |ν|² = 1.
pub fn check_c_ellipticity(a: &HomogeneousSymbol, cfg: &ClassifyConfig) -> CEllipticReport {
    let d_max = cfg.d_max.unwrap_or(a.order() + 4).max(a.order());
    if a.dim_w() >= a.dim_v() {
        if let Some(cert) = search_certificate(a, d_max) {
            return CEllipticReport {
                verdict: Verdict::Yes,
                certificate_degree: Some(cert.degree),
                certificate: Some(cert),
                witness: None,
                smallest_sigma: None,
                d_max_used: d_max,
                derived_from_first_order: false,
            };
        }
    }
    // refutation stage
    let compiled = a.compile();
    let n = a.n();
    let scale = sphere_samples(n, 64, shard_seed(cfg.seed, 3))
        .iter()
        .map(|xi| compiled.sigma_max(xi))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let objective = {
        let compiled = compiled.clone();
        move |p: &[f64]| {
            let (eta, nu) = p.split_at(p.len() / 2);
            compiled.sigma_min_complex(eta, nu)
        }
    };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let inv = 0.5f64.sqrt();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut p = vec![0.0; 2 * n];
            p[i] = inv;
            p[n + j] = inv;
            starts.push(p);
        }
    }
    starts.extend(sphere_samples(2 * n, cfg.refute_starts, shard_seed(cfg.seed, 4)));
    let coarse: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|s| minimize_on_sphere(&objective, s, 2_000))
        .collect();
    let mut order: Vec<usize> = (0..coarse.len()).collect();
    order.sort_by(|&i, &j| coarse[i].1.total_cmp(&coarse[j].1).then(i.cmp(&j)));
    let mut best = coarse[order[0]].clone();
    for &idx in order.iter().take(3) {
        let refined = minimize_on_sphere(&objective, &coarse[idx].0, 60_000);
        if refined.1 < best.1 {
            best = refined;
        }
    }
    let (point, sigma) = best;
    let rel = sigma / scale;
    if rel < cfg.complex_tol {
        let (eta, nu) = point.split_at(n);
        let m = compiled.eval_complex(eta, nu);
        let svd = m.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let min_idx = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let v: Vec<Complex64> = (0..a.dim_v()).map(|c| v_t[(min_idx, c)].conj()).collect();
        let residual = {
            let img = &m * DVector::from_vec(v.clone());
            img.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / scale
        };
        if residual < 1e-6 {
            return CEllipticReport {
                verdict: Verdict::No,
                certificate_degree: None,
                certificate: None,
                witness: Some(ComplexKernelWitness {
                    eta: eta.to_vec(),
                    nu: nu.to_vec(),
                    v_re: v.iter().map(|z| z.re).collect(),
                    v_im: v.iter().map(|z| z.im).collect(),
                    residual,
                }),
                smallest_sigma: Some(rel),
                d_max_used: d_max,
                derived_from_first_order: false,
            };
        }
    }
    CEllipticReport {
        verdict: Verdict::Inconclusive,
        certificate_degree: None,
        certificate: None,
        witness: None,
        smallest_sigma: Some(rel),
        d_max_used: d_max,
        derived_from_first_order: false,
    }
}

// ---------------------------------------------------------------------------
// Polynomial nullspace
// ---------------------------------------------------------------------------

/// dim {p ∈ 𝒫_j(ℝⁿ, V) : A[D]p = 0} for j = 0..m, by exact rational rank.
pub fn nullspace_dimension(a: &HomogeneousSymbol, m: u32) -> Vec<usize> {
    let n = a.n();
    let k = a.order();
    (0..=m)
        .map(|j| {
            // basis of 𝒫_j: all monomials x^γ with |γ| ≤ j, times V
            let mut gammas = Vec::new();
            for deg in 0..=j {
                gammas.extend(multi_indices(n, deg));
            }
            let cols = gammas.len() * a.dim_v();
            if j < k {
                return cols; // A[D] annihilates everything below order k
            }
            let mut deltas = Vec::new();
            for deg in 0..=j - k {
                deltas.extend(multi_indices(n, deg));
            }
            let delta_pos: BTreeMap<&MultiIndex, usize> =
                deltas.iter().enumerate().map(|(i, d)| (d, i)).collect();
            let rows = deltas.len() * a.dim_w();
            let mut mat = RatMatrix::zeros(rows, cols);
            for (g_idx, gamma) in gammas.iter().enumerate() {
                for (alpha, coeffs) in a.terms() {
                    let Some(delta) = gamma.checked_sub(alpha) else { continue };
                    let d_idx = delta_pos[&delta];
                    // ∂^α x^γ = (γ!/(γ−α)!) x^{γ−α}
                    let mut falling = Rat::one();
                    for (&g, &al) in gamma.entries().iter().zip(alpha.entries()) {
                        for t in 0..al {
                            falling *= Rat::from_integer((i64::from(g - t)).into());
                        }
                    }
                    for i in 0..a.dim_v() {
                        for w in 0..a.dim_w() {
                            if !coeffs.at(w, i).is_zero() {
                                let row = d_idx * a.dim_w() + w;
                                let col = g_idx * a.dim_v() + i;
                                *mat.at_mut(row, col) += &falling * coeffs.at(w, i);
                            }
                        }
                    }
                }
            }
            cols - crate::rational::rank(&mat)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Full classification
// ---------------------------------------------------------------------------

/// Runs all four predicates and applies the logical closure rules: a found
/// certificate upgrades inconclusive ellipticity/cancellation verdicts, and
/// for first-order operators elliptic + strongly cancelling upgrades an
/// inconclusive ℂ-ellipticity (never a "no").
pub fn classify_full(a: &HomogeneousSymbol, cfg: &ClassifyConfig) -> ClassificationReport {
    let elliptic = check_ellipticity(a, cfg);
    let cancelling = check_cancellation(a, cfg);
    let strongly_cancelling = check_strong_cancellation(a, cfg);
    let mut c_elliptic = check_c_ellipticity(a, cfg);

    let mut elliptic = elliptic;
    let mut cancelling = cancelling;
    let mut strongly_cancelling = strongly_cancelling;

    if c_elliptic.verdict.is_yes() {
        // ℂ-ellipticity implies ellipticity and strong cancellation
        if elliptic.verdict == Verdict::Inconclusive {
            elliptic.verdict = Verdict::Yes;
        }
        if strongly_cancelling.verdict == Verdict::Inconclusive {
            strongly_cancelling.verdict = Verdict::Yes;
        }
    }
    if strongly_cancelling.verdict.is_yes() && cancelling.verdict == Verdict::Inconclusive {
        cancelling.verdict = Verdict::Yes;
    }
    if a.order() == 1
        && elliptic.verdict.is_yes()
        && strongly_cancelling.verdict.is_yes()
        && c_elliptic.verdict == Verdict::Inconclusive
    {
        // first-order equivalence of ℂ-ellipticity with E ∧ SC
        c_elliptic.verdict = Verdict::Yes;
        c_elliptic.derived_from_first_order = true;
    }

    ClassificationReport {
        schema: CLASSIFICATION_SCHEMA.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        operator: a.name().map(str::to_string),
        n: a.n(),
        k: a.order(),
        dim_v: a.dim_v(),
        dim_w: a.dim_w(),
        elliptic,
        cancelling,
        strongly_cancelling,
        c_elliptic,
        config: cfg.clone(),
    }
}

// ---------------------------------------------------------------------------
// Certificate files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CertTermDoc {
    beta: Vec<u32>,
    matrix: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct CertComponentDoc {
    target_alpha: Vec<u32>,
    terms: Vec<CertTermDoc>,
}

#[derive(Serialize, Deserialize)]
struct CertificateDoc {
    schema: String,
    n: usize,
    k: u32,
    degree: u32,
    #[serde(rename = "dimV")]
    dim_v: usize,
    #[serde(rename = "dimW")]
    dim_w: usize,
    components: Vec<CertComponentDoc>,
}

pub const CERTIFICATE_SCHEMA: &str = "certificate/v1";

impl Certificate {
    pub fn to_json_string(&self) -> String {
        let doc = CertificateDoc {
            schema: CERTIFICATE_SCHEMA.to_string(),
            n: self.n,
            k: self.order,
            degree: self.degree,
            dim_v: self.dim_v,
            dim_w: self.dim_w,
            components: self
                .components
                .iter()
                .map(|(alpha, per_beta)| CertComponentDoc {
                    target_alpha: alpha.entries().to_vec(),
                    terms: per_beta
                        .iter()
                        .map(|(beta, mat)| CertTermDoc {
                            beta: beta.entries().to_vec(),
                            matrix: (0..self.dim_v)
                                .map(|r| {
                                    (0..self.dim_w).map(|c| format_rat(mat.at(r, c))).collect()
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("certificate serializes")
    }

    pub fn from_json_string(text: &str) -> Result<Self, SymbolError> {
        let doc: CertificateDoc =
            serde_json::from_str(text).map_err(|e| SymbolError::Parse(e.to_string()))?;
        if doc.schema != CERTIFICATE_SCHEMA {
            return Err(SymbolError::Parse(format!(
                "unsupported schema {:?}, expected {CERTIFICATE_SCHEMA:?}",
                doc.schema
            )));
        }
        let mut components = BTreeMap::new();
        for comp in &doc.components {
            let alpha = MultiIndex::new(comp.target_alpha.clone());
            if alpha.order() != doc.degree {
                return Err(SymbolError::Parse(format!(
                    "target α = {:?} has order {} ≠ degree {}",
                    comp.target_alpha,
                    alpha.order(),
                    doc.degree
                )));
            }
            let mut per_beta = BTreeMap::new();
            for term in &comp.terms {
                let beta = MultiIndex::new(term.beta.clone());
                if beta.order() != doc.degree - doc.k {
                    return Err(SymbolError::Parse(format!(
                        "β = {:?} has order {} ≠ d − k = {}",
                        term.beta,
                        beta.order(),
                        doc.degree - doc.k
                    )));
                }
                let mut m = RatMatrix::zeros(doc.dim_v, doc.dim_w);
                if term.matrix.len() != doc.dim_v
                    || term.matrix.iter().any(|r| r.len() != doc.dim_w)
                {
                    return Err(SymbolError::Parse("certificate matrix shape mismatch".into()));
                }
                for (r, row) in term.matrix.iter().enumerate() {
                    for (c, s) in row.iter().enumerate() {
                        *m.at_mut(r, c) = parse_rat(s).map_err(SymbolError::Parse)?;
                    }
                }
                per_beta.insert(beta, m);
            }
            components.insert(alpha, per_beta);
        }
        Ok(Certificate {
            n: doc.n,
            order: doc.k,
            degree: doc.degree,
            dim_v: doc.dim_v,
            dim_w: doc.dim_w,
            components,
        })
    }
}

/// Extracts the complex-kernel witness needed by the boundary blow-up runs.
pub fn complex_witness_or_search(
    a: &HomogeneousSymbol,
    cfg: &ClassifyConfig,
) -> Option<ComplexKernelWitness> {
    check_c_ellipticity(a, cfg).witness
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog, partial_derivative};
    use crate::rational::rat;

    fn cfg() -> ClassifyConfig {
        ClassifyConfig::quick(7)
    }

    #[test]
    fn gradient_margin_is_one() {
        let g = catalog("gradient", 3, None).unwrap();
        let e = check_ellipticity(&g, &cfg());
        assert!(e.verdict.is_yes());
        assert!((e.margin - 1.0).abs() < 1e-9, "margin {}", e.margin);
    }

    #[test]
    fn partial_derivative_is_not_elliptic() {
        let a = partial_derivative(2, 0);
        let e = check_ellipticity(&a, &cfg());
        assert!(e.verdict.is_no());
        let w = e.witness.unwrap();
        assert!(w[0].abs() < 1e-6, "witness {w:?} should be ±e₂");
        assert!((w[1].abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sym_gradient_margin_is_inverse_sqrt2() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let rep = check_ellipticity(&e, &cfg());
        assert!(rep.verdict.is_yes());
        assert!((rep.margin - 1.0 / 2.0f64.sqrt()).abs() < 1e-6, "margin {}", rep.margin);
    }

    #[test]
    fn wirtinger_margin_is_half() {
        let w = catalog("wirtinger", 2, None).unwrap();
        let rep = check_ellipticity(&w, &cfg());
        assert!(rep.verdict.is_yes());
        assert!((rep.margin - 0.5).abs() < 1e-9);
    }

    #[test]
    fn laplacian_not_cancelling_with_unit_witness() {
        let l = catalog("laplacian", 3, None).unwrap();
        let c = check_cancellation(&l, &cfg());
        assert!(c.verdict.is_no());
        assert_eq!(c.residual_dim, 1);
        let w = c.witness_w.unwrap();
        assert!((w[0].abs() - 1.0).abs() < 1e-9);
        assert!(c.witness_defect.unwrap() < 1e-6);
    }

    #[test]
    fn sym_gradient_cancels() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let c = check_cancellation(&e, &cfg());
        assert!(c.verdict.is_yes());
        assert_eq!(c.residual_dim, 0);
    }

    #[test]
    fn wirtinger_full_residual() {
        let w = catalog("wirtinger", 2, None).unwrap();
        let c = check_cancellation(&w, &cfg());
        assert!(c.verdict.is_no());
        assert_eq!(c.residual_dim, 2);
    }

    #[test]
    fn sym_gradient_r3_strongly_cancels() {
        let e = catalog("sym_gradient", 3, None).unwrap();
        let sc = check_strong_cancellation(&e, &cfg());
        assert!(sc.verdict.is_yes());
    }

    #[test]
    fn tracefree_r2_fails_cancellation() {
        let ed = catalog("tracefree_sym_gradient", 2, None).unwrap();
        let sc = check_strong_cancellation(&ed, &cfg());
        assert!(sc.verdict.is_no());
        let c = check_cancellation(&ed, &cfg());
        assert_eq!(sc.verdict, c.verdict);
    }

    #[test]
    fn gradient_certificate_degree_one_row_selectors() {
        let g = catalog("gradient", 2, None).unwrap();
        let cert = search_certificate(&g, 3).unwrap();
        assert_eq!(cert.degree, 1);
        // C_{e_i} is the constant row selector e_iᵀ
        for (alpha, per_beta) in &cert.components {
            let axis = alpha.entries().iter().position(|&v| v == 1).unwrap();
            let mat = per_beta.get(&MultiIndex::zero(2)).unwrap();
            for w in 0..2 {
                let expect = if w == axis { Rat::one() } else { Rat::zero() };
                assert_eq!(*mat.at(0, w), expect);
            }
        }
        let check = verify_certificate(&g, &cert, 3).unwrap();
        assert!(check.exact_match);
        assert_eq!(check.max_defect, 0.0);
        assert!(check.grid_residual < 1e-8, "grid residual {}", check.grid_residual);
    }

    #[test]
    fn sym_gradient_certificate_degree_two() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let cert = search_certificate(&e, 4).unwrap();
        assert_eq!(cert.degree, 2);
        let check = verify_certificate(&e, &cert, 5).unwrap();
        assert!(check.exact_match);
        assert!(check.grid_residual < 1e-8);
    }

    #[test]
    fn perturbed_certificate_fails_exactness() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let mut cert = search_certificate(&e, 3).unwrap();
        let first_alpha = cert.components.keys().next().unwrap().clone();
        let per_beta = cert.components.get_mut(&first_alpha).unwrap();
        let first_beta = per_beta.keys().next().unwrap().clone();
        let m = per_beta.get_mut(&first_beta).unwrap();
        *m.at_mut(0, 0) += rat(1, 1);
        let check = verify_certificate(&e, &cert, 5).unwrap();
        assert!(!check.exact_match);
        assert!(check.max_defect >= 1.0);
    }

    #[test]
    fn wirtinger_has_no_certificate_and_a_complex_witness() {
        let w = catalog("wirtinger", 2, None).unwrap();
        assert!(search_certificate(&w, 6).is_none());
        let rep = check_c_ellipticity(&w, &cfg());
        assert!(rep.verdict.is_no());
        let witness = rep.witness.unwrap();
        assert!(witness.residual < 1e-10, "residual {}", witness.residual);
    }

    #[test]
    fn laplacian_complex_witness() {
        let l = catalog("laplacian", 2, None).unwrap();
        let rep = check_c_ellipticity(&l, &cfg());
        assert!(rep.verdict.is_no());
        assert!(rep.witness.unwrap().residual < 1e-8);
    }

    #[test]
    fn sym_gradient_c_elliptic_by_certificate() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let rep = check_c_ellipticity(&e, &cfg());
        assert!(rep.verdict.is_yes());
        assert_eq!(rep.certificate_degree, Some(2));
        assert!(!rep.derived_from_first_order);
    }

    #[test]
    fn nullspace_dims_sym_gradient() {
        // translations at degree 0, rigid deformations at degree 1
        let e = catalog("sym_gradient", 2, None).unwrap();
        assert_eq!(nullspace_dimension(&e, 1), vec![2, 3]);
        let e3 = catalog("sym_gradient", 3, None).unwrap();
        assert_eq!(nullspace_dimension(&e3, 1), vec![3, 6]);
    }

    #[test]
    fn nullspace_dims_gradient_constants() {
        let g = catalog("gradient", 2, None).unwrap();
        assert_eq!(nullspace_dimension(&g, 5), vec![1; 6]);
    }

    #[test]
    fn nullspace_dims_wirtinger_holomorphic() {
        // real dimension of holomorphic polynomials of degree ≤ j is 2(j+1)
        let w = catalog("wirtinger", 2, None).unwrap();
        assert_eq!(nullspace_dimension(&w, 4), vec![2, 4, 6, 8, 10]);
    }

    #[test]
    fn nullspace_monotone_and_certificate_link() {
        // once a degree-d certificate exists the kernel dims freeze at d−1
        let e = catalog("sym_gradient", 2, None).unwrap();
        let cert = search_certificate(&e, 4).unwrap();
        let dims = nullspace_dimension(&e, cert.degree + 2);
        for w in dims.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let frozen = dims[(cert.degree - 1) as usize];
        for &d in &dims[(cert.degree - 1) as usize..] {
            assert_eq!(d, frozen);
        }
    }

    #[test]
    fn classify_full_laplacian() {
        let l = catalog("laplacian", 3, None).unwrap();
        let rep = classify_full(&l, &cfg());
        assert!(rep.elliptic.verdict.is_yes());
        assert!(rep.cancelling.verdict.is_no());
        assert!(rep.strongly_cancelling.verdict.is_no());
        assert!(rep.c_elliptic.verdict.is_no());
    }

    #[test]
    fn classify_full_divcurl_matches_wirtinger_profile() {
        // (div, curl) on ℝ² is the Wirtinger operator up to conjugation:
        // elliptic with invertible real symbol, hence non-cancelling, and
        // its single minor ξ₁² + ξ₂² vanishes at (1, i)
        let dc = catalog("divcurl", 2, None).unwrap();
        let rep = classify_full(&dc, &cfg());
        assert!(rep.elliptic.verdict.is_yes());
        assert!(rep.cancelling.verdict.is_no());
        assert_eq!(rep.cancelling.residual_dim, 2);
        assert_eq!(rep.strongly_cancelling.verdict, rep.cancelling.verdict);
        assert!(rep.c_elliptic.verdict.is_no());
    }

    #[test]
    fn scale_invariance_of_verdicts() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let scaled = e.scaled(&rat(3, 7)).unwrap();
        let r1 = classify_full(&e, &cfg());
        let r2 = classify_full(&scaled, &cfg());
        assert_eq!(r1.verdicts(), r2.verdicts());
        let ratio = r2.elliptic.margin / r1.elliptic.margin;
        assert!((ratio - 3.0 / 7.0).abs() < 1e-9, "margins scale by |c|, got {ratio}");
    }

    #[test]
    fn certificate_json_roundtrip() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let cert = search_certificate(&e, 3).unwrap();
        let text = cert.to_json_string();
        let back = Certificate::from_json_string(&text).unwrap();
        assert_eq!(back.degree, cert.degree);
        assert_eq!(back.components, cert.components);
    }

    #[test]
    fn report_serializes_with_schema() {
        let g = catalog("gradient", 2, None).unwrap();
        let rep = classify_full(&g, &cfg());
        let text = rep.to_json_string();
        assert!(text.contains(CLASSIFICATION_SCHEMA));
        assert!(text.contains("\"seed\": 7"));
    }
}
