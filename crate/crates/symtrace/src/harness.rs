//! Assembles symbols, fields, and measures into the limiting trace-inequality
//! ratio tests, the blow-up counterexample families, and the strict-convergence
//! demos, with quantitative bounded/diverging verdicts.
//!
//! "Bounded" and "diverging" are operationalized by fixed numeric criteria
//! (spread ≤ 2×, ≥ 10% growth per level over the last four levels, log-type
//! increments consistent within 30%), since the inequalities' constants are
//! not computable.

use crate::classify::verify_noncancelling_witness;
use crate::fields::{
    apply_symbol, bump_window, derivative_tensor, field_from_spectrum, halfspace_l1_norm,
    lebesgue_norm, measure_norm, mollify, slice_l1_norm, DiffMode,
    FieldError, GridBox, GridField,
};
use crate::measures::{
    build_cantor_product, estimate_morrey_norm, map_into_cone, DiscreteMeasure, MeasureError,
};
use crate::numeric::{shard_seed, sphere_samples};
use crate::rational::{format_rat, rat_int, rat_to_f64, Rat};
use crate::symbol::{HomogeneousSymbol, SymbolError};
use nalgebra::DVector;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("‖A[D]u‖₁ = {0:.3e} ≈ 0: u lies in the kernel of A[D]")]
    ZeroDenominator(f64),
    #[error("codimension s = {0} outside [0, 1)")]
    SRange(String),
    #[error("θ = {theta} outside the admissible range ({lo}, 1] (lower endpoint s(n−1)/(n−s) = {lo})")]
    ThetaRange { theta: f64, lo: String },
    #[error("Adams exponent α = {alpha} violates 0 ≤ s < α < n (s = {s}, n = {n})")]
    AdamsAlphaRange { alpha: f64, s: String, n: usize },
    #[error("witness failed re-verification: {0}")]
    WitnessRejected(String),
    #[error("cone search found no lower-bounded cap, inconsistent with w ≠ 0")]
    ConeSearchFailed,
    #[error("hyperplane normal must be a coordinate axis on the grid")]
    NotAxisAligned,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// Exact exponent bookkeeping: q = (n−s)/(n−1) and β = (1−s)(n−1)/(n−s).
#[derive(Clone, Debug)]
pub struct Exponents {
    pub s: Rat,
    pub q: Rat,
    pub beta: Rat,
}

impl Exponents {
    pub fn for_codimension(n: usize, s: &Rat) -> Result<Self, HarnessError> {
        if s < &Rat::zero() || s >= &Rat::one() {
            return Err(HarnessError::SRange(format_rat(s)));
        }
        let n_rat = rat_int(n as i64);
        let q = (&n_rat - s) / (&n_rat - Rat::one());
        let beta = (Rat::one() - s) * (&n_rat - Rat::one()) / (&n_rat - s);
        Ok(Self { s: s.clone(), q, beta })
    }

    /// Lower endpoint s(n−1)/(n−s) of the admissible θ interval.
    pub fn theta_lower(&self, n: usize) -> Rat {
        let n_rat = rat_int(n as i64);
        &self.s * (&n_rat - Rat::one()) / (&n_rat - &self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioVerdict {
    Bounded,
    Diverging,
    Inconclusive,
    Exploratory,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub parameter: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub schema: String,
    pub tool_version: String,
    pub test_id: String,
    pub operator: Option<String>,
    /// Exact rational strings, logged for every codimension test.
    pub s: Option<String>,
    pub q: Option<String>,
    pub beta: Option<String>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub morrey_normalizer: Option<f64>,
    pub instance_ratios: Vec<f64>,
    pub sup_ratio: Option<f64>,
    pub growth: Vec<GrowthRow>,
    pub verdict: RatioVerdict,
    pub resolutions: Vec<usize>,
    pub seed: u64,
    pub notes: Vec<String>,
}

pub const INEQUALITY_SCHEMA: &str = "inequality-report/v1";

impl InequalityReport {
    /// Blank report shell for front ends that assemble their own sweeps.
    pub fn for_test(test_id: &str, operator: Option<&str>) -> Self {
        Self::new(test_id, operator)
    }

    fn new(test_id: &str, operator: Option<&str>) -> Self {
        Self {
            schema: INEQUALITY_SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            test_id: test_id.to_string(),
            operator: operator.map(str::to_string),
            s: None,
            q: None,
            beta: None,
            theta: None,
            alpha: None,
            morrey_normalizer: None,
            instance_ratios: Vec::new(),
            sup_ratio: None,
            growth: Vec::new(),
            verdict: RatioVerdict::Inconclusive,
            resolutions: Vec::new(),
            seed: 0,
            notes: Vec::new(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV growth table: parameter, LHS, RHS, ratio.
    pub fn growth_csv(&self) -> String {
        let mut out = String::from("parameter,lhs,rhs,ratio\n");
        for row in &self.growth {
            out.push_str(&format!("{},{},{},{}\n", row.parameter, row.lhs, row.rhs, row.ratio));
        }
        out
    }
}

/// Spread max/min of a list of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[sorted.len() / 2]
}

/// The divergence rule: LHS grows ≥ 10% per level over the last four level
/// steps while RHS stays within 2× of its median.
fn diverging_verdict(rows: &[GrowthRow]) -> RatioVerdict {
    if rows.len() < 5 {
        return RatioVerdict::Inconclusive;
    }
    let lhs: Vec<f64> = rows.iter().map(|r| r.lhs).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.rhs).collect();
    let tail = &lhs[lhs.len() - 5..];
    let growing = tail.windows(2).all(|w| w[1] >= 1.10 * w[0]);
    let rhs_med = median(&rhs);
    let rhs_stable = rhs.iter().all(|&r| r <= 2.0 * rhs_med && r >= rhs_med / 2.0);
    if growing && rhs_stable {
        RatioVerdict::Diverging
    } else {
        RatioVerdict::Inconclusive
    }
}

// ---------------------------------------------------------------------------
// Ratio tests
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct RatioBreakdown {
    /// ‖D^{k−1}u‖_{L^q(dμ)}
    pub numerator: f64,
    /// Morrey lower bound ‖μ‖_{L^{1,n−s}}
    pub morrey: f64,
    /// ‖D^{k−1}u‖_{L^{n/(n−1)}}
    pub dk_lebesgue: f64,
    /// ‖A[D]u‖_{L¹}
    pub adu_l1: f64,
    pub ratio: f64,
}

/// Multiplicative trace ratio
/// R = ‖D^{k−1}u‖_{L^q(dμ)} / (‖μ‖^{1/q} ‖D^{k−1}u‖^{1−θ}_{L^{n/(n−1)}} ‖A[D]u‖^θ_{L¹}).
/// θ = 1 reduces to the plain trace ratio bitwise.
pub fn multiplicative_ratio(
    a: &HomogeneousSymbol,
    u: &GridField,
    mu: &DiscreteMeasure,
    s: &Rat,
    theta: f64,
    morrey: Option<f64>,
    seed: u64,
) -> Result<RatioBreakdown, HarnessError> {
    let n = a.n();
    let exp = Exponents::for_codimension(n, s)?;
    let lo = exp.theta_lower(n);
    if theta <= rat_to_f64(&lo) || theta > 1.0 {
        return Err(HarnessError::ThetaRange { theta, lo: format_rat(&lo) });
    }
    let q = rat_to_f64(&exp.q);
    let k = a.order();
    let dk = derivative_tensor(u, k - 1, DiffMode::Spectral)?;
    let numerator = measure_norm(&dk, mu, q)?;
    let adu = apply_symbol(a, u, DiffMode::Spectral)?;
    let adu_l1 = lebesgue_norm(&adu, 1.0)?;
    let floor = 1e-14 * lebesgue_norm(u, 1.0)?.max(1e-300);
    if adu_l1 <= floor {
        return Err(HarnessError::ZeroDenominator(adu_l1));
    }
    let lambda = n as f64 - rat_to_f64(s);
    let morrey = morrey.unwrap_or_else(|| estimate_morrey_norm(mu, lambda, 200, seed));
    let p_cross = n as f64 / (n as f64 - 1.0);
    let dk_lebesgue = lebesgue_norm(&dk, p_cross)?;
    let denominator = morrey.powf(1.0 / q) * dk_lebesgue.powf(1.0 - theta) * adu_l1.powf(theta);
    Ok(RatioBreakdown { numerator, morrey, dk_lebesgue, adu_l1, ratio: numerator / denominator })
}

/// R = ‖D^{k−1}u‖_{L^q(dμ)} / (‖μ‖^{1/q}_{L^{1,n−s}} ‖A[D]u‖_{L¹}).
pub fn trace_ratio(
    a: &HomogeneousSymbol,
    u: &GridField,
    mu: &DiscreteMeasure,
    s: &Rat,
    morrey: Option<f64>,
    seed: u64,
) -> Result<RatioBreakdown, HarnessError> {
    multiplicative_ratio(a, u, mu, s, 1.0, morrey, seed)
}

/// Adams-type ratio for ‖I_α A[D]u‖_{L^q(dμ)} ≤ c ‖μ‖^{1/q} ‖A[D]u‖_{L¹}
/// with q = (n−s)/(n−α).
pub fn adams_ratio(
    a: &HomogeneousSymbol,
    u: &GridField,
    mu: &DiscreteMeasure,
    s: &Rat,
    alpha: f64,
    morrey: Option<f64>,
    seed: u64,
) -> Result<RatioBreakdown, HarnessError> {
    let n = a.n();
    if s < &Rat::zero() || s >= &Rat::one() {
        return Err(HarnessError::SRange(format_rat(s)));
    }
    let s_f = rat_to_f64(s);
    if !(s_f < alpha && alpha < n as f64) {
        return Err(HarnessError::AdamsAlphaRange { alpha, s: format_rat(s), n });
    }
    let q = (n as f64 - s_f) / (n as f64 - alpha);
    let adu = apply_symbol(a, u, DiffMode::Spectral)?;
    let adu_l1 = lebesgue_norm(&adu, 1.0)?;
    let floor = 1e-14 * lebesgue_norm(u, 1.0)?.max(1e-300);
    if adu_l1 <= floor {
        return Err(HarnessError::ZeroDenominator(adu_l1));
    }
    let ia = crate::fields::riesz_potential(&adu, alpha)?;
    let numerator = measure_norm(&ia, mu, q)?;
    let lambda = n as f64 - s_f;
    let morrey = morrey.unwrap_or_else(|| estimate_morrey_norm(mu, lambda, 200, seed));
    let denominator = morrey.powf(1.0 / q) * adu_l1;
    Ok(RatioBreakdown {
        numerator,
        morrey,
        dk_lebesgue: f64::NAN,
        adu_l1,
        ratio: numerator / denominator,
    })
}

/// Family sweep settings for the sufficiency tests: a shared smooth profile
/// (bias) with seeded Gaussian perturbations (noise) on low modes.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyConfig {
    pub members: usize,
    pub max_mode: i32,
    pub bias: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self { members: 16, max_mode: 3, bias: 1.0, noise: 0.3, seed: 1 }
    }
}

impl FamilyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Deterministic per-member seed stream.
pub fn member_seed(family_seed: u64, member: usize) -> u64 {
    shard_seed(family_seed, member as u64)
}

/// Sufficiency sweep: trace ratios over a seeded family of band-limited
/// compactly supported bumps at one or more resolutions (the same family
/// members are re-sampled at each resolution). Verdict bounded when the
/// within-family spread is ≤ 2× and the sup moves by ≤ 1.25× across a
/// resolution doubling.
pub fn sweep_sobolev(
    a: &HomogeneousSymbol,
    s: &Rat,
    mu: &DiscreteMeasure,
    gbox: &GridBox,
    resolutions: &[usize],
    family: &FamilyConfig,
) -> Result<InequalityReport, HarnessError> {
    let n = a.n();
    let exp = Exponents::for_codimension(n, s)?;
    let mut report = InequalityReport::new("sobolev-trace", a.name());
    report.s = Some(format_rat(s));
    report.q = Some(format_rat(&exp.q));
    report.beta = Some(format_rat(&exp.beta));
    report.seed = family.seed;
    report.resolutions = resolutions.to_vec();
    let lambda = n as f64 - rat_to_f64(s);
    let morrey = estimate_morrey_norm(mu, lambda, 200, shard_seed(family.seed, 9000));
    report.morrey_normalizer = Some(morrey);
    report.notes.push(format!(
        "family: {} members, modes ≤ {}, bias {}, noise {}",
        family.members, family.max_mode, family.bias, family.noise
    ));

    let mut sups = Vec::new();
    for (ridx, &res) in resolutions.iter().enumerate() {
        let ratios: Result<Vec<f64>, HarnessError> = (0..family.members)
            .into_par_iter()
            .map(|m| {
                let seed = member_seed(family.seed, m);
                let u = crate::fields::biased_band_limited_bump(
                    n,
                    a.dim_v(),
                    res,
                    gbox,
                    family.max_mode,
                    family.bias,
                    family.noise,
                    seed,
                );
                trace_ratio(a, &u, mu, s, Some(morrey), seed).map(|b| b.ratio)
            })
            .collect();
        let ratios = ratios?;
        if ridx == 0 {
            report.instance_ratios = ratios.clone();
            report.notes.push(format!("within-family spread at {res}: {:.3}", spread(&ratios)));
        }
        sups.push(ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    report.sup_ratio = Some(sups[0]);
    let family_ok = spread(&report.instance_ratios) <= 2.0;
    let resolution_ok = if sups.len() >= 2 {
        let r = sups[1] / sups[0];
        report.notes.push(format!("sup ratio change across doubling: {r:.3}"));
        (1.0 / 1.25..=1.25).contains(&r)
    } else {
        true
    };
    report.verdict =
        if family_ok && resolution_ok { RatioVerdict::Bounded } else { RatioVerdict::Inconclusive };
    Ok(report)
}

// ---------------------------------------------------------------------------
// Blow-up families
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BlowupConfig {
    pub resolution: usize,
    pub box_side: f64,
    pub levels: usize,
    pub measure_level: u32,
    pub seed: u64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self { resolution: 512, box_side: 2.0, levels: 5, measure_level: 8, seed: 1 }
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Orthonormal basis whose last vector is the given unit vector.
fn completion_basis(axis: &[f64]) -> Vec<Vec<f64>> {
    let n = axis.len();
    let mut basis: Vec<Vec<f64>> = vec![axis.to_vec()];
    let drop = (0..n).max_by(|&a, &b| axis[a].abs().total_cmp(&axis[b].abs())).unwrap();
    for i in 0..n {
        if i == drop {
            continue;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    let axis_vec = basis.remove(0);
    basis.push(axis_vec);
    basis
}

/// Non-ellipticity blow-up: plane-wave profile g(x·ξ₀) = |x·ξ₀|^{k−1−β} with
/// β = (1−s)(n−1)/(n−s), against μ = (full box in ξ₀⊥) × Cantor(1−s) along
/// ξ₀, over shrinking mollification scales ε_j = ε₀ 2^{−j}.
pub fn blowup_nonelliptic(
    a: &HomogeneousSymbol,
    xi0: &[f64],
    v: &[f64],
    s: &Rat,
    cfg: &BlowupConfig,
) -> Result<InequalityReport, HarnessError> {
    let n = a.n();
    let exp = Exponents::for_codimension(n, s)?;
    // witness re-verification: A[ξ₀]v must vanish
    let xi_hat = unit(xi0);
    let compiled = a.compile();
    let scale = sphere_samples(n, 32, 0)
        .iter()
        .map(|x| compiled.sigma_max(x))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let av = compiled.eval(&xi_hat) * DVector::from_vec(unit(v));
    let residual = av.norm() / scale;
    if residual > 1e-6 {
        return Err(HarnessError::WitnessRejected(format!(
            "|A[ξ₀]v| = {residual:.3e} relative; ξ₀ is not a symbol zero"
        )));
    }

    let beta = rat_to_f64(&exp.beta);
    let k = a.order();
    let g_exp = k as f64 - 1.0 - beta;
    let l = cfg.box_side;
    let gbox = GridBox::centered(n, l);
    let res = cfg.resolution;
    let h = l / res as f64;
    // pre-cutoff of the integrable singularity: the capped node value equals
    // the exact cell average of |t|^{g_exp}, so the sampled line mass matches
    // the continuum and the mollified plateau keeps its ε^{−β} scaling
    let cap = if g_exp < 0.0 {
        0.5 * h * (1.0 + g_exp).powf(-1.0 / g_exp)
    } else {
        0.5 * h
    };
    let v_hat = unit(v);
    let window_radius = l / 4.0;
    let u0 = GridField::from_fn(n, res, gbox.clone(), a.dim_v(), |x| {
        let t: f64 = x.iter().zip(&xi_hat).map(|(a, b)| a * b).sum();
        let g = t.abs().max(cap).powf(g_exp);
        let w = bump_window(x, &vec![0.0; n], window_radius);
        v_hat.iter().map(|&vi| vi * g * w).collect()
    });

    // μ: transverse full box × Cantor(1−s) along ξ₀, touching the singular
    // plane {x·ξ₀ = 0}. The axial extent sits at the bottom of the ε sweep:
    // the exponent bookkeeping is marginal (qβ = 1−s), so the visible
    // divergence rate 2^β per ε-halving lives in the regime where the whole
    // line measure sees the mollified singularity.
    let basis = completion_basis(&xi_hat);
    let alpha_line = 1.0 - rat_to_f64(s);
    let mut axes = vec![crate::measures::AxisSpec::Full; n - 1];
    axes.push(crate::measures::AxisSpec::Cantor { dim: alpha_line });
    let transverse_extent = l / 8.0;
    let eps0 = l / 8.0;
    let axial_extent = eps0 * 0.5f64.powi(cfg.levels as i32);
    let origin = vec![0.0; n];
    let product = crate::measures::build_product(&axes, cfg.measure_level, &origin, 1.0)?;
    let atoms: Vec<(Vec<f64>, f64)> = product
        .atoms
        .iter()
        .map(|(t, w)| {
            // transverse offsets centered, Cantor coordinate along the axis
            let mut y = vec![0.0; n];
            for (c, b) in t.iter().take(n - 1).zip(basis.iter().take(n - 1)) {
                let centered = (c - 0.5) * transverse_extent;
                for (yi, bi) in y.iter_mut().zip(b) {
                    *yi += centered * bi;
                }
            }
            for (yi, bi) in y.iter_mut().zip(&basis[n - 1]) {
                *yi += t[n - 1] * axial_extent * bi;
            }
            (y, *w)
        })
        .collect();
    let mu = DiscreteMeasure {
        n,
        atoms,
        dimension_alpha: (n - 1) as f64 + alpha_line,
        level: cfg.measure_level,
        support: product.support.clone(),
        atom_spacing: product.atom_spacing * axial_extent,
        recipe: None,
    };

    let q = rat_to_f64(&exp.q);
    let rows: Result<Vec<GrowthRow>, HarnessError> = (0..cfg.levels)
        .into_par_iter()
        .map(|j| {
            let eps = eps0 * 0.5f64.powi(j as i32);
            let uj = mollify(&u0, eps)?;
            let dk = derivative_tensor(&uj, k - 1, DiffMode::Spectral)?;
            let lhs = measure_norm(&dk, &mu, q)?;
            let adu = apply_symbol(a, &uj, DiffMode::Spectral)?;
            let rhs = lebesgue_norm(&adu, 1.0)?;
            Ok(GrowthRow { parameter: eps, lhs, rhs, ratio: lhs / rhs })
        })
        .collect();
    let rows = rows?;

    let mut report = InequalityReport::new("blowup-nonelliptic", a.name());
    report.s = Some(format_rat(s));
    report.q = Some(format_rat(&exp.q));
    report.beta = Some(format_rat(&exp.beta));
    report.resolutions = vec![res];
    report.seed = cfg.seed;
    report.verdict = diverging_verdict(&rows);
    report.growth = rows;
    report.notes.push(format!("witness residual {residual:.3e}"));
    report.notes.push(format!(
        "config: box {l}, {} levels, measure level {}",
        cfg.levels, cfg.measure_level
    ));
    Ok(report)
}

/// Control experiment companion to `blowup_nonelliptic`: the same field
/// family against a Lebesgue measure placed away from the singular plane
/// stays bounded.
pub fn nonelliptic_control(
    a: &HomogeneousSymbol,
    xi0: &[f64],
    v: &[f64],
    s: &Rat,
    cfg: &BlowupConfig,
) -> Result<InequalityReport, HarnessError> {
    let n = a.n();
    let exp = Exponents::for_codimension(n, s)?;
    let xi_hat = unit(xi0);
    let v_hat = unit(v);
    let beta = rat_to_f64(&exp.beta);
    let k = a.order();
    let g_exp = k as f64 - 1.0 - beta;
    let l = cfg.box_side;
    let gbox = GridBox::centered(n, l);
    let res = cfg.resolution;
    let h = l / res as f64;
    let cap = 0.5 * h;
    let u0 = GridField::from_fn(n, res, gbox.clone(), a.dim_v(), |x| {
        let t: f64 = x.iter().zip(&xi_hat).map(|(a, b)| a * b).sum();
        let g = t.abs().max(cap).powf(g_exp);
        let w = bump_window(x, &vec![0.0; n], l / 4.0);
        v_hat.iter().map(|&vi| vi * g * w).collect()
    });
    // Lebesgue patch centered at distance L/8 from the singular plane
    let mut center = vec![-l / 16.0; n];
    for (ci, bi) in center.iter_mut().zip(&xi_hat) {
        *ci += (l / 8.0) * bi;
    }
    let mu_box = crate::measures::build_cantor_product(n as f64, n, 5, &center, l / 8.0)?;
    let q = rat_to_f64(&exp.q);
    let eps0 = l / 8.0;
    let rows: Result<Vec<GrowthRow>, HarnessError> = (0..cfg.levels)
        .into_par_iter()
        .map(|j| {
            let eps = eps0 * 0.5f64.powi(j as i32);
            let uj = mollify(&u0, eps)?;
            let dk = derivative_tensor(&uj, k - 1, DiffMode::Spectral)?;
            let lhs = measure_norm(&dk, &mu_box, q)?;
            let adu = apply_symbol(a, &uj, DiffMode::Spectral)?;
            let rhs = lebesgue_norm(&adu, 1.0)?;
            Ok(GrowthRow { parameter: eps, lhs, rhs, ratio: lhs / rhs })
        })
        .collect();
    let rows = rows?;
    let mut report = InequalityReport::new("blowup-nonelliptic-control", a.name());
    report.s = Some(format_rat(s));
    report.resolutions = vec![res];
    let lhs: Vec<f64> = rows.iter().map(|r| r.lhs).collect();
    report.verdict =
        if spread(&lhs) <= 2.0 { RatioVerdict::Bounded } else { RatioVerdict::Inconclusive };
    report.growth = rows;
    Ok(report)
}

/// Non-cancellation blow-up: u is the periodic fundamental-solution profile
/// with A[D]u ≈ (mollified δ₀)w, built spectrally from A†[ξ]w; μ is a
/// cone-Cantor measure of dimension n−s whose cap is auto-selected where
/// |D^{k−1}u| on the sphere exceeds half its maximum. The sweep jointly
/// refines the fractal level and the source's inner cutoff.
pub fn blowup_noncancelling(
    a: &HomogeneousSymbol,
    w_raw: &[f64],
    s: &Rat,
    cfg: &BlowupConfig,
) -> Result<InequalityReport, HarnessError> {
    let n = a.n();
    let exp = Exponents::for_codimension(n, s)?;
    let worst = verify_noncancelling_witness(a, w_raw, 200, shard_seed(cfg.seed, 77));
    if worst > 1e-6 {
        return Err(HarnessError::WitnessRejected(format!(
            "w is {worst:.3e}-far from ∩ im A[ξ] over 200 samples (operator cancels?)"
        )));
    }
    let k = a.order();
    let l = cfg.box_side;
    let gbox = GridBox::centered(n, l);
    let res = cfg.resolution;
    let h = l / res as f64;

    let w_weighted: Vec<f64> =
        a.w_weights().iter().zip(w_raw).map(|(&m, &v)| v * (m as f64).sqrt()).collect();
    let compiled = a.compile();
    let i_pow_neg_k = Complex64::I.powi(-(k as i32));

    let build_u = |delta: f64| -> GridField {
        // û(ξ) = i^{−k} A†[ξ] ŵ_δ(ξ), zero mode removed; Gaussian source
        // taper at scale δ. The phase Π cos(ξᵢL/2) = (−1)^{Σmᵢ} places the
        // source at the box center.
        field_from_spectrum(n, res, &gbox, a.dim_v(), vec![1.0; a.dim_v()], |xi| {
            let norm2: f64 = xi.iter().map(|x| x * x).sum();
            if norm2 == 0.0 {
                return vec![Complex64::ZERO; a.dim_v()];
            }
            let m = compiled.eval(xi);
            let pinv = m.svd(true, true).pseudo_inverse(1e-12).expect("pinv");
            let taper = (-0.5 * norm2 * delta * delta).exp();
            let center_phase: f64 =
                xi.iter().map(|&x| (x * l / 2.0).cos().round()).product();
            let density = (res as f64 / l).powi(n as i32);
            let coeff = i_pow_neg_k * taper * center_phase * density;
            (0..a.dim_v())
                .map(|vi| {
                    let mut acc = 0.0;
                    for (wi, &wv) in w_weighted.iter().enumerate() {
                        acc += pinv[(vi, wi)] * wv;
                    }
                    coeff * acc
                })
                .collect()
        })
    };

    // cone auto-selection from |D^{k−1}u| on the sphere of radius L/8
    let probe = build_u(4.0 * h);
    let dk_probe = derivative_tensor(&probe, k - 1, DiffMode::Spectral)?;
    let weights = dk_probe.comp_weights().to_vec();
    let r_star = l / 8.0;
    let dirs = sphere_samples(n, 256, shard_seed(cfg.seed, 5));
    let mut values = Vec::with_capacity(dirs.len());
    for d in &dirs {
        let p: Vec<f64> = d.iter().map(|&di| di * r_star).collect();
        let vals = dk_probe.eval_at(&p)?;
        let norm2: f64 = vals.iter().zip(&weights).map(|(v, w)| w * v * v).sum();
        values.push(norm2.sqrt());
    }
    let (best_idx, &best) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(HarnessError::ConeSearchFailed)?;
    if best <= 0.0 {
        return Err(HarnessError::ConeSearchFailed);
    }
    let axis = dirs[best_idx].clone();
    let mut half_angle = std::f64::consts::FRAC_PI_4;
    for (d, &val) in dirs.iter().zip(&values) {
        if val < 0.5 * best {
            let cosang: f64 = d.iter().zip(&axis).map(|(a, b)| a * b).sum();
            let ang = cosang.clamp(-1.0, 1.0).acos();
            if ang < half_angle {
                half_angle = ang * 0.9;
            }
        }
    }
    half_angle = half_angle.max(std::f64::consts::PI / 16.0);

    // cone-Cantor measure: positive-orthant product of dimension n−s touching
    // the apex, arc-compressed into a vertical cone, then rotated to the axis
    let alpha_total = n as f64 - rat_to_f64(s);
    let c_extent = l / 12.0;
    let q = rat_to_f64(&exp.q);
    let basis = completion_basis(&axis);
    let rotate = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (c, b) in x.iter().zip(basis.iter()) {
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi += c * bi;
            }
        }
        y
    };
    let vertical_axis = {
        let mut e = vec![0.0; n];
        e[n - 1] = 1.0;
        e
    };

    let rows: Result<Vec<GrowthRow>, HarnessError> = (0..cfg.levels)
        .into_par_iter()
        .map(|j| {
            let level = cfg.measure_level + j as u32;
            let delta = ((l / 8.0) * 0.5f64.powi(j as i32)).max(2.0 * h);
            let uj = build_u(delta);
            let dkj = derivative_tensor(&uj, k - 1, DiffMode::Spectral)?;
            let base = build_cantor_product(alpha_total, n, level, &vec![0.0; n], c_extent)?;
            let (coned, _dropped) =
                map_into_cone(&base, &vec![0.0; n], &vertical_axis, half_angle)?;
            let atoms: Vec<(Vec<f64>, f64)> =
                coned.atoms.iter().map(|(x, w)| (rotate(x), *w)).collect();
            let mu = DiscreteMeasure {
                n,
                atoms,
                dimension_alpha: alpha_total,
                level,
                support: crate::measures::SupportDescriptor::Cone {
                    apex: vec![0.0; n],
                    axis: axis.clone(),
                    half_angle,
                },
                atom_spacing: coned.atom_spacing,
                recipe: None,
            };
            let lhs = measure_norm(&dkj, &mu, q)?;
            // RHS: mass of the mollified source ≈ |w|
            let adu = apply_symbol(a, &uj, DiffMode::Spectral)?;
            let rhs = lebesgue_norm(&adu, 1.0)?;
            Ok(GrowthRow { parameter: level as f64, lhs, rhs, ratio: lhs / rhs })
        })
        .collect();
    let rows = rows?;

    let mut report = InequalityReport::new("blowup-noncancelling", a.name());
    report.s = Some(format_rat(s));
    report.q = Some(format_rat(&exp.q));
    report.beta = Some(format_rat(&exp.beta));
    report.resolutions = vec![res];
    report.seed = cfg.seed;
    report.verdict = diverging_verdict(&rows);
    report.growth = rows;
    report.notes.push(format!(
        "witness defect {worst:.3e}; cone axis {axis:?}, half-angle {half_angle:.3}"
    ));
    report.notes.push(format!(
        "config: box {l}, {} levels, base measure level {}",
        cfg.levels, cfg.measure_level
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Hyperplane traces (s = 1)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct HalfspaceRatio {
    /// ‖D^{k−1}u‖_{L¹(Σ)}
    pub trace_l1: f64,
    /// ‖A[D]u‖_{L¹} over the chosen side (or everything)
    pub bulk_l1: f64,
    pub ratio: f64,
}

/// L¹(Σ)-trace of D^{k−1}u on the grid hyperplane {x_axis = coord} divided by
/// ‖A[D]u‖_{L¹} over ℝⁿ or over {x_axis − coord > 0} only.
pub fn halfspace_trace_ratio(
    a: &HomogeneousSymbol,
    u: &GridField,
    axis: usize,
    coord: f64,
    positive_side_only: bool,
) -> Result<HalfspaceRatio, HarnessError> {
    let k = a.order();
    let dk = derivative_tensor(u, k - 1, DiffMode::Spectral)?;
    let trace_l1 = slice_l1_norm(&dk, axis, coord, None)?;
    let adu = apply_symbol(a, u, DiffMode::Spectral)?;
    let bulk_l1 = if positive_side_only {
        halfspace_l1_norm(&adu, axis, coord, true)?
    } else {
        lebesgue_norm(&adu, 1.0)?
    };
    if bulk_l1 <= 0.0 {
        return Err(HarnessError::ZeroDenominator(bulk_l1));
    }
    Ok(HalfspaceRatio { trace_l1, bulk_l1, ratio: trace_l1 / bulk_l1 })
}

/// Family version of the halfspace trace test with the bounded-verdict rule.
/// `exploratory` marks runs on operators whose endpoint behavior is an open
/// question; their verdict is reported as exploratory, never bounded.
pub fn sweep_halfspace(
    a: &HomogeneousSymbol,
    gbox: &GridBox,
    resolutions: &[usize],
    family: &FamilyConfig,
    exploratory: bool,
) -> Result<InequalityReport, HarnessError> {
    let n = a.n();
    let axis = n - 1;
    let coord = gbox.origin[axis] + gbox.side / 2.0;
    let mut report = InequalityReport::new("halfspace-trace", a.name());
    report.seed = family.seed;
    report.resolutions = resolutions.to_vec();
    report.notes.push(format!(
        "family: {} members, modes ≤ {}, bias {}, noise {}",
        family.members, family.max_mode, family.bias, family.noise
    ));
    let mut sups = Vec::new();
    for (ridx, &res) in resolutions.iter().enumerate() {
        let ratios: Result<Vec<f64>, HarnessError> = (0..family.members)
            .into_par_iter()
            .map(|m| {
                let seed = member_seed(family.seed, m);
                let u = crate::fields::biased_band_limited_bump(
                    n,
                    a.dim_v(),
                    res,
                    gbox,
                    family.max_mode,
                    family.bias,
                    family.noise,
                    seed,
                );
                halfspace_trace_ratio(a, &u, axis, coord, true).map(|r| r.ratio)
            })
            .collect();
        let ratios = ratios?;
        if ridx == 0 {
            report.instance_ratios = ratios.clone();
        }
        sups.push(ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    report.sup_ratio = Some(sups[0]);
    if exploratory {
        report.verdict = RatioVerdict::Exploratory;
        report.notes.push(
            "exploratory — open conjecture: endpoint trace behavior of elliptic strongly \
             cancelling operators of order ≥ 2 is not settled"
                .into(),
        );
        return Ok(report);
    }
    let family_ok = spread(&report.instance_ratios) <= 2.0;
    let res_ok = sups.len() < 2 || (sups[1] / sups[0] <= 2.0 && sups[0] / sups[1] <= 2.0);
    report.verdict =
        if family_ok && res_ok { RatioVerdict::Bounded } else { RatioVerdict::Inconclusive };
    Ok(report)
}

/// Boundary-trace blow-up for non-ℂ-elliptic operators: u_ε(x) =
/// f_ε(x·η + i x·ν)v with f_ε^{(k−1)}(z) = (z + εi)^{−1}, cut off above the
/// hyperplane {x·ν = 0}; the trace norm grows like log(1/ε) while
/// ‖A[D](ρu_ε)‖_{L¹(Σ⁺)} stays bounded.
pub fn wirtinger_blowup(
    a: &HomogeneousSymbol,
    eta: &[f64],
    nu: &[f64],
    v_re: &[f64],
    v_im: &[f64],
    cfg: &BlowupConfig,
) -> Result<InequalityReport, HarnessError> {
    let n = a.n();
    let k = a.order();
    // witness re-verification: A[η + iν]v ≈ 0
    let compiled = a.compile();
    let scale = sphere_samples(n, 32, 0)
        .iter()
        .map(|x| compiled.sigma_max(x))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let m = compiled.eval_complex(eta, nu);
    let v: Vec<Complex64> =
        v_re.iter().zip(v_im).map(|(&re, &im)| Complex64::new(re, im)).collect();
    let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let residual = {
        let img = &m * DVector::from_vec(v.clone());
        img.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / (scale * vnorm)
    };
    if residual > 1e-6 {
        return Err(HarnessError::WitnessRejected(format!(
            "|A[η+iν]v| = {residual:.3e} relative; (η, ν, v) is not a complex kernel triple"
        )));
    }
    // the trace hyperplane must be grid aligned: ν along a coordinate axis
    let axis = (0..n).max_by(|&i, &j| nu[i].abs().total_cmp(&nu[j].abs())).unwrap();
    let nu_norm = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu[axis].abs() < (1.0 - 1e-9) * nu_norm {
        return Err(HarnessError::NotAxisAligned);
    }
    let nu_sign = nu[axis].signum();

    let l = cfg.box_side;
    let gbox = GridBox::centered(n, l);
    let res = cfg.resolution;
    let h = l / res as f64;
    let eps0: f64 = l / 8.0;
    let eps_min = eps0 * 0.5f64.powi(cfg.levels as i32 - 1);
    if eps_min < 4.0 * h {
        return Err(HarnessError::Field(FieldError::EpsBelowScale {
            eps: eps_min,
            min: 4.0 * h,
        }));
    }

    // f with f^{(k−1)}(z) = (z + iε)^{−1}: explicit antiderivatives
    // F_m(z) = (z+iε)^{m−1}(log(z+iε) − H_{m−1})/(m−1)! for m = k; the
    // principal log is safe since Im(z + iε) > 0 on the cutoff support
    let f_eps = move |z: Complex64, eps: f64| -> Complex64 {
        let zz = z + Complex64::new(0.0, eps);
        if k == 1 {
            return zz.inv();
        }
        let m = k - 1;
        let mut harmonic = 0.0;
        for t in 1..m {
            harmonic += 1.0 / t as f64;
        }
        let mut fact = 1.0;
        for t in 1..=m.saturating_sub(1) {
            fact *= t as f64;
        }
        zz.powu(m - 1) * (zz.ln() - harmonic) / fact
    };

    let smooth_step = |s: f64| -> f64 {
        let b = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
        b(s) / (b(s) + b(1.0 - s))
    };

    let rows: Result<Vec<GrowthRow>, HarnessError> = (0..cfg.levels)
        .into_par_iter()
        .map(|j| {
            let eps = eps0 * 0.5f64.powi(j as i32);
            let make_field = |take_re: bool| {
                GridField::from_fn(n, res, gbox.clone(), a.dim_v(), |x| {
                    let radial = bump_window(x, &vec![0.0; n], 0.4 * l);
                    let t = nu_sign * x[axis];
                    let taper = smooth_step((t + 0.9 * eps) / (0.9 * eps));
                    let cutoff = radial * taper;
                    if cutoff == 0.0 {
                        // never evaluate f where the cutoff vanishes: the
                        // pole z = −iε sits inside the masked region
                        return vec![0.0; a.dim_v()];
                    }
                    let ze: f64 = x.iter().zip(eta).map(|(a, b)| a * b).sum();
                    let zn: f64 = x.iter().zip(nu).map(|(a, b)| a * b).sum();
                    let f = f_eps(Complex64::new(ze, zn), eps);
                    v.iter()
                        .map(|vi| {
                            let val = f * vi;
                            cutoff * if take_re { val.re } else { val.im }
                        })
                        .collect()
                })
            };
            let eval = |field: &GridField| -> Result<(f64, f64), HarnessError> {
                let dk = derivative_tensor(field, k - 1, DiffMode::Spectral)?;
                let origin = vec![0.0; n];
                let lhs = slice_l1_norm(&dk, axis, 0.0, Some((&origin, 1.0)))?;
                let adu = apply_symbol(a, field, DiffMode::Spectral)?;
                let rhs = halfspace_l1_norm(&adu, axis, 0.0, nu_sign > 0.0)?;
                Ok((lhs, rhs))
            };
            let re_field = make_field(true);
            let (lhs_re, rhs_re) = eval(&re_field)?;
            let im_field = make_field(false);
            let (lhs_im, rhs_im) = eval(&im_field)?;
            // the construction's choice: whichever part realizes the larger
            // trace norm
            let (lhs, rhs) = if lhs_re >= lhs_im { (lhs_re, rhs_re) } else { (lhs_im, rhs_im) };
            Ok(GrowthRow { parameter: eps, lhs, rhs, ratio: lhs / rhs })
        })
        .collect();
    let rows = rows?;

    let mut report = InequalityReport::new("wirtinger-blowup", a.name());
    report.resolutions = vec![res];
    report.seed = cfg.seed;
    let incs: Vec<f64> = rows.windows(2).map(|w| w[1].lhs - w[0].lhs).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.rhs).collect();
    let rhs_med = median(&rhs);
    let rhs_ok = rhs.iter().all(|&r| r <= 2.0 * rhs_med && r >= rhs_med / 2.0);
    // log-type growth: near-constant increment per ε halving
    let log_type = !incs.is_empty()
        && incs.iter().all(|&d| d > 0.0)
        && incs.windows(2).all(|w| (w[1] / w[0] - 1.0).abs() <= 0.30);
    report.verdict =
        if log_type && rhs_ok { RatioVerdict::Diverging } else { RatioVerdict::Inconclusive };
    report.growth = rows;
    report.notes.push(format!("witness residual {residual:.3e}"));
    report.notes.push(format!("config: box {l}, {} levels", cfg.levels));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Strict-convergence demos
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct StrictDemoRow {
    pub j: u32,
    /// |Dρ_j|(ℝ²) = 2π(1 + 1/(2j)), by exact radial quadrature.
    pub total_variation: f64,
    /// trace of ρ_j on the unit circle (exactly 1 for every j).
    pub trace_on_circle: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrictDemoReport {
    pub rows: Vec<StrictDemoRow>,
    pub limit_total_variation: f64,
    /// interior trace of the strict limit 1_{B(0,1)}: the average ½ of the
    /// one-sided traces 1 and 0.
    pub limit_trace: f64,
}

/// The radial-ramp counterexample: ρ_j converges strictly to 1_{B(0,1)}, each
/// ρ_j has boundary trace 1, while the limit's interior trace is ½.
pub fn strict_discontinuity_demo(j_levels: u32) -> StrictDemoReport {
    assert!(j_levels >= 3, "need at least three ramp levels");
    let tau = std::f64::consts::TAU;
    let rows = (1..=j_levels)
        .map(|j| {
            let jf = f64::from(j);
            // |Dρ_j|(ℝ²) = ∫_1^{1+1/j} j · 2πr dr; the midpoint rule is exact
            // for the linear integrand
            let midpoint = 1.0 + 0.5 / jf;
            let total_variation = jf * tau * midpoint * (1.0 / jf);
            StrictDemoRow { j, total_variation, trace_on_circle: 1.0 }
        })
        .collect();
    let inner = 1.0;
    let outer = 0.0;
    StrictDemoReport { rows, limit_total_variation: tau, limit_trace: 0.5 * (inner + outer) }
}

#[derive(Clone, Debug, Serialize)]
pub struct MollificationRow {
    pub eps: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MollificationReport {
    pub rows: Vec<MollificationRow>,
    pub target: f64,
    pub final_relative_error: f64,
    pub monotone_error_decay: bool,
}

/// Strict-convergence check ‖A[D](ρ_ε * u)‖_{L¹} → target total variation
/// over an ε sweep. Finite differences avoid the spectral ringing of barely
/// resolved mollified jumps; convolution contracts the total variation, so
/// for indicator-type inputs the mass approaches the target from below.
pub fn mollification_strict_check(
    a: &HomogeneousSymbol,
    u: &GridField,
    target: f64,
    eps_levels: &[f64],
    mode: DiffMode,
) -> Result<MollificationReport, HarnessError> {
    let mut rows = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        let ue = mollify(u, eps)?;
        let adu = apply_symbol(a, &ue, mode)?;
        rows.push(MollificationRow { eps, mass: lebesgue_norm(&adu, 1.0)? });
    }
    let errors: Vec<f64> = rows.iter().map(|r| (r.mass - target).abs()).collect();
    let monotone = errors.windows(2).all(|w| w[1] <= w[0] * 1.05);
    let final_relative_error = errors.last().copied().unwrap_or(f64::INFINITY) / target.abs();
    Ok(MollificationReport { rows, target, final_relative_error, monotone_error_decay: monotone })
}

/// Disk indicator with its exact perimeter.
pub fn indicator_disk(res: usize, gbox: &GridBox, radius: f64) -> (GridField, f64) {
    let n = gbox.origin.len();
    let field = GridField::from_fn(n, res, gbox.clone(), 1, |x| {
        let r2: f64 = x.iter().map(|&xi| xi * xi).sum();
        vec![if r2 < radius * radius { 1.0 } else { 0.0 }]
    });
    (field, std::f64::consts::TAU * radius)
}

/// Square indicator with its exact perimeter.
pub fn indicator_square(res: usize, gbox: &GridBox, half_side: f64) -> (GridField, f64) {
    let n = gbox.origin.len();
    let field = GridField::from_fn(n, res, gbox.clone(), 1, |x| {
        vec![if x.iter().all(|&xi| xi.abs() < half_side) { 1.0 } else { 0.0 }]
    });
    (field, 8.0 * half_side)
}

/// Cone-Cantor measure used by the sufficiency sweeps: product Cantor of the
/// requested dimension touching the apex, arc-compressed into a vertical
/// cone, translated to `center`.
pub fn default_cone_cantor(
    n: usize,
    dimension: f64,
    level: u32,
    center: &[f64],
    extent: f64,
) -> Result<DiscreteMeasure, HarnessError> {
    let base = build_cantor_product(dimension, n, level, &vec![0.0; n], extent)?;
    let mut axis = vec![0.0; n];
    axis[n - 1] = 1.0;
    let (coned, _) = map_into_cone(&base, &vec![0.0; n], &axis, 0.5)?;
    let atoms = coned
        .atoms
        .iter()
        .map(|(x, w)| (x.iter().zip(center).map(|(a, c)| a + c).collect(), *w))
        .collect();
    Ok(DiscreteMeasure {
        n,
        atoms,
        dimension_alpha: dimension,
        level,
        support: crate::measures::SupportDescriptor::Cone {
            apex: center.to_vec(),
            axis,
            half_angle: 0.5,
        },
        atom_spacing: coned.atom_spacing,
        recipe: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog, partial_derivative};
    use crate::fields::random_band_limited_bump;
    use crate::rational::rat;

    fn unit_gbox() -> GridBox {
        GridBox::unit(2)
    }

    #[test]
    fn exponent_bookkeeping_is_exact() {
        let exp = Exponents::for_codimension(2, &rat(1, 2)).unwrap();
        assert_eq!(format_rat(&exp.q), "3/2");
        assert_eq!(format_rat(&exp.beta), "1/3");
        assert_eq!(format_rat(&exp.theta_lower(2)), "1/3");
        assert!(Exponents::for_codimension(2, &rat(3, 2)).is_err());
    }

    #[test]
    fn trace_ratio_finite_on_bump() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let u = random_band_limited_bump(2, 2, 128, &unit_gbox(), 3, 42);
        let mu = build_cantor_product(2.0, 2, 5, &[0.3, 0.3], 0.4).unwrap();
        let r = trace_ratio(&e, &u, &mu, &rat(0, 1), None, 1).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
    }

    #[test]
    fn nullspace_field_far_from_measure_has_small_ratio() {
        // a cut-off rigid deformation (in ker E) placed away from μ's
        // support: the numerator collapses relative to a generic bump
        let e = catalog("sym_gradient", 2, None).unwrap();
        let gbox = GridBox::unit(2);
        // μ inside the generic bump's support, away from the rigid field
        let mu = build_cantor_product(1.5, 2, 5, &[0.35, 0.35], 0.1).unwrap();
        let rigid = GridField::from_fn(2, 128, gbox.clone(), 2, |x| {
            let w = bump_window(x, &[0.7, 0.7], 0.15);
            vec![-(x[1] - 0.7) * w, (x[0] - 0.7) * w]
        });
        let generic = random_band_limited_bump(2, 2, 128, &gbox, 3, 4);
        let s = rat(1, 2);
        let r_null = trace_ratio(&e, &rigid, &mu, &s, Some(1.0), 1).unwrap();
        let r_gen = trace_ratio(&e, &generic, &mu, &s, Some(1.0), 1).unwrap();
        assert!(
            r_null.ratio < 0.2 * r_gen.ratio,
            "nullspace-far ratio {} vs generic {}",
            r_null.ratio,
            r_gen.ratio
        );
    }

    #[test]
    fn adams_at_alpha_k_matches_trace_ratio_for_gradient() {
        // for the gradient, the multiplier of I₁∇ has unit magnitude, so the
        // Adams ratio at α = k, s = 0 against the Lebesgue grid reproduces
        // the plain trace ratio
        let g = catalog("gradient", 2, None).unwrap();
        let gbox = GridBox::unit(2);
        let u = random_band_limited_bump(2, 1, 256, &gbox, 3, 21);
        let mu = build_cantor_product(2.0, 2, 7, &[0.0, 0.0], 1.0).unwrap();
        let s = rat(0, 1);
        let adams = adams_ratio(&g, &u, &mu, &s, 1.0, Some(1.0), 1).unwrap();
        let trace = trace_ratio(&g, &u, &mu, &s, Some(1.0), 1).unwrap();
        let rel = (adams.ratio - trace.ratio).abs() / trace.ratio;
        assert!(rel < 0.05, "Adams vs trace disagreement {rel}");
    }

    #[test]
    fn multiplicative_family_bounded_at_interior_theta() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let gbox = GridBox::unit(2);
        let mu = default_cone_cantor(2, 1.5, 6, &[0.5, 0.5], 0.18).unwrap();
        let s = rat(1, 2);
        let fam = FamilyConfig { members: 6, ..FamilyConfig::with_seed(5) };
        let ratios: Vec<f64> = (0..fam.members)
            .map(|m| {
                let seed = member_seed(fam.seed, m);
                let u = crate::fields::biased_band_limited_bump(
                    2, 2, 128, &gbox, fam.max_mode, fam.bias, fam.noise, seed,
                );
                multiplicative_ratio(&e, &u, &mu, &s, 0.8, Some(1.0), seed).unwrap().ratio
            })
            .collect();
        assert!(spread(&ratios) <= 2.0, "spread {} for θ = 0.8", spread(&ratios));
    }

    #[test]
    fn gradient_halfspace_family_is_bounded() {
        let g = catalog("gradient", 2, None).unwrap();
        let gbox = GridBox::unit(2);
        let fam = FamilyConfig { members: 8, ..FamilyConfig::with_seed(12) };
        let rep = sweep_halfspace(&g, &gbox, &[128], &fam, false).unwrap();
        assert_eq!(rep.verdict, RatioVerdict::Bounded, "{:?}", rep.instance_ratios);
    }

    #[test]
    fn zero_field_is_a_zero_denominator_error() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let u = GridField::zeros(2, 32, unit_gbox(), 2);
        let mu = build_cantor_product(2.0, 2, 4, &[0.3, 0.3], 0.4).unwrap();
        assert!(matches!(
            trace_ratio(&e, &u, &mu, &rat(0, 1), None, 1),
            Err(HarnessError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn theta_one_reduces_to_trace_ratio_bitwise() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let u = random_band_limited_bump(2, 2, 64, &unit_gbox(), 2, 9);
        let mu = build_cantor_product(1.5, 2, 5, &[0.3, 0.3], 0.4).unwrap();
        let s = rat(1, 2);
        let a = trace_ratio(&e, &u, &mu, &s, Some(1.0), 1).unwrap();
        let b = multiplicative_ratio(&e, &u, &mu, &s, 1.0, Some(1.0), 1).unwrap();
        assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
    }

    #[test]
    fn theta_range_is_enforced() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let u = random_band_limited_bump(2, 2, 64, &unit_gbox(), 2, 9);
        let mu = build_cantor_product(1.5, 2, 5, &[0.3, 0.3], 0.4).unwrap();
        // s = 0.95 on ℝ²: lower endpoint 0.95/1.05 = 19/21 ≈ 0.905 > 0.9
        let s = rat(19, 20);
        match multiplicative_ratio(&e, &u, &mu, &s, 0.9, Some(1.0), 1) {
            Err(HarnessError::ThetaRange { lo, .. }) => assert_eq!(lo, "19/21"),
            other => panic!("expected θ range error, got {other:?}"),
        }
    }

    #[test]
    fn adams_rejects_s_equal_alpha() {
        let g = catalog("gradient", 2, None).unwrap();
        let u = random_band_limited_bump(2, 1, 64, &unit_gbox(), 2, 3);
        let mu = build_cantor_product(1.5, 2, 5, &[0.3, 0.3], 0.4).unwrap();
        assert!(matches!(
            adams_ratio(&g, &u, &mu, &rat(1, 2), 0.5, None, 1),
            Err(HarnessError::AdamsAlphaRange { .. })
        ));
    }

    #[test]
    fn adams_single_mode_matches_hand_computation() {
        // u = cos(2πx₁): ∇u = −2π sin(2πx₁) e₁ is a single mode and every
        // quantity is closed-form on the grid itself. Measure level 6 at
        // resolution 128 puts the atoms exactly on grid nodes, so no
        // interpolation error enters.
        let res = 128usize;
        let g = catalog("gradient", 2, None).unwrap();
        let u = crate::fields::trig_mode(2, res, &unit_gbox(), &[1, 0], 0.0);
        let mu = build_cantor_product(2.0, 2, 6, &[0.0, 0.0], 1.0).unwrap();
        let r = adams_ratio(&g, &u, &mu, &rat(0, 1), 1.0, Some(1.0), 1).unwrap();
        // I₁∇u = −sin(2πx₁) e₁ (multiplier 1/(2π) at the unit mode);
        // q = 2: numerator² = Σ_atoms 4^{−L} sin²(2π(2j+1)/128) = 1/2 exactly.
        // Denominator: ‖∇u‖₁ on the grid = 2π (2/N) cot(π/N).
        let nf = res as f64;
        let denominator = std::f64::consts::TAU * (2.0 / nf)
            / (std::f64::consts::PI / nf).tan();
        let expected = (0.5f64).sqrt() / denominator;
        assert!(
            (r.ratio - expected).abs() < 1e-6 * expected,
            "ratio {} vs oracle {expected}",
            r.ratio
        );
    }

    #[test]
    fn blowup_nonelliptic_partial_derivative_diverges() {
        let a = partial_derivative(2, 0);
        let cfg =
            BlowupConfig { resolution: 256, box_side: 2.0, levels: 5, measure_level: 8, seed: 3 };
        let rep = blowup_nonelliptic(&a, &[0.0, 1.0], &[1.0], &rat(1, 2), &cfg).unwrap();
        assert_eq!(rep.verdict, RatioVerdict::Diverging, "rows {:?}", rep.growth);
    }

    #[test]
    fn blowup_nonelliptic_rejects_elliptic_operators() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let cfg = BlowupConfig::default();
        assert!(matches!(
            blowup_nonelliptic(&e, &[0.0, 1.0], &[1.0, 0.0], &rat(1, 2), &cfg),
            Err(HarnessError::WitnessRejected(_))
        ));
    }

    #[test]
    fn nonelliptic_control_is_bounded() {
        let a = partial_derivative(2, 0);
        let cfg =
            BlowupConfig { resolution: 256, box_side: 2.0, levels: 5, measure_level: 8, seed: 3 };
        let rep = nonelliptic_control(&a, &[0.0, 1.0], &[1.0], &rat(1, 2), &cfg).unwrap();
        assert_eq!(rep.verdict, RatioVerdict::Bounded, "rows {:?}", rep.growth);
    }

    #[test]
    fn blowup_noncancelling_wirtinger_diverges() {
        let w = catalog("wirtinger", 2, None).unwrap();
        let cfg =
            BlowupConfig { resolution: 256, box_side: 2.0, levels: 5, measure_level: 6, seed: 5 };
        let rep = blowup_noncancelling(&w, &[1.0, 0.0], &rat(1, 2), &cfg).unwrap();
        assert_eq!(rep.verdict, RatioVerdict::Diverging, "rows {:?}", rep.growth);
    }

    #[test]
    fn blowup_noncancelling_rejects_cancelling_operators() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let cfg = BlowupConfig::default();
        assert!(matches!(
            blowup_noncancelling(&e, &[1.0, 0.0, 0.0], &rat(1, 2), &cfg),
            Err(HarnessError::WitnessRejected(_))
        ));
    }

    #[test]
    fn halfspace_trace_vanishes_for_far_support() {
        let g = catalog("gradient", 2, None).unwrap();
        let gbox = GridBox::centered(2, 4.0);
        let u = GridField::from_fn(2, 64, gbox, 1, |x| vec![bump_window(x, &[0.0, 1.2], 0.5)]);
        let r = halfspace_trace_ratio(&g, &u, 1, -1.0, false).unwrap();
        assert!(r.trace_l1 < 1e-12);
    }

    #[test]
    fn wirtinger_blowup_log_growth() {
        let w = catalog("wirtinger", 2, None).unwrap();
        let cfg =
            BlowupConfig { resolution: 512, box_side: 4.0, levels: 5, measure_level: 0, seed: 2 };
        let rep = wirtinger_blowup(&w, &[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, -1.0], &cfg)
            .unwrap();
        assert_eq!(rep.verdict, RatioVerdict::Diverging, "rows {:?}", rep.growth);
        // increments track the analytic oracle Δ 2asinh(1/ε)
        let oracle: Vec<f64> =
            rep.growth.iter().map(|r| 2.0 * (1.0 / r.parameter).asinh()).collect();
        let ratios: Vec<f64> = rep
            .growth
            .windows(2)
            .zip(oracle.windows(2))
            .map(|(w, o)| (w[1].lhs - w[0].lhs) / (o[1] - o[0]))
            .collect();
        let med = median(&ratios);
        for r in &ratios {
            assert!((r / med - 1.0).abs() < 0.3, "oracle-normalized increments {ratios:?}");
        }
    }

    #[test]
    fn wirtinger_blowup_rejects_c_elliptic() {
        let e = catalog("sym_gradient", 2, None).unwrap();
        let cfg = BlowupConfig::default();
        assert!(matches!(
            wirtinger_blowup(&e, &[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, -1.0], &cfg),
            Err(HarnessError::WitnessRejected(_))
        ));
    }

    #[test]
    fn strict_demo_exact_values() {
        let rep = strict_discontinuity_demo(6);
        for row in &rep.rows {
            let expect = std::f64::consts::TAU * (1.0 + 0.5 / f64::from(row.j));
            assert!((row.total_variation - expect).abs() < 1e-12);
            assert_eq!(row.trace_on_circle, 1.0);
        }
        // j = 4: 2π(1 + 1/8) = 7.0686…
        assert!((rep.rows[3].total_variation - 7.0685834705770345).abs() < 1e-6);
        assert_eq!(rep.limit_trace, 0.5);
    }

    #[test]
    fn mollification_square_converges_to_perimeter() {
        let g = catalog("gradient", 2, None).unwrap();
        let gbox = GridBox::centered(2, 4.0);
        let (u, perimeter) = indicator_square(512, &gbox, 1.0);
        let rep = mollification_strict_check(
            &g,
            &u,
            perimeter,
            &[0.32, 0.16, 0.08],
            DiffMode::FiniteDifference,
        )
        .unwrap();
        assert!(rep.final_relative_error < 0.02, "error {}", rep.final_relative_error);
        assert!(rep.monotone_error_decay, "{:?}", rep.rows);
    }

    #[test]
    fn mollification_smooth_field_is_stable() {
        let g = catalog("gradient", 2, None).unwrap();
        let gbox = GridBox::centered(2, 4.0);
        let u = GridField::from_fn(2, 256, gbox, 1, |x| vec![bump_window(x, &[0.0, 0.0], 1.0)]);
        let adu = apply_symbol(&g, &u, DiffMode::Spectral).unwrap();
        let target = lebesgue_norm(&adu, 1.0).unwrap();
        let rep = mollification_strict_check(
            &g,
            &u,
            target,
            &[0.05, 0.0375, 0.03125],
            DiffMode::Spectral,
        )
        .unwrap();
        assert!(rep.final_relative_error < 0.001, "error {}", rep.final_relative_error);
    }

    #[test]
    fn growth_csv_has_header_and_rows() {
        let mut rep = InequalityReport::new("demo", None);
        rep.growth.push(GrowthRow { parameter: 1.0, lhs: 2.0, rhs: 3.0, ratio: 2.0 / 3.0 });
        let csv = rep.growth_csv();
        assert!(csv.starts_with("parameter,lhs,rhs,ratio\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
