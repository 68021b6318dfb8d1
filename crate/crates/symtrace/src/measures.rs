//! Ahlfors-regular measures at desk scale: finite atomic approximations of
//! Cantor-type product fractals, their cone-mapped images, hyperplane and
//! Lebesgue grid measures, plus ball-counting statistics.
//!
//! Fractals are realized as equal-weight atoms at generation-`level` cell
//! centers of an iterated function system, so every ball count is an exact
//! finite sum.

use crate::numeric::{least_squares_slope, seeded_rng};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("target dimension α = {alpha} outside (0, {n}]")]
    AlphaRange { alpha: f64, n: usize },
    #[error("generation level must be ≥ 1")]
    BadLevel,
    #[error("cone half-angle {half_angle} outside (0, π/2)")]
    DegenerateCone { half_angle: f64 },
    #[error("no resolvable radii at level {level}; need level ≥ {suggested}")]
    NoResolvableRadii { level: u32, suggested: u32 },
    #[error("shell index {requested} not resolvable at this level; max J = {max_j}")]
    ShellTooDeep { requested: u32, max_j: u32 },
    #[error("measure file error: {0}")]
    Io(String),
    #[error("measure parse error: {0}")]
    Parse(String),
}

/// What the atoms approximate; carried for bookkeeping and validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SupportDescriptor {
    Cube { origin: Vec<f64>, side: f64 },
    Cone { apex: Vec<f64>, axis: Vec<f64>, half_angle: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Lebesgue { origin: Vec<f64>, side: f64, grid: usize },
}

/// Per-axis factor of a product construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AxisSpec {
    /// Full interval: the dyadic IFS with ratio ½ (dimension 1).
    Full,
    /// Two-branch Cantor set of the given dimension; contraction ratio
    /// r = 2^(−1/dim) solves log 2 / log(1/r) = dim.
    Cantor { dim: f64 },
    /// Degenerate single point at the interval midpoint (dimension 0).
    Point,
}

impl AxisSpec {
    pub fn dimension(&self) -> f64 {
        match self {
            AxisSpec::Full => 1.0,
            AxisSpec::Cantor { dim } => *dim,
            AxisSpec::Point => 0.0,
        }
    }

    fn ratio(&self) -> Option<f64> {
        match self {
            AxisSpec::Full => Some(0.5),
            AxisSpec::Cantor { dim } => Some(2.0_f64.powf(-1.0 / dim)),
            AxisSpec::Point => None,
        }
    }
}

/// Deterministic construction recipe; the compact on-disk format stores this
/// instead of the atom list, so round-trips are lossless at any level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecipe {
    pub axes: Vec<AxisSpec>,
    pub level: u32,
    pub box_origin: Vec<f64>,
    pub box_side: f64,
    pub cone: Option<(Vec<f64>, Vec<f64>, f64)>, // apex, axis, half-angle
}

#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    pub n: usize,
    /// (location, weight) pairs; weights positive.
    pub atoms: Vec<(Vec<f64>, f64)>,
    pub dimension_alpha: f64,
    pub level: u32,
    pub support: SupportDescriptor,
    /// Finest cell size of the generation; ball statistics are restricted to
    /// radii ≥ 4 × this.
    pub atom_spacing: f64,
    /// Construction recipe when the measure came from the IFS builder.
    pub recipe: Option<MeasureRecipe>,
}

impl DiscreteMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn min_resolvable_radius(&self) -> f64 {
        4.0 * self.atom_spacing
    }

    /// Exact mass of the closed ball B(center, r); the radius is padded by
    /// one part in 10¹² to absorb float rounding of dyadic/triadic radii.
    pub fn ball_mass(&self, center: &[f64], r: f64) -> f64 {
        let r2 = (r * (1.0 + 1e-12)).powi(2);
        self.atoms
            .iter()
            .filter(|(x, _)| dist2(x, center) <= r2)
            .map(|(_, w)| w)
            .sum()
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// 1-D cell centers of the two-branch IFS with ratio `r` at `level`, on the
/// unit interval. Cell j (bits b₁…b_L) starts at Σ b_t (1−r) r^(t−1) and has
/// width r^L.
fn ifs_centers(r: f64, level: u32) -> Vec<f64> {
    let count = 1usize << level;
    let cell = r.powi(level as i32);
    (0..count)
        .map(|j| {
            let mut left = 0.0;
            let mut scale = 1.0;
            for t in 0..level {
                let bit = (j >> (level - 1 - t)) & 1;
                if bit == 1 {
                    left += scale * (1.0 - r);
                }
                scale *= r;
            }
            left + 0.5 * cell
        })
        .collect()
}

/// Product measure from explicit per-axis factors on the cube
/// [origin, origin+side]ⁿ: equal-weight atoms at generation-`level` cell
/// centers, total mass 1.
pub fn build_product(
    axes: &[AxisSpec],
    level: u32,
    box_origin: &[f64],
    box_side: f64,
) -> Result<DiscreteMeasure, MeasureError> {
    if level == 0 {
        return Err(MeasureError::BadLevel);
    }
    let n = axes.len();
    assert_eq!(box_origin.len(), n);
    let mut per_axis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut spacing = f64::INFINITY;
    for spec in axes {
        match spec.ratio() {
            Some(r) => {
                per_axis.push(ifs_centers(r, level));
                spacing = spacing.min(r.powi(level as i32) * box_side);
            }
            None => per_axis.push(vec![0.5]),
        }
    }
    if !spacing.is_finite() {
        spacing = 0.0; // pure point measure
    }
    let count: usize = per_axis.iter().map(Vec::len).product();
    let w = 1.0 / count as f64;
    let mut atoms = Vec::with_capacity(count);
    let mut idx = vec![0usize; n];
    loop {
        let point: Vec<f64> = (0..n)
            .map(|a| box_origin[a] + per_axis[a][idx[a]] * box_side)
            .collect();
        atoms.push((point, w));
        // odometer increment, last axis fastest
        let mut a = n;
        loop {
            if a == 0 {
                let alpha: f64 = axes.iter().map(AxisSpec::dimension).sum();
                return Ok(DiscreteMeasure {
                    n,
                    atoms,
                    dimension_alpha: alpha,
                    level,
                    support: SupportDescriptor::Cube {
                        origin: box_origin.to_vec(),
                        side: box_side,
                    },
                    atom_spacing: spacing,
                    recipe: Some(MeasureRecipe {
                        axes: axes.to_vec(),
                        level,
                        box_origin: box_origin.to_vec(),
                        box_side,
                        cone: None,
                    }),
                });
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < per_axis[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Cantor-type product of target dimension `alpha` in ℝⁿ: ⌊α⌋ full-interval
/// axes, one fractional Cantor axis, remaining axes degenerate. α = n gives
/// the Lebesgue grid measure on the box.
pub fn build_cantor_product(
    alpha: f64,
    n: usize,
    level: u32,
    box_origin: &[f64],
    box_side: f64,
) -> Result<DiscreteMeasure, MeasureError> {
    if !(alpha > 0.0 && alpha <= n as f64 + 1e-12) {
        return Err(MeasureError::AlphaRange { alpha, n });
    }
    let mut full_axes = alpha.floor() as usize;
    let mut frac = alpha - full_axes as f64;
    if frac < 1e-9 {
        frac = 0.0;
    } else if frac > 1.0 - 1e-9 {
        full_axes += 1;
        frac = 0.0;
    }
    let mut axes = Vec::with_capacity(n);
    for _ in 0..full_axes.min(n) {
        axes.push(AxisSpec::Full);
    }
    if frac > 0.0 {
        axes.push(AxisSpec::Cantor { dim: frac });
    }
    while axes.len() < n {
        axes.push(AxisSpec::Point);
    }
    axes.truncate(n);
    let mut mu = build_product(&axes, level, box_origin, box_side)?;
    if (alpha - n as f64).abs() < 1e-12 {
        mu.support = SupportDescriptor::Lebesgue {
            origin: box_origin.to_vec(),
            side: box_side,
            grid: 1 << level,
        };
    }
    mu.dimension_alpha = alpha;
    Ok(mu)
}

/// Uniform atoms on the hyperplane {x_axis = offset} intersected with the
/// cube (grid-aligned hyperplanes only).
pub fn build_hyperplane(
    axis: usize,
    offset: f64,
    n: usize,
    level: u32,
    box_origin: &[f64],
    box_side: f64,
) -> Result<DiscreteMeasure, MeasureError> {
    let mut axes = vec![AxisSpec::Full; n];
    axes[axis] = AxisSpec::Point;
    let mut mu = build_product(&axes, level, box_origin, box_side)?;
    for (x, _) in &mut mu.atoms {
        x[axis] = offset;
    }
    let mut normal = vec![0.0; n];
    normal[axis] = 1.0;
    mu.support = SupportDescriptor::Hyperplane { normal, offset };
    mu.dimension_alpha = (n - 1) as f64;
    mu.recipe = None; // offsets are not captured by the product recipe
    Ok(mu)
}

/// Arc-angle compression onto a double cone: each atom moves on its own
/// sphere |x − apex| = ρ to polar angle θ_y = θ_x · 2θ/π measured from ±axis,
/// landing in the closed double cone of half-angle θ. Atoms within 1e−9·ρ of
/// the axis hyperplane are dropped and the remaining weights rescaled so
/// total mass is preserved exactly. Returns the mapped measure and the
/// dropped mass fraction.
pub fn map_into_cone(
    mu: &DiscreteMeasure,
    apex: &[f64],
    axis: &[f64],
    half_angle: f64,
) -> Result<(DiscreteMeasure, f64), MeasureError> {
    if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
        return Err(MeasureError::DegenerateCone { half_angle });
    }
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    let e: Vec<f64> = axis.iter().map(|x| x / norm).collect();
    let compress = 2.0 * half_angle / std::f64::consts::PI;
    let original_mass = mu.total_mass();
    let mut atoms = Vec::with_capacity(mu.atoms.len());
    let mut dropped = 0.0;
    for (x, w) in &mu.atoms {
        let v: Vec<f64> = x.iter().zip(apex).map(|(a, b)| a - b).collect();
        let rho = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if rho == 0.0 {
            atoms.push((x.clone(), *w));
            continue;
        }
        let c: f64 = v.iter().zip(&e).map(|(a, b)| a * b).sum();
        if c.abs() <= 1e-9 * rho {
            dropped += w;
            continue;
        }
        let sign = c.signum();
        let cos_theta_x = (c.abs() / rho).min(1.0);
        let theta_x = cos_theta_x.acos();
        let theta_y = theta_x * compress;
        let mut perp: Vec<f64> = v.iter().zip(&e).map(|(a, b)| a - c * b).collect();
        let perp_norm = perp.iter().map(|t| t * t).sum::<f64>().sqrt();
        let y: Vec<f64> = if perp_norm <= 1e-300 {
            x.clone() // already on the axis: fixed point
        } else {
            for p in &mut perp {
                *p /= perp_norm;
            }
            (0..mu.n)
                .map(|i| apex[i] + rho * (theta_y.cos() * sign * e[i] + theta_y.sin() * perp[i]))
                .collect()
        };
        atoms.push((y, *w));
    }
    let kept: f64 = atoms.iter().map(|(_, w)| w).sum();
    if kept <= 0.0 {
        return Err(MeasureError::Parse("cone map dropped the entire measure".into()));
    }
    let rescale = original_mass / kept;
    for (_, w) in &mut atoms {
        *w *= rescale;
    }
    let recipe = mu.recipe.clone().map(|mut r| {
        r.cone = Some((apex.to_vec(), e.clone(), half_angle));
        r
    });
    Ok((
        DiscreteMeasure {
            n: mu.n,
            atoms,
            dimension_alpha: mu.dimension_alpha,
            level: mu.level,
            support: SupportDescriptor::Cone {
                apex: apex.to_vec(),
                axis: e,
                half_angle,
            },
            atom_spacing: mu.atom_spacing * compress,
            recipe,
        },
        dropped,
    ))
}

/// One row of an Ahlfors profile: radius, exact ball mass, mass/r^α.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub radius: f64,
    pub mass: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AhlforsProfile {
    pub rows: Vec<ProfileRow>,
    pub m_hat: f64,
    pub big_m_hat: f64,
}

/// Profile over explicit radii; radii below the resolvable floor are skipped.
pub fn profile_at_radii(
    mu: &DiscreteMeasure,
    alpha: f64,
    center: &[f64],
    radii: &[f64],
) -> Result<AhlforsProfile, MeasureError> {
    let floor = mu.min_resolvable_radius();
    let mut rows = Vec::new();
    for &r in radii {
        if r < floor {
            continue;
        }
        let mass = mu.ball_mass(center, r);
        rows.push(ProfileRow { radius: r, mass, ratio: mass / r.powf(alpha) });
    }
    if rows.is_empty() {
        let smallest = radii.iter().copied().fold(f64::INFINITY, f64::min);
        let suggested = suggest_level(mu, smallest);
        return Err(MeasureError::NoResolvableRadii { level: mu.level, suggested });
    }
    let positive: Vec<f64> = rows.iter().map(|r| r.ratio).filter(|v| *v > 0.0).collect();
    let m_hat = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let big_m_hat = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    Ok(AhlforsProfile { rows, m_hat, big_m_hat })
}

/// Profile over dyadic radii 2^(−j) from the largest useful scale down to the
/// resolvable floor 4 × atom spacing.
pub fn ahlfors_profile(
    mu: &DiscreteMeasure,
    alpha: f64,
    center: &[f64],
) -> Result<AhlforsProfile, MeasureError> {
    let rmax = mu
        .atoms
        .iter()
        .map(|(x, _)| dist2(x, center).sqrt())
        .fold(0.0f64, f64::max);
    let mut radii = Vec::new();
    let mut r = 1.0f64;
    while r > rmax && r > 1e-300 {
        r /= 2.0;
    }
    r *= 2.0;
    while r >= mu.min_resolvable_radius() && radii.len() < 64 {
        radii.push(r);
        r /= 2.0;
    }
    profile_at_radii(mu, alpha, center, &radii)
}

fn suggest_level(mu: &DiscreteMeasure, want_radius: f64) -> u32 {
    // spacing shrinks geometrically with level
    let per_level = if mu.level > 0 {
        mu.atom_spacing.max(1e-300).powf(1.0 / f64::from(mu.level)).min(0.9)
    } else {
        0.5
    };
    let mut level = mu.level;
    let mut spacing = mu.atom_spacing;
    while 4.0 * spacing > want_radius && level < 64 {
        spacing *= per_level;
        level += 1;
    }
    level + 1
}

/// Lower-bound estimate of the Morrey norm sup_B μ(B)/r(B)^λ.
///
/// The supremum is taken over a structured family: balls centered at a
/// deterministic subsample of the atoms and at coarse grid points of the
/// bounding box, plus seeded random centers. Radii are dyadic, floored at
/// 64 × atom spacing (below that, lattice-packing fluctuations of the
/// atomic approximation dominate the continuum ratio), extended by the
/// measure's own contraction radii when a construction recipe is attached.
/// Monotone nondecreasing in `num_ball_samples`.
pub fn estimate_morrey_norm(
    mu: &DiscreteMeasure,
    lambda: f64,
    num_ball_samples: usize,
    seed: u64,
) -> f64 {
    assert!(lambda >= 0.0, "λ must be nonnegative");
    let n = mu.n;
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (x, _) in &mu.atoms {
        for i in 0..n {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    let diameter = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
        .max(mu.atom_spacing)
        .max(1e-12);

    let mut centers: Vec<Vec<f64>> = Vec::new();
    let stride = (mu.atoms.len() / 256).max(1);
    centers.extend(mu.atoms.iter().step_by(stride).map(|(x, _)| x.clone()));
    // coarse grid of the bounding box
    let per_axis = 5usize;
    if per_axis.pow(n as u32) <= 4096 {
        let mut idx = vec![0usize; n];
        'grid: loop {
            let p: Vec<f64> = (0..n)
                .map(|i| lo[i] + (hi[i] - lo[i]) * (idx[i] as f64) / (per_axis - 1) as f64)
                .collect();
            centers.push(p);
            let mut a = n;
            loop {
                if a == 0 {
                    break 'grid;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
    let mut rng = seeded_rng(seed);
    for _ in 0..num_ball_samples {
        let p: Vec<f64> = (0..n)
            .map(|i| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>())
            .collect();
        centers.push(p);
    }

    let mut radii = Vec::new();
    let floor = (64.0 * mu.atom_spacing).max(1e-12);
    let mut r = 2.0 * diameter;
    while r >= floor && radii.len() < 64 {
        radii.push(r);
        r /= 2.0;
    }
    // contraction radii of the construction: the self-similar scales where
    // the approximation counts cells exactly
    if let Some(recipe) = &mu.recipe {
        for axis in &recipe.axes {
            if let Some(ratio) = axis.ratio() {
                let mut r = recipe.box_side;
                while r >= floor && radii.len() < 128 {
                    radii.push(r);
                    r *= ratio;
                }
            }
        }
    }
    if radii.is_empty() {
        radii.push(diameter);
    }

    let mut best: f64 = 0.0;
    for c in &centers {
        let mut order: Vec<(f64, f64)> = mu
            .atoms
            .iter()
            .map(|(x, w)| (dist2(x, c).sqrt(), *w))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(order.len() + 1);
        prefix.push(0.0);
        for (_, w) in &order {
            prefix.push(prefix.last().unwrap() + w);
        }
        for &r in &radii {
            let padded = r * (1.0 + 1e-12);
            let count = order.partition_point(|&(d, _)| d <= padded);
            let mass = prefix[count];
            if mass > 0.0 {
                best = best.max(mass / r.powf(lambda));
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellSums {
    /// Partial sums S_j = Σ_{i ≤ j} ∫_{shell(2^{−i−1}, 2^{−i})} |x−c|^{−α} dμ.
    pub partial_sums: Vec<f64>,
    /// Least-squares slope of S_j against j.
    pub slope: f64,
}

pub fn shell_divergence_sums(
    mu: &DiscreteMeasure,
    alpha: f64,
    center: &[f64],
    j_max: u32,
) -> Result<ShellSums, MeasureError> {
    let floor = mu.min_resolvable_radius();
    let deepest = 0.5f64.powi(j_max as i32 + 1);
    if deepest < floor && floor > 0.0 {
        let max_j = (-floor.log2() - 1.0).floor().max(0.0) as u32;
        return Err(MeasureError::ShellTooDeep { requested: j_max, max_j });
    }
    let mut shell_sums = vec![0.0f64; j_max as usize + 1];
    for (x, w) in &mu.atoms {
        let d = dist2(x, center).sqrt();
        if d <= 0.0 || d > 1.0 {
            continue;
        }
        let j = (-d.log2()).ceil() as i64 - 1; // 2^{−j−1} < d ≤ 2^{−j}
        let j = j.max(0);
        if (0..=j_max as i64).contains(&j) {
            shell_sums[j as usize] += w * d.powf(-alpha);
        }
    }
    let mut partial_sums = Vec::with_capacity(shell_sums.len());
    let mut acc = 0.0;
    for s in shell_sums {
        acc += s;
        partial_sums.push(acc);
    }
    let pts: Vec<(f64, f64)> = partial_sums
        .iter()
        .enumerate()
        .map(|(j, &s)| (j as f64, s))
        .collect();
    Ok(ShellSums { slope: least_squares_slope(&pts), partial_sums })
}

// ---------------------------------------------------------------------------
// Measure files
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    schema: String,
    n: usize,
    dimension_alpha: f64,
    level: u32,
    support: SupportDescriptor,
    total_mass: f64,
    atom_spacing: f64,
    atoms: Vec<(Vec<f64>, f64)>,
}

pub const MEASURE_SCHEMA: &str = "measure/v1";
const RECIPE_MAGIC: &[u8; 8] = b"SYMMSR1\0";

/// Explicit text format: metadata plus the full atom list.
pub fn to_json_string(mu: &DiscreteMeasure) -> String {
    let doc = MeasureDoc {
        schema: MEASURE_SCHEMA.to_string(),
        n: mu.n,
        dimension_alpha: mu.dimension_alpha,
        level: mu.level,
        support: mu.support.clone(),
        total_mass: mu.total_mass(),
        atom_spacing: mu.atom_spacing,
        atoms: mu.atoms.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("measure doc serializes")
}

pub fn from_json_string(text: &str) -> Result<DiscreteMeasure, MeasureError> {
    let doc: MeasureDoc =
        serde_json::from_str(text).map_err(|e| MeasureError::Parse(e.to_string()))?;
    if doc.schema != MEASURE_SCHEMA {
        return Err(MeasureError::Parse(format!(
            "unsupported schema {:?}, expected {MEASURE_SCHEMA:?}",
            doc.schema
        )));
    }
    if doc.atoms.iter().any(|(x, w)| x.len() != doc.n || !w.is_finite() || *w <= 0.0) {
        return Err(MeasureError::Parse(
            "atoms must be n-dimensional with positive finite weight".into(),
        ));
    }
    Ok(DiscreteMeasure {
        n: doc.n,
        atoms: doc.atoms,
        dimension_alpha: doc.dimension_alpha,
        level: doc.level,
        support: doc.support,
        atom_spacing: doc.atom_spacing,
        recipe: None,
    })
}

/// Compact binary format: the construction recipe only. Rebuilding from the
/// recipe reproduces the atom list bit for bit, so the round-trip is lossless
/// at every level.
pub fn to_recipe_bytes(mu: &DiscreteMeasure) -> Result<Vec<u8>, MeasureError> {
    let recipe = mu
        .recipe
        .as_ref()
        .ok_or_else(|| MeasureError::Io("measure has no recipe; use the JSON format".into()))?;
    let body = serde_json::to_vec(recipe).map_err(|e| MeasureError::Io(e.to_string()))?;
    let mut out = Vec::with_capacity(body.len() + 16);
    out.extend_from_slice(RECIPE_MAGIC);
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn from_recipe_bytes(bytes: &[u8]) -> Result<DiscreteMeasure, MeasureError> {
    if bytes.len() < 16 || &bytes[..8] != RECIPE_MAGIC {
        return Err(MeasureError::Parse("not a measure recipe file".into()));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() < 16 + len {
        return Err(MeasureError::Parse("truncated measure recipe".into()));
    }
    let recipe: MeasureRecipe = serde_json::from_slice(&bytes[16..16 + len])
        .map_err(|e| MeasureError::Parse(e.to_string()))?;
    rebuild(&recipe)
}

pub fn rebuild(recipe: &MeasureRecipe) -> Result<DiscreteMeasure, MeasureError> {
    let base = build_product(&recipe.axes, recipe.level, &recipe.box_origin, recipe.box_side)?;
    match &recipe.cone {
        None => Ok(base),
        Some((apex, axis, half_angle)) => Ok(map_into_cone(&base, apex, axis, *half_angle)?.0),
    }
}
