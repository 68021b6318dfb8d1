//! Floating-point helpers shared by the classifier: sphere sampling,
//! derivative-free polishing on spheres, and principal-angle subspace
//! arithmetic. Everything is deterministic given the seed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable per-shard seed derivation (splitmix64 step).
pub fn shard_seed(seed: u64, shard: u64) -> u64 {
    let mut z = seed ^ shard.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal via Box-Muller.
pub fn sample_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn sample_unit_vector(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| sample_normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Quasi-uniform samples of the unit sphere S^{n−1}: exact uniform angles for
/// n = 2, a Fibonacci lattice for n = 3, seeded Gaussian directions above.
pub fn sphere_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match n {
        0 => panic!("no sphere in dimension 0"),
        1 => (0..count).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..count)
            .map(|i| {
                let theta = std::f64::consts::TAU * (i as f64) / (count as f64);
                vec![theta.cos(), theta.sin()]
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / (count as f64);
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = std::f64::consts::TAU * (i as f64) / golden;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = seeded_rng(seed);
            (0..count).map(|_| sample_unit_vector(n, &mut rng)).collect()
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// Orthonormal basis of the tangent space at a unit vector: coordinate
/// directions Gram-Schmidt'ed against x, dropping the axis most parallel
/// to x.
fn tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let drop_axis = (0..n)
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .unwrap();
    let mut basis: Vec<Vec<f64>> = vec![x.to_vec()];
    for i in 0..n {
        if i == drop_axis {
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
        normalize(&mut v);
        basis.push(v);
    }
    basis.remove(0);
    basis
}

/// Derivative-free local minimization of `f` on the unit sphere by pattern
/// search with a shrinking step. Deterministic; cheap objective assumed.
pub fn minimize_on_sphere(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut fx = f(&x);
    let mut step = 0.3;
    let mut evals = 1usize;
    while step > 1e-12 && evals < max_evals {
        let dirs = tangent_basis(&x);
        let mut improved = false;
        'outer: for d in &dirs {
            for sign in [1.0, -1.0] {
                let mut cand: Vec<f64> =
                    x.iter().zip(d).map(|(xi, di)| xi + sign * step * di).collect();
                normalize(&mut cand);
                let fc = f(&cand);
                evals += 1;
                if fc < fx {
                    x = cand;
                    fx = fc;
                    improved = true;
                    break 'outer;
                }
                if evals >= max_evals {
                    break 'outer;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Columns of an orthonormal basis for the column space of `m`, keeping
/// singular directions above `rel_tol` times the largest singular value.
pub fn image_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel_tol * smax)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Intersection of two subspaces given by orthonormal column bases, via
/// principal angles: keep directions whose principal cosine exceeds
/// `1 − cos_tol`. Returns an orthonormal basis of the (numerical)
/// intersection.
pub fn intersect_subspaces(a: &DMatrix<f64>, b: &DMatrix<f64>, cos_tol: f64) -> DMatrix<f64> {
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let m = a.transpose() * b;
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1.0 - cos_tol)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(a.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let dir = a * u.column(i);
        out.set_column(j, &dir);
    }
    out
}

/// ‖v − P_S v‖ / ‖v‖ for an orthonormal basis of S.
pub fn relative_distance_to_subspace(v: &DVector<f64>, basis: &DMatrix<f64>) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let proj = basis * (basis.transpose() * v);
    (v - proj).norm() / norm
}

/// Least-squares slope of y against x.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx: f64 = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my: f64 = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
