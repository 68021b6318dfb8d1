//! Exact rational scalars and dense rational matrices.
//!
//! All certificate searches and nullspace computations run over ℚ with
//! arbitrary-precision arithmetic; floating point only appears after an
//! explicit conversion.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact rational scalar.
pub type Rat = BigRational;

/// `p/q` as an exact rational.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Integer as an exact rational.
pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Lossless conversion of a finite `f64` into a rational (mantissa × 2^exp).
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.25"` exactly.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let den: BigInt = q.trim().parse().map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|e| format!("bad number {s:?}: {e}"))?
        };
        let digits = frac.trim();
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let frac_part: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|e| format!("bad decimal {s:?}: {e}"))?
        };
        let signed_frac = if neg { -frac_part } else { frac_part };
        return Ok(Rat::new(int_part * &scale + signed_frac, scale));
    }
    let num: BigInt = s.parse().map_err(|e| format!("bad number {s:?}: {e}"))?;
    Ok(Rat::from_integer(num))
}

/// Renders a rational as `p` or `p/q`.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Dense matrix with exact rational entries, row-major storage.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format_rat(self.at(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    /// Builds from integer rows; panics on ragged input.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rat_int(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.entries[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Rat {
        &mut self.entries[r * self.cols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c) * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c) + other.at(r, c))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c) - other.at(r, c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        Self::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = Rat::zero();
            for k in 0..self.cols {
                if !self.at(r, k).is_zero() && !other.at(k, c).is_zero() {
                    acc += self.at(r, k) * other.at(k, c);
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = Rat::zero();
                for (c, vc) in v.iter().enumerate() {
                    if !self.at(r, c).is_zero() {
                        acc += self.at(r, c) * vc;
                    }
                }
                acc
            })
            .collect()
    }

    /// Row-selection submatrix.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |r, c| self.at(rows[r], c).clone())
    }

    pub fn max_abs(&self) -> Rat {
        let mut best = Rat::zero();
        for e in &self.entries {
            let a = e.abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }
}

/// Reduced row echelon form with recorded pivot columns.
///
/// Pivot choice within a column scans for the entry of largest absolute
/// value, lowest row index on ties, so the elimination is deterministic
/// across platforms.
pub struct Echelon {
    pub mat: RatMatrix,
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
}

pub fn row_reduce(a: &RatMatrix) -> Echelon {
    row_reduce_limited(a, a.cols())
}

/// Row reduction that only selects pivots among the first `pivot_limit`
/// columns; trailing columns (augmented right-hand sides) are transformed but
/// never pivoted on.
pub fn row_reduce_limited(a: &RatMatrix, pivot_limit: usize) -> Echelon {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivot_cols = Vec::new();
    let mut lead = 0usize;
    for col in 0..pivot_limit.min(cols) {
        if lead >= rows {
            break;
        }
        let mut best: Option<(usize, Rat)> = None;
        for r in lead..rows {
            let v = m.at(r, col).abs();
            if !v.is_zero() {
                match &best {
                    Some((_, b)) if *b >= v => {}
                    _ => best = Some((r, v)),
                }
            }
        }
        let Some((prow, _)) = best else { continue };
        if prow != lead {
            for c in 0..cols {
                let tmp = m.at(prow, c).clone();
                *m.at_mut(prow, c) = m.at(lead, c).clone();
                *m.at_mut(lead, c) = tmp;
            }
        }
        let inv = {
            let p = m.at(lead, col).clone();
            Rat::one() / p
        };
        for c in col..cols {
            let v = m.at(lead, c) * &inv;
            *m.at_mut(lead, c) = v;
        }
        for r in 0..rows {
            if r != lead && !m.at(r, col).is_zero() {
                let factor = m.at(r, col).clone();
                for c in col..cols {
                    let v = m.at(r, c) - &factor * m.at(lead, c);
                    *m.at_mut(r, c) = v;
                }
            }
        }
        pivot_cols.push(col);
        lead += 1;
    }
    let rank = pivot_cols.len();
    Echelon { mat: m, pivot_cols, rank }
}

/// Exact rank over ℚ.
pub fn rank(a: &RatMatrix) -> usize {
    row_reduce(a).rank
}

/// Solves `A x = b` exactly; returns the minimum-support solution obtained by
/// setting all free variables to zero, or `None` if the system is infeasible.
pub fn solve_exact(a: &RatMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(a.rows(), b.len());
    let aug = RatMatrix::from_fn(a.rows(), a.cols() + 1, |r, c| {
        if c < a.cols() {
            a.at(r, c).clone()
        } else {
            b[r].clone()
        }
    });
    let ech = row_reduce_limited(&aug, a.cols());
    // Infeasible iff some row is structurally zero but has nonzero rhs.
    for r in 0..ech.mat.rows() {
        if (0..a.cols()).all(|c| ech.mat.at(r, c).is_zero()) && !ech.mat.at(r, a.cols()).is_zero() {
            return None;
        }
    }
    let mut x = vec![Rat::zero(); a.cols()];
    for (row, &col) in ech.pivot_cols.iter().enumerate() {
        x[col] = ech.mat.at(row, a.cols()).clone();
    }
    Some(x)
}

/// Solves `A X = B` for several right-hand sides sharing one elimination.
pub fn solve_exact_multi(a: &RatMatrix, rhs: &[Vec<Rat>]) -> Vec<Option<Vec<Rat>>> {
    let extra = rhs.len();
    let aug = RatMatrix::from_fn(a.rows(), a.cols() + extra, |r, c| {
        if c < a.cols() {
            a.at(r, c).clone()
        } else {
            rhs[c - a.cols()][r].clone()
        }
    });
    let ech = row_reduce_limited(&aug, a.cols());
    let zero_rows: Vec<usize> = (0..ech.mat.rows())
        .filter(|&r| (0..a.cols()).all(|c| ech.mat.at(r, c).is_zero()))
        .collect();
    (0..extra)
        .map(|j| {
            let bcol = a.cols() + j;
            if zero_rows.iter().any(|&r| !ech.mat.at(r, bcol).is_zero()) {
                return None;
            }
            let mut x = vec![Rat::zero(); a.cols()];
            for (row, &col) in ech.pivot_cols.iter().enumerate() {
                x[col] = ech.mat.at(row, bcol).clone();
            }
            Some(x)
        })
        .collect()
}

/// Basis of the exact nullspace `{x : A x = 0}`.
pub fn kernel_basis(a: &RatMatrix) -> Vec<Vec<Rat>> {
    let ech = row_reduce(a);
    let cols = a.cols();
    let pivot_set: std::collections::BTreeSet<usize> = ech.pivot_cols.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::one();
        for (row, &pc) in ech.pivot_cols.iter().enumerate() {
            v[pc] = -ech.mat.at(row, free).clone();
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["3", "-7", "2/3", "-5/8", "0"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s.trim_start_matches('+'));
        }
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("4/6").unwrap(), rat(2, 3));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn float_to_rat_is_exact() {
        let r = rat_from_f64(0.1).unwrap();
        assert_eq!(rat_to_f64(&r), 0.1);
        assert_ne!(r, rat(1, 10)); // 0.1 is not exactly 1/10 in binary
    }

    #[test]
    fn rank_and_kernel() {
        // rank-2 3x3 with kernel (1, -2, 1)
        let a = RatMatrix::from_i64_rows(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(rank(&a), 2);
        let ker = kernel_basis(&a);
        assert_eq!(ker.len(), 1);
        let av = a.mul_vec(&ker[0]);
        assert!(av.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn solve_underdetermined_minimum_support() {
        // x + y = 2 with free variable set to zero
        let a = RatMatrix::from_i64_rows(&[&[1, 1]]);
        let x = solve_exact(&a, &[rat_int(2)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![rat_int(2)]);
        assert_eq!(x.iter().filter(|v| !v.is_zero()).count(), 1);
    }

    #[test]
    fn solve_infeasible() {
        let a = RatMatrix::from_i64_rows(&[&[1, 1], &[2, 2]]);
        assert!(solve_exact(&a, &[rat_int(1), rat_int(3)]).is_none());
        assert!(solve_exact(&a, &[rat_int(1), rat_int(2)]).is_some());
    }

    #[test]
    fn multi_rhs_matches_single() {
        let a = RatMatrix::from_i64_rows(&[&[2, 0, 1], &[0, 3, 1]]);
        let b1 = vec![rat_int(4), rat_int(6)];
        let b2 = vec![rat_int(0), rat_int(0)];
        let multi = solve_exact_multi(&a, &[b1.clone(), b2]);
        let x1 = multi[0].clone().unwrap();
        assert_eq!(a.mul_vec(&x1), b1);
        let x2 = multi[1].clone().unwrap();
        assert!(a.mul_vec(&x2).iter().all(|v| v.is_zero()));
    }
}
