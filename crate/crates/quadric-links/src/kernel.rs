//! Exact rational linear algebra, integer Smith normal form, and convex-hull
//! membership testing.
//!
//! Everything in this module is exact: scalars are arbitrary-precision rationals
//! or integers, and every answer that matters downstream (hull membership,
//! ranks, torsion coefficients) is certified or re-checkable by substitution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

/// Arbitrary-precision integer used throughout the crate.
pub type Int = BigInt;
/// Arbitrary-precision rational used throughout the crate. Always stored reduced
/// with a positive denominator (the `num-rational` invariant).
pub type Rat = BigRational;

/// Convenience constructor for a rational from two machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

/// Convenience constructor for an integer rational.
pub fn rat_int(num: i64) -> Rat {
    Rat::from(Int::from(num))
}

/// Parses a rational from the interchange syntax `"a/b"` or `"a"`.
pub fn parse_rat(s: &str) -> Result<Rat, KernelError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num = Int::from_str(num).map_err(|_| KernelError::BadRational(s.to_string()))?;
    let den = Int::from_str(den).map_err(|_| KernelError::BadRational(s.to_string()))?;
    if den.is_zero() {
        return Err(KernelError::BadRational(s.to_string()));
    }
    Ok(Rat::new(num, den))
}

/// Formats a rational in the interchange syntax `"a/b"` (or `"a"` when b = 1).
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Errors raised by kernel operations.
#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("malformed rational literal: {0:?}")]
    BadRational(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// Dense row-major matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *t.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let add = a * other.at(k, c);
                    *out.at_mut(r, c) += add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len(), "shape mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Reduces `self` in place to reduced row echelon form; returns the pivot
    /// column indices. Deterministic: first nonzero pivot in column order.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            if pr != row {
                for c in 0..self.cols {
                    let a = self.at(pr, c).clone();
                    let b = self.at(row, c).clone();
                    *self.at_mut(pr, c) = b;
                    *self.at_mut(row, c) = a;
                }
            }
            let inv = self.at(row, col).recip();
            for c in 0..self.cols {
                let v = self.at(row, c) * &inv;
                *self.at_mut(row, c) = v;
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let f = self.at(r, col).clone();
                    for c in 0..self.cols {
                        let v = self.at(r, c) - &f * self.at(row, c);
                        *self.at_mut(r, c) = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_in_place().len()
    }

    /// Solves `self · x = b` exactly. Returns one solution (free variables set
    /// to zero) or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, b.len(), "shape mismatch in solve");
        let mut aug = RatMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *aug.at_mut(r, c) = self.at(r, c).clone();
            }
            *aug.at_mut(r, self.cols) = b[r].clone();
        }
        let pivots = aug.rref_in_place();
        if pivots.contains(&self.cols) {
            return None; // pivot in the augmented column
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = aug.at(row, self.cols).clone();
        }
        Some(x)
    }
}

/// Computes a basis of the (right) nullspace of `m`. Columns of the returned
/// matrix form the reduced-echelon-derived basis, which is deterministic.
pub fn nullspace_basis(m: &RatMatrix) -> RatMatrix {
    let mut red = m.clone();
    let pivots = red.rref_in_place();
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = RatMatrix::zeros(m.cols, free.len());
    for (k, &fc) in free.iter().enumerate() {
        *basis.at_mut(fc, k) = Rat::one();
        for (row, &pc) in pivots.iter().enumerate() {
            *basis.at_mut(pc, k) = -red.at(row, fc).clone();
        }
    }
    basis
}

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Int::one();
        }
        m
    }

    pub fn from_rows_i64(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().map(Int::from).collect(),
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Int {
        &self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Int {
        &mut self.entries[r * self.cols + c]
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k).clone();
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let add = &a * other.at(k, c);
                    *out.at_mut(r, c) += add;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len(), "shape mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(Int::zero(), |acc, c| acc + self.at(r, c) * &v[c])
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

/// Result of a Smith normal form computation.
#[derive(Clone, Debug)]
pub struct SmithForm {
    /// Divisibility-ordered diagonal (nonnegative; zeros trail).
    pub diagonal: Vec<Int>,
    /// Number of nonzero diagonal entries.
    pub rank: usize,
    /// Optional transforms `(L, R, L_inv, R_inv)` with `L · M · R` in diagonal form.
    pub transforms: Option<Box<Transforms>>,
}

/// Unimodular transforms accompanying a Smith normal form.
#[derive(Clone, Debug)]
pub struct Transforms {
    pub left: IntMatrix,
    pub right: IntMatrix,
    pub left_inv: IntMatrix,
    pub right_inv: IntMatrix,
}

/// Computes the Smith normal form of an integer matrix.
///
/// Pivoting picks the minimal nonzero absolute value in the remaining block,
/// which keeps coefficient growth modest at desk scale. When `with_transforms`
/// is set, the unimodular row/column transforms and their inverses are
/// accumulated alongside.
pub fn smith_normal_form(m: &IntMatrix, with_transforms: bool) -> SmithForm {
    if !with_transforms {
        // Fast path: machine integers with overflow detection.
        if let Some(diag) = snf_i128(m) {
            let rank = diag.iter().filter(|d| **d != 0).count();
            return SmithForm {
                diagonal: diag.into_iter().map(Int::from).collect(),
                rank,
                transforms: None,
            };
        }
    }
    snf_big(m, with_transforms)
}

/// Smith normal form over `i128` with overflow checks; `None` means fall back
/// to arbitrary precision.
fn snf_i128(m: &IntMatrix) -> Option<Vec<i128>> {
    let a: Vec<Vec<i128>> = (0..m.rows)
        .map(|r| {
            (0..m.cols)
                .map(|c| i128::try_from(m.at(r, c)).ok())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    snf_machine(a)
}

/// Smith normal form diagonal for a machine-integer matrix; `None` on overflow.
/// Rows must be rectangular.
pub fn snf_machine(mut a: Vec<Vec<i128>>) -> Option<Vec<i128>> {
    let nr = a.len();
    let nc = a.first().map_or(0, |r| r.len());
    let mut diag: Vec<i128> = Vec::new();
    let mut k = 0usize;
    while k < nr.min(nc) {
        // Find minimal nonzero |entry| in the trailing block.
        let mut piv: Option<(usize, usize)> = None;
        for r in k..nr {
            for c in k..nc {
                if a[r][c] != 0
                    && piv.is_none_or(|(pr, pc)| a[r][c].abs() < a[pr][pc].abs())
                {
                    piv = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = piv else { break };
        a.swap(k, pr);
        for row in a.iter_mut() {
            row.swap(k, pc);
        }
        // Eliminate column and row k; restart if a remainder becomes the pivot.
        let mut clean = true;
        for r in k + 1..nr {
            if a[r][k] != 0 {
                let q = a[r][k].checked_div(a[k][k])?;
                for c in k..nc {
                    let sub = q.checked_mul(a[k][c])?;
                    a[r][c] = a[r][c].checked_sub(sub)?;
                }
                if a[r][k] != 0 {
                    clean = false;
                }
            }
        }
        for c in k + 1..nc {
            if a[k][c] != 0 {
                let q = a[k][c].checked_div(a[k][k])?;
                for r in k..nr {
                    let sub = q.checked_mul(a[r][k])?;
                    a[r][c] = a[r][c].checked_sub(sub)?;
                }
                if a[k][c] != 0 {
                    clean = false;
                }
            }
        }
        if !clean {
            continue; // smaller remainders exist; re-pick the pivot
        }
        // Divisibility fix-up: fold in any entry the pivot does not divide.
        let p = a[k][k];
        let mut fixed = true;
        'scan: for r in k + 1..nr {
            for c in k + 1..nc {
                if a[r][c] % p != 0 {
                    for cc in k..nc {
                        a[k][cc] = a[k][cc].checked_add(a[r][cc])?;
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        diag.push(p.abs());
        k += 1;
    }
    diag.resize(nr.min(nc), 0);
    Some(diag)
}

/// Arbitrary-precision Smith normal form with optional transforms.
fn snf_big(m: &IntMatrix, with_transforms: bool) -> SmithForm {
    let (nr, nc) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut tf = with_transforms.then(|| Transforms {
        left: IntMatrix::identity(nr),
        right: IntMatrix::identity(nc),
        left_inv: IntMatrix::identity(nr),
        right_inv: IntMatrix::identity(nc),
    });

    // Elementary operations, mirrored on the transforms.
    // Row op: row r -= q * row s   (L := E L, L_inv := L_inv E^{-1})
    let row_sub = |a: &mut IntMatrix, tf: &mut Option<Transforms>, r: usize, s: usize, q: &Int| {
        for c in 0..a.cols {
            let v = a.at(r, c) - q * a.at(s, c);
            *a.at_mut(r, c) = v;
        }
        if let Some(t) = tf {
            for c in 0..t.left.cols {
                let v = t.left.at(r, c) - q * t.left.at(s, c);
                *t.left.at_mut(r, c) = v;
            }
            for rr in 0..t.left_inv.rows {
                let v = t.left_inv.at(rr, s) + q * t.left_inv.at(rr, r);
                *t.left_inv.at_mut(rr, s) = v;
            }
        }
    };
    let col_sub = |a: &mut IntMatrix, tf: &mut Option<Transforms>, c: usize, s: usize, q: &Int| {
        for r in 0..a.rows {
            let v = a.at(r, c) - q * a.at(r, s);
            *a.at_mut(r, c) = v;
        }
        if let Some(t) = tf {
            for r in 0..t.right.rows {
                let v = t.right.at(r, c) - q * t.right.at(r, s);
                *t.right.at_mut(r, c) = v;
            }
            for cc in 0..t.right_inv.cols {
                let v = t.right_inv.at(s, cc) + q * t.right_inv.at(c, cc);
                *t.right_inv.at_mut(s, cc) = v;
            }
        }
    };
    let row_swap = |a: &mut IntMatrix, tf: &mut Option<Transforms>, r: usize, s: usize| {
        if r == s {
            return;
        }
        for c in 0..a.cols {
            let (x, y) = (a.at(r, c).clone(), a.at(s, c).clone());
            *a.at_mut(r, c) = y;
            *a.at_mut(s, c) = x;
        }
        if let Some(t) = tf {
            for c in 0..t.left.cols {
                let (x, y) = (t.left.at(r, c).clone(), t.left.at(s, c).clone());
                *t.left.at_mut(r, c) = y;
                *t.left.at_mut(s, c) = x;
            }
            for rr in 0..t.left_inv.rows {
                let (x, y) = (t.left_inv.at(rr, r).clone(), t.left_inv.at(rr, s).clone());
                *t.left_inv.at_mut(rr, r) = y;
                *t.left_inv.at_mut(rr, s) = x;
            }
        }
    };
    let col_swap = |a: &mut IntMatrix, tf: &mut Option<Transforms>, c: usize, s: usize| {
        if c == s {
            return;
        }
        for r in 0..a.rows {
            let (x, y) = (a.at(r, c).clone(), a.at(r, s).clone());
            *a.at_mut(r, c) = y;
            *a.at_mut(r, s) = x;
        }
        if let Some(t) = tf {
            for r in 0..t.right.rows {
                let (x, y) = (t.right.at(r, c).clone(), t.right.at(r, s).clone());
                *t.right.at_mut(r, c) = y;
                *t.right.at_mut(r, s) = x;
            }
            for cc in 0..t.right_inv.cols {
                let (x, y) = (t.right_inv.at(c, cc).clone(), t.right_inv.at(s, cc).clone());
                *t.right_inv.at_mut(c, cc) = y;
                *t.right_inv.at_mut(s, cc) = x;
            }
        }
    };
    let row_neg = |a: &mut IntMatrix, tf: &mut Option<Transforms>, r: usize| {
        for c in 0..a.cols {
            let v = -a.at(r, c).clone();
            *a.at_mut(r, c) = v;
        }
        if let Some(t) = tf {
            for c in 0..t.left.cols {
                let v = -t.left.at(r, c).clone();
                *t.left.at_mut(r, c) = v;
            }
            for rr in 0..t.left_inv.rows {
                let v = -t.left_inv.at(rr, r).clone();
                *t.left_inv.at_mut(rr, r) = v;
            }
        }
    };

    let mut k = 0usize;
    while k < nr.min(nc) {
        let mut piv: Option<(usize, usize)> = None;
        for r in k..nr {
            for c in k..nc {
                if !a.at(r, c).is_zero()
                    && piv.is_none_or(|(pr, pc)| a.at(r, c).abs() < a.at(pr, pc).abs())
                {
                    piv = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = piv else { break };
        row_swap(&mut a, &mut tf, k, pr);
        col_swap(&mut a, &mut tf, k, pc);
        let mut clean = true;
        for r in k + 1..nr {
            if !a.at(r, k).is_zero() {
                let q = a.at(r, k) / a.at(k, k);
                if !q.is_zero() {
                    row_sub(&mut a, &mut tf, r, k, &q);
                }
                if !a.at(r, k).is_zero() {
                    clean = false;
                }
            }
        }
        for c in k + 1..nc {
            if !a.at(k, c).is_zero() {
                let q = a.at(k, c) / a.at(k, k);
                if !q.is_zero() {
                    col_sub(&mut a, &mut tf, c, k, &q);
                }
                if !a.at(k, c).is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        let p = a.at(k, k).clone();
        let mut fixed = true;
        'scan: for r in k + 1..nr {
            for c in k + 1..nc {
                if !(a.at(r, c) % &p).is_zero() {
                    // row k += row r, then re-run elimination for this k
                    let minus_one = -Int::one();
                    row_sub(&mut a, &mut tf, k, r, &minus_one);
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        if a.at(k, k).is_negative() {
            row_neg(&mut a, &mut tf, k);
        }
        k += 1;
    }

    let mut diagonal: Vec<Int> = (0..nr.min(nc)).map(|i| a.at(i, i).clone()).collect();
    let rank = diagonal.iter().filter(|d| !d.is_zero()).count();
    for d in diagonal.iter_mut() {
        if d.is_negative() {
            *d = -d.clone();
        }
    }
    SmithForm { diagonal, rank, transforms: tf.map(Box::new) }
}

// ---------------------------------------------------------------------------
// Convex hull membership (exact LP)
// ---------------------------------------------------------------------------

/// Certificate returned by [`zero_in_convex_hull`]. Exactly one variant is
/// produced for every input, and both verify by direct substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HullCert {
    /// `0 = Σ λ_i v_i` with `λ ≥ 0`, `Σ λ = 1`.
    Member { lambda: Vec<Rat> },
    /// A functional `c` with `⟨c, v_i⟩ > 0` for every input point.
    Separated { functional: Vec<Rat> },
}

impl HullCert {
    pub fn is_member(&self) -> bool {
        matches!(self, HullCert::Member { .. })
    }
}

/// Decides exactly whether `0 ∈ conv(points)` in `Q^dim`.
///
/// Implemented as a phase-1 simplex on `Σ λ_i v_i = 0, Σ λ_i = 1, λ ≥ 0`
/// with exact rational pivoting and Bland's rule. On infeasibility the
/// separating functional is read off the artificial columns (Farkas dual).
pub fn zero_in_convex_hull(dim: usize, points: &[Vec<Rat>]) -> HullCert {
    let n = points.len();
    for (i, pt) in points.iter().enumerate() {
        assert_eq!(pt.len(), dim, "point {i} has wrong dimension");
    }
    if n == 0 {
        return HullCert::Separated { functional: vec![Rat::zero(); dim] };
    }
    let rows = dim + 1;
    // Tableau columns: n lambdas, then `rows` artificials, then RHS.
    let cols = n + rows + 1;
    let mut t = vec![vec![Rat::zero(); cols]; rows];
    for r in 0..dim {
        for (j, pt) in points.iter().enumerate() {
            t[r][j] = pt[r].clone();
        }
    }
    for j in 0..n {
        t[dim][j] = Rat::one();
    }
    // RHS = (0,…,0,1); already nonnegative, so artificials enter at b.
    t[dim][cols - 1] = Rat::one();
    for r in 0..rows {
        t[r][n + r] = Rat::one();
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();
    // Phase-1 objective: minimize the sum of artificials. Maintain the reduced
    // cost row z = c - c_B B^{-1} A directly.
    let mut cost = vec![Rat::zero(); cols];
    for j in 0..n {
        // reduced cost of lambda_j = 0 - sum over rows of tableau entries
        let mut s = Rat::zero();
        for r in 0..rows {
            s -= &t[r][j];
        }
        cost[j] = s;
    }
    // Artificial columns start basic with reduced cost 0; the RHS cell of the
    // cost row carries minus the current objective value (= -Σ b).
    let mut obj = Rat::zero();
    for r in 0..rows {
        obj -= &t[r][cols - 1];
    }
    cost[cols - 1] = obj;

    loop {
        // Bland: entering = smallest index with negative reduced cost.
        let Some(enter) = (0..cols - 1).find(|&j| cost[j].is_negative()) else {
            break;
        };
        // Ratio test with Bland tie-break on basis index.
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for r in 0..rows {
            if t[r][enter].is_positive() {
                let ratio = &t[r][cols - 1] / &t[r][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[r] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(r);
                }
            }
        }
        let Some(lr) = leave else {
            unreachable!("phase-1 objective is bounded below by 0");
        };
        // Pivot on (lr, enter).
        let piv = t[lr][enter].clone();
        for c in 0..cols {
            t[lr][c] = &t[lr][c] / &piv;
        }
        for r in 0..rows {
            if r != lr && !t[r][enter].is_zero() {
                let f = t[r][enter].clone();
                for c in 0..cols {
                    let v = &t[r][c] - &f * &t[lr][c];
                    t[r][c] = v;
                }
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for c in 0..cols {
                let v = &cost[c] - &f * &t[lr][c];
                cost[c] = v;
            }
        }
        basis[lr] = enter;
    }

    let objective = -cost[cols - 1].clone();
    if objective.is_zero() {
        let mut lambda = vec![Rat::zero(); n];
        for (r, &b) in basis.iter().enumerate() {
            if b < n {
                lambda[b] = t[r][cols - 1].clone();
            }
        }
        // Self-check the certificate by substitution.
        debug_assert!(lambda.iter().all(|l| !l.is_negative()));
        debug_assert!(lambda.iter().fold(Rat::zero(), |a, b| a + b).is_one());
        HullCert::Member { lambda }
    } else {
        // Farkas dual from the artificial columns: y_r = 1 - rc(artificial r);
        // then c = -y[0..dim] satisfies <c, v_j> >= y_last > 0.
        let y: Vec<Rat> = (0..rows).map(|r| Rat::one() - &cost[n + r]).collect();
        let functional: Vec<Rat> = (0..dim).map(|r| -y[r].clone()).collect();
        debug_assert!(points.iter().all(|pt| {
            functional
                .iter()
                .zip(pt)
                .fold(Rat::zero(), |a, (c, v)| a + c * v)
                .is_positive()
        }));
        HullCert::Separated { functional }
    }
}

impl fmt::Display for HullCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HullCert::Member { lambda } => {
                write!(f, "member, lambda = [")?;
                for (i, l) in lambda.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", format_rat(l))?;
                }
                write!(f, "]")
            }
            HullCert::Separated { functional } => {
                write!(f, "separated, c = [")?;
                for (i, c) in functional.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", format_rat(c))?;
                }
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn snf_identity() {
        let m = IntMatrix::from_rows_i64(vec![vec![1, 0], vec![0, 1]]);
        let s = smith_normal_form(&m, false);
        assert_eq!(s.diagonal, vec![Int::from(1), Int::from(1)]);
        assert_eq!(s.rank, 2);
    }

    #[test]
    fn snf_2x2_divisibility() {
        let m = IntMatrix::from_rows_i64(vec![vec![2, 4], vec![6, 8]]);
        let s = smith_normal_form(&m, true);
        assert_eq!(s.diagonal, vec![Int::from(2), Int::from(4)]);
        // L·M·R must reproduce the diagonal, and the inverses must undo it.
        let t = s.transforms.as_ref().unwrap();
        let d = t.left.mul(&m).mul(&t.right);
        assert_eq!(d.at(0, 0), &Int::from(2));
        assert_eq!(d.at(1, 1), &Int::from(4));
        assert!(d.at(0, 1).is_zero() && d.at(1, 0).is_zero());
        let li = t.left.mul(&t.left_inv);
        let ri = t.right.mul(&t.right_inv);
        assert_eq!(li, IntMatrix::identity(2));
        assert_eq!(ri, IntMatrix::identity(2));
    }

    #[test]
    fn snf_zero() {
        let m = IntMatrix::from_rows_i64(vec![vec![0]]);
        let s = smith_normal_form(&m, false);
        assert_eq!(s.diagonal, vec![Int::from(0)]);
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn snf_torsion_example() {
        let m = IntMatrix::from_rows_i64(vec![
            vec![-6, 111, -36, 6],
            vec![5, -672, 210, 74],
            vec![0, -255, 81, 24],
            vec![-7, 255, -81, -10],
        ]);
        let s = smith_normal_form(&m, false);
        assert_eq!(
            s.diagonal,
            vec![Int::from(1), Int::from(3), Int::from(21), Int::from(0)]
        );
    }

    #[test]
    fn nullspace_simple() {
        let m = RatMatrix::from_rows(vec![rv(&[1, -1])]);
        let b = nullspace_basis(&m);
        assert_eq!(b.cols, 1);
        assert_eq!(b.at(0, 0), &rat_int(1));
        assert_eq!(b.at(1, 0), &rat_int(1));
        let full = RatMatrix::from_rows(vec![rv(&[1, 0]), rv(&[0, 1])]);
        assert_eq!(nullspace_basis(&full).cols, 0);
    }

    #[test]
    fn hull_member_triangle() {
        let pts = vec![rv(&[1, 0]), rv(&[-1, 1]), rv(&[-1, -1])];
        match zero_in_convex_hull(2, &pts) {
            HullCert::Member { lambda } => {
                let sum: Rat = lambda.iter().fold(Rat::zero(), |a, b| a + b);
                assert!(sum.is_one());
                for d in 0..2 {
                    let s: Rat = lambda
                        .iter()
                        .zip(&pts)
                        .fold(Rat::zero(), |a, (l, p)| a + l * &p[d]);
                    assert!(s.is_zero());
                }
            }
            other => panic!("expected member, got {other}"),
        }
    }

    #[test]
    fn hull_separated() {
        let pts = vec![rv(&[1, 0]), rv(&[2, 1])];
        match zero_in_convex_hull(2, &pts) {
            HullCert::Separated { functional } => {
                for p in &pts {
                    let s: Rat = functional
                        .iter()
                        .zip(p)
                        .fold(Rat::zero(), |a, (c, v)| a + c * v);
                    assert!(s.is_positive());
                }
            }
            other => panic!("expected separated, got {other}"),
        }
    }

    #[test]
    fn hull_empty_and_p0() {
        assert!(!zero_in_convex_hull(2, &[]).is_member());
        // In Q^0 every nonempty hull is {0}.
        assert!(zero_in_convex_hull(0, &[vec![]]).is_member());
    }

    #[test]
    fn rational_roundtrip() {
        assert_eq!(parse_rat("3/6").unwrap(), rat(1, 2));
        assert_eq!(format_rat(&rat(-4, 2)), "-2");
        assert_eq!(format_rat(&rat(1, 3)), "1/3");
        assert!(parse_rat("1/0").is_err());
    }
}
