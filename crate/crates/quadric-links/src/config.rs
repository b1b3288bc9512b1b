//! Admissible quadric configurations: `n` rational points in `Q^p` whose
//! convex position data determines both the topology of the associated link
//! and the combinatorics of its associate polytope.
//!
//! A configuration is *admissible* when the origin lies in the convex hull of
//! all the points (the Siegel condition) but in the convex hull of no subset
//! of at most `p` of them (weak hyperbolicity). A point is *indispensable*
//! when removing it leaves the origin outside the hull of the rest; each
//! indispensable point contributes a circle factor that can be split off.

use crate::kernel::{format_rat, parse_rat, rat_int, zero_in_convex_hull, HullCert, Rat, RatMatrix};
use crate::polytope::CombPolytope;
use itertools::Itertools;
use num_traits::Zero;
use serde_json::{json, Value};
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("configuration is not admissible: {0}")]
    NotAdmissible(String),
    #[error("index set {0:?} is not a subset of 1..={1}")]
    BadIndexSet(Vec<u32>, usize),
    #[error("operation requires even p, got p = {0}")]
    OddP(usize),
    #[error("cannot split a circle off a configuration with p = 0")]
    NoRowToPivot,
    #[error("polytope carries no rational realization; one is required")]
    MissingRealization,
    #[error("Gale transform disagrees with the polytope: {0}")]
    RealizationMismatch(String),
    #[error("malformed configuration JSON: {0}")]
    BadJson(String),
}

/// `n` points of `Q^p`, stored column-wise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    n: usize,
    p: usize,
    columns: Vec<Vec<Rat>>,
}

/// The admissibility verdict, with verifiable certificates.
#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    /// Hull certificate for `0 ∈ conv(A_1..A_n)`: membership weights when the
    /// Siegel condition holds, a separating functional when it fails.
    pub siegel: HullCert,
    /// Lexicographically smallest minimal violating subset `I` with
    /// `|I| ≤ p` and `0 ∈ conv(A_i, i ∈ I)`, if any.
    pub weak_hyperbolicity_violator: Option<Vec<u32>>,
    /// Indices `i` (1-based) with `0 ∉ conv(A_j, j ≠ i)`.
    pub indispensable: BTreeSet<u32>,
    pub k: usize,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        matches!(self.siegel, HullCert::Member { .. })
            && self.weak_hyperbolicity_violator.is_none()
    }

    pub fn failure_reason(&self) -> Option<String> {
        if let HullCert::Separated { .. } = self.siegel {
            return Some("the origin is not in the convex hull of the columns".into());
        }
        self.weak_hyperbolicity_violator.as_ref().map(|v| {
            format!("the origin lies in the convex hull of the small subset {v:?}")
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "admissible": self.is_admissible(),
            "siegel": format!("{}", self.siegel),
            "weak_hyperbolicity_violator": self.weak_hyperbolicity_violator,
            "indispensable": self.indispensable.iter().collect::<Vec<_>>(),
            "k": self.k,
        })
    }
}

/// Global invariants of the link associated to a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDescriptor {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    /// Real dimension of the link, `2n − p − 1`.
    pub dim_x: usize,
    /// `n − p − 1`; the associate polytope has this dimension and `n − k`
    /// facets.
    pub polytope_dim: usize,
    /// Topological connectivity: 0 when circle factors are present, else
    /// `2·(neighbourliness + 1)`.
    pub connectivity: usize,
}

impl Configuration {
    pub fn new(p: usize, columns: Vec<Vec<Rat>>) -> Self {
        assert!(!columns.is_empty(), "a configuration needs at least one column");
        assert!(
            columns.iter().all(|c| c.len() == p),
            "all columns must have length p"
        );
        Configuration {
            n: columns.len(),
            p,
            columns,
        }
    }

    /// Convenience constructor from integer entries.
    pub fn from_i64(p: usize, columns: &[Vec<i64>]) -> Self {
        Self::new(
            p,
            columns
                .iter()
                .map(|c| c.iter().map(|&x| rat_int(x)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn columns(&self) -> &[Vec<Rat>] {
        &self.columns
    }

    pub fn column(&self, i: u32) -> &[Rat] {
        &self.columns[(i - 1) as usize]
    }

    /// Full admissibility analysis; always produces a report.
    pub fn check_admissible(&self) -> AdmissibilityReport {
        let all: Vec<Vec<Rat>> = self.columns.clone();
        let siegel = zero_in_convex_hull(self.p, &all);
        // A violation at any size ≤ p persists in every size-p superset, so
        // scanning the top size alone decides the condition; the ascending
        // scan below is only needed to report the smallest violator.
        let top = self.p.min(self.n);
        let any_violation = top > 0
            && (1..=self.n as u32).combinations(top).any(|subset| {
                let pts: Vec<Vec<Rat>> = subset
                    .iter()
                    .map(|&i| self.columns[(i - 1) as usize].clone())
                    .collect();
                matches!(zero_in_convex_hull(self.p, &pts), HullCert::Member { .. })
            });
        let mut violator = None;
        if any_violation {
            // Smallest violating subset, sizes ascending, lexicographic
            // within a size (combinations() emits them in that order).
            'outer: for size in 1..=top {
                for subset in (1..=self.n as u32).combinations(size) {
                    let pts: Vec<Vec<Rat>> = subset
                        .iter()
                        .map(|&i| self.columns[(i - 1) as usize].clone())
                        .collect();
                    if matches!(
                        zero_in_convex_hull(self.p, &pts),
                        HullCert::Member { .. }
                    ) {
                        violator = Some(subset);
                        break 'outer;
                    }
                }
            }
        }
        let mut indispensable = BTreeSet::new();
        for i in 1..=self.n as u32 {
            let pts: Vec<Vec<Rat>> = (1..=self.n as u32)
                .filter(|&j| j != i)
                .map(|j| self.columns[(j - 1) as usize].clone())
                .collect();
            if !matches!(zero_in_convex_hull(self.p, &pts), HullCert::Member { .. }) {
                indispensable.insert(i);
            }
        }
        let k = indispensable.len();
        AdmissibilityReport {
            siegel,
            weak_hyperbolicity_violator: violator,
            indispensable,
            k,
        }
    }

    /// Like [`check_admissible`](Self::check_admissible) but fails on an
    /// inadmissible configuration.
    pub fn require_admissible(&self) -> Result<AdmissibilityReport, ConfigError> {
        let report = self.check_admissible();
        match report.failure_reason() {
            Some(reason) => Err(ConfigError::NotAdmissible(reason)),
            None => Ok(report),
        }
    }

    /// Link invariants, including the connectivity read off the polytope.
    pub fn link_descriptor(&self) -> Result<LinkDescriptor, ConfigError> {
        let report = self.require_admissible()?;
        let connectivity = if report.k > 0 {
            0
        } else {
            let poly = crate::polytope::polytope_of(self)
                .map_err(|e| ConfigError::NotAdmissible(e.to_string()))?;
            2 * (crate::polytope::neighbourliness(&poly) + 1)
        };
        Ok(LinkDescriptor {
            n: self.n,
            p: self.p,
            k: report.k,
            dim_x: 2 * self.n - self.p - 1,
            polytope_dim: self.n - self.p - 1,
            connectivity,
        })
    }

    // -- JSON ---------------------------------------------------------------

    pub fn to_json(&self) -> Value {
        let cols: Vec<Vec<String>> = self
            .columns
            .iter()
            .map(|c| c.iter().map(format_rat).collect())
            .collect();
        json!({ "n": self.n, "p": self.p, "columns": cols })
    }

    pub fn from_json(v: &Value) -> Result<Self, ConfigError> {
        let bad = |m: &str| ConfigError::BadJson(m.to_string());
        let p = v
            .get("p")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer field 'p'"))? as usize;
        let cols_v = v
            .get("columns")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array field 'columns'"))?;
        if cols_v.is_empty() {
            return Err(bad("a configuration needs at least one column"));
        }
        let mut columns = Vec::with_capacity(cols_v.len());
        for col in cols_v {
            let arr = col.as_array().ok_or_else(|| bad("column is not an array"))?;
            if arr.len() != p {
                return Err(bad("column length differs from p"));
            }
            let mut c = Vec::with_capacity(p);
            for x in arr {
                let s = x
                    .as_str()
                    .ok_or_else(|| bad("column entry is not a rational string"))?;
                c.push(parse_rat(s).map_err(|e| bad(&format!("bad rational: {e}")))?);
            }
            columns.push(c);
        }
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize != columns.len() {
                return Err(bad("'n' disagrees with the number of columns"));
            }
        }
        Ok(Configuration::new(p, columns))
    }
}

/// True iff `i_set` numbers a face of the associate polytope: the origin lies
/// in the convex hull of the *complementary* columns.
pub fn face_condition(c: &Configuration, i_set: &[u32]) -> bool {
    assert!(
        i_set.iter().all(|&i| (1..=c.n as u32).contains(&i)),
        "face_condition: index set {:?} not within 1..={}",
        i_set,
        c.n
    );
    let rest: Vec<Vec<Rat>> = (1..=c.n as u32)
        .filter(|j| !i_set.contains(j))
        .map(|j| c.columns[(j - 1) as usize].clone())
        .collect();
    if rest.is_empty() {
        return false;
    }
    matches!(zero_in_convex_hull(c.p, &rest), HullCert::Member { .. })
}

/// Splits off all circle factors: repeatedly removes the smallest
/// indispensable column by the row-pivot elimination, returning the
/// 2-connected residue and the number `k` of circles removed.
pub fn split_circles(c: &Configuration) -> Result<(Configuration, usize), ConfigError> {
    let mut cur = c.clone();
    cur.require_admissible()?;
    let mut k = 0usize;
    loop {
        // At p = 0 the link is already a sphere (a circle when n = 1), so
        // there is nothing left to split even if a column reads as
        // indispensable.
        if cur.p == 0 {
            return Ok((cur, k));
        }
        let report = cur.check_admissible();
        let Some(&i) = report.indispensable.iter().next() else {
            return Ok((cur, k));
        };
        let ai = cur.columns[(i - 1) as usize].clone();
        let r = ai
            .iter()
            .position(|x| !x.is_zero())
            .ok_or(ConfigError::NoRowToPivot)?;
        let pivot = ai[r].clone();
        let mut columns = Vec::with_capacity(cur.n - 1);
        for (j, col) in cur.columns.iter().enumerate() {
            if j == (i - 1) as usize {
                continue;
            }
            let factor = col[r].clone() / pivot.clone();
            let newcol: Vec<Rat> = col
                .iter()
                .enumerate()
                .filter(|(row, _)| *row != r)
                .map(|(row, x)| x - &ai[row] * factor.clone())
                .collect();
            columns.push(newcol);
        }
        cur = Configuration::new(cur.p - 1, columns);
        k += 1;
    }
}

/// Product configuration: block matrix `[A 0; −1…−1 1…1; 0 B]`, whose link is
/// the product of the factor links and whose polytope is the product of the
/// factor polytopes.
pub fn product(c1: &Configuration, c2: &Configuration) -> Configuration {
    let p = c1.p + c2.p + 1;
    let mut columns = Vec::with_capacity(c1.n + c2.n);
    for col in &c1.columns {
        let mut v = col.clone();
        v.push(rat_int(-1));
        v.extend(std::iter::repeat_n(Rat::zero(), c2.p));
        columns.push(v);
    }
    for col in &c2.columns {
        let mut v: Vec<Rat> = std::iter::repeat_n(Rat::zero(), c1.p).collect();
        v.push(rat_int(1));
        v.extend(col.iter().cloned());
        columns.push(v);
    }
    Configuration::new(p, columns)
}

/// Appends one circle factor (the product with a point configuration):
/// one extra `−1…−1 | 1` row and one extra column.
pub fn append_circle(c: &Configuration) -> Configuration {
    product(c, &Configuration::new(0, vec![Vec::new()]))
}

/// Adjusts the configuration so the (possibly circle-multiplied) link carries
/// a complex structure: for odd `p` appends the single row `1…1 | −1` and one
/// column; for even `p` appends two such rows and two columns.
pub fn suspend_for_complex_structure(c: &Configuration) -> Configuration {
    if c.p % 2 == 1 {
        // One new row of ones and the column (0,…,0,−1).
        let mut columns: Vec<Vec<Rat>> = c
            .columns
            .iter()
            .map(|col| {
                let mut v = col.clone();
                v.push(rat_int(1));
                v
            })
            .collect();
        let mut last = vec![Rat::zero(); c.p];
        last.push(rat_int(-1));
        columns.push(last);
        Configuration::new(c.p + 1, columns)
    } else {
        // Two new rows of ones and the columns (0,…,0,−1,0), (0,…,0,0,−1).
        let mut columns: Vec<Vec<Rat>> = c
            .columns
            .iter()
            .map(|col| {
                let mut v = col.clone();
                v.push(rat_int(1));
                v.push(rat_int(1));
                v
            })
            .collect();
        let mut c1 = vec![Rat::zero(); c.p];
        c1.push(rat_int(-1));
        c1.push(Rat::zero());
        let mut c2 = vec![Rat::zero(); c.p];
        c2.push(Rat::zero());
        c2.push(rat_int(-1));
        columns.push(c1);
        columns.push(c2);
        Configuration::new(c.p + 2, columns)
    }
}

/// The holomorphic side bookkeeping for even `p = 2m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LvmReport {
    pub m: usize,
    /// Complex dimension of the quotient manifold, `n − m − 1`.
    pub complex_dim: usize,
    pub indispensable_count: usize,
    /// Whether at least `m + 1` points are indispensable, so the quotient is
    /// projective via the affine criterion.
    pub affine_criterion: bool,
    /// `m = 0` means the quotient is a projective space.
    pub projective_space: bool,
}

pub fn lvm_report(c: &Configuration) -> Result<LvmReport, ConfigError> {
    if c.p % 2 != 0 {
        return Err(ConfigError::OddP(c.p));
    }
    let report = c.require_admissible()?;
    let m = c.p / 2;
    Ok(LvmReport {
        m,
        complex_dim: c.n - m - 1,
        indispensable_count: report.k,
        affine_criterion: report.k >= m + 1,
        projective_space: m == 0,
    })
}

/// Gale realization: given a polytope with an exact rational realization of
/// its dual (vertices `B_i` with the origin interior), returns the
/// configuration whose columns are the Gale transform — the rows of a
/// deterministic nullspace basis of the `(d+1)×n` matrix `[B_1…B_n; 1…1]` —
/// followed by `circles` circle appends. The result is admissible and its
/// polytope equals `p` under identity labeling.
pub fn realize(p: &CombPolytope, circles: usize) -> Result<Configuration, ConfigError> {
    let real = p.realization().ok_or(ConfigError::MissingRealization)?;
    let n = p.n() as usize;
    let d = p.d();
    let mut m = RatMatrix::zeros(d + 1, n);
    for (j, b) in real.iter().enumerate() {
        for (i, x) in b.iter().enumerate() {
            *m.at_mut(i, j) = x.clone();
        }
        *m.at_mut(d, j) = rat_int(1);
    }
    let null = crate::kernel::nullspace_basis(&m); // basis vectors = columns
    let q = null.cols;
    if q != n - d - 1 {
        return Err(ConfigError::RealizationMismatch(format!(
            "nullspace dimension {q}, expected {}",
            n - d - 1
        )));
    }
    let columns: Vec<Vec<Rat>> = (0..n)
        .map(|j| (0..q).map(|i| null.at(j, i).clone()).collect())
        .collect();
    let mut c = Configuration::new(q, columns);
    // polytope_of re-checks admissibility itself; the dispensable map tells
    // us k without a second sweep.
    let (poly, dispensable) = crate::polytope::polytope_of_with_map(&c)
        .map_err(|e| ConfigError::RealizationMismatch(e.to_string()))?;
    if dispensable.len() != n {
        return Err(ConfigError::RealizationMismatch(format!(
            "Gale transform has {} indispensable points, expected none",
            n - dispensable.len()
        )));
    }
    if poly.dual_facets() != p.dual_facets() {
        return Err(ConfigError::RealizationMismatch(
            "associate polytope differs from the input combinatorics".into(),
        ));
    }
    for _ in 0..circles {
        c = append_circle(&c);
    }
    Ok(c)
}
