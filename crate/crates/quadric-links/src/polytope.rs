//! Combinatorial simple polytopes stored as their dual boundary simplicial
//! spheres.
//!
//! A simple `d`-polytope `P` with `n` facets is recorded by the maximal
//! simplices of the simplicial sphere ∂P* — one `d`-subset of `{1..n}` per
//! vertex of `P`, namely the set of facets through that vertex. Faces of `P`
//! correspond to simplices of ∂P* (the nonempty facet intersections), so
//! truncation becomes stellar subdivision, products become joins, and the
//! elementary surgeries become bistellar flips.
//!
//! An optional exact rational realization stores one point `B_i` per facet
//! label, normalized so that `P = { u : ⟨B_i, u⟩ ≥ −1 for all i }`; the `B_i`
//! are then the vertices of the dual polytope `P*` and `conv{B_i}` has the
//! recorded boundary sphere with the origin interior.

use crate::config::{face_condition, Configuration};
use crate::homology::SimplicialComplex;
use crate::kernel::{format_rat, parse_rat, rat_int, Rat, RatMatrix};
use itertools::Itertools;
use num_traits::Zero;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

/// A subset of the facet labels `{1..n}` as a bitmask (bit `i−1` = label `i`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct FacetSubset(pub u64);

impl FacetSubset {
    pub const EMPTY: FacetSubset = FacetSubset(0);

    pub fn from_labels(labels: &[u32]) -> Self {
        let mut m = 0u64;
        for &l in labels {
            assert!((1..=64).contains(&l), "facet label out of range: {l}");
            m |= 1 << (l - 1);
        }
        FacetSubset(m)
    }

    /// All labels `1..=n`.
    pub fn full(n: u32) -> Self {
        assert!(n <= 64);
        if n == 0 {
            FacetSubset(0)
        } else {
            FacetSubset(u64::MAX >> (64 - n))
        }
    }

    pub fn labels(&self) -> Vec<u32> {
        (1..=64).filter(|&l| self.contains(l)).collect()
    }

    pub fn contains(&self, label: u32) -> bool {
        (1..=64).contains(&label) && self.0 & (1 << (label - 1)) != 0
    }

    pub fn insert(&mut self, label: u32) {
        assert!((1..=64).contains(&label));
        self.0 |= 1 << (label - 1);
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn complement(&self, n: u32) -> Self {
        FacetSubset(Self::full(n).0 & !self.0)
    }

    pub fn union(&self, other: &Self) -> Self {
        FacetSubset(self.0 | other.0)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        FacetSubset(self.0 & other.0)
    }

    pub fn difference(&self, other: &Self) -> Self {
        FacetSubset(self.0 & !other.0)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Display for FacetSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().iter().join(","))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PolytopeError {
    #[error("not a valid dual sphere: {0}")]
    InvalidSphere(String),
    #[error("the named facet set {0} is not a face of the polytope")]
    NotAFace(FacetSubset),
    #[error("cannot truncate the empty face")]
    EmptyFace,
    #[error("invalid flip: {0}")]
    InvalidFlip(FlipError),
    #[error("realization check failed: {0}")]
    BadRealization(String),
    #[error("malformed polytope JSON: {0}")]
    BadJson(String),
    #[error("configuration error: {0}")]
    Config(#[from] crate::config::ConfigError),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FlipError {
    #[error("flip type ({0},{1}) does not satisfy a+b = d+1 with a,b ≥ 1")]
    BadType(usize, usize),
    #[error("face sizes do not match the flip type")]
    SizeMismatch,
    #[error("outgoing dual simplex {0} is not a face")]
    FaceOutMissing(FacetSubset),
    #[error("link of the outgoing simplex is not the boundary of the incoming simplex")]
    LinkMismatch,
    #[error("incoming dual simplex {0} is already a face")]
    AlreadyPresent(FacetSubset),
    #[error("a (1,d) flip must introduce the fresh label n+1")]
    LabelNotFresh,
}

/// A bistellar flip on the dual sphere. `face_out` (the simplex removed
/// together with its star) has `b` vertices, `face_in` (the simplex whose
/// boundary the link must equal) has `a` vertices, and `a + b = d + 1`.
/// The type `(a, b)` is the surgery type: `(1, d)` is a vertex cut,
/// `(d, 1)` its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipSpec {
    pub flip_type: (usize, usize),
    pub face_out: Vec<u32>,
    pub face_in: Vec<u32>,
}

impl FlipSpec {
    /// The reverse flip: applying it to the result restores the original.
    pub fn reversed(&self) -> FlipSpec {
        FlipSpec {
            flip_type: (self.flip_type.1, self.flip_type.0),
            face_out: self.face_in.clone(),
            face_in: self.face_out.clone(),
        }
    }
}

/// A simple polytope as its dual boundary sphere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombPolytope {
    n: u32,
    d: usize,
    dual_facets: Vec<Vec<u32>>,
    labels: Option<Vec<String>>,
    realization: Option<Vec<Vec<Rat>>>,
}

impl CombPolytope {
    /// Validating constructor.
    pub fn new(
        n: u32,
        d: usize,
        dual_facets: Vec<Vec<u32>>,
        labels: Option<Vec<String>>,
        realization: Option<Vec<Vec<Rat>>>,
    ) -> Result<Self, PolytopeError> {
        let mut facets: Vec<Vec<u32>> = dual_facets
            .into_iter()
            .map(|mut f| {
                f.sort_unstable();
                f
            })
            .collect();
        facets.sort();
        facets.dedup();
        let p = CombPolytope {
            n,
            d,
            dual_facets: facets,
            labels,
            realization,
        };
        p.validate()?;
        Ok(p)
    }

    /// The point polytope (d = 0, no facets); its dual sphere is S^{−1}.
    pub fn point() -> Self {
        CombPolytope {
            n: 0,
            d: 0,
            dual_facets: vec![Vec::new()],
            labels: None,
            realization: None,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dual_facets(&self) -> &[Vec<u32>] {
        &self.dual_facets
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label_name(&self, label: u32) -> String {
        self.labels
            .as_ref()
            .and_then(|ls| ls.get((label - 1) as usize).cloned())
            .unwrap_or_else(|| label.to_string())
    }

    pub fn set_labels(&mut self, labels: Option<Vec<String>>) {
        if let Some(ref ls) = labels {
            assert_eq!(ls.len(), self.n as usize);
        }
        self.labels = labels;
    }

    pub fn realization(&self) -> Option<&[Vec<Rat>]> {
        self.realization.as_deref()
    }

    pub fn drop_realization(&mut self) {
        self.realization = None;
    }

    /// True iff the labels form a face of P (a simplex of ∂P*); the empty set
    /// names P itself and counts as a face.
    pub fn is_face(&self, labels: &[u32]) -> bool {
        labels.is_empty()
            || self
                .dual_facets
                .iter()
                .any(|g| labels.iter().all(|v| g.binary_search(v).is_ok()))
    }

    pub fn is_face_subset(&self, s: &FacetSubset) -> bool {
        self.is_face(&s.labels())
    }

    /// The dual sphere as an abstract simplicial complex.
    pub fn dual_sphere(&self) -> SimplicialComplex {
        SimplicialComplex::new(
            (1..=self.n).collect(),
            self.dual_facets.clone(),
        )
    }

    /// Counts of `j`-simplices of ∂P* for `j = 0..d−1` (equivalently faces of
    /// P by decreasing dimension, ending in the vertex count).
    pub fn f_vector(&self) -> Vec<usize> {
        let by_dim = self.dual_sphere().faces_by_dim();
        by_dim.iter().skip(1).map(|l| l.len()).collect()
    }

    /// Number of vertices of P.
    pub fn vertex_count(&self) -> usize {
        self.dual_facets.len()
    }

    fn validate(&self) -> Result<(), PolytopeError> {
        let fail = |msg: String| Err(PolytopeError::InvalidSphere(msg));
        if self.d == 0 {
            if self.n == 0 && self.dual_facets == vec![Vec::<u32>::new()] {
                return Ok(());
            }
            return fail("a 0-dimensional polytope must have n = 0 and a single empty dual facet".into());
        }
        if self.n as usize > 64 {
            return fail(format!("facet count {} exceeds the supported 64", self.n));
        }
        if self.dual_facets.is_empty() {
            return fail("no dual facets".into());
        }
        let mut seen = vec![false; self.n as usize];
        for f in &self.dual_facets {
            if f.len() != self.d {
                return fail(format!("dual facet {f:?} does not have d = {} vertices", self.d));
            }
            for w in f.windows(2) {
                if w[0] >= w[1] {
                    return fail(format!("dual facet {f:?} has repeated labels"));
                }
            }
            for &v in f {
                if v == 0 || v > self.n {
                    return fail(format!("label {v} outside 1..={}", self.n));
                }
                seen[(v - 1) as usize] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return fail(format!("label {} occurs in no dual facet", missing + 1));
        }
        if let Some(ref ls) = self.labels {
            if ls.len() != self.n as usize {
                return fail("label name list length differs from n".into());
            }
        }
        // Pseudomanifold: every ridge in exactly two facets.
        let mut ridge_count: HashMap<Vec<u32>, u32> = HashMap::new();
        for (fi, f) in self.dual_facets.iter().enumerate() {
            let _ = fi;
            for skip in 0..f.len() {
                let mut r = f.clone();
                r.remove(skip);
                *ridge_count.entry(r).or_insert(0) += 1;
            }
        }
        for (r, c) in &ridge_count {
            if *c != 2 {
                return fail(format!("ridge {r:?} lies in {c} dual facets, expected 2"));
            }
        }
        // Strong connectivity through ridges.
        let m = self.dual_facets.len();
        if m > 1 {
            let mut ridge_to_facets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
            for (fi, f) in self.dual_facets.iter().enumerate() {
                for skip in 0..f.len() {
                    let mut r = f.clone();
                    r.remove(skip);
                    ridge_to_facets.entry(r).or_default().push(fi);
                }
            }
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
            for fs in ridge_to_facets.values() {
                if fs.len() == 2 {
                    adj[fs[0]].push(fs[1]);
                    adj[fs[1]].push(fs[0]);
                }
            }
            let mut vis = vec![false; m];
            let mut q = VecDeque::from([0usize]);
            vis[0] = true;
            let mut cnt = 1;
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if !vis[y] {
                        vis[y] = true;
                        cnt += 1;
                        q.push_back(y);
                    }
                }
            }
            if cnt != m {
                return fail("dual sphere is not strongly connected".into());
            }
        }
        // Sphere homology: H̃_*(∂P*) = H̃_*(S^{d−1}).
        let sum = self.dual_sphere().homology_summary();
        let want_deg = self.d as i64 - 1;
        let ok = sum.slices.len() == 1
            && sum.betti(want_deg) == 1
            && sum.torsion(want_deg).is_empty();
        if !ok {
            return fail(format!(
                "dual complex does not have the homology of S^{want_deg}"
            ));
        }
        if let Some(ref real) = self.realization {
            self.verify_realization_inner(real)
                .map_err(PolytopeError::BadRealization)?;
        }
        Ok(())
    }

    fn verify_realization_inner(&self, real: &[Vec<Rat>]) -> Result<(), String> {
        if real.len() != self.n as usize {
            return Err("one dual vertex per facet label is required".into());
        }
        if real.iter().any(|b| b.len() != self.d) {
            return Err(format!("dual vertices must have dimension d = {}", self.d));
        }
        // For every dual facet G, the hyperplane through {B_i : i ∈ G} must
        // have all other B strictly on the origin's side. Normalize the
        // hyperplane as ⟨c, x⟩ = 1 (it cannot pass through 0 when 0 is
        // interior).
        for g in &self.dual_facets {
            let rows: Vec<Vec<Rat>> = g
                .iter()
                .map(|&i| real[(i - 1) as usize].clone())
                .collect();
            let m = RatMatrix::from_rows(rows);
            let rhs = vec![rat_int(1); self.d];
            let c = m
                .solve(&rhs)
                .ok_or_else(|| format!("dual facet {g:?} is affinely degenerate"))?;
            // Check the solved hyperplane really interpolates (solve can
            // return least-structure answers only for consistent systems, but
            // assert anyway) and separates.
            for &i in g {
                let dot = dot(&real[(i - 1) as usize], &c);
                if dot != rat_int(1) {
                    return Err(format!("hyperplane of {g:?} misses its own vertex {i}"));
                }
            }
            for j in 1..=self.n {
                if g.binary_search(&j).is_ok() {
                    continue;
                }
                let dot = dot(&real[(j - 1) as usize], &c);
                if dot >= rat_int(1) {
                    return Err(format!(
                        "dual vertex {j} is not strictly inside the hyperplane of {g:?}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Vertex coordinates of P itself (one per dual facet, in the facet
    /// order), solved from the realization; `None` without a realization.
    pub fn primal_vertices(&self) -> Option<Vec<Vec<Rat>>> {
        let real = self.realization.as_ref()?;
        let mut out = Vec::with_capacity(self.dual_facets.len());
        for g in &self.dual_facets {
            let rows: Vec<Vec<Rat>> = g
                .iter()
                .map(|&i| real[(i - 1) as usize].clone())
                .collect();
            let m = RatMatrix::from_rows(rows);
            let rhs = vec![rat_int(-1); self.d];
            out.push(m.solve(&rhs)?);
        }
        Some(out)
    }

    // -- JSON interchange ---------------------------------------------------

    pub fn to_json(&self) -> Value {
        let mut obj = json!({
            "n": self.n,
            "d": self.d,
            "dual_facets": self.dual_facets,
        });
        if let Some(ref ls) = self.labels {
            obj["labels"] = json!(ls);
        }
        if let Some(ref real) = self.realization {
            let verts: Vec<Vec<String>> = real
                .iter()
                .map(|v| v.iter().map(format_rat).collect())
                .collect();
            obj["realization"] = json!({ "vertices": verts });
        }
        obj
    }

    pub fn from_json(v: &Value) -> Result<Self, PolytopeError> {
        let bad = |m: &str| PolytopeError::BadJson(m.to_string());
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer field 'n'"))? as u32;
        let d = v
            .get("d")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer field 'd'"))? as usize;
        let facets_v = v
            .get("dual_facets")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array field 'dual_facets'"))?;
        let mut dual_facets = Vec::with_capacity(facets_v.len());
        for f in facets_v {
            let arr = f.as_array().ok_or_else(|| bad("dual facet is not an array"))?;
            let mut face = Vec::with_capacity(arr.len());
            for x in arr {
                face.push(
                    x.as_u64()
                        .ok_or_else(|| bad("dual facet entry is not an integer"))?
                        as u32,
                );
            }
            dual_facets.push(face);
        }
        let labels = match v.get("labels") {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) => Some(
                a.iter()
                    .map(|x| {
                        x.as_str()
                            .map(String::from)
                            .ok_or_else(|| bad("label is not a string"))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Some(_) => return Err(bad("'labels' must be an array of strings")),
        };
        let realization = match v.get("realization") {
            None | Some(Value::Null) => None,
            Some(r) => {
                let verts = r
                    .get("vertices")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("'realization' must contain 'vertices'"))?;
                let mut out = Vec::with_capacity(verts.len());
                for row in verts {
                    let arr = row
                        .as_array()
                        .ok_or_else(|| bad("realization vertex is not an array"))?;
                    let mut coords = Vec::with_capacity(arr.len());
                    for x in arr {
                        let s = x
                            .as_str()
                            .ok_or_else(|| bad("realization coordinate is not a rational string"))?;
                        coords.push(
                            parse_rat(s).map_err(|e| bad(&format!("bad rational: {e}")))?,
                        );
                    }
                    out.push(coords);
                }
                Some(out)
            }
        };
        CombPolytope::new(n, d, dual_facets, labels, realization)
    }
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

// ---------------------------------------------------------------------------
// Construction from configurations
// ---------------------------------------------------------------------------

/// The associate polytope of an admissible configuration: facet labels are the
/// dispensable column indices relabeled `1..n−k` in order (original indices
/// kept as label names), and the dual facets are the maximal index sets whose
/// complementary columns still capture the origin in their convex hull.
pub fn polytope_of(c: &Configuration) -> Result<CombPolytope, PolytopeError> {
    let (p, _map) = polytope_of_with_map(c)?;
    Ok(p)
}

/// Like [`polytope_of`] but also returns the relabeling map: entry `j` is the
/// original (1-based) column index of the polytope's facet label `j+1`.
pub fn polytope_of_with_map(c: &Configuration) -> Result<(CombPolytope, Vec<u32>), PolytopeError> {
    let report = c.require_admissible()?;
    let dispensable: Vec<u32> = (1..=c.n() as u32)
        .filter(|i| !report.indispensable.contains(i))
        .collect();
    let raw = dual_facets_raw(c, &dispensable);
    let relabel: HashMap<u32, u32> = dispensable
        .iter()
        .enumerate()
        .map(|(j, &orig)| (orig, j as u32 + 1))
        .collect();
    let facets: Vec<Vec<u32>> = raw
        .iter()
        .map(|f| {
            let mut g: Vec<u32> = f.iter().map(|v| relabel[v]).collect();
            g.sort_unstable();
            g
        })
        .collect();
    let n = dispensable.len() as u32;
    let d = c.n() - c.p() - 1;
    if n == 0 {
        return Ok((CombPolytope::point(), dispensable));
    }
    let labels = Some(dispensable.iter().map(|i| i.to_string()).collect());
    let p = CombPolytope::new(n, d, facets, labels, None)?;
    Ok((p, dispensable))
}

/// Dual facets of the associate polytope in the *original* column labels,
/// restricted to the given dispensable labels. Used directly by wall-crossing
/// comparisons where relabeling would obscure the diff.
pub fn dual_facets_raw(c: &Configuration, dispensable: &[u32]) -> Vec<Vec<u32>> {
    // The polytope's dimension is n − p − 1 regardless of how many of the n
    // labels remain as facets.
    let d = (c.n() as i64 - c.p() as i64 - 1).max(0) as usize;
    let mut out = Vec::new();
    for comb in dispensable.iter().copied().combinations(d) {
        if face_condition(c, &comb) {
            out.push(comb);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Truncation (stellar subdivision of the dual face)
// ---------------------------------------------------------------------------

/// Cuts the face of P named by `face` (the facets containing it) with a new
/// facet `n+1`: stellar subdivision of the dual simplex σ_face. A vertex cut
/// is the special case `|face| = d`. The realization, when present, is
/// propagated with an exact cutting depth chosen strictly between the face
/// and the nearest other vertex.
pub fn truncate_face(p: &CombPolytope, face: &FacetSubset) -> Result<CombPolytope, PolytopeError> {
    if face.is_empty() {
        return Err(PolytopeError::EmptyFace);
    }
    let sigma = face.labels();
    if !p.is_face(&sigma) {
        return Err(PolytopeError::NotAFace(*face));
    }
    let new_label = p.n + 1;
    let mut facets = Vec::new();
    for g in p.dual_facets() {
        if sigma.iter().all(|v| g.binary_search(v).is_ok()) {
            for &v in &sigma {
                let mut h: Vec<u32> = g.iter().copied().filter(|&x| x != v).collect();
                h.push(new_label);
                h.sort_unstable();
                facets.push(h);
            }
        } else {
            facets.push(g.clone());
        }
    }
    let labels = p.labels.as_ref().map(|ls| {
        let mut ls = ls.clone();
        ls.push(new_label.to_string());
        ls
    });
    let realization = match (&p.realization, p.primal_vertices()) {
        (Some(real), Some(verts)) => {
            // s(u) = Σ_{i∈σ} (⟨B_i, u⟩ + 1) is 0 exactly on the cut face;
            // place the new dual vertex B = (Σ_{i∈σ} B_i) / (|σ| − δ) with
            // 0 < δ < min over off-face vertices of s(u) (and δ < |σ| to keep
            // the divisor positive).
            let mut min_s: Option<Rat> = None;
            for u in &verts {
                let s: Rat = sigma
                    .iter()
                    .map(|&i| dot(&real[(i - 1) as usize], u) + rat_int(1))
                    .sum();
                if !s.is_zero() {
                    min_s = Some(match min_s {
                        None => s,
                        Some(m) => m.min(s),
                    });
                }
            }
            let cap = rat_int(sigma.len() as i64);
            let bound = min_s.map_or(cap.clone(), |m| m.min(cap));
            let delta = bound / rat_int(2);
            let divisor = rat_int(sigma.len() as i64) - delta;
            let mut b_new = vec![Rat::zero(); p.d];
            for &i in &sigma {
                for (coord, x) in b_new.iter_mut().zip(&real[(i - 1) as usize]) {
                    *coord += x;
                }
            }
            for coord in b_new.iter_mut() {
                *coord /= divisor.clone();
            }
            let mut real = real.clone();
            real.push(b_new);
            Some(real)
        }
        _ => None,
    };
    CombPolytope::new(new_label, p.d, facets, labels, realization)
}

// ---------------------------------------------------------------------------
// Bistellar flips
// ---------------------------------------------------------------------------

/// Applies a bistellar flip, checking full validity: the outgoing simplex must
/// be present with link exactly the boundary of the incoming simplex, and the
/// incoming simplex must not already be a face. Type `(1,d)` introduces the
/// fresh label `n+1`; type `(d,1)` removes a label (labels above it shift
/// down by one).
pub fn apply_flip(p: &CombPolytope, f: &FlipSpec) -> Result<CombPolytope, PolytopeError> {
    let d = p.d;
    let (a, b) = f.flip_type;
    if a + b != d + 1 || a == 0 || b == 0 {
        return Err(PolytopeError::InvalidFlip(FlipError::BadType(a, b)));
    }
    if f.face_out.len() != b || f.face_in.len() != a {
        return Err(PolytopeError::InvalidFlip(FlipError::SizeMismatch));
    }
    let mut sigma = f.face_out.clone();
    sigma.sort_unstable();
    let mut tau = f.face_in.clone();
    tau.sort_unstable();

    if a == 1 {
        // Vertex cut: σ must be a dual facet; incoming vertex must be fresh.
        if tau != vec![p.n + 1] {
            return Err(PolytopeError::InvalidFlip(FlipError::LabelNotFresh));
        }
        if !p.dual_facets.contains(&sigma) {
            return Err(PolytopeError::InvalidFlip(FlipError::FaceOutMissing(
                FacetSubset::from_labels(&sigma),
            )));
        }
        return truncate_face(p, &FacetSubset::from_labels(&sigma));
    }

    if !p.is_face(&sigma) {
        return Err(PolytopeError::InvalidFlip(FlipError::FaceOutMissing(
            FacetSubset::from_labels(&sigma),
        )));
    }
    if p.is_face(&tau) {
        return Err(PolytopeError::InvalidFlip(FlipError::AlreadyPresent(
            FacetSubset::from_labels(&tau),
        )));
    }
    // Stars of σ must be exactly { σ ∪ (τ ∖ {t}) : t ∈ τ }.
    let star: BTreeSet<Vec<u32>> = p
        .dual_facets
        .iter()
        .filter(|g| sigma.iter().all(|v| g.binary_search(v).is_ok()))
        .cloned()
        .collect();
    let expected: BTreeSet<Vec<u32>> = tau
        .iter()
        .map(|t| {
            let mut g: Vec<u32> = sigma
                .iter()
                .chain(tau.iter().filter(|x| *x != t))
                .copied()
                .collect();
            g.sort_unstable();
            g
        })
        .collect();
    if star != expected {
        return Err(PolytopeError::InvalidFlip(FlipError::LinkMismatch));
    }
    // Replace σ ∗ ∂τ by ∂σ ∗ τ.
    let mut facets: Vec<Vec<u32>> = p
        .dual_facets
        .iter()
        .filter(|g| !star.contains(*g))
        .cloned()
        .collect();
    for s in &sigma {
        let mut g: Vec<u32> = sigma
            .iter()
            .filter(|x| *x != s)
            .chain(tau.iter())
            .copied()
            .collect();
        g.sort_unstable();
        facets.push(g);
    }

    if b == 1 {
        // The removed vertex σ = {v} disappears; shift labels above it.
        let v = sigma[0];
        debug_assert!(facets.iter().all(|g| g.binary_search(&v).is_err()));
        let shift = |x: u32| if x > v { x - 1 } else { x };
        let facets: Vec<Vec<u32>> = facets
            .into_iter()
            .map(|g| g.into_iter().map(shift).collect())
            .collect();
        let labels = p.labels.as_ref().map(|ls| {
            let mut ls = ls.clone();
            ls.remove((v - 1) as usize);
            ls
        });
        return CombPolytope::new(p.n - 1, d, facets, labels, None);
    }
    CombPolytope::new(p.n, d, facets, p.labels.clone(), None)
}

/// When `q` differs from `p` by exactly one bistellar flip, returns that flip;
/// otherwise `None` (including the case `p == q`).
pub fn diff_as_flip(p: &CombPolytope, q: &CombPolytope) -> Option<FlipSpec> {
    if p.d != q.d {
        return None;
    }
    let d = p.d;
    let pf: BTreeSet<&Vec<u32>> = p.dual_facets.iter().collect();
    let qf: BTreeSet<&Vec<u32>> = q.dual_facets.iter().collect();

    if q.n == p.n + 1 {
        // Candidate vertex cut introducing label n+1.
        let removed: Vec<&Vec<u32>> = pf.difference(&qf).copied().collect();
        if removed.len() != 1 {
            return None;
        }
        let spec = FlipSpec {
            flip_type: (1, d),
            face_out: removed[0].clone(),
            face_in: vec![p.n + 1],
        };
        let r = apply_flip(p, &spec).ok()?;
        return (r.dual_facets == q.dual_facets).then_some(spec);
    }
    if p.n == q.n + 1 {
        // Inverse: recover by flipping q up to p.
        let rev = diff_as_flip(q, p)?;
        // The forward flip removes the added vertex label n = p.n of p.
        let spec = FlipSpec {
            flip_type: (d, 1),
            face_out: rev.face_in,
            face_in: rev.face_out,
        };
        let r = apply_flip(p, &spec).ok()?;
        return (r.dual_facets == q.dual_facets).then_some(spec);
    }
    if p.n != q.n {
        return None;
    }
    let removed: Vec<Vec<u32>> = pf.difference(&qf).map(|f| (*f).clone()).collect();
    let added: Vec<Vec<u32>> = qf.difference(&pf).map(|f| (*f).clone()).collect();
    if removed.is_empty() || added.is_empty() {
        return None;
    }
    let a = removed.len(); // |τ|
    let b = added.len(); // |σ|
    if a + b != d + 1 {
        return None;
    }
    let inter = |fs: &[Vec<u32>]| -> Vec<u32> {
        let mut it = fs.iter();
        let first: BTreeSet<u32> = it.next().unwrap().iter().copied().collect();
        let set = it.fold(first, |acc, f| {
            acc.intersection(&f.iter().copied().collect()).copied().collect()
        });
        set.into_iter().collect()
    };
    let sigma = inter(&removed);
    let tau = inter(&added);
    if sigma.len() != b || tau.len() != a {
        return None;
    }
    let spec = FlipSpec {
        flip_type: (a, b),
        face_out: sigma,
        face_in: tau,
    };
    let r = apply_flip(p, &spec).ok()?;
    (r.dual_facets == q.dual_facets).then_some(spec)
}

// ---------------------------------------------------------------------------
// Products, equivalence, recognition
// ---------------------------------------------------------------------------

/// Product of polytopes: the dual spheres join, the second factor's labels are
/// shifted by `n1`. Realizations concatenate blockwise.
pub fn product(p1: &CombPolytope, p2: &CombPolytope) -> CombPolytope {
    if p1.d == 0 {
        return p2.clone();
    }
    if p2.d == 0 {
        return p1.clone();
    }
    let shift = p1.n;
    let mut facets = Vec::with_capacity(p1.dual_facets.len() * p2.dual_facets.len());
    for f1 in &p1.dual_facets {
        for f2 in &p2.dual_facets {
            let mut g: Vec<u32> = f1
                .iter()
                .copied()
                .chain(f2.iter().map(|v| v + shift))
                .collect();
            g.sort_unstable();
            facets.push(g);
        }
    }
    let labels = match (&p1.labels, &p2.labels) {
        (None, None) => None,
        _ => {
            let mut ls: Vec<String> = (1..=p1.n).map(|i| p1.label_name(i)).collect();
            ls.extend((1..=p2.n).map(|i| p2.label_name(i)));
            Some(ls)
        }
    };
    let realization = match (&p1.realization, &p2.realization) {
        (Some(r1), Some(r2)) => {
            let mut out = Vec::with_capacity((p1.n + p2.n) as usize);
            for b in r1 {
                let mut v = b.clone();
                v.extend(std::iter::repeat_n(Rat::zero(), p2.d));
                out.push(v);
            }
            for b in r2 {
                let mut v: Vec<Rat> = std::iter::repeat_n(Rat::zero(), p1.d).collect();
                v.extend(b.iter().cloned());
                out.push(v);
            }
            Some(out)
        }
        _ => None,
    };
    CombPolytope::new(p1.n + p2.n, p1.d + p2.d, facets, labels, realization)
        .expect("join of valid dual spheres is a valid dual sphere")
}

/// Combinatorial equivalence. With `up_to_relabeling` off this is equality of
/// dual facet sets (identity map or nothing); with it on, a label bijection is
/// searched by degree/adjacency color refinement plus backtracking. The
/// returned vector maps each label `i` of `p1` to `map[i−1]` in `p2`.
pub fn combinatorially_equal(
    p1: &CombPolytope,
    p2: &CombPolytope,
    up_to_relabeling: bool,
) -> Option<Vec<u32>> {
    if p1.d != p2.d || p1.n != p2.n || p1.dual_facets.len() != p2.dual_facets.len() {
        return None;
    }
    if p1.dual_facets == p2.dual_facets {
        return Some((1..=p1.n).collect());
    }
    if !up_to_relabeling {
        return None;
    }
    let n = p1.n as usize;
    // Color refinement on labels: start from facet-degree, refine with the
    // multiset of neighbor colors along dual edges.
    let colors = |p: &CombPolytope| -> Vec<u64> {
        let mut deg = vec![0u64; n];
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for f in &p.dual_facets {
            for &v in f {
                deg[(v - 1) as usize] += 1;
            }
            for pair in f.iter().combinations(2) {
                adj[(*pair[0] - 1) as usize].insert((*pair[1] - 1) as usize);
                adj[(*pair[1] - 1) as usize].insert((*pair[0] - 1) as usize);
            }
        }
        let mut col = deg;
        for _ in 0..n {
            let mut sig: Vec<(u64, Vec<u64>)> = (0..n)
                .map(|v| {
                    let mut ns: Vec<u64> = adj[v].iter().map(|&w| col[w]).collect();
                    ns.sort_unstable();
                    (col[v], ns)
                })
                .collect();
            let mut sorted = sig.clone();
            sorted.sort();
            sorted.dedup();
            let index: HashMap<&(u64, Vec<u64>), u64> = sorted
                .iter()
                .enumerate()
                .map(|(i, s)| (s, i as u64))
                .collect();
            let newcol: Vec<u64> = sig.iter().map(|s| index[s]).collect();
            if newcol == col {
                break;
            }
            col = newcol;
            sig.clear();
        }
        col
    };
    let c1 = colors(p1);
    let c2 = colors(p2);
    let mut sorted1 = c1.clone();
    let mut sorted2 = c2.clone();
    sorted1.sort_unstable();
    sorted2.sort_unstable();
    if sorted1 != sorted2 {
        return None;
    }
    let target: BTreeSet<&Vec<u32>> = p2.dual_facets.iter().collect();
    // Backtracking over label images, most-constrained labels first.
    let mut order: Vec<usize> = (0..n).collect();
    let mut class_size: HashMap<u64, usize> = HashMap::new();
    for &c in &c1 {
        *class_size.entry(c).or_insert(0) += 1;
    }
    order.sort_by_key(|&v| (class_size[&c1[v]], v));
    let mut map = vec![0u32; n]; // 0 = unassigned
    let mut used = vec![false; n];

    fn consistent(p1: &CombPolytope, target: &BTreeSet<&Vec<u32>>, map: &[u32]) -> bool {
        // Every fully-mapped dual facet of p1 must land in target.
        for f in &p1.dual_facets {
            if f.iter().all(|&v| map[(v - 1) as usize] != 0) {
                let mut img: Vec<u32> = f.iter().map(|&v| map[(v - 1) as usize]).collect();
                img.sort_unstable();
                if !target.contains(&img) {
                    return false;
                }
            }
        }
        true
    }

    fn search(
        pos: usize,
        order: &[usize],
        c1: &[u64],
        c2: &[u64],
        p1: &CombPolytope,
        target: &BTreeSet<&Vec<u32>>,
        map: &mut Vec<u32>,
        used: &mut Vec<bool>,
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let v = order[pos];
        for w in 0..c2.len() {
            if used[w] || c2[w] != c1[v] {
                continue;
            }
            map[v] = w as u32 + 1;
            used[w] = true;
            if consistent(p1, target, map)
                && search(pos + 1, order, c1, c2, p1, target, map, used)
            {
                return true;
            }
            map[v] = 0;
            used[w] = false;
        }
        false
    }

    if search(0, &order, &c1, &c2, p1, &target, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

/// Largest `k ≥ 0` such that every `(k+1)`-subset of labels is a simplex of
/// ∂P* (so the dual polytope is `(k+1)`-neighbourly in the usual indexing).
pub fn neighbourliness(p: &CombPolytope) -> usize {
    let n = p.n;
    let mut k = 0usize;
    for size in 2..=(p.d.min(n as usize)) {
        let all = (1..=n).combinations(size).all(|s| p.is_face(&s));
        if all {
            k = size - 1;
        } else {
            break;
        }
    }
    k
}

/// A 1-cycle of facets (d = 3 only): a facet subset whose induced dual
/// subcomplex is a circuit graph — connected, every named facet bivalent,
/// no vertex of P on three of the facets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetCycle {
    pub labels: Vec<u32>,
    pub length: usize,
}

/// Enumerates all 1-cycles of facets of a 3-polytope.
pub fn one_cycles_of_facets(p: &CombPolytope) -> Result<Vec<FacetCycle>, PolytopeError> {
    if p.d != 3 {
        return Err(PolytopeError::InvalidSphere(format!(
            "1-cycles of facets are defined for d = 3, got d = {}",
            p.d
        )));
    }
    let n = p.n as usize;
    // Dual edges and triangles.
    let mut edges: BTreeSet<(u32, u32)> = BTreeSet::new();
    for f in &p.dual_facets {
        for pr in f.iter().combinations(2) {
            edges.insert((*pr[0], *pr[1]));
        }
    }
    let facet_masks: Vec<u64> = p
        .dual_facets
        .iter()
        .map(|f| f.iter().fold(0u64, |m, &v| m | 1 << (v - 1)))
        .collect();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << n) {
        let size = mask.count_ones() as usize;
        if size < 3 {
            continue;
        }
        // No dual facet (vertex of P) may lie inside the subset.
        if facet_masks.iter().any(|&f| f & mask == f) {
            continue;
        }
        // Every label must have degree exactly 2 within the subset, and the
        // edge graph must be connected.
        let members: Vec<u32> = (1..=n as u32).filter(|&v| mask & (1 << (v - 1)) != 0).collect();
        let mut deg: HashMap<u32, usize> = members.iter().map(|&v| (v, 0)).collect();
        let mut adj: HashMap<u32, Vec<u32>> = members.iter().map(|&v| (v, Vec::new())).collect();
        let mut ecount = 0usize;
        for &(u, v) in &edges {
            if mask & (1 << (u - 1)) != 0 && mask & (1 << (v - 1)) != 0 {
                *deg.get_mut(&u).unwrap() += 1;
                *deg.get_mut(&v).unwrap() += 1;
                adj.get_mut(&u).unwrap().push(v);
                adj.get_mut(&v).unwrap().push(u);
                ecount += 1;
            }
        }
        if deg.values().any(|&x| x != 2) || ecount != size {
            continue;
        }
        // Connectivity.
        let mut vis: HashSet<u32> = HashSet::new();
        let mut q = VecDeque::from([members[0]]);
        vis.insert(members[0]);
        while let Some(x) = q.pop_front() {
            for &y in &adj[&x] {
                if vis.insert(y) {
                    q.push_back(y);
                }
            }
        }
        if vis.len() != size {
            continue;
        }
        out.push(FacetCycle {
            labels: members,
            length: size,
        });
    }
    Ok(out)
}

/// Greedy recognition of an iterated vertex cut of the `d`-simplex: repeatedly
/// undo a vertex cut (a label whose dual link bounds a missing `d`-simplex)
/// until the `d`-simplex remains. Returns the number of cuts and the label
/// (at the time of removal) undone at each step, newest first.
pub fn is_truncated_simplex(p: &CombPolytope) -> Option<(usize, Vec<u32>)> {
    let d = p.d;
    if d == 0 {
        return None;
    }
    let mut cur = p.clone();
    cur.drop_realization();
    let mut cuts = Vec::new();
    loop {
        if cur.n as usize == d + 1 {
            // Is it Δ^d? All d-subsets of {1..d+1} must be dual facets.
            let want: Vec<Vec<u32>> = (1..=cur.n).combinations(d).collect();
            if cur.dual_facets == want {
                cuts.reverse();
                return Some((cuts.len(), cuts));
            }
            return None;
        }
        let mut undone = false;
        for v in 1..=cur.n {
            // Star of v must be {v} ∪ (τ ∖ {t}) for a d-set τ not yet a face.
            let star: Vec<&Vec<u32>> = cur
                .dual_facets
                .iter()
                .filter(|g| g.binary_search(&v).is_ok())
                .collect();
            if star.len() != d {
                continue;
            }
            let mut tau: BTreeSet<u32> = BTreeSet::new();
            for g in &star {
                tau.extend(g.iter().copied().filter(|&x| x != v));
            }
            let tau: Vec<u32> = tau.into_iter().collect();
            if tau.len() != d {
                continue;
            }
            let spec = FlipSpec {
                flip_type: (d, 1),
                face_out: vec![v],
                face_in: tau,
            };
            if let Ok(next) = apply_flip(&cur, &spec) {
                cuts.push(v);
                cur = next;
                undone = true;
                break;
            }
        }
        if !undone {
            return None;
        }
    }
}

/// Builds a simple polytope from the vertex coordinates of its simplicial
/// dual: the points must be in convex position with the origin interior and
/// every facet a simplex. Facets are found by exact hyperplane enumeration
/// over all `d`-subsets.
pub fn polytope_from_dual_vertices(points: Vec<Vec<Rat>>) -> Result<CombPolytope, PolytopeError> {
    let n = points.len() as u32;
    if n == 0 {
        return Err(PolytopeError::InvalidSphere("no dual vertices".into()));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(PolytopeError::InvalidSphere(
            "dual vertices of mixed dimension".into(),
        ));
    }
    let mut facets = Vec::new();
    for subset in (1..=n).combinations(d) {
        let rows: Vec<Vec<Rat>> = subset
            .iter()
            .map(|&i| points[(i - 1) as usize].clone())
            .collect();
        let m = RatMatrix::from_rows(rows);
        // Hyperplane ⟨c, x⟩ = 1 through the subset; must exist uniquely
        // (affinely independent, not through 0) to support a simplex facet.
        if m.rank() != d {
            continue;
        }
        let Some(c) = m.solve(&vec![rat_int(1); d]) else {
            continue;
        };
        let mut supporting = true;
        for j in 1..=n {
            if subset.binary_search(&j).is_ok() {
                continue;
            }
            if dot(&points[(j - 1) as usize], &c) >= rat_int(1) {
                supporting = false;
                break;
            }
        }
        if supporting {
            facets.push(subset);
        }
    }
    CombPolytope::new(n, d, facets, None, Some(points))
}

/// Deterministic canonical relabeling key used to compare polytopes up to
/// relabeling cheaply in tests: the sorted multiset of color-refined facet
/// signatures.
pub fn canonical_facet_multiset(p: &CombPolytope) -> BTreeMap<Vec<u32>, usize> {
    let mut m = BTreeMap::new();
    for f in &p.dual_facets {
        *m.entry(f.clone()).or_insert(0) += 1;
    }
    m
}
