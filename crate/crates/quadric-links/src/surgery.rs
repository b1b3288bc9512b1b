//! Walls of admissible configurations, exact wall-crossing along straight
//! translation paths with flip matching, diffeomorphism-type reporting, and
//! the arbitrary-torsion polytope builder.

use crate::cohomology::{cohomology_of, sphere_product_pieces, CohomologyReport};
use crate::config::{realize, split_circles, ConfigError, Configuration};
use crate::homology::{link_complex, SimplicialComplex};
use crate::kernel::{nullspace_basis, rat_int, Int, Rat, RatMatrix};
use crate::polytope::{
    diff_as_flip, is_truncated_simplex, neighbourliness, polytope_of, truncate_face, CombPolytope,
    FacetSubset, FlipSpec, PolytopeError,
};
use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum SurgeryError {
    #[error("walls are only defined for p ≥ 1")]
    WallsNeedPositiveP,
    #[error("the path is not generic: {0}")]
    NonGenericPath(String),
    #[error("path endpoint is not admissible: {0}")]
    InadmissibleEndpoint(String),
    #[error("the cut count must be positive, got {0}")]
    BadCutCount(i64),
    #[error("this classification needs a p = 2 configuration, got p = {0}")]
    NotPTwo(usize),
    #[error("unusable input complex: {0}")]
    BadComplex(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

// ---------------------------------------------------------------------------
// Walls and crossing
// ---------------------------------------------------------------------------

/// An affine hyperplane through exactly `p` configuration points, with both
/// open sides inhabited. `plus_side` is the side containing the origin; the
/// wall's type is `(|plus_side|, |minus_side|)`.
#[derive(Clone, Debug)]
pub struct Wall {
    pub indices: Vec<u32>,
    /// `⟨normal, x⟩ = offset` describes the hyperplane; the origin satisfies
    /// `⟨normal, 0⟩ − offset > 0`.
    pub normal: Vec<Rat>,
    pub offset: Rat,
    pub plus_side: Vec<u32>,
    pub minus_side: Vec<u32>,
    pub wall_type: (usize, usize),
}

/// The hyperplane spanned by the given points, as `(normal, offset)` with
/// `⟨normal, x⟩ = offset`; `None` when the points are affinely dependent.
fn affine_span_hyperplane(points: &[&[Rat]], p: usize) -> Option<(Vec<Rat>, Rat)> {
    // Unknowns (w_1..w_p, c) with ⟨w, A_i⟩ − c = 0 per point.
    let mut m = RatMatrix::zeros(points.len(), p + 1);
    for (r, pt) in points.iter().enumerate() {
        for (j, x) in pt.iter().enumerate() {
            *m.at_mut(r, j) = x.clone();
        }
        *m.at_mut(r, p) = -Rat::one();
    }
    let null = nullspace_basis(&m);
    if null.cols != 1 {
        return None;
    }
    let normal: Vec<Rat> = (0..p).map(|i| null.at(i, 0).clone()).collect();
    let offset = null.at(p, 0).clone();
    if normal.iter().all(|x| x.is_zero()) {
        return None;
    }
    Some((normal, offset))
}

/// As `affine_span_hyperplane`, but oriented so the origin lies on the
/// strictly positive side; `None` additionally when the origin is on the
/// hyperplane.
fn hyperplane_through(points: &[&[Rat]], p: usize) -> Option<(Vec<Rat>, Rat)> {
    let (mut normal, mut offset) = affine_span_hyperplane(points, p)?;
    // The origin's side value is −offset; orient it positive.
    if offset.is_zero() {
        return None;
    }
    if (-offset.clone()).is_negative() {
        for x in normal.iter_mut() {
            *x = -x.clone();
        }
        offset = -offset;
    }
    Some((normal, offset))
}

fn side_value(normal: &[Rat], offset: &Rat, point: &[Rat]) -> Rat {
    normal
        .iter()
        .zip(point)
        .map(|(a, b)| a * b)
        .fold(-offset.clone(), |acc, x| acc + x)
}

fn wall_at(c: &Configuration, indices: &[u32]) -> Option<Wall> {
    let p = c.p();
    let pts: Vec<&[Rat]> = indices
        .iter()
        .map(|&i| c.column(i))
        .collect();
    let (normal, offset) = hyperplane_through(&pts, p)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for j in 1..=c.n() as u32 {
        if indices.contains(&j) {
            continue;
        }
        let v = side_value(&normal, &offset, c.column(j));
        if v.is_zero() {
            return None; // another point on the hyperplane: not a wall
        }
        if v.is_positive() {
            plus.push(j);
        } else {
            minus.push(j);
        }
    }
    if plus.is_empty() || minus.is_empty() {
        return None; // supports a facet of the hull
    }
    let t = (plus.len(), minus.len());
    Some(Wall {
        indices: indices.to_vec(),
        normal,
        offset,
        plus_side: plus,
        minus_side: minus,
        wall_type: t,
    })
}

/// All walls of an admissible configuration: `p`-subsets spanning a
/// hyperplane that contains no other point and has both open sides inhabited.
pub fn enumerate_walls(c: &Configuration) -> Result<Vec<Wall>, SurgeryError> {
    let p = c.p();
    if p == 0 {
        return Err(SurgeryError::WallsNeedPositiveP);
    }
    c.require_admissible()
        .map_err(|e| SurgeryError::InadmissibleEndpoint(e.to_string()))?;
    let mut out = Vec::new();
    for indices in (1..=c.n() as u32).combinations(p) {
        if let Some(w) = wall_at(c, &indices) {
            out.push(w);
        }
    }
    Ok(out)
}

/// One wall crossing along a straight translation path.
#[derive(Clone, Debug)]
pub struct CrossingEvent {
    pub t: Rat,
    /// The wall as seen just before the crossing (type included).
    pub wall: Wall,
    /// The convex coefficients exhibiting the origin on the wall at time `t`.
    pub mu: Vec<Rat>,
    /// The bistellar flip matched between the polytopes before and after.
    pub flip: Option<FlipSpec>,
}

/// The configuration translated to time `t` of the path: columns `A_i + t·v`.
pub fn translate(c: &Configuration, v: &[Rat], t: &Rat) -> Configuration {
    assert_eq!(v.len(), c.p(), "translation vector dimension");
    let columns = c
        .columns()
        .iter()
        .map(|col| col.iter().zip(v).map(|(a, w)| a + w * t).collect())
        .collect();
    Configuration::new(c.p(), columns)
}

/// Follows the straight path `A + t·v`, `t ∈ [0,1]`, and returns every wall
/// crossing in time order together with the endpoint configuration. Each
/// event's polytope change (computed at exact rational midpoints between
/// events) is matched as a bistellar flip whose type equals the wall's.
pub fn cross(
    c: &Configuration,
    v: &[Rat],
) -> Result<(Vec<CrossingEvent>, Configuration), SurgeryError> {
    let p = c.p();
    if p == 0 {
        return Err(SurgeryError::WallsNeedPositiveP);
    }
    c.require_admissible()
        .map_err(|e| SurgeryError::InadmissibleEndpoint(format!("at t = 0: {e}")))?;
    let end = translate(c, v, &Rat::one());
    end.require_admissible()
        .map_err(|e| SurgeryError::InadmissibleEndpoint(format!("at t = 1: {e}")))?;

    // Per p-subset, solve Σ μ_j A_{i_j} + t·v = 0, Σ μ_j = 1 in (μ, t).
    let mut raw: Vec<(Rat, Vec<u32>, Vec<Rat>)> = Vec::new();
    for indices in (1..=c.n() as u32).combinations(p) {
        let mut m = RatMatrix::zeros(p + 1, p + 1);
        let mut rhs = vec![Rat::zero(); p + 1];
        for (j, &i) in indices.iter().enumerate() {
            let col = c.column(i);
            for (r, x) in col.iter().enumerate() {
                *m.at_mut(r, j) = x.clone();
            }
            *m.at_mut(p, j) = Rat::one();
        }
        for (r, w) in v.iter().enumerate() {
            *m.at_mut(r, p) = w.clone();
        }
        rhs[p] = Rat::one();
        if m.rank() < p + 1 {
            continue; // the wall is never hit by the origin along the path
        }
        let Some(sol) = m.solve(&rhs) else { continue };
        let t = sol[p].clone();
        if !t.is_positive() || t >= Rat::one() {
            continue;
        }
        let mu = sol[..p].to_vec();
        if mu.iter().any(|x| x.is_zero()) {
            return Err(SurgeryError::NonGenericPath(format!(
                "at t = {t} the origin meets the boundary of the hull of points {indices:?}"
            )));
        }
        if mu.iter().any(|x| x.is_negative()) {
            continue; // the hyperplane through these points passes 0 outside their hull
        }
        // Genericity at the event: no further point on the wall.
        let at_t = translate(c, v, &t);
        let pts: Vec<&[Rat]> = indices
            .iter()
            .map(|&i| at_t.column(i))
            .collect();
        // At the event the origin sits on the wall itself, so only the span
        // condition applies here.
        let Some((normal, offset)) = affine_span_hyperplane(&pts, p) else {
            return Err(SurgeryError::NonGenericPath(format!(
                "at t = {t} the points {indices:?} do not span a hyperplane"
            )));
        };
        for j in 1..=at_t.n() as u32 {
            if indices.contains(&j) {
                continue;
            }
            if side_value(&normal, &offset, at_t.column(j)).is_zero() {
                return Err(SurgeryError::NonGenericPath(format!(
                    "at t = {t} point {j} also lies on the wall {indices:?}"
                )));
            }
        }
        raw.push((t, indices, mu));
    }
    raw.sort_by(|a, b| a.0.cmp(&b.0));
    for w in raw.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(SurgeryError::NonGenericPath(format!(
                "two walls are crossed at the same time t = {}",
                w[0].0
            )));
        }
    }

    // Polytopes at midpoints of the event intervals.
    let mut cuts = vec![Rat::zero()];
    cuts.extend(raw.iter().map(|(t, _, _)| t.clone()));
    cuts.push(Rat::one());
    let two = rat_int(2);
    let mids: Vec<Rat> = cuts.windows(2).map(|w| (&w[0] + &w[1]) / &two).collect();
    let mut polys = Vec::new();
    for t in &mids {
        let ct = translate(c, v, t);
        ct.require_admissible().map_err(|e| {
            SurgeryError::NonGenericPath(format!("between events, at t = {t}: {e}"))
        })?;
        polys.push(polytope_of(&ct)?);
    }

    let mut events = Vec::new();
    for (i, (t, indices, mu)) in raw.into_iter().enumerate() {
        let before = translate(c, v, &mids[i]);
        let wall = wall_at(&before, &indices).ok_or_else(|| {
            SurgeryError::NonGenericPath(format!(
                "the set {indices:?} is not a wall just before its crossing at t = {t}"
            ))
        })?;
        let flip = diff_as_flip(&polys[i], &polys[i + 1]);
        events.push(CrossingEvent { t, wall, mu, flip });
    }
    Ok((events, end))
}

// ---------------------------------------------------------------------------
// Diffeomorphism types
// ---------------------------------------------------------------------------

/// An expression for the diffeomorphism type of a link, annotated with a
/// plain-language justification per node.
#[derive(Clone, Debug)]
pub struct DiffeoType {
    pub node: DiffeoNode,
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub enum DiffeoNode {
    Sphere(usize),
    Torus(usize),
    Product(Vec<DiffeoType>),
    /// `(count, a, b)` copies of `S^a × S^b`, `a ≤ b`, all with `a + b` equal.
    ConnectedSum(Vec<(usize, usize, usize)>),
    /// The cohomology ring has connected-sum shape but the diffeomorphism is
    /// not certified.
    RingOnly(Vec<(usize, usize, usize)>),
    Unknown(Box<CohomologyReport>),
}

impl DiffeoType {
    pub fn dimension(&self) -> usize {
        match &self.node {
            DiffeoNode::Sphere(m) => *m,
            DiffeoNode::Torus(k) => *k,
            DiffeoNode::Product(fs) => fs.iter().map(|f| f.dimension()).sum(),
            DiffeoNode::ConnectedSum(ps) | DiffeoNode::RingOnly(ps) => {
                ps.first().map_or(0, |&(_, a, b)| a + b)
            }
            DiffeoNode::Unknown(r) => r.dim_x,
        }
    }

    /// Betti numbers of the expression, index = degree.
    pub fn betti(&self) -> Vec<usize> {
        match &self.node {
            DiffeoNode::Sphere(m) => {
                if *m == 0 {
                    vec![2]
                } else {
                    let mut b = vec![0; m + 1];
                    b[0] = 1;
                    b[*m] = 1;
                    b
                }
            }
            DiffeoNode::Torus(k) => (0..=*k).map(|i| binom(*k as i64, i as i64)).collect(),
            DiffeoNode::Product(fs) => {
                let mut acc = vec![1usize];
                for f in fs {
                    let fb = f.betti();
                    let mut next = vec![0usize; acc.len() + fb.len() - 1];
                    for (i, &a) in acc.iter().enumerate() {
                        for (j, &b) in fb.iter().enumerate() {
                            next[i + j] += a * b;
                        }
                    }
                    acc = next;
                }
                acc
            }
            DiffeoNode::ConnectedSum(ps) | DiffeoNode::RingOnly(ps) => {
                let dim = self.dimension();
                let mut b = vec![0usize; dim + 1];
                b[0] = 1;
                b[dim] = 1;
                for &(count, x, y) in ps {
                    b[x] += count;
                    b[y] += count;
                }
                b
            }
            DiffeoNode::Unknown(r) => r.betti_vector(),
        }
    }

    pub fn to_json(&self) -> Value {
        let body = match &self.node {
            DiffeoNode::Sphere(m) => json!({"type": "sphere", "dim": m}),
            DiffeoNode::Torus(k) => json!({"type": "torus", "circles": k}),
            DiffeoNode::Product(fs) => {
                json!({"type": "product", "factors": fs.iter().map(|f| f.to_json()).collect::<Vec<_>>()})
            }
            DiffeoNode::ConnectedSum(ps) => json!({
                "type": "connected_sum",
                "pieces": ps.iter().map(|&(c, a, b)| json!({"count": c, "a": a, "b": b})).collect::<Vec<_>>(),
            }),
            DiffeoNode::RingOnly(ps) => json!({
                "type": "ring_of_connected_sum",
                "pieces": ps.iter().map(|&(c, a, b)| json!({"count": c, "a": a, "b": b})).collect::<Vec<_>>(),
            }),
            DiffeoNode::Unknown(r) => json!({"type": "unknown", "cohomology": r.to_json()}),
        };
        let mut obj = body.as_object().unwrap().clone();
        obj.insert("provenance".into(), json!(self.provenance));
        Value::Object(obj)
    }
}

impl std::fmt::Display for DiffeoType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn pieces(ps: &[(usize, usize, usize)]) -> String {
            ps.iter()
                .map(|&(c, a, b)| format!("#({c}) S^{a}×S^{b}"))
                .join(" ")
        }
        match &self.node {
            DiffeoNode::Sphere(m) => write!(f, "S^{m}"),
            DiffeoNode::Torus(k) => write!(f, "T^{k}"),
            DiffeoNode::Product(fs) => write!(f, "{}", fs.iter().map(|x| x.to_string()).join(" × ")),
            DiffeoNode::ConnectedSum(ps) => write!(f, "{}", pieces(ps)),
            DiffeoNode::RingOnly(ps) => write!(f, "ring of {}", pieces(ps)),
            DiffeoNode::Unknown(_) => write!(f, "unknown"),
        }
    }
}

fn binom(a: i64, b: i64) -> usize {
    if b < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// The closed-form type of the link over a `q`-simplex with `l` vertex cuts:
/// the connected sum over `j = 1..l` of `j·C(l+1, j+1)` copies of
/// `S^{2+j} × S^{2q+l−j−1}`, with equal products merged. Total dimension
/// `2q + l + 1`.
pub fn mcgavran_type(q: usize, l: i64) -> Result<DiffeoType, SurgeryError> {
    if l <= 0 {
        return Err(SurgeryError::BadCutCount(l));
    }
    let l = l as usize;
    let mut merged: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for j in 1..=l {
        let count = j * binom(l as i64 + 1, j as i64 + 1);
        if count == 0 {
            continue;
        }
        let a = 2 + j;
        let b = 2 * q + l - j - 1;
        let key = (a.min(b), a.max(b));
        *merged.entry(key).or_insert(0) += count;
    }
    let pieces: Vec<(usize, usize, usize)> =
        merged.into_iter().map(|((a, b), c)| (c, a, b)).collect();
    for &(_, a, b) in &pieces {
        assert_eq!(a + b, 2 * q + l + 1, "summand dimensions must agree");
    }
    Ok(DiffeoType {
        node: DiffeoNode::ConnectedSum(pieces),
        provenance: format!(
            "simple polytope obtained from the {q}-simplex by {l} vertex cuts: closed-form connected sum of sphere products"
        ),
    })
}

// ---------------------------------------------------------------------------
// The p = 2 direction-merging classification
// ---------------------------------------------------------------------------

/// Primitive integer direction of a nonzero rational plane vector.
fn primitive_direction(col: &[Rat]) -> Vec<Int> {
    assert_eq!(col.len(), 2);
    let lcm = col
        .iter()
        .map(|x| x.denom().clone())
        .fold(Int::one(), |a, b| num_integer::lcm(a, b));
    let mut v: Vec<Int> = col.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = num_integer::gcd(v[0].abs(), v[1].abs());
    assert!(!g.is_zero(), "zero column has no direction");
    for x in v.iter_mut() {
        *x = &*x / &g;
    }
    v
}

fn cross2(a: &[Int], b: &[Int]) -> Int {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// Counterclockwise angular sort key: half-plane index, used with a
/// cross-product comparator inside each half.
fn half(a: &[Int]) -> u8 {
    if a[1].is_positive() || (a[1].is_zero() && a[0].is_positive()) {
        0
    } else {
        1
    }
}

fn ccw_cmp(a: &[Int], b: &[Int]) -> std::cmp::Ordering {
    half(a).cmp(&half(b)).then_with(|| {
        // Same half-plane: a before b iff the rotation from a to b is ccw.
        cross2(b, a).cmp(&Int::zero())
    })
}

/// Whether direction `e` lies strictly inside the open ccw arc from `u` to
/// `v` (directions assumed pairwise non-parallel where it matters).
fn in_open_arc(u: &[Int], v: &[Int], e: &[Int]) -> bool {
    let pos = |x: &[Int]| -> (u8, ()) { (half_relative(u, x), ()) };
    // Rank e and v by ccw angle measured from u; e is inside iff it comes
    // strictly before v and strictly after u.
    let rank = |x: &[Int]| -> Option<(u8, Vec<Int>)> {
        if cross2(u, x).is_zero() && (&u[0] * &x[0] + &u[1] * &x[1]).is_positive() {
            return None; // same direction as u: angle zero
        }
        Some((half_relative(u, x), x.to_vec()))
    };
    let _ = pos;
    let (Some(re), Some(rv)) = (rank(e), rank(v)) else {
        return false;
    };
    match re.0.cmp(&rv.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => cross2(&re.1, &rv.1).is_positive(),
    }
}

/// 0 when `x` is in the open ccw half-turn after `u` (cross > 0), 1 when
/// opposite to `u`, 2 when in the second half-turn (cross < 0).
fn half_relative(u: &[Int], x: &[Int]) -> u8 {
    let c = cross2(u, x);
    if c.is_positive() {
        0
    } else if c.is_zero() {
        1 // opposite direction (same direction is excluded by the caller)
    } else {
        2
    }
}

/// The reduced cyclic weight vector of a `p = 2` configuration: distinct
/// column directions in counterclockwise order with multiplicities, then
/// adjacent directions merged whenever the open arc between them contains no
/// antipode of any remaining direction. The result has an odd length
/// `k = 2l + 1` with exactly one antipode per gap.
pub fn reduced_weights(c: &Configuration) -> Result<Vec<(Vec<Int>, usize)>, SurgeryError> {
    if c.p() != 2 {
        return Err(SurgeryError::NotPTwo(c.p()));
    }
    c.require_admissible()
        .map_err(|e| SurgeryError::InadmissibleEndpoint(e.to_string()))?;
    let mut groups: Vec<(Vec<Int>, usize)> = Vec::new();
    for col in c.columns() {
        let dir = primitive_direction(col);
        if let Some(g) = groups.iter_mut().find(|(d, _)| *d == dir) {
            g.1 += 1;
        } else {
            groups.push((dir, 1));
        }
    }
    groups.sort_by(|a, b| ccw_cmp(&a.0, &b.0));
    loop {
        let k = groups.len();
        if k <= 1 {
            break;
        }
        let antipodes: Vec<Vec<Int>> = groups
            .iter()
            .map(|(d, _)| vec![-d[0].clone(), -d[1].clone()])
            .collect();
        let mut merged = false;
        for i in 0..k {
            let j = (i + 1) % k;
            let u = groups[i].0.clone();
            let v = groups[j].0.clone();
            if antipodes.iter().any(|a| in_open_arc(&u, &v, a)) {
                continue;
            }
            // Slide direction j onto direction i across an antipode-free arc.
            groups[i].1 += groups[j].1;
            groups.remove(j);
            merged = true;
            break;
        }
        if !merged {
            break;
        }
    }
    Ok(groups)
}

/// Classification of `p = 2` links by their reduced cyclic weights
/// `(n_1, …, n_k)`, `k = 2l+1`: a product of three spheres when `l = 1`, else
/// the connected sum over `i` of `S^{2d_i−1} × S^{2n−2d_i−2}` with
/// `d_i = n_i + … + n_{i+l−1}` (cyclically).
pub fn ldm_p2_type(c: &Configuration) -> Result<DiffeoType, SurgeryError> {
    let groups = reduced_weights(c)?;
    let k = groups.len();
    if k % 2 == 0 || k < 3 {
        return Err(SurgeryError::NonGenericPath(format!(
            "direction merging stopped at {k} weights; expected an odd count ≥ 3"
        )));
    }
    let l = (k - 1) / 2;
    let n = c.n();
    let weights: Vec<usize> = groups.iter().map(|(_, w)| *w).collect();
    if l == 1 {
        let factors: Vec<DiffeoType> = weights
            .iter()
            .map(|&w| DiffeoType {
                node: DiffeoNode::Sphere(2 * w - 1),
                provenance: "odd-sphere factor from one cyclic weight".into(),
            })
            .collect();
        return Ok(DiffeoType {
            node: DiffeoNode::Product(factors),
            provenance: "three reduced directions: product of three odd spheres".into(),
        });
    }
    let mut merged: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for i in 0..k {
        let d_i: usize = (0..l).map(|s| weights[(i + s) % k]).sum();
        let a = 2 * d_i - 1;
        let b = 2 * n - 2 * d_i - 2;
        let key = (a.min(b), a.max(b));
        *merged.entry(key).or_insert(0) += 1;
    }
    let pieces: Vec<(usize, usize, usize)> =
        merged.into_iter().map(|((a, b), cnt)| (cnt, a, b)).collect();
    Ok(DiffeoType {
        node: DiffeoNode::ConnectedSum(pieces),
        provenance: format!(
            "plane configuration reduced to {k} cyclic weights: connected sum from consecutive weight sums"
        ),
    })
}

// ---------------------------------------------------------------------------
// The classification cascade
// ---------------------------------------------------------------------------

/// Splits the dual sphere's label set by the components of the hypergraph of
/// minimal non-faces (in a join, every minimal non-face lies inside a single
/// factor) and, when the sphere is the join of the induced pieces, returns
/// the factor polytopes.
fn join_factors(p: &CombPolytope) -> Option<Vec<CombPolytope>> {
    let n = p.n() as usize;
    if n == 0 {
        return None;
    }
    // A minimal non-face has at most d + 1 labels; give up rather than
    // enumerate an oversized subset family.
    let top = p.d() + 1;
    if (2..=top).map(|k| binom(n as i64, k as i64)).sum::<usize>() > 2_000_000 {
        return None;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for k in 2..=top {
        for subset in (1..=n as u32).combinations(k) {
            if p.is_face(&subset) {
                continue;
            }
            // Minimal iff every one-element deletion is a face.
            let minimal = (0..k).all(|skip| {
                let smaller: Vec<u32> = subset
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                p.is_face(&smaller)
            });
            if !minimal {
                continue;
            }
            let root = find(&mut parent, (subset[0] - 1) as usize);
            for &v in &subset[1..] {
                let r = find(&mut parent, (v - 1) as usize);
                parent[r] = root;
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for i in 0..n {
        comps.entry(find(&mut parent, i)).or_default().push(i as u32 + 1);
    }
    if comps.len() < 2 {
        return None;
    }
    let comps: Vec<Vec<u32>> = comps.into_values().collect();
    // Projections of the facets onto each component must have constant size
    // and the facet set must be their full cartesian product.
    let mut factors = Vec::new();
    let mut projections: Vec<std::collections::BTreeSet<Vec<u32>>> = Vec::new();
    for comp in &comps {
        let relabel: std::collections::HashMap<u32, u32> = comp
            .iter()
            .enumerate()
            .map(|(idx, &lab)| (lab, idx as u32 + 1))
            .collect();
        let proj: std::collections::BTreeSet<Vec<u32>> = p
            .dual_facets()
            .iter()
            .map(|f| f.iter().filter(|v| comp.contains(v)).copied().collect())
            .collect();
        let sizes: std::collections::BTreeSet<usize> = proj.iter().map(|f| f.len()).collect();
        if sizes.len() != 1 {
            return None;
        }
        let dsub = *sizes.iter().next().unwrap();
        let relabeled: Vec<Vec<u32>> = proj
            .iter()
            .map(|f| f.iter().map(|v| relabel[v]).collect())
            .collect();
        let factor = CombPolytope::new(comp.len() as u32, dsub, relabeled, None, None).ok()?;
        factors.push(factor);
        projections.push(proj);
    }
    let product_count: usize = projections.iter().map(|s| s.len()).product();
    if product_count != p.dual_facets().len() {
        return None;
    }
    Some(factors)
}

/// Decides the diffeomorphism type of the link over `p` (with configuration
/// data used for circle factors and the `p = 2` classification):
/// sphere for simplices, products across join factorizations, the vertex-cut
/// connected-sum formula for truncated simplices, the plane classification
/// for `p = 2`, a ring-shape-only report for dual-neighbourly even dimension,
/// and otherwise an honest unknown with the cohomology attached.
pub fn diffeo_type(poly: &CombPolytope, cfg: Option<&Configuration>) -> DiffeoType {
    if let Some(c) = cfg {
        if c.p() == 0 {
            return DiffeoType {
                node: DiffeoNode::Sphere(2 * c.n() - 1),
                provenance: "no quadric equations beyond the unit sphere: an odd sphere".into(),
            };
        }
        let report = c.check_admissible();
        if report.is_admissible() && report.k > 0 {
            if let Ok((reduced, k)) = split_circles(c) {
                let inner = diffeo_type(poly, Some(&reduced));
                return DiffeoType {
                    node: DiffeoNode::Product(vec![
                        inner,
                        DiffeoType {
                            node: DiffeoNode::Torus(k),
                            provenance: format!("{k} indispensable points: {k} circle factors"),
                        },
                    ]),
                    provenance: "indispensable points split off as a torus factor".into(),
                };
            }
        }
    }
    let d = poly.d();
    let n = poly.n() as usize;
    if n == d + 1 {
        return DiffeoType {
            node: DiffeoNode::Sphere(n + d),
            provenance: "simplex polytope: the link is a sphere".into(),
        };
    }
    if let Some(factors) = join_factors(poly) {
        let parts: Vec<DiffeoType> = factors.iter().map(|f| diffeo_type(f, None)).collect();
        return DiffeoType {
            node: DiffeoNode::Product(parts),
            provenance: "dual sphere splits as a join: the link is a product".into(),
        };
    }
    if let Some((l, _)) = is_truncated_simplex(poly) {
        if l > 0 {
            return mcgavran_type(d, l as i64).expect("positive cut count");
        }
    }
    if let Some(c) = cfg {
        if c.p() == 2 {
            if let Ok(t) = ldm_p2_type(c) {
                return t;
            }
        }
    }
    if d >= 2 && d % 2 == 0 && neighbourliness(poly) + 1 >= d / 2 {
        let report = cohomology_of(poly);
        if (0..=report.dim_x).all(|i| report.torsion(i).is_empty()) {
            if let Some(pieces) = sphere_product_pieces(&report.betti_vector()) {
                return DiffeoType {
                    node: DiffeoNode::RingOnly(pieces),
                    provenance:
                        "dual-neighbourly even-dimensional polytope: ring shape certified, actual connected sum conjectural"
                            .into(),
                };
            }
        }
    }
    DiffeoType {
        node: DiffeoNode::Unknown(Box::new(cohomology_of(poly))),
        provenance: "no classification criterion applies; cohomology attached".into(),
    }
}

// ---------------------------------------------------------------------------
// The torsion builder
// ---------------------------------------------------------------------------

/// One certified group transfer: the input complex's reduced homology at
/// `complex_degree` appears in the link's cohomology at `cohomology_degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionCertificate {
    pub complex_degree: i64,
    pub cohomology_degree: usize,
    pub betti: usize,
    pub torsion: Vec<Int>,
}

#[derive(Clone, Debug)]
pub struct TorsionBuild {
    pub polytope: CombPolytope,
    pub config: Configuration,
    /// Number of base labels (`= l`, the vertex count of the input complex).
    pub base_labels: u32,
    /// The added facet labels, whose link complex is isomorphic to the input.
    pub added: FacetSubset,
    pub certificates: Vec<TorsionCertificate>,
}

/// Searches for a simplicial isomorphism between two complexes (small vertex
/// counts only).
pub fn complexes_isomorphic(a: &SimplicialComplex, b: &SimplicialComplex) -> bool {
    let va = a.vertices();
    let vb = b.vertices();
    if va.len() != vb.len() {
        return false;
    }
    let fa: Vec<Vec<u32>> = a.maximal_faces().to_vec();
    let fb: std::collections::BTreeSet<Vec<u32>> = b.maximal_faces().iter().cloned().collect();
    if fa.len() != fb.len() {
        return false;
    }
    // Degree profiles prune the search.
    let degree = |v: u32, faces: &[Vec<u32>]| -> Vec<usize> {
        let mut per_size: BTreeMap<usize, usize> = BTreeMap::new();
        for f in faces.iter().filter(|f| f.contains(&v)) {
            *per_size.entry(f.len()).or_insert(0) += 1;
        }
        per_size.into_iter().flat_map(|(s, c)| [s, c]).collect()
    };
    let fb_list: Vec<Vec<u32>> = fb.iter().cloned().collect();
    let da: Vec<Vec<usize>> = va.iter().map(|&v| degree(v, &fa)).collect();
    let db: Vec<Vec<usize>> = vb.iter().map(|&v| degree(v, &fb_list)).collect();
    fn assign(
        idx: usize,
        va: &[u32],
        vb: &[u32],
        da: &[Vec<usize>],
        db: &[Vec<usize>],
        used: &mut Vec<bool>,
        map: &mut std::collections::HashMap<u32, u32>,
        fa: &[Vec<u32>],
        fb: &std::collections::BTreeSet<Vec<u32>>,
    ) -> bool {
        if idx == va.len() {
            return fa.iter().all(|f| {
                let mut g: Vec<u32> = f.iter().map(|v| map[v]).collect();
                g.sort_unstable();
                fb.contains(&g)
            });
        }
        for j in 0..vb.len() {
            if used[j] || da[idx] != db[j] {
                continue;
            }
            used[j] = true;
            map.insert(va[idx], vb[j]);
            if assign(idx + 1, va, vb, da, db, used, map, fa, fb) {
                return true;
            }
            used[j] = false;
            map.remove(&va[idx]);
        }
        false
    }
    let mut used = vec![false; vb.len()];
    let mut map = std::collections::HashMap::new();
    assign(0, va, vb, &da, &db, &mut used, &mut map, &fa, &fb)
}

/// Builds a polytope (and a realizing configuration) whose link's cohomology
/// contains the reduced homology of the given complex as summands: the
/// simplex on the complex's vertices with the complements of its maximal
/// faces cut off, largest complements first. With `force_even` a final vertex
/// cut is applied when the link dimension is odd.
pub fn torsion_build(k: &SimplicialComplex, force_even: bool) -> Result<TorsionBuild, SurgeryError> {
    let verts = k.vertices();
    let l = verts.len();
    if l < 2 {
        return Err(SurgeryError::BadComplex(format!(
            "need at least 2 vertices, got {l}"
        )));
    }
    if verts.iter().enumerate().any(|(i, &v)| v != i as u32 + 1) {
        return Err(SurgeryError::BadComplex(format!(
            "vertex set must be 1..={l}, got {verts:?}"
        )));
    }
    for &v in verts {
        if !k.maximal_faces().iter().any(|f| f.contains(&v)) {
            return Err(SurgeryError::BadComplex(format!(
                "vertex {v} appears in no maximal face"
            )));
        }
    }
    // Complements of the maximal faces; the whole vertex set (complement ∅)
    // cannot and need not be cut.
    let mut cuts: Vec<Vec<u32>> = k
        .maximal_faces()
        .iter()
        .map(|f| {
            (1..=l as u32)
                .filter(|v| !f.contains(v))
                .collect::<Vec<u32>>()
        })
        .filter(|comp| !comp.is_empty())
        .collect();
    // A complement of size 1 would mean truncating a whole facet, which
    // removes its label instead of adding one; the construction needs every
    // cut to be a face of codimension at least 2.
    if let Some(bad) = cuts.iter().find(|c| c.len() < 2) {
        return Err(SurgeryError::BadComplex(format!(
            "maximal face missing only vertex {:?} leaves no face to cut; \
             every maximal-face complement must have at least 2 vertices",
            bad
        )));
    }
    cuts.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut poly = crate::builtin::simplex(l - 1);
    for cut in &cuts {
        poly = truncate_face(&poly, &FacetSubset::from_labels(cut))?;
    }
    let added = FacetSubset::from_labels(
        &((l as u32 + 1)..=poly.n()).collect::<Vec<u32>>(),
    );
    let mut certificates = Vec::new();
    if !added.is_empty() {
        let link = link_complex(&poly, &added).map_err(|e| {
            SurgeryError::BadComplex(format!("added labels do not index a summand: {e}"))
        })?;
        if !complexes_isomorphic(k, &link) {
            return Err(SurgeryError::BadComplex(
                "link complex over the added labels is not isomorphic to the input".into(),
            ));
        }
        let h = k.homology_summary();
        for slice in &h.slices {
            // Degree bookkeeping: a link-complex class of degree j sits in
            // cohomology degree 2·l − j − 2 (the complement of the added
            // labels has size l).
            let i = 2 * l as i64 - slice.degree - 2;
            assert!(i >= 0);
            certificates.push(TorsionCertificate {
                complex_degree: slice.degree,
                cohomology_degree: i as usize,
                betti: slice.betti,
                torsion: slice.torsion.clone(),
            });
        }
    }
    if force_even && (poly.n() as usize + poly.d()) % 2 == 1 {
        let first_vertex = poly.dual_facets()[0].clone();
        poly = truncate_face(&poly, &FacetSubset::from_labels(&first_vertex))?;
    }
    let config = realize(&poly, 0)?;
    Ok(TorsionBuild {
        polytope: poly,
        config,
        base_labels: l as u32,
        added,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{
        book, cube, p1_wall_path, p2_pocket_path, pentagon_config, rp2_complex, simplex,
    };
    use crate::kernel::rat;
    use crate::polytope::combinatorially_equal;

    #[test]
    fn walls_on_the_line() {
        let (c, _) = p1_wall_path();
        let walls = enumerate_walls(&c).unwrap();
        // The two extreme points have an empty open side, so only the two
        // inner points are walls.
        assert_eq!(walls.len(), 2);
        let w3 = walls.iter().find(|w| w.indices == vec![3]).unwrap();
        assert_eq!(w3.wall_type, (2, 1));
        assert_eq!(w3.plus_side, vec![1, 2]);
    }

    #[test]
    fn pentagon_walls_are_the_diagonal_pairs() {
        let c = pentagon_config();
        let walls = enumerate_walls(&c).unwrap();
        // 10 pairs, of which the 5 hull edges are excluded.
        assert_eq!(walls.len(), 5);
        for w in &walls {
            assert_eq!(w.wall_type.0 + w.wall_type.1, 3);
        }
    }

    #[test]
    fn p1_path_single_event() {
        let (c, v) = p1_wall_path();
        let (events, end) = cross(&c, &v).unwrap();
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!(e.t, rat(2, 3));
        assert_eq!(e.wall.indices, vec![3]);
        assert_eq!(e.wall.wall_type, (2, 1));
        let flip = e.flip.as_ref().expect("polytope change matches a flip");
        assert_eq!(flip.flip_type, (2, 1));
        assert_eq!(end.check_admissible().k, 1);
    }

    #[test]
    fn p2_path_single_event() {
        let (c, v) = p2_pocket_path();
        let (events, end) = cross(&c, &v).unwrap();
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!(e.t, rat(2, 7));
        assert_eq!(e.wall.indices, vec![1, 3]);
        assert_eq!(e.wall.wall_type, (1, 2));
        assert_eq!(e.flip.as_ref().unwrap().flip_type, (1, 2));
        assert_eq!(end.check_admissible().k, 1);
        let after = polytope_of(&end).unwrap();
        assert!(combinatorially_equal(&after, &cube(2), true).is_some());
    }

    #[test]
    fn zero_translation_has_no_events() {
        let c = pentagon_config();
        let (events, _) = cross(&c, &[Rat::zero(), Rat::zero()]).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn mcgavran_examples() {
        let t = mcgavran_type(3, 4).unwrap();
        match &t.node {
            DiffeoNode::ConnectedSum(pieces) => {
                assert_eq!(pieces, &vec![(10, 3, 8), (20, 4, 7), (19, 5, 6)]);
            }
            _ => panic!("expected a connected sum"),
        }
        let t = mcgavran_type(2, 2).unwrap();
        match &t.node {
            DiffeoNode::ConnectedSum(pieces) => assert_eq!(pieces, &vec![(5, 3, 4)]),
            _ => panic!("expected a connected sum"),
        }
        let t = mcgavran_type(2, 1).unwrap();
        match &t.node {
            DiffeoNode::ConnectedSum(pieces) => assert_eq!(pieces, &vec![(1, 3, 3)]),
            _ => panic!("expected a connected sum"),
        }
        assert!(mcgavran_type(3, 0).is_err());
    }

    #[test]
    fn ldm_on_the_pentagon() {
        let t = ldm_p2_type(&pentagon_config()).unwrap();
        match &t.node {
            DiffeoNode::ConnectedSum(pieces) => assert_eq!(pieces, &vec![(5, 3, 4)]),
            _ => panic!("expected a connected sum, got {t}"),
        }
        assert_eq!(t.dimension(), 7);
    }

    #[test]
    fn ldm_on_the_pocket_path_start() {
        // Two indispensable points: the reduction must yield three weights
        // and the full type S⁵ × T² through the cascade.
        let (c, _) = p2_pocket_path();
        let weights = reduced_weights(&c).unwrap();
        assert_eq!(weights.len(), 3);
        let total: usize = weights.iter().map(|(_, w)| w).sum();
        assert_eq!(total, 5);
        let poly = polytope_of(&c).unwrap();
        let t = diffeo_type(&poly, Some(&c));
        assert_eq!(t.dimension(), 7);
        assert_eq!(t.betti(), vec![1, 2, 1, 0, 0, 1, 2, 1]);
    }

    #[test]
    fn cascade_on_cube_and_books() {
        let t = diffeo_type(&cube(3), None);
        assert_eq!(t.to_string(), "S^3 × S^3 × S^3");
        let t = diffeo_type(&simplex(4), None);
        assert_eq!(t.to_string(), "S^9");
        let t = diffeo_type(&book(6).unwrap(), None);
        match &t.node {
            DiffeoNode::ConnectedSum(pieces) => {
                let total_dim = t.dimension();
                assert_eq!(total_dim, 10);
                assert!(!pieces.is_empty());
            }
            _ => panic!("hexagonal book should be a connected sum, got {t}"),
        }
    }

    #[test]
    fn torsion_build_small_cases() {
        // A circle on 4 vertices.
        let circle = SimplicialComplex::from_maximal(vec![
            vec![1, 2],
            vec![2, 3],
            vec![3, 4],
            vec![1, 4],
        ]);
        let b = torsion_build(&circle, false).unwrap();
        assert_eq!(b.polytope.n(), 8);
        assert_eq!(b.polytope.d(), 3);
        assert_eq!(b.certificates.len(), 1);
        let cert = &b.certificates[0];
        assert_eq!(cert.complex_degree, 1);
        assert_eq!(cert.cohomology_degree, 5);
        assert_eq!(cert.betti, 1);
        assert!(cert.torsion.is_empty());
        // Full cross-check on the small case.
        let report = cohomology_of(&b.polytope);
        let summands = report.summands_with_support(&b.added);
        assert!(summands
            .iter()
            .any(|&(deg, betti, _)| deg == 5 && betti >= 1));

        // A circle on 3 vertices has singleton complements: rejected.
        let small = SimplicialComplex::from_maximal(vec![vec![1, 2], vec![2, 3], vec![1, 3]]);
        assert!(matches!(
            torsion_build(&small, false),
            Err(SurgeryError::BadComplex(_))
        ));

        // A single edge: contractible, nothing to certify.
        let edge = SimplicialComplex::from_maximal(vec![vec![1, 2]]);
        let b = torsion_build(&edge, false).unwrap();
        assert!(b.certificates.is_empty());
        assert_eq!(b.polytope.n(), 2);
    }

    #[test]
    fn torsion_build_rp2_shape() {
        let b = torsion_build(&rp2_complex(), false).unwrap();
        assert_eq!(b.polytope.n(), 16);
        assert_eq!(b.polytope.d(), 5);
        assert_eq!(b.polytope.n() as usize + b.polytope.d(), 21);
        let z2 = b
            .certificates
            .iter()
            .find(|c| c.complex_degree == 1)
            .expect("the projective plane has a degree-1 group");
        assert_eq!(z2.cohomology_degree, 9);
        assert_eq!(z2.betti, 0);
        assert_eq!(z2.torsion, vec![Int::from(2)]);
        assert_eq!(b.config.n(), 16);
        // Even-dimension variant adds one facet.
        let be = torsion_build(&rp2_complex(), true).unwrap();
        assert_eq!(be.polytope.n(), 17);
    }
}
