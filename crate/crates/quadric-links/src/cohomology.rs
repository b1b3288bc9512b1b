//! Graded cohomology of the link over a simple polytope, assembled from the
//! homology of facet-induced subcomplexes of the dual sphere, with cup
//! products computed by an explicit join of representative cycles.
//!
//! For a valid polytope with `n` facets and dimension `d` the link `X` is a
//! closed `(n+d)`-manifold and
//! `H^i(X) ≅ ⊕_{𝓘 ⊆ 𝓕} H̃_{d+|𝓘̄|−i−1}(K_𝓘)`, where `K_𝓘` is the subcomplex
//! of the dual sphere induced on the facet subset `𝓘` and `𝓘̄` is its
//! complement. Each summand is carried by the link complex of `𝓘`, and the
//! product of two classes is zero unless their supports cover all facets.

use crate::homology::{
    boundary_chain, induced_subcomplex, link_complex, reduced_homology, Chain, CycleBasis,
    HomologySummary, Simplex,
};
use crate::kernel::Int;
use crate::polytope::{
    is_truncated_simplex, neighbourliness, one_cycles_of_facets, CombPolytope, FacetCycle,
    FacetSubset,
};
use crate::homology::ClassCoords;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

#[derive(Debug, thiserror::Error)]
pub enum CohomologyError {
    #[error("the two facet-set complements overlap")]
    OverlappingComplements,
    #[error("the vertex-cut update needs polytope dimension ≥ 2, got {0}")]
    CutNeedsDimensionTwo(usize),
    #[error("facet count {0} exceeds the subset-sweep cap {1}")]
    SweepTooLarge(u32, u32),
}

/// How many worker threads subset sweeps use: the `QUADRIC_LINKS_THREADS`
/// environment variable when set, else the available parallelism.
pub fn thread_count() -> usize {
    if let Ok(s) = std::env::var("QUADRIC_LINKS_THREADS") {
        if let Ok(k) = s.trim().parse::<usize>() {
            return k.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, |k| k.get())
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Where a summand of a report degree comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SummandOrigin {
    /// Computed from the subcomplex induced on this facet subset.
    Support(FacetSubset),
    /// Carried over from degree `i − shift` of the pre-cut report.
    Carried { shift: usize },
    /// The free classes created by a vertex cut.
    CutClasses,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summand {
    pub origin: SummandOrigin,
    pub betti: usize,
    pub torsion: Vec<Int>,
}

/// `H^*(X)` of the link over a polytope, one summand list per degree
/// `0 ..= dim_x` with `dim_x = n + d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub n: u32,
    pub d: usize,
    pub dim_x: usize,
    pub degrees: Vec<Vec<Summand>>,
}

impl CohomologyReport {
    pub fn betti(&self, i: usize) -> usize {
        self.degrees
            .get(i)
            .map_or(0, |s| s.iter().map(|x| x.betti).sum())
    }

    pub fn betti_vector(&self) -> Vec<usize> {
        (0..=self.dim_x).map(|i| self.betti(i)).collect()
    }

    /// Sorted multiset of torsion coefficients in one degree.
    pub fn torsion(&self, i: usize) -> Vec<Int> {
        let mut t: Vec<Int> = self
            .degrees
            .get(i)
            .map_or_else(Vec::new, |s| s.iter().flat_map(|x| x.torsion.clone()).collect());
        t.sort();
        t
    }

    pub fn euler(&self) -> i64 {
        (0..=self.dim_x)
            .map(|i| {
                let b = self.betti(i) as i64;
                if i % 2 == 0 {
                    b
                } else {
                    -b
                }
            })
            .sum()
    }

    /// Summands with the given support across all degrees, as
    /// `(degree, betti, torsion)`.
    pub fn summands_with_support(&self, support: &FacetSubset) -> Vec<(usize, usize, Vec<Int>)> {
        let mut out = Vec::new();
        for (i, summands) in self.degrees.iter().enumerate() {
            for s in summands {
                if s.origin == SummandOrigin::Support(*support) {
                    out.push((i, s.betti, s.torsion.clone()));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let degrees: Vec<Value> = self
            .degrees
            .iter()
            .enumerate()
            .map(|(i, summands)| {
                let list: Vec<Value> = summands
                    .iter()
                    .map(|s| {
                        let mut obj = serde_json::Map::new();
                        match &s.origin {
                            SummandOrigin::Support(sup) => {
                                obj.insert("support".into(), json!(sup.labels()));
                            }
                            SummandOrigin::Carried { shift } => {
                                obj.insert("origin".into(), json!(format!("carried from degree −{shift}")));
                            }
                            SummandOrigin::CutClasses => {
                                obj.insert("origin".into(), json!("classes created by the vertex cut"));
                            }
                        }
                        obj.insert("betti".into(), json!(s.betti));
                        obj.insert(
                            "torsion".into(),
                            json!(s.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>()),
                        );
                        Value::Object(obj)
                    })
                    .collect();
                json!({ "degree": i, "betti": self.betti(i), "summands": list })
            })
            .collect();
        json!({ "n": self.n, "d": self.d, "dim_x": self.dim_x, "degrees": degrees })
    }
}

/// Reduced homology of every facet-induced subcomplex, indexed by the subset
/// bitmask (`0 ..= 2^n − 1`). The expensive shared input of both report
/// directions; computed in parallel.
pub fn subset_summaries(p: &CombPolytope) -> Vec<HomologySummary> {
    let n = p.n();
    assert!(n <= 25, "subset sweep over 2^{n} subsets refused");
    let total: u64 = 1u64 << n;
    let workers = thread_count().min(total as usize).max(1);
    let chunk = total.div_ceil(workers as u64);
    let mut out: Vec<HomologySummary> = vec![HomologySummary::default(); total as usize];
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers as u64 {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(total);
            handles.push(scope.spawn(move || {
                let mut part = Vec::with_capacity((hi - lo) as usize);
                for mask in lo..hi {
                    let k = induced_subcomplex(p, &FacetSubset(mask));
                    part.push(k.homology_summary());
                }
                (lo, part)
            }));
        }
        for h in handles {
            let (lo, part) = h.join().expect("sweep worker panicked");
            for (off, s) in part.into_iter().enumerate() {
                out[lo as usize + off] = s;
            }
        }
    });
    out
}

/// Assembles `H^*(X)` from precomputed subset summaries.
pub fn cohomology_from_summaries(
    p: &CombPolytope,
    summaries: &[HomologySummary],
) -> CohomologyReport {
    let n = p.n();
    let d = p.d();
    let dim_x = n as usize + d;
    let mut degrees: Vec<Vec<Summand>> = vec![Vec::new(); dim_x + 1];
    for (mask, summary) in summaries.iter().enumerate() {
        let support = FacetSubset(mask as u64);
        let comp = (n as usize) - support.len();
        for slice in &summary.slices {
            // degree j of K_𝓘 lands in cohomology degree i = d + |𝓘̄| − j − 1
            let i = d as i64 + comp as i64 - slice.degree - 1;
            assert!(
                (0..=dim_x as i64).contains(&i),
                "summand degree {i} escapes 0..={dim_x}"
            );
            degrees[i as usize].push(Summand {
                origin: SummandOrigin::Support(support),
                betti: slice.betti,
                torsion: slice.torsion.clone(),
            });
        }
    }
    CohomologyReport { n, d, dim_x, degrees }
}

/// `H^*(X)` of the link over `p`.
pub fn cohomology_of(p: &CombPolytope) -> CohomologyReport {
    cohomology_from_summaries(p, &subset_summaries(p))
}

/// Assembles the homology of the link from precomputed subset summaries:
/// `H_i(X) ≅ ⊕_𝓘 H̃_{i−|𝓘|−1}(K_𝓘)` (unreduced; the empty subset carries the
/// degree-0 unit).
pub fn homology_from_summaries(
    p: &CombPolytope,
    summaries: &[HomologySummary],
) -> HomologySummary {
    let dim_x = p.n() as usize + p.d();
    let mut betti: BTreeMap<i64, usize> = BTreeMap::new();
    let mut torsion: BTreeMap<i64, Vec<Int>> = BTreeMap::new();
    for (mask, summary) in summaries.iter().enumerate() {
        let size = FacetSubset(mask as u64).len() as i64;
        for slice in &summary.slices {
            let i = slice.degree + size + 1;
            assert!((0..=dim_x as i64).contains(&i));
            *betti.entry(i).or_insert(0) += slice.betti;
            torsion.entry(i).or_default().extend(slice.torsion.iter().cloned());
        }
    }
    let mut out = HomologySummary::default();
    let degrees: std::collections::BTreeSet<i64> =
        betti.keys().chain(torsion.keys()).copied().collect();
    for i in degrees {
        let mut t = torsion.remove(&i).unwrap_or_default();
        t.sort();
        out.push(i, betti.get(&i).copied().unwrap_or(0), t);
    }
    out
}

/// Homology of the link over `p`, computed independently of [`cohomology_of`].
pub fn homology_of(p: &CombPolytope) -> HomologySummary {
    homology_from_summaries(p, &subset_summaries(p))
}

// ---------------------------------------------------------------------------
// Classes and cup products
// ---------------------------------------------------------------------------

/// A cohomology class of the link: its support subset `𝓘`, its degree `i`,
/// and its coordinates in the chosen cycle basis of
/// `H̃_K(link(𝓘))` with `K = 2|𝓘̄| − i − 2`. The degree-0 unit (support =
/// all facets) has no link representative and stores its integer multiple in
/// `coords.free[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyClass {
    pub support: FacetSubset,
    pub degree: i64,
    pub coords: ClassCoords,
}

impl CohomologyClass {
    /// The homological degree of the class's representative in the link
    /// complex of its support.
    pub fn link_degree(&self, n: u32) -> i64 {
        2 * (n as i64 - self.support.len() as i64) - self.degree - 2
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }
}

/// Computes cup products on one polytope, caching link cycle bases per
/// support subset.
pub struct ProductCalculator<'a> {
    p: &'a CombPolytope,
    cache: HashMap<u64, Option<Rc<CycleBasis>>>,
}

impl<'a> ProductCalculator<'a> {
    pub fn new(p: &'a CombPolytope) -> Self {
        ProductCalculator { p, cache: HashMap::new() }
    }

    /// Cycle basis of the link complex of `support`; `None` when the
    /// complement is a face of the dual sphere (the summand is zero).
    fn basis(&mut self, support: FacetSubset) -> Option<Rc<CycleBasis>> {
        self.cache
            .entry(support.0)
            .or_insert_with(|| {
                link_complex(self.p, &support)
                    .ok()
                    .map(|k| Rc::new(reduced_homology(&k).1))
            })
            .clone()
    }

    /// All generators (free, then torsion) of the summand with the given
    /// support in the given cohomology degree.
    pub fn generators(&mut self, support: FacetSubset, degree: i64) -> Vec<CohomologyClass> {
        let n = self.p.n();
        if support == FacetSubset::full(n) && degree == 0 {
            return vec![CohomologyClass {
                support,
                degree,
                coords: ClassCoords { free: vec![Int::one()], torsion: vec![] },
            }];
        }
        let template = CohomologyClass {
            support,
            degree,
            coords: ClassCoords { free: vec![], torsion: vec![] },
        };
        let k = template.link_degree(n);
        let Some(basis) = self.basis(support) else {
            return Vec::new();
        };
        let Some(db) = basis.degree(k) else {
            return Vec::new();
        };
        let (nf, nt) = (db.free.len(), db.torsion.len());
        let mut out = Vec::new();
        for j in 0..nf {
            let mut free = vec![Int::zero(); nf];
            free[j] = Int::one();
            out.push(CohomologyClass {
                support,
                degree,
                coords: ClassCoords { free, torsion: vec![Int::zero(); nt] },
            });
        }
        for j in 0..nt {
            let mut torsion = vec![Int::zero(); nt];
            torsion[j] = Int::one();
            out.push(CohomologyClass {
                support,
                degree,
                coords: ClassCoords { free: vec![Int::zero(); nf], torsion },
            });
        }
        out
    }

    /// A representative cycle of the class in the link complex of its
    /// support; `None` for the degree-0 unit.
    pub fn class_chain(&mut self, c: &CohomologyClass) -> Option<Chain> {
        let n = self.p.n();
        if c.support == FacetSubset::full(n) {
            return None;
        }
        let k = c.link_degree(n);
        let basis = self.basis(c.support)?;
        let mut acc: HashMap<Simplex, Int> = HashMap::new();
        let free_gens = basis.free_generator_chains(k);
        assert_eq!(free_gens.len(), c.coords.free.len(), "free coordinate count");
        for (gen, coeff) in free_gens.iter().zip(&c.coords.free) {
            add_scaled(&mut acc, gen, coeff);
        }
        let tor_gens = basis.torsion_generator_chains(k);
        assert_eq!(tor_gens.len(), c.coords.torsion.len(), "torsion coordinate count");
        for ((gen, _), coeff) in tor_gens.iter().zip(&c.coords.torsion) {
            add_scaled(&mut acc, gen, coeff);
        }
        let mut chain: Chain = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        chain.sort_by(|a, b| a.0.cmp(&b.0));
        Some(chain)
    }

    pub fn scale(&mut self, c: &CohomologyClass, m: &Int) -> CohomologyClass {
        let n = self.p.n();
        let mut coords = ClassCoords {
            free: c.coords.free.iter().map(|x| x * m).collect(),
            torsion: c.coords.torsion.iter().map(|x| x * m).collect(),
        };
        if c.support != FacetSubset::full(n) {
            if let Some(basis) = self.basis(c.support) {
                if let Some(db) = basis.degree(c.link_degree(n)) {
                    for (x, (_, order)) in coords.torsion.iter_mut().zip(&db.torsion) {
                        let r = &*x % order;
                        *x = if r.is_negative() { r + order.abs() } else { r };
                    }
                }
            }
        }
        CohomologyClass { support: c.support, degree: c.degree, coords }
    }

    /// Cup product with a fixed apex preference (smallest label in each
    /// complement avoiding the representative's support). Returns `None` when
    /// the product is structurally zero (supports do not cover all facets, or
    /// the target summand is zero).
    pub fn cup(&mut self, a: &CohomologyClass, b: &CohomologyClass) -> Option<CohomologyClass> {
        let n = self.p.n();
        let full = FacetSubset::full(n);
        if a.support.union(&b.support) != full {
            return None;
        }
        if a.support == full {
            assert_eq!(a.degree, 0);
            return Some(self.scale(b, &a.coords.free[0].clone()));
        }
        if b.support == full {
            assert_eq!(b.degree, 0);
            return Some(self.scale(a, &b.coords.free[0].clone()));
        }
        let c1 = self.class_chain(a)?;
        let c2 = self.class_chain(b)?;
        let abar = a.support.complement(n);
        let bbar = b.support.complement(n);
        for (apex_b, apex_a) in apex_candidates(&abar, &c1, &bbar, &c2) {
            if let Some(res) = self.cup_with_apexes(a, b, apex_a, apex_b) {
                return Some(res);
            }
        }
        panic!(
            "no apex pair yields a representable product cycle for supports {} and {}",
            a.support, b.support
        );
    }

    /// Cup product with explicit apexes `apex_a ∈ 𝓙̄` (positive end) and
    /// `apex_b ∈ 𝓘̄` (negative end) of the joining edge. `None` when the
    /// supports do not cover all facets, the joined chain fails to be a cycle
    /// of the target link complex, or the target summand is zero.
    pub fn cup_with_apexes(
        &mut self,
        a: &CohomologyClass,
        b: &CohomologyClass,
        apex_a: u32,
        apex_b: u32,
    ) -> Option<CohomologyClass> {
        let n = self.p.n();
        let full = FacetSubset::full(n);
        if a.support.union(&b.support) != full || a.support == full || b.support == full {
            return None;
        }
        let abar = a.support.complement(n);
        let bbar = b.support.complement(n);
        assert!(abar.contains(apex_b) && bbar.contains(apex_a), "apexes must lie in the complements");
        let c1 = self.class_chain(a)?;
        let c2 = self.class_chain(b)?;
        let ka = a.link_degree(n);
        let kb = b.link_degree(n);
        let target_support = a.support.intersection(&b.support);
        let target = self.basis(target_support)?;
        let kk = ka + kb + 2;
        let dim_x = n as i64 + self.p.d() as i64;
        assert!(a.degree + b.degree <= dim_x, "product degree exceeds the manifold dimension");
        // ⟨apex_a − apex_b⟩ ∗ c₁ ∗ c₂, with the join sign of the two degrees.
        let edge: Chain = vec![(vec![apex_a], Int::one()), (vec![apex_b], -Int::one())];
        let mut w = join_chains(&join_chains(&edge, &c1), &c2);
        let exponent = n as i64 + ka * (kb + 1) + 1;
        if exponent.rem_euclid(2) == 1 {
            for (_, coeff) in w.iter_mut() {
                *coeff = -coeff.clone();
            }
        }
        if !boundary_chain(&w).is_empty() {
            return None;
        }
        let coords = target.express(kk, &w)?;
        Some(CohomologyClass { support: target_support, degree: a.degree + b.degree, coords })
    }

    /// The integer multiple of the top class a full-degree product represents,
    /// when the class is supported on the empty subset.
    pub fn top_multiple(&mut self, c: &CohomologyClass) -> Option<Int> {
        if !c.support.is_empty() || c.degree != self.p.n() as i64 + self.p.d() as i64 {
            return None;
        }
        assert_eq!(c.coords.free.len(), 1, "top summand has rank 1");
        Some(c.coords.free[0].clone())
    }
}

/// Candidate `(apex_b ∈ 𝓘̄, apex_a ∈ 𝓙̄)` pairs, preferring apexes outside
/// the respective cycle supports, smallest labels first.
fn apex_candidates(
    abar: &FacetSubset,
    c1: &Chain,
    bbar: &FacetSubset,
    c2: &Chain,
) -> Vec<(u32, u32)> {
    let rank = |labels: &[u32], chain: &Chain| -> Vec<u32> {
        let used: std::collections::BTreeSet<u32> =
            chain.iter().flat_map(|(s, _)| s.iter().copied()).collect();
        let (mut free, mut busy): (Vec<u32>, Vec<u32>) =
            labels.iter().partition(|l| !used.contains(l));
        free.sort_unstable();
        busy.sort_unstable();
        free.extend(busy);
        free
    };
    let avec = rank(&abar.labels(), c1);
    let bvec = rank(&bbar.labels(), c2);
    let mut out = Vec::new();
    for &x in &avec {
        for &y in &bvec {
            out.push((x, y));
        }
    }
    out
}

fn add_scaled(acc: &mut HashMap<Simplex, Int>, chain: &Chain, coeff: &Int) {
    if coeff.is_zero() {
        return;
    }
    for (s, c) in chain {
        *acc.entry(s.clone()).or_insert_with(Int::zero) += c * coeff;
    }
}

/// Join of two chains on disjoint vertex supports: bilinear extension of the
/// sorted-merge join of simplices, with the sign of the merge permutation.
/// Simplex pairs sharing a vertex contribute zero.
pub fn join_chains(c1: &Chain, c2: &Chain) -> Chain {
    let mut acc: HashMap<Simplex, Int> = HashMap::new();
    for (s, a) in c1 {
        for (t, b) in c2 {
            if s.iter().any(|v| t.contains(v)) {
                continue;
            }
            let inversions: usize = s
                .iter()
                .map(|x| t.iter().filter(|y| *y < x).count())
                .sum();
            let mut u: Simplex = s.iter().chain(t.iter()).copied().collect();
            u.sort_unstable();
            let mut coeff = a * b;
            if inversions % 2 == 1 {
                coeff = -coeff;
            }
            *acc.entry(u).or_insert_with(Int::zero) += coeff;
        }
    }
    let mut out: Chain = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Convenience wrapper: a single cup product without an external calculator.
pub fn cup_product(
    a: &CohomologyClass,
    b: &CohomologyClass,
    p: &CombPolytope,
) -> Option<CohomologyClass> {
    ProductCalculator::new(p).cup(a, b)
}

/// The comparison sign of the intersection-side product formula: for disjoint
/// nonempty complements `𝓘̄`, `𝓙̄` it is the sign of the permutation sorting
/// the concatenation `𝓘̄𝓙̄` times `(−1)^{d+1+n+K′|𝓘̄|}` with
/// `K′ = |𝓙̄| − d + k′ − 1`; `+1` when either complement is empty.
pub fn sign_epsilon(
    i_bar: &FacetSubset,
    j_bar: &FacetSubset,
    k_prime: i64,
    d: usize,
    n: u32,
) -> Result<i32, CohomologyError> {
    if i_bar.is_empty() || j_bar.is_empty() {
        return Ok(1);
    }
    if !i_bar.intersection(j_bar).is_empty() {
        return Err(CohomologyError::OverlappingComplements);
    }
    let il = i_bar.labels();
    let jl = j_bar.labels();
    let inversions: usize = il
        .iter()
        .map(|x| jl.iter().filter(|y| *y < x).count())
        .sum();
    let eps = if inversions % 2 == 0 { 1 } else { -1 };
    let kp = jl.len() as i64 - d as i64 + k_prime - 1;
    let exponent = d as i64 + 1 + n as i64 + kp * il.len() as i64;
    Ok(if exponent.rem_euclid(2) == 0 { eps } else { -eps })
}

// ---------------------------------------------------------------------------
// Product tables
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub left_class: CohomologyClass,
    pub right_class: CohomologyClass,
    /// `None` when the product is structurally zero.
    pub product: Option<CohomologyClass>,
}

#[derive(Clone, Debug)]
pub struct ProductTable {
    pub entries: Vec<ProductEntry>,
    pub truncated: bool,
}

/// Deterministic generator name: support labels plus index inside the
/// summand's generator list.
pub fn generator_name(c: &CohomologyClass, index: usize) -> String {
    format!("psi({}, {})", c.support, index)
}

impl ProductTable {
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "left": e.left,
                    "right": e.right,
                    "degree_left": e.left_class.degree,
                    "degree_right": e.right_class.degree,
                    "product": e.product.as_ref().map(|c| {
                        json!({
                            "support": c.support.labels(),
                            "degree": c.degree,
                            "free": c.coords.free.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                            "torsion": c.coords.torsion.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        })
                    }),
                })
            })
            .collect();
        json!({ "entries": entries, "truncated": self.truncated })
    }
}

/// All named free generators of positive degree below the top, in
/// deterministic order (degree, then support mask, then index).
pub fn named_generators(
    report: &CohomologyReport,
    calc: &mut ProductCalculator,
) -> Vec<(String, CohomologyClass)> {
    let mut out = Vec::new();
    for (i, summands) in report.degrees.iter().enumerate() {
        if i == 0 || i == report.dim_x {
            continue;
        }
        let mut supports: Vec<FacetSubset> = summands
            .iter()
            .filter_map(|s| match s.origin {
                SummandOrigin::Support(sup) if s.betti > 0 || !s.torsion.is_empty() => Some(sup),
                _ => None,
            })
            .collect();
        supports.sort();
        supports.dedup();
        for sup in supports {
            for (idx, g) in calc.generators(sup, i as i64).into_iter().enumerate() {
                let name = generator_name(&g, idx);
                out.push((name, g));
            }
        }
    }
    out
}

/// Pairwise products of the named generators, capped at `cap` entries.
pub fn product_table(p: &CombPolytope, cap: usize) -> ProductTable {
    let report = cohomology_of(p);
    let mut calc = ProductCalculator::new(p);
    let gens = named_generators(&report, &mut calc);
    let dim_x = report.dim_x as i64;
    let mut entries = Vec::new();
    let mut truncated = false;
    'outer: for (i, (na, a)) in gens.iter().enumerate() {
        for (nb, b) in gens.iter().skip(i) {
            if a.degree + b.degree > dim_x {
                continue;
            }
            if entries.len() >= cap {
                truncated = true;
                break 'outer;
            }
            let product = calc.cup(a, b).filter(|c| !c.is_zero());
            entries.push(ProductEntry {
                left: na.clone(),
                right: nb.clone(),
                left_class: a.clone(),
                right_class: b.clone(),
                product,
            });
        }
    }
    ProductTable { entries, truncated }
}

// ---------------------------------------------------------------------------
// Vertex-cut update
// ---------------------------------------------------------------------------

fn binomial(a: i64, b: i64) -> usize {
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

/// The closed-form cohomology of the link after one vertex cut: for
/// `3 ≤ i ≤ n+d−2`,
/// `H^i(X′) ≅ H^i(X) ⊕ H^{i−1}(X) ⊕ Z^{C(n−d, i−2d+1)} ⊕ Z^{C(n−d, i−2)}`,
/// with trivial groups in degrees 1, 2, n+d−1, n+d and units at the ends.
pub fn vertex_cut_update(r: &CohomologyReport) -> Result<CohomologyReport, CohomologyError> {
    if r.d < 2 {
        return Err(CohomologyError::CutNeedsDimensionTwo(r.d));
    }
    let n = r.n as i64;
    let d = r.d as i64;
    let old_top = r.dim_x;
    let dim_x = old_top + 1;
    let mut degrees: Vec<Vec<Summand>> = vec![Vec::new(); dim_x + 1];
    degrees[0].push(Summand {
        origin: SummandOrigin::Carried { shift: 0 },
        betti: 1,
        torsion: vec![],
    });
    degrees[dim_x].push(Summand {
        origin: SummandOrigin::Carried { shift: 1 },
        betti: 1,
        torsion: vec![],
    });
    for i in 3..=(old_top as i64 - 2) {
        let iu = i as usize;
        let same = (r.betti(iu), r.torsion(iu));
        if same.0 > 0 || !same.1.is_empty() {
            degrees[iu].push(Summand {
                origin: SummandOrigin::Carried { shift: 0 },
                betti: same.0,
                torsion: same.1,
            });
        }
        let below = (r.betti(iu - 1), r.torsion(iu - 1));
        if below.0 > 0 || !below.1.is_empty() {
            degrees[iu].push(Summand {
                origin: SummandOrigin::Carried { shift: 1 },
                betti: below.0,
                torsion: below.1,
            });
        }
        let fresh = binomial(n - d, i - 2 * d + 1) + binomial(n - d, i - 2);
        if fresh > 0 {
            degrees[iu].push(Summand {
                origin: SummandOrigin::CutClasses,
                betti: fresh,
                torsion: vec![],
            });
        }
    }
    Ok(CohomologyReport { n: r.n + 1, d: r.d, dim_x, degrees })
}

// ---------------------------------------------------------------------------
// Ring-shape classification and Künneth assembly
// ---------------------------------------------------------------------------

/// Shape of the cohomology ring of the link.
#[derive(Clone, Debug)]
pub enum RingShape {
    /// The ring of a connected sum of sphere products `#(count) S^a × S^b`
    /// (a sphere when `pieces` is empty).
    SphereProductConnectedSum {
        /// Vertex-cut count when the polytope is a truncated simplex.
        cuts: Option<usize>,
        /// `(count, a, b)` with `a ≤ b` and `a + b = dim_x`.
        pieces: Vec<(usize, usize, usize)>,
    },
    /// Not of connected-sum type: a facet 1-cycle of length ≥ 4 whose class,
    /// together with its transverse partner, has a nonzero product below the
    /// top degree.
    NotConnectedSum { witness: FacetCycle },
    /// No classification criterion applies.
    Undetermined { reason: String },
}

/// Reads the `#(count) S^a × S^b` decomposition off a Betti vector with
/// `b_0 = b_top = 1`; `None` when the vector is not of that shape.
pub fn sphere_product_pieces(betti: &[usize]) -> Option<Vec<(usize, usize, usize)>> {
    let top = betti.len().checked_sub(1)?;
    if top == 0 || betti[0] != 1 || betti[top] != 1 {
        return None;
    }
    for i in 1..top {
        if betti[i] != betti[top - i] {
            return None;
        }
    }
    let mut pieces = Vec::new();
    for a in 1..=top / 2 {
        let count = if 2 * a == top {
            if betti[a] % 2 != 0 {
                return None;
            }
            betti[a] / 2
        } else {
            betti[a]
        };
        if count > 0 {
            if a < 3 {
                // Sphere factors below dimension 3 would break the simply
                // connected link; such Betti vectors are not of this shape.
                return None;
            }
            pieces.push((count, a, top - a));
        }
    }
    Some(pieces)
}

/// Decides whether the link's cohomology ring is that of a connected sum of
/// sphere products: for 3-polytopes via the facet 1-cycle criterion, for
/// dual-neighbourly even-dimensional polytopes via the middle Betti data.
pub fn classify_ring(p: &CombPolytope) -> RingShape {
    let d = p.d();
    if d == 3 {
        let cycles = one_cycles_of_facets(p).expect("d = 3");
        if let Some(long) = cycles.iter().find(|c| c.length >= 4) {
            return RingShape::NotConnectedSum { witness: long.clone() };
        }
        let cuts = is_truncated_simplex(p).map(|(l, _)| l);
        let report = cohomology_of(p);
        let pieces = sphere_product_pieces(&report.betti_vector())
            .expect("all facet 1-cycles have length 3, so the Betti vector is of connected-sum shape");
        return RingShape::SphereProductConnectedSum { cuts, pieces };
    }
    if d % 2 == 0 && d >= 2 && neighbourliness(p) + 1 >= d / 2 {
        let report = cohomology_of(p);
        if !(0..=report.dim_x).all(|i| report.torsion(i).is_empty()) {
            return RingShape::Undetermined {
                reason: "torsion present despite dual neighbourliness".into(),
            };
        }
        if let Some(pieces) = sphere_product_pieces(&report.betti_vector()) {
            return RingShape::SphereProductConnectedSum { cuts: None, pieces };
        }
        return RingShape::Undetermined {
            reason: "Betti vector is not of connected-sum shape".into(),
        };
    }
    RingShape::Undetermined {
        reason: format!("no criterion for dimension {d} with this neighbourliness"),
    }
}

/// Graded Betti/torsion data, index = degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedGroups {
    pub betti: Vec<usize>,
    pub torsion: Vec<Vec<Int>>,
}

impl GradedGroups {
    pub fn from_report(r: &CohomologyReport) -> Self {
        GradedGroups {
            betti: r.betti_vector(),
            torsion: (0..=r.dim_x).map(|i| r.torsion(i)).collect(),
        }
    }

    pub fn top(&self) -> usize {
        self.betti.len() - 1
    }

    pub fn euler(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

/// `H^*(X × T^k)`: each degree-`j` group of `X` appears `C(k, i−j)` times in
/// degree `i` of the product with the `k`-torus.
pub fn kunneth_with_torus(r: &CohomologyReport, k: usize) -> GradedGroups {
    let top = r.dim_x + k;
    let mut betti = vec![0usize; top + 1];
    let mut torsion: Vec<Vec<Int>> = vec![Vec::new(); top + 1];
    for i in 0..=top {
        for j in 0..=r.dim_x.min(i) {
            let mult = binomial(k as i64, i as i64 - j as i64);
            if mult == 0 {
                continue;
            }
            betti[i] += r.betti(j) * mult;
            for _ in 0..mult {
                torsion[i].extend(r.torsion(j));
            }
        }
        torsion[i].sort();
    }
    GradedGroups { betti, torsion }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{book, cube, cyclic_dual, prism, simplex, truncated_cube};

    #[test]
    fn cube_betti_table() {
        let r = cohomology_of(&cube(3));
        assert_eq!(r.betti_vector(), vec![1, 0, 0, 3, 0, 0, 3, 0, 0, 1]);
        assert_eq!(r.euler(), 0);
        assert!((0..=9).all(|i| r.torsion(i).is_empty()));
    }

    #[test]
    fn cube_products() {
        let p = cube(3);
        let mut calc = ProductCalculator::new(&p);
        // Degree-3 generators are supported on the complements of the three
        // opposite facet pairs, degree-6 generators on the pairs themselves.
        let pairs = [
            FacetSubset::from_labels(&[1, 2]),
            FacetSubset::from_labels(&[3, 4]),
            FacetSubset::from_labels(&[5, 6]),
        ];
        let deg3: Vec<CohomologyClass> = pairs
            .iter()
            .map(|pr| {
                let g = calc.generators(pr.complement(6), 3);
                assert_eq!(g.len(), 1);
                g.into_iter().next().unwrap()
            })
            .collect();
        let deg6: Vec<CohomologyClass> = pairs
            .iter()
            .map(|pr| {
                let g = calc.generators(*pr, 6);
                assert_eq!(g.len(), 1);
                g.into_iter().next().unwrap()
            })
            .collect();
        // Complementary 3 × 6 pairs hit ± the top class.
        for i in 0..3 {
            let prod = calc.cup(&deg3[i], &deg6[i]).expect("supports cover all facets");
            let m = calc.top_multiple(&prod).expect("lands on the top summand");
            assert!(m.abs().is_one(), "expected ± top class, got multiple {m}");
        }
        // Distinct degree-3 generators multiply to ± the third pair's
        // degree-6 generator.
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let k = 3 - i - j;
                let prod = calc.cup(&deg3[i], &deg3[j]).expect("supports cover all facets");
                assert_eq!(prod.support, pairs[k]);
                assert_eq!(prod.degree, 6);
                assert_eq!(prod.coords.free.len(), 1);
                assert!(prod.coords.free[0].abs().is_one());
            }
        }
        // Same generator squared: union misses the third pair → zero.
        assert!(calc.cup(&deg3[0], &deg3[0]).is_none());
        // Degree 6 × 6 pairs would exceed the dimension through a
        // non-covering union → zero.
        assert!(calc.cup(&deg6[0], &deg6[1]).is_none());
    }

    #[test]
    fn truncated_cube_betti_and_update_agree() {
        let direct = cohomology_of(&truncated_cube());
        assert_eq!(direct.betti_vector(), vec![1, 0, 0, 6, 6, 2, 6, 6, 0, 0, 1]);
        let updated = vertex_cut_update(&cohomology_of(&cube(3))).unwrap();
        assert_eq!(updated.betti_vector(), direct.betti_vector());
        for i in 0..=direct.dim_x {
            assert_eq!(updated.torsion(i), direct.torsion(i), "degree {i}");
        }
    }

    #[test]
    fn homology_and_cohomology_agree_by_universal_coefficients() {
        for p in [simplex(3), cube(3), prism(), book(5).unwrap()] {
            let sweeps = subset_summaries(&p);
            let co = cohomology_from_summaries(&p, &sweeps);
            let ho = homology_from_summaries(&p, &sweeps);
            for i in 0..=co.dim_x {
                assert_eq!(co.betti(i), ho.betti(i as i64), "betti degree {i}");
                let mut expected = ho.torsion(i as i64 - 1).to_vec();
                expected.sort();
                assert_eq!(co.torsion(i), expected, "torsion degree {i}");
            }
        }
    }

    #[test]
    fn cyclic_dual_7_homology() {
        let h = homology_of(&cyclic_dual(7).unwrap());
        assert_eq!(h.betti(0), 1);
        assert_eq!(h.betti(5), 7);
        assert_eq!(h.betti(6), 7);
        assert_eq!(h.betti(11), 1);
        assert_eq!(h.slices.iter().map(|s| s.betti).sum::<usize>(), 16);
    }

    #[test]
    fn simplex_link_is_a_sphere() {
        let h = homology_of(&simplex(4));
        assert_eq!(h.betti(0), 1);
        assert_eq!(h.betti(9), 1);
        assert_eq!(h.slices.iter().map(|s| s.betti).sum::<usize>(), 2);
    }

    #[test]
    fn sign_epsilon_examples() {
        let a = FacetSubset::from_labels(&[1]);
        let b = FacetSubset::from_labels(&[2]);
        let (d, n) = (3usize, 6u32);
        let k_prime = 1i64;
        let kp = 1 - d as i64 + k_prime - 1;
        let base = if (d as i64 + 1 + n as i64 + kp).rem_euclid(2) == 0 { 1 } else { -1 };
        assert_eq!(sign_epsilon(&a, &b, k_prime, d, n).unwrap(), base);
        assert_eq!(sign_epsilon(&b, &a, k_prime, d, n).unwrap(), -base);
        assert_eq!(sign_epsilon(&FacetSubset::EMPTY, &b, 2, d, n).unwrap(), 1);
        assert!(sign_epsilon(&a, &a, 1, d, n).is_err());
    }

    #[test]
    fn classify_cube_and_books() {
        match classify_ring(&cube(3)) {
            RingShape::NotConnectedSum { witness } => assert_eq!(witness.length, 4),
            other => panic!("cube misclassified: {other:?}"),
        }
        match classify_ring(&book(6).unwrap()) {
            RingShape::SphereProductConnectedSum { cuts, pieces } => {
                assert_eq!(cuts, Some(3));
                assert!(!pieces.is_empty());
            }
            other => panic!("hexagonal book misclassified: {other:?}"),
        }
        match classify_ring(&cyclic_dual(8).unwrap()) {
            RingShape::SphereProductConnectedSum { cuts: None, pieces } => {
                assert_eq!(pieces, vec![(16, 5, 7), (15, 6, 6)]);
            }
            other => panic!("cyclic dual misclassified: {other:?}"),
        }
    }

    #[test]
    fn kunneth_examples() {
        // S³ = link over the segment.
        let seg = cohomology_of(&simplex(1));
        assert_eq!(seg.betti_vector(), vec![1, 0, 0, 1]);
        let torus1 = kunneth_with_torus(&seg, 1);
        assert_eq!(torus1.betti, vec![1, 1, 0, 1, 1]);
        // S⁵ × T² = link over the triangle times two circles.
        let tri = cohomology_of(&simplex(2));
        let torus2 = kunneth_with_torus(&tri, 2);
        assert_eq!(torus2.betti, vec![1, 2, 1, 0, 0, 1, 2, 1]);
        // k = 0 is the identity.
        assert_eq!(kunneth_with_torus(&seg, 0).betti, seg.betti_vector());
    }

    #[test]
    fn product_table_cube() {
        let table = product_table(&cube(3), 10_000);
        assert!(!table.truncated);
        let nonzero = table.entries.iter().filter(|e| e.product.is_some()).count();
        // 3 complementary 3×6 pairs and 3 unordered distinct 3×3 pairs.
        assert_eq!(nonzero, 6);
    }
}
