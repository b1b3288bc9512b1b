//! The fixture corpus: named polytopes (with exact rational realizations) and
//! configurations used throughout the test suites and the CLI.

use crate::config::{product as cproduct, Configuration};
use crate::homology::SimplicialComplex;
use crate::kernel::{rat, rat_int, Rat};
use crate::polytope::{
    polytope_from_dual_vertices, product as pproduct, truncate_face, CombPolytope, FacetSubset,
    PolytopeError,
};
use itertools::Itertools;
use num_traits::{One, Zero};

#[derive(Debug, thiserror::Error)]
pub enum BuiltinError {
    #[error("unknown builtin fixture '{0}'")]
    Unknown(String),
    #[error("bad parameter for builtin fixture: {0}")]
    BadParam(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

// ---------------------------------------------------------------------------
// Polytopes
// ---------------------------------------------------------------------------

/// The `d`-simplex, realized by the standard dual simplex
/// `conv{e_1, …, e_d, −(1,…,1)}`.
pub fn simplex(d: usize) -> CombPolytope {
    assert!(d >= 1);
    let n = d as u32 + 1;
    let facets: Vec<Vec<u32>> = (1..=n).combinations(d).collect();
    let mut real: Vec<Vec<Rat>> = Vec::new();
    for i in 0..d {
        let mut v = vec![Rat::zero(); d];
        v[i] = Rat::one();
        real.push(v);
    }
    real.push(vec![rat_int(-1); d]);
    CombPolytope::new(n, d, facets, None, Some(real)).expect("simplex is valid")
}

/// The segment (1-dimensional polytope).
pub fn segment() -> CombPolytope {
    simplex(1)
}

/// The `d`-cube as an iterated product of segments.
pub fn cube(d: usize) -> CombPolytope {
    assert!(d >= 1);
    let mut p = segment();
    for _ in 1..d {
        p = pproduct(&p, &segment());
    }
    p
}

/// The triangular prism `Δ² × Δ¹`.
pub fn prism() -> CombPolytope {
    pproduct(&simplex(2), &segment())
}

/// The cube with one vertex cut off (facets 1, 3, 5 of the product cube meet
/// in a vertex).
pub fn truncated_cube() -> CombPolytope {
    truncate_face(&cube(3), &FacetSubset::from_labels(&[1, 3, 5]))
        .expect("cube vertex {1,3,5} exists")
}

/// A convex `m`-gon realized on exact rational points of the unit circle
/// (tangent-half-angle points at approximated angles `2πk/m`), facets labeled
/// in cyclic order.
pub fn polygon(m: usize) -> Result<CombPolytope, BuiltinError> {
    if m < 3 {
        return Err(BuiltinError::BadParam(format!(
            "a polygon needs at least 3 edges, got {m}"
        )));
    }
    if m > 64 {
        return Err(BuiltinError::BadParam(format!(
            "polygon size {m} exceeds the 64-label cap"
        )));
    }
    let mut points = Vec::with_capacity(m);
    for k in 0..m {
        if m % 2 == 0 && 2 * k == m {
            points.push(vec![rat_int(-1), Rat::zero()]);
            continue;
        }
        // Angle in (−π, π), exact point via the rational tangent-half-angle.
        let mut theta = 2.0 * std::f64::consts::PI * (k as f64) / (m as f64);
        if theta > std::f64::consts::PI {
            theta -= 2.0 * std::f64::consts::PI;
        }
        let t_num = ((theta / 2.0).tan() * 10_000.0).round() as i64;
        let t = rat(t_num, 10_000);
        let t2 = t.clone() * t.clone();
        let denom = Rat::one() + t2.clone();
        let x = (Rat::one() - t2) / denom.clone();
        let y = rat_int(2) * t / denom;
        points.push(vec![x, y]);
    }
    Ok(polytope_from_dual_vertices(points)?)
}

/// The dual of the cyclic polytope `C(4, v)` on the moment curve
/// `t ↦ (t, t², t³, t⁴)`, `t = 1..v`, translated to its barycenter.
pub fn cyclic_dual(v: usize) -> Result<CombPolytope, BuiltinError> {
    if v < 6 {
        // C(4,5) is the 4-simplex and works too, but needs v ≥ 5.
        if v < 5 {
            return Err(BuiltinError::BadParam(format!(
                "cyclic C(4,v) needs v ≥ 5, got {v}"
            )));
        }
    }
    let d = 4usize;
    let mut pts: Vec<Vec<Rat>> = (1..=v as i64)
        .map(|t| (1..=d as u32).map(|e| rat_int(t.pow(e))).collect())
        .collect();
    let n = rat_int(v as i64);
    let bary: Vec<Rat> = (0..d)
        .map(|i| pts.iter().map(|p| p[i].clone()).sum::<Rat>() / n.clone())
        .collect();
    for p in pts.iter_mut() {
        for (x, b) in p.iter_mut().zip(&bary) {
            *x -= b;
        }
    }
    Ok(polytope_from_dual_vertices(pts)?)
}

/// Gale-evenness facets of the cyclic polytope `C(4, v)`: a 4-subset `S` is a
/// facet iff between any two labels outside `S` there are evenly many labels
/// of `S`. Test oracle for [`cyclic_dual`].
pub fn cyclic_facets_by_gale_evenness(v: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for subset in (1..=v as u32).combinations(4) {
        let outside: Vec<u32> = (1..=v as u32).filter(|x| !subset.contains(x)).collect();
        let ok = outside.windows(2).all(|w| {
            subset.iter().filter(|&&s| w[0] < s && s < w[1]).count() % 2 == 0
        });
        if ok {
            out.push(subset);
        }
    }
    out
}

/// The book with `l` pages (`l ≥ 3`): the tetrahedron for `l = 3`, then one
/// vertex cut per extra page, each at the vertex `{1, 3, last}`. The `l = 6`
/// case is the hexagonal book: facets 1 and 3 are hexagons sharing the spine.
pub fn book(l: usize) -> Result<CombPolytope, BuiltinError> {
    if l < 3 {
        return Err(BuiltinError::BadParam(format!(
            "a book needs at least 3 pages, got {l}"
        )));
    }
    let mut p = simplex(3);
    for i in 5..=(l as u32 + 1) {
        p = truncate_face(&p, &FacetSubset::from_labels(&[1, 3, i - 1]))?;
    }
    Ok(p)
}

/// The minimal 6-vertex triangulation of the real projective plane.
pub fn rp2_complex() -> SimplicialComplex {
    SimplicialComplex::from_maximal(vec![
        vec![3, 5, 6],
        vec![4, 5, 6],
        vec![2, 4, 6],
        vec![2, 3, 5],
        vec![1, 4, 5],
        vec![1, 2, 5],
        vec![1, 3, 4],
        vec![2, 3, 4],
        vec![1, 2, 6],
        vec![1, 3, 6],
    ])
}

/// The simple 5-polytope with 16 facets whose link carries 2-torsion: the
/// 5-simplex with the ten 2-faces complementary to the triangles of the
/// projective-plane triangulation cut off.
pub fn rp2_truncation() -> CombPolytope {
    let mut p = simplex(5);
    for face in rp2_cut_faces() {
        p = truncate_face(&p, &FacetSubset::from_labels(&face))
            .expect("truncation faces stay present (their complements form an antichain)");
    }
    p
}

/// The ten dual 2-simplices cut by [`rp2_truncation`]: complements in
/// `{1..6}` of the triangles of the projective-plane triangulation.
pub fn rp2_cut_faces() -> Vec<Vec<u32>> {
    rp2_complex()
        .maximal_faces()
        .iter()
        .map(|f| (1..=6u32).filter(|v| !f.contains(v)).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

/// The `p = 0` configuration on `n` points; its link is `S^{2n−1}` and its
/// polytope the `(n−1)`-simplex.
pub fn sphere_config(n: usize) -> Configuration {
    assert!(n >= 1);
    Configuration::new(0, vec![Vec::new(); n])
}

/// The segment configuration (`S³`).
pub fn segment_config() -> Configuration {
    sphere_config(2)
}

/// The 3-cube configuration: product of three segments (`n = 6`, `p = 2`).
pub fn cube_config() -> Configuration {
    cproduct(&cproduct(&segment_config(), &segment_config()), &segment_config())
}

/// An admissible pentagon configuration (`p = 2`, `k = 0`): five points in
/// convex position around the origin with no antipodal pair.
pub fn pentagon_config() -> Configuration {
    Configuration::from_i64(
        2,
        &[vec![2, 0], vec![1, 2], vec![-2, 1], vec![-2, -1], vec![1, -2]],
    )
}

/// A `p = 1` configuration with one indispensable point (`S³ × S¹`).
pub fn p1_circle_config() -> Configuration {
    Configuration::from_i64(1, &[vec![1], vec![1], vec![-1]])
}

/// The `p = 1` wall-crossing path: columns `(−2, −1, 1, 2)` translated by
/// `−3/2`; one wall `{3}` is crossed at `t = 2/3` with type `(2, 1)`.
pub fn p1_wall_path() -> (Configuration, Vec<Rat>) {
    (
        Configuration::from_i64(1, &[vec![-2], vec![-1], vec![1], vec![2]]),
        vec![rat(-3, 2)],
    )
}

/// A `p = 2` path across one pentagon diagonal. The columns are the pentagon
/// points seen from an origin in the corner pocket at the first vertex
/// (two indispensable points; triangle polytope, link `S⁵ × T²`); the
/// translation moves the origin across the diagonal through points 1 and 3
/// into the edge pocket (one indispensable point; square polytope, link
/// `S³ × S³ × S¹`). Exactly one crossing, wall `{1, 3}` of type `(1, 2)`.
pub fn p2_pocket_path() -> (Configuration, Vec<Rat>) {
    // Pentagon vertices P1..P5 and origin o0 = (8/5, 3/20); columns P_i − o0.
    let pts: [(i64, i64); 5] = [(2, 0), (1, 2), (-2, 1), (-2, -1), (1, -2)];
    let o0 = [rat(8, 5), rat(3, 20)];
    let columns: Vec<Vec<Rat>> = pts
        .iter()
        .map(|&(x, y)| vec![rat_int(x) - o0[0].clone(), rat_int(y) - o0[1].clone()])
        .collect();
    // Translation v = o0 − o1 with o1 = (3/2, 0).
    let v = vec![o0[0].clone() - rat(3, 2), o0[1].clone()];
    (Configuration::new(2, columns), v)
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// Every named polytope fixture.
pub fn corpus_polytopes() -> Vec<(String, CombPolytope)> {
    let mut out: Vec<(String, CombPolytope)> = vec![
        ("segment".into(), segment()),
        ("simplex_2".into(), simplex(2)),
        ("simplex_3".into(), simplex(3)),
        ("simplex_4".into(), simplex(4)),
        ("simplex_5".into(), simplex(5)),
        ("square".into(), cube(2)),
        ("cube".into(), cube(3)),
        ("prism".into(), prism()),
        ("truncated_cube".into(), truncated_cube()),
        ("rp2_truncation".into(), rp2_truncation()),
    ];
    for m in [5usize, 6] {
        out.push((format!("polygon_{m}"), polygon(m).unwrap()));
    }
    for l in 3..=6usize {
        out.push((format!("book_{l}"), book(l).unwrap()));
    }
    for v in 5..=8usize {
        out.push((format!("cyclic_dual_4_{v}"), cyclic_dual(v).unwrap()));
    }
    out
}

/// Every named configuration fixture.
pub fn corpus_configurations() -> Vec<(String, Configuration)> {
    let (wall_cfg, _) = p1_wall_path();
    let (pocket_cfg, _) = p2_pocket_path();
    vec![
        ("point".into(), sphere_config(1)),
        ("segment".into(), segment_config()),
        ("sphere_3".into(), sphere_config(3)),
        ("cube".into(), cube_config()),
        ("pentagon".into(), pentagon_config()),
        ("p1_circle".into(), p1_circle_config()),
        ("p1_wall_path".into(), wall_cfg),
        ("example_path_p2".into(), pocket_cfg),
    ]
}

/// Looks up a polytope fixture by name (as used by the CLI's `--builtin`).
pub fn polytope_by_name(name: &str) -> Result<CombPolytope, BuiltinError> {
    if let Some((_, p)) = corpus_polytopes().into_iter().find(|(n, _)| n == name) {
        return Ok(p);
    }
    if let Some(m) = name.strip_prefix("polygon_") {
        let m: usize = m
            .parse()
            .map_err(|_| BuiltinError::BadParam(format!("bad polygon size in '{name}'")))?;
        return polygon(m);
    }
    if let Some(d) = name.strip_prefix("simplex_") {
        let d: usize = d
            .parse()
            .map_err(|_| BuiltinError::BadParam(format!("bad simplex dimension in '{name}'")))?;
        if d == 0 || d > 20 {
            return Err(BuiltinError::BadParam(format!(
                "simplex dimension {d} out of range 1..=20"
            )));
        }
        return Ok(simplex(d));
    }
    if let Some(d) = name.strip_prefix("cube_") {
        let d: usize = d
            .parse()
            .map_err(|_| BuiltinError::BadParam(format!("bad cube dimension in '{name}'")))?;
        if d == 0 || d > 10 {
            return Err(BuiltinError::BadParam(format!(
                "cube dimension {d} out of range 1..=10"
            )));
        }
        return Ok(cube(d));
    }
    if let Some(l) = name.strip_prefix("book_") {
        let l: usize = l
            .parse()
            .map_err(|_| BuiltinError::BadParam(format!("bad book size in '{name}'")))?;
        return book(l);
    }
    if let Some(v) = name.strip_prefix("cyclic_dual_4_") {
        let v: usize = v
            .parse()
            .map_err(|_| BuiltinError::BadParam(format!("bad cyclic parameter in '{name}'")))?;
        if v > 16 {
            return Err(BuiltinError::BadParam(format!(
                "cyclic C(4,{v}) exceeds the supported size"
            )));
        }
        return cyclic_dual(v);
    }
    Err(BuiltinError::Unknown(name.to_string()))
}

/// Looks up a configuration fixture by name.
pub fn configuration_by_name(name: &str) -> Result<Configuration, BuiltinError> {
    corpus_configurations()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, c)| c)
        .ok_or_else(|| BuiltinError::Unknown(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{combinatorially_equal, is_truncated_simplex, neighbourliness, one_cycles_of_facets};
    use std::collections::BTreeSet;

    #[test]
    fn polygons_are_cycles() {
        for m in 3..=8usize {
            let p = polygon(m).unwrap();
            assert_eq!(p.n() as usize, m, "polygon_{m} facet count");
            assert_eq!(p.d(), 2);
            assert_eq!(p.vertex_count(), m);
        }
        // Pentagon facets form the cyclic adjacency.
        let p = polygon(5).unwrap();
        let expected: BTreeSet<Vec<u32>> =
            [vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 5], vec![1, 5]]
                .into_iter()
                .collect();
        let got: BTreeSet<Vec<u32>> = p.dual_facets().iter().cloned().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn books_build_and_recognize() {
        let b3 = book(3).unwrap();
        assert!(combinatorially_equal(&b3, &simplex(3), false).is_some());
        let b6 = book(6).unwrap();
        assert_eq!(b6.n(), 7);
        assert_eq!(b6.vertex_count(), 10);
        let expected: BTreeSet<Vec<u32>> = [
            vec![1, 2, 3],
            vec![1, 2, 4],
            vec![2, 3, 4],
            vec![1, 4, 5],
            vec![3, 4, 5],
            vec![1, 5, 6],
            vec![3, 5, 6],
            vec![1, 3, 7],
            vec![1, 6, 7],
            vec![3, 6, 7],
        ]
        .into_iter()
        .collect();
        let got: BTreeSet<Vec<u32>> = b6.dual_facets().iter().cloned().collect();
        assert_eq!(got, expected);
        // The hexagonal book is the tetrahedron plus three cuts, and all its
        // 1-cycles of facets have length 3.
        let (l, _) = is_truncated_simplex(&b6).unwrap();
        assert_eq!(l, 3);
        let cycles = one_cycles_of_facets(&b6).unwrap();
        assert!(!cycles.is_empty());
        assert!(cycles.iter().all(|c| c.length == 3));
    }

    #[test]
    fn cyclic_duals_match_gale_evenness() {
        for v in 5..=8usize {
            let p = cyclic_dual(v).unwrap();
            assert_eq!(p.n() as usize, v);
            assert_eq!(p.d(), 4);
            let mut gale = cyclic_facets_by_gale_evenness(v);
            gale.sort();
            assert_eq!(p.dual_facets(), gale.as_slice(), "C(4,{v})");
        }
        // Neighbourliness: C(4,5) is the simplex (3); larger are 1 exactly.
        assert_eq!(neighbourliness(&cyclic_dual(5).unwrap()), 3);
        for v in 6..=8usize {
            assert_eq!(neighbourliness(&cyclic_dual(v).unwrap()), 1, "C(4,{v})");
        }
    }

    #[test]
    fn rp2_truncation_shape() {
        let p = rp2_truncation();
        assert_eq!(p.n(), 16);
        assert_eq!(p.d(), 5);
        assert!(p.realization().is_some());
        assert_eq!(p.vertex_count(), 90);
    }

    #[test]
    fn truncated_cube_shape() {
        let p = truncated_cube();
        assert_eq!(p.n(), 7);
        assert_eq!(p.d(), 3);
        assert_eq!(p.vertex_count(), 10);
        assert!(is_truncated_simplex(&p).is_none());
    }

    #[test]
    fn fixture_configurations_are_admissible() {
        for (name, c) in corpus_configurations() {
            let rep = c.check_admissible();
            assert!(rep.is_admissible(), "{name} must be admissible");
        }
        let (c, _) = p2_pocket_path();
        assert_eq!(c.check_admissible().k, 2, "pocket path starts with k = 2");
        let poly = crate::polytope::polytope_of(&c).unwrap();
        assert_eq!((poly.n(), poly.d()), (3, 2), "triangle at the start");
    }

    #[test]
    fn lookup_by_name() {
        assert!(polytope_by_name("cube").is_ok());
        assert!(polytope_by_name("cyclic_dual_4_7").is_ok());
        assert!(polytope_by_name("polygon_9").is_ok());
        assert!(matches!(
            polytope_by_name("dodecahedron"),
            Err(BuiltinError::Unknown(_))
        ));
        assert!(configuration_by_name("pentagon").is_ok());
    }
}
