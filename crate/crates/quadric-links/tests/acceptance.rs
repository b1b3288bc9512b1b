//! End-to-end acceptance checks. One criterion per section, each reporting a
//! single PASS line; any failure panics with context.
//!
//! Run with `--nocapture` to see the per-criterion lines.

use quadric_links::builtin::{
    book, corpus_configurations, corpus_polytopes, cube, cyclic_dual, p1_wall_path,
    p2_pocket_path, rp2_complex, simplex, truncated_cube,
};
use quadric_links::cohomology::{
    classify_ring, cohomology_from_summaries, cohomology_of, homology_from_summaries,
    named_generators, subset_summaries, vertex_cut_update, ProductCalculator, RingShape,
};
use quadric_links::config::realize;
use quadric_links::homology::{induced_subcomplex, link_complex, reduced_homology};
use quadric_links::polytope::{
    apply_flip, combinatorially_equal, is_truncated_simplex, polytope_of,
    product as polytope_product, truncate_face, CombPolytope, FacetSubset, FlipError,
    FlipSpec, PolytopeError,
};
use quadric_links::surgery::{cross, diffeo_type, mcgavran_type, DiffeoNode};

fn pass(n: usize, what: &str) {
    println!("criterion {n}: PASS — {what}");
}

#[test]
fn acceptance() {
    criterion_1_cube_ring();
    criterion_2_truncated_cube();
    criterion_3_cyclic_duals();
    criterion_4_rp2_torsion();
    criterion_5_mcgavran();
    criterion_6_wall_crossing();
    criterion_7_flip_negatives();
    criterion_8_property_suites();
    criterion_9_classifier();
}

// -- 1: the cube's Betti numbers and full multiplication table --------------

fn criterion_1_cube_ring() {
    let p = cube(3);
    let r = cohomology_of(&p);
    assert_eq!(r.betti_vector(), vec![1, 0, 0, 3, 0, 0, 3, 0, 0, 1]);
    let mut calc = ProductCalculator::new(&p);
    let gens = named_generators(&r, &mut calc);
    assert_eq!(gens.len(), 6);
    let deg3: Vec<_> = gens.iter().filter(|(_, g)| g.degree == 3).collect();
    let deg6: Vec<_> = gens.iter().filter(|(_, g)| g.degree == 6).collect();
    assert_eq!((deg3.len(), deg6.len()), (3, 3));
    // Pairs of opposite facets; degree-3 generators live on the complements.
    let pairs = [vec![1u32, 2], vec![3, 4], vec![5, 6]];
    let mut nonzero = 0usize;
    for (i, (_, a)) in deg3.iter().enumerate() {
        for (j, (_, b)) in deg3.iter().enumerate() {
            if j < i {
                continue;
            }
            let ab = calc.cup(a, b);
            if i == j {
                assert!(
                    ab.as_ref().map_or(true, |c| c.is_zero()),
                    "square of a degree-3 generator must vanish"
                );
                continue;
            }
            let c = ab.expect("product of distinct degree-3 generators defined");
            assert!(!c.is_zero());
            nonzero += 1;
            // The result is ± the degree-6 generator of the third pair.
            let third = pairs
                .iter()
                .find(|q| {
                    let qs = FacetSubset::from_labels(q);
                    qs != a.support.complement(6) && qs != b.support.complement(6)
                })
                .unwrap();
            assert_eq!(c.support, FacetSubset::from_labels(third));
            assert_eq!(c.degree, 6);
            assert_eq!(c.coords.free.len(), 1);
            assert_eq!(
                c.coords.free[0].magnitude(),
                quadric_links::kernel::Int::from(1).magnitude()
            );
        }
    }
    for (_, a) in &deg3 {
        for (_, b) in &deg6 {
            let ab = calc.cup(a, b);
            if a.support.complement(6) == b.support {
                // Complementary supports pair to ± the top class.
                let c = ab.expect("complementary product defined");
                let m = calc.top_multiple(&c).expect("lands in the top degree");
                assert_eq!(
                    m.magnitude(),
                    quadric_links::kernel::Int::from(1).magnitude()
                );
                nonzero += 1;
            } else {
                assert!(ab.map_or(true, |c| c.is_zero()));
            }
        }
    }
    assert_eq!(nonzero, 6, "exactly six nonzero products between generators");
    pass(1, "cube Betti table and multiplication table reproduced exactly");
}

// -- 2: the truncated cube, directly and via the vertex-cut update ----------

fn criterion_2_truncated_cube() {
    let direct = cohomology_of(&truncated_cube());
    let updated = vertex_cut_update(&cohomology_of(&cube(3))).unwrap();
    assert_eq!(
        direct.betti_vector(),
        vec![1, 0, 0, 6, 6, 2, 6, 6, 0, 0, 1]
    );
    assert_eq!(direct.dim_x, 10);
    for i in 0..=direct.dim_x {
        assert_eq!(direct.betti(i), updated.betti(i), "betti at degree {i}");
        assert_eq!(direct.torsion(i), updated.torsion(i), "torsion at degree {i}");
    }
    pass(2, "truncated-cube groups agree between direct sweep and closed-form update");
}

// -- 3: cyclic duals -------------------------------------------------------

fn criterion_3_cyclic_duals() {
    // 5 vertices: the simplex, an odd sphere.
    let t5 = diffeo_type(&cyclic_dual(5).unwrap(), None);
    assert!(matches!(t5.node, DiffeoNode::Sphere(9)), "got {t5}");

    // 6 vertices: a product of two spheres.
    let p6 = cyclic_dual(6).unwrap();
    let t6 = diffeo_type(&p6, None);
    assert_eq!(t6.to_string(), "S^5 × S^5", "got {t6}");
    assert_eq!(t6.betti(), cohomology_of(&p6).betti_vector());

    // 7 vertices: connected-sum ring shape with seven S^5 × S^6 pieces.
    let p7 = cyclic_dual(7).unwrap();
    match classify_ring(&p7) {
        RingShape::SphereProductConnectedSum { pieces, .. } => {
            assert_eq!(pieces, vec![(7, 5, 6)]);
        }
        other => panic!("7-vertex cyclic dual misclassified: {other:?}"),
    }
    let predicted = quadric_links::surgery::DiffeoType {
        node: DiffeoNode::ConnectedSum(vec![(7, 5, 6)]),
        provenance: String::new(),
    };
    assert_eq!(predicted.betti(), cohomology_of(&p7).betti_vector());

    // 8 vertices: ring shape of a 31-piece connected sum.
    let p8 = cyclic_dual(8).unwrap();
    match classify_ring(&p8) {
        RingShape::SphereProductConnectedSum { pieces, .. } => {
            assert_eq!(pieces, vec![(16, 5, 7), (15, 6, 6)]);
        }
        other => panic!("8-vertex cyclic dual misclassified: {other:?}"),
    }
    let predicted = quadric_links::surgery::DiffeoType {
        node: DiffeoNode::ConnectedSum(vec![(16, 5, 7), (15, 6, 6)]),
        provenance: String::new(),
    };
    assert_eq!(predicted.betti(), cohomology_of(&p8).betti_vector());
    pass(3, "cyclic-dual classification table reproduced with matching Betti numbers");
}

// -- 4: torsion from the projective plane ----------------------------------

fn criterion_4_rp2_torsion() {
    let b = quadric_links::surgery::torsion_build(&rp2_complex(), false).unwrap();
    assert_eq!(b.polytope.n(), 16);
    assert_eq!(b.polytope.d(), 5);
    assert_eq!(b.polytope.n() as usize + b.polytope.d(), 21);
    assert_eq!(b.added, FacetSubset::from_labels(&(7..=16).collect::<Vec<_>>()));

    // One shared 2^16 sweep powers both cohomology and homology.
    let summaries = subset_summaries(&b.polytope);
    let coh = cohomology_from_summaries(&b.polytope, &summaries);
    let two = quadric_links::kernel::Int::from(2);

    // H^9 holds exactly one Z/2, and it comes from the added-label support.
    assert_eq!(coh.torsion(9), vec![two.clone()]);
    let at_support = coh.summands_with_support(&b.added);
    let z2: Vec<_> = at_support
        .iter()
        .filter(|(deg, _, tors)| *deg == 9 && !tors.is_empty())
        .collect();
    assert_eq!(z2.len(), 1);
    assert_eq!(z2[0].2, vec![two.clone()]);

    // Universal coefficients: the torsion shows up one degree lower in
    // homology.
    let hom = homology_from_summaries(&b.polytope, &summaries);
    assert_eq!(hom.torsion(8), vec![two.clone()]);

    // Euler characteristic and duality on the big fixture, covering the
    // sweep-capped loops of the invariant suites below.
    assert_eq!(coh.euler(), 0);
    let dim = coh.dim_x;
    for i in 0..=dim {
        assert_eq!(coh.betti(i), coh.betti(dim - i), "duality at degree {i}");
        let j = dim + 1 - i;
        let mirrored = if j <= dim { coh.torsion(j) } else { Vec::new() };
        assert_eq!(coh.torsion(i), mirrored, "torsion duality at degree {i}");
    }

    // The link complex over the added labels is the projective plane again,
    // in agreement with the induced subcomplex at zero shift.
    let link = link_complex(&b.polytope, &b.added).unwrap();
    let (hl, _) = reduced_homology(&link);
    assert_eq!(hl.torsion(1), vec![two.clone()]);
    let sub = induced_subcomplex(&b.polytope, &b.added);
    let (hs, _) = reduced_homology(&sub);
    assert_eq!(hs.torsion(1), vec![two]);
    pass(4, "projective-plane build places exactly one Z/2 in degree 9 at the added support");
}

// -- 5: vertex-cut simplices and the closed form ---------------------------

fn truncated_simplex(q: usize, l: usize) -> CombPolytope {
    let base = simplex(q);
    let vertices: Vec<Vec<u32>> = base.dual_facets().iter().take(l).cloned().collect();
    assert_eq!(vertices.len(), l, "the {q}-simplex has too few vertices");
    let mut p = base;
    for v in &vertices {
        p = truncate_face(&p, &FacetSubset::from_labels(v)).unwrap();
    }
    p
}

fn criterion_5_mcgavran() {
    let t = mcgavran_type(3, 4).unwrap();
    let pieces = match &t.node {
        DiffeoNode::ConnectedSum(p) => p.clone(),
        _ => panic!("expected a connected sum"),
    };
    assert_eq!(pieces, vec![(10, 3, 8), (20, 4, 7), (19, 5, 6)]);
    let poly = truncated_simplex(3, 4);
    assert_eq!(t.betti(), cohomology_of(&poly).betti_vector());

    let t = mcgavran_type(2, 2).unwrap();
    let pieces = match &t.node {
        DiffeoNode::ConnectedSum(p) => p.clone(),
        _ => panic!("expected a connected sum"),
    };
    assert_eq!(pieces, vec![(5, 3, 4)]);
    let poly = truncated_simplex(2, 2);
    assert_eq!(t.betti(), cohomology_of(&poly).betti_vector());
    pass(5, "vertex-cut closed forms match direct cohomology of the cut simplices");
}

// -- 6: wall crossings match flips -----------------------------------------

fn criterion_6_wall_crossing() {
    let (c, v) = p1_wall_path();
    let (events, _) = cross(&c, &v).unwrap();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].t, quadric_links::kernel::rat(2, 3));
    assert_eq!(events[0].wall.indices, vec![3]);
    assert_eq!(events[0].wall.wall_type, (2, 1));
    assert_eq!(events[0].flip.as_ref().unwrap().flip_type, (2, 1));

    let (c, v) = p2_pocket_path();
    let (events, _) = cross(&c, &v).unwrap();
    assert!(!events.is_empty());
    for e in &events {
        let f = e.flip.as_ref().expect("every crossing matches a flip");
        assert_eq!(
            e.wall.wall_type, f.flip_type,
            "wall type must equal the matched flip type"
        );
    }
    pass(6, "wall crossings occur at the predicted times with matching flip types");
}

// -- 7: invalid flips are rejected with the right reason --------------------

fn criterion_7_flip_negatives() {
    // Edge flip on the 3-simplex: the incoming simplex already exists.
    let s = simplex(3);
    let spec = FlipSpec {
        flip_type: (2, 2),
        face_out: vec![1, 2],
        face_in: vec![3, 4],
    };
    match apply_flip(&s, &spec) {
        Err(PolytopeError::InvalidFlip(FlipError::AlreadyPresent(f))) => {
            assert_eq!(f.labels(), vec![3, 4]);
        }
        other => panic!("expected AlreadyPresent, got {other:?}"),
    }

    // Edge flip on the hexagonal book across an existing diagonal.
    let b = book(6).unwrap();
    let spec = FlipSpec {
        flip_type: (2, 2),
        face_out: vec![2, 4],
        face_in: vec![1, 3],
    };
    match apply_flip(&b, &spec) {
        Err(PolytopeError::InvalidFlip(FlipError::AlreadyPresent(f))) => {
            assert_eq!(f.labels(), vec![1, 3]);
        }
        Err(other) => panic!("expected AlreadyPresent, got {other}"),
        Ok(_) => panic!("invalid flip accepted"),
    }
    pass(7, "invalid flips rejected with the violated condition named");
}

// -- 8: invariant suites over the corpus -----------------------------------

fn criterion_8_property_suites() {
    for (name, p) in corpus_polytopes() {
        if p.n() > 12 {
            continue; // the 16-label fixture is covered by criterion 4
        }
        let r = cohomology_of(&p);
        assert_eq!(r.euler(), 0, "{name}: Euler characteristic");
        let dim = r.dim_x;
        for i in 0..=dim {
            assert_eq!(r.betti(i), r.betti(dim - i), "{name}: duality at {i}");
            let j = dim + 1 - i;
            let mirrored = if j <= dim { r.torsion(j) } else { Vec::new() };
            assert_eq!(r.torsion(i), mirrored, "{name}: torsion duality at {i}");
        }
        if p.d() <= 4 {
            for i in 0..=dim {
                assert!(r.torsion(i).is_empty(), "{name}: torsion with d ≤ 4");
            }
        }
        // Link complexes against induced subcomplexes on the small fixtures,
        // over every subset in the link's domain.
        if p.n() <= 7 {
            let n = p.n();
            let d = p.d() as i64;
            for mask in 0u64..(1 << n) {
                let labels: Vec<u32> =
                    (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let i_set = FacetSubset::from_labels(&labels);
                let Ok(link) = link_complex(&p, &i_set) else {
                    continue;
                };
                let (hl, _) = reduced_homology(&link);
                let sub = induced_subcomplex(&p, &i_set);
                let (hs, _) = reduced_homology(&sub);
                let shift = d - (n as i64 - labels.len() as i64) + 1;
                let span = n as i64 + 1;
                for j in -span..=span {
                    assert_eq!(
                        (hl.betti(j), hl.torsion(j)),
                        (hs.betti(j + shift), hs.torsion(j + shift)),
                        "{name}: oracle mismatch at {labels:?} degree {j}"
                    );
                }
            }
        }
        // Realization round trip.
        if p.n() <= 8 && p.realization().is_some() {
            let c = realize(&p, 0).unwrap();
            let q = polytope_of(&c).unwrap();
            assert_eq!(p.dual_facets(), q.dual_facets(), "{name}: realize round trip");
        }
    }
    // Connectivity against dual neighbourliness on the configuration corpus.
    for (name, c) in corpus_configurations() {
        let Ok(desc) = c.link_descriptor() else { continue };
        if c.n() > 12 {
            continue;
        }
        if c.check_admissible().k > 0 {
            assert_eq!(desc.connectivity, 0, "{name}: circle factors");
            continue;
        }
        let p = polytope_of(&c).unwrap();
        let r = cohomology_of(&p);
        if let Some(first) =
            (1..=r.dim_x).find(|&i| r.betti(i) > 0 || !r.torsion(i).is_empty())
        {
            assert_eq!(first, desc.connectivity + 1, "{name}: connectivity");
        }
    }
    // Products of configurations against products of polytopes.
    let seg = quadric_links::builtin::segment_config();
    let pen = quadric_links::builtin::pentagon_config();
    for (a, b) in [(&seg, &seg), (&pen, &seg)] {
        let joint = quadric_links::config::product(a, b);
        let direct = polytope_of(&joint).unwrap();
        let composed = polytope_product(&polytope_of(a).unwrap(), &polytope_of(b).unwrap());
        assert!(combinatorially_equal(&direct, &composed, true).is_some());
    }
    pass(8, "Euler, duality, oracle, torsion-bound, connectivity, product, and realization suites hold");
}

// -- 9: the d = 3 classifier -----------------------------------------------

fn criterion_9_classifier() {
    match classify_ring(&cube(3)) {
        RingShape::NotConnectedSum { witness } => {
            assert_eq!(witness.length, 4, "the cube's witness is a 4-cycle");
        }
        other => panic!("cube misclassified: {other:?}"),
    }
    for (name, p) in corpus_polytopes() {
        if p.d() != 3 {
            continue;
        }
        let is_cs = matches!(
            classify_ring(&p),
            RingShape::SphereProductConnectedSum { .. }
        );
        let is_ts = is_truncated_simplex(&p).is_some();
        assert_eq!(
            is_cs, is_ts,
            "{name}: ring classifier disagrees with the truncated-simplex recognizer"
        );
    }
    pass(9, "cube rejected with a 4-cycle witness; classifier matches truncation recognition in dimension 3");
}
