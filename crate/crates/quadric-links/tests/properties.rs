//! Cross-cutting invariant suites over the fixture corpus, plus randomized
//! property tests for the exact kernel and the cup product.
//!
//! The largest fixture (n = 16) is exercised by the acceptance suite; the
//! sweeps here cap the fixture size so the whole file stays fast.

use num_traits::Zero;
use proptest::prelude::*;
use quadric_links::builtin::{
    book, corpus_configurations, corpus_polytopes, cube, pentagon_config, segment,
    segment_config,
};
use quadric_links::cohomology::{
    cohomology_of, kunneth_with_torus, named_generators, ProductCalculator,
};
use quadric_links::config::{realize, Configuration};
use quadric_links::homology::{induced_subcomplex, link_complex, reduced_homology};
use quadric_links::kernel::{rat_int, nullspace_basis, Rat, RatMatrix};
use quadric_links::polytope::{
    apply_flip, combinatorially_equal, diff_as_flip, polytope_of, product as polytope_product,
    truncate_face, CombPolytope, FacetSubset,
};

/// Fixtures small enough for repeated full subset sweeps.
fn small_corpus() -> Vec<(String, CombPolytope)> {
    corpus_polytopes()
        .into_iter()
        .filter(|(_, p)| p.n() <= 12)
        .collect()
}

#[test]
fn euler_characteristic_vanishes_on_corpus() {
    for (name, p) in small_corpus() {
        let r = cohomology_of(&p);
        assert_eq!(r.euler(), 0, "{name}: Euler characteristic not zero");
    }
}

#[test]
fn poincare_duality_betti_and_torsion() {
    for (name, p) in small_corpus() {
        let r = cohomology_of(&p);
        let dim = r.dim_x;
        for i in 0..=dim {
            assert_eq!(
                r.betti(i),
                r.betti(dim - i),
                "{name}: betti asymmetry at degree {i}"
            );
            let j = dim + 1 - i;
            let mirrored = if j <= dim { r.torsion(j) } else { Vec::new() };
            assert_eq!(
                r.torsion(i),
                mirrored,
                "{name}: torsion not mirrored between degrees {i} and {j}"
            );
        }
    }
}

#[test]
fn link_complex_matches_induced_subcomplex_homology() {
    // For every label subset 𝓘 whose complement is a non-face of the dual
    // sphere, reduced homology of the link complex agrees with that of the
    // induced subcomplex after a fixed degree shift. Subsets whose complement
    // is a face contribute zero summands and are out of the link's domain.
    for (name, p) in corpus_polytopes() {
        if p.n() > 8 {
            continue;
        }
        let n = p.n();
        let d = p.d() as i64;
        for mask in 0u64..(1 << n) {
            let labels: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
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
                    "{name}: link/subcomplex mismatch at {labels:?}, degree {j}"
                );
            }
        }
    }
}

#[test]
fn no_torsion_in_low_dimensions() {
    for (name, p) in small_corpus() {
        if p.d() > 4 {
            continue;
        }
        let r = cohomology_of(&p);
        for i in 0..=r.dim_x {
            assert!(
                r.torsion(i).is_empty(),
                "{name}: unexpected torsion in degree {i} for d = {}",
                p.d()
            );
        }
    }
}

#[test]
fn kunneth_against_segment_product() {
    for (name, p) in corpus_polytopes() {
        if p.n() > 8 {
            continue;
        }
        let q = polytope_product(&p, &segment());
        let bp = cohomology_of(&p).betti_vector();
        let bq = cohomology_of(&q).betti_vector();
        // The segment's link is S^3.
        let mut expect = vec![0usize; bp.len() + 3];
        for (i, &b) in bp.iter().enumerate() {
            expect[i] += b;
            expect[i + 3] += b;
        }
        assert_eq!(bq, expect, "{name}: segment-product Betti convolution fails");
        // Circle factors via the closed formula keep the Euler number at 0.
        let torus = kunneth_with_torus(&cohomology_of(&p), 2);
        assert_eq!(torus.euler(), 0, "{name}: torus product has nonzero Euler");
    }
}

#[test]
fn vertex_cut_flips_round_trip() {
    for (name, p) in corpus_polytopes() {
        if p.n() > 10 || p.d() < 2 {
            continue;
        }
        let vertex = FacetSubset::from_labels(&p.dual_facets()[0]);
        let q = truncate_face(&p, &vertex)
            .unwrap_or_else(|e| panic!("{name}: vertex cut failed: {e}"));
        let f = diff_as_flip(&p, &q)
            .unwrap_or_else(|| panic!("{name}: vertex cut not matched as a flip"));
        assert_eq!(f.flip_type, (1, p.d()), "{name}: wrong flip type");
        let q2 = apply_flip(&p, &f).unwrap_or_else(|e| panic!("{name}: flip rejected: {e}"));
        assert!(
            combinatorially_equal(&q, &q2, false).is_some(),
            "{name}: applying the matched flip disagrees with the cut"
        );
        let back = apply_flip(&q, &f.reversed())
            .unwrap_or_else(|e| panic!("{name}: reverse flip rejected: {e}"));
        assert!(
            combinatorially_equal(&p, &back, true).is_some(),
            "{name}: reverse flip does not restore the polytope"
        );
    }
}

#[test]
fn dehn_sommerville_h_vector_symmetry() {
    fn binom(a: i64, b: i64) -> i64 {
        if b < 0 || b > a {
            return 0;
        }
        let b = b.min(a - b);
        let mut acc = 1i64;
        for i in 0..b {
            acc = acc * (a - i) / (i + 1);
        }
        acc
    }
    for (name, p) in corpus_polytopes() {
        let d = p.d();
        if d == 0 {
            continue;
        }
        let f = p.f_vector();
        let mut h = vec![0i64; d + 1];
        for k in 0..=d {
            for i in 0..=k {
                let f_i = if i == 0 { 1 } else { f[i - 1] as i64 };
                let sign = if (k - i) % 2 == 0 { 1 } else { -1 };
                h[k] += sign * binom(d as i64 - i as i64, k as i64 - i as i64) * f_i;
            }
        }
        for k in 0..=d {
            assert_eq!(h[k], h[d - k], "{name}: h-vector {h:?} not symmetric");
        }
    }
}

#[test]
fn product_of_configurations_commutes_with_product_of_polytopes() {
    let pairs: Vec<(Configuration, Configuration)> = vec![
        (segment_config(), segment_config()),
        (pentagon_config(), segment_config()),
    ];
    for (a, b) in pairs {
        let c = quadric_links::config::product(&a, &b);
        let direct = polytope_of(&c).expect("product configuration is admissible");
        let composed = polytope_product(
            &polytope_of(&a).unwrap(),
            &polytope_of(&b).unwrap(),
        );
        assert!(
            combinatorially_equal(&direct, &composed, true).is_some(),
            "configuration product does not match polytope product"
        );
    }
}

#[test]
fn realize_then_polytope_of_is_identity() {
    for (name, p) in corpus_polytopes() {
        if p.n() > 8 {
            continue;
        }
        let c = realize(&p, 0).unwrap_or_else(|e| panic!("{name}: realize failed: {e}"));
        let q = polytope_of(&c).unwrap_or_else(|e| panic!("{name}: round trip failed: {e}"));
        assert_eq!(
            p.dual_facets(),
            q.dual_facets(),
            "{name}: realize ∘ polytope_of is not the identity"
        );
        // With circle factors appended the polytope is unchanged but k grows.
        let c2 = realize(&p, 2).unwrap_or_else(|e| panic!("{name}: realize with circles: {e}"));
        assert_eq!(c2.check_admissible().k, 2, "{name}: appended circles not indispensable");
    }
}

#[test]
fn connectivity_matches_neighbourliness() {
    for (name, c) in corpus_configurations() {
        let Ok(desc) = c.link_descriptor() else { continue };
        if c.n() > 12 {
            continue;
        }
        let Ok(p) = polytope_of(&c) else { continue };
        let r = cohomology_of(&p);
        let report = c.check_admissible();
        if report.k > 0 {
            // Circle factors: the link is only 0-connected. Cohomology of the
            // polytope part alone cannot see this; just check the descriptor.
            assert_eq!(desc.connectivity, 0, "{name}");
            continue;
        }
        let first = (1..=r.dim_x).find(|&i| r.betti(i) > 0 || !r.torsion(i).is_empty());
        if let Some(first) = first {
            assert_eq!(
                first,
                desc.connectivity + 1,
                "{name}: first nontrivial degree vs connectivity"
            );
        }
    }
}

#[test]
fn cup_product_bilinearity_and_commutativity_sample() {
    // On the cube and the pentagonal book, products of named generators are
    // apex-independent (checked inside the calculator), graded-commutative,
    // and bilinear over scaling by 2.
    for p in [cube(3), book(5).unwrap()] {
        let report = cohomology_of(&p);
        let mut calc = ProductCalculator::new(&p);
        let gens = named_generators(&report, &mut calc);
        for (i, (_, a)) in gens.iter().enumerate() {
            for (_, b) in gens.iter().skip(i) {
                if a.degree + b.degree > report.dim_x as i64 {
                    continue;
                }
                let ab = calc.cup(a, b);
                let ba = calc.cup(b, a);
                match (&ab, &ba) {
                    (Some(x), Some(y)) => {
                        // Graded commutativity up to sign: compare supports,
                        // degrees, and coordinate magnitudes.
                        assert_eq!(x.support, y.support);
                        assert_eq!(x.degree, y.degree);
                        let abs = |v: &Vec<quadric_links::kernel::Int>| {
                            v.iter().map(|t| if t < &quadric_links::kernel::Int::zero() { -t.clone() } else { t.clone() }).collect::<Vec<_>>()
                        };
                        assert_eq!(abs(&x.coords.free), abs(&y.coords.free));
                    }
                    (None, None) => {}
                    _ => panic!("cup product defined in one order only"),
                }
                if let Some(x) = &ab {
                    let a2 = calc.scale(a, &rat_int(2).numer().clone());
                    let x2 = calc.cup(&a2, b).expect("scaled product defined");
                    let doubled: Vec<_> =
                        x.coords.free.iter().map(|t| t * 2).collect();
                    assert_eq!(x2.coords.free, doubled, "cup product is not bilinear");
                }
            }
        }
    }
}

#[test]
fn vertex_cut_closed_form_matches_cut_simplices() {
    // The connected-sum closed form for an l-times vertex-cut q-simplex has
    // the same Betti numbers as the direct cohomology sweep, over the whole
    // small grid.
    use quadric_links::builtin::simplex;
    use quadric_links::surgery::mcgavran_type;
    for q in 2..=3usize {
        for l in 1..=4i64 {
            let t = mcgavran_type(q, l).unwrap();
            // Cut any current vertex at each step; the closed form depends
            // only on the count, not on which vertices get cut.
            let mut p = simplex(q);
            for _ in 0..l {
                let v = p.dual_facets()[0].clone();
                p = truncate_face(&p, &FacetSubset::from_labels(&v)).unwrap();
            }
            assert_eq!(
                t.betti(),
                cohomology_of(&p).betti_vector(),
                "closed form disagrees at q = {q}, l = {l}"
            );
        }
    }
}

#[test]
fn plane_classification_agrees_with_cohomology() {
    // For every p = 2 corpus configuration the derived weight count matches
    // the polygon that comes out of the Gale dual, and the formula's Betti
    // numbers match the sweep (convolved with the torus factor when circles
    // split off).
    use quadric_links::builtin::polygon;
    use quadric_links::surgery::diffeo_type;
    for (name, c) in corpus_configurations() {
        if c.p() != 2 || !c.check_admissible().is_admissible() {
            continue;
        }
        let weights = quadric_links::surgery::reduced_weights(&c)
            .unwrap_or_else(|e| panic!("{name}: weight reduction failed: {e}"));
        let m = weights.len();
        assert_eq!(m % 2, 1, "{name}: an admissible plane configuration has an odd direction count");
        let total: usize = weights.iter().map(|(_, w)| w).sum();
        assert_eq!(total, c.n() as usize, "{name}: weights must sum to the column count");
        let poly = polytope_of(&c).unwrap();
        // With all weights 1 the Gale dual is the m-gon itself.
        if weights.iter().all(|(_, w)| *w == 1) || poly.d() == 2 {
            let expected = if m == 3 {
                quadric_links::builtin::simplex(2)
            } else {
                polygon(m).unwrap()
            };
            assert!(
                combinatorially_equal(&poly, &expected, true).is_some(),
                "{name}: Gale dual is not the {m}-gon the weights predict"
            );
        }
        let t = diffeo_type(&poly, Some(&c));
        let k = c.check_admissible().k;
        let mut betti = cohomology_of(&poly).betti_vector();
        for _ in 0..k {
            // Convolve with (1, 1): one circle factor at a time.
            let mut next = vec![0usize; betti.len() + 1];
            for (i, &b) in betti.iter().enumerate() {
                next[i] += b;
                next[i + 1] += b;
            }
            betti = next;
        }
        assert_eq!(t.betti(), betti, "{name}: Betti mismatch against the formula");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random admissible p = 1 configurations: the link invariants hold for
    /// whatever polytope comes out.
    #[test]
    fn random_line_configurations_give_valid_links(
        pos in prop::collection::vec(1i64..40, 1..4),
        neg in prop::collection::vec(1i64..40, 1..4),
    ) {
        let mut cols: Vec<Vec<i64>> = pos.iter().map(|&x| vec![x]).collect();
        cols.extend(neg.iter().map(|&x| vec![-x]));
        let c = Configuration::from_i64(1, &cols);
        prop_assume!(c.check_admissible().is_admissible());
        let (reduced, _k) = quadric_links::config::split_circles(&c).unwrap();
        // A single leftover column is a bare circle with a point polytope;
        // there is no dual sphere to sweep.
        prop_assume!(reduced.n() >= 2);
        let p = polytope_of(&reduced).unwrap();
        let r = cohomology_of(&p);
        prop_assert_eq!(r.euler(), 0);
        let dim = r.dim_x;
        for i in 0..=dim {
            prop_assert_eq!(r.betti(i), r.betti(dim - i));
            prop_assert!(r.torsion(i).is_empty());
        }
    }

    /// The exact nullspace really annihilates the matrix.
    #[test]
    fn nullspace_columns_are_in_the_kernel(
        entries in prop::collection::vec(-6i64..7, 12),
    ) {
        let rows: Vec<Vec<Rat>> = entries
            .chunks(4)
            .map(|r| r.iter().map(|&x| rat_int(x)).collect())
            .collect();
        let m = RatMatrix::from_rows(rows);
        let null = nullspace_basis(&m);
        for c in 0..null.cols {
            let v: Vec<Rat> = (0..null.rows).map(|r| null.at(r, c).clone()).collect();
            let image = m.mul_vec(&v);
            prop_assert!(image.iter().all(|x| x.is_zero()));
        }
        prop_assert_eq!(null.cols, 4 - m.rank());
    }
}
