//! Exact-arithmetic toolkit for the combinatorics and integer cohomology rings of
//! links of special quadric systems, equivalently of the simple convex polytopes
//! they quotient to.
//!
//! The crate is organized in layers:
//!
//! * [`kernel`] — exact rational linear algebra, integer Smith normal form, and a
//!   certificate-producing convex-hull membership test (two-phase simplex).
//! * [`config`] — admissible quadric configurations: validation, face conditions,
//!   indispensable points, circle splitting, products, suspension, Gale realization.
//! * [`polytope`] — simple polytopes stored as their dual boundary simplicial
//!   spheres: construction from configurations, truncation, bistellar flips,
//!   products, recognition predicates.
//! * [`homology`] — integer reduced simplicial homology with cycle representatives,
//!   induced subcomplexes and link complexes.
//! * [`cohomology`] — the graded cohomology of the link assembled from subset-indexed
//!   homology, cup products via the join formula, the vertex-cut update, and ring
//!   classifiers.
//! * [`surgery`] — walls and wall-crossings of configurations, crossing↔flip
//!   matching, diffeomorphism-type reporting, and the arbitrary-torsion builder.
//! * [`builtin`] — the fixture corpus with exact rational realizations.
//!
//! All decision paths are exact: no floating point participates in any predicate.

pub mod builtin;
pub mod cohomology;
pub mod config;
pub mod homology;
pub mod kernel;
pub mod polytope;
pub mod surgery;
