//! Command-line front end: file and fixture I/O, reports, and the
//! verification suite runner.

use clap::{Parser, Subcommand};
use num_traits::Zero;
use quadric_links::builtin::{
    configuration_by_name, corpus_configurations, corpus_polytopes, polytope_by_name, segment,
};
use quadric_links::cohomology::{
    classify_ring, cohomology_of, kunneth_with_torus, product_table,
    CohomologyReport, RingShape,
};
use quadric_links::config::{lvm_report, realize, Configuration};
use quadric_links::homology::{link_complex, reduced_homology, SimplicialComplex};
use quadric_links::kernel::parse_rat;
use quadric_links::polytope::{
    apply_flip, combinatorially_equal, diff_as_flip, polytope_of, product,
    truncate_face, CombPolytope, FacetSubset, FlipSpec,
};
use quadric_links::surgery::{cross, diffeo_type, enumerate_walls, torsion_build, translate};
use serde_json::{json, Value};
use std::process::ExitCode;

const EXIT_INVALID: u8 = 1;
const EXIT_REFUSED: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "quadric-links",
    about = "Exact combinatorics and integer cohomology of links of special quadric systems"
)]
struct Cli {
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    /// Refuse subset sweeps beyond this facet count.
    #[arg(long, global = true, default_value_t = 22)]
    max_n: u32,
    /// Worker threads for subset sweeps (also settable via
    /// QUADRIC_LINKS_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Validate a configuration and report admissibility data.
    Check {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Compute the associate polytope of a configuration.
    Polytope {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Produce a configuration realizing a polytope.
    Realize {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        /// Extra indispensable points to append (circle factors).
        #[arg(long, default_value_t = 0)]
        circles: usize,
    },
    /// Truncate the face of a polytope named by its facet labels.
    Truncate {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        /// Comma-separated facet labels whose intersection is cut.
        #[arg(long)]
        face: String,
    },
    /// Apply a bistellar flip to a polytope.
    Flip {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        /// Comma-separated labels of the outgoing dual simplex.
        #[arg(long)]
        face: String,
        /// Flip type as `a,b`.
        #[arg(long = "type")]
        flip_type: String,
    },
    /// Product of two polytopes (paths or `builtin:<name>`).
    Product { first: String, second: String },
    /// Full cohomology report with product table.
    Cohomology {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Homology groups of the link.
    HomologyX {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Connected-sum shape classification of the cohomology ring.
    Ring {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Combined report: ring shape and diffeomorphism type.
    Classify {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Walls of a configuration; with --translate, the crossings of a path.
    Walls {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        /// Translation vector as comma-separated rationals.
        #[arg(long)]
        translate: Option<String>,
    },
    /// Wall crossings along the straight path to the translated configuration.
    Cross {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        translate: String,
    },
    /// Diffeomorphism-type expression for a polytope or configuration.
    Diffeo {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Build a polytope embedding a complex's homology as torsion data.
    TorsionBuild {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        /// Force an even-dimensional link by one extra vertex cut.
        #[arg(long)]
        even: bool,
    },
    /// Complex-geometry quotient report for a configuration.
    Lvm {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Run invariant suites on one fixture or the whole corpus.
    Verify {
        input: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        /// Comma-separated suites: euler, poincare, lemma712, kunneth, flips,
        /// dehn-sommerville. Default: all.
        #[arg(long)]
        suite: Option<String>,
    },
    /// List the built-in fixtures.
    Builtin,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        std::env::set_var("QUADRIC_LINKS_THREADS", t.to_string());
    }
    let json = cli.json;
    let max_n = cli.max_n;
    match std::panic::catch_unwind(move || run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
        Err(cause) => {
            let msg = cause
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| cause.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            eprintln!("internal invariant violation (this is a bug): {msg}");
            let _ = (json, max_n);
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INVALID,
        message: msg.into(),
    }
}

fn refused(msg: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_REFUSED,
        message: msg.into(),
    }
}

// ---------------------------------------------------------------------------
// Input loading
// ---------------------------------------------------------------------------

enum Input {
    Polytope(CombPolytope),
    Config(Configuration),
    Complex(SimplicialComplex),
}

fn read_json(path: &str) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{path} is not valid JSON: {e}")))
}

fn complex_from_json(v: &Value) -> Result<SimplicialComplex, CliError> {
    let faces_v = v
        .get("maximal_faces")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("complex file needs an array field 'maximal_faces'"))?;
    let mut faces = Vec::new();
    for f in faces_v {
        let arr = f
            .as_array()
            .ok_or_else(|| invalid("each maximal face must be an array of labels"))?;
        let mut face = Vec::new();
        for x in arr {
            face.push(
                x.as_u64()
                    .ok_or_else(|| invalid("face entries must be positive integers"))?
                    as u32,
            );
        }
        faces.push(face);
    }
    if faces.is_empty() {
        return Err(invalid("a complex needs at least one maximal face"));
    }
    Ok(SimplicialComplex::from_maximal(faces))
}

/// Loads a positional path or a builtin name; `builtin:` prefixes also work
/// in the positional slot.
fn load(input: &Option<String>, builtin: &Option<String>) -> Result<Input, CliError> {
    let by_name = |name: &str| -> Result<Input, CliError> {
        if name == "rp2_complex" {
            return Ok(Input::Complex(quadric_links::builtin::rp2_complex()));
        }
        if let Ok(p) = polytope_by_name(name) {
            return Ok(Input::Polytope(p));
        }
        if let Ok(c) = configuration_by_name(name) {
            return Ok(Input::Config(c));
        }
        Err(invalid(format!("no built-in fixture named '{name}'")))
    };
    match (input, builtin) {
        (_, Some(name)) => by_name(name),
        (Some(path), None) if path.starts_with("builtin:") => by_name(&path["builtin:".len()..]),
        (Some(path), None) => {
            let v = read_json(path)?;
            if v.get("dual_facets").is_some() {
                Ok(Input::Polytope(
                    CombPolytope::from_json(&v).map_err(|e| invalid(e.to_string()))?,
                ))
            } else if v.get("columns").is_some() {
                Ok(Input::Config(
                    Configuration::from_json(&v).map_err(|e| invalid(e.to_string()))?,
                ))
            } else if v.get("maximal_faces").is_some() {
                Ok(Input::Complex(complex_from_json(&v)?))
            } else {
                Err(invalid(format!(
                    "{path}: expected one of the fields 'dual_facets' (polytope), \
                     'columns' (configuration), 'maximal_faces' (complex)"
                )))
            }
        }
        (None, None) => Err(invalid("an input file or --builtin name is required")),
    }
}

fn want_config(i: Input) -> Result<Configuration, CliError> {
    match i {
        Input::Config(c) => Ok(c),
        _ => Err(invalid("this command needs a configuration input")),
    }
}

fn want_polytope(i: Input, circles_note: &str) -> Result<CombPolytope, CliError> {
    match i {
        Input::Polytope(p) => Ok(p),
        Input::Config(c) => polytope_of(&c).map_err(|e| invalid(format!("{circles_note}{e}"))),
        Input::Complex(_) => Err(invalid("this command needs a polytope or configuration")),
    }
}

fn want_complex(i: Input) -> Result<SimplicialComplex, CliError> {
    match i {
        Input::Complex(k) => Ok(k),
        _ => Err(invalid("this command needs a simplicial-complex input")),
    }
}

fn parse_labels(csv: &str) -> Result<Vec<u32>, CliError> {
    csv.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| invalid(format!("'{s}' is not a facet label")))
        })
        .collect()
}

fn parse_translation(csv: &str) -> Result<Vec<quadric_links::kernel::Rat>, CliError> {
    csv.split(',')
        .map(|s| parse_rat(s.trim()).map_err(|e| invalid(format!("bad rational '{s}': {e}"))))
        .collect()
}

fn check_cap(n: u32, max_n: u32) -> Result<(), CliError> {
    if n > max_n {
        return Err(refused(format!(
            "the input has {n} facet labels but the subset-sweep cap is {max_n}; \
             raise it with --max-n if you really want the 2^{n} sweep"
        )));
    }
    Ok(())
}

fn emit(json_mode: bool, v: &Value, text: impl FnOnce() -> String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
    } else {
        println!("{}", text());
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

fn cohomology_text(r: &CohomologyReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "link of a polytope with n = {}, d = {}; dim X = {}\n",
        r.n, r.d, r.dim_x
    ));
    out.push_str("deg  betti  torsion  supports\n");
    for i in 0..=r.dim_x {
        let tors = r.torsion(i);
        let tor_s = if tors.is_empty() {
            "-".to_string()
        } else {
            tors.iter()
                .map(|t| format!("Z/{t}"))
                .collect::<Vec<_>>()
                .join("+")
        };
        let mut supports = Vec::new();
        for s in &r.degrees[i] {
            if s.betti > 0 || !s.torsion.is_empty() {
                supports.push(match &s.origin {
                    quadric_links::cohomology::SummandOrigin::Support(sup) => format!("{sup}"),
                    other => format!("{other:?}"),
                });
            }
        }
        out.push_str(&format!(
            "{:>3}  {:>5}  {:>7}  {}\n",
            i,
            r.betti(i),
            tor_s,
            supports.join(" ")
        ));
    }
    out
}

fn polytope_text(p: &CombPolytope) -> String {
    let facets = p
        .dual_facets()
        .iter()
        .map(|f| {
            f.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n  ");
    format!(
        "simple polytope: n = {} facets, dimension {}, {} vertices\ndual facets:\n  {}",
        p.n(),
        p.d(),
        p.vertex_count(),
        facets
    )
}

fn ring_json(shape: &RingShape) -> Value {
    match shape {
        RingShape::SphereProductConnectedSum { cuts, pieces } => json!({
            "shape": "connected_sum_of_sphere_products",
            "truncated_simplex_cuts": cuts,
            "pieces": pieces
                .iter()
                .map(|&(c, a, b)| json!({"count": c, "a": a, "b": b}))
                .collect::<Vec<_>>(),
        }),
        RingShape::NotConnectedSum { witness } => json!({
            "shape": "not_connected_sum",
            "witness_cycle": witness.labels,
            "witness_length": witness.length,
        }),
        RingShape::Undetermined { reason } => json!({
            "shape": "undetermined",
            "reason": reason,
        }),
    }
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

const ALL_SUITES: [&str; 6] = [
    "euler",
    "poincare",
    "lemma712",
    "kunneth",
    "flips",
    "dehn-sommerville",
];

/// Runs one suite on one polytope; returns a failure message or None.
fn run_suite(name: &str, p: &CombPolytope, report: &CohomologyReport) -> Option<String> {
    match name {
        "euler" => {
            if report.euler() != 0 {
                return Some(format!("Euler characteristic {} ≠ 0", report.euler()));
            }
        }
        "poincare" => {
            let dim = report.dim_x;
            for i in 0..=dim {
                if report.betti(i) != report.betti(dim - i) {
                    return Some(format!(
                        "betti {} = {} but betti {} = {}",
                        i,
                        report.betti(i),
                        dim - i,
                        report.betti(dim - i)
                    ));
                }
                let j = dim + 1 - i;
                let dual_tors = if j <= dim {
                    report.torsion(j)
                } else {
                    Vec::new()
                };
                if report.torsion(i) != dual_tors {
                    return Some(format!(
                        "torsion in degree {i} is not mirrored in degree {j}"
                    ));
                }
            }
        }
        "lemma712" => {
            // Link degrees against subcomplex degrees for every label subset
            // in the link's domain (complement a non-face). The sweep is
            // exponential in the facet count, so it is capped.
            let d = p.d();
            let n = p.n();
            if n > 12 {
                println!("  lemma712: skipped (2^{n} subsets exceeds the sweep cap of 12 labels)");
                return None;
            }
            for mask in 0u64..(1 << n) {
                let labels: Vec<u32> =
                    (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let i_set = FacetSubset::from_labels(&labels);
                let Ok(link) = link_complex(p, &i_set) else {
                    continue;
                };
                let (hl, _) = reduced_homology(&link);
                let sub = quadric_links::homology::induced_subcomplex(p, &i_set);
                let (hs, _) = reduced_homology(&sub);
                let shift = d as i64 - (n as i64 - labels.len() as i64) + 1;
                let span = n as i64 + 1;
                for j in -span..=span {
                    if hl.betti(j) != hs.betti(j + shift)
                        || hl.torsion(j) != hs.torsion(j + shift)
                    {
                        return Some(format!(
                            "link/subcomplex mismatch at {labels:?}, degree {j}"
                        ));
                    }
                }
            }
        }
        "kunneth" => {
            let q = product(p, &segment());
            if q.n() <= 22 {
                let rq = cohomology_of(&q);
                let bp = report.betti_vector();
                let mut expect = vec![0usize; bp.len() + 3];
                for (i, &b) in bp.iter().enumerate() {
                    expect[i] += b;
                    expect[i + 3] += b;
                }
                if rq.betti_vector() != expect {
                    return Some("product with a segment fails the Betti convolution".into());
                }
                let torus = kunneth_with_torus(report, 1);
                if torus.euler() != 0 {
                    return Some("circle product has nonzero Euler characteristic".into());
                }
            }
        }
        "flips" => {
            if p.n() > 0 {
                let vertex = FacetSubset::from_labels(&p.dual_facets()[0]);
                match truncate_face(p, &vertex) {
                    Ok(q) => {
                        let Some(f) = diff_as_flip(p, &q) else {
                            return Some("vertex cut not recognized as a flip".into());
                        };
                        if f.flip_type != (1, p.d()) {
                            return Some(format!(
                                "vertex cut matched as type {:?}",
                                f.flip_type
                            ));
                        }
                        let q2 = match apply_flip(p, &f) {
                            Ok(q2) => q2,
                            Err(e) => return Some(format!("matched flip rejected: {e}")),
                        };
                        if combinatorially_equal(&q, &q2, false).is_none() {
                            return Some("applying the matched flip gives a different polytope".into());
                        }
                        match apply_flip(&q, &f.reversed()) {
                            Ok(back) => {
                                if combinatorially_equal(p, &back, true).is_none() {
                                    return Some("reverse flip does not restore the polytope".into());
                                }
                            }
                            Err(e) => return Some(format!("reverse flip rejected: {e}")),
                        }
                    }
                    Err(_) => {} // degenerate target (e.g. a point): nothing to check
                }
            }
        }
        "dehn-sommerville" => {
            // The h-vector of the dual simplicial sphere must be symmetric.
            let d = p.d();
            if d > 0 {
                let f = p.f_vector();
                let mut h = vec![0i64; d + 1];
                for k in 0..=d {
                    let mut acc = 0i64;
                    for i in 0..=k {
                        let f_i = if i == 0 { 1 } else { f[i - 1] as i64 };
                        acc += sign_pow(k - i)
                            * binom_i64(d as i64 - i as i64, k as i64 - i as i64)
                            * f_i;
                    }
                    h[k] = acc;
                }
                for k in 0..=d {
                    if h[k] != h[d - k] {
                        return Some(format!("h-vector {h:?} is not symmetric"));
                    }
                }
            }
        }
        other => return Some(format!("unknown suite '{other}'")),
    }
    None
}

fn sign_pow(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn binom_i64(a: i64, b: i64) -> i64 {
    if b < 0 || b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: i64 = 1;
    for i in 0..b {
        acc = acc * (a - i) / (i + 1);
    }
    acc
}

// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<(), CliError> {
    let json = cli.json;
    match &cli.verb {
        Verb::Check { input, builtin } => {
            let c = want_config(load(input, builtin)?)?;
            let report = c.check_admissible();
            let v = report.to_json();
            emit(json, &v, || {
                if report.is_admissible() {
                    let mut s = format!(
                        "admissible, k = {} indispensable point(s)",
                        report.k
                    );
                    if report.k > 0 {
                        s.push_str(&format!(
                            " {:?}",
                            report.indispensable.iter().collect::<Vec<_>>()
                        ));
                    }
                    if let Ok(ld) = c.link_descriptor() {
                        s.push_str(&format!(
                            "\nlink dimension {}, polytope dimension {}",
                            ld.dim_x, ld.polytope_dim
                        ));
                    }
                    s
                } else {
                    format!(
                        "NOT admissible: {}",
                        report.failure_reason().unwrap_or_default()
                    )
                }
            });
            if !report.is_admissible() {
                return Err(invalid("configuration is not admissible"));
            }
        }
        Verb::Polytope { input, builtin } => {
            let c = want_config(load(input, builtin)?)?;
            let p = polytope_of(&c).map_err(|e| invalid(e.to_string()))?;
            emit(json, &p.to_json(), || polytope_text(&p));
        }
        Verb::Realize {
            input,
            builtin,
            circles,
        } => {
            let p = want_polytope(load(input, builtin)?, "")?;
            let c = realize(&p, *circles).map_err(|e| invalid(e.to_string()))?;
            emit(json, &c.to_json(), || {
                format!(
                    "configuration with p = {}, n = {} realizing the input",
                    c.p(),
                    c.n()
                )
            });
        }
        Verb::Truncate {
            input,
            builtin,
            face,
        } => {
            let p = want_polytope(load(input, builtin)?, "")?;
            let labels = parse_labels(face)?;
            let q = truncate_face(&p, &FacetSubset::from_labels(&labels))
                .map_err(|e| invalid(e.to_string()))?;
            emit(json, &q.to_json(), || polytope_text(&q));
        }
        Verb::Flip {
            input,
            builtin,
            face,
            flip_type,
        } => {
            let p = want_polytope(load(input, builtin)?, "")?;
            let face_out = parse_labels(face)?;
            let t = parse_labels(flip_type)?;
            if t.len() != 2 {
                return Err(invalid("--type must be 'a,b'"));
            }
            let (a, b) = (t[0] as usize, t[1] as usize);
            let face_in = if a == 1 {
                vec![p.n() + 1]
            } else {
                // The incoming simplex is spanned by the link of the outgoing
                // one; collect its vertices.
                let mut verts: Vec<u32> = Vec::new();
                for f in p.dual_facets() {
                    if face_out.iter().all(|v| f.contains(v)) {
                        for &v in f {
                            if !face_out.contains(&v) && !verts.contains(&v) {
                                verts.push(v);
                            }
                        }
                    }
                }
                verts.sort_unstable();
                verts
            };
            let spec = FlipSpec {
                flip_type: (a, b),
                face_out,
                face_in,
            };
            let q = apply_flip(&p, &spec).map_err(|e| invalid(e.to_string()))?;
            emit(json, &q.to_json(), || polytope_text(&q));
        }
        Verb::Product { first, second } => {
            let p1 = want_polytope(load(&Some(first.clone()), &None)?, "")?;
            let p2 = want_polytope(load(&Some(second.clone()), &None)?, "")?;
            let q = product(&p1, &p2);
            emit(json, &q.to_json(), || polytope_text(&q));
        }
        Verb::Cohomology { input, builtin } => {
            let p = want_polytope(load(input, builtin)?, "")?;
            check_cap(p.n(), cli.max_n)?;
            let report = cohomology_of(&p);
            // Generator-by-generator products need cycle bases per support;
            // keep that to small inputs.
            let table = (p.n() <= 12).then(|| product_table(&p, 64));
            let mut v = report.to_json();
            if let Some(t) = &table {
                v["products"] = t.to_json();
            }
            emit(json, &v, || {
                let mut s = cohomology_text(&report);
                match &table {
                    None => {
                        s.push_str("(product table omitted for inputs with more than 12 facets)\n");
                    }
                    Some(t) => {
                        s.push_str("nonzero products:\n");
                        let mut any = false;
                        for e in &t.entries {
                            if let Some(prod) = e.product.as_ref().filter(|c| !c.is_zero()) {
                                any = true;
                                s.push_str(&format!(
                                    "  {} . {} -> degree {} at support {}\n",
                                    e.left, e.right, prod.degree, prod.support
                                ));
                            }
                        }
                        if !any {
                            s.push_str("  (none)\n");
                        }
                    }
                }
                s
            });
        }
        Verb::HomologyX { input, builtin } => {
            let p = want_polytope(load(input, builtin)?, "")?;
            check_cap(p.n(), cli.max_n)?;
            let h = quadric_links::cohomology::homology_of(&p);
            let v = json!({
                "groups": h
                    .slices
                    .iter()
                    .map(|s| json!({
                        "degree": s.degree,
                        "betti": s.betti,
                        "torsion": s.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    }))
                    .collect::<Vec<_>>(),
            });
            emit(json, &v, || {
                let mut out = String::from("deg  betti  torsion\n");
                for s in &h.slices {
                    out.push_str(&format!(
                        "{:>3}  {:>5}  {}\n",
                        s.degree,
                        s.betti,
                        if s.torsion.is_empty() {
                            "-".into()
                        } else {
                            s.torsion
                                .iter()
                                .map(|t| format!("Z/{t}"))
                                .collect::<Vec<_>>()
                                .join("+")
                        }
                    ));
                }
                out
            });
        }
        Verb::Ring { input, builtin } => {
            let p = want_polytope(load(input, builtin)?, "")?;
            check_cap(p.n(), cli.max_n)?;
            let shape = classify_ring(&p);
            emit(json, &ring_json(&shape), || format!("{shape:?}"));
        }
        Verb::Classify { input, builtin } => {
            let loaded = load(input, builtin)?;
            let (p, cfg) = match loaded {
                Input::Polytope(p) => (p, None),
                Input::Config(c) => {
                    let p = polytope_of(&c).map_err(|e| invalid(e.to_string()))?;
                    (p, Some(c))
                }
                Input::Complex(_) => {
                    return Err(invalid("this command needs a polytope or configuration"))
                }
            };
            check_cap(p.n(), cli.max_n)?;
            let shape = classify_ring(&p);
            let t = diffeo_type(&p, cfg.as_ref());
            let v = json!({
                "ring": ring_json(&shape),
                "diffeo": t.to_json(),
            });
            emit(json, &v, || {
                format!("ring shape: {shape:?}\ndiffeomorphism type: {t}")
            });
        }
        Verb::Walls {
            input,
            builtin,
            translate: tr,
        } => {
            let c = want_config(load(input, builtin)?)?;
            if let Some(tr) = tr {
                return run_cross(&c, tr, json);
            }
            let walls = enumerate_walls(&c).map_err(|e| invalid(e.to_string()))?;
            let v = json!({
                "walls": walls
                    .iter()
                    .map(|w| json!({
                        "indices": w.indices,
                        "type": [w.wall_type.0, w.wall_type.1],
                        "plus_side": w.plus_side,
                        "minus_side": w.minus_side,
                    }))
                    .collect::<Vec<_>>(),
            });
            emit(json, &v, || {
                let mut out = format!("{} wall(s)\n", walls.len());
                for w in &walls {
                    out.push_str(&format!(
                        "  points {:?}  type ({},{})  plus {:?}  minus {:?}\n",
                        w.indices, w.wall_type.0, w.wall_type.1, w.plus_side, w.minus_side
                    ));
                }
                out
            });
        }
        Verb::Cross {
            input,
            builtin,
            translate: tr,
        } => {
            let c = want_config(load(input, builtin)?)?;
            run_cross(&c, tr, json)?;
        }
        Verb::Diffeo { input, builtin } => {
            let loaded = load(input, builtin)?;
            let (p, cfg) = match loaded {
                Input::Polytope(p) => (p, None),
                Input::Config(c) => {
                    let p = polytope_of(&c).map_err(|e| invalid(e.to_string()))?;
                    (p, Some(c))
                }
                Input::Complex(_) => {
                    return Err(invalid("this command needs a polytope or configuration"))
                }
            };
            check_cap(p.n(), cli.max_n)?;
            let t = diffeo_type(&p, cfg.as_ref());
            emit(json, &t.to_json(), || format!("{t}"));
        }
        Verb::TorsionBuild {
            input,
            builtin,
            even,
        } => {
            let k = want_complex(load(input, builtin)?)?;
            let b = torsion_build(&k, *even).map_err(|e| invalid(e.to_string()))?;
            let v = json!({
                "polytope": b.polytope.to_json(),
                "configuration": b.config.to_json(),
                "base_labels": b.base_labels,
                "added_labels": b.added.labels(),
                "certificates": b
                    .certificates
                    .iter()
                    .map(|c| json!({
                        "complex_degree": c.complex_degree,
                        "cohomology_degree": c.cohomology_degree,
                        "betti": c.betti,
                        "torsion": c.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    }))
                    .collect::<Vec<_>>(),
            });
            emit(json, &v, || {
                let mut out = format!(
                    "built polytope: n = {}, d = {}, link dimension {}\n",
                    b.polytope.n(),
                    b.polytope.d(),
                    b.polytope.n() as usize + b.polytope.d()
                );
                out.push_str(&format!(
                    "added facet labels {:?} carry the input complex\n",
                    b.added.labels()
                ));
                for c in &b.certificates {
                    out.push_str(&format!(
                        "  complex degree {} -> cohomology degree {}: betti {}, torsion {:?}\n",
                        c.complex_degree,
                        c.cohomology_degree,
                        c.betti,
                        c.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>()
                    ));
                }
                out
            });
        }
        Verb::Lvm { input, builtin } => {
            let c = want_config(load(input, builtin)?)?;
            let r = lvm_report(&c).map_err(|e| invalid(e.to_string()))?;
            let v = json!({
                "m": r.m,
                "complex_dim": r.complex_dim,
                "indispensable_count": r.indispensable_count,
                "affine_criterion": r.affine_criterion,
                "projective_space": r.projective_space,
            });
            emit(json, &v, || format!("{r:?}"));
        }
        Verb::Verify {
            input,
            builtin,
            suite,
        } => {
            let suites: Vec<String> = match suite {
                Some(csv) => csv.split(',').map(|s| s.trim().to_string()).collect(),
                None => ALL_SUITES.iter().map(|s| s.to_string()).collect(),
            };
            for s in &suites {
                if !ALL_SUITES.contains(&s.as_str()) {
                    return Err(invalid(format!("unknown suite '{s}'")));
                }
            }
            let targets: Vec<(String, CombPolytope)> = if input.is_none() && builtin.is_none() {
                corpus_polytopes()
                    .into_iter()
                    .chain(corpus_configurations().into_iter().filter_map(|(name, c)| {
                        polytope_of(&c).ok().map(|p| (format!("{name} (config)"), p))
                    }))
                    .collect()
            } else {
                vec![(
                    input
                        .clone()
                        .or_else(|| builtin.clone())
                        .unwrap_or_default(),
                    want_polytope(load(input, builtin)?, "")?,
                )]
            };
            let mut failures = 0usize;
            for (name, p) in &targets {
                check_cap(p.n(), cli.max_n)?;
                let report = cohomology_of(p);
                for s in &suites {
                    match run_suite(s, p, &report) {
                        None => println!("PASS {name} :: {s}"),
                        Some(msg) => {
                            failures += 1;
                            println!("FAIL {name} :: {s}: {msg}");
                        }
                    }
                }
            }
            if failures > 0 {
                return Err(invalid(format!("{failures} suite check(s) failed")));
            }
        }
        Verb::Builtin => {
            let v = json!({
                "polytopes": corpus_polytopes().iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
                "configurations": corpus_configurations().iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            });
            emit(json, &v, || {
                let mut out = String::from("polytopes:\n");
                for (n, _) in corpus_polytopes() {
                    out.push_str(&format!("  {n}\n"));
                }
                out.push_str("configurations:\n");
                for (n, _) in corpus_configurations() {
                    out.push_str(&format!("  {n}\n"));
                }
                out.push_str("complexes:\n  rp2_complex\n");
                out
            });
        }
    }
    Ok(())
}

fn run_cross(c: &Configuration, tr: &str, json: bool) -> Result<(), CliError> {
    let v = parse_translation(tr)?;
    if v.len() != c.p() {
        return Err(invalid(format!(
            "translation vector has {} entries but p = {}",
            v.len(),
            c.p()
        )));
    }
    if v.iter().all(|x| x.is_zero()) {
        // A zero translation is a valid degenerate path with no events.
    }
    let (events, end) = cross(c, &v).map_err(|e| invalid(e.to_string()))?;
    let end_poly = polytope_of(&end).ok();
    let out = json!({
        "events": events
            .iter()
            .map(|e| json!({
                "t": quadric_links::kernel::format_rat(&e.t),
                "wall": e.wall.indices,
                "type": [e.wall.wall_type.0, e.wall.wall_type.1],
                "flip": e.flip.as_ref().map(|f| json!({
                    "type": [f.flip_type.0, f.flip_type.1],
                    "face_out": f.face_out,
                    "face_in": f.face_in,
                })),
            }))
            .collect::<Vec<_>>(),
        "end": end.to_json(),
        "end_polytope": end_poly.as_ref().map(|p| p.to_json()),
    });
    emit(json, &out, || {
        let mut s = format!("{} crossing event(s)\n", events.len());
        for e in &events {
            s.push_str(&format!(
                "  t = {}  wall {:?}  type ({},{})",
                quadric_links::kernel::format_rat(&e.t),
                e.wall.indices,
                e.wall.wall_type.0,
                e.wall.wall_type.1
            ));
            if let Some(f) = &e.flip {
                s.push_str(&format!(
                    "  flip ({},{}) out {:?} in {:?}",
                    f.flip_type.0, f.flip_type.1, f.face_out, f.face_in
                ));
            }
            s.push('\n');
        }
        if let Some(p) = &end_poly {
            s.push_str(&format!(
                "endpoint polytope: n = {}, d = {}\n",
                p.n(),
                p.d()
            ));
        }
        s
    });
    // Check the final translated configuration parses back identically.
    let re = translate(c, &v, &quadric_links::kernel::rat_int(1));
    debug_assert_eq!(re.columns(), end.columns());
    Ok(())
}
