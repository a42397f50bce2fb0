//! One function per CLI subcommand. Each draws all randomness from a generator seeded
//! with `config.seed` and returns a [`Report`].

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::expander::cheeger::MAX_EXACT_VERTICES;
use crate::expander::{
    cayley_graph, coarea_check, concentration_banach, concentration_l1, concentration_median,
    kazhdan_constant, orbit_average, orbit_cloud, verify_kazhdan, BanachPointCloud, Expansion,
    ExpansionKind, Graph, RadiusStatus, Representation, SpectralReport,
};
use crate::finite::{
    enumerate_quotient, orbit_count_product_action, perm_matrix, sign_isometry, sl3_order,
    GeneratorSet, Prime, ProjectivePlane,
};
use crate::matrix::random::unit_vector;
use crate::matrix::{
    gaussian_matrix, haar_unitary, column_inequality_check, column_ratio_search, rng_from_seed, vec_norm, LabRng,
    NormIndex, Variant, C64,
};
use crate::mazur::{
    default_grid, equivariance_check, estimate_modulus, mazur_inequality_suite, random_s1_sphere,
    round_trip_error, sphere_identity_residual, MazurMap, ModulusOfContinuity,
};
use crate::pipeline::{
    exact_diagonal, orbit_sample, perturbed_diagonal, random_rank_one, rank_one_identity,
    run_pipeline, truncated_diagonal, PipelineReport, TensorDecomposition,
};
use crate::report::{Report, RunConfig};

/// Modulus grid resolution used throughout.
pub const GRID_PER_DECADE: usize = 8;

const SPHERE_TOL: f64 = 1e-9;
const ROUND_TRIP_TOL: f64 = 1e-6;
const EQUIVARIANCE_TOL: f64 = 1e-6;

fn rng(config: &RunConfig) -> LabRng {
    rng_from_seed(config.seed)
}

// ---------------------------------------------------------------- plane / group

#[derive(Serialize)]
struct PlaneResult {
    l: u64,
    size: usize,
    expected_size: u64,
    sign_set_size: usize,
    pair_orbits: Vec<usize>,
    points: Vec<[u64; 3]>,
    sign_set: Vec<bool>,
}

pub fn plane(config: &RunConfig, l: u64) -> Result<Report> {
    let plane = ProjectivePlane::build_with_max(l, config.caps.max_prime)?;
    let n = plane.len();
    let pair_orbits = orbit_count_product_action(&plane, &GeneratorSet::elementary())?;
    let expected_size = l * l + l + 1;
    let passed = n as u64 == expected_size && pair_orbits == vec![n, n * (n - 1)];
    let points: Vec<[u64; 3]> = plane.points().iter().map(|p| p.rep()).collect();
    let mut csv = String::from("index,x,y,z,in_sign_set\n");
    for (i, (p, s)) in points.iter().zip(plane.sign_set()).enumerate() {
        let _ = writeln!(csv, "{i},{},{},{},{}", p[0], p[1], p[2], s);
    }
    let result = PlaneResult {
        l,
        size: n,
        expected_size,
        sign_set_size: plane.sign_set_size(),
        pair_orbits,
        points,
        sign_set: plane.sign_set().to_vec(),
    };
    Report::new("projective-plane", config, passed, vec![], &result, csv)
}

#[derive(Serialize)]
struct GroupRow {
    l: u64,
    order: Option<usize>,
    expected: String,
    reduced_generators: usize,
    symmetric: bool,
    verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn group(config: &RunConfig) -> Result<Report> {
    let gens = GeneratorSet::elementary();
    let mut rows = Vec::new();
    for &l in &config.primes {
        let prime = Prime::bounded(l, config.caps.max_prime)?;
        let reduced = gens.reduce(prime)?.len();
        let symmetric = gens.is_symmetric_mod(prime)?;
        let row = match enumerate_quotient(prime, &gens, config.caps.closure_cap) {
            Ok(q) => GroupRow {
                l,
                order: Some(q.len()),
                expected: sl3_order(prime).to_string(),
                reduced_generators: reduced,
                symmetric,
                verified: q.verify().is_ok(),
                error: None,
            },
            Err(e) => GroupRow {
                l,
                order: None,
                expected: sl3_order(prime).to_string(),
                reduced_generators: reduced,
                symmetric,
                verified: false,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    let passed = rows.iter().all(|r| r.verified);
    let mut csv = String::from("l,order,expected,reduced_generators,symmetric,verified\n");
    for r in &rows {
        let order = r.order.map_or(String::new(), |o| o.to_string());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.l, order, r.expected, r.reduced_generators, r.symmetric, r.verified
        );
    }
    Report::new("group-closure", config, passed, vec![], &rows, csv)
}

// ---------------------------------------------------------------- graphs

/// Where a graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    /// Cayley graph of `SL(3, F_l)` for the reduced elementary generators.
    Cayley(u64),
    /// `k4`, `cycle<N>`, `k33`, `petersen`, `complete<N>`.
    Named(String),
    /// Edge-list text, or JSON when the extension is `.json`.
    File(PathBuf),
}

impl GraphSource {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if let Some(l) = t.strip_prefix("cayley") {
            let l = l.trim_start_matches([':', '-', '=']);
            let l: u64 = l
                .parse()
                .map_err(|_| LabError::Parse(format!("bad Cayley prime in '{s}'")))?;
            return Ok(GraphSource::Cayley(l));
        }
        if matches!(t.as_str(), "k4" | "k33" | "petersen")
            || t.starts_with("cycle")
            || t.starts_with("complete")
        {
            return Ok(GraphSource::Named(t));
        }
        Ok(GraphSource::File(PathBuf::from(s)))
    }

    pub fn label(&self) -> String {
        match self {
            GraphSource::Cayley(l) => format!("cayley{l}"),
            GraphSource::Named(n) => n.clone(),
            GraphSource::File(p) => p.display().to_string(),
        }
    }

    pub fn build(&self, config: &RunConfig) -> Result<Graph> {
        let g = match self {
            GraphSource::Cayley(l) => {
                let prime = Prime::bounded(*l, config.caps.max_prime)?;
                let expected = sl3_order(prime);
                if expected > config.caps.max_graph_vertices as u128 {
                    return Err(LabError::GraphTooLarge {
                        n: usize::try_from(expected).unwrap_or(usize::MAX),
                        max: config.caps.max_graph_vertices,
                    });
                }
                let q = enumerate_quotient(
                    prime,
                    &GeneratorSet::elementary(),
                    config.caps.closure_cap,
                )?;
                cayley_graph(&q)?
            }
            GraphSource::Named(name) => named_graph(name)?,
            GraphSource::File(path) => {
                let text = std::fs::read_to_string(path)?;
                if path.extension().is_some_and(|e| e == "json") {
                    Graph::from_json(&text)?
                } else {
                    Graph::from_edge_list(&text)?
                }
            }
        };
        if g.n() > config.caps.max_graph_vertices {
            return Err(LabError::GraphTooLarge {
                n: g.n(),
                max: config.caps.max_graph_vertices,
            });
        }
        Ok(g)
    }
}

fn parse_suffix(name: &str, prefix: &str) -> Result<usize> {
    name[prefix.len()..]
        .parse()
        .map_err(|_| LabError::Parse(format!("bad size in graph name '{name}'")))
}

pub fn named_graph(name: &str) -> Result<Graph> {
    match name {
        "k4" => Ok(Graph::complete(4)),
        "k33" => Graph::complete_bipartite(3, 3),
        "petersen" => Ok(Graph::petersen()),
        n if n.starts_with("cycle") => {
            let k = parse_suffix(n, "cycle")?;
            if k < 3 {
                return Err(LabError::Graph("a cycle needs at least 3 vertices".into()));
            }
            Ok(Graph::cycle(k))
        }
        n if n.starts_with("complete") => {
            let k = parse_suffix(n, "complete")?;
            if k < 2 {
                return Err(LabError::Graph(
                    "complete graph needs at least 2 vertices".into(),
                ));
            }
            Ok(Graph::complete(k))
        }
        other => Err(LabError::Parse(format!("unknown graph '{other}'"))),
    }
}

/// The four small graphs with exact expansion constants.
pub fn small_graphs() -> Vec<GraphSource> {
    ["k4", "cycle6", "k33", "petersen"]
        .iter()
        .map(|s| GraphSource::Named(s.to_string()))
        .collect()
}

#[derive(Serialize)]
struct SpectralResult {
    source: String,
    #[serde(flatten)]
    report: SpectralReport,
    sandwich_holds: bool,
}

pub fn spectral(config: &RunConfig, source: &GraphSource) -> Result<Report> {
    let g = source.build(config)?;
    let report = SpectralReport::compute(
        &g,
        g.n() <= config.caps.max_exact_vertices.min(MAX_EXACT_VERTICES),
    )?;
    let sandwich_holds = report.sandwich_holds();
    let passed = sandwich_holds && report.gap > 1e-9;
    let csv = report.to_csv();
    let result = SpectralResult {
        source: source.label(),
        report,
        sandwich_holds,
    };
    Report::new("cayley-spectrum", config, passed, vec![], &result, csv)
}

// ---------------------------------------------------------------- Mazur maps

#[derive(Serialize)]
struct ModulusSummary {
    map: MazurMap,
    samples: usize,
    max_excess_over_theory: f64,
    below_theory: bool,
    monotone: bool,
}

#[derive(Serialize)]
struct MazurResult {
    trials: usize,
    dims: (usize, usize),
    max_sphere_residual: f64,
    max_round_trip: f64,
    max_equivariance_defect: f64,
    inequality_pairs: usize,
    inequality_failures: usize,
    max_modulus_ratio: f64,
    max_root_ratio: f64,
    max_image_ratio: f64,
    moduli: Vec<ModulusSummary>,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub fn mazur(config: &RunConfig) -> Result<Report> {
    let mut rng = rng(config);
    let (lo, hi) = config.dims;
    let mut res = MazurResult {
        trials: config.trials,
        dims: config.dims,
        max_sphere_residual: 0.0,
        max_round_trip: 0.0,
        max_equivariance_defect: 0.0,
        inequality_pairs: 0,
        inequality_failures: 0,
        max_modulus_ratio: 0.0,
        max_root_ratio: 0.0,
        max_image_ratio: 0.0,
        moduli: Vec::new(),
    };
    for _ in 0..config.trials {
        let n = rng.random_range(lo..=hi);
        let t = random_s1_sphere(&mut rng, n)?;
        res.max_sphere_residual = res.max_sphere_residual.max(sphere_identity_residual(&t)?);
        res.max_round_trip = res.max_round_trip.max(round_trip_error(&t)?);
        let u = haar_unitary(&mut rng, n);
        res.max_equivariance_defect = res.max_equivariance_defect.max(equivariance_check(&t, &u)?);

        let scale = 10f64.powf(rng.random_range(-6.0..0.0));
        let noise = gaussian_matrix(&mut rng, n, n).scale_real(scale);
        let s = t.add(&noise)?;
        let s = s
            .scale_real(1.0 / crate::matrix::schatten_norm(&s, crate::matrix::SchattenOrder::One)?);
        let suite = mazur_inequality_suite(&s, &t)?;
        res.inequality_pairs += 1;
        if !suite.all_hold() {
            res.inequality_failures += 1;
        }
        res.max_modulus_ratio = res
            .max_modulus_ratio
            .max(ratio(suite.modulus_gap.lhs, suite.modulus_gap.rhs));
        res.max_root_ratio = res
            .max_root_ratio
            .max(ratio(suite.root_gap.lhs, suite.root_gap.rhs));
        res.max_image_ratio = res
            .max_image_ratio
            .max(ratio(suite.image_gap.lhs, suite.image_gap.rhs));
    }
    // equivariance under the plane permutations and the sign isometry
    for l in [2u64, 3] {
        let plane = ProjectivePlane::build(l)?;
        let n = plane.len();
        let t = random_s1_sphere(&mut rng, n)?;
        for g in GeneratorSet::elementary().reduce(plane.prime())? {
            res.max_equivariance_defect = res
                .max_equivariance_defect
                .max(equivariance_check(&t, &perm_matrix(&g, &plane)?)?);
        }
        res.max_equivariance_defect = res
            .max_equivariance_defect
            .max(equivariance_check(&t, &sign_isometry(&plane))?);
    }
    let grid = default_grid(GRID_PER_DECADE);
    let mut csv = String::from("map,t,envelope,theory_bound\n");
    for map in MazurMap::ALL {
        let m = estimate_modulus(&mut rng, map, config.samples, config.dims, &grid)?;
        let excess = m
            .grid
            .iter()
            .map(|pt| pt.envelope - map.theory_bound(pt.t))
            .fold(f64::NEG_INFINITY, f64::max);
        for pt in &m.grid {
            let _ = writeln!(
                csv,
                "{map:?},{:e},{:e},{:e}",
                pt.t,
                pt.envelope,
                map.theory_bound(pt.t)
            );
        }
        res.moduli.push(ModulusSummary {
            map,
            samples: config.samples,
            max_excess_over_theory: excess,
            below_theory: excess <= 1e-9,
            monotone: m.is_monotone(),
        });
    }
    let passed = res.max_sphere_residual <= SPHERE_TOL
        && res.max_round_trip <= ROUND_TRIP_TOL
        && res.max_equivariance_defect <= EQUIVARIANCE_TOL
        && res.inequality_failures == 0
        && res.moduli.iter().all(|m| m.below_theory && m.monotone);
    Report::new("mazur-suite", config, passed, vec![], &res, csv)
}

/// Forward-map modulus used by the pipeline, estimated from the config's seed and sample count.
pub fn pipeline_modulus(config: &RunConfig) -> Result<ModulusOfContinuity> {
    let mut rng = rng_from_seed(config.seed ^ 0x006d_6f64_756c_7573);
    estimate_modulus(
        &mut rng,
        MazurMap::NcForward,
        config.samples,
        (2, 8),
        &default_grid(GRID_PER_DECADE),
    )
}

// ---------------------------------------------------------------- column inequalities

#[derive(Serialize)]
struct VariantTally {
    variant: Variant,
    holds: usize,
    max_ratio: f64,
}

#[derive(Serialize)]
struct ColumnInequalityResult {
    p: NormIndex,
    rows: usize,
    cols: usize,
    trials: usize,
    estimate_only: bool,
    variants: Vec<VariantTally>,
}

pub fn column_inequalities(config: &RunConfig, rows: usize, cols: usize) -> Result<Report> {
    if rows == 0 || cols == 0 {
        return Err(LabError::EmptyMatrix);
    }
    let p = config.p;
    if !p.is_exact() {
        let result = ColumnInequalityResult {
            p,
            rows,
            cols,
            trials: 0,
            estimate_only: true,
            variants: vec![],
        };
        let notes = vec![format!(
            "p = {p} has no closed-form operator norm; checks are not asserted"
        )];
        return Report::new(
            "column-norm-inequalities",
            config,
            true,
            notes,
            &result,
            "variant,holds,trials,max_ratio\n".into(),
        );
    }
    let mut rng = rng(config);
    let mut tallies: Vec<VariantTally> = Variant::ALL
        .iter()
        .map(|&variant| VariantTally {
            variant,
            holds: 0,
            max_ratio: 0.0,
        })
        .collect();
    for _ in 0..config.trials {
        let x = gaussian_matrix(&mut rng, rows, cols);
        let y = gaussian_matrix(&mut rng, rows, cols);
        for t in &mut tallies {
            let c = column_inequality_check(&x, &y, p, t.variant)?;
            if c.holds {
                t.holds += 1;
            }
            t.max_ratio = t.max_ratio.max(ratio(c.lhs, c.rhs));
        }
    }
    let passed = tallies.iter().all(|t| t.holds == config.trials);
    let mut csv = String::from("variant,holds,trials,max_ratio\n");
    for t in &tallies {
        let _ = writeln!(
            csv,
            "{:?},{},{},{:e}",
            t.variant, t.holds, config.trials, t.max_ratio
        );
    }
    let result = ColumnInequalityResult {
        p,
        rows,
        cols,
        trials: config.trials,
        estimate_only: false,
        variants: tallies,
    };
    Report::new(
        "column-norm-inequalities",
        config,
        passed,
        vec![],
        &result,
        csv,
    )
}

#[derive(Serialize)]
struct ColumnRatioResult {
    square: crate::matrix::RatioSearch,
    square_asserted: bool,
    requested: crate::matrix::RatioSearch,
    requested_asserted: bool,
}

/// The ratio is asserted to be at most one for square shapes with exact norms and for
/// `p` in `{1, 2}`; other shapes only record the largest ratio seen.
pub fn column_ratio(config: &RunConfig, rows: usize, cols: usize) -> Result<Report> {
    if rows == 0 || cols == 0 {
        return Err(LabError::EmptyMatrix);
    }
    let p = config.p;
    let mut rng = rng(config);
    let square = column_ratio_search(&mut rng, p, config.trials, rows, rows)?;
    let requested = column_ratio_search(&mut rng, p, config.trials, rows, cols)?;
    let square_asserted = p.is_exact();
    let requested_asserted =
        matches!(p, NormIndex::One | NormIndex::Two) || (rows == cols && p.is_exact());
    let ok = |r: &crate::matrix::RatioSearch| r.max_ratio <= 1.0 + 1e-9;
    let passed = (!square_asserted || ok(&square)) && (!requested_asserted || ok(&requested));
    let mut notes = vec![];
    if !requested_asserted {
        notes.push(format!(
            "{rows}x{cols} at p = {p}: largest ratio {:.6} recorded, not asserted",
            requested.max_ratio
        ));
    }
    let mut csv = String::from("shape,rows,cols,trials,max_ratio,asserted\n");
    let _ = writeln!(
        csv,
        "square,{rows},{rows},{},{:e},{square_asserted}",
        config.trials, square.max_ratio
    );
    let _ = writeln!(
        csv,
        "requested,{rows},{cols},{},{:e},{requested_asserted}",
        config.trials, requested.max_ratio
    );
    let result = ColumnRatioResult {
        square,
        square_asserted,
        requested,
        requested_asserted,
    };
    Report::new("column-norm-ratio", config, passed, notes, &result, csv)
}

// ---------------------------------------------------------------- co-area and concentration

fn expansion_for(g: &Graph, notes: &mut Vec<String>, label: &str) -> Result<Expansion> {
    let h = Expansion::best_for(g)?;
    if h.kind == ExpansionKind::SpectralLower {
        notes.push(format!(
            "{label}: exact expansion constant unavailable ({} vertices); spectral lower bound {:.6} used, which only weakens the bounds",
            g.n(),
            h.h
        ));
    }
    Ok(h)
}

fn random_sparse_function(rng: &mut LabRng, n: usize) -> Vec<f64> {
    let support = rng.random_range(0..=n / 2);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut f = vec![0.0; n];
    for &v in &idx[..support] {
        f[v] = rng.random_range(0.0..1.0);
    }
    f
}

#[derive(Serialize)]
struct CoareaRow {
    graph: String,
    n: usize,
    k: usize,
    expansion: Expansion,
    trials: usize,
    holds: usize,
    min_slack: f64,
}

pub fn coarea(config: &RunConfig, sources: &[GraphSource]) -> Result<Report> {
    let mut rng = rng(config);
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for src in sources {
        let g = src.build(config)?;
        let h = expansion_for(&g, &mut notes, &src.label())?;
        let mut holds = 0;
        let mut min_slack = f64::INFINITY;
        for _ in 0..config.trials {
            let f = random_sparse_function(&mut rng, g.n());
            let c = coarea_check(&g, &f, h)?;
            if c.holds {
                holds += 1;
            }
            min_slack = min_slack.min(c.lhs - c.rhs);
        }
        rows.push(CoareaRow {
            graph: src.label(),
            n: g.n(),
            k: g.k(),
            expansion: h,
            trials: config.trials,
            holds,
            min_slack,
        });
    }
    let passed = rows.iter().all(|r| r.holds == r.trials);
    let mut csv = String::from("graph,n,k,h,h_kind,trials,holds,min_slack\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{:e},{:?},{},{},{:e}",
            r.graph, r.n, r.k, r.expansion.h, r.expansion.kind, r.trials, r.holds, r.min_slack
        );
    }
    Report::new("coarea", config, passed, notes, &rows, csv)
}

/// Kind of vertex cloud fed to the concentration checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudKind {
    /// Every vertex maps to the same vector.
    Constant,
    /// `g -> P(g) xi` for the permutation representation of the plane; Cayley graphs only.
    Orbit,
    /// Independent random `+-1` labels per vertex, rescaled to Lipschitz constant one.
    Random,
}

impl CloudKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "constant" => Ok(CloudKind::Constant),
            "orbit" => Ok(CloudKind::Orbit),
            "random" => Ok(CloudKind::Random),
            other => Err(LabError::Parse(format!(
                "unknown cloud '{other}' (constant, orbit or random)"
            ))),
        }
    }
}

const CLOUD_DIM: usize = 4;

fn make_cloud(
    rng: &mut LabRng,
    g: &Graph,
    source: &GraphSource,
    kind: CloudKind,
) -> Result<Vec<Vec<C64>>> {
    match kind {
        CloudKind::Constant => {
            let v: Vec<C64> = unit_vector(rng, CLOUD_DIM);
            Ok(vec![v; g.n()])
        }
        CloudKind::Random => {
            let pts: Vec<Vec<C64>> = (0..g.n())
                .map(|_| {
                    (0..CLOUD_DIM)
                        .map(|_| C64::new(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0))
                        .collect()
                })
                .collect();
            let lip = BanachPointCloud::new(g, pts.clone(), NormIndex::One)?.lip();
            let c = if lip > 0.0 { 1.0 / lip } else { 1.0 };
            Ok(pts
                .into_iter()
                .map(|p| p.into_iter().map(|z| z * c).collect())
                .collect())
        }
        CloudKind::Orbit => {
            let GraphSource::Cayley(l) = source else {
                return Err(LabError::Precondition(
                    "orbit clouds need a Cayley graph source".into(),
                ));
            };
            let prime = Prime::new(*l)?;
            let plane = ProjectivePlane::build(*l)?;
            let q = enumerate_quotient(
                prime,
                &GeneratorSet::elementary(),
                crate::finite::DEFAULT_CLOSURE_CAP,
            )?;
            let xi = unit_vector(rng, plane.len());
            orbit_cloud(&q, &plane, &xi)
        }
    }
}

fn scale_cloud(pts: Vec<Vec<C64>>, radius: f64) -> Vec<Vec<C64>> {
    let top = pts
        .iter()
        .map(|p| vec_norm(p, NormIndex::Two))
        .fold(0.0, f64::max);
    if top == 0.0 {
        return pts;
    }
    let c = radius / top;
    pts.into_iter()
        .map(|p| p.into_iter().map(|z| z * c).collect())
        .collect()
}

#[derive(Serialize, Default)]
struct ConcentrationResult {
    graph: String,
    n: usize,
    k: usize,
    expansion: Option<Expansion>,
    cloud: Option<CloudKind>,
    radius: f64,
    trials: usize,
    l1_holds: usize,
    l1_max_ratio: f64,
    median_holds: usize,
    median_max_ratio: f64,
    banach_certified: usize,
    banach_inconclusive: usize,
    banach_holds: usize,
    banach_consistent: usize,
    banach_embedded_holds: usize,
    banach_radius: Option<f64>,
    banach_radius_theory: Option<f64>,
    banach_max_ratio: f64,
}

/// The `l_1` and median bounds plus the Banach-space bound on the same clouds.
///
/// `radius` rescales each cloud into the `l_2` ball for the Banach check; a radius above one
/// is rejected there.
pub fn concentration(
    config: &RunConfig,
    source: &GraphSource,
    kind: CloudKind,
    radius: f64,
) -> Result<Report> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(LabError::Precondition(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let mut rng = rng(config);
    let g = source.build(config)?;
    let mut notes = Vec::new();
    let h = expansion_for(&g, &mut notes, &source.label())?;
    let grid = default_grid(GRID_PER_DECADE);
    let fwd = estimate_modulus(
        &mut rng,
        MazurMap::Classical2To1,
        config.samples,
        (1, 8),
        &grid,
    )?;
    let inv = estimate_modulus(
        &mut rng,
        MazurMap::Classical1To2,
        config.samples,
        (1, 8),
        &grid,
    )?;
    let trials = if kind == CloudKind::Constant {
        1
    } else {
        config.trials
    };
    let mut res = ConcentrationResult {
        graph: source.label(),
        n: g.n(),
        k: g.k(),
        expansion: Some(h),
        cloud: Some(kind),
        radius,
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let pts = make_cloud(&mut rng, &g, source, kind)?;

        let l1 = BanachPointCloud::new(&g, pts.clone(), NormIndex::One)?;
        let c = concentration_l1(&g, &l1, h)?;
        res.l1_holds += c.holds as usize;
        res.l1_max_ratio = res.l1_max_ratio.max(ratio(c.mean_dev, c.bound));

        // distance to a random base point is a nonnegative function with the same Lipschitz constant
        let base = rng.random_range(0..g.n());
        let f: Vec<f64> = pts
            .iter()
            .map(|p| {
                let d: Vec<C64> = p.iter().zip(&pts[base]).map(|(a, b)| a - b).collect();
                vec_norm(&d, NormIndex::One)
            })
            .collect();
        let r0 = crate::expander::concentration::median_anchor(&f);
        let m = concentration_median(&g, &f, r0, h)?;
        res.median_holds += m.holds as usize;
        res.median_max_ratio = res.median_max_ratio.max(ratio(m.mean, m.bound));

        let ball = BanachPointCloud::new(&g, scale_cloud(pts, radius), NormIndex::Two)?;
        let b = concentration_banach(&g, &ball, h, &fwd, &inv)?;
        match b.status {
            RadiusStatus::Certified => res.banach_certified += 1,
            RadiusStatus::Inconclusive => res.banach_inconclusive += 1,
        }
        res.banach_holds += (b.holds == Some(true)) as usize;
        res.banach_consistent += b.consistent as usize;
        res.banach_embedded_holds += b.embedded.holds as usize;
        res.banach_radius = b.r;
        res.banach_radius_theory = b.r_theory;
        if let Some(r) = b.r {
            res.banach_max_ratio = res.banach_max_ratio.max(ratio(b.mean_dev, r * b.lip));
        }
    }
    if res.banach_inconclusive > 0 {
        notes.push("measured moduli could not certify a radius on the search grid".into());
    }
    let passed = res.l1_holds == trials
        && res.median_holds == trials
        && res.banach_holds == res.banach_certified
        && res.banach_consistent == trials
        && res.banach_embedded_holds == trials;
    let mut csv = String::from("check,trials,holds,max_ratio\n");
    let _ = writeln!(csv, "l1,{trials},{},{:e}", res.l1_holds, res.l1_max_ratio);
    let _ = writeln!(
        csv,
        "median,{trials},{},{:e}",
        res.median_holds, res.median_max_ratio
    );
    let _ = writeln!(
        csv,
        "banach,{trials},{},{:e}",
        res.banach_holds, res.banach_max_ratio
    );
    Report::new("concentration", config, passed, notes, &res, csv)
}

// ---------------------------------------------------------------- invariant vectors

#[derive(Serialize)]
struct InvariantRow {
    l: u64,
    representation: &'static str,
    dim: usize,
    orbit_size: usize,
    invariant_dim: usize,
    expected_invariant_dim: usize,
    kappa: f64,
    r_eff: Option<f64>,
    trials: usize,
    max_defect: f64,
    bound_holds: usize,
    max_bound_ratio: f64,
    sampling_max_ratio: f64,
    sampling_holds: bool,
}

/// Orbit averages and spectral constants for the permutation representation and its tensor square.
pub fn invariant(config: &RunConfig) -> Result<Report> {
    let mut rng = rng(config);
    let mut rows = Vec::new();
    for &l in &config.primes {
        let prime = Prime::bounded(l, config.caps.max_prime)?;
        let plane = ProjectivePlane::build(l)?;
        let gens = GeneratorSet::elementary().reduce(prime)?;
        let base = Representation::permutation(&plane, &gens)?;
        for (name, rep, expected) in [
            ("permutation", base.clone(), 1usize),
            ("tensor_square", base.tensor_square(), 2),
        ] {
            let kz = kazhdan_constant(&rep)?;
            let image = rep.enumerate_image(config.caps.closure_cap)?;
            let mut max_defect = 0.0f64;
            let mut bound_holds = 0;
            let mut max_bound_ratio = 0.0f64;
            let trials = config.trials.min(100);
            for _ in 0..trials {
                let xi = unit_vector(&mut rng, rep.dim());
                let out = orbit_average(&rep, &image, &xi, kz.r_eff)?;
                max_defect = max_defect.max(out.defect);
                if out.holds == Some(true) {
                    bound_holds += 1;
                }
                if let Some(b) = out.bound {
                    max_bound_ratio = max_bound_ratio.max(ratio(out.distance, b));
                }
            }
            let sampling = verify_kazhdan(&mut rng, &rep, &kz, trials)?;
            rows.push(InvariantRow {
                l,
                representation: name,
                dim: rep.dim(),
                orbit_size: image.len(),
                invariant_dim: kz.invariant_dim,
                expected_invariant_dim: expected,
                kappa: kz.kappa,
                r_eff: kz.r_eff,
                trials,
                max_defect,
                bound_holds,
                max_bound_ratio,
                sampling_max_ratio: sampling.max_ratio,
                sampling_holds: sampling.holds,
            });
        }
    }
    let passed = rows.iter().all(|r| {
        r.invariant_dim == r.expected_invariant_dim
            && r.max_defect <= crate::expander::kazhdan::INVARIANCE_TOL
            && r.bound_holds == r.trials
            && r.sampling_holds
            && r.kappa > 0.0
    });
    let mut csv = String::from(
        "l,representation,dim,orbit_size,invariant_dim,kappa,r_eff,max_defect,bound_holds,trials\n",
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:e},{:e},{:e},{},{}",
            r.l,
            r.representation,
            r.dim,
            r.orbit_size,
            r.invariant_dim,
            r.kappa,
            r.r_eff.unwrap_or(f64::NAN),
            r.max_defect,
            r.bound_holds,
            r.trials
        );
    }
    Report::new("invariant-vector", config, passed, vec![], &rows, csv)
}

// ---------------------------------------------------------------- pipeline

/// Built-in candidate decompositions on the configured primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    ExactDiagonal,
    Rank1,
    Truncated,
    Perturbed,
    OrbitSample,
    Sweep,
}

impl Builtin {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact-diagonal" | "exact" => Ok(Builtin::ExactDiagonal),
            "rank1" => Ok(Builtin::Rank1),
            "truncated" => Ok(Builtin::Truncated),
            "perturbed" => Ok(Builtin::Perturbed),
            "orbit-sample" => Ok(Builtin::OrbitSample),
            "sweep" => Ok(Builtin::Sweep),
            other => Err(LabError::Parse(format!(
                "unknown builtin '{other}' (exact-diagonal, rank1, truncated, perturbed, orbit-sample, sweep)"
            ))),
        }
    }
}

/// The twenty candidates of the soundness sweep.
pub fn sweep_candidates(config: &RunConfig) -> Result<Vec<(String, TensorDecomposition)>> {
    let mut rng = rng(config);
    let (primes, p) = (&config.primes, config.p);
    let mut out = Vec::new();
    for eta in [1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1] {
        out.push((
            format!("perturbed:{eta:e}"),
            perturbed_diagonal(&mut rng, primes, p, eta)?,
        ));
    }
    for keep in [0.95, 0.8, 0.5, 0.3] {
        out.push((
            format!("truncated:{keep}"),
            truncated_diagonal(&mut rng, primes, p, keep)?,
        ));
    }
    for k in [1usize, 2, 3, 5, 8, 13, 50, 200] {
        out.push((
            format!("orbit-sample:{k}"),
            orbit_sample(&mut rng, primes, p, k, 20)?,
        ));
    }
    for i in 0..2 {
        out.push((
            format!("random-rank1:{i}"),
            random_rank_one(&mut rng, primes, p)?,
        ));
    }
    Ok(out)
}

/// A single built-in candidate; `Sweep` is rejected.
pub fn builtin_candidate(config: &RunConfig, b: Builtin) -> Result<TensorDecomposition> {
    let mut rng = rng(config);
    let (primes, p) = (&config.primes, config.p);
    match b {
        Builtin::ExactDiagonal => exact_diagonal(primes, p),
        Builtin::Rank1 => rank_one_identity(primes, p),
        Builtin::Truncated => truncated_diagonal(&mut rng, primes, p, 0.5),
        Builtin::Perturbed => perturbed_diagonal(&mut rng, primes, p, 1e-3),
        Builtin::OrbitSample => orbit_sample(&mut rng, primes, p, 8, 20),
        Builtin::Sweep => Err(LabError::Precondition(
            "sweep is not a single candidate".into(),
        )),
    }
}

/// Where the pipeline's decomposition comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineInput {
    Builtin(Builtin),
    File(PathBuf),
}

#[derive(Serialize)]
struct SweepRow {
    candidate: String,
    rank: usize,
    max_bound: Option<f64>,
    all_vacuous: bool,
    consistent: bool,
    report: PipelineReport,
}

fn single_report(
    config: &RunConfig,
    t: &TensorDecomposition,
    modulus: &ModulusOfContinuity,
) -> Result<Report> {
    let rep = run_pipeline(t, &t.primes, modulus)?;
    let mut notes = Vec::new();
    for o in &rep.primes {
        if let Some(e) = &o.error {
            notes.push(format!("l = {}: {e}", o.l));
        }
    }
    for r in rep.records() {
        if r.vacuous {
            notes.push(format!(
                "l = {}: delta_1 = {:.4} gives no obstruction at this defect level",
                r.l, r.delta1
            ));
        }
    }
    let csv = rep.to_csv();
    Report::new("rank-obstruction", config, rep.consistent, notes, &rep, csv)
}

/// Pipeline report for a decomposition already in memory.
pub fn pipeline_for(config: &RunConfig, t: &TensorDecomposition) -> Result<Report> {
    single_report(config, t, &pipeline_modulus(config)?)
}

pub fn pipeline(config: &RunConfig, input: &PipelineInput) -> Result<Report> {
    let modulus = pipeline_modulus(config)?;
    match input {
        PipelineInput::File(path) => {
            let t = TensorDecomposition::from_json(&std::fs::read_to_string(path)?)?;
            single_report(config, &t, &modulus)
        }
        PipelineInput::Builtin(Builtin::Sweep) => {
            let mut rows = Vec::new();
            let mut csv = String::from("candidate,l,r,eps,delta0,delta1,lambda,mu,bound\n");
            for (name, t) in sweep_candidates(config)? {
                let rep = run_pipeline(&t, &t.primes, &modulus)?;
                for line in rep.to_csv().lines().skip(1) {
                    let _ = writeln!(csv, "{name},{line}");
                }
                let all_vacuous = rep.records().all(|r| r.vacuous);
                rows.push(SweepRow {
                    candidate: name,
                    rank: rep.rank,
                    max_bound: rep.max_bound(),
                    all_vacuous,
                    consistent: rep.consistent,
                    report: rep,
                });
            }
            let passed = rows.iter().all(|r| r.consistent);
            Report::new("rank-obstruction-sweep", config, passed, vec![], &rows, csv)
        }
        PipelineInput::Builtin(b) => {
            single_report(config, &builtin_candidate(config, *b)?, &modulus)
        }
    }
}
