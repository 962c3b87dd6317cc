mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gcmds::oracle::{
    self, angle_grid, s2_transform_spectrum, sphere_metric_identity_check, sphere_spectrum,
    sphere_summaries, OracleSpectrum, S2Profile,
};
use gcmds::space::generate::{ellipse_cloud, random_metric};
use gcmds::space::io::parse_csv_points;
use gcmds::stability::{
    consistency_experiment, gw_upper_bound, kernel_gap_bound_check, permutation_coupling,
    product_coupling, projection_stability_check_with, ConsistencyTarget, Coupling, Strategy,
    ENUMERATION_CAP,
};
use gcmds::{
    centered_kernel, cloud_embedding, cloud_spectrum, distortion, eigendecompose, embed,
    generate, is_euclidean, load_space, negative_trace, product_space, psd_project,
    thickness, trace_norm, FiniteMmSpace, GeneratorSpec, InputFormat, Mode,
    PointCloud,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use output::{csv_matrix, csv_weights, document, num, nums, to_value, Artifacts, Cell, Table};

/// Generalized classical MDS on finite metric measure spaces.
#[derive(Parser)]
#[command(name = "gcmds", version)]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "MDS_MEASURE_THREADS", default_value_t = 1)]
    threads: usize,
    /// Directory for output files; without it the main output goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a space and report its distortion.
    Embed {
        #[command(flatten)]
        space: SpaceArgs,
        /// Embedding dimension.
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Matrix)]
        mode: ModeArg,
        /// Relative tolerance of the Euclidean test.
        #[arg(long, default_value_t = 1e-9)]
        euclid_tol: f64,
    },
    /// Eigendecomposition of the centered kernel.
    Spectrum {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Matrix)]
        mode: ModeArg,
        /// Zero threshold relative to the largest eigenvalue.
        #[arg(long)]
        zero_tol: Option<f64>,
        /// Also write eigenfunctions.csv.
        #[arg(long)]
        eigenfunctions: bool,
    },
    /// Analytic spectra of continuous and structured spaces.
    Oracle {
        #[command(subcommand)]
        space: OracleSpace,
    },
    /// Generate a space.
    Sample {
        #[command(subcommand)]
        generator: Generator,
    },
    /// Shortest-path metric of a weighted edge list.
    Graph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// l2 product of two spaces.
    Product {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Kernel-gap and projection checks over couplings.
    Stability {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
        /// Random permutations per pair, or random pairs when no inputs are given.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Size of the random spaces when no inputs are given.
        #[arg(long, default_value_t = 6)]
        points: usize,
        #[arg(long, value_enum, default_value_t = ProjectionArg::Clip)]
        projection: ProjectionArg,
    },
    /// Sampled spectra against the oracle as the sample grows.
    Consistency {
        #[arg(long, value_enum)]
        target: TargetArg,
        /// Ambient dimension for sphere targets.
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Increasing sample sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of oracle orders to match.
        #[arg(long, default_value_t = 5)]
        orders: usize,
    },
    /// Thickness and covariance spectrum of a point cloud.
    Thickness {
        /// Rows of coordinates.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Also embed in k dimensions and report the distortion.
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    left: Option<PathBuf>,
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    left_weights: Option<PathBuf>,
    #[arg(long)]
    right_weights: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleSpace {
    Circle {
        #[arg(long)]
        max_order: usize,
        /// Angles in the metric-identity grid.
        #[arg(long, default_value_t = 20)]
        angles: usize,
    },
    Sphere {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        max_order: usize,
        #[arg(long, default_value_t = 20)]
        angles: usize,
    },
    Polygon {
        /// The polygon has 4m+2 vertices.
        #[arg(long)]
        m: usize,
    },
    Paley {
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Matrix)]
        mode: ModeArg,
    },
    Torus {
        #[arg(long)]
        factors: usize,
        #[arg(long)]
        max_order: usize,
    },
    /// Metric transforms of the round 2-sphere.
    S2f {
        #[arg(long, value_enum)]
        profile: ProfileArg,
        #[arg(long)]
        max_order: usize,
    },
}

#[derive(Subcommand)]
enum Generator {
    Polygon {
        #[arg(long)]
        n: usize,
    },
    Paley {
        #[arg(long)]
        q: usize,
    },
    Sphere {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Torus {
        #[arg(long)]
        factors: usize,
        #[arg(long)]
        n: usize,
    },
    GluedPaley {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<usize>,
    },
    Ellipse {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Edges,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Matrix,
    Measure,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum StrategyArg {
    /// Optimal permutation when enumerable, product coupling otherwise.
    Auto,
    Product,
    Enumerate,
    /// Product coupling plus random permutations.
    Permutations,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ProjectionArg {
    /// Eigenvalue clipping.
    Clip,
    /// Deliberately wrong projection `2K`, for exercising the failure path.
    Double,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    CircleGrid,
    Circle,
    Sphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Geodesic,
    SqrtEuclidean,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => InputFormat::CsvMatrix,
            FormatArg::Edges => InputFormat::EdgeList,
        }
    }
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Matrix => Mode::Matrix,
            ModeArg::Measure => Mode::Measure,
        }
    }
}

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<gcmds::Error>() {
                Some(g) if g.is_numeric() => ExitCode::from(EXIT_NUMERIC),
                Some(_) => ExitCode::from(EXIT_INPUT),
                None => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
        .context("starting the thread pool")?;
    let mut out = Artifacts::default();
    let code = match cli.command {
        Command::Embed { space, k, mode, euclid_tol } => cmd_embed(&mut out, &space, k, mode.into(), euclid_tol)?,
        Command::Spectrum { space, mode, zero_tol, eigenfunctions } => {
            cmd_spectrum(&mut out, &space, mode.into(), zero_tol, eigenfunctions)?
        }
        Command::Oracle { space } => cmd_oracle(&mut out, space)?,
        Command::Sample { generator } => cmd_sample(&mut out, generator)?,
        Command::Graph { input, weights } => {
            let args = SpaceArgs { input, format: FormatArg::Edges, weights };
            let x = load(&args)?;
            write_space(&mut out, "graph", &x, None)?;
            ExitCode::SUCCESS
        }
        Command::Product { pair } => {
            let (x, y) = load_pair(&pair)?.ok_or_else(|| usage("product needs --left and --right"))?;
            write_space(&mut out, "product", &product_space(&x, &y)?, None)?;
            ExitCode::SUCCESS
        }
        Command::Stability { pair, strategy, trials, seed, points, projection } => {
            cmd_stability(&mut out, &pair, strategy, trials, seed, points, projection)?
        }
        Command::Consistency { target, d, sizes, seed, orders } => {
            cmd_consistency(&mut out, target, d, &sizes, seed, orders)?
        }
        Command::Thickness { input, weights, k } => cmd_thickness(&mut out, &input, weights.as_deref(), k)?,
    };
    out.emit(cli.out.as_deref())?;
    Ok(code)
}

fn usage(msg: &str) -> anyhow::Error {
    gcmds::Error::InvalidSpec(msg.to_string()).into()
}

fn load(args: &SpaceArgs) -> Result<FiniteMmSpace> {
    load_space(&args.input, args.format.into(), args.weights.as_deref())
        .with_context(|| format!("loading {}", args.input.display()))
}

fn load_pair(p: &PairArgs) -> Result<Option<(FiniteMmSpace, FiniteMmSpace)>> {
    match (&p.left, &p.right) {
        (None, None) => Ok(None),
        (Some(l), Some(r)) => {
            let x = load(&SpaceArgs { input: l.clone(), format: p.format, weights: p.left_weights.clone() })?;
            let y = load(&SpaceArgs { input: r.clone(), format: p.format, weights: p.right_weights.clone() })?;
            Ok(Some((x, y)))
        }
        _ => Err(usage("--left and --right go together")),
    }
}

fn cmd_embed(out: &mut Artifacts, args: &SpaceArgs, k: usize, mode: Mode, tol: f64) -> Result<ExitCode> {
    let x = load(args)?;
    let spec = eigendecompose(&centered_kernel(&x, mode), None)?;
    let e = embed(&spec, k)?;
    let full = embed(&spec, spec.pr())?;
    let schoenberg = is_euclidean(&x, tol)?;

    let mut report = document("embed");
    report.insert("mode".into(), mode.to_string().into());
    report.insert("n".into(), x.n().into());
    report.insert("k".into(), k.into());
    report.insert("eigenvalues".into(), nums(spec.eigenvalues().iter()));
    report.insert("pr".into(), spec.pr().into());
    report.insert("nr".into(), spec.nr().into());
    report.insert("dis_k".into(), num(distortion(&x, &e)));
    report.insert("dis".into(), num(distortion(&x, &full)));
    report.insert("tr_neg".into(), num(negative_trace(&spec)));
    report.insert("trace_norm".into(), num(trace_norm(&spec)));
    report.insert("schoenberg".into(), to_value(&schoenberg)?);
    out.json("report.json", Value::Object(report))?;
    out.json("spectrum.json", spectrum_doc(&spec)?)?;
    out.push("coords.csv", csv_matrix(e.coords(), None));
    Ok(ExitCode::SUCCESS)
}

fn spectrum_doc(spec: &gcmds::Spectrum) -> Result<Value> {
    let mut doc = document("spectrum");
    doc.insert("mode".into(), spec.mode().to_string().into());
    doc.insert("n".into(), spec.n().into());
    doc.insert("eigenvalues".into(), nums(spec.eigenvalues().iter()));
    doc.insert("zero_tol".into(), num(spec.zero_tol()));
    doc.insert("pr".into(), spec.pr().into());
    doc.insert("nr".into(), spec.nr().into());
    doc.insert("kernel_dim".into(), spec.kernel_dim().into());
    doc.insert("negative_trace".into(), num(negative_trace(spec)));
    doc.insert("trace_norm".into(), num(trace_norm(spec)));
    Ok(Value::Object(doc))
}

fn cmd_spectrum(
    out: &mut Artifacts,
    args: &SpaceArgs,
    mode: Mode,
    zero_tol: Option<f64>,
    eigenfunctions: bool,
) -> Result<ExitCode> {
    let x = load(args)?;
    let spec = eigendecompose(&centered_kernel(&x, mode), zero_tol)?;
    out.json("spectrum.json", spectrum_doc(&spec)?)?;
    if eigenfunctions {
        out.push("eigenfunctions.csv", csv_matrix(spec.eigenfunctions(), None));
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_doc(space: &str, spectrum: &OracleSpectrum) -> Result<serde_json::Map<String, Value>> {
    let mut doc = document("oracle");
    doc.insert("space".into(), space.into());
    doc.insert("spectrum".into(), to_value(spectrum)?);
    doc.insert("positive_sum".into(), num(spectrum.positive_sum()));
    doc.insert("negative_trace".into(), num(spectrum.negative_trace()));
    doc.insert("trace_norm".into(), num(spectrum.trace_norm()));
    Ok(doc)
}

fn cmd_oracle(out: &mut Artifacts, space: OracleSpace) -> Result<ExitCode> {
    let doc = match space {
        OracleSpace::Circle { max_order, angles } => {
            let s = oracle::circle_spectrum(max_order)?;
            let mut doc = oracle_doc("circle", &s)?;
            let report = sphere_metric_identity_check(2, max_order, &angle_grid(angles))?;
            doc.insert("metric_identity_max_error".into(), num(report.max_error));
            doc
        }
        OracleSpace::Sphere { d, max_order, angles } => {
            let s = sphere_spectrum(d, max_order)?;
            let mut doc = oracle_doc("sphere", &s)?;
            doc.insert("d".into(), d.into());
            if d >= 3 {
                doc.insert("summaries".into(), to_value(&sphere_summaries(d, max_order)?)?);
            }
            let report = sphere_metric_identity_check(d, max_order, &angle_grid(angles))?;
            doc.insert("metric_identity_max_error".into(), num(report.max_error));
            doc.insert("metric_identity".into(), to_value(&report)?);
            doc
        }
        OracleSpace::Polygon { m } => {
            let s = oracle::polygon_spectrum(m)?;
            let mut doc = oracle_doc("polygon", &s)?;
            doc.insert("m".into(), m.into());
            doc.insert("points".into(), (4 * m + 2).into());
            doc
        }
        OracleSpace::Paley { q, mode } => {
            let mode = Mode::from(mode);
            let s = oracle::paley_spectrum(q, mode)?;
            let mut doc = oracle_doc("paley", &s)?;
            doc.insert("q".into(), q.into());
            doc.insert("mode".into(), mode.to_string().into());
            doc
        }
        OracleSpace::Torus { factors, max_order } => {
            let s = oracle::torus_spectrum(factors, max_order)?;
            let mut doc = oracle_doc("torus", &s)?;
            doc.insert("factors".into(), factors.into());
            doc
        }
        OracleSpace::S2f { profile, max_order } => {
            let p = match profile {
                ProfileArg::Geodesic => S2Profile::Geodesic,
                ProfileArg::SqrtEuclidean => S2Profile::SqrtEuclidean,
            };
            let s = s2_transform_spectrum(max_order, p)?;
            let mut doc = oracle_doc("s2f", &s)?;
            doc.insert("profile".into(), p.name().into());
            doc
        }
    };
    out.json("oracle.json", Value::Object(doc))?;
    Ok(ExitCode::SUCCESS)
}

fn write_space(out: &mut Artifacts, generator: &str, x: &FiniteMmSpace, seed: Option<u64>) -> Result<()> {
    let comment = seed.map(|s| format!("seed={s}"));
    out.push("dist.csv", csv_matrix(x.dist(), comment.as_deref()));
    out.push("weights.csv", csv_weights(x.weights().as_slice()));
    let mut meta = document("sample");
    meta.insert("generator".into(), generator.into());
    meta.insert("n".into(), x.n().into());
    meta.insert("seed".into(), seed.map_or(Value::Null, Value::from));
    meta.insert("diameter".into(), num(x.diameter()));
    out.json("meta.json", Value::Object(meta))?;
    Ok(())
}

fn cmd_sample(out: &mut Artifacts, generator: Generator) -> Result<ExitCode> {
    let (name, spec, seed) = match generator {
        Generator::Polygon { n } => ("polygon", GeneratorSpec::Polygon { n }, None),
        Generator::Paley { q } => ("paley", GeneratorSpec::Paley { q }, None),
        Generator::Sphere { d, n, seed } => ("sphere", GeneratorSpec::SphereSample { d, n, seed }, Some(seed)),
        Generator::Torus { factors, n } => ("torus", GeneratorSpec::TorusGrid { factors, n_per_factor: n }, None),
        Generator::GluedPaley { q } => ("glued_paley", GeneratorSpec::GluedPaley { q_list: q }, None),
        Generator::Ellipse { a, b, n, seed } => {
            let cloud = ellipse_cloud(a, b, n, seed)?;
            write_space(out, "ellipse", &cloud.to_space()?, Some(seed))?;
            out.push("points.csv", csv_matrix(cloud.points(), Some(&format!("seed={seed}"))));
            return Ok(ExitCode::SUCCESS);
        }
    };
    write_space(out, name, &generate(&spec)?, seed)?;
    Ok(ExitCode::SUCCESS)
}

fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

fn enumerable(x: &FiniteMmSpace, y: &FiniteMmSpace) -> bool {
    x.n() == y.n() && x.n() <= ENUMERATION_CAP && x.is_uniform() && y.is_uniform()
}

/// Trial index, the two spaces and the named couplings to check.
type Case = (usize, FiniteMmSpace, FiniteMmSpace, Vec<(&'static str, Coupling)>);

fn cmd_stability(
    out: &mut Artifacts,
    pair: &PairArgs,
    strategy: StrategyArg,
    trials: usize,
    seed: u64,
    points: usize,
    projection: ProjectionArg,
) -> Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases: Vec<Case> = Vec::new();
    match load_pair(pair)? {
        Some((x, y)) => {
            let mut couplings = Vec::new();
            match strategy {
                StrategyArg::Product => couplings.push(("product", product_coupling(&x, &y))),
                StrategyArg::Enumerate => {
                    couplings.push(("optimal_permutation", gw_upper_bound(&x, &y, Strategy::Enumerate)?.coupling))
                }
                StrategyArg::Auto if enumerable(&x, &y) => {
                    couplings.push(("optimal_permutation", gw_upper_bound(&x, &y, Strategy::Enumerate)?.coupling))
                }
                StrategyArg::Auto => couplings.push(("product", product_coupling(&x, &y))),
                StrategyArg::Permutations => {
                    couplings.push(("product", product_coupling(&x, &y)));
                    for _ in 0..trials {
                        let perm = random_permutation(x.n(), &mut rng);
                        couplings.push(("permutation", permutation_coupling(&x, &y, &perm)?));
                    }
                }
            }
            cases.push((0, x, y, couplings));
        }
        None => {
            if points < 2 {
                return Err(usage("--points must be at least 2"));
            }
            for t in 0..trials {
                let x = random_metric(points, &mut rng)?;
                let y = random_metric(points, &mut rng)?;
                let perm = random_permutation(points, &mut rng);
                let couplings = vec![
                    ("product", product_coupling(&x, &y)),
                    ("permutation", permutation_coupling(&x, &y, &perm)?),
                ];
                cases.push((t, x, y, couplings));
            }
        }
    }

    let project = |k: &gcmds::CenteredKernel| -> gcmds::Result<nalgebra::DMatrix<f64>> {
        match projection {
            ProjectionArg::Clip => Ok(psd_project(k, None)?.values().clone()),
            ProjectionArg::Double => Ok(k.values() * 2.0),
        }
    };
    let mut table = Table::new(
        Some(&format!("seed={seed}")),
        &[
            "trial", "coupling", "gw_cost", "distance_gap", "kernel_gap", "kernel_bound", "raw_gap",
            "projected_gap", "holds",
        ],
    );
    let mut holds_all = true;
    let mut worst_slack = f64::INFINITY;
    let mut rows = 0usize;
    for (trial, x, y, couplings) in &cases {
        for (name, c) in couplings {
            let kg = kernel_gap_bound_check(x, y, c)?;
            let pj = projection_stability_check_with(x, y, c, project)?;
            let holds = kg.holds && pj.holds;
            holds_all &= holds;
            worst_slack = worst_slack.min(kg.rhs_bound - kg.lhs_kernel_gap).min(pj.raw_gap - pj.projected_gap);
            rows += 1;
            table.row(&[
                Cell::Int(*trial as u64),
                Cell::Text(name.to_string()),
                Cell::Float(kg.gw_cost),
                Cell::Float(kg.distance_gap),
                Cell::Float(kg.lhs_kernel_gap),
                Cell::Float(kg.rhs_bound),
                Cell::Float(pj.raw_gap),
                Cell::Float(pj.projected_gap),
                Cell::Bool(holds),
            ]);
        }
    }
    let mut summary = document("stability");
    summary.insert("seed".into(), seed.into());
    summary.insert("rows".into(), rows.into());
    summary.insert("holds_all".into(), holds_all.into());
    summary.insert("worst_slack".into(), num(worst_slack));
    summary.insert(
        "projection".into(),
        match projection {
            ProjectionArg::Clip => "clip",
            ProjectionArg::Double => "double",
        }
        .into(),
    );
    out.json("summary.json", Value::Object(summary))?;
    out.push("checks.csv", table.finish());
    if !holds_all {
        eprintln!("stability check failed: worst slack {worst_slack:e}");
        return Ok(ExitCode::from(EXIT_CHECK_FAILED));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_consistency(
    out: &mut Artifacts,
    target: TargetArg,
    d: usize,
    sizes: &[usize],
    seed: u64,
    orders: usize,
) -> Result<ExitCode> {
    let target = match target {
        TargetArg::CircleGrid => ConsistencyTarget::CircleGrid,
        TargetArg::Circle => ConsistencyTarget::Circle,
        TargetArg::Sphere => ConsistencyTarget::Sphere { d },
    };
    let rows = consistency_experiment(target, sizes, seed, orders)?;
    let comment = (target != ConsistencyTarget::CircleGrid).then(|| format!("seed={seed}"));
    let mut table = Table::new(
        comment.as_deref(),
        &[
            "n", "order", "oracle", "multiplicity", "observed", "cluster_size", "rel_gap", "median_metric_error",
        ],
    );
    for row in &rows {
        for c in &row.clusters {
            table.row(&[
                Cell::Int(row.n as u64),
                Cell::Int(c.order as u64),
                Cell::Float(c.oracle),
                Cell::Int(c.multiplicity),
                Cell::Float(c.observed),
                Cell::Int(c.cluster_size as u64),
                Cell::Float(c.rel_gap),
                Cell::Float(row.median_metric_error.unwrap_or(f64::NAN)),
            ]);
        }
    }
    out.push("consistency.csv", table.finish());
    Ok(ExitCode::SUCCESS)
}

fn cmd_thickness(out: &mut Artifacts, input: &Path, weights: Option<&Path>, k: Option<usize>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(input)
        .map_err(gcmds::Error::from)
        .with_context(|| format!("reading {}", input.display()))?;
    let points = parse_csv_points(&text)?;
    let cloud = match weights {
        None => PointCloud::uniform(points)?,
        Some(p) => {
            let w = gcmds::space::io::parse_weights(&std::fs::read_to_string(p).map_err(gcmds::Error::from)?)?;
            PointCloud::new(points, gcmds::space::normalize_weights(&w)?)?
        }
    };
    let mut doc = document("thickness");
    doc.insert("n".into(), cloud.n().into());
    doc.insert("dim".into(), cloud.dim().into());
    doc.insert("thickness".into(), num(thickness(&cloud)));
    doc.insert("covariance_eigenvalues".into(), nums(cloud_spectrum(&cloud)?.iter()));
    let coords = match k {
        Some(k) => {
            let e = cloud_embedding(&cloud, k)?;
            doc.insert("k".into(), k.into());
            doc.insert("dis_k".into(), num(distortion(&cloud, &e)));
            Some(e.coords().clone())
        }
        None => None,
    };
    out.json("thickness.json", Value::Object(doc))?;
    if let Some(c) = coords {
        out.push("coords.csv", csv_matrix(&c, None));
    }
    Ok(ExitCode::SUCCESS)
}
