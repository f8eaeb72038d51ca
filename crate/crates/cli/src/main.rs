//! orbitlab: reproducible experiments in arithmetic dynamics over Q.
//!
//! Every command reads an optional TOML config plus flags (flags win),
//! prints its primary artifact to stdout, and with `--out-dir` also writes
//! the artifact files and a run manifest. Data outputs carry the config
//! hash and artifact version but no timestamps, so reruns of a completed
//! experiment are byte-identical; timestamps live in the manifest only.

mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::{parse_prime_range, ExperimentConfig, SystemEntry};
use orbitlab_core::dml::{
    find_padic_certificate, fit_progressions, orbit_membership_scan, CertificateMode, DmlError,
    PadicCertificate, SplitSystem, Subvariety,
};
use orbitlab_core::exact::{is_prime_u64, prime_range};
use orbitlab_core::forest::{build_forest_modp, forest_to_json, ForestError};
use orbitlab_core::lattes::{point_order_modp, ECPoint, EllipticCurve, LattesError};
use orbitlab_core::orbit::{nonperiodic_prime_scan, q_periodicity, OrbitError, QOrbitStatus};
use orbitlab_core::proj::{MapError, ProjPoint, RationalMap};
use orbitlab_core::stats::DensityEstimate;
use orbitlab_core::sweep::{
    independence_report, records_to_csv, SweepError, SweepRunner, TargetSystem,
};

const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
const CACHE_ENV: &str = "ORBITLAB_CACHE_DIR";

#[derive(Parser)]
#[command(
    name = "orbitlab",
    version,
    about = "Arithmetic-dynamics experiments over Q: prime sweeps, certificates, progression covers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derangement sweep over a prime range: CSV records plus a density summary
    Sweep(SweepArgs),
    /// Scan primes witnessing non-periodicity of a point, as JSONL
    Certify(CertifyArgs),
    /// Orbit-membership scan, progression cover, optional p-adic certificate
    Dml(DmlArgs),
    /// Density of primes where q^n divides the reduced point order
    Lattes(LattesArgs),
    /// Preimage forest of a target mod p, as JSON
    Forest(ForestArgs),
    /// Joint-versus-marginal miss ratio across several targets
    Independence(IndependenceArgs),
}

/// Flags shared by every command. Each one overrides the matching config
/// field; the cache directory falls back to ORBITLAB_CACHE_DIR.
#[derive(Args)]
struct CommonArgs {
    /// TOML experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Half-open prime range `lo..hi`
    #[arg(long)]
    primes: Option<String>,
    /// Directory for output files and the run manifest
    #[arg(long)]
    out_dir: Option<String>,
    /// Worker threads (0 or absent: default pool)
    #[arg(long)]
    workers: Option<usize>,
    /// Chunk cache directory for resumable sweeps
    #[arg(long)]
    cache_dir: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Rational map, e.g. "x^2" or "x^2 + 1 : x"
    #[arg(long)]
    map: Option<String>,
    /// Comma-separated target points, e.g. "3,5,7"
    #[arg(long)]
    targets: Option<String>,
    /// Iterate level m
    #[arg(long)]
    level: Option<u32>,
    /// Cap on chunks computed in this invocation (testing lever)
    #[arg(long)]
    chunk_budget: Option<u64>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    map: Option<String>,
    /// Point to certify, `a`, `a/b`, or `inf`
    #[arg(long)]
    alpha: Option<String>,
}

#[derive(Args)]
struct DmlArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Coordinate map; repeat the flag for g > 1
    #[arg(long = "map")]
    maps: Vec<String>,
    /// Comma-separated start points, one per coordinate
    #[arg(long)]
    start: Option<String>,
    /// Multihomogeneous forms, e.g. "X1*Y2 - X2*Y1"
    #[arg(long)]
    variety: Option<String>,
    /// Scan indices 0..=horizon
    #[arg(long)]
    horizon: Option<u64>,
    /// Search for a p-adic avoidance certificate up to this prime
    #[arg(long)]
    certify_prime_max: Option<u64>,
}

#[derive(Args)]
struct LattesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Short Weierstrass coefficients "a b"
    #[arg(long)]
    curve: Option<String>,
    /// Curve point "x y" with rational coordinates
    #[arg(long)]
    point: Option<String>,
    /// Prime multiplication degree
    #[arg(long)]
    q: Option<u32>,
    /// Divisibility exponent: count primes with q^n | order
    #[arg(long)]
    n: Option<u32>,
}

#[derive(Args)]
struct ForestArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    map: Option<String>,
    /// Root of the preimage tree
    #[arg(long)]
    target: Option<String>,
    /// Prime modulus
    #[arg(long)]
    p: Option<u64>,
    /// Preimage levels to build
    #[arg(long)]
    depth: Option<u32>,
}

#[derive(Args)]
struct IndependenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    targets: Option<String>,
    #[arg(long)]
    level: Option<u32>,
}

/// Failures carrying their process exit code: 2 config, 3 math domain
/// (a violated hypothesis, named in the message), 4 I/O.
#[derive(Debug)]
enum CliError {
    Config(String),
    Math(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Math(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(w, "config error: {m}"),
            CliError::Math(m) => write!(w, "{m}"),
            CliError::Io(m) => write!(w, "io error: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

fn from_map_err(e: MapError) -> CliError {
    match e {
        MapError::Parse(_)
        | MapError::DegreeTooSmall
        | MapError::ZeroComponent
        | MapError::DegenerateMap
        | MapError::InvalidPoint => CliError::Config(e.to_string()),
        _ => CliError::Math(e.to_string()),
    }
}

fn from_sweep_err(e: SweepError) -> CliError {
    match e {
        SweepError::EmptySystem => CliError::Config(e.to_string()),
        SweepError::Map(m) => from_map_err(m),
        SweepError::Io(io) => CliError::Io(io.to_string()),
        _ => CliError::Math(e.to_string()),
    }
}

fn from_orbit_err(e: OrbitError) -> CliError {
    match e {
        OrbitError::Map(m) => from_map_err(m),
        _ => CliError::Math(e.to_string()),
    }
}

fn from_forest_err(e: ForestError) -> CliError {
    match e {
        ForestError::Map(m) => from_map_err(m),
        _ => CliError::Math(e.to_string()),
    }
}

fn from_dml_err(e: DmlError) -> CliError {
    match e {
        DmlError::BadSystemShape { .. } | DmlError::Parse(_) => CliError::Config(e.to_string()),
        DmlError::Map(m) => from_map_err(m),
        _ => CliError::Math(e.to_string()),
    }
}

fn from_lattes_err(e: LattesError) -> CliError {
    match e {
        LattesError::Parse(_) | LattesError::UnsupportedQ(_) => CliError::Config(e.to_string()),
        LattesError::Map(m) => from_map_err(m),
        _ => CliError::Math(e.to_string()),
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Dml(a) => cmd_dml(a),
        Command::Lattes(a) => cmd_lattes(a),
        Command::Forest(a) => cmd_forest(a),
        Command::Independence(a) => cmd_independence(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}

/// Config file merged with common flags; the subcommand name always wins.
fn load_config(common: &CommonArgs, command: &str) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::parse(&text).map_err(CliError::Config)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.command = command.to_string();
    if common.primes.is_some() {
        cfg.primes = common.primes.clone();
    }
    if common.out_dir.is_some() {
        cfg.out_dir = common.out_dir.clone();
    }
    if common.workers.is_some() {
        cfg.workers = common.workers;
    }
    if common.cache_dir.is_some() {
        cfg.cache_dir = common.cache_dir.clone();
    }
    Ok(cfg)
}

fn require<T>(field: Option<T>, what: &str) -> Result<T, CliError> {
    field.ok_or_else(|| CliError::Config(format!("missing required {what}")))
}

fn prime_bounds(cfg: &ExperimentConfig) -> Result<(u64, u64), CliError> {
    let text = require(cfg.primes.as_deref(), "--primes range")?;
    parse_prime_range(text).map_err(CliError::Config)
}

fn parse_map(text: &str) -> Result<RationalMap, CliError> {
    text.parse().map_err(from_map_err)
}

fn parse_point(text: &str) -> Result<ProjPoint, CliError> {
    text.parse().map_err(from_map_err)
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn size_worker_pool(cfg: &ExperimentConfig) {
    if let Some(w) = cfg.workers {
        if w > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global();
        }
    }
}

fn resolve_cache_dir(cfg: &ExperimentConfig) -> Option<PathBuf> {
    cfg.cache_dir
        .clone()
        .or_else(|| std::env::var(CACHE_ENV).ok())
        .map(PathBuf::from)
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("clock after 1970")
        .as_secs()
}

fn density_value(est: &DensityEstimate) -> Value {
    serde_json::to_value(est).expect("plain struct")
}

/// Write one output file under the run directory.
fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

struct ManifestExtra {
    completed: bool,
    chunks_computed: Option<u64>,
    chunks_from_cache: Option<u64>,
}

impl Default for ManifestExtra {
    fn default() -> ManifestExtra {
        ManifestExtra {
            completed: true,
            chunks_computed: None,
            chunks_from_cache: None,
        }
    }
}

/// The only timestamped output; data files stay byte-stable across reruns.
fn write_manifest(
    dir: &Path,
    cfg: &ExperimentConfig,
    started: u64,
    outputs: &[&str],
    extra: ManifestExtra,
) -> Result<(), CliError> {
    let mut doc = json!({
        "artifact_version": ARTIFACT_VERSION,
        "command": cfg.command,
        "config_hash": cfg.hash_hex(),
        "config": cfg.render(),
        "started_unix": started,
        "finished_unix": now_unix(),
        "completed": extra.completed,
        "outputs": outputs,
    });
    if let Some(n) = extra.chunks_computed {
        doc["chunks_computed"] = json!(n);
    }
    if let Some(n) = extra.chunks_from_cache {
        doc["chunks_from_cache"] = json!(n);
    }
    let text = serde_json::to_string_pretty(&doc).expect("plain json");
    write_file(dir, "manifest.json", &(text + "\n"))
}

fn report_header(cfg: &ExperimentConfig) -> Value {
    json!({
        "artifact_version": ARTIFACT_VERSION,
        "command": cfg.command,
        "config_hash": cfg.hash_hex(),
    })
}

fn merge_into(mut base: Value, extra: Value) -> Value {
    let (Value::Object(b), Value::Object(e)) = (&mut base, extra) else {
        unreachable!("reports are objects");
    };
    b.extend(e);
    base
}

fn build_target_system(
    entries: &[SystemEntry],
    level: u32,
) -> Result<TargetSystem, CliError> {
    if entries.is_empty() {
        return Err(CliError::Config("no system given: pass --map".to_string()));
    }
    let mut parsed = Vec::with_capacity(entries.len());
    for entry in entries {
        let map = parse_map(&entry.map)?;
        let mut targets = Vec::with_capacity(entry.targets.len());
        for t in &entry.targets {
            targets.push(parse_point(t)?);
        }
        parsed.push((map, targets));
    }
    TargetSystem::new(parsed, level).map_err(from_sweep_err)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common, "sweep")?;
    if let Some(map) = &args.map {
        let targets = args.targets.as_deref().map(split_list).unwrap_or_default();
        cfg.system = vec![SystemEntry {
            map: map.clone(),
            targets,
        }];
    } else if let Some(targets) = &args.targets {
        let entry = cfg
            .system
            .first_mut()
            .ok_or_else(|| CliError::Config("--targets without a map".to_string()))?;
        entry.targets = split_list(targets);
    }
    if args.level.is_some() {
        cfg.level = args.level;
    }
    if args.chunk_budget.is_some() {
        cfg.chunk_budget = args.chunk_budget;
    }
    let sys = build_target_system(&cfg.system, cfg.level.unwrap_or(1))?;
    let (lo, hi) = prime_bounds(&cfg)?;
    size_worker_pool(&cfg);
    let runner = SweepRunner {
        cache_dir: resolve_cache_dir(&cfg),
        chunk_budget: cfg.chunk_budget,
        ..Default::default()
    };
    let started = now_unix();
    let out = runner.run(&sys, lo, hi).map_err(from_sweep_err)?;
    let summary = merge_into(
        report_header(&cfg),
        json!({
            "primes": [lo, hi],
            "system": sys.description(),
            "completed": out.completed,
            "density": density_value(&out.estimate),
        }),
    );
    let summary_text = serde_json::to_string_pretty(&summary).expect("plain json");
    println!("{summary_text}");
    if let Some(dir) = &cfg.out_dir {
        let dir = Path::new(dir);
        write_file(dir, "records.csv", &records_to_csv(&sys, &out.records))?;
        write_file(dir, "summary.json", &(summary_text.clone() + "\n"))?;
        write_manifest(
            dir,
            &cfg,
            started,
            &["records.csv", "summary.json"],
            ManifestExtra {
                completed: out.completed,
                chunks_computed: Some(out.chunks_computed),
                chunks_from_cache: Some(out.chunks_from_cache),
            },
        )?;
    }
    Ok(())
}

fn cmd_certify(args: CertifyArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common, "certify")?;
    if let Some(map) = &args.map {
        cfg.system = vec![SystemEntry {
            map: map.clone(),
            targets: Vec::new(),
        }];
    }
    if args.alpha.is_some() {
        cfg.alpha = args.alpha.clone();
    }
    let map_text = cfg
        .system
        .first()
        .map(|e| e.map.clone())
        .ok_or_else(|| CliError::Config("missing required --map".to_string()))?;
    let map = parse_map(&map_text)?;
    let alpha = parse_point(require(cfg.alpha.as_deref(), "--alpha point")?)?;
    // periodicity violates the scan hypothesis regardless of the range, so
    // check it before demanding one
    if let QOrbitStatus::Periodic { period } = q_periodicity(&map, &alpha) {
        return Err(CliError::Math(format!(
            "point is periodic over Q with period {period}"
        )));
    }
    let (lo, hi) = prime_bounds(&cfg)?;
    size_worker_pool(&cfg);
    let started = now_unix();
    let (cert, est) = nonperiodic_prime_scan(&map, &alpha, lo, hi).map_err(from_orbit_err)?;
    let jsonl = cert.to_jsonl();
    print!("{jsonl}");
    if let Some(dir) = &cfg.out_dir {
        let dir = Path::new(dir);
        let summary = merge_into(
            report_header(&cfg),
            json!({
                "primes": [lo, hi],
                "map": map.to_string(),
                "alpha": alpha.to_string(),
                "verified_over_q": cert.verified_over_q,
                "density": density_value(&est),
            }),
        );
        write_file(dir, "certificate.jsonl", &jsonl)?;
        write_file(
            dir,
            "summary.json",
            &(serde_json::to_string_pretty(&summary).expect("plain json") + "\n"),
        )?;
        write_manifest(
            dir,
            &cfg,
            started,
            &["certificate.jsonl", "summary.json"],
            ManifestExtra::default(),
        )?;
    }
    Ok(())
}

fn certificate_value(cert: &PadicCertificate) -> Value {
    let coords: Vec<Value> = cert
        .coords
        .iter()
        .map(|c| {
            json!({
                "tail": c.shape.tail,
                "period": c.shape.period,
                "avoided": c.avoided.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "p": cert.p,
        "mode": match cert.mode {
            CertificateMode::Strict => "strict",
            CertificateMode::AttractingOnly => "attracting-only",
        },
        "coords": coords,
    })
}

fn cmd_dml(args: DmlArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common, "dml")?;
    if !args.maps.is_empty() {
        cfg.system = args
            .maps
            .iter()
            .map(|m| SystemEntry {
                map: m.clone(),
                targets: Vec::new(),
            })
            .collect();
    }
    if args.start.is_some() {
        cfg.start = args.start.clone();
    }
    if args.variety.is_some() {
        cfg.variety = args.variety.clone();
    }
    if args.horizon.is_some() {
        cfg.horizon = args.horizon;
    }
    if args.certify_prime_max.is_some() {
        cfg.certify_prime_max = args.certify_prime_max;
    }
    let horizon = require(cfg.horizon, "--horizon")?;
    let maps = cfg
        .system
        .iter()
        .map(|e| parse_map(&e.map))
        .collect::<Result<Vec<_>, _>>()?;
    let starts = split_list(require(cfg.start.as_deref(), "--start points")?)
        .iter()
        .map(|s| parse_point(s))
        .collect::<Result<Vec<_>, _>>()?;
    let sys = SplitSystem::new(maps, starts).map_err(from_dml_err)?;
    let variety_text = require(cfg.variety.as_deref(), "--variety equations")?;
    let v = Subvariety::parse(variety_text, sys.g()).map_err(from_dml_err)?;
    size_worker_pool(&cfg);
    let started = now_unix();

    let scan = orbit_membership_scan(&sys, &v, horizon);
    if let Err(DmlError::HeightOverflow { coord, at, partial }) = &scan {
        // exact arithmetic gave out: report what was found, then fail
        let report = merge_into(
            report_header(&cfg),
            json!({
                "horizon": horizon,
                "hits": partial,
                "error": format!(
                    "coordinate {coord} height passed the exact-arithmetic cap at index {at}"
                ),
            }),
        );
        let text = serde_json::to_string_pretty(&report).expect("plain json");
        println!("{text}");
        if let Some(dir) = &cfg.out_dir {
            let dir = Path::new(dir);
            write_file(dir, "report.json", &(text + "\n"))?;
            write_manifest(
                dir,
                &cfg,
                started,
                &["report.json"],
                ManifestExtra {
                    completed: false,
                    ..Default::default()
                },
            )?;
        }
        return Err(CliError::Math(format!(
            "coordinate {coord} height passed the exact-arithmetic cap at index {at}"
        )));
    }
    let hits = scan.map_err(from_dml_err)?;
    let cover = fit_progressions(&hits, horizon).map_err(from_dml_err)?;
    let cover_value: Value = serde_json::from_str(&cover.to_json()).expect("cover json");
    let mut report = merge_into(
        report_header(&cfg),
        json!({
            "horizon": horizon,
            "hits": hits,
            "cover": cover_value,
        }),
    );
    if let Some(pmax) = cfg.certify_prime_max {
        let cert = find_padic_certificate(&sys, pmax).map_err(from_dml_err)?;
        report["certificate"] = certificate_value(&cert);
    }
    let text = serde_json::to_string_pretty(&report).expect("plain json");
    println!("{text}");
    if let Some(dir) = &cfg.out_dir {
        let dir = Path::new(dir);
        write_file(dir, "report.json", &(text + "\n"))?;
        write_manifest(
            dir,
            &cfg,
            started,
            &["report.json"],
            ManifestExtra::default(),
        )?;
    }
    Ok(())
}

fn cmd_lattes(args: LattesArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common, "lattes")?;
    if args.curve.is_some() {
        cfg.curve = args.curve.clone();
    }
    if args.point.is_some() {
        cfg.point = args.point.clone();
    }
    if args.q.is_some() {
        cfg.q = args.q;
    }
    if args.n.is_some() {
        cfg.n = args.n;
    }
    let (lo, hi) = prime_bounds(&cfg)?;
    let curve: EllipticCurve = require(cfg.curve.as_deref(), "--curve coefficients")?
        .parse()
        .map_err(from_lattes_err)?;
    let point =
        ECPoint::parse(&curve, require(cfg.point.as_deref(), "--point")?).map_err(from_lattes_err)?;
    let q = require(cfg.q, "--q")?;
    if !is_prime_u64(q as u64) {
        return Err(CliError::Config(format!("q must be prime, got {q}")));
    }
    let n = cfg.n.unwrap_or(1);
    size_worker_pool(&cfg);
    let started = now_unix();
    let target = (q as u64).checked_pow(n);
    let mut est = DensityEstimate::default();
    for p in prime_range(lo, hi) {
        match point_order_modp(&curve, &point, p) {
            Ok(ord) => est.record(target.map_or(false, |t| ord % t == 0)),
            Err(LattesError::BadReduction(_)) => {}
            Err(e) => return Err(from_lattes_err(e)),
        }
    }
    let report = merge_into(
        report_header(&cfg),
        json!({
            "primes": [lo, hi],
            "curve": curve.to_string(),
            "point": point.to_string(),
            "q": q,
            "n": n,
            "density": density_value(&est),
        }),
    );
    let text = serde_json::to_string_pretty(&report).expect("plain json");
    println!("{text}");
    if let Some(dir) = &cfg.out_dir {
        let dir = Path::new(dir);
        write_file(dir, "density.json", &(text + "\n"))?;
        write_manifest(
            dir,
            &cfg,
            started,
            &["density.json"],
            ManifestExtra::default(),
        )?;
    }
    Ok(())
}

fn cmd_forest(args: ForestArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common, "forest")?;
    if let Some(map) = &args.map {
        cfg.system = vec![SystemEntry {
            map: map.clone(),
            targets: Vec::new(),
        }];
    }
    if args.target.is_some() {
        cfg.target = args.target.clone();
    }
    if args.p.is_some() {
        cfg.p = args.p;
    }
    if args.depth.is_some() {
        cfg.depth = args.depth;
    }
    let p = require(cfg.p, "--p modulus")?;
    let depth = require(cfg.depth, "--depth")?;
    let map_text = cfg
        .system
        .first()
        .map(|e| e.map.clone())
        .ok_or_else(|| CliError::Config("missing required --map".to_string()))?;
    let map = parse_map(&map_text)?;
    let target = parse_point(require(cfg.target.as_deref(), "--target point")?)?;
    let sys = TargetSystem::new(vec![(map, vec![target])], depth).map_err(from_sweep_err)?;
    let started = now_unix();
    let forest = build_forest_modp(&sys, p, depth).map_err(from_forest_err)?;
    let text = forest_to_json(&forest);
    println!("{text}");
    if let Some(dir) = &cfg.out_dir {
        let dir = Path::new(dir);
        write_file(dir, "forest.json", &(text + "\n"))?;
        write_manifest(
            dir,
            &cfg,
            started,
            &["forest.json"],
            ManifestExtra::default(),
        )?;
    }
    Ok(())
}

fn cmd_independence(args: IndependenceArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.common, "independence")?;
    if let Some(map) = &args.map {
        let targets = args.targets.as_deref().map(split_list).unwrap_or_default();
        cfg.system = vec![SystemEntry {
            map: map.clone(),
            targets,
        }];
    }
    if args.level.is_some() {
        cfg.level = args.level;
    }
    let (lo, hi) = prime_bounds(&cfg)?;
    let sys = build_target_system(&cfg.system, cfg.level.unwrap_or(1))?;
    if sys.target_count() < 2 {
        return Err(CliError::Config(
            "independence needs at least two targets".to_string(),
        ));
    }
    size_worker_pool(&cfg);
    let started = now_unix();
    let rep = independence_report(&sys, lo, hi).map_err(from_sweep_err)?;
    let report = merge_into(
        report_header(&cfg),
        json!({
            "primes": [lo, hi],
            "labels": rep.labels,
            "eligible": rep.eligible,
            "marginal_miss": rep.marginal_miss,
            "joint_miss": rep.joint_miss,
            "expected_joint": rep.expected_joint,
            "ratio": rep.ratio,
            "chi_square": rep.chi_square,
        }),
    );
    let text = serde_json::to_string_pretty(&report).expect("plain json");
    println!("{text}");
    if let Some(dir) = &cfg.out_dir {
        let dir = Path::new(dir);
        write_file(dir, "report.json", &(text + "\n"))?;
        write_manifest(
            dir,
            &cfg,
            started,
            &["report.json"],
            ManifestExtra::default(),
        )?;
    }
    Ok(())
}
