//! Command-line front end: `cluster`, `classify`, `synth`, `eval` and
//! `downsample`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, IngestError, ReconstructError, Result};
use crate::export::{export_geojson, export_label_timeline};
use crate::ingest::{parse_ais_csv, write_ais_csv};
use crate::metrics::{evaluate, require_truth, EvalReport};
use crate::model::{CbtrConfig, ClusterAssignment, TrackDataset, VesselId};
use crate::npc::{npc_classify, npc_cluster, FeatureWeights, NpcConfig};
use crate::reconstruct::run_cbtr;
use crate::synth::{downsample, generate_fleet, DownsamplePattern, GapConfig, SynthConfig, S1_SEED};

#[derive(Debug, Parser)]
#[command(name = "cbtr", version, about = "Vessel trajectory reconstruction from unlabeled AIS reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group reports into trajectories.
    Cluster(ClusterArgs),
    /// Label test reports from labeled training reports.
    Classify(ClassifyArgs),
    /// Generate a synthetic labeled fleet.
    Synth(SynthArgs),
    /// Score an assignment file against labeled reports.
    Eval(EvalArgs),
    /// Remove every 5th or every 2nd report of each vessel.
    Downsample(DownsampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Cbtr,
    Npc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// 14 transit, 3 turning, 3 steady vessels over four hours.
    S1,
    /// S1 with two reporting gaps per vessel.
    S1Gaps,
    /// Random archetypes; see --vessels.
    Random,
}

#[derive(Debug, Args)]
pub struct CbtrFlags {
    #[arg(long, default_value_t = 1000)]
    pub window_s: i64,
    #[arg(long, default_value_t = 3.0)]
    pub moving_speed_sum: f64,
    #[arg(long, default_value_t = 2e-6)]
    pub time_weight_moving: f64,
    #[arg(long, default_value_t = 2e-9)]
    pub time_weight_steady: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub angle_time_weight: f64,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    pub cos_moving_min: f64,
    #[arg(long, default_value_t = 0.95, allow_hyphen_values = true)]
    pub cos_steady_min: f64,
    #[arg(long, default_value_t = 50)]
    pub n_abnormal: usize,
    #[arg(long, default_value_t = 350.0)]
    pub turn_rescue_dist_m: f64,
    #[arg(long, default_value_t = 0.6, allow_hyphen_values = true)]
    pub turn_rescue_cos_min: f64,
}

impl CbtrFlags {
    pub fn config(&self) -> CbtrConfig {
        CbtrConfig {
            window_s: self.window_s,
            moving_speed_sum: self.moving_speed_sum,
            time_weight_moving: self.time_weight_moving,
            time_weight_steady: self.time_weight_steady,
            angle_time_weight: self.angle_time_weight,
            cos_moving_min: self.cos_moving_min,
            cos_steady_min: self.cos_steady_min,
            n_abnormal: self.n_abnormal,
            turn_rescue_dist_m: self.turn_rescue_dist_m,
            turn_rescue_cos_min: self.turn_rescue_cos_min,
        }
    }
}

#[derive(Debug, Args)]
pub struct NpcFlags {
    #[arg(long, default_value_t = 3)]
    pub k_neighbors: usize,
    #[arg(long, default_value_t = 10)]
    pub recent_per_label: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub weight_t: f64,
    /// Latitude weight; defaults to the dataset's alpha.
    #[arg(long)]
    pub weight_lat: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub weight_lon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub weight_sog: f64,
    #[arg(long, default_value_t = 0.0)]
    pub weight_cog: f64,
}

impl NpcFlags {
    pub fn config(&self) -> NpcConfig {
        NpcConfig {
            k_neighbors: self.k_neighbors,
            recent_per_label: self.recent_per_label,
            weights: FeatureWeights {
                t: self.weight_t,
                lat: self.weight_lat,
                lon: self.weight_lon,
                sog: self.weight_sog,
                cog: self.weight_cog,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Cbtr)]
    pub algo: Algo,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Print the effective configuration before running.
    #[arg(long)]
    pub print_config: bool,
    #[command(flatten)]
    pub cbtr: CbtrFlags,
    #[command(flatten)]
    pub npc: NpcFlags,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    pub train: PathBuf,
    pub test: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub npc: NpcFlags,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Scenario::S1)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = S1_SEED)]
    pub seed: u64,
    /// Fleet size for the random scenario.
    #[arg(long, default_value_t = 20)]
    pub vessels: usize,
    #[arg(long)]
    pub duration_s: Option<i64>,
    #[arg(long)]
    pub noise_m: Option<f64>,
    /// Reporting gaps per vessel (overrides the scenario's).
    #[arg(long)]
    pub gaps: Option<usize>,
    #[arg(long, default_value_t = 400)]
    pub gap_min_s: i64,
    #[arg(long, default_value_t = 1500)]
    pub gap_max_s: i64,
    /// Omit the vid column.
    #[arg(long)]
    pub no_labels: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// assignment.csv written by `cluster`.
    pub assignment: PathBuf,
    /// Labeled reports the assignment was computed from.
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct DownsampleArgs {
    pub input: PathBuf,
    /// every-5th or every-2nd.
    #[arg(long)]
    pub pattern: DownsamplePattern,
    #[arg(long, short)]
    pub out: PathBuf,
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Error {
    let context = context.into();
    move |source| Error::Io { context, source }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(io_err(format!("reading {}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_err(format!("writing {}", path.display())))
}

fn load(path: &Path, labels: bool) -> Result<TrackDataset> {
    Ok(parse_ais_csv(read_bytes(path)?.as_slice(), labels)?)
}

/// Flattens a serializable config into sorted `key = value` lines.
fn config_lines<T: Serialize>(prefix: &str, cfg: &T) -> String {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut String) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            serde_json::Value::Null => {
                let _ = writeln!(out, "{prefix} = auto");
            }
            other => {
                let _ = writeln!(out, "{prefix} = {other}");
            }
        }
    }
    let mut out = String::new();
    walk(prefix, &serde_json::to_value(cfg).expect("config serializes"), &mut out);
    out
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ReconstructError::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

fn assignment_csv(ds: &TrackDataset, a: &ClusterAssignment, next: &[Option<usize>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Ingest(IngestError::Csv(e));
    w.write_record(["index", "t", "lat", "lon", "cluster", "endpoint", "abnormal", "next"])
        .map_err(csv_err)?;
    for (i, p) in ds.points().iter().enumerate() {
        let flag = |s: &BTreeSet<usize>| if s.contains(&i) { "1" } else { "0" };
        w.write_record([
            i.to_string(),
            (ds.epoch() + p.t).to_string(),
            p.lat.to_string(),
            p.lon.to_string(),
            a.cluster_of[i].to_string(),
            flag(&a.endpoints).to_string(),
            flag(&a.abnormal).to_string(),
            next[i].map(|j| j.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| io_err("buffering assignment")(e.into_error()))
}

const ASSIGNMENT_FILE: &str = "assignment.csv";
const GEOJSON_FILE: &str = "tracks.geojson";
const TIMELINE_FILE: &str = "timeline.svg";
const MANIFEST_FILE: &str = "manifest.txt";

/// Runs `cluster`, returning the text printed to stdout.
pub fn cmd_cluster(args: &ClusterArgs) -> Result<String> {
    let raw = read_bytes(&args.input)?;
    let digest = Sha256::digest(&raw);
    let ds = parse_ais_csv(raw.as_slice(), false)?;

    let (algo, config_text) = match args.algo {
        Algo::Cbtr => ("cbtr", config_lines("cbtr", &args.cbtr.config())),
        Algo::Npc => ("npc", config_lines("npc", &args.npc.config())),
    };
    let mut stdout = String::new();
    if args.print_config {
        stdout.push_str(&config_text);
    }

    let started = Instant::now();
    let (assignment, next) = match args.algo {
        Algo::Cbtr => {
            let cfg = args.cbtr.config();
            let r = with_pool(args.threads, || run_cbtr(&ds, &cfg))??;
            let next = r.links.targets();
            (r.assignment, next)
        }
        Algo::Npc => {
            let cfg = args.npc.config();
            let r = with_pool(args.threads, || npc_cluster(&ds, &cfg))??;
            (r.assignment, r.edges)
        }
    };
    let runtime = started.elapsed().as_secs_f64();

    let report: Option<EvalReport> = match ds.has_labels() {
        true => Some(evaluate(&assignment, &next, &ds.truth().expect("labels"), runtime)?),
        false => None,
    };

    fs::create_dir_all(&args.out).map_err(io_err(format!("creating {}", args.out.display())))?;
    write_file(&args.out.join(ASSIGNMENT_FILE), &assignment_csv(&ds, &assignment, &next)?)?;
    let geo = serde_json::to_string_pretty(&export_geojson(&ds, &assignment)).expect("json");
    write_file(&args.out.join(GEOJSON_FILE), format!("{geo}\n").as_bytes())?;
    let truth = ds.truth();
    let svg = export_label_timeline(&ds, &assignment, truth.as_deref());
    write_file(&args.out.join(TIMELINE_FILE), svg.as_bytes())?;

    let mut manifest = String::new();
    let _ = writeln!(manifest, "command = cluster");
    let _ = writeln!(manifest, "algo = {algo}");
    let _ = writeln!(manifest, "input = {}", args.input.display());
    let _ = writeln!(manifest, "input_sha256 = {}", hex(&digest));
    let _ = writeln!(manifest, "seed = none");
    let _ = writeln!(manifest, "points = {}", ds.len());
    let _ = writeln!(manifest, "alpha = {}", ds.alpha());
    manifest.push_str("\n[config]\n");
    manifest.push_str(&config_text);
    manifest.push_str("\n[outputs]\n");
    for (k, f) in [
        ("assignment", ASSIGNMENT_FILE),
        ("geojson", GEOJSON_FILE),
        ("timeline", TIMELINE_FILE),
    ] {
        let _ = writeln!(manifest, "{k} = {f}");
    }
    let _ = writeln!(manifest, "n_clusters = {}", assignment.n_clusters());
    if let Some(r) = &report {
        manifest.push_str("\n[eval]\n");
        manifest.push_str(&r.to_kv_text(false));
    }
    write_file(&args.out.join(MANIFEST_FILE), manifest.as_bytes())?;

    let _ = writeln!(stdout, "clusters = {}", assignment.n_clusters());
    match &report {
        Some(r) => stdout.push_str(&r.to_kv_text(true)),
        None => {
            let _ = writeln!(stdout, "runtime_s = {runtime:.3}");
        }
    }
    Ok(stdout)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<String> {
    let train = load(&args.train, true)?;
    let test = load(&args.test, false)?;
    let labels = npc_classify(&train, &test, &args.npc.config())?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Ingest(IngestError::Csv(e));
    w.write_record(["vid", "timestamp", "lat", "lon", "sog", "cog"]).map_err(csv_err)?;
    for (p, v) in test.points().iter().zip(&labels) {
        w.write_record([
            v.to_string(),
            (test.epoch() + p.t).to_string(),
            p.lat.to_string(),
            p.lon.to_string(),
            p.sog.to_string(),
            p.cog.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| io_err("buffering labels")(e.into_error()))?;
    write_file(&args.out, &bytes)?;

    let mut out = format!("classified = {}\n", labels.len());
    if test.has_labels() {
        let correct = test
            .points()
            .iter()
            .zip(&labels)
            .filter(|(p, v)| p.vid == Some(**v))
            .count();
        let _ = writeln!(out, "accuracy = {:.6}", correct as f64 / labels.len() as f64);
    }
    Ok(out)
}

pub fn synth_config(args: &SynthArgs) -> SynthConfig {
    let mut cfg = match args.scenario {
        Scenario::S1 => SynthConfig::scenario_s1(args.seed),
        Scenario::S1Gaps => SynthConfig::scenario_s1_with_gaps(args.seed),
        Scenario::Random => SynthConfig {
            n_vessels: args.vessels,
            seed: args.seed,
            ..SynthConfig::default()
        },
    };
    if let Some(d) = args.duration_s {
        cfg.duration_s = d;
    }
    if let Some(n) = args.noise_m {
        cfg.noise_m = n;
    }
    if let Some(per_vessel) = args.gaps {
        cfg.gaps = (per_vessel > 0).then_some(GapConfig {
            per_vessel,
            min_s: args.gap_min_s,
            max_s: args.gap_max_s,
        });
    }
    cfg
}

pub fn cmd_synth(args: &SynthArgs) -> Result<String> {
    let ds = generate_fleet(&synth_config(args))?;
    let mut buf = Vec::new();
    write_ais_csv(&ds, &mut buf, !args.no_labels)?;
    write_file(&args.out, &buf)?;
    let mut out = format!("points = {}\n", ds.len());
    if !args.no_labels {
        let vessels: BTreeSet<Option<VesselId>> = ds.points().iter().map(|p| p.vid).collect();
        let _ = writeln!(out, "vessels = {}", vessels.len());
    }
    Ok(out)
}

#[derive(Debug, serde::Deserialize)]
struct AssignmentRow {
    index: usize,
    cluster: usize,
    endpoint: u8,
    abnormal: u8,
    next: Option<usize>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<String> {
    let truth_ds = load(&args.truth, true)?;
    let truth = require_truth(&truth_ds.points().iter().map(|p| p.vid).collect::<Vec<_>>())?;

    let raw = read_bytes(&args.assignment)?;
    let mut reader = csv::Reader::from_reader(raw.as_slice());
    let mut assignment = ClusterAssignment::default();
    let mut next = Vec::new();
    for (k, row) in reader.deserialize::<AssignmentRow>().enumerate() {
        let row = row.map_err(IngestError::Csv)?;
        if row.index != k {
            return Err(Error::Usage(format!(
                "{}: row {} has index {}, expected {k}",
                args.assignment.display(),
                k + 1,
                row.index
            )));
        }
        if row.endpoint == 1 {
            assignment.endpoints.insert(k);
        }
        if row.abnormal == 1 {
            assignment.abnormal.insert(k);
        }
        assignment.cluster_of.push(row.cluster);
        next.push(row.next);
    }
    if next.iter().flatten().any(|&j| j >= next.len()) {
        return Err(Error::Usage("assignment links to an index past the end".into()));
    }
    Ok(evaluate(&assignment, &next, &truth, 0.0)?.to_kv_text(false))
}

pub fn cmd_downsample(args: &DownsampleArgs) -> Result<String> {
    let ds = load(&args.input, false)?;
    let thin = downsample(&ds, args.pattern);
    let mut buf = Vec::new();
    write_ais_csv(&thin, &mut buf, ds.has_labels())?;
    write_file(&args.out, &buf)?;
    Ok(format!("kept = {}\nremoved = {}\n", thin.len(), ds.len() - thin.len()))
}

pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Downsample(a) => cmd_downsample(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
