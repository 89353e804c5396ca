//! Command-line front end: trace generation, per-epoch runs, evaluation
//! against the exact oracle, benchmarks and sweeps.
//!
//! Epochs are counted in records. Without `--epoch-len` a trace's stored
//! boundaries are used, and a trace without boundaries is cut every
//! 1,000,000 records, taken as roughly one second at high line rate.
//!
//! Sketch options may also come from a flat `key=value` file passed with
//! `--config`; flags given on the command line win.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{SketchConfig, UpdateMode};
use crate::error::{Error, Result};
use crate::hierarchy::HierarchySpec;
use crate::metrics::{accuracy, average, throughput, AccuracyResult};
use crate::oracle::{exact_hhh_at, threshold_for, AnySketch, FlowTable};
use crate::probe::NoProbe;
use crate::report::HhhReport;
use crate::traces::{
    gen_skew_controlled, gen_zipf, read_trace, split_epochs, write_trace, PacketRecord, Trace,
    TraceFormat,
};

pub const DEFAULT_EPOCH_LEN: usize = 1_000_000;
pub const DEFAULT_MEMORY: usize = 256 * 1024;
pub const DEFAULT_PHI: f64 = 0.01;

#[derive(Parser, Debug)]
#[command(name = "mvpipe", version, about = "Hierarchical heavy hitter sketches over IPv4 traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic trace.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the sketch and write one report per epoch.
    Run(RunArgs),
    /// Score the sketch against the exact HHH set.
    Eval(EvalArgs),
    /// Measure update throughput.
    Bench(BenchArgs),
    /// Evaluate over a grid of parameters.
    Sweep(SweepArgs),
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Flow ids drawn from a Zipf distribution.
    Zipf {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 100_000)]
        universe: usize,
        #[command(flatten)]
        out: GenOut,
    },
    /// A fixed share of records spread over `topk` heavy flows.
    Skew {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        topk: usize,
        #[arg(long, default_value_t = 0.54)]
        fraction: f64,
        #[command(flatten)]
        out: GenOut,
    },
}

#[derive(Args, Debug)]
pub struct GenOut {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Store epoch boundaries every this many records.
    #[arg(long)]
    pub epoch_len: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to csv for `.csv` paths, packed otherwise.
    #[arg(long)]
    pub format: Option<String>,
}

/// Sketch and threshold options shared by every command that runs a sketch.
#[derive(Args, Debug, Clone, Default)]
pub struct SketchArgs {
    /// 1d-byte, 1d-bit, 2d-byte or 2d-bit.
    #[arg(long)]
    pub spec: Option<HierarchySpec>,
    /// Memory budget in bytes.
    #[arg(long, conflicts_with = "widths")]
    pub memory: Option<usize>,
    /// Explicit per-array widths.
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    /// Threshold as a fraction of the epoch total.
    #[arg(long, conflicts_with = "threshold")]
    pub phi: Option<f64>,
    /// Absolute threshold.
    #[arg(long)]
    pub threshold: Option<u64>,
    /// Ancestors consulted by Estimate.
    #[arg(long)]
    pub t: Option<usize>,
    /// full or hw.
    #[arg(long)]
    pub mode: Option<UpdateMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epoch_len: Option<usize>,
    /// Flat key=value file with any of the options above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    #[command(flatten)]
    pub sketch: SketchArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
    Both,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Several phi values at once.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["phi", "threshold"])]
    pub phis: Option<Vec<f64>>,
    /// Several update modes at once.
    #[arg(long, value_delimiter = ',', conflicts_with = "mode")]
    pub modes: Option<Vec<UpdateMode>>,
    #[command(flatten)]
    pub sketch: SketchArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Several hierarchies at once.
    #[arg(long, value_delimiter = ',', conflicts_with = "spec")]
    pub specs: Option<Vec<HierarchySpec>>,
    #[command(flatten)]
    pub sketch: SketchArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Memory,
    Thresholds,
    Skew,
    Epochs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Input trace; the skew axis generates its own.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub memories: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["phi", "threshold"])]
    pub phis: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub epoch_lens: Option<Vec<usize>>,
    /// Records per generated skew trace.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub topk: usize,
    #[command(flatten)]
    pub sketch: SketchArgs,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sizing {
    Memory(usize),
    Widths(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Phi(f64),
    Absolute(u64),
}

impl Threshold {
    pub fn for_total(self, total: u64) -> u64 {
        match self {
            Threshold::Phi(phi) => threshold_for(phi, total),
            Threshold::Absolute(t) => t,
        }
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::Phi(p) => write!(f, "{p}"),
            Threshold::Absolute(t) => write!(f, "{t}"),
        }
    }
}

/// Fully resolved options for one sketch run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spec: HierarchySpec,
    pub sizing: Sizing,
    pub threshold: Threshold,
    /// `None` keeps the hierarchy's default.
    pub ancestor_depth: Option<usize>,
    pub mode: UpdateMode,
    pub seed: u64,
    pub epoch_len: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: HierarchySpec::ONE_D_BYTE,
            sizing: Sizing::Memory(DEFAULT_MEMORY),
            threshold: Threshold::Phi(DEFAULT_PHI),
            ancestor_depth: None,
            mode: UpdateMode::Full,
            seed: 0,
            epoch_len: None,
        }
    }
}

impl RunConfig {
    pub fn sketch_config(&self) -> Result<SketchConfig> {
        let cfg = match &self.sizing {
            Sizing::Memory(bytes) => SketchConfig::with_memory(self.spec, *bytes)?,
            Sizing::Widths(w) => SketchConfig::with_widths(self.spec, w.clone())?,
        };
        let cfg = cfg.seed(self.seed).mode(self.mode);
        Ok(match self.ancestor_depth {
            Some(t) => cfg.ancestor_depth(t),
            None => cfg,
        })
    }

    /// The trace cut into epochs per the epoch rules above.
    pub fn epochs(&self, trace: Trace) -> Result<Trace> {
        match self.epoch_len {
            Some(len) => split_epochs(trace, len),
            None if !trace.boundaries().is_empty() => Ok(trace),
            None => split_epochs(trace, DEFAULT_EPOCH_LEN),
        }
    }
}

/// Parses a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e| Error::Config(format!("{key}={v}: {e}")))
}

impl SketchArgs {
    /// Merges the config file (if any) under the flags and applies defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => parse_config_file(&fs::read_to_string(p)?)?,
            None => HashMap::new(),
        };
        for k in file.keys() {
            if !matches!(
                k.as_str(),
                "spec" | "memory" | "widths" | "phi" | "threshold" | "t" | "mode" | "seed" | "epoch_len"
            ) {
                return Err(Error::Config(format!("unknown config key {k:?}")));
            }
        }
        let get = |k: &str| file.get(k).map(String::as_str);
        let mut rc = RunConfig::default();
        if let Some(s) = self.spec {
            rc.spec = s;
        } else if let Some(v) = get("spec") {
            rc.spec = parse_field("spec", v)?;
        }
        rc.sizing = match (&self.memory, &self.widths, get("memory"), get("widths")) {
            (Some(m), _, _, _) => Sizing::Memory(*m),
            (_, Some(w), _, _) => Sizing::Widths(w.clone()),
            (_, _, Some(_), Some(_)) => {
                return Err(Error::Config("give memory or widths, not both".into()))
            }
            (_, _, Some(m), None) => Sizing::Memory(parse_field("memory", m)?),
            (_, _, None, Some(w)) => Sizing::Widths(
                w.split(',')
                    .map(|x| parse_field("widths", x.trim()))
                    .collect::<Result<_>>()?,
            ),
            _ => Sizing::Memory(DEFAULT_MEMORY),
        };
        rc.threshold = match (self.phi, self.threshold, get("phi"), get("threshold")) {
            (Some(p), _, _, _) => Threshold::Phi(p),
            (_, Some(t), _, _) => Threshold::Absolute(t),
            (_, _, Some(_), Some(_)) => {
                return Err(Error::Config("give phi or threshold, not both".into()))
            }
            (_, _, Some(p), None) => Threshold::Phi(parse_field("phi", p)?),
            (_, _, None, Some(t)) => Threshold::Absolute(parse_field("threshold", t)?),
            _ => Threshold::Phi(DEFAULT_PHI),
        };
        if let Threshold::Phi(p) = rc.threshold {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Config(format!("phi must be in (0, 1), got {p}")));
            }
        }
        rc.ancestor_depth = match (self.t, get("t")) {
            (Some(t), _) => Some(t),
            (None, Some(v)) => Some(parse_field("t", v)?),
            _ => None,
        };
        rc.mode = match (self.mode, get("mode")) {
            (Some(m), _) => m,
            (None, Some(v)) => parse_field("mode", v)?,
            _ => UpdateMode::Full,
        };
        rc.seed = match (self.seed, get("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => parse_field("seed", v)?,
            _ => 0,
        };
        rc.epoch_len = match (self.epoch_len, get("epoch_len")) {
            (Some(e), _) => Some(e),
            (None, Some(v)) => Some(parse_field("epoch_len", v)?),
            _ => None,
        };
        Ok(rc)
    }
}

pub fn load_trace(path: &Path) -> Result<Trace> {
    read_trace(path, TraceFormat::from_path(path))
}

/// Feeds one epoch into a fresh sketch.
pub fn run_epoch(config: &SketchConfig, records: &[PacketRecord]) -> Result<AnySketch> {
    let mut sketch = AnySketch::new(config.clone())?;
    for r in records {
        sketch.update_probed(r, &mut NoProbe);
    }
    Ok(sketch)
}

fn epoch_total(records: &[PacketRecord]) -> u64 {
    records.iter().map(|r| r.value as u64).sum()
}

/// Per-epoch reports for one configuration.
pub fn run_reports(rc: &RunConfig, trace: Trace) -> Result<Vec<HhhReport>> {
    let cfg = rc.sketch_config()?;
    let trace = rc.epochs(trace)?;
    trace
        .epochs()
        .into_iter()
        .map(|epoch| {
            let mut sketch = run_epoch(&cfg, epoch)?;
            sketch.detect_probed(rc.threshold.for_total(epoch_total(epoch)), &mut NoProbe)
        })
        .collect()
}

/// Accuracy of every epoch at each threshold, in `[threshold][epoch]`
/// order. One sketch per epoch is built and cloned for each threshold.
pub fn evaluate(
    config: &SketchConfig,
    trace: &Trace,
    thresholds: &[Threshold],
) -> Result<Vec<Vec<AccuracyResult>>> {
    let mut out = vec![Vec::new(); thresholds.len()];
    for epoch in trace.epochs() {
        let sketch = run_epoch(config, epoch)?;
        let table = FlowTable::from_records(&config.spec, epoch);
        for (i, th) in thresholds.iter().enumerate() {
            let abs = th.for_total(table.total);
            let truth = exact_hhh_at(&config.spec, &table, abs);
            let report = sketch.clone().detect_probed(abs, &mut NoProbe)?;
            out[i].push(accuracy(&report, &truth)?);
        }
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(cmd: &GenCommand) -> Result<()> {
    let (trace, out) = match cmd {
        GenCommand::Zipf {
            n,
            alpha,
            universe,
            out,
        } => (gen_zipf(*n, *alpha, *universe, out.seed)?, out),
        GenCommand::Skew {
            n,
            topk,
            fraction,
            out,
        } => (gen_skew_controlled(*n, *topk, *fraction, out.seed)?, out),
    };
    let trace = match out.epoch_len {
        Some(len) => split_epochs(trace, len)?,
        None => trace,
    };
    let format = match &out.format {
        Some(f) => f.parse()?,
        None => TraceFormat::from_path(&out.out),
    };
    write_trace(&trace, &out.out, format)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let rc = args.sketch.resolve()?;
    let trace = load_trace(&args.trace)?;
    let epochs = rc.epochs(trace.clone())?;
    let sizes: Vec<(usize, u64)> = epochs
        .epochs()
        .iter()
        .map(|e| (e.len(), epoch_total(e)))
        .collect();
    let reports = run_reports(&rc, epochs)?;
    fs::create_dir_all(&args.out)?;
    let mut inst = String::from(
        "epoch,records,total,threshold,reported,mean_traversed,one_node_fraction,occupied\n",
    );
    for (i, (report, (records, total))) in reports.iter().zip(sizes).enumerate() {
        if matches!(args.format, ReportFormat::Json | ReportFormat::Both) {
            fs::write(args.out.join(format!("epoch-{i:04}.json")), report.to_json() + "\n")?;
        }
        if matches!(args.format, ReportFormat::Csv | ReportFormat::Both) {
            fs::write(args.out.join(format!("epoch-{i:04}.csv")), report.to_csv())?;
        }
        let _ = writeln!(
            inst,
            "{i},{records},{total},{},{},{:.6},{:.6},{}",
            report.threshold,
            report.len(),
            report.traversal.mean(),
            report.traversal.fraction(1),
            report.occupancy.iter().sum::<usize>()
        );
    }
    fs::write(args.out.join("instrumentation.csv"), inst)?;
    Ok(())
}

const EVAL_HEADER: &str =
    "epoch,mode,spec,memory,threshold,precision,recall,rel_error,true_pos,false_pos,false_neg\n";

fn eval_row(out: &mut String, epoch: &str, cfg: &SketchConfig, th: Threshold, r: &AccuracyResult) {
    let _ = writeln!(
        out,
        "{epoch},{},{},{},{th},{:.6},{:.6},{:.6},{},{},{}",
        cfg.mode,
        cfg.spec,
        cfg.nominal_bytes(),
        r.precision,
        r.recall,
        r.relative_error,
        r.true_positives,
        r.false_positives,
        r.false_negatives
    );
}

fn thresholds(rc: &RunConfig, phis: &Option<Vec<f64>>) -> Vec<Threshold> {
    match phis {
        Some(p) => p.iter().map(|&x| Threshold::Phi(x)).collect(),
        None => vec![rc.threshold],
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let rc = args.sketch.resolve()?;
    let trace = rc.epochs(load_trace(&args.trace)?)?;
    let ths = thresholds(&rc, &args.phis);
    let modes = args.modes.clone().unwrap_or_else(|| vec![rc.mode]);
    let mut out = String::from(EVAL_HEADER);
    for mode in modes {
        let cfg = RunConfig { mode, ..rc.clone() }.sketch_config()?;
        let results = evaluate(&cfg, &trace, &ths)?;
        for (th, per_epoch) in ths.iter().zip(&results) {
            for (i, r) in per_epoch.iter().enumerate() {
                eval_row(&mut out, &i.to_string(), &cfg, *th, r);
            }
            eval_row(&mut out, "avg", &cfg, *th, &average(per_epoch));
        }
    }
    emit(args.out.as_deref(), &out)
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let rc = args.sketch.resolve()?;
    let trace = load_trace(&args.trace)?;
    let specs = args.specs.clone().unwrap_or_else(|| vec![rc.spec]);
    let mut out = String::from(
        "spec,mode,memory,records,reps,min_mups,median_mups,max_mups,detect_seconds,mean_traversed\n",
    );
    for spec in specs {
        let cfg = RunConfig { spec, ..rc.clone() }.sketch_config()?;
        let th = rc.threshold.for_total(trace.total());
        match throughput(&cfg, &trace.records, args.reps, th)? {
            Some(t) => {
                let _ = writeln!(
                    out,
                    "{spec},{},{},{},{},{:.3},{:.3},{:.3},{:.6},{:.4}",
                    cfg.mode,
                    cfg.nominal_bytes(),
                    trace.len(),
                    args.reps,
                    t.min,
                    t.median,
                    t.max,
                    t.detect_seconds,
                    t.mean_traversed
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{spec},{},{},0,{},NA,NA,NA,NA,NA",
                    cfg.mode,
                    cfg.nominal_bytes(),
                    args.reps
                );
            }
        }
    }
    emit(args.out.as_deref(), &out)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let rc = args.sketch.resolve()?;
    let ths = thresholds(&rc, &args.phis);
    let need_trace = || -> Result<Trace> {
        let p = args
            .trace
            .as_ref()
            .ok_or_else(|| Error::Config("this sweep needs --trace".into()))?;
        load_trace(p)
    };
    let mut out = String::new();
    match args.axis {
        Axis::Memory | Axis::Thresholds => {
            let trace = rc.epochs(need_trace()?)?;
            let sizings: Vec<Sizing> = match &args.memories {
                Some(m) => m.iter().map(|&b| Sizing::Memory(b)).collect(),
                None => vec![rc.sizing.clone()],
            };
            out.push_str("threshold,memory,precision,recall,rel_error\n");
            for sizing in sizings {
                let cfg = RunConfig { sizing, ..rc.clone() }.sketch_config()?;
                let results = evaluate(&cfg, &trace, &ths)?;
                for (th, per_epoch) in ths.iter().zip(&results) {
                    let a = average(per_epoch);
                    let _ = writeln!(
                        out,
                        "{th},{},{:.6},{:.6},{:.6}",
                        cfg.nominal_bytes(),
                        a.precision,
                        a.recall,
                        a.relative_error
                    );
                }
            }
        }
        Axis::Skew => {
            let fractions = args
                .fractions
                .clone()
                .unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.54]);
            let cfg = rc.sketch_config()?;
            out.push_str("skew_fraction,mpps,mean_traversed,precision,recall\n");
            for f in fractions {
                let trace = rc.epochs(gen_skew_controlled(args.n, args.topk, f, rc.seed)?)?;
                let th = ths[0];
                let t = throughput(&cfg, &trace.records, 1, th.for_total(trace.total()))?;
                let a = average(&evaluate(&cfg, &trace, &[th])?[0]);
                let (mpps, mean) = t.map_or((0.0, 0.0), |t| (t.median, t.mean_traversed));
                let _ = writeln!(
                    out,
                    "{f},{mpps:.3},{mean:.4},{:.6},{:.6}",
                    a.precision, a.recall
                );
            }
        }
        Axis::Epochs => {
            let base = need_trace()?;
            let lens = args
                .epoch_lens
                .clone()
                .unwrap_or_else(|| vec![500_000, 1_000_000, 5_000_000]);
            let cfg = rc.sketch_config()?;
            out.push_str("epoch_len,epochs,threshold,precision,recall,rel_error\n");
            for len in lens {
                let trace = split_epochs(base.clone(), len)?;
                let results = evaluate(&cfg, &trace, &ths)?;
                for (th, per_epoch) in ths.iter().zip(&results) {
                    let a = average(per_epoch);
                    let _ = writeln!(
                        out,
                        "{len},{},{th},{:.6},{:.6},{:.6}",
                        per_epoch.len(),
                        a.precision,
                        a.recall,
                        a.relative_error
                    );
                }
            }
        }
    }
    emit(args.out.as_deref(), &out)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(g) => cmd_gen(g),
        Command::Run(a) => cmd_run(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}
