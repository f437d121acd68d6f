mod config;
mod manifest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floorscope::absorption::{brute_force_enumerate, SetRecord, DEFAULT_WORK_BOUND};
use floorscope::de::{Channel, DEState};
use floorscope::floor::{
    parse_sweep, sweep, CorrectionVariance, Family, FloorConfig, FloorEstimate, MuSource,
};
use floorscope::search::{search_family, search_up_to};
use floorscope::sim::{run_is, run_mc, DecoderKind, IsTarget, SimConfig, SimMode, SimResult};
use floorscope::topology::{enumerate_family, reduction_closure, PruneReason, TopologyRecord};
use floorscope::TannerGraph;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use manifest::{Recorder, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Consistency(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Consistency(_) => 3,
            Failure::NonConvergence(_) => 4,
        }
    }
}

impl From<floorscope::Error> for Failure {
    fn from(e: floorscope::Error) -> Self {
        match e {
            floorscope::Error::NonConvergence { .. } => Failure::NonConvergence(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

#[derive(Parser)]
#[command(
    name = "floorscope",
    version,
    about = "Absorption-set search and error-floor estimation for LDPC codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find absorption sets by topology-guided (or exhaustive) search.
    Search(SearchArgs),
    /// List hidden-check topologies of an (a,b) family.
    EnumerateTopologies(TopoArgs),
    /// Gaussian-approximation density evolution means and check gains.
    De(DeArgs),
    /// Analytic BER/FER floor over an Eb/N0 sweep.
    Estimate(EstimateArgs),
    /// Belief-propagation Monte Carlo or importance sampling.
    Simulate(SimulateArgs),
    /// Join analytic and simulated curves into one long-format CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Flat JSON file with default values for any of this command's flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Output files of one run, written together with the manifest.
struct Outputs {
    files: Vec<(&'static str, String)>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { files: Vec::new() }
    }

    fn add(&mut self, name: &'static str, body: String) {
        self.files.push((name, body));
    }

    /// Writes every file and the manifest to `out`, or the first file to
    /// stdout.
    fn emit(self, out: Option<&Path>, manifest: &RunManifest) -> Result<(), Failure> {
        let Some(dir) = out else {
            if let Some((_, body)) = self.files.first() {
                print!("{body}");
            }
            return Ok(());
        };
        let io = |p: &Path, e: std::io::Error| Failure::Input(format!("{}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (name, body) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| io(&p, e))?;
        }
        let p = dir.join(manifest::FILE_NAME);
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
        std::fs::write(&p, text + "\n").map_err(|e| io(&p, e))
    }
}

fn set_workers(workers: usize) -> Result<(), Failure> {
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Failure::Input(format!("worker pool: {e}")))?;
    }
    Ok(())
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Input(format!("--{} is required", name.replace('_', "-"))))
}

// ---------------------------------------------------------------- search

#[derive(Args, Serialize)]
struct SearchArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Parity-check matrix in alist format.
    #[arg(long)]
    alist: Option<PathBuf>,
    /// Search every set with at most this many variables.
    #[arg(long)]
    max_a: Option<usize>,
    /// Search one (a,b) family; needs --b.
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Skip topologies with checks touched four times.
    #[arg(long)]
    pairwise_only: bool,
    /// Test every subset instead (with --max-a only).
    #[arg(long)]
    brute_force: bool,
    /// Largest number of subsets the exhaustive search may test.
    #[arg(long, env = "FLOORSCOPE_WORK_BOUND")]
    work_bound: Option<u64>,
    #[arg(long, env = "FLOORSCOPE_WORKERS")]
    workers: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SearchConfig {
    alist: Option<PathBuf>,
    max_a: Option<usize>,
    a: Option<usize>,
    b: Option<usize>,
    pairwise_only: bool,
    brute_force: bool,
    work_bound: u64,
    workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            alist: None,
            max_a: None,
            a: None,
            b: None,
            pairwise_only: false,
            brute_force: false,
            work_bound: DEFAULT_WORK_BOUND as u64,
            workers: 0,
        }
    }
}

fn cmd_search(args: SearchArgs) -> Result<(), Failure> {
    let cfg: SearchConfig = config::resolve(&args, args.common.config.as_deref())?;
    set_workers(cfg.workers)?;
    let mut rec = Recorder::start("search");
    let alist = required(cfg.alist.clone(), "alist")?;
    let g = TannerGraph::parse_alist(&rec.code(&alist)?)?;
    let catalog = match (cfg.max_a, cfg.a, cfg.b) {
        (Some(max_a), None, None) if cfg.brute_force => {
            brute_force_enumerate(&g, max_a, cfg.work_bound as u128)?
        }
        (Some(max_a), None, None) => search_up_to(&g, max_a, !cfg.pairwise_only)?,
        (None, Some(a), Some(b)) if !cfg.brute_force => {
            search_family(&g, a, b, !cfg.pairwise_only)?
        }
        _ => {
            return Err(Failure::Input(
                "give either --max-a or both --a and --b (--brute-force needs --max-a)".into(),
            ))
        }
    };
    eprintln!("{} absorption sets", catalog.len());
    for note in catalog.codeword_notes() {
        eprintln!("note: {note}");
    }
    let mut out = Outputs::new();
    out.add("catalog.json", catalog.to_json() + "\n");
    out.add("summary.csv", catalog.summary_csv());
    out.emit(args.common.out.as_deref(), &rec.finish(&cfg, None))
}

// ---------------------------------------------------------------- topologies

#[derive(Args, Serialize)]
struct TopoArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Variable node degree.
    #[arg(long)]
    d_v: Option<usize>,
    #[arg(long)]
    pairwise_only: bool,
    /// Family known to be absent from the code, as `a,b`; repeatable.
    #[arg(long)]
    absent: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TopoConfig {
    a: Option<usize>,
    b: Option<usize>,
    d_v: usize,
    pairwise_only: bool,
    absent: Vec<String>,
}

impl Default for TopoConfig {
    fn default() -> Self {
        TopoConfig {
            a: None,
            b: None,
            d_v: 6,
            pairwise_only: false,
            absent: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct TopologyRow {
    class: Vec<usize>,
    topology: TopologyRecord,
    pruned_by: Option<PruneReason>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Input(format!("expected a,b but got '{s}'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_topologies(args: TopoArgs) -> Result<(), Failure> {
    let cfg: TopoConfig = config::resolve(&args, args.common.config.as_deref())?;
    let rec = Recorder::start("enumerate-topologies");
    let (a, b) = (required(cfg.a, "a")?, required(cfg.b, "b")?);
    let absent = cfg
        .absent
        .iter()
        .map(|s| parse_pair(s))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let classes = enumerate_family(a, b, cfg.d_v, !cfg.pairwise_only)?;
    let rows: Vec<TopologyRow> = reduction_closure(&classes, &absent)
        .into_iter()
        .map(|v| TopologyRow {
            class: v.deg_seq,
            topology: v.topology.to_record(cfg.d_v),
            pruned_by: v.pruned_by,
        })
        .collect();
    let kept = rows.iter().filter(|r| r.pruned_by.is_none()).count();
    eprintln!(
        "{} classes, {} topologies, {kept} not pruned",
        classes.len(),
        rows.len()
    );
    let mut out = Outputs::new();
    out.add(
        "topologies.json",
        serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
    );
    out.emit(args.common.out.as_deref(), &rec.finish(&cfg, None))
}

// ---------------------------------------------------------------- de

#[derive(Args, Serialize)]
struct DeArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Eb/N0 in dB, single value or start:stop:step.
    #[arg(long)]
    ebno: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    d_v: Option<usize>,
    #[arg(long)]
    d_c: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DeConfig {
    ebno: String,
    iters: usize,
    d_v: usize,
    d_c: usize,
    rate: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            ebno: "5".into(),
            iters: 12,
            d_v: 6,
            d_c: 32,
            rate: 1723.0 / 2048.0,
        }
    }
}

fn cmd_de(args: DeArgs) -> Result<(), Failure> {
    let cfg: DeConfig = config::resolve(&args, args.common.config.as_deref())?;
    let rec = Recorder::start("de");
    let mut csv = String::from("ebno_db,iteration,m_v2c,m_ex,g_i\n");
    for ebno in parse_sweep(&cfg.ebno)? {
        let st = DEState::at(cfg.d_v, cfg.d_c, Channel::new(ebno, cfg.rate), cfg.iters)?;
        for i in 0..st.iters() {
            let _ = writeln!(
                csv,
                "{ebno},{},{},{},{}",
                i + 1,
                st.m_v2c[i],
                st.m_ex[i],
                st.gains[i]
            );
        }
    }
    let mut out = Outputs::new();
    out.add("de.csv", csv);
    out.emit(args.common.out.as_deref(), &rec.finish(&cfg, None))
}

// ---------------------------------------------------------------- estimate

#[derive(Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Eb/N0 in dB, single value or start:stop:step.
    #[arg(long)]
    ebno: Option<String>,
    /// Density evolution iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// JSON list of families, or a catalog written by `search`.
    #[arg(long)]
    families: Option<PathBuf>,
    /// Code the families came from; only its digest is recorded.
    #[arg(long)]
    alist: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k_info: Option<usize>,
    #[arg(long)]
    d_v: Option<usize>,
    #[arg(long)]
    d_c: Option<usize>,
    /// Treat every check gain as 1.
    #[arg(long)]
    no_gains: bool,
    /// Mix over polarity reversals of the internal checks.
    #[arg(long)]
    polarity: bool,
    /// Start the reversal sum at three wrong inputs.
    #[arg(long)]
    paper_faithful_pp: bool,
    /// Variance twice the mean for the extrinsic term.
    #[arg(long)]
    consistent_variance: bool,
    /// Add reversal variances instead of their standard deviations.
    #[arg(long)]
    independent_corrections: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EstimateConfig {
    ebno: String,
    iters: usize,
    families: Option<PathBuf>,
    alist: Option<PathBuf>,
    n: usize,
    k_info: usize,
    d_v: usize,
    d_c: usize,
    no_gains: bool,
    polarity: bool,
    paper_faithful_pp: bool,
    consistent_variance: bool,
    independent_corrections: bool,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        let base = FloorConfig::ieee_8023an();
        EstimateConfig {
            ebno: "5".into(),
            iters: base.iters,
            families: None,
            alist: None,
            n: base.n,
            k_info: base.k_info,
            d_v: base.d_v,
            d_c: base.d_c,
            no_gains: false,
            polarity: false,
            paper_faithful_pp: false,
            consistent_variance: false,
            independent_corrections: false,
        }
    }
}

fn families_from(text: &str, path: &Path) -> Result<Vec<Family>, Failure> {
    if let Ok(f) = serde_json::from_str::<Vec<Family>>(text) {
        return Ok(f);
    }
    let records: Vec<SetRecord> = serde_json::from_str(text).map_err(|e| {
        Failure::Input(format!(
            "{}: neither a family list nor a catalog: {e}",
            path.display()
        ))
    })?;
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for r in &records {
        *counts.entry((r.a, r.b)).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|((a, b), multiplicity)| Family {
            a,
            b,
            multiplicity,
            mu: MuSource::Approx,
            internal_checks: None,
        })
        .collect())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let cfg: EstimateConfig = config::resolve(&args, args.common.config.as_deref())?;
    let mut rec = Recorder::start("estimate");
    let mut fc = FloorConfig::ieee_8023an();
    fc.ebno_sweep = parse_sweep(&cfg.ebno)?;
    fc.iters = cfg.iters;
    (fc.n, fc.k_info, fc.d_v, fc.d_c) = (cfg.n, cfg.k_info, cfg.d_v, cfg.d_c);
    if let Some(path) = &cfg.families {
        fc.families = families_from(&rec.input(path)?, path)?;
    }
    if let Some(path) = &cfg.alist {
        rec.code(path)?;
    }
    let r = &mut fc.refinements;
    r.check_gains = !cfg.no_gains;
    r.polarity_correction = cfg.polarity;
    r.paper_faithful_pp = cfg.paper_faithful_pp;
    r.consistent_variance = cfg.consistent_variance;
    if cfg.independent_corrections {
        r.correction_variance = CorrectionVariance::Independent;
    }
    let est = sweep(&fc)?;
    for p in &est.points {
        for w in &p.warnings {
            eprintln!("warning at {} dB: {w}", p.ebno_db);
        }
    }
    let mut out = Outputs::new();
    out.add("totals.csv", est.totals_csv());
    out.add("estimate.csv", est.to_csv());
    out.add("estimate.json", est.to_json() + "\n");
    out.emit(args.common.out.as_deref(), &rec.finish(&cfg, None))
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    alist: Option<PathBuf>,
    #[arg(long)]
    ebno: Option<f64>,
    /// mc or is.
    #[arg(long)]
    mode: Option<String>,
    /// Sets to bias towards: a catalog from `search` or a list of {vars, multiplicity}.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Use only the first N targets.
    #[arg(long)]
    max_targets: Option<usize>,
    /// Mean shift of target bits, or `auto` to move them onto the decision boundary.
    #[arg(long)]
    shift: Option<String>,
    /// Frame budget (per target for importance sampling); accepts 1e6.
    #[arg(long)]
    frames: Option<f64>,
    /// Stop after this many frame errors.
    #[arg(long)]
    events: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "FLOORSCOPE_WORKERS")]
    workers: Option<usize>,
    /// Decoder iterations per frame.
    #[arg(long)]
    iters: Option<usize>,
    /// sum-product or min-sum.
    #[arg(long)]
    decoder: Option<String>,
    /// Code rate for the noise level; defaults to 1 - m/n.
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulateConfig {
    alist: Option<PathBuf>,
    ebno: f64,
    mode: SimMode,
    targets: Option<PathBuf>,
    max_targets: Option<usize>,
    shift: Value,
    frames: f64,
    events: u64,
    seed: u64,
    workers: usize,
    iters: usize,
    decoder: DecoderKind,
    rate: Option<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let d = SimConfig::default();
        SimulateConfig {
            alist: None,
            ebno: d.ebno_db,
            mode: d.mode,
            targets: None,
            max_targets: None,
            shift: Value::from("auto"),
            frames: d.max_frames as f64,
            events: d.target_error_events,
            seed: d.seed,
            workers: d.workers,
            iters: d.max_decoder_iters,
            decoder: d.decoder,
            rate: d.rate,
        }
    }
}

fn parse_shift(v: &Value) -> Result<f64, Failure> {
    match v {
        Value::String(s) if s == "auto" => Ok(SimConfig::default().is_shift),
        Value::String(s) => s
            .parse()
            .map_err(|_| Failure::Input(format!("bad shift '{s}'"))),
        Value::Number(n) => Ok(n.as_f64().unwrap_or(f64::NAN)),
        other => Err(Failure::Input(format!("bad shift {other}"))),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg: SimulateConfig = config::resolve(&args, args.common.config.as_deref())?;
    let mut rec = Recorder::start("simulate");
    let alist = required(cfg.alist.clone(), "alist")?;
    let g = TannerGraph::parse_alist(&rec.code(&alist)?)?;
    if !(cfg.frames >= 1.0 && cfg.frames.fract() == 0.0 && cfg.frames <= u64::MAX as f64) {
        return Err(Failure::Input(format!(
            "frames must be a positive integer, got {}",
            cfg.frames
        )));
    }
    let mut targets = Vec::new();
    if let Some(path) = &cfg.targets {
        let text = rec.input(path)?;
        targets = serde_json::from_str::<Vec<IsTarget>>(&text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        if let Some(k) = cfg.max_targets {
            targets.truncate(k);
        }
    }
    let sc = SimConfig {
        ebno_db: cfg.ebno,
        rate: cfg.rate,
        max_decoder_iters: cfg.iters,
        max_frames: cfg.frames as u64,
        target_error_events: cfg.events,
        mode: cfg.mode,
        is_targets: targets,
        is_shift: parse_shift(&cfg.shift)?,
        seed: cfg.seed,
        workers: cfg.workers,
        decoder: cfg.decoder,
        ..SimConfig::default()
    };
    let res = match sc.mode {
        SimMode::Mc => run_mc(&g, &sc)?,
        SimMode::Is => run_is(&g, &sc)?,
    };
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("ebno_db,mode,frames,frame_errors,fer,fer_std_error,ber,ber_std_error");
    eprintln!(
        "{},{},{},{},{:e},{:e},{:e},{:e}",
        res.ebno_db,
        mode_name(res.mode),
        res.frames,
        res.frame_errors,
        res.fer.mean(),
        res.fer.std_error(),
        res.ber.mean(),
        res.ber.std_error()
    );
    let seed = sc.seed;
    let mut out = Outputs::new();
    out.add(
        "sim.json",
        serde_json::to_string_pretty(&res).expect("result serializes") + "\n",
    );
    out.emit(args.common.out.as_deref(), &rec.finish(&cfg, Some(seed)))
}

fn mode_name(m: SimMode) -> &'static str {
    match m {
        SimMode::Mc => "mc",
        SimMode::Is => "is",
    }
}

// ---------------------------------------------------------------- report

#[derive(Args, Serialize)]
struct ReportArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// estimate.json from `estimate`.
    #[arg(long)]
    analytic: Option<PathBuf>,
    /// sim.json files from `simulate`; repeatable.
    #[arg(long)]
    sim: Vec<PathBuf>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReportConfig {
    analytic: Option<PathBuf>,
    sim: Vec<PathBuf>,
}

struct Row {
    ebno_db: f64,
    source: &'static str,
    ber: f64,
    fer: f64,
    se: Option<(f64, f64)>,
}

fn cmd_report(args: ReportArgs) -> Result<(), Failure> {
    let cfg: ReportConfig = config::resolve(&args, args.common.config.as_deref())?;
    let mut rec = Recorder::start("report");
    if cfg.analytic.is_none() && cfg.sim.is_empty() {
        return Err(Failure::Input(
            "nothing to report: give --analytic and/or --sim".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut digests: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut note_digest = |path: &Path| -> Result<(), Failure> {
        if let Some(d) = manifest::beside(path)?.and_then(|m| m.code_digest) {
            digests
                .entry(d)
                .or_default()
                .push(path.display().to_string());
        }
        Ok(())
    };
    if let Some(path) = &cfg.analytic {
        let est: FloorEstimate = serde_json::from_str(&rec.input(path)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        note_digest(path)?;
        rows.extend(est.points.iter().map(|p| Row {
            ebno_db: p.ebno_db,
            source: "analytic",
            ber: p.ber,
            fer: p.fer,
            se: None,
        }));
    }
    for path in &cfg.sim {
        let r: SimResult = serde_json::from_str(&rec.input(path)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        note_digest(path)?;
        rows.push(Row {
            ebno_db: r.ebno_db,
            source: mode_name(r.mode),
            ber: r.ber.mean(),
            fer: r.fer.mean(),
            se: Some((r.ber.std_error(), r.fer.std_error())),
        });
    }
    if digests.len() > 1 {
        let detail = digests
            .iter()
            .map(|(d, files)| format!("{} ({})", &d[..12], files.join(", ")))
            .collect::<Vec<_>>()
            .join(" vs ");
        return Err(Failure::Consistency(format!(
            "inputs refer to different codes: {detail}"
        )));
    }
    rec.set_code_digest(digests.into_keys().next());
    rows.sort_by(|x, y| x.ebno_db.total_cmp(&y.ebno_db));
    let mut csv = String::from("ebno_db,source,ber,fer,ber_std_error,fer_std_error\n");
    for r in &rows {
        let (bs, fs) =
            r.se.map(|(b, f)| (format!("{b:e}"), format!("{f:e}")))
                .unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{:e},{:e},{bs},{fs}",
            r.ebno_db, r.source, r.ber, r.fer
        );
    }
    let mut out = Outputs::new();
    out.add("report.csv", csv);
    out.emit(args.common.out.as_deref(), &rec.finish(&cfg, None))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Search(a) => cmd_search(a),
        Command::EnumerateTopologies(a) => cmd_topologies(a),
        Command::De(a) => cmd_de(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
