//! `cdregion` command-line tool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use cdregion::channel::{vars, ChannelError, Mode, Violation, DEFAULT_JOINT_CAP};
use cdregion::config::{ChannelFile, ConfigError, SchemeFile};
use cdregion::estimation::optimal_estimator;
use cdregion::region::{
    eliminate, evaluate_bounds, lemma_checks, matches_monostatic_template, monostatic_region, BoundSet,
    TemplateError,
};
use cdregion::search::{tradeoff, SearchConfig, SearchError};
use cdregion::simulator::{rate_feasibility_report, sweep, SimConfig, SimError, SimParams, SimReport};
use cdregion::{build_joint, validate, ChannelSpec, SchemeSpec};

#[derive(Parser)]
#[command(name = "cdregion", version, about = "Rate-distortion regions, trade-off curves and coding simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a channel (and optionally a scheme) for structural problems.
    Validate(ValidateArgs),
    /// Bounds, projected polytope and consistency checks of one scheme.
    Region(RegionArgs),
    /// Optimal state estimator of one scheme.
    Estimate(EstimateArgs),
    /// Best objective as a function of the distortion cap.
    Tradeoff(TradeoffArgs),
    /// Monte-Carlo run of the block-Markov coding scheme.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    scheme: PathBuf,
    /// Treat the scheme as strictly causal: encoders may not use the
    /// current side-information symbol.
    #[arg(long)]
    strictly_causal: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    scheme: Option<PathBuf>,
    #[arg(long)]
    strictly_causal: bool,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    out: PathBuf,
    /// Largest joint tensor to build.
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    out: PathBuf,
    /// Variables the estimator sees (default: all auxiliaries and Y, SR).
    #[arg(long, value_delimiter = ',')]
    conditioning: Option<Vec<String>>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Search settings as JSON; flags below override it.
    #[arg(long)]
    search: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strictly_causal: bool,
    #[arg(long, value_delimiter = ',', required = true)]
    d_grid: Vec<f64>,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Simulation settings as JSON; flags below override it.
    #[arg(long)]
    sim: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    n_sweep: Option<Vec<usize>>,
    /// Largest codebook or search space a trial may need.
    #[arg(long)]
    cap: Option<u128>,
}

/// A failed run, carrying its exit status.
#[derive(Debug)]
enum Failure {
    Io(String),
    Validation(String),
    Capacity(String),
    Empty(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Capacity(_) => 3,
            Failure::Empty(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Validation(m) | Failure::Capacity(m) | Failure::Empty(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ChannelError> for Failure {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::Capacity { .. } => Failure::Capacity(e.to_string()),
            ChannelError::Invalid(v) => Failure::Validation(violation_list(&v)),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<cdregion::prob::ProbError> for Failure {
    fn from(e: cdregion::prob::ProbError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Channel(c) => c.into(),
            SearchError::Empty { .. } => Failure::Empty(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Channel(c) => c.into(),
            SimError::Capacity { .. } => Failure::Capacity(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn violation_list(v: &[Violation]) -> String {
    let mut s = format!("{} violation(s):", v.len());
    for x in v {
        let _ = write!(s, "\n  {x}");
    }
    s
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::write(dir.join(name), contents).map_err(|e| Failure::Io(format!("{}: {e}", dir.join(name).display())))
}

fn load_channel(path: &Path) -> Result<ChannelSpec, Failure> {
    Ok(ChannelFile::from_json(&read(path)?)?.to_spec()?)
}

fn load_scheme(path: &Path, channel: &ChannelSpec, strictly_causal: bool) -> Result<SchemeSpec, Failure> {
    let mut scheme = SchemeFile::from_json(&read(path)?)?.to_spec(channel)?;
    if strictly_causal {
        scheme.mode = Mode::StrictlyCausal;
    }
    Ok(scheme)
}

fn load_system(args: &SystemArgs) -> Result<(ChannelSpec, SchemeSpec), Failure> {
    let channel = load_channel(&args.channel)?;
    let scheme = load_scheme(&args.scheme, &channel, args.strictly_causal)?;
    let violations = validate(&channel, &scheme);
    if !violations.is_empty() {
        return Err(Failure::Validation(violation_list(&violations)));
    }
    Ok((channel, scheme))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    /// SHA-256 of `resolved_config.json`.
    config_sha256: String,
    seed: Option<u64>,
    started_unix: u64,
    finished_unix: Option<u64>,
    outputs: Vec<&'a str>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// An output directory with its manifest. The resolved configuration and
/// the manifest are written before any result file.
struct Run<'a> {
    dir: &'a Path,
    manifest: Manifest<'a>,
}

impl<'a> Run<'a> {
    fn start<C: Serialize>(
        dir: &'a Path,
        subcommand: &'a str,
        config: &C,
        seed: Option<u64>,
        outputs: Vec<&'a str>,
    ) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        let resolved = serde_json::to_string_pretty(config).expect("config serializes") + "\n";
        let hash = Sha256::digest(resolved.as_bytes());
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            config_sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
            started_unix: now(),
            finished_unix: None,
            outputs,
        };
        let run = Run { dir, manifest };
        run.write_manifest()?;
        write(dir, "resolved_config.json", &resolved)?;
        Ok(run)
    }

    fn write_manifest(&self) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        write(self.dir, "manifest.json", &text)
    }

    fn finish(mut self) -> Result<(), Failure> {
        self.manifest.finished_unix = Some(now());
        self.write_manifest()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let channel = load_channel(&args.channel)?;
    let scheme = match &args.scheme {
        Some(p) => load_scheme(p, &channel, args.strictly_causal)?,
        None => {
            let mut s = SchemeSpec::trivial(&channel);
            if args.strictly_causal {
                s.mode = Mode::StrictlyCausal;
            }
            s
        }
    };
    let violations = validate(&channel, &scheme);
    if violations.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::Validation(violation_list(&violations)))
    }
}

#[derive(Serialize)]
struct SystemConfig {
    channel: ChannelFile,
    scheme: SchemeFile,
    joint_cap: usize,
}

#[derive(Serialize)]
struct EstimateConfig {
    channel: ChannelFile,
    scheme: SchemeFile,
    joint_cap: usize,
    conditioning: Vec<String>,
}

fn cmd_region(args: &RegionArgs) -> Result<(), Failure> {
    let (channel, scheme) = load_system(&args.system)?;
    let cap = args.cap.unwrap_or(DEFAULT_JOINT_CAP);
    let config = SystemConfig { channel: ChannelFile::from_spec(&channel), scheme: SchemeFile::from_spec(&scheme), joint_cap: cap };
    let monostatic = matches_monostatic_template(&channel).is_ok();
    let mut outputs = vec!["bounds.csv", "inequalities.csv", "vertices.csv", "lemmas.csv"];
    if monostatic {
        outputs.push("monostatic.csv");
    }
    let run = Run::start(&args.out, "region", &config, None, outputs)?;

    let joint = build_joint(&channel, &scheme, cap)?;
    let bounds = evaluate_bounds(&joint)?;
    let polytope = eliminate(&bounds);
    let distortion = cdregion::estimation::min_distortion(&joint, &channel, &vars::OMEGA_Z)?;

    let mut csv = String::from("bound,value\n");
    for (name, v) in BoundSet::NAMES.iter().zip(bounds.as_array()) {
        let _ = writeln!(csv, "{name},{v}");
    }
    let _ = writeln!(csv, "distortion,{distortion}");
    write(run.dir, "bounds.csv", &csv)?;

    let mut csv = String::from("c0,c1,c2,rhs,rows\n");
    for q in polytope.inequalities() {
        let _ = writeln!(csv, "{},{},{},{},{}", q.coeffs[0], q.coeffs[1], q.coeffs[2], q.rhs, q.provenance.join(" "));
    }
    write(run.dir, "inequalities.csv", &csv)?;

    let mut csv = String::from("r0,r1,r2\n");
    for v in polytope.vertices() {
        let _ = writeln!(csv, "{},{},{}", v[0], v[1], v[2]);
    }
    write(run.dir, "vertices.csv", &csv)?;

    let lemmas = lemma_checks(&polytope, &joint)?;
    let mut csv = String::from("check,value\n");
    for (k, v) in [
        ("private_ceiling", lemmas.private_ceiling),
        ("total_ceiling", lemmas.total_ceiling),
        ("max_private_sum", lemmas.max_private_sum),
        ("max_total", lemmas.max_total),
        ("user1_information", lemmas.user1_information),
        ("user2_information", lemmas.user2_information),
        ("max_r1", lemmas.max_r1),
        ("max_r2", lemmas.max_r2),
    ] {
        let _ = writeln!(csv, "{k},{v}");
    }
    let _ = writeln!(csv, "user1_silenced,{}", lemmas.user1_silenced);
    let _ = writeln!(csv, "user2_silenced,{}", lemmas.user2_silenced);
    let _ = writeln!(csv, "violations,{}", lemmas.violations.len());
    for v in &lemmas.violations {
        let _ = writeln!(csv, "violation,\"{}\"", v.replace('"', "'"));
    }
    write(run.dir, "lemmas.csv", &csv)?;

    if monostatic {
        let x1 = joint.marginalize(&[vars::X1])?;
        let x2 = joint.marginalize(&[vars::X2])?;
        let pair = joint.marginalize(&[vars::X1, vars::X2])?;
        let n2 = x2.len();
        let independent = pair
            .probs()
            .iter()
            .enumerate()
            .all(|(i, p)| (p - x1.probs()[i / n2] * x2.probs()[i % n2]).abs() < 1e-12);
        let mut csv = String::from("rate_bound,distortion,general_max_r1,general_distortion\n");
        let general_r1 = polytope.max_objective([0.0, 1.0, 0.0]).map(|(v, _)| v);
        if independent {
            let point = monostatic_region(&channel, x1.probs(), x2.probs()).map_err(template_failure)?;
            let _ = writeln!(csv, "{},{},{},{distortion}", point.rate_bound, point.distortion, opt(general_r1));
        } else {
            let _ = writeln!(csv, ",,{},{distortion}", opt(general_r1));
        }
        write(run.dir, "monostatic.csv", &csv)?;
    }
    let empty = polytope.is_empty();
    run.finish()?;
    if empty {
        return Err(Failure::Empty("the region is empty".into()));
    }
    Ok(())
}

fn template_failure(e: TemplateError) -> Failure {
    match e {
        TemplateError::Channel(c) => c.into(),
        other => Failure::Validation(other.to_string()),
    }
}

fn cmd_estimate(args: &EstimateArgs) -> Result<(), Failure> {
    let (channel, scheme) = load_system(&args.system)?;
    let cap = args.cap.unwrap_or(DEFAULT_JOINT_CAP);
    let conditioning =
        args.conditioning.clone().unwrap_or_else(|| vars::OMEGA_Z.iter().map(|s| s.to_string()).collect());
    let config = EstimateConfig {
        channel: ChannelFile::from_spec(&channel),
        scheme: SchemeFile::from_spec(&scheme),
        joint_cap: cap,
        conditioning: conditioning.clone(),
    };
    let run = Run::start(&args.out, "estimate", &config, None, vec!["estimator.csv", "distortion.csv"])?;
    let joint = build_joint(&channel, &scheme, cap)?;
    let estimator = optimal_estimator(&joint, &channel, &conditioning)?;
    let sizes: Vec<usize> =
        conditioning.iter().map(|v| joint.alphabet(v).map(|a| a.size)).collect::<Result<_, _>>()?;

    let mut csv = conditioning.join(",");
    csv.push_str(if conditioning.is_empty() { "s_hat\n" } else { ",s_hat\n" });
    let mut cell = vec![0usize; sizes.len()];
    for &s_hat in estimator.table() {
        for c in &cell {
            let _ = write!(csv, "{c},");
        }
        let _ = writeln!(csv, "{s_hat}");
        for k in (0..cell.len()).rev() {
            cell[k] += 1;
            if cell[k] < sizes[k] {
                break;
            }
            cell[k] = 0;
        }
    }
    write(run.dir, "estimator.csv", &csv)?;
    write(run.dir, "distortion.csv", &format!("expected_distortion\n{}\n", estimator.expected_distortion()))?;
    run.finish()
}

#[derive(Serialize)]
struct TradeoffConfig {
    channel: ChannelFile,
    search: SearchConfig,
    d_grid: Vec<f64>,
}

fn cmd_tradeoff(args: &TradeoffArgs) -> Result<(), Failure> {
    let channel = load_channel(&args.channel)?;
    let mut search: SearchConfig = match &args.search {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::Validation(format!("search config: {e}")))?,
        None => SearchConfig::default(),
    };
    if let Some(seed) = args.seed {
        search.seed = seed;
    }
    if let Some(cap) = args.cap {
        search.joint_cap = cap;
    }
    if args.strictly_causal {
        search.mode = Mode::StrictlyCausal;
    }
    search.check()?;
    let config = TradeoffConfig { channel: ChannelFile::from_spec(&channel), search: search.clone(), d_grid: args.d_grid.clone() };
    let run = Run::start(&args.out, "tradeoff", &config, Some(search.seed), vec!["tradeoff.csv"])?;
    let curve = tradeoff(&channel, &search, &args.d_grid)?;

    let mut csv = String::from("distortion_cap,raw_objective,objective,hull_objective,r0,r1,r2,distortion,scheme\n");
    for p in &curve.points {
        let rates = p.rates.map(|r| r.as_array());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            p.distortion_cap,
            opt(p.raw_objective),
            opt(p.objective),
            opt(p.hull_objective),
            opt(rates.map(|r| r[0])),
            opt(rates.map(|r| r[1])),
            opt(rates.map(|r| r[2])),
            opt(p.distortion),
            p.digest.clone().unwrap_or_default()
        );
    }
    write(run.dir, "tradeoff.csv", &csv)?;
    let empty = curve.points.iter().all(|p| p.objective.is_none());
    run.finish()?;
    if empty {
        return Err(Failure::Empty("no scheme met any distortion cap of the grid".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateConfig {
    channel: ChannelFile,
    scheme: SchemeFile,
    params: SimParams,
    n_sweep: Vec<usize>,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let (channel, scheme) = load_system(&args.system)?;
    let mut params: SimParams = match &args.sim {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::Validation(format!("simulation config: {e}")))?,
        None => serde_json::from_str("{}").expect("defaults"),
    };
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    if let Some(eps) = args.epsilon {
        params.epsilon = eps;
    }
    if let Some(t) = args.trials {
        params.trials = t;
    }
    if let Some(cap) = args.cap {
        params.codebook_cap = cap;
    }
    let lengths = args.n_sweep.clone().unwrap_or_else(|| vec![params.n]);
    let config = SimulateConfig {
        channel: ChannelFile::from_spec(&channel),
        scheme: SchemeFile::from_spec(&scheme),
        params: params.clone(),
        n_sweep: lengths.clone(),
    };
    let run = Run::start(
        &args.out,
        "simulate",
        &config,
        Some(params.seed),
        vec!["simulation.csv", "taxonomy.csv", "feasibility.csv"],
    )?;
    let sim = SimConfig { channel, scheme, params };
    let reports = sweep(&sim, &lengths)?;
    let feasibility = rate_feasibility_report(&sim)?;

    let mut csv = String::from(SimReport::CSV_HEADER);
    csv.push('\n');
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    write(run.dir, "simulation.csv", &csv)?;

    let mut csv = String::from("n,feedback,covering,backward,forward,short1,short2,short3,alpha1,alpha2\n");
    for r in &reports {
        let t = r.taxonomy;
        let [a, b, c] = r.short_blocks;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{a},{b},{c},{},{}",
            r.n, t.feedback, t.covering, t.backward, t.forward, r.alpha1, r.alpha2
        );
    }
    write(run.dir, "taxonomy.csv", &csv)?;

    let mut csv = String::from("name,stage,direction,rate,information,slack,satisfied\n");
    for c in &feasibility.constraints {
        let dir = if c.direction == cdregion::simulator::Direction::Below { "below" } else { "above" };
        let _ =
            writeln!(csv, "{},{},{dir},{},{},{},{}", c.name, c.stage, c.rate, c.information, c.slack, c.satisfied);
    }
    for g in &feasibility.guards {
        let _ = writeln!(csv, "{},short_blocks,margin,{},{},{},{}", g.name, g.alpha, g.information, g.information - g.alpha, g.holds);
    }
    write(run.dir, "feasibility.csv", &csv)?;
    run.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::Region(a) => cmd_region(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Tradeoff(a) => cmd_tradeoff(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

