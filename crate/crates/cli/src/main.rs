//! Command-line harness for the change-detection library.
//!
//! Subcommands bind the library modules one-to-one: scenario sampling,
//! detection on recorded files, divergence/assumption reports, statistic
//! traces, and Monte-Carlo ARL/ADD estimation with threshold sweeps.
//! Machine-readable artifacts (JSON, CSV) go to `--out`; a short human
//! summary goes to standard output.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on usage errors, and 3
//! when `--check` finds a failed condition.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wsglr::distributions::DEFAULT_MC_SAMPLES;
use wsglr::{
    compare_detectors, detect_on_file, drift_moments, estimate_add, estimate_arl, growth_rates,
    growth_rates_mc, tradeoff_sweep, AnyDetector, ChangePointPolicy, DetectorConfig, DetectorKind,
    Error as CoreError, GenFamily, QuadScenario, TrialPlan,
};

/// Desk-scale defaults keep every subcommand interactive; `--full-scale`
/// switches to the long protocol used for final figures.
const DESK_TRIALS: usize = 512;
const DESK_HORIZON: u64 = 8192;
const FULL_TRIALS: usize = 4096;
const FULL_HORIZON: u64 = 65536;

#[derive(Parser)]
#[command(
    name = "wsglr",
    version,
    about = "Quickest change detection under nuisance changes",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report KL divergences, the growth-rate floor, drift moments, and
    /// whether the detectability conditions hold for a scenario
    CheckAssumptions(CheckAssumptionsArgs),
    /// Sample a scenario into a single-column CSV file
    Generate(GenerateArgs),
    /// Run a detector over a recorded single-column CSV file
    Detect(DetectArgs),
    /// Run a detector over one simulated stream without stopping and emit
    /// the per-step statistic as CSV
    Trace(TraceArgs),
    /// Estimate the average run length to false alarm
    Arl(ArlArgs),
    /// Estimate the average detection delay
    Add(AddArgs),
    /// Sweep thresholds and emit an ARL/ADD trade-off curve as CSV
    Tradeoff(TradeoffArgs),
    /// Sweep several detectors over a shared threshold grid on identically
    /// seeded streams
    Compare(CompareArgs),
}

/// Detector selection shared by most subcommands. `--detector` takes a kind
/// name, inline config JSON, or a path to a config JSON file; the remaining
/// flags override individual fields.
#[derive(Args, Clone, Default)]
struct DetectorArgs {
    /// Detector: cusum | glr | sglr | wsglr | fma | two_stage | gen_wsglr,
    /// inline JSON, or a JSON file path
    #[arg(long, value_name = "KIND|JSON|PATH")]
    detector: Option<String>,

    /// Stopping threshold
    #[arg(long, value_name = "REAL", allow_negative_numbers = true)]
    b: Option<f64>,

    /// Nuisance-stage threshold for two_stage; defaults to the value of --b
    #[arg(long, value_name = "REAL", allow_negative_numbers = true)]
    b_n: Option<f64>,

    /// Window length; defaults to the smallest power of two >= 2b/I
    #[arg(long, value_name = "COUNT")]
    m_b: Option<usize>,

    /// Shortest window the generalized detector evaluates
    #[arg(long, value_name = "COUNT")]
    m_b_prime: Option<usize>,

    /// Post-change family for gen_wsglr: inline JSON or a JSON file path
    #[arg(long, value_name = "JSON|PATH")]
    family: Option<String>,

    /// Skip the generalized detector's parameter-interior check
    #[arg(long)]
    disable_interior_check: bool,
}

impl DetectorArgs {
    /// Build the config from the flags alone.
    fn resolve(&self) -> Result<DetectorConfig> {
        self.resolve_with(None)
    }

    /// Build the config against an optional base (from a plan file). The
    /// base is used as-is when no `--detector` is given; individual flags
    /// always override fields.
    fn resolve_with(&self, base: Option<DetectorConfig>) -> Result<DetectorConfig> {
        let mut config = match (self.detector.as_deref(), base) {
            (Some(spec), base) => {
                if let Some(kind) = parse_kind(spec) {
                    let b = self
                        .b
                        .or(base.map(|c| c.b))
                        .context("--b is required when --detector names a kind")?;
                    DetectorConfig::new(kind, b)
                } else {
                    let text = inline_or_file(spec)
                        .context("--detector must be a kind name, inline JSON, or a JSON file")?;
                    DetectorConfig::from_json(&text).context("parsing detector config")?
                }
            }
            (None, Some(base)) => base,
            (None, None) => bail!(
                "--detector is required (a kind name, inline JSON, or a JSON file path)"
            ),
        };
        if let Some(b) = self.b {
            config.b = b;
        }
        if let Some(b_n) = self.b_n {
            config.b_n = Some(b_n);
        }
        if let Some(m) = self.m_b {
            config.m_b = Some(m);
        }
        if let Some(m) = self.m_b_prime {
            config.m_b_prime = Some(m);
        }
        if let Some(spec) = &self.family {
            let text = inline_or_file(spec)
                .context("--family must be inline JSON or a JSON file path")?;
            let family: GenFamily =
                serde_json::from_str(&text).context("parsing family description")?;
            config.family = Some(family);
        }
        if self.disable_interior_check {
            config.disable_interior_check = true;
        }
        Ok(config)
    }
}

/// Everything needed to assemble a [`TrialPlan`]: either a complete plan
/// file or a scenario plus detector flags, with optional overrides.
#[derive(Args)]
struct PlanArgs {
    /// Trial-plan JSON file (models, change policies, detector, trials,
    /// horizon, seed)
    #[arg(long, value_name = "PATH", conflicts_with = "scenario")]
    plan: Option<PathBuf>,

    /// Scenario JSON file with the four densities and fixed change points
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,

    #[command(flatten)]
    detector: DetectorArgs,

    /// Nuisance change policy: never, uniform, or a 1-based time
    #[arg(long, value_name = "POLICY")]
    nu_n: Option<String>,

    /// Critical change policy: never, uniform, or a 1-based time
    #[arg(long, value_name = "POLICY")]
    nu_c: Option<String>,

    /// Monte-Carlo trials [default: 512, or 4096 with --full-scale]
    #[arg(long, value_name = "COUNT")]
    trials: Option<usize>,

    /// Samples per trial [default: 8192, or 65536 with --full-scale]
    #[arg(long, value_name = "COUNT")]
    horizon: Option<u64>,

    /// Base seed; trial i streams from seed XOR i [default: 0]
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Long protocol: 4096 trials over 65536 samples
    #[arg(long)]
    full_scale: bool,
}

impl PlanArgs {
    /// Assemble the plan. With `arl_arm` set, a scenario-built plan defaults
    /// the critical change policy to `never` (the run-length convention)
    /// instead of the scenario's fixed value.
    fn build(&self, arl_arm: bool) -> Result<TrialPlan> {
        self.build_with(arl_arm, None)
    }

    /// Like [`Self::build`], but `fallback` stands in for a missing
    /// `--detector` (the compare subcommand supplies its own kinds).
    fn build_with(
        &self,
        arl_arm: bool,
        fallback: Option<DetectorConfig>,
    ) -> Result<TrialPlan> {
        let mut plan = match (&self.plan, &self.scenario) {
            (Some(path), None) => {
                let text = read_file(path)?;
                let mut plan = TrialPlan::from_json(&text)
                    .with_context(|| format!("parsing plan {}", path.display()))?;
                plan.detector = self.detector.resolve_with(Some(plan.detector))?;
                plan
            }
            (None, Some(path)) => {
                let scenario = load_scenario(path)?;
                let detector = self.detector.resolve_with(fallback)?;
                let nu_n = ChangePointPolicy::from_fixed(scenario.nu_n);
                let nu_c = if arl_arm {
                    ChangePointPolicy::Never
                } else {
                    ChangePointPolicy::from_fixed(scenario.nu_c)
                };
                TrialPlan::new(
                    scenario.models,
                    nu_n,
                    nu_c,
                    detector,
                    DESK_TRIALS,
                    DESK_HORIZON,
                    0,
                )
            }
            (None, None) => bail!("one of --plan or --scenario is required"),
            (Some(_), Some(_)) => unreachable!("clap rejects --plan with --scenario"),
        };
        if let Some(policy) = &self.nu_n {
            plan.nu_n = parse_policy(policy)?;
        }
        if let Some(policy) = &self.nu_c {
            plan.nu_c = parse_policy(policy)?;
        }
        if self.full_scale || self.trials.is_some() {
            plan.n_trials = self.trials.unwrap_or(FULL_TRIALS);
        }
        if self.full_scale || self.horizon.is_some() {
            plan.horizon = self.horizon.unwrap_or(FULL_HORIZON);
        }
        if let Some(seed) = self.seed {
            plan.base_seed = seed;
        }
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Args)]
struct CheckAssumptionsArgs {
    /// Scenario JSON file
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,

    /// Write the full report as JSON to this path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Exit with status 3 when a checked condition fails
    #[arg(long)]
    check: bool,

    /// Seed for the Monte-Carlo fallback when no closed form exists
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario JSON file
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,

    /// Number of samples to draw
    #[arg(long, value_name = "COUNT", default_value_t = DESK_HORIZON)]
    horizon: u64,

    /// Stream seed
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,

    /// Output CSV path (single `x` column)
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Input single-column CSV (an `x` header line is tolerated)
    #[arg(long, value_name = "PATH")]
    input: PathBuf,

    /// Scenario JSON supplying the four densities (change points ignored)
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,

    #[command(flatten)]
    detector: DetectorArgs,

    /// First-difference the series before detection
    #[arg(long)]
    detrend: bool,

    /// Write the outcome report as JSON to this path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Write the per-step statistic trace as CSV to this path
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// Scenario JSON file
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,

    #[command(flatten)]
    detector: DetectorArgs,

    /// Number of samples to simulate (the run never stops early)
    #[arg(long, value_name = "COUNT", default_value_t = DESK_HORIZON)]
    horizon: u64,

    /// Stream seed
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,

    /// Output CSV path; standard output when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ArlArgs {
    #[command(flatten)]
    plan: PlanArgs,

    /// Write the estimate as JSON to this path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AddArgs {
    #[command(flatten)]
    plan: PlanArgs,

    /// Write the estimate as JSON to this path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[command(flatten)]
    plan: PlanArgs,

    /// Comma-separated threshold grid
    #[arg(long, value_name = "LIST", default_value = "2,4,6,8,10")]
    b_grid: String,

    /// Output CSV path; standard output when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    plan: PlanArgs,

    /// Comma-separated detector kinds to compare (e.g. wsglr,fma,two_stage);
    /// each reuses the shared flags it understands
    #[arg(long, value_name = "LIST")]
    detectors: String,

    /// Comma-separated threshold grid shared by every detector
    #[arg(long, value_name = "LIST", default_value = "2,4,6,8,10")]
    b_grid: String,

    /// Output CSV path; standard output when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::CheckAssumptions(args) => run_check_assumptions(&args),
        Command::Generate(args) => run_generate(&args).map(|()| ExitCode::SUCCESS),
        Command::Detect(args) => run_detect(&args).map(|()| ExitCode::SUCCESS),
        Command::Trace(args) => run_trace(&args).map(|()| ExitCode::SUCCESS),
        Command::Arl(args) => run_arl(&args).map(|()| ExitCode::SUCCESS),
        Command::Add(args) => run_add(&args).map(|()| ExitCode::SUCCESS),
        Command::Tradeoff(args) => run_tradeoff(&args).map(|()| ExitCode::SUCCESS),
        Command::Compare(args) => run_compare(&args).map(|()| ExitCode::SUCCESS),
    }
}

fn run_check_assumptions(args: &CheckAssumptionsArgs) -> Result<ExitCode> {
    let scenario = load_scenario(&args.scenario)?;
    let m = &scenario.models;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let rates = match growth_rates(&m.f, &m.f_n, &m.g, &m.g_n) {
        Ok(r) => r,
        Err(CoreError::NoAnalyticForm) => {
            growth_rates_mc(&m.f, &m.f_n, &m.g, &m.g_n, DEFAULT_MC_SAMPLES, &mut rng)?
        }
        Err(e) => return Err(e.into()),
    };
    let moments = match drift_moments(&m.f, &m.f_n, &m.g, &m.g_n, DEFAULT_MC_SAMPLES, &mut rng) {
        Ok(mo) => Some(mo),
        Err(CoreError::DegenerateDrift(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let assumption1 = moments.is_some();

    println!("divergences:");
    println!("  KL(g||f)   = {:.6}", rates.kl_g_f);
    println!("  KL(g||fn)  = {:.6}", rates.kl_g_fn);
    println!("  KL(gn||f)  = {:.6}", rates.kl_gn_f);
    println!("  KL(gn||fn) = {:.6}", rates.kl_gn_fn);
    println!("growth-rate floor I = {:.6}", rates.growth_rate);
    match &moments {
        Some(mo) => {
            println!("nuisance log-ratio drift:");
            println!(
                "  under g:  rho = {:.6}, sigma^2 = {:.6}, omega^4 = {:.6}",
                mo.rho_g, mo.sigma2_g, mo.omega4_g
            );
            println!(
                "  under gn: rho = {:.6}, sigma^2 = {:.6}, omega^4 = {:.6}",
                mo.rho_gn, mo.sigma2_gn, mo.omega4_gn
            );
        }
        None => println!("nuisance log-ratio drift: degenerate (a mean vanishes)"),
    }
    println!(
        "assumption1 (finite moments, nonzero drifts) = {}",
        verdict(assumption1)
    );
    println!(
        "assumption2 (KL(g||fn) above the other three's floor) = {}",
        verdict(rates.assumption2_holds)
    );

    if let Some(path) = &args.out {
        let report = serde_json::json!({
            "kl_g_f": rates.kl_g_f,
            "kl_g_fn": rates.kl_g_fn,
            "kl_gn_f": rates.kl_gn_f,
            "kl_gn_fn": rates.kl_gn_fn,
            "growth_rate": rates.growth_rate,
            "moments": moments,
            "assumption1_holds": assumption1,
            "assumption2_holds": rates.assumption2_holds,
        });
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
        println!("wrote report to {}", path.display());
    }

    if args.check && !(assumption1 && rates.assumption2_holds) {
        eprintln!("check failed: the scenario violates a required condition");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_generate(args: &GenerateArgs) -> Result<()> {
    let scenario = load_scenario(&args.scenario)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let xs = scenario.generate(args.horizon as usize, &mut rng)?;
    let mut csv = String::from("x\n");
    for x in &xs {
        csv.push_str(&format!("{x}\n"));
    }
    write_file(&args.out, &csv)?;
    println!("wrote {} samples to {}", xs.len(), args.out.display());
    Ok(())
}

fn run_detect(args: &DetectArgs) -> Result<()> {
    if !args.input.is_file() {
        bail!("input file {} does not exist", args.input.display());
    }
    let scenario = load_scenario(&args.scenario)?;
    let config = args.detector.resolve()?;
    let report = detect_on_file(&args.input, &scenario.models, &config, args.detrend)?;
    match report.tau {
        Some(tau) => println!(
            "{} fired at t = {tau} (statistic {:.4} >= b = {}) over {} analyzed samples",
            config.detector,
            report.statistic_at_stop.unwrap_or(f64::NAN),
            config.b,
            report.analyzed_len,
        ),
        None => println!(
            "{} never crossed b = {} over {} analyzed samples",
            config.detector, config.b, report.analyzed_len,
        ),
    }
    if let Some(path) = &args.out {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
        println!("wrote report to {}", path.display());
    }
    if let Some(path) = &args.trace {
        write_file(path, &report.trace_csv())?;
        println!("wrote trace to {}", path.display());
    }
    Ok(())
}

fn run_trace(args: &TraceArgs) -> Result<()> {
    let scenario = load_scenario(&args.scenario)?;
    let config = args.detector.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let xs = scenario.generate(args.horizon as usize, &mut rng)?;
    let mut detector = config.build(&scenario.models)?;

    // The generalized detector's trace carries its per-window verdict;
    // everything else traces (t, statistic).
    let csv = match &mut detector {
        AnyDetector::Gen(gen) => {
            let mut csv =
                String::from("t,statistic,fired,l,branch,llr,hessian_ok,interior_ok\n");
            for &x in &xs {
                let step = gen.step(x)?;
                match &step.verdict {
                    Some(v) => csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        step.t,
                        step.statistic,
                        step.fired,
                        v.l,
                        v.branch.as_str(),
                        v.llr,
                        v.hessian_ok,
                        v.interior_ok,
                    )),
                    None => csv.push_str(&format!(
                        "{},{},{},,,,,\n",
                        step.t, step.statistic, step.fired
                    )),
                }
            }
            csv
        }
        other => {
            let mut csv = String::from("t,statistic\n");
            for (i, &x) in xs.iter().enumerate() {
                let step = other.step(x)?;
                csv.push_str(&format!("{},{}\n", i + 1, step.statistic));
            }
            csv
        }
    };

    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            println!(
                "wrote {}-step {} trace to {}",
                xs.len(),
                config.detector,
                path.display()
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_arl(args: &ArlArgs) -> Result<()> {
    let plan = args.plan.build(true)?;
    let est = estimate_arl(&plan)?;
    println!(
        "ARL of {} at b = {}: {:.2} +/- {:.2} ({} trials, {} censored at horizon {})",
        plan.detector.detector,
        plan.detector.b,
        est.mean,
        est.std_error,
        est.n_trials,
        est.n_censored,
        plan.horizon,
    );
    if est.n_censored > 0 {
        println!("note: censored trials count at the horizon, so the mean is a lower bound");
    }
    if let Some(path) = &args.out {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&est)?))?;
        println!("wrote estimate to {}", path.display());
    }
    Ok(())
}

fn run_add(args: &AddArgs) -> Result<()> {
    let plan = args.plan.build(false)?;
    let est = estimate_add(&plan)?;
    println!(
        "ADD of {} at b = {}: {:.2} +/- {:.2} ({} valid of {} trials; {} false alarms, {} censored)",
        plan.detector.detector,
        plan.detector.b,
        est.mean,
        est.std_error,
        est.n_valid,
        est.n_trials,
        est.n_false_alarms,
        est.n_censored,
    );
    if let Some(path) = &args.out {
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&est)?))?;
        println!("wrote estimate to {}", path.display());
    }
    Ok(())
}

fn run_tradeoff(args: &TradeoffArgs) -> Result<()> {
    let grid = parse_grid(&args.b_grid)?;
    // The sweep sets the threshold at every grid point, so a bare detector
    // name needs no --b; seed the config with the first grid value.
    let fallback = args
        .plan
        .detector
        .detector
        .as_deref()
        .and_then(parse_kind)
        .map(|kind| DetectorConfig::new(kind, grid[0]));
    let plan = args.plan.build_with(false, fallback)?;
    let curve = tradeoff_sweep(&plan, &grid)?;
    emit_csv(args.out.as_deref(), &curve.to_csv(), || {
        format!(
            "wrote {}-point trade-off curve for {}",
            grid.len(),
            plan.detector.detector
        )
    })
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let kinds = args
        .detectors
        .split(',')
        .map(|name| {
            let name = name.trim();
            parse_kind(name)
                .with_context(|| format!("unknown detector kind {name:?} in --detectors"))
        })
        .collect::<Result<Vec<DetectorKind>>>()?;
    let grid = parse_grid(&args.b_grid)?;
    let base = args
        .plan
        .build_with(false, Some(DetectorConfig::new(kinds[0], grid[0])))?;
    let mut plans = Vec::with_capacity(kinds.len());
    for &kind in &kinds {
        let mut plan = base.clone();
        plan.detector = relevant_flags(&args.plan.detector, kind)
            .resolve_with(Some(DetectorConfig::new(kind, base.detector.b)))?;
        plans.push(plan);
    }
    let table = compare_detectors(&plans, &grid)?;
    emit_csv(args.out.as_deref(), &table.to_csv(), || {
        format!(
            "wrote comparison of {} detectors over {} thresholds",
            plans.len(),
            grid.len()
        )
    })
}

/// The compare subcommand shares one set of flags across heterogeneous
/// detectors; restrict each build to the flags its kind understands so a
/// window meant for wsglr does not end up on a cusum config.
fn relevant_flags(flags: &DetectorArgs, kind: DetectorKind) -> DetectorArgs {
    let windowed = matches!(
        kind,
        DetectorKind::Wsglr | DetectorKind::Fma | DetectorKind::GenWsglr
    );
    DetectorArgs {
        detector: None,
        b: flags.b,
        b_n: flags.b_n.filter(|_| kind == DetectorKind::TwoStage),
        m_b: flags.m_b.filter(|_| windowed),
        m_b_prime: flags.m_b_prime.filter(|_| kind == DetectorKind::GenWsglr),
        family: flags.family.clone().filter(|_| kind == DetectorKind::GenWsglr),
        disable_interior_check: flags.disable_interior_check && kind == DetectorKind::GenWsglr,
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "holds"
    } else {
        "FAILS"
    }
}

fn parse_kind(s: &str) -> Option<DetectorKind> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
}

/// never | uniform | a fixed 1-based time.
fn parse_policy(text: &str) -> Result<ChangePointPolicy> {
    match text {
        "never" => Ok(ChangePointPolicy::Never),
        "uniform" => Ok(ChangePointPolicy::UniformOverHorizon),
        _ => {
            let t: u64 = text.parse().map_err(|_| {
                anyhow::anyhow!(
                    "change-point policy must be 'never', 'uniform', or a positive integer, got {text:?}"
                )
            })?;
            if t == 0 {
                bail!("change times are 1-based; 0 is not a valid change time");
            }
            Ok(ChangePointPolicy::Fixed(t))
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad threshold {:?} in grid", s.trim()))
        })
        .collect::<Result<Vec<f64>>>()?;
    if grid.is_empty() {
        bail!("the threshold grid is empty");
    }
    Ok(grid)
}

/// Treat a leading '{' as inline JSON; anything else is a file path.
fn inline_or_file(spec: &str) -> Result<String> {
    if spec.trim_start().starts_with('{') {
        Ok(spec.to_string())
    } else {
        read_file(Path::new(spec))
    }
}

fn load_scenario(path: &Path) -> Result<QuadScenario> {
    let text = read_file(path)?;
    QuadScenario::from_json(&text)
        .with_context(|| format!("parsing scenario {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn emit_csv(out: Option<&Path>, csv: &str, summary: impl FnOnce() -> String) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, csv)?;
            println!("{} to {}", summary(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
