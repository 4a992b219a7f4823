mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gradwave::evolution::{write_series_csv, EvolutionError};
use gradwave::experiments::{xs_norm, ExperimentError, ExperimentSpec, SuiteReport};
use gradwave::graded::classify_raw;
use gradwave::oscillator::OscillatorError;
use serde_json::json;

use config::{FileConfig, Resolved};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn from_experiment(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Spec(_) | ExperimentError::Graded(_) => CliError::Config(e.to_string()),
        ExperimentError::Evolution(EvolutionError::Config(_) | EvolutionError::Graded(_)) => {
            CliError::Config(e.to_string())
        }
        ExperimentError::Oscillator(OscillatorError::InvalidCutoffs(_) | OscillatorError::InvalidGrid(_)) => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Failed(e.to_string()),
    }
}

#[derive(Parser, Debug)]
#[command(name = "gradwave", version, about = "Simulate and verify damped semilinear waves driven by graded operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output root; defaults to $GRADWAVE_OUT, then ./gradwave-out.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write plot.csv with the series behind each fit.
    #[arg(long, global = true)]
    plot_data: bool,
    /// More detail; repeat for result tables.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only print the final status line.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
}

#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// TOML config with [structure], [grid], [data], [stepper], [experiment].
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set stepper.dt=0.01 (repeatable).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical exponent, regime and global-existence window for (Q, nu, gamma, s, p).
    Classify {
        #[arg(long = "Q")]
        q: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// One run; writes series.csv and manifest.json.
    Simulate(ConfigArgs),
    /// Linear decay rates against the predicted exponents.
    Decay(ConfigArgs),
    /// Lifespan scaling in the data amplitude.
    Lifespan(ConfigArgs),
    /// Blow-up versus global behaviour across a grid of powers.
    Scan(ConfigArgs),
    /// Scaling of the test-function integrals in the radius.
    Testfn(ConfigArgs),
    /// Interpolation-inequality ratios on random band-limited fields.
    GnProbe(ConfigArgs),
    /// Regime-wise kernel bounds and the uniform decay probe.
    VerifyKernels {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "N")]
        big_n: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        /// Candidate bound constant to test instead of reporting the minimal one.
        #[arg(long = "C")]
        big_c: Option<f64>,
        /// Skip the uniform decay probe.
        #[arg(long)]
        no_uniform: bool,
    },
}

struct Ctx {
    root: PathBuf,
    seed: u64,
    plot_data: bool,
    verbose: u8,
    quiet: bool,
    jobs: usize,
    command: &'static str,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

fn load(args: &ConfigArgs) -> Result<FileConfig, CliError> {
    let cfg = match &args.config {
        Some(path) => config::load(path)?,
        None => FileConfig::default(),
    };
    config::apply_overrides(cfg, &args.set)
}

fn manifest_extra(ctx: &Ctx, echo: &FileConfig) -> serde_json::Value {
    json!({
        "command": ctx.command,
        "version": env!("CARGO_PKG_VERSION"),
        "created": chrono::Local::now().to_rfc3339(),
        "jobs": ctx.jobs,
        "seed": ctx.seed,
        "config": echo,
        "config_toml": toml::to_string(echo).unwrap_or_default(),
    })
}

fn write_echo(dir: &Path, echo: &FileConfig) -> Result<(), CliError> {
    let text = toml::to_string(echo).map_err(|e| CliError::Failed(e.to_string()))?;
    std::fs::write(dir.join("config.toml"), text).map_err(output::io_err)
}

fn print_report(ctx: &Ctx, label: &str, report: &SuiteReport) {
    for c in &report.checks {
        ctx.say(format!("{} {label}{}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    if ctx.verbose > 0 && !ctx.quiet {
        println!("{}", report.columns.join("\t"));
        for r in &report.rows {
            println!("{}", r.join("\t"));
        }
    }
}

/// Run the suites into a fresh output directory; `Ok(false)` when a check fails.
fn run_suites(ctx: &Ctx, suites: Vec<ExperimentSpec>, echo: &FileConfig) -> Result<bool, CliError> {
    let dir = output::run_dir(&ctx.root, ctx.command)?;
    write_echo(&dir, echo)?;
    let many = suites.len() > 1;
    let mut passed = true;
    let mut cases = Vec::new();
    for (i, spec) in suites.iter().enumerate() {
        let target = if many { dir.join(format!("case-{i}")) } else { dir.clone() };
        if ctx.verbose > 0 {
            eprintln!("running {} case {i}", spec.kind());
        }
        let report = match spec.execute() {
            Ok(r) => r,
            Err(e) => {
                let err = from_experiment(e);
                let mut m = manifest_extra(ctx, echo);
                m["passed"] = json!(false);
                m["error"] = json!(err.to_string());
                std::fs::create_dir_all(&target).map_err(output::io_err)?;
                output::write_json(&target.join("manifest.json"), &m)?;
                return Err(err);
            }
        };
        let files = report
            .write(&target, spec, ctx.seed, ctx.plot_data)
            .map_err(from_experiment)?;
        output::patch_manifest(&files.manifest, &manifest_extra(ctx, echo))?;
        print_report(ctx, &if many { format!("[case {i}] ") } else { String::new() }, &report);
        passed &= report.passed();
        cases.push(json!({ "dir": format!("case-{i}"), "passed": report.passed() }));
    }
    if many {
        let mut top = manifest_extra(ctx, echo);
        top["passed"] = json!(passed);
        top["cases"] = json!(cases);
        output::write_json(&dir.join("manifest.json"), &top)?;
    }
    println!("{} {} -> {}", if passed { "passed" } else { "failed" }, ctx.command, dir.display());
    Ok(passed)
}

fn run_resolved<T>(ctx: &Ctx, r: Resolved<T>, wrap: impl Fn(T) -> Vec<ExperimentSpec>) -> Result<bool, CliError> {
    let echo = r.echo.clone();
    run_suites(ctx, wrap(r.value), &echo)
}

fn simulate(ctx: &Ctx, args: &ConfigArgs) -> Result<bool, CliError> {
    let r = config::resolve_simulate(&load(args)?)?;
    let dir = output::run_dir(&ctx.root, ctx.command)?;
    write_echo(&dir, &r.echo)?;
    let out = gradwave::run(r.value.clone()).map_err(|e| match e {
        EvolutionError::Config(_) | EvolutionError::Graded(_) => CliError::Config(e.to_string()),
        _ => CliError::Failed(e.to_string()),
    })?;
    write_series_csv(&dir.join("series.csv"), &out).map_err(|e| CliError::Failed(e.to_string()))?;
    let xs = xs_norm(&out, r.value.s, r.value.gamma, r.value.nu()).map_err(from_experiment)?;
    let mut m = manifest_extra(ctx, &r.echo);
    let extra = json!({
        "status": out.status,
        "t_end": out.t_end,
        "steps": out.steps,
        "lifespan": out.lifespan,
        "secondary_lifespan": out.secondary_lifespan,
        "threshold_sensitive": out.threshold_sensitive,
        "samples": out.series.len(),
        "weighted_sup": xs,
        "files": { "series": "series.csv" },
    });
    for (k, v) in extra.as_object().expect("object") {
        m[k] = v.clone();
    }
    output::write_json(&dir.join("manifest.json"), &m)?;
    let life = out.lifespan.map_or(String::new(), |t| format!(", lifespan {t:.4}"));
    ctx.say(format!(
        "status {}{life}, t_end {}, {} steps, weighted sup {:.6e}",
        out.status, out.t_end, out.steps, xs.value
    ));
    println!("completed {} -> {}", ctx.command, dir.display());
    Ok(true)
}

fn classify(q: f64, nu: f64, gamma: f64, p: f64, s: f64, as_json: bool) -> Result<bool, CliError> {
    let r = classify_raw(q, nu, gamma, s, p).map_err(|e| CliError::Config(e.to_string()))?;
    if as_json {
        println!("{}", serde_json::to_string_pretty(&r).map_err(|e| CliError::Failed(e.to_string()))?);
        return Ok(true);
    }
    println!("p_Crit={:?}, regime={}", r.p_crit, r.regime);
    println!("gamma_tilde={:?}", r.gamma_tilde);
    println!("global window: {}", r.global_range);
    println!("global hypotheses met: {}", r.global_hypotheses_met);
    if let Some(k) = r.kappa {
        println!("lifespan exponent kappa={k:?}");
    }
    Ok(true)
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    let command = match &cli.command {
        Command::Classify { .. } => "classify",
        Command::Simulate(_) => "simulate",
        Command::Decay(_) => "decay",
        Command::Lifespan(_) => "lifespan",
        Command::Scan(_) => "scan",
        Command::Testfn(_) => "testfn",
        Command::GnProbe(_) => "gn-probe",
        Command::VerifyKernels { .. } => "verify-kernels",
    };
    let ctx = Ctx {
        root: output::root(cli.out.as_deref()),
        seed: cli.seed,
        plot_data: cli.plot_data,
        verbose: cli.verbose,
        quiet: cli.quiet,
        jobs,
        command,
    };
    match &cli.command {
        Command::Classify { q, nu, gamma, p, s, json } => classify(*q, *nu, *gamma, *p, *s, *json),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Decay(a) => run_resolved(&ctx, config::resolve_decay(&load(a)?)?, |s| vec![ExperimentSpec::Decay(s)]),
        Command::Lifespan(a) => {
            run_resolved(&ctx, config::resolve_lifespan(&load(a)?)?, |s| vec![ExperimentSpec::Lifespan(s)])
        }
        Command::Scan(a) => run_resolved(&ctx, config::resolve_scan(&load(a)?)?, |s| vec![ExperimentSpec::Dichotomy(s)]),
        Command::Testfn(a) => run_resolved(&ctx, config::resolve_testfn(&load(a)?)?, |v| {
            v.into_iter().map(ExperimentSpec::Testfn).collect()
        }),
        Command::GnProbe(a) => {
            run_resolved(&ctx, config::resolve_gn(&load(a)?, cli.seed)?, |s| vec![ExperimentSpec::GnProbe(s)])
        }
        Command::VerifyKernels {
            cfg,
            delta,
            big_n,
            c,
            big_c,
            no_uniform,
        } => {
            let mut fc = load(cfg)?;
            let e = fc.experiment.get_or_insert_with(Default::default);
            e.delta = delta.or(e.delta);
            e.big_n = big_n.or(e.big_n);
            e.c = c.or(e.c);
            e.big_c = big_c.or(e.big_c);
            if *no_uniform {
                e.uniform = Some(false);
            }
            run_resolved(&ctx, config::resolve_kernels(&fc)?, |s| vec![ExperimentSpec::KernelBounds(s)])
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gradwave: {e}");
            ExitCode::from(e.code())
        }
    }
}
