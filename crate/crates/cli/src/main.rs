#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavity_discord::lindblad::{
    uniform_times, verify_against_analytic, FockSpace, IntegratorConfig,
};
use cavity_discord::measures::{discord_bell_diagonal, discord_numeric};
use cavity_discord::model::{correlation_vector, two_atom_state_for_factor};
use cavity_discord::output::{emit_sweep_csv, emit_time_series_csv};
use cavity_discord::scan::{
    detect_death_intervals, esd_onset, log_space, long_time_limits, sweep_gamma, time_series,
    DeathEvent, LongTimeLimits, Quantity, SeriesOptions, TimeGrid,
};
use cavity_discord::{
    exec, Complex64, Error, Execution, Family, PhysicalParams, SingleAtomInit, WernerSpec,
};
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use config::{ConfigError, FileConfig, RunConfig, DYNAMICS_DEFAULTS, SWEEP_DEFAULTS};

const DISCORD_NOTICE: &str = "closed-form discord is D = I - J with J = (1-d)/2 log2(1-d) + (1+d)/2 log2(1+d), \
d = max|d_i|; the variant with log2((1+-d)/2) in J is offset by one bit (it gives D = 1 for the maximally mixed state) \
and is not used";

#[derive(Parser)]
#[command(
    name = "cavity-discord",
    version,
    about = "Discord and entanglement of two atoms in dissipative dispersive cavities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series of |f|², discord, classical correlation, mutual information and concurrence.
    Dynamics(RunArgs),
    /// Check the analytic decoherence factor against the integrated master equation.
    VerifyLindblad(VerifyArgs),
    /// Compare closed-form discord with the numerical minimizer on a (p, |f|²) grid.
    DiscordCheck(CheckArgs),
    /// Long-time values of |f|², discord and concurrence.
    Limits(LimitsArgs),
    /// Closed-form discord over a grid of decay rates and times.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Werner mixing parameter.
    #[arg(long)]
    p: Option<f64>,
    /// Real part of the coherent amplitude.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    #[arg(long)]
    gamma_over_omega: Option<f64>,
    /// phi or psi.
    #[arg(long)]
    family: Option<Family>,
    /// Final Ωt.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// closed-form, numeric or both.
    #[arg(long)]
    discord_mode: Option<String>,
    /// Discord below this value counts as sudden death.
    #[arg(long)]
    discord_threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat JSON config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn as_file_config(&self) -> FileConfig {
        FileConfig {
            p: self.p,
            alpha_re: self.alpha,
            alpha_im: self.alpha_im,
            gamma_over_omega: self.gamma_over_omega,
            family: self.family,
            t_max_omega: self.t_max,
            steps: self.steps,
            discord_mode: self.discord_mode.clone(),
            discord_death_threshold: self.discord_threshold,
            output_path: self.out.clone(),
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_im: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma_over_omega: f64,
    /// Fock cutoff; defaults to 16 for |α| ≤ 1, else ceil(|α|² + 8|α| + 8).
    #[arg(long)]
    n_max: Option<usize>,
    /// Step in units of 1/Ω.
    #[arg(long, default_value_t = 0.002)]
    dt: f64,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    /// Number of comparison times.
    #[arg(long, default_value_t = 201)]
    samples: usize,
}

#[derive(Args)]
struct CheckArgs {
    /// Number of p values; |f|² gets twice as many intervals.
    #[arg(long, default_value_t = 11)]
    grid: usize,
}

#[derive(Args)]
struct LimitsArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha_im: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma_over_omega: f64,
    #[arg(long, default_value_t = Family::Phi)]
    family: Family,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated γ/Ω values; overrides the log-spaced grid.
    #[arg(long)]
    gammas: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    gamma_min: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 101)]
    gamma_count: usize,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Invalid(m) => Failure::Usage(m),
            ConfigError::Io(m) => Failure::Io(m),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, subcommand) = match cli.command {
        Command::Dynamics(a) => (cmd_dynamics(&a), "dynamics"),
        Command::VerifyLindblad(a) => (cmd_verify_lindblad(&a), "verify-lindblad"),
        Command::DiscordCheck(a) => (cmd_discord_check(&a), "discord-check"),
        Command::Limits(a) => (cmd_limits(&a), "limits"),
        Command::Sweep(a) => (cmd_sweep(&a), "sweep"),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(sub) = cmd.find_subcommand_mut(subcommand) {
                eprintln!("{}", sub.render_usage());
            }
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn resolve(args: &RunArgs, defaults: &config::Defaults) -> Result<RunConfig, Failure> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    Ok(RunConfig::resolve(&args.as_file_config(), &file, defaults)?)
}

#[derive(Serialize)]
struct Thresholds {
    discord_death: f64,
    concurrence_death: f64,
}

#[derive(Serialize)]
struct DeathEvents {
    concurrence: Vec<DeathEvent>,
    discord: Vec<DeathEvent>,
    first_concurrence_death: Option<f64>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'static str,
    command: &'static str,
    parameters: &'a RunConfig,
    thresholds: Thresholds,
    death_events: DeathEvents,
    long_time_limits: Option<LongTimeLimits>,
    numeric_discord_max_gap: Option<f64>,
    discord_notice: &'static str,
}

fn write_metadata(csv_path: &Path, meta: &Metadata) -> Result<PathBuf, Failure> {
    let path = csv_path.with_extension("meta.json");
    let mut text = serde_json::to_string_pretty(meta).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn at_path(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match e {
        Error::Io(_) | Error::Csv(_) => Failure::Io(format!("{}: {e}", path.display())),
        other => other.into(),
    }
}

fn cmd_dynamics(args: &RunArgs) -> CmdResult {
    let cfg = resolve(args, &DYNAMICS_DEFAULTS)?;
    let spec = WernerSpec::new(cfg.p, cfg.family)?;
    let params = PhysicalParams::scaled(
        cfg.gamma_over_omega,
        Complex64::new(cfg.alpha_re, cfg.alpha_im),
    )?;
    let grid = TimeGrid::new(cfg.t_max_omega, cfg.steps)?;
    let series = time_series(
        &spec,
        &params,
        &grid,
        &SeriesOptions {
            discord_mode: cfg.discord_mode,
            ..Default::default()
        },
    )?;
    emit_time_series_csv(&series.rows, &cfg.output_path).map_err(at_path(&cfg.output_path))?;

    let concurrence = detect_death_intervals(&series, Quantity::Concurrence, 0.0)?;
    let discord = detect_death_intervals(&series, Quantity::Discord, cfg.discord_death_threshold)?;
    let first_concurrence_death = if cfg.p > 1.0 / 3.0 {
        esd_onset(cfg.p, &params)?
    } else {
        None
    };
    let limits = if cfg.gamma_over_omega > 0.0 {
        Some(long_time_limits(&spec, &params)?)
    } else {
        None
    };
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        command: "dynamics",
        parameters: &cfg,
        thresholds: Thresholds {
            discord_death: cfg.discord_death_threshold,
            concurrence_death: 0.0,
        },
        death_events: DeathEvents {
            concurrence,
            discord,
            first_concurrence_death,
        },
        long_time_limits: limits,
        numeric_discord_max_gap: series.numeric_gap,
        discord_notice: DISCORD_NOTICE,
    };
    let meta_path = write_metadata(&cfg.output_path, &meta)?;
    println!(
        "wrote {} rows to {} (metadata {}); {} concurrence-death and {} discord-below-{} intervals",
        series.rows.len(),
        cfg.output_path.display(),
        meta_path.display(),
        meta.death_events.concurrence.len(),
        meta.death_events.discord.len(),
        cfg.discord_death_threshold
    );
    if let Some(gap) = series.numeric_gap {
        println!("closed-form vs numeric discord: max gap {gap:.3e}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_lindblad(args: &VerifyArgs) -> CmdResult {
    let alpha = Complex64::new(args.alpha, args.alpha_im);
    let params = PhysicalParams::scaled(args.gamma_over_omega, alpha)?;
    let fock = match args.n_max {
        Some(n) => FockSpace::new(n)?,
        None => FockSpace::default_for(alpha),
    };
    fock.check(alpha)?;
    let integrator = IntegratorConfig::new(args.dt);
    integrator.check(&fock)?;
    if !(args.t_max > 0.0) || args.samples < 2 {
        return Err(Failure::Usage(
            "t-max must be positive and samples at least 2".into(),
        ));
    }
    let init = SingleAtomInit::new(0.5, 0.5, Complex64::new(0.5, 0.0))?;
    let report = verify_against_analytic(
        &init,
        &params,
        &fock,
        &uniform_times(args.t_max, args.samples),
        &integrator,
    )?;
    let pass = report.max_deviation <= 1e-3;
    println!(
        "alpha={alpha} gamma/Omega={} n_max={} dt={} t_max={}: max |rho_eg - zeta_c f| = {:.3e}, population drift {:.3e}, \
         trace error {:.3e} over {} samples: {}",
        args.gamma_over_omega,
        fock.n_max,
        args.dt,
        args.t_max,
        report.max_deviation,
        report.max_population_drift,
        report.max_trace_error,
        report.samples,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_discord_check(args: &CheckArgs) -> CmdResult {
    if args.grid < 2 {
        return Err(Failure::Usage("grid must be at least 2".into()));
    }
    let n_f = 2 * (args.grid - 1);
    let mut cases = Vec::new();
    for family in [Family::Phi, Family::Psi] {
        for i in 0..args.grid {
            for k in 1..=n_f {
                cases.push((
                    family,
                    i as f64 / (args.grid - 1) as f64,
                    k as f64 / n_f as f64,
                ));
            }
        }
    }
    let results = exec::try_map_indexed(Execution::default(), cases.len(), |idx| {
        let (family, p, f_sq) = cases[idx];
        let rho = two_atom_state_for_factor(
            &WernerSpec::new(p, family)?,
            Complex64::from_polar(f_sq.sqrt(), 0.7),
        );
        let d = correlation_vector(&rho)?;
        let closed = discord_bell_diagonal(&d)?;
        let report = discord_numeric(&rho)?;
        let angle = d.dominant_axis(1e-6).map(|axis| {
            let mut dir = [0.0; 3];
            dir[axis] = 1.0;
            report.argmin_measurement.axis_angle_deg(dir)
        });
        Ok::<_, Error>(((closed - report.discord).abs(), angle))
    })?;
    let (worst_idx, worst) = results
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.0))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let angles: Vec<f64> = results.iter().filter_map(|r| r.1).collect();
    let worst_angle = angles.iter().cloned().fold(0.0, f64::max);
    let (family, p, f_sq) = cases[worst_idx];
    let pass = worst <= 1e-5 && worst_angle <= 2.0;
    println!(
        "{} states: worst |closed form - numeric| = {worst:.3e} (family {family}, p={p}, |f|^2={f_sq}); \
         argmin axis vs max-|d| axis: worst {worst_angle:.3} deg over {} states with a unique axis: {}",
        cases.len(),
        angles.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_limits(args: &LimitsArgs) -> CmdResult {
    if args.gamma_over_omega == 0.0 {
        return Err(Failure::Usage(
            "long-time limits need gamma-over-omega > 0".into(),
        ));
    }
    let spec = WernerSpec::new(args.p, args.family)?;
    let params = PhysicalParams::scaled(
        args.gamma_over_omega,
        Complex64::new(args.alpha, args.alpha_im),
    )?;
    let lim = long_time_limits(&spec, &params)?;
    let larger = if (lim.discord - lim.concurrence).abs() <= 1e-15 {
        "equal"
    } else if lim.discord > lim.concurrence {
        "discord > concurrence"
    } else {
        "concurrence > discord"
    };
    println!("|f_inf|^2 = {:.12}", lim.f_sq_inf);
    println!("discord_inf = {:.12}", lim.discord);
    println!("concurrence_inf = {:.12}", lim.concurrence);
    println!("{larger}");
    Ok(ExitCode::SUCCESS)
}

fn parse_gammas(list: &str) -> Result<Vec<f64>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| Failure::Usage(format!("bad gamma value {s:?}: {e}")))
        })
        .collect()
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let cfg = resolve(&args.run, &SWEEP_DEFAULTS)?;
    let gammas = match &args.gammas {
        Some(list) => parse_gammas(list)?,
        None => {
            if !(args.gamma_min > 0.0 && args.gamma_max >= args.gamma_min) {
                return Err(Failure::Usage(
                    "log-spaced grid needs 0 < gamma-min <= gamma-max".into(),
                ));
            }
            log_space(args.gamma_min, args.gamma_max, args.gamma_count)
        }
    };
    let spec = WernerSpec::new(cfg.p, cfg.family)?;
    let grid = TimeGrid::new(cfg.t_max_omega, cfg.steps)?;
    let sweep = sweep_gamma(
        &spec,
        Complex64::new(cfg.alpha_re, cfg.alpha_im),
        &gammas,
        &grid,
        Execution::default(),
    )?;
    emit_sweep_csv(&sweep, &cfg.output_path).map_err(at_path(&cfg.output_path))?;
    println!(
        "wrote {} decay rates x {} times to {}",
        sweep.gammas.len(),
        sweep.omega_t.len(),
        cfg.output_path.display()
    );
    Ok(ExitCode::SUCCESS)
}
