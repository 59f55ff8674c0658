//! Command-line front end. All angles are in radians.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 on
//! numerical or I/O failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channels::{GateKind, KrausChannel};
use crate::correlations::{discord_asym, gqd_min, InnerBudget};
use crate::error::{Error, Result};
use crate::experiments::{self, appendix, robustness, Settings, Table};
use crate::protocol::{
    run_circuit_all_outcomes, run_fast_all_outcomes, GateOrder, Outcome, ProtocolConfig,
    ProtocolOutcome,
};
use crate::qstate::{DensityMatrix, Mixedness, NamedState};

pub mod config;
pub mod emit;

pub use emit::{Format, OutputFile, RunManifest};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "DISCORDNET_THREADS";

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "discordnet",
    version,
    about = "Quantum discord distribution with classically correlated carriers (angles in radians)",
    args_override_self = true
)]
pub struct Cli {
    /// Seed for every randomised search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write one file per table plus manifest.json into this directory
    /// instead of printing to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; DISCORDNET_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long = "inner-budget", global = true, value_enum, default_value_t = Budget::Full)]
    pub inner_budget: Budget,
    /// key=value file of defaults; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    Fast,
    Full,
}

impl From<Budget> for InnerBudget {
    fn from(b: Budget) -> Self {
        match b {
            Budget::Fast => InnerBudget::Fast,
            Budget::Full => InnerBudget::Full,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Run the distribution protocol.
    Protocol {
        #[command(subcommand)]
        action: ProtocolAction,
    },
    /// Asymmetric discord D_{A|B} of a named state.
    Discord(DiscordArgs),
    /// Global quantum discord of a named state.
    Gqd(StateArgs),
    /// Optimal GQD against N with W-state benchmarks.
    Table1(Table1Args),
    /// Pairwise discord structure and maximal GQD per interaction count.
    Table2(Table2Args),
    /// D_{M1|M2}, D_{M2|M1} and GQD over (θ₁, θ₂).
    Heatmap(HeatmapArgs),
    /// Robustness against carrier, memory or measurement imperfections.
    Robustness {
        #[command(subcommand)]
        kind: RobustnessKind,
    },
    /// Effective-channel classification.
    Appendix1(Appendix1Args),
    /// Correlated dephasing of the memories.
    Appendix2(Appendix2Args),
    /// Linear and exponential fits of the optimal GQD against N.
    Fits(FitsArgs),
}

#[derive(Subcommand, Debug, Serialize)]
pub enum ProtocolAction {
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Report {
    Discord,
    Gqd,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Cz,
    Ch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    GatesFirst,
    Interleaved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Fast,
    Circuit,
}

#[derive(Args, Debug, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Carrier basis polar angles, one per interacting pair.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    /// Carrier basis azimuths; zeros when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phi: Vec<f64>,
    /// Interacting pairs (1-based); all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub interactions: Vec<usize>,
    #[arg(long, default_value = "carriers")]
    pub carriers: String,
    /// Carrier family parameter as key=value; repeatable.
    #[arg(long = "carrier-param")]
    pub carrier_param: Vec<String>,
    #[arg(long, default_value = "plus")]
    pub memories: String,
    #[arg(long = "memory-param")]
    pub memory_param: Vec<String>,
    #[arg(long, value_enum, default_value_t = Gate::Cz)]
    pub gate: Gate,
    /// Post-selected carrier bits such as `01`, or `all`; zeros when omitted.
    #[arg(long)]
    pub outcome: Option<String>,
    #[arg(long, value_enum, default_value_t = Order::GatesFirst)]
    pub order: Order,
    /// Correlated dephasing strength on M1, M2 (two parties only).
    #[arg(long = "noise-p")]
    pub noise_p: Option<f64>,
    #[arg(long = "noise-mu", default_value_t = 1.0)]
    pub noise_mu: f64,
    #[arg(long, value_enum, default_value_t = Report::All)]
    pub report: Report,
    #[arg(long, value_enum, default_value_t = Engine::Fast)]
    pub engine: Engine,
}

#[derive(Args, Debug, Serialize)]
pub struct StateArgs {
    /// State family, for example w, werner, rho1, tau, bell.
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Family parameter as key=value; repeatable.
    #[arg(long)]
    pub param: Vec<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct DiscordArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// The measured qubit B; the last qubit when omitted.
    #[arg(long)]
    pub measured: Option<String>,
    /// The unmeasured qubits A; the first qubit when omitted.
    #[arg(long, value_delimiter = ',')]
    pub unmeasured: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MixednessArg {
    Purity,
    Entropy,
}

#[derive(Args, Debug, Serialize)]
pub struct Table1Args {
    #[arg(long = "n-min", default_value_t = 2)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 5)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = MixednessArg::Purity)]
    pub mixedness: MixednessArg,
}

#[derive(Args, Debug, Serialize)]
pub struct Table2Args {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct HeatmapArgs {
    #[arg(long, default_value_t = 61)]
    pub points: usize,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum RobustnessKind {
    Carrier {
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long = "reoptimize-step", default_value_t = 0.05)]
        reoptimize_step: f64,
        /// Skip the re-optimised sweeps.
        #[arg(long = "no-reoptimize")]
        no_reoptimize: bool,
    },
    Memory {
        #[arg(long = "pure-points", default_value_t = 61)]
        pure_points: usize,
        #[arg(long = "reoptimized-points", default_value_t = 13)]
        reoptimized_points: usize,
        #[arg(long = "mixed-step", default_value_t = 0.01)]
        mixed_step: f64,
        #[arg(long = "mixed-reoptimize-step", default_value_t = 0.1)]
        mixed_reoptimize_step: f64,
        #[arg(long = "no-reoptimize")]
        no_reoptimize: bool,
    },
    Measurement {
        /// Full window width around each optimal angle.
        #[arg(long, default_value_t = std::f64::consts::PI / 10.0)]
        width: f64,
        #[arg(long, default_value_t = 21)]
        samples: usize,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct Appendix1Args {
    #[arg(long = "theta-points", default_value_t = 5)]
    pub theta_points: usize,
    #[arg(long = "phi-points", default_value_t = 4)]
    pub phi_points: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct Appendix2Args {
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long = "x-points", default_value_t = 101)]
    pub x_points: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct FitsArgs {
    /// Optimal GQD for N = 2, 3, … ; computed from scratch when omitted.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[arg(long = "n-max", default_value_t = 5)]
    pub n_max: usize,
    #[arg(long = "pair-discord", default_value_t = experiments::fits::PAIR_DISCORD)]
    pub pair_discord: f64,
}

fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("parameter `{kv}` is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("parameter `{k}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn named_state(family: &str, n: Option<usize>, params: &[String]) -> Result<DensityMatrix> {
    let mut p = parse_params(params)?;
    if let Some(n) = n {
        p.insert("n".into(), n as f64);
    }
    NamedState::from_name(family, &p)?.build()
}

fn parse_outcome(s: Option<&str>, k: usize) -> Result<Outcome> {
    match s {
        None => Ok(Outcome::Bits(vec![0; k])),
        Some("all") => Ok(Outcome::All),
        Some(bits) => bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Config(format!("outcome `{bits}` is not a bit string or `all`"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Outcome::Bits),
    }
}

fn protocol_run(a: &RunArgs, settings: &Settings) -> Result<Vec<Table>> {
    let interactions: Vec<usize> = if a.interactions.is_empty() {
        (1..=a.n).collect()
    } else {
        a.interactions.clone()
    };
    let phi = if a.phi.is_empty() { vec![0.0; a.theta.len()] } else { a.phi.clone() };
    if phi.len() != a.theta.len() {
        return Err(Error::Config(format!("{} θ values but {} φ values", a.theta.len(), phi.len())));
    }
    let angles: Vec<(f64, f64)> = a.theta.iter().copied().zip(phi).collect();
    let carriers = named_state(&a.carriers, Some(a.n), &a.carrier_param)?;
    let memories = named_state(&a.memories, Some(a.n), &a.memory_param)?.relabel(
        &(1..=a.n).map(crate::protocol::memory_label).collect::<Vec<_>>(),
    )?;
    let mut cfg = ProtocolConfig::new(carriers, memories, interactions.clone(), &angles)?
        .with_gate(match a.gate {
            Gate::Cz => GateKind::ControlledZ,
            Gate::Ch => GateKind::ControlledHadamard,
        })
        .with_order(match a.order {
            Order::GatesFirst => GateOrder::GatesFirst,
            Order::Interleaved => GateOrder::Interleaved,
        })
        .with_outcome(Outcome::All)?;
    if let Some(p) = a.noise_p {
        cfg = cfg.with_noise(KrausChannel::correlated_dephasing(["M1", "M2"], p, a.noise_mu)?)?;
    }
    let outcomes = match a.engine {
        Engine::Fast => run_fast_all_outcomes(&cfg)?,
        Engine::Circuit => run_circuit_all_outcomes(&cfg)?,
    };
    let selected: Vec<ProtocolOutcome> = match parse_outcome(a.outcome.as_deref(), interactions.len())? {
        Outcome::All => outcomes,
        Outcome::Bits(bits) => {
            let hit: Vec<ProtocolOutcome> = outcomes.into_iter().filter(|o| o.bits == bits).collect();
            if hit.is_empty() {
                return Err(Error::Config(format!("outcome {bits:?} does not match {} carriers", interactions.len())));
            }
            hit
        }
    };
    let mut t = Table::new("protocol", &["bits", "probability", "quantity", "subsystems", "value"]);
    for o in &selected {
        let bits: String = o.bits.iter().map(|b| char::from(b'0' + b)).collect();
        let labels = o.retained_labels().to_vec();
        if matches!(a.report, Report::Discord | Report::All) {
            for x in &labels {
                for y in &labels {
                    if x != y {
                        let d = discord_asym(&o.final_state, y, &[x.as_str()])?.value;
                        t.push(vec![
                            bits.as_str().into(),
                            o.probability.into(),
                            "discord".into(),
                            format!("{x}|{y}").into(),
                            d.into(),
                        ])?;
                    }
                }
            }
        }
        if matches!(a.report, Report::Gqd | Report::All) {
            let g = gqd_min(&o.final_state, &settings.inner)?.value;
            t.push(vec![
                bits.as_str().into(),
                o.probability.into(),
                "gqd".into(),
                labels.join(",").into(),
                g.into(),
            ])?;
        }
    }
    Ok(vec![t])
}

fn discord_cmd(a: &DiscordArgs) -> Result<Vec<Table>> {
    let rho = named_state(&a.state.state, a.state.n, &a.state.param)?;
    let labels = rho.labels().to_vec();
    let measured = a.measured.clone().unwrap_or_else(|| labels[labels.len() - 1].clone());
    let unmeasured = if a.unmeasured.is_empty() { vec![labels[0].clone()] } else { a.unmeasured.clone() };
    let un: Vec<&str> = unmeasured.iter().map(String::as_str).collect();
    let r = discord_asym(&rho, &measured, &un)?;
    let (theta, phi) = r.argmin_basis.angles_for(&measured).unwrap_or((f64::NAN, f64::NAN));
    let mut t = Table::new("discord", &["state", "unmeasured", "measured", "value", "theta", "phi"]);
    t.push(vec![
        a.state.state.as_str().into(),
        unmeasured.join(",").into(),
        measured.into(),
        r.value.into(),
        theta.into(),
        phi.into(),
    ])?;
    Ok(vec![t])
}

fn gqd_cmd(a: &StateArgs, settings: &Settings) -> Result<Vec<Table>> {
    let rho = named_state(&a.state, a.n, &a.param)?;
    let r = gqd_min(&rho, &settings.inner)?;
    let mut t = Table::new("gqd", &["state", "qubits", "value", "evaluations", "converged"]);
    t.push(vec![
        a.state.as_str().into(),
        rho.num_qubits().into(),
        r.value.into(),
        r.evaluations.into(),
        r.converged.into(),
    ])?;
    Ok(vec![t])
}

fn dispatch(cli: &Cli, settings: &Settings) -> Result<Vec<Table>> {
    match &cli.command {
        Command::Protocol { action: ProtocolAction::Run(a) } => protocol_run(a, settings),
        Command::Discord(a) => discord_cmd(a),
        Command::Gqd(a) => gqd_cmd(a, settings),
        Command::Table1(a) => {
            if a.n_min < 2 || a.n_max > 6 || a.n_min > a.n_max {
                return Err(Error::Config("table1 needs 2 ≤ n-min ≤ n-max ≤ 6".into()));
            }
            if a.n_max == 6 {
                eprintln!("warning: N = 6 is slow");
            }
            let ns: Vec<usize> = (a.n_min..=a.n_max).collect();
            let m = match a.mixedness {
                MixednessArg::Purity => Mixedness::Purity,
                MixednessArg::Entropy => Mixedness::Entropy,
            };
            Ok(vec![experiments::table1(&ns, m, settings)?.table()?])
        }
        Command::Table2(a) => {
            let c = experiments::table2_census(a.n, settings)?;
            Ok(vec![c.pairs_table()?, c.gqd_table()?])
        }
        Command::Heatmap(a) => experiments::heatmaps(a.points, settings)?.tables(),
        Command::Robustness { kind } => match *kind {
            RobustnessKind::Carrier { step, reoptimize_step, no_reoptimize } => {
                let o = robustness::CarrierOptions {
                    step,
                    reoptimize_step: (!no_reoptimize).then_some(reoptimize_step),
                };
                experiments::carrier_robustness(&o, settings)?.tables()
            }
            RobustnessKind::Memory {
                pure_points,
                reoptimized_points,
                mixed_step,
                mixed_reoptimize_step,
                no_reoptimize,
            } => {
                let o = robustness::MemoryOptions {
                    pure_points,
                    reoptimized_points: if no_reoptimize { 2 } else { reoptimized_points },
                    mixed_step,
                    mixed_reoptimize_step: (!no_reoptimize).then_some(mixed_reoptimize_step),
                };
                experiments::memory_robustness(&o, settings)?.tables()
            }
            RobustnessKind::Measurement { width, samples } => {
                Ok(vec![experiments::measurement_robustness(width, samples, settings)?.table()?])
            }
        },
        Command::Appendix1(a) => experiments::appendix1(a.theta_points, a.phi_points)?.tables(),
        Command::Appendix2(a) => {
            let o = appendix::NoiseOptions {
                step: a.step,
                x_points: a.x_points,
            };
            experiments::appendix2(&o, settings)?.tables()
        }
        Command::Fits(a) => {
            let g_m: Vec<(usize, f64)> = if a.values.is_empty() {
                let ns: Vec<usize> = (2..=a.n_max).collect();
                experiments::table1(&ns, Mixedness::Purity, settings)?.g_m()
            } else {
                a.values.iter().enumerate().map(|(i, &v)| (i + 2, v)).collect()
            };
            let (lin, exp) = experiments::scaling_fits(&g_m, a.pair_discord)?;
            Ok(vec![experiments::fits::fits_table(&[&lin, &exp])?])
        }
    }
}

fn threads(cli: &Cli) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV}=`{v}` is not a positive integer"))),
        Err(_) => match cli.threads {
            Some(0) => Err(Error::Config("--threads must be positive".into())),
            t => Ok(t),
        },
    }
}

fn subcommand_depth(args: &[OsString]) -> usize {
    let first = args
        .iter()
        .skip(1)
        .scan(false, |skip, a| {
            let s = a.to_string_lossy().into_owned();
            let take = !*skip && !s.starts_with('-');
            *skip = ["--seed", "--out", "--format", "--threads", "--inner-budget", "--config"].contains(&s.as_str());
            Some(take.then_some(s))
        })
        .flatten()
        .next();
    match first.as_deref() {
        Some("protocol") | Some("robustness") => 2,
        _ => 1,
    }
}

fn execute(cli: &Cli, argv: &[OsString], out: &mut dyn Write) -> Result<()> {
    let settings = Settings::new(cli.inner_budget.into(), cli.seed);
    let started = chrono::Utc::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads(cli)? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let tables = pool.install(|| dispatch(cli, &settings))?;
    match &cli.out {
        Some(dir) => {
            let outputs = emit::write_tables(dir, &tables, cli.format)?;
            let config = serde_json::to_value(cli)?;
            let manifest = RunManifest {
                command: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
                config_sha256: emit::sha256_hex(config.to_string().as_bytes()),
                config,
                seed: cli.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                started: started.to_rfc3339(),
                finished: chrono::Utc::now().to_rfc3339(),
                outputs,
            };
            emit::write_manifest(dir, &manifest)?;
        }
        None => {
            for t in &tables {
                if tables.len() > 1 {
                    writeln!(out, "# {}", t.name)?;
                }
                emit::write_table(t, cli.format, &mut *out)?;
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Tables go to `out` unless `--out` is given.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if argv.is_empty() {
        argv.push("discordnet".into());
    }
    let merged = match config::config_path(&argv) {
        Some(path) => match config::read_config(path.as_ref()) {
            Ok(c) => config::merge(&argv, subcommand_depth(&argv), &c),
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
        None => argv.clone(),
    };
    let cli = match Cli::try_parse_from(&merged) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = e.print();
            return 1;
        }
    };
    match execute(&cli, &argv, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                1
            } else {
                2
            }
        }
    }
}
