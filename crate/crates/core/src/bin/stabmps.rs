//! Command-line harness: learn stabilizer groups of built-in or on-disk MPS
//! states and run the seeded experiment drivers.

use clap::{Parser, Subcommand};
use stabmps::error::Error;
use stabmps::experiments::{
    fig2_csv, fig3_csv, fig4_csv, prepare_doped_state, run_fig2, run_fig3, run_fig4,
    ExperimentKind, ExperimentSpec,
};
use stabmps::learner::{learn, LearnerConfig};
use stabmps::mps::MpsState;
use stabmps::oracle::exact_stabilizer_group;
use stabmps::sampler::SamplerConfig;
use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "stabmps",
    about = "Learn the stabilizer group of a matrix product state",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Learn the stabilizer group of one state and print a report.
    Learn(LearnArgs),
    /// Success probability of full generator recovery vs iteration.
    Fig2(Fig2Args),
    /// Generator count vs iteration for a sweep of beam widths.
    Fig3(Fig3Args),
    /// Generator count along doped-circuit dynamics.
    Fig4(Fig4Args),
    /// Learn a small doped state and compare against brute-force enumeration.
    OracleCheck(OracleCheckArgs),
}

#[derive(clap::Args)]
struct CommonOpts {
    /// key=value file mirroring every flag; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Beam width (maximum branches kept per site).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Clifford layers per state modification.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    bond_cap: Option<usize>,
}

#[derive(clap::Args)]
struct LearnArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Built-in state family: "doped" or "zeros".
    #[arg(long)]
    state: Option<String>,
    /// Binary MPS file; overrides --state.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Write the text report here as well as stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Fig2Args {
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    traj: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Fig3Args {
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Comma-separated beam widths, e.g. 8,32,128.
    #[arg(long)]
    m_list: Option<String>,
    #[arg(long)]
    traj: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Fig4Args {
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long)]
    n: Option<usize>,
    /// T gates per circuit layer.
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    traj: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct OracleCheckArgs {
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
}

/// key=value config file; '#' starts a comment line.
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self, Error> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Error::Parse(format!(
                        "config line {}: expected key=value, got '{line}'",
                        lineno + 1
                    )));
                };
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Parse(format!("config key '{key}': cannot parse '{raw}'"))),
        }
    }
}

fn resolve<T: FromStr>(
    flag: Option<T>,
    cfg: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, Error> {
    Ok(flag.or(cfg.get(key)?).unwrap_or(default))
}

fn parse_m_list(raw: &str) -> Result<Vec<usize>, Error> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid beam width '{s}'")))
        })
        .collect()
}

struct ResolvedCommon {
    seed: u64,
    m: usize,
    iterations: usize,
    depth: usize,
    bond_cap: usize,
}

fn resolve_common(c: &CommonOpts, cfg: &FileConfig) -> Result<ResolvedCommon, Error> {
    Ok(ResolvedCommon {
        seed: resolve(c.seed, cfg, "seed", 0)?,
        m: resolve(c.m, cfg, "m", 256)?,
        iterations: resolve(c.iterations, cfg, "iterations", 5)?,
        depth: resolve(c.depth, cfg, "depth", 1)?,
        bond_cap: resolve(c.bond_cap, cfg, "bond_cap", 4096)?,
    })
}

fn write_output(path: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => Ok(std::fs::write(p, content)?),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_learn(args: &LearnArgs) -> Result<(), Error> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let common = resolve_common(&args.common, &cfg)?;
    let n = resolve(args.n, &cfg, "n", 8)?;
    let nt = resolve(args.nt, &cfg, "nt", 0)?;
    let patience = resolve(args.patience, &cfg, "patience", 5)?;
    let state_kind: String = resolve(args.state.clone(), &cfg, "state", "doped".to_string())?;

    let state = match &args.input {
        Some(path) => MpsState::load_from_path(path)?,
        None => match state_kind.as_str() {
            "doped" => prepare_doped_state(n, nt, common.seed)?.0,
            "zeros" => MpsState::zeros(n),
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown state family '{other}' (expected doped or zeros)"
                )))
            }
        },
    };

    let learner_cfg = LearnerConfig {
        sampler: SamplerConfig { max_branches: common.m, ..SamplerConfig::default() },
        iterations: common.iterations,
        modifier_depth: common.depth,
        patience,
        seed: stabmps::learner::split_seed(common.seed, 1),
        bond_cap: common.bond_cap,
    };
    let result = learn(&state, &learner_cfg)?;
    let report = result.report();
    print!("{report}");
    if let Some(path) = &args.report {
        std::fs::write(path, &report)?;
    }
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&result.to_json()).unwrap())?;
    }
    Ok(())
}

fn cmd_fig2(args: &Fig2Args) -> Result<(), Error> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let common = resolve_common(&args.common, &cfg)?;
    let spec = ExperimentSpec {
        kind: ExperimentKind::Fig2SuccessProb,
        n: resolve(args.n, &cfg, "n", 10)?,
        nt: resolve(args.nt, &cfg, "nt", 5)?,
        m_values: vec![common.m],
        iterations: common.iterations,
        modifier_depth: common.depth,
        trajectories: resolve(args.traj, &cfg, "traj", 100)?,
        seed: common.seed,
        bond_cap: common.bond_cap,
        ..ExperimentSpec::default()
    };
    write_output(args.output.as_ref(), &fig2_csv(&run_fig2(&spec)?))
}

fn cmd_fig3(args: &Fig3Args) -> Result<(), Error> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let common = resolve_common(&args.common, &cfg)?;
    let m_list: String = resolve(args.m_list.clone(), &cfg, "m_list", "8,32,128".to_string())?;
    let spec = ExperimentSpec {
        kind: ExperimentKind::Fig3KVsIter,
        n: resolve(args.n, &cfg, "n", 10)?,
        nt: resolve(args.nt, &cfg, "nt", 5)?,
        m_values: parse_m_list(&m_list)?,
        iterations: common.iterations,
        modifier_depth: common.depth,
        trajectories: resolve(args.traj, &cfg, "traj", 20)?,
        seed: common.seed,
        bond_cap: common.bond_cap,
        ..ExperimentSpec::default()
    };
    write_output(args.output.as_ref(), &fig3_csv(&run_fig3(&spec)?))
}

fn cmd_fig4(args: &Fig4Args) -> Result<(), Error> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let common = resolve_common(&args.common, &cfg)?;
    let spec = ExperimentSpec {
        kind: ExperimentKind::Fig4DopedDynamics,
        n: resolve(args.n, &cfg, "n", 10)?,
        tau: resolve(args.tau, &cfg, "tau", 2)?,
        m_values: vec![common.m],
        iterations: common.iterations,
        modifier_depth: common.depth,
        trajectories: resolve(args.traj, &cfg, "traj", 5)?,
        steps: resolve(args.steps, &cfg, "steps", 6)?,
        seed: common.seed,
        bond_cap: common.bond_cap,
        ..ExperimentSpec::default()
    };
    write_output(args.output.as_ref(), &fig4_csv(&run_fig4(&spec)?))
}

fn cmd_oracle_check(args: &OracleCheckArgs) -> Result<(), Error> {
    let cfg = FileConfig::load(args.common.config.as_ref())?;
    let common = resolve_common(&args.common, &cfg)?;
    let n = resolve(args.n, &cfg, "n", 6)?;
    let nt = resolve(args.nt, &cfg, "nt", 2)?;
    let (state, _, _) = prepare_doped_state(n, nt, common.seed)?;
    let learner_cfg = LearnerConfig {
        sampler: SamplerConfig { max_branches: common.m, ..SamplerConfig::default() },
        iterations: common.iterations,
        modifier_depth: common.depth,
        patience: common.iterations,
        seed: stabmps::learner::split_seed(common.seed, 1),
        bond_cap: common.bond_cap,
    };
    let result = learn(&state, &learner_cfg)?;
    let exact = exact_stabilizer_group(&state.to_dense()?)?;
    let rank_match = result.k == exact.rank();
    let rows_match = result
        .generators
        .strings()
        .iter()
        .all(|p| exact.signed_membership(p) == Some(true));
    if rank_match && rows_match {
        println!("oracle check: PASS (n={n}, nt={nt}, k={})", result.k);
        Ok(())
    } else {
        Err(Error::NumericalConsistency(format!(
            "oracle check: FAIL (learned k={}, exact k={}, rows_match={rows_match})",
            result.k,
            exact.rank()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Learn(a) => cmd_learn(a),
        Cmd::Fig2(a) => cmd_fig2(a),
        Cmd::Fig3(a) => cmd_fig3(a),
        Cmd::Fig4(a) => cmd_fig4(a),
        Cmd::OracleCheck(a) => cmd_oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Capacity(_) => ExitCode::from(3),
                Error::InvalidInput(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
