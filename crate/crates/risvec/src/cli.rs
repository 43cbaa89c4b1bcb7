//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use risvec_core::placement::{self, Evaluator, Metric, PlacementResult};
use risvec_core::scenario::Placement;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::experiment::{self, SweepParam};
use crate::io::{self, ExperimentRecord, RunSummary, Scheme};
use crate::parallel::{thread_pool, ParallelObjective};
use crate::trace;

/// RIS placement and task offloading for multi-server vehicular edge computing.
#[derive(Debug, Parser)]
#[command(name = "risvec", version)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Scenario file merged over the shipped defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set servers.capacity=3` (repeatable, last wins).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed (overrides `master_seed`).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    threads: usize,
    /// Record optimizer wall time in `wall_s` (makes outputs run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the instances and write them as a vehicle trace.
    Gen,
    /// Score one placement.
    Eval {
        /// Altitude (m).
        #[arg(long = "h", value_name = "M")]
        altitude: f64,
        /// Tilt (degrees).
        #[arg(long = "theta", value_name = "DEG")]
        tilt: f64,
    },
    /// Exhaustive grid search.
    Grid,
    /// Adaptive hill climbing.
    Hc,
    /// Genetic search.
    Ga,
    /// Grid search with greedy nearest-server assignment.
    Gop,
    /// Grid search maximising the expected sum rate.
    Sumrate,
    /// Vary one parameter across all five schemes.
    Sweep {
        /// servers, capacity, arrival or flops.
        param: String,
        /// Comma-separated values replacing the defaults.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Comma-separated subset of OP,HC,GAP,GOP,SUMRATE.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
    },
    /// Write the throughput surface over the whole grid.
    Surface,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Eval { .. } => "eval",
            Command::Grid => "grid",
            Command::Hc => "hc",
            Command::Ga => "ga",
            Command::Gop => "gop",
            Command::Sumrate => "sumrate",
            Command::Sweep { .. } => "sweep",
            Command::Surface => "surface",
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing human-readable output to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return write!(stdout, "{e}").map_err(|err| Error::io("<stdout>", err));
        }
        Err(e) => return Err(Error::Config(e.to_string().trim().to_string())),
    };
    execute(cli, stdout)
}

fn say(stdout: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(stdout, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn describe(scheme: Scheme, r: &PlacementResult) -> String {
    format!(
        "scheme={} h_m={} theta_deg={} throughput={} evaluations={}",
        scheme,
        io::sig6(r.placement.altitude),
        io::sig6(r.placement.tilt_deg()),
        r.avg_throughput,
        r.evaluations
    )
}

fn summary_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

fn write_results(cfg: &Config, command: &str, out: Option<&Path>, records: &[ExperimentRecord]) -> Result<()> {
    if let Some(out) = out {
        io::write_records(records, out)?;
        RunSummary::new(command, cfg.hash(), cfg.scenario.master_seed, records).write(&summary_path(out))?;
    }
    Ok(())
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let g = cli.global;
    let mut overrides = g.overrides.clone();
    if let Some(seed) = g.seed {
        overrides.push(format!("master_seed={seed}"));
    }
    let cfg = Config::load(g.config.as_deref(), &overrides)?;
    let pool = thread_pool(g.threads)?;
    let seed = cfg.scenario.master_seed;
    let name = cli.command.name();

    match cli.command {
        Command::Gen => {
            let out = g.out.unwrap_or_else(|| PathBuf::from("instances.csv"));
            let instances = experiment::load_instances(&cfg)?;
            trace::write_trace(&instances, &out)?;
            let vehicles: usize = instances.iter().map(|i| i.vehicles.len()).sum();
            say(stdout, &format!("wrote {} instances ({vehicles} vehicles) to {}", instances.len(), out.display()))
        }
        Command::Eval { altitude, tilt } => {
            let p = Placement::from_degrees(cfg.scenario.ris_xy, altitude, tilt);
            if !cfg.scenario.bounds.contains(&p) {
                return Err(Error::Config(format!("placement ({altitude} m, {tilt} deg) lies outside the placement bounds")));
            }
            let instances = experiment::load_instances(&cfg)?;
            let ev = Evaluator::new(&cfg.scenario, &instances)?;
            let value = placement::Objective::evaluate(&ParallelObjective::new(&ev, Metric::OptimalThroughput, &pool), &p)?;
            say(stdout, &format!("h_m={} theta_deg={} throughput={value}", io::sig6(altitude), io::sig6(tilt)))
        }
        Command::Grid | Command::Hc | Command::Ga | Command::Gop | Command::Sumrate => {
            let scheme = match cli.command {
                Command::Grid => Scheme::Op,
                Command::Hc => Scheme::Hc,
                Command::Ga => Scheme::Gap,
                Command::Gop => Scheme::Gop,
                _ => Scheme::Sumrate,
            };
            let instances = experiment::load_instances(&cfg)?;
            let (result, wall) = experiment::run_scheme(&cfg, &instances, scheme, &pool)?;
            let rec = experiment::record(scheme, "none", 0.0, seed, &result, wall, g.timing);
            write_results(&cfg, name, g.out.as_deref(), &[rec])?;
            let mut line = describe(scheme, &result);
            if g.timing {
                line.push_str(&format!(" wall_s={wall:.3}"));
            }
            say(stdout, &line)
        }
        Command::Sweep { param, values, schemes } => {
            let param: SweepParam = param.parse()?;
            let values = values.unwrap_or_else(|| param.default_values());
            let schemes = match schemes {
                Some(list) => list.iter().map(|s| s.parse()).collect::<Result<Vec<Scheme>>>()?,
                None => Scheme::ALL.to_vec(),
            };
            let out = g.out.unwrap_or_else(|| PathBuf::from(format!("sweep_{}.csv", param.name())));
            let records = experiment::sweep(&cfg, param, &values, &schemes, &pool, g.timing)?;
            write_results(&cfg, name, Some(&out), &records)?;
            for r in &records {
                say(stdout, &format!("{}={} scheme={} throughput={} h_m={} theta_deg={}", r.param, io::sig6(r.value), r.scheme, r.throughput, io::sig6(r.h_m), io::sig6(r.theta_deg)))?;
            }
            say(stdout, &format!("wrote {} records to {}", records.len(), out.display()))
        }
        Command::Surface => {
            let out = g.out.unwrap_or_else(|| PathBuf::from("surface.csv"));
            let instances = experiment::load_instances(&cfg)?;
            let ev = Evaluator::new(&cfg.scenario, &instances)?;
            let objective = ParallelObjective::new(&ev, Metric::OptimalThroughput, &pool);
            let (best, surface) = placement::grid_surface(&cfg.feasible_set, cfg.scenario.ris_xy, &objective)?;
            io::write_surface(&surface, &out)?;
            say(stdout, &format!("wrote {} points to {}; {}", surface.len(), out.display(), describe(Scheme::Op, &best)))
        }
    }
}
