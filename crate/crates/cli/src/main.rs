use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use aoisim_core::aoi::sampling_weight;
use aoisim_core::channel::ChannelState;
use aoisim_core::config::{DeltaMax, PolicyKind, SystemConfig, TopologySource};
use aoisim_core::output::{write_metrics_json, write_sweep_csv, TraceWriter};
use aoisim_core::sim::run_simulation_with;
use aoisim_core::solver::{solve, GreedyRefill, SlotProblem, SolverKind};
use aoisim_core::sweep::{compare_solvers, sweep_replicated, SweepParam};

/// AoI-constrained power minimization simulator.
#[derive(Parser)]
#[command(name = "aoisim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write trace.csv and metrics.json.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
        /// Skip writing the per-slot trace.
        #[arg(long)]
        no_trace: bool,
    },
    /// Run one simulation per parameter value (and seed) and write sweep.csv.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Parameter to vary: V, N or deltaMax.
        #[arg(long)]
        param: SweepParam,
        /// Values, comma separated.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        /// Seeds, comma separated; defaults to the config seed.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        seeds: Vec<u64>,
        /// Output file.
        #[arg(long, short, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Compare the sub-optimal and exhaustive solvers on one channel stream.
    CompareSolvers {
        #[command(flatten)]
        config: ConfigArgs,
        /// Number of slots; defaults to the horizon.
        #[arg(long)]
        slots: Option<u64>,
        /// Also write the report to this JSON file.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve a single per-slot problem read from a TOML or JSON file.
    Solve {
        problem: PathBuf,
        /// Use the exhaustive solver.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, value_parser = parse_refill, default_value = "sampling")]
        greedy_refill: GreedyRefill,
    },
    /// Check a configuration and print it with all defaults filled in.
    ValidateConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// Configuration file (TOML).
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    sensors: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    noise_psd: Option<f64>,
    #[arg(long)]
    packet_bytes: Option<f64>,
    /// Shared maximum acceptable average AoI.
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long, short = 'V')]
    v: Option<f64>,
    #[arg(long, short = 'T')]
    horizon: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Topology file (TOML).
    #[arg(long)]
    topology: Option<PathBuf>,
    /// drift-plus-penalty or fixed-rate.
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
    /// sub-optimal or exhaustive.
    #[arg(long, value_parser = parse_solver)]
    solver: Option<SolverKind>,
    /// sampling or paper.
    #[arg(long, value_parser = parse_refill)]
    greedy_refill: Option<GreedyRefill>,
    #[arg(long)]
    series_stride: Option<u64>,
}

fn parse_kebab<T: for<'de> Deserialize<'de>>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_policy(s: &str) -> std::result::Result<PolicyKind, String> {
    parse_kebab(s)
}

fn parse_solver(s: &str) -> std::result::Result<SolverKind, String> {
    parse_kebab(s)
}

fn parse_refill(s: &str) -> std::result::Result<GreedyRefill, String> {
    parse_kebab(s)
}

impl ConfigArgs {
    fn load(&self) -> Result<SystemConfig> {
        let mut cfg = match &self.config {
            Some(path) => SystemConfig::load(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => SystemConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(x) = self.$field.clone() { cfg.$field = x; })*
            };
        }
        set!(sensors, channels, bandwidth_hz, noise_psd, packet_bytes, v, horizon, seed);
        set!(policy, solver, greedy_refill);
        if let Some(d) = self.delta_max {
            cfg.delta_max = DeltaMax::Uniform(d);
        }
        if let Some(s) = self.series_stride {
            cfg.series_stride = Some(s);
        }
        if let Some(p) = &self.topology {
            cfg.topology = TopologySource::File(p.clone());
            cfg.resolve_topology()
                .with_context(|| format!("reading topology {}", p.display()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A per-slot problem on disk: either explicit weights or the AoI and
/// queue values they are computed from.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    gains: ChannelState,
    weights: Option<Vec<f64>>,
    aoi: Option<Vec<u32>>,
    queues: Option<Vec<f64>>,
    v: f64,
    bandwidth_hz: f64,
    noise_psd: f64,
    packet_bytes: f64,
}

impl ProblemFile {
    fn read(path: &Path) -> Result<SlotProblem> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading problem {}", path.display()))?;
        let file: ProblemFile = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        let weights = match (file.weights, file.aoi, file.queues) {
            (Some(w), None, None) => w,
            (None, Some(a), Some(q)) if a.len() == q.len() => {
                a.iter().zip(&q).map(|(&d, &q)| sampling_weight(d, q)).collect()
            }
            (None, Some(_), Some(_)) => bail!("aoi and queues differ in length"),
            _ => bail!("give either weights, or both aoi and queues"),
        };
        let problem = SlotProblem {
            gains: file.gains,
            weights,
            v: file.v,
            bandwidth_hz: file.bandwidth_hz,
            noise_psd: file.noise_psd,
            packet_bits: file.packet_bytes * 8.0,
        };
        problem.validate()?;
        Ok(problem)
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            out,
            no_trace,
        } => {
            let cfg = config.load()?;
            std::fs::create_dir_all(&out)?;
            let mut writer = if no_trace {
                None
            } else {
                let f = std::fs::File::create(out.join("trace.csv"))?;
                Some(TraceWriter::new(std::io::BufWriter::new(f), cfg.sensors)?)
            };
            let mut write_err = None;
            let metrics = run_simulation_with(&cfg, |rec| {
                if let Some(w) = writer.as_mut() {
                    if let Err(e) = w.write(rec) {
                        write_err.get_or_insert(e);
                    }
                }
            })?;
            if let Some(e) = write_err {
                return Err(e.into());
            }
            if let Some(w) = writer {
                w.finish()?;
            }
            write_metrics_json(out.join("metrics.json"), &metrics)?;
            println!("slots            {}", metrics.slots);
            println!("avg total power  {:.6e} W", metrics.avg_total_power);
            println!("avg queue sum    {:.4}", metrics.avg_queue_sum);
            println!("max AoI          {}", metrics.max_aoi);
            let aoi: Vec<String> = metrics.avg_aoi.iter().map(|a| format!("{a:.3}")).collect();
            println!("avg AoI          {}", aoi.join(" "));
        }
        Command::Sweep {
            config,
            param,
            values,
            seeds,
            out,
        } => {
            let cfg = config.load()?;
            let seeds = if seeds.is_empty() { vec![cfg.seed] } else { seeds };
            let rows = sweep_replicated(&cfg, param, &values, &seeds)?;
            write_sweep_csv(&out, &rows)?;
            for r in &rows {
                println!(
                    "{}={} seed={} power={:.6e} queue_sum={:.4}",
                    r.param, r.value, r.seed, r.metrics.avg_total_power, r.metrics.avg_queue_sum
                );
            }
        }
        Command::CompareSolvers { config, slots, out } => {
            let cfg = config.load()?;
            let report = compare_solvers(&cfg, slots.unwrap_or(cfg.horizon))?;
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
            }
            let mut summary = serde_json::to_value(&report)?;
            if let Some(obj) = summary.as_object_mut() {
                for key in ["sub_optimal", "exhaustive"] {
                    if let Some(m) = obj.get_mut(key).and_then(|m| m.as_object_mut()) {
                        m.remove("series");
                    }
                }
            }
            print_json(&summary)?;
        }
        Command::Solve {
            problem,
            exhaustive,
            greedy_refill,
        } => {
            let problem = ProblemFile::read(&problem)?;
            let kind = if exhaustive {
                SolverKind::Exhaustive
            } else {
                SolverKind::SubOptimal
            };
            let (decision, stats) = solve(&problem, kind, greedy_refill)?;
            print_json(&serde_json::json!({ "decision": decision, "stats": stats }))?;
        }
        Command::ValidateConfig { config } => {
            let cfg = config.load()?;
            print!("{}", cfg.to_toml_string()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
