use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phls::analytic::{AnalyticParams, CostReport};
use phls::experiment::{aggregate, emit_csv, format_sig, run, sweep_with_threads, Axis, ResultTable, ScenarioConfig};
use phls::locsvc::Protocol;

#[derive(Parser)]
#[command(name = "phls", version, about = "Hierarchical location service simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Speed,
    Density,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario with one seed.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep speed or node count for several protocols.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, value_delimiter = ',', default_value = "hls,phls1,phls2")]
        protocols: Vec<Protocol>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Evaluate the analytic cost model over node counts and speeds.
    Analytic {
        #[arg(long, value_delimiter = ',')]
        n: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        v: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Nodes per m².
        #[arg(long, default_value_t = 3e-4)]
        density: f64,
        #[arg(long, default_value_t = 125.0)]
        r: f64,
        #[arg(long, default_value_t = 200.0)]
        z: f64,
        /// Per-level distance growth, 4 or 2.
        #[arg(long, default_value_t = 4)]
        base: u32,
        #[arg(long)]
        normalized: bool,
    },
    /// Check a configuration file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn analytic_csv(params: &[AnalyticParams]) -> Result<String, phls::analytic::AnalyticError> {
    let mut out = String::from(
        "n,v,levels,level,crossing_rate,expected_hops,hit_probability,\
         maintenance,query,storage,maintenance_closed_form,query_closed_form\n",
    );
    for p in params {
        let report = CostReport::compute(p)?;
        for l in &report.levels {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                p.nodes,
                p.v,
                p.levels,
                l.level,
                format_sig(l.crossing_rate),
                format_sig(l.expected_hops),
                format_sig(l.hit_probability),
                format_sig(report.maintenance),
                format_sig(report.query),
                report.storage,
                format_sig(report.maintenance_closed_form),
                format_sig(report.query_closed_form),
            ));
        }
    }
    Ok(out)
}

fn execute(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let metrics = run(&cfg, seed)?;
            let table = ResultTable {
                axis_name: "seed".into(),
                rows: vec![aggregate(seed as f64, cfg.protocol, vec![metrics])],
            };
            emit_csv(&table, &out)?;
        }
        Command::Sweep { config, axis, protocols, out, threads } => {
            let cfg = ScenarioConfig::load(&config)?;
            let axis = match axis {
                AxisArg::Speed => Axis::speed(),
                AxisArg::Density => Axis::density(),
            };
            let table = sweep_with_threads(&cfg, &axis, &protocols, threads)?;
            emit_csv(&table, &out)?;
        }
        Command::Analytic { n, v, out, density, r, z, base, normalized } => {
            let mut params = Vec::new();
            for &nodes in &n {
                for &speed in &v {
                    let mut p = AnalyticParams::for_network(nodes, density, r)?;
                    p.v = speed;
                    p.z = z;
                    p.level_scale_exponent = base;
                    p.normalize_hit_probs = normalized;
                    p.validate()?;
                    params.push(p);
                }
            }
            std::fs::write(out, analytic_csv(&params)?)?;
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let grid = cfg.grid()?;
            println!(
                "ok: {} nodes, {} m area, {} levels of {} m cells, radio range {} m",
                cfg.node_count,
                cfg.area_side,
                grid.levels() + 1,
                cfg.cell_side,
                cfg.radio_range
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
