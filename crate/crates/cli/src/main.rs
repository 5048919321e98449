use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use beaconsim::analysis::{estimate_gamma, AnalyticalScenario, SimulatedOverhead};
use beaconsim::harness::{self, SweepParameter, SweepSpec};
use beaconsim::report::{emit_report, fmt_f64};
use beaconsim::{ScenarioConfig, StrategyKind};
use clap::{Args, Parser, Subcommand};

/// Position-beaconing simulator for geographic routing in MANETs.
#[derive(Parser)]
#[command(name = "beaconsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Override the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.scenario {
            Some(path) => ScenarioConfig::load(path)
                .with_context(|| format!("loading scenario {}", path.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report CSVs.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write mobility.csv with every leg change.
        #[arg(long)]
        trace: bool,
    },
    /// Run several strategies on the same scenario.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated list of pb, db, sb, apu.
        #[arg(long, value_delimiter = ',', default_value = "pb,db,sb,apu")]
        strategies: Vec<StrategyKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter over a list of values.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// speed_max, packet_rate, node_count, flow_count, aer, pb_interval,
        /// db_threshold, localization_sigma, loss_probability, duration or
        /// radio_range.
        #[arg(long)]
        param: SweepParameter,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        replications: u32,
        #[arg(long, value_delimiter = ',', default_value = "apu,pb")]
        strategies: Vec<StrategyKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the analytical overhead prediction for a scenario.
    Predict {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Beacons per forwarding operation; measured by an APU run when omitted.
        #[arg(long)]
        gamma: Option<f64>,
        /// Skip the measuring simulation and print only the geometric terms.
        #[arg(long)]
        no_run: bool,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            trace,
        } => {
            let cfg = scenario.load()?;
            let (report, motion) = harness::run_with_trace(&cfg)?;
            emit_report(&report, &out)?;
            if trace {
                let path = out.join("mobility.csv");
                std::fs::write(&path, harness::mobility_csv(&cfg, &motion))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!(
                "{}: {} beacons, pdr {}, energy {} uW*s -> {}",
                report.strategy,
                report.beacons.total(),
                report.pdr().map_or("NA".into(), fmt_f64),
                fmt_f64(report.total_energy()),
                out.display()
            );
        }
        Command::Compare {
            scenario,
            strategies,
            out,
        } => {
            let cfg = scenario.load()?;
            let reports = harness::compare(&cfg, &strategies)?;
            harness::emit_comparison(&reports, &out)?;
            println!(
                "{:<6}{:>10}{:>14}{:>16}",
                "kind", "beacons", "pdr", "energy_uws"
            );
            for r in &reports {
                println!(
                    "{:<6}{:>10}{:>14}{:>16}",
                    r.strategy.name(),
                    r.beacons.total(),
                    r.pdr().map_or("NA".into(), fmt_f64),
                    fmt_f64(r.total_energy())
                );
            }
        }
        Command::Sweep {
            scenario,
            param,
            values,
            replications,
            strategies,
            out,
        } => {
            let spec = SweepSpec {
                base: scenario.load()?,
                parameter: param,
                values,
                replications,
                strategies,
            };
            let result = harness::sweep(&spec)?;
            harness::emit_sweep(&result, &out)?;
            println!("{} runs -> {}", result.runs.len(), out.display());
        }
        Command::Predict {
            scenario,
            gamma,
            no_run,
        } => {
            let mut cfg = scenario.load()?;
            let measured = if gamma.is_none() && !no_run {
                cfg.strategy = beaconsim::StrategyConfig::default_for(StrategyKind::Apu);
                let report = beaconsim::run(&cfg)?;
                Some(report)
            } else {
                None
            };
            let gamma = match (gamma, &measured) {
                (Some(g), _) => Some(g),
                (None, Some(r)) => Some(estimate_gamma(r)?),
                (None, None) => None,
            };
            if gamma.is_some_and(|g| g.is_nan() || g < 0.0) {
                bail!("gamma must be >= 0");
            }
            let p = AnalyticalScenario::from_config(&cfg, gamma).predict()?;
            println!(
                "density_per_m2    {}",
                fmt_f64(cfg.node_count as f64 / (cfg.area_a * cfg.area_b))
            );
            println!("mean_distance_m   {}", fmt_f64(p.mean_distance));
            println!("mean_hops         {}", fmt_f64(p.mean_hops));
            println!("forwarding_ops    {}", fmt_f64(p.forwarding_ops));
            if let Some(g) = p.gamma {
                println!("gamma             {}", fmt_f64(g));
            }
            if let Some(o) = p.odl_overhead {
                println!("odl_beacons       {}", fmt_f64(o));
            }
            if let Some(r) = &measured {
                let s = SimulatedOverhead::from_report(r);
                println!(
                    "simulated_hops    {}",
                    s.mean_hops.map_or("NA".into(), fmt_f64)
                );
                println!("simulated_fwd_ops {}", s.forwarding_ops);
                println!("simulated_mp      {}", s.mp);
                println!("simulated_odl     {}", s.odl);
            }
        }
    }
    Ok(())
}
