//! Experiment drivers: strategy comparison, parameter sweeps and trace
//! export on top of single runs.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::engine::config::{ScenarioConfig, StrategyConfig, StrategyKind};
use crate::engine::sim::{MotionRecord, Simulation};
use crate::error::{Result, SimError};
use crate::report::{
    config_header, emit_report, fmt_f64, fmt_opt, metrics_row, push_row, write_file, MetricsReport,
    METRICS_COLUMNS,
};

/// Config for `kind` on the scenario `base`. Strategy parameters carry over
/// when `base` already uses that strategy, otherwise defaults apply.
pub fn with_strategy(base: &ScenarioConfig, kind: StrategyKind) -> ScenarioConfig {
    let mut cfg = base.clone();
    if cfg.strategy.kind() != kind {
        cfg.strategy = StrategyConfig::default_for(kind);
    }
    cfg
}

/// Run every strategy on the same scenario and seed. Mobility and traffic
/// streams are independent of beaconing, so the runs differ only in how
/// positions are advertised.
pub fn compare(base: &ScenarioConfig, strategies: &[StrategyKind]) -> Result<Vec<MetricsReport>> {
    if strategies.is_empty() {
        return Err(SimError::config(
            "strategies",
            "at least one strategy is required",
        ));
    }
    base.validate()?;
    strategies
        .par_iter()
        .map(|&k| crate::engine::run(&with_strategy(base, k)))
        .collect()
}

/// Side-by-side metrics, one row per strategy.
pub fn comparison_csv(reports: &[MetricsReport]) -> String {
    let mut out = reports
        .first()
        .map(|r| config_header(&r.config))
        .unwrap_or_default();
    push_row(&mut out, METRICS_COLUMNS);
    for r in reports {
        push_row(&mut out, &metrics_row(r));
    }
    out
}

/// compare.csv plus one full report directory per strategy.
pub fn emit_comparison(reports: &[MetricsReport], out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| SimError::io(out_dir, e))?;
    write_file(&out_dir.join("compare.csv"), &comparison_csv(reports))?;
    for r in reports {
        emit_report(r, &out_dir.join(r.strategy.name()))?;
    }
    Ok(())
}

/// Scenario parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    SpeedMax,
    PacketRate,
    NodeCount,
    FlowCount,
    Aer,
    PbInterval,
    DbThreshold,
    LocalizationSigma,
    LossProbability,
    Duration,
    RadioRange,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 11] = [
        SweepParameter::SpeedMax,
        SweepParameter::PacketRate,
        SweepParameter::NodeCount,
        SweepParameter::FlowCount,
        SweepParameter::Aer,
        SweepParameter::PbInterval,
        SweepParameter::DbThreshold,
        SweepParameter::LocalizationSigma,
        SweepParameter::LossProbability,
        SweepParameter::Duration,
        SweepParameter::RadioRange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::SpeedMax => "speed_max",
            SweepParameter::PacketRate => "packet_rate",
            SweepParameter::NodeCount => "node_count",
            SweepParameter::FlowCount => "flow_count",
            SweepParameter::Aer => "aer",
            SweepParameter::PbInterval => "pb_interval",
            SweepParameter::DbThreshold => "db_threshold",
            SweepParameter::LocalizationSigma => "localization_sigma",
            SweepParameter::LossProbability => "loss_probability",
            SweepParameter::Duration => "duration",
            SweepParameter::RadioRange => "radio_range",
        }
    }

    /// Set the parameter on `cfg`. Strategy parameters only touch configs
    /// of the matching strategy.
    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(SimError::config(self.name(), format!("{v} is not a count")))
            }
        };
        match self {
            SweepParameter::SpeedMax => cfg.speed_max = value,
            SweepParameter::PacketRate => cfg.packet_rate = value,
            SweepParameter::NodeCount => cfg.node_count = count(value)?,
            SweepParameter::FlowCount => cfg.flow_count = count(value)?,
            SweepParameter::Duration => cfg.duration = value,
            SweepParameter::RadioRange => cfg.radio_range = value,
            SweepParameter::LocalizationSigma => cfg.perturbations.localization_sigma = value,
            SweepParameter::LossProbability => cfg.perturbations.loss_probability = value,
            SweepParameter::Aer => {
                if let StrategyConfig::Apu { aer } = &mut cfg.strategy {
                    *aer = Some(value);
                }
            }
            SweepParameter::PbInterval => {
                if let StrategyConfig::Pb { interval } = &mut cfg.strategy {
                    *interval = value;
                }
            }
            SweepParameter::DbThreshold => {
                if let StrategyConfig::Db { threshold } = &mut cfg.strategy {
                    *threshold = Some(value);
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|p| p.name()).collect();
                SimError::config(
                    "parameter",
                    format!(
                        "unknown sweep parameter `{s}` (known: {})",
                        known.join(", ")
                    ),
                )
            })
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Seeds per point: `base.seed`, `base.seed + 1`, ...
    pub replications: u32,
    pub strategies: Vec<StrategyKind>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(SimError::config("values", "sweep needs at least one value"));
        }
        if self.replications == 0 {
            return Err(SimError::config("replications", "must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(SimError::config(
                "strategies",
                "at least one strategy is required",
            ));
        }
        for &v in &self.values {
            self.point_config(v, 0, self.strategies[0])?.validate()?;
        }
        Ok(())
    }

    pub fn point_config(
        &self,
        value: f64,
        replication: u32,
        kind: StrategyKind,
    ) -> Result<ScenarioConfig> {
        let mut cfg = with_strategy(&self.base, kind);
        cfg.seed = self.base.seed.wrapping_add(replication as u64);
        self.parameter.apply(&mut cfg, value)?;
        Ok(cfg)
    }
}

/// One completed run of a sweep.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub value: f64,
    pub replication: u32,
    pub report: MetricsReport,
}

/// Mean and sample standard deviation of one metric at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub strategy: StrategyKind,
    pub metric: &'static str,
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub runs: Vec<SweepRun>,
}

impl SweepResult {
    pub fn runs_for(&self, value: f64, kind: StrategyKind) -> impl Iterator<Item = &SweepRun> {
        self.runs
            .iter()
            .filter(move |r| r.value == value && r.report.strategy == kind)
    }

    /// Per-point statistics in (value, strategy, metric) order. Undefined
    /// metrics (e.g. PDR with nothing generated) are left out of the mean.
    pub fn summary(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &value in &self.spec.values {
            for &kind in &self.spec.strategies {
                let scalars: Vec<_> = self
                    .runs_for(value, kind)
                    .map(|r| r.report.scalars())
                    .collect();
                let Some(first) = scalars.first() else {
                    continue;
                };
                for (i, &(metric, _)) in first.iter().enumerate() {
                    let xs: Vec<f64> = scalars.iter().filter_map(|s| s[i].1).collect();
                    let (mean, std) = mean_std(&xs);
                    out.push(SweepPoint {
                        value,
                        strategy: kind,
                        metric,
                        n: xs.len(),
                        mean,
                        std,
                    });
                }
            }
        }
        out
    }

    pub fn mean(&self, value: f64, kind: StrategyKind, metric: &str) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|p| p.value == value && p.strategy == kind && p.metric == metric)
            .and_then(|p| p.mean)
    }

    /// Long format: one row per (value, replication, strategy, metric).
    pub fn long_csv(&self) -> String {
        let mut out = config_header(&self.spec.base);
        push_row(
            &mut out,
            &[
                self.spec.parameter.name(),
                "replication",
                "seed",
                "strategy",
                "metric",
                "value",
            ],
        );
        for run in &self.runs {
            for (metric, v) in run.report.scalars() {
                push_row(
                    &mut out,
                    &[
                        fmt_f64(run.value),
                        run.replication.to_string(),
                        run.report.config.seed.to_string(),
                        run.report.strategy.name().to_owned(),
                        metric.to_owned(),
                        fmt_opt(v),
                    ],
                );
            }
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = config_header(&self.spec.base);
        push_row(
            &mut out,
            &[
                self.spec.parameter.name(),
                "strategy",
                "metric",
                "n",
                "mean",
                "std",
            ],
        );
        for p in self.summary() {
            push_row(
                &mut out,
                &[
                    fmt_f64(p.value),
                    p.strategy.name().to_owned(),
                    p.metric.to_owned(),
                    p.n.to_string(),
                    fmt_opt(p.mean),
                    fmt_opt(p.std),
                ],
            );
        }
        out
    }
}

fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

/// Run all (value, replication, strategy) points in parallel. Results come
/// back in a fixed order regardless of scheduling.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut points = Vec::new();
    for &value in &spec.values {
        for rep in 0..spec.replications {
            for &kind in &spec.strategies {
                points.push((value, rep, spec.point_config(value, rep, kind)?));
            }
        }
    }
    let runs = points
        .into_par_iter()
        .map(|(value, replication, cfg)| {
            crate::engine::run(&cfg).map(|report| SweepRun {
                value,
                replication,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        spec: spec.clone(),
        runs,
    })
}

pub fn emit_sweep(result: &SweepResult, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| SimError::io(out_dir, e))?;
    write_file(&out_dir.join("sweep.csv"), &result.long_csv())?;
    write_file(&out_dir.join("sweep_summary.csv"), &result.summary_csv())?;
    Ok(())
}

/// Run a scenario and also return its mobility trace.
pub fn run_with_trace(cfg: &ScenarioConfig) -> Result<(MetricsReport, Vec<MotionRecord>)> {
    let mut sim = Simulation::new(cfg.clone())?;
    sim.run_to_end()?;
    let trace = sim.motion_log().to_vec();
    Ok((sim.finish(), trace))
}

/// `time,node,x,y,vx,vy`, one row per leg change.
pub fn mobility_csv(cfg: &ScenarioConfig, trace: &[MotionRecord]) -> String {
    let mut out = config_header(cfg);
    push_row(&mut out, &["time_s", "node", "x", "y", "vx", "vy"]);
    for m in trace {
        push_row(
            &mut out,
            &[
                fmt_f64(m.time),
                m.node.to_string(),
                fmt_f64(m.position.x),
                fmt_f64(m.position.y),
                fmt_f64(m.velocity.x),
                fmt_f64(m.velocity.y),
            ],
        );
    }
    out
}
