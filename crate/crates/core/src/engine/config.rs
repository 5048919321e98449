//! Scenario description and validation.
//!
//! Scenario files are TOML; every key maps one-to-one onto a field below and
//! anything omitted takes the default shown in [`ScenarioConfig::default`].

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geom::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Simulated operating period in seconds.
    pub duration: f64,
    pub area_a: f64,
    pub area_b: f64,
    pub node_count: usize,
    pub radio_range: f64,
    /// Random-waypoint speed bounds (m/s). `speed_max = 0` means a static network.
    pub speed_min: f64,
    pub speed_max: f64,
    pub pause_time: f64,
    pub flow_count: usize,
    /// Packets per second per source.
    pub packet_rate: f64,
    pub packet_size: u32,
    pub beacon_size: u32,
    /// Sources start generating at `traffic_start` plus a per-flow random phase.
    pub traffic_start: f64,
    pub tick_interval: f64,
    pub metrics_sample_interval: f64,
    pub strategy: StrategyConfig,
    pub perturbations: Perturbations,
    pub mac: MacConfig,
    /// Explicit node placements and scripted paths; replaces random waypoint.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeSpec>,
    /// Explicit flows; replaces random pair selection.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flows: Vec<FlowSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            duration: 900.0,
            area_a: 1500.0,
            area_b: 1000.0,
            node_count: 100,
            radio_range: 250.0,
            speed_min: 1.0,
            speed_max: 20.0,
            pause_time: 0.0,
            flow_count: 10,
            packet_rate: 4.0,
            packet_size: 512,
            beacon_size: 32,
            traffic_start: 1.0,
            tick_interval: 0.1,
            metrics_sample_interval: 1.0,
            strategy: StrategyConfig::default(),
            perturbations: Perturbations::default(),
            mac: MacConfig::default(),
            nodes: Vec::new(),
            flows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Pb,
    Db,
    Sb,
    Apu,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Pb,
        StrategyKind::Db,
        StrategyKind::Sb,
        StrategyKind::Apu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Pb => "PB",
            StrategyKind::Db => "DB",
            StrategyKind::Sb => "SB",
            StrategyKind::Apu => "APU",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pb" | "periodic" => Ok(StrategyKind::Pb),
            "db" | "distance" => Ok(StrategyKind::Db),
            "sb" | "speed" => Ok(StrategyKind::Sb),
            "apu" => Ok(StrategyKind::Apu),
            other => Err(SimError::config(
                "strategy.kind",
                format!("unknown strategy `{other}` (expected pb, db, sb or apu)"),
            )),
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Beaconing strategy and its parameters. Distances and speeds left unset
/// are derived from the scenario (see the `resolved_*` accessors).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StrategyConfig {
    Pb {
        #[serde(default = "default_pb_interval")]
        interval: f64,
    },
    Db {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
    },
    Sb {
        #[serde(default = "default_sb_i_max")]
        i_max: f64,
        #[serde(default = "default_sb_i_min")]
        i_min: f64,
        #[serde(default)]
        v_lo: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v_hi: Option<f64>,
    },
    Apu {
        /// Acceptable error range in meters.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        aer: Option<f64>,
    },
}

fn default_pb_interval() -> f64 {
    1.0
}
fn default_sb_i_max() -> f64 {
    5.0
}
fn default_sb_i_min() -> f64 {
    0.5
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig::Apu { aer: None }
    }
}

impl StrategyConfig {
    pub fn default_for(kind: StrategyKind) -> Self {
        match kind {
            StrategyKind::Pb => StrategyConfig::Pb {
                interval: default_pb_interval(),
            },
            StrategyKind::Db => StrategyConfig::Db { threshold: None },
            StrategyKind::Sb => StrategyConfig::Sb {
                i_max: default_sb_i_max(),
                i_min: default_sb_i_min(),
                v_lo: 0.0,
                v_hi: None,
            },
            StrategyKind::Apu => StrategyConfig::Apu { aer: None },
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            StrategyConfig::Pb { .. } => StrategyKind::Pb,
            StrategyConfig::Db { .. } => StrategyKind::Db,
            StrategyConfig::Sb { .. } => StrategyKind::Sb,
            StrategyConfig::Apu { .. } => StrategyKind::Apu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadioKind {
    UnitDisk,
    LossyDisk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Perturbations {
    /// Per-axis standard deviation of localization error, meters.
    pub localization_sigma: f64,
    pub radio_model: RadioKind,
    /// Per-reception loss probability under the lossy-disk model.
    pub loss_probability: f64,
}

impl Default for Perturbations {
    fn default() -> Self {
        Perturbations {
            localization_sigma: 0.0,
            radio_model: RadioKind::UnitDisk,
            loss_probability: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacConfig {
    /// Transmission attempts per unicast before reporting failure.
    pub retry_limit: u32,
    pub p2p_bandwidth_bps: f64,
    pub broadcast_bandwidth_bps: f64,
    pub processing_delay: f64,
}

impl Default for MacConfig {
    fn default() -> Self {
        MacConfig {
            retry_limit: 4,
            p2p_bandwidth_bps: 11e6,
            broadcast_bandwidth_bps: 2e6,
            processing_delay: 1e-3,
        }
    }
}

impl MacConfig {
    pub fn unicast_latency(&self, size: u32) -> f64 {
        f64::from(size) * 8.0 / self.p2p_bandwidth_bps + self.processing_delay
    }

    pub fn broadcast_latency(&self, size: u32) -> f64 {
        f64::from(size) * 8.0 / self.broadcast_bandwidth_bps + self.processing_delay
    }
}

/// One scripted leg: move to `(x, y)` at `speed` m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg(pub f64, pub f64, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub position: (f64, f64),
    /// Followed in order without pausing; the node stays put afterwards.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<Leg>,
}

impl NodeSpec {
    pub fn fixed(x: f64, y: f64) -> Self {
        NodeSpec {
            position: (x, y),
            waypoints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub src: usize,
    pub dst: usize,
    /// Time of the first packet; random phase after `traffic_start` if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }

    pub fn is_static(&self) -> bool {
        self.nodes.is_empty() && self.speed_max == 0.0
    }

    pub fn area_contains(&self, p: Vec2) -> bool {
        (0.0..=self.area_a).contains(&p.x) && (0.0..=self.area_b).contains(&p.y)
    }

    /// AER, defaulting to a tenth of the radio range.
    pub fn resolved_aer(&self) -> f64 {
        match self.strategy {
            StrategyConfig::Apu { aer: Some(aer) } => aer,
            _ => 0.1 * self.radio_range,
        }
    }

    pub fn resolved_db_threshold(&self) -> f64 {
        match self.strategy {
            StrategyConfig::Db { threshold: Some(d) } => d,
            _ => 0.1 * self.radio_range,
        }
    }

    pub fn resolved_sb_v_hi(&self) -> f64 {
        match self.strategy {
            StrategyConfig::Sb { v_hi: Some(v), .. } => v,
            _ => self.max_scenario_speed(),
        }
    }

    pub fn max_scenario_speed(&self) -> f64 {
        if self.nodes.is_empty() {
            self.speed_max
        } else {
            self.nodes
                .iter()
                .flat_map(|n| n.waypoints.iter().map(|l| l.2))
                .fold(0.0, f64::max)
        }
    }

    fn min_scenario_speed(&self) -> f64 {
        if self.nodes.is_empty() {
            if self.speed_max == 0.0 {
                0.0
            } else {
                self.speed_min
            }
        } else {
            // scripted nodes eventually stop
            0.0
        }
    }

    /// Entry lifetime for the baseline strategies: three nominal beacon
    /// intervals. APU relies on prediction alone and never times out.
    pub fn neighbor_timeout(&self) -> Option<f64> {
        match self.strategy {
            StrategyConfig::Pb { interval } => Some(3.0 * interval),
            StrategyConfig::Sb { i_max, .. } => Some(3.0 * i_max),
            StrategyConfig::Db { .. } => {
                let v = self.min_scenario_speed();
                (v > 0.0).then(|| 3.0 * self.resolved_db_threshold() / v)
            }
            StrategyConfig::Apu { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SimError::config(field, format!("must be > 0 (got {v})")))
            }
        }
        fn non_negative(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(SimError::config(field, format!("must be >= 0 (got {v})")))
            }
        }

        positive("area_a", self.area_a)?;
        positive("area_b", self.area_b)?;
        if self.node_count == 0 {
            return Err(SimError::config("node_count", "must be > 0"));
        }
        positive("radio_range", self.radio_range)?;
        positive("duration", self.duration)?;
        non_negative("packet_rate", self.packet_rate)?;
        non_negative("traffic_start", self.traffic_start)?;
        positive("tick_interval", self.tick_interval)?;
        positive("metrics_sample_interval", self.metrics_sample_interval)?;
        non_negative("pause_time", self.pause_time)?;
        non_negative("speed_max", self.speed_max)?;
        if self.speed_max > 0.0 {
            positive("speed_min", self.speed_min)?;
            if self.speed_min > self.speed_max {
                return Err(SimError::config(
                    "speed_min",
                    format!(
                        "exceeds speed_max ({} > {})",
                        self.speed_min, self.speed_max
                    ),
                ));
            }
        }

        let n = self.node_count;
        let max_pairs = n.saturating_mul(n - 1);
        if self.flow_count > max_pairs {
            return Err(SimError::config(
                "flow_count",
                format!(
                    "{} flows requested but only {max_pairs} distinct pairs exist",
                    self.flow_count
                ),
            ));
        }

        let p = &self.perturbations;
        non_negative("perturbations.localization_sigma", p.localization_sigma)?;
        if !(0.0..=1.0).contains(&p.loss_probability) {
            return Err(SimError::config(
                "perturbations.loss_probability",
                format!("must lie in [0, 1] (got {})", p.loss_probability),
            ));
        }

        if self.mac.retry_limit == 0 {
            return Err(SimError::config("mac.retry_limit", "must be >= 1"));
        }
        positive("mac.p2p_bandwidth_bps", self.mac.p2p_bandwidth_bps)?;
        positive(
            "mac.broadcast_bandwidth_bps",
            self.mac.broadcast_bandwidth_bps,
        )?;
        non_negative("mac.processing_delay", self.mac.processing_delay)?;

        match self.strategy {
            StrategyConfig::Pb { interval } => positive("strategy.interval", interval)?,
            StrategyConfig::Db { threshold } => {
                if let Some(d) = threshold {
                    positive("strategy.threshold", d)?;
                }
            }
            StrategyConfig::Sb {
                i_max,
                i_min,
                v_lo,
                v_hi,
            } => {
                positive("strategy.i_min", i_min)?;
                positive("strategy.i_max", i_max)?;
                if i_min > i_max {
                    return Err(SimError::config("strategy.i_min", "exceeds i_max"));
                }
                non_negative("strategy.v_lo", v_lo)?;
                if let Some(v) = v_hi {
                    if !(v.is_finite() && v > v_lo) {
                        return Err(SimError::config("strategy.v_hi", "must exceed v_lo"));
                    }
                }
            }
            StrategyConfig::Apu { aer } => {
                if let Some(aer) = aer {
                    positive("strategy.aer", aer)?;
                }
            }
        }

        if !self.nodes.is_empty() {
            if self.nodes.len() != n {
                return Err(SimError::config(
                    "nodes",
                    format!("{} entries given for node_count = {n}", self.nodes.len()),
                ));
            }
            for (i, spec) in self.nodes.iter().enumerate() {
                if !self.area_contains(spec.position.into()) {
                    return Err(SimError::config(
                        format!("nodes[{i}].position"),
                        "lies outside the area",
                    ));
                }
                for (j, leg) in spec.waypoints.iter().enumerate() {
                    if !self.area_contains(Vec2::new(leg.0, leg.1)) {
                        return Err(SimError::config(
                            format!("nodes[{i}].waypoints[{j}]"),
                            "lies outside the area",
                        ));
                    }
                    positive(&format!("nodes[{i}].waypoints[{j}].speed"), leg.2)?;
                }
            }
        }

        if !self.flows.is_empty() {
            if self.flows.len() != self.flow_count {
                return Err(SimError::config(
                    "flows",
                    format!(
                        "{} entries given for flow_count = {}",
                        self.flows.len(),
                        self.flow_count
                    ),
                ));
            }
            for (i, f) in self.flows.iter().enumerate() {
                if f.src >= n || f.dst >= n || f.src == f.dst {
                    return Err(SimError::config(
                        format!("flows[{i}]"),
                        "needs two distinct existing nodes",
                    ));
                }
                if let Some(s) = f.start {
                    non_negative(&format!("flows[{i}].start"), s)?;
                }
            }
        }
        Ok(())
    }
}
