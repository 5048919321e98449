//! Per-run metrics and their CSV serialization.
//!
//! Every file starts with `#` comment lines echoing the full scenario, so a
//! run directory is self-describing. Floats are written with 9 significant
//! digits to keep reruns byte-identical.

use std::fs;
use std::path::Path;

use crate::beaconing::{BeaconCause, BeaconCounts};
use crate::engine::config::{ScenarioConfig, StrategyKind};
use crate::error::{Result, SimError};
use crate::neighbor::TopologyAccuracySample;
use crate::radio::{EnergyLedger, OpClass};
use crate::NodeId;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowStats {
    pub src: NodeId,
    pub dst: NodeId,
    pub start: f64,
    pub generated: u64,
    pub delivered: u64,
    pub dropped_void: u64,
    pub dropped_retries: u64,
    pub in_flight: u64,
    pub total_delay: f64,
    pub total_hops: u64,
}

impl FlowStats {
    pub fn pdr(&self) -> Option<f64> {
        ratio(self.delivered, self.generated)
    }

    pub fn mean_delay(&self) -> Option<f64> {
        (self.delivered > 0).then(|| self.total_delay / self.delivered as f64)
    }

    pub fn mean_hops(&self) -> Option<f64> {
        ratio(self.total_hops, self.delivered)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub config: ScenarioConfig,
    pub strategy: StrategyKind,
    pub beacons: BeaconCounts,
    pub beacons_per_node: Vec<BeaconCounts>,
    pub accuracy: Vec<TopologyAccuracySample>,
    pub flows: Vec<FlowStats>,
    pub energy: EnergyLedger,
    /// Next-hop selections that led to a transmission (χ in the overhead model).
    pub forwarding_ops: u64,
    pub unicast_attempts: u64,
    pub retry_failures: u64,
    pub events_processed: u64,
    pub mobility_digest: String,
    pub traffic_digest: String,
    pub event_digest: String,
}

impl MetricsReport {
    pub fn generated(&self) -> u64 {
        self.flows.iter().map(|f| f.generated).sum()
    }

    pub fn delivered(&self) -> u64 {
        self.flows.iter().map(|f| f.delivered).sum()
    }

    pub fn dropped_void(&self) -> u64 {
        self.flows.iter().map(|f| f.dropped_void).sum()
    }

    pub fn dropped_retries(&self) -> u64 {
        self.flows.iter().map(|f| f.dropped_retries).sum()
    }

    pub fn in_flight(&self) -> u64 {
        self.flows.iter().map(|f| f.in_flight).sum()
    }

    /// `None` when nothing was generated.
    pub fn pdr(&self) -> Option<f64> {
        ratio(self.delivered(), self.generated())
    }

    /// Mean end-to-end delay over delivered packets.
    pub fn mean_delay(&self) -> Option<f64> {
        let delivered = self.delivered();
        (delivered > 0)
            .then(|| self.flows.iter().map(|f| f.total_delay).sum::<f64>() / delivered as f64)
    }

    pub fn mean_hops(&self) -> Option<f64> {
        ratio(
            self.flows.iter().map(|f| f.total_hops).sum(),
            self.delivered(),
        )
    }

    /// ODL beacons per forwarding operation.
    pub fn gamma(&self) -> Option<f64> {
        ratio(self.beacons.odl, self.forwarding_ops)
    }

    /// Network energy in μW·s, computed from operation and byte counts.
    pub fn total_energy(&self) -> f64 {
        OpClass::ALL
            .iter()
            .map(|&c| {
                let (per_byte, fixed) = c.coefficients();
                let (mut ops, mut bytes) = (0u64, 0u64);
                for n in 0..self.energy.node_count() {
                    let acc = self.energy.get(n, c);
                    ops += acc.operations;
                    bytes += acc.bytes;
                }
                per_byte * bytes as f64 + fixed * ops as f64
            })
            .sum()
    }

    pub fn mean_unknown_ratio(&self) -> Option<f64> {
        mean(self.accuracy.iter().map(|s| s.unknown_ratio))
    }

    pub fn mean_false_ratio(&self) -> Option<f64> {
        mean(self.accuracy.iter().map(|s| s.false_ratio))
    }

    /// Unknown entries over true neighbors, pooled across all samples.
    pub fn pooled_unknown_fraction(&self) -> Option<f64> {
        let truth: usize = self.accuracy.iter().map(|s| s.true_neighbor_count).sum();
        let unknown: usize = self.accuracy.iter().map(|s| s.unknown_count).sum();
        ratio(unknown as u64, truth as u64)
    }

    pub fn pooled_false_fraction(&self) -> Option<f64> {
        let truth: usize = self.accuracy.iter().map(|s| s.true_neighbor_count).sum();
        let stale: usize = self.accuracy.iter().map(|s| s.false_count).sum();
        ratio(stale as u64, truth as u64)
    }

    /// Named scalar metrics, in the column order used by sweeps.
    pub fn scalars(&self) -> Vec<(&'static str, Option<f64>)> {
        let b = &self.beacons;
        vec![
            ("beacons_total", Some(b.total() as f64)),
            ("beacons_initial", Some(b.initial as f64)),
            ("beacons_periodic", Some(b.periodic as f64)),
            ("beacons_distance", Some(b.distance as f64)),
            ("beacons_speed", Some(b.speed as f64)),
            ("beacons_mp", Some(b.mp as f64)),
            ("beacons_odl", Some(b.odl as f64)),
            ("pdr", self.pdr()),
            ("mean_delay_s", self.mean_delay()),
            ("mean_hops", self.mean_hops()),
            ("forwarding_ops", Some(self.forwarding_ops as f64)),
            ("gamma", self.gamma()),
            ("energy_total_uws", Some(self.total_energy())),
            ("mean_unknown_ratio", self.mean_unknown_ratio()),
            ("mean_false_ratio", self.mean_false_ratio()),
        ]
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

/// Fixed 9-significant-digit rendering, shortest form.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("valid float literal");
    format!("{rounded}")
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "NA".to_owned())
}

pub(crate) fn config_header(cfg: &ScenarioConfig) -> String {
    let mut out = String::from("# beaconsim run\n");
    for line in cfg.to_toml().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub const METRICS_COLUMNS: &[&str] = &[
    "strategy",
    "seed",
    "nodes",
    "duration_s",
    "beacons_total",
    "beacons_initial",
    "beacons_periodic",
    "beacons_distance",
    "beacons_speed",
    "beacons_mp",
    "beacons_odl",
    "generated",
    "delivered",
    "dropped_void",
    "dropped_retries",
    "in_flight",
    "pdr",
    "mean_delay_s",
    "mean_hops",
    "forwarding_ops",
    "unicast_attempts",
    "retry_failures",
    "gamma",
    "energy_total_uws",
    "mean_unknown_ratio",
    "mean_false_ratio",
    "pooled_unknown_fraction",
    "pooled_false_fraction",
    "mobility_digest",
    "traffic_digest",
];

/// One metrics.csv data row, columns per [`METRICS_COLUMNS`].
pub fn metrics_row(r: &MetricsReport) -> Vec<String> {
    let b = &r.beacons;
    let pdr = if r.flows.is_empty() {
        "no flows".to_owned()
    } else {
        fmt_opt(r.pdr())
    };
    vec![
        r.strategy.name().to_owned(),
        r.config.seed.to_string(),
        r.config.node_count.to_string(),
        fmt_f64(r.config.duration),
        b.total().to_string(),
        b.initial.to_string(),
        b.periodic.to_string(),
        b.distance.to_string(),
        b.speed.to_string(),
        b.mp.to_string(),
        b.odl.to_string(),
        r.generated().to_string(),
        r.delivered().to_string(),
        r.dropped_void().to_string(),
        r.dropped_retries().to_string(),
        r.in_flight().to_string(),
        pdr,
        fmt_opt(r.mean_delay()),
        fmt_opt(r.mean_hops()),
        r.forwarding_ops.to_string(),
        r.unicast_attempts.to_string(),
        r.retry_failures.to_string(),
        fmt_opt(r.gamma()),
        fmt_f64(r.total_energy()),
        fmt_opt(r.mean_unknown_ratio()),
        fmt_opt(r.mean_false_ratio()),
        fmt_opt(r.pooled_unknown_fraction()),
        fmt_opt(r.pooled_false_fraction()),
        r.mobility_digest.clone(),
        r.traffic_digest.clone(),
    ]
}

pub(crate) fn push_row<S: AsRef<str>>(out: &mut String, cells: &[S]) {
    let line: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
    out.push_str(&line.join(","));
    out.push('\n');
}

pub fn metrics_csv(r: &MetricsReport) -> String {
    let mut out = config_header(&r.config);
    push_row(&mut out, METRICS_COLUMNS);
    push_row(&mut out, &metrics_row(r));
    out
}

pub fn accuracy_csv(r: &MetricsReport) -> String {
    let mut out = config_header(&r.config);
    push_row(
        &mut out,
        &[
            "time_s",
            "mean_unknown_ratio",
            "mean_false_ratio",
            "true_neighbors",
            "unknown_neighbors",
            "false_neighbors",
        ],
    );
    for s in &r.accuracy {
        push_row(
            &mut out,
            &[
                fmt_f64(s.time),
                fmt_f64(s.unknown_ratio),
                fmt_f64(s.false_ratio),
                s.true_neighbor_count.to_string(),
                s.unknown_count.to_string(),
                s.false_count.to_string(),
            ],
        );
    }
    out
}

pub fn energy_csv(r: &MetricsReport) -> String {
    let mut out = config_header(&r.config);
    push_row(
        &mut out,
        &["node", "op_class", "operations", "bytes", "energy_uws"],
    );
    for n in 0..r.energy.node_count() {
        for c in OpClass::ALL {
            let acc = r.energy.get(n, c);
            push_row(
                &mut out,
                &[
                    n.to_string(),
                    c.as_str().to_owned(),
                    acc.operations.to_string(),
                    acc.bytes.to_string(),
                    fmt_f64(acc.recomputed(c)),
                ],
            );
        }
    }
    out
}

pub fn flows_csv(r: &MetricsReport) -> String {
    let mut out = config_header(&r.config);
    push_row(
        &mut out,
        &[
            "flow",
            "src",
            "dst",
            "start_s",
            "generated",
            "delivered",
            "dropped_void",
            "dropped_retries",
            "in_flight",
            "pdr",
            "total_delay_s",
            "mean_delay_s",
            "total_hops",
            "mean_hops",
        ],
    );
    for (i, f) in r.flows.iter().enumerate() {
        push_row(
            &mut out,
            &[
                i.to_string(),
                f.src.to_string(),
                f.dst.to_string(),
                fmt_f64(f.start),
                f.generated.to_string(),
                f.delivered.to_string(),
                f.dropped_void.to_string(),
                f.dropped_retries.to_string(),
                f.in_flight.to_string(),
                fmt_opt(f.pdr()),
                fmt_f64(f.total_delay),
                fmt_opt(f.mean_delay()),
                f.total_hops.to_string(),
                fmt_opt(f.mean_hops()),
            ],
        );
    }
    out
}

pub fn beacons_csv(r: &MetricsReport) -> String {
    let mut out = config_header(&r.config);
    let mut header = vec!["node".to_owned()];
    header.extend(BeaconCause::ALL.iter().map(|c| c.as_str().to_owned()));
    header.push("total".to_owned());
    push_row(&mut out, &header);
    for (n, counts) in r.beacons_per_node.iter().enumerate() {
        let mut row = vec![n.to_string()];
        row.extend(BeaconCause::ALL.iter().map(|&c| counts.get(c).to_string()));
        row.push(counts.total().to_string());
        push_row(&mut out, &row);
    }
    out
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

/// Write metrics.csv, accuracy.csv, energy.csv, flows.csv and beacons.csv
/// into `out_dir`, creating it if needed.
pub fn emit_report(report: &MetricsReport, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| SimError::io(out_dir, e))?;
    write_file(&out_dir.join("metrics.csv"), &metrics_csv(report))?;
    write_file(&out_dir.join("accuracy.csv"), &accuracy_csv(report))?;
    write_file(&out_dir.join("energy.csv"), &energy_csv(report))?;
    write_file(&out_dir.join("flows.csv"), &flows_csv(report))?;
    write_file(&out_dir.join("beacons.csv"), &beacons_csv(report))?;
    Ok(())
}

/// Parse the data row of a metrics.csv back into `column -> value`.
pub fn read_metrics_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let mut rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty());
    let bad = || {
        SimError::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "expected header and one data row",
            ),
        )
    };
    let header = rows.next().ok_or_else(bad)?;
    let data = rows.next().ok_or_else(bad)?;
    Ok(header
        .split(',')
        .zip(data.split(','))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect())
}
