//! Analytical beacon-overhead model and its Monte Carlo cross-check.
//!
//! ODL overhead is modeled as `forwarding operations × beacons per
//! forwarding operation`, where the forwarding count is
//! `packet rate × flows × duration × mean hops` and the mean hop count comes
//! from the mean source–destination distance and the expected per-hop
//! progress of greedy forwarding in a Poisson field of density ρ. The
//! per-forwarding beacon rate γ has no closed form here; it is measured
//! from simulation runs.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::engine::config::ScenarioConfig;
use crate::engine::rng::SimRng;
use crate::error::{Result, SimError};
use crate::report::MetricsReport;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticalScenario {
    pub area_a: f64,
    pub area_b: f64,
    pub nodes: usize,
    pub range: f64,
    pub packet_rate: f64,
    pub flows: usize,
    pub duration: f64,
    /// Beacons per forwarding operation, measured or supplied.
    pub gamma: Option<f64>,
}

impl AnalyticalScenario {
    pub fn from_config(cfg: &ScenarioConfig, gamma: Option<f64>) -> Self {
        AnalyticalScenario {
            area_a: cfg.area_a,
            area_b: cfg.area_b,
            nodes: cfg.node_count,
            range: cfg.radio_range,
            packet_rate: cfg.packet_rate,
            flows: cfg.flow_count,
            duration: cfg.duration,
            gamma,
        }
    }

    /// Node density ρ = N / (A·B).
    pub fn density(&self) -> f64 {
        self.nodes as f64 / (self.area_a * self.area_b)
    }

    /// Expected neighbor count ρπR², ignoring border effects.
    pub fn mean_degree(&self) -> f64 {
        self.density() * std::f64::consts::PI * self.range * self.range
    }

    pub fn predict(&self) -> Result<Prediction> {
        let d = avg_distance(self.area_a, self.area_b)?;
        let h = avg_hops(d, self.range, self.density())?;
        let chi = forwarding_ops(self.packet_rate, self.flows as f64, self.duration, h);
        Ok(Prediction {
            mean_distance: d,
            mean_hops: h,
            forwarding_ops: chi,
            gamma: self.gamma,
            odl_overhead: self.gamma.map(|g| odl_overhead(chi, g)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean_distance: f64,
    pub mean_hops: f64,
    pub forwarding_ops: f64,
    pub gamma: Option<f64>,
    pub odl_overhead: Option<f64>,
}

/// Mean Euclidean distance between two independent uniform points in an
/// `a × b` rectangle.
///
/// The expression printed in the source material is damaged (mismatched
/// powers, `arccos` of arguments above 1); this is the standard closed
/// form it refers to, with `arcosh(d/b) = ln((a + d)/b)`:
///
/// ```text
/// D = (1/15)·[a³/b² + b³/a² + d·(3 − a²/b² − b²/a²)]
///   + (1/6)·[(b²/a)·arcosh(d/b) + (a²/b)·arcosh(d/a)],   d = √(a² + b²)
/// ```
pub fn avg_distance(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(SimError::ModelDomain(format!(
            "rectangle sides must be positive (got {a} x {b})"
        )));
    }
    let d = a.hypot(b);
    let (a2, b2) = (a * a, b * b);
    let first = (a2 * a / b2 + b2 * b / a2 + d * (3.0 - a2 / b2 - b2 / a2)) / 15.0;
    let second = ((b2 / a) * (d / b).acosh() + (a2 / b) * (d / a).acosh()) / 6.0;
    Ok(first + second)
}

/// Area of the circular segment beyond distance `t·R` from the center of a
/// disk of radius `R`, divided by `R²`.
fn segment_area_fraction(t: f64) -> f64 {
    t.acos() - t * (1.0 - t * t).max(0.0).sqrt()
}

/// Expected greedy progress per hop as a fraction of `range`:
/// `1 − ∫₀¹ exp(−ρR²·(arccos t − t√(1−t²))) dt`.
///
/// The integrand is the probability that no node lies in the segment
/// beyond `t·R`, i.e. that the best forward progress is at most `t·R`.
pub fn progress_fraction(range: f64, density: f64) -> f64 {
    let k = density * range * range;
    let integral = integrate(|t| (-k * segment_area_fraction(t)).exp(), 0.0, 1.0, 1e-9);
    1.0 - integral
}

/// Mean hop count for source–destination distance `d`.
pub fn avg_hops(d: f64, range: f64, density: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(SimError::ModelDomain(format!(
            "distance must be >= 0 (got {d})"
        )));
    }
    if range.is_nan() || range <= 0.0 {
        return Err(SimError::ModelDomain(format!(
            "range must be > 0 (got {range})"
        )));
    }
    if density.is_nan() || density <= 0.0 {
        return Err(SimError::ModelDomain(format!(
            "density must be > 0 (got {density})"
        )));
    }
    let progress = progress_fraction(range, density);
    if !(progress > 0.0 && progress <= 1.0) {
        return Err(SimError::ModelDomain(format!(
            "per-hop progress fraction {progress} outside (0, 1]"
        )));
    }
    Ok(d / (range * progress))
}

/// χ = λ·M·Γ·H.
pub fn forwarding_ops(packet_rate: f64, flows: f64, duration: f64, hops: f64) -> f64 {
    packet_rate * flows * duration * hops
}

/// O_ODL = χ·γ.
pub fn odl_overhead(forwarding_ops: f64, gamma: f64) -> f64 {
    forwarding_ops * gamma
}

/// O_APU = O_MP + O_ODL.
pub fn total_overhead(mp: f64, odl: f64) -> f64 {
    mp + odl
}

/// Measured γ: ODL beacons per forwarding operation in an APU run.
pub fn estimate_gamma(run: &MetricsReport) -> Result<f64> {
    if run.forwarding_ops == 0 {
        return Err(SimError::NoForwarding(
            "run performed no forwarding operations".into(),
        ));
    }
    Ok(run.beacons.odl as f64 / run.forwarding_ops as f64)
}

/// Overhead quantities observed in a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedOverhead {
    pub mean_hops: Option<f64>,
    pub forwarding_ops: u64,
    pub gamma: Option<f64>,
    pub mp: u64,
    pub odl: u64,
    pub initial: u64,
}

impl SimulatedOverhead {
    pub fn from_report(r: &MetricsReport) -> Self {
        SimulatedOverhead {
            mean_hops: r.mean_hops(),
            forwarding_ops: r.forwarding_ops,
            gamma: estimate_gamma(r).ok(),
            mp: r.beacons.mp,
            odl: r.beacons.odl,
            initial: r.beacons.initial,
        }
    }

    pub fn apu(&self) -> u64 {
        self.mp + self.odl
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

const SHARD: u64 = 1 << 18;

/// Mean distance between uniform point pairs in an `a × b` rectangle by
/// sampling. Work is split into fixed-size shards with their own seeds, so
/// the result depends only on `(a, b, samples, seed)`.
pub fn monte_carlo_distance(a: f64, b: f64, samples: u64, seed: u64) -> Estimate {
    let samples = samples.max(1);
    let shards = samples.div_ceil(SHARD);
    let partial: Vec<(f64, f64, u64)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = SHARD.min(samples - s * SHARD);
            let mut rng = SimRng::seed_from_u64(crate::engine::rng::derive_seed(
                seed,
                crate::engine::rng::Stream::Traffic,
                s,
            ));
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                let dx = a * (rng.random::<f64>() - rng.random::<f64>());
                let dy = b * (rng.random::<f64>() - rng.random::<f64>());
                let d = dx.hypot(dy);
                sum += d;
                sum_sq += d * d;
            }
            (sum, sum_sq, count)
        })
        .collect();
    let (sum, sum_sq, n) = partial.iter().fold((0.0, 0.0, 0u64), |acc, p| {
        (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2)
    });
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    Estimate {
        mean,
        std_err: (var / nf).sqrt(),
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}
