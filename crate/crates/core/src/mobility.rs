//! Node motion and linear-kinematics position prediction.
//!
//! Motion is piecewise linear. A node's state is anchored at the time of its
//! last transition (arrival, departure or explicit advance), and the position
//! at any later instant is `anchor + velocity * elapsed` until the next
//! transition. Transition times are exact, so the engine schedules them as
//! events instead of polling.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::config::{Leg, ScenarioConfig};
use crate::engine::rng::SimRng;
use crate::error::{Result, SimError};
use crate::geom::Vec2;

/// Position and velocity as announced at `timestamp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicSnapshot {
    pub position: Vec2,
    pub velocity: Vec2,
    pub timestamp: f64,
}

/// Dead-reckoning estimate of where the snapshot's owner is at `now`.
pub fn predict_position(snapshot: &KinematicSnapshot, now: f64) -> Result<Vec2> {
    if now < snapshot.timestamp {
        return Err(SimError::TimeReversal {
            now,
            timestamp: snapshot.timestamp,
        });
    }
    Ok(snapshot.position + snapshot.velocity * (now - snapshot.timestamp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeKinematics {
    /// Position at time `at`.
    pub position: Vec2,
    pub velocity: Vec2,
    pub waypoint: Vec2,
    pub speed: f64,
    /// Set while paused; `f64::INFINITY` for nodes that never move again.
    pub pause_until: Option<f64>,
    pub at: f64,
}

impl NodeKinematics {
    pub fn stationary(position: Vec2) -> Self {
        NodeKinematics {
            position,
            velocity: Vec2::ZERO,
            waypoint: position,
            speed: 0.0,
            pause_until: Some(f64::INFINITY),
            at: 0.0,
        }
    }

    pub fn is_moving(&self) -> bool {
        self.pause_until.is_none()
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        self.position + self.velocity * (t - self.at)
    }

    /// Time of the next arrival or departure, if one will ever happen.
    pub fn next_transition(&self) -> Option<f64> {
        match self.pause_until {
            Some(t) if t.is_finite() => Some(t),
            Some(_) => None,
            None => Some(self.at + self.position.distance(self.waypoint) / self.speed),
        }
    }

    fn arrive(&mut self, t: f64) {
        self.position = self.waypoint;
        self.velocity = Vec2::ZERO;
        self.at = t;
        self.pause_until = Some(f64::INFINITY);
    }

    fn depart(&mut self, t: f64, waypoint: Vec2, speed: f64) {
        self.position = self.position_at(t);
        self.at = t;
        self.waypoint = waypoint;
        self.speed = speed;
        self.pause_until = None;
        let offset = waypoint - self.position;
        let len = offset.norm();
        self.velocity = if len > 0.0 {
            offset * (speed / len)
        } else {
            Vec2::ZERO
        };
    }

    fn rebase(&mut self, t: f64) {
        self.position = self.position_at(t);
        self.at = t;
    }
}

/// Random waypoint: uniform destinations, uniform speed in
/// `[speed_min, speed_max]`, fixed pause on arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWaypoint {
    pub area_a: f64,
    pub area_b: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub pause_time: f64,
}

impl RandomWaypoint {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        RandomWaypoint {
            area_a: cfg.area_a,
            area_b: cfg.area_b,
            speed_min: cfg.speed_min,
            speed_max: cfg.speed_max,
            pause_time: cfg.pause_time,
        }
    }

    pub fn random_point(&self, rng: &mut SimRng) -> Vec2 {
        Vec2::new(
            rng.random_range(0.0..=self.area_a),
            rng.random_range(0.0..=self.area_b),
        )
    }

    fn random_speed(&self, rng: &mut SimRng) -> f64 {
        if self.speed_min == self.speed_max {
            self.speed_min
        } else {
            rng.random_range(self.speed_min..=self.speed_max)
        }
    }

    /// A node at a uniform position, already heading for its first waypoint.
    pub fn spawn(&self, rng: &mut SimRng) -> NodeKinematics {
        let mut node = NodeKinematics::stationary(self.random_point(rng));
        let (wp, v) = (self.random_point(rng), self.random_speed(rng));
        node.depart(0.0, wp, v);
        node
    }

    /// Move `node` forward by `dt` seconds, drawing new legs as waypoints
    /// are reached.
    pub fn advance(&self, node: &NodeKinematics, dt: f64, rng: &mut SimRng) -> NodeKinematics {
        let mut next = node.clone();
        let mut plan = Plan::Random(*self);
        plan.advance(&mut next, node.at + dt.max(0.0), rng);
        next
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Plan {
    Static,
    Random(RandomWaypoint),
    Scripted(VecDeque<Leg>),
}

impl Plan {
    /// Apply the transition due at `t` (arrival or end of pause).
    pub(crate) fn transition(&mut self, node: &mut NodeKinematics, t: f64, rng: &mut SimRng) {
        if node.is_moving() {
            node.arrive(t);
            match self {
                Plan::Random(rwp) if rwp.pause_time > 0.0 => {
                    node.pause_until = Some(t + rwp.pause_time);
                    return;
                }
                _ => {}
            }
        }
        self.depart(node, t, rng);
    }

    fn depart(&mut self, node: &mut NodeKinematics, t: f64, rng: &mut SimRng) {
        match self {
            Plan::Static => {}
            Plan::Random(rwp) => {
                let (wp, v) = (rwp.random_point(rng), rwp.random_speed(rng));
                node.depart(t, wp, v);
            }
            Plan::Scripted(legs) => {
                if let Some(Leg(x, y, v)) = legs.pop_front() {
                    node.depart(t, Vec2::new(x, y), v);
                }
            }
        }
    }

    pub(crate) fn advance(&mut self, node: &mut NodeKinematics, target: f64, rng: &mut SimRng) {
        while let Some(t) = node.next_transition() {
            if t > target {
                break;
            }
            self.transition(node, t, rng);
        }
        node.rebase(target);
    }
}

/// One node's motion: current kinematics, plan for future legs, and its own
/// random stream.
#[derive(Debug, Clone)]
pub struct MobileNode {
    kin: NodeKinematics,
    plan: Plan,
    rng: SimRng,
    area: Vec2,
}

impl MobileNode {
    pub fn random(rwp: RandomWaypoint, mut rng: SimRng) -> Self {
        let kin = rwp.spawn(&mut rng);
        MobileNode {
            kin,
            plan: Plan::Random(rwp),
            rng,
            area: Vec2::new(rwp.area_a, rwp.area_b),
        }
    }

    pub fn fixed(position: Vec2, area: Vec2, rng: SimRng) -> Self {
        MobileNode {
            kin: NodeKinematics::stationary(position),
            plan: Plan::Static,
            rng,
            area,
        }
    }

    pub fn scripted(position: Vec2, legs: &[Leg], area: Vec2, mut rng: SimRng) -> Self {
        let mut kin = NodeKinematics::stationary(position);
        let mut plan = Plan::Scripted(legs.iter().copied().collect());
        plan.depart(&mut kin, 0.0, &mut rng);
        MobileNode {
            kin,
            plan,
            rng,
            area,
        }
    }

    pub fn kinematics(&self) -> &NodeKinematics {
        &self.kin
    }

    pub fn next_transition(&self) -> Option<f64> {
        self.kin.next_transition()
    }

    pub fn transition(&mut self, t: f64) {
        self.plan.transition(&mut self.kin, t, &mut self.rng);
    }

    /// Ground-truth position, clamped against rounding at the area edge.
    pub fn position_at(&self, t: f64) -> Vec2 {
        let p = self.kin.position_at(t);
        Vec2::new(p.x.clamp(0.0, self.area.x), p.y.clamp(0.0, self.area.y))
    }

    pub fn velocity(&self) -> Vec2 {
        self.kin.velocity
    }

    pub fn speed(&self) -> f64 {
        if self.kin.is_moving() {
            self.kin.speed
        } else {
            0.0
        }
    }
}
