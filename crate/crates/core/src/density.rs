//! Composite weight field built from the attacking players.
//!
//! Each attacker and the goal contribute an unnormalized Gaussian bump.
//! The bumps then pass through a fixed chain of gains: distance to goal,
//! house-area boost, puck-holder priority, the low-gain strip and finally
//! the right-half mask.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{in_house_area, in_low_gain_zone, FieldSpec, Grid, Point2};

pub type PlayerId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffensivePlayer {
    pub id: PlayerId,
    pub position: Point2,
    #[serde(default)]
    pub velocity: Point2,
}

/// Snapshot of the attacking team at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffensiveFrame {
    pub t: f64,
    pub players: Vec<OffensivePlayer>,
    pub puck_holder: PlayerId,
}

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("puck holder {0} is not among the players")]
    MissingPuckHolder(PlayerId),
    #[error("duplicate player id {0}")]
    DuplicatePlayer(PlayerId),
    #[error("player {id} at {position} is outside the rink")]
    OutOfBounds { id: PlayerId, position: Point2 },
    #[error("non-finite state for player {0}")]
    NonFinite(PlayerId),
}

impl OffensiveFrame {
    pub fn validate(&self, spec: &FieldSpec) -> Result<(), DensityError> {
        for (k, p) in self.players.iter().enumerate() {
            if self.players[..k].iter().any(|o| o.id == p.id) {
                return Err(DensityError::DuplicatePlayer(p.id));
            }
            if !p.position.is_finite() || !p.velocity.is_finite() {
                return Err(DensityError::NonFinite(p.id));
            }
            if !spec.contains(p.position) {
                return Err(DensityError::OutOfBounds {
                    id: p.id,
                    position: p.position,
                });
            }
        }
        self.holder().map(|_| ())
    }

    pub fn holder(&self) -> Result<&OffensivePlayer, DensityError> {
        self.player(self.puck_holder)
            .ok_or(DensityError::MissingPuckHolder(self.puck_holder))
    }

    pub fn player(&self, id: PlayerId) -> Option<&OffensivePlayer> {
        self.players.iter().find(|p| p.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    /// Isotropic variance of every bump, m².
    pub sigma: f64,
    /// House-area gain `p`.
    pub p_gain: f64,
    /// Extra factor on the goal bump inside the house.
    pub goal_house_factor: f64,
    /// Distance at which the distance gain reaches zero, m.
    pub distance_norm: f64,
    /// Factor for non-holders inside the low-gain strip.
    pub low_gain: f64,
    /// Factor for non-holders on the holder's half when the holder is deep.
    pub holder_near_gain: f64,
    /// Factor for non-holders on the opposite half.
    pub holder_far_gain: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        Self {
            sigma: 15.0,
            p_gain: 2.0,
            goal_house_factor: 1.5,
            distance_norm: 25.0,
            low_gain: 0.1,
            holder_near_gain: 0.1,
            holder_far_gain: 0.05,
        }
    }
}

/// Holder priority kicks in when the puck holder is at or left of this x.
pub const HOLDER_PRIORITY_X: f64 = 10.0;
/// Horizontal line splitting the rink into upper and lower halves.
pub const MID_Y: f64 = 15.0;

/// Bump center for one attacker: shifted 1 m toward the goal and by its
/// velocity. An attacker standing on the goal gets no goal shift.
pub fn weight_center(position: Point2, velocity: Point2, goal: Point2) -> Point2 {
    let to_goal = goal - position;
    let dist = to_goal.norm();
    let shift = if dist < 1e-9 {
        Point2::ZERO
    } else {
        to_goal * (1.0 / dist)
    };
    position + shift + velocity
}

/// Peak-one isotropic Gaussian.
pub fn gaussian_bump(q: Point2, center: Point2, sigma: f64) -> f64 {
    (-(q.distance_sq(center)) / (2.0 * sigma)).exp()
}

/// Linear falloff with distance to the goal, floored at zero.
pub fn distance_gain(q: Point2, goal: Point2, norm: f64) -> f64 {
    ((norm - goal.distance(q)) / norm).max(0.0)
}

/// Per-frame quantities that do not depend on the evaluation point.
#[derive(Debug, Clone)]
pub struct DensityModel {
    spec: FieldSpec,
    params: DensityParams,
    /// (bump center, is puck holder)
    sources: Vec<(Point2, bool)>,
    holder_position: Point2,
}

impl DensityModel {
    pub fn new(
        frame: &OffensiveFrame,
        params: DensityParams,
        spec: FieldSpec,
    ) -> Result<Self, DensityError> {
        let holder_position = frame.holder()?.position;
        let sources = frame
            .players
            .iter()
            .map(|p| {
                (
                    weight_center(p.position, p.velocity, spec.goal),
                    p.id == frame.puck_holder,
                )
            })
            .collect();
        Ok(Self {
            spec,
            params,
            sources,
            holder_position,
        })
    }

    /// φ(q).
    pub fn value_at(&self, q: Point2) -> f64 {
        let prm = &self.params;
        let goal = self.spec.goal;
        if q.x > self.spec.active_x_max {
            return 0.0;
        }
        let in_house = in_house_area(q);
        let dist_gain = distance_gain(q, goal, prm.distance_norm);

        // Holder-priority factors: (non-holder factor, goal kept?)
        let hp = self.holder_position;
        let (other_factor, goal_kept) = if hp.x <= HOLDER_PRIORITY_X {
            if hp.y <= MID_Y {
                let f = if q.y < MID_Y {
                    prm.holder_near_gain
                } else {
                    prm.holder_far_gain
                };
                (f, q.y < MID_Y && q.x < HOLDER_PRIORITY_X)
            } else {
                let f = if q.y >= MID_Y {
                    prm.holder_near_gain
                } else {
                    prm.holder_far_gain
                };
                (f, q.y > MID_Y && q.x < HOLDER_PRIORITY_X)
            }
        } else {
            (1.0, true)
        };
        let low = if in_low_gain_zone(q) {
            prm.low_gain
        } else {
            1.0
        };

        let mut total = 0.0;
        for &(center, is_holder) in &self.sources {
            let mut w = gaussian_bump(q, center, prm.sigma) * dist_gain;
            if in_house {
                w *= prm.p_gain;
            }
            if !is_holder {
                w *= other_factor * low;
            }
            total += w;
        }

        if in_house && goal_kept {
            total += gaussian_bump(q, goal, prm.sigma) * prm.p_gain * prm.goal_house_factor;
        }
        total
    }
}

/// φ sampled at every grid cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

pub fn build_weight_field(
    frame: &OffensiveFrame,
    params: &DensityParams,
    grid: &Grid,
) -> Result<WeightField, DensityError> {
    let model = DensityModel::new(frame, *params, grid.spec)?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| model.value_at(grid.center(k)))
        .collect();
    Ok(WeightField {
        grid: grid.clone(),
        values,
    })
}

impl WeightField {
    pub fn from_fn(grid: &Grid, f: impl Fn(Point2) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.centers().map(f).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Dense `x,y,value` CSV in grid enumeration order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let q = self.grid.center(k);
            writeln!(out, "{:.6},{:.6},{:.9}", q.x, q.y, v)?;
        }
        Ok(())
    }
}
