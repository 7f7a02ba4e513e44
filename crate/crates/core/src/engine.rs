//! The per-step formation loop.
//!
//! Each step rebuilds the weight field from the current attacker frame,
//! computes the Voronoi partition and centroid-seeking inputs, selects
//! pass-cut pairs, filters the paired defenders through the ellipsoidal
//! barrier, clamps speeds and integrates one Euler step.

use rayon::ThreadPoolBuilder;
use thiserror::Error;

use crate::cbf::{ellipse_from_players, qp_filter, CbfParams, EllipseCbf};
use crate::coverage::{
    assign_voronoi, cell_moments, coverage_cost_for_partition, nominal_input, ControlInput,
    CoverageError, DefenderState, VoronoiPartition,
};
use crate::density::{
    build_weight_field, DensityError, DensityParams, OffensiveFrame, OffensivePlayer, PlayerId,
    WeightField,
};
use crate::field::{in_house_area, make_grid, FieldError, FieldSpec, Grid, Point2};
use crate::scene::{Scene, SceneError};

pub const DEFENDERS: usize = 5;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("cannot start worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Coverage gain.
    pub k: f64,
    /// Integration step, s.
    pub dt: f64,
    pub grid_resolution: f64,
    pub density: DensityParams,
    pub cbf: CbfParams,
    pub field: FieldSpec,
    pub initial_defenders: [Point2; DEFENDERS],
    /// Apply the pass-cut barrier to paired defenders.
    pub pass_cut: bool,
    /// Attacker speeds derived from the scene are capped here, m/s.
    pub offense_speed_cap: f64,
    /// Worker threads for per-cell work; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            dt: 0.1,
            grid_resolution: 0.25,
            density: DensityParams::default(),
            cbf: CbfParams::default(),
            field: FieldSpec::default(),
            initial_defenders: [7.0, 11.0, 15.0, 19.0, 23.0].map(|y| Point2::new(10.0, y)),
            pass_cut: true,
            offense_speed_cap: 15.0,
            threads: None,
        }
    }
}

impl SimParams {
    pub fn with_p_gain(mut self, p: f64) -> Self {
        self.density.p_gain = p;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Params(m.to_owned()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad("k must be positive");
        }
        let d = &self.density;
        if !(d.sigma > 0.0 && d.p_gain > 0.0 && d.distance_norm > 0.0) {
            return bad("sigma, p_gain and distance_norm must be positive");
        }
        if [
            d.goal_house_factor,
            d.low_gain,
            d.holder_near_gain,
            d.holder_far_gain,
        ]
        .iter()
        .any(|g| !(*g >= 0.0))
        {
            return bad("gain factors must be non-negative");
        }
        if !(self.cbf.d > 0.0) {
            return bad("ellipse minor axis must be positive");
        }
        if self.threads == Some(0) {
            return bad("thread count must be at least 1");
        }
        Ok(())
    }

    pub fn initial_states(&self) -> Vec<DefenderState> {
        states(&self.initial_defenders)
    }
}

fn states(points: &[Point2]) -> Vec<DefenderState> {
    points
        .iter()
        .enumerate()
        .map(|(i, &position)| DefenderState {
            id: i + 1,
            position,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Passcut {
    /// Index into the defender slice.
    pub defender: usize,
    pub attacker: PlayerId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PasscutPairs {
    pub pairs: Vec<Passcut>,
}

impl PasscutPairs {
    pub fn for_defender(&self, defender: usize) -> Option<PlayerId> {
        self.pairs
            .iter()
            .find(|p| p.defender == defender)
            .map(|p| p.attacker)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Greedy pairing of house attackers (nearest the goal first) with the
/// house defender sitting deepest inside the attacker–holder lane.
pub fn select_passcut_pairs(
    defenders: &[DefenderState],
    frame: &OffensiveFrame,
    goal: Point2,
    cbf: &CbfParams,
) -> Result<PasscutPairs, DensityError> {
    let holder = *frame.holder()?;
    let mut attackers: Vec<&OffensivePlayer> = frame
        .players
        .iter()
        .filter(|p| p.id != holder.id && in_house_area(p.position))
        .collect();
    let mut free: Vec<usize> = (0..defenders.len())
        .filter(|&i| in_house_area(defenders[i].position))
        .collect();

    let mut out = PasscutPairs::default();
    while !attackers.is_empty() && !free.is_empty() {
        let (ai, attacker) = attackers
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.position
                    .distance(goal)
                    .total_cmp(&b.position.distance(goal))
                    .then(a.id.cmp(&b.id))
            })
            .map(|(i, a)| (i, *a))
            .expect("non-empty");

        // A degenerate lane scores every defender equally; the lowest index
        // wins and the step later drops the pair.
        let lane = ellipse_from_players(attacker.position, holder.position, cbf).ok();
        let score = |d: usize| lane.as_ref().map_or(0.0, |e| e.h(defenders[d].position));
        let mut best = 0;
        for k in 1..free.len() {
            if score(free[k]) > score(free[best]) {
                best = k;
            }
        }
        out.pairs.push(Passcut {
            defender: free[best],
            attacker: attacker.id,
        });
        free.remove(best);
        attackers.remove(ai);
    }
    out.pairs.sort_by_key(|p| p.defender);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord {
    pub defender: usize,
    pub attacker: PlayerId,
    /// Barrier value at the pre-step position.
    pub h: f64,
}

/// Everything observed at one step. Positions are those at time `t`,
/// before `u` is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub positions: Vec<Point2>,
    pub u_nom: Vec<Point2>,
    pub u: Vec<Point2>,
    pub pairs: Vec<PairRecord>,
    /// Pairs discarded because the attacker and holder coincide.
    pub dropped: Vec<Passcut>,
    pub cost: f64,
    pub clamped: Vec<bool>,
    pub infeasible: Vec<bool>,
}

impl StepRecord {
    pub fn pair_for(&self, defender: usize) -> Option<&PairRecord> {
        self.pairs.iter().find(|p| p.defender == defender)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimTrace {
    pub records: Vec<StepRecord>,
}

/// Result of one step plus the intermediate products used for rendering.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub defenders: Vec<DefenderState>,
    pub record: StepRecord,
    pub field: WeightField,
    pub partition: VoronoiPartition,
    pub lanes: Vec<EllipseCbf>,
}

pub fn step(
    defenders: &[DefenderState],
    frame: &OffensiveFrame,
    params: &SimParams,
    grid: &Grid,
) -> Result<StepOutcome, SimError> {
    let field = build_weight_field(frame, &params.density, grid)?;
    step_with_field(defenders, frame, field, params)
}

/// [`step`] with the weight field already built for `frame`.
pub fn step_with_field(
    defenders: &[DefenderState],
    frame: &OffensiveFrame,
    field: WeightField,
    params: &SimParams,
) -> Result<StepOutcome, SimError> {
    let grid = &field.grid;
    let partition = assign_voronoi(defenders, grid)?;
    let moments = cell_moments(&partition, &field);
    let positions: Vec<Point2> = defenders.iter().map(|d| d.position).collect();
    let cost = coverage_cost_for_partition(&positions, &partition, &field);

    let u_nom: Vec<Point2> = defenders
        .iter()
        .zip(&moments)
        .map(|(d, m)| {
            let centroid = m.centroid().unwrap_or(d.position);
            nominal_input(d, centroid, params.k).0
        })
        .collect();

    let selected = if params.pass_cut {
        select_passcut_pairs(defenders, frame, params.field.goal, &params.cbf)?
    } else {
        PasscutPairs::default()
    };
    let holder = *frame.holder()?;

    let n = defenders.len();
    let mut u = u_nom.clone();
    let mut infeasible = vec![false; n];
    let mut pairs = Vec::new();
    let mut dropped = Vec::new();
    let mut lanes = Vec::new();
    for pc in &selected.pairs {
        let attacker = frame
            .player(pc.attacker)
            .expect("pairs come from the frame");
        let lane = match ellipse_from_players(attacker.position, holder.position, &params.cbf) {
            Ok(e) => e.with_endpoint_velocities(attacker.velocity, holder.velocity),
            Err(_) => {
                dropped.push(*pc);
                continue;
            }
        };
        let x = positions[pc.defender];
        let out = qp_filter(ControlInput(u_nom[pc.defender]), x, &lane, &params.cbf);
        u[pc.defender] = out.u.0;
        infeasible[pc.defender] = out.infeasible;
        pairs.push(PairRecord {
            defender: pc.defender,
            attacker: pc.attacker,
            h: lane.h(x),
        });
        lanes.push(lane);
    }

    let cap = params.field.speed_cap;
    let mut clamped = vec![false; n];
    for (ui, flag) in u.iter_mut().zip(clamped.iter_mut()) {
        let norm = ui.norm();
        if norm > cap {
            *ui = *ui * (cap / norm);
            // rescaling can land one ulp above the cap
            while ui.norm() > cap {
                *ui = *ui * (1.0 - f64::EPSILON);
            }
            *flag = true;
        }
    }

    let next = defenders
        .iter()
        .zip(&u)
        .map(|(d, ui)| DefenderState {
            id: d.id,
            position: params.field.clamp(d.position + *ui * params.dt),
        })
        .collect();

    Ok(StepOutcome {
        defenders: next,
        record: StepRecord {
            t: frame.t,
            positions,
            u_nom,
            u,
            pairs,
            dropped,
            cost,
            clamped,
            infeasible,
        },
        field,
        partition,
        lanes,
    })
}

/// Attacker frames resampled onto the simulation clock.
///
/// Positions are interpolated linearly between scene frames. Velocities
/// are backward differences of the resampled positions (forward at the
/// first sample) and are capped in magnitude. The puck holder is taken
/// from the latest scene frame at or before each sample time.
pub fn resample_scene(scene: &Scene, dt: f64, speed_cap: f64) -> Vec<OffensiveFrame> {
    let t0 = scene.frames[0].t;
    let steps = ((scene.duration() / dt) + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| t0 + k as f64 * dt).collect();

    let positions_at = |t: f64| -> (Vec<(PlayerId, Point2)>, PlayerId) {
        let frames = &scene.frames;
        let seg = frames
            .windows(2)
            .position(|w| t < w[1].t)
            .unwrap_or(frames.len() - 2);
        let (a, b) = (&frames[seg], &frames[seg + 1]);
        let s = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let holder = if s >= 1.0 {
            b.puck_holder
        } else {
            a.puck_holder
        };
        let players = a
            .players
            .iter()
            .map(|p| {
                let end = b.player(p.id).map_or(p.position, |q| q.position);
                (p.id, p.position.lerp(end, s))
            })
            .collect();
        (players, holder)
    };

    let sampled: Vec<_> = times.iter().map(|&t| positions_at(t)).collect();
    sampled
        .iter()
        .enumerate()
        .map(|(k, (players, holder))| {
            let (prev, next) = if k == 0 {
                (0, 1.min(sampled.len() - 1))
            } else {
                (k - 1, k)
            };
            let players = players
                .iter()
                .enumerate()
                .map(|(j, &(id, position))| {
                    let velocity = if prev == next {
                        Point2::ZERO
                    } else {
                        ((sampled[next].0[j].1 - sampled[prev].0[j].1) * (1.0 / dt))
                            .clamp_norm(speed_cap)
                    };
                    OffensivePlayer {
                        id,
                        position,
                        velocity,
                    }
                })
                .collect();
            OffensiveFrame {
                t: times[k],
                players,
                puck_holder: *holder,
            }
        })
        .collect()
}

/// Scene frame `k` with velocities differenced against its neighbour frame.
pub fn scene_frame_with_velocities(scene: &Scene, k: usize, speed_cap: f64) -> OffensiveFrame {
    let frames = &scene.frames;
    let (a, b) = if k == 0 { (0, 1) } else { (k - 1, k) };
    let span = frames[b].t - frames[a].t;
    let mut frame = frames[k].clone();
    for p in &mut frame.players {
        let start = frames[a].player(p.id).map(|q| q.position);
        let end = frames[b].player(p.id).map(|q| q.position);
        p.velocity = match (start, end) {
            (Some(s), Some(e)) if span > 0.0 => ((e - s) * (1.0 / span)).clamp_norm(speed_cap),
            _ => Point2::ZERO,
        };
    }
    frame
}

pub fn run(scene: &Scene, params: &SimParams) -> Result<SimTrace, SimError> {
    let mut trace = SimTrace::default();
    run_with(scene, params, |_, outcome| {
        trace.records.push(outcome.record.clone())
    })?;
    Ok(trace)
}

/// Runs the scene, handing every step's outcome to `observe` in time order.
pub fn run_with<F>(scene: &Scene, params: &SimParams, mut observe: F) -> Result<(), SimError>
where
    F: FnMut(&OffensiveFrame, &StepOutcome) + Send,
{
    params.validate()?;
    scene.validate(&params.field)?;
    let mut body = || -> Result<(), SimError> {
        let grid = make_grid(params.field, params.grid_resolution)?;
        let frames = resample_scene(scene, params.dt, params.offense_speed_cap);
        let mut defenders = match &scene.initial_defenders {
            Some(points) => states(points),
            None => params.initial_states(),
        };
        for frame in &frames {
            let outcome = step(&defenders, frame, params, &grid)?;
            observe(frame, &outcome);
            defenders = outcome.defenders;
        }
        Ok(())
    };
    match params.threads {
        Some(n) => ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(body),
        None => body(),
    }
}
