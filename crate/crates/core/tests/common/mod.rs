//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's numerical routines; each oracle is
//! written out long-hand from the model definitions so that agreement with
//! the library is meaningful.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use hockey_formation::density::{OffensiveFrame, OffensivePlayer};
use hockey_formation::field::{Grid, Point2};
use hockey_formation::scene::{Scene, SceneMetadata};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scenes_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

pub fn shipped_scenes() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenes_dir())
        .expect("scenes directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
}

// ---------------------------------------------------------------------------
// lane ellipse

/// `h` built from an explicit rotation matrix with the angle taken from
/// `atan2`, not from the normalized endpoint difference.
pub fn lane_h(x: Point2, x1: Point2, x2: Point2, d: f64) -> f64 {
    let l = ((x2.x - x1.x).powi(2) + (x2.y - x1.y).powi(2)).sqrt();
    let theta = (x2.y - x1.y).atan2(x2.x - x1.x);
    let (c, s) = (theta.cos(), theta.sin());
    let (vx, vy) = (x.x - 0.5 * (x1.x + x2.x), x.y - 0.5 * (x1.y + x2.y));
    // Rᵀ v
    let along = c * vx + s * vy;
    let across = -s * vx + c * vy;
    1.0 - (along / (l / 2.0)).powi(2) - (across / (d / 2.0)).powi(2)
}

/// Fourth-order central differences of [`lane_h`] in
/// `[x, y, x1, y1, x2, y2]`.
pub fn lane_h_fd(x: Point2, x1: Point2, x2: Point2, d: f64, step: f64) -> [f64; 6] {
    let base = [x.x, x.y, x1.x, x1.y, x2.x, x2.y];
    let eval = |v: [f64; 6]| {
        lane_h(
            Point2::new(v[0], v[1]),
            Point2::new(v[2], v[3]),
            Point2::new(v[4], v[5]),
            d,
        )
    };
    let mut out = [0.0; 6];
    for (k, slot) in out.iter_mut().enumerate() {
        let at = |offset: f64| {
            let mut v = base;
            v[k] += offset;
            eval(v)
        };
        *slot =
            (at(-2.0 * step) - 8.0 * at(-step) + 8.0 * at(step) - at(2.0 * step)) / (12.0 * step);
    }
    out
}

/// Long-hand expansion of the `b` and `d` coefficients in terms of the
/// world-frame offsets. `first_sign` is the sign of the `cos²θ (x1 - x2)`
/// term in `b`; the consistent value is `-1.0`.
pub fn expanded_b_d(x: Point2, x1: Point2, x2: Point2, d: f64, first_sign: f64) -> (f64, f64) {
    let l = ((x2.x - x1.x).powi(2) + (x2.y - x1.y).powi(2)).sqrt();
    let c = (x2.x - x1.x) / l;
    let s = (x2.y - x1.y) / l;
    let (s2, c2) = (2.0 * s * c, c * c - s * s);
    let ia = 1.0 / (l / 2.0).powi(2);
    let ib = 1.0 / (d / 2.0).powi(2);
    let ex = x.x - 0.5 * (x1.x + x2.x);
    let ey = x.y - 0.5 * (x1.y + x2.y);
    let l2 = l * l;
    let l4 = l2 * l2;
    let q4 = (l / 2.0).powi(4);

    let b = -((ib - ia) * s2 * ((x2.y - x1.y) / l2)
        + first_sign * c * c * (x1.x - x2.x) / (2.0 * q4))
        * ex
        * ex
        - 2.0 * (s2 * (4.0 * (x2.x - x1.x) / l4) + (ia - ib) * c2 * ((x2.y - x1.y) / l2)) * ex * ey
        - ((ia - ib) * s2 * ((x2.y - x1.y) / l2) - s * s * (x1.x - x2.x) / (2.0 * q4)) * ey * ey;

    let dd = -((ib - ia) * s2 * ((x2.x - x1.x) / l2) - c * c * (x2.y - x1.y) / (2.0 * q4))
        * ex
        * ex
        - 2.0 * (s2 * (4.0 * (x1.y - x2.y) / l4) + (ia - ib) * c2 * ((x2.x - x1.x) / l2)) * ex * ey
        - ((ia - ib) * s2 * ((x2.x - x1.x) / l2) - s * s * (x2.y - x1.y) / (2.0 * q4)) * ey * ey;
    (b, dd)
}

/// A random attacker pair inside the rink with separation in `length`.
/// Every fourth pair is exactly vertical.
pub fn random_pair(rng: &mut ChaCha8Rng, length: (f64, f64), index: usize) -> (Point2, Point2) {
    loop {
        let x1 = Point2::new(rng.gen_range(1.0..60.0), rng.gen_range(1.0..29.0));
        let l = rng.gen_range(length.0..length.1);
        let theta: f64 = if index.is_multiple_of(4) {
            if rng.gen_bool(0.5) {
                PI / 2.0
            } else {
                -PI / 2.0
            }
        } else {
            rng.gen_range(0.0..TAU)
        };
        let x2 = if index.is_multiple_of(4) {
            Point2::new(x1.x, x1.y + l * theta.sin())
        } else {
            Point2::new(x1.x + l * theta.cos(), x1.y + l * theta.sin())
        };
        if (0.0..=61.0).contains(&x2.x) && (0.0..=30.0).contains(&x2.y) {
            return (x1, x2);
        }
    }
}

// ---------------------------------------------------------------------------
// single-constraint QP

/// Minimizes `|u - u_nom|²` over `{u : g·u + r >= 0}` by a zoomed sweep over
/// directions from `u_nom`; along each direction the closest feasible point
/// is found by bisection. Returns the best objective value.
pub fn qp_grid_search(u_nom: Point2, g: Point2, r: f64) -> f64 {
    let feasible = |u: Point2| g.x * u.x + g.y * u.y + r >= 0.0;
    if feasible(u_nom) {
        return 0.0;
    }
    let reach = 1e3 * (1.0 + u_nom.norm() + r.abs());
    let radius = |phi: f64| -> f64 {
        let dir = Point2::new(phi.cos(), phi.sin());
        if !feasible(u_nom + dir * reach) {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, reach);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if feasible(u_nom + dir * mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let (mut center, mut half) = (0.0, PI);
    let mut best = f64::INFINITY;
    for _ in 0..40 {
        let mut best_phi = center;
        for k in 0..=20 {
            let phi = center - half + half * k as f64 / 10.0;
            let rho = radius(phi);
            if rho * rho < best {
                best = rho * rho;
                best_phi = phi;
            }
        }
        center = best_phi;
        half *= 0.25;
    }
    best
}

// ---------------------------------------------------------------------------
// coverage

pub struct BruteMoments {
    pub mass: Vec<f64>,
    pub centroid: Vec<Point2>,
}

/// Nearest-site masses and centroids by a row-by-row sweep over the grid,
/// accumulating in the same order as a single forward pass.
pub fn brute_force_centroids(
    grid: &Grid,
    sites: &[Point2],
    phi: impl Fn(Point2) -> f64,
) -> BruteMoments {
    let dx = grid.spec.width / grid.nx as f64;
    let dy = grid.spec.height / grid.ny as f64;
    let area = dx * dy;
    let n = sites.len();
    let mut mass = vec![0.0; n];
    let mut mx = vec![0.0; n];
    let mut my = vec![0.0; n];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let q = Point2::new((i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy);
            let value = phi(q);
            if value == 0.0 {
                continue;
            }
            let mut owner = 0;
            let mut best = f64::INFINITY;
            for (s, p) in sites.iter().enumerate() {
                let d2 = (q.x - p.x) * (q.x - p.x) + (q.y - p.y) * (q.y - p.y);
                if d2 < best {
                    best = d2;
                    owner = s;
                }
            }
            let w = value * area;
            mass[owner] += w;
            mx[owner] += q.x * w;
            my[owner] += q.y * w;
        }
    }
    let centroid = (0..n)
        .map(|s| Point2::new(mx[s] / mass[s], my[s] / mass[s]))
        .collect();
    BruteMoments { mass, centroid }
}

// ---------------------------------------------------------------------------
// weight field

fn house(x: f64, y: f64) -> bool {
    y >= -x + 20.0 && y <= x + 10.0 && (x - 5.0).powi(2) + (y - 15.0).powi(2) <= 225.0
}

/// Cell centers in storage order, x fastest.
pub fn cell_centers(grid: &Grid) -> Vec<Point2> {
    let dx = grid.spec.width / grid.nx as f64;
    let dy = grid.spec.height / grid.ny as f64;
    (0..grid.ny)
        .flat_map(|j| {
            (0..grid.nx).map(move |i| Point2::new((i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy))
        })
        .collect()
}

/// Stage-by-stage weight field at the given points, one array per source,
/// with the default constants written out.
pub fn reference_weight_field(frame: &OffensiveFrame, p: f64, points: &[Point2]) -> Vec<f64> {
    let goal = (6.0, 15.0);
    let cells: Vec<(f64, f64)> = points.iter().map(|q| (q.x, q.y)).collect();
    let bump =
        |cx: f64, cy: f64, x: f64, y: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / 30.0).exp();

    // raw bumps
    let mut players: Vec<Vec<f64>> = frame
        .players
        .iter()
        .map(|pl| {
            let (px, py) = (pl.position.x, pl.position.y);
            let (gx, gy) = (goal.0 - px, goal.1 - py);
            let dist = (gx * gx + gy * gy).sqrt();
            let (ux, uy) = if dist < 1e-9 {
                (0.0, 0.0)
            } else {
                (gx / dist, gy / dist)
            };
            let cx = px + ux + pl.velocity.x;
            let cy = py + uy + pl.velocity.y;
            cells.iter().map(|&(x, y)| bump(cx, cy, x, y)).collect()
        })
        .collect();
    let mut goal_w: Vec<f64> = cells
        .iter()
        .map(|&(x, y)| bump(goal.0, goal.1, x, y))
        .collect();

    // distance gain, players only
    for w in players.iter_mut() {
        for (v, &(x, y)) in w.iter_mut().zip(&cells) {
            let r = ((x - goal.0).powi(2) + (y - goal.1).powi(2)).sqrt();
            *v *= ((25.0 - r) / 25.0).max(0.0);
        }
    }

    // house gain
    for w in players.iter_mut() {
        for (v, &(x, y)) in w.iter_mut().zip(&cells) {
            if house(x, y) {
                *v *= p;
            }
        }
    }
    for (v, &(x, y)) in goal_w.iter_mut().zip(&cells) {
        *v = if house(x, y) { *v * p * 1.5 } else { 0.0 };
    }

    // puck priority
    let holder = frame
        .players
        .iter()
        .find(|pl| pl.id == frame.puck_holder)
        .unwrap()
        .position;
    if holder.x <= 10.0 && holder.y <= 15.0 {
        for (w, pl) in players.iter_mut().zip(&frame.players) {
            if pl.id != frame.puck_holder {
                for (v, &(_, y)) in w.iter_mut().zip(&cells) {
                    *v *= if y < 15.0 { 0.1 } else { 0.05 };
                }
            }
        }
        for (v, &(x, y)) in goal_w.iter_mut().zip(&cells) {
            if y >= 15.0 || x >= 10.0 {
                *v = 0.0;
            }
        }
    } else if holder.x <= 10.0 {
        for (w, pl) in players.iter_mut().zip(&frame.players) {
            if pl.id != frame.puck_holder {
                for (v, &(_, y)) in w.iter_mut().zip(&cells) {
                    *v *= if y >= 15.0 { 0.1 } else { 0.05 };
                }
            }
        }
        for (v, &(x, y)) in goal_w.iter_mut().zip(&cells) {
            if y <= 15.0 || x >= 10.0 {
                *v = 0.0;
            }
        }
    }

    // low-gain strip, non-holders only
    for (w, pl) in players.iter_mut().zip(&frame.players) {
        if pl.id == frame.puck_holder {
            continue;
        }
        for (v, &(x, y)) in w.iter_mut().zip(&cells) {
            if (14.945..=21.960).contains(&x) && (10.0..=20.0).contains(&y) {
                *v *= 0.1;
            }
        }
    }

    // right-hand mask
    for w in players.iter_mut().chain(std::iter::once(&mut goal_w)) {
        for (v, &(x, _)) in w.iter_mut().zip(&cells) {
            if x > 30.0 {
                *v = 0.0;
            }
        }
    }

    (0..cells.len())
        .map(|k| players.iter().map(|w| w[k]).sum::<f64>() + goal_w[k])
        .collect()
}

// ---------------------------------------------------------------------------
// scenes

pub fn player(id: u32, x: f64, y: f64) -> OffensivePlayer {
    OffensivePlayer {
        id,
        position: Point2::new(x, y),
        velocity: Point2::ZERO,
    }
}

/// A scene whose attackers stand still for `duration` seconds.
pub fn static_scene(points: &[(f64, f64)], holder: u32, duration: f64) -> Scene {
    let players: Vec<OffensivePlayer> = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| player(i as u32 + 1, x, y))
        .collect();
    let frame = |t: f64| OffensiveFrame {
        t,
        players: players.clone(),
        puck_holder: holder,
    };
    Scene {
        metadata: SceneMetadata {
            name: "static".into(),
            source: "synthetic".into(),
            fps: 1.0 / duration,
        },
        frames: vec![frame(0.0), frame(duration)],
        initial_defenders: None,
    }
}

/// Random valid frame with `n` attackers, random velocities and holder.
pub fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> OffensiveFrame {
    let players: Vec<OffensivePlayer> = (0..n)
        .map(|i| OffensivePlayer {
            id: i as u32 + 1,
            position: Point2::new(rng.gen_range(0.0..61.0), rng.gen_range(0.0..30.0)),
            velocity: Point2::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)),
        })
        .collect();
    let mut frame = OffensiveFrame {
        t: 0.0,
        puck_holder: rng.gen_range(1..=n as u32),
        players,
    };
    // bias some holders into the priority region so both branches run
    if rng.gen_bool(0.5) {
        let h = frame.puck_holder as usize - 1;
        frame.players[h].position = Point2::new(rng.gen_range(0.0..10.0), rng.gen_range(5.0..25.0));
    }
    frame
}
