//! Rink geometry, named zones and the integration grid.
//!
//! Coordinates are meters with the origin at the lower-left corner of the
//! rink. The defended goal sits at `(6, 15)` and only the left half
//! (`x <= 30`) carries weight.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point or velocity in the rink plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn distance_sq(self, other: Point2) -> f64 {
        (self - other).norm_sq()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Point2, s: f64) -> Point2 {
        self + (other - self) * s
    }

    /// Rescales the vector to at most `cap` in length.
    pub fn clamp_norm(self, cap: f64) -> Point2 {
        let n = self.norm();
        if n > cap {
            self * (cap / n)
        } else {
            self
        }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("grid resolution must lie in (0, 1] m, got {0}")]
    InvalidResolution(f64),
}

/// Rink dimensions and the constants every module shares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub width: f64,
    pub height: f64,
    pub goal: Point2,
    /// Weight is masked to zero beyond this x.
    pub active_x_max: f64,
    /// Defender speed limit in m/s.
    pub speed_cap: f64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            width: 61.0,
            height: 30.0,
            goal: Point2::new(6.0, 15.0),
            active_x_max: 30.0,
            speed_cap: 3.0,
        }
    }
}

impl FieldSpec {
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }
}

/// The slot in front of the goal: above `y = -x + 20`, below `y = x + 10`
/// and inside the 15 m circle around `(5, 15)`. Closed set.
pub fn in_house_area(p: Point2) -> bool {
    let dx = p.x - 5.0;
    let dy = p.y - 15.0;
    p.y >= -p.x + 20.0 && p.y <= p.x + 10.0 && dx * dx + dy * dy <= 225.0
}

pub const LOW_GAIN_X: (f64, f64) = (14.945, 21.960);
pub const LOW_GAIN_Y: (f64, f64) = (10.0, 20.0);

/// Middle strip next to the blue line where opposing players matter less.
pub fn in_low_gain_zone(p: Point2) -> bool {
    (LOW_GAIN_X.0..=LOW_GAIN_X.1).contains(&p.x) && (LOW_GAIN_Y.0..=LOW_GAIN_Y.1).contains(&p.y)
}

/// Uniform cell-centred grid over the whole rink.
///
/// `nx = ceil(width / resolution)`; the actual cell width is `width / nx`,
/// so it never exceeds the requested resolution and every center lies
/// strictly inside the rink. Cells are enumerated with x varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: FieldSpec,
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
    dx: f64,
    dy: f64,
}

pub fn make_grid(spec: FieldSpec, resolution: f64) -> Result<Grid, FieldError> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(FieldError::InvalidResolution(resolution));
    }
    // Round before ceil so 61 / 0.25 does not become 245 through noise.
    let count = |extent: f64| {
        let raw = extent / resolution;
        let rounded = raw.round();
        if (raw - rounded).abs() < 1e-9 {
            rounded as usize
        } else {
            raw.ceil() as usize
        }
    };
    let nx = count(spec.width);
    let ny = count(spec.height);
    Ok(Grid {
        spec,
        resolution,
        nx,
        ny,
        dx: spec.width / nx as f64,
        dy: spec.height / ny as f64,
    })
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn center_ij(&self, i: usize, j: usize) -> Point2 {
        Point2::new((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn center(&self, k: usize) -> Point2 {
        let (i, j) = self.coords(k);
        self.center_ij(i, j)
    }

    pub fn centers(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.len()).map(move |k| self.center(k))
    }
}
