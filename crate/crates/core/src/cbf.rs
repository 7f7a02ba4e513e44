//! Pass-lane control barrier functions and the single-constraint QP filter.
//!
//! The ellipsoidal barrier is positive inside a thin ellipse whose major
//! axis runs between two attackers:
//!
//! ```text
//! h(X, X1, X2) = 1 - (X - Xo)ᵀ P (X - Xo)
//! ```
//!
//! with `Xo` the midpoint, semi-axes `l/2` and `d/2`, and `P` rotated onto
//! the `X1 → X2` direction. The orientation is carried as `cos`/`sin`
//! computed from the endpoint difference, so vertical lanes need no
//! special case.
//!
//! Time derivatives are expressed through four coefficients `a, b, c, d`:
//!
//! ```text
//! ḣ = a(ẋ1 + ẋ2 - 2ẋ) + b(ẋ1 - ẋ2) + c(ẏ1 + ẏ2 - 2ẏ) + d(ẏ2 - ẏ1)
//! ```
//!
//! [`LineCbf`] is the older distance-to-line barrier, kept only as a
//! baseline.

use thiserror::Error;

use crate::coverage::ControlInput;
use crate::field::Point2;

#[derive(Debug, Error, PartialEq)]
pub enum CbfError {
    #[error("attackers are {0} m apart, too close to define a pass lane")]
    NoPassLane(f64),
    #[error("line barrier is undefined for a vertical line (x1 = x2)")]
    VerticalLine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfParams {
    /// Full minor-axis length of the pass-lane ellipse, m.
    pub d: f64,
    /// Pairs closer than this are not treated as a lane.
    pub l_min: f64,
}

impl Default for CbfParams {
    fn default() -> Self {
        Self {
            d: 0.01,
            l_min: 1e-6,
        }
    }
}

impl CbfParams {
    /// Class-K function in `ḣ + α(h) >= 0`. Fixed to the identity.
    pub fn alpha(&self, h: f64) -> f64 {
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseCbf {
    pub center: Point2,
    /// Distance between the attackers (full major axis).
    pub length: f64,
    /// Full minor axis.
    pub minor: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub endpoints: [Point2; 2],
    pub endpoint_velocities: [Point2; 2],
}

/// Coefficients of `ḣ` in the endpoint/defender velocity expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGradients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl HGradients {
    /// ∂h/∂X.
    pub fn wrt_defender(&self) -> Point2 {
        Point2::new(-2.0 * self.a, -2.0 * self.c)
    }

    /// ∂h/∂X1.
    pub fn wrt_first(&self) -> Point2 {
        Point2::new(self.a + self.b, self.c - self.d)
    }

    /// ∂h/∂X2.
    pub fn wrt_second(&self) -> Point2 {
        Point2::new(self.a - self.b, self.c + self.d)
    }

    /// `[∂x, ∂y, ∂x1, ∂y1, ∂x2, ∂y2]`.
    pub fn partials(&self) -> [f64; 6] {
        let (x, x1, x2) = (self.wrt_defender(), self.wrt_first(), self.wrt_second());
        [x.x, x.y, x1.x, x1.y, x2.x, x2.y]
    }

    /// Contribution of the attackers' motion to `ḣ`.
    pub fn endpoint_rate(&self, v1: Point2, v2: Point2) -> f64 {
        self.a * (v1.x + v2.x)
            + self.b * (v1.x - v2.x)
            + self.c * (v1.y + v2.y)
            + self.d * (v2.y - v1.y)
    }
}

pub fn ellipse_from_players(
    x1: Point2,
    x2: Point2,
    params: &CbfParams,
) -> Result<EllipseCbf, CbfError> {
    let delta = x2 - x1;
    let length = delta.norm();
    if !(length > params.l_min) {
        return Err(CbfError::NoPassLane(length));
    }
    Ok(EllipseCbf {
        center: (x1 + x2) * 0.5,
        length,
        minor: params.d,
        cos_theta: delta.x / length,
        sin_theta: delta.y / length,
        endpoints: [x1, x2],
        endpoint_velocities: [Point2::ZERO; 2],
    })
}

impl EllipseCbf {
    pub fn with_endpoint_velocities(mut self, v1: Point2, v2: Point2) -> Self {
        self.endpoint_velocities = [v1, v2];
        self
    }

    /// Unit vector along the lane.
    pub fn axis(&self) -> Point2 {
        Point2::new(self.cos_theta, self.sin_theta)
    }

    pub fn normal(&self) -> Point2 {
        Point2::new(-self.sin_theta, self.cos_theta)
    }

    /// `1/(l/2)²` and `1/(d/2)²`.
    fn inverse_semi_axes_sq(&self) -> (f64, f64) {
        (
            4.0 / (self.length * self.length),
            4.0 / (self.minor * self.minor),
        )
    }

    /// Coordinates of `x` along the lane and across it, relative to the center.
    pub fn local(&self, x: Point2) -> (f64, f64) {
        let v = x - self.center;
        (v.dot(self.axis()), v.dot(self.normal()))
    }

    /// The symmetric matrix `P` of the quadratic form.
    pub fn quadratic_form(&self) -> [[f64; 2]; 2] {
        let (ia, ib) = self.inverse_semi_axes_sq();
        let (c, s) = (self.cos_theta, self.sin_theta);
        let off = c * s * (ia - ib);
        [
            [c * c * ia + s * s * ib, off],
            [off, s * s * ia + c * c * ib],
        ]
    }

    pub fn h(&self, x: Point2) -> f64 {
        // Evaluated in the lane frame; expanding vᵀPv directly loses ~9
        // digits to cancellation when d is 1 cm.
        let (ia, ib) = self.inverse_semi_axes_sq();
        let (s, m) = self.local(x);
        1.0 - (ia * s * s + ib * m * m)
    }

    pub fn gradients(&self, x: Point2) -> HGradients {
        let (ia, ib) = self.inverse_semi_axes_sq();
        let (s, m) = self.local(x);
        let (u, n) = (self.axis(), self.normal());
        // P(X - Xo) gives a and c.
        let pv = u * (ia * s) + n * (ib * m);
        // Derivative of the quadratic form w.r.t. the endpoint difference
        // X2 - X1 at fixed X - Xo.
        let dq = (u * (-ia * s * s) + n * ((ia - ib) * s * m)) * (2.0 / self.length);
        HGradients {
            a: pv.x,
            b: dq.x,
            c: pv.y,
            d: -dq.y,
        }
    }

    /// Half-space `g·u + r >= 0` on the defender velocity.
    pub fn constraint(&self, x: Point2, params: &CbfParams) -> HalfSpace {
        let grads = self.gradients(x);
        let [v1, v2] = self.endpoint_velocities;
        HalfSpace {
            g: grads.wrt_defender(),
            r: grads.endpoint_rate(v1, v2) + params.alpha(self.h(x)),
        }
    }
}

pub fn h_ellipse(x: Point2, e: &EllipseCbf) -> f64 {
    e.h(x)
}

pub fn h_gradients(x: Point2, e: &EllipseCbf) -> HGradients {
    e.gradients(x)
}

/// Linear constraint `g·u + r >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub g: Point2,
    pub r: f64,
}

impl HalfSpace {
    pub fn residual(&self, u: Point2) -> f64 {
        self.g.dot(u) + self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOutcome {
    pub u: ControlInput,
    /// The constraint bound the solution.
    pub active: bool,
    /// Violated constraint with a vanishing gradient; `u` is the nominal.
    pub infeasible: bool,
}

/// Closest point to `u_nom` in the half-space.
pub fn project_halfspace(u_nom: Point2, hs: HalfSpace) -> FilterOutcome {
    let res = hs.residual(u_nom);
    if res >= 0.0 {
        return FilterOutcome {
            u: ControlInput(u_nom),
            active: false,
            infeasible: false,
        };
    }
    let gg = hs.g.norm_sq();
    if gg.sqrt() < 1e-12 {
        return FilterOutcome {
            u: ControlInput(u_nom),
            active: false,
            infeasible: true,
        };
    }
    FilterOutcome {
        u: ControlInput(u_nom - hs.g * (res / gg)),
        active: true,
        infeasible: false,
    }
}

/// Minimum-norm correction of `u_nom` so that `ḣ + α(h) >= 0`.
pub fn qp_filter(
    u_nom: ControlInput,
    x: Point2,
    e: &EllipseCbf,
    params: &CbfParams,
) -> FilterOutcome {
    project_halfspace(u_nom.0, e.constraint(x, params))
}

/// `ḣ + α(h)` for defender velocity `u`.
pub fn constraint_residual(u: ControlInput, x: Point2, e: &EllipseCbf, params: &CbfParams) -> f64 {
    e.constraint(x, params).residual(u.0)
}

/// Barrier `δ² - dist(X, line)²` for the infinite line through two
/// attackers, in slope-intercept form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCbf {
    pub delta: f64,
    pub a: f64,
    pub b: f64,
}

impl LineCbf {
    pub fn from_players(x1: Point2, x2: Point2, delta: f64) -> Result<Self, CbfError> {
        let run = x1.x - x2.x;
        if run == 0.0 {
            return Err(CbfError::VerticalLine);
        }
        Ok(Self {
            delta,
            a: (x1.y - x2.y) / run,
            b: (x1.x * x2.y - x2.x * x1.y) / run,
        })
    }

    fn offset(&self, x: Point2) -> f64 {
        self.a * x.x - x.y + self.b
    }

    pub fn h(&self, x: Point2) -> f64 {
        let r = self.offset(x);
        self.delta * self.delta - r * r / (self.a * self.a + 1.0)
    }

    pub fn gradient(&self, x: Point2) -> Point2 {
        let k = -2.0 * self.offset(x) / (self.a * self.a + 1.0);
        Point2::new(k * self.a, -k)
    }

    /// Constraint for static attackers.
    pub fn constraint(&self, x: Point2, params: &CbfParams) -> HalfSpace {
        HalfSpace {
            g: self.gradient(x),
            r: params.alpha(self.h(x)),
        }
    }
}

pub fn h_line(x: Point2, lc: &LineCbf) -> f64 {
    lc.h(x)
}
