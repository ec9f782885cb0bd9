//! Rectangular, polar and double-null charts of Minkowski space.
//!
//! Conventions: `η = −dx0² + dx1² + dx2² + dx3²`, `t = x0`, `r = |x⃗|`,
//! optical functions `u = (t − r)/2`, `v = (t + r)/2`, polar angle `θ ∈ (0, π)`
//! measured from the `x3` axis and azimuth `φ ∈ [0, 2π)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from the axis below which the polar chart is considered degenerate.
pub const CHART_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRect {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl EventRect {
    pub fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        EventRect { x0, x1, x2, x3 }
    }

    pub fn spatial_radius(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    /// `−x0² + |x⃗|²`; zero on the lightcone of the origin.
    pub fn interval_sq(&self) -> f64 {
        -self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x0, self.x1, self.x2, self.x3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventDoubleNull {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    pub phi: f64,
}

impl EventDoubleNull {
    /// Validates `r = v − u > 0`, `θ ∈ (0, π)` and wraps `φ` into `[0, 2π)`.
    pub fn new(u: f64, v: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(v - u > 0.0) {
            return Err(Error::ChartDegeneracy(format!("r = v - u = {} is not positive", v - u)));
        }
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::ChartDegeneracy(format!("theta = {theta} is not in (0, pi)")));
        }
        Ok(EventDoubleNull { u, v, theta, phi: wrap_angle(phi) })
    }

    pub fn radius(&self) -> f64 {
        self.v - self.u
    }
}

/// A covector `a_μ dx^μ` in rectangular coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covector4 {
    pub a: [f64; 4],
}

impl Covector4 {
    pub fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Covector4 { a: [a0, a1, a2, a3] }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&x| x == 0.0)
    }

    pub fn pair(&self, x: &EventRect) -> f64 {
        self.a.iter().zip(x.as_array()).map(|(a, x)| a * x).sum()
    }

    pub fn spatial_norm(&self) -> f64 {
        (self.a[1] * self.a[1] + self.a[2] * self.a[2] + self.a[3] * self.a[3]).sqrt()
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

pub fn rect_to_double_null(x: &EventRect) -> Result<EventDoubleNull> {
    let rho = x.x1.hypot(x.x2);
    let r = x.spatial_radius();
    if r <= CHART_TOL {
        return Err(Error::ChartDegeneracy(format!("spatial origin r = {r}")));
    }
    if rho <= CHART_TOL * r {
        return Err(Error::ChartDegeneracy("event on the polar axis (theta in {0, pi})".into()));
    }
    let theta = rho.atan2(x.x3);
    let phi = wrap_angle(x.x2.atan2(x.x1));
    Ok(EventDoubleNull { u: (x.x0 - r) / 2.0, v: (x.x0 + r) / 2.0, theta, phi })
}

pub fn double_null_to_rect(e: &EventDoubleNull) -> EventRect {
    let t = e.u + e.v;
    let r = e.v - e.u;
    let (st, ct) = e.theta.sin_cos();
    let (sp, cp) = e.phi.sin_cos();
    EventRect { x0: t, x1: r * st * cp, x2: r * st * sp, x3: r * ct }
}

/// The point of the past lightcone `v = 0` with `u < 0` in direction `(θ, φ)`.
pub fn cone_point(u: f64, theta: f64, phi: f64) -> Result<EventRect> {
    if !(u < 0.0) {
        return Err(Error::Domain(format!("cone points need u < 0, got {u}")));
    }
    let r = -u;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Ok(EventRect { x0: u, x1: r * st * cp, x2: r * st * sp, x3: r * ct })
}

/// `η^{μν} a_μ a_ν = −a0² + a1² + a2² + a3²`.
pub fn causal_norm_sq(a: &Covector4) -> f64 {
    -a.a[0] * a.a[0] + a.a[1] * a.a[1] + a.a[2] * a.a[2] + a.a[3] * a.a[3]
}

/// `η(X, Y)` for vectors given in rectangular components.
pub fn eta(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]
}

/// Rectangular components of the double-null coordinate vectors at a point with
/// radius `r` and angles `(θ, φ)`: `(∂u, ∂v, ∂θ, ∂φ)`.
pub fn coordinate_basis(r: f64, theta: f64, phi: f64) -> [[f64; 4]; 4] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let radial = [0.0, st * cp, st * sp, ct];
    let du = [1.0, -radial[1], -radial[2], -radial[3]];
    let dv = [1.0, radial[1], radial[2], radial[3]];
    let dth = [0.0, r * ct * cp, r * ct * sp, -r * st];
    let dph = [0.0, -r * st * sp, r * st * cp, 0.0];
    [du, dv, dth, dph]
}
