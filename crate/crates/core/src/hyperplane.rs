//! Intersections of the past lightcone with hyperplanes `{a·x = c}`.
//!
//! A point of the cone in direction `ω` at radius `f` is `f(−1, ω)`, so the
//! intersection is the graph `f(ω) = c / (a⃗·ω − a0)` wherever the denominator has
//! the sign of `c`. The denominator only depends on `ω` through `a⃗·ω`, so after a
//! rotation taking an axis parallel to `a⃗` to `ẑ` every section is axisymmetric.
//! The rotated polar angle is oriented so the section always contains `θ = π`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{causal_norm_sq, Covector4, EventRect};
use crate::section::{Classification, ExpansionMargins, SectionDomain, SectionGeometry, SectionSpec};
use crate::sphere::{ScalarField, SphereGrid};

/// Tolerance on the causal norm of the canonical normal.
pub const CAUSAL_TOL: f64 = 1e-12;
/// Default distance kept from the edge of the intersection zone.
pub const DEFAULT_EDGE_MARGIN: f64 = 0.1;
/// Widest patch used by [`SectionZone::grid`].
pub const MAX_PATCH_WIDTH: f64 = PI / 8.0;
/// Nodes per patch in [`SectionZone::grid`]. Patches no wider than the distance to
/// the nearest singularity converge to roundoff well before this; more nodes
/// would only amplify rounding in the second derivative.
pub const SECTION_PATCH_NODES: usize = 24;
/// `|K|` below which a null-plane section counts as flat, and the spread above
/// which a section does not count as having constant curvature.
pub const K_SIGN_TOL: f64 = 1e-8;
pub const K_CONSTANCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    a: Covector4,
    c: f64,
}

impl Hyperplane {
    /// Stores `(a, c)` rescaled so that `max |a_i| = 1`.
    pub fn new(a: Covector4, c: f64) -> Result<Self> {
        if a.a.iter().chain([&c]).any(|v| !v.is_finite()) {
            return Err(Error::Config("hyperplane coefficients must be finite".into()));
        }
        let scale = a.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::Config("hyperplane normal must be nonzero".into()));
        }
        let a = Covector4 { a: a.a.map(|v| v / scale) };
        Ok(Hyperplane { a, c: c / scale })
    }

    pub fn from_coefficients(a: [f64; 4], c: f64) -> Result<Self> {
        Self::new(Covector4 { a }, c)
    }

    pub fn normal(&self) -> &Covector4 {
        &self.a
    }

    pub fn offset(&self) -> f64 {
        self.c
    }

    /// `a·x − c`.
    pub fn residual(&self, x: &EventRect) -> f64 {
        self.a.pair(x) - self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlaneClass {
    SpacelikePlane,
    NullPlane,
    TimelikePlane,
}

pub fn classify_hyperplane(h: &Hyperplane) -> PlaneClass {
    let n = causal_norm_sq(h.normal());
    if n < -CAUSAL_TOL {
        PlaneClass::SpacelikePlane
    } else if n > CAUSAL_TOL {
        PlaneClass::TimelikePlane
    } else {
        PlaneClass::NullPlane
    }
}

/// The intersection of the cone with a hyperplane, in the rotated angular frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionZone {
    /// Section function `f(θ) = c / (b cos θ − a0)` in the rotated frame.
    b: f64,
    a0: f64,
    c: f64,
    /// Zone is `(theta_star, π]`; `theta_star = 0` with `closed` means every direction.
    pub theta_star: f64,
    pub closed: bool,
    /// Takes lab directions to rotated-frame directions.
    rotation: Rotation3<f64>,
}

impl SectionZone {
    pub fn of(h: &Hyperplane) -> Result<Self> {
        let a0 = h.a.a[0];
        let c = h.c;
        let av = Vector3::new(h.a.a[1], h.a.a[2], h.a.a[3]);
        let alpha = av.norm();
        if c == 0.0 {
            return Err(Error::EmptySection("the plane passes through the vertex".into()));
        }
        // Denominator a⃗·ω − a0 = −σα cos θ − a0 on the axis e = −σ a⃗/α.
        let ok = |sigma: f64| (sigma * alpha - a0) * c > 0.0;
        let sigma = if ok(-1.0) {
            -1.0
        } else if ok(1.0) {
            1.0
        } else {
            return Err(Error::EmptySection("the plane does not meet the past lightcone".into()));
        };
        let rotation = if alpha == 0.0 {
            Rotation3::identity()
        } else {
            let e = -sigma * av / alpha;
            Rotation3::rotation_between(&e, &Vector3::z())
                .unwrap_or_else(|| Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::x()), PI))
        };
        let b = -sigma * alpha;
        // Denominator at θ = 0 decides whether the zone closes up.
        let closed = (b - a0) * c > 0.0;
        let theta_star = if closed { 0.0 } else { (a0 / b).clamp(-1.0, 1.0).acos() };
        Ok(SectionZone { b, a0, c, theta_star, closed, rotation })
    }

    /// Section function at rotated polar angle `θ`; `None` outside the zone.
    pub fn f(&self, theta: f64) -> Option<f64> {
        let d = self.b * theta.cos() - self.a0;
        let f = self.c / d;
        (f > 0.0 && f.is_finite()).then_some(f)
    }

    /// Lab-frame unit direction of the rotated-frame angles `(θ, φ)`.
    pub fn lab_direction(&self, theta: f64, phi: f64) -> [f64; 3] {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let w = self.rotation.inverse() * Vector3::new(st * cp, st * sp, ct);
        [w.x, w.y, w.z]
    }

    /// Lab-frame event of the section above rotated angles `(θ, φ)`.
    pub fn event(&self, theta: f64, phi: f64) -> Result<EventRect> {
        let f = self
            .f(theta)
            .ok_or_else(|| Error::Domain(format!("theta = {theta} lies outside the section zone")))?;
        let w = self.lab_direction(theta, phi);
        Ok(EventRect::new(-f, f * w[0], f * w[1], f * w[2]))
    }

    /// Distance from the real segment `[lo, hi]` to the nearest complex zero of the
    /// denominator `b cos θ − a0`.
    fn singular_distance(&self, lo: f64, hi: f64) -> f64 {
        if self.b == 0.0 {
            return f64::INFINITY;
        }
        let root = Complex64::new(self.a0 / self.b, 0.0).acos();
        let mut best = f64::INFINITY;
        for k in -1..=1 {
            let shift = Complex64::new(2.0 * PI * k as f64, 0.0);
            for z in [root + shift, -root + shift] {
                let nearest = z.re.clamp(lo, hi);
                best = best.min((z - nearest).norm());
            }
        }
        best
    }

    /// Axisymmetric grid on the zone with its edge trimmed by `margin`.
    ///
    /// Patches of [`SECTION_PATCH_NODES`] nodes are graded so that none is wider
    /// than its distance to the nearest complex singularity of the section
    /// function, nor wider than [`MAX_PATCH_WIDTH`].
    pub fn grid(&self, margin: f64) -> Result<Arc<SphereGrid>> {
        if !(margin >= 0.0) {
            return Err(Error::Config(format!("edge margin must be nonnegative, got {margin}")));
        }
        let lo = if self.closed { 0.0 } else { self.theta_star + margin };
        if lo >= PI {
            return Err(Error::EmptySection(format!(
                "zone ({:.6}, pi] is empty after trimming by {margin}",
                self.theta_star
            )));
        }
        let mut breaks = vec![lo];
        let mut x = lo;
        while x < PI {
            let mut w = self.singular_distance(x, x).min(MAX_PATCH_WIDTH);
            if w <= 0.0 {
                return Err(Error::Resolution(format!("section function is singular at theta = {x}")));
            }
            // Split a remainder of under two patches evenly so none ends up thin.
            let left = PI - x;
            if left <= 2.0 * w {
                w = if left <= 1.25 * w { left } else { left / 2.0 };
            }
            while w > self.singular_distance(x, (x + w).min(PI)) {
                w *= 0.8;
            }
            x = if PI - x - w < 1e-12 { PI } else { x + w };
            breaks.push(x);
        }
        SphereGrid::axisym_patched(&breaks, SECTION_PATCH_NODES)
    }
}

/// Section function of `h` sampled on `grid`, whose angles are read in the rotated frame.
pub fn intersect_cone(h: &Hyperplane, grid: &Arc<SphereGrid>) -> Result<SectionSpec> {
    let zone = SectionZone::of(h)?;
    if !zone.closed && grid.theta_min() <= zone.theta_star {
        return Err(Error::Domain(format!(
            "grid starts at theta = {} but the section only exists for theta > {}",
            grid.theta_min(),
            zone.theta_star
        )));
    }
    let values: Vec<f64> = grid
        .nodes()
        .map(|(t, _)| zone.f(t).ok_or_else(|| Error::Domain(format!("no section point at theta = {t}"))))
        .collect::<Result<_>>()?;
    let noncompact = !zone.closed;
    Ok(SectionSpec::new(ScalarField::new(grid, values)?)?.with_noncompact(noncompact))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrichotomyReport {
    pub plane_class: PlaneClass,
    /// Midrange of the measured Gauss curvature over the zone.
    #[serde(rename = "K_value")]
    pub k_value: f64,
    /// `max K − min K` over the zone.
    #[serde(rename = "K_deviation")]
    pub k_deviation: f64,
    pub k_constant: bool,
    /// Sign of `K` matches the causal type of the plane.
    pub sign_consistent: bool,
    pub expansions: ExpansionMargins,
    pub classification: Classification,
    pub domain: SectionDomain,
}

pub fn trichotomy_report(h: &Hyperplane, grid: &Arc<SphereGrid>, tol: f64) -> Result<TrichotomyReport> {
    let plane_class = classify_hyperplane(h);
    let spec = intersect_cone(h, grid)?;
    let geo = SectionGeometry::compute(&spec, tol)?;
    let (kmin, kmax) = (geo.gauss_k.min(), geo.gauss_k.max());
    let k_value = 0.5 * (kmin + kmax);
    let sign_consistent = match plane_class {
        PlaneClass::SpacelikePlane => kmin > 0.0,
        PlaneClass::NullPlane => kmin.abs().max(kmax.abs()) <= K_SIGN_TOL,
        PlaneClass::TimelikePlane => kmax < 0.0,
    };
    Ok(TrichotomyReport {
        plane_class,
        k_value,
        k_deviation: kmax - kmin,
        k_constant: kmax - kmin <= K_CONSTANCY_TOL,
        sign_consistent,
        expansions: geo.margins,
        classification: geo.classification,
        domain: spec.domain(),
    })
}
