//! The Green's function `w = 2 log sin(θ/2)` of the round Laplacian with pole at
//! `θ = 0`, its conformal factor `e^{−w} = 2/(1 − cos θ)`, and the marginally
//! trapped section `S_{e^{−w}}` that lies in the null hyperplane `x0 + x3 = −2`.
//!
//! `Δ̊w + 1 = 4πδ_N` holds weakly: for smooth `ψ`,
//! `∫ w Δ̊ψ dA + ∫ ψ dA = 4π ψ(N)`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::EventRect;
use crate::section::{gauss_curvature, SectionSpec};
use crate::sphere::{integrate, laplacian, north_pole_value, GridMode, ScalarField, SphereGrid};

/// `∫ w dA` over the unit sphere.
pub const GREEN_MASS: f64 = -4.0 * PI;

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::Domain(format!("theta must lie in (0, pi], got {theta}")));
    }
    Ok(())
}

pub fn greens_w(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(2.0 * (theta / 2.0).sin().ln())
}

/// `e^{−w} = 2/(1 − cos θ)`, evaluated as `sin⁻²(θ/2)` to avoid cancellation.
pub fn conformal_factor(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((theta / 2.0).sin().powi(-2))
}

pub fn greens_field(grid: &Arc<SphereGrid>) -> Result<ScalarField> {
    ScalarField::from_fn(grid, |t, _| 2.0 * (t / 2.0).sin().ln())
}

/// `∫ w ψ dA` on a full-sphere grid.
///
/// Gauss–Legendre quadrature of `w ψ` only converges algebraically because of the
/// logarithm at the pole, so the pole value is split off:
/// `∫ w ψ = ∫ w (ψ − ψ(N)) + ψ(N) ∫ w`, where the first integrand vanishes at the
/// singularity.
pub fn pair_with_green(psi: &ScalarField) -> Result<f64> {
    let grid = psi.grid();
    if grid.mode() != GridMode::FullSphere {
        return Err(Error::Config("pairing with w needs a full-sphere grid".into()));
    }
    let pole = north_pole_value(psi)?;
    let w = greens_field(grid)?;
    let reduced = w.zip_map(psi, |wv, p| wv * (p - pole))?;
    Ok(integrate(&reduced) + pole * GREEN_MASS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionalResidual {
    /// `∫ w Δ̊ψ dA`
    pub green_pairing: f64,
    /// `∫ ψ dA`
    pub mass: f64,
    /// `ψ(N)`
    pub pole_value: f64,
    /// `|∫ w Δ̊ψ dA + ∫ ψ dA − 4π ψ(N)|`
    pub residual: f64,
}

/// Weak form of `Δ̊w + 1 = 4πδ_N` tested against the bandlimited field `psi`.
pub fn distributional_residual(psi: &ScalarField) -> Result<DistributionalResidual> {
    let green_pairing = pair_with_green(&laplacian(psi)?)?;
    let mass = integrate(psi);
    let pole_value = north_pole_value(psi)?;
    let residual = (green_pairing + mass - 4.0 * PI * pole_value).abs();
    Ok(DistributionalResidual { green_pairing, mass, pole_value, residual })
}

/// The point of `S_{e^{−w}}` above direction `(θ, φ)`:
/// `(−2, 2 sin θ cos φ, 2 sin θ sin φ, 2 cos θ) / (1 − cos θ)`.
pub fn embed_marginal_section(theta: f64, phi: f64) -> Result<EventRect> {
    if theta == 0.0 {
        return Err(Error::BlowUp("the marginal section goes to infinity along theta = 0".into()));
    }
    check_theta(theta)?;
    let s = (theta / 2.0).sin();
    let inv = 1.0 / (s * s);
    let cot = 2.0 * (theta / 2.0).cos() / s;
    let (sp, cp) = phi.sin_cos();
    Ok(EventRect::new(-inv, cot * cp, cot * sp, theta.cos() * inv))
}

/// Writes `theta,phi,x0,x1,x2,x3` for every node of `grid`.
pub fn write_embedding_csv<W: Write>(grid: &SphereGrid, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Config(format!("write failed: {e}"));
    writeln!(out, "theta,phi,x0,x1,x2,x3").map_err(io)?;
    for (t, p) in grid.nodes() {
        let x = embed_marginal_section(t, p)?;
        writeln!(out, "{t:.16e},{p:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", x.x0, x.x1, x.x2, x.x3).map_err(io)?;
    }
    Ok(())
}

/// `‖K‖_∞` of `S_{e^{−w}}` over the zone of an axisymmetric grid.
pub fn flatness_check(grid: &Arc<SphereGrid>) -> Result<f64> {
    if grid.mode() != GridMode::AxisymTruncated {
        return Err(Error::Config("flatness check needs an axisymmetric grid".into()));
    }
    if grid.theta_min() <= 0.0 {
        return Err(Error::Config("the zone must exclude the pole theta = 0".into()));
    }
    let spec = SectionSpec::new(ScalarField::from_fn(grid, |t, _| (t / 2.0).sin().powi(-2))?)?;
    Ok(gauss_curvature(&spec)?.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(greens_w(PI).unwrap(), 0.0);
        assert!((conformal_factor(PI / 2.0).unwrap() - 2.0).abs() < 1e-15);
        for t in [0.2, 1.0, 2.0, 3.1] {
            let e = conformal_factor(t).unwrap();
            assert!((e - (-greens_w(t).unwrap()).exp()).abs() <= 1e-14 * e);
            assert!((e * (1.0 - t.cos()) - 2.0).abs() < 1e-12);
            assert!(greens_w(t).unwrap() < 0.0);
        }
        assert!(matches!(greens_w(0.0), Err(Error::Domain(_))));
        assert!(matches!(conformal_factor(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn embedding() {
        let x = embed_marginal_section(PI, 0.3).unwrap();
        assert!((x.x0 + 1.0).abs() < 1e-15 && x.x1.abs() < 1e-15 && x.x2.abs() < 1e-15 && (x.x3 + 1.0).abs() < 1e-15);
        let x = embed_marginal_section(PI / 2.0, 0.0).unwrap();
        assert!((x.x0 + 2.0).abs() < 1e-14 && (x.x1 - 2.0).abs() < 1e-14 && x.x2 == 0.0 && x.x3.abs() < 1e-14);
        for t in [1e-4, 0.01, 0.5, 2.0, 3.0] {
            for p in [0.0, 1.0, 4.0] {
                let x = embed_marginal_section(t, p).unwrap();
                let scale = x.x0.abs();
                assert!((x.x0 + x.x3 + 2.0).abs() <= 1e-12 * scale);
                assert!(x.interval_sq().abs() <= 1e-12 * scale * scale);
            }
        }
        assert!(matches!(embed_marginal_section(0.0, 0.0), Err(Error::BlowUp(_))));
    }

    #[test]
    fn green_pairings() {
        let g = SphereGrid::full_sphere(256, 8).unwrap();
        let one = ScalarField::constant(&g, 1.0).unwrap();
        assert!((pair_with_green(&one).unwrap() - GREEN_MASS).abs() < 1e-12);
        let cos = ScalarField::from_fn(&g, |t, _| t.cos()).unwrap();
        let p = pair_with_green(&cos).unwrap();
        assert!((p + 2.0 * PI).abs() < 1e-8, "{p}");
        assert!(distributional_residual(&one).unwrap().residual < 1e-12);
        assert!(distributional_residual(&cos).unwrap().residual < 1e-8);
    }

    #[test]
    fn flat_marginal_section() {
        let g = SphereGrid::axisym(256, 0.2).unwrap();
        assert!(flatness_check(&g).unwrap() <= 1e-8);
        let g = SphereGrid::axisym_graded(0.5, 32).unwrap();
        assert_eq!(g.breakpoints().unwrap(), vec![0.5, 1.0, 2.0, PI]);
        let k = flatness_check(&g).unwrap();
        assert!(k <= 1e-10, "{k}");
        let w = greens_field(&SphereGrid::axisym(256, 0.2).unwrap()).unwrap();
        assert!(laplacian(&w).unwrap().values().iter().all(|v| (v + 1.0).abs() <= 1e-8));
        assert!(flatness_check(&SphereGrid::full_sphere(16, 8).unwrap()).is_err());
    }
}
