//! Geometry of graph sections `S_f = {u = −f(θ, φ), v = 0}` of the past lightcone.
//!
//! For the null frame `L̲̃ = ∂u`, `L̃` normalised by `η(L̃, L̲̃) = −2`:
//!
//! ```text
//! tr χ̲̃ = −2/f
//! tr χ̃  = 2/f − 2 Δ_{S_f} f + (2/f)|df|²_{f²γ̊}  =  (2/f)(1 − Δ̊ log f)
//! K     = f⁻²(1 − Δ̊ log f) = −¼ tr χ̃ tr χ̲̃
//! ```
//!
//! The induced metric is `f² γ̊`, so operators of the section are obtained from the
//! round ones by two-dimensional conformal covariance (`Δ_{f²γ̊} = f⁻² Δ̊`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{coordinate_basis, eta};
use crate::sphere::{gradient, gradient_sq, laplacian, tail_ratio, GridMode, ScalarField};

/// Largest admissible trailing-coefficient ratio of `f` for a resolved section.
pub const RESOLUTION_TOL: f64 = 1e-10;
/// Agreement required between the two evaluations of `tr χ̃`, relative to the
/// size of the terms of the direct form.
pub const PATH_AGREEMENT_TOL: f64 = 1e-9;
/// Default threshold below which an expansion counts as identically zero.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-8;

/// Which part of the sphere a section is represented on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionDomain {
    pub mode: GridMode,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Every direction is represented by the grid.
    pub closed: bool,
    /// The geometric surface is not compact (it leaves every bounded region of the cone).
    pub noncompact: bool,
}

#[derive(Debug, Clone)]
pub struct SectionSpec {
    f: ScalarField,
    noncompact: bool,
}

impl SectionSpec {
    pub fn new(f: ScalarField) -> Result<Self> {
        let fmin = f.min();
        if !(fmin > 0.0) {
            return Err(Error::Domain(format!("section function must be positive, min f = {fmin}")));
        }
        let tail = tail_ratio(&f);
        if tail > RESOLUTION_TOL {
            return Err(Error::Resolution(format!(
                "section function not resolved: trailing coefficient ratio {tail:.3e} > {RESOLUTION_TOL:.0e}"
            )));
        }
        Ok(SectionSpec { f, noncompact: false })
    }

    pub fn from_fn(grid: &std::sync::Arc<crate::sphere::SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::new(ScalarField::from_fn(grid, f)?)
    }

    /// Marks the represented surface as a piece of a noncompact section.
    pub fn with_noncompact(mut self, noncompact: bool) -> Self {
        self.noncompact = noncompact;
        self
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn domain(&self) -> SectionDomain {
        let g = self.f.grid();
        SectionDomain {
            mode: g.mode(),
            theta_min: g.theta_min(),
            theta_max: PI,
            closed: g.is_closed(),
            noncompact: self.noncompact,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NullExpansionPair {
    pub tr_chi: ScalarField,
    pub tr_chibar: ScalarField,
    /// Sup-norm disagreement between the `Δ̊ log f` form and the direct form of
    /// `tr χ̃`, relative to the sup of the magnitudes of the direct form's terms.
    pub path_discrepancy: f64,
}

/// `tr χ̃` through `Δ̊ log f`, checked against the direct form.
pub fn null_expansions(spec: &SectionSpec) -> Result<NullExpansionPair> {
    let f = spec.f();
    let log_f = f.map(f64::ln)?;
    let lap_log = laplacian(&log_f)?;
    let tr_chi = f.zip_map(&lap_log, |fv, l| 2.0 / fv * (1.0 - l))?;
    let tr_chibar = f.map(|fv| -2.0 / fv)?;

    let (raw, scale) = direct_tr_chi(f)?;
    let scale_max = scale.iter().copied().fold(0.0, f64::max);
    let diff_max = tr_chi.values().iter().zip(raw.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let path_discrepancy = if scale_max > 0.0 { diff_max / scale_max } else { 0.0 };
    if path_discrepancy > PATH_AGREEMENT_TOL {
        return Err(Error::Resolution(format!(
            "the two tr chi evaluations disagree by {path_discrepancy:.3e} (relative)"
        )));
    }
    Ok(NullExpansionPair { tr_chi, tr_chibar, path_discrepancy })
}

/// `2/f − 2 f⁻² Δ̊f + 2 f⁻³ |d̊f|²` and the pointwise magnitude of its terms.
fn direct_tr_chi(f: &ScalarField) -> Result<(ScalarField, Vec<f64>)> {
    let lap = laplacian(f)?;
    let grad = gradient_sq(f)?;
    let mut raw = Vec::with_capacity(f.values().len());
    let mut scale = Vec::with_capacity(f.values().len());
    for ((fv, l), g) in f.values().iter().zip(lap.values()).zip(grad.values()) {
        let t = [2.0 / fv, -2.0 * l / (fv * fv), 2.0 * g / (fv * fv * fv)];
        raw.push(t.iter().sum());
        scale.push(t.iter().map(|x| x.abs()).sum());
    }
    Ok((ScalarField::new(f.grid(), raw)?, scale))
}

/// Direct-form `tr χ̃` (round Laplacian and gradient of `f` itself).
pub fn tr_chi_direct(spec: &SectionSpec) -> Result<ScalarField> {
    Ok(direct_tr_chi(spec.f())?.0)
}

/// Gauss curvature of the induced metric `f² γ̊`.
pub fn gauss_curvature(spec: &SectionSpec) -> Result<ScalarField> {
    let f = spec.f();
    let lap_log = laplacian(&f.map(f64::ln)?)?;
    f.zip_map(&lap_log, |fv, l| (1.0 - l) / (fv * fv))
}

/// Gauss-equation residual `K + ¼ tr χ̃ tr χ̲̃` on the Minkowski cone (`ρ = 0`, `χ̲̂ = 0`).
///
/// `K` uses the `Δ̊ log f` route while `tr χ̃` uses the direct form, so the
/// residual measures the consistency of two independent evaluations.
pub fn gauss_residual(spec: &SectionSpec) -> Result<ScalarField> {
    let k = gauss_curvature(spec)?;
    let trc = tr_chi_direct(spec)?;
    let f = spec.f();
    let tcb = f.map(|fv| -2.0 / fv)?;
    let prod = trc.zip_map(&tcb, |a, b| 0.25 * a * b)?;
    k.zip_map(&prod, |a, b| a + b)
}

/// Components of the outgoing null normal `L̃` of `S_f` in the coordinate basis
/// `(∂u, ∂v, ∂θ, ∂φ)`; the ingoing normal is `L̲̃ = ∂u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullFrameCoeffs {
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Inner products that define the frame, evaluated through the rectangular embedding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameResiduals {
    /// `η(L̃, L̃)`
    pub null: f64,
    /// `η(L̃, L̲̃) + 2`
    pub normalisation: f64,
    /// `η(L̃, ∂̃θ)` and `η(L̃, ∂̃φ)`
    pub tangent_theta: f64,
    pub tangent_phi: f64,
}

impl NullFrameCoeffs {
    /// Frame at a point where `f`, `∂θf`, `∂φf` take the given values.
    pub fn from_derivatives(f: f64, f_theta: f64, f_phi: f64, theta: f64) -> Self {
        let s2 = theta.sin().powi(2);
        NullFrameCoeffs {
            u: (f_theta * f_theta + f_phi * f_phi / s2) / (f * f),
            v: 1.0,
            theta: -2.0 * f_theta / (f * f),
            phi: -2.0 * f_phi / (f * f * s2),
        }
    }

    /// Pushes the frame and the tangents `∂̃θ = ∂θ − f_θ ∂u`, `∂̃φ = ∂φ − f_φ ∂u`
    /// into rectangular components and evaluates the defining inner products.
    pub fn residuals(&self, f: f64, f_theta: f64, f_phi: f64, theta: f64, phi: f64) -> FrameResiduals {
        let [du, dv, dth, dph] = coordinate_basis(f, theta, phi);
        let comb = |c: [f64; 4]| -> [f64; 4] {
            let mut out = [0.0; 4];
            for (k, o) in out.iter_mut().enumerate() {
                *o = c[0] * du[k] + c[1] * dv[k] + c[2] * dth[k] + c[3] * dph[k];
            }
            out
        };
        let l = comb([self.u, self.v, self.theta, self.phi]);
        let t_th = comb([-f_theta, 0.0, 1.0, 0.0]);
        let t_ph = comb([-f_phi, 0.0, 0.0, 1.0]);
        FrameResiduals {
            null: eta(&l, &l),
            normalisation: eta(&l, &du) + 2.0,
            tangent_theta: eta(&l, &t_th),
            tangent_phi: eta(&l, &t_ph),
        }
    }
}

/// Null frame of `S_f` at grid node `node`.
pub fn null_frame(spec: &SectionSpec, node: usize) -> Result<NullFrameCoeffs> {
    let f = spec.f();
    if node >= f.values().len() {
        return Err(Error::Config(format!("node {node} out of range")));
    }
    let (ft, fp) = gradient(f)?;
    let theta = f.grid().node(node).0;
    Ok(NullFrameCoeffs::from_derivatives(f.values()[node], ft.values()[node], fp.values()[node], theta))
}

/// Curvature components of the spacetime in a null frame. Minkowski space is flat,
/// so the only value this type takes here is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullCurvature {
    pub alpha: [f64; 3],
    pub alphabar: [f64; 3],
    pub beta: [f64; 2],
    pub betabar: [f64; 2],
    pub rho: f64,
    pub sigma: f64,
}

impl NullCurvature {
    pub fn minkowski() -> Self {
        NullCurvature { alpha: [0.0; 3], alphabar: [0.0; 3], beta: [0.0; 2], betabar: [0.0; 2], rho: 0.0, sigma: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().chain(&self.alphabar).chain(&self.beta).chain(&self.betabar).all(|&c| c == 0.0)
            && self.rho == 0.0
            && self.sigma == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Trapped,
    MarginallyTrappedOutgoing,
    MarginallyTrappedIngoing,
    Untrapped,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionMargins {
    pub tr_chi_min: f64,
    pub tr_chi_max: f64,
    pub tr_chibar_min: f64,
    pub tr_chibar_max: f64,
}

#[derive(Debug, Clone)]
pub struct SectionGeometry {
    pub spec: SectionSpec,
    pub tr_chi: ScalarField,
    pub tr_chibar: ScalarField,
    pub gauss_k: ScalarField,
    pub curvature: NullCurvature,
    pub margins: ExpansionMargins,
    pub classification: Classification,
    pub path_discrepancy: f64,
}

impl SectionGeometry {
    pub fn compute(spec: &SectionSpec, tol: f64) -> Result<Self> {
        let pair = null_expansions(spec)?;
        let gauss_k = gauss_curvature(spec)?;
        let margins = ExpansionMargins {
            tr_chi_min: pair.tr_chi.min(),
            tr_chi_max: pair.tr_chi.max(),
            tr_chibar_min: pair.tr_chibar.min(),
            tr_chibar_max: pair.tr_chibar.max(),
        };
        let classification = classify_margins(&margins, tol);
        Ok(SectionGeometry {
            spec: spec.clone(),
            tr_chi: pair.tr_chi,
            tr_chibar: pair.tr_chibar,
            gauss_k,
            curvature: NullCurvature::minkowski(),
            margins,
            classification,
            path_discrepancy: pair.path_discrepancy,
        })
    }

    pub fn report(&self) -> GeometryReport {
        let f = self.spec.f();
        GeometryReport {
            f_min: f.min(),
            f_max: f.max(),
            tr_chi_min: self.margins.tr_chi_min,
            tr_chi_max: self.margins.tr_chi_max,
            tr_chibar_min: self.margins.tr_chibar_min,
            tr_chibar_max: self.margins.tr_chibar_max,
            k_min: self.gauss_k.min(),
            k_max: self.gauss_k.max(),
            classification: self.classification,
            domain: self.spec.domain(),
        }
    }
}

/// Serializable summary of a [`SectionGeometry`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub f_min: f64,
    pub f_max: f64,
    pub tr_chi_min: f64,
    pub tr_chi_max: f64,
    pub tr_chibar_min: f64,
    pub tr_chibar_max: f64,
    #[serde(rename = "K_min")]
    pub k_min: f64,
    #[serde(rename = "K_max")]
    pub k_max: f64,
    pub classification: Classification,
    pub domain: SectionDomain,
}

pub fn classify(geometry: &SectionGeometry, tol: f64) -> Classification {
    classify_margins(&geometry.margins, tol)
}

/// Sign-based classification from the extremes of both expansions.
///
/// Untrapped means the normal configuration `tr χ̃ > 0 > tr χ̲̃` everywhere.
pub fn classify_margins(m: &ExpansionMargins, tol: f64) -> Classification {
    let chi_abs = m.tr_chi_max.abs().max(m.tr_chi_min.abs());
    let chibar_abs = m.tr_chibar_max.abs().max(m.tr_chibar_min.abs());
    if m.tr_chi_max < -tol && m.tr_chibar_max < -tol {
        Classification::Trapped
    } else if chi_abs <= tol && m.tr_chibar_max < -tol {
        Classification::MarginallyTrappedOutgoing
    } else if chibar_abs <= tol && m.tr_chi_max < -tol {
        Classification::MarginallyTrappedIngoing
    } else if m.tr_chi_min > tol && m.tr_chibar_max < -tol {
        Classification::Untrapped
    } else {
        Classification::Mixed
    }
}

/// Which 2-metric `ρ² γ̊` the operators of the general transformation formula use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MetricSpec {
    /// `ρ = f`: the induced metric of the section in the flat limit.
    ConformalToGraph,
    /// `ρ` constant.
    Round { radius: f64 },
}

/// Background double-null data entering the transformation formula for `tr χ̃`.
///
/// One-forms and 2-tensors are given by coordinate components in `(θ, φ)`.
#[derive(Debug, Clone)]
pub struct BackgroundFields {
    pub omega: ScalarField,
    pub eta_theta: ScalarField,
    pub eta_phi: ScalarField,
    pub tr_chi: ScalarField,
    pub tr_chibar: ScalarField,
    /// `χ̲̂_θθ, χ̲̂_θφ, χ̲̂_φφ`
    pub chibar_hat: [ScalarField; 3],
    pub omegabar: ScalarField,
}

impl BackgroundFields {
    /// Data of the Minkowski cone sections seen from the graph `f`: `Ω = 1`,
    /// `η = 0`, `χ̲̂ = 0`, `ω̲ = 0`, `tr χ = 2/f`, `tr χ̲ = −2/f`.
    pub fn minkowski(f: &ScalarField) -> Result<Self> {
        let g = f.grid();
        let zero = ScalarField::constant(g, 0.0)?;
        Ok(BackgroundFields {
            omega: ScalarField::constant(g, 1.0)?,
            eta_theta: zero.clone(),
            eta_phi: zero.clone(),
            tr_chi: f.map(|v| 2.0 / v)?,
            tr_chibar: f.map(|v| -2.0 / v)?,
            chibar_hat: [zero.clone(), zero.clone(), zero.clone()],
            omegabar: zero,
        })
    }

    fn fields(&self) -> [&ScalarField; 9] {
        [
            &self.omega,
            &self.eta_theta,
            &self.eta_phi,
            &self.tr_chi,
            &self.tr_chibar,
            &self.chibar_hat[0],
            &self.chibar_hat[1],
            &self.chibar_hat[2],
            &self.omegabar,
        ]
    }
}

/// Output of [`transformation_general`]: the total and each right-hand-side term.
#[derive(Debug, Clone)]
pub struct TransformationTerms {
    pub tr_chi: ScalarField,
    pub background: ScalarField,
    /// `−2ΩΔf`
    pub laplacian: ScalarField,
    /// `−4Ω η·∇f`
    pub torsion: ScalarField,
    /// `−4Ω² χ̲̂(∇f, ∇f)`
    pub shear: ScalarField,
    /// `−Ω² tr χ̲ |∇f|²`
    pub ingoing_expansion: ScalarField,
    /// `−8Ω² ω̲ |∇f|²`
    pub omegabar: ScalarField,
}

/// Evaluates
/// `tr χ̃ = tr χ − 2ΩΔf − 4Ωη·∇f − 4Ω²χ̲̂(∇f,∇f) − Ω² tr χ̲ |∇f|² − 8Ω² ω̲ |∇f|²`
/// termwise, with `Δ`, `∇` and index raising taken in the metric `ρ²γ̊`.
pub fn transformation_general(bg: &BackgroundFields, f: &ScalarField, metric: MetricSpec) -> Result<TransformationTerms> {
    for field in bg.fields() {
        f.check_same_grid(field)?;
    }
    if let Some(k) = bg.omega.values().iter().position(|&o| !(o > 0.0)) {
        return Err(Error::Domain(format!("lapse must be positive, got {} at node {k}", bg.omega.values()[k])));
    }
    if let MetricSpec::Round { radius } = metric {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("metric radius must be positive, got {radius}")));
        }
    }
    let grid = f.grid();
    let lap = laplacian(f)?;
    let (ft, fp) = gradient(f)?;
    let n = grid.len();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for k in 0..n {
        let theta = grid.node(k).0;
        let s2 = theta.sin().powi(2);
        let rho = match metric {
            MetricSpec::ConformalToGraph => f.values()[k],
            MetricSpec::Round { radius } => radius,
        };
        let inv = 1.0 / (rho * rho);
        let (dft, dfp) = (ft.values()[k], fp.values()[k]);
        // ∇^a f
        let up_t = inv * dft;
        let up_p = inv * dfp / s2;
        let grad_sq = dft * up_t + dfp * up_p;
        let om = bg.omega.values()[k];
        let eta_dot = bg.eta_theta.values()[k] * up_t + bg.eta_phi.values()[k] * up_p;
        let h = [bg.chibar_hat[0].values()[k], bg.chibar_hat[1].values()[k], bg.chibar_hat[2].values()[k]];
        let shear = h[0] * up_t * up_t + 2.0 * h[1] * up_t * up_p + h[2] * up_p * up_p;

        out[0][k] = bg.tr_chi.values()[k];
        out[1][k] = -2.0 * om * inv * lap.values()[k];
        out[2][k] = -4.0 * om * eta_dot;
        out[3][k] = -4.0 * om * om * shear;
        out[4][k] = -om * om * bg.tr_chibar.values()[k] * grad_sq;
        out[5][k] = -8.0 * om * om * bg.omegabar.values()[k] * grad_sq;
    }
    let total: Vec<f64> = (0..n).map(|k| out.iter().map(|t| t[k]).sum()).collect();
    let [background, laplacian_t, torsion, shear, ingoing, omegabar] = out;
    Ok(TransformationTerms {
        tr_chi: ScalarField::new(grid, total)?,
        background: ScalarField::new(grid, background)?,
        laplacian: ScalarField::new(grid, laplacian_t)?,
        torsion: ScalarField::new(grid, torsion)?,
        shear: ScalarField::new(grid, shear)?,
        ingoing_expansion: ScalarField::new(grid, ingoing)?,
        omegabar: ScalarField::new(grid, omegabar)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::cone_point;
    use crate::sphere::SphereGrid;

    fn marginal(theta: f64) -> f64 {
        2.0 / (1.0 - theta.cos())
    }

    #[test]
    fn round_sections() {
        let g = SphereGrid::full_sphere(16, 32).unwrap();
        for c in [1.0, 2.5] {
            let spec = SectionSpec::from_fn(&g, |_, _| c).unwrap();
            let geo = SectionGeometry::compute(&spec, DEFAULT_CLASSIFY_TOL).unwrap();
            assert!(geo.tr_chi.values().iter().all(|v| (v - 2.0 / c).abs() < 1e-11));
            assert!(geo.tr_chibar.values().iter().all(|v| (v + 2.0 / c).abs() < 1e-15));
            assert!(geo.gauss_k.values().iter().all(|v| (v - 1.0 / (c * c)).abs() < 1e-11));
            assert_eq!(geo.classification, Classification::Untrapped);
            assert!(gauss_residual(&spec).unwrap().max_abs() < 1e-11);
            assert!(geo.curvature.is_zero());
        }
    }

    #[test]
    fn stereographic_section_is_marginal() {
        let g = SphereGrid::axisym(256, 0.2).unwrap();
        let spec = SectionSpec::from_fn(&g, |t, _| marginal(t)).unwrap().with_noncompact(true);
        let pair = null_expansions(&spec).unwrap();
        assert!(pair.tr_chi.max_abs() <= 1e-8);
        for (k, v) in pair.tr_chibar.values().iter().enumerate() {
            assert!((v - (g.node(k).0.cos() - 1.0)).abs() <= 1e-10);
        }
        assert!(gauss_curvature(&spec).unwrap().max_abs() <= 1e-8);
        assert!(gauss_residual(&spec).unwrap().max_abs() <= 1e-8);
        let geo = SectionGeometry::compute(&spec, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(geo.classification, Classification::MarginallyTrappedOutgoing);
        assert!(geo.report().domain.noncompact);
    }

    #[test]
    fn hyperbolic_section_is_trapped() {
        let lo = PI / 2.0 + 0.2;
        let breaks: Vec<f64> = (0..=8).map(|k| lo + (PI - lo) * k as f64 / 8.0).collect();
        let g = SphereGrid::axisym_patched(&breaks, 32).unwrap();
        let spec = SectionSpec::from_fn(&g, |t, _| -1.0 / t.cos()).unwrap().with_noncompact(true);
        let geo = SectionGeometry::compute(&spec, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(geo.classification, Classification::Trapped);
        assert!(geo.gauss_k.values().iter().all(|k| (k + 1.0).abs() < 1e-8));
        assert!(geo.report().domain.noncompact);
    }

    #[test]
    fn frame_on_examples() {
        let c = NullFrameCoeffs::from_derivatives(1.0, 0.0, 0.0, 1.0);
        assert_eq!((c.u, c.v, c.theta, c.phi), (0.0, 1.0, 0.0, 0.0));

        let g = SphereGrid::axisym(128, 0.2).unwrap();
        let spec = SectionSpec::from_fn(&g, |t, _| marginal(t)).unwrap();
        let (ft, _) = gradient(spec.f()).unwrap();
        for node in [3usize, 60, 127] {
            let t = g.node(node).0;
            let h = 1e-5;
            let fd = (marginal(t + h) - marginal(t - h)) / (2.0 * h);
            assert!((ft.values()[node] - fd).abs() <= 1e-8 * fd.abs().max(1.0));
            let frame = null_frame(&spec, node).unwrap();
            let f = marginal(t);
            assert!((frame.theta + 2.0 * fd / (f * f)).abs() <= 1e-8 * frame.theta.abs().max(1.0));
            let r = frame.residuals(f, ft.values()[node], 0.0, t, 0.0);
            assert!(r.null.abs() < 1e-10 && r.normalisation.abs() < 1e-10);
            assert!(r.tangent_theta.abs() < 1e-10 && r.tangent_phi.abs() < 1e-10);
        }
    }

    /// Independent evaluation of `tr χ̃ = γ^{ab} η(∂_a L̃, T_b)` from the embedding
    /// by central differences in (θ, φ).
    fn tr_chi_by_embedding(f: impl Fn(f64, f64) -> f64, theta: f64, phi: f64) -> f64 {
        let h = 1e-4;
        let fth = |t: f64, p: f64| (f(t + h, p) - f(t - h, p)) / (2.0 * h);
        let fph = |t: f64, p: f64| (f(t, p + h) - f(t, p - h)) / (2.0 * h);
        let frame_rect = |t: f64, p: f64| -> [f64; 4] {
            let fv = f(t, p);
            let c = NullFrameCoeffs::from_derivatives(fv, fth(t, p), fph(t, p), t);
            let [du, dv, dt, dp] = coordinate_basis(fv, t, p);
            let mut l = [0.0; 4];
            for k in 0..4 {
                l[k] = c.u * du[k] + c.v * dv[k] + c.theta * dt[k] + c.phi * dp[k];
            }
            l
        };
        let embed = |t: f64, p: f64| cone_point(-f(t, p), t, p).unwrap().as_array();
        let d = |g: &dyn Fn(f64, f64) -> [f64; 4], dt: f64, dp: f64| -> [f64; 4] {
            let a = g(theta + dt, phi + dp);
            let b = g(theta - dt, phi - dp);
            let mut o = [0.0; 4];
            for k in 0..4 {
                o[k] = (a[k] - b[k]) / (2.0 * h);
            }
            o
        };
        let tangents = [d(&embed, h, 0.0), d(&embed, 0.0, h)];
        let dl = [d(&frame_rect, h, 0.0), d(&frame_rect, 0.0, h)];
        let gmat = [
            [eta(&tangents[0], &tangents[0]), eta(&tangents[0], &tangents[1])],
            [eta(&tangents[1], &tangents[0]), eta(&tangents[1], &tangents[1])],
        ];
        let det = gmat[0][0] * gmat[1][1] - gmat[0][1] * gmat[1][0];
        let ginv = [[gmat[1][1] / det, -gmat[0][1] / det], [-gmat[1][0] / det, gmat[0][0] / det]];
        let mut tr = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                tr += ginv[a][b] * eta(&dl[a], &tangents[b]);
            }
        }
        tr
    }

    #[test]
    fn expansion_matches_embedding_oracle() {
        let f = |t: f64, p: f64| 1.3 + 0.3 * t.cos() + 0.2 * t.sin() * p.cos() + 0.1 * t.sin().powi(2) * (2.0 * p).sin();
        let g = SphereGrid::full_sphere(24, 48).unwrap();
        let spec = SectionSpec::from_fn(&g, f).unwrap();
        let pair = null_expansions(&spec).unwrap();
        for node in [40usize, 300, 700, 1000] {
            let (t, p) = g.node(node);
            let oracle = tr_chi_by_embedding(f, t, p);
            assert!((pair.tr_chi.values()[node] - oracle).abs() < 1e-6, "node {node}: {} vs {oracle}", pair.tr_chi.values()[node]);
        }
    }

    #[test]
    fn classification_rules() {
        let m = |a: f64, b: f64, c: f64, d: f64| ExpansionMargins { tr_chi_min: a, tr_chi_max: b, tr_chibar_min: c, tr_chibar_max: d };
        let tol = 1e-8;
        assert_eq!(classify_margins(&m(-2.0, -1.0, -3.0, -1.0), tol), Classification::Trapped);
        assert_eq!(classify_margins(&m(-1e-9, 1e-9, -3.0, -1.0), tol), Classification::MarginallyTrappedOutgoing);
        assert_eq!(classify_margins(&m(-2.0, -1.0, -1e-9, 0.0), tol), Classification::MarginallyTrappedIngoing);
        assert_eq!(classify_margins(&m(1.0, 2.0, -3.0, -1.0), tol), Classification::Untrapped);
        assert_eq!(classify_margins(&m(-1.0, 2.0, -3.0, -1.0), tol), Classification::Mixed);
    }

    #[test]
    fn frame_rescaling_preserves_classification() {
        let m = ExpansionMargins { tr_chi_min: -0.4, tr_chi_max: -0.1, tr_chibar_min: -2.0, tr_chibar_max: -0.5 };
        for a in [0.01, 0.5, 3.0, 100.0] {
            let scaled = ExpansionMargins {
                tr_chi_min: a * m.tr_chi_min,
                tr_chi_max: a * m.tr_chi_max,
                tr_chibar_min: m.tr_chibar_min / a,
                tr_chibar_max: m.tr_chibar_max / a,
            };
            assert_eq!(classify_margins(&scaled, 1e-12), classify_margins(&m, 1e-12));
        }
    }

    #[test]
    fn nonpositive_or_unresolved_sections_rejected() {
        let g = SphereGrid::full_sphere(16, 32).unwrap();
        assert!(matches!(SectionSpec::from_fn(&g, |t, _| t.cos()), Err(Error::Domain(_))));
        let z = SphereGrid::axisym(32, 0.01).unwrap();
        assert!(matches!(SectionSpec::from_fn(&z, |t, _| 1.0 / t), Err(Error::Resolution(_))));
    }

    #[test]
    fn transformation_formula_terms() {
        let g = SphereGrid::full_sphere(24, 48).unwrap();
        let f = ScalarField::from_fn(&g, |t, p| 1.2 + 0.3 * t.cos() + 0.1 * t.sin() * p.sin()).unwrap();
        let spec = SectionSpec::new(f.clone()).unwrap();
        let bg = BackgroundFields::minkowski(&f).unwrap();
        let out = transformation_general(&bg, &f, MetricSpec::ConformalToGraph).unwrap();
        let pair = null_expansions(&spec).unwrap();
        for (a, b) in out.tr_chi.values().iter().zip(pair.tr_chi.values()) {
            assert!((a - b).abs() < 1e-10);
        }

        let c = 0.7;
        let mut bg2 = bg.clone();
        bg2.omegabar = ScalarField::constant(&g, c).unwrap();
        let out2 = transformation_general(&bg2, &f, MetricSpec::ConformalToGraph).unwrap();
        let gs = gradient_sq(&f).unwrap();
        for k in 0..g.len() {
            let fv = f.values()[k];
            let expect = -8.0 * c * gs.values()[k] / (fv * fv);
            assert!((out2.tr_chi.values()[k] - out.tr_chi.values()[k] - expect).abs() < 1e-12);
        }

        let flat = ScalarField::constant(&g, 2.0).unwrap();
        let bg3 = BackgroundFields::minkowski(&flat).unwrap();
        let out3 = transformation_general(&bg3, &flat, MetricSpec::Round { radius: 1.0 }).unwrap();
        let dev = out3.tr_chi.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "{dev}");

        let mut bad = bg.clone();
        bad.omega = ScalarField::constant(&g, 0.0).unwrap();
        assert!(matches!(transformation_general(&bad, &f, MetricSpec::ConformalToGraph), Err(Error::Domain(_))));
        let other = SphereGrid::full_sphere(24, 48).unwrap();
        let f_other = ScalarField::constant(&other, 1.0).unwrap();
        assert!(matches!(transformation_general(&bg, &f_other, MetricSpec::ConformalToGraph), Err(Error::GridMismatch(_))));
    }
}
