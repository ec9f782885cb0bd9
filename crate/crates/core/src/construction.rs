//! Trapped sections built from the Green's function.
//!
//! For a cap scale `ε`, with `w_ε = w(ε)` and the cutoff `g_ε(θ) = g(θ/ε)`:
//!
//! ```text
//! log f_ε = −(1 + ε) w                          on [2ε, π]
//! log f_ε = −(1 − g_ε)(1 + ε) w − g_ε (1 + ε) w_ε   on [0, 2ε)
//! ```
//!
//! Away from the cap `Δ̊ log f_ε = 1 + ε`, so `tr χ̃ = −2ε/f_ε < 0` there. Inside the
//! cap the expansion is pushed negative by incoming energy exceeding
//! `k_ε = sup_{θ ≤ 2ε} f_ε (1 − Δ̊ log f_ε)`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::greens_w;
use crate::section::SectionSpec;
use crate::sphere::{laplacian, sup_on_cap, CapMaximum, ScalarField, SphereGrid, DEFAULT_PATCH_NODES};

/// Largest admissible cap scale.
pub const MAX_EPSILON: f64 = 0.3;
/// Fewest grid rows required inside the cap `θ ≤ 2ε`.
pub const MIN_CAP_NODES: usize = 32;
/// Patch breakpoints of [`construction_grid`] in the transition zone, in units of `ε`.
const TRANSITION_BREAKS: [f64; 7] = [1.0, 1.1, 1.3, 1.5, 1.7, 1.9, 2.0];
/// Smallest threshold used for the strict inequalities of [`verify_trapped`].
pub const STRICT_FLOOR: f64 = 1e-12;

/// A smooth cutoff: `1` on `[0, 1]`, `0` on `[2, ∞)`, decreasing in between.
pub trait Cutoff: Send + Sync {
    fn eval(&self, x: f64) -> f64;
}

/// `g(x) = h(2 − x) / (h(2 − x) + h(x − 1))` with `h(s) = e^{−1/s}` for `s > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpBlend;

fn bump_half(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl Cutoff for ExpBlend {
    fn eval(&self, x: f64) -> f64 {
        if x <= 1.0 {
            return 1.0;
        }
        if x >= 2.0 {
            return 0.0;
        }
        let a = bump_half(2.0 - x);
        a / (a + bump_half(x - 1.0))
    }
}

pub fn smooth_cutoff() -> ExpBlend {
    ExpBlend
}

/// `log f_ε(θ)` in closed form.
pub fn log_f_eps(epsilon: f64, theta: f64, cutoff: &dyn Cutoff) -> Result<f64> {
    let w = greens_w(theta)?;
    if theta >= 2.0 * epsilon {
        return Ok(-(1.0 + epsilon) * w);
    }
    let g = cutoff.eval(theta / epsilon);
    let w_eps = greens_w(epsilon)?;
    Ok(-(1.0 + epsilon) * ((1.0 - g) * w + g * w_eps))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= MAX_EPSILON) {
        return Err(Error::Config(format!("epsilon must lie in (0, {MAX_EPSILON}], got {epsilon}")));
    }
    Ok(())
}

/// Axisymmetric grid adapted to `f_ε`: one patch on `[0, ε]`, six on the transition
/// zone (narrower next to `ε` and `2ε`, where the cutoff is flat to all orders), then
/// doubling widths `2ε, 4ε, 8ε, …` up to `π`.
pub fn construction_grid(epsilon: f64) -> Result<Arc<SphereGrid>> {
    check_epsilon(epsilon)?;
    let mut breaks = vec![0.0];
    breaks.extend(TRANSITION_BREAKS.iter().map(|b| b * epsilon));
    let mut x = 2.0 * epsilon;
    while 2.0 * x < PI {
        x *= 2.0;
        breaks.push(x);
    }
    if PI - x < 0.5 * x && breaks.len() > TRANSITION_BREAKS.len() + 1 {
        breaks.pop();
    }
    breaks.push(PI);
    SphereGrid::axisym_patched(&breaks, DEFAULT_PATCH_NODES)
}

/// Threshold `k_ε` and where the supremum is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KEps {
    pub value: f64,
    pub theta: f64,
    /// Grid rows inside the cap, the resolution the supremum was taken at.
    pub cap_rows: usize,
}

#[derive(Debug, Clone)]
pub struct EpsConstruction {
    pub epsilon: f64,
    pub log_f: ScalarField,
    pub f: ScalarField,
    pub k_eps: Option<KEps>,
}

impl EpsConstruction {
    pub fn cap_boundary(&self) -> f64 {
        2.0 * self.epsilon
    }

    /// `f_ε` near the pole, where `log f_ε` is constant.
    pub fn f_at_pole(&self) -> f64 {
        self.f.values()[0]
    }

    pub fn spec(&self) -> Result<SectionSpec> {
        SectionSpec::new(self.f.clone())
    }

    /// `f_ε (1 − Δ̊ log f_ε)`, the integrand of `k_ε`.
    pub fn threshold_integrand(&self) -> Result<ScalarField> {
        let lap = laplacian(&self.log_f)?;
        self.f.zip_map(&lap, |f, l| f * (1.0 - l))
    }

    /// `sup |Δ̊ log f_ε|` over the transition zone `[ε, 2ε]`, at the nodes.
    pub fn transition_laplacian_sup(&self) -> Result<f64> {
        let lap = laplacian(&self.log_f)?.map(f64::abs)?;
        lap.max_in_zone(self.epsilon, 2.0 * self.epsilon)
            .map(|(v, _)| v)
            .ok_or_else(|| Error::Resolution("no nodes in the transition zone".into()))
    }

    /// Fills [`EpsConstruction::k_eps`].
    pub fn with_k_eps(mut self) -> Result<Self> {
        self.k_eps = Some(compute_k_eps(&self)?);
        Ok(self)
    }

    /// [`verify_trapped`] split at `2ε`, also reporting `max |tr χ̃ + 2ε/f_ε|` outside the cap.
    pub fn verify(&self, k: &EnergyProfile, margin: f64) -> Result<TrappedReport> {
        let mut report = verify_trapped(&self.spec()?, k, margin, self.cap_boundary())?;
        let lap = laplacian(&self.log_f)?;
        let eps = self.epsilon;
        let identity = self.f.zip_map(&lap, |f, l| (2.0 / f * (1.0 - l) + 2.0 * eps / f).abs())?;
        report.outer_identity = identity.max_in_zone(self.cap_boundary(), PI).map(|(v, _)| v);
        Ok(report)
    }
}

pub fn build_f_eps(epsilon: f64, grid: &Arc<SphereGrid>) -> Result<EpsConstruction> {
    build_f_eps_with(epsilon, grid, &ExpBlend)
}

pub fn build_f_eps_with(epsilon: f64, grid: &Arc<SphereGrid>, cutoff: &dyn Cutoff) -> Result<EpsConstruction> {
    check_epsilon(epsilon)?;
    if grid.theta_min() != 0.0 {
        return Err(Error::Config("the construction needs a grid reaching the pole".into()));
    }
    let cap_nodes = grid.theta_nodes().iter().filter(|&&t| t <= 2.0 * epsilon).count();
    if cap_nodes < MIN_CAP_NODES {
        return Err(Error::Resolution(format!(
            "cap theta <= {} holds {cap_nodes} rows, need at least {MIN_CAP_NODES}",
            2.0 * epsilon
        )));
    }
    let values: Vec<f64> = grid.nodes().map(|(t, _)| log_f_eps(epsilon, t, cutoff)).collect::<Result<_>>()?;
    let log_f = ScalarField::new(grid, values)?;
    let f = log_f.map(f64::exp)?;
    Ok(EpsConstruction { epsilon, log_f, f, k_eps: None })
}

/// `k_ε = sup_{θ ≤ 2ε} f_ε (1 − Δ̊ log f_ε)`, refined on the collocation interpolant.
pub fn compute_k_eps(construction: &EpsConstruction) -> Result<KEps> {
    let integrand = construction.threshold_integrand()?;
    let CapMaximum { value, theta, cap_rows, .. } = sup_on_cap(&integrand, construction.cap_boundary())?;
    Ok(KEps { value, theta, cap_rows })
}

/// Incoming energy per solid angle, `k ≥ 0`.
#[derive(Debug, Clone)]
pub struct EnergyProfile {
    k: ScalarField,
}

impl EnergyProfile {
    pub fn new(k: ScalarField) -> Result<Self> {
        if let Some(v) = k.values().iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Domain(format!("energy profile must be nonnegative, found {v}")));
        }
        Ok(EnergyProfile { k })
    }

    pub fn zero(grid: &Arc<SphereGrid>) -> Result<Self> {
        Self::new(ScalarField::constant(grid, 0.0)?)
    }

    pub fn constant(grid: &Arc<SphereGrid>, value: f64) -> Result<Self> {
        Self::new(ScalarField::constant(grid, value)?)
    }

    /// `value` on the cap `θ ≤ theta_max`, zero elsewhere.
    pub fn cap_indicator(grid: &Arc<SphereGrid>, value: f64, theta_max: f64) -> Result<Self> {
        Self::new(ScalarField::from_fn(grid, |t, _| if t <= theta_max { value } else { 0.0 })?)
    }

    pub fn field(&self) -> &ScalarField {
        &self.k
    }
}

/// Largest value of a field over a θ-zone and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneExtreme {
    pub value: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrappedReport {
    pub trapped: bool,
    /// Both bounds must lie below `−threshold`.
    pub threshold: f64,
    /// Zone boundary between the cap and the outer region.
    pub split: f64,
    /// `max (2/f)(1 − Δ̊ log f) − 2k/f²` over `θ ≤ split`.
    pub cap: Option<ZoneExtreme>,
    /// The same bound over `θ ≥ split`.
    pub outer: Option<ZoneExtreme>,
    /// `max (−2/f)` over the whole section.
    pub chibar: ZoneExtreme,
    /// `max |tr χ̃ + 2ε/f|` over `θ ≥ 2ε` for `f = f_ε`.
    pub outer_identity: Option<f64>,
}

/// Checks `(2/f)(1 − Δ̊ log f) − 2k/f² < −margin` and `−2/f < −margin` everywhere.
///
/// `margin` is raised to at least [`STRICT_FLOOR`] so that the inequalities stay strict.
pub fn verify_trapped(f: &SectionSpec, k: &EnergyProfile, margin: f64, split: f64) -> Result<TrappedReport> {
    let fv = f.f();
    fv.check_same_grid(k.field())?;
    let lap = laplacian(&fv.map(f64::ln)?)?;
    let grid = fv.grid();
    let upper: Vec<f64> = (0..grid.len())
        .map(|i| {
            let (f, l, kv) = (fv.values()[i], lap.values()[i], k.field().values()[i]);
            2.0 / f * (1.0 - l) - 2.0 * kv / (f * f)
        })
        .collect();
    let upper = ScalarField::new(grid, upper)?;
    let chibar = fv.map(|v| -2.0 / v)?;

    let extreme = |field: &ScalarField, lo: f64, hi: f64| {
        field.max_in_zone(lo, hi).map(|(value, i)| {
            let (theta, phi) = grid.node(i);
            ZoneExtreme { value, theta, phi }
        })
    };
    let cap = extreme(&upper, 0.0, split);
    let outer = extreme(&upper, split, PI);
    let chibar = extreme(&chibar, 0.0, PI).ok_or_else(|| Error::EmptySection("grid has no nodes".into()))?;
    let threshold = margin.max(STRICT_FLOOR);
    let trapped = upper.max() < -threshold && chibar.value < -threshold;
    Ok(TrappedReport { trapped, threshold, split, cap, outer, chibar, outer_identity: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub f_eps_at_0: f64,
    pub k_eps: f64,
    pub k_eps_theta: f64,
    /// `sup |Δ̊ log f_ε|` over `[ε, 2ε]`.
    pub transition_laplacian_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Least-squares slopes of `log f_ε(0)` and `log k_ε` against `log ε`.
    pub slope_f: f64,
    pub slope_k: f64,
}

impl ScanTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epsilon,f_eps_at_0,k_eps,slope_f,slope_k")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.epsilon, r.f_eps_at_0, r.k_eps, self.slope_f, self.slope_k
            )?;
        }
        Ok(())
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Builds `f_ε` and `k_ε` for every `ε` (in parallel) and fits the scaling exponents.
pub fn asymptotic_scan(eps_list: &[f64]) -> Result<ScanTable> {
    if eps_list.len() < 2 {
        return Err(Error::Config("a scan needs at least two values of epsilon".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("epsilon values must be strictly decreasing".into()));
    }
    let rows: Vec<ScanRow> = eps_list
        .par_iter()
        .map(|&eps| {
            let grid = construction_grid(eps)?;
            let c = build_f_eps(eps, &grid)?;
            let k = compute_k_eps(&c)?;
            Ok(ScanRow {
                epsilon: eps,
                f_eps_at_0: c.f_at_pole(),
                k_eps: k.value,
                k_eps_theta: k.theta,
                transition_laplacian_sup: c.transition_laplacian_sup()?,
            })
        })
        .collect::<Result<_>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let slope_f = loglog_slope(&eps, &rows.iter().map(|r| r.f_eps_at_0).collect::<Vec<_>>());
    let slope_k = loglog_slope(&eps, &rows.iter().map(|r| r.k_eps).collect::<Vec<_>>());
    Ok(ScanTable { rows, slope_f, slope_k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        let g = smooth_cutoff();
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(2.0), 0.0);
        assert_eq!(g.eval(7.0), 0.0);
        assert!((g.eval(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 1..1000 {
            let x = 1.0 + k as f64 / 1000.0;
            let v = g.eval(x);
            // Next to the ends the blend is within rounding of 0 or 1.
            if (1.05..=1.95).contains(&x) {
                assert!(v < prev);
            } else {
                assert!(v <= prev);
            }
            prev = v;
        }
        let h = 1e-3;
        for x in [1.0, 2.0] {
            let left = (g.eval(x) - g.eval(x - h)) / h;
            let right = (g.eval(x + h) - g.eval(x)) / h;
            assert!((left - right).abs() < 1e-6);
        }
    }

    #[test]
    fn f_eps_closed_form_values() {
        let eps = 0.1;
        let cut = smooth_cutoff();
        assert_eq!(log_f_eps(eps, PI, &cut).unwrap(), 0.0);
        let expect = (2.0 / (1.0 - eps.cos())).powf(1.0 + eps).ln();
        assert!((log_f_eps(eps, 1e-6, &cut).unwrap() - expect).abs() < 1e-12);
        assert!((log_f_eps(eps, 0.7 * eps, &cut).unwrap() - expect).abs() < 1e-12);
        let at = log_f_eps(eps, 2.0 * eps, &cut).unwrap();
        let below = log_f_eps(eps, 2.0 * eps - 1e-12, &cut).unwrap();
        assert!((at - below).abs() < 1e-9);
    }

    #[test]
    fn construction_and_outer_identity() {
        let eps = 0.1;
        let grid = construction_grid(eps).unwrap();
        let c = build_f_eps(eps, &grid).unwrap();
        let expect = (2.0 / (1.0 - eps.cos())).powf(1.0 + eps);
        assert!((c.f_at_pole() - expect).abs() < 1e-12 * expect);
        let lap = laplacian(&c.log_f).unwrap();
        for (k, (t, _)) in grid.nodes().enumerate() {
            if t >= 2.0 * eps + 0.05 {
                assert!((lap.values()[k] - (1.0 + eps)).abs() <= 1e-8, "theta {t}: {}", lap.values()[k]);
            }
            if t <= eps {
                assert!(lap.values()[k].abs() < 1e-9);
            }
        }
        assert!(matches!(build_f_eps(eps, &SphereGrid::axisym(64, 0.0).unwrap()), Err(Error::Resolution(_))));
        assert!(build_f_eps(0.5, &grid).is_err());
    }

    #[test]
    fn threshold_bounds() {
        let eps = 0.1;
        let grid = construction_grid(eps).unwrap();
        let c = build_f_eps(eps, &grid).unwrap();
        let k = compute_k_eps(&c).unwrap();
        assert!(k.value >= c.f_at_pole());
        assert!(k.theta > eps && k.theta < 2.0 * eps);
    }

    #[test]
    fn round_sphere_threshold() {
        let grid = SphereGrid::axisym(64, 0.0).unwrap();
        let spec = SectionSpec::new(ScalarField::constant(&grid, 1.0).unwrap()).unwrap();
        for (k0, trapped) in [(0.5, false), (1.0, false), (1.01, true), (3.0, true)] {
            let k = EnergyProfile::constant(&grid, k0).unwrap();
            let r = verify_trapped(&spec, &k, 0.0, 1.0).unwrap();
            assert_eq!(r.trapped, trapped, "k = {k0}");
        }
    }

    #[test]
    fn construction_is_trapped_only_with_energy() {
        let eps = 0.1;
        let grid = construction_grid(eps).unwrap();
        let c = build_f_eps(eps, &grid).unwrap();
        let k_eps = compute_k_eps(&c).unwrap().value;
        let r0 = c.verify(&EnergyProfile::zero(&grid).unwrap(), 0.0).unwrap();
        assert!(!r0.trapped && r0.cap.unwrap().value > 0.0);
        let k = EnergyProfile::cap_indicator(&grid, 1.1 * k_eps, 2.0 * eps).unwrap();
        let r = c.verify(&k, 0.0).unwrap();
        assert!(r.trapped);
        assert!(r.outer_identity.unwrap() < 1e-8);
        let fmax = c.f.max();
        assert!(-r.outer.unwrap().value >= 2.0 * eps / fmax * (1.0 - 1e-6));
    }

    #[test]
    fn slopes() {
        let x = [1.0, 2.0, 4.0];
        let y = [3.0, 12.0, 48.0];
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-14);
        assert!(asymptotic_scan(&[0.1, 0.2]).is_err());
    }
}
