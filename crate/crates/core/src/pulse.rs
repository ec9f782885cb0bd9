//! Short-pulse characteristic data on an outgoing cone and the focusing it drives.
//!
//! A seed `ψ₀(s, θ, φ)` is a symmetric tracefree 2×2 matrix, stored as its
//! components `(ψ₁₁, ψ₁₂)` and extended by zero to `s ≤ 0`. On `0 ≤ u̲ ≤ δ` the data
//! are `ψ = (δ^{1/2}/r0) ψ₀(u̲/δ)` and the conformal metric density is `m = exp ψ`.
//! The incoming energy density is `e = ⅛ |∂_u̲ m|²_m`.
//!
//! Everything here is the leading-order model. The `O(δ^{1/2})` corrections of the
//! existence theory are dropped.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{smooth_cutoff, Cutoff, EnergyProfile};
use crate::error::{Error, Result};
use crate::sphere::{gauss_legendre, GridMode, ScalarField, SphereGrid};

/// Components `(ψ₁₁, ψ₁₂)` of `[[ψ₁₁, ψ₁₂], [ψ₁₂, −ψ₁₁]]`.
pub type Tracefree = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Largest trace (and asymmetry) accepted by [`exp_tracefree`], relative to `max(1, |ψ|)`.
pub const TRACE_TOL: f64 = 1e-14;
/// Fewest Gauss–Legendre nodes in `u̲` used by [`energy_per_solid_angle`].
pub const MIN_QUADRATURE_NODES: usize = 64;
/// Step of the finite-difference energy route, as a fraction of `δ`.
pub const FD_STEP: f64 = 1e-3;
/// A Raychaudhuri step is unresolved once `|tr χ|·h` exceeds this.
pub const FOCUSING_STEP: f64 = 2.0;

/// A symmetric positive-definite 2×2 density, `det m = 1` when it is `exp ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDensity {
    pub m: Mat2,
}

impl MetricDensity {
    pub fn identity() -> Self {
        MetricDensity { m: [[1.0, 0.0], [0.0, 1.0]] }
    }

    /// Determinant with a compensated product, so the rounding of `m₁₂²` is not lost.
    pub fn det(&self) -> f64 {
        let [[a, b], [_, d]] = self.m;
        let bb = b * b;
        let err = b.mul_add(b, -bb);
        a.mul_add(d, -bb) - err
    }

    pub fn inverse(&self) -> Mat2 {
        let [[a, b], [_, d]] = self.m;
        let det = self.det();
        [[d / det, -b / det], [-b / det, a / det]]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.m[0][0] > 0.0 && self.det() > 0.0
    }

    /// `|A|²_m = m^{ac} m^{bd} A_ab A_cd`, i.e. `tr(m⁻¹ A m⁻¹ A)` for symmetric `A`.
    pub fn norm_sq(&self, a: &Mat2) -> f64 {
        let inv = self.inverse();
        let mut b = [[0.0; 2]; 2];
        for (i, row) in b.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = inv[i][0] * a[0][j] + inv[i][1] * a[1][j];
            }
        }
        b[0][0] * b[0][0] + 2.0 * b[0][1] * b[1][0] + b[1][1] * b[1][1]
    }
}

/// `sinh λ / λ`.
fn sinhc(l: f64) -> f64 {
    if l < 1e-3 {
        let l2 = l * l;
        1.0 + l2 / 6.0 + l2 * l2 / 120.0
    } else {
        l.sinh() / l
    }
}

/// `(λ cosh λ − sinh λ) / λ³`, the λ-derivative of `sinhc` divided by `λ`.
fn sinhc_prime_over(l: f64) -> f64 {
    if l < 0.1 {
        let l2 = l * l;
        1.0 / 3.0 + l2 / 30.0 + l2 * l2 / 840.0 + l2 * l2 * l2 / 45360.0
    } else {
        (l * l.cosh() - l.sinh()) / (l * l * l)
    }
}

/// `exp ψ = cosh λ I + (sinh λ/λ) ψ` with `λ = √(ψ₁₁² + ψ₁₂²)`.
pub fn exp_components(psi: Tracefree) -> MetricDensity {
    let [p, q] = psi;
    let l = p.hypot(q);
    let (c, s) = (l.cosh(), sinhc(l));
    MetricDensity { m: [[c + s * p, s * q], [s * q, c - s * p]] }
}

/// `exp ψ` for a symmetric tracefree matrix given in full.
pub fn exp_tracefree(psi: Mat2) -> Result<MetricDensity> {
    let norm = psi.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::Domain("psi has non-finite entries".into()));
    }
    let tol = TRACE_TOL * norm.max(1.0);
    let trace = psi[0][0] + psi[1][1];
    if trace.abs() > tol {
        return Err(Error::Domain(format!("psi must be tracefree, trace = {trace:e}")));
    }
    if (psi[0][1] - psi[1][0]).abs() > tol {
        return Err(Error::Domain("psi must be symmetric".into()));
    }
    Ok(exp_components([(psi[0][0] - psi[1][1]) / 2.0, (psi[0][1] + psi[1][0]) / 2.0]))
}

/// `d/dt exp ψ(t)` given `ψ` and `ψ̇`, by differentiating the closed form.
pub fn dexp_components(psi: Tracefree, dpsi: Tracefree) -> Mat2 {
    let [p, q] = psi;
    let [dp, dq] = dpsi;
    let l = p.hypot(q);
    // λ λ̇
    let mu = p * dp + q * dq;
    let a = sinhc(l) * mu;
    let b = sinhc_prime_over(l) * mu;
    let s = sinhc(l);
    [[a + b * p + s * dp, b * q + s * dq], [b * q + s * dq, a - b * p - s * dp]]
}

/// A short-pulse seed `ψ₀(s, θ, φ)`, queried only for `s ∈ [0, 1]`.
pub trait Seed: Send + Sync + std::fmt::Debug {
    fn value(&self, s: f64, theta: f64, phi: f64) -> Tracefree;
    /// `∂_s ψ₀`.
    fn ds(&self, s: f64, theta: f64, phi: f64) -> Tracefree;
    /// Whether the extension by zero to `s ≤ 0` is `C^∞`.
    fn is_smooth(&self) -> bool;
    fn is_axisymmetric(&self) -> bool;
}

/// Time factor `a(s)` of a separable seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    /// `a(s) = s`.
    Linear,
    /// `a(s) = (4 s (1 − s))^order`, peak value 1 at `s = ½`.
    PolyBump { order: u32 },
    /// `a(s) = exp(1 − 1/(1 − x²))` with `x = 2s − 1`, flat to all orders at both ends.
    SmoothBump,
}

impl TimeProfile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            TimeProfile::Linear => s,
            TimeProfile::PolyBump { order } => (4.0 * s * (1.0 - s)).powi(order as i32),
            TimeProfile::SmoothBump => {
                let x = 2.0 * s - 1.0;
                let t = 1.0 - x * x;
                if t <= 0.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / t).exp()
                }
            }
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        match *self {
            TimeProfile::Linear => 1.0,
            TimeProfile::PolyBump { order } => {
                let n = order as i32;
                n as f64 * (4.0 * s * (1.0 - s)).powi(n - 1) * 4.0 * (1.0 - 2.0 * s)
            }
            TimeProfile::SmoothBump => {
                let x = 2.0 * s - 1.0;
                let t = 1.0 - x * x;
                if t <= 0.0 {
                    0.0
                } else {
                    self.value(s) * (-4.0 * x / (t * t))
                }
            }
        }
    }

    fn is_smooth(&self) -> bool {
        matches!(self, TimeProfile::SmoothBump)
    }
}

/// Angular factor `A(θ, φ)` of a separable seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularProfile {
    Constant { psi11: f64, psi12: f64 },
    /// Amplitude times the standard cutoff `g(2θ/θ_max)`: full strength on
    /// `θ ≤ θ_max/2`, zero for `θ ≥ θ_max`.
    CapBump { psi11: f64, psi12: f64, theta_max: f64 },
}

impl AngularProfile {
    pub fn value(&self, theta: f64) -> Tracefree {
        match *self {
            AngularProfile::Constant { psi11, psi12 } => [psi11, psi12],
            AngularProfile::CapBump { psi11, psi12, theta_max } => {
                let g = smooth_cutoff().eval(2.0 * theta / theta_max);
                [psi11 * g, psi12 * g]
            }
        }
    }
}

/// `ψ₀ = a(s) A(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableSeed {
    pub time: TimeProfile,
    pub angular: AngularProfile,
}

impl Seed for SeparableSeed {
    fn value(&self, s: f64, theta: f64, _phi: f64) -> Tracefree {
        let (a, [p, q]) = (self.time.value(s), self.angular.value(theta));
        [a * p, a * q]
    }

    fn ds(&self, s: f64, theta: f64, _phi: f64) -> Tracefree {
        let (a, [p, q]) = (self.time.deriv(s), self.angular.value(theta));
        [a * p, a * q]
    }

    fn is_smooth(&self) -> bool {
        self.time.is_smooth()
    }

    fn is_axisymmetric(&self) -> bool {
        true
    }
}

/// Natural cubic spline through `(x_i, y_i)`.
#[derive(Debug, Clone)]
struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

impl CubicSpline {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let d = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * d / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        y2[n - 1] = 0.0;
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        CubicSpline { x, y, y2 }
    }

    /// Value and first derivative.
    fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        let hi = self.x.partition_point(|&v| v < t).clamp(1, n - 1);
        let lo = hi - 1;
        let h = self.x[hi] - self.x[lo];
        let a = (self.x[hi] - t) / h;
        let b = (t - self.x[lo]) / h;
        let (y2l, y2h) = (self.y2[lo], self.y2[hi]);
        let v = a * self.y[lo] + b * self.y[hi] + ((a * a * a - a) * y2l + (b * b * b - b) * y2h) * h * h / 6.0;
        let d = (self.y[hi] - self.y[lo]) / h - (3.0 * a * a - 1.0) / 6.0 * h * y2l + (3.0 * b * b - 1.0) / 6.0 * h * y2h;
        (v, d)
    }
}

#[derive(Debug, Deserialize)]
struct TableRow {
    s: f64,
    theta: f64,
    psi11: f64,
    psi12: f64,
}

/// Axisymmetric seed read from a table on a rectangular `(s, θ)` grid.
///
/// Each θ-column is a natural cubic spline in `s`; between columns the seed is
/// interpolated linearly in θ, and it is held constant outside the tabulated θ-range.
#[derive(Debug, Clone)]
pub struct TabulatedSeed {
    theta: Vec<f64>,
    columns: Vec<[CubicSpline; 2]>,
}

impl TabulatedSeed {
    /// Reads CSV with header `s,theta,psi11,psi12`. Rows may come in any order but
    /// must cover every `(s, θ)` pair exactly once, with `s` spanning `[0, 1]` and
    /// `ψ₀ = 0` at `s = 0`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for r in rdr.deserialize::<TableRow>() {
            let r = r.map_err(|e| Error::Config(format!("pulse table: {e}")))?;
            if ![r.s, r.theta, r.psi11, r.psi12].iter().all(|v| v.is_finite()) {
                return Err(Error::Domain("pulse table has non-finite entries".into()));
            }
            rows.push(r);
        }
        let axis = |get: fn(&TableRow) -> f64| {
            let mut v: Vec<f64> = rows.iter().map(get).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let s = axis(|r| r.s);
        let theta = axis(|r| r.theta);
        if s.len() < 4 || theta.is_empty() {
            return Err(Error::Config("pulse table needs at least 4 s-values and one theta-value".into()));
        }
        if s[0] != 0.0 || s[s.len() - 1] != 1.0 {
            return Err(Error::Config("pulse table must span s in [0, 1]".into()));
        }
        if rows.len() != s.len() * theta.len() {
            return Err(Error::Config(format!(
                "pulse table is not rectangular: {} rows for {} x {} grid",
                rows.len(),
                s.len(),
                theta.len()
            )));
        }
        let mut cells = vec![None; rows.len()];
        for r in &rows {
            let i = s.partition_point(|&v| v < r.s);
            let j = theta.partition_point(|&v| v < r.theta);
            let slot = &mut cells[j * s.len() + i];
            if slot.is_some() {
                return Err(Error::Config(format!("duplicate pulse table cell at s={}, theta={}", r.s, r.theta)));
            }
            *slot = Some([r.psi11, r.psi12]);
        }
        let mut columns = Vec::with_capacity(theta.len());
        for j in 0..theta.len() {
            let col: Vec<Tracefree> = cells[j * s.len()..(j + 1) * s.len()]
                .iter()
                .map(|c| c.ok_or_else(|| Error::Config("pulse table has missing cells".into())))
                .collect::<Result<_>>()?;
            if col[0] != [0.0, 0.0] {
                return Err(Error::Domain(format!("seed must vanish at s = 0 (theta = {})", theta[j])));
            }
            let comp = |c: usize| CubicSpline::new(s.clone(), col.iter().map(|v| v[c]).collect());
            columns.push([comp(0), comp(1)]);
        }
        Ok(TabulatedSeed { theta, columns })
    }

    fn eval(&self, s: f64, theta: f64) -> (Tracefree, Tracefree) {
        let at = |j: usize| {
            let (p, dp) = self.columns[j][0].eval(s);
            let (q, dq) = self.columns[j][1].eval(s);
            ([p, q], [dp, dq])
        };
        let n = self.theta.len();
        if n == 1 || theta <= self.theta[0] {
            return at(0);
        }
        if theta >= self.theta[n - 1] {
            return at(n - 1);
        }
        let hi = self.theta.partition_point(|&v| v < theta);
        let t = (theta - self.theta[hi - 1]) / (self.theta[hi] - self.theta[hi - 1]);
        let (a, da) = at(hi - 1);
        let (b, db) = at(hi);
        let mix = |x: Tracefree, y: Tracefree| [x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1])];
        (mix(a, b), mix(da, db))
    }
}

impl Seed for TabulatedSeed {
    fn value(&self, s: f64, theta: f64, _phi: f64) -> Tracefree {
        self.eval(s, theta).0
    }

    fn ds(&self, s: f64, theta: f64, _phi: f64) -> Tracefree {
        self.eval(s, theta).1
    }

    fn is_smooth(&self) -> bool {
        false
    }

    fn is_axisymmetric(&self) -> bool {
        true
    }
}

/// Seed plus the scales `δ > 0` and `r0 > 1` of the ansatz.
#[derive(Debug, Clone)]
pub struct PulseProfile {
    seed: Arc<dyn Seed>,
    delta: f64,
    r0: f64,
}

impl PulseProfile {
    pub fn new(seed: Arc<dyn Seed>, delta: f64, r0: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        if !(r0 > 1.0 && r0.is_finite()) {
            return Err(Error::Config(format!("r0 must exceed 1, got {r0}")));
        }
        Ok(PulseProfile { seed, delta, r0 })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn seed(&self) -> &Arc<dyn Seed> {
        &self.seed
    }

    pub fn is_smooth(&self) -> bool {
        self.seed.is_smooth()
    }

    fn check_range(&self, ubar: f64) -> Result<()> {
        if !(0.0..=self.delta).contains(&ubar) {
            return Err(Error::Domain(format!("ubar = {ubar} lies outside [0, {}]", self.delta)));
        }
        Ok(())
    }

    fn amplitude(&self) -> f64 {
        self.delta.sqrt() / self.r0
    }

    /// `ψ(u̲)`, zero for `u̲ < 0`.
    pub fn psi(&self, ubar: f64, theta: f64, phi: f64) -> Tracefree {
        let s = ubar / self.delta;
        if s < 0.0 {
            return [0.0, 0.0];
        }
        let [p, q] = self.seed.value(s, theta, phi);
        [self.amplitude() * p, self.amplitude() * q]
    }

    /// `∂_u̲ ψ`, one-sided from the right at `u̲ = 0`.
    pub fn dpsi(&self, ubar: f64, theta: f64, phi: f64) -> Tracefree {
        let s = ubar / self.delta;
        if s < 0.0 {
            return [0.0, 0.0];
        }
        let c = self.amplitude() / self.delta;
        let [p, q] = self.seed.ds(s, theta, phi);
        [c * p, c * q]
    }

    pub fn metric(&self, ubar: f64, theta: f64, phi: f64) -> Result<MetricDensity> {
        self.check_range(ubar)?;
        Ok(exp_components(self.psi(ubar, theta, phi)))
    }

    fn energy_unchecked(&self, ubar: f64, theta: f64, phi: f64) -> f64 {
        let psi = self.psi(ubar, theta, phi);
        let dm = dexp_components(psi, self.dpsi(ubar, theta, phi));
        exp_components(psi).norm_sq(&dm) / 8.0
    }
}

/// `e = ⅛ |∂_u̲ m|²_m` with `∂_u̲ m` from the differentiated closed form.
pub fn energy_density(profile: &PulseProfile, ubar: f64, theta: f64, phi: f64) -> Result<f64> {
    profile.check_range(ubar)?;
    Ok(profile.energy_unchecked(ubar, theta, phi))
}

/// `e` with `∂_u̲ m` from fourth-order finite differences of `m`, one-sided near the
/// ends of `[0, δ]` so that the stencil never leaves the pulse.
pub fn energy_density_fd(profile: &PulseProfile, ubar: f64, theta: f64, phi: f64) -> Result<f64> {
    profile.check_range(ubar)?;
    let delta = profile.delta;
    let h = FD_STEP * delta;
    let m_at = |x: f64| exp_components(profile.psi(x, theta, phi)).m;
    let (offsets, coeffs): (&[f64], &[f64]) = if ubar - 2.0 * h >= 0.0 && ubar + 2.0 * h <= delta {
        (&[-2.0, -1.0, 1.0, 2.0], &[1.0, -8.0, 8.0, -1.0])
    } else if ubar - 2.0 * h < 0.0 {
        (&[0.0, 1.0, 2.0, 3.0, 4.0], &[-25.0, 48.0, -36.0, 16.0, -3.0])
    } else {
        (&[0.0, -1.0, -2.0, -3.0, -4.0], &[25.0, -48.0, 36.0, -16.0, 3.0])
    };
    let mut dm = [[0.0; 2]; 2];
    for (o, c) in offsets.iter().zip(coeffs) {
        let m = m_at(ubar + o * h);
        for i in 0..2 {
            for j in 0..2 {
                dm[i][j] += c * m[i][j] / (12.0 * h);
            }
        }
    }
    Ok(profile.metric(ubar, theta, phi)?.norm_sq(&dm) / 8.0)
}

/// `∫₀^δ e du̲` in direction `(θ, φ)` by `nodes`-point Gauss–Legendre quadrature.
pub fn energy_integral(profile: &PulseProfile, theta: f64, phi: f64, nodes: usize) -> Result<f64> {
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::Config(format!("need at least {MIN_QUADRATURE_NODES} quadrature nodes, got {nodes}")));
    }
    let (x, w) = gauss_legendre(nodes, 0.0, profile.delta);
    Ok(x.iter().zip(&w).map(|(u, w)| w * profile.energy_unchecked(*u, theta, phi)).sum())
}

/// Incoming energy per solid angle `k = (r0²/8π) ∫₀^δ e du̲` at every node of `grid`.
pub fn energy_per_solid_angle(profile: &PulseProfile, grid: &Arc<SphereGrid>, nodes: usize) -> Result<EnergyProfile> {
    let scale = profile.r0 * profile.r0 / (8.0 * PI);
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (t, p) = grid.node(i);
            energy_integral(profile, t, p, nodes).map(|v| scale * v)
        })
        .collect::<Result<Vec<f64>>>()?;
    EnergyProfile::new(ScalarField::new(grid, values)?)
}

/// Writes `theta,k` (one row per θ-node) for axisymmetric grids, `theta,phi,k` otherwise.
pub fn write_energy_csv<W: Write>(k: &EnergyProfile, mut out: W) -> std::io::Result<()> {
    let field = k.field();
    let grid = field.grid();
    if grid.mode() == GridMode::AxisymTruncated {
        writeln!(out, "theta,k")?;
        for (i, v) in field.values().iter().enumerate() {
            writeln!(out, "{:.16e},{v:.16e}", grid.node(i).0)?;
        }
    } else {
        writeln!(out, "theta,phi,k")?;
        for (i, v) in field.values().iter().enumerate() {
            let (t, p) = grid.node(i);
            writeln!(out, "{t:.16e},{p:.16e},{v:.16e}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaychaudhuriResult {
    /// `tr χ` at `u̲ = δ`.
    pub trchi: f64,
    /// `∫₀^δ |χ̂|² du̲`, integrated alongside.
    pub shear_integral: f64,
    /// `tr χ(0) − ∫₀^δ |χ̂|²`, an upper bound for `trchi`.
    pub bound: f64,
    pub steps: usize,
}

/// Classical RK4 for `D tr χ = −½ (tr χ)² − |χ̂|²` on `[0, δ]`.
///
/// The state is augmented by `∫|χ̂|²`, so `bound − trchi` is itself an RK4 sum of
/// the nonpositive increments `−½ (tr χ)²` and the inequality survives discretisation.
pub fn integrate_raychaudhuri(trchi0: f64, shear_sq: impl Fn(f64) -> f64, delta: f64, steps: usize) -> Result<RaychaudhuriResult> {
    if steps == 0 || !(delta >= 0.0 && delta.is_finite()) || !trchi0.is_finite() {
        return Err(Error::Config(format!("need steps > 0, finite delta >= 0 and finite trchi0 (steps={steps}, delta={delta})")));
    }
    let h = delta / steps as f64;
    let sigma = |x: f64| {
        let v = shear_sq(x);
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("shear_sq({x}) = {v} must be finite and nonnegative")))
        }
    };
    let rhs = |y: f64, s: f64| -0.5 * y * y - s;
    let (mut y, mut integral) = (trchi0, 0.0);
    for i in 0..steps {
        let x = i as f64 * h;
        let x_end = if i + 1 == steps { delta } else { x + h };
        let (s0, s1, s2) = (sigma(x)?, sigma(x + h / 2.0)?, sigma(x_end)?);
        let k1 = rhs(y, s0);
        let k2 = rhs(y + h / 2.0 * k1, s1);
        let k3 = rhs(y + h / 2.0 * k2, s1);
        let k4 = rhs(y + h * k3, s2);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        integral += h / 6.0 * (s0 + 4.0 * s1 + s2);
        if !y.is_finite() || y * h < -FOCUSING_STEP {
            return Err(Error::Focusing { location: x_end, value: y });
        }
    }
    Ok(RaychaudhuriResult { trchi: y, shear_integral: integral, bound: trchi0 - integral, steps })
}

/// Leading-order shear on `C_u` in direction `(θ, φ)`: `|χ̂|² = 2 r0² e / u²`.
pub fn leading_order_shear_sq(profile: &PulseProfile, u: f64, theta: f64, phi: f64) -> impl Fn(f64) -> f64 + '_ {
    let c = 2.0 * profile.r0 * profile.r0 / (u * u);
    move |ubar: f64| c * profile.energy_unchecked(ubar.clamp(0.0, profile.delta), theta, phi)
}

/// `2/|u| − 2k/|u|²`, the bound on `tr χ(u, δ)` for energy `k/8π` per solid angle.
pub fn trapped_bound(u: f64, k: f64) -> f64 {
    let a = u.abs();
    2.0 / a - 2.0 * k / (a * a)
}

/// `(2 + 2δ − 2k)/(1 + δ)²`, the bound on the sphere `u = −1 − δ`.
pub fn final_check(delta: f64, k: f64) -> f64 {
    (2.0 + 2.0 * delta - 2.0 * k) / ((1.0 + delta) * (1.0 + delta))
}

/// Outcome of feeding the leading-order shear into the focusing equation on the
/// sphere `u = −1 − δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusingCheck {
    pub theta: f64,
    pub phi: f64,
    pub u: f64,
    /// `r0² ∫ e`, i.e. `8π` times the energy per solid angle.
    pub k: f64,
    pub raychaudhuri: RaychaudhuriResult,
    /// [`trapped_bound`] at `(u, k)`.
    pub bound: f64,
    pub final_check: f64,
}

pub fn focusing_check(profile: &PulseProfile, theta: f64, phi: f64, steps: usize) -> Result<FocusingCheck> {
    let delta = profile.delta;
    let u = -1.0 - delta;
    let k = profile.r0 * profile.r0 * energy_integral(profile, theta, phi, MIN_QUADRATURE_NODES)?;
    let shear = leading_order_shear_sq(profile, u, theta, phi);
    let raychaudhuri = integrate_raychaudhuri(2.0 / u.abs(), shear, delta, steps)?;
    Ok(FocusingCheck { theta, phi, u, k, raychaudhuri, bound: trapped_bound(u, k), final_check: final_check(delta, k) })
}
