//! Discretisations of the unit round sphere and the differential operators on it.
//!
//! Two node layouts are provided:
//!
//! * [`GridMode::FullSphere`]: Gauss–Legendre nodes in `cos θ` times uniform `φ`
//!   nodes. Operators act through a spherical-harmonic expansion, so smooth
//!   fields are differentiated to near machine precision.
//! * [`GridMode::AxisymTruncated`]: axisymmetric fields on a zone `θ ∈ [θ_min, π]`,
//!   sampled by Chebyshev–Gauss collocation on consecutive θ-patches. This is the
//!   layout for fields with a singularity at (or concentrated near) `θ = 0`.
//!
//! Poles are never nodes. All operators are pure differentiation/quadrature;
//! nothing here solves a PDE.

mod chebyshev;
mod legendre;
mod spectral;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use chebyshev::ChebPatch;
use spectral::{Profile, SpectralBasis};

/// Nodes per Chebyshev patch used by [`SphereGrid::build`] in axisymmetric mode.
pub const DEFAULT_PATCH_NODES: usize = 32;
/// Default full-sphere resolution.
pub const DEFAULT_FULL_N_THETA: usize = 64;
pub const DEFAULT_FULL_N_PHI: usize = 128;
/// Default axisymmetric resolution.
pub const DEFAULT_AXISYM_N_THETA: usize = 256;
/// Minimum number of θ-rows that must lie inside a cap for [`sup_on_cap`].
pub const MIN_CAP_ROWS: usize = 16;
/// Oversampling factor of the collocation interpolant used by [`sup_on_cap`].
pub const CAP_OVERSAMPLING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridMode {
    FullSphere,
    AxisymTruncated,
}

enum Repr {
    Spectral(SpectralBasis),
    Collocation(Vec<ChebPatch>),
}

/// A discretisation of the unit sphere (or of an axisymmetric zone of it).
///
/// Node `k` has θ-row `k / n_phi` and φ-column `k % n_phi`.
pub struct SphereGrid {
    mode: GridMode,
    n_theta: usize,
    n_phi: usize,
    theta_min: f64,
    theta_nodes: Vec<f64>,
    phi_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    repr: Repr,
}

impl std::fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SphereGrid")
            .field("mode", &self.mode)
            .field("n_theta", &self.n_theta)
            .field("n_phi", &self.n_phi)
            .field("theta_min", &self.theta_min)
            .finish()
    }
}

impl SphereGrid {
    /// Builds a grid. In axisymmetric mode the zone `[θ_min, π]` is split into
    /// equal patches of about [`DEFAULT_PATCH_NODES`] nodes each.
    pub fn build(mode: GridMode, n_theta: usize, n_phi: usize, theta_min: f64) -> Result<Arc<Self>> {
        if n_theta < 4 {
            return Err(Error::Config(format!("n_theta must be at least 4, got {n_theta}")));
        }
        if n_phi < 1 {
            return Err(Error::Config("n_phi must be at least 1".into()));
        }
        if !(0.0..PI / 2.0).contains(&theta_min) {
            return Err(Error::Config(format!("theta_min must lie in [0, pi/2), got {theta_min}")));
        }
        match mode {
            GridMode::FullSphere => {
                if theta_min != 0.0 {
                    return Err(Error::Config("a full-sphere grid has theta_min = 0".into()));
                }
                Ok(Arc::new(Self::full_sphere_unchecked(n_theta, n_phi)))
            }
            GridMode::AxisymTruncated => {
                if n_phi != 1 {
                    return Err(Error::Config(format!("axisymmetric grids have n_phi = 1, got {n_phi}")));
                }
                let patches = (n_theta / DEFAULT_PATCH_NODES).max(1);
                let step = (PI - theta_min) / patches as f64;
                let mut breaks: Vec<f64> = (0..patches).map(|k| theta_min + step * k as f64).collect();
                breaks.push(PI);
                let base = n_theta / patches;
                let extra = n_theta % patches;
                let sizes: Vec<usize> = (0..patches).map(|k| base + usize::from(k < extra)).collect();
                Self::from_patches(&breaks, &sizes)
            }
        }
    }

    pub fn full_sphere(n_theta: usize, n_phi: usize) -> Result<Arc<Self>> {
        Self::build(GridMode::FullSphere, n_theta, n_phi, 0.0)
    }

    pub fn axisym(n_theta: usize, theta_min: f64) -> Result<Arc<Self>> {
        Self::build(GridMode::AxisymTruncated, n_theta, 1, theta_min)
    }

    /// Axisymmetric grid with explicit patch breakpoints `b_0 < b_1 < … < b_P = π`.
/// Unlike [`SphereGrid::build`], the zone may start anywhere in `[0, π)`.
    pub fn axisym_patched(breakpoints: &[f64], nodes_per_patch: usize) -> Result<Arc<Self>> {
        if breakpoints.len() < 2 {
            return Err(Error::Config("need at least two breakpoints".into()));
        }
        if nodes_per_patch < 4 {
            return Err(Error::Config("need at least 4 nodes per patch".into()));
        }
        let last = *breakpoints.last().unwrap();
        if (last - PI).abs() > 1e-12 {
            return Err(Error::Config(format!("last breakpoint must be pi, got {last}")));
        }
        if !(0.0..PI).contains(&breakpoints[0]) {
            return Err(Error::Config(format!("theta_min must lie in [0, pi), got {}", breakpoints[0])));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("breakpoints must be strictly increasing".into()));
        }
        let mut breaks = breakpoints.to_vec();
        *breaks.last_mut().unwrap() = PI;
        let sizes = vec![nodes_per_patch; breaks.len() - 1];
        Self::from_patches(&breaks, &sizes)
    }

    /// Axisymmetric grid on `[θ_min, π]` whose patches double in width away from
    /// the pole, `θ_min, 2θ_min, 4θ_min, …, π`. Each patch is as wide as its
    /// distance from `θ = 0`, matching fields singular at the north pole without
    /// spending nodes (and rounding error) where the field is smooth.
    pub fn axisym_graded(theta_min: f64, nodes_per_patch: usize) -> Result<Arc<Self>> {
        if !(theta_min > 0.0 && theta_min < PI) {
            return Err(Error::Config(format!("graded grids need theta_min in (0, pi), got {theta_min}")));
        }
        let mut breaks = vec![theta_min];
        let mut x = theta_min;
        while 2.0 * x < PI {
            x *= 2.0;
            breaks.push(x);
        }
        if PI - x < 0.5 * (x - breaks[breaks.len().saturating_sub(2)]) && breaks.len() > 1 {
            breaks.pop();
        }
        breaks.push(PI);
        Self::axisym_patched(&breaks, nodes_per_patch)
    }

    fn from_patches(breaks: &[f64], sizes: &[usize]) -> Result<Arc<Self>> {
        let mut patches = Vec::with_capacity(sizes.len());
        let mut offset = 0;
        for (w, &m) in breaks.windows(2).zip(sizes) {
            let p = ChebPatch::new(w[0], w[1], m, offset);
            offset += m;
            patches.push(p);
        }
        let theta_nodes: Vec<f64> = patches.iter().flat_map(|p| p.theta.iter().copied()).collect();
        let quad_weights: Vec<f64> = patches
            .iter()
            .flat_map(|p| p.theta.iter().zip(&p.dtheta_weights).map(|(t, w)| 2.0 * PI * t.sin() * w))
            .collect();
        Ok(Arc::new(SphereGrid {
            mode: GridMode::AxisymTruncated,
            n_theta: theta_nodes.len(),
            n_phi: 1,
            theta_min: breaks[0],
            theta_nodes,
            phi_nodes: vec![0.0],
            quad_weights,
            repr: Repr::Collocation(patches),
        }))
    }

    fn full_sphere_unchecked(n_theta: usize, n_phi: usize) -> Self {
        let (theta_nodes, gl_weights, cosines) = legendre::gauss_legendre_cosines(n_theta);
        let phi_nodes: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let quad_weights = gl_weights.iter().flat_map(|w| std::iter::repeat_n(w * dphi, n_phi)).collect();
        let basis = SpectralBasis::new(&cosines, gl_weights, n_phi);
        SphereGrid {
            mode: GridMode::FullSphere,
            n_theta,
            n_phi,
            theta_min: 0.0,
            theta_nodes,
            phi_nodes,
            quad_weights,
            repr: Repr::Spectral(basis),
        }
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi_nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(θ, φ)` of node `k`.
    pub fn node(&self, k: usize) -> (f64, f64) {
        (self.theta_nodes[k / self.n_phi], self.phi_nodes[k % self.n_phi])
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(|k| self.node(k))
    }

    /// Whether the grid covers the whole sphere (every direction is represented).
    pub fn is_closed(&self) -> bool {
        self.theta_min == 0.0
    }

    /// Patch breakpoints of an axisymmetric grid; `None` for full-sphere grids.
    pub fn breakpoints(&self) -> Option<Vec<f64>> {
        match &self.repr {
            Repr::Collocation(patches) => {
                let mut b: Vec<f64> = patches.iter().map(|p| p.lo).collect();
                b.push(PI);
                Some(b)
            }
            Repr::Spectral(_) => None,
        }
    }

    /// Highest spherical-harmonic degree represented (full-sphere grids only).
    pub fn l_max(&self) -> Option<usize> {
        match &self.repr {
            Repr::Spectral(b) => Some(b.l_max()),
            Repr::Collocation(_) => None,
        }
    }

    pub fn m_max(&self) -> Option<usize> {
        match &self.repr {
            Repr::Spectral(b) => Some(b.m_max()),
            Repr::Collocation(_) => None,
        }
    }
}

/// Samples of a real function at the nodes of a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (t, p) = grid.node(k);
            return Err(Error::Domain(format!("non-finite field value at theta={t}, phi={p}")));
        }
        Ok(ScalarField { grid: Arc::clone(grid), values })
    }

    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(|(t, p)| f(t, p)).collect())
    }

    pub fn constant(grid: &Arc<SphereGrid>, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise map that also receives the node coordinates.
    pub fn map_with_node(&self, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let (t, p) = self.grid.node(k);
                f(v, t, p)
            })
            .collect();
        Self::new(&self.grid, values)
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(&self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields are defined on different grids".into()))
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the largest value (first occurrence).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        best
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = k;
            }
        }
        best
    }

    /// Extremes restricted to nodes whose polar angle lies in `[lo, hi]`.
    pub fn max_in_zone(&self, lo: f64, hi: f64) -> Option<(f64, usize)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let t = self.grid.node(*k).0;
                t >= lo && t <= hi
            })
            .fold(None, |acc: Option<(f64, usize)>, (k, &v)| match acc {
                Some((b, _)) if b >= v => acc,
                _ => Some((v, k)),
            })
    }

    pub fn min_in_zone(&self, lo: f64, hi: f64) -> Option<(f64, usize)> {
        let neg = ScalarField { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| -v).collect() };
        neg.max_in_zone(lo, hi).map(|(v, k)| (-v, k))
    }

    /// Writes `theta,phi,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta,phi,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let (t, p) = self.grid.node(k);
            writeln!(out, "{t:.16e},{p:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Maximum of a field over a polar cap, with its location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapMaximum {
    pub value: f64,
    pub theta: f64,
    pub phi: f64,
    /// Number of θ-rows inside the cap.
    pub cap_rows: usize,
}

/// Round-sphere Laplacian `Δ̊ = sin⁻¹θ ∂θ(sin θ ∂θ) + sin⁻²θ ∂φ²` evaluated at the nodes.
pub fn laplacian(field: &ScalarField) -> Result<ScalarField> {
    let grid = field.grid();
    let values = match &grid.repr {
        Repr::Spectral(basis) => {
            let c = basis.analyse(&centred(field.values()));
            let c = c.map_lm(|l, _, a| a * -((l * (l + 1)) as f64));
            basis.synthesise(&c, Profile::Value)
        }
        Repr::Collocation(patches) => {
            let (d1, d2) = collocation_derivatives(patches, field.values(), true);
            grid.theta_nodes.iter().zip(d1.iter().zip(&d2)).map(|(t, (a, b))| b + a / t.tan()).collect()
        }
    };
    ScalarField::new(grid, values)
}

/// `|d̊u|² = (∂θu)² + sin⁻²θ (∂φu)²` in the unit round metric.
pub fn gradient_sq(field: &ScalarField) -> Result<ScalarField> {
    let (dt, dp) = gradient(field)?;
    let grid = field.grid();
    let values = (0..grid.len())
        .map(|k| {
            let s = grid.node(k).0.sin();
            dt.values[k] * dt.values[k] + dp.values[k] * dp.values[k] / (s * s)
        })
        .collect();
    ScalarField::new(grid, values)
}

/// Coordinate derivatives `(∂θu, ∂φu)` at the nodes.
pub fn gradient(field: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let grid = field.grid();
    match &grid.repr {
        Repr::Spectral(basis) => {
            let c = basis.analyse(&centred(field.values()));
            let dt = basis.synthesise(&c, Profile::DTheta);
            let cp = c.map_lm(|_, m, a| a * Complex64::new(0.0, m as f64));
            let dp = basis.synthesise(&cp, Profile::Value);
            Ok((ScalarField::new(grid, dt)?, ScalarField::new(grid, dp)?))
        }
        Repr::Collocation(patches) => {
            let (d1, _) = collocation_derivatives(patches, field.values(), false);
            Ok((ScalarField::new(grid, d1)?, ScalarField::constant(grid, 0.0)?))
        }
    }
}

/// `values` minus their mean. Derivatives ignore the offset, and removing it
/// first keeps the rounding of the transform proportional to the variation.
fn centred(values: &[f64]) -> Vec<f64> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| v - mean).collect()
}

fn collocation_derivatives(patches: &[ChebPatch], values: &[f64], second: bool) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for p in patches {
        let range = p.offset..p.offset + p.len();
        // Differentiation annihilates constants; removing the patch mean keeps
        // the rounding error proportional to the variation, not the magnitude.
        let mean = values[range.clone()].iter().sum::<f64>() / p.len() as f64;
        let u: Vec<f64> = values[range.clone()].iter().map(|v| v - mean).collect();
        p.apply_d1(&u, &mut d1[range.clone()]);
        if second {
            p.apply_d2(&u, &mut d2[range]);
        }
    }
    (d1, d2)
}

/// Quadrature of `∫ u dA` over the sphere (full-sphere grids) or over the zone
/// `θ ∈ [θ_min, π]` (axisymmetric grids, where the φ-integral contributes 2π).
pub fn integrate(field: &ScalarField) -> f64 {
    field.values().iter().zip(field.grid().quad_weights()).map(|(v, w)| v * w).sum()
}

/// `n`-point Gauss–Legendre rule on `[a, b]`, nodes increasing.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (theta, w) = legendre::gauss_legendre_theta(n);
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    let nodes = theta.iter().rev().map(|t| mid + half * t.cos()).collect();
    let weights = w.iter().rev().map(|w| half * w).collect();
    (nodes, weights)
}

/// Value of a full-sphere field at the north pole, from its harmonic expansion.
pub fn north_pole_value(field: &ScalarField) -> Result<f64> {
    match &field.grid().repr {
        Repr::Spectral(basis) => Ok(basis.north_pole_value(&basis.analyse(field.values()))),
        Repr::Collocation(_) => Err(Error::Config("north-pole evaluation needs a full-sphere grid".into())),
    }
}

/// Relative size of the trailing part of the field's spectral representation.
///
/// Full sphere: largest amplitude among the last four degrees over the largest
/// amplitude. Axisymmetric: the same ratio for the last four Chebyshev coefficients,
/// maximised over patches.
pub fn tail_ratio(field: &ScalarField) -> f64 {
    match &field.grid().repr {
        Repr::Spectral(basis) => {
            let amp = basis.analyse(field.values()).degree_amplitudes();
            trailing_ratio(&amp)
        }
        Repr::Collocation(patches) => patches
            .iter()
            .map(|p| {
                let c = p.coefficients(&field.values()[p.offset..p.offset + p.len()]);
                let abs: Vec<f64> = c.iter().map(|v| v.abs()).collect();
                trailing_ratio(&abs)
            })
            .fold(0.0, f64::max),
    }
}

fn trailing_ratio(amp: &[f64]) -> f64 {
    let lead = amp.iter().copied().fold(0.0, f64::max);
    if lead == 0.0 {
        return 0.0;
    }
    let tail_len = amp.len().min(4);
    amp[amp.len() - tail_len..].iter().copied().fold(0.0, f64::max) / lead
}

/// Maximum of `field` over the cap `θ ≤ theta_max`.
///
/// On axisymmetric grids the collocation interpolant of every patch meeting the
/// cap is sampled [`CAP_OVERSAMPLING`] times more densely than the nodes and the
/// best sample is polished by golden-section search. On full-sphere grids the
/// node maximum is refined by a parabola through the neighbouring θ-rows.
pub fn sup_on_cap(field: &ScalarField, theta_max: f64) -> Result<CapMaximum> {
    let grid = field.grid();
    if !(theta_max > grid.theta_min && theta_max <= PI) {
        return Err(Error::Config(format!(
            "cap boundary {theta_max} outside the grid range ({}, pi]",
            grid.theta_min
        )));
    }
    let cap_rows = grid.theta_nodes.iter().filter(|&&t| t <= theta_max).count();
    if cap_rows < MIN_CAP_ROWS {
        return Err(Error::Resolution(format!(
            "cap theta <= {theta_max} holds {cap_rows} node rows, need at least {MIN_CAP_ROWS}"
        )));
    }
    match &grid.repr {
        Repr::Collocation(patches) => {
            let mut best = CapMaximum { value: f64::NEG_INFINITY, theta: 0.0, phi: 0.0, cap_rows };
            for p in patches.iter().filter(|p| p.lo < theta_max) {
                let u = &field.values()[p.offset..p.offset + p.len()];
                let hi = p.hi.min(theta_max);
                let samples = CAP_OVERSAMPLING * p.len();
                let h = (hi - p.lo) / samples as f64;
                let mut local = (f64::NEG_INFINITY, p.lo);
                for s in 0..=samples {
                    let t = p.lo + h * s as f64;
                    let v = p.interpolate(u, t);
                    if v > local.0 {
                        local = (v, t);
                    }
                }
                let a = (local.1 - h).max(p.lo);
                let b = (local.1 + h).min(hi);
                let (tr, vr) = golden_max(|t| p.interpolate(u, t), a, b);
                if vr > local.0 {
                    local = (vr, tr);
                }
                if local.0 > best.value {
                    best.value = local.0;
                    best.theta = local.1;
                }
            }
            Ok(best)
        }
        Repr::Spectral(_) => {
            let np = grid.n_phi;
            let mut best = (f64::NEG_INFINITY, 0usize);
            for k in 0..cap_rows * np {
                if field.values[k] > best.0 {
                    best = (field.values[k], k);
                }
            }
            let (row, col) = (best.1 / np, best.1 % np);
            let mut result = CapMaximum { value: best.0, theta: grid.theta_nodes[row], phi: grid.phi_nodes[col], cap_rows };
            if row > 0 && row + 1 < grid.n_theta {
                let t = [grid.theta_nodes[row - 1], grid.theta_nodes[row], grid.theta_nodes[row + 1]];
                let v = [field.values[(row - 1) * np + col], best.0, field.values[(row + 1) * np + col]];
                if let Some((tv, vv)) = parabola_vertex(t, v) {
                    if tv >= t[0] && tv <= t[2] && tv <= theta_max && vv > result.value {
                        result.value = vv;
                        result.theta = tv;
                    }
                }
            }
            Ok(result)
        }
    }
}

fn parabola_vertex(t: [f64; 3], v: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (v[1] - v[0]) / (t[1] - t[0]);
    let d12 = (v[2] - v[1]) / (t[2] - t[1]);
    let a = (d12 - d01) / (t[2] - t[0]);
    if a >= 0.0 {
        return None;
    }
    let b = d01 - a * (t[0] + t[1]);
    let tv = -b / (2.0 * a);
    let vv = v[0] + d01 * (tv - t[0]) + a * (tv - t[0]) * (tv - t[1]);
    Some((tv, vv))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    (t, f(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_sphere_area() {
        let g = SphereGrid::build(GridMode::FullSphere, 32, 64, 0.0).unwrap();
        let total: f64 = g.quad_weights().iter().sum();
        assert!((total - 4.0 * PI).abs() <= 1e-12 * 4.0 * PI);
    }

    #[test]
    fn axisym_nodes_inside_zone() {
        let g = SphereGrid::build(GridMode::AxisymTruncated, 128, 1, 0.2).unwrap();
        assert_eq!(g.len(), 128);
        assert!(g.theta_nodes().iter().all(|&t| t > 0.2 && t < PI));
        assert!(g.theta_nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degenerate_sizes_rejected() {
        assert!(matches!(SphereGrid::build(GridMode::FullSphere, 2, 4, 0.0), Err(Error::Config(_))));
        assert!(SphereGrid::build(GridMode::AxisymTruncated, 64, 2, 0.1).is_err());
        assert!(SphereGrid::build(GridMode::AxisymTruncated, 64, 1, 1.6).is_err());
        assert!(SphereGrid::build(GridMode::FullSphere, 16, 32, 0.1).is_err());
    }

    #[test]
    fn laplacian_of_simple_fields() {
        for g in [SphereGrid::full_sphere(16, 32).unwrap(), SphereGrid::axisym(64, 0.0).unwrap()] {
            let c = ScalarField::from_fn(&g, |t, _| t.cos()).unwrap();
            let lap = laplacian(&c).unwrap();
            for (k, v) in lap.values().iter().enumerate() {
                assert!((v + 2.0 * g.node(k).0.cos()).abs() < 1e-9, "{:?}", g.mode());
            }
            let one = ScalarField::constant(&g, 1.0).unwrap();
            assert!(laplacian(&one).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn gradient_of_cosine() {
        for g in [SphereGrid::full_sphere(16, 32).unwrap(), SphereGrid::axisym(64, 0.3).unwrap()] {
            let c = ScalarField::from_fn(&g, |t, _| t.cos()).unwrap();
            let gs = gradient_sq(&c).unwrap();
            for (k, v) in gs.values().iter().enumerate() {
                let s = g.node(k).0.sin();
                assert!((v - s * s).abs() < 1e-11);
            }
            let one = ScalarField::constant(&g, 3.0).unwrap();
            assert!(gradient_sq(&one).unwrap().max_abs() < 1e-20);
        }
    }

    #[test]
    fn gradient_of_greens_function() {
        let g = SphereGrid::axisym(256, 0.2).unwrap();
        let w = ScalarField::from_fn(&g, |t, _| 2.0 * (t / 2.0).sin().ln()).unwrap();
        let gs = gradient_sq(&w).unwrap();
        for (k, v) in gs.values().iter().enumerate() {
            let t = g.node(k).0;
            let expect = 1.0 / (t / 2.0).tan().powi(2);
            assert!((v - expect).abs() <= 1e-10 * expect.max(1.0));
        }
    }

    #[test]
    fn integrals() {
        let g = SphereGrid::full_sphere(16, 32).unwrap();
        let one = ScalarField::constant(&g, 1.0).unwrap();
        assert!((integrate(&one) - 4.0 * PI).abs() < 1e-12);
        let c = ScalarField::from_fn(&g, |t, _| t.cos()).unwrap();
        assert!(integrate(&c).abs() < 1e-13);
        let s2 = ScalarField::from_fn(&g, |t, _| t.sin().powi(2)).unwrap();
        assert!((integrate(&s2) - 8.0 * PI / 3.0).abs() < 1e-12);
        // zone integral of 1 over [0.4, π] is 2π(1 + cos 0.4)
        let z = SphereGrid::axisym(64, 0.4).unwrap();
        let one = ScalarField::constant(&z, 1.0).unwrap();
        assert!((integrate(&one) - 2.0 * PI * (1.0 + 0.4f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn cap_suprema() {
        let g = SphereGrid::axisym(256, 0.0).unwrap();
        let c = ScalarField::constant(&g, 2.5).unwrap();
        assert!((sup_on_cap(&c, 1.0).unwrap().value - 2.5).abs() < 1e-12);
        let cos = ScalarField::from_fn(&g, |t, _| t.cos()).unwrap();
        let m = sup_on_cap(&cos, 0.5).unwrap();
        assert!(m.value >= g.theta_nodes()[0].cos() - 1e-14 && m.value <= 1.0 + 1e-12);

        let fs = SphereGrid::full_sphere(64, 8).unwrap();
        let cos = ScalarField::from_fn(&fs, |t, _| t.cos()).unwrap();
        let m = sup_on_cap(&cos, 1.2).unwrap();
        assert!((m.value - fs.theta_nodes()[0].cos()).abs() < 1e-12);
        assert!(matches!(sup_on_cap(&cos, 0.05), Err(Error::Resolution(_))));

        // interior maximum is located between nodes
        let bump = ScalarField::from_fn(&g, |t, _| -(t - 0.3001).powi(2)).unwrap();
        let m = sup_on_cap(&bump, 0.5).unwrap();
        assert!(m.value.abs() < 1e-14 && (m.theta - 0.3001).abs() < 1e-6);
    }

    #[test]
    fn field_validation() {
        let g = SphereGrid::axisym(32, 0.1).unwrap();
        assert!(matches!(ScalarField::new(&g, vec![0.0; 3]), Err(Error::GridMismatch(_))));
        assert!(matches!(ScalarField::constant(&g, f64::NAN), Err(Error::Domain(_))));
        let h = SphereGrid::axisym(32, 0.1).unwrap();
        let a = ScalarField::constant(&g, 1.0).unwrap();
        let b = ScalarField::constant(&h, 1.0).unwrap();
        assert!(matches!(a.zip_map(&b, |x, y| x + y), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = SphereGrid::full_sphere(4, 2).unwrap();
        let f = ScalarField::constant(&g, 0.5).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("theta,phi,value\n"));
        assert!(text.lines().nth(1).unwrap().ends_with("5.0000000000000000e-1"));
    }
}
