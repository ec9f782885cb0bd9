//! Gauss–Legendre rules and orthonormal associated Legendre tables.
//!
//! The normalisation used throughout is `∫_{-1}^{1} P̄_l^m(x)² dx = 1`, without the
//! Condon–Shortley phase. A real field on the sphere is expanded as
//! `u(θ, φ) = Σ_m Σ_l a_lm P̄_l^m(cos θ) e^{imφ}`.

use std::f64::consts::PI;

use twofloat::TwoFloat;

/// Gauss–Legendre nodes returned as polar angles (increasing) with their weights in `x = cos θ`.
pub(crate) fn gauss_legendre_theta(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (theta, weights, _) = gauss_legendre_cosines(n);
    (theta, weights)
}

/// As [`gauss_legendre_theta`], also returning the nodes `x_i = cos θ_i` in double-double.
///
/// The angles are what fields get sampled at; the extended cosines feed the Legendre
/// table so that the discrete transform is orthogonal to working precision at every
/// degree instead of losing a digit per decade of `l`.
pub(crate) fn gauss_legendre_cosines(n: usize) -> (Vec<f64>, Vec<f64>, Vec<TwoFloat>) {
    let mut theta = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut cosines = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, refined by Newton in the angle variable so that
        // nodes close to the poles keep full relative accuracy.
        let mut t = PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        for _ in 0..100 {
            let (p, dp) = legendre_and_dtheta(n, t);
            let step = p / dp;
            t -= step;
            if step.abs() <= 4.0 * f64::EPSILON * t.max(1e-300) {
                break;
            }
        }
        // two Newton steps in x at double-double precision
        let mut x = TwoFloat::from(t.cos());
        let mut dpdx = TwoFloat::from(0.0);
        for _ in 0..3 {
            let (p, dp) = legendre_dd(n, x);
            dpdx = dp;
            x -= p / dp;
        }
        let one = TwoFloat::from(1.0);
        let w = TwoFloat::from(2.0) / ((one - x) * (one + x) * dpdx * dpdx);
        theta.push(t);
        weights.push(w.hi() + w.lo());
        cosines.push(x);
    }
    (theta, weights, cosines)
}

/// `P_n(x)` and `P_n'(x)` in double-double.
fn legendre_dd(n: usize, x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let one = TwoFloat::from(1.0);
    let (mut p0, mut p1) = (one, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / ((x - one) * (x + one)))
}

/// `P_n(cos θ)` and `d/dθ P_n(cos θ)`.
fn legendre_and_dtheta(n: usize, theta: f64) -> (f64, f64) {
    let x = theta.cos();
    let s = theta.sin();
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // dP/dθ = n (x P_n - P_{n-1}) / sin θ
    (p1, n as f64 * (x * p1 - p0) / s)
}

/// Orthonormal associated Legendre values and θ-derivatives at a fixed node set.
///
/// `value(m, l)` returns the row of `P̄_l^m(cos θ_i)` over all nodes.
#[derive(Debug, Clone)]
pub(crate) struct LegendreTable {
    pub l_max: usize,
    pub m_max: usize,
    n_nodes: usize,
    values: Vec<Vec<f64>>,
    dtheta: Vec<Vec<f64>>,
}

impl LegendreTable {
    #[cfg(test)]
    pub fn new(theta: &[f64], l_max: usize, m_max: usize) -> Self {
        let nodes: Vec<(TwoFloat, TwoFloat)> =
            theta.iter().map(|t| (TwoFloat::from(t.cos()), TwoFloat::from(t.sin()))).collect();
        Self::build(&nodes, l_max, m_max)
    }

    /// Table at nodes given by extended-precision cosines.
    pub fn from_cosines(x: &[TwoFloat], l_max: usize, m_max: usize) -> Self {
        let one = TwoFloat::from(1.0);
        let nodes: Vec<(TwoFloat, TwoFloat)> = x.iter().map(|&xi| (xi, ((one - xi) * (one + xi)).sqrt())).collect();
        Self::build(&nodes, l_max, m_max)
    }

    /// Recurrences run in double-double and are rounded once at the end.
    fn build(nodes: &[(TwoFloat, TwoFloat)], l_max: usize, m_max: usize) -> Self {
        let n_nodes = nodes.len();
        let dd = |v: f64| TwoFloat::from(v);
        let round = |v: TwoFloat| v.hi() + v.lo();
        let mut values = Vec::with_capacity(m_max + 1);
        let mut dtheta = Vec::with_capacity(m_max + 1);

        let mut sectoral: Vec<TwoFloat> = vec![dd(0.5).sqrt(); n_nodes];
        let mut v = Vec::new();
        for m in 0..=m_max {
            let mf = m as f64;
            if m > 0 {
                let c = (dd(2.0 * mf + 1.0) / dd(2.0 * mf)).sqrt();
                for (p, (_, si)) in sectoral.iter_mut().zip(nodes) {
                    *p = *p * c * *si;
                }
            }
            let rows = l_max + 1 - m;
            v.clear();
            v.resize(rows * n_nodes, dd(0.0));
            v[..n_nodes].copy_from_slice(&sectoral);
            if rows > 1 {
                let c = dd(2.0 * mf + 3.0).sqrt();
                for i in 0..n_nodes {
                    v[n_nodes + i] = c * nodes[i].0 * sectoral[i];
                }
            }
            for l in (m + 2)..=l_max {
                let lf = l as f64;
                let a = (dd(4.0 * lf * lf - 1.0) / dd(lf * lf - mf * mf)).sqrt();
                let b = (dd((lf - 1.0) * (lf - 1.0) - mf * mf) / dd(4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                let r = l - m;
                for i in 0..n_nodes {
                    v[r * n_nodes + i] = a * (nodes[i].0 * v[(r - 1) * n_nodes + i] - b * v[(r - 2) * n_nodes + i]);
                }
            }
            // sin θ dP̄_l^m/dθ = l x P̄_l^m - sqrt((2l+1)/(2l-1) (l² - m²)) P̄_{l-1}^m
            let mut d = vec![0.0; rows * n_nodes];
            for l in m..=l_max {
                let lf = l as f64;
                let r = l - m;
                let c = if l > m {
                    (dd(2.0 * lf + 1.0) / dd(2.0 * lf - 1.0) * dd(lf * lf - mf * mf)).sqrt()
                } else {
                    dd(0.0)
                };
                for i in 0..n_nodes {
                    let (x, s) = nodes[i];
                    let prev = if l > m { v[(r - 1) * n_nodes + i] } else { dd(0.0) };
                    d[r * n_nodes + i] = round((lf * x * v[r * n_nodes + i] - c * prev) / s);
                }
            }
            values.push(v.iter().map(|&p| round(p)).collect());
            dtheta.push(d);
        }
        LegendreTable { l_max, m_max, n_nodes, values, dtheta }
    }

    pub fn value(&self, m: usize, l: usize) -> &[f64] {
        let r = l - m;
        &self.values[m][r * self.n_nodes..(r + 1) * self.n_nodes]
    }

    pub fn dtheta(&self, m: usize, l: usize) -> &[f64] {
        let r = l - m;
        &self.dtheta[m][r * self.n_nodes..(r + 1) * self.n_nodes]
    }
}

/// `P̄_l^0(1)`, the pole value of the orthonormal zonal function.
pub(crate) fn zonal_pole_value(l: usize) -> f64 {
    ((2.0 * l as f64 + 1.0) / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (theta, w) = gauss_legendre_theta(12);
        assert!(theta.windows(2).all(|p| p[0] < p[1]));
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ x^22 dx = 2/23
        let moment: f64 = theta.iter().zip(&w).map(|(t, wi)| wi * t.cos().powi(22)).sum();
        assert!((moment - 2.0 / 23.0).abs() < 1e-14);
    }

    #[test]
    fn table_is_orthonormal() {
        let n = 20;
        let (theta, w) = gauss_legendre_theta(n);
        let table = LegendreTable::new(&theta, n - 1, 6);
        for m in 0..=6 {
            for l1 in m..n.min(m + 8) {
                for l2 in m..n.min(m + 8) {
                    let ip: f64 = (0..n).map(|i| w[i] * table.value(m, l1)[i] * table.value(m, l2)[i]).sum();
                    let expect = if l1 == l2 { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-12, "m={m} l1={l1} l2={l2} ip={ip}");
                }
            }
        }
    }

    #[test]
    fn high_degree_orthonormality() {
        // holds to a few ulps at every degree because the table is built in double-double
        let n = 128;
        let (_, w, x) = gauss_legendre_cosines(n);
        let table = LegendreTable::from_cosines(&x, n - 1, 4);
        for m in [0, 4] {
            for l1 in (m..n).step_by(9) {
                for l2 in (m..n).step_by(7) {
                    let ip: f64 = (0..n).map(|i| w[i] * table.value(m, l1)[i] * table.value(m, l2)[i]).sum();
                    let expect = if l1 == l2 { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 5e-15, "m={m} l1={l1} l2={l2} ip={ip:e}");
                }
            }
        }
    }

    #[test]
    fn theta_derivative_matches_finite_difference() {
        let theta = [0.3, 1.1, 2.0, 2.9];
        let h = 1e-6;
        let plus: Vec<f64> = theta.iter().map(|t| t + h).collect();
        let minus: Vec<f64> = theta.iter().map(|t| t - h).collect();
        let t0 = LegendreTable::new(&theta, 10, 5);
        let tp = LegendreTable::new(&plus, 10, 5);
        let tm = LegendreTable::new(&minus, 10, 5);
        for m in 0..=5 {
            for l in m..=10 {
                for i in 0..theta.len() {
                    let fd = (tp.value(m, l)[i] - tm.value(m, l)[i]) / (2.0 * h);
                    assert!((fd - t0.dtheta(m, l)[i]).abs() < 1e-7, "m={m} l={l}");
                }
            }
        }
    }
}
