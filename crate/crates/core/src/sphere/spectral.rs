//! Spherical-harmonic analysis and synthesis on a Gauss–Legendre × uniform-φ grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use twofloat::TwoFloat;

use super::legendre::{zonal_pole_value, LegendreTable};

/// Expansion coefficients `a_lm` for `0 ≤ m ≤ m_max`, `m ≤ l ≤ l_max`.
/// Negative orders are implied by reality of the field.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients {
    pub l_max: usize,
    pub m_max: usize,
    data: Vec<Vec<Complex64>>,
}

impl Coefficients {
    pub fn get(&self, l: usize, m: usize) -> Complex64 {
        self.data[m][l - m]
    }

    pub fn map_lm(&self, op: impl Fn(usize, usize, Complex64) -> Complex64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(m, row)| row.iter().enumerate().map(|(r, c)| op(r + m, m, *c)).collect())
            .collect();
        Coefficients { l_max: self.l_max, m_max: self.m_max, data }
    }

    /// Root energy per degree, `sqrt(Σ_m |a_lm|²)` counting ±m.
    pub fn degree_amplitudes(&self) -> Vec<f64> {
        let mut amp = vec![0.0; self.l_max + 1];
        for (m, row) in self.data.iter().enumerate() {
            let mult = if m == 0 { 1.0 } else { 2.0 };
            for (r, c) in row.iter().enumerate() {
                amp[r + m] += mult * c.norm_sqr();
            }
        }
        amp.iter().map(|a| a.sqrt()).collect()
    }
}

pub(crate) struct SpectralBasis {
    n_theta: usize,
    n_phi: usize,
    gl_weights: Vec<f64>,
    table: LegendreTable,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("n_theta", &self.n_theta)
            .field("n_phi", &self.n_phi)
            .field("l_max", &self.table.l_max)
            .field("m_max", &self.table.m_max)
            .finish()
    }
}

/// Which θ-profile to synthesise with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Profile {
    Value,
    DTheta,
}

impl SpectralBasis {
    pub fn new(cosines: &[TwoFloat], gl_weights: Vec<f64>, n_phi: usize) -> Self {
        let n_theta = cosines.len();
        let l_max = n_theta - 1;
        let m_max = l_max.min((n_phi - 1) / 2);
        let table = LegendreTable::from_cosines(cosines, l_max, m_max);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n_phi);
        let inv = planner.plan_fft_inverse(n_phi);
        SpectralBasis { n_theta, n_phi, gl_weights, table, fwd, inv }
    }

    pub fn l_max(&self) -> usize {
        self.table.l_max
    }

    pub fn m_max(&self) -> usize {
        self.table.m_max
    }

    pub fn analyse(&self, values: &[f64]) -> Coefficients {
        let (nt, np) = (self.n_theta, self.n_phi);
        let m_max = self.table.m_max;
        // rows[m][i] = (1/n_phi) Σ_j u_ij e^{-i m φ_j}
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); nt]; m_max + 1];
        let mut buf = vec![Complex64::new(0.0, 0.0); np];
        for i in 0..nt {
            for (b, v) in buf.iter_mut().zip(&values[i * np..(i + 1) * np]) {
                *b = Complex64::new(*v, 0.0);
            }
            self.fwd.process(&mut buf);
            for (m, row) in rows.iter_mut().enumerate() {
                row[i] = buf[m] / np as f64;
            }
        }
        let data = rows
            .iter()
            .enumerate()
            .map(|(m, row)| {
                (m..=self.table.l_max)
                    .map(|l| {
                        let p = self.table.value(m, l);
                        (0..nt).fold(Complex64::new(0.0, 0.0), |acc, i| acc + row[i] * (self.gl_weights[i] * p[i]))
                    })
                    .collect()
            })
            .collect();
        Coefficients { l_max: self.table.l_max, m_max, data }
    }

    pub fn synthesise(&self, coeffs: &Coefficients, profile: Profile) -> Vec<f64> {
        let (nt, np) = (self.n_theta, self.n_phi);
        let mut out = vec![0.0; nt * np];
        let mut buf = vec![Complex64::new(0.0, 0.0); np];
        for i in 0..nt {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for m in 0..=coeffs.m_max {
                let mut g = Complex64::new(0.0, 0.0);
                for l in m..=coeffs.l_max {
                    let p = match profile {
                        Profile::Value => self.table.value(m, l)[i],
                        Profile::DTheta => self.table.dtheta(m, l)[i],
                    };
                    g += coeffs.get(l, m) * p;
                }
                if m == 0 {
                    buf[0] = g;
                } else {
                    buf[m] = g;
                    buf[np - m] = g.conj();
                }
            }
            self.inv.process(&mut buf);
            for (o, b) in out[i * np..(i + 1) * np].iter_mut().zip(&buf) {
                *o = b.re;
            }
        }
        out
    }

    /// Value of the expansion at the north pole θ = 0 (only zonal terms survive).
    pub fn north_pole_value(&self, coeffs: &Coefficients) -> f64 {
        (0..=coeffs.l_max).map(|l| coeffs.get(l, 0).re * zonal_pole_value(l)).sum()
    }
}

