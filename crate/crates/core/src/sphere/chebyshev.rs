//! Chebyshev–Gauss collocation on a single θ-interval.
//!
//! Nodes are the roots of `T_m`, mapped affinely onto `[lo, hi]`, so interval
//! endpoints (and hence the poles) are never sampled. Differentiation matrices use
//! barycentric weights with node differences evaluated through trigonometric
//! identities and diagonals fixed by the negative-sum trick.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub(crate) struct ChebPatch {
    pub lo: f64,
    pub hi: f64,
    /// Index of the first node of this patch in the global node list.
    pub offset: usize,
    pub theta: Vec<f64>,
    /// Reference nodes in `[-1, 1]`, increasing.
    x: Vec<f64>,
    bary: Vec<f64>,
    /// First and second θ-derivative matrices, row-major `m × m`.
    d1: Vec<f64>,
    d2: Vec<f64>,
    /// Quadrature weights for `∫_lo^hi g(θ) dθ` (Fejér's first rule).
    pub dtheta_weights: Vec<f64>,
}

impl ChebPatch {
    pub fn new(lo: f64, hi: f64, m: usize, offset: usize) -> Self {
        let angle: Vec<f64> = (0..m).map(|k| (2 * k + 1) as f64 * PI / (2 * m) as f64).collect();
        // x_k = -cos(angle_k) is increasing in k.
        let x: Vec<f64> = angle.iter().map(|a| -a.cos()).collect();
        let bary: Vec<f64> = angle
            .iter()
            .enumerate()
            .map(|(k, a)| if k % 2 == 0 { a.sin() } else { -a.sin() })
            .collect();

        let mut d1 = vec![0.0; m * m];
        let mut d2 = vec![0.0; m * m];
        let mut inv_dx = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    // x_i - x_j = cos(a_j) - cos(a_i) = 2 sin((a_i + a_j)/2) sin((a_i - a_j)/2)
                    let dx = 2.0 * ((angle[i] + angle[j]) / 2.0).sin() * ((angle[i] - angle[j]) / 2.0).sin();
                    inv_dx[i * m + j] = 1.0 / dx;
                    d1[i * m + j] = bary[j] / bary[i] * inv_dx[i * m + j];
                }
            }
        }
        for i in 0..m {
            let diag: f64 = -(0..m).filter(|&j| j != i).map(|j| d1[i * m + j]).sum::<f64>();
            d1[i * m + i] = diag;
        }
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    d2[i * m + j] = 2.0 * d1[i * m + j] * (d1[i * m + i] - inv_dx[i * m + j]);
                }
            }
            let diag: f64 = -(0..m).filter(|&j| j != i).map(|j| d2[i * m + j]).sum::<f64>();
            d2[i * m + i] = diag;
        }

        let half = (hi - lo) / 2.0;
        for v in d1.iter_mut() {
            *v /= half;
        }
        for v in d2.iter_mut() {
            *v /= half * half;
        }

        let theta: Vec<f64> = x.iter().map(|xi| lo + half * (xi + 1.0)).collect();
        let dtheta_weights = angle
            .iter()
            .map(|a| {
                let s: f64 = (1..=m / 2)
                    .map(|j| (2.0 * j as f64 * a).cos() / (4.0 * (j * j) as f64 - 1.0))
                    .sum();
                half * 2.0 / m as f64 * (1.0 - 2.0 * s)
            })
            .collect();

        ChebPatch { lo, hi, offset, theta, x, bary, d1, d2, dtheta_weights }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn apply_d1(&self, u: &[f64], out: &mut [f64]) {
        apply(&self.d1, u, out);
    }

    pub fn apply_d2(&self, u: &[f64], out: &mut [f64]) {
        apply(&self.d2, u, out);
    }

    /// Barycentric evaluation of the interpolant through `u` at `theta ∈ [lo, hi]`.
    pub fn interpolate(&self, u: &[f64], theta: f64) -> f64 {
        let xq = 2.0 * (theta - self.lo) / (self.hi - self.lo) - 1.0;
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &uj) in self.x.iter().zip(&self.bary).zip(u) {
            let d = xq - xj;
            if d == 0.0 {
                return uj;
            }
            let t = wj / d;
            num += t * uj;
            den += t;
        }
        num / den
    }

    /// Chebyshev coefficients `c_k` of the interpolant through `u`.
    pub fn coefficients(&self, u: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|k| {
                // Node j sits at angle (2j+1)π/(2m) measured from x = +1, i.e. reversed order.
                let s: f64 = u
                    .iter()
                    .enumerate()
                    .map(|(j, uj)| {
                        let a = (2 * (m - 1 - j) + 1) as f64 * PI / (2 * m) as f64;
                        uj * (k as f64 * a).cos()
                    })
                    .sum();
                if k == 0 {
                    s / m as f64
                } else {
                    2.0 * s / m as f64
                }
            })
            .collect()
    }
}

fn apply(mat: &[f64], u: &[f64], out: &mut [f64]) {
    let m = u.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &mat[i * m..(i + 1) * m];
        *o = row.iter().zip(u).map(|(a, b)| a * b).sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_smooth_function() {
        let p = ChebPatch::new(0.3, 1.7, 24, 0);
        let u: Vec<f64> = p.theta.iter().map(|t| (2.0 * t).sin()).collect();
        let mut du = vec![0.0; 24];
        let mut ddu = vec![0.0; 24];
        p.apply_d1(&u, &mut du);
        p.apply_d2(&u, &mut ddu);
        for (i, t) in p.theta.iter().enumerate() {
            assert!((du[i] - 2.0 * (2.0 * t).cos()).abs() < 1e-11);
            assert!((ddu[i] + 4.0 * (2.0 * t).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_and_interpolation() {
        let p = ChebPatch::new(0.5, 2.5, 16, 0);
        let integral: f64 = p.theta.iter().zip(&p.dtheta_weights).map(|(t, w)| w * t.exp()).sum();
        assert!((integral - (2.5f64.exp() - 0.5f64.exp())).abs() < 1e-12);
        let u: Vec<f64> = p.theta.iter().map(|t| t.cos()).collect();
        for q in [0.5, 0.77, 2.5] {
            assert!((p.interpolate(&u, q) - q.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficients_of_low_degree_polynomial() {
        let p = ChebPatch::new(-1.0, 1.0, 8, 0);
        // 2x^2 - 1 = T_2
        let u: Vec<f64> = p.theta.iter().map(|x| 2.0 * x * x - 1.0).collect();
        let c = p.coefficients(&u);
        for (k, ck) in c.iter().enumerate() {
            let expect = if k == 2 { 1.0 } else { 0.0 };
            assert!((ck - expect).abs() < 1e-14, "k={k} c={ck}");
        }
    }
}
