//! Property tests of the operator, section and construction invariants.

use std::f64::consts::PI;
use std::sync::Arc;

use lightcone::construction::{build_f_eps, compute_k_eps, construction_grid, verify_trapped, EnergyProfile};
use lightcone::section::{gauss_curvature, null_expansions, SectionSpec};
use lightcone::sphere::{integrate, laplacian, ScalarField, SphereGrid};
use proptest::prelude::*;

/// Unit-normalised real harmonic from the plain three-term recurrence.
fn harmonic(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let ma = m.unsigned_abs() as usize;
    let (x, s) = (theta.cos(), theta.sin());
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=ma {
        pmm *= s * ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
    }
    let p = if l == ma {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = x * ((2 * ma + 3) as f64).sqrt() * pmm;
        for ll in ma + 2..=l {
            let a = (((4 * ll * ll - 1) as f64) / ((ll * ll - ma * ma) as f64)).sqrt();
            let b = ((((ll - 1) * (ll - 1) - ma * ma) as f64) / ((4 * (ll - 1) * (ll - 1) - 1) as f64)).sqrt();
            let next = a * (x * cur - b * prev);
            prev = cur;
            cur = next;
        }
        cur
    };
    match m {
        0 => p,
        m if m > 0 => p * (m as f64 * phi).cos(),
        m => p * ((-m) as f64 * phi).sin(),
    }
}

fn grid() -> Arc<SphereGrid> {
    SphereGrid::full_sphere(32, 64).unwrap()
}

fn field(g: &Arc<SphereGrid>, terms: &[(usize, i64, f64)]) -> ScalarField {
    ScalarField::from_fn(g, |t, p| terms.iter().map(|&(l, m, c)| c * harmonic(l, m, t, p)).sum()).unwrap()
}

fn terms(max_l: usize) -> impl Strategy<Value = Vec<(usize, i64, f64)>> {
    prop::collection::vec(
        (1..=max_l).prop_flat_map(|l| (Just(l), -(l as i64)..=(l as i64), -1.0..1.0f64)),
        1..6,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn harmonics_are_eigenfunctions(l in 0usize..=16, frac in 0.0..1.0f64) {
        let m = ((frac * (2 * l + 1) as f64).floor() as i64 - l as i64).clamp(-(l as i64), l as i64);
        let g = grid();
        let y = field(&g, &[(l, m, 1.0)]);
        let ly = laplacian(&y).unwrap();
        let err = ly.zip_map(&y, |a, b| (a + (l * (l + 1)) as f64 * b).abs()).unwrap().max();
        prop_assert!(err <= 1e-10 * y.max_abs(), "l={} m={} err={:e}", l, m, err);
    }

    #[test]
    fn quadrature_is_exact_for_polynomials(coeffs in prop::collection::vec(-1.0..1.0f64, 1..64), m in 1i64..8) {
        let g = grid();
        let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let p = ScalarField::from_fn(&g, |t, _| poly(t.cos())).unwrap();
        // ∫ x^k dA = 4π/(k+1) for even k, 0 for odd k.
        let exact: f64 = coeffs.iter().enumerate().map(|(k, c)| if k % 2 == 0 { c * 4.0 * PI / (k + 1) as f64 } else { 0.0 }).sum();
        let scale = coeffs.iter().map(|c| c.abs()).sum::<f64>() * 4.0 * PI;
        prop_assert!((integrate(&p) - exact).abs() <= 1e-12 * scale);
        let wave = ScalarField::from_fn(&g, |t, ph| poly(t.cos()) * (m as f64 * ph).cos()).unwrap();
        prop_assert!(integrate(&wave).abs() <= 1e-12 * scale);
    }

    #[test]
    fn laplacian_is_symmetric(u in terms(10), v in terms(10)) {
        let g = grid();
        let (fu, fv) = (field(&g, &u), field(&g, &v));
        let a = integrate(&laplacian(&fu).unwrap().zip_map(&fv, |x, y| x * y).unwrap());
        let b = integrate(&fu.zip_map(&laplacian(&fv).unwrap(), |x, y| x * y).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0));
    }

    #[test]
    fn constants_are_annihilated(c in -100.0..100.0f64) {
        let full = laplacian(&ScalarField::constant(&grid(), c).unwrap()).unwrap().max_abs();
        let zone = laplacian(&ScalarField::constant(&SphereGrid::axisym(64, 0.3).unwrap(), c).unwrap()).unwrap().max_abs();
        prop_assert!(full <= 1e-12 && zone <= 1e-12, "{:e} {:e}", full, zone);
    }

    #[test]
    fn expansions_satisfy_the_gauss_identity(t in terms(4), amp in 0.05..0.6f64) {
        let g = SphereGrid::full_sphere(64, 128).unwrap();
        let h = field(&g, &t);
        let scale = amp / h.max_abs().max(1e-300);
        // The identity is claimed for resolved sections only.
        let spec = SectionSpec::new(h.map(|v| (scale * v).exp()).unwrap());
        prop_assume!(!matches!(spec, Err(lightcone::Error::Resolution(_))));
        let spec = spec.unwrap();
        let pair = null_expansions(&spec).unwrap();
        let k = gauss_curvature(&spec).unwrap();
        let prod = pair.tr_chi.zip_map(&pair.tr_chibar, |a, b| a * b).unwrap();
        let err = prod.zip_map(&k, |p, kv| (p + 4.0 * kv).abs()).unwrap().max();
        prop_assert!(err <= 1e-8, "{:e}", err);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn k_eps_is_finite_and_positive(eps in 0.02..=0.3f64) {
        let g = construction_grid(eps).unwrap();
        let k = compute_k_eps(&build_f_eps(eps, &g).unwrap()).unwrap();
        prop_assert!(k.value.is_finite() && k.value > 0.0);
        prop_assert!(k.theta <= 2.0 * eps);
    }

    #[test]
    fn more_energy_never_untraps(eps_i in 0usize..3, scale in 0.5..2.0f64, extra in 0.0..5.0f64, width in 0.1..3.0f64) {
        let eps = [0.2, 0.1, 0.05][eps_i];
        let g = construction_grid(eps).unwrap();
        let c = build_f_eps(eps, &g).unwrap().with_k_eps().unwrap();
        let k_eps = c.k_eps.unwrap().value;
        let base = EnergyProfile::cap_indicator(&g, scale * k_eps, 2.0 * eps).unwrap();
        let bump = base.field().map_with_node(|v, t, _| v + extra * k_eps * (-t / width).exp()).unwrap();
        let more = EnergyProfile::new(bump).unwrap();
        let spec = c.spec().unwrap();
        let r0 = verify_trapped(&spec, &base, 0.0, 2.0 * eps).unwrap();
        let r1 = verify_trapped(&spec, &more, 0.0, 2.0 * eps).unwrap();
        prop_assert!(!r0.trapped || r1.trapped);
    }
}

#[test]
fn threshold_grows_as_eps_shrinks() {
    let mut last = 0.0;
    for eps in [0.3, 0.2, 0.1, 0.05, 0.025] {
        let k = compute_k_eps(&build_f_eps(eps, &construction_grid(eps).unwrap()).unwrap()).unwrap().value;
        assert!(k > last, "k_eps({eps}) = {k} after {last}");
        last = k;
    }
}
