//! Acceptance suite: one line per criterion, then a nonzero exit if any failed.
//!
//! Criteria 1 to 9 run in process. Criterion 10 runs `lightcone selftest` twice,
//! each in its own child process and output directory, and compares the reports
//! without their metadata. The children are this executable re-entered as the
//! `lightcone` binary through `LIGHTCONE_AS_BINARY`.

use std::ffi::OsString;
use std::path::Path;
use std::process::{Command, Stdio};

use lightcone_cli::acceptance::*;
use serde_json::Value;

/// The tolerances as stated by the acceptance criteria, checked against the
/// constants the suite actually uses.
fn pinned_constants() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("eigenvalue", EIGENVALUE_TOL, 1e-10),
        ("area", AREA_TOL, 1e-12),
        ("marginal tr chi", MARGINAL_TRCHI_TOL, 1e-8),
        ("marginal tr chibar", MARGINAL_TRCHIBAR_TOL, 1e-10),
        ("trichotomy K", TRICHOTOMY_K_TOL, 1e-8),
        ("K constancy", K_CONSTANCY_TOL, 1e-6),
        ("Gauss residual", GAUSS_RESIDUAL_TOL, 1e-8),
        ("Green residual", GREEN_RESIDUAL_TOL, 1e-3),
        ("Green closed form", GREEN_CLOSED_FORM_TOL, 1e-6),
        ("transformation", TRANSFORMATION_TOL, 1e-10),
        ("outer identity", OUTER_IDENTITY_TOL, 1e-8),
        ("slope f lo", SLOPE_F_WINDOW.0, -2.3),
        ("slope f hi", SLOPE_F_WINDOW.1, -1.8),
        ("slope k lo", SLOPE_K_WINDOW.0, -4.6),
        ("slope k hi", SLOPE_K_WINDOW.1, -3.7),
        ("k_eps oracle", K_EPS_ORACLE_REL, 1e-3),
        ("det", DET_TOL, 1e-12),
        ("Riccati", RICCATI_TOL, 1e-10),
        ("Raychaudhuri slack", RAYCHAUDHURI_SLACK, 1e-12),
        ("sphere n_theta", SPHERE_N_THETA as f64, 64.0),
        ("sphere l_max", SPHERE_L_MAX as f64, 32.0),
        ("marginal n", MARGINAL_N as f64, 256.0),
        ("random planes", RANDOM_PLANES as f64, 100.0),
        ("Gauss samples", GAUSS_SAMPLES as f64, 50.0),
        ("transformation samples", TRANSFORMATION_SAMPLES as f64, 20.0),
        ("bandlimit", BANDLIMIT as f64, 8.0),
        ("det samples", DET_SAMPLES as f64, 1e4),
    ]
}

fn pinned_lists_match() -> bool {
    GREEN_LEVELS == [128, 256, 512] && CONSTRUCTION_EPS == [0.2, 0.1, 0.05] && SCAN_EPS == [0.2, 0.1, 0.05, 0.025]
}

fn selftest_report(dir: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(dir.join("selftest.json")).map_err(|e| format!("selftest.json: {e}"))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("report is not an object")?.remove("metadata");
    Ok(v)
}

const AS_BINARY: &str = "LIGHTCONE_AS_BINARY";

fn determinism() -> CriterionOutcome {
    let dirs = [tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir")];
    let children: Vec<_> = dirs
        .iter()
        .map(|d| {
            Command::new(std::env::current_exe().expect("test executable"))
                .env(AS_BINARY, "1")
                .args(["--out-dir".as_ref(), d.path().as_os_str(), "selftest".as_ref()])
                .stdout(Stdio::null())
                .stderr(Stdio::null())
                .spawn()
                .expect("spawn lightcone selftest")
        })
        .collect();
    for mut c in children {
        c.wait().expect("selftest ran");
    }
    match (selftest_report(dirs[0].path()), selftest_report(dirs[1].path())) {
        (Ok(a), Ok(b)) => determinism_outcome(a == b && a.to_string() == b.to_string()),
        (Err(e), _) | (_, Err(e)) => {
            let mut o = determinism_outcome(false);
            o.error = Some(e);
            o
        }
    }
}

fn main() {
    if std::env::var_os(AS_BINARY).is_some() {
        let argv: Vec<OsString> = std::iter::once("lightcone".into()).chain(std::env::args_os().skip(1)).collect();
        std::process::exit(lightcone_cli::run(argv));
    }
    let mut pinned_ok = pinned_lists_match();
    for (name, used, stated) in pinned_constants() {
        if used != stated {
            println!("pinned constant {name}: suite uses {used:e}, criterion states {stated:e}");
            pinned_ok = false;
        }
    }
    println!("pinned tolerances {}", if pinned_ok { "match" } else { "DIFFER" });

    let mut all = Vec::new();
    for id in 1..=9 {
        let outcome = criterion(id);
        println!("{}", outcome.line());
        all.push(outcome);
    }
    let outcome = determinism();
    println!("{}", outcome.line());
    all.push(outcome);

    let failed: Vec<u32> = all.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!("acceptance: {} of {} criteria passed", all.len() - failed.len(), all.len());
    if !failed.is_empty() || !pinned_ok {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
