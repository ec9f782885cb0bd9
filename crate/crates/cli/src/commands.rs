//! Subcommands. Each writes a JSON report plus CSV data into the output directory
//! and returns the names of any failed acceptance checks as an error.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lightcone::construction::{build_f_eps, construction_grid, asymptotic_scan, EnergyProfile, KEps, ScanTable, TrappedReport};
use lightcone::greens::{distributional_residual, pair_with_green, write_embedding_csv, DistributionalResidual};
use lightcone::hyperplane::{intersect_cone, trichotomy_report, Hyperplane, SectionZone, TrichotomyReport, DEFAULT_EDGE_MARGIN};
use lightcone::pulse::{
    energy_per_solid_angle, focusing_check, write_energy_csv, AngularProfile, FocusingCheck, PulseProfile, Seed,
    SeparableSeed, TabulatedSeed, TimeProfile, MIN_QUADRATURE_NODES,
};
use lightcone::section::{GeometryReport, SectionGeometry, SectionSpec, DEFAULT_CLASSIFY_TOL};
use lightcone::sphere::{laplacian, ScalarField, SphereGrid, DEFAULT_PATCH_NODES};
use serde::Serialize;

use crate::acceptance::{self, legendre_normalized, real_harmonic, CriterionOutcome};
use crate::output::{CliError, OutDir, Verdicts};

#[derive(Debug, Parser)]
#[command(name = "lightcone", version, about = "Sections of the Minkowski lightcone and trapped-section checks")]
pub struct Cli {
    /// JSON file whose keys mirror the long flags of the subcommand; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for reports and CSV files.
    #[arg(long, global = true, env = "LIGHTCONE_OUT_DIR", default_value = "lightcone-out")]
    pub out_dir: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Expansions, Gauss curvature and classification of a section u = -f.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Section(SectionArgs),
    /// Section cut out by the hyperplane a0 x0 + a1 x1 + a2 x2 + a3 x3 = c.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Hyperplane(HyperplaneArgs),
    /// Distributional identity of the Green's function and flatness of the marginal section.
    #[command(args_override_self = true)]
    Greens(GreensArgs),
    /// Build f_eps and k_eps and check the trapped-surface inequality.
    #[command(args_override_self = true)]
    Construct(ConstructArgs),
    /// f_eps(0) and k_eps over a list of eps with fitted log-log slopes.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Scan(ScanArgs),
    /// Energy per solid angle of short-pulse data and the focusing check.
    #[command(args_override_self = true)]
    Shortpulse(ShortpulseArgs),
    /// Run the acceptance suite.
    #[command(args_override_self = true)]
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Section(_) => "section",
            Command::Hyperplane(_) => "hyperplane",
            Command::Greens(_) => "greens",
            Command::Construct(_) => "construct",
            Command::Scan(_) => "scan",
            Command::Shortpulse(_) => "shortpulse",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn run(&self, out: &mut OutDir) -> Result<(), CliError> {
        match self {
            Command::Section(a) => section(a, out),
            Command::Hyperplane(a) => hyperplane(a, out),
            Command::Greens(a) => greens(a, out),
            Command::Construct(a) => construct(a, out),
            Command::Scan(a) => scan(a, out),
            Command::Shortpulse(a) => shortpulse(a, out),
            Command::Selftest(a) => selftest(a, out),
        }
    }
}

/// Comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<Vec<T>, String>>()
            .map(List)
    }
}

/// Harmonic term `l:m:c` of `log f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub l: usize,
    pub m: i64,
    pub c: f64,
}

impl FromStr for Term {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [l, m, c] = parts[..] else { return Err(format!("expected l:m:c, got {s:?}")) };
        let l: usize = l.parse().map_err(|e| format!("{l:?}: {e}"))?;
        let m: i64 = m.parse().map_err(|e| format!("{m:?}: {e}"))?;
        let c: f64 = c.parse().map_err(|e| format!("{c:?}: {e}"))?;
        if m.unsigned_abs() as usize > l {
            return Err(format!("|m| must not exceed l in {s:?}"));
        }
        Ok(Term { l, m, c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// f = radius: the round sphere.
    Round,
    /// f = 2/(1 - cos θ) on [theta_min, π]: the marginal section.
    Marginal,
    /// f = radius · exp(Σ c Y_l^m) from --terms.
    Harmonic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SectionArgs {
    #[arg(long, value_enum, default_value = "round")]
    pub shape: Shape,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Real harmonics of log f as l:m:c, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub terms: Option<List<Term>>,
    /// θ-nodes (default 64 on the full sphere, 256 for the marginal zone).
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// φ-nodes on the full sphere (default 2 n_theta).
    #[arg(long)]
    pub n_phi: Option<usize>,
    /// Start of the zone for --shape marginal.
    #[arg(long, default_value_t = 0.2)]
    pub theta_min: f64,
    /// Tolerance for an expansion to count as identically zero.
    #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
    pub tol: f64,
}

#[derive(Debug, Serialize)]
struct SectionReport {
    geometry: GeometryReport,
    path_discrepancy: f64,
    n_theta: usize,
    n_phi: usize,
}

fn section(a: &SectionArgs, out: &mut OutDir) -> Result<(), CliError> {
    let spec = match a.shape {
        Shape::Marginal => {
            let g = SphereGrid::axisym(a.n_theta.unwrap_or(256), a.theta_min)?;
            SectionSpec::from_fn(&g, |t, _| 2.0 / (1.0 - t.cos()))?
        }
        Shape::Round | Shape::Harmonic => {
            let n = a.n_theta.unwrap_or(64);
            let g = SphereGrid::full_sphere(n, a.n_phi.unwrap_or(2 * n))?;
            let terms = match (a.shape, &a.terms) {
                (Shape::Harmonic, Some(t)) => t.0.clone(),
                (Shape::Harmonic, None) => return Err(CliError::usage("--shape harmonic needs --terms")),
                _ => Vec::new(),
            };
            let r = a.radius;
            SectionSpec::from_fn(&g, |t, p| r * terms.iter().map(|h| h.c * real_harmonic(h.l, h.m, t, p)).sum::<f64>().exp())?
        }
    };
    let geo = SectionGeometry::compute(&spec, a.tol)?;
    let grid = spec.f().grid().clone();
    out.csv("section.csv", |w| {
        writeln!(w, "theta,phi,f,tr_chi,tr_chibar,K")?;
        for (i, (t, p)) in grid.nodes().enumerate() {
            let v = |f: &ScalarField| f.values()[i];
            writeln!(w, "{t:.16e},{p:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", v(spec.f()), v(&geo.tr_chi), v(&geo.tr_chibar), v(&geo.gauss_k))?;
        }
        Ok(())
    })?;
    let report =
        SectionReport { geometry: geo.report(), path_discrepancy: geo.path_discrepancy, n_theta: grid.n_theta(), n_phi: grid.n_phi() };
    out.report("section.json", a, &report)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HyperplaneArgs {
    /// Covector a0,a1,a2,a3 of the plane.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<List<f64>>,
    /// Right-hand side c of the plane equation.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Width of the excluded band next to the edge of a noncompact zone.
    #[arg(long, default_value_t = DEFAULT_EDGE_MARGIN)]
    pub margin: f64,
    #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
    pub tol: f64,
}

#[derive(Debug, Serialize)]
struct HyperplaneReport {
    #[serde(flatten)]
    trichotomy: TrichotomyReport,
    /// Lab direction of the rotated pole `θ = 0`.
    pole_direction: [f64; 3],
    theta_star: f64,
}

fn hyperplane(a: &HyperplaneArgs, out: &mut OutDir) -> Result<(), CliError> {
    let coeffs: [f64; 4] = match &a.a {
        Some(List(v)) => v.as_slice().try_into().map_err(|_| CliError::usage(format!("--a needs 4 values, got {}", v.len())))?,
        None => return Err(CliError::usage("missing --a")),
    };
    let c = a.c.ok_or_else(|| CliError::usage("missing --c"))?;
    let h = Hyperplane::from_coefficients(coeffs, c)?;
    let zone = SectionZone::of(&h)?;
    let grid = zone.grid(a.margin)?;
    let report = trichotomy_report(&h, &grid, a.tol)?;
    let geo = SectionGeometry::compute(&intersect_cone(&h, &grid)?, a.tol)?;
    out.csv("hyperplane.csv", |w| {
        writeln!(w, "theta,f,tr_chi,tr_chibar,K")?;
        for (i, (t, _)) in grid.nodes().enumerate() {
            let v = |f: &ScalarField| f.values()[i];
            writeln!(w, "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", v(geo.spec.f()), v(&geo.tr_chi), v(&geo.tr_chibar), v(&geo.gauss_k))?;
        }
        Ok(())
    })?;
    let mut verdicts = Verdicts::default();
    verdicts.push("K constant", report.k_constant);
    verdicts.push("sign of K matches the plane", report.sign_consistent);
    let report = HyperplaneReport { trichotomy: report, pole_direction: zone.lab_direction(0.0, 0.0), theta_star: zone.theta_star };
    out.report("hyperplane.json", a, &report)?;
    verdicts.into_result()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GreensArgs {
    /// Full-sphere θ-resolutions of the refinement study, increasing.
    #[arg(long, default_value = "128,256,512")]
    pub levels: List<usize>,
    /// Edge of the zone for the flatness check and the embedding CSV.
    #[arg(long, default_value_t = 0.2)]
    pub theta_min: f64,
    #[arg(long, default_value_t = acceptance::GREEN_RESIDUAL_TOL)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = acceptance::GREEN_CLOSED_FORM_TOL)]
    pub closed_form_tol: f64,
    /// Bound on |K| of the marginal section.
    #[arg(long, default_value_t = acceptance::MARGINAL_TRCHI_TOL)]
    pub flatness_tol: f64,
}

#[derive(Debug, Serialize)]
struct GreensLevel {
    n_theta: usize,
    residuals: Vec<(String, DistributionalResidual)>,
    /// `∫ w cos θ dA`, exactly `−2π`.
    cos_pairing: f64,
}

#[derive(Debug, Serialize)]
struct GreensReport {
    levels: Vec<GreensLevel>,
    flatness: f64,
    checks: Verdicts,
}

fn greens(a: &GreensArgs, out: &mut OutDir) -> Result<(), CliError> {
    let levels = &a.levels.0;
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::usage("--levels must be a nonempty increasing list"));
    }
    let tests: [(&str, fn(f64) -> f64); 4] =
        [("1", |_| 1.0), ("cos", f64::cos), ("Y20", |t| legendre_normalized(2, 0, t)), ("Y40", |t| legendre_normalized(4, 0, t))];
    let mut rows = Vec::new();
    for &n in levels {
        let g = SphereGrid::full_sphere(n, 8)?;
        let mut residuals = Vec::new();
        for (name, psi) in tests {
            residuals.push((name.to_string(), distributional_residual(&ScalarField::from_fn(&g, |t, _| psi(t))?)?));
        }
        let cos_pairing = pair_with_green(&ScalarField::from_fn(&g, |t, _| t.cos())?)?;
        rows.push(GreensLevel { n_theta: n, residuals, cos_pairing });
    }
    let flatness = acceptance::marginal_flatness(a.theta_min)?;
    let embed_grid = SphereGrid::axisym_graded(a.theta_min, DEFAULT_PATCH_NODES)?;
    out.csv("marginal_embedding.csv", |w| write_embedding_csv(&embed_grid, w).map_err(std::io::Error::other))?;
    out.csv("greens_residuals.csv", |w| {
        writeln!(w, "n_theta,test,green_pairing,mass,pole_value,residual")?;
        for row in &rows {
            for (name, r) in &row.residuals {
                writeln!(w, "{},{name},{:.16e},{:.16e},{:.16e},{:.16e}", row.n_theta, r.green_pairing, r.mass, r.pole_value, r.residual)?;
            }
        }
        Ok(())
    })?;

    let mut checks = Verdicts::default();
    let last = rows.last().expect("levels is nonempty");
    for (i, (name, _)) in tests.iter().enumerate() {
        checks.push(format!("residual[{name}] <= {:e}", a.residual_tol), last.residuals[i].1.residual <= a.residual_tol);
        let decreasing = rows.windows(2).all(|w| {
            let (r0, r1) = (w[0].residuals[i].1.residual, w[1].residuals[i].1.residual);
            r1 < r0 || r1 <= acceptance::GREEN_NOISE_FLOOR
        });
        checks.push(format!("residual[{name}] decreasing"), decreasing);
    }
    checks.push("int w cos = -2pi", (last.cos_pairing + 2.0 * PI).abs() <= a.closed_form_tol);
    checks.push("marginal section flat", flatness <= a.flatness_tol);
    let report = GreensReport { levels: rows, flatness, checks };
    out.report("greens.json", a, &report)?;
    report.checks.into_result()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Trapped,
    Untrapped,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Energy on the cap θ ≤ 2 eps, in units of k_eps; zero means no energy.
    #[arg(long, default_value_t = 1.1)]
    pub k_scale: f64,
    /// Both bounds must lie below -margin (never less strict than 1e-12).
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
    /// Fail with exit code 3 unless the verdict matches.
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
}

#[derive(Debug, Serialize)]
struct ConstructReport {
    epsilon: f64,
    f_at_pole: f64,
    k_eps: KEps,
    /// Constant energy on the cap.
    k_cap: f64,
    transition_laplacian_sup: f64,
    verdict: TrappedReport,
}

fn construct(a: &ConstructArgs, out: &mut OutDir) -> Result<(), CliError> {
    if !(a.k_scale >= 0.0 && a.k_scale.is_finite()) {
        return Err(CliError::validation("config", "--k-scale must be finite and nonnegative"));
    }
    let grid = construction_grid(a.eps)?;
    let c = build_f_eps(a.eps, &grid)?.with_k_eps()?;
    let k_eps = c.k_eps.expect("with_k_eps fills k_eps");
    let k_cap = a.k_scale * k_eps.value;
    let energy = EnergyProfile::cap_indicator(&grid, k_cap, c.cap_boundary())?;
    let verdict = c.verify(&energy, a.margin)?;
    write_construction_csv(out, &c, &energy)?;
    let report = ConstructReport {
        epsilon: a.eps,
        f_at_pole: c.f_at_pole(),
        k_eps,
        k_cap,
        transition_laplacian_sup: c.transition_laplacian_sup()?,
        verdict,
    };
    out.report("construct.json", a, &report)?;
    expect_verdict(a.expect, report.verdict.trapped)
}

fn expect_verdict(expect: Option<Expect>, trapped: bool) -> Result<(), CliError> {
    let mut v = Verdicts::default();
    match expect {
        Some(Expect::Trapped) => v.push("expected trapped", trapped),
        Some(Expect::Untrapped) => v.push("expected untrapped", !trapped),
        None => {}
    }
    v.into_result()
}

fn write_construction_csv(out: &mut OutDir, c: &lightcone::construction::EpsConstruction, k: &EnergyProfile) -> Result<(), CliError> {
    let lap = laplacian(&c.log_f)?;
    let grid = c.f.grid().clone();
    out.csv("construct.csv", |w| {
        writeln!(w, "theta,log_f,f,lap_log_f,threshold_integrand,k,upper_bound")?;
        for (i, (t, _)) in grid.nodes().enumerate() {
            let (lf, f, l, kv) = (c.log_f.values()[i], c.f.values()[i], lap.values()[i], k.field().values()[i]);
            let upper = 2.0 / f * (1.0 - l) - 2.0 * kv / (f * f);
            writeln!(w, "{t:.16e},{lf:.16e},{f:.16e},{l:.16e},{:.16e},{kv:.16e},{upper:.16e}", f * (1.0 - l))?;
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    /// Strictly decreasing values of eps.
    #[arg(long, default_value = "0.2,0.1,0.05,0.025")]
    pub eps: List<f64>,
    /// Accepted range lo,hi of the log-log slope of f_eps(0).
    #[arg(long, allow_hyphen_values = true, default_value = "-2.3,-1.8")]
    pub slope_f_window: List<f64>,
    /// Accepted range lo,hi of the log-log slope of k_eps.
    #[arg(long, allow_hyphen_values = true, default_value = "-4.6,-3.7")]
    pub slope_k_window: List<f64>,
}

fn window(l: &List<f64>, flag: &str) -> Result<(f64, f64), CliError> {
    match l.0[..] {
        [lo, hi] if lo <= hi => Ok((lo, hi)),
        _ => Err(CliError::usage(format!("--{flag} needs two increasing values"))),
    }
}

#[derive(Debug, Serialize)]
struct ScanReport {
    table: ScanTable,
    checks: Verdicts,
}

fn scan(a: &ScanArgs, out: &mut OutDir) -> Result<(), CliError> {
    let wf = window(&a.slope_f_window, "slope-f-window")?;
    let wk = window(&a.slope_k_window, "slope-k-window")?;
    let table = asymptotic_scan(&a.eps.0)?;
    out.csv("scan.csv", |w| table.write_csv(w))?;
    let mut checks = Verdicts::default();
    checks.push(format!("slope of f_eps(0) = {:.4} in [{}, {}]", table.slope_f, wf.0, wf.1), (wf.0..=wf.1).contains(&table.slope_f));
    checks.push(format!("slope of k_eps = {:.4} in [{}, {}]", table.slope_k, wk.0, wk.1), (wk.0..=wk.1).contains(&table.slope_k));
    let report = ScanReport { table, checks };
    out.report("scan.json", a, &report)?;
    report.checks.into_result()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeKind {
    Linear,
    Poly,
    Smooth,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShortpulseArgs {
    /// Tabulated seed, CSV with header s,theta,psi11,psi12; replaces the separable seed.
    #[arg(long, value_name = "PATH")]
    pub profile: Option<PathBuf>,
    /// Time factor a(s) of the separable seed.
    #[arg(long, value_enum, default_value = "smooth")]
    pub time: TimeKind,
    /// Exponent of the polynomial bump (4s(1-s))^order.
    #[arg(long, default_value_t = 2)]
    pub order: u32,
    #[arg(long, allow_hyphen_values = true, default_value_t = 6.0)]
    pub psi11: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    pub psi12: f64,
    /// Confine the seed to θ < theta-max with the standard cutoff.
    #[arg(long)]
    pub theta_max: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r0: f64,
    /// θ-nodes of the energy profile on [0, π].
    #[arg(long, default_value_t = 64)]
    pub n_theta: usize,
    /// Gauss–Legendre nodes in the retarded time.
    #[arg(long, default_value_t = MIN_QUADRATURE_NODES)]
    pub nodes: usize,
    /// RK4 steps of the focusing check.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Also verify f_eps for this eps against the pulse's energy.
    #[arg(long)]
    pub construct_eps: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub margin: f64,
}

#[derive(Debug, Serialize)]
struct PulseConstruct {
    epsilon: f64,
    k_eps: KEps,
    /// Smallest energy on the cap θ ≤ 2 eps, in the scaling of the inequality.
    k_cap_min: f64,
    verdict: TrappedReport,
}

#[derive(Debug, Serialize)]
struct ShortpulseReport {
    /// Every quantity drops the `O(δ^{1/2})` corrections.
    model: &'static str,
    /// SHA-256 of the tabulated seed file, when one is used.
    profile_sha256: Option<String>,
    k_max: f64,
    k_max_theta: f64,
    focusing: Vec<FocusingCheck>,
    construct: Option<PulseConstruct>,
    checks: Verdicts,
}

fn load_seed(a: &ShortpulseArgs) -> Result<(Arc<dyn Seed>, Option<String>), CliError> {
    if let Some(path) = &a.profile {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let seed = TabulatedSeed::from_csv(bytes.as_slice())?;
        return Ok((Arc::new(seed), Some(crate::config::config_hash(&bytes))));
    }
    let time = match a.time {
        TimeKind::Linear => TimeProfile::Linear,
        TimeKind::Poly => TimeProfile::PolyBump { order: a.order },
        TimeKind::Smooth => TimeProfile::SmoothBump,
    };
    let angular = match a.theta_max {
        Some(theta_max) if theta_max > 0.0 && theta_max <= PI => AngularProfile::CapBump { psi11: a.psi11, psi12: a.psi12, theta_max },
        Some(t) => return Err(CliError::validation("config", format!("--theta-max must lie in (0, pi], got {t}"))),
        None => AngularProfile::Constant { psi11: a.psi11, psi12: a.psi12 },
    };
    Ok((Arc::new(SeparableSeed { time, angular }), None))
}

fn shortpulse(a: &ShortpulseArgs, out: &mut OutDir) -> Result<(), CliError> {
    let (seed, profile_sha256) = load_seed(a)?;
    let profile = PulseProfile::new(seed, a.delta, a.r0)?;
    let grid = SphereGrid::axisym(a.n_theta, 0.0)?;
    let k = energy_per_solid_angle(&profile, &grid, a.nodes)?;
    out.csv("energy.csv", |w| write_energy_csv(&k, w))?;
    let i_max = k.field().argmax();
    let (k_max, k_max_theta) = (k.field().values()[i_max], grid.node(i_max).0);

    let mut checks = Verdicts::default();
    let mut focusing = Vec::new();
    for theta in [0.0, k_max_theta] {
        let fc = focusing_check(&profile, theta, 0.0, a.steps)?;
        let slack = acceptance::RAYCHAUDHURI_SLACK;
        checks.push(format!("tr chi <= focusing bound at theta={theta:.6}"), fc.raychaudhuri.trchi <= fc.raychaudhuri.bound + slack);
        focusing.push(fc);
    }

    let construct = match a.construct_eps {
        None => None,
        Some(eps) => {
            let cgrid = construction_grid(eps)?;
            let c = build_f_eps(eps, &cgrid)?.with_k_eps()?;
            // The inequality takes r0² ∫e, which is 8π times the energy per solid angle.
            let per_solid_angle = energy_per_solid_angle(&profile, &cgrid, a.nodes)?;
            let energy = EnergyProfile::new(per_solid_angle.field().map(|v| 8.0 * PI * v)?)?;
            let k_cap_min = energy.field().min_in_zone(0.0, c.cap_boundary()).map(|(v, _)| v).unwrap_or(f64::NAN);
            let verdict = c.verify(&energy, a.margin)?;
            write_construction_csv(out, &c, &energy)?;
            Some(PulseConstruct { epsilon: eps, k_eps: c.k_eps.expect("with_k_eps fills k_eps"), k_cap_min, verdict })
        }
    };
    let report = ShortpulseReport { model: "leading_order", profile_sha256, k_max, k_max_theta, focusing, construct, checks };
    out.report("shortpulse.json", a, &report)?;
    report.checks.into_result()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelftestArgs {
    /// Criteria to run (1 to 9); the determinism rerun covers the same set.
    #[arg(long, default_value = "1,2,3,4,5,6,7,8,9")]
    pub criteria: List<u32>,
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub criteria: Vec<CriterionOutcome>,
    pub passed: bool,
}

/// Runs `ids` twice and adds the comparison as criterion 10.
pub fn selftest_outcomes(ids: &[u32]) -> Vec<CriterionOutcome> {
    let first: Vec<CriterionOutcome> = ids.iter().map(|&id| acceptance::criterion(id)).collect();
    let second: Vec<CriterionOutcome> = ids.iter().map(|&id| acceptance::criterion(id)).collect();
    let same = serde_json::to_string(&first).ok() == serde_json::to_string(&second).ok();
    let mut all = first;
    all.push(acceptance::determinism_outcome(same));
    all
}

fn selftest(a: &SelftestArgs, out: &mut OutDir) -> Result<(), CliError> {
    if let Some(bad) = a.criteria.0.iter().find(|&&id| !(1..=9).contains(&id)) {
        return Err(CliError::usage(format!("no criterion {bad}; choose from 1 to 9")));
    }
    let criteria = selftest_outcomes(&a.criteria.0);
    for c in &criteria {
        println!("{}", c.line());
    }
    let failed: Vec<String> = criteria.iter().filter(|c| !c.passed).map(|c| format!("criterion {}", c.id)).collect();
    let report = SelftestReport { passed: failed.is_empty(), criteria };
    out.report("selftest.json", a, &report)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::acceptance(&failed))
    }
}
