//! Executes one experiment and writes its run directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use orbitflow::dynamics::{
    exact_magnetic_geodesic, integrate, measure_circle_radius, radius_scan, GeodesicFlow, MagneticSetup, PendulumFlow,
    SemidirectFlow, Trajectory,
};
use orbitflow::integrals::{
    default_lambda_grid, family_semidirect, lax_residual, lax_spectrum, momentum_components, s2_pendulum_family, spectral_distance,
    theta_map, DriftEntry, IntegralFamily,
};
use orbitflow::numeric::matrix_to_csv;
use orbitflow::orbit::Witness;
use orbitflow::poisson::{completeness_report, condition_a1, condition_a2, orbit_base, pencil_form, tori_dimension};
use orbitflow::{AlgebraVector, LieAlgebraSpec, OrbitContext, PhasePoint};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliError;
use crate::manifest::{sha256_hex, FileEntry, Inputs, Manifest, Tolerances, MANIFEST_FILE};

/// Number of Lax spectra sampled along a trajectory.
const LAX_SAMPLES: usize = 200;

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

struct Artifacts {
    hash: String,
    files: Vec<(String, String)>,
    metrics: BTreeMap<String, f64>,
    warnings: Vec<String>,
}

impl Artifacts {
    fn csv(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), format!("# config_hash={}\n{body}", self.hash)));
    }

    fn json(&mut self, name: &str, report: &impl Serialize) -> Result<(), CliError> {
        let doc = json!({ "config_hash": self.hash, "report": report });
        let text = serde_json::to_string_pretty(&doc).map_err(orbitflow::Error::from)?;
        self.files.push((name.to_string(), text + "\n"));
        Ok(())
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn flag(&mut self, name: &str, value: bool) {
        self.metric(name, if value { 1.0 } else { 0.0 });
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(cfg.canonical_json().as_bytes())
}

/// Runs the experiment and writes `<out>/run-<hash12>` (with a numeric suffix
/// if that directory already exists).
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let spec = Arc::new(cfg.validate()?);
    let seed = spec.vector(&cfg.seed_a)?;
    let ctx = OrbitContext::new(spec.clone(), seed)?;
    let mut art = Artifacts { hash: config_hash(cfg), files: Vec::new(), metrics: BTreeMap::new(), warnings: Vec::new() };

    let start = Instant::now();
    match cfg.kind {
        ExperimentKind::Geodesic => geodesic(cfg, &ctx, &mut art)?,
        ExperimentKind::Pendulum => pendulum(cfg, &ctx, &mut art)?,
        ExperimentKind::Semidirect => semidirect(cfg, &ctx, &mut art)?,
        ExperimentKind::RadiusScan => radius_table(cfg, &ctx, &mut art)?,
        ExperimentKind::Certify => certify(cfg, &ctx, &mut art)?,
        ExperimentKind::Lax => lax(cfg, &ctx, &mut art)?,
    }
    let wall_time_s = start.elapsed().as_secs_f64();

    let dir = allocate_run_dir(out, &art.hash)?;
    let mut files = Vec::with_capacity(art.files.len());
    for (name, body) in &art.files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        files.push(FileEntry { path: name.clone(), sha256: sha256_hex(body.as_bytes()), bytes: body.len() });
    }
    let manifest = Manifest {
        toolkit: "orbitflow".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: cfg.kind,
        config_hash: art.hash,
        config: serde_json::from_str(&cfg.canonical_json()).map_err(orbitflow::Error::from)?,
        inputs: inputs(&ctx),
        tolerances: Tolerances::default(),
        threads: rayon::current_num_threads(),
        wall_time_s,
        files,
        metrics: art.metrics,
        warnings: art.warnings,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(orbitflow::Error::from)?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(RunOutcome { dir, manifest })
}

fn allocate_run_dir(out: &Path, hash: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let base = format!("run-{}", &hash[..12]);
    for n in 0.. {
        let name = if n == 0 { base.clone() } else { format!("{base}-{n}") };
        let dir = out.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::io(&dir, e)),
        }
    }
    unreachable!("the suffix loop only exits by returning")
}

fn inputs(ctx: &OrbitContext) -> Inputs {
    let spec = ctx.algebra();
    Inputs {
        algebra: spec.name().to_string(),
        dim: spec.dim(),
        rank: spec.rank(),
        ann_dim: ctx.ann_dim(),
        orbit_dim: ctx.orbit_dim(),
        phase_dim: ctx.phase_dim(),
        regular_orbit: ctx.is_regular(),
        seed_invariants: ctx.seed_invariants().to_vec(),
    }
}

fn initial_point(cfg: &ExperimentConfig, ctx: &OrbitContext) -> Result<(PhasePoint, Witness), CliError> {
    let (mut pt, witness) = ctx.random_phase_point(cfg.seed);
    if cfg.unit_speed {
        let spec = ctx.algebra();
        let m = spec.bracket(&pt.x, &pt.p)?;
        let speed = spec.inner(&m, &m)?.sqrt();
        if speed == 0.0 {
            return Err(orbitflow::Error::Numerical("sampled momentum has zero speed".into()).into());
        }
        pt.p = pt.p.scale(1.0 / speed);
    }
    Ok((pt, witness))
}

fn b_vector(cfg: &ExperimentConfig, spec: &LieAlgebraSpec) -> Result<AlgebraVector, CliError> {
    Ok(match &cfg.b {
        Some(b) => spec.vector(b)?,
        None => spec.zero(),
    })
}

fn setup(cfg: &ExperimentConfig, spec: &LieAlgebraSpec) -> Result<MagneticSetup, CliError> {
    Ok(MagneticSetup::new(cfg.epsilon(), b_vector(cfg, spec)?).with_kappa(cfg.kappa))
}

fn lambda_grid(cfg: &ExperimentConfig, spec: &LieAlgebraSpec) -> Vec<f64> {
    cfg.lambda_grid.clone().unwrap_or_else(|| default_lambda_grid(spec))
}

/// The integrals certified and tracked for a pendulum: the pair {H, ⟨b, Φ_ε⟩}
/// on so(3), Re and Im of the shifted invariants elsewhere.
fn pendulum_family(cfg: &ExperimentConfig, spec: &LieAlgebraSpec, setup: &MagneticSetup) -> Result<IntegralFamily, CliError> {
    if spec.is_so3() {
        Ok(s2_pendulum_family(spec, &MagneticSetup::new(setup.epsilon, setup.effective_b()))?)
    } else {
        Ok(family_semidirect(spec, &setup.effective_b(), &lambda_grid(cfg, spec), setup.epsilon)?)
    }
}

fn max_rel(entries: &[DriftEntry]) -> f64 {
    entries.iter().map(|e| e.max_drift_rel).fold(0.0, f64::max)
}

fn record_trajectory(art: &mut Artifacts, traj: &Trajectory) -> Result<(), CliError> {
    let summary = traj.summary();
    art.metric("steps", summary.steps as f64);
    art.metric("energy_t0", summary.energy_t0);
    art.metric("energy_drift_abs", summary.energy_drift.abs);
    art.metric("energy_drift_rel", summary.energy_drift.rel);
    art.metric("max_res_orbit", summary.max_res_orbit);
    art.metric("max_res_cotangent", summary.max_res_cotangent);
    art.csv("trajectory.csv", traj.to_csv());
    art.json("summary.json", &summary)
}

fn geodesic(cfg: &ExperimentConfig, ctx: &OrbitContext, art: &mut Artifacts) -> Result<(), CliError> {
    let spec = ctx.algebra();
    let int = cfg.integrator();
    let epsilon = cfg.epsilon();
    let (pt, witness) = initial_point(cfg, ctx)?;
    let traj = integrate(&GeodesicFlow { ctx, epsilon }, &pt.to_state(), int.t_end, int.h, int.project_every)?;
    record_trajectory(art, &traj)?;

    let t_end = *traj.times.last().expect("trajectories include t = 0");
    let exact = exact_magnetic_geodesic(ctx, &pt.x, &pt.p, Some(&witness), epsilon, t_end)?;
    let last = traj.phase_point(traj.len() - 1);
    let err = (&last.x.0 - &exact.x.0).amax().max((&last.p.0 - &exact.p.0).amax());
    art.metric("terminal_error", err);

    let drift = momentum_components(spec, epsilon).drift_report(spec, &traj);
    art.metric("momentum_drift_max_rel", max_rel(&drift));
    art.json("drift.json", &drift)?;

    if spec.is_so3() {
        match measure_circle_radius(&traj) {
            Ok(r) => {
                art.metric("radius", r);
                art.metric("radius_expected", (1.0 / epsilon.abs()).atan());
            }
            Err(e) => art.warnings.push(format!("circle radius not measured: {e}")),
        }
    }
    Ok(())
}

fn pendulum(cfg: &ExperimentConfig, ctx: &OrbitContext, art: &mut Artifacts) -> Result<(), CliError> {
    let spec = ctx.algebra();
    let int = cfg.integrator();
    let setup = setup(cfg, spec)?;
    let (pt, _) = initial_point(cfg, ctx)?;
    let traj = integrate(&PendulumFlow { ctx, setup: &setup }, &pt.to_state(), int.t_end, int.h, int.project_every)?;
    record_trajectory(art, &traj)?;
    let drift = pendulum_family(cfg, spec, &setup)?.drift_report(spec, &traj);
    art.metric("family_drift_max_rel", max_rel(&drift));
    art.json("drift.json", &drift)
}

fn semidirect(cfg: &ExperimentConfig, ctx: &OrbitContext, art: &mut Artifacts) -> Result<(), CliError> {
    let spec = ctx.algebra();
    let int = cfg.integrator();
    let setup = setup(cfg, spec)?;
    let b = setup.effective_b();
    let (pt, _) = initial_point(cfg, ctx)?;
    let zeta = theta_map(spec, &pt, setup.epsilon);
    let traj = integrate(&SemidirectFlow { spec, b: &b }, &zeta.to_real(), int.t_end, int.h, int.project_every)?;
    record_trajectory(art, &traj)?;
    let drift = family_semidirect(spec, &b, &lambda_grid(cfg, spec), setup.epsilon)?.drift_report(spec, &traj);
    art.metric("family_drift_max_rel", max_rel(&drift));
    art.json("drift.json", &drift)
}

fn radius_table(cfg: &ExperimentConfig, ctx: &OrbitContext, art: &mut Artifacts) -> Result<(), CliError> {
    let int = cfg.integrator();
    let epsilons = cfg.epsilons.as_deref().unwrap_or_default();
    let (pt, _) = initial_point(cfg, ctx)?;
    let rows = radius_scan(ctx, &pt, epsilons, int.h, int.t_end, int.project_every, orbitflow::Exec::default())?;
    let mut csv = String::from("epsilon,measured,expected,abs_error\n");
    let mut worst = 0.0_f64;
    for r in &rows {
        let err = (r.measured - r.expected).abs();
        worst = worst.max(err);
        csv.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.3e}\n", r.epsilon, r.measured, r.expected, err));
        art.metric(format!("radius@{}", r.epsilon), r.measured);
    }
    art.metric("max_radius_error", worst);
    art.csv("radius_scan.csv", csv);
    art.json("radius_scan.json", &rows)
}

fn certify(cfg: &ExperimentConfig, ctx: &OrbitContext, art: &mut Artifacts) -> Result<(), CliError> {
    let spec = ctx.algebra();
    let setup = setup(cfg, spec)?;
    let b = setup.effective_b();
    let grid = lambda_grid(cfg, spec);
    let family = pendulum_family(cfg, spec, &setup)?;
    let report = completeness_report(&family, ctx, cfg.samples, cfg.sample_seed);
    art.metric("ddim", report.ddim as f64);
    art.metric("dind", report.dind as f64);
    art.metric("phase_dim", report.phase_dim as f64);
    art.flag("verdict", report.verdict);
    art.metric("outliers", report.outliers.len() as f64);
    art.metric("min_gap_ddim", report.min_gap_ddim);
    art.metric("min_gap_bracket", report.min_gap_bracket);
    art.warnings.extend(report.warnings.iter().cloned());
    art.json("completeness.json", &report)?;

    let a1 = condition_a1(ctx, setup.epsilon, &b, &grid)?;
    let a2 = condition_a2(ctx, setup.epsilon, &b)?;
    art.flag("a1_holds", a1.holds);
    art.flag("a2_holds", a2.holds);
    art.warnings.extend(a2.warnings.iter().cloned());
    art.json("conditions.json", &json!({ "a1": a1, "a2": a2 }))?;

    let tori = tori_dimension(ctx, &[setup.epsilon], cfg.samples, cfg.sample_seed)?;
    art.metric("tori_dimension", tori.dimension as f64);
    art.json("tori.json", &tori)?;

    let base = orbit_base(ctx, setup.epsilon);
    let form = pencil_form(spec, &base, 1.0, 0.0, &b)?;
    art.csv("pencil_1_0.csv", matrix_to_csv(&form.matrix));
    Ok(())
}

#[derive(Serialize)]
struct LaxEntry {
    lambda: f64,
    spectrum_t0: Vec<[f64; 2]>,
    max_spectral_drift: f64,
    max_lax_residual: f64,
}

fn lax(cfg: &ExperimentConfig, ctx: &OrbitContext, art: &mut Artifacts) -> Result<(), CliError> {
    let spec = ctx.algebra();
    let int = cfg.integrator();
    let setup = setup(cfg, spec)?;
    let b = setup.effective_b();
    let lambdas = cfg.lax_lambdas.clone().unwrap_or_else(|| vec![0.3, 1.0, 2.5]);
    let (pt, _) = initial_point(cfg, ctx)?;
    let traj = integrate(&PendulumFlow { ctx, setup: &setup }, &pt.to_state(), int.t_end, int.h, int.project_every)?;
    record_trajectory(art, &traj)?;

    let stride = (traj.len() / LAX_SAMPLES).max(1);
    let sampled: Vec<usize> = (0..traj.len()).step_by(stride).collect();
    let n = spec.matrix_size();
    let mut spectra_csv = String::from("t,lambda");
    for k in 1..=n {
        spectra_csv.push_str(&format!(",re_{k},im_{k}"));
    }
    spectra_csv.push('\n');
    let mut entries = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let s0 = lax_spectrum(spec, &traj.phase_point(0), setup.epsilon, &b, lambda)?;
        let mut drift = 0.0_f64;
        let mut residual = 0.0_f64;
        for &i in &sampled {
            let pt = traj.phase_point(i);
            let s = lax_spectrum(spec, &pt, setup.epsilon, &b, lambda)?;
            drift = drift.max(spectral_distance(&s0, &s));
            spectra_csv.push_str(&format!("{:.6},{lambda}", traj.times[i]));
            for z in &s {
                spectra_csv.push_str(&format!(",{:.17e},{:.17e}", z.re, z.im));
            }
            spectra_csv.push('\n');
            // Central differences need two full steps around i.
            if i > 0 && i + 1 < traj.len() && ((traj.times[i + 1] - traj.times[i]) - traj.h).abs() <= 1e-9 * traj.h {
                let h = traj.h;
                let r = lax_residual(spec, &traj.phase_point(i - 1), &pt, &traj.phase_point(i + 1), h, setup.epsilon, &b, lambda)?;
                residual = residual.max(r);
            }
        }
        art.metric(format!("spectral_drift@{lambda}"), drift);
        art.metric(format!("lax_residual@{lambda}"), residual);
        entries.push(LaxEntry {
            lambda,
            spectrum_t0: s0.iter().map(|z| [z.re, z.im]).collect(),
            max_spectral_drift: drift,
            max_lax_residual: residual,
        });
    }
    let worst = entries.iter().map(|e| e.max_spectral_drift).fold(0.0, f64::max);
    art.metric("max_spectral_drift", worst);
    art.csv("spectra.csv", spectra_csv);
    art.json("lax.json", &entries)
}
