//! `validate`: invariant suite with one pass/fail item per check.

use std::path::{Path, PathBuf};

use braidsim_core::algebra::{reference_set, build_majorana_set, island_parity};
use braidsim_core::linalg::{
    anticommutator, commutator, hermiticity_defect, identity, kron_all, max_abs, pauli, unitarity_defect, CMatrix, Pauli,
};
use braidsim_core::model::{reference_unitaries, Channel, CouplingSet, DeviceRegister, DeviceSpec, DisorderConfig, JunctionHamiltonian};
use braidsim_core::propagation::{
    analytic_envelope, analytic_norm, analytic_regime_valid, braid_cycle, evaluate_norm, first_order_residual,
    BraidSector, CycleMethod, NormSettings,
};
use serde_json::json;

use crate::config::PathKindName;
use crate::output::{metadata_json, recorded_config, write_json};
use crate::pool::map_ordered;
use crate::sweep::{refined_norm, CHANNELS};
use crate::{Config, HarnessError, RunContext};

/// Deliberate corruption for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of one diagonal entry of `U_12`.
    U12Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Pair energies of the analytic comparison.
pub const ANALYTIC_DELTAS: [f64; 5] = [20.0, 50.0, 100.0, 400.0, 600.0];
/// Perturbation strengths of the order check.
pub const ORDER_EPS: [f64; 3] = [0.025, 0.05, 0.1];

pub fn algebra() -> Check {
    let mut worst = 0.0f64;
    for modes in 1..=6 {
        let set = match build_majorana_set(modes) {
            Ok(s) => s,
            Err(e) => return Check::new("algebra", false, e.to_string()),
        };
        worst = worst.max(set.algebra_defect());
        let dim = set.dimension();
        for k in (2..=set.len()).step_by(2) {
            let members: Vec<usize> = (0..k).collect();
            let p = match island_parity(&set, &members, "k") {
                Ok(p) => p.matrix,
                Err(e) => return Check::new("algebra", false, e.to_string()),
            };
            worst = worst.max(hermiticity_defect(&p));
            worst = worst.max(max_abs(&(&p * &p - identity(dim))));
            for (j, m) in set.matrices().iter().enumerate() {
                // Members anticommute with their parity, everything else commutes.
                let defect = if j < k { max_abs(&anticommutator(&p, m)) } else { max_abs(&commutator(&p, m)) };
                worst = worst.max(defect);
            }
        }
    }
    use Pauli::{I, X, Y, Z};
    let printed = [[I, I, X], [I, I, Y], [I, X, Z], [I, Y, Z], [X, Z, Z], [Y, Z, Z]];
    let set = reference_set();
    let mut reference = 0.0f64;
    for (m, ps) in set.matrices().iter().zip(printed) {
        let expected = kron_all(&ps.map(pauli));
        reference = reference.max(max_abs(&(m - expected)));
    }
    Check::new(
        "algebra",
        worst <= 1e-12 && reference == 0.0,
        format!("max invariant defect {worst:.3e} over 2..12 Majoranas; reference set deviation {reference:.1e}"),
    )
}

pub fn conjugation(fault: Option<Fault>) -> Check {
    let mut u = reference_unitaries();
    if fault == Some(Fault::U12Sign) {
        u.u12[(0, 0)] = -u.u12[(0, 0)];
    }
    let c = CouplingSet::new(0.37, 0.81, 1.23);
    let (delta, eps) = (0.43, 0.17);
    let h = |ch: Channel, c: &CouplingSet| JunctionHamiltonian::new(ch).at(c, delta, eps);
    let conj = |u: &CMatrix, m: CMatrix| u * m * u.adjoint();
    let defects = [
        ("U_12", max_abs(&(h(Channel::K11, &c) - conj(&u.u12, h(Channel::K22, &c))))),
        ("U_13", max_abs(&(h(Channel::K11, &c) - conj(&u.u13, h(Channel::K32, &c))))),
        ("U~_13", max_abs(&(h(Channel::K12, &c) - conj(&u.u13_tilde, h(Channel::K31, &c.swap_outer()))))),
    ];
    let unitary = [&u.u12, &u.u13, &u.u13_tilde].iter().map(|m| unitarity_defect(m)).fold(0.0, f64::max);
    let failed: Vec<String> = defects.iter().filter(|d| d.1 > 1e-12).map(|d| format!("{} ({:.3e})", d.0, d.1)).collect();
    let passed = failed.is_empty() && unitary <= 1e-12;
    let detail = if passed {
        format!("all three conjugation identities hold to {:.1e}", defects.iter().map(|d| d.1).fold(unitary, f64::max))
    } else {
        format!("identity broken for {}", failed.join(", "))
    };
    Check::new("symmetry", passed, detail)
}

fn equalities(cfg: &Config, workers: usize) -> Check {
    let path = match cfg.path_spec() {
        Ok(p) => p,
        Err(e) => return Check::new("norm-equalities", false, e.to_string()),
    };
    let groups: [&[Channel]; 3] =
        [&[Channel::B2, Channel::G1], &[Channel::K11, Channel::K22, Channel::K32], &[Channel::K12, Channel::K31]];
    let deltas = [17.0, 137.0, 333.0];
    let jobs: Vec<(f64, Channel)> = deltas.iter().flat_map(|&d| groups.iter().flat_map(move |g| g.iter().map(move |&c| (d, c)))).collect();
    let norms = map_ordered(&jobs, workers, |_, &(d, c)| refined_norm(c, d, &path, cfg.sweep.steps_per_leg, cfg.sweep.max_refinements));
    let mut worst = 0.0f64;
    for (job, n) in jobs.iter().zip(&norms) {
        let Ok(n) = n else {
            return Check::new("norm-equalities", false, format!("{} at delta={}: {}", job.1, job.0, n.as_ref().unwrap_err()));
        };
        let lead = jobs.iter().position(|j| j.0 == job.0 && groups.iter().any(|g| g[0] == j.1 && g.contains(&job.1))).unwrap();
        let reference = *norms[lead].as_ref().unwrap();
        worst = worst.max((n - reference).abs() / reference);
    }
    Check::new(
        "norm-equalities",
        worst <= 0.01,
        format!("b2=g1, 11=22=32, 12=31 agree to {:.3e} relative at delta in {deltas:?}", worst),
    )
}

fn analytic(cfg: &Config, workers: usize) -> Check {
    if cfg.path.kind != PathKindName::Circular {
        return Check::new("analytic", true, "skipped: closed forms describe the circular path".into());
    }
    let path = match cfg.path_spec() {
        Ok(p) => p,
        Err(e) => return Check::new("analytic", false, e.to_string()),
    };
    let d_max = path.d_max;
    let jobs: Vec<(f64, Channel)> = ANALYTIC_DELTAS
        .iter()
        .flat_map(|&d| CHANNELS.iter().map(move |&c| (d, c)))
        .filter(|&(d, c)| analytic_regime_valid(d, d_max) && analytic_norm(c, d, d_max) >= 0.1 * analytic_envelope(c, d, d_max))
        .collect();
    let settings = NormSettings {
        steps_per_leg: cfg.sweep.steps_per_leg,
        max_refinements: cfg.sweep.max_refinements,
        convergence_tol: cfg.sweep.convergence_tol,
    };
    let results = map_ordered(&jobs, workers, |_, &(d, c)| evaluate_norm(c, d, &path, &settings));
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (&(d, c), r) in jobs.iter().zip(&results) {
        match r {
            Ok(p) => {
                let a = analytic_norm(c, d, d_max);
                let rel = (p.norm - a).abs() / a;
                worst = worst.max(rel);
                if rel > 0.15 {
                    failures.push(format!("{c}@{d}: numeric {:.4e} vs closed form {a:.4e} ({:.0}%)", p.norm, 100.0 * rel));
                }
            }
            Err(e) => failures.push(format!("{c}@{d}: {e}")),
        }
    }
    let detail = if failures.is_empty() {
        format!("{} points within 15% (worst {:.1}%)", jobs.len(), 100.0 * worst)
    } else {
        format!("{} of {} points outside 15%: {}", failures.len(), jobs.len(), failures.join("; "))
    };
    Check::new("analytic", failures.is_empty(), detail)
}

fn perturbation_order(cfg: &Config, workers: usize) -> Check {
    let path = match cfg.path_spec() {
        Ok(p) => p,
        Err(e) => return Check::new("perturbation-order", false, e.to_string()),
    };
    let delta = 100.0;
    let residuals = map_ordered(&CHANNELS, workers, |_, &c| first_order_residual(c, delta, &path, &ORDER_EPS, cfg.sweep.steps_per_leg));
    let mut ratios = Vec::new();
    for (c, r) in CHANNELS.iter().zip(&residuals) {
        match r {
            Ok(r) => ratios.push((*c, r[1] / r[0], r[2] / r[1])),
            Err(e) => return Check::new("perturbation-order", false, format!("{c}: {e}")),
        }
    }
    let ok = ratios.iter().all(|&(_, a, b)| (3.0..=5.0).contains(&a) && (3.0..=5.0).contains(&b));
    let text: Vec<String> = ratios.iter().map(|(c, a, b)| format!("{c}: {a:.3}, {b:.3}")).collect();
    Check::new("perturbation-order", ok, format!("residual ratio per halving of eps (need 3..5): {}", text.join("; ")))
}

fn adiabatic_vs_full(cfg: &Config) -> Check {
    let run = || -> Result<(f64, f64), HarnessError> {
        let reg = DeviceRegister::new(DeviceSpec::clean())?;
        let path = cfg.path_spec()?;
        let dis = DisorderConfig::default();
        let sector = BraidSector::even(&reg);
        let exact = braid_cycle(&reg, &dis, &path, &sector, 0.0, CycleMethod::Exact)?;
        let steps_per_leg = cfg.sweep.steps_per_leg;
        let adiabatic = braid_cycle(&reg, &dis, &path, &sector, 0.0, CycleMethod::Adiabatic { steps_per_leg })?;
        Ok((exact.fidelity, adiabatic.fidelity))
    };
    match run() {
        Ok((a, b)) => Check::new(
            "adiabatic-vs-full",
            (a - b).abs() <= 1e-4 && a.min(b) >= 1.0 - 1e-4,
            format!("clean braid fidelity: full {a:.8}, adiabatic {b:.8}"),
        ),
        Err(e) => Check::new("adiabatic-vs-full", false, e.to_string()),
    }
}

fn convergence(cfg: &Config, workers: usize) -> Check {
    let path = match cfg.path_spec() {
        Ok(p) => p,
        Err(e) => return Check::new("grid-convergence", false, e.to_string()),
    };
    let steps = cfg.sweep.steps_per_leg;
    let settings = NormSettings {
        steps_per_leg: steps,
        max_refinements: cfg.sweep.max_refinements,
        convergence_tol: cfg.sweep.convergence_tol,
    };
    let delta = 100.0;
    let points = map_ordered(&CHANNELS, workers, |_, &c| evaluate_norm(c, delta, &path, &settings));
    let advice = format!("increase sweep.steps_per_leg above {steps} or sweep.max_refinements above {}", settings.max_refinements);
    let mut worst = 0.0f64;
    let mut finest = steps;
    for (c, p) in CHANNELS.iter().zip(&points) {
        match p {
            Ok(p) => {
                worst = worst.max((p.norm - p.check_norm).abs() / p.check_norm.abs().max(1e-300));
                finest = finest.max(p.steps_per_leg);
            }
            Err(e) => {
                return Check::new("grid-convergence", false, format!("{c} at delta={delta} starting from {steps} steps/leg: {e}; {advice}"))
            }
        }
    }
    let tol = settings.convergence_tol;
    let detail = format!(
        "doubling the grid changes norms at delta={delta} by {:.3}% (limit {:.3}%, finest grid {finest} steps/leg)",
        100.0 * worst,
        100.0 * tol
    );
    if worst <= tol {
        Check::new("grid-convergence", true, detail)
    } else {
        Check::new("grid-convergence", false, format!("{detail}; {advice}"))
    }
}

/// Re-hashes the configuration recorded in every output file under `dir`.
fn config_hashes(dir: Option<&Path>) -> Check {
    let Some(dir) = dir else {
        return Check::new("config-hashes", true, "skipped: no output directory".into());
    };
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(_) => return Check::new("config-hashes", true, format!("skipped: {} does not exist", dir.display())),
    };
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json"))
        .filter(|p| p.file_name().is_some_and(|n| n != "validate.json"))
        .collect();
    files.sort();
    let mut problems = Vec::new();
    let mut checked = 0;
    for f in &files {
        let recorded = match recorded_config(f) {
            Ok(Some(r)) => r,
            Ok(None) => continue,
            Err(e) => {
                problems.push(format!("{}: {e}", f.display()));
                continue;
            }
        };
        let current = if recorded.0 == "<default>" {
            Ok(Config::default())
        } else {
            Config::load(Path::new(&recorded.0))
        };
        match current {
            Ok(c) if c.hash() == recorded.1 => checked += 1,
            Ok(_) => problems.push(format!("{}: config {} changed since the run", f.display(), recorded.0)),
            Err(e) => problems.push(format!("{}: {e}", f.display())),
        }
    }
    if problems.is_empty() {
        Check::new("config-hashes", true, format!("{checked} output file(s) match their configuration"))
    } else {
        Check::new("config-hashes", false, problems.join("; "))
    }
}

pub struct ValidateOptions {
    pub fault: Option<Fault>,
    /// Directory whose output files get their config hashes re-verified.
    pub out: Option<PathBuf>,
}

pub fn checks(ctx: &RunContext, options: &ValidateOptions) -> Vec<Check> {
    let cfg = &ctx.config;
    vec![
        algebra(),
        conjugation(options.fault),
        equalities(cfg, ctx.workers),
        analytic(cfg, ctx.workers),
        perturbation_order(cfg, ctx.workers),
        adiabatic_vs_full(cfg),
        convergence(cfg, ctx.workers),
        config_hashes(options.out.as_deref()),
    ]
}

/// Runs every check, prints one line each, writes `validate.json` when an
/// output directory is given, and fails with the names of failed checks.
pub fn run(ctx: &RunContext, options: &ValidateOptions) -> Result<Vec<Check>, HarnessError> {
    let results = checks(ctx, options);
    for c in &results {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(out) = &options.out {
        std::fs::create_dir_all(out)?;
        let value = json!({
            "metadata": metadata_json("validate", ctx),
            "checks": results.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect::<Vec<_>>(),
        });
        write_json(&out.join("validate.json"), &value)?;
    }
    let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(results)
    } else {
        Err(HarnessError::Validation(failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_and_symmetry_pass() {
        assert!(algebra().passed);
        assert!(conjugation(None).passed);
    }

    #[test]
    fn injected_sign_flip_is_caught() {
        let c = conjugation(Some(Fault::U12Sign));
        assert!(!c.passed);
        assert!(c.detail.contains("U_12"));
    }

    #[test]
    fn coarse_grid_fails_with_advice() {
        let mut cfg = Config::default();
        cfg.sweep.steps_per_leg = 100;
        let c = convergence(&cfg, 1);
        assert!(!c.passed);
        assert!(c.detail.contains("increase sweep.steps_per_leg"), "{}", c.detail);
    }

    #[test]
    fn hashes_detect_edits() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, "[path]\nd_max = 500.0\n").unwrap();
        let ctx = RunContext::new(Config::load(&cfg_path).unwrap(), Some(cfg_path.clone()));
        let out = dir.path().join("out");
        std::fs::create_dir_all(&out).unwrap();
        write_json(&out.join("x.json"), &json!({ "metadata": metadata_json("test", &ctx) })).unwrap();
        assert!(config_hashes(Some(&out)).passed);
        std::fs::write(&cfg_path, "[path]\nd_max = 400.0\n").unwrap();
        assert!(!config_hashes(Some(&out)).passed);
    }
}
