//! `pflip`: parity-flip probabilities after repeated braiding cycles.

use std::path::{Path, PathBuf};

use braidsim_core::model::{DeviceRegister, Island};
use braidsim_core::propagation::{braid_cycle, pflip_sequence, BraidSector, CycleMethod, PflipInit, Shots};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::{json_number, metadata_json, write_json};
use crate::{HarnessError, RunContext};

/// Ideal sequence, period 4 starting at `n = 1`.
pub fn clean_reference(n: usize) -> f64 {
    [0.5, 1.0, 0.5, 0.0][(n - 1) % 4]
}

fn island_parities(ctx: &RunContext, register: &DeviceRegister) -> Result<Vec<(Island, i8)>, HarnessError> {
    let given = &ctx.config.pflip.island_parity;
    for tag in given.keys() {
        let island = Island::from_tag(tag).ok_or_else(|| HarnessError::Config(format!("unknown island tag {tag:?}")))?;
        if register.spec().accidental(island) == 0 {
            return Err(HarnessError::Config(format!("island {tag} has no accidental Majoranas to fix a parity for")));
        }
    }
    Ok(register
        .spec()
        .populated_islands()
        .map(|i| (i, given.get(i.tag()).copied().unwrap_or(1)))
        .collect())
}

pub struct PflipReport {
    pub p_flip: Result<Vec<f64>, braidsim_core::Error>,
    pub value: Value,
}

pub fn report(ctx: &RunContext) -> Result<PflipReport, HarnessError> {
    let cfg = &ctx.config;
    let register = cfg.register()?;
    let disorder = cfg.disorder()?;
    let path = cfg.path_spec()?;
    let island_parity = island_parities(ctx, &register)?;
    let p = &cfg.pflip;
    if p.n_max == 0 {
        return Err(HarnessError::Config("pflip.n_max must be at least 1".into()));
    }
    let init = PflipInit {
        island_parity: island_parity.clone(),
        p_anc: p.p_anc,
        p_meas: p.p_meas,
        total_parity: p.total_parity,
        coefficients: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut uniform = || rng.gen::<f64>();
    let shots = (p.shots > 0).then(|| Shots { shots: p.shots, uniform: &mut uniform });
    let p_flip = pflip_sequence(&register, &disorder, &path, p.n_max, &init, shots);

    let sector = BraidSector { island_parity, p_anc: p.p_anc, total_parity: p.total_parity };
    let braid = match braid_cycle(&register, &disorder, &path, &sector, 1.0, CycleMethod::Exact) {
        Ok(b) => json!({
            "fidelity": b.fidelity,
            "leakage": b.leakage,
            "chirality": b.chirality,
            "protocol_failure": b.protocol_failure,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };

    let n: Vec<usize> = (1..=p.n_max).collect();
    let reference: Vec<f64> = n.iter().map(|&k| clean_reference(k)).collect();
    let per_n = match &p_flip {
        Ok(values) => n
            .iter()
            .zip(values)
            .map(|(&k, &v)| {
                json!({
                    "n": k,
                    "p_flip": json_number(v),
                    "reference": clean_reference(k),
                    "deviation": json_number((v - clean_reference(k)).abs()),
                    "error": Value::Null,
                })
            })
            .collect::<Vec<_>>(),
        Err(e) => n
            .iter()
            .map(|&k| json!({ "n": k, "p_flip": Value::Null, "reference": clean_reference(k), "deviation": Value::Null, "error": e.to_string() }))
            .collect(),
    };
    let max_deviation = p_flip
        .as_ref()
        .ok()
        .map(|v| v.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    let value = json!({
        "metadata": metadata_json("pflip", ctx),
        "shots": p.shots,
        "sequence": per_n,
        "max_deviation": max_deviation.map(json_number),
        "braid": braid,
    });
    Ok(PflipReport { p_flip, value })
}

/// Writes `pflip.json`; a propagation failure is recorded in the file and
/// reported as a numeric error.
pub fn run(ctx: &RunContext, out: &Path) -> Result<(PathBuf, PflipReport), HarnessError> {
    std::fs::create_dir_all(out)?;
    let r = report(ctx)?;
    let path = write_json(&out.join("pflip.json"), &r.value)?;
    Ok((path, r))
}
