//! `readout`: dispersive shifts for both parities and the measurement error
//! over a detuning or coupling grid.

use std::path::{Path, PathBuf};

use braidsim_core::readout::{dispersive_shift, loglog_slope, measurement_error};
use serde_json::{json, Value};

use crate::config::SweepVariable;
use crate::output::{json_number, metadata_json, write_json};
use crate::{HarnessError, RunContext};

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutPoint {
    pub value: f64,
    pub eps11: f64,
    pub delta: f64,
    pub parity_detuning: f64,
    pub amplitude: f64,
    /// `eps11 / (2 |Delta_+ - Delta_- - |delta||)`.
    pub first_order: f64,
    pub time_limited: bool,
    pub error: Option<String>,
}

pub struct ReadoutReport {
    pub points: Vec<ReadoutPoint>,
    /// Log-log slope of the amplitude against the swept value over the
    /// perturbative points (`eps11 <= 0.1 |D|`, not time limited).
    pub slope: Option<f64>,
    pub value: Value,
}

pub fn report(ctx: &RunContext) -> Result<ReadoutReport, HarnessError> {
    let section = &ctx.config.readout;
    let base = section.params();
    let variable = section.variable;
    if !matches!(variable, SweepVariable::Detuning | SweepVariable::Eps11) {
        return Err(HarnessError::Config(format!("readout sweeps detuning or eps11, not {}", variable.column())));
    }
    let values = section.range.values()?;

    let shifts: Vec<Value> = [1i8, -1]
        .into_iter()
        .map(|parity| match dispersive_shift(&base, parity) {
            Ok(s) => json!({
                "parity": parity,
                "closed_form": s.closed_form,
                "numeric": s.numeric,
                "discrepancy": s.discrepancy,
                "bound": s.bound,
                "within_bound": s.discrepancy <= s.bound,
                "dispersive_condition": s.dispersive_condition,
                "error": Value::Null,
            }),
            Err(e) => json!({ "parity": parity, "error": e.to_string() }),
        })
        .collect();

    let points: Vec<ReadoutPoint> = values
        .iter()
        .map(|&v| {
            let mut p = base.clone();
            match variable {
                SweepVariable::Detuning => p.delta = p.delta_plus - p.delta_minus - v,
                _ => p.eps11 = v,
            }
            let d = p.parity_detuning();
            let (amplitude, time_limited, error) = match measurement_error(&p) {
                Ok(m) => (m.amplitude, m.time_limited, None),
                Err(e) => (f64::NAN, false, Some(e.to_string())),
            };
            ReadoutPoint {
                value: v,
                eps11: p.eps11,
                delta: p.delta,
                parity_detuning: d,
                amplitude,
                first_order: p.eps11.abs() / (2.0 * d.abs()),
                time_limited,
                error,
            }
        })
        .collect();

    let window: Vec<&ReadoutPoint> = points
        .iter()
        .filter(|p| !p.time_limited && p.error.is_none() && p.amplitude > 0.0 && p.eps11.abs() <= 0.1 * p.parity_detuning.abs())
        .collect();
    let slope = (window.len() >= 2).then(|| {
        let xs: Vec<f64> = window.iter().map(|p| p.value).collect();
        let ys: Vec<f64> = window.iter().map(|p| p.amplitude).collect();
        loglog_slope(&xs, &ys)
    });

    let value = json!({
        "metadata": metadata_json("readout", ctx),
        "variable": variable.column(),
        "dispersive_condition": base.dispersive_condition(),
        "shift": shifts,
        "points": points.iter().map(|p| json!({
            "value": json_number(p.value),
            "eps11": json_number(p.eps11),
            "delta": json_number(p.delta),
            "parity_detuning": json_number(p.parity_detuning),
            "eps_meas": json_number(p.amplitude),
            "first_order": json_number(p.first_order),
            "time_limited": p.time_limited,
            "error": p.error,
        })).collect::<Vec<_>>(),
        "loglog_slope": slope.map(json_number),
    });
    Ok(ReadoutReport { points, slope, value })
}

pub fn run(ctx: &RunContext, out: &Path) -> Result<(PathBuf, ReadoutReport), HarnessError> {
    std::fs::create_dir_all(out)?;
    let r = report(ctx)?;
    let path = write_json(&out.join("readout.json"), &r.value)?;
    Ok((path, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Config;

    #[test]
    fn default_report() {
        let mut c = Config::default();
        c.readout.eps11 = 1e-3;
        let r = report(&RunContext::new(c, None)).unwrap();
        assert!((r.slope.unwrap() + 1.0).abs() < 0.1);
        let shift = &r.value["shift"];
        let up_plus = shift[0]["numeric"][0].as_f64().unwrap();
        let up_minus = shift[1]["numeric"][0].as_f64().unwrap();
        assert!((up_plus - up_minus).abs() > 1e-3);
    }

    #[test]
    fn parity_independent_without_delta_plus() {
        let mut c = Config::default();
        c.readout.delta_plus = 0.0;
        c.readout.delta_minus = -2.0;
        let r = report(&RunContext::new(c, None)).unwrap();
        let shift = &r.value["shift"];
        assert_eq!(shift[0]["closed_form"], shift[1]["closed_form"]);
    }
}
