//! `sweep-delta`: first-order error norms of the four independent channels
//! against the pair energy or the coupling scale.

use std::path::{Path, PathBuf};
use std::time::Instant;

use braidsim_core::model::Channel;
use braidsim_core::propagation::{analytic_norm, channel_norm, evaluate_norm, NormSettings};
use braidsim_core::schedule::PathSpec;
use braidsim_core::Error;
use serde_json::{json, Value};

use crate::config::{PathKindName, SweepVariable};
use crate::output::{fmt_number, json_number, metadata, metadata_json, write_json, CsvSink};
use crate::pool::run_ordered;
use crate::{HarnessError, RunContext};

/// Channel order of the norm and analytic columns.
pub const CHANNELS: [Channel; 4] = [Channel::B2, Channel::K11, Channel::K12, Channel::K21];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub norms: [f64; 4],
    /// Norms on the doubled grid.
    pub check_norms: [f64; 4],
    pub analytic: [f64; 4],
    pub steps_per_leg: [usize; 4],
    pub converged: bool,
    pub errors: Vec<String>,
}

pub fn columns(variable: SweepVariable) -> Vec<&'static str> {
    let mut c = vec![variable.column()];
    c.extend(["norm_b2", "norm_11", "norm_12", "norm_21", "analytic_b2", "analytic_11", "analytic_12", "analytic_21"]);
    c.push("converged");
    c
}

/// One sweep point. Failures become `NaN` norms with `converged = false`.
pub fn sweep_point(ctx: &RunContext, x: f64) -> SweepRow {
    let cfg = &ctx.config;
    let (delta, d_max) = match cfg.sweep.variable {
        SweepVariable::DMax => (cfg.sweep.delta, x),
        _ => (x, cfg.path.d_max),
    };
    let settings = NormSettings {
        steps_per_leg: cfg.sweep.steps_per_leg,
        max_refinements: cfg.sweep.max_refinements,
        convergence_tol: cfg.sweep.convergence_tol,
    };
    let mut row = SweepRow {
        x,
        norms: [f64::NAN; 4],
        check_norms: [f64::NAN; 4],
        analytic: [f64::NAN; 4],
        steps_per_leg: [0; 4],
        converged: true,
        errors: Vec::new(),
    };
    let path = match cfg.path_with_d_max(d_max) {
        Ok(p) => p,
        Err(e) => {
            row.converged = false;
            row.errors.push(e.to_string());
            return row;
        }
    };
    for (k, &ch) in CHANNELS.iter().enumerate() {
        if cfg.path.kind == PathKindName::Circular {
            row.analytic[k] = analytic_norm(ch, delta, d_max);
        }
        match evaluate_norm(ch, delta, &path, &settings) {
            Ok(p) => {
                row.norms[k] = p.norm;
                row.check_norms[k] = p.check_norm;
                row.steps_per_leg[k] = p.steps_per_leg;
                row.converged &= p.converged;
            }
            Err(e) => {
                row.converged = false;
                row.errors.push(format!("{ch}: {e}"));
            }
        }
    }
    row
}

/// [`channel_norm`] with the grid doubled on quadrature failure, without the
/// doubled-grid convergence check of [`evaluate_norm`].
pub fn refined_norm(ch: Channel, delta: f64, path: &PathSpec, steps: usize, max_refinements: u32) -> Result<f64, Error> {
    let mut s = steps;
    for _ in 0..max_refinements {
        match channel_norm(ch, delta, path, s) {
            Err(Error::Quadrature { .. }) => s *= 2,
            other => return other,
        }
    }
    channel_norm(ch, delta, path, s)
}

fn csv_fields(row: &SweepRow) -> Vec<String> {
    let mut f = vec![fmt_number(row.x)];
    f.extend(row.norms.iter().chain(&row.analytic).map(|&v| fmt_number(v)));
    f.push(row.converged.to_string());
    f
}

fn row_json(row: &SweepRow) -> Value {
    json!({
        "x": json_number(row.x),
        "norms": row.norms.map(json_number),
        "check_norms": row.check_norms.map(json_number),
        "analytic": row.analytic.map(json_number),
        "steps_per_leg": row.steps_per_leg,
        "converged": row.converged,
        "errors": row.errors,
    })
}

pub struct SweepOutput {
    pub path: PathBuf,
    pub rows: Vec<SweepRow>,
    pub wall_seconds: f64,
}

/// Runs the configured sweep and writes `sweep_delta.csv` or `sweep_delta.json` into `out`.
pub fn run(ctx: &RunContext, out: &Path, format: Format) -> Result<SweepOutput, HarnessError> {
    let variable = ctx.config.sweep.variable;
    if !matches!(variable, SweepVariable::Delta | SweepVariable::DMax) {
        return Err(HarnessError::Config(format!(
            "sweep-delta sweeps delta or d_max, not {}",
            variable.column()
        )));
    }
    let xs = ctx.config.sweep.range.values()?;
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let cols = columns(variable);
    let mut rows = Vec::with_capacity(xs.len());
    let path = match format {
        Format::Csv => {
            let mut sink = CsvSink::create(&out.join("sweep_delta.csv"), &metadata("sweep-delta", ctx), &cols)?;
            run_ordered(&xs, ctx.workers, |_, &x| sweep_point(ctx, x), |_, row| {
                sink.row(&csv_fields(&row))?;
                rows.push(row);
                Ok::<_, HarnessError>(())
            })?;
            sink.finish()?
        }
        Format::Json => {
            run_ordered(&xs, ctx.workers, |_, &x| sweep_point(ctx, x), |_, row| {
                rows.push(row);
                Ok::<_, HarnessError>(())
            })?;
            let mut meta = metadata_json("sweep-delta", ctx);
            meta["wall_seconds"] = json!(start.elapsed().as_secs_f64());
            let value = json!({
                "metadata": meta,
                "columns": cols,
                "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
            });
            write_json(&out.join("sweep_delta.json"), &value)?
        }
    };
    Ok(SweepOutput { path, rows, wall_seconds: start.elapsed().as_secs_f64() })
}
