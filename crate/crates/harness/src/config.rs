//! TOML run configuration with sections `device`, `disorder`, `path`,
//! `sweep`, `pflip` and `readout`. Every key has a default, so an empty file
//! is a valid configuration.

use std::collections::BTreeMap;
use std::path::Path;

use braidsim_core::model::{DeviceRegister, DeviceSpec, DisorderConfig, Island, Side};
use braidsim_core::readout::{BusChain, ReadoutParams};
use braidsim_core::schedule::{Corner, Direction, PathKind, PathSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::HarnessError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub device: DeviceSection,
    pub disorder: DisorderSection,
    pub path: PathSection,
    pub sweep: SweepSection,
    pub pflip: PflipSection,
    pub readout: ReadoutSection,
}

/// Accidental Majorana count per island tag (`b`, `g`, `1`, `2`, `3`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    pub accidental: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaEntry {
    pub island: String,
    /// Couples `gamma_{k,bond}` and `gamma_{k,bond+1}`.
    pub bond: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsEntry {
    pub island: String,
    /// 1 couples the first accidental mode, 2 the last.
    pub side: u8,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderSection {
    pub delta: Vec<DeltaEntry>,
    pub eps: Vec<EpsEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKindName {
    Circular,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionName {
    Forward,
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathSection {
    pub kind: PathKindName,
    pub d_max: f64,
    /// Defaults to `1e-4 d_max`.
    pub d_min: Option<f64>,
    pub t0: f64,
    pub direction: DirectionName,
}

impl Default for PathSection {
    fn default() -> Self {
        Self { kind: PathKindName::Circular, d_max: 500.0, d_min: None, t0: 1.0, direction: DirectionName::Forward }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Delta,
    DMax,
    Eps11,
    Detuning,
}

impl SweepVariable {
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::Delta => "delta",
            SweepVariable::DMax => "d_max",
            SweepVariable::Eps11 => "eps11",
            SweepVariable::Detuning => "detuning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "linear")]
    pub spacing: Spacing,
}

fn linear() -> Spacing {
    Spacing::Linear
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, HarnessError> {
        if self.points < 2 {
            return config_err(format!("range needs at least 2 points, got {}", self.points));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return config_err("range endpoints must be finite".into());
        }
        let n = self.points - 1;
        match self.spacing {
            Spacing::Linear => {
                Ok((0..=n).map(|k| self.start + (self.stop - self.start) * k as f64 / n as f64).collect())
            }
            Spacing::Log => {
                if self.start <= 0.0 || self.stop <= 0.0 {
                    return config_err("log spacing needs positive endpoints".into());
                }
                let (a, b) = (self.start.ln(), self.stop.ln());
                Ok((0..=n).map(|k| (a + (b - a) * k as f64 / n as f64).exp()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// `delta` or `d_max`.
    pub variable: SweepVariable,
    pub range: Range,
    /// Pair energy used when sweeping `d_max`.
    pub delta: f64,
    pub steps_per_leg: usize,
    pub max_refinements: u32,
    pub convergence_tol: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            variable: SweepVariable::Delta,
            range: Range { start: 0.0, stop: 600.0, points: 301, spacing: Spacing::Linear },
            delta: 20.0,
            steps_per_leg: 2000,
            max_refinements: 4,
            convergence_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PflipSection {
    pub n_max: usize,
    pub p_anc: i8,
    pub p_meas: i8,
    pub total_parity: i8,
    /// `Pi_k` per populated island tag; `+1` when absent.
    pub island_parity: BTreeMap<String, i8>,
    /// Sampled measurements per `n`; exact probabilities when 0.
    pub shots: u32,
}

impl Default for PflipSection {
    fn default() -> Self {
        Self { n_max: 4, p_anc: 1, p_meas: 1, total_parity: 1, island_parity: BTreeMap::new(), shots: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub omega0: f64,
    pub plasma: f64,
    pub g: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub eps11: f64,
    pub delta: f64,
    pub n_max: usize,
    pub t_m: f64,
    pub bus_modes: usize,
    /// `[n, m, value]` entries for `i value gamma_{b,n} gamma_{b,m}`.
    pub bus_couplings: Vec<(usize, usize, f64)>,
    pub bus_eps_first: f64,
    pub bus_eps_last: f64,
    /// `detuning` (sets `delta = Delta_+ - Delta_- - value`) or `eps11`.
    pub variable: SweepVariable,
    pub range: Range,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        let p = ReadoutParams::default();
        Self {
            omega0: p.omega0,
            plasma: p.plasma,
            g: p.g,
            delta_plus: p.delta_plus,
            delta_minus: p.delta_minus,
            eps11: p.eps11,
            delta: p.delta,
            n_max: p.n_max,
            t_m: p.t_m,
            bus_modes: 0,
            bus_couplings: Vec::new(),
            bus_eps_first: 0.0,
            bus_eps_last: 0.0,
            variable: SweepVariable::Detuning,
            range: Range { start: 0.1, stop: 1.0, points: 8, spacing: Spacing::Log },
        }
    }
}

impl ReadoutSection {
    pub fn params(&self) -> ReadoutParams {
        ReadoutParams {
            omega0: self.omega0,
            plasma: self.plasma,
            g: self.g,
            delta_plus: self.delta_plus,
            delta_minus: self.delta_minus,
            eps11: self.eps11,
            delta: self.delta,
            bus: BusChain {
                modes: self.bus_modes,
                couplings: self.bus_couplings.clone(),
                eps_first: self.bus_eps_first,
                eps_last: self.bus_eps_last,
            },
            n_max: self.n_max,
            t_m: self.t_m,
        }
    }
}

fn config_err<T>(msg: String) -> Result<T, HarnessError> {
    Err(HarnessError::Config(msg))
}

fn island(tag: &str) -> Result<Island, HarnessError> {
    Island::from_tag(tag).ok_or_else(|| HarnessError::Config(format!("unknown island tag {tag:?}")))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn device_spec(&self) -> Result<DeviceSpec, HarnessError> {
        let mut spec = DeviceSpec::clean();
        for (tag, &count) in &self.device.accidental {
            spec = spec.with_accidental(island(tag)?, count)?;
        }
        Ok(spec)
    }

    pub fn register(&self) -> Result<DeviceRegister, HarnessError> {
        Ok(DeviceRegister::new(self.device_spec()?)?)
    }

    pub fn disorder(&self) -> Result<DisorderConfig, HarnessError> {
        let mut d = DisorderConfig::default();
        for e in &self.disorder.delta {
            d.set_delta(island(&e.island)?, e.bond, e.value);
        }
        for e in &self.disorder.eps {
            let side = match e.side {
                1 => Side::First,
                2 => Side::Second,
                s => return config_err(format!("eps side must be 1 or 2, got {s}")),
            };
            d.set_eps(island(&e.island)?, side, e.value);
        }
        Ok(d)
    }

    pub fn path_spec(&self) -> Result<PathSpec, HarnessError> {
        self.path_with_d_max(self.path.d_max)
    }

    /// Path with `d_max` replaced; `d_min` keeps its configured value or scales with `d_max`.
    pub fn path_with_d_max(&self, d_max: f64) -> Result<PathSpec, HarnessError> {
        let kind = match self.path.kind {
            PathKindName::Circular => PathKind::Circular,
            PathKindName::Square => PathKind::Square,
        };
        let mut p = PathSpec::new(kind, d_max).with_start(Corner::Second);
        if let Some(d_min) = self.path.d_min {
            p = p.with_d_min(d_min);
        }
        p.t0 = self.path.t0;
        if self.path.direction == DirectionName::Reversed {
            p = p.with_direction(Direction::Reversed);
        }
        p.validate()?;
        Ok(p)
    }
}
