//! Time dependence of the Coulomb couplings over one braiding cycle.
//!
//! A cycle has three legs of duration `t0`. Each leg hands the large coupling
//! from one junction arm to the next, so the cycle visits all three corners
//! `Delta_k = Delta_max` and returns to its start.

use crate::error::{Error, Result};
use crate::model::CouplingSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// Quarter-circle interpolation; `E_0` stays at `Delta_max`.
    Circular,
    /// Ramp the incoming arm up, then the outgoing arm down.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Arms visited in the order 1 -> 2 -> 3 -> 1.
    Forward,
    /// Arms visited in the order 1 -> 3 -> 2 -> 1.
    Reversed,
}

/// Corner `Delta_k = Delta_max` at which the cycle starts and ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    First,
    Second,
    Third,
}

impl Corner {
    fn index(self) -> usize {
        match self {
            Corner::First => 0,
            Corner::Second => 1,
            Corner::Third => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub kind: PathKind,
    pub d_max: f64,
    pub d_min: f64,
    pub t0: f64,
    pub direction: Direction,
    pub start: Corner,
}

impl PathSpec {
    /// Defaults: `Delta_min = 1e-4 Delta_max`, `T_0 = 1`, forward, starting at
    /// the `Delta_2` corner.
    pub fn new(kind: PathKind, d_max: f64) -> Self {
        Self {
            kind,
            d_max,
            d_min: 1e-4 * d_max,
            t0: 1.0,
            direction: Direction::Forward,
            start: Corner::Second,
        }
    }

    pub fn circular(d_max: f64) -> Self {
        Self::new(PathKind::Circular, d_max)
    }

    pub fn square(d_max: f64) -> Self {
        Self::new(PathKind::Square, d_max)
    }

    pub fn with_d_min(mut self, d_min: f64) -> Self {
        self.d_min = d_min;
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_start(mut self, start: Corner) -> Self {
        self.start = start;
        self
    }

    pub fn reversed(mut self) -> Self {
        self.direction = match self.direction {
            Direction::Forward => Direction::Reversed,
            Direction::Reversed => Direction::Forward,
        };
        self
    }

    pub fn t_cycle(&self) -> f64 {
        3.0 * self.t0
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.d_max.is_finite()
            && self.d_min.is_finite()
            && self.t0.is_finite()
            && self.d_max > 0.0
            && self.d_min >= 0.0
            && self.d_min < self.d_max
            && self.t0 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(alloc::format!(
                "invalid path: need 0 <= d_min < d_max and t0 > 0 (got d_min={}, d_max={}, t0={})",
                self.d_min,
                self.d_max,
                self.t0
            )))
        }
    }

    /// Arm index (0-based) holding `Delta_max` at the start of leg `leg`.
    fn arm(&self, leg: usize) -> usize {
        let s = self.start.index();
        match self.direction {
            Direction::Forward => (s + leg) % 3,
            Direction::Reversed => (s + 2 * leg) % 3,
        }
    }

    fn corner(&self) -> CouplingSet {
        let mut d = [self.d_min; 3];
        d[self.arm(0)] = self.d_max;
        CouplingSet::new(d[0], d[1], d[2])
    }
}

/// `(Delta_1, Delta_2, Delta_3)` at time `t` in `[0, 3 t0]`.
pub fn coupling_at(path: &PathSpec, t: f64) -> Result<CouplingSet> {
    let t_cycle = path.t_cycle();
    if !(0.0..=t_cycle).contains(&t) {
        return Err(Error::TimeOutOfRange { t, t_cycle });
    }
    if t == t_cycle {
        return Ok(path.corner());
    }
    let leg = ((t / path.t0) as usize).min(2);
    let x = (t - leg as f64 * path.t0) / path.t0;
    let (from, to) = (path.arm(leg), path.arm(leg + 1));
    let span = path.d_max - path.d_min;
    let (d_from, d_to) = match path.kind {
        PathKind::Circular => {
            let angle = core::f64::consts::FRAC_PI_2 * x;
            (path.d_min + span * libm::cos(angle), path.d_min + span * libm::sin(angle))
        }
        PathKind::Square if x < 0.5 => (path.d_max, path.d_min + span * 2.0 * x),
        PathKind::Square => (path.d_max - span * (2.0 * x - 1.0), path.d_max),
    };
    let mut d = [path.d_min; 3];
    d[from] = d_from;
    d[to] = d_to;
    Ok(CouplingSet::new(d[0], d[1], d[2]))
}

/// Transmon parameters controlling one Coulomb coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    pub ej0: f64,
    pub ec: f64,
    pub prefactor: f64,
}

impl FluxParams {
    pub fn new(ej0: f64, ec: f64, prefactor: f64) -> Result<Self> {
        if !(ec > 0.0 && ej0 / ec >= 10.0 && prefactor > 0.0) {
            return Err(Error::Config(alloc::format!(
                "flux parameters outside the transmon regime: E_J0/E_C = {} (need >= 10), prefactor = {prefactor}",
                ej0 / ec
            )));
        }
        Ok(Self { ej0, ec, prefactor })
    }
}

/// `prefactor * exp(-sqrt(8 E_J0 cos(phase) / E_C))` with `phase = e Phi / hbar`.
pub fn flux_to_coupling(phase: f64, fp: &FluxParams) -> Result<f64> {
    if !(phase.abs() < core::f64::consts::FRAC_PI_2) {
        return Err(Error::FluxOutOfRange { phase });
    }
    let ej = fp.ej0 * libm::cos(phase);
    Ok(fp.prefactor * libm::exp(-libm::sqrt(8.0 * ej / fp.ec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn circular_start_corner() {
        let p = PathSpec::circular(500.0).with_start(Corner::First);
        let c = coupling_at(&p, 0.0).unwrap();
        assert_eq!(c, CouplingSet::new(500.0, 0.05, 0.05));
        let c = coupling_at(&PathSpec::circular(500.0), 0.0).unwrap();
        assert_eq!(c, CouplingSet::new(0.05, 500.0, 0.05));
    }

    #[test]
    fn forward_visits_arms_in_order() {
        let p = PathSpec::circular(10.0).with_d_min(0.0).with_start(Corner::First);
        let at = |t| coupling_at(&p, t).unwrap().as_array();
        assert_eq!(at(1.0), [0.0, 10.0, 0.0]);
        assert!((at(2.0)[2] - 10.0).abs() < 1e-12);
        let r = p.reversed();
        assert!((coupling_at(&r, 1.0).unwrap().d3 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn circular_energy_constant() {
        let p = PathSpec::circular(500.0);
        for k in 0..=3000 {
            let e0 = coupling_at(&p, k as f64 * 1e-3).unwrap().e0();
            assert!((e0 / 500.0 - 1.0).abs() <= 2.0 * p.d_min / p.d_max);
        }
    }

    #[test]
    fn square_energy_range() {
        let p = PathSpec::square(500.0);
        let mid = coupling_at(&p, 0.5).unwrap();
        assert!((mid.e0() / (2f64.sqrt() * 500.0) - 1.0).abs() < 0.01);
        let (mut lo, mut hi) = (f64::MAX, 0f64);
        for k in 0..=3000 {
            let e0 = coupling_at(&p, k as f64 * 1e-3).unwrap().e0();
            lo = lo.min(e0);
            hi = hi.max(e0);
        }
        assert!((hi / lo / 2f64.sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn closure_and_range() {
        for p in [PathSpec::circular(500.0), PathSpec::square(500.0).reversed()] {
            assert_eq!(coupling_at(&p, 0.0).unwrap(), coupling_at(&p, p.t_cycle()).unwrap());
            assert!(matches!(coupling_at(&p, -1e-9), Err(Error::TimeOutOfRange { .. })));
            assert!(matches!(coupling_at(&p, 3.0 + 1e-9), Err(Error::TimeOutOfRange { .. })));
        }
    }

    #[test]
    fn continuity() {
        for (p, bound) in [
            (PathSpec::circular(500.0), 2.0 * core::f64::consts::PI * 500.0 / 2000.0),
            (PathSpec::square(500.0), 2.0 * 500.0 / 1000.0),
        ] {
            let mut prev = coupling_at(&p, 0.0).unwrap().as_array();
            for k in 1..=3000 {
                let cur = coupling_at(&p, k as f64 * 1e-3).unwrap().as_array();
                let jump = (0..3).map(|i| (cur[i] - prev[i]).abs()).fold(0.0, f64::max);
                assert!(jump <= bound, "jump {jump} at step {k}");
                prev = cur;
            }
        }
    }

    #[test]
    fn flux_map_examples() {
        let fp = FluxParams::new(50.0, 1.0, 1.0).unwrap();
        assert!((flux_to_coupling(0.0, &fp).unwrap() / libm::exp(-20.0) - 1.0).abs() < 1e-14);
        assert!(matches!(flux_to_coupling(1.6, &fp), Err(Error::FluxOutOfRange { .. })));
        assert!(FluxParams::new(5.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn reversed_is_relabelled_forward(t in 0.0f64..=3.0, square in any::<bool>()) {
            let p = if square { PathSpec::square(500.0) } else { PathSpec::circular(500.0) };
            let f = coupling_at(&p, t).unwrap();
            let r = coupling_at(&p.reversed(), t).unwrap();
            prop_assert_eq!(r, f.swap_outer());
        }

        #[test]
        fn flux_map_increasing(a in 0.0f64..1.5, b in 0.0f64..1.5) {
            let fp = FluxParams::new(50.0, 1.0, 2.0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(flux_to_coupling(lo, &fp).unwrap() < flux_to_coupling(-hi, &fp).unwrap());
        }

        #[test]
        fn couplings_stay_in_band(t in 0.0f64..=3.0) {
            let p = PathSpec::square(500.0);
            for d in coupling_at(&p, t).unwrap().as_array() {
                prop_assert!(d >= p.d_min - 1e-12 && d <= p.d_max + 1e-12);
            }
        }
    }
}
