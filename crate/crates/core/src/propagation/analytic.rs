//! Closed-form asymptotic norms of the first-order corrections on the circular
//! path, valid for `|delta| >> 1` and `|delta +- Delta_max| >> 1`.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{cos, fabs, sin, sqrt};

use crate::model::Channel;

/// The four distinct closed forms. Channels related by a unitary share one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticForm {
    K12,
    K11,
    K21,
    B2,
}

impl From<Channel> for AnalyticForm {
    fn from(c: Channel) -> Self {
        match c {
            Channel::K12 | Channel::K31 => AnalyticForm::K12,
            Channel::K11 | Channel::K22 | Channel::K32 => AnalyticForm::K11,
            Channel::K21 => AnalyticForm::K21,
            Channel::B2 | Channel::G1 => AnalyticForm::B2,
        }
    }
}

fn shifted(x: f64, d: f64) -> [f64; 2] {
    [x + d, x - d]
}

fn power_law(y: f64, k: f64) -> f64 {
    PI * fabs(cos(k * y)) / (4.0 * y * y)
}

/// Norm of `delta U` for a unit coupling, `x = delta` and `d = Delta_max` in
/// units of `Delta_0`. Every sign branch is evaluated and the largest kept.
pub fn analytic_norm(form: impl Into<AnalyticForm>, x: f64, d: f64) -> f64 {
    let sinc3 = fabs(sin(3.0 * x)) / fabs(x);
    match form.into() {
        AnalyticForm::K11 => sinc3,
        AnalyticForm::K21 => shifted(x, d).iter().map(|&y| power_law(y, 3.0)).fold(sinc3, f64::max),
        AnalyticForm::K12 => {
            let mut best = power_law(x, 2.0);
            for y in shifted(x, d) {
                for r in [1.0, -1.0] {
                    best = best.max(FRAC_1_SQRT_2 * fabs(cos(3.0 * y) + r * sin(3.0 * y)) / fabs(y));
                }
            }
            best
        }
        AnalyticForm::B2 => {
            let mut best = 0.0f64;
            for r in [1.0, -1.0] {
                best = best.max(FRAC_1_SQRT_2 * sqrt((1.0 + r * sin(6.0 * x)).max(0.0)) / fabs(x));
            }
            shifted(x, d).iter().map(|&y| power_law(y, 2.0)).fold(best, f64::max)
        }
    }
}

/// [`analytic_norm`] with every oscillating factor at its maximum modulus.
pub fn analytic_envelope(form: impl Into<AnalyticForm>, x: f64, d: f64) -> f64 {
    let decay = |y: f64| PI / (4.0 * y * y);
    let inverse = 1.0 / fabs(x);
    match form.into() {
        AnalyticForm::K11 => inverse,
        AnalyticForm::K21 | AnalyticForm::B2 => shifted(x, d).iter().map(|&y| decay(y)).fold(inverse, f64::max),
        AnalyticForm::K12 => shifted(x, d).iter().map(|&y| 1.0 / fabs(y)).fold(decay(x), f64::max),
    }
}

/// `true` when `delta` is at least `5 Delta_0` away from both `0` and `Delta_max`.
pub fn analytic_regime_valid(x: f64, d: f64) -> bool {
    fabs(x) >= 5.0 && fabs(x - d) >= 5.0 && fabs(x + d) >= 5.0
}
