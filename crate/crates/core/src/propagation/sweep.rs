//! Norms of first-order corrections for the T-junction channels.

use crate::error::{Error, Result};
use crate::model::{Channel, JunctionHamiltonian, SectorBasis};
use crate::schedule::{coupling_at, PathSpec};

use super::{
    adiabatic_propagator, full_propagator, full_propagator_samples, perturbative_correction, AdiabaticOptions,
    AdiabaticSamples, TimeGrid,
};
use crate::linalg::spectral_norm;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSettings {
    pub steps_per_leg: usize,
    /// Grid doublings allowed when the quadrature check fails.
    pub max_refinements: u32,
    /// Relative agreement required between a grid and its doubling.
    pub convergence_tol: f64,
}

impl Default for NormSettings {
    fn default() -> Self {
        Self { steps_per_leg: 2000, max_refinements: 4, convergence_tol: 5e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormPoint {
    pub norm: f64,
    /// Norm on the doubled grid.
    pub check_norm: f64,
    pub steps_per_leg: usize,
    pub converged: bool,
}

/// Adiabatic `U_0` samples of a junction channel, split by pair parity.
pub fn junction_samples(channel: Channel, delta: f64, path: &PathSpec, grid: &TimeGrid) -> Result<AdiabaticSamples> {
    path.validate()?;
    let jh = JunctionHamiltonian::new(channel);
    let sectors = SectorBasis::new(jh.dimension(), &[jh.pair_parity().clone()]);
    adiabatic_propagator(
        |t| Ok(jh.unperturbed(&coupling_at(path, t)?, delta)),
        &sectors,
        grid,
        &AdiabaticOptions::for_scale(path.d_max),
    )
}

/// `||delta U||_2` for one channel on a grid of `steps_per_leg` steps per leg.
pub fn channel_norm(channel: Channel, delta: f64, path: &PathSpec, steps_per_leg: usize) -> Result<f64> {
    let grid = TimeGrid::for_cycle(path.t_cycle(), steps_per_leg)?;
    let samples = junction_samples(channel, delta, path, &grid)?;
    let jh = JunctionHamiltonian::new(channel);
    Ok(perturbative_correction(&samples.unitaries, &grid, jh.perturbation())?.norm)
}

/// [`channel_norm`] with grid refinement on quadrature failure and a
/// doubled-grid convergence check.
pub fn evaluate_norm(channel: Channel, delta: f64, path: &PathSpec, settings: &NormSettings) -> Result<NormPoint> {
    let mut steps = settings.steps_per_leg;
    let mut refinements = 0;
    let norm = loop {
        match channel_norm(channel, delta, path, steps) {
            Err(Error::Quadrature { .. }) if refinements < settings.max_refinements => {
                steps *= 2;
                refinements += 1;
            }
            other => break other?,
        }
    };
    let check_norm = channel_norm(channel, delta, path, 2 * steps)?;
    let converged = (norm - check_norm).abs() <= settings.convergence_tol * check_norm.abs().max(1e-12);
    Ok(NormPoint { norm, check_norm, steps_per_leg: steps, converged })
}

/// `||U(eps) - (U_0 + eps delta U)||_2` for each `eps`, where `U_0` and its
/// samples come from the exact propagator at `eps = 0`, so the residual is
/// second order in `eps`.
pub fn first_order_residual(
    channel: Channel,
    delta: f64,
    path: &PathSpec,
    eps: &[f64],
    steps_per_leg: usize,
) -> Result<Vec<f64>> {
    path.validate()?;
    let jh = JunctionHamiltonian::new(channel);
    let bound = libm::sqrt(3.0) * path.d_max + delta.abs() + eps.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let needed = libm::ceil(path.t0 * bound / 0.05) as usize;
    let grid = TimeGrid::for_cycle(path.t_cycle(), steps_per_leg.max(needed))?;
    let samples = full_propagator_samples(|t| Ok(jh.unperturbed(&coupling_at(path, t)?, delta)), &grid)?;
    let correction = perturbative_correction(&samples, &grid, jh.perturbation())?;
    let u0 = samples.last().expect("non-empty grid");
    eps.iter()
        .map(|&e| {
            let u = full_propagator(|t| Ok(jh.at(&coupling_at(path, t)?, delta, e)), &grid)?;
            spectral_norm(&(u - u0 - correction.matrix.scale(e)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn samples_are_unitary() {
        let path = PathSpec::circular(50.0);
        let grid = TimeGrid::for_cycle(path.t_cycle(), 300).unwrap();
        let s = junction_samples(Channel::K21, 7.0, &path, &grid).unwrap();
        for u in s.unitaries.iter().step_by(50) {
            assert!(unitarity_defect(u) < 1e-9);
        }
    }

    #[test]
    fn k11_matches_sine_zero() {
        let path = PathSpec::circular(500.0);
        let delta = core::f64::consts::PI / 3.0;
        let n = channel_norm(Channel::K11, delta, &path, 2000).or_else(|_| channel_norm(Channel::K11, delta, &path, 8000));
        assert!(n.unwrap() <= 0.05);
    }

    #[test]
    fn coarse_grid_is_flagged() {
        let path = PathSpec::circular(500.0);
        let r = channel_norm(Channel::K21, 600.0, &path, 100);
        assert!(matches!(r, Err(Error::Quadrature { .. }) | Err(Error::GridTooCoarse { .. })), "{r:?}");
    }
}
