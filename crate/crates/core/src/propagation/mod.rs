//! Time evolution over a braiding cycle.
//!
//! Two propagators are provided. [`adiabatic_propagator`] transports each
//! degenerate energy manifold by projector transport (zero local Berry
//! connection) and attaches the dynamical phase of the manifold's mean energy.
//! [`full_propagator`] is the time-ordered product of midpoint exponentials.
//! [`perturbative_correction`] integrates the first-order response to a unit
//! coupling operator on either set of samples.

mod analytic;
mod braid;
mod sweep;

pub use analytic::{analytic_envelope, analytic_norm, analytic_regime_valid, AnalyticForm};
pub use braid::{
    braid_cycle, cycle_unitary, exact_grid, pflip_sequence, BraidResult, BraidSector, CycleMethod, PflipInit,
    Shots,
};
pub use sweep::{channel_norm, evaluate_norm, first_order_residual, junction_samples, NormPoint, NormSettings};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cis, hermitian_eigen, identity, loewdin, max_abs, spectral_norm, CMatrix, ZERO};
use crate::model::SectorBasis;

/// Uniform grid `t_i = t_end * i / steps`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    /// `steps` must be even (Simpson quadrature) and positive.
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) || steps < 2 || steps % 2 != 0 {
            return Err(Error::Config(alloc::format!(
                "time grid needs t_end > 0 and an even step count >= 2 (got t_end={t_end}, steps={steps})"
            )));
        }
        Ok(Self { t_end, steps })
    }

    /// Three legs of `steps_per_leg` steps each.
    pub fn for_cycle(t_cycle: f64, steps_per_leg: usize) -> Result<Self> {
        Self::new(t_cycle, 3 * steps_per_leg + (3 * steps_per_leg) % 2)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_end * i as f64 / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }

    pub fn doubled(&self) -> Self {
        Self { t_end: self.t_end, steps: 2 * self.steps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticOptions {
    /// Eigenvalues closer than this belong to one manifold at `t = 0`.
    pub degeneracy_tol: f64,
    /// Smallest admissible gap between adjacent manifolds.
    pub gap_floor: f64,
}

impl AdiabaticOptions {
    /// Thresholds relative to the coupling scale `Delta_max`.
    pub fn for_scale(d_max: f64) -> Self {
        Self { degeneracy_tol: 1e-6 * d_max, gap_floor: 1e-6 * d_max }
    }
}

/// `U_0(t_i)` on every grid point.
#[derive(Debug, Clone)]
pub struct AdiabaticSamples {
    pub grid: TimeGrid,
    pub unitaries: Vec<CMatrix>,
    pub min_gap: f64,
    /// Smallest singular value of a projected frame over the run.
    pub min_overlap: f64,
}

impl AdiabaticSamples {
    pub fn last(&self) -> &CMatrix {
        self.unitaries.last().expect("grid has at least one point")
    }
}

struct SectorFrames {
    ranges: Vec<(usize, usize)>,
    initial: Vec<CMatrix>,
    current: Vec<CMatrix>,
    phases: Vec<f64>,
    energies: Vec<f64>,
}

fn clusters(values: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            out.push((start, k - start));
            start = k;
        }
    }
    out
}

fn mean(values: &[f64], (start, len): (usize, usize)) -> f64 {
    values[start..start + len].iter().sum::<f64>() / len as f64
}

fn check_block(h: &CMatrix, iso: &CMatrix, reduced: &CMatrix, index: usize) -> Result<()> {
    let leak = max_abs(&(h * iso - iso * reduced));
    let scale = max_abs(h).max(1.0);
    if leak > 1e-10 * scale {
        return Err(Error::SectorMixing { label: alloc::format!("sector {index}"), commutator: leak });
    }
    Ok(())
}

/// Adiabatic `U_0(t)` on each sector of `sectors`, assembled on the full space.
///
/// Manifolds are fixed at `t = 0` by `degeneracy_tol` and must stay separated
/// by `gap_floor`; successive frames must overlap with all principal angles
/// below `pi/4`.
pub fn adiabatic_propagator<F>(
    h: F,
    sectors: &SectorBasis,
    grid: &TimeGrid,
    opts: &AdiabaticOptions,
) -> Result<AdiabaticSamples>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let threshold = core::f64::consts::FRAC_1_SQRT_2;
    let dim = sectors.dimension;
    let h0 = h(0.0)?;
    let mut frames = Vec::with_capacity(sectors.sectors.len());
    for (index, s) in sectors.sectors.iter().enumerate() {
        let reduced = s.project(&h0);
        check_block(&h0, &s.isometry, &reduced, index)?;
        let eig = hermitian_eigen(&reduced);
        let ranges = clusters(&eig.values, opts.degeneracy_tol);
        let initial: Vec<CMatrix> = ranges.iter().map(|&(a, n)| eig.columns(a, n)).collect();
        frames.push(SectorFrames {
            current: initial.clone(),
            initial,
            phases: alloc::vec![0.0; ranges.len()],
            energies: ranges.iter().map(|&r| mean(&eig.values, r)).collect(),
            ranges,
        });
    }

    let assemble = |frames: &[SectorFrames]| {
        let mut u = CMatrix::from_element(dim, dim, ZERO);
        for (s, f) in sectors.sectors.iter().zip(frames) {
            let n = s.dimension();
            let mut block = CMatrix::from_element(n, n, ZERO);
            for c in 0..f.ranges.len() {
                block += (&f.current[c] * cis(-f.phases[c])) * f.initial[c].adjoint();
            }
            u += &s.isometry * block * s.isometry.adjoint();
        }
        u
    };

    let mut unitaries = Vec::with_capacity(grid.steps() + 1);
    unitaries.push(assemble(&frames));
    let mut min_gap = f64::INFINITY;
    let mut min_overlap = 1.0f64;
    let dt = grid.step();
    for i in 1..=grid.steps() {
        let t = grid.time(i);
        let ht = h(t)?;
        for (index, (s, f)) in sectors.sectors.iter().zip(frames.iter_mut()).enumerate() {
            let reduced = s.project(&ht);
            check_block(&ht, &s.isometry, &reduced, index)?;
            let eig = hermitian_eigen(&reduced);
            for w in f.ranges.windows(2) {
                let gap = eig.values[w[1].0] - eig.values[w[0].0 + w[0].1 - 1];
                min_gap = min_gap.min(gap);
                if gap < opts.gap_floor {
                    return Err(Error::Adiabaticity { t, gap });
                }
            }
            for c in 0..f.ranges.len() {
                let (a, n) = f.ranges[c];
                let v = eig.columns(a, n);
                let projected = &v * (v.adjoint() * &f.current[c]);
                let (frame, overlap) = loewdin(&projected);
                min_overlap = min_overlap.min(overlap);
                if overlap < threshold {
                    return Err(Error::GridTooCoarse { t, overlap });
                }
                f.current[c] = frame;
                let e = mean(&eig.values, (a, n));
                f.phases[c] += 0.5 * (e + f.energies[c]) * dt;
                f.energies[c] = e;
            }
        }
        unitaries.push(assemble(&frames));
    }
    Ok(AdiabaticSamples { grid: *grid, unitaries, min_gap, min_overlap })
}

fn midpoint_step<F>(h: &F, grid: &TimeGrid, i: usize) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let dt = grid.step();
    let mid = 0.5 * (grid.time(i) + grid.time(i + 1));
    let eig = hermitian_eigen(&h(mid)?);
    let norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !norm.is_finite() {
        return Err(Error::NonFinite);
    }
    if dt * norm >= 0.1 {
        return Err(Error::StepTooLarge { product: dt * norm });
    }
    Ok(crate::linalg::apply_spectral(&eig, |e| cis(-e * dt)))
}

/// Ordered product of `exp(-i H(t_mid) h)` over the grid.
pub fn full_propagator<F>(h: F, grid: &TimeGrid) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let mut u: Option<CMatrix> = None;
    for i in 0..grid.steps() {
        let step = midpoint_step(&h, grid, i)?;
        u = Some(match u {
            None => step,
            Some(prev) => step * prev,
        });
    }
    Ok(u.expect("grid has at least two steps"))
}

/// [`full_propagator`] recorded at every grid point.
pub fn full_propagator_samples<F>(h: F, grid: &TimeGrid) -> Result<Vec<CMatrix>>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let first = h(0.0)?;
    let mut out = Vec::with_capacity(grid.steps() + 1);
    out.push(identity(first.nrows()));
    for i in 0..grid.steps() {
        let step = midpoint_step(&h, grid, i)?;
        let next = step * out.last().expect("non-empty");
        out.push(next);
    }
    Ok(out)
}

/// [`full_propagator`] computed block by block on the sectors of a conserved
/// set of parities and assembled on the full space.
pub fn full_propagator_in_sectors<F>(h: F, sectors: &SectorBasis, grid: &TimeGrid) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    let h0 = h(0.0)?;
    let mut u = CMatrix::from_element(sectors.dimension, sectors.dimension, ZERO);
    for (index, s) in sectors.sectors.iter().enumerate() {
        check_block(&h0, &s.isometry, &s.project(&h0), index)?;
        let block = full_propagator(|t| Ok(s.project(&h(t)?)), grid)?;
        u += &s.isometry * block * s.isometry.adjoint();
    }
    Ok(u)
}

/// First-order response `delta U = -i U_0(T) int_0^T U_0^dag h U_0 dt`.
#[derive(Debug, Clone)]
pub struct Correction {
    pub matrix: CMatrix,
    pub norm: f64,
    /// Relative difference between the Simpson and trapezoid integrals.
    pub quadrature_defect: f64,
}

/// Largest admissible Simpson/trapezoid disagreement.
pub const QUADRATURE_TOL: f64 = 1e-2;

pub fn perturbative_correction(samples: &[CMatrix], grid: &TimeGrid, h_unit: &CMatrix) -> Result<Correction> {
    if samples.len() != grid.steps() + 1 {
        return Err(Error::Config(alloc::format!(
            "{} propagator samples for a grid of {} points",
            samples.len(),
            grid.steps() + 1
        )));
    }
    let n = h_unit.nrows();
    let dt = grid.step();
    let mut simpson = CMatrix::from_element(n, n, ZERO);
    let mut trapezoid = CMatrix::from_element(n, n, ZERO);
    let last = grid.steps();
    for (i, u) in samples.iter().enumerate() {
        let f = u.adjoint() * h_unit * u;
        let (ws, wt) = if i == 0 || i == last {
            (1.0, 0.5)
        } else if i % 2 == 1 {
            (4.0, 1.0)
        } else {
            (2.0, 1.0)
        };
        simpson += f.scale(ws * dt / 3.0);
        trapezoid += f.scale(wt * dt);
    }
    let norm = spectral_norm(&simpson)?;
    let quadrature_defect = spectral_norm(&(&simpson - &trapezoid))? / norm.max(1e-12);
    if quadrature_defect > QUADRATURE_TOL {
        return Err(Error::Quadrature { relative: quadrature_defect });
    }
    let matrix = (&samples[last] * simpson) * (-crate::linalg::I);
    Ok(Correction { norm: spectral_norm(&matrix)?, matrix, quadrature_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, unitarity_defect, Pauli};
    use num_complex::Complex64;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut state = seed;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        &a + a.adjoint()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(3.0, 7).is_err());
        assert!(TimeGrid::new(0.0, 8).is_err());
        let g = TimeGrid::for_cycle(3.0, 2000).unwrap();
        assert_eq!(g.steps(), 6000);
        assert_eq!(g.time(6000), 3.0);
    }

    #[test]
    fn adiabatic_constant_hamiltonian_is_exact() {
        let h = random_hermitian(6, 17);
        let grid = TimeGrid::new(2.0, 400).unwrap();
        let s = adiabatic_propagator(|_| Ok(h.clone()), &SectorBasis::whole(6), &grid, &AdiabaticOptions::for_scale(1.0))
            .unwrap();
        assert!(max_abs(&(s.last() - expm_hermitian(&h, 2.0))) < 1e-8);
        for u in &s.unitaries {
            assert!(unitarity_defect(u) < 1e-9);
        }
    }

    #[test]
    fn full_propagator_constant_and_second_order() {
        let h = random_hermitian(4, 5);
        let grid = TimeGrid::new(1.0, 200).unwrap();
        let u = full_propagator(|_| Ok(h.clone()), &grid).unwrap();
        assert!(max_abs(&(&u - expm_hermitian(&h, 1.0))) < 1e-10);

        let hx = crate::linalg::pauli(Pauli::X);
        let hz = crate::linalg::pauli(Pauli::Z);
        let ht = |t: f64| Ok(hx.scale(libm::cos(3.0 * t)) + hz.scale(1.0 + t));
        let run = |n| full_propagator(ht, &TimeGrid::new(1.0, n).unwrap()).unwrap();
        let reference = run(1600);
        let coarse = max_abs(&(run(100) - &reference));
        let fine = max_abs(&(run(200) - &reference));
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        assert!(unitarity_defect(&reference) < 1e-9);
    }

    #[test]
    fn step_limit_enforced() {
        let h = identity(2).scale(100.0);
        let grid = TimeGrid::new(1.0, 100).unwrap();
        assert!(matches!(full_propagator(|_| Ok(h.clone()), &grid), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn commuting_perturbation_gives_phase_only_response() {
        // For [h, H] = 0 and constant H: U_0^dag h U_0 = h, so delta U = -i T U_0(T) h.
        let h = crate::linalg::pauli(Pauli::Z).scale(2.0);
        let v = crate::linalg::pauli(Pauli::Z);
        let grid = TimeGrid::new(1.5, 300).unwrap();
        let samples = full_propagator_samples(|_| Ok(h.clone()), &grid).unwrap();
        let c = perturbative_correction(&samples, &grid, &v).unwrap();
        assert!((c.norm - 1.5).abs() < 1e-10);
    }

    #[test]
    fn quadrature_check_rejects_unresolved_oscillation() {
        let h = crate::linalg::pauli(Pauli::Z).scale(40.0);
        let v = crate::linalg::pauli(Pauli::X);
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let samples: Vec<CMatrix> = grid.times().iter().map(|&t| expm_hermitian(&h, t)).collect();
        assert!(matches!(perturbative_correction(&samples, &grid, &v), Err(Error::Quadrature { .. })));
    }
}
