//! One braiding cycle on the device register and the parity-flip protocol.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, involution_eigenspace, loewdin, trace_norm, CMatrix, ONE, ZERO};
use crate::model::{BraidingHamiltonian, Computational, DeviceRegister, DisorderConfig, Island, SectorBasis};
use crate::schedule::{coupling_at, PathSpec};

use super::{adiabatic_propagator, full_propagator_in_sectors, AdiabaticOptions, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleMethod {
    /// Midpoint-exponential product on a grid sized by [`exact_grid`].
    Exact,
    /// Projector transport with the given steps per leg.
    Adiabatic { steps_per_leg: usize },
}

/// Parity labels of the sector a braid is run in.
#[derive(Debug, Clone, PartialEq)]
pub struct BraidSector {
    /// `Pi_k` for every populated island.
    pub island_parity: Vec<(Island, i8)>,
    /// `-i Gamma_E Gamma_F` on the initial manifold.
    pub p_anc: i8,
    /// Total fermion parity of the register.
    pub total_parity: i8,
}

impl BraidSector {
    /// All parities `+1`.
    pub fn even(register: &DeviceRegister) -> Self {
        Self {
            island_parity: register.spec().populated_islands().map(|i| (i, 1)).collect(),
            p_anc: 1,
            total_parity: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BraidResult {
    pub sector: BraidSector,
    /// Sign `s` of the best match to `exp(i s pi sigma_x / 4)`.
    pub chirality: i8,
    pub qubit_unitary: CMatrix,
    pub fidelity: f64,
    /// Mean probability of leaving the initial manifold.
    pub leakage: f64,
    pub det_abs: f64,
    /// Set when leakage exceeds one half.
    pub protocol_failure: bool,
}

/// Grid with `h ||H|| <= 0.05` from an a-priori bound on `||H||`.
pub fn exact_grid(path: &PathSpec, disorder: &DisorderConfig) -> Result<TimeGrid> {
    let bound = libm::sqrt(3.0) * path.d_max
        + disorder.delta.values().map(|v| v.abs()).sum::<f64>()
        + disorder.eps.values().map(|v| v.abs()).sum::<f64>();
    let steps = libm::ceil(path.t_cycle() * bound / 0.05) as usize;
    TimeGrid::new(path.t_cycle(), (steps.max(600) + 1) & !1)
}

fn total_parity(register: &DeviceRegister) -> CMatrix {
    use Computational::*;
    let mut p = register.bilinear(A, B) * register.bilinear(C, D) * register.bilinear(E, F);
    for (_, pi) in register.island_parities() {
        p *= pi;
    }
    p
}

fn conserved_sectors(register: &DeviceRegister, with_islands: bool) -> SectorBasis {
    let mut ops: Vec<CMatrix> = Vec::new();
    if with_islands {
        ops.extend(register.island_parities().into_iter().map(|(_, m)| m));
    }
    ops.push(total_parity(register));
    SectorBasis::new(register.dimension(), &ops)
}

/// Propagator of one full cycle on the whole register.
pub fn cycle_unitary(
    register: &DeviceRegister,
    disorder: &DisorderConfig,
    path: &PathSpec,
    method: CycleMethod,
) -> Result<CMatrix> {
    path.validate()?;
    let hb = BraidingHamiltonian::new(register, disorder)?;
    let h = |t: f64| Ok(hb.at(&coupling_at(path, t)?));
    let sectors = conserved_sectors(register, !disorder.has_external_coupling());
    match method {
        CycleMethod::Exact => full_propagator_in_sectors(h, &sectors, &exact_grid(path, disorder)?),
        CycleMethod::Adiabatic { steps_per_leg } => {
            let grid = TimeGrid::for_cycle(path.t_cycle(), steps_per_leg)?;
            let s = adiabatic_propagator(h, &sectors, &grid, &AdiabaticOptions::for_scale(path.d_max))?;
            Ok(s.last().clone())
        }
    }
}

/// Isometry onto the joint eigenspace of `ops` with the given signs.
fn joint_eigenspace(dim: usize, ops: &[(CMatrix, i8)]) -> CMatrix {
    let mut basis = crate::linalg::identity(dim);
    for (op, sign) in ops {
        basis = involution_eigenspace(&basis, op, *sign);
    }
    basis
}

fn sector_ops(register: &DeviceRegister, island_parity: &[(Island, i8)], total: i8) -> Result<Vec<(CMatrix, i8)>> {
    let mut ops = Vec::new();
    for island in register.spec().populated_islands() {
        let sign = island_parity
            .iter()
            .find(|(i, _)| *i == island)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::Config(alloc::format!("no parity given for island {island}")))?;
        ops.push((register.parity(island), sign));
    }
    ops.push((total_parity(register), total));
    Ok(ops)
}

/// Columns spanning the energy manifolds of `H(0)` in the sector whose
/// `-i Gamma_E Gamma_F` expectation has sign `p_anc`.
fn initial_manifold(register: &DeviceRegister, h0: &CMatrix, sector: &CMatrix, p_anc: i8, tol: f64) -> CMatrix {
    use Computational::*;
    let anc = register.bilinear(E, F);
    let eig = hermitian_eigen(&(sector.adjoint() * h0 * sector));
    let mut keep: Vec<usize> = Vec::new();
    let mut start = 0;
    let n = eig.values.len();
    for k in 1..=n {
        if k == n || eig.values[k] - eig.values[k - 1] > tol {
            let block = sector * eig.columns(start, k - start);
            let expectation = (block.adjoint() * &anc * &block).trace().re / (k - start) as f64;
            if expectation * f64::from(p_anc) > 0.5 {
                keep.extend(start..k);
            }
            start = k;
        }
    }
    let mut out = CMatrix::from_element(register.dimension(), keep.len(), ZERO);
    for (dst, &k) in keep.iter().enumerate() {
        out.set_column(dst, &(sector * eig.vectors.column(k)));
    }
    out
}

/// One cycle in `sector`, with every external coupling multiplied by `eps_scale`.
pub fn braid_cycle(
    register: &DeviceRegister,
    disorder: &DisorderConfig,
    path: &PathSpec,
    sector: &BraidSector,
    eps_scale: f64,
    method: CycleMethod,
) -> Result<BraidResult> {
    use Computational::*;
    let disorder = disorder.scaled_eps(eps_scale);
    let u = cycle_unitary(register, &disorder, path, method)?;
    let hb = BraidingHamiltonian::new(register, &disorder)?;
    let h0 = hb.at(&coupling_at(path, 0.0)?);

    let space = joint_eigenspace(register.dimension(), &sector_ops(register, &sector.island_parity, sector.total_parity)?);
    let manifold = initial_manifold(register, &h0, &space, sector.p_anc, 1e-6 * path.d_max);
    if manifold.ncols() == 0 || manifold.ncols() % 2 != 0 {
        return Err(Error::Config(alloc::format!(
            "initial manifold has dimension {} (expected a positive even number)",
            manifold.ncols()
        )));
    }
    let m = manifold.ncols() / 2;
    let plus = involution_eigenspace(&manifold, &register.bilinear(A, B), 1);
    if plus.ncols() != m {
        return Err(Error::Config("qubit parity does not split the initial manifold evenly".into()));
    }
    let projector = &manifold * manifold.adjoint();
    let (minus, _) = loewdin(&(&projector * register.bilinear(B, C) * &plus));
    let mut basis = CMatrix::from_element(register.dimension(), 2 * m, ZERO);
    basis.columns_mut(0, m).copy_from(&plus);
    basis.columns_mut(m, m).copy_from(&minus);

    let w = basis.adjoint() * &u * &basis;
    let leakage = (1.0 - w.norm_squared() / (2 * m) as f64).max(0.0);

    let target = |s: f64| {
        let c = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        let is = Complex64::new(0.0, s * core::f64::consts::FRAC_1_SQRT_2);
        [[c, is], [is, c]]
    };
    // Tr_qubit[(T^dag (x) 1) W], an m x m matrix.
    let reduced = |t: &[[Complex64; 2]; 2]| {
        let mut r = CMatrix::from_element(m, m, ZERO);
        for a in 0..2 {
            for b in 0..2 {
                let coeff = t[b][a].conj();
                r += w.view((b * m, a * m), (m, m)) * coeff;
            }
        }
        r
    };
    let mut best = (0.0f64, 1i8);
    for s in [1i8, -1] {
        let f = trace_norm(&reduced(&target(f64::from(s)))) / (2 * m) as f64;
        if f > best.0 {
            best = (f, s);
        }
    }
    let (fidelity, chirality) = best;

    // Internal unitary from the polar factor, then Tr_int[W (1 (x) U_int^dag)] / m,
    // reported as its nearest unitary; leakage carries the norm loss.
    let (internal, _) = loewdin(&reduced(&target(f64::from(chirality))));
    let mut qubit = CMatrix::from_element(2, 2, ZERO);
    for a in 0..2 {
        for b in 0..2 {
            let block = w.view((a * m, b * m), (m, m));
            let mut acc = ZERO;
            for j in 0..m {
                for k in 0..m {
                    acc += block[(j, k)] * internal[(j, k)].conj();
                }
            }
            qubit[(a, b)] = acc / m as f64;
        }
    }
    let (qubit, _) = loewdin(&qubit);
    let det_abs = qubit.determinant().norm();

    Ok(BraidResult {
        sector: sector.clone(),
        chirality,
        qubit_unitary: qubit,
        fidelity: fidelity.min(1.0),
        leakage,
        det_abs,
        protocol_failure: leakage > 0.5,
    })
}

/// Initial state for [`pflip_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct PflipInit {
    pub island_parity: Vec<(Island, i8)>,
    pub p_anc: i8,
    /// Eigenvalue of `P = -i Gamma_A Pi_b Gamma_B` selected by the first measurement.
    pub p_meas: i8,
    pub total_parity: i8,
    /// Amplitudes on the initial manifold with the parities above; the first
    /// basis vector when `None`.
    pub coefficients: Option<Vec<Complex64>>,
}

impl PflipInit {
    pub fn even(register: &DeviceRegister) -> Self {
        Self {
            island_parity: register.spec().populated_islands().map(|i| (i, 1)).collect(),
            p_anc: 1,
            p_meas: 1,
            total_parity: 1,
            coefficients: None,
        }
    }

    /// Dimension of the space the coefficients refer to.
    pub fn space_dimension(&self, register: &DeviceRegister, disorder: &DisorderConfig, path: &PathSpec) -> Result<usize> {
        Ok(self.space(register, disorder, path)?.ncols())
    }

    /// Initial manifold of `H(0)` with the requested parities, restricted to `P = p_meas`.
    fn space(&self, register: &DeviceRegister, disorder: &DisorderConfig, path: &PathSpec) -> Result<CMatrix> {
        let h0 = BraidingHamiltonian::new(register, disorder)?.at(&coupling_at(path, 0.0)?);
        let outer = joint_eigenspace(register.dimension(), &sector_ops(register, &self.island_parity, self.total_parity)?);
        let manifold = initial_manifold(register, &h0, &outer, self.p_anc, 1e-6 * path.d_max);
        Ok(involution_eigenspace(&manifold, &register.readout_parity(), self.p_meas))
    }
}

/// Sampled measurements: `shots` draws per `n` using `uniform` in `[0, 1)`.
pub struct Shots<'a> {
    pub shots: u32,
    pub uniform: &'a mut dyn FnMut() -> f64,
}

/// Probability of observing the flipped parity after `n = 1..=n_max` cycles.
pub fn pflip_sequence(
    register: &DeviceRegister,
    disorder: &DisorderConfig,
    path: &PathSpec,
    n_max: usize,
    init: &PflipInit,
    shots: Option<Shots<'_>>,
) -> Result<Vec<f64>> {
    let u = cycle_unitary(register, disorder, path, CycleMethod::Exact)?;
    let space = init.space(register, disorder, path)?;
    if space.ncols() == 0 {
        return Err(Error::Config("requested parities define an empty initial manifold".into()));
    }
    let coeffs = match &init.coefficients {
        Some(c) if c.len() == space.ncols() => nalgebra::DVector::from_column_slice(c),
        Some(c) => {
            return Err(Error::Config(alloc::format!(
                "{} coefficients for a {}-dimensional initial manifold",
                c.len(),
                space.ncols()
            )))
        }
        None => {
            let mut v = nalgebra::DVector::from_element(space.ncols(), ZERO);
            v[0] = ONE;
            v
        }
    };
    let mut psi = &space * coeffs;
    let norm = psi.norm();
    if !(norm > 0.0) {
        return Err(Error::Config("initial coefficients are all zero".into()));
    }
    psi /= Complex64::new(norm, 0.0);

    let flip = (crate::linalg::identity(register.dimension()) - register.readout_parity().scale(f64::from(init.p_meas)))
        .scale(0.5);
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        psi = &u * psi;
        let p = (psi.adjoint() * &flip * &psi)[(0, 0)].re.clamp(0.0, 1.0);
        out.push(p);
    }
    if let Some(Shots { shots, uniform }) = shots {
        for p in out.iter_mut() {
            let hits = (0..shots).filter(|_| uniform() < *p).count();
            *p = hits as f64 / f64::from(shots.max(1));
        }
    }
    Ok(out)
}
