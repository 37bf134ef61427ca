//! Dispersive parity readout through a cavity coupled to a transmon whose
//! splitting depends on the measured parity `P = -i Gamma_A Pi_b Gamma_B`.
//!
//! Hilbert space: photons (`0..=n_max`) (x) transmon (`|e>`, `|g>`, with
//! `tau_z = diag(1, -1)`) (x) Majorana register. The register holds
//! `Gamma_A, Gamma_B, gamma_11, gamma_12` followed by the bus chain.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::algebra::{build_majorana_set, island_parity, MajoranaSet};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, identity, involution_eigenspace, max_abs, CMatrix, I, ONE, ZERO};

/// Majorana modes inside the bus island and their couplings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BusChain {
    /// Even number of modes `gamma_{b,1..N}`.
    pub modes: usize,
    /// `(n, m, delta_{b,n,m})` for `i delta gamma_{b,n} gamma_{b,m}`, 1-based.
    pub couplings: Vec<(usize, usize, f64)>,
    /// `i eps Gamma_A gamma_{b,1}`.
    pub eps_first: f64,
    /// `i eps gamma_{b,N} Gamma_B`.
    pub eps_last: f64,
}

/// Frequencies in rad/T_0 and energies in Delta_0 (`hbar = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutParams {
    pub omega0: f64,
    pub plasma: f64,
    pub g: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub eps11: f64,
    pub delta: f64,
    pub bus: BusChain,
    pub n_max: usize,
    pub t_m: f64,
}

impl Default for ReadoutParams {
    fn default() -> Self {
        Self {
            omega0: 100.0,
            plasma: 120.0,
            g: 1.0,
            delta_plus: 3.0,
            delta_minus: 1.0,
            eps11: 0.01,
            delta: 1.5,
            bus: BusChain::default(),
            n_max: 8,
            t_m: 100.0,
        }
    }
}

impl ReadoutParams {
    /// `delta omega = Omega_0 - omega_0`.
    pub fn detuning(&self) -> f64 {
        self.plasma - self.omega0
    }

    /// `Delta_+ - Delta_- - |delta|`, the denominator of the measurement error.
    pub fn parity_detuning(&self) -> f64 {
        self.delta_plus - self.delta_minus - self.delta.abs()
    }

    /// `(n + 1) g^2 < delta_omega^2 / 10` for all `n <= n_max`.
    pub fn dispersive_condition(&self) -> bool {
        (self.n_max as f64 + 1.0) * self.g * self.g < self.detuning() * self.detuning() / 10.0
    }

    fn validate(&self) -> Result<()> {
        let values = [self.omega0, self.plasma, self.g, self.delta_plus, self.delta_minus, self.eps11, self.delta, self.t_m];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite readout parameter".into()));
        }
        if self.n_max < 4 {
            return Err(Error::Config(alloc::format!("photon truncation n_max = {} (need >= 4)", self.n_max)));
        }
        if self.bus.modes % 2 != 0 {
            return Err(Error::Config(alloc::format!("bus chain has {} modes; need an even count", self.bus.modes)));
        }
        for &(n, m, _) in &self.bus.couplings {
            if n == 0 || m == 0 || n > self.bus.modes || m > self.bus.modes || n == m {
                return Err(Error::Config(alloc::format!("bus coupling ({n}, {m}) out of range")));
            }
        }
        Ok(())
    }
}

const GA: usize = 0;
const GB: usize = 1;
const G11: usize = 2;
const G12: usize = 3;

fn register(params: &ReadoutParams) -> Result<MajoranaSet> {
    build_majorana_set(2 + params.bus.modes / 2)
}

fn bus_parity(set: &MajoranaSet, modes: usize) -> Result<CMatrix> {
    if modes == 0 {
        return Ok(identity(set.dimension()));
    }
    let members: Vec<usize> = (4..4 + modes).collect();
    Ok(island_parity(set, &members, "b")?.matrix)
}

/// `P = -i Gamma_A Pi_b Gamma_B` on the Majorana register.
pub fn readout_parity(params: &ReadoutParams) -> Result<CMatrix> {
    let set = register(params)?;
    let m = set.matrices();
    Ok((&m[GA] * bus_parity(&set, params.bus.modes)? * &m[GB]) * (-I))
}

/// Majorana-only part: `Delta_- P + H_b + i eps11 Gamma_B gamma_11 + i delta gamma_11 gamma_12`.
fn majorana_part(params: &ReadoutParams, eps11: f64) -> Result<CMatrix> {
    let set = register(params)?;
    let m = set.matrices();
    let p = (&m[GA] * bus_parity(&set, params.bus.modes)? * &m[GB]) * (-I);
    let mut h = p.scale(params.delta_minus);
    let bus = |n: usize| &m[3 + n];
    for &(n, k, v) in &params.bus.couplings {
        h += (bus(n) * bus(k) * I).scale(v);
    }
    if params.bus.modes > 0 {
        h += (&m[GA] * bus(1) * I).scale(params.bus.eps_first);
        h += (bus(params.bus.modes) * &m[GB] * I).scale(params.bus.eps_last);
    }
    h += (&m[GB] * &m[G11] * I).scale(eps11);
    h += (&m[G11] * &m[G12] * I).scale(params.delta);
    Ok(h)
}

fn annihilation(n_max: usize) -> CMatrix {
    let mut a = CMatrix::from_element(n_max + 1, n_max + 1, ZERO);
    for n in 1..=n_max {
        a[(n - 1, n)] = Complex64::new(libm::sqrt(n as f64), 0.0);
    }
    a
}

fn transmon(kind: u8) -> CMatrix {
    let (a, b, c, d) = match kind {
        b'+' => (ZERO, ONE, ZERO, ZERO),
        b'-' => (ZERO, ZERO, ONE, ZERO),
        _ => (ONE, ZERO, ZERO, -ONE),
    };
    CMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

fn assemble(params: &ReadoutParams, eps11: f64, n_max: usize) -> Result<CMatrix> {
    params.validate()?;
    let p = readout_parity(params)?;
    let dm = p.nrows();
    let a = annihilation(n_max);
    let number = a.adjoint() * &a;
    let id_ph = identity(n_max + 1);
    let id_t = identity(2);
    let id_m = identity(dm);
    let mut h = number.kronecker(&id_t).kronecker(&id_m).scale(params.omega0);
    let jc = a.kronecker(&transmon(b'+')) + a.adjoint().kronecker(&transmon(b'-'));
    h += jc.kronecker(&id_m).scale(params.g);
    let qubit = id_m.scale(0.5 * params.plasma) + p.scale(params.delta_plus);
    h += id_ph.kronecker(&transmon(b'z').kronecker(&qubit));
    h += id_ph.kronecker(&id_t).kronecker(&majorana_part(params, eps11)?);
    Ok(h)
}

/// Readout Hamiltonian on photons (x) transmon (x) Majoranas.
pub fn build_h_ro(params: &ReadoutParams) -> Result<CMatrix> {
    assemble(params, params.eps11, params.n_max)
}

/// `P` lifted to the full readout space.
fn full_parity(params: &ReadoutParams, n_max: usize) -> Result<CMatrix> {
    Ok(identity(2 * (n_max + 1)).kronecker(&readout_parity(params)?))
}

/// Bare state `|n, tau>` (tau = +1 excited) tensored with Majorana vector `m`.
fn bare(n_max: usize, n: usize, tau: i8, m: &CMatrix) -> CMatrix {
    let mut ph = CMatrix::from_element(n_max + 1, 1, ZERO);
    ph[(n, 0)] = ONE;
    let mut t = CMatrix::from_element(2, 1, ZERO);
    t[(if tau > 0 { 0 } else { 1 }, 0)] = ONE;
    ph.kronecker(&t).kronecker(m)
}

/// Cavity frequency for transmon state `tau_z = +1` and `-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveShift {
    pub closed_form: [f64; 2],
    pub numeric: [f64; 2],
    pub discrepancy: f64,
    /// `5 g^4 / d^3` with `d = delta_omega + 2 P Delta_+` the effective detuning.
    pub bound: f64,
    pub dispersive_condition: bool,
}

fn dressed_frequencies(params: &ReadoutParams, parity: i8, n_max: usize) -> Result<[f64; 2]> {
    let h = assemble(params, 0.0, n_max)?;
    let p = readout_parity(params)?;
    let sector = involution_eigenspace(&identity(p.nrows()), &p, parity);
    let mp = majorana_part(params, 0.0)?;
    let m_eig = hermitian_eigen(&(sector.adjoint() * &mp * &sector));
    let m0 = &sector * m_eig.columns(0, 1);

    // Span of |n, tau> (x) |m0> is invariant when eps11 = 0.
    let mut w = CMatrix::from_element(h.nrows(), 2 * (n_max + 1), ZERO);
    for n in 0..=n_max {
        for (k, tau) in [1i8, -1].into_iter().enumerate() {
            w.set_column(2 * n + k, &bare(n_max, n, tau, &m0).column(0));
        }
    }
    let reduced = w.adjoint() * &h * &w;
    let leak = max_abs(&(&h * &w - &w * &reduced));
    if leak > 1e-9 * max_abs(&h) {
        return Err(Error::SectorMixing { label: "P".into(), commutator: leak });
    }
    let eig = hermitian_eigen(&reduced);
    let level = |n: usize, tau: i8| -> Result<f64> {
        let col = 2 * n + if tau > 0 { 0 } else { 1 };
        let (mut best, mut weight) = (0, 0.0f64);
        for k in 0..eig.values.len() {
            let w = eig.vectors[(col, k)].norm_sqr();
            if w > weight {
                best = k;
                weight = w;
            }
        }
        if weight < 0.5 {
            return Err(Error::Identification { overlap: weight });
        }
        Ok(eig.values[best])
    };
    Ok([level(1, 1)? - level(0, 1)?, level(1, -1)? - level(0, -1)?])
}

/// Closed-form and exact cavity frequencies for parity `parity`.
pub fn dispersive_shift(params: &ReadoutParams, parity: i8) -> Result<DispersiveShift> {
    params.validate()?;
    let d = params.detuning() + 2.0 * f64::from(parity) * params.delta_plus;
    if d.abs() < 10.0 * params.g {
        return Err(Error::DispersiveInvalid { detuning: d, g: params.g });
    }
    let shift = params.g * params.g / d;
    let closed_form = [params.omega0 + shift, params.omega0 - shift];
    let numeric = dressed_frequencies(params, parity, params.n_max)?;
    let check = dressed_frequencies(params, parity, params.n_max + 2)?;
    let change = (0..2).map(|k| (numeric[k] - check[k]).abs()).fold(0.0, f64::max);
    if change > 1e-6 {
        return Err(Error::Truncation { change });
    }
    let discrepancy = (0..2).map(|k| (numeric[k] - closed_form[k]).abs()).fold(0.0, f64::max);
    Ok(DispersiveShift {
        closed_form,
        numeric,
        discrepancy,
        bound: 5.0 * libm::pow(params.g, 4.0) / libm::pow(d.abs(), 3.0),
        dispersive_condition: params.dispersive_condition(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementError {
    /// Largest wrong-parity amplitude over the measurement states.
    pub amplitude: f64,
    /// Set near `Delta_+ - Delta_- = |delta|`, where `amplitude = eps11 t_M`.
    pub time_limited: bool,
}

struct Manifold {
    parity: i8,
    vectors: CMatrix,
}

fn measurement_error_at(params: &ReadoutParams, n_max: usize) -> Result<f64> {
    let h0 = assemble(params, 0.0, n_max)?;
    let h = assemble(params, params.eps11, n_max)?;
    let p = full_parity(params, n_max)?;
    let dim = h.nrows();
    let scale = max_abs(&h0).max(1.0);

    // Projector onto photon vacuum with the transmon in |g>.
    let mut vacuum = CMatrix::from_element(dim, dim, ZERO);
    let dm = dim / (2 * (n_max + 1));
    for k in 0..dm {
        vacuum[(dm + k, dm + k)] = ONE;
    }

    let mut manifolds = Vec::new();
    for parity in [1i8, -1] {
        let v = involution_eigenspace(&identity(dim), &p, parity);
        let eig = hermitian_eigen(&(v.adjoint() * &h0 * &v));
        let mut start = 0;
        let n = eig.values.len();
        for k in 1..=n {
            if k == n || eig.values[k] - eig.values[k - 1] > 1e-9 * scale {
                let block = &v * eig.columns(start, k - start);
                let weight = (block.adjoint() * &vacuum * &block).trace().re / (k - start) as f64;
                if weight > 0.5 {
                    manifolds.push(Manifold { parity, vectors: block });
                }
                start = k;
            }
        }
    }

    let dressed = hermitian_eigen(&h);
    let mut worst = 0.0f64;
    for m in &manifolds {
        let overlaps: Vec<f64> = (0..dim)
            .map(|k| (m.vectors.adjoint() * dressed.vectors.column(k)).norm_squared())
            .collect();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| overlaps[b].total_cmp(&overlaps[a]));
        for &k in order.iter().take(m.vectors.ncols()) {
            if overlaps[k] < 0.5 {
                return Err(Error::Identification { overlap: overlaps[k] });
            }
            let psi = dressed.vectors.column(k);
            let wrong = (&psi - (&p * psi).scale(f64::from(m.parity))).scale(0.5);
            worst = worst.max(wrong.norm());
        }
    }
    Ok(worst)
}

/// Wrong-parity amplitude of the dressed measurement states (photon vacuum,
/// transmon ground state, both parities).
pub fn measurement_error(params: &ReadoutParams) -> Result<MeasurementError> {
    params.validate()?;
    if params.eps11 == 0.0 {
        // H_ro equals its parity-conserving part, so every measurement state is a P eigenstate.
        return Ok(MeasurementError { amplitude: 0.0, time_limited: false });
    }
    if params.parity_detuning().abs() < params.eps11.abs() {
        return Ok(MeasurementError { amplitude: params.eps11.abs() * params.t_m, time_limited: true });
    }
    let amplitude = measurement_error_at(params, params.n_max)?;
    let check = measurement_error_at(params, params.n_max + 2)?;
    if (amplitude - check).abs() > 1e-6 {
        return Err(Error::Truncation { change: (amplitude - check).abs() });
    }
    Ok(MeasurementError { amplitude, time_limited: false })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (libm::log(*x), libm::log(*y))).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
