use alloc::string::String;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("register size out of range: {n_modes} fermionic modes (allowed 1..=12)")]
    SizeOutOfRange { n_modes: usize },

    #[error("parity undefined for {count} Majorana operators (need an even count >= 2)")]
    ParityUndefined { count: usize },

    #[error("invalid operator index {index} (register has {len} operators)")]
    InvalidMember { index: usize, len: usize },

    #[error("duplicate operator index {index} in parity product")]
    DuplicateMember { index: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("operator mixes parity sectors: commutator norm {commutator:.3e} with parity {label}")]
    SectorMixing { label: String, commutator: f64 },

    #[error("time {t} outside the braiding cycle [0, {t_cycle}]")]
    TimeOutOfRange { t: f64, t_cycle: f64 },

    #[error("flux phase {phase} outside the transmon range |phase| < pi/2")]
    FluxOutOfRange { phase: f64 },

    #[error("adiabaticity violated at t = {t}: gap {gap:.3e} between manifolds")]
    Adiabaticity { t: f64, gap: f64 },

    #[error("grid too coarse at t = {t}: eigenframe overlap {overlap:.3} (need > cos(pi/4))")]
    GridTooCoarse { t: f64, overlap: f64 },

    #[error("time step too large: h*||H|| = {product:.3} (limit 0.1)")]
    StepTooLarge { product: f64 },

    #[error("quadrature unresolved: Simpson and trapezoid disagree by {relative:.3e} (limit 1e-2)")]
    Quadrature { relative: f64 },

    #[error("dispersive formula invalid: effective detuning {detuning} within 10 g of resonance (g = {g})")]
    DispersiveInvalid { detuning: f64, g: f64 },

    #[error("photon truncation not converged: observable changed by {change:.3e}")]
    Truncation { change: f64 },

    #[error("dressed state identification ambiguous: best overlap {overlap:.3}")]
    Identification { overlap: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
