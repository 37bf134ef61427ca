//! Braiding Hamiltonians of the five-island device and their parity sectors.
//!
//! Energies are in units of `Delta_0`, with `hbar = 1`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{reference_set, build_majorana_set, island_parity, MajoranaSet};
use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, commutator, identity, involution_eigenspace, kron_paulis, max_abs,
    spectral_norm, CMatrix, Pauli, I, ONE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Island {
    Bus,
    Ground,
    One,
    Two,
    Three,
}

impl Island {
    pub const ALL: [Island; 5] = [Island::Bus, Island::Ground, Island::One, Island::Two, Island::Three];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> &'static str {
        match self {
            Island::Bus => "b",
            Island::Ground => "g",
            Island::One => "1",
            Island::Two => "2",
            Island::Three => "3",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Island> {
        Island::ALL.into_iter().find(|i| i.tag() == tag)
    }
}

impl fmt::Display for Island {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Computational Majoranas at the wire ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Computational {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Computational {
    pub const ALL: [Computational; 6] = [
        Computational::A,
        Computational::B,
        Computational::C,
        Computational::D,
        Computational::E,
        Computational::F,
    ];

    fn label(self) -> &'static str {
        match self {
            Computational::A => "Gamma_A",
            Computational::B => "Gamma_B",
            Computational::C => "Gamma_C",
            Computational::D => "Gamma_D",
            Computational::E => "Gamma_E",
            Computational::F => "Gamma_F",
        }
    }
}

/// Which end of an island's accidental chain a coupling attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// `epsilon_{k1}`, attached to `gamma_{k,1}`.
    First,
    /// `epsilon_{k2}`, attached to `gamma_{k,N_k}`.
    Second,
}

/// Island layout: number of accidental Majoranas per island.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DeviceSpec {
    accidental: [usize; 5],
}

impl DeviceSpec {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn with_accidental(mut self, island: Island, count: usize) -> Result<Self> {
        if count % 2 != 0 {
            return Err(Error::Config(format!(
                "island {island} has {count} accidental Majoranas; counts must be even"
            )));
        }
        self.accidental[island.index()] = count;
        if self.total_majoranas() / 2 > crate::algebra::MAX_MODES {
            return Err(Error::SizeOutOfRange { n_modes: self.total_majoranas() / 2 });
        }
        Ok(self)
    }

    pub fn accidental(&self, island: Island) -> usize {
        self.accidental[island.index()]
    }

    pub fn total_majoranas(&self) -> usize {
        6 + self.accidental.iter().sum::<usize>()
    }

    pub fn dimension(&self) -> usize {
        1 << (self.total_majoranas() / 2)
    }

    /// Islands hosting at least one accidental pair.
    pub fn populated_islands(&self) -> impl Iterator<Item = Island> + '_ {
        Island::ALL.into_iter().filter(|i| self.accidental(*i) > 0)
    }
}

/// Energies `delta_{k,n}` and `epsilon_{ki}` in units of `Delta_0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DisorderConfig {
    pub delta: BTreeMap<(Island, usize), f64>,
    pub eps: BTreeMap<(Island, Side), f64>,
}

impl DisorderConfig {
    pub fn set_delta(&mut self, island: Island, bond: usize, value: f64) -> &mut Self {
        self.delta.insert((island, bond), value);
        self
    }

    pub fn set_eps(&mut self, island: Island, side: Side, value: f64) -> &mut Self {
        self.eps.insert((island, side), value);
        self
    }

    /// All external couplings multiplied by `scale`.
    pub fn scaled_eps(&self, scale: f64) -> Self {
        let mut out = self.clone();
        for v in out.eps.values_mut() {
            *v *= scale;
        }
        out
    }

    /// `true` when every `epsilon_{ki}` is within the perturbative window `<= 0.1 Delta_0`.
    pub fn is_perturbative(&self) -> bool {
        self.eps.values().all(|e| e.abs() <= 0.1)
    }

    pub fn has_external_coupling(&self) -> bool {
        self.eps.values().any(|e| *e != 0.0)
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self.delta.values().chain(self.eps.values()).all(|v| v.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::Config("non-finite disorder coupling".to_string()))
        }
    }
}

/// Coulomb couplings `(Delta_1, Delta_2, Delta_3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingSet {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl CouplingSet {
    pub fn new(d1: f64, d2: f64, d3: f64) -> Self {
        Self { d1, d2, d3 }
    }

    /// Half the gap between ground and excited manifolds.
    pub fn e0(&self) -> f64 {
        libm::sqrt(self.d1 * self.d1 + self.d2 * self.d2 + self.d3 * self.d3)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.d1, self.d2, self.d3]
    }

    /// Exchange `Delta_1` and `Delta_3`.
    pub fn swap_outer(&self) -> Self {
        Self::new(self.d3, self.d2, self.d1)
    }
}

/// Majorana register for a [`DeviceSpec`]: `Gamma_A..Gamma_F` first, then the
/// accidental chains of islands b, g, 1, 2, 3.
#[derive(Debug, Clone)]
pub struct DeviceRegister {
    spec: DeviceSpec,
    set: MajoranaSet,
    offsets: [usize; 5],
}

impl DeviceRegister {
    pub fn new(spec: DeviceSpec) -> Result<Self> {
        let total = spec.total_majoranas();
        let set = build_majorana_set(total / 2)?;
        let mut labels: Vec<String> = Computational::ALL.iter().map(|c| c.label().to_string()).collect();
        let mut offsets = [0; 5];
        for island in Island::ALL {
            offsets[island.index()] = labels.len();
            for n in 1..=spec.accidental(island) {
                labels.push(format!("gamma_{island}_{n}"));
            }
        }
        let set = set.relabel(labels)?;
        Ok(Self { spec, set, offsets })
    }

    pub fn spec(&self) -> &DeviceSpec {
        &self.spec
    }

    pub fn set(&self) -> &MajoranaSet {
        &self.set
    }

    pub fn dimension(&self) -> usize {
        self.set.dimension()
    }

    pub fn computational(&self, c: Computational) -> &CMatrix {
        &self.set.matrices()[c as usize]
    }

    fn accidental_index(&self, island: Island, n: usize) -> Result<usize> {
        let count = self.spec.accidental(island);
        if n == 0 || n > count {
            return Err(Error::Config(format!(
                "gamma_{{{island},{n}}} does not exist (island {island} has {count} accidental modes)"
            )));
        }
        Ok(self.offsets[island.index()] + n - 1)
    }

    /// `gamma_{k,n}` with 1-based `n`.
    pub fn accidental(&self, island: Island, n: usize) -> Result<&CMatrix> {
        Ok(&self.set.matrices()[self.accidental_index(island, n)?])
    }

    /// `Pi_k`; the identity for islands without accidental modes.
    pub fn parity(&self, island: Island) -> CMatrix {
        let count = self.spec.accidental(island);
        if count == 0 {
            return identity(self.dimension());
        }
        let start = self.offsets[island.index()];
        let members: Vec<usize> = (start..start + count).collect();
        island_parity(&self.set, &members, island.tag())
            .map(|p| p.matrix)
            .unwrap_or_else(|_| identity(self.dimension()))
    }

    /// Parity operators of all populated islands.
    pub fn island_parities(&self) -> Vec<(Island, CMatrix)> {
        self.spec.populated_islands().map(|i| (i, self.parity(i))).collect()
    }

    /// Measured parity `P = -i Gamma_A Pi_b Gamma_B`.
    pub fn readout_parity(&self) -> CMatrix {
        use Computational::*;
        (self.computational(A) * self.parity(Island::Bus) * self.computational(B)) * (-I)
    }

    /// `-i x y` for two computational Majoranas.
    pub fn bilinear(&self, x: Computational, y: Computational) -> CMatrix {
        (self.computational(x) * self.computational(y)) * (-I)
    }
}

/// `H_br = H_C + H_delta + H_eps`, stored as separately scaled terms.
#[derive(Debug, Clone)]
pub struct BraidingHamiltonian {
    /// `i Gamma_B Pi_1 Gamma_E`, `i Gamma_E Pi_2 Gamma_F`, `i Gamma_E Pi_3 Gamma_C`.
    coulomb: [CMatrix; 3],
    accidental: CMatrix,
    external: CMatrix,
    external_terms: Vec<((Island, Side), CMatrix)>,
}

impl BraidingHamiltonian {
    pub fn new(register: &DeviceRegister, disorder: &DisorderConfig) -> Result<Self> {
        use Computational::*;
        disorder.check_finite()?;
        let dim = register.dimension();
        let g = |c| register.computational(c);
        let coulomb = [
            g(B) * register.parity(Island::One) * g(E) * I,
            g(E) * register.parity(Island::Two) * g(F) * I,
            g(E) * register.parity(Island::Three) * g(C) * I,
        ];

        let mut accidental = CMatrix::zeros(dim, dim);
        for (&(island, n), &value) in &disorder.delta {
            let count = register.spec().accidental(island);
            if n == 0 || n + 1 > count {
                return Err(Error::Config(format!(
                    "delta_{{{island},{n}}} couples gamma_{{{island},{n}}} and gamma_{{{island},{}}} but island {island} has {count} modes",
                    n + 1
                )));
            }
            let term = register.accidental(island, n)? * register.accidental(island, n + 1)? * I;
            accidental += term.scale(value);
        }

        let mut external = CMatrix::zeros(dim, dim);
        let mut external_terms = Vec::new();
        for (&(island, side), &value) in &disorder.eps {
            let term = external_term(register, island, side)?;
            external += term.scale(value);
            external_terms.push(((island, side), term));
        }

        Ok(Self { coulomb, accidental, external, external_terms })
    }

    /// `H_C(Delta) + H_delta`.
    pub fn unperturbed(&self, c: &CouplingSet) -> CMatrix {
        self.coulomb[0].scale(c.d1) + self.coulomb[1].scale(c.d2) + self.coulomb[2].scale(c.d3) + &self.accidental
    }

    pub fn at(&self, c: &CouplingSet) -> CMatrix {
        self.unperturbed(c) + &self.external
    }

    pub fn coulomb_terms(&self) -> &[CMatrix; 3] {
        &self.coulomb
    }

    pub fn accidental_part(&self) -> &CMatrix {
        &self.accidental
    }

    pub fn external_part(&self) -> &CMatrix {
        &self.external
    }

    /// The unit-strength operator multiplying `epsilon_{ki}`, if configured.
    pub fn external_term(&self, island: Island, side: Side) -> Option<&CMatrix> {
        self.external_terms.iter().find(|(k, _)| *k == (island, side)).map(|(_, m)| m)
    }
}

/// Unit-strength `H_eps` term for `epsilon_{ki}`, in the printed operator order.
pub fn external_term(register: &DeviceRegister, island: Island, side: Side) -> Result<CMatrix> {
    use Computational::*;
    let count = register.spec().accidental(island);
    if count == 0 {
        return Err(Error::Config(format!(
            "epsilon_{{{island}{}}} set but island {island} has no accidental modes",
            if side == Side::First { 1 } else { 2 }
        )));
    }
    let g = |c| register.computational(c);
    let first = register.accidental(island, 1)?;
    let last = register.accidental(island, count)?;
    let product = match (island, side) {
        (Island::Bus, Side::First) => g(A) * first,
        (Island::Ground, Side::First) => g(B) * first,
        (Island::One, Side::First) => g(B) * first,
        (Island::Two, Side::First) => g(E) * first,
        (Island::Three, Side::First) => g(E) * first,
        (Island::Bus, Side::Second) => last * g(B),
        (Island::Ground, Side::Second) => last * g(D),
        (Island::One, Side::Second) => last * g(E),
        (Island::Two, Side::Second) => last * g(F),
        (Island::Three, Side::Second) => last * g(C),
    };
    Ok(product * I)
}

/// `H_br` at fixed couplings.
pub fn build_h_br(register: &DeviceRegister, couplings: &CouplingSet, disorder: &DisorderConfig) -> Result<CMatrix> {
    Ok(BraidingHamiltonian::new(register, disorder)?.at(couplings))
}

/// Error channels of the T-junction with one accidental pair: the six
/// placements `k i` of the pair inside island `k` coupled on side `i`, plus the
/// bus/ground couplings `b2` and `g1` that act on `Gamma_B` from outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    B2,
    G1,
    K11,
    K12,
    K21,
    K22,
    K31,
    K32,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::B2,
        Channel::G1,
        Channel::K11,
        Channel::K12,
        Channel::K21,
        Channel::K22,
        Channel::K31,
        Channel::K32,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Channel::B2 => "b2",
            Channel::G1 => "g1",
            Channel::K11 => "11",
            Channel::K12 => "12",
            Channel::K21 => "21",
            Channel::K22 => "22",
            Channel::K31 => "31",
            Channel::K32 => "32",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.tag() == tag)
            .ok_or_else(|| Error::Config(format!("unknown coupling selector {tag:?}")))
    }

    /// Island (1..=3) whose Coulomb term contains the pair, if any.
    fn junction_island(self) -> Option<usize> {
        match self {
            Channel::K11 | Channel::K12 => Some(0),
            Channel::K21 | Channel::K22 => Some(1),
            Channel::K31 | Channel::K32 => Some(2),
            Channel::B2 | Channel::G1 => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Hamiltonian of one [`Channel`] on the three-qubit register of
/// [`reference_set`], split into Coulomb, pair and perturbation parts.
#[derive(Debug, Clone)]
pub struct JunctionHamiltonian {
    channel: Channel,
    coulomb: [CMatrix; 3],
    pair: CMatrix,
    perturbation: CMatrix,
    pair_parity: CMatrix,
}

impl JunctionHamiltonian {
    pub fn new(channel: Channel) -> Self {
        let set = reference_set();
        let m = set.matrices();
        let (gb, gc, ge, gf, g1, g2) = (&m[0], &m[1], &m[2], &m[3], &m[4], &m[5]);
        let pair_product = g1 * g2;
        let clean = [gb * ge * I, ge * gf * I, ge * gc * I];
        // With the pair inside island k, i Delta_k X Pi_k Y = Delta_k X g1 g2 Y.
        let dressed = [gb * &pair_product * ge, ge * &pair_product * gf, ge * &pair_product * gc];
        let mut coulomb = clean;
        if let Some(k) = channel.junction_island() {
            coulomb[k] = dressed[k].clone();
        }
        let perturbation = match channel {
            Channel::K11 | Channel::G1 => gb * g1 * I,
            Channel::K12 => g2 * ge * I,
            Channel::K21 | Channel::K31 => ge * g1 * I,
            Channel::K22 => g2 * gf * I,
            Channel::K32 => g2 * gc * I,
            Channel::B2 => g2 * gb * I,
        };
        Self {
            channel,
            coulomb,
            pair: &pair_product * I,
            perturbation,
            pair_parity: &pair_product * (-I),
        }
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn dimension(&self) -> usize {
        8
    }

    /// `H` with `epsilon = 0`.
    pub fn unperturbed(&self, c: &CouplingSet, delta: f64) -> CMatrix {
        self.coulomb[0].scale(c.d1) + self.coulomb[1].scale(c.d2) + self.coulomb[2].scale(c.d3) + self.pair.scale(delta)
    }

    pub fn at(&self, c: &CouplingSet, delta: f64, eps: f64) -> CMatrix {
        self.unperturbed(c, delta) + self.perturbation.scale(eps)
    }

    /// Unit-strength coupling operator (`epsilon = 1`).
    pub fn perturbation(&self) -> &CMatrix {
        &self.perturbation
    }

    /// `-i gamma_1 gamma_2`, conserved when `epsilon = 0`.
    pub fn pair_parity(&self) -> &CMatrix {
        &self.pair_parity
    }
}

/// Spectator extension: a fourth (leading) qubit hosts `Gamma_A` and `Gamma_D`,
/// and every three-qubit operator becomes `1 (x) op`.
pub fn with_spectators(op: &CMatrix) -> CMatrix {
    identity(2).kronecker(op)
}

/// `Gamma_A` and `Gamma_D` on the four-qubit spectator-extended register.
pub fn spectator_majoranas() -> (CMatrix, CMatrix) {
    use Pauli::*;
    (kron_paulis(&[X, Z, Z, Z]), kron_paulis(&[Y, Z, Z, Z]))
}

/// One of the six T-junction Hamiltonians `H_{ki}` on the 16-dimensional
/// register `{Gamma_A, Gamma_D} + reference set`.
pub fn build_h_ki(which: &str, couplings: &CouplingSet, delta: f64, eps: f64) -> Result<CMatrix> {
    let channel = Channel::from_tag(which)?;
    if channel.junction_island().is_none() {
        return Err(Error::Config(format!("{which:?} is not a T-junction placement (11..32)")));
    }
    Ok(with_spectators(&JunctionHamiltonian::new(channel).at(couplings, delta, eps)))
}

/// Joint eigenspace of commuting Hermitian involutions.
#[derive(Debug, Clone)]
pub struct Sector {
    pub parities: Vec<i8>,
    /// Orthonormal columns spanning the sector.
    pub isometry: CMatrix,
}

impl Sector {
    pub fn dimension(&self) -> usize {
        self.isometry.ncols()
    }

    pub fn project(&self, op: &CMatrix) -> CMatrix {
        self.isometry.adjoint() * op * &self.isometry
    }

    pub fn projector(&self) -> CMatrix {
        &self.isometry * self.isometry.adjoint()
    }
}

/// Decomposition of the register into all non-empty sectors of a set of
/// parity operators.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub dimension: usize,
    pub sectors: Vec<Sector>,
}

impl SectorBasis {
    /// Sectors of `ops`; with no operators the whole space is one sector.
    pub fn new(dimension: usize, ops: &[CMatrix]) -> Self {
        let mut sectors = alloc::vec![Sector { parities: Vec::new(), isometry: identity(dimension) }];
        for op in ops {
            let mut next = Vec::new();
            for s in &sectors {
                for sign in [1i8, -1] {
                    let iso = involution_eigenspace(&s.isometry, op, sign);
                    if iso.ncols() > 0 {
                        let mut parities = s.parities.clone();
                        parities.push(sign);
                        next.push(Sector { parities, isometry: iso });
                    }
                }
            }
            sectors = next;
        }
        Self { dimension, sectors }
    }

    pub fn whole(dimension: usize) -> Self {
        Self::new(dimension, &[])
    }

    pub fn find(&self, parities: &[i8]) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.parities == parities)
    }
}

/// Commutator check used before projecting onto a sector.
pub fn check_commutes(h: &CMatrix, ops: &[(String, CMatrix)]) -> Result<()> {
    let scale = spectral_norm(h)?.max(1.0);
    for (label, op) in ops {
        let c = max_abs(&commutator(h, op));
        if c > 1e-10 * scale {
            return Err(Error::SectorMixing { label: label.clone(), commutator: c });
        }
    }
    Ok(())
}

/// `H` restricted to the joint eigenspace `{Pi_k = p_k}` of the given parity
/// operators. The reduced basis is the sector isometry of [`SectorBasis`].
pub fn sector_project(h: &CMatrix, parities: &[(String, CMatrix, i8)]) -> Result<CMatrix> {
    let labelled: Vec<(String, CMatrix)> = parities.iter().map(|(l, m, _)| (l.clone(), m.clone())).collect();
    check_commutes(h, &labelled)?;
    let ops: Vec<CMatrix> = parities.iter().map(|(_, m, _)| m.clone()).collect();
    let signs: Vec<i8> = parities.iter().map(|(_, _, p)| *p).collect();
    let basis = SectorBasis::new(h.nrows(), &ops);
    match basis.find(&signs) {
        Some(s) => Ok(s.project(h)),
        None => Ok(CMatrix::zeros(0, 0)),
    }
}

/// The three block-diagonal unitaries relating the T-junction Hamiltonians.
#[derive(Debug, Clone)]
pub struct ReferenceUnitaries {
    pub u12: CMatrix,
    pub u13: CMatrix,
    pub u13_tilde: CMatrix,
}

pub fn reference_unitaries() -> ReferenceUnitaries {
    use Pauli::{X, Y, Z};
    let id = Pauli::I;
    let sx_plus_sy = kron_paulis(&[id, X]) + kron_paulis(&[id, Y]);
    let r = core::f64::consts::FRAC_1_SQRT_2;
    ReferenceUnitaries {
        u12: block_diag(&kron_paulis(&[Z, Z]), &kron_paulis(&[X, X])),
        u13: block_diag(&kron_paulis(&[Z, Z]), &kron_paulis(&[Z, id])),
        u13_tilde: block_diag(&(&sx_plus_sy * (I * r)), &(&sx_plus_sy * (ONE * r))),
    }
}
