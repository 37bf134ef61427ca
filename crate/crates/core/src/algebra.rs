//! Matrix representations of Majorana operators and island parities.
//!
//! Jordan-Wigner convention used by [`build_majorana_set`]: site `j` of an
//! `n`-site register (site 0 is the leftmost, most significant Kronecker
//! factor) carries the pair
//!
//! ```text
//! c_{2j}   = Z (x) ... (x) Z (x) X (x) 1 (x) ... (x) 1
//! c_{2j+1} = Z (x) ... (x) Z (x) Y (x) 1 (x) ... (x) 1
//! ```
//!
//! with `j` Pauli-Z factors to the left.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, anticommutator, hermiticity_defect, identity, kron_paulis, max_abs, CMatrix, Pauli};

pub use crate::linalg::spectral_norm;

pub const MAX_MODES: usize = 12;

/// Ordered, labelled Majorana operators on a register of `n_modes` qubits.
#[derive(Debug, Clone)]
pub struct MajoranaSet {
    n_modes: usize,
    labels: Vec<String>,
    matrices: Vec<CMatrix>,
}

impl MajoranaSet {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_modes
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn get(&self, index: usize) -> Option<&CMatrix> {
        self.matrices.get(index)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Replace the labels (same count required).
    pub fn relabel(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.matrices.len() {
            return Err(Error::Config(format!(
                "{} labels for {} operators",
                labels.len(),
                self.matrices.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Product of the listed operators in the given order.
    pub fn product(&self, indices: &[usize]) -> Result<CMatrix> {
        let mut out = identity(self.dimension());
        for &k in indices {
            let m = self.matrices.get(k).ok_or(Error::InvalidMember { index: k, len: self.len() })?;
            out = out * m;
        }
        Ok(out)
    }

    /// Largest deviation from the Clifford relations `{M_i, M_j} = 2 delta_ij`,
    /// together with the Hermiticity defect.
    pub fn algebra_defect(&self) -> f64 {
        let dim = self.dimension();
        let two = identity(dim).scale(2.0);
        let mut worst = 0.0f64;
        for (i, a) in self.matrices.iter().enumerate() {
            worst = worst.max(hermiticity_defect(a));
            worst = worst.max(max_abs(&(anticommutator(a, a) - &two)));
            for b in &self.matrices[i + 1..] {
                worst = worst.max(max_abs(&anticommutator(a, b)));
            }
        }
        worst
    }
}

/// Jordan-Wigner Majorana operators on `n_modes` qubits (see module docs).
pub fn build_majorana_set(n_modes: usize) -> Result<MajoranaSet> {
    if n_modes == 0 || n_modes > MAX_MODES {
        return Err(Error::SizeOutOfRange { n_modes });
    }
    let mut labels = Vec::with_capacity(2 * n_modes);
    let mut matrices = Vec::with_capacity(2 * n_modes);
    for site in 0..n_modes {
        for (kind, p) in [("x", Pauli::X), ("y", Pauli::Y)] {
            let mut factors = vec![Pauli::I; n_modes];
            factors[..site].fill(Pauli::Z);
            factors[site] = p;
            labels.push(format!("c{}{}", site, kind));
            matrices.push(kron_paulis(&factors));
        }
    }
    Ok(MajoranaSet { n_modes, labels, matrices })
}

/// The three-qubit representation of the braiding T-junction with a single
/// accidental pair, in the order `Gamma_B, Gamma_C, Gamma_E, Gamma_F, gamma_1, gamma_2`.
pub fn reference_set() -> MajoranaSet {
    use Pauli::*;
    let spec: [(&str, [Pauli; 3]); 6] = [
        ("Gamma_B", [I, I, X]),
        ("Gamma_C", [I, I, Y]),
        ("Gamma_E", [I, X, Z]),
        ("Gamma_F", [I, Y, Z]),
        ("gamma_1", [X, Z, Z]),
        ("gamma_2", [Y, Z, Z]),
    ];
    MajoranaSet {
        n_modes: 3,
        labels: spec.iter().map(|(l, _)| l.to_string()).collect(),
        matrices: spec.iter().map(|(_, ps)| kron_paulis(ps)).collect(),
    }
}

/// Total fermion parity of a group of Majorana operators,
/// `exp(-i pi N/4) prod_n gamma_n` for the members in the given order.
#[derive(Debug, Clone)]
pub struct ParityOperator {
    pub island: String,
    pub matrix: CMatrix,
    pub member_indices: Vec<usize>,
}

pub fn island_parity(set: &MajoranaSet, members: &[usize], island: &str) -> Result<ParityOperator> {
    let count = members.len();
    if count < 2 || count % 2 != 0 {
        return Err(Error::ParityUndefined { count });
    }
    for (k, &m) in members.iter().enumerate() {
        if m >= set.len() {
            return Err(Error::InvalidMember { index: m, len: set.len() });
        }
        if members[..k].contains(&m) {
            return Err(Error::DuplicateMember { index: m });
        }
    }
    let phase = linalg::cis(-core::f64::consts::PI * count as f64 / 4.0);
    let matrix = set.product(members)? * phase;
    Ok(ParityOperator {
        island: island.to_string(),
        matrix,
        member_indices: members.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermitian_eigen, I as IM};
    use num_complex::Complex64;

    #[test]
    fn single_mode_is_x_and_y() {
        let set = build_majorana_set(1).unwrap();
        assert_eq!(set.len(), 2);
        assert!(max_abs(&(&set.matrices()[0] - linalg::pauli(Pauli::X))) == 0.0);
        assert!(max_abs(&(&set.matrices()[1] - linalg::pauli(Pauli::Y))) == 0.0);
    }

    #[test]
    fn three_modes_anticommute() {
        let set = build_majorana_set(3).unwrap();
        assert_eq!(set.len(), 6);
        assert!(set.algebra_defect() <= 1e-12);
    }

    #[test]
    fn size_limits() {
        assert_eq!(build_majorana_set(0).unwrap_err(), Error::SizeOutOfRange { n_modes: 0 });
        assert_eq!(build_majorana_set(13).unwrap_err(), Error::SizeOutOfRange { n_modes: 13 });
    }

    #[test]
    fn total_parity_of_two_modes_has_unit_eigenvalues() {
        let set = build_majorana_set(2).unwrap();
        // (-i c0 c1)(-i c2 c3) = -c0 c1 c2 c3; the bare -i c0 c1 c2 c3 is anti-Hermitian.
        let p = set.product(&[0, 1, 2, 3]).unwrap() * Complex64::new(-1.0, 0.0);
        let eig = hermitian_eigen(&p);
        assert!(hermiticity_defect(&p) < 1e-14);
        let mut plus = 0;
        for v in eig.values {
            assert!((v.abs() - 1.0).abs() < 1e-12);
            plus += usize::from(v > 0.0);
        }
        assert_eq!(plus, 2);
        let skew = set.product(&[0, 1, 2, 3]).unwrap() * (-IM);
        assert!(max_abs(&(skew.adjoint() + &skew)) < 1e-14);
    }

    #[test]
    fn reference_operators_match_printed_products() {
        use Pauli::*;
        let set = reference_set();
        let gb = kron_paulis(&[I, I, X]);
        let g2 = kron_paulis(&[Y, Z, Z]);
        assert_eq!(set.get(0).unwrap(), &gb);
        assert_eq!(set.get(5).unwrap(), &g2);
        assert!(set.algebra_defect() <= 1e-12);
    }

    #[test]
    fn pair_parity_is_minus_i_product() {
        let set = build_majorana_set(2).unwrap();
        let p = island_parity(&set, &[0, 1], "1").unwrap();
        let expected = set.product(&[0, 1]).unwrap() * (-IM);
        assert!(max_abs(&(&p.matrix - expected)) < 1e-15);
        assert!(hermiticity_defect(&p.matrix) < 1e-15);
    }

    #[test]
    fn four_member_parity_is_hermitian_involution() {
        let set = build_majorana_set(4).unwrap();
        let p = island_parity(&set, &[1, 2, 5, 6], "2").unwrap();
        assert!(hermiticity_defect(&p.matrix) < 1e-12);
        assert!(max_abs(&(&p.matrix * &p.matrix - identity(16))) < 1e-12);
        let again = island_parity(&set, &[1, 2, 5, 6], "2").unwrap();
        assert_eq!(p.matrix, again.matrix);
    }

    #[test]
    fn odd_or_invalid_members_rejected() {
        let set = build_majorana_set(2).unwrap();
        assert_eq!(island_parity(&set, &[0, 1, 2], "x").unwrap_err(), Error::ParityUndefined { count: 3 });
        assert_eq!(island_parity(&set, &[], "x").unwrap_err(), Error::ParityUndefined { count: 0 });
        assert!(matches!(island_parity(&set, &[0, 9], "x"), Err(Error::InvalidMember { .. })));
        assert!(matches!(island_parity(&set, &[1, 1], "x"), Err(Error::DuplicateMember { .. })));
    }

    #[test]
    fn parity_commutes_with_outside_bilinears() {
        let set = build_majorana_set(3).unwrap();
        let p = island_parity(&set, &[0, 3], "k").unwrap();
        let outside = set.product(&[1, 4]).unwrap();
        assert!(max_abs(&commutator(&p.matrix, &outside)) < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn pair_bilinears_are_commuting_involutions(n in 1usize..=5, seed in proptest::prelude::any::<[u8; 4]>()) {
            let set = build_majorana_set(n).unwrap();
            let m = set.len();
            let idx: Vec<usize> = seed.iter().map(|&b| b as usize % m).collect();
            proptest::prop_assume!(idx[0] != idx[1] && idx[2] != idx[3]);
            let a = island_parity(&set, &[idx[0], idx[1]], "a").unwrap().matrix;
            let b = island_parity(&set, &[idx[2], idx[3]], "b").unwrap().matrix;
            let one = identity(set.dimension());
            proptest::prop_assert!(max_abs(&(&a * &a - &one)) < 1e-12);
            proptest::prop_assert!(hermiticity_defect(&a) < 1e-12);
            // Bilinears sharing exactly one Majorana anticommute, otherwise commute.
            let shared = [idx[2], idx[3]].iter().filter(|k| idx[..2].contains(k)).count();
            let bracket = if shared == 1 { anticommutator(&a, &b) } else { commutator(&a, &b) };
            proptest::prop_assert!(max_abs(&bracket) < 1e-12);
        }
    }
}
