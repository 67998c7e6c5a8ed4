use std::fmt;

use crate::error::{Error, Result};
use crate::model::ProblemInstance;
use crate::scalar::Real;

/// Split of `n` qubits into `A` and its complement `B`, stored as a bit mask
/// of `A` (bit `i` set when qubit `i` is in `A`). Canonical form keeps qubit 0
/// in `A`, so a cut and its mirror share one representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    n: usize,
    mask: u32,
}

impl Bipartition {
    /// Builds the cut with `A = a`, canonicalized.
    pub fn new(n: usize, a: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &i in a {
            if i >= n {
                return Err(Error::validation(format!("qubit {i} out of range for {n} qubits")));
            }
            mask |= 1 << i;
        }
        Self::from_mask(n, mask)
    }

    /// Builds the cut from a mask of `A`; the mirror mask is accepted and
    /// canonicalized.
    pub fn from_mask(n: usize, mask: u32) -> Result<Self> {
        if !(2..=crate::constants::MAX_QUBITS).contains(&n) {
            return Err(Error::validation(format!("bipartitions need 2..=12 qubits, got {n}")));
        }
        let full = (1u32 << n) - 1;
        if mask & !full != 0 {
            return Err(Error::validation(format!("mask {mask:#b} has bits beyond {n} qubits")));
        }
        if mask == 0 || mask == full {
            return Err(Error::validation("both sides of a bipartition must be nonempty"));
        }
        let mask = if mask & 1 == 0 { full & !mask } else { mask };
        Ok(Self { n, mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit mask of `A`; also the partition identifier in reports.
    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn contains(&self, qubit: usize) -> bool {
        self.mask >> qubit & 1 == 1
    }

    pub fn a(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.contains(i)).collect()
    }

    pub fn b(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.contains(i)).collect()
    }

    /// Mask over basis-index bits: qubit `i` sits at bit `n - 1 - i`.
    pub(crate) fn basis_mask(&self) -> usize {
        self.a().iter().fold(0usize, |m, &i| m | 1 << (self.n - 1 - i))
    }

    /// Couplings with one end on each side.
    pub fn crossing_couplings<T: Real>(&self, instance: &ProblemInstance<T>) -> Vec<(usize, usize, T)> {
        instance
            .couplings()
            .filter(|&(i, j, v)| self.contains(i) != self.contains(j) && v != T::zero())
            .collect()
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<usize>| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", join(self.a()), join(self.b()))
    }
}

/// All `2^(n-1) - 1` canonical bipartitions of `n` qubits, ordered by mask.
pub fn enumerate_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if !(2..=crate::constants::MAX_QUBITS).contains(&n) {
        return Err(Error::validation(format!("bipartitions need 2..=12 qubits, got {n}")));
    }
    let full = (1u32 << n) - 1;
    Ok((0..1u32 << (n - 1))
        .map(|m| 1 | m << 1)
        .filter(|&mask| mask != full)
        .map(|mask| Bipartition { n, mask })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(enumerate_bipartitions(2).unwrap().len(), 1);
        assert_eq!(enumerate_bipartitions(3).unwrap().len(), 3);
        assert_eq!(enumerate_bipartitions(8).unwrap().len(), 127);
        assert!(enumerate_bipartitions(1).is_err());
    }

    #[test]
    fn canonical_and_distinct() {
        let cuts = enumerate_bipartitions(5).unwrap();
        let mut masks: Vec<u32> = cuts.iter().map(|c| c.mask()).collect();
        masks.dedup();
        assert_eq!(masks.len(), 15);
        assert!(cuts.iter().all(|c| c.contains(0)));
        let mirror = Bipartition::new(4, &[2, 3]).unwrap();
        assert_eq!(mirror.a(), vec![0, 1]);
        assert_eq!(mirror.b(), vec![2, 3]);
        assert_eq!(mirror.to_string(), "{0,1}|{2,3}");
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(3, &[5]).is_err());
    }

    #[test]
    fn ring_cut_crossings() {
        let ring = ProblemInstance::<f64>::fm8();
        let half = Bipartition::new(8, &[0, 1, 2, 3]).unwrap();
        assert_eq!(half.crossing_couplings(&ring).len(), 2);
        let alternating = Bipartition::new(8, &[0, 2, 4, 6]).unwrap();
        assert_eq!(alternating.crossing_couplings(&ring).len(), 8);
    }

    #[test]
    fn basis_mask_uses_msb_convention() {
        let cut = Bipartition::new(3, &[0]).unwrap();
        assert_eq!(cut.basis_mask(), 0b100);
    }
}
