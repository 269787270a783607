//! Exact leakage of product measurements on a few QRAC pairs.
//!
//! For `m` uniform pairs `(b₀ⁱ, b₁ⁱ)` encoded one per qubit and measured
//! with a POVM per qubit, the full joint table of the two bit strings and the
//! outcome string is built exactly, and the collision information of each
//! string (alone, and given the other) is read off it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::collinfo::{self, JointDistribution, Variable, MAX_TABLE_CELLS};
use crate::povmsearch::corner::QuantityValues;
use crate::povmsearch::Povm;
use crate::qrac;

use super::ProtocolError;

/// Largest number of pairs enumerated.
pub const MAX_LEAKAGE_PAIRS: usize = 5;

/// Per-pair figures the experiments are checked against.
pub const PAIR_BOUNDS: QuantityValues = QuantityValues { greater: 0.59, total: 0.65, conditional: 0.59 };

/// Basis angles `kπ/16`, `k = 0..=8`: the Z basis, the `π/4` basis and the
/// `±π/8` bases among them.
pub fn sweep_angles() -> [f64; 9] {
    std::array::from_fn(|k| k as f64 * PI / 16.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub m: usize,
    /// `I_c(c₀ : O)` and `I_c(c₁ : O)`.
    pub ic_c0: f64,
    pub ic_c1: f64,
    /// `I_c(c₀ : O | c₁)` and `I_c(c₁ : O | c₀)`.
    pub ic_c0_given_c1: f64,
    pub ic_c1_given_c0: f64,
    pub greater: f64,
    pub total: f64,
    pub conditional: f64,
    /// String with strictly less information, if any (ties within 1e-12 give none).
    pub lesser: Option<u8>,
    pub greater_ok: bool,
    pub total_ok: bool,
    pub conditional_ok: bool,
}

impl LeakageReport {
    pub fn within_bounds(&self) -> bool {
        self.greater_ok && self.total_ok && self.conditional_ok
    }
}

/// Exact joint table over `c0`, `c1` (indices of the bit strings, first pair
/// most significant) and `o` (mixed-radix outcome index, first qubit most
/// significant).
pub fn leakage_table(strategy: &[Povm]) -> Result<JointDistribution, ProtocolError> {
    let m = strategy.len();
    if m == 0 || m > MAX_LEAKAGE_PAIRS {
        return Err(ProtocolError::Resource(format!("{m} pairs; between 1 and {MAX_LEAKAGE_PAIRS} are enumerable")));
    }
    let outcomes: usize = strategy.iter().map(Povm::len).product();
    if (1usize << (2 * m)).saturating_mul(outcomes) > MAX_TABLE_CELLS {
        return Err(ProtocolError::Resource(format!("{outcomes} joint outcomes on {m} pairs")));
    }
    // probs[i][b0][b1][j] = Tr[M_j ℰ(b0, b1)].
    let probs: Vec<[[Vec<f64>; 2]; 2]> = strategy
        .iter()
        .map(|p| {
            [false, true].map(|b0| {
                [false, true].map(|b1| {
                    let rho = qrac::qrac_encode(b0, b1).density_matrix().matrix();
                    p.elements().iter().map(|e| e.trace_product(rho).max(0.0)).collect()
                })
            })
        })
        .collect();
    let vars = vec![Variable::new("c0", 1 << m), Variable::new("c1", 1 << m), Variable::new("o", outcomes)];
    let scale = 0.25f64.powi(m as i32);
    Ok(JointDistribution::from_fn(vars, |idx| {
        let mut o = idx[2];
        let mut p = scale;
        for i in (0..m).rev() {
            let size = strategy[i].len();
            let (b0, b1) = ((idx[0] >> (m - 1 - i)) & 1, (idx[1] >> (m - 1 - i)) & 1);
            p *= probs[i][b0][b1][o % size];
            o /= size;
        }
        p
    })?)
}

/// Collision information leaked by measuring pair `i` with `strategy[i]`.
pub fn leakage_experiment(strategy: &[Povm]) -> Result<LeakageReport, ProtocolError> {
    let d = leakage_table(strategy)?;
    let m = strategy.len();
    let ic_c0 = collinfo::collision_mi(&d, &["c0"], &["o"])?;
    let ic_c1 = collinfo::collision_mi(&d, &["c1"], &["o"])?;
    let ic_c0_given_c1 = collinfo::conditional_collision_mi(&d, &["c0"], &["o"], &["c1"])?;
    let ic_c1_given_c0 = collinfo::conditional_collision_mi(&d, &["c1"], &["o"], &["c0"])?;
    let (greater, total, conditional) = (ic_c0.max(ic_c1), ic_c0 + ic_c1, ic_c0_given_c1.max(ic_c1_given_c0));
    let lesser = if (ic_c0 - ic_c1).abs() <= 1e-12 {
        None
    } else if ic_c0 < ic_c1 {
        Some(0)
    } else {
        Some(1)
    };
    let mf = m as f64;
    Ok(LeakageReport {
        m,
        ic_c0,
        ic_c1,
        ic_c0_given_c1,
        ic_c1_given_c0,
        greater,
        total,
        conditional,
        lesser,
        greater_ok: greater <= mf * PAIR_BOUNDS.greater,
        total_ok: total <= mf * PAIR_BOUNDS.total,
        conditional_ok: conditional <= mf * PAIR_BOUNDS.conditional,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub angles: Vec<f64>,
    pub report: LeakageReport,
}

/// Every product of basis measurements with angles from `angles` on `m` pairs.
pub fn leakage_sweep(m: usize, angles: &[f64]) -> Result<Vec<SweepRow>, ProtocolError> {
    if angles.is_empty() {
        return Err(ProtocolError::BadParams("empty angle grid".into()));
    }
    let count = angles.len().checked_pow(m as u32).filter(|&c| c <= 1 << 24);
    let Some(count) = count else {
        return Err(ProtocolError::Resource(format!("{}^{m} strategies", angles.len())));
    };
    (0..count)
        .into_par_iter()
        .map(|mut s| {
            let mut chosen = vec![0.0; m];
            for slot in chosen.iter_mut().rev() {
                *slot = angles[s % angles.len()];
                s /= angles.len();
            }
            let strategy: Vec<Povm> = chosen.iter().map(|&t| Povm::basis(t)).collect();
            Ok(SweepRow { report: leakage_experiment(&strategy)?, angles: chosen })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn all_z_basis_learns_only_first_string() {
        let r = leakage_experiment(&vec![Povm::z_basis(); 3]).unwrap();
        assert!((r.ic_c0 - 3.0 * 1.5f64.log2()).abs() < 1e-12);
        assert!(r.ic_c1.abs() < 1e-12);
        assert_eq!(r.lesser, Some(1));
        assert!(r.within_bounds());
    }

    #[test]
    fn intermediate_basis_total() {
        let r = leakage_experiment(&vec![Povm::basis(FRAC_PI_8); 2]).unwrap();
        assert!((r.total - 2.0 * 2.0 * 1.25f64.log2()).abs() < 1e-12, "{}", r.total);
        assert_eq!(r.lesser, None);
    }

    #[test]
    fn honest_reader_learns_nothing_about_other_string() {
        for (alpha, theta) in [(0, 0.0), (1, FRAC_PI_4)] {
            let r = leakage_experiment(&vec![Povm::basis(theta); 3]).unwrap();
            let other = if alpha == 0 { r.ic_c1 } else { r.ic_c0 };
            assert!(other.abs() < 1e-12);
            assert!(other <= 3.0 * PAIR_BOUNDS.conditional);
        }
    }

    #[test]
    fn table_matches_single_pair_outcome_table() {
        let p = Povm::basis(0.3);
        let d = leakage_table(std::slice::from_ref(&p)).unwrap();
        let single = crate::povmsearch::outcome_table(&p).unwrap();
        assert_eq!(d.probs(), single.probs());
    }

    #[test]
    fn mixed_outcome_counts() {
        let s = [Povm::identity(), Povm::basis(0.2), Povm::z_basis()];
        let d = leakage_table(&s).unwrap();
        assert_eq!(d.size_of("o").unwrap(), 4);
        let r = leakage_experiment(&s).unwrap();
        let two = leakage_experiment(&s[1..]).unwrap();
        assert!((r.total - two.total).abs() < 1e-12);
    }

    #[test]
    fn resource_limits() {
        assert!(matches!(leakage_experiment(&[]), Err(ProtocolError::Resource(_))));
        assert!(matches!(leakage_experiment(&vec![Povm::z_basis(); 6]), Err(ProtocolError::Resource(_))));
    }

    #[test]
    fn sweep_covers_grid() {
        let rows = leakage_sweep(2, &sweep_angles()).unwrap();
        assert_eq!(rows.len(), 81);
        assert!(rows.iter().all(|r| r.report.within_bounds()));
        assert_eq!(rows[1].angles, vec![0.0, PI / 16.0]);
    }
}
