//! Exact comparison of the real view against the simulated one.
//!
//! The adversary measures every qubit with a fixed POVM and sees the outcome
//! string `o`, both ciphertexts and both extractor seeds. The simulator
//! replaces `ct₁` with a uniform string and keeps everything else. Both view
//! distributions are enumerated exactly over `r₀, r₁`, the seeds and the
//! outcomes, for fixed public codes and fixed messages.

use serde::Serialize;

use rayon::prelude::*;

use crate::collinfo::{JointDistribution, Variable, MAX_TABLE_CELLS};
use crate::f2codes::BitVector;
use crate::povmsearch::Povm;
use crate::qrac;
use crate::seed;

use super::extractor::{seed_len, Extractor};
use super::otrm::public_codes;
use super::{ProtocolError, ProtocolParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatorReport {
    pub n: usize,
    pub k: usize,
    pub msg_len: usize,
    /// Exact statistical distance between the two view distributions.
    pub sd: f64,
    /// Average min-entropy of `c₁` given `(ω₀, ω₁, o, ct₀)`.
    pub h_min: f64,
    /// `2^{−(H − ℓ)/2}` for output length `ℓ`.
    pub lhl_bound: f64,
    /// `½·2^{−(H − ℓ)/2}`, the leftover hash bound with its constant.
    pub lhl_bound_tight: f64,
}

/// Result of [`simulator_transcript`].
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    /// Both view distributions over `(w0, w1, o, ct0, ct1)`, when they fit in
    /// a table.
    pub views: Option<(JointDistribution, JointDistribution)>,
    pub report: SimulatorReport,
}

/// Largest amount of enumeration work accepted.
pub const MAX_SIMULATOR_WORK: u128 = 1 << 32;

/// Compares the real and simulated views exactly.
///
/// Seeds are public and uniform, so the distance is the seed average of the
/// distances between the conditional views, and the min-entropy guessing
/// probability is a seed average too; both are accumulated one seed pair at
/// a time.
pub fn simulator_transcript(
    m0: &BitVector,
    m1: &BitVector,
    params: &ProtocolParams,
    strategy: &[Povm],
    seed: u64,
) -> Result<Transcript, ProtocolError> {
    params.validate()?;
    let (n, k, len) = (params.n, params.k, params.msg_len());
    if m0.len() != len || m1.len() != len {
        return Err(ProtocolError::BadLength(format!("messages must have λ/8 = {len} bits")));
    }
    if strategy.len() != n {
        return Err(ProtocolError::BadLength(format!("{} measurements for {n} qubits", strategy.len())));
    }
    let s = seed_len(n, len);
    let outcomes: usize = strategy.iter().map(Povm::len).product();
    let (ns, nl, nk) = (1u128 << s, 1u128 << len, 1u128 << k);
    let work = ns * ns * outcomes as u128 * (nk * nk + nl * nl);
    if s >= 32 || k >= 32 || outcomes > 1 << 20 || work > MAX_SIMULATOR_WORK {
        return Err(ProtocolError::Resource(format!("enumeration of about {work} terms")));
    }
    let (ns, nl, nk) = (ns as usize, nl as usize, nk as usize);
    let code_seed = params.code_seed.unwrap_or_else(|| seed::derive(seed, "otrm-codes"));
    let codes = public_codes(n, k, code_seed)?;
    let words: Vec<Vec<BitVector>> = codes
        .iter()
        .map(|c| (0..1u64 << k).map(|r| c.encode(&BitVector::from_index(r, k))).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;

    // p(o | r0, r1), outcome index mixed-radix with qubit 0 most significant.
    let outcome_probs = |c0: &BitVector, c1: &BitVector| -> Vec<f64> {
        let mut v = vec![1.0];
        for (i, p) in strategy.iter().enumerate() {
            let rho = qrac::qrac_encode(c0.get(i), c1.get(i)).density_matrix().matrix();
            let e: Vec<f64> = p.elements().iter().map(|m| m.trace_product(rho).max(0.0)).collect();
            v = v.iter().flat_map(|&a| e.iter().map(move |&b| a * b)).collect();
        }
        v
    };
    let po: Vec<Vec<f64>> = (0..nk * nk).map(|i| outcome_probs(&words[0][i / nk], &words[1][i % nk])).collect();
    let exts: Vec<Extractor> =
        (0..1u64 << s).map(|w| Extractor::from_seed(n, len, BitVector::from_index(w, s))).collect::<Result<_, _>>()?;
    // hashed[a][w][r] = index of m_a ⊕ Ext(ω_w, c_a(r)).
    let hashed: Vec<Vec<Vec<usize>>> = [m0, m1]
        .iter()
        .zip(&words)
        .map(|(m, ws)| exts.iter().map(|e| ws.iter().map(|c| e.apply(c).map(|h| m.xor(&h).to_index() as usize)).collect()).collect())
        .collect::<Result<Vec<Vec<Vec<usize>>>, _>>()?;

    let cell = |o: usize, ct0: usize, ct1: usize| (o * nl + ct0) * nl + ct1;
    // Conditional real view p(o, ct0, ct1 | ω0, ω1), and p(o, ct0, c1 | ω0).
    let real_given = |w0: usize, w1: usize| {
        let mut t = vec![0.0; outcomes * nl * nl];
        for r0 in 0..nk {
            for r1 in 0..nk {
                let (ct0, ct1) = (hashed[0][w0][r0], hashed[1][w1][r1]);
                for (o, &p) in po[r0 * nk + r1].iter().enumerate() {
                    t[cell(o, ct0, ct1)] += p / (nk * nk) as f64;
                }
            }
        }
        t
    };
    let guess_given = |w0: usize| {
        let mut t = vec![0.0; outcomes * nl * nk];
        for r0 in 0..nk {
            for r1 in 0..nk {
                let ct0 = hashed[0][w0][r0];
                for (o, &p) in po[r0 * nk + r1].iter().enumerate() {
                    t[(o * nl + ct0) * nk + r1] += p / (nk * nk) as f64;
                }
            }
        }
        t.chunks(nk).map(|c| c.iter().copied().fold(0.0, f64::max)).sum::<f64>()
    };
    let sim_of = |real: &[f64]| -> Vec<f64> {
        real.chunks(nl).flat_map(|c| std::iter::repeat_n(c.iter().sum::<f64>() / nl as f64, nl)).collect()
    };
    let sd = (0..ns)
        .into_par_iter()
        .map(|w0| {
            (0..ns)
                .map(|w1| {
                    let real = real_given(w0, w1);
                    let sim = sim_of(&real);
                    0.5 * real.iter().zip(&sim).map(|(a, b)| (a - b).abs()).sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        / (ns * ns) as f64;
    let guess = (0..ns).into_par_iter().map(guess_given).sum::<f64>() / ns as f64;
    let h_min = -guess.log2();
    let lhl_bound = 2f64.powf(-(h_min - len as f64) / 2.0);
    let report = SimulatorReport { n, k, msg_len: len, sd, h_min, lhl_bound, lhl_bound_tight: 0.5 * lhl_bound };

    let cells = (ns * ns) as u128 * (outcomes * nl * nl) as u128;
    let views = if cells <= MAX_TABLE_CELLS as u128 {
        let vars = vec![
            Variable::new("w0", ns),
            Variable::new("w1", ns),
            Variable::new("o", outcomes),
            Variable::new("ct0", nl),
            Variable::new("ct1", nl),
        ];
        let scale = 1.0 / (ns * ns) as f64;
        let mut real = Vec::with_capacity(cells as usize);
        let mut sim = Vec::with_capacity(cells as usize);
        for w0 in 0..ns {
            for w1 in 0..ns {
                let r = real_given(w0, w1);
                sim.extend(sim_of(&r).iter().map(|p| p * scale));
                real.extend(r.iter().map(|p| p * scale));
            }
        }
        Some((JointDistribution::new(vars.clone(), real)?, JointDistribution::new(vars, sim)?))
    } else {
        None
    };
    Ok(Transcript { views, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: usize) -> ProtocolParams {
        ProtocolParams::new(6, 2, lambda).unwrap().with_code_seed(5)
    }

    #[test]
    fn empty_messages_are_indistinguishable() {
        let e = BitVector::zeros(0);
        let t = simulator_transcript(&e, &e, &params(0), &vec![Povm::z_basis(); 6], 1).unwrap();
        assert!(t.report.sd.abs() < 1e-15);
    }

    #[test]
    fn streamed_distance_matches_tables() {
        let m = BitVector::from_bits(&[1]);
        let t = simulator_transcript(&m, &m, &params(8), &vec![Povm::basis(0.7); 6], 1).unwrap();
        let (real, sim) = t.views.unwrap();
        let sd = crate::collinfo::statistical_distance(&real, &sim).unwrap();
        assert!((sd - t.report.sd).abs() < 1e-12);
        let ct1 = real.marginal(&["ct1"]).unwrap();
        assert!(sim.marginal(&["ct1"]).unwrap().probs().iter().all(|p| (p - 0.5).abs() < 1e-9));
        assert!(ct1.probs().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn z_basis_adversary_within_hash_bound() {
        let m = BitVector::from_bits(&[1]);
        let t = simulator_transcript(&m, &m, &params(8), &vec![Povm::z_basis(); 6], 1).unwrap();
        let r = &t.report;
        assert!(r.sd <= r.lhl_bound_tight + 1e-12, "{r:?}");
        assert!(r.sd <= r.lhl_bound);
        // Measuring in the Z basis says nothing about c₁, so H = k.
        assert!((r.h_min - 2.0).abs() < 1e-9, "{}", r.h_min);
    }

    #[test]
    fn blind_adversary_sees_bare_hash_distance() {
        let m = BitVector::from_bits(&[0]);
        let p = params(8);
        let t = simulator_transcript(&m, &m, &p, &vec![Povm::identity(); 6], 1).unwrap();
        // Direct: average over seeds of SD(Ext(ω, c₁), U) with c₁ uniform on the code.
        let code = &public_codes(6, 2, 5).unwrap()[1];
        let s = seed_len(6, 1);
        let mut sd = 0.0;
        for w in 0..1u64 << s {
            let e = Extractor::from_seed(6, 1, BitVector::from_index(w, s)).unwrap();
            let ones = (0..4).filter(|&r| e.apply(&code.encode(&BitVector::from_index(r, 2)).unwrap()).unwrap().get(0)).count();
            sd += (ones as f64 / 4.0 - 0.5).abs() / (1u64 << s) as f64;
        }
        assert!((t.report.sd - sd).abs() < 1e-12, "{} vs {sd}", t.report.sd);
    }

    #[test]
    fn distance_shrinks_with_output_length() {
        let strategy = vec![Povm::basis(0.3); 6];
        let mut prev = 0.0;
        for len in 1..=3 {
            let m = BitVector::from_index(0b101 >> (3 - len), len);
            let t = simulator_transcript(&m, &m, &params(8 * len), &strategy, 2).unwrap();
            assert!(t.report.sd >= prev - 1e-12, "len {len}");
            assert!(t.report.sd <= t.report.lhl_bound_tight + 1e-12);
            prev = t.report.sd;
        }
    }

    #[test]
    fn shape_checks() {
        let m = BitVector::from_bits(&[1]);
        assert!(simulator_transcript(&m, &m, &params(8), &vec![Povm::z_basis(); 5], 1).is_err());
        assert!(simulator_transcript(&BitVector::zeros(2), &m, &params(8), &vec![Povm::z_basis(); 6], 1).is_err());
        let big = ProtocolParams::new(16, 2, 8).unwrap();
        let m = BitVector::zeros(1);
        assert!(matches!(simulator_transcript(&m, &m, &big, &vec![Povm::z_basis(); 16], 1), Err(ProtocolError::Resource(_))));
    }
}
