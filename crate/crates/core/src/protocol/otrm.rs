//! One-time random memory: preparation and reading.

use serde::Serialize;

use crate::f2codes::{self, BitVector, LinearCode};
use crate::qrac::{self, BasisMeasurement, QubitState};
use crate::seed;

use super::{ProtocolError, ProtocolParams};

/// Sender's view of a prepared memory, secrets included.
#[derive(Debug, Clone, PartialEq)]
pub struct OtrmInstance {
    pub codes: [LinearCode; 2],
    /// `r_α ∈ {0,1}^k`.
    pub messages: [BitVector; 2],
    /// `c_α = G_α r_α`.
    pub codewords: [BitVector; 2],
    /// `qubits[i] = ℰ(c₀[i], c₁[i])`.
    pub qubits: Vec<QubitState>,
}

/// Public codes `(𝒞₀, 𝒞₁)` drawn from `code_seed`.
pub fn public_codes(n: usize, k: usize, code_seed: u64) -> Result<[LinearCode; 2], ProtocolError> {
    Ok([
        f2codes::random_code(n, k, seed::derive(code_seed, "code0"))?,
        f2codes::random_code(n, k, seed::derive(code_seed, "code1"))?,
    ])
}

/// Prepares a memory with uniformly random `r₀, r₁`. Codes come from
/// `params.code_seed` when set, otherwise fresh from `seed`.
pub fn otrm_prep(params: &ProtocolParams, seed: u64) -> Result<OtrmInstance, ProtocolError> {
    params.validate()?;
    let code_seed = params.code_seed.unwrap_or_else(|| seed::derive(seed, "otrm-codes"));
    let codes = public_codes(params.n, params.k, code_seed)?;
    let mut rng = seed::rng(seed::derive(seed, "otrm-messages"));
    let messages = [BitVector::random(params.k, &mut rng), BitVector::random(params.k, &mut rng)];
    otrm_prep_with(codes, messages)
}

/// Prepares a memory for given codes and messages.
pub fn otrm_prep_with(codes: [LinearCode; 2], messages: [BitVector; 2]) -> Result<OtrmInstance, ProtocolError> {
    if codes[0].n() != codes[1].n() {
        return Err(ProtocolError::BadParams(format!("code lengths {} and {} differ", codes[0].n(), codes[1].n())));
    }
    let codewords = [codes[0].encode(&messages[0])?, codes[1].encode(&messages[1])?];
    let qubits = (0..codes[0].n()).map(|i| qrac::qrac_encode(codewords[0].get(i), codewords[1].get(i))).collect();
    Ok(OtrmInstance { codes, messages, codewords, qubits })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtrmReadout {
    pub alpha: bool,
    /// Measured word, a noisy copy of `c_α`.
    pub received: BitVector,
    /// Nearest-codeword message for `received`.
    pub message: BitVector,
    /// Whether `message` equals the stored `r_α`.
    pub decode_ok: bool,
}

/// Measures every qubit in `μ^α` and decodes with `𝒞_α`.
pub fn otrm_read_detailed(inst: &OtrmInstance, alpha: bool, seed: u64) -> Result<OtrmReadout, ProtocolError> {
    let a = usize::from(alpha);
    let mut rng = seed::rng(seed::derive(seed, "otrm-read"));
    let mu = BasisMeasurement::qrac(alpha);
    let bits: Vec<bool> = inst.qubits.iter().map(|&q| qrac::sample_with(q, mu, &mut rng) == 1).collect();
    let received = BitVector::from_bools(&bits);
    let message = f2codes::ml_decode(&inst.codes[a], &received)?;
    let decode_ok = message == inst.messages[a];
    Ok(OtrmReadout { alpha, received, message, decode_ok })
}

/// `r_α`, or [`ProtocolError::DecodeFailure`] when decoding misses it.
pub fn otrm_read(inst: &OtrmInstance, alpha: bool, seed: u64) -> Result<BitVector, ProtocolError> {
    let r = otrm_read_detailed(inst, alpha, seed)?;
    if r.decode_ok {
        Ok(r.message)
    } else {
        Err(ProtocolError::DecodeFailure { alpha: u8::from(alpha) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2codes::F2Matrix;

    #[test]
    fn instance_shape_and_determinism() {
        let p = ProtocolParams::new(12, 4, 8).unwrap();
        let a = otrm_prep(&p, 5).unwrap();
        assert_eq!(a.qubits.len(), 12);
        for (i, q) in a.qubits.iter().enumerate() {
            assert_eq!(*q, qrac::qrac_encode(a.codewords[0].get(i), a.codewords[1].get(i)));
        }
        for s in 0..2 {
            assert_eq!(a.codes[s].encode(&a.messages[s]).unwrap(), a.codewords[s]);
        }
        assert_eq!(a, otrm_prep(&p, 5).unwrap());
        assert_ne!(a.messages, otrm_prep(&p, 6).unwrap().messages);
    }

    #[test]
    fn public_codes_are_shared() {
        let p = ProtocolParams::new(10, 3, 8).unwrap().with_code_seed(77);
        let (a, b) = (otrm_prep(&p, 1).unwrap(), otrm_prep(&p, 2).unwrap());
        assert_eq!(a.codes, b.codes);
        let q = ProtocolParams::new(10, 3, 8).unwrap();
        assert_ne!(otrm_prep(&q, 1).unwrap().codes, otrm_prep(&q, 2).unwrap().codes);
    }

    #[test]
    fn pair_marginals_are_uniform_on_nonzero_columns() {
        // Exhaustive over all message pairs at n=6, k=3.
        for code_seed in 0..20 {
            let codes = public_codes(6, 3, code_seed).unwrap();
            let mut counts = vec![[0u32; 4]; 6];
            for r0 in 0..8 {
                for r1 in 0..8 {
                    let inst = otrm_prep_with(codes.clone(), [BitVector::from_index(r0, 3), BitVector::from_index(r1, 3)]).unwrap();
                    for i in 0..6 {
                        counts[i][usize::from(inst.codewords[0].get(i)) * 2 + usize::from(inst.codewords[1].get(i))] += 1;
                    }
                }
            }
            let nonzero = |c: &LinearCode, i: usize| c.generator().row(i).weight() > 0;
            for (i, cnt) in counts.iter().enumerate() {
                let uniform = cnt.iter().all(|&c| c == 16);
                assert_eq!(uniform, nonzero(&codes[0], i) && nonzero(&codes[1], i), "seed {code_seed} coord {i}");
            }
        }
    }

    #[test]
    fn repetition_code_success_rate() {
        let rep = LinearCode::repetition(3).unwrap();
        let exact = f2codes::exact_failure_prob(&rep, 1.0 - qrac::success_probability()).unwrap();
        assert!((exact - 0.058_058_3).abs() < 2e-7);
        let trials = 20_000u64;
        let mut fails = [0u64; 2];
        for t in 0..trials {
            let m = [BitVector::from_index(t % 2, 1), BitVector::from_index((t / 2) % 2, 1)];
            let inst = otrm_prep_with([rep.clone(), rep.clone()], m).unwrap();
            for alpha in [false, true] {
                fails[usize::from(alpha)] += u64::from(!otrm_read_detailed(&inst, alpha, seed::derive_indexed(9, "t", t)).unwrap().decode_ok);
            }
        }
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        for f in fails {
            assert!((f as f64 / trials as f64 - exact).abs() < 3.0 * sigma, "{f}");
        }
    }

    #[test]
    fn read_reports_failure() {
        // Length-1 code: each read is a single channel use, so both outcomes occur.
        let g = F2Matrix::from_rows(vec![BitVector::from_bits(&[1])]).unwrap();
        let code = LinearCode::from_generator(g).unwrap();
        let inst = otrm_prep_with([code.clone(), code], [BitVector::from_bits(&[1]), BitVector::from_bits(&[0])]).unwrap();
        let mut saw = [false; 2];
        for s in 0..200 {
            match otrm_read(&inst, false, s) {
                Ok(m) => {
                    assert_eq!(m, inst.messages[0]);
                    saw[0] = true;
                }
                Err(ProtocolError::DecodeFailure { alpha: 0 }) => saw[1] = true,
                Err(e) => panic!("{e}"),
            }
        }
        assert_eq!(saw, [true, true]);
    }
}
