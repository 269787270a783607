//! Toeplitz hashing over F₂.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::f2codes::BitVector;
use crate::seed;

use super::ProtocolError;

/// `Ext(ω, x) = T_ω x` with `T_ω[i][j] = ω[i − j + input_len − 1]`.
///
/// The seed has `input_len + output_len − 1` bits. Over a uniform seed the
/// family is 2-universal: distinct inputs collide with probability exactly
/// `2^−output_len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extractor {
    input_len: usize,
    output_len: usize,
    seed: BitVector,
}

impl Extractor {
    pub fn from_seed(input_len: usize, output_len: usize, seed: BitVector) -> Result<Self, ProtocolError> {
        if output_len > input_len {
            return Err(ProtocolError::BadLength(format!("extractor output {output_len} exceeds input {input_len}")));
        }
        let want = seed_len(input_len, output_len);
        if seed.len() != want {
            return Err(ProtocolError::BadLength(format!("Toeplitz seed has {} bits, expected {want}", seed.len())));
        }
        Ok(Extractor { input_len, output_len, seed })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn seed(&self) -> &BitVector {
        &self.seed
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.seed.get(i + self.input_len - 1 - j)
    }

    pub fn apply(&self, x: &BitVector) -> Result<BitVector, ProtocolError> {
        if x.len() != self.input_len {
            return Err(ProtocolError::BadLength(format!("extractor input has {} bits, expected {}", x.len(), self.input_len)));
        }
        let mut out = BitVector::zeros(self.output_len);
        for i in 0..self.output_len {
            let mut acc = false;
            for j in 0..self.input_len {
                acc ^= self.entry(i, j) & x.get(j);
            }
            out.set(i, acc);
        }
        Ok(out)
    }
}

/// `input_len + output_len − 1`, or 0 for an empty output.
pub fn seed_len(input_len: usize, output_len: usize) -> usize {
    if output_len == 0 {
        0
    } else {
        input_len + output_len - 1
    }
}

/// Toeplitz extractor with a uniformly random seed derived from `seed`.
pub fn make_extractor(input_len: usize, output_len: usize, seed: u64) -> Result<Extractor, ProtocolError> {
    let bits = BitVector::random(seed_len(input_len, output_len), &mut seed::rng(seed));
    Extractor::from_seed(input_len, output_len, bits)
}

pub(crate) fn random_extractor<R: Rng + ?Sized>(input_len: usize, output_len: usize, rng: &mut R) -> Result<Extractor, ProtocolError> {
    Extractor::from_seed(input_len, output_len, BitVector::random(seed_len(input_len, output_len), rng))
}
