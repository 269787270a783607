//! One-time random memories and one-time memories built from the QRAC.
//!
//! A one-time random memory holds two random codewords `c_α = G_α r_α`, one
//! QRAC qubit per coordinate pair. Reading string `α` measures every qubit in
//! `μ^α`, which acts as a BSC with crossover `sin²(π/8)`, and decodes with
//! `𝒞_α`. The one-time memory masks each message with a Toeplitz hash of
//! its codeword: `ct_α = m_α ⊕ Ext_α(c_α)`.
//!
//! Everything here is a simulator: instances keep their secrets so tests can
//! compare what a reader recovers against the truth.

pub mod extractor;
pub mod leakage;
pub mod otm;
pub mod otrm;
pub mod simulator;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collinfo::DistError;
use crate::f2codes::CodeError;
use crate::lightcone::{build_partition, GridSpec, LightconeError};
use crate::povmsearch::PovmError;

pub use extractor::{make_extractor, Extractor};
pub use leakage::{leakage_experiment, leakage_sweep, LeakageReport, PAIR_BOUNDS};
pub use otm::{otm_prep, otm_read, otm_read_detailed, OtmPackage, OtmReadout};
pub use otrm::{otrm_prep, otrm_read, otrm_read_detailed, OtrmInstance, OtrmReadout};
pub use simulator::{simulator_transcript, SimulatorReport, Transcript};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("length mismatch: {0}")]
    BadLength(String),
    #[error("decoding string {alpha} failed")]
    DecodeFailure { alpha: u8 },
    #[error("enumeration too large: {0}")]
    Resource(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Distribution(#[from] DistError),
    #[error(transparent)]
    Povm(#[from] PovmError),
    #[error(transparent)]
    Geometry(#[from] LightconeError),
}

/// Grid placement of the `n` qubits with inner radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dim: u32,
    pub side: u64,
    pub ell: u64,
    pub depth: u32,
    pub r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: usize,
    pub k: usize,
    /// Security parameter; messages have `λ/8` bits.
    pub lambda: usize,
    pub eps1: f64,
    pub eps2: f64,
    /// Seed of the public codes. Without it every instance draws fresh codes.
    pub code_seed: Option<u64>,
    pub geometry: Option<Geometry>,
}

impl ProtocolParams {
    pub fn new(n: usize, k: usize, lambda: usize) -> Result<Self, ProtocolError> {
        let p = ProtocolParams { n, k, lambda, eps1: 2f64.powi(-20), eps2: 2f64.powi(-20), code_seed: None, geometry: None };
        p.validate()?;
        Ok(p)
    }

    /// `k = R·n`, which must be an integer.
    pub fn from_rate(n: usize, rate: f64, lambda: usize) -> Result<Self, ProtocolError> {
        let k = rate * n as f64;
        if !k.is_finite() || (k - k.round()).abs() > 1e-9 {
            return Err(ProtocolError::BadParams(format!("R·n = {rate}·{n} is not an integer")));
        }
        Self::new(n, k.round() as usize, lambda)
    }

    pub fn with_code_seed(mut self, seed: u64) -> Self {
        self.code_seed = Some(seed);
        self
    }

    pub fn msg_len(&self) -> usize {
        self.lambda / 8
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n == 0 || self.k == 0 || self.k > self.n {
            return Err(ProtocolError::BadParams(format!("need 1 ≤ k ≤ n, got n={}, k={}", self.n, self.k)));
        }
        if self.lambda % 8 != 0 {
            return Err(ProtocolError::BadParams(format!("λ = {} is not a multiple of 8", self.lambda)));
        }
        if self.msg_len() > self.n {
            return Err(ProtocolError::BadParams(format!("message length {} exceeds n = {}", self.msg_len(), self.n)));
        }
        for (name, e) in [("ε′", self.eps1), ("ε″", self.eps2)] {
            if !(e > 0.0 && e < 1.0) {
                return Err(ProtocolError::BadParams(format!("{name} = {e} must lie in (0, 1)")));
            }
        }
        if let Some(g) = self.geometry {
            let grid = GridSpec::new(g.dim, g.side, g.ell, g.depth)?;
            if grid.n() != self.n as u64 {
                return Err(ProtocolError::BadParams(format!("grid holds {} qubits, n = {}", grid.n(), self.n)));
            }
            build_partition(&grid, g.r)?;
        }
        Ok(())
    }
}
