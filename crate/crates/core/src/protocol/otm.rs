//! One-time memory: messages masked by hashes of the stored codewords.

use serde::Serialize;

use crate::f2codes::BitVector;
use crate::seed;

use super::extractor::{random_extractor, Extractor};
use super::otrm::{otrm_prep, otrm_read_detailed, OtrmInstance, OtrmReadout};
use super::{ProtocolError, ProtocolParams};

#[derive(Debug, Clone, PartialEq)]
pub struct OtmPackage {
    pub instance: OtrmInstance,
    /// `ct_α = m_α ⊕ Ext_α(c_α)`.
    pub ct: [BitVector; 2],
    /// Public extractors `Ext_α = Ext(ω_α, ·)`.
    pub ext: [Extractor; 2],
}

/// Prepares a memory and masks `m₀, m₁` (each `λ/8` bits).
pub fn otm_prep(m0: &BitVector, m1: &BitVector, params: &ProtocolParams, seed: u64) -> Result<OtmPackage, ProtocolError> {
    let len = params.msg_len();
    for (i, m) in [m0, m1].into_iter().enumerate() {
        if m.len() != len {
            return Err(ProtocolError::BadLength(format!("message {i} has {} bits, expected λ/8 = {len}", m.len())));
        }
    }
    let instance = otrm_prep(params, seed)?;
    let mut rng = seed::rng(seed::derive(seed, "otm-extractors"));
    let ext = [random_extractor(params.n, len, &mut rng)?, random_extractor(params.n, len, &mut rng)?];
    otm_package(instance, ext, [m0.clone(), m1.clone()])
}

pub(crate) fn otm_package(instance: OtrmInstance, ext: [Extractor; 2], m: [BitVector; 2]) -> Result<OtmPackage, ProtocolError> {
    let ct = [m[0].xor(&ext[0].apply(&instance.codewords[0])?), m[1].xor(&ext[1].apply(&instance.codewords[1])?)];
    Ok(OtmPackage { instance, ct, ext })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtmReadout {
    pub inner: OtrmReadout,
    /// `ct_α ⊕ Ext_α(G_α r̂_α)` for the decoded `r̂_α`.
    pub message: BitVector,
}

/// Reads string `α`, re-encodes the decoded message, hashes and unmasks.
pub fn otm_read_detailed(pkg: &OtmPackage, alpha: bool, seed: u64) -> Result<OtmReadout, ProtocolError> {
    let a = usize::from(alpha);
    let inner = otrm_read_detailed(&pkg.instance, alpha, seed)?;
    let codeword = pkg.instance.codes[a].encode(&inner.message)?;
    let message = pkg.ct[a].xor(&pkg.ext[a].apply(&codeword)?);
    Ok(OtmReadout { inner, message })
}

/// `m_α`, or [`ProtocolError::DecodeFailure`] when the inner decode fails.
pub fn otm_read(pkg: &OtmPackage, alpha: bool, seed: u64) -> Result<BitVector, ProtocolError> {
    let r = otm_read_detailed(pkg, alpha, seed)?;
    if r.inner.decode_ok {
        Ok(r.message)
    } else {
        Err(ProtocolError::DecodeFailure { alpha: u8::from(alpha) })
    }
}
