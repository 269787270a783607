//! The 2↦1 quantum random access code on a single real qubit.
//!
//! Two bits `(b₀, b₁)` are encoded into `ψ_θ = cos θ|0⟩ + sin θ|1⟩`; bit
//! `b_α` is read by measuring in basis `μ^α`, where `μ⁰` is the Z basis
//! (`θ = 0`) and `μ¹` the basis at `θ = π/4`. Outcome 0 is the projector
//! onto `ψ_θ`, outcome 1 the projector onto `ψ_{θ+π/2}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::collinfo::{DistError, JointDistribution, Variable};
use crate::linalg::Sym2;
use crate::seed;

/// Largest number of qubits for which a full product outcome table is built.
pub const MAX_PRODUCT_QUBITS: usize = 20;

/// Success probability of every decoding, `cos²(π/8)`.
pub fn success_probability() -> f64 {
    FRAC_PI_8.cos().powi(2)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QracError {
    #[error("{states} states but {measurements} measurements")]
    LengthMismatch { states: usize, measurements: usize },
    #[error("outcome table for {0} qubits exceeds the limit of {MAX_PRODUCT_QUBITS}")]
    TooManyQubits(usize),
    #[error("density matrix invalid: {0}")]
    InvalidDensity(String),
    #[error(transparent)]
    Distribution(#[from] DistError),
}

/// Real pure state `ψ_θ`; `θ` and `θ + π` describe the same state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub theta: f64,
}

impl QubitState {
    pub fn new(theta: f64) -> Self {
        QubitState { theta }
    }

    pub fn density_matrix(self) -> DensityMatrix {
        DensityMatrix(Sym2::projector(self.theta))
    }

    /// Whether two states agree up to global sign, at tolerance 1e-12.
    pub fn same_state(self, other: QubitState) -> bool {
        let d = (self.theta - other.theta).rem_euclid(std::f64::consts::PI);
        d < 1e-12 || std::f64::consts::PI - d < 1e-12
    }
}

/// Real symmetric, PSD, unit-trace 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix(Sym2);

impl DensityMatrix {
    pub fn new(m: Sym2) -> Result<Self, QracError> {
        if (m.trace() - 1.0).abs() > 1e-12 {
            return Err(QracError::InvalidDensity(format!("trace {}", m.trace())));
        }
        if !m.is_psd(1e-12) {
            return Err(QracError::InvalidDensity(format!("min eigenvalue {}", m.min_eigenvalue())));
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Sym2::IDENTITY.scale(0.5))
    }

    pub fn matrix(self) -> Sym2 {
        self.0
    }

    pub fn mix(self, other: DensityMatrix, w: f64) -> DensityMatrix {
        DensityMatrix(self.0.scale(1.0 - w) + other.0.scale(w))
    }
}

/// Two-outcome projective measurement in the basis `{ψ_θ, ψ_{θ+π/2}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisMeasurement {
    pub theta: f64,
}

impl BasisMeasurement {
    pub fn new(theta: f64) -> Self {
        BasisMeasurement { theta }
    }

    /// `μ^α`: the Z basis for `α = 0`, the `π/4` basis for `α = 1`.
    pub fn qrac(alpha: bool) -> Self {
        BasisMeasurement { theta: if alpha { FRAC_PI_4 } else { 0.0 } }
    }

    pub fn projectors(self) -> [Sym2; 2] {
        [Sym2::projector(self.theta), Sym2::projector(self.theta + FRAC_PI_2)]
    }
}

/// Encodes `(b₀, b₁)` as `ψ_θ` with θ ∈ {π/8, −π/8, 3π/8, 5π/8}.
pub fn qrac_encode(b0: bool, b1: bool) -> QubitState {
    let theta = match (b0, b1) {
        (false, false) => FRAC_PI_8,
        (false, true) => -FRAC_PI_8,
        (true, false) => 3.0 * FRAC_PI_8,
        (true, true) => 5.0 * FRAC_PI_8,
    };
    QubitState { theta }
}

/// Born-rule outcome probabilities `(cos²Δ, sin²Δ)` with `Δ = θ_state − θ_basis`.
pub fn measure_prob(state: QubitState, meas: BasisMeasurement) -> [f64; 2] {
    let (s, c) = (state.theta - meas.theta).sin_cos();
    [c * c, s * s]
}

/// Outcome probabilities of a mixed state.
pub fn measure_prob_density(rho: DensityMatrix, meas: BasisMeasurement) -> [f64; 2] {
    let [p0, p1] = meas.projectors();
    [p0.trace_product(rho.0), p1.trace_product(rho.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessEntry {
    pub b0: bool,
    pub b1: bool,
    pub alpha: bool,
    pub probability: f64,
}

/// Probability that `μ^α` on `ℰ(b₀, b₁)` returns `b_α`, for all eight cases.
pub fn qrac_success_table() -> Vec<SuccessEntry> {
    let mut out = Vec::with_capacity(8);
    for b0 in [false, true] {
        for b1 in [false, true] {
            for alpha in [false, true] {
                let p = measure_prob(qrac_encode(b0, b1), BasisMeasurement::qrac(alpha));
                let target = if alpha { b1 } else { b0 };
                out.push(SuccessEntry { b0, b1, alpha, probability: p[target as usize] });
            }
        }
    }
    out
}

/// Exact joint distribution of the outcomes `o0, …, o{m−1}` when qubit `i`
/// holds `ℰ(pairs[i])` and is measured with `measurements[i]`.
pub fn product_outcome_distribution(
    pairs: &[(bool, bool)],
    measurements: &[BasisMeasurement],
) -> Result<JointDistribution, QracError> {
    if pairs.len() != measurements.len() {
        return Err(QracError::LengthMismatch { states: pairs.len(), measurements: measurements.len() });
    }
    let m = pairs.len();
    if m > MAX_PRODUCT_QUBITS {
        return Err(QracError::TooManyQubits(m));
    }
    let marginals: Vec<[f64; 2]> =
        pairs.iter().zip(measurements).map(|(&(b0, b1), &mu)| measure_prob(qrac_encode(b0, b1), mu)).collect();
    let vars = (0..m).map(|i| Variable::new(format!("o{i}"), 2)).collect();
    Ok(JointDistribution::from_fn(vars, |idx| idx.iter().zip(&marginals).map(|(&o, p)| p[o]).product())?)
}

/// One Born-rule sample; returns the outcome index.
pub fn sample_measurement(state: QubitState, meas: BasisMeasurement, seed: u64) -> u8 {
    sample_with(state, meas, &mut seed::rng(seed))
}

pub fn sample_with<R: Rng + ?Sized>(state: QubitState, meas: BasisMeasurement, rng: &mut R) -> u8 {
    let p1 = measure_prob(state, meas)[1].clamp(0.0, 1.0);
    u8::from(rng.gen_bool(p1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const COS2: f64 = 0.853_553_390_593_273_7;

    #[test]
    fn encode_table() {
        assert_eq!(qrac_encode(false, false).theta, PI / 8.0);
        assert_eq!(qrac_encode(false, true).theta, -PI / 8.0);
        assert!(qrac_encode(true, false).same_state(QubitState::new(-5.0 * PI / 8.0)));
        assert!(qrac_encode(true, true).same_state(QubitState::new(-3.0 * PI / 8.0)));
    }

    #[test]
    fn success_table_all_equal() {
        let t = qrac_success_table();
        assert_eq!(t.len(), 8);
        for e in &t {
            assert!((e.probability - COS2).abs() < 1e-12, "{e:?}");
        }
        let mean = t.iter().map(|e| e.probability).sum::<f64>() / 8.0;
        assert!((mean - 0.8535533906).abs() < 1e-10);
    }

    #[test]
    fn measure_prob_examples() {
        assert_eq!(measure_prob(QubitState::new(0.0), BasisMeasurement::new(0.0)), [1.0, 0.0]);
        let p = measure_prob(QubitState::new(PI / 8.0), BasisMeasurement::qrac(false));
        assert!((p[0] - 0.853553).abs() < 1e-6 && (p[1] - 0.146447).abs() < 1e-6);
        let p = measure_prob(QubitState::new(3.0 * PI / 8.0), BasisMeasurement::qrac(true));
        assert!((p[0] - COS2).abs() < 1e-12);
    }

    #[test]
    fn density_route_agrees_with_angle_route() {
        for i in 0..20 {
            let s = QubitState::new(i as f64 * 0.37);
            let m = BasisMeasurement::new(i as f64 * -0.21);
            let a = measure_prob(s, m);
            let b = measure_prob_density(s.density_matrix(), m);
            assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn four_states_average_to_maximally_mixed() {
        let avg: Sym2 = [(false, false), (false, true), (true, false), (true, true)]
            .iter()
            .map(|&(a, b)| qrac_encode(a, b).density_matrix().matrix().scale(0.25))
            .sum();
        assert!(avg.max_abs_diff(Sym2::IDENTITY.scale(0.5)) < 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(Sym2::new(0.5, 0.0, 0.5)).is_ok());
        assert!(DensityMatrix::new(Sym2::new(0.5, 0.6, 0.5)).is_err());
        assert!(DensityMatrix::new(Sym2::new(0.6, 0.0, 0.5)).is_err());
    }

    #[test]
    fn product_distribution_examples() {
        let d = product_outcome_distribution(&[(false, false)], &[BasisMeasurement::qrac(false)]).unwrap();
        assert!((d.probs()[0] - 0.853553).abs() < 1e-6);
        let pairs = [(false, true), (true, true)];
        let meas = [BasisMeasurement::qrac(true), BasisMeasurement::new(0.3)];
        let d = product_outcome_distribution(&pairs, &meas).unwrap();
        let m0 = d.marginal(&["o0"]).unwrap();
        let m1 = d.marginal(&["o1"]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((d.get(&[i, j]) - m0.get(&[i]) * m1.get(&[j])).abs() < 1e-15);
            }
        }
        assert!(matches!(
            product_outcome_distribution(&pairs, &meas[..1]),
            Err(QracError::LengthMismatch { .. })
        ));
        let big = vec![(false, false); 21];
        let bm = vec![BasisMeasurement::qrac(false); 21];
        assert!(matches!(product_outcome_distribution(&big, &bm), Err(QracError::TooManyQubits(21))));
    }

    #[test]
    fn uniform_pairs_give_uniform_z_outcomes() {
        let meas = [BasisMeasurement::qrac(false); 3];
        let mut acc = vec![0.0; 8];
        for u in 0..64u32 {
            let pairs: Vec<(bool, bool)> = (0..3).map(|i| ((u >> (2 * i)) & 1 == 1, (u >> (2 * i + 1)) & 1 == 1)).collect();
            let d = product_outcome_distribution(&pairs, &meas).unwrap();
            for (a, p) in acc.iter_mut().zip(d.probs()) {
                *a += p / 64.0;
            }
        }
        for a in acc {
            assert!((a - 0.125).abs() < 1e-14);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_calibrated() {
        let s = QubitState::new(PI / 8.0);
        let z = BasisMeasurement::qrac(false);
        assert_eq!(sample_measurement(QubitState::new(0.0), z, 1), 0);
        assert_eq!(sample_measurement(QubitState::new(PI / 2.0), z, 1), 1);
        let mut rng = seed::rng(12);
        let n = 1_000_000;
        let zeros = (0..n).filter(|_| sample_with(s, z, &mut rng) == 0).count();
        let freq = zeros as f64 / n as f64;
        let sigma = (COS2 * (1.0 - COS2) / n as f64).sqrt();
        assert!((freq - COS2).abs() < 3.0 * sigma, "freq {freq}");
        let a: Vec<u8> = (0..10).map(|i| sample_measurement(s, z, i)).collect();
        let b: Vec<u8> = (0..10).map(|i| sample_measurement(s, z, i)).collect();
        assert_eq!(a, b);
    }
}
