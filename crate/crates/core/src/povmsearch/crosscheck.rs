//! Independent checks on the grid search: a random search over rank-one
//! POVMs, and a numerical test of the convexity fact behind the corner bound.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::Sym2;
use crate::seed;

use super::corner::QuantityValues;
use super::{analytic_seeds, Objective, Povm, Quantity};

const CHUNK: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckResult {
    /// Best value found for each quantity; a lower bound on its supremum.
    pub best: QuantityValues,
    pub argmax_greater: Povm,
    pub argmax_total: Povm,
    pub argmax_conditional: Povm,
    pub samples: u64,
}

/// `⟨v|R⁻¹|v⟩` for `v = (cos φ, sin φ)`.
fn inverse_quadratic(r: Sym2, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (r.c * c * c - 2.0 * r.b * c * s + r.a * s * s) / r.det()
}

/// Random POVM with `k ∈ {2,3,4}` rank-one elements `w_i |φ_i⟩⟨φ_i|`.
///
/// The first `k − 2` weights are drawn below the largest weight keeping the
/// residual PSD. The last two are then forced: `w = 1/⟨φ|R⁻¹|φ⟩` leaves a
/// rank-one remainder, which becomes the final element.
pub fn random_rank_one_povm<R: Rng + ?Sized>(rng: &mut R) -> Povm {
    let k = rng.gen_range(2..=4);
    if k == 2 {
        return Povm::basis(rng.gen::<f64>() * PI);
    }
    let mut residual = Sym2::IDENTITY;
    let mut els = Vec::with_capacity(k);
    for _ in 0..k - 2 {
        let phi = rng.gen::<f64>() * PI;
        let w_max = 1.0 / inverse_quadratic(residual, phi);
        let m = Sym2::projector(phi).scale(rng.gen::<f64>() * w_max);
        residual = residual - m;
        els.push(m);
    }
    let phi = rng.gen::<f64>() * PI;
    if residual.det() <= 1e-14 {
        els.push(residual);
    } else {
        let m = Sym2::projector(phi).scale(1.0 / inverse_quadratic(residual, phi));
        els.push(m);
        els.push(residual - m);
    }
    Povm::new_unchecked(els)
}

/// Random search over rank-one POVMs, started from the analytic seeds.
pub fn rank_one_crosscheck(samples: u64, seed: u64) -> CrosscheckResult {
    let objs = Quantity::ALL.map(Objective::new);
    let score = |p: &Povm| objs.each_ref().map(|o| o.eval(p));
    let init: Vec<([f64; 3], Povm)> = analytic_seeds().into_iter().map(|(_, p)| (score(&p), p)).collect();
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<[(f64, Option<Povm>); 3]> = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut rng = seed::rng(seed::derive_indexed(seed, "rank-one-crosscheck", ch));
            let mut best: [(f64, Option<Povm>); 3] = [(f64::NEG_INFINITY, None), (f64::NEG_INFINITY, None), (f64::NEG_INFINITY, None)];
            for _ in 0..CHUNK.min(samples - ch * CHUNK) {
                let p = random_rank_one_povm(&mut rng);
                let v = score(&p);
                for q in 0..3 {
                    if v[q] > best[q].0 {
                        best[q] = (v[q], Some(p.clone()));
                    }
                }
            }
            best
        })
        .collect();
    let mut best: [(f64, Povm); 3] = std::array::from_fn(|q| {
        init.iter().map(|(v, p)| (v[q], p.clone())).fold((f64::NEG_INFINITY, Povm::identity()), |a, b| if b.0 > a.0 { b } else { a })
    });
    for chunk in per_chunk {
        for (q, (v, p)) in chunk.into_iter().enumerate() {
            if let Some(p) = p {
                if v > best[q].0 {
                    best[q] = (v, p);
                }
            }
        }
    }
    let [g, t, c] = best;
    CrosscheckResult {
        best: QuantityValues { greater: g.0, total: t.0, conditional: c.0 },
        argmax_greater: g.1,
        argmax_total: t.1,
        argmax_conditional: c.1,
        samples,
    }
}

/// `f(Δ) = Tr[(M+Δ)ρ]² / Tr[M+Δ]`.
pub fn convexity_function(m: Sym2, rho: Sym2, delta: Sym2) -> f64 {
    let md = m + delta;
    md.trace_product(rho).powi(2) / md.trace()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub trials: u64,
    pub violations: u64,
    /// Largest `f(λΔ₁+(1−λ)Δ₂) − λf(Δ₁) − (1−λ)f(Δ₂)` observed.
    pub max_gap: f64,
}

fn random_psd<R: Rng + ?Sized>(rng: &mut R) -> Sym2 {
    let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    // A·Aᵀ for A = [[x0, x1], [x2, x3]].
    Sym2::new(x[0] * x[0] + x[1] * x[1], x[0] * x[2] + x[1] * x[3], x[2] * x[2] + x[3] * x[3])
}

fn random_density<R: Rng + ?Sized>(rng: &mut R) -> Sym2 {
    let t: f64 = rng.gen();
    Sym2::projector(rng.gen::<f64>() * PI).scale(t) + Sym2::IDENTITY.scale(0.5 * (1.0 - t))
}

fn random_delta<R: Rng + ?Sized>(rng: &mut R, m: Sym2) -> Sym2 {
    loop {
        let s: f64 = rng.gen_range(0.01..1.0);
        let d = Sym2::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s));
        let md = m + d;
        if md.is_psd(0.0) && md.trace() > 1e-9 {
            return d;
        }
    }
}

/// Checks `f(λΔ₁+(1−λ)Δ₂) ≤ λf(Δ₁)+(1−λ)f(Δ₂) + 1e-10` on random instances.
pub fn verify_convexity_fact(trials: u64, seed: u64) -> ConvexityReport {
    let chunks = trials.div_ceil(CHUNK);
    let (violations, max_gap) = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut rng = seed::rng(seed::derive_indexed(seed, "convexity", ch));
            let mut v = 0u64;
            let mut gap = f64::NEG_INFINITY;
            for _ in 0..CHUNK.min(trials - ch * CHUNK) {
                let m = random_psd(&mut rng);
                let rho = random_density(&mut rng);
                let d1 = random_delta(&mut rng, m);
                let d2 = random_delta(&mut rng, m);
                let lam: f64 = rng.gen();
                let mid = d1.scale(lam) + d2.scale(1.0 - lam);
                let g = convexity_function(m, rho, mid)
                    - lam * convexity_function(m, rho, d1)
                    - (1.0 - lam) * convexity_function(m, rho, d2);
                if g > 1e-10 {
                    v += 1;
                }
                gap = gap.max(g);
            }
            (v, gap)
        })
        .reduce(|| (0, f64::NEG_INFINITY), |a, b| (a.0 + b.0, a.1.max(b.1)));
    ConvexityReport { trials, violations, max_gap }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povmsearch::eval_povm_info;

    #[test]
    fn random_rank_one_povms_are_valid() {
        let mut rng = seed::rng(8);
        for _ in 0..2000 {
            let p = random_rank_one_povm(&mut rng);
            Povm::new(p.elements().to_vec()).unwrap();
            for m in p.elements() {
                assert!(m.det().abs() < 1e-9, "{m:?}");
            }
        }
    }

    #[test]
    fn crosscheck_contains_seeds() {
        let r = rank_one_crosscheck(100, 1);
        assert!(r.best.greater >= 1.5f64.log2() - 1e-12);
        assert!(r.best.total >= 2.0 * 1.25f64.log2() - 1e-12);
        let info = eval_povm_info(&r.argmax_total).unwrap();
        assert!((info.total() - r.best.total).abs() < 1e-12);
    }

    #[test]
    fn crosscheck_is_reproducible() {
        assert_eq!(rank_one_crosscheck(3000, 5), rank_one_crosscheck(3000, 5));
    }

    #[test]
    fn convexity_equal_deltas() {
        let m = Sym2::new(0.4, 0.1, 0.3);
        let rho = Sym2::projector(0.2);
        let d = Sym2::new(0.05, -0.02, 0.01);
        let f = convexity_function(m, rho, d);
        let mid = d.scale(0.3) + d.scale(0.7);
        assert!((convexity_function(m, rho, mid) - f).abs() < 1e-15);
    }

    #[test]
    fn convexity_closed_form_for_identity() {
        let rho = Sym2::IDENTITY.scale(0.5);
        for t in [-0.5, 0.0, 0.3, 1.2] {
            let d = Sym2::new(t * 0.6, 0.2, t * 0.4);
            let tr = d.trace();
            let closed = (1.0 + tr / 2.0).powi(2) / (2.0 + tr);
            assert!((convexity_function(Sym2::IDENTITY, rho, d) - closed).abs() < 1e-14);
        }
    }

    #[test]
    fn convexity_holds_on_random_trials() {
        let r = verify_convexity_fact(20_000, 3);
        assert_eq!(r.violations, 0, "max gap {}", r.max_gap);
    }
}
