//! Trace-optimal linear majorants of the per-element terms.
//!
//! Each bound-side term `h` is convex and positively homogeneous on the PSD
//! cone, so `h(M) ≤ Tr[MX]` for every PSD `M` as soon as it holds on rank-one
//! projectors `|u⟩⟨u|`. Summed over a POVM this gives `Σ h(M_i) ≤ Tr X`. With
//! `⟨u_θ|X|u_θ⟩ = t + x cos 2θ + y sin 2θ`, the smallest admissible `t` for a
//! given `(x, y)` is `max_θ [h(θ) − x cos 2θ − y sin 2θ]`, a convex function
//! of `(x, y)`. It is minimized over dense samples of `θ` as a three-variable
//! LP, and the final `t` is certified by a second-derivative margin.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::linalg::Sym2;

use super::{Group, Objective, Quantity};

/// Samples on which the majorant is optimized and then certified.
const SAMPLES: usize = 1 << 21;
/// Evenly spaced samples seeding the cutting-plane working set.
const SEED_CUTS: usize = 64;
const MAX_CUTS: usize = 400;

/// Equality `α·(t, x, y) = rhs`.
type Plane = [f64; 4];

fn solve3(p: [Plane; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = p.map(|r| [r[0], r[1], r[2]]);
    let d = det(a);
    if d.abs() < 1e-12 {
        return None;
    }
    Some(std::array::from_fn(|j| {
        let mut m = a;
        for i in 0..3 {
            m[i][j] = p[i][3];
        }
        det(m) / d
    }))
}

/// `min t` subject to `t + c x + s y ≥ v` for every cut and `|x|, |y| ≤ b`, by
/// vertex enumeration. Ties go to the smallest `x² + y²`.
fn small_lp(cuts: &[Plane], b: f64) -> [f64; 3] {
    let mut planes: Vec<Plane> = cuts.to_vec();
    planes.extend([[0.0, 1.0, 0.0, b], [0.0, 1.0, 0.0, -b], [0.0, 0.0, 1.0, b], [0.0, 0.0, 1.0, -b]]);
    let tol = 1e-13 * (1.0 + b);
    let feasible = |p: [f64; 3]| {
        p[1].abs() <= b + tol && p[2].abs() <= b + tol && cuts.iter().all(|c| p[0] + c[1] * p[1] + c[2] * p[2] >= c[3] - tol)
    };
    let mut best: Option<[f64; 3]> = None;
    let n = planes.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let Some(p) = solve3([planes[i], planes[j], planes[k]]) else { continue };
                if !feasible(p) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(q) => p[0] < q[0] - tol || (p[0] <= q[0] + tol && p[1].hypot(p[2]) < q[1].hypot(q[2])),
                };
                if better {
                    best = Some(p);
                }
            }
        }
    }
    best.expect("box-bounded LP has a vertex")
}

/// `α + ρ cos(2θ − ψ)` form of `θ ↦ ⟨u_θ|A|u_θ⟩`: returns `(|α| + ρ, ρ)`.
fn trig_size(a: Sym2) -> (f64, f64) {
    let rho = (0.25 * (a.a - a.c).powi(2) + a.b * a.b).sqrt();
    (0.5 * (a.a + a.c).abs() + rho, rho)
}

/// Upper bound on `|d²/dθ² Σ_j ⟨u|N_j|u⟩² / ⟨u|D|u⟩|` over all `θ`.
fn second_derivative_bound(g: &Group) -> f64 {
    let (dmin, _) = g.d.eigenvalues();
    let (_, rd) = trig_size(g.d);
    let (d1, d2) = (2.0 * rd, 4.0 * rd);
    g.ns
        .iter()
        .map(|&n| {
            let (n0, rn) = trig_size(n);
            let (n1, n2) = (2.0 * rn, 4.0 * rn);
            2.0 * n1 * n1 / dmin + 2.0 * n0 * n2 / dmin + 4.0 * n0 * n1 * d1 / dmin.powi(2) + n0 * n0 * d2 / dmin.powi(2)
                + 2.0 * n0 * n0 * d1 * d1 / dmin.powi(3)
        })
        .sum()
}

fn compute(obj: &Objective) -> [Sym2; 2] {
    let h = |theta: f64| obj.bound_terms(obj.element_terms(Sym2::projector(theta)));
    let curv = obj.bound_terms([
        obj.comps[0].iter().map(second_derivative_bound).sum(),
        obj.comps[1].iter().map(second_derivative_bound).sum(),
    ]);
    let fine: Vec<[f64; 2]> = (0..SAMPLES).map(|k| h(PI * k as f64 / SAMPLES as f64)).collect();
    let angles: Vec<(f64, f64)> = (0..SAMPLES).map(|k| (2.0 * PI * k as f64 / SAMPLES as f64).sin_cos()).collect();
    [0, 1].map(|s| {
        let scale = fine.iter().map(|v| v[s].abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Sym2::ZERO;
        }
        let cut = |k: usize| {
            let (sn, c) = angles[k];
            [1.0, c, sn, fine[k][s]]
        };
        let phi = |k: usize, x: f64, y: f64| {
            let (sn, c) = angles[k];
            fine[k][s] - x * c - y * sn
        };
        let argmax = |x: f64, y: f64| {
            (0..SAMPLES).map(|k| (phi(k, x, y), k)).fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
        };
        // Cutting planes: the LP over all samples is solved on a working set
        // grown by the most violated sample until none is violated.
        let mut cuts: Vec<Plane> = (0..SEED_CUTS).map(|i| cut(i * SAMPLES / SEED_CUTS)).collect();
        let b = 4.0 * scale;
        let (mut x, mut y) = (0.0, 0.0);
        for _ in 0..MAX_CUTS {
            let [t, px, py] = small_lp(&cuts, b);
            (x, y) = (px, py);
            let (top, k) = argmax(x, y);
            if top <= t + 1e-15 * scale {
                break;
            }
            cuts.push(cut(k));
        }
        // Certified t: the sampled maximum of φ = h − x cos 2θ − y sin 2θ plus
        // ½·max|φ''|·(half spacing)², since φ' vanishes at its maximum.
        let (t_sampled, _) = argmax(x, y);
        let half = 0.5 * PI / SAMPLES as f64;
        let m2 = curv[s] + 4.0 * x.hypot(y);
        // Rounding in the samples themselves is covered by a relative slack.
        let t = t_sampled + 0.5 * m2 * half * half + 1e-15 * scale;
        Sym2::new(t + x, y, t - x)
    })
}

/// Cached majorants `X_s` for a quantity.
pub(crate) fn dual_majorants(obj: &Objective) -> [Sym2; 2] {
    static CACHE: [OnceLock<[Sym2; 2]>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = match obj.quantity {
        Quantity::Greater => 0,
        Quantity::Total => 1,
        Quantity::Conditional => 2,
    };
    *CACHE[slot].get_or_init(|| compute(obj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn traces_match_closed_forms() {
        let tr = |q| Objective::new(q).dual.map(|x| x.trace());
        let g = tr(Quantity::Greater);
        let t = tr(Quantity::Total);
        let c = tr(Quantity::Conditional);
        for v in [g[0], g[1], c[0], c[1]] {
            assert!((v - 0.75).abs() < 1e-9, "{v}");
        }
        assert!((t[0] - 1.25).abs() < 1e-9);
        assert_eq!(t[1], 0.0);
    }

    #[test]
    fn majorant_holds_on_random_psd() {
        let mut rng = crate::seed::rng(19);
        for q in Quantity::ALL {
            let o = Objective::new(q);
            for _ in 0..20_000 {
                let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let m = Sym2::new(x[0] * x[0] + x[1] * x[1], x[0] * x[2] + x[1] * x[3], x[2] * x[2] + x[3] * x[3]);
                let t = o.bound_terms(o.element_terms(m));
                for s in 0..2 {
                    assert!(t[s] <= m.trace_product(o.dual[s]) + 1e-13, "{q} {s}");
                }
            }
        }
    }

    #[test]
    fn small_lp_finds_chebyshev_center() {
        // t ≥ 1 ± x, t ≥ 1 ± y: optimum t = 1 at the origin.
        let cuts = [[1.0, 1.0, 0.0, 1.0], [1.0, -1.0, 0.0, 1.0], [1.0, 0.0, 1.0, 1.0], [1.0, 0.0, -1.0, 1.0]];
        let [t, x, y] = small_lp(&cuts, 3.0);
        assert!((t - 1.0).abs() < 1e-12 && x.abs() < 1e-12 && y.abs() < 1e-12, "{t} {x} {y}");
    }
}
