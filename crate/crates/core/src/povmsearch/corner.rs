//! Corner corrections: bounds on a whole grid cell from its vertices.

use serde::Serialize;

use crate::linalg::Sym2;

use super::{Objective, Povm, PovmError, Quantity};

/// Denominators below this are treated as degenerate.
pub(crate) const DEN_TOL: f64 = 1e-12;

/// The eight perturbations `[[a,b],[b,c]]` with `a, b, c ∈ {0, ε}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerSet {
    pub eps: f64,
    pub deltas: [Sym2; 8],
}

impl CornerSet {
    pub fn new(eps: f64) -> Self {
        let mut deltas = [Sym2::ZERO; 8];
        for (k, d) in deltas.iter_mut().enumerate() {
            let bit = |i: usize| if (k >> i) & 1 == 1 { eps } else { 0.0 };
            *d = Sym2::new(bit(2), bit(1), bit(0));
        }
        CornerSet { eps, deltas }
    }
}

/// Upper bound on the bound-side element terms over the box
/// `{lower + Δ : Δ ∈ [0, width]³}` (PSD points only).
///
/// Several bounds are combined: the maximum over the 8 box corners, valid
/// when every corner has positive denominators because each term is convex on
/// that half-space; and the maxima of the linear majorants `Σ κ Tr[M N]`,
/// `Tr[M R]` and `Tr[M X]`.
#[inline]
pub(crate) fn box_bound(obj: &Objective, lower: Sym2, width: f64) -> [f64; 2] {
    let mut convex = [f64::NEG_INFINITY; 2];
    let mut linear = [f64::NEG_INFINITY; 2];
    let mut ratio = [f64::NEG_INFINITY; 2];
    let mut dual = [f64::NEG_INFINITY; 2];
    let mut degenerate = false;
    for k in 0..8 {
        let bit = |i: usize| if (k >> i) & 1 == 1 { width } else { 0.0 };
        let m = Sym2::new(lower.a + bit(2), lower.b + bit(1), lower.c + bit(0));
        let lin = obj.bound_terms(obj.element_majorant(m));
        linear = [linear[0].max(lin[0]), linear[1].max(lin[1])];
        let r = obj.element_ratio(m);
        ratio = [ratio[0].max(r[0]), ratio[1].max(r[1])];
        let x = obj.element_dual(m);
        dual = [dual[0].max(x[0]), dual[1].max(x[1])];
        if !degenerate {
            if obj.min_denominator(m) > DEN_TOL {
                let t = obj.bound_terms(obj.element_terms(m));
                convex = [convex[0].max(t[0]), convex[1].max(t[1])];
            } else {
                degenerate = true;
            }
        }
    }
    let linear = [0, 1].map(|s| linear[s].min(ratio[s]).min(dual[s]));
    if degenerate {
        linear
    } else {
        [convex[0].min(linear[0]), convex[1].min(linear[1])]
    }
}

/// One value per leakage quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantityValues {
    pub greater: f64,
    pub total: f64,
    pub conditional: f64,
}

impl QuantityValues {
    pub fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::Greater => self.greater,
            Quantity::Total => self.total,
            Quantity::Conditional => self.conditional,
        }
    }
}

/// Bound on every POVM in the grid cell of `povm`.
///
/// The cell holds POVMs whose first `K − 1` elements lie in the boxes
/// `[M_i, M_i + ε]` entrywise; the last element is then determined and lies in
/// `[M_K − (K−1)ε, M_K]`. Each element's term is replaced by its corner bound.
/// The result bounds POVMs inside this one cell; the search uses a form of the
/// total bound that also survives mixing across cells.
pub fn corner_corrected_value(povm: &Povm, eps: f64) -> Result<QuantityValues, PovmError> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(PovmError::BadParameter(format!("corner width {eps} must be nonnegative")));
    }
    let povm = Povm::new(povm.elements().to_vec())?;
    let k = povm.len();
    let sums = |obj: &Objective| {
        let mut u = [0.0; 2];
        for (i, &m) in povm.elements().iter().enumerate() {
            let b = if i + 1 < k {
                box_bound(obj, m, eps)
            } else {
                let w = (k - 1) as f64 * eps;
                box_bound(obj, m - Sym2::new(w, w, w), w)
            };
            u = [u[0] + b[0], u[1] + b[1]];
        }
        u
    };
    // Greater and total share the per-bit sums; total uses them separately
    // as 2 + log₂ U₀ + log₂ U₁, which is exact at zero width.
    let bits = Objective::new(Quantity::Greater);
    let cond = Objective::new(Quantity::Conditional);
    let u = sums(&bits);
    let uc = sums(&cond);
    let out = [
        bits.bound_value(u).max(bits.eval(&povm)),
        (2.0 + u[0].log2() + u[1].log2()).max(Objective::new(Quantity::Total).eval(&povm)),
        cond.bound_value(uc).max(cond.eval(&povm)),
    ];
    Ok(QuantityValues { greater: out[0], total: out[1], conditional: out[2] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povmsearch::eval_povm_info;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn corner_set_has_eight_members() {
        let c = CornerSet::new(0.1);
        let mut seen: Vec<(u64, u64, u64)> = c.deltas.iter().map(|d| (d.a.to_bits(), d.b.to_bits(), d.c.to_bits())).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert!(c.deltas.contains(&Sym2::ZERO));
        assert!(c.deltas.contains(&Sym2::new(0.1, 0.1, 0.1)));
    }

    #[test]
    fn zero_width_equals_raw() {
        for p in [Povm::z_basis(), Povm::basis(0.4), Povm::identity()] {
            let info = eval_povm_info(&p).unwrap();
            let c = corner_corrected_value(&p, 0.0).unwrap();
            for q in Quantity::ALL {
                assert!((c.get(q) - info.quantity(q)).abs() < 1e-12, "{q}");
            }
        }
    }

    #[test]
    fn corrected_at_least_raw() {
        for eps in [0.001, 0.01, 0.05, 0.2] {
            for p in [Povm::z_basis(), Povm::basis(0.4), Povm::identity()] {
                let info = eval_povm_info(&p).unwrap();
                let c = corner_corrected_value(&p, eps).unwrap();
                for q in Quantity::ALL {
                    assert!(c.get(q) >= info.quantity(q));
                }
            }
        }
    }

    #[test]
    fn dominates_random_interior_points() {
        let eps = 0.05;
        let mut rng = seed::rng(2024);
        let grid: Vec<_> = crate::povmsearch::grid_extremal_povms(eps, 3).unwrap().collect();
        let mut checked = 0;
        for trial in 0..20 {
            let base = &grid[rng.gen_range(0..grid.len())];
            let bound = corner_corrected_value(base, eps).unwrap();
            let mut inside = 0;
            for _ in 0..2000 {
                if inside >= 100 {
                    break;
                }
                let mut els: Vec<Sym2> = base.elements()[..2]
                    .iter()
                    .map(|m| *m + Sym2::new(rng.gen::<f64>() * eps, rng.gen::<f64>() * eps, rng.gen::<f64>() * eps))
                    .collect();
                let last = Sym2::IDENTITY - els[0] - els[1];
                els.push(last);
                let Ok(p) = Povm::new(els) else { continue };
                inside += 1;
                let info = eval_povm_info(&p).unwrap();
                for q in Quantity::ALL {
                    assert!(info.quantity(q) <= bound.get(q) + 1e-12, "trial {trial} {q}");
                }
            }
            checked += inside;
        }
        assert!(checked > 200);
    }
}
