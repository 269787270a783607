//! Upper bounds on what a single-qubit measurement learns about the two
//! encoded QRAC bits, measured in collision mutual information.
//!
//! Three quantities are bounded over all POVMs `μ`:
//! - `greater`: `max(I_c(b₀:μ), I_c(b₁:μ))`
//! - `total`: `I_c(b₀:μ) + I_c(b₁:μ)`
//! - `conditional`: `max_α I_c(b_α : μ | b_{1−α})`
//!
//! For uniform bits every quantity reduces to sums of per-element terms
//! `Tr[M N]² / Tr[M D]`, which are jointly convex in the element `M`.
//! [`search::search_bounds`] exploits this on a grid of real POVMs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::collinfo::{self, DistError, JointDistribution, Variable};
use crate::linalg::Sym2;
use crate::qrac;

pub mod corner;
pub mod crosscheck;
mod dual;
pub mod grid;
pub mod search;

pub use corner::{corner_corrected_value, CornerSet};
pub use crosscheck::{rank_one_crosscheck, verify_convexity_fact, ConvexityReport, CrosscheckResult};
pub use grid::grid_extremal_povms;
pub use search::{search_bounds, BoundReport, SearchConfig, SearchError, SearchStats, ThresholdCheck};

/// Tolerance for PSD and completeness checks on POVMs.
pub const POVM_TOL: f64 = 1e-10;
/// Largest number of POVM elements (d² for a qubit).
pub const MAX_OUTCOMES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PovmError {
    #[error("POVM must have between 1 and {MAX_OUTCOMES} elements, got {0}")]
    BadElementCount(usize),
    #[error("element {index} is not PSD (min eigenvalue {min_eig})")]
    NotPsd { index: usize, min_eig: f64 },
    #[error("elements sum to {sum:?}, not the identity")]
    NotComplete { sum: Sym2 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Distribution(#[from] DistError),
}

/// Real qubit POVM: PSD 2×2 elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<Sym2>,
}

impl Povm {
    pub fn new(elements: Vec<Sym2>) -> Result<Self, PovmError> {
        if elements.is_empty() || elements.len() > MAX_OUTCOMES {
            return Err(PovmError::BadElementCount(elements.len()));
        }
        for (index, m) in elements.iter().enumerate() {
            let min_eig = m.min_eigenvalue();
            if min_eig < -POVM_TOL {
                return Err(PovmError::NotPsd { index, min_eig });
            }
        }
        let sum: Sym2 = elements.iter().copied().sum();
        if sum.max_abs_diff(Sym2::IDENTITY) > POVM_TOL {
            return Err(PovmError::NotComplete { sum });
        }
        Ok(Povm { elements })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(elements: Vec<Sym2>) -> Self {
        Povm { elements }
    }

    /// Projective measurement in the basis `{ψ_θ, ψ_{θ+π/2}}`.
    pub fn basis(theta: f64) -> Self {
        let [p0, p1] = qrac::BasisMeasurement::new(theta).projectors();
        Povm { elements: vec![p0, p1] }
    }

    pub fn z_basis() -> Self {
        Povm { elements: vec![Sym2::new(1.0, 0.0, 0.0), Sym2::new(0.0, 0.0, 1.0)] }
    }

    /// The trivial single-outcome measurement.
    pub fn identity() -> Self {
        Povm { elements: vec![Sym2::IDENTITY] }
    }

    pub fn elements(&self) -> &[Sym2] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Mixture `(1−w)·self + w·other` as a labeled union: outcome `(j, i)`
    /// has element `weight_j · M_{j,i}`.
    pub fn labeled_mixture(&self, other: &Povm, w: f64) -> Vec<Sym2> {
        self.elements.iter().map(|m| m.scale(1.0 - w)).chain(other.elements.iter().map(|m| m.scale(w))).collect()
    }

    /// Outcome-wise mixture of two POVMs with the same number of outcomes.
    pub fn mix(&self, other: &Povm, w: f64) -> Result<Povm, PovmError> {
        if self.len() != other.len() {
            return Err(PovmError::BadElementCount(other.len()));
        }
        Povm::new(self.elements.iter().zip(&other.elements).map(|(a, b)| a.scale(1.0 - w) + b.scale(w)).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct PovmJson {
    elements: Vec<[[f64; 2]; 2]>,
}

impl Serialize for Povm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PovmJson { elements: self.elements.iter().map(|m| m.to_array()).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PovmJson::deserialize(d)?;
        let mut elements = Vec::with_capacity(j.elements.len());
        for m in j.elements {
            if (m[0][1] - m[1][0]).abs() > POVM_TOL {
                return Err(serde::de::Error::custom("POVM element is not symmetric"));
            }
            elements.push(Sym2::new(m[0][0], m[0][1], m[1][1]));
        }
        Povm::new(elements).map_err(serde::de::Error::custom)
    }
}

/// Which leakage quantity a bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Greater,
    Total,
    Conditional,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::Greater, Quantity::Total, Quantity::Conditional];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Greater => "greater",
            Quantity::Total => "total",
            Quantity::Conditional => "conditional",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greater" => Ok(Quantity::Greater),
            "total" => Ok(Quantity::Total),
            "conditional" => Ok(Quantity::Conditional),
            other => Err(format!("unknown quantity {other:?} (expected greater, total or conditional)")),
        }
    }
}

/// Collision information of each bit, and of each bit given the other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PovmInfo {
    pub ic_b0: f64,
    pub ic_b1: f64,
    pub ic_b0_given_b1: f64,
    pub ic_b1_given_b0: f64,
}

impl PovmInfo {
    pub fn greater(&self) -> f64 {
        self.ic_b0.max(self.ic_b1)
    }

    pub fn total(&self) -> f64 {
        self.ic_b0 + self.ic_b1
    }

    pub fn conditional(&self) -> f64 {
        self.ic_b0_given_b1.max(self.ic_b1_given_b0)
    }

    pub fn quantity(&self, q: Quantity) -> f64 {
        match q {
            Quantity::Greater => self.greater(),
            Quantity::Total => self.total(),
            Quantity::Conditional => self.conditional(),
        }
    }
}

/// Exact joint table of `(b₀, b₁, outcome)` for uniform bits encoded with the QRAC.
pub fn outcome_table(povm: &Povm) -> Result<JointDistribution, PovmError> {
    let states = qrac_projectors();
    let vars = vec![Variable::new("b0", 2), Variable::new("b1", 2), Variable::new("o", povm.len())];
    Ok(JointDistribution::from_fn(vars, |idx| {
        (0.25 * povm.elements[idx[2]].trace_product(states[idx[0]][idx[1]])).max(0.0)
    })?)
}

/// Collision information of a POVM on the uniform QRAC ensemble, computed
/// from the exact outcome table.
pub fn eval_povm_info(povm: &Povm) -> Result<PovmInfo, PovmError> {
    let d = outcome_table(povm)?;
    Ok(PovmInfo {
        ic_b0: collinfo::collision_mi(&d, &["b0"], &["o"])?,
        ic_b1: collinfo::collision_mi(&d, &["b1"], &["o"])?,
        ic_b0_given_b1: collinfo::conditional_collision_mi(&d, &["b0"], &["o"], &["b1"])?,
        ic_b1_given_b0: collinfo::conditional_collision_mi(&d, &["b1"], &["o"], &["b0"])?,
    })
}

pub(crate) fn qrac_projectors() -> [[Sym2; 2]; 2] {
    let p = |b0, b1| qrac::qrac_encode(b0, b1).density_matrix().matrix();
    [[p(false, false), p(false, true)], [p(true, false), p(true, true)]]
}

/// One conditioning group: `Σ_j Tr[M N_j]² / Tr[M D]`.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub d: Sym2,
    pub ns: Vec<Sym2>,
    /// `κ_j` with `N_j ≤ κ_j D`, so `Tr[M N_j]²/Tr[M D] ≤ κ_j Tr[M N_j]` on PSD `M`.
    pub kappas: Vec<f64>,
}

impl Group {
    fn new(d: Sym2, ns: Vec<Sym2>) -> Self {
        let kappas = ns
            .iter()
            .map(|&n| Sym2::max_generalized_eigenvalue(n, d).expect("conditioning operator is positive definite"))
            .collect();
        Group { d, ns, kappas }
    }
}

/// Upper bound on `max_{|u|=1} Σ_j ⟨u|A_j|u⟩²` with `A_j = D^{-1/2} N_j D^{-1/2}`,
/// so that `Σ_j Tr[MN_j]²/Tr[MD] ≤ c·Tr[MD]` on PSD `M`.
///
/// With `u = (cos θ, sin θ)` and `w = (cos 2θ, sin 2θ)`, each `⟨u|A_j|u⟩` is
/// `α_j + w·v_j`, so the sum is `K + 2p·w + wᵀQw`. For any `μ > λ_max(Q)` the
/// concave quadratic `wᵀ(Q − μI)w + 2p·w` is at most `pᵀ(μI − Q)⁻¹p` on all of
/// ℝ², which bounds the circle maximum; minimizing over `μ` makes it exact.
pub(crate) fn ratio_constant(d: Sym2, ns: &[Sym2]) -> f64 {
    let r = d.inv_sqrt().expect("conditioning operator is positive definite");
    let (mut k, mut p, mut q) = (0.0, [0.0; 2], Sym2::ZERO);
    for n in ns {
        let a = n.congruence(r);
        let alpha = 0.5 * (a.a + a.c);
        let v = [0.5 * (a.a - a.c), a.b];
        k += alpha * alpha;
        p = [p[0] + alpha * v[0], p[1] + alpha * v[1]];
        q += Sym2::new(v[0] * v[0], v[0] * v[1], v[1] * v[1]);
    }
    let (l2, l1) = q.eigenvalues();
    let (s1, c1) = q.top_eigen_angle().sin_cos();
    let pi1 = p[0] * c1 + p[1] * s1;
    let pi2 = -p[0] * s1 + p[1] * c1;
    let gap = (l1 - l2).max(0.0);
    // μ = λ₁ + t with t > 0.
    let f = |t: f64| l1 + t + pi1 * pi1 / t + pi2 * pi2 / (t + gap);
    let (mut lo, mut hi) = (0.0, pi1.abs() + pi2.abs() + 1.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = f(hi);
    for _ in 0..400 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        let (f1, f2) = (f(x1), f(x2));
        best = best.min(f1).min(f2);
        if f1 <= f2 {
            hi = x2;
        } else {
            lo = x1;
        }
        if x1 <= 0.0 {
            break;
        }
    }
    k + best
}

/// Per-element collision sums for the two components of a quantity.
///
/// For `greater` and `total` the components are `S₀, S₁` with
/// `I_c(b_s:μ) = 1 + log₂ S_s`; for `conditional` they are the sums giving
/// `I_c(b_s:μ|b_{1−s}) = 1 + log₂ S_s`.
#[derive(Debug, Clone)]
pub(crate) struct Objective {
    pub quantity: Quantity,
    pub comps: [Vec<Group>; 2],
    /// `R_s` with bound-side terms at most `Tr[M R_s]` on PSD `M`; see [`ratio_constant`].
    pub ratio: [Sym2; 2],
    /// Linear majorants `X_s` of the bound-side terms with the smallest trace.
    pub dual: [Sym2; 2],
}

impl Objective {
    pub fn new(quantity: Quantity) -> Self {
        let p = qrac_projectors();
        let half = Sym2::IDENTITY.scale(0.5);
        let comps = match quantity {
            Quantity::Greater | Quantity::Total => [
                vec![Group::new(half, (0..2).map(|j| (p[j][0] + p[j][1]).scale(0.25)).collect())],
                vec![Group::new(half, (0..2).map(|j| (p[0][j] + p[1][j]).scale(0.25)).collect())],
            ],
            Quantity::Conditional => [
                (0..2).map(|g| Group::new((p[0][g] + p[1][g]).scale(0.25), (0..2).map(|j| p[j][g].scale(0.25)).collect())).collect(),
                (0..2).map(|g| Group::new((p[g][0] + p[g][1]).scale(0.25), (0..2).map(|j| p[g][j].scale(0.25)).collect())).collect(),
            ],
        };
        let per_comp = |gs: &[Group]| gs.iter().map(|g| g.d.scale(ratio_constant(g.d, &g.ns))).sum::<Sym2>();
        let ratio = match quantity {
            Quantity::Total => {
                // Both components condition on the same operator, so their
                // sum is one ratio problem with all four numerators.
                let d = comps[0][0].d;
                let ns: Vec<Sym2> = comps.iter().flatten().flat_map(|g| g.ns.iter().copied()).collect();
                let shared = comps.iter().flatten().all(|g| g.d.max_abs_diff(d) == 0.0);
                let r = if shared { d.scale(ratio_constant(d, &ns)) } else { per_comp(&comps[0]) + per_comp(&comps[1]) };
                [r, Sym2::ZERO]
            }
            _ => [per_comp(&comps[0]), per_comp(&comps[1])],
        };
        let mut obj = Objective { quantity, comps, ratio, dual: [Sym2::ZERO; 2] };
        obj.dual = dual::dual_majorants(&obj);
        obj
    }

    /// Bound-side dual majorant `Tr[M X_s]`.
    #[inline]
    pub fn element_dual(&self, m: Sym2) -> [f64; 2] {
        [m.trace_product(self.dual[0]), m.trace_product(self.dual[1])]
    }

    /// Bound-side ratio majorant `Tr[M R_s]`.
    #[inline]
    pub fn element_ratio(&self, m: Sym2) -> [f64; 2] {
        [m.trace_product(self.ratio[0]), m.trace_product(self.ratio[1])]
    }

    /// Per-element terms of both components; zero-trace denominators contribute 0.
    #[inline]
    pub fn element_terms(&self, m: Sym2) -> [f64; 2] {
        let term = |groups: &[Group]| -> f64 {
            groups
                .iter()
                .map(|g| {
                    let den = m.trace_product(g.d);
                    if den > 0.0 {
                        g.ns.iter().map(|&n| m.trace_product(n).powi(2)).sum::<f64>() / den
                    } else {
                        0.0
                    }
                })
                .sum()
        };
        [term(&self.comps[0]), term(&self.comps[1])]
    }

    /// Linear majorant `Σ κ_j Tr[M N_j]` of each component, valid on PSD `M`.
    #[inline]
    pub fn element_majorant(&self, m: Sym2) -> [f64; 2] {
        let lin = |groups: &[Group]| -> f64 {
            groups.iter().flat_map(|g| g.ns.iter().zip(&g.kappas).map(|(&n, &k)| k * m.trace_product(n))).sum()
        };
        [lin(&self.comps[0]), lin(&self.comps[1])]
    }

    /// Smallest denominator `Tr[M D]` over all groups.
    #[inline]
    pub fn min_denominator(&self, m: Sym2) -> f64 {
        self.comps.iter().flatten().map(|g| m.trace_product(g.d)).fold(f64::INFINITY, f64::min)
    }

    /// Terms of a PSD element, capped by the linear majorant so that rounding
    /// in a near-zero denominator cannot inflate them.
    #[inline]
    pub fn exact_terms(&self, m: Sym2) -> [f64; 2] {
        let t = self.element_terms(m);
        let lin = self.element_majorant(m);
        [t[0].min(lin[0]).max(0.0), t[1].min(lin[1]).max(0.0)]
    }

    pub fn exact_sums(&self, elements: &[Sym2]) -> [f64; 2] {
        elements.iter().fold([0.0, 0.0], |acc, &m| {
            let t = self.exact_terms(m);
            [acc[0] + t[0], acc[1] + t[1]]
        })
    }

    /// Quantity value from the exact component sums.
    pub fn value(&self, s: [f64; 2]) -> f64 {
        match self.quantity {
            Quantity::Greater | Quantity::Conditional => 1.0 + s[0].max(s[1]).log2(),
            Quantity::Total => 2.0 + s[0].log2() + s[1].log2(),
        }
    }

    /// Upper bound on the quantity from upper bounds on the sums.
    ///
    /// For `total` only `u[0]`, a bound on `S₀ + S₁`, is used:
    /// `log₂ S₀ + log₂ S₁ ≤ 2 log₂((S₀ + S₁)/2)`.
    pub fn bound_value(&self, u: [f64; 2]) -> f64 {
        match self.quantity {
            Quantity::Greater | Quantity::Conditional => 1.0 + u[0].max(u[1]).log2(),
            Quantity::Total => 2.0 + 2.0 * (0.5 * u[0]).log2(),
        }
    }

    /// Bound-side summary of per-element terms: both components, or their sum for `total`.
    #[inline]
    pub fn bound_terms(&self, t: [f64; 2]) -> [f64; 2] {
        match self.quantity {
            Quantity::Total => [t[0] + t[1], 0.0],
            _ => t,
        }
    }

    pub fn eval(&self, povm: &Povm) -> f64 {
        self.value(self.exact_sums(povm.elements()))
    }
}

/// POVMs with known closed-form values that every search starts from.
pub fn analytic_seeds() -> Vec<(&'static str, Povm)> {
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
    vec![
        ("z-basis", Povm::z_basis()),
        ("pi/4-basis", Povm::basis(FRAC_PI_4)),
        ("pi/8-basis", Povm::basis(FRAC_PI_8)),
        ("-pi/8-basis", Povm::basis(-FRAC_PI_8)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_8, PI};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn ratio_constants_match_closed_forms() {
        // Each bit's terms are at most (3/4)·Tr[M]/2; their sum at most (5/4)·Tr[M]/2.
        let g = Objective::new(Quantity::Greater);
        close(g.ratio[0].trace(), 0.75, 1e-12);
        close(g.ratio[1].trace(), 0.75, 1e-12);
        let t = Objective::new(Quantity::Total);
        close(t.ratio[0].a, 0.625, 1e-12);
        close(t.ratio[0].b, 0.0, 1e-12);
        close(t.ratio[0].c, 0.625, 1e-12);
        let c = Objective::new(Quantity::Conditional);
        close(c.ratio[0].trace(), 1.0, 1e-12);
    }

    #[test]
    fn ratio_constant_is_circle_maximum() {
        // Brute force over the circle for generic operators.
        let d = Sym2::new(0.6, 0.1, 0.3);
        let ns = [Sym2::new(0.2, 0.05, 0.1), Sym2::new(0.1, -0.07, 0.25), Sym2::new(0.3, 0.0, 0.02)];
        let r = d.inv_sqrt().unwrap();
        let mut brute = 0.0f64;
        for i in 0..200_000 {
            let th = PI * i as f64 / 200_000.0;
            let u = Sym2::projector(th);
            brute = brute.max(ns.iter().map(|n| n.congruence(r).trace_product(u).powi(2)).sum());
        }
        let c = ratio_constant(d, &ns);
        assert!(c >= brute - 1e-12 && c <= brute + 1e-9, "{c} vs {brute}");
    }

    #[test]
    fn ratio_majorant_dominates_terms_on_psd() {
        use rand::Rng;
        let mut rng = crate::seed::rng(41);
        for q in Quantity::ALL {
            let o = Objective::new(q);
            for _ in 0..5000 {
                let x: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let m = Sym2::new(x[0] * x[0] + x[1] * x[1], x[0] * x[2] + x[1] * x[3], x[2] * x[2] + x[3] * x[3]);
                let t = o.bound_terms(o.element_terms(m));
                let r = o.element_ratio(m);
                assert!(t[0] <= r[0] + 1e-12 && t[1] <= r[1] + 1e-12, "{q}");
            }
        }
    }

    #[test]
    fn z_basis_values() {
        let info = eval_povm_info(&Povm::z_basis()).unwrap();
        close(info.ic_b0, 1.5f64.log2(), 1e-12);
        close(info.ic_b0, 0.5849625, 1e-7);
        close(info.ic_b1, 0.0, 1e-12);
    }

    #[test]
    fn identity_values() {
        let info = eval_povm_info(&Povm::identity()).unwrap();
        for v in [info.ic_b0, info.ic_b1, info.ic_b0_given_b1, info.ic_b1_given_b0] {
            close(v, 0.0, 1e-12);
        }
    }

    #[test]
    fn intermediate_basis_values() {
        let info = eval_povm_info(&Povm::basis(FRAC_PI_8)).unwrap();
        close(info.ic_b0, 1.25f64.log2(), 1e-12);
        close(info.ic_b1, 1.25f64.log2(), 1e-12);
        close(info.total(), 0.6438562, 1e-7);
    }

    #[test]
    fn fast_objective_matches_table_route() {
        let povms = [
            Povm::z_basis(),
            Povm::basis(0.3),
            Povm::basis(FRAC_PI_8),
            Povm::new(vec![Sym2::projector(0.1).scale(2.0 / 3.0), Sym2::projector(0.1 + PI / 3.0).scale(2.0 / 3.0), Sym2::projector(0.1 + 2.0 * PI / 3.0).scale(2.0 / 3.0)]).unwrap(),
        ];
        for p in &povms {
            let info = eval_povm_info(p).unwrap();
            for q in Quantity::ALL {
                close(Objective::new(q).eval(p), info.quantity(q), 1e-12);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(matches!(Povm::new(vec![]), Err(PovmError::BadElementCount(0))));
        assert!(matches!(
            Povm::new(vec![Sym2::new(1.5, 0.0, 0.5), Sym2::new(-0.5, 0.0, 0.5)]),
            Err(PovmError::NotPsd { index: 1, .. })
        ));
        assert!(matches!(Povm::new(vec![Sym2::new(1.0, 0.0, 0.0)]), Err(PovmError::NotComplete { .. })));
        assert!(Povm::new(vec![Sym2::IDENTITY.scale(0.25); 4]).is_ok());
        assert!(Povm::new(vec![Sym2::IDENTITY.scale(0.2); 5]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let p = Povm::basis(0.7);
        let s = serde_json::to_string(&p).unwrap();
        let back: Povm = serde_json::from_str(&s).unwrap();
        for (a, b) in back.elements().iter().zip(p.elements()) {
            assert!(a.max_abs_diff(*b) < 1e-15);
        }
        assert!(serde_json::from_str::<Povm>(r#"{"elements":[[[1,0],[0,0]]]}"#).is_err());
        assert!(serde_json::from_str::<Povm>(r#"{"elements":[[[1,0.1],[0,1]]]}"#).is_err());
    }

    #[test]
    fn quantity_parse() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!("sum".parse::<Quantity>().is_err());
    }
}
