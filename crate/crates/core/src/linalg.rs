//! Real symmetric 2×2 matrices.
//!
//! Every operator in the workbench (states, POVM elements, perturbations)
//! lives in this 3-dimensional space, written `[[a, b], [b, c]]`.

use serde::{Deserialize, Serialize};

pub const PSD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { a: 0.0, b: 0.0, c: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { a: 1.0, b: 0.0, c: 1.0 };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Sym2 { a, b, c }
    }

    /// Rank-one projector `|ψ_θ⟩⟨ψ_θ|` with `ψ_θ = (cos θ, sin θ)`.
    pub fn projector(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Sym2 { a: c * c, b: c * s, c: s * s }
    }

    pub fn scale(self, t: f64) -> Self {
        Sym2 { a: self.a * t, b: self.b * t, c: self.c * t }
    }

    pub fn trace(self) -> f64 {
        self.a + self.c
    }

    pub fn det(self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// `Tr[A·B]` for symmetric A, B.
    pub fn trace_product(self, o: Sym2) -> f64 {
        self.a * o.a + 2.0 * self.b * o.b + self.c * o.c
    }

    pub fn eigenvalues(self) -> (f64, f64) {
        let mid = 0.5 * (self.a + self.c);
        let rad = (0.25 * (self.a - self.c).powi(2) + self.b * self.b).sqrt();
        (mid - rad, mid + rad)
    }

    pub fn min_eigenvalue(self) -> f64 {
        self.eigenvalues().0
    }

    pub fn is_psd(self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub fn max_abs_diff(self, o: Sym2) -> f64 {
        (self.a - o.a).abs().max((self.b - o.b).abs()).max((self.c - o.c).abs())
    }

    pub fn to_array(self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.b, self.c]]
    }

    /// Largest `κ` with `det(N − κD) = 0`, i.e. `max_v vᵀNv / vᵀDv` when `D ≻ 0`.
    ///
    /// When `D` is singular the ratio is unbounded along its kernel unless `N`
    /// vanishes there as well; `None` signals an unbounded ratio.
    /// Angle `θ` of the eigenvector `(cos θ, sin θ)` for the larger eigenvalue.
    pub fn top_eigen_angle(self) -> f64 {
        0.5 * (2.0 * self.b).atan2(self.a - self.c)
    }

    /// `D^{-1/2}` for positive definite `D`.
    pub fn inv_sqrt(self) -> Option<Sym2> {
        let (lo, hi) = self.eigenvalues();
        if !(lo > PSD_TOL) {
            return None;
        }
        let t = self.top_eigen_angle();
        Some(Sym2::projector(t).scale(hi.sqrt().recip()) + Sym2::projector(t + std::f64::consts::FRAC_PI_2).scale(lo.sqrt().recip()))
    }

    /// `X·self·X` for symmetric `X`.
    pub fn congruence(self, x: Sym2) -> Sym2 {
        // Y = self·X, then X·Y.
        let y = [[self.a * x.a + self.b * x.b, self.a * x.b + self.b * x.c], [self.b * x.a + self.c * x.b, self.b * x.b + self.c * x.c]];
        Sym2::new(x.a * y[0][0] + x.b * y[1][0], x.a * y[0][1] + x.b * y[1][1], x.b * y[0][1] + x.c * y[1][1])
    }

    pub fn max_generalized_eigenvalue(n: Sym2, d: Sym2) -> Option<f64> {
        let (dmin, _) = d.eigenvalues();
        if dmin > PSD_TOL {
            // det(N − κD) = det(D) κ² − (n.a d.c + n.c d.a − 2 n.b d.b) κ + det(N).
            let qa = d.det();
            let qb = -(n.a * d.c + n.c * d.a - 2.0 * n.b * d.b);
            let qc = n.det();
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
            return Some((-qb + disc.sqrt()) / (2.0 * qa));
        }
        // Singular D: only bounded if N is zero on ker D.
        let (_, dmax) = d.eigenvalues();
        if dmax <= PSD_TOL {
            return if n.max_abs_diff(Sym2::ZERO) <= PSD_TOL { Some(0.0) } else { None };
        }
        // D ≈ dmax·uuᵀ; kernel direction w ⊥ u.
        let theta = 0.5 * (2.0 * d.b).atan2(d.a - d.c);
        let w = Sym2::projector(theta + std::f64::consts::FRAC_PI_2);
        if n.trace_product(w) > PSD_TOL {
            None
        } else {
            let u = Sym2::projector(theta);
            Some(n.trace_product(u) / dmax)
        }
    }
}

impl std::ops::Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c }
    }
}

impl std::ops::Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2 { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c }
    }
}

impl std::ops::AddAssign for Sym2 {
    fn add_assign(&mut self, o: Sym2) {
        *self = *self + o;
    }
}

impl std::iter::Sum for Sym2 {
    fn sum<I: Iterator<Item = Sym2>>(iter: I) -> Sym2 {
        iter.fold(Sym2::ZERO, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn projector_is_rank_one_trace_one() {
        for i in 0..16 {
            let p = Sym2::projector(i as f64 * PI / 7.3);
            assert!((p.trace() - 1.0).abs() < 1e-15);
            assert!(p.det().abs() < 1e-15);
            assert!(p.is_psd(1e-15));
        }
    }

    #[test]
    fn inverse_square_root() {
        let d = Sym2::new(0.7, 0.2, 0.4);
        let r = d.inv_sqrt().unwrap();
        assert!(d.congruence(r).max_abs_diff(Sym2::IDENTITY) < 1e-14);
        // X·I·X = X².
        let sq = Sym2::IDENTITY.congruence(r);
        assert!(sq.max_abs_diff(Sym2::new(r.a * r.a + r.b * r.b, r.b * (r.a + r.c), r.b * r.b + r.c * r.c)) < 1e-15);
        assert!(Sym2::new(1.0, 1.0, 1.0).inv_sqrt().is_none());
    }

    #[test]
    fn trace_product_matches_overlap() {
        let (x, y) = (0.3, 1.1);
        let overlap = (x - y as f64).cos().powi(2);
        assert!((Sym2::projector(x).trace_product(Sym2::projector(y)) - overlap).abs() < 1e-15);
    }

    #[test]
    fn generalized_eigenvalue_by_scan() {
        let n = Sym2::new(0.7, 0.2, 0.1);
        let d = Sym2::new(0.5, -0.1, 0.3);
        let k = Sym2::max_generalized_eigenvalue(n, d).unwrap();
        let scan = (0..20000)
            .map(|i| {
                let t = i as f64 * PI / 20000.0;
                let v = Sym2::projector(t);
                n.trace_product(v) / d.trace_product(v)
            })
            .fold(f64::MIN, f64::max);
        assert!((k - scan).abs() < 1e-6, "{k} vs {scan}");
        assert!(k >= scan - 1e-12);
    }

    #[test]
    fn generalized_eigenvalue_singular_denominator() {
        let d = Sym2::projector(0.4);
        assert_eq!(Sym2::max_generalized_eigenvalue(Sym2::projector(1.0), d), None);
        let k = Sym2::max_generalized_eigenvalue(Sym2::projector(0.4).scale(0.3), d).unwrap();
        assert!((k - 0.3).abs() < 1e-12);
    }
}
