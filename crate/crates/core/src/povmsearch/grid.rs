//! Enumeration of real POVMs on an ε-grid.

use crate::linalg::Sym2;

use super::{Povm, PovmError, MAX_OUTCOMES, POVM_TOL};

/// Grid values `start, start + eps, …` up to `end` (inclusive, with slack).
fn axis(start: f64, end: f64, eps: f64) -> Vec<f64> {
    let steps = ((end - start) / eps + 1e-9).floor() as usize;
    (0..=steps).map(|i| start + i as f64 * eps).collect()
}

/// Grid matrices `[[a,b],[b,c]]` with `0 ≤ M ≤ I`, in lexicographic `(a, b, c)` order.
pub(crate) fn grid_elements(eps: f64) -> Vec<Sym2> {
    let ac = axis(0.0, 1.0, eps);
    let bs = axis(-0.5, 0.5, eps);
    let mut out = Vec::new();
    for &a in &ac {
        for &b in &bs {
            for &c in &ac {
                let m = Sym2::new(a, b, c);
                if m.is_psd(POVM_TOL) && (Sym2::IDENTITY - m).is_psd(POVM_TOL) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Every POVM whose first `outcomes − 1` elements are grid matrices and whose
/// last element `I − Σ` is PSD, in lexicographic order of the grid indices.
pub fn grid_extremal_povms(eps: f64, outcomes: usize) -> Result<GridPovms, PovmError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(PovmError::BadParameter(format!("grid step {eps} must be positive")));
    }
    if outcomes == 0 || outcomes > MAX_OUTCOMES {
        return Err(PovmError::BadElementCount(outcomes));
    }
    let elements = grid_elements(eps);
    let free = outcomes - 1;
    let done = free > 0 && elements.is_empty();
    Ok(GridPovms { elements, idx: vec![0; free], done })
}

/// Lazy stream returned by [`grid_extremal_povms`].
pub struct GridPovms {
    elements: Vec<Sym2>,
    idx: Vec<usize>,
    done: bool,
}

impl GridPovms {
    fn advance(&mut self) {
        for i in (0..self.idx.len()).rev() {
            self.idx[i] += 1;
            if self.idx[i] < self.elements.len() {
                return;
            }
            self.idx[i] = 0;
        }
        self.done = true;
    }
}

impl Iterator for GridPovms {
    type Item = Povm;

    fn next(&mut self) -> Option<Povm> {
        while !self.done {
            let chosen: Vec<Sym2> = self.idx.iter().map(|&i| self.elements[i]).collect();
            self.advance();
            if self.idx.is_empty() {
                self.done = true;
            }
            let last = Sym2::IDENTITY - chosen.iter().copied().sum::<Sym2>();
            if last.is_psd(POVM_TOL) {
                let mut els = chosen;
                els.push(last);
                return Some(Povm::new_unchecked(els));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_basis_on_coarse_grid() {
        let all: Vec<Povm> = grid_extremal_povms(0.5, 2).unwrap().collect();
        assert!(all.iter().any(|p| p.elements()[0] == Sym2::new(1.0, 0.0, 0.0) && p.elements()[1] == Sym2::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn streamed_povms_are_valid() {
        for outcomes in 1..=3 {
            for p in grid_extremal_povms(0.25, outcomes).unwrap() {
                assert_eq!(p.len(), outcomes);
                Povm::new(p.elements().to_vec()).unwrap();
            }
        }
    }

    #[test]
    fn count_matches_nested_loops() {
        // Independent enumeration over integer grid coordinates.
        let n = 4i64;
        let mut count = 0;
        for a in 0..=n {
            for b in -n / 2..=n / 2 {
                for c in 0..=n {
                    let psd = a * c >= b * b;
                    let comp = (n - a) * (n - c) >= b * b;
                    if psd && comp {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(grid_extremal_povms(0.25, 2).unwrap().count(), count);
    }

    #[test]
    fn single_outcome_is_identity() {
        let all: Vec<Povm> = grid_extremal_povms(0.1, 1).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].elements(), &[Sym2::IDENTITY]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(grid_extremal_povms(0.0, 2).is_err());
        assert!(grid_extremal_povms(-1.0, 2).is_err());
        assert!(grid_extremal_povms(0.5, 5).is_err());
        assert!(grid_extremal_povms(0.5, 0).is_err());
    }

    #[test]
    fn order_is_deterministic() {
        let a: Vec<Povm> = grid_extremal_povms(0.5, 3).unwrap().collect();
        let b: Vec<Povm> = grid_extremal_povms(0.5, 3).unwrap().collect();
        assert_eq!(a, b);
    }
}
