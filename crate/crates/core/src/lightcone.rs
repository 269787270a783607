//! Grid geometry for shallow local circuits.
//!
//! Qubits sit on a `D`-dimensional grid of `side^D` sites, indexed row-major
//! with axis 0 most significant. A depth-`d` circuit of `ℓ`-local gates is
//! represented only by its reach: the reverse light cone of a qubit is taken
//! to be the L∞ ball of radius `ℓ^d` around it, clipped to the grid. At
//! `d = 0` that radius is `ℓ⁰ = 1`.
//!
//! The grid is tiled by outer hypercubes of side `2r + 2ℓ^d`; each holds an
//! inner cube of side `2r` at offset `ℓ^d`, and the rest is its shell.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

/// Largest grid built explicitly.
pub const MAX_GRID_QUBITS: u64 = 1 << 24;
/// Largest radius tried by [`find_feasible_params`].
pub const MAX_FEASIBLE_RADIUS: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LightconeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("side {side} is not a multiple of the outer cube side {outer}")]
    NotDivisible { side: u64, outer: u64 },
    #[error("qubit {qubit} outside a grid of {n} qubits")]
    QubitOutOfRange { qubit: u64, n: u64 },
    #[error("inner-cube qubit {0} has no outcome")]
    Unassigned(u64),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("no feasible radius up to {MAX_FEASIBLE_RADIUS}")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub dim: u32,
    pub side: u64,
    pub ell: u64,
    pub depth: u32,
}

impl GridSpec {
    pub fn new(dim: u32, side: u64, ell: u64, depth: u32) -> Result<Self, LightconeError> {
        if dim == 0 || side == 0 || ell < 2 {
            return Err(LightconeError::InvalidGrid(format!("need D ≥ 1, side ≥ 1, ℓ ≥ 2; got D={dim}, side={side}, ℓ={ell}")));
        }
        cone_radius(ell, depth)?;
        side.checked_pow(dim).ok_or_else(|| LightconeError::InvalidGrid(format!("{side}^{dim} overflows")))?;
        Ok(GridSpec { dim, side, ell, depth })
    }

    pub fn n(&self) -> u64 {
        self.side.pow(self.dim)
    }

    /// `ℓ^d`.
    pub fn radius(&self) -> u64 {
        self.ell.pow(self.depth)
    }

    pub fn coords(&self, qubit: u64) -> Vec<u64> {
        let mut c = vec![0; self.dim as usize];
        let mut q = qubit;
        for x in c.iter_mut().rev() {
            *x = q % self.side;
            q /= self.side;
        }
        c
    }

    pub fn index(&self, coords: &[u64]) -> u64 {
        coords.iter().fold(0, |acc, &x| acc * self.side + x)
    }

    fn check_qubit(&self, qubit: u64) -> Result<(), LightconeError> {
        if qubit >= self.n() {
            return Err(LightconeError::QubitOutOfRange { qubit, n: self.n() });
        }
        Ok(())
    }
}

fn cone_radius(ell: u64, depth: u32) -> Result<u64, LightconeError> {
    ell.checked_pow(depth).ok_or_else(|| LightconeError::InvalidGrid(format!("{ell}^{depth} overflows")))
}

/// Every point of the box `lo..=hi` (per axis), in row-major order.
fn box_points(lo: &[u64], hi: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::with_capacity(lo.len())];
    for (&a, &b) in lo.iter().zip(hi) {
        out = out.into_iter().flat_map(|p| (a..=b).map(move |x| [p.as_slice(), &[x]].concat())).collect();
    }
    out
}

/// Clipped reverse light cone of `qubit`, sorted.
pub fn reverse_lightcone(grid: &GridSpec, qubit: u64) -> Result<Vec<u64>, LightconeError> {
    grid.check_qubit(qubit)?;
    let (lo, hi) = cone_box(grid, &grid.coords(qubit));
    Ok(box_points(&lo, &hi).iter().map(|c| grid.index(c)).collect())
}

fn cone_box(grid: &GridSpec, c: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let r = grid.radius();
    (c.iter().map(|&x| x.saturating_sub(r)).collect(), c.iter().map(|&x| (x + r).min(grid.side - 1)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypercubePartition {
    pub grid: GridSpec,
    pub r: u64,
    /// Gap between inner cube and outer boundary; `ℓ^d` for the standard partition.
    pub margin: u64,
    pub outer_side: u64,
    pub q: u64,
    /// Qubits of each inner cube `cu_j`, sorted.
    pub inner_cubes: Vec<Vec<u64>>,
    /// Qubits of each shell, sorted.
    pub shells: Vec<Vec<u64>>,
}

/// Standard partition with inner radius `r` and outer side `2r + 2ℓ^d`.
pub fn build_partition(grid: &GridSpec, r: u64) -> Result<HypercubePartition, LightconeError> {
    build_partition_with_margin(grid, r, grid.radius())
}

/// Partition whose outer cubes have side `2r + 2·margin`.
pub fn build_partition_with_margin(grid: &GridSpec, r: u64, margin: u64) -> Result<HypercubePartition, LightconeError> {
    if r == 0 {
        return Err(LightconeError::BadParameter("inner radius must be at least 1".into()));
    }
    if grid.n() > MAX_GRID_QUBITS {
        return Err(LightconeError::InvalidGrid(format!("{} qubits exceeds the limit of {MAX_GRID_QUBITS}", grid.n())));
    }
    let outer = 2 * r + 2 * margin;
    if grid.side % outer != 0 {
        return Err(LightconeError::NotDivisible { side: grid.side, outer });
    }
    let per_axis = grid.side / outer;
    let q = per_axis.pow(grid.dim);
    let cube_grid = GridSpec { side: per_axis, ..*grid };
    let mut inner_cubes = Vec::with_capacity(q as usize);
    let mut shells = Vec::with_capacity(q as usize);
    for j in 0..q {
        let base: Vec<u64> = cube_grid.coords(j).iter().map(|&x| x * outer).collect();
        let mut inner = Vec::new();
        let mut shell = Vec::new();
        let hi: Vec<u64> = base.iter().map(|&x| x + outer - 1).collect();
        for c in box_points(&base, &hi) {
            let inside = c.iter().zip(&base).all(|(&x, &b)| x >= b + margin && x < b + margin + 2 * r);
            let idx = grid.index(&c);
            if inside {
                inner.push(idx);
            } else {
                shell.push(idx);
            }
        }
        inner.sort_unstable();
        shell.sort_unstable();
        inner_cubes.push(inner);
        shells.push(shell);
    }
    Ok(HypercubePartition { grid: *grid, r, margin, outer_side: outer, q, inner_cubes, shells })
}

impl HypercubePartition {
    /// Cube holding each qubit.
    pub fn cube_of(&self, qubit: u64) -> u64 {
        let per_axis = self.grid.side / self.outer_side;
        self.grid.coords(qubit).iter().fold(0, |acc, &x| acc * per_axis + x / self.outer_side)
    }

    fn cube_box(&self, j: u64) -> (Vec<u64>, Vec<u64>) {
        let cube_grid = GridSpec { side: self.grid.side / self.outer_side, ..self.grid };
        let lo: Vec<u64> = cube_grid.coords(j).iter().map(|&x| x * self.outer_side).collect();
        let hi = lo.iter().map(|&x| x + self.outer_side - 1).collect();
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub pass: bool,
    pub checked: u64,
    /// First `(inner qubit, cone qubit outside its cube)` found.
    pub counterexample: Option<(u64, u64)>,
}

/// Checks that the reverse light cone of every inner-cube qubit stays inside
/// its outer cube.
pub fn certify_independence(part: &HypercubePartition) -> IndependenceReport {
    let grid = &part.grid;
    let mut checked = 0;
    for (j, cube) in part.inner_cubes.iter().enumerate() {
        let (lo, hi) = part.cube_box(j as u64);
        for &qubit in cube {
            checked += 1;
            let (clo, chi) = cone_box(grid, &grid.coords(qubit));
            let escaped = (0..clo.len()).find(|&i| clo[i] < lo[i] || chi[i] > hi[i]);
            if let Some(axis) = escaped {
                let mut c = grid.coords(qubit);
                c[axis] = if clo[axis] < lo[axis] { clo[axis] } else { chi[axis] };
                return IndependenceReport { pass: false, checked, counterexample: Some((qubit, grid.index(&c))) };
            }
        }
    }
    IndependenceReport { pass: true, checked, counterexample: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellCounts {
    /// `|CU| = q·(2r)^D`.
    pub cu: u64,
    /// `|CU_bar| = n − |CU|`.
    pub cu_bar: u64,
    pub q: u64,
    /// `|CU_bar| / n = 1 − (2r)^D / (2r + 2·margin)^D`.
    pub shell_fraction: f64,
}

/// Closed-form counts of a partition.
pub fn shell_accounting(part: &HypercubePartition) -> ShellCounts {
    shell_counts(part.grid.dim, part.r, part.margin, part.q)
}

fn shell_counts(dim: u32, r: u64, margin: u64, q: u64) -> ShellCounts {
    let inner = (2 * r).pow(dim);
    let outer = (2 * r + 2 * margin).pow(dim);
    ShellCounts { cu: q * inner, cu_bar: q * (outer - inner), q, shell_fraction: 1.0 - inner as f64 / outer as f64 }
}

/// Outcomes of the inner-cube qubits grouped by cube, each group in qubit order.
pub fn regroup_measurements<T: Clone>(
    part: &HypercubePartition,
    outcomes: &HashMap<u64, T>,
) -> Result<Vec<Vec<(u64, T)>>, LightconeError> {
    part.inner_cubes
        .iter()
        .map(|cube| {
            cube.iter().map(|&q| outcomes.get(&q).map(|o| (q, o.clone())).ok_or(LightconeError::Unassigned(q))).collect()
        })
        .collect()
}

/// Parameters with both constraints evaluated by substitution:
///
/// `2|cu| + 2 log(1/ε′) + log(1/ε″) + 4|CU_bar| + (2r)^D ≤ n/100` (size) and
/// `|CU_bar| ≥ log(1/ε′)` (shell).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityWitness {
    pub dim: u32,
    pub ell: u64,
    pub depth: u32,
    pub log_inv_eps1: f64,
    pub log_inv_eps2: f64,
    pub r: u64,
    pub outer_side: u64,
    pub q: u64,
    pub n: u64,
    pub cu_size: u64,
    pub cu_bar: u64,
    pub shell_fraction: f64,
    pub size_lhs: f64,
    pub size_rhs: f64,
    pub size_residual: f64,
    pub shell_lhs: f64,
    pub shell_rhs: f64,
    pub shell_residual: f64,
}

impl FeasibilityWitness {
    pub fn holds(&self) -> bool {
        self.size_residual >= 0.0 && self.shell_residual >= 0.0
    }
}

fn evaluate(dim: u32, ell: u64, depth: u32, l1: f64, l2: f64, r: u64, q: u64) -> Option<FeasibilityWitness> {
    let margin = ell.checked_pow(depth)?;
    let outer = (2 * r).checked_add(2 * margin)?;
    let outer_vol = outer.checked_pow(dim)?;
    let n = q.checked_mul(outer_vol)?;
    let c = shell_counts(dim, r, margin, q);
    let cu_size = (2 * r).pow(dim);
    // Integer part of the size constraint, scaled by 100 so that it is exact.
    let int_lhs = 100u128 * (3 * cu_size as u128 + 4 * c.cu_bar as u128);
    let size_lhs = (3 * cu_size + 4 * c.cu_bar) as f64 + 2.0 * l1 + l2;
    let size_rhs = n as f64 / 100.0;
    let log_part = 100.0 * (2.0 * l1 + l2);
    let size_ok = (n as u128) >= int_lhs && (n as u128 - int_lhs) as f64 >= log_part;
    let size_residual = if size_ok { ((n as u128 - int_lhs) as f64 - log_part) / 100.0 } else { (size_rhs - size_lhs).min(-0.0) };
    Some(FeasibilityWitness {
        dim,
        ell,
        depth,
        log_inv_eps1: l1,
        log_inv_eps2: l2,
        r,
        outer_side: outer,
        q,
        n,
        cu_size,
        cu_bar: c.cu_bar,
        shell_fraction: c.shell_fraction,
        size_lhs,
        size_rhs,
        size_residual,
        shell_lhs: c.cu_bar as f64,
        shell_rhs: l1,
        shell_residual: c.cu_bar as f64 - l1,
    })
}

/// Smallest inner radius `r` for which some grid size works, then the
/// smallest cube count `q` (so `n = q·(2r + 2ℓ^d)^D`) satisfying both
/// constraints.
///
/// A radius admits a size exactly when the shell fraction `φ` satisfies
/// `4φ < 1/100`; the size constraint then reads
/// `n·(1/100 − 4φ) ≥ 3(2r)^D + 2 log(1/ε′) + log(1/ε″)`.
pub fn find_feasible_params(eps1: f64, eps2: f64, ell: u64, depth: u32, dim: u32) -> Result<FeasibilityWitness, LightconeError> {
    for (name, e) in [("ε′", eps1), ("ε″", eps2)] {
        if !(e > 0.0 && e < 1.0) {
            return Err(LightconeError::BadParameter(format!("{name} = {e} must lie in (0, 1)")));
        }
    }
    GridSpec::new(dim, 1, ell, depth)?;
    let (l1, l2) = (-eps1.log2(), -eps2.log2());
    let margin = cone_radius(ell, depth)?;
    for r in 1..=MAX_FEASIBLE_RADIUS {
        let (Some(inner), Some(outer)) = ((2 * r).checked_pow(dim), (2 * r + 2 * margin).checked_pow(dim)) else {
            return Err(LightconeError::Infeasible);
        };
        // 4φ < 1/100  ⇔  400·(outer − inner) < outer.
        let shell = (outer - inner) as u128;
        if 400 * shell >= outer as u128 {
            continue;
        }
        // Size: q·(outer − 400·shell) ≥ 300·inner + 100·(2 log(1/ε′) + log(1/ε″)).
        // Shell: q·shell ≥ log(1/ε′).
        let slope = (outer as u128 - 400 * shell) as f64;
        let need = 300.0 * inner as f64 + 100.0 * (2.0 * l1 + l2);
        let q = ((need / slope).ceil() as u64).max((l1 / shell as f64).ceil() as u64);
        // Start just below the estimate to absorb rounding in the division.
        let mut q = q.saturating_sub(2).max(1);
        loop {
            let w = evaluate(dim, ell, depth, l1, l2, r, q).ok_or(LightconeError::Infeasible)?;
            if w.holds() {
                return Ok(w);
            }
            q += 1;
        }
    }
    Err(LightconeError::Infeasible)
}
