//! Certified grid search with progressive refinement.
//!
//! The QRAC states are real, so replacing each POVM element by its real part
//! changes no outcome probability; real POVMs suffice. Real symmetric 2×2
//! matrices form a 3-dimensional space, so an extremal real POVM has at most
//! 3 linearly independent elements and every POVM is a mixture of such;
//! fewer outcomes appear as zero elements. The searched objectives are
//! convex under mixing (for `total`, through the bound described on
//! [`Objective::bound_value`]), so the supremum over 3-outcome POVMs
//! `(M₁, M₂, I − M₁ − M₂)` is the supremum over all.
//!
//! Coordinates are integers at the fine resolution `N = 1/ε_fine`: entry
//! `a = i/N`, `b = −1/2 + j/N`, `c = k/N`. A cell is a box in the six free
//! coordinates. Each element term `Tr[MN]²/Tr[MD]` is convex wherever its
//! denominator is positive, so on a cell whose vertices all have positive
//! denominators the objective is convex and its maximum sits at one of the
//! 64 vertices. An element whose box reaches a nonpositive denominator is
//! bounded by its linear majorant instead, which keeps the sum convex.
//! Coarse cells are halved along every axis until unit width; cells whose
//! bound falls below the best value found are discarded.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::Sym2;

use super::corner::DEN_TOL;
use super::{analytic_seeds, Objective, Povm, Quantity};

/// Cells whose bound exceeds the best value found by at most this are
/// discarded; their bounds still enter the reported upper bound.
pub const PRUNE_TOL: f64 = 1e-9;
const VERTEX_PSD_TOL: f64 = 1e-12;
/// Outward slack on clipped interval ends, covering rounding.
const CLIP_TOL: f64 = 1e-12;
const CLIP_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub quantity: Quantity,
    pub eps_coarse: f64,
    pub eps_fine: f64,
    /// Abort once this many cells have been bounded. The coarse level always
    /// completes, so a partial report still carries a valid bound.
    pub max_cells: Option<u64>,
    /// Abort after this much wall-clock time.
    pub time_budget: Option<Duration>,
    /// Disable pruning (every cell is refined); used to validate pruning.
    pub prune: bool,
    /// Allow the trace-optimal linear majorant `Tr[M X]` as a cell bound.
    /// Without it the bound comes from refinement alone.
    pub dual_majorant: bool,
}

impl SearchConfig {
    pub fn new(quantity: Quantity, eps_coarse: f64, eps_fine: f64) -> Self {
        SearchConfig { quantity, eps_coarse, eps_fine, max_cells: None, time_budget: None, prune: true, dual_majorant: true }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search parameters: {0}")]
    InvalidParameters(String),
    #[error("search budget exhausted after {} cells; partial bound {:.6}", .partial.stats.cells_visited, .partial.corrected_bound)]
    BudgetExceeded { partial: Box<BoundReport> },
}

/// Whether a reported bound meets a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub set: &'static str,
    pub threshold: f64,
    /// `corrected_bound ≤ threshold`: the threshold is proven.
    pub certified: bool,
    /// `raw_max ≤ threshold`: no POVM found violates the threshold.
    pub consistent: bool,
}

/// Reference thresholds checked for each quantity.
pub fn threshold_sets(q: Quantity) -> [(&'static str, f64); 2] {
    match q {
        Quantity::Greater | Quantity::Conditional => [("A", 0.59), ("B", 0.58)],
        Quantity::Total => [("A", 0.65), ("B", 0.67)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStats {
    pub cells_visited: u64,
    /// Cells bounded on each level, coarse first.
    pub visited_per_level: Vec<u64>,
    /// Cells surviving pruning on each level.
    pub survivors_per_level: Vec<u64>,
    /// Cells a flat search at the fine step would need, counted rigorously
    /// from coarse cells lying entirely inside the POVM set.
    pub flat_net_cells_lower_bound: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub quantity: Quantity,
    /// Best value attained by an explicit POVM (grid vertex or analytic seed).
    pub raw_max: f64,
    /// Best value attained on the grid alone.
    pub raw_max_grid: f64,
    /// Certified upper bound on the quantity over all POVMs.
    pub corrected_bound: f64,
    pub argmax_povm: Povm,
    pub argmax_source: String,
    pub net_epsilon: f64,
    pub coarse_epsilon: f64,
    pub level_epsilons: Vec<f64>,
    pub refinement_levels: usize,
    pub outcomes: usize,
    pub complete: bool,
    pub stats: SearchStats,
    pub thresholds: Vec<ThresholdCheck>,
}

/// Six free coordinates: `(a, b, c)` of `M₁` then of `M₂`.
type Coords = [u32; 6];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    lo: Coords,
    w: Coords,
}

/// A raw value with a deterministic tie-break key (smaller key wins ties).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    value: f64,
    /// Seed index, or `SEED_NONE` and the vertex coordinates.
    key: (u8, [u32; 6]),
}

const SEED_NONE: u8 = u8::MAX - 1;

impl Candidate {
    const NONE: Candidate = Candidate { value: f64::NEG_INFINITY, key: (u8::MAX, [u32::MAX; 6]) };

    fn better(self, o: Candidate) -> Candidate {
        match self.value.total_cmp(&o.value) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => o,
            std::cmp::Ordering::Equal => {
                if self.key <= o.key {
                    self
                } else {
                    o
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Acc {
    max_upper: f64,
    best: Candidate,
    visited: Vec<u64>,
    survivors: Vec<u64>,
}

impl Acc {
    fn new(levels: usize) -> Self {
        Acc { max_upper: f64::NEG_INFINITY, best: Candidate::NONE, visited: vec![0; levels], survivors: vec![0; levels] }
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.max_upper = self.max_upper.max(o.max_upper);
        self.best = self.best.better(o.best);
        for (a, b) in self.visited.iter_mut().zip(&o.visited) {
            *a += b;
        }
        for (a, b) in self.survivors.iter_mut().zip(&o.survivors) {
            *a += b;
        }
        self
    }
}

struct Ctx {
    obj: Objective,
    flat: Flat,
    /// Fine resolution `N`.
    n: u32,
    levels: usize,
    /// Current pruning threshold, as `f64` bits; only ever raised.
    threshold: AtomicU64,
    prune: bool,
    /// `bound_value(Tr X)`, a bound on every cell; infinite when disabled.
    dual_bound: f64,
    visited: AtomicU64,
    stop: AtomicBool,
    max_cells: Option<u64>,
    deadline: Option<Instant>,
}

impl Ctx {
    fn threshold(&self) -> f64 {
        f64::from_bits(self.threshold.load(Ordering::Relaxed))
    }

    fn raise(&self, v: f64) {
        let mut cur = self.threshold.load(Ordering::Relaxed);
        while v > f64::from_bits(cur) {
            match self.threshold.compare_exchange_weak(cur, v.to_bits(), Ordering::Relaxed, Ordering::Relaxed) {
                Ok(_) => return,
                Err(c) => cur = c,
            }
        }
    }

    fn keep(&self, bound: f64) -> bool {
        !self.prune || bound > self.threshold() + PRUNE_TOL
    }

    fn charge(&self, cells: u64) {
        let total = self.visited.fetch_add(cells, Ordering::Relaxed) + cells;
        let over_cells = self.max_cells.is_some_and(|m| total > m);
        let over_time = self.deadline.is_some_and(|d| Instant::now() > d);
        if over_cells || over_time {
            self.stop.store(true, Ordering::Relaxed);
        }
    }
}

/// Matrix from integer coordinates; `b_num` is the numerator of `b` over `2N`.
#[inline]
fn from_ints(a: i64, b_num: i64, c: i64, n: f64) -> Sym2 {
    Sym2::new(a as f64 / n, b_num as f64 / (2.0 * n), c as f64 / n)
}

/// Lower corner of a free element's box.
fn free_lower(lo: &[u32], n: u32) -> Sym2 {
    from_ints(lo[0] as i64, 2 * lo[1] as i64 - n as i64, lo[2] as i64, n as f64)
}

/// Closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Iv {
    lo: f64,
    hi: f64,
}

impl Iv {
    fn new(lo: f64, hi: f64) -> Self {
        Iv { lo, hi }
    }

    fn meet(&mut self, o: Iv) {
        self.lo = self.lo.max(o.lo - CLIP_TOL);
        self.hi = self.hi.min(o.hi + CLIP_TOL);
    }

    fn is_empty(self) -> bool {
        !(self.lo <= self.hi)
    }

    /// `|x|` minimized over the interval.
    fn min_abs(self) -> f64 {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }
}

/// Entry ranges `(a, b, c)` of one element.
type IvBox = [Iv; 3];

/// Shrinks an element box to an outer box of its part inside `{0 ≤ M ≤ I}`.
/// Returns `false` if that part is empty.
fn clip_element(x: &mut IvBox) -> bool {
    let [a, b, c] = x;
    a.meet(Iv::new(0.0, 1.0));
    c.meet(Iv::new(0.0, 1.0));
    if a.is_empty() || c.is_empty() {
        return false;
    }
    // |b| ≤ √(ac) and |b| ≤ √((1−a)(1−c)).
    let lim = (a.hi.max(0.0) * c.hi.max(0.0)).sqrt().min(((1.0 - a.lo).max(0.0) * (1.0 - c.lo).max(0.0)).sqrt());
    b.meet(Iv::new(-lim, lim));
    if b.is_empty() {
        return false;
    }
    let bb = b.min_abs().powi(2);
    if bb > 0.0 {
        if c.hi > 0.0 {
            a.lo = a.lo.max(bb / c.hi - CLIP_TOL);
        }
        if a.hi > 0.0 {
            c.lo = c.lo.max(bb / a.hi - CLIP_TOL);
        }
        if c.lo < 1.0 {
            a.hi = a.hi.min(1.0 - bb / (1.0 - c.lo) + CLIP_TOL);
        }
        if a.lo < 1.0 {
            c.hi = c.hi.min(1.0 - bb / (1.0 - a.lo) + CLIP_TOL);
        }
    }
    !(a.is_empty() || c.is_empty())
}

/// `I − x − y` entrywise on intervals.
fn complement(x: &IvBox, y: &IvBox) -> IvBox {
    [
        Iv::new(1.0 - x[0].hi - y[0].hi, 1.0 - x[0].lo - y[0].lo),
        Iv::new(-x[1].hi - y[1].hi, -x[1].lo - y[1].lo),
        Iv::new(1.0 - x[2].hi - y[2].hi, 1.0 - x[2].lo - y[2].lo),
    ]
}

fn meet_box(x: &mut IvBox, y: IvBox) -> bool {
    for i in 0..3 {
        x[i].meet(y[i]);
        if x[i].is_empty() {
            return false;
        }
    }
    true
}

/// Entry ranges of `M₁` and `M₂` over a cell.
fn cell_boxes(cell: &Cell, n: u32) -> [IvBox; 2] {
    let nf = n as f64;
    [0, 1].map(|e| {
        let lo = free_lower(&cell.lo[3 * e..3 * e + 3], n);
        let w = |i: usize| cell.w[3 * e + i] as f64 / nf;
        [Iv::new(lo.a, lo.a + w(0)), Iv::new(lo.b, lo.b + w(1)), Iv::new(lo.c, lo.c + w(2))]
    })
}

/// Outer boxes for `M₁, M₂` containing every POVM of the cell, or `None` if
/// the cell holds no POVM.
fn clip_cell(cell: &Cell, n: u32) -> Option<[IvBox; 2]> {
    let [mut x, mut y] = cell_boxes(cell, n);
    for _ in 0..CLIP_ROUNDS {
        if !clip_element(&mut x) || !clip_element(&mut y) {
            return None;
        }
        let mut z = complement(&x, &y);
        if !clip_element(&mut z) {
            return None;
        }
        if !meet_box(&mut x, complement(&y, &z)) || !meet_box(&mut y, complement(&x, &z)) {
            return None;
        }
    }
    Some([x, y])
}

#[derive(Debug, Clone, Copy)]
struct ElementEval {
    exact: [f64; 2],
    psd: bool,
}

#[inline]
fn eval_element(obj: &Objective, m: Sym2) -> ElementEval {
    ElementEval { exact: obj.exact_terms(m), psd: m.is_psd(VERTEX_PSD_TOL) }
}

#[inline]
fn bit(v: usize, i: usize) -> usize {
    (v >> (2 - i)) & 1
}

/// Most linear functionals any objective uses (`conditional`: 2 × 2 × 3 plus
/// two dual majorants).
const MAX_FUNCTIONALS: usize = 14;
const MAX_GROUPS: usize = 4;

/// The objective as linear functionals `Tr[M F_k]` plus the arithmetic that
/// turns their values into element terms. Values of the last element follow
/// from the free ones by `Tr[(I − M₁ − M₂) F] = Tr F − Tr[M₁F] − Tr[M₂F]`.
struct Flat {
    fs: Vec<Sym2>,
    traces: [f64; MAX_FUNCTIONALS],
    /// `(component, denominator, numerators, κ)` per group.
    groups: Vec<(usize, usize, [usize; 2], [f64; 2])>,
    /// Functionals of the bound-side dual majorants.
    dual: [usize; 2],
}

type Values = [f64; MAX_FUNCTIONALS];

#[derive(Debug, Clone, Copy)]
struct Parts {
    terms: [f64; 2],
    lin: [f64; 2],
    dual: [f64; 2],
    min_den: f64,
}

impl Flat {
    fn new(obj: &Objective) -> Self {
        let mut fs = Vec::new();
        let mut groups = Vec::new();
        for (comp, gs) in obj.comps.iter().enumerate() {
            for g in gs {
                assert_eq!(g.ns.len(), 2, "every conditioning group has two numerators");
                let d = fs.len();
                fs.push(g.d);
                fs.push(g.ns[0]);
                fs.push(g.ns[1]);
                groups.push((comp, d, [d + 1, d + 2], [g.kappas[0], g.kappas[1]]));
            }
        }
        let dual = [fs.len(), fs.len() + 1];
        fs.extend(obj.dual);
        assert!(fs.len() <= MAX_FUNCTIONALS && groups.len() <= MAX_GROUPS);
        let mut traces = [0.0; MAX_FUNCTIONALS];
        for (t, f) in traces.iter_mut().zip(&fs) {
            *t = f.trace();
        }
        Flat { fs, traces, groups, dual }
    }

    #[inline]
    fn values(&self, m: Sym2) -> Values {
        let mut v = [0.0; MAX_FUNCTIONALS];
        for (x, f) in v.iter_mut().zip(&self.fs) {
            *x = m.trace_product(*f);
        }
        v
    }

    #[inline]
    fn complement(&self, x: &Values, y: &Values) -> Values {
        let mut v = [0.0; MAX_FUNCTIONALS];
        for k in 0..self.fs.len() {
            v[k] = self.traces[k] - x[k] - y[k];
        }
        v
    }

    #[inline]
    fn parts(&self, v: &Values) -> Parts {
        let mut p = Parts { terms: [0.0; 2], lin: [0.0; 2], dual: [v[self.dual[0]], v[self.dual[1]]], min_den: f64::INFINITY };
        for &(comp, d, [n0, n1], [k0, k1]) in &self.groups {
            let den = v[d];
            if den > 0.0 {
                p.terms[comp] += (v[n0] * v[n0] + v[n1] * v[n1]) / den;
            }
            p.lin[comp] += k0 * v[n0] + k1 * v[n1];
            p.min_den = p.min_den.min(den);
        }
        p
    }
}

/// Upper bound on the objective over the boxes: the maximum over their 64
/// joint vertices of a convex majorant.
fn bound_boxes(ctx: &Ctx, boxes: &[IvBox; 2]) -> f64 {
    // With the dual majorant on all three elements the sum is exactly Tr X.
    if ctx.dual_bound <= ctx.threshold() + PRUNE_TOL {
        return ctx.dual_bound;
    }
    let flat = &ctx.flat;
    let corner = |x: &IvBox, v: usize| {
        let e = |i: usize| if bit(v, i) == 1 { x[i].hi } else { x[i].lo };
        Sym2::new(e(0), e(1), e(2))
    };
    let vals: [[Values; 8]; 2] = [0, 1].map(|e| std::array::from_fn(|v| flat.values(corner(&boxes[e], v))));
    let free: [[Parts; 8]; 2] = [0, 1].map(|e| std::array::from_fn(|v| flat.parts(&vals[e][v])));
    let last: [[Parts; 8]; 8] =
        std::array::from_fn(|v1| std::array::from_fn(|v2| flat.parts(&flat.complement(&vals[0][v1], &vals[1][v2]))));
    // Each element's bound-side term may be replaced by any majorant that is
    // convex on the box: the exact terms (where all denominators are
    // positive) or a linear majorant. Every assignment gives a valid
    // bound; the smallest over all 27 is used, per component.
    let obj = &ctx.obj;
    let dual = ctx.dual_bound.is_finite();
    let options = |p: &Parts| [obj.bound_terms(p.terms), obj.bound_terms(p.lin), if dual { p.dual } else { [f64::INFINITY; 2] }];
    let exact_ok = [
        free[0].iter().all(|p| p.min_den > DEN_TOL),
        free[1].iter().all(|p| p.min_den > DEN_TOL),
        last.iter().flatten().all(|p| p.min_den > DEN_TOL),
    ];
    let o1: [[[f64; 2]; 3]; 8] = std::array::from_fn(|v| options(&free[0][v]));
    let o2: [[[f64; 2]; 3]; 8] = std::array::from_fn(|v| options(&free[1][v]));
    let mut sup = [f64::INFINITY; 2];
    for m1 in 0..3 {
        if m1 == 0 && !exact_ok[0] {
            continue;
        }
        for m2 in 0..3 {
            if m2 == 0 && !exact_ok[1] {
                continue;
            }
            for m3 in 0..3 {
                if m3 == 0 && !exact_ok[2] {
                    continue;
                }
                let mut hi = [f64::NEG_INFINITY; 2];
                for v1 in 0..8 {
                    for v2 in 0..8 {
                        let o3 = options(&last[v1][v2])[m3];
                        for s in 0..2 {
                            hi[s] = hi[s].max(o1[v1][m1][s] + o2[v2][m2][s] + o3[s]);
                        }
                    }
                }
                sup = [sup[0].min(hi[0]), sup[1].min(hi[1])];
            }
        }
    }
    obj.bound_value(sup.map(|s| s.max(f64::MIN_POSITIVE)))
}

fn vertex_ints(cell: &Cell, e: usize, v: usize) -> [i64; 3] {
    [0, 1, 2].map(|i| (cell.lo[3 * e + i] + bit(v, i) as u32 * cell.w[3 * e + i]) as i64)
}

/// Best raw value among the grid vertices of a cell that are POVMs, and
/// whether all 64 of them are.
fn grid_vertices(ctx: &Ctx, cell: &Cell) -> (Candidate, bool) {
    let n = ctx.n as i64;
    let nf = ctx.n as f64;
    let obj = &ctx.obj;
    let free: [[(ElementEval, [i64; 3]); 8]; 2] = [0, 1].map(|e| {
        std::array::from_fn(|v| {
            let x = vertex_ints(cell, e, v);
            (eval_element(obj, from_ints(x[0], 2 * x[1] - n, x[2], nf)), x)
        })
    });
    let mut best = Candidate::NONE;
    let mut all_valid = true;
    for (e1, x) in &free[0] {
        for (e2, y) in &free[1] {
            let m3 = from_ints(n - x[0] - y[0], 2 * (n - x[1] - y[1]), n - x[2] - y[2], nf);
            let e3 = eval_element(obj, m3);
            if e1.psd && e2.psd && e3.psd {
                let value = obj.value([e1.exact[0] + e2.exact[0] + e3.exact[0], e1.exact[1] + e2.exact[1] + e3.exact[1]]);
                let key = [x[0], x[1], x[2], y[0], y[1], y[2]].map(|c| c as u32);
                best = best.better(Candidate { value, key: (SEED_NONE, key) });
            } else {
                all_valid = false;
            }
        }
    }
    (best, all_valid)
}

/// Vertex key back to a POVM.
fn povm_from_key(key: [u32; 6], n: u32) -> Povm {
    let (nf, n) = (n as f64, n as i64);
    let k = key.map(|c| c as i64);
    let m1 = from_ints(k[0], 2 * k[1] - n, k[2], nf);
    let m2 = from_ints(k[3], 2 * k[4] - n, k[5], nf);
    let m3 = from_ints(n - k[0] - k[3], 2 * (n - k[1] - k[4]), n - k[2] - k[5], nf);
    Povm::new_unchecked(vec![m1, m2, m3])
}

/// Halves every axis of width above one.
fn children(cell: &Cell) -> Vec<Cell> {
    let mut out = vec![*cell];
    for i in 0..6 {
        let w = cell.w[i];
        if w <= 1 {
            continue;
        }
        let h = w / 2;
        out = out
            .into_iter()
            .flat_map(|c| {
                let mut lo = c;
                lo.w[i] = h;
                let mut hi = c;
                hi.lo[i] += h;
                hi.w[i] = w - h;
                [lo, hi]
            })
            .collect();
    }
    out
}

/// Bounds the children of a surviving cell at `depth` and refines their subtrees.
fn refine(ctx: &Ctx, depth: usize, cell: Cell, upper: f64) -> Acc {
    let mut acc = Acc::new(ctx.levels);
    if cell.w.iter().all(|&w| w == 1) {
        acc.max_upper = upper;
        return acc;
    }
    if ctx.stop.load(Ordering::Relaxed) {
        // Out of budget: the parent's bound stands for the whole subtree.
        acc.max_upper = upper;
        return acc;
    }
    let mut kept = Vec::new();
    let mut count = 0u64;
    for child in children(&cell) {
        let Some(boxes) = clip_cell(&child, ctx.n) else { continue };
        count += 1;
        if child.w.iter().all(|&w| w == 1) {
            let (best, _) = grid_vertices(ctx, &child);
            acc.best = acc.best.better(best);
            ctx.raise(best.value);
        }
        let bound = bound_boxes(ctx, &boxes).min(upper);
        if ctx.keep(bound) {
            kept.push((child, bound));
        } else {
            acc.max_upper = acc.max_upper.max(bound);
        }
    }
    ctx.charge(count);
    acc.visited[depth + 1] += count;
    acc.survivors[depth + 1] += kept.len() as u64;
    let sub = kept
        .into_par_iter()
        .map(|(child, bound)| refine(ctx, depth + 1, child, bound))
        .reduce(|| Acc::new(ctx.levels), Acc::merge);
    acc.merge(sub)
}

fn integer_ratio(x: f64, what: &str) -> Result<u32, SearchError> {
    let r = x.round();
    if !(r >= 1.0) || (x - r).abs() > 1e-9 * r.max(1.0) || r > 100_000.0 {
        return Err(SearchError::InvalidParameters(format!("{what} = {x} must be a positive integer")));
    }
    Ok(r as u32)
}

/// Cell widths (in fine units) on each level, coarse first.
fn level_widths(ratio: u32) -> Vec<u32> {
    let mut out = vec![ratio];
    let mut w = ratio;
    while w > 1 {
        w -= w / 2;
        out.push(w);
    }
    out
}

/// Certified upper bound on one leakage quantity over all qubit POVMs.
pub fn search_bounds(config: &SearchConfig) -> Result<BoundReport, SearchError> {
    let start = Instant::now();
    let (ec, ef) = (config.eps_coarse, config.eps_fine);
    if !(ec > 0.0 && ef > 0.0 && ef <= ec && ec <= 1.0) {
        return Err(SearchError::InvalidParameters(format!("need 0 < eps_fine ≤ eps_coarse ≤ 1, got {ec}, {ef}")));
    }
    let n0 = integer_ratio(1.0 / ec, "1/eps_coarse")?;
    let ratio = integer_ratio(ec / ef, "eps_coarse/eps_fine")?;
    let n = n0
        .checked_mul(ratio)
        .filter(|&n| n <= 100_000)
        .ok_or_else(|| SearchError::InvalidParameters(format!("fine resolution {n0}·{ratio} is too large")))?;
    let widths = level_widths(ratio);
    let levels = widths.len();
    let obj = Objective::new(config.quantity);

    // Seeds give the initial pruning threshold.
    let mut best = Candidate::NONE;
    let seeds = analytic_seeds();
    for (i, (_, p)) in seeds.iter().enumerate() {
        best = best.better(Candidate { value: obj.eval(p), key: (i as u8, [0; 6]) });
    }
    let ctx = Ctx {
        flat: Flat::new(&obj),
        n,
        levels,
        threshold: AtomicU64::new(best.value.to_bits()),
        prune: config.prune,
        dual_bound: if config.dual_majorant { obj.bound_value(obj.dual.map(|x| x.trace())) } else { f64::INFINITY },
        visited: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        max_cells: config.max_cells,
        deadline: config.time_budget.map(|d| start + d),
        obj,
    };

    // Coarse level: all feasible box pairs with box₁ ≤ box₂.
    let w0 = 1.0 / n0 as f64;
    let mut boxes: Vec<[u32; 3]> = Vec::new();
    for a in 0..n0 {
        for b in 0..n0 {
            for c in 0..n0 {
                let lo = [a * ratio, b * ratio, c * ratio];
                let m = free_lower(&lo, n);
                if clip_element(&mut [Iv::new(m.a, m.a + w0), Iv::new(m.b, m.b + w0), Iv::new(m.c, m.c + w0)]) {
                    boxes.push(lo);
                }
            }
        }
    }
    let coarse: Vec<(Vec<(Cell, f64)>, Candidate, u64, u64)> = (0..boxes.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let mut cand = Candidate::NONE;
            let (mut count, mut inside) = (0u64, 0u64);
            for (j, b2) in boxes.iter().enumerate().skip(i) {
                let b1 = boxes[i];
                let cell = Cell { lo: [b1[0], b1[1], b1[2], b2[0], b2[1], b2[2]], w: [ratio; 6] };
                let Some(clipped) = clip_cell(&cell, n) else { continue };
                count += 1;
                let (best, all_valid) = grid_vertices(&ctx, &cell);
                cand = cand.better(best);
                if all_valid {
                    inside += if i == j { 1 } else { 2 };
                }
                out.push((cell, bound_boxes(&ctx, &clipped)));
            }
            (out, cand, count, inside)
        })
        .collect();
    let mut acc = Acc::new(levels);
    let mut coarse_cells = Vec::new();
    let mut inside_cells = 0u64;
    for (cells, cand, count, inside) in coarse {
        best = best.better(cand);
        acc.best = acc.best.better(cand);
        acc.visited[0] += count;
        inside_cells += inside;
        coarse_cells.extend(cells);
    }
    ctx.raise(best.value);
    ctx.charge(acc.visited[0]);
    coarse_cells.retain(|&(_, b)| {
        let keep = ctx.keep(b);
        if !keep {
            acc.max_upper = acc.max_upper.max(b);
        }
        keep
    });
    acc.survivors[0] = coarse_cells.len() as u64;
    let single = levels == 1;
    if single {
        acc.max_upper = coarse_cells.iter().map(|&(_, b)| b).fold(acc.max_upper, f64::max);
    } else {
        let sub = coarse_cells
            .into_par_iter()
            .map(|(cell, bound)| refine(&ctx, 0, cell, bound))
            .reduce(|| Acc::new(levels), Acc::merge);
        acc = acc.merge(sub);
    }
    let raw_max_grid = acc.best.value;
    let best = best.better(acc.best);

    let (argmax_povm, argmax_source) = if (best.key.0 as usize) < seeds.len() {
        (seeds[best.key.0 as usize].1.clone(), format!("seed:{}", seeds[best.key.0 as usize].0))
    } else {
        (povm_from_key(best.key.1, n), "grid".to_string())
    };
    let corrected_bound = best.value.max(acc.max_upper);
    let complete = !ctx.stop.load(Ordering::Relaxed);
    let thresholds = threshold_sets(config.quantity)
        .into_iter()
        .map(|(set, threshold)| ThresholdCheck {
            set,
            threshold,
            certified: corrected_bound <= threshold,
            consistent: best.value <= threshold,
        })
        .collect();
    let report = BoundReport {
        quantity: config.quantity,
        raw_max: best.value,
        raw_max_grid,
        corrected_bound,
        argmax_povm,
        argmax_source,
        net_epsilon: ef,
        coarse_epsilon: ec,
        level_epsilons: widths.iter().map(|&w| w as f64 / n as f64).collect(),
        refinement_levels: levels - 1,
        outcomes: 3,
        complete,
        stats: SearchStats {
            cells_visited: acc.visited.iter().sum(),
            visited_per_level: acc.visited,
            survivors_per_level: acc.survivors,
            flat_net_cells_lower_bound: inside_cells as f64 * (ratio as f64).powi(6),
            elapsed_seconds: start.elapsed().as_secs_f64(),
        },
        thresholds,
    };
    if complete {
        Ok(report)
    } else {
        Err(SearchError::BudgetExceeded { partial: Box::new(report) })
    }
}
