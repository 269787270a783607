//! Collision (Rényi-2) entropies and mutual information on dense joint tables.
//!
//! All logarithms are base 2. Conditioning events of probability zero
//! contribute nothing to any sum.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Total-mass tolerance accepted when loading a table.
pub const LOAD_MASS_TOL: f64 = 1e-9;
/// Largest table (number of cells) accepted from external input.
pub const MAX_TABLE_CELLS: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("variable {0:?} has alphabet size 0")]
    EmptyAlphabet(String),
    #[error("table has {actual} entries, alphabet product is {expected}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("total mass {0} differs from 1")]
    BadMass(f64),
    #[error("distribution has zero total mass")]
    ZeroMass,
    #[error("distributions are over different variables or alphabets")]
    AlphabetMismatch,
    #[error("value {value} out of range for variable {name:?} of size {size}")]
    ValueOutOfRange { name: String, value: usize, size: usize },
    #[error("table with {0} cells exceeds the limit")]
    TooLarge(usize),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub size: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Variable { name: name.into(), size }
    }
}

/// Dense probability table over named variables, row-major with the last
/// variable varying fastest. Total mass is 1 within 1e-12.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    variables: Vec<Variable>,
    #[serde(rename = "probabilities")]
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct JointJson {
    variables: Vec<Variable>,
    probabilities: Vec<f64>,
}

fn table_size(vars: &[Variable]) -> Result<usize, DistError> {
    let mut names = HashSet::new();
    let mut total: usize = 1;
    for v in vars {
        if !names.insert(v.name.as_str()) {
            return Err(DistError::DuplicateVariable(v.name.clone()));
        }
        if v.size == 0 {
            return Err(DistError::EmptyAlphabet(v.name.clone()));
        }
        total = total.checked_mul(v.size).filter(|&t| t <= MAX_TABLE_CELLS).ok_or(DistError::TooLarge(usize::MAX))?;
    }
    Ok(total)
}

impl JointDistribution {
    /// Validates a table whose mass is within [`LOAD_MASS_TOL`] of 1 and renormalizes it.
    pub fn new(variables: Vec<Variable>, probs: Vec<f64>) -> Result<Self, DistError> {
        let expected = table_size(&variables)?;
        if probs.len() != expected {
            return Err(DistError::ShapeMismatch { expected, actual: probs.len() });
        }
        if let Some(&bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(DistError::InvalidProbability(bad));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > LOAD_MASS_TOL {
            return Err(DistError::BadMass(mass));
        }
        Ok(JointDistribution { variables, probs: probs.into_iter().map(|p| p / mass).collect() })
    }

    /// Builds a table from nonnegative weights, normalizing them.
    pub fn from_weights(variables: Vec<Variable>, weights: Vec<f64>) -> Result<Self, DistError> {
        let expected = table_size(&variables)?;
        if weights.len() != expected {
            return Err(DistError::ShapeMismatch { expected, actual: weights.len() });
        }
        if let Some(&bad) = weights.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(DistError::InvalidProbability(bad));
        }
        let mass: f64 = weights.iter().sum();
        if mass <= 0.0 {
            return Err(DistError::ZeroMass);
        }
        Ok(JointDistribution { variables, probs: weights.into_iter().map(|p| p / mass).collect() })
    }

    /// Builds a table from a weight function of the value tuple.
    pub fn from_fn(variables: Vec<Variable>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self, DistError> {
        let n = table_size(&variables)?;
        let sizes: Vec<usize> = variables.iter().map(|v| v.size).collect();
        let mut idx = vec![0usize; sizes.len()];
        let mut w = Vec::with_capacity(n);
        for _ in 0..n {
            w.push(f(&idx));
            increment(&mut idx, &sizes);
        }
        Self::from_weights(variables, w)
    }

    pub fn uniform(variables: Vec<Variable>) -> Result<Self, DistError> {
        Self::from_fn(variables, |_| 1.0)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Result<usize, DistError> {
        self.variables.iter().position(|v| v.name == name).ok_or_else(|| DistError::UnknownVariable(name.into()))
    }

    pub fn size_of(&self, name: &str) -> Result<usize, DistError> {
        Ok(self.variables[self.position(name)?].size)
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.variables.len());
        idx.iter().zip(&self.variables).fold(0, |acc, (&i, v)| {
            assert!(i < v.size);
            acc * v.size + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.probs[self.flat_index(idx)]
    }

    /// Calls `f(values, p)` for every cell.
    pub fn for_each(&self, mut f: impl FnMut(&[usize], f64)) {
        let sizes: Vec<usize> = self.variables.iter().map(|v| v.size).collect();
        let mut idx = vec![0usize; sizes.len()];
        for &p in &self.probs {
            f(&idx, p);
            increment(&mut idx, &sizes);
        }
    }

    /// Marginal over `names`, with variables in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<JointDistribution, DistError> {
        let pos: Vec<usize> = names.iter().map(|n| self.position(n)).collect::<Result<_, _>>()?;
        let vars: Vec<Variable> = pos.iter().map(|&p| self.variables[p].clone()).collect();
        let n = table_size(&vars)?;
        let mut out = vec![0.0; n];
        self.for_each(|idx, p| {
            let j = pos.iter().zip(&vars).fold(0, |acc, (&q, v)| acc * v.size + idx[q]);
            out[j] += p;
        });
        Ok(JointDistribution { variables: vars, probs: out })
    }

    /// Distribution of the remaining variables given fixed values of some variables.
    pub fn condition(&self, fixed: &[(&str, usize)]) -> Result<JointDistribution, DistError> {
        let mut pos = Vec::with_capacity(fixed.len());
        for &(name, value) in fixed {
            let p = self.position(name)?;
            let size = self.variables[p].size;
            if value >= size {
                return Err(DistError::ValueOutOfRange { name: name.into(), value, size });
            }
            pos.push((p, value));
        }
        let keep: Vec<&str> = self
            .variables
            .iter()
            .enumerate()
            .filter(|(i, _)| !pos.iter().any(|(p, _)| p == i))
            .map(|(_, v)| v.name.as_str())
            .collect();
        let restricted = self.restrict(|idx| pos.iter().all(|&(p, v)| idx[p] == v));
        let slice = restricted.marginal_unnormalized(&keep)?;
        let vars = slice.0;
        Self::from_weights(vars, slice.1)
    }

    fn restrict(&self, keep: impl Fn(&[usize]) -> bool) -> JointDistribution {
        let mut probs = Vec::with_capacity(self.probs.len());
        self.for_each(|idx, p| probs.push(if keep(idx) { p } else { 0.0 }));
        JointDistribution { variables: self.variables.clone(), probs }
    }

    fn marginal_unnormalized(&self, names: &[&str]) -> Result<(Vec<Variable>, Vec<f64>), DistError> {
        let m = self.marginal(names)?;
        Ok((m.variables, m.probs))
    }

    /// Independent product; variable names must be disjoint.
    pub fn product(&self, other: &JointDistribution) -> Result<JointDistribution, DistError> {
        let mut vars = self.variables.clone();
        vars.extend(other.variables.iter().cloned());
        table_size(&vars)?;
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        for &p in &self.probs {
            for &q in &other.probs {
                probs.push(p * q);
            }
        }
        Ok(JointDistribution { variables: vars, probs })
    }

    /// Same table with variables renamed through `f`.
    pub fn rename(&self, mut f: impl FnMut(&str) -> String) -> Result<JointDistribution, DistError> {
        let vars: Vec<Variable> = self.variables.iter().map(|v| Variable::new(f(&v.name), v.size)).collect();
        table_size(&vars)?;
        Ok(JointDistribution { variables: vars, probs: self.probs.clone() })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DistError> {
        let j: JointJson = serde_json::from_str(s).map_err(|e| DistError::Parse(e.to_string()))?;
        Self::new(j.variables, j.probabilities)
    }

    /// One row per cell with nonzero mass: variable values then `prob`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.variables.iter().map(|v| v.name.clone()).collect();
        header.push("prob".into());
        w.write_record(&header).expect("in-memory write");
        self.for_each(|idx, p| {
            if p > 0.0 {
                let mut rec: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                rec.push(format!("{p:e}"));
                w.write_record(&rec).expect("in-memory write");
            }
        });
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// Parses CSV with a header of variable names followed by `prob`.
    ///
    /// Alphabet sizes are inferred as one more than the largest value seen;
    /// cells not listed have probability zero.
    pub fn from_csv(s: &str) -> Result<Self, DistError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(s.as_bytes());
        let header = r.headers().map_err(|e| DistError::Parse(e.to_string()))?.clone();
        // The trailing `prob` column name is optional.
        let named = if header.iter().last() == Some("prob") { header.len() - 1 } else { header.len() };
        if named == 0 || header.iter().take(named).any(str::is_empty) {
            return Err(DistError::Parse("header must list the variable names".into()));
        }
        let names: Vec<String> = header.iter().take(named).map(String::from).collect();
        let mut cells: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| DistError::Parse(e.to_string()))?;
            if rec.len() != named + 1 {
                return Err(DistError::Parse(format!("row has {} fields, expected {}", rec.len(), named + 1)));
            }
            let idx: Vec<usize> = rec
                .iter()
                .take(names.len())
                .map(|f| f.parse::<usize>().map_err(|e| DistError::Parse(format!("value {f:?}: {e}"))))
                .collect::<Result<_, _>>()?;
            let p: f64 = rec[names.len()].parse().map_err(|e| DistError::Parse(format!("probability: {e}")))?;
            if cells.insert(idx.clone(), p).is_some() {
                return Err(DistError::Parse(format!("duplicate row for values {idx:?}")));
            }
        }
        if cells.is_empty() {
            return Err(DistError::ZeroMass);
        }
        let mut sizes = vec![1usize; names.len()];
        for idx in cells.keys() {
            for (s, &i) in sizes.iter_mut().zip(idx) {
                *s = (*s).max(i.checked_add(1).ok_or(DistError::TooLarge(usize::MAX))?);
            }
        }
        let vars: Vec<Variable> = names.into_iter().zip(sizes).map(|(n, s)| Variable::new(n, s)).collect();
        let n = table_size(&vars)?;
        let mut probs = vec![0.0; n];
        let shell = JointDistribution { variables: vars.clone(), probs: vec![] };
        for (idx, p) in cells {
            probs[shell.flat_index(&idx)] = p;
        }
        Self::new(vars, probs)
    }
}

fn increment(idx: &mut [usize], sizes: &[usize]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < sizes[i] {
            return;
        }
        idx[i] = 0;
    }
}

/// Union of two name lists preserving first occurrence order.
fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for &n in a.iter().chain(b) {
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

/// Groups the marginal over `given ∪ target` by the values of `given` and
/// calls `f(block)` with the joint masses `p(x, y)` of each conditioning value `y`.
fn blocks(d: &JointDistribution, target: &[&str], given: &[&str], mut f: impl FnMut(&[f64])) -> Result<(), DistError> {
    let rest: Vec<&str> = target.iter().copied().filter(|t| !given.contains(t)).collect();
    let order = union(given, &rest);
    let m = d.marginal(&order)?;
    let block: usize = rest.iter().map(|n| d.size_of(n)).collect::<Result<Vec<_>, _>>()?.iter().product();
    for chunk in m.probs.chunks(block) {
        f(chunk);
    }
    Ok(())
}

/// `Σ_{x,y} p(x,y)²/p(y)`, the conditional collision probability.
fn collision_sum(d: &JointDistribution, target: &[&str], given: &[&str]) -> Result<f64, DistError> {
    let mut total = 0.0;
    blocks(d, target, given, |b| {
        let py: f64 = b.iter().sum();
        if py > 0.0 {
            total += b.iter().map(|p| p * p).sum::<f64>() / py;
        }
    })?;
    Ok(total)
}

/// `H_c(X) = −log₂ Σ_x p(x)²`.
pub fn collision_entropy(d: &JointDistribution, target: &[&str]) -> Result<f64, DistError> {
    conditional_collision_entropy(d, target, &[])
}

/// `H_c(X|Y) = −log₂ Σ_{x,y} p(x,y)·p(x|y)`.
pub fn conditional_collision_entropy(d: &JointDistribution, target: &[&str], given: &[&str]) -> Result<f64, DistError> {
    Ok(-collision_sum(d, target, given)?.log2())
}

/// `I_c(X:Y) = H_c(X) − H_c(X|Y)`.
pub fn collision_mi(d: &JointDistribution, x: &[&str], y: &[&str]) -> Result<f64, DistError> {
    conditional_collision_mi(d, x, y, &[])
}

/// `I_c(X:Y|Z) = H_c(X|Z) − H_c(X|Y,Z)`.
pub fn conditional_collision_mi(d: &JointDistribution, x: &[&str], y: &[&str], z: &[&str]) -> Result<f64, DistError> {
    let yz = union(y, z);
    Ok(conditional_collision_entropy(d, x, z)? - conditional_collision_entropy(d, x, &yz)?)
}

/// `H_∞(X) = −log₂ max_x p(x)`.
pub fn min_entropy(d: &JointDistribution, target: &[&str]) -> Result<f64, DistError> {
    avg_conditional_min_entropy(d, target, &[])
}

/// Average conditional min-entropy `−log₂ Σ_y max_x p(x,y)`.
pub fn avg_conditional_min_entropy(d: &JointDistribution, target: &[&str], given: &[&str]) -> Result<f64, DistError> {
    let mut guess = 0.0;
    blocks(d, target, given, |b| guess += b.iter().copied().fold(0.0, f64::max))?;
    Ok(-guess.log2())
}

/// `SD(p, q) = ½ Σ |p − q|` over identical variable lists.
pub fn statistical_distance(p: &JointDistribution, q: &JointDistribution) -> Result<f64, DistError> {
    if p.variables != q.variables {
        return Err(DistError::AlphabetMismatch);
    }
    Ok(0.5 * p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// A distribution together with a nearby modification of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedDistribution {
    pub base: JointDistribution,
    pub truncated: JointDistribution,
    /// Exact `SD(base, truncated)`.
    pub sd: f64,
    /// Markov estimate `E[p(X|Z)] / cap`, an upper bound on `sd`.
    pub markov_bound: f64,
}

/// Removes every cell whose `p(x|z)` exceeds `cap` and renormalizes.
///
/// The removed mass is `Pr[p(X|Z) > cap] ≤ E[p(X|Z)]/cap` by Markov's
/// inequality; after renormalizing, the statistical distance to the original
/// equals the removed mass.
pub fn markov_smooth(d: &JointDistribution, x: &[&str], z: &[&str], cap: f64) -> Result<SmoothedDistribution, DistError> {
    if !(cap > 0.0) || !cap.is_finite() {
        return Err(DistError::BadParameter(format!("cap {cap} must be positive")));
    }
    let zpos: Vec<usize> = z.iter().map(|n| d.position(n)).collect::<Result<_, _>>()?;
    let xz = d.marginal(&union(x, z))?;
    let zm = d.marginal(z)?;
    let xz_names = union(x, z);
    let xz_pos: Vec<usize> = xz_names.iter().map(|n| d.position(n)).collect::<Result<_, _>>()?;
    let cond = |idx: &[usize]| -> f64 {
        let a: Vec<usize> = xz_pos.iter().map(|&p| idx[p]).collect();
        let b: Vec<usize> = zpos.iter().map(|&p| idx[p]).collect();
        let pz = zm.get(&b);
        if pz > 0.0 {
            xz.get(&a) / pz
        } else {
            0.0
        }
    };
    let mut expect = 0.0;
    let mut weights = Vec::with_capacity(d.probs.len());
    d.for_each(|idx, p| {
        let c = cond(idx);
        expect += p * c;
        weights.push(if c > cap { 0.0 } else { p });
    });
    let truncated = JointDistribution::from_weights(d.variables.clone(), weights).map_err(|e| match e {
        DistError::ZeroMass => DistError::BadParameter(format!("cap {cap} removes all probability mass")),
        other => other,
    })?;
    let sd = statistical_distance(d, &truncated)?;
    Ok(SmoothedDistribution { base: d.clone(), truncated, sd, markov_bound: expect / cap })
}

/// A certified upper bound on the smooth conditional collision information.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothBound {
    /// `I_c(X:Y|Z)` evaluated on `witness`.
    pub value: f64,
    /// Distribution over `X, Y, Z` within statistical distance `epsilon` of the input.
    pub witness: JointDistribution,
    pub sd: f64,
    pub method: &'static str,
    /// Largest mixing weight `t` toward `P_XZ ⊗ U_Y` allowed by the ball;
    /// the mixture at weight `t` has information at most `log₂(|Y|/t)`.
    pub max_mix: f64,
}

/// Upper bound on `min { I_c(X′:Y′|Z′) : SD((X′,Y′,Z′), (X,Y,Z)) ≤ ε }`.
///
/// The minimum is not computed; instead several explicit witnesses in the
/// ball are evaluated and the best one returned: the input itself, mixtures
/// `(1−t)P + t·P_XZ⊗U_Y`, and Markov truncations on `p(x|z)`.
pub fn smooth_collision_mi_upper(
    d: &JointDistribution,
    x: &[&str],
    y: &[&str],
    z: &[&str],
    epsilon: f64,
) -> Result<SmoothBound, DistError> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(DistError::BadParameter(format!("epsilon {epsilon} outside [0, 1)")));
    }
    let names = union(&union(x, y), z);
    let p = d.marginal(&names)?;
    let eval = |w: &JointDistribution| conditional_collision_mi(w, x, y, z);
    let mut best = SmoothBound { value: eval(&p)?, witness: p.clone(), sd: 0.0, method: "identity", max_mix: 0.0 };
    let consider = |w: JointDistribution, sd: f64, method: &'static str, best: &mut SmoothBound| -> Result<(), DistError> {
        if sd <= epsilon {
            let v = eval(&w)?;
            if v < best.value {
                *best = SmoothBound { value: v, witness: w, sd, method, max_mix: best.max_mix };
            }
        }
        Ok(())
    };

    // Mixture toward the distribution where Y is uniform and independent of (X, Z).
    let xz_names = union(x, z);
    let xz = p.marginal(&xz_names)?;
    let ysize: usize = y.iter().filter(|n| !xz_names.contains(n)).map(|n| p.size_of(n)).collect::<Result<Vec<_>, _>>()?.iter().product();
    let xz_pos: Vec<usize> = xz_names.iter().map(|n| p.position(n)).collect::<Result<_, _>>()?;
    let mut qw = Vec::with_capacity(p.probs.len());
    p.for_each(|idx, _| {
        let a: Vec<usize> = xz_pos.iter().map(|&i| idx[i]).collect();
        qw.push(xz.get(&a) / ysize as f64);
    });
    let q = JointDistribution::from_weights(p.variables.clone(), qw)?;
    let sd_pq = statistical_distance(&p, &q)?;
    let t_max = if sd_pq <= 0.0 { 1.0 } else { (epsilon / sd_pq).min(1.0) };
    best.max_mix = t_max;
    if t_max > 0.0 {
        for i in 0..=16 {
            let t = t_max * i as f64 / 16.0;
            let w: Vec<f64> = p.probs.iter().zip(&q.probs).map(|(a, b)| (1.0 - t) * a + t * b).collect();
            let w = JointDistribution::from_weights(p.variables.clone(), w)?;
            let sd = statistical_distance(&p, &w)?;
            consider(w, sd.min(t * sd_pq), "mixture", &mut best)?;
        }
    }

    // Markov truncations at each distinct conditional probability level.
    if epsilon > 0.0 {
        let mut levels: Vec<f64> = Vec::new();
        let zm = p.marginal(z)?;
        let zpos: Vec<usize> = z.iter().map(|n| p.position(n)).collect::<Result<_, _>>()?;
        p.for_each(|idx, _| {
            let a: Vec<usize> = xz_pos.iter().map(|&i| idx[i]).collect();
            let b: Vec<usize> = zpos.iter().map(|&i| idx[i]).collect();
            let pz = zm.get(&b);
            if pz > 0.0 {
                levels.push(xz.get(&a) / pz);
            }
        });
        levels.sort_by(f64::total_cmp);
        levels.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        for &cap in levels.iter().rev().skip(1) {
            match markov_smooth(&p, x, z, cap) {
                Ok(s) => consider(s.truncated, s.sd, "markov", &mut best)?,
                Err(DistError::BadParameter(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(best)
}
