//! Binary linear codes over F₂.
//!
//! A [`LinearCode`] is stored through its `n × k` generator matrix `G`, so a
//! message `m ∈ {0,1}^k` encodes to `c = G·m`. Decoding is exhaustive
//! nearest-codeword search; it is exponential in `k` and refuses inputs that
//! are too large to enumerate instead of silently approximating.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::seed;

/// Largest message length `ml_decode` will enumerate (2^k codewords).
pub const MAX_DECODE_K: usize = 24;
/// Largest block length `exact_failure_prob` will enumerate (2^n words).
pub const MAX_EXACT_N: usize = 24;

const MC_CHUNK: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("invalid code dimensions n={n}, k={k} (need 1 <= k <= n)")]
    InvalidDimensions { n: usize, k: usize },
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("generator has rank {rank} < k = {k}; encoding would not be injective")]
    RankDeficient { rank: usize, k: usize },
    #[error("{what} needs 2^{size} enumeration, above the limit 2^{limit}")]
    TooLargeForEnumeration { what: &'static str, size: usize, limit: usize },
    #[error("malformed code description: {0}")]
    Malformed(String),
}

/// A fixed-length vector over F₂, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b & 1 == 1);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector whose bit 0 is the most significant bit of `value`.
    ///
    /// With this convention numeric order on `value` coincides with
    /// lexicographic order on the bit sequence.
    pub fn from_index(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        for j in 0..len {
            v.set(j, (value >> (len - 1 - j)) & 1 == 1);
        }
        v
    }

    /// Inverse of [`BitVector::from_index`].
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64);
        (0..self.len).fold(0u64, |acc, j| (acc << 1) | self.get(j) as u64)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.gen();
        }
        v.clear_padding();
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn distance(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.bits().map(u8::from).collect()
    }

    /// Low 64 bits with bit `i` of the vector at bit `i` of the integer.
    pub(crate) fn low_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Sub-vector of the given coordinates, in the given order.
    pub fn select(&self, coords: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(coords.len());
        for (j, &i) in coords.iter().enumerate() {
            out.set(j, self.get(i));
        }
        out
    }

    pub fn truncate(&self, len: usize) -> BitVector {
        let idx: Vec<usize> = (0..len.min(self.len)).collect();
        self.select(&idx)
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitVector {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut v = BitVector::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                other => return Err(CodeError::Malformed(format!("bad bit character {other:?}"))),
            }
        }
        Ok(v)
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense matrix over F₂ stored row-major, one packed [`BitVector`] per row.
#[derive(Clone, PartialEq, Eq)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        F2Matrix { rows, cols, data: vec![BitVector::zeros(cols); rows] }
    }

    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self, CodeError> {
        let cols = rows.first().map_or(0, BitVector::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(CodeError::LengthMismatch { expected: cols, actual: bad.len() });
        }
        Ok(F2Matrix { rows: rows.len(), cols, data: rows })
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows).map(|_| BitVector::random(cols, rng)).collect();
        F2Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        self.data[r].set(c, bit)
    }

    pub fn row(&self, r: usize) -> &BitVector {
        &self.data[r]
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            v.set(r, self.get(r, c));
        }
        v
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut t = F2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Matrix-vector product over F₂.
    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector, CodeError> {
        if x.len() != self.cols {
            return Err(CodeError::LengthMismatch { expected: self.cols, actual: x.len() });
        }
        let mut out = BitVector::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            let parity = row.words.iter().zip(&x.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() & 1;
            out.set(r, parity == 1);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &F2Matrix) -> Result<F2Matrix, CodeError> {
        if self.cols != other.rows {
            return Err(CodeError::LengthMismatch { expected: self.cols, actual: other.rows });
        }
        let cols: Vec<BitVector> = (0..other.cols).map(|c| self.mul_vec(&other.column(c))).collect::<Result<_, _>>()?;
        let mut out = F2Matrix::zeros(self.rows, other.cols);
        for (c, col) in cols.iter().enumerate() {
            for r in 0..self.rows {
                out.set(r, c, col.get(r));
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.row_echelon().1.len()
    }

    /// Reduced row echelon form and the pivot columns.
    fn row_echelon(&self) -> (Vec<BitVector>, Vec<usize>) {
        let mut rows = self.data.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(c)) else { continue };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(c) {
                    row.xor_assign(&pivot);
                }
            }
            pivots.push(c);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows.truncate(rank);
        (rows, pivots)
    }

    /// Basis of the right null space `{x : A·x = 0}`, one vector per row.
    pub fn null_space(&self) -> F2Matrix {
        let (rref, pivots) = self.row_echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let basis = free
            .iter()
            .map(|&f| {
                let mut v = BitVector::zeros(self.cols);
                v.set(f, true);
                for (row, &p) in rref.iter().zip(&pivots) {
                    if row.get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        F2Matrix { rows: free.len(), cols: self.cols, data: basis }
    }

    /// Permutes rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> F2Matrix {
        assert_eq!(perm.len(), self.rows);
        F2Matrix { rows: self.rows, cols: self.cols, data: perm.iter().map(|&p| self.data[p].clone()).collect() }
    }

    /// Row-major bits packed MSB-first into bytes, hex encoded.
    pub fn to_hex(&self) -> String {
        let total = self.rows * self.cols;
        let mut bytes = vec![0u8; total.div_ceil(8)];
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    let t = r * self.cols + c;
                    bytes[t / 8] |= 0x80 >> (t % 8);
                }
            }
        }
        hex::encode(bytes)
    }

    pub fn from_hex(rows: usize, cols: usize, s: &str) -> Result<Self, CodeError> {
        let bytes = hex::decode(s.trim()).map_err(|e| CodeError::Malformed(format!("generator hex: {e}")))?;
        let total = rows.checked_mul(cols).ok_or_else(|| CodeError::Malformed("dimension overflow".into()))?;
        if bytes.len() != total.div_ceil(8) {
            return Err(CodeError::Malformed(format!(
                "generator hex holds {} bytes, {}x{} needs {}",
                bytes.len(),
                rows,
                cols,
                total.div_ceil(8)
            )));
        }
        let mut m = F2Matrix::zeros(rows, cols);
        for t in 0..total {
            if bytes[t / 8] & (0x80 >> (t % 8)) != 0 {
                m.set(t / cols, t % cols, true);
            }
        }
        let pad = bytes.len() * 8 - total;
        if pad > 0 && bytes[bytes.len() - 1] & ((1u8 << pad) - 1) != 0 {
            return Err(CodeError::Malformed("nonzero padding bits in generator hex".into()));
        }
        Ok(m)
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.rows, self.cols)?;
        for row in &self.data {
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

/// A binary linear code given by a full-column-rank generator `G ∈ F₂^{n×k}`.
#[derive(Clone, PartialEq, Eq)]
pub struct LinearCode {
    n: usize,
    k: usize,
    generator: F2Matrix,
    seed: Option<u64>,
    /// Columns of `G`; `encode` XORs the columns selected by the message.
    columns: Vec<BitVector>,
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearCode").field("n", &self.n).field("k", &self.k).field("seed", &self.seed).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    n: usize,
    k: usize,
    generator: String,
    seed: Option<u64>,
}

impl LinearCode {
    pub fn from_generator(generator: F2Matrix) -> Result<Self, CodeError> {
        let (n, k) = (generator.rows(), generator.cols());
        if k == 0 || k > n {
            return Err(CodeError::InvalidDimensions { n, k });
        }
        let rank = generator.rank();
        if rank < k {
            return Err(CodeError::RankDeficient { rank, k });
        }
        let columns = (0..k).map(|c| generator.column(c)).collect();
        Ok(LinearCode { n, k, generator, seed: None, columns })
    }

    /// Length-`n` repetition code (`k = 1`).
    pub fn repetition(n: usize) -> Result<Self, CodeError> {
        if n == 0 {
            return Err(CodeError::InvalidDimensions { n, k: 1 });
        }
        let mut g = F2Matrix::zeros(n, 1);
        for r in 0..n {
            g.set(r, 0, true);
        }
        Self::from_generator(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn generator(&self) -> &F2Matrix {
        &self.generator
    }

    /// Parity-check matrix `H ∈ F₂^{(n−k)×n}` with `H·c = 0` exactly on the code.
    pub fn parity_check(&self) -> F2Matrix {
        self.generator.transpose().null_space()
    }

    pub fn encode(&self, m: &BitVector) -> Result<BitVector, CodeError> {
        if m.len() != self.k {
            return Err(CodeError::LengthMismatch { expected: self.k, actual: m.len() });
        }
        let mut c = BitVector::zeros(self.n);
        for (j, col) in self.columns.iter().enumerate() {
            if m.get(j) {
                c.xor_assign(col);
            }
        }
        Ok(c)
    }

    /// Same code with coordinates permuted: coordinate `i` of the new code is
    /// coordinate `perm[i]` of this one.
    pub fn permute_coordinates(&self, perm: &[usize]) -> Result<Self, CodeError> {
        let mut out = Self::from_generator(self.generator.permute_rows(perm))?;
        out.seed = self.seed;
        Ok(out)
    }

    /// Minimum Hamming distance by enumerating all nonzero codewords.
    pub fn min_distance(&self) -> Result<usize, CodeError> {
        check_enumerable("minimum distance", self.k, MAX_DECODE_K)?;
        let mut best = self.n;
        for u in 1..(1u64 << self.k) {
            let c = self.encode(&BitVector::from_index(u, self.k))?;
            best = best.min(c.weight());
        }
        Ok(best)
    }

    pub fn to_json(&self) -> String {
        let j = CodeJson { n: self.n, k: self.k, generator: self.generator.to_hex(), seed: self.seed };
        serde_json::to_string(&j).expect("code serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CodeError> {
        let j: CodeJson = serde_json::from_str(s).map_err(|e| CodeError::Malformed(e.to_string()))?;
        if j.k == 0 || j.k > j.n {
            return Err(CodeError::InvalidDimensions { n: j.n, k: j.k });
        }
        // Keep hostile inputs from requesting huge allocations.
        if j.n > 1 << 16 || j.k > 1 << 16 {
            return Err(CodeError::Malformed(format!("code dimensions {}x{} too large", j.n, j.k)));
        }
        let g = F2Matrix::from_hex(j.n, j.k, &j.generator)?;
        let mut code = Self::from_generator(g)?;
        code.seed = j.seed;
        Ok(code)
    }
}

fn check_enumerable(what: &'static str, size: usize, limit: usize) -> Result<(), CodeError> {
    if size > limit {
        Err(CodeError::TooLargeForEnumeration { what, size, limit })
    } else {
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<(), CodeError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(CodeError::InvalidProbability(p))
    }
}

/// Samples a uniformly random generator, redrawing until it has full column rank.
pub fn random_code(n: usize, k: usize, seed: u64) -> Result<LinearCode, CodeError> {
    random_code_with_attempts(n, k, seed).map(|(c, _)| c)
}

/// Like [`random_code`], also reporting how many generator draws were needed.
pub fn random_code_with_attempts(n: usize, k: usize, seed: u64) -> Result<(LinearCode, usize), CodeError> {
    if k == 0 || k > n {
        return Err(CodeError::InvalidDimensions { n, k });
    }
    let mut rng = seed::rng(seed);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let g = F2Matrix::random(n, k, &mut rng);
        if g.rank() == k {
            let mut code = LinearCode::from_generator(g)?;
            code.seed = Some(seed);
            return Ok((code, attempts));
        }
    }
}

pub fn encode(code: &LinearCode, m: &BitVector) -> Result<BitVector, CodeError> {
    code.encode(m)
}

/// Flips each bit of `x` independently with probability `p`.
pub fn bsc_sample(x: &BitVector, p: f64, seed: u64) -> Result<BitVector, CodeError> {
    check_probability(p)?;
    Ok(bsc_apply(x, p, &mut seed::rng(seed)))
}

pub(crate) fn bsc_apply<R: Rng + ?Sized>(x: &BitVector, p: f64, rng: &mut R) -> BitVector {
    let mut y = x.clone();
    for i in 0..y.len() {
        if rng.gen_bool(p) {
            y.flip(i);
        }
    }
    y
}

/// Nearest-codeword decoding by exhaustive search over all 2^k messages.
///
/// Among equidistant codewords the lexicographically smallest message wins.
pub fn ml_decode(code: &LinearCode, y: &BitVector) -> Result<BitVector, CodeError> {
    if y.len() != code.n {
        return Err(CodeError::LengthMismatch { expected: code.n, actual: y.len() });
    }
    check_enumerable("maximum-likelihood decoding", code.k, MAX_DECODE_K)?;
    let k = code.k;
    // Shard the Gray-code walk over the high message bits for large k.
    let shard_bits = k.saturating_sub(14);
    let low_bits = k - shard_bits;
    let best = (0..1u64 << shard_bits)
        .into_par_iter()
        .map(|prefix| decode_shard(code, y, prefix, low_bits))
        .reduce(|| (usize::MAX, u64::MAX), std::cmp::min);
    Ok(BitVector::from_index(best.1, k))
}

/// Walks messages `(prefix << low_bits) | gray(u)` and returns the best
/// `(distance, message index)` pair.
fn decode_shard(code: &LinearCode, y: &BitVector, prefix: u64, low_bits: usize) -> (usize, u64) {
    let k = code.k;
    let start = prefix << low_bits;
    let mut word = code.encode(&BitVector::from_index(start, k)).expect("length checked");
    word.xor_assign(y);
    let mut best = (word.weight(), start);
    for u in 1..(1u64 << low_bits) {
        // Gray code step flips integer bit `tz`, i.e. message position k-1-tz.
        let tz = u.trailing_zeros() as usize;
        word.xor_assign(&code.columns[k - 1 - tz]);
        let idx = start | (u ^ (u >> 1));
        let cand = (word.weight(), idx);
        if cand < best {
            best = cand;
        }
    }
    best
}

/// Exact decoding-failure probability of nearest-codeword decoding over BSC(p),
/// averaged over uniformly random messages.
///
/// For a received word `y` exactly one message decodes to `y`, and it lies at
/// distance `D(y) = d(y, code)`, so the success probability is
/// `2^{-k} Σ_y p^{D(y)} (1-p)^{n-D(y)}` whatever the tie rule. `D` is
/// computed for all `2^n` words by a multi-source breadth-first search.
pub fn exact_failure_prob(code: &LinearCode, p: f64) -> Result<f64, CodeError> {
    check_probability(p)?;
    check_enumerable("exact failure probability", code.n, MAX_EXACT_N)?;
    let counts = coset_distance_profile(code);
    let n = code.n as i32;
    let success: f64 = counts
        .iter()
        .enumerate()
        .map(|(d, &cnt)| cnt as f64 * p.powi(d as i32) * (1.0 - p).powi(n - d as i32))
        .sum::<f64>()
        / (1u64 << code.k) as f64;
    Ok((1.0 - success).clamp(0.0, 1.0))
}

/// Number of words `y ∈ {0,1}^n` at each distance from the code.
pub fn coset_distance_profile(code: &LinearCode) -> Vec<u64> {
    let n = code.n;
    assert!(n <= MAX_EXACT_N);
    let size = 1usize << n;
    let mut dist = vec![u8::MAX; size];
    let mut frontier: Vec<u32> = Vec::with_capacity(1 << code.k);
    for u in 0..(1u64 << code.k) {
        let c = code.encode(&BitVector::from_index(u, code.k)).expect("length fixed") .low_word() as u32;
        dist[c as usize] = 0;
        frontier.push(c);
    }
    let mut counts = vec![0u64; n + 1];
    counts[0] = frontier.len() as u64;
    let mut d = 0u8;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &w in &frontier {
            for i in 0..n {
                let v = (w ^ (1 << i)) as usize;
                if dist[v] == u8::MAX {
                    dist[v] = d;
                    next.push(v as u32);
                }
            }
        }
        if !next.is_empty() {
            counts[d as usize] = next.len() as u64;
        }
        frontier = next;
    }
    counts
}

/// Monte-Carlo failure estimate: failures out of `trials`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub failures: u64,
    pub trials: u64,
}

impl McEstimate {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Binomial standard deviation of the rate at true probability `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Empirical failure frequency of encode → BSC(p) → `ml_decode`.
pub fn mc_failure_prob(code: &LinearCode, p: f64, trials: u64, seed: u64) -> Result<f64, CodeError> {
    mc_failure_estimate(code, p, trials, seed).map(|e| e.rate())
}

/// Trials run in fixed-size chunks with their own derived streams, so the
/// estimate does not depend on the number of worker threads.
pub fn mc_failure_estimate(code: &LinearCode, p: f64, trials: u64, seed: u64) -> Result<McEstimate, CodeError> {
    check_probability(p)?;
    check_enumerable("maximum-likelihood decoding", code.k, MAX_DECODE_K)?;
    if trials == 0 {
        return Err(CodeError::Malformed("trials must be at least 1".into()));
    }
    let chunks = trials.div_ceil(MC_CHUNK);
    let failures = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seed::rng(seed::derive_indexed(seed, "mc-failure", chunk));
            let count = MC_CHUNK.min(trials - chunk * MC_CHUNK);
            let mut fails = 0u64;
            for _ in 0..count {
                let m = BitVector::random(code.k, &mut rng);
                let c = code.encode(&m).expect("length fixed");
                let y = bsc_apply(&c, p, &mut rng);
                if ml_decode_serial(code, &y) != m {
                    fails += 1;
                }
            }
            fails
        })
        .sum();
    Ok(McEstimate { failures, trials })
}

/// Single-threaded decode used inside already-parallel loops.
pub(crate) fn ml_decode_serial(code: &LinearCode, y: &BitVector) -> BitVector {
    let best = decode_shard(code, y, 0, code.k);
    BitVector::from_index(best.1, code.k)
}
