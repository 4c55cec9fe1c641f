//! Random oracles `H: Σ → {0,1}^n`, their bit projections, salted views and
//! k-wise independent hash families.
//!
//! Oracle values are produced by a counter-mode ChaCha stream keyed by
//! `(seed, point)`, so explicit tables and lazily sampled oracles with the same
//! seed agree pointwise.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::gf_core::{Fe, Field};
use crate::{Error, Result};

/// Default cap on `|Σ|·n` bits held by an explicit table.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 30;

/// A fixed-length bit string; bit `i` is addressed 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits { len, words: vec![u64::MAX; len.div_ceil(64)] };
        b.mask();
        b
    }

    fn mask(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit `i`, 1-based.
    pub fn get(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.len, "bit index {i} out of range 1..={}", self.len);
        (self.words[(i - 1) / 64] >> ((i - 1) % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i >= 1 && i <= self.len, "bit index {i} out of range 1..={}", self.len);
        let (w, b) = ((i - 1) / 64, (i - 1) % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len, "xor of bit strings with different lengths");
        Bits {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bits packed into bytes, bit 1 as the least significant bit of byte 0.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        let mut b = Bits::zeros(len);
        for (i, chunk) in bytes.chunks(8).enumerate().take(b.words.len()) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            b.words[i] = u64::from_le_bytes(buf);
        }
        b.mask();
        b
    }

    /// Uniformly random bits.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut b = Bits { len, words: (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect() };
        b.mask();
        b
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut b = Bits::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(i + 1, true),
                _ => return Err(Error::Parse(format!("bad bit character {c:?}"))),
            }
        }
        Ok(b)
    }
}

fn sample_point(seed: u64, x: u64, n: usize) -> Bits {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(x);
    Bits::random(n, &mut rng)
}

/// Whether the oracle stores a full table or samples on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Explicit,
    Lazy,
}

#[derive(Debug, Clone)]
enum Storage {
    Explicit(Vec<Bits>),
    Lazy { seed: u64, memo: HashMap<u64, Bits> },
}

/// A function `H: Σ → {0,1}^n`, explicit or lazily sampled.
#[derive(Debug, Clone)]
pub struct OracleTable {
    seed: Option<u64>,
    domain: u64,
    n: usize,
    storage: Storage,
    queries: u64,
}

/// Builds the oracle determined by `seed`.
pub fn sample_oracle(seed: u64, domain: u64, n: usize, mode: OracleMode, cap: u64) -> Result<OracleTable> {
    let storage = match mode {
        OracleMode::Explicit => {
            let need = domain as u128 * n.max(1) as u128;
            if need > cap as u128 {
                return Err(Error::CapExceeded { what: "explicit oracle table", need, cap: cap as u128 });
            }
            Storage::Explicit((0..domain).map(|x| sample_point(seed, x, n)).collect())
        }
        OracleMode::Lazy => Storage::Lazy { seed, memo: HashMap::new() },
    };
    Ok(OracleTable { seed: Some(seed), domain, n, storage, queries: 0 })
}

impl OracleTable {
    /// Explicit oracle from a function, e.g. an adversarially chosen one.
    pub fn from_fn(domain: u64, n: usize, f: impl FnMut(u64) -> Bits) -> Self {
        let table: Vec<Bits> = (0..domain).map(f).collect();
        assert!(table.iter().all(|b| b.len() == n), "oracle values must have n bits");
        OracleTable { seed: None, domain, n, storage: Storage::Explicit(table), queries: 0 }
    }

    /// The constant oracle `H(x) = value`.
    pub fn constant(domain: u64, value: Bits) -> Self {
        let n = value.len();
        Self::from_fn(domain, n, |_| value.clone())
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
    pub fn domain(&self) -> u64 {
        self.domain
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn mode(&self) -> OracleMode {
        match self.storage {
            Storage::Explicit(_) => OracleMode::Explicit,
            Storage::Lazy { .. } => OracleMode::Lazy,
        }
    }
    pub fn is_explicit(&self) -> bool {
        self.mode() == OracleMode::Explicit
    }

    fn check_point(&self, x: u64) {
        assert!(x < self.domain, "point {x} outside the domain of size {}", self.domain);
    }

    /// `H(x)`, memoizing in lazy mode.
    pub fn query(&mut self, x: u64) -> Bits {
        self.check_point(x);
        self.queries += 1;
        let n = self.n;
        match &mut self.storage {
            Storage::Explicit(t) => t[x as usize].clone(),
            Storage::Lazy { seed, memo } => {
                let seed = *seed;
                memo.entry(x).or_insert_with(|| sample_point(seed, x, n)).clone()
            }
        }
    }

    /// `H(x)` from an explicit table, or an already-answered lazy point.
    pub fn value(&self, x: u64) -> Result<&Bits> {
        self.check_point(x);
        match &self.storage {
            Storage::Explicit(t) => Ok(&t[x as usize]),
            Storage::Lazy { memo, .. } => memo.get(&x).ok_or(Error::LazyOracle),
        }
    }

    /// `H_i(x)` on an explicit table.
    pub fn bit(&self, x: u64, i: usize) -> Result<bool> {
        Ok(self.value(x)?.get(i))
    }

    /// Total calls to [`OracleTable::query`], repeats included.
    pub fn query_count(&self) -> u64 {
        self.queries
    }

    /// Number of answered points (the whole domain for explicit tables).
    pub fn answered(&self) -> usize {
        match &self.storage {
            Storage::Explicit(t) => t.len(),
            Storage::Lazy { memo, .. } => memo.len(),
        }
    }

    /// The single-bit function `H_i`.
    pub fn bit_projection(&self, i: usize) -> Result<BitFunction> {
        if i == 0 || i > self.n {
            return Err(Error::invalid(format!("bit index {i} outside 1..={}", self.n)));
        }
        let Storage::Explicit(t) = &self.storage else {
            return Err(Error::LazyOracle);
        };
        Ok(BitFunction { values: t.iter().map(|b| b.get(i)).collect() })
    }

    /// `|T_i| = |{x : H_i(x) = y_i}|` for each `i`.
    pub fn preimage_sizes(&self, y: &Bits) -> Result<Vec<u64>> {
        let Storage::Explicit(t) = &self.storage else {
            return Err(Error::LazyOracle);
        };
        Ok((1..=self.n)
            .map(|i| t.iter().filter(|b| b.get(i) == y.get(i)).count() as u64)
            .collect())
    }

    /// `H ⊕ f_K` as a new explicit table.
    pub fn xor_shift(&self, f: &KWiseHash) -> Result<OracleTable> {
        if f.domain() < self.domain || f.n() != self.n {
            return Err(Error::invalid("hash family does not match the oracle's domain and range"));
        }
        let Storage::Explicit(t) = &self.storage else {
            return Err(Error::LazyOracle);
        };
        let table = t
            .iter()
            .enumerate()
            .map(|(x, b)| b.xor(&f.eval(x as u64)))
            .collect();
        Ok(OracleTable { seed: None, domain: self.domain, n: self.n, storage: Storage::Explicit(table), queries: 0 })
    }

    /// True iff every bit projection has a 1-fraction strictly inside (1/3, 2/3).
    pub fn in_restricted_class(&self) -> Result<bool> {
        let ones = self.preimage_sizes(&Bits::ones(self.n))?;
        let d = self.domain;
        Ok(ones.iter().all(|&t| 3 * t > d && 3 * t < 2 * d))
    }

    /// One line per domain point: `symbol<TAB>bits`.
    pub fn dump(&self) -> Result<String> {
        let Storage::Explicit(t) = &self.storage else {
            return Err(Error::LazyOracle);
        };
        let mut out = String::new();
        for (x, b) in t.iter().enumerate() {
            out.push_str(&format!("{x}\t{b}\n"));
        }
        Ok(out)
    }
}

/// A single output bit of an oracle, tabulated over Σ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFunction {
    pub values: Vec<bool>,
}

impl BitFunction {
    pub fn eval(&self, x: u64) -> bool {
        self.values[x as usize]
    }

    /// Points where the function equals `target`.
    pub fn preimage(&self, target: bool) -> Vec<u64> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == target)
            .map(|(x, _)| x as u64)
            .collect()
    }
}

fn derive_seed(seed: u64, prefix: &[u8]) -> u64 {
    if prefix.is_empty() {
        return seed;
    }
    let mut h = Sha256::new();
    h.update(b"poqlab/prefix");
    h.update(seed.to_le_bytes());
    h.update((prefix.len() as u64).to_le_bytes());
    h.update(prefix);
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// A wide oracle `H: {0,1}^* → {0,1}^*` from which per-instance oracles are
/// carved out by prefixing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WideOracle {
    pub seed: u64,
}

impl WideOracle {
    pub fn new(seed: u64) -> Self {
        WideOracle { seed }
    }

    /// The view `x ↦ H(prefix‖x)` on `Σ → {0,1}^n`.
    pub fn view(&self, prefix: &[u8], domain: u64, n: usize, mode: OracleMode, cap: u64) -> Result<OracleTable> {
        sample_oracle(derive_seed(self.seed, prefix), domain, n, mode, cap)
    }

    /// `H(input)` truncated to `nbits`, for inputs outside the symbol domain.
    pub fn eval_bytes(&self, input: &[u8], nbits: usize) -> Bits {
        let mut out = Vec::with_capacity(nbits.div_ceil(8));
        let mut counter = 0u64;
        while out.len() * 8 < nbits {
            let mut h = Sha256::new();
            h.update(b"poqlab/wide");
            h.update(self.seed.to_le_bytes());
            h.update(counter.to_le_bytes());
            h.update(input);
            out.extend_from_slice(&h.finalize());
            counter += 1;
        }
        Bits::from_bytes(&out, nbits)
    }
}

/// `x ↦ H(salt‖x)` as an oracle on `Σ`; the empty salt gives `H` itself.
pub fn prefix_restrict(h: &WideOracle, salt: &[u8], domain: u64, n: usize, mode: OracleMode, cap: u64) -> Result<OracleTable> {
    h.view(salt, domain, n, mode, cap)
}

/// Degree-`(k-1)` polynomial hashing over GF(2^w), `⌈n/w⌉` independent blocks
/// concatenated and truncated to `n` bits.
#[derive(Debug, Clone)]
pub struct KWiseHash {
    k: usize,
    n: usize,
    field: Arc<Field>,
    key: Vec<Vec<Fe>>,
}

impl KWiseHash {
    fn field_for(domain: u64) -> Result<Arc<Field>> {
        let w = (64 - domain.saturating_sub(1).leading_zeros()).max(1);
        Field::new(1u64 << w)
    }

    /// Number of key coefficients for the given shape.
    pub fn key_len(k: usize, domain: u64, n: usize) -> Result<usize> {
        let w = Self::field_for(domain)?.r() as usize;
        Ok(n.div_ceil(w) * k)
    }

    pub fn random<R: Rng + ?Sized>(k: usize, domain: u64, n: usize, rng: &mut R) -> Result<Self> {
        let field = Self::field_for(domain)?;
        let len = Self::key_len(k, domain, n)?;
        let flat: Vec<Fe> = (0..len).map(|_| rng.gen_range(0..field.q())).collect();
        Self::with_key(k, domain, n, &flat)
    }

    /// Family member for a flat key of `key_len` coefficients.
    pub fn with_key(k: usize, domain: u64, n: usize, key: &[Fe]) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k-wise independence needs k >= 1"));
        }
        let field = Self::field_for(domain)?;
        let len = Self::key_len(k, domain, n)?;
        if key.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: key.len() });
        }
        if key.iter().any(|&c| c >= field.q()) {
            return Err(Error::invalid("key coefficient outside the field"));
        }
        Ok(KWiseHash { k, n, field, key: key.chunks(k).map(|c| c.to_vec()).collect() })
    }

    pub fn zero(k: usize, domain: u64, n: usize) -> Result<Self> {
        let len = Self::key_len(k, domain, n)?;
        Self::with_key(k, domain, n, &vec![0; len])
    }

    pub fn k(&self) -> usize {
        self.k
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn domain(&self) -> u64 {
        self.field.q() as u64
    }
    pub fn key(&self) -> Vec<Fe> {
        self.key.iter().flatten().copied().collect()
    }

    pub fn eval(&self, x: u64) -> Bits {
        let f = &self.field;
        let w = f.r() as usize;
        let x = x as Fe;
        let mut out = Bits::zeros(self.n);
        for (b, coeffs) in self.key.iter().enumerate() {
            let v = coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c));
            for j in 0..w {
                let pos = b * w + j + 1;
                if pos > self.n {
                    break;
                }
                out.set(pos, (v >> j) & 1 == 1);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn bits_basics() {
        let b: Bits = "1000".parse().unwrap();
        assert!(b.get(1));
        assert!(!b.get(2));
        assert_eq!(b.to_string(), "1000");
        assert_eq!(Bits::ones(70).count_ones(), 70);
        assert_eq!(Bits::from_bytes(&b.to_bytes(), 4), b);
        assert!("10x".parse::<Bits>().is_err());
    }

    #[test]
    fn seeds_determine_tables() {
        let a = sample_oracle(5, 64, 8, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        let b = sample_oracle(5, 64, 8, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        let c = sample_oracle(6, 64, 8, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(a.dump().unwrap(), b.dump().unwrap());
        assert_ne!(a.dump().unwrap(), c.dump().unwrap());
        assert!(sample_oracle(5, 1 << 20, 64, OracleMode::Explicit, 1 << 20).is_err());
    }

    #[test]
    fn lazy_matches_explicit_and_counts() {
        let explicit = sample_oracle(9, 100, 12, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        let mut lazy = sample_oracle(9, 100, 12, OracleMode::Lazy, DEFAULT_TABLE_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut distinct = std::collections::HashSet::new();
        for _ in 0..300 {
            let x = rng.gen_range(0..100);
            distinct.insert(x);
            assert_eq!(&lazy.query(x), explicit.value(x).unwrap());
            assert_eq!(lazy.answered(), distinct.len());
        }
        assert!(lazy.bit_projection(1).is_err());
        assert!(lazy.in_restricted_class().is_err());
    }

    #[test]
    fn bit_projection_reassembles() {
        let h = sample_oracle(3, 32, 7, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        let projections: Vec<BitFunction> = (1..=7).map(|i| h.bit_projection(i).unwrap()).collect();
        for x in 0..32 {
            let mut b = Bits::zeros(7);
            for (i, p) in projections.iter().enumerate() {
                b.set(i + 1, p.eval(x));
            }
            assert_eq!(&b, h.value(x).unwrap());
        }
        assert!(h.bit_projection(0).is_err());
        assert!(h.bit_projection(8).is_err());
        let single = OracleTable::constant(4, "1000".parse().unwrap());
        assert!(single.bit_projection(1).unwrap().eval(2));
    }

    #[test]
    fn xor_shift_algebra() {
        let h = sample_oracle(4, 16, 6, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        let zero = KWiseHash::zero(3, 16, 6).unwrap();
        assert_eq!(h.xor_shift(&zero).unwrap().dump().unwrap(), h.dump().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = KWiseHash::random(3, 16, 6, &mut rng).unwrap();
        let shifted = h.xor_shift(&f).unwrap();
        assert_eq!(shifted.xor_shift(&f).unwrap().dump().unwrap(), h.dump().unwrap());
        for i in 1..=6 {
            let ph = h.bit_projection(i).unwrap();
            let ps = shifted.bit_projection(i).unwrap();
            for x in 0..16 {
                assert_eq!(ps.eval(x), ph.eval(x) ^ f.eval(x).get(i));
            }
        }
    }

    #[test]
    fn xor_shift_is_uniform_over_keys() {
        let h = OracleTable::constant(8, Bits::zeros(3));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0u64; 8];
        let trials = 8000;
        for _ in 0..trials {
            let f = KWiseHash::random(4, 8, 3, &mut rng).unwrap();
            let v = h.xor_shift(&f).unwrap().value(5).unwrap().to_bytes()[0];
            counts[v as usize] += 1;
        }
        let e = trials as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 99th percentile, 7 degrees of freedom.
        assert!(chi2 < 18.475, "chi2={chi2}");
    }

    #[test]
    fn kwise_pairwise_exhaustive() {
        // GF(4), one block of two coefficients: 16 keys.
        let domain = 4;
        for x in 0..domain {
            for y in 0..domain {
                if x == y {
                    continue;
                }
                let mut seen = HashMap::new();
                for k0 in 0..4 {
                    for k1 in 0..4 {
                        let f = KWiseHash::with_key(2, domain, 2, &[k0, k1]).unwrap();
                        *seen.entry((f.eval(x), f.eval(y))).or_insert(0) += 1;
                    }
                }
                assert_eq!(seen.len(), 16);
                assert!(seen.values().all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn kwise_triples_uniform() {
        // Three distinct points under 3-wise hashing: 2^6 joint outcomes.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut counts = vec![0u64; 64];
        let trials = 32_000;
        for _ in 0..trials {
            let f = KWiseHash::random(3, 16, 2, &mut rng).unwrap();
            let v = [1u64, 7, 12].iter().fold(0usize, |acc, &x| acc * 4 + f.eval(x).to_bytes()[0] as usize);
            counts[v] += 1;
        }
        let e = trials as f64 / 64.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 99th percentile, 63 degrees of freedom.
        assert!(chi2 < 92.01, "chi2={chi2}");
    }

    #[test]
    fn prefix_views() {
        let wide = WideOracle::new(77);
        let base = sample_oracle(77, 50, 8, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        let empty = prefix_restrict(&wide, b"", 50, 8, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(base.dump().unwrap(), empty.dump().unwrap());
        let a1 = prefix_restrict(&wide, b"salt-a", 50, 8, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        let a2 = prefix_restrict(&wide, b"salt-a", 50, 8, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(a1.dump().unwrap(), a2.dump().unwrap());
    }

    #[test]
    fn distinct_salts_collide_at_chance() {
        let n = 4;
        let points = 10_000u64;
        let wide = WideOracle::new(1234);
        let mut a = prefix_restrict(&wide, b"A", points, n, OracleMode::Lazy, 0).unwrap();
        let mut b = prefix_restrict(&wide, b"B", points, n, OracleMode::Lazy, 0).unwrap();
        let hits = (0..points).filter(|&x| a.query(x) == b.query(x)).count() as f64;
        let p = 1.0 / 16.0;
        let sigma = (points as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - points as f64 * p).abs() < 4.0 * sigma, "hits={hits}");
    }

    #[test]
    fn wide_eval_lengths() {
        let w = WideOracle::new(1);
        assert_eq!(w.eval_bytes(b"x", 300).len(), 300);
        assert_eq!(w.eval_bytes(b"x", 5), w.eval_bytes(b"x", 5));
        assert_ne!(w.eval_bytes(b"x", 64), w.eval_bytes(b"y", 64));
    }

    #[test]
    fn restricted_class_examples() {
        assert!(!OracleTable::constant(6, Bits::zeros(3)).in_restricted_class().unwrap());
        let balanced = OracleTable::from_fn(6, 3, |x| if x % 2 == 0 { Bits::ones(3) } else { Bits::zeros(3) });
        assert!(balanced.in_restricted_class().unwrap());
    }

    #[test]
    fn restricted_class_frequency() {
        // Exact: each bit independently lands in 11..=21 ones out of 32.
        let binom = |n: u64, k: u64| (0..k).fold(1f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
        let p_bit: f64 = (11..=21).map(|t| binom(32, t)).sum::<f64>() / 2f64.powi(32);
        let exact = p_bit.powi(4);
        let samples = 100_000;
        let hits = (0..samples)
            .filter(|&s| {
                sample_oracle(s, 32, 4, OracleMode::Explicit, DEFAULT_TABLE_CAP)
                    .unwrap()
                    .in_restricted_class()
                    .unwrap()
            })
            .count();
        let freq = hits as f64 / samples as f64;
        assert!((freq - exact).abs() < 0.01 * exact, "freq={freq} exact={exact}");
    }

    proptest! {
        #[test]
        fn repeated_queries_agree(seed in any::<u64>(), xs in proptest::collection::vec(0u64..40, 1..30)) {
            let mut h = sample_oracle(seed, 40, 9, OracleMode::Lazy, 0).unwrap();
            let first: Vec<Bits> = xs.iter().map(|&x| h.query(x)).collect();
            let second: Vec<Bits> = xs.iter().map(|&x| h.query(x)).collect();
            prop_assert_eq!(first, second);
        }

        #[test]
        fn shift_involution(seed in any::<u64>(), k in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = sample_oracle(seed, 20, 10, OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
            let f = KWiseHash::random(k, 20, 10, &mut rng).unwrap();
            prop_assert_eq!(h.xor_shift(&f).unwrap().xor_shift(&f).unwrap().dump().unwrap(), h.dump().unwrap());
        }
    }
}
