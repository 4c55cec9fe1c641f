//! Arithmetic in F_q = F_{p^r} and symbol vectors over F_q^L.
//!
//! Elements are stored as canonical integers: the polynomial
//! `c_0 + c_1 x + ... + c_{r-1} x^{r-1}` is the integer `sum c_i p^i`, so the
//! natural integer order is the coefficient-lexicographic order with the
//! leading coefficient most significant.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A field element in canonical integer encoding.
pub type Fe = u32;

/// Largest field order supported.
pub const MAX_Q: u64 = 1 << 20;
/// Fields up to this order use log/antilog tables.
const TABLE_Q: u32 = 1 << 16;

/// Serializable description of a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub r: u32,
    /// Modulus coefficients, constant term first, monic of degree `r`.
    pub modulus: Vec<u32>,
    /// Coefficients of the generator, constant term first.
    pub gamma: Vec<u32>,
}

/// The field F_{p^r} with its modulus, generator and lookup tables.
#[derive(Debug)]
pub struct Field {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    gamma: Fe,
    exp: Vec<Fe>,
    log: Vec<u32>,
    trace: Vec<u32>,
    roots: Vec<Complex64>,
}

fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q {
        if q.is_multiple_of(p) {
            break;
        }
        p += 1;
    }
    if p * p > q {
        p = q;
    }
    let mut rest = q;
    let mut r = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p as u32, r))
}

/// Splits `q` into `(p, r)` when it is a prime power.
pub fn factor_prime_power(q: u64) -> Option<(u32, u32)> {
    prime_power(q)
}

/// Whether `q` is a prime power supported by [`Field`].
pub fn is_prime_power(q: u64) -> bool {
    q <= MAX_Q && prime_power(q).is_some()
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Polynomials over F_p, constant term first.

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut a: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let dm = m.len() - 1;
    let p = p as u64;
    let lead_inv = inv_mod(m[dm] as u64, p);
    while a.len() > dm {
        let top = a.pop().unwrap();
        if top == 0 {
            continue;
        }
        let f = top * lead_inv % p;
        let shift = a.len() - dm;
        for (i, &c) in m[..dm].iter().enumerate() {
            a[shift + i] = (a[shift + i] + p - f * c as u64 % p) % p;
        }
    }
    a.into_iter().map(|c| c as u32).collect()
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let r = f.len() - 1;
    for d in 1..=r / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                g.push((t % p as u64) as u32);
                t /= p as u64;
            }
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Returns the cached field of order `q`.
    pub fn new(q: u64) -> Result<Arc<Field>> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Field>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = cache.lock().unwrap().get(&q) {
            return Ok(f.clone());
        }
        let field = Arc::new(Self::build(q)?);
        cache.lock().unwrap().insert(q, field.clone());
        Ok(field)
    }

    fn build(q: u64) -> Result<Field> {
        if q > MAX_Q {
            return Err(Error::invalid(format!("field order {q} exceeds 2^20")));
        }
        let (p, r) =
            prime_power(q).ok_or_else(|| Error::invalid(format!("{q} is not a prime power")))?;
        let q32 = q as u32;

        // Smallest monic irreducible: lower coefficients read as a base-p number
        // with the x^{r-1} coefficient most significant.
        let mut modulus = None;
        for idx in 0..q {
            let mut f = Vec::with_capacity(r as usize + 1);
            let mut t = idx;
            for _ in 0..r {
                f.push((t % p as u64) as u32);
                t /= p as u64;
            }
            f.push(1);
            if is_irreducible(&f, p) {
                modulus = Some(f);
                break;
            }
        }
        let modulus = modulus.expect("an irreducible polynomial of every degree exists");

        let mut field = Field {
            p,
            r,
            q: q32,
            modulus,
            gamma: 0,
            exp: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
            roots: (0..p)
                .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / p as f64))
                .collect(),
        };

        let order = q - 1;
        let factors = prime_factors(order);
        let gamma = (1..q32)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&l| field.pow_slow(g, order / l) != 1)
            })
            .expect("F_q^* is cyclic");
        field.gamma = gamma;

        if q32 <= TABLE_Q {
            let n = q32 as usize - 1;
            let mut exp = vec![0; 2 * n.max(1)];
            let mut log = vec![0; q32 as usize];
            let mut x: Fe = 1;
            for i in 0..n {
                exp[i] = x;
                log[x as usize] = i as u32;
                x = field.mul_slow(x, gamma);
            }
            for i in n..exp.len() {
                exp[i] = exp[i - n];
            }
            field.exp = exp;
            field.log = log;
            field.trace = (0..q32).map(|x| field.trace_direct(x)).collect();
        }
        Ok(field)
    }

    /// Rebuilds a field from its serialized description, checking it matches
    /// the canonical choices.
    pub fn from_spec(spec: &FieldSpec) -> Result<Arc<Field>> {
        let q = (spec.p as u64)
            .checked_pow(spec.r)
            .ok_or_else(|| Error::invalid("field order overflow"))?;
        let f = Field::new(q)?;
        if f.spec() != *spec {
            return Err(Error::invalid(
                "field spec does not match the canonical modulus and generator",
            ));
        }
        Ok(f)
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.p,
            r: self.r,
            modulus: self.modulus.clone(),
            gamma: self.coeffs(self.gamma),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn r(&self) -> u32 {
        self.r
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn gamma(&self) -> Fe {
        self.gamma
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Coefficients of `a`, constant term first.
    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.r as usize);
        let mut t = a;
        for _ in 0..self.r {
            out.push(t % self.p);
            t /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Result<Fe> {
        if c.len() != self.r as usize {
            return Err(Error::LengthMismatch { expected: self.r as usize, got: c.len() });
        }
        let mut acc = 0u32;
        for &x in c.iter().rev() {
            if x >= self.p {
                return Err(Error::invalid(format!("coefficient {x} not reduced mod {}", self.p)));
            }
            acc = acc * self.p + x;
        }
        Ok(acc)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.r == 1 {
            let s = a + b;
            return if s >= self.p { s - self.p } else { s };
        }
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        while a > 0 || b > 0 {
            let s = (a % self.p + b % self.p) % self.p;
            out += s * place;
            place *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if self.p == 2 {
            return a;
        }
        if self.r == 1 {
            return if a == 0 { 0 } else { self.p - a };
        }
        let (mut a, mut out, mut place) = (a, 0, 1);
        while a > 0 {
            let d = a % self.p;
            out += ((self.p - d) % self.p) * place;
            place *= self.p;
            a /= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.exp.is_empty() {
            return self.mul_slow(a, b);
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: Fe) -> Fe {
        assert!(a != 0, "inverse of zero");
        if self.exp.is_empty() {
            return self.pow_slow(a, self.q as u64 - 2);
        }
        let n = self.q - 1;
        self.exp[((n - self.log[a as usize]) % n) as usize]
    }

    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if self.exp.is_empty() {
            return self.pow_slow(a, e);
        }
        let n = (self.q - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (e % n)) % n) as usize]
    }

    /// `γ^i`.
    pub fn gamma_pow(&self, i: u64) -> Fe {
        self.pow(self.gamma, i)
    }

    /// Discrete log base γ of a nonzero element.
    pub fn log_gamma(&self, a: Fe) -> Option<u32> {
        if a == 0 {
            return None;
        }
        if !self.log.is_empty() {
            return Some(self.log[a as usize]);
        }
        let mut x = 1;
        for i in 0..self.q - 1 {
            if x == a {
                return Some(i);
            }
            x = self.mul_slow(x, self.gamma);
        }
        None
    }

    fn mul_slow(&self, a: Fe, b: Fe) -> Fe {
        if self.r == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as Fe;
        }
        let ca = self.coeffs(a);
        let cb = self.coeffs(b);
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * self.r as usize - 1];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        let mut rem = poly_rem(&prod, &self.modulus, self.p);
        rem.resize(self.r as usize, 0);
        self.from_coeffs(&rem).expect("reduced remainder")
    }

    fn pow_slow(&self, a: Fe, mut e: u64) -> Fe {
        let mut acc = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, b);
            }
            b = self.mul_slow(b, b);
            e >>= 1;
        }
        acc
    }

    fn trace_direct(&self, x: Fe) -> u32 {
        let mut acc = 0;
        let mut y = x;
        for _ in 0..self.r {
            acc = self.add(acc, y);
            y = self.pow_slow(y, self.p as u64);
        }
        debug_assert!(acc < self.p, "trace must land in the prime subfield");
        acc
    }

    /// Field trace to F_p, returned as an integer in `0..p`.
    #[inline]
    pub fn trace(&self, x: Fe) -> u32 {
        if self.trace.is_empty() {
            self.trace_direct(x)
        } else {
            self.trace[x as usize]
        }
    }

    /// `ω_p^t` from the precomputed root table.
    #[inline]
    pub fn root(&self, t: u32) -> Complex64 {
        self.roots[(t % self.p) as usize]
    }

    /// Inner product over F_q.
    pub fn dot(&self, x: &[Fe], y: &[Fe]) -> Result<Fe> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
        }
        Ok(x.iter()
            .zip(y)
            .fold(0, |acc, (&a, &b)| self.add(acc, self.mul(a, b))))
    }

    /// `ω_p^{Tr(x·z)}`.
    pub fn phase(&self, x: &[Fe], z: &[Fe]) -> Result<Complex64> {
        Ok(self.root(self.trace(self.dot(x, z)?)))
    }

    /// Converts an F_q^L vector to its row-major index, first entry most significant.
    pub fn vec_index(&self, x: &[Fe]) -> u64 {
        x.iter().fold(0u64, |acc, &a| acc * self.q as u64 + a as u64)
    }

    /// Inverse of [`Field::vec_index`].
    pub fn index_vec(&self, mut idx: u64, len: usize) -> Vec<Fe> {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = (idx % self.q as u64) as Fe;
            idx /= self.q as u64;
        }
        out
    }

    /// Elementwise sum of two vectors.
    pub fn vec_add(&self, x: &[Fe], y: &[Fe]) -> Vec<Fe> {
        x.iter().zip(y).map(|(&a, &b)| self.add(a, b)).collect()
    }

    /// Elementwise difference of two vectors.
    pub fn vec_sub(&self, x: &[Fe], y: &[Fe]) -> Vec<Fe> {
        x.iter().zip(y).map(|(&a, &b)| self.sub(a, b)).collect()
    }
}

/// Number of nonzero chunks of size `chunk` in `x`.
pub fn hamming_weight(x: &[Fe], chunk: usize) -> Result<usize> {
    if chunk == 0 || !x.len().is_multiple_of(chunk) {
        return Err(Error::invalid(format!(
            "length {} is not divisible by chunk {chunk}",
            x.len()
        )));
    }
    Ok(x.chunks(chunk).filter(|c| c.iter().any(|&a| a != 0)).count())
}

/// Number of positions where `x` and `y` differ, counted per chunk.
pub fn hamming_distance(x: &[Fe], y: &[Fe], chunk: usize) -> usize {
    x.chunks(chunk)
        .zip(y.chunks(chunk))
        .filter(|(a, b)| a != b)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SMALL_Q: [u64; 12] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27];

    #[test]
    fn f4_basics() {
        let f = Field::new(4).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.trace(0), 0);
        // γ = x, γ² = x + 1, so γ + γ² = 1.
        assert_eq!(f.gamma(), 2);
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.trace(f.gamma()), 1);
    }

    #[test]
    fn f9_trace_of_one() {
        let f = Field::new(9).unwrap();
        assert_eq!(f.trace(1), 2);
    }

    #[test]
    fn f5_dot() {
        let f = Field::new(5).unwrap();
        assert_eq!(f.dot(&[1, 2], &[3, 4]).unwrap(), 1);
        assert_eq!(f.dot(&[0, 0], &[3, 4]).unwrap(), 0);
        assert!(f.dot(&[1], &[3, 4]).is_err());
    }

    #[test]
    fn f2_phase() {
        let f = Field::new(2).unwrap();
        let w = f.phase(&[1], &[1]).unwrap();
        assert!((w - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let one = f.phase(&[0, 0], &[1, 1]).unwrap();
        assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hamming_weight_cases() {
        assert_eq!(hamming_weight(&[0, 0, 1, 0], 2).unwrap(), 1);
        assert_eq!(hamming_weight(&[0, 0, 0], 1).unwrap(), 0);
        assert_eq!(hamming_weight(&[1, 2, 3], 1).unwrap(), 3);
        assert!(hamming_weight(&[1, 2, 3], 2).is_err());
    }

    #[test]
    fn rejects_non_prime_powers() {
        assert!(Field::new(6).is_err());
        assert!(Field::new(1).is_err());
        assert!(Field::new(1 << 21).is_err());
    }

    #[test]
    fn modulus_is_smallest_irreducible() {
        for q in SMALL_Q {
            let f = Field::new(q).unwrap();
            let (p, r) = (f.p(), f.r() as usize);
            assert!(is_irreducible(f.modulus(), p));
            // Every monic polynomial that sorts before the modulus has a root or a factor.
            let target = f.modulus()[..r]
                .iter()
                .rev()
                .fold(0u64, |acc, &c| acc * p as u64 + c as u64);
            for idx in 0..target {
                let mut g: Vec<u32> = (0..r)
                    .map(|i| ((idx / (p as u64).pow(i as u32)) % p as u64) as u32)
                    .collect();
                g.push(1);
                assert!(!is_irreducible(&g, p), "q={q} idx={idx}");
            }
        }
    }

    #[test]
    fn gamma_enumerates_units_once() {
        for q in [2u64, 3, 4, 5, 8, 9, 16, 27, 32, 49, 64, 81, 125, 128, 256, 1024, 65536] {
            let f = Field::new(q).unwrap();
            let mut seen = vec![false; q as usize];
            let mut x = 1;
            for _ in 0..q - 1 {
                assert!(!seen[x as usize], "q={q} repeats {x}");
                seen[x as usize] = true;
                x = f.mul(x, f.gamma());
            }
            assert_eq!(x, 1);
            assert!(!seen[0]);
            assert_eq!(seen.iter().filter(|&&s| s).count() as u64, q - 1);
            // No smaller element has full order.
            for g in 1..f.gamma() {
                let ord = (1..q).find(|&e| f.pow(g, e) == 1).unwrap();
                assert!(ord < q - 1);
            }
        }
    }

    #[test]
    fn table_and_slow_paths_agree() {
        for q in [9u64, 16, 27, 256] {
            let f = Field::new(q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(q);
            for _ in 0..500 {
                let a = rng.gen_range(0..q as u32);
                let b = rng.gen_range(0..q as u32);
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
            }
        }
    }

    #[test]
    fn large_field_without_tables() {
        let f = Field::new(1 << 17).unwrap();
        assert!(f.exp.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = rng.gen_range(1..f.q());
            let b = rng.gen_range(0..f.q());
            assert_eq!(f.mul(f.div(b, a), a), b);
            let t = f.trace(f.add(a, b));
            assert_eq!(t, (f.trace(a) + f.trace(b)) % 2);
        }
    }

    #[test]
    fn frobenius_fixes_trace() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 37, 41, 43, 47, 49, 53, 59, 61, 64] {
            let f = Field::new(q).unwrap();
            for x in 0..q as u32 {
                let t = f.trace(x);
                assert!(t < f.p());
                // t viewed as the element t·1 of F_q, raised to p.
                let te = f.from_coeffs(&{
                    let mut c = vec![0; f.r() as usize];
                    c[0] = t;
                    c
                })
                .unwrap();
                assert_eq!(f.pow(te, f.p() as u64), te);
            }
        }
    }

    #[test]
    fn trace_additive_exhaustive() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let f = Field::new(q).unwrap();
            for x in 0..q as u32 {
                for y in 0..q as u32 {
                    assert_eq!(f.trace(f.add(x, y)), (f.trace(x) + f.trace(y)) % f.p());
                }
            }
        }
    }

    #[test]
    fn character_orthogonality() {
        // All (x, y) pairs for small spaces.
        for (q, n) in [(2u64, 6usize), (3, 4), (4, 3), (5, 3), (7, 2), (8, 2), (9, 2), (16, 2), (64, 1), (243, 1)] {
            let f = Field::new(q).unwrap();
            let total = q.pow(n as u32);
            for xi in 1..total {
                let x = f.index_vec(xi, n);
                let mut s = Complex64::new(0.0, 0.0);
                for yi in 0..total {
                    s += f.phase(&x, &f.index_vec(yi, n)).unwrap();
                }
                assert!(s.norm() < 1e-9 * total as f64, "q={q} n={n} x={x:?}");
            }
        }
        // Larger spaces: every y, random x.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (q, n) in [(2u64, 16usize), (4, 8), (16, 4), (256, 2), (3, 10), (5, 6), (17, 3), (65536, 1)] {
            let f = Field::new(q).unwrap();
            let total = q.pow(n as u32);
            for _ in 0..4 {
                let xi = rng.gen_range(1..total);
                let x = f.index_vec(xi, n);
                let mut s = Complex64::new(0.0, 0.0);
                for yi in 0..total {
                    s += f.phase(&x, &f.index_vec(yi, n)).unwrap();
                }
                assert!(s.norm() < 1e-9 * total as f64, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        let f = Field::new(27).unwrap();
        let spec = f.spec();
        let text = toml::to_string(&spec).unwrap();
        let back: FieldSpec = toml::from_str(&text).unwrap();
        assert!(Arc::ptr_eq(&Field::from_spec(&back).unwrap(), &f));
        let mut bad = spec.clone();
        bad.gamma = vec![1, 0, 0];
        assert!(Field::from_spec(&bad).is_err());
    }

    proptest! {
        #[test]
        fn field_axioms(qi in 0usize..SMALL_Q.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let q = SMALL_Q[qi] as u32;
            let f = Field::new(q as u64).unwrap();
            let (a, b, c) = (a % q, b % q, c % q);
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), 0);
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }

        #[test]
        fn dot_bilinear_symmetric(qi in 0usize..SMALL_Q.len(), seed in any::<u64>(), len in 1usize..6) {
            let f = Field::new(SMALL_Q[qi]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v = || (0..len).map(|_| rng.gen_range(0..f.q())).collect::<Vec<_>>();
            let (x, y, z) = (v(), v(), v());
            prop_assert_eq!(f.dot(&x, &y).unwrap(), f.dot(&y, &x).unwrap());
            prop_assert_eq!(
                f.dot(&f.vec_add(&x, &z), &y).unwrap(),
                f.add(f.dot(&x, &y).unwrap(), f.dot(&z, &y).unwrap())
            );
            let w = f.phase(&x, &y).unwrap();
            prop_assert!((w.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn index_round_trip(qi in 0usize..SMALL_Q.len(), seed in any::<u64>(), len in 1usize..5) {
            let f = Field::new(SMALL_Q[qi]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<Fe> = (0..len).map(|_| rng.gen_range(0..f.q())).collect();
            prop_assert_eq!(f.index_vec(f.vec_index(&x), len), x);
        }
    }
}
