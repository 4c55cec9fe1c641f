//! Dense amplitude simulation over `Σ^n` with `Σ = F_q^m`.
//!
//! A register over `Σ^n` is indexed exactly like `F_q^{nm}`: row-major, first
//! coordinate most significant. The QFT over `Σ^n` is therefore the tensor
//! power of the `q × q` transform `ω_p^{Tr(ab)}/√q`, applied one axis at a time.
//! Two-register states put register 1 in the high half of the index.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::codes::{DualDecoder, FoldedCode};
use crate::gf_core::Field;
use crate::rom::BitFunction;
use crate::{Error, Result};

/// Default limit on amplitudes held by one state.
pub const DEFAULT_AMPLITUDE_CAP: u64 = 1 << 24;

const QSV_MAGIC: &[u8; 4] = b"QSV1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Additive group of `F_q^L` acting on row-major indices.
///
/// Field addition is digit-wise addition mod `p` on the base-`p` expansion of
/// the index, with no carries.
#[derive(Debug, Clone)]
pub struct IndexSpace {
    p: u64,
    dim: u64,
}

impl IndexSpace {
    pub fn new(field: &Field, len: usize) -> Self {
        IndexSpace { p: field.p() as u64, dim: (field.q() as u64).pow(len as u32) }
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    #[inline]
    pub fn add(&self, mut a: u64, mut b: u64) -> u64 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut out, mut pw) = (0, 1);
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * pw;
            a /= self.p;
            b /= self.p;
            pw *= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, mut a: u64) -> u64 {
        if self.p == 2 {
            return a;
        }
        let (mut out, mut pw) = (0, 1);
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * pw;
            a /= self.p;
            pw *= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    /// `base + e` (or `base - e`) for `e = 0, 1, …, dim - 1` in index order.
    pub fn shifts(&self, base: u64, negate: bool) -> Shifts {
        let mut digits = Vec::new();
        let mut rest = base;
        let mut width = 1;
        while width < self.dim {
            digits.push(rest % self.p);
            rest /= self.p;
            width *= self.p;
        }
        Shifts { p: self.p, base: digits.clone(), cur: vec![0; digits.len()], value: base, remaining: self.dim, negate }
    }
}

/// Iterator returned by [`IndexSpace::shifts`].
#[derive(Debug, Clone)]
pub struct Shifts {
    p: u64,
    base: Vec<u64>,
    cur: Vec<u64>,
    value: u64,
    remaining: u64,
    negate: bool,
}

impl Iterator for Shifts {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.value;
        let digit = |b: u64, e: u64, p: u64, neg: bool| if neg { (b + p - e) % p } else { (b + e) % p };
        let mut pw = 1u64;
        for j in 0..self.cur.len() {
            let old = digit(self.base[j], self.cur[j], self.p, self.negate);
            let wrap = self.cur[j] + 1 == self.p;
            self.cur[j] = if wrap { 0 } else { self.cur[j] + 1 };
            let new = digit(self.base[j], self.cur[j], self.p, self.negate);
            self.value = self.value - old * pw + new * pw;
            if !wrap {
                break;
            }
            pw *= self.p;
        }
        Some(out)
    }
}

fn qft_matrix(field: &Field, dir: Direction) -> Vec<Complex64> {
    let q = field.q() as usize;
    let scale = 1.0 / (q as f64).sqrt();
    let mut m = vec![Complex64::new(0.0, 0.0); q * q];
    for a in 0..q {
        for b in a..q {
            let mut w = field.root(field.trace(field.mul(a as u32, b as u32))) * scale;
            if dir == Direction::Inverse {
                w = w.conj();
            }
            m[a * q + b] = w;
            m[b * q + a] = w;
        }
    }
    m
}

/// Applies the `q × q` matrix along axes `axes` of a `q^total` array.
fn transform_axes(amps: &mut [Complex64], q: usize, total: usize, axes: std::ops::Range<usize>, m: &[Complex64]) {
    let mut buf = vec![Complex64::new(0.0, 0.0); q];
    for t in axes {
        let stride = q.pow((total - 1 - t) as u32);
        let block = stride * q;
        for base in (0..amps.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (j, slot) in buf.iter_mut().enumerate() {
                    *slot = amps[start + j * stride];
                }
                for a in 0..q {
                    let row = &m[a * q..(a + 1) * q];
                    let acc = row.iter().zip(&buf).fold(Complex64::new(0.0, 0.0), |acc, (w, v)| acc + w * v);
                    amps[start + a * stride] = acc;
                }
            }
        }
    }
}

/// The QFT of a function on `F_q^len` given as a dense vector.
pub fn fourier(field: &Field, len: usize, f: &[Complex64], dir: Direction) -> Result<Vec<Complex64>> {
    let dim = (field.q() as u64).pow(len as u32) as usize;
    if f.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, got: f.len() });
    }
    let mut out = f.to_vec();
    transform_axes(&mut out, field.q() as usize, len, 0..len, &qft_matrix(field, dir));
    Ok(out)
}

/// `(f ∗ g)(z) = Σ_x f(x) g(z - x)`.
pub fn convolve(space: &IndexSpace, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let dim = space.dim() as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for (x, &fx) in f.iter().enumerate() {
        if fx == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (ge, z) in g.iter().zip(space.shifts(x as u64, false)) {
            out[z as usize] += fx * ge;
        }
    }
    out
}

/// Amplitudes over one or two registers, each over `Σ^n`.
#[derive(Debug, Clone)]
pub struct StateVector {
    field: Arc<Field>,
    m: usize,
    n: usize,
    regs: usize,
    amps: Vec<Complex64>,
}

fn check_cap(field: &Field, m: usize, n: usize, regs: usize, cap: u64) -> Result<usize> {
    let axes = (m * n * regs) as u32;
    let need = (field.q() as u128).checked_pow(axes).unwrap_or(u128::MAX);
    if need > cap as u128 {
        return Err(Error::CapExceeded { what: "state vector amplitudes", need, cap: cap as u128 });
    }
    Ok(need as usize)
}

impl StateVector {
    /// The basis state `|0…0⟩`.
    pub fn zero(field: Arc<Field>, m: usize, n: usize, regs: usize, cap: u64) -> Result<Self> {
        if !(1..=2).contains(&regs) {
            return Err(Error::invalid("a state has one or two registers"));
        }
        let len = check_cap(&field, m, n, regs, cap)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { field, m, n, regs, amps })
    }

    pub fn from_amplitudes(field: Arc<Field>, m: usize, n: usize, regs: usize, amps: Vec<Complex64>) -> Result<Self> {
        if !(1..=2).contains(&regs) {
            return Err(Error::invalid("a state has one or two registers"));
        }
        let len = check_cap(&field, m, n, regs, u64::MAX)?;
        if amps.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: amps.len() });
        }
        Ok(StateVector { field, m, n, regs, amps })
    }

    /// Equal superposition over `support`.
    pub fn uniform_over(field: Arc<Field>, m: usize, n: usize, support: &[u64], cap: u64) -> Result<Self> {
        let len = check_cap(&field, m, n, 1, cap)?;
        if support.is_empty() {
            return Err(Error::invalid("empty support"));
        }
        let a = Complex64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        for &s in support {
            amps[s as usize] = a;
        }
        Ok(StateVector { field, m, n, regs: 1, amps })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn regs(&self) -> usize {
        self.regs
    }
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }
    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }
    pub fn sigma_size(&self) -> u64 {
        (self.field.q() as u64).pow(self.m as u32)
    }
    /// `|Σ|^n`, the dimension of one register.
    pub fn reg_dim(&self) -> usize {
        (self.field.q() as usize).pow((self.m * self.n) as u32)
    }
    pub fn space(&self) -> IndexSpace {
        IndexSpace::new(&self.field, self.m * self.n)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(())
    }

    /// `self ⊗ other` for two single-register states of the same shape.
    pub fn tensor(&self, other: &StateVector, cap: u64) -> Result<StateVector> {
        if self.regs != 1 || other.regs != 1 || self.n != other.n || self.m != other.m || self.field.q() != other.field.q() {
            return Err(Error::invalid("tensor needs two single-register states of equal shape"));
        }
        let len = check_cap(&self.field, self.m, self.n, 2, cap)?;
        let mut amps = Vec::with_capacity(len);
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector { field: self.field.clone(), m: self.m, n: self.n, regs: 2, amps })
    }

    /// QFT over `Σ^n` on register `reg` (0 or 1).
    pub fn qft(&mut self, reg: usize, dir: Direction) -> Result<()> {
        if reg >= self.regs {
            return Err(Error::invalid(format!("register {reg} out of range")));
        }
        let l = self.m * self.n;
        let m = qft_matrix(&self.field, dir);
        transform_axes(&mut self.amps, self.field.q() as usize, l * self.regs, reg * l..(reg + 1) * l, &m);
        Ok(())
    }

    fn require_two(&self) -> Result<usize> {
        if self.regs != 2 {
            return Err(Error::invalid("operation needs a two-register state"));
        }
        Ok(self.reg_dim())
    }

    fn permute(&mut self, map: impl Fn(usize, usize) -> (usize, usize)) -> Result<()> {
        let d = self.require_two()?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let (x, y) = map(i / d, i % d);
            out[x * d + y] = a;
        }
        self.amps = out;
        Ok(())
    }

    /// `|x⟩|e⟩ ↦ |x⟩|x + e⟩`.
    pub fn apply_u_add(&mut self) -> Result<()> {
        let s = self.space();
        self.permute(|x, e| (x, s.add(x as u64, e as u64) as usize))
    }

    /// `|x⟩|z⟩ ↦ |x⟩|z - x⟩`.
    pub fn apply_u_add_inverse(&mut self) -> Result<()> {
        let s = self.space();
        self.permute(|x, z| (x, s.sub(z as u64, x as u64) as usize))
    }

    /// `|a⟩|b⟩ ↦ |a - F(b)⟩|b⟩` for a total decoder table `F`.
    pub fn apply_u_decode(&mut self, table: &[u64]) -> Result<()> {
        let d = self.require_two()?;
        if table.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: table.len() });
        }
        let s = self.space();
        self.permute(|a, b| (s.sub(a as u64, table[b]) as usize, b))
    }

    /// Squared-amplitude marginal of one register.
    pub fn marginal(&self, reg: usize) -> Result<Vec<f64>> {
        if reg >= self.regs {
            return Err(Error::invalid(format!("register {reg} out of range")));
        }
        let d = self.reg_dim();
        let mut out = vec![0.0; d];
        for (i, a) in self.amps.iter().enumerate() {
            let idx = if self.regs == 1 { i } else if reg == 0 { i / d } else { i % d };
            out[idx] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Measures `reg`, returning the outcome index and the collapsed state.
    pub fn measure<R: Rng + ?Sized>(&self, reg: usize, rng: &mut R) -> Result<(u64, StateVector)> {
        let marginal = self.marginal(reg)?;
        let total: f64 = marginal.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("cannot measure the zero vector"));
        }
        let outcome = sample_index(&marginal, total, rng);
        let d = self.reg_dim();
        let scale = 1.0 / marginal[outcome].sqrt();
        let mut collapsed = self.clone();
        for (i, a) in collapsed.amps.iter_mut().enumerate() {
            let idx = if self.regs == 1 { i } else if reg == 0 { i / d } else { i % d };
            *a = if idx == outcome { *a * scale } else { Complex64::new(0.0, 0.0) };
        }
        Ok((outcome as u64, collapsed))
    }

    /// QSV1 dump: magic, then `|Σ|`, `n`, `regs` as u32 LE, then (re, im) f64 LE pairs.
    pub fn to_qsv1(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.amps.len() * 16);
        out.extend_from_slice(QSV_MAGIC);
        out.extend_from_slice(&(self.sigma_size() as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.regs as u32).to_le_bytes());
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }
}

/// Draws an index with probability `weights[i] / total`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let mut r = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if r < w {
            return i;
        }
        r -= w;
    }
    last
}

/// Euclidean distance between two states of the same shape.
pub fn state_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.amps.len() != b.amps.len() {
        return Err(Error::LengthMismatch { expected: a.amps.len(), got: b.amps.len() });
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Codeword indices of a folded code in `Σ^n`, sorted.
pub fn codeword_indices(code: &FoldedCode, cap: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    code.inner().for_each_codeword(cap, |c| out.push(code.word_index(c)))?;
    out.sort_unstable();
    Ok(out)
}

/// `|ψ⟩ ∝ Σ_{x∈C} |x⟩`.
pub fn code_superposition(code: &FoldedCode, cap: u64) -> Result<StateVector> {
    check_cap(code.field(), code.m(), code.n(), 1, cap)?;
    let support = codeword_indices(code, cap)?;
    StateVector::uniform_over(code.field().clone(), code.m(), code.n(), &support, cap)
}

/// Tensor product of per-symbol amplitude vectors.
pub fn product_state(field: Arc<Field>, m: usize, factors: &[Vec<Complex64>], cap: u64) -> Result<StateVector> {
    let n = factors.len();
    let len = check_cap(&field, m, n, 1, cap)?;
    let sigma = (field.q() as usize).pow(m as u32);
    if let Some(f) = factors.iter().find(|f| f.len() != sigma) {
        return Err(Error::LengthMismatch { expected: sigma, got: f.len() });
    }
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for f in factors {
        amps = amps.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
    }
    debug_assert_eq!(amps.len(), len);
    Ok(StateVector { field, m, n, regs: 1, amps })
}

/// `W_i`: amplitude `1/√|T_i|` on `T_i = {x : H_i(x) = y_i}`; `None` if `T_i` is empty.
pub fn preimage_amplitudes(h_i: &BitFunction, y_i: bool) -> Option<Vec<Complex64>> {
    let t = h_i.values.iter().filter(|&&v| v == y_i).count();
    if t == 0 {
        return None;
    }
    let a = Complex64::new(1.0 / (t as f64).sqrt(), 0.0);
    Some(h_i.values.iter().map(|&v| if v == y_i { a } else { Complex64::new(0.0, 0.0) }).collect())
}

/// Result of repeat-until-success preparation of `|φ_i⟩`.
#[derive(Debug, Clone)]
pub struct Postselection {
    /// Trials used, including the successful one.
    pub trials: usize,
    /// Single-symbol state on success; `None` after `λ` failures.
    pub state: Option<StateVector>,
}

/// Prepares `Σ_x|x⟩|H_i(x)⟩`, measures the bit, and retries up to `lambda` times.
pub fn postselected_state<R: Rng + ?Sized>(
    field: Arc<Field>,
    m: usize,
    h_i: &BitFunction,
    y_i: bool,
    lambda: usize,
    rng: &mut R,
) -> Result<Postselection> {
    let sigma = (field.q() as u64).pow(m as u32);
    if h_i.values.len() as u64 != sigma {
        return Err(Error::LengthMismatch { expected: sigma as usize, got: h_i.values.len() });
    }
    let t = h_i.values.iter().filter(|&&v| v == y_i).count() as u64;
    for trial in 1..=lambda {
        if rng.gen_range(0..sigma) < t {
            let amps = preimage_amplitudes(h_i, y_i).expect("nonempty preimage");
            let state = StateVector::from_amplitudes(field, m, 1, 1, amps)?;
            return Ok(Postselection { trials: trial, state: Some(state) });
        }
    }
    Ok(Postselection { trials: lambda, state: None })
}

/// The total decoder `F` on `Σ^n` as an index table, with ⊥ mapped to 0.
pub fn decoder_table(code: &FoldedCode, decoder: &DualDecoder, cap: u64) -> Result<Vec<u64>> {
    let dim = check_cap(code.field(), code.m(), code.n(), 1, cap)?;
    Ok((0..dim as u64)
        .map(|z| {
            let word = code.word_from_index(z);
            decoder.decode(&word).map_or(0, |x| code.word_index(&x))
        })
        .collect())
}

/// `𝒢 = {e : F(x + e) = x for all x ∈ C⊥}` as a membership mask.
pub fn good_errors(space: &IndexSpace, table: &[u64], dual: &[u64]) -> Vec<bool> {
    (0..space.dim())
        .map(|e| dual.iter().all(|&x| table[space.add(x, e) as usize] == x))
        .collect()
}

/// `Ŵ(e) = Π_i Ŵ_i(e_i)` as a dense vector over `Σ^n`.
pub fn product_spectrum(spectra: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for s in spectra {
        out = out.iter().flat_map(|a| s.iter().map(move |b| a * b)).collect();
    }
    out
}

/// Spectral mass of the BAD set and the resulting residual bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadSetReport {
    pub eps: f64,
    pub delta: f64,
    pub residual_bound: f64,
}

/// ε and δ for `V̂` uniform on `dual` and `GOOD = dual × good`.
pub fn bad_set_report(space: &IndexSpace, dual: &[u64], spectra: &[Vec<Complex64>], good: &[bool], cap: u64) -> Result<BadSetReport> {
    let dim = space.dim();
    if dim > cap {
        return Err(Error::CapExceeded { what: "BAD-set enumeration", need: dim as u128, cap: cap as u128 });
    }
    if good.len() as u64 != dim {
        return Err(Error::LengthMismatch { expected: dim as usize, got: good.len() });
    }
    let w = product_spectrum(spectra);
    if w.len() as u64 != dim {
        return Err(Error::LengthMismatch { expected: dim as usize, got: w.len() });
    }
    let v = 1.0 / (dual.len() as f64).sqrt();
    let eps: f64 = w
        .iter()
        .zip(good)
        .filter(|(_, &g)| !g)
        .map(|(a, _)| a.norm_sqr())
        .sum();
    let mut delta = 0.0;
    for z in 0..dim {
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in dual {
            let e = space.sub(z, x) as usize;
            if !good[e] {
                acc += w[e];
            }
        }
        delta += (acc * v).norm_sqr();
    }
    Ok(BadSetReport { eps, delta, residual_bound: eps.sqrt() + delta.sqrt() })
}

/// Worst errors of the Fourier identities on one `(q, m, n)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IdentityReport {
    pub q: u64,
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub parseval: f64,
    pub product_rule: f64,
    /// `(f·g)^ = |Σ|^{-n/2} f̂ ∗ ĝ`.
    pub conv_product: f64,
    /// `(f ∗ g)^ = |Σ|^{n/2} f̂·ĝ`.
    pub conv_convolution: f64,
    /// `(f·(g ∗ h))^ = f̂ ∗ (ĝ·ĥ)`.
    pub conv_mixed: f64,
    pub orthogonality: f64,
    /// Distance between `QFT|C⟩` and `|C⊥⟩`, over every code at these parameters.
    pub dual_qft: Option<f64>,
}

impl IdentityReport {
    pub fn max_error(&self) -> f64 {
        [self.parseval, self.product_rule, self.conv_product, self.conv_convolution, self.conv_mixed, self.orthogonality, self.dual_qft.unwrap_or(0.0)]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_error() <= tol
    }
}

/// Convolution evaluated at one point, straight from the definition.
fn convolve_at(space: &IndexSpace, f: &[Complex64], g: &[Complex64], z: u64) -> Complex64 {
    f.iter().zip(space.shifts(z, true)).map(|(&fx, w)| fx * g[w as usize]).sum()
}

fn rel_err(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(1.0)
}

/// Output points at which convolution-side values are compared.
const CONV_POINTS: usize = 32;

/// Checks every Fourier identity on `samples` random functions over `Σ^n`.
///
/// Convolutions are evaluated directly at up to 32 random output points, and
/// the time-domain convolution in the mixed identity uses a sparse operand
/// on spaces larger than 256 points, which keeps each check linear in `|Σ|^n`.
pub fn fourier_identity_suite<R: Rng + ?Sized>(q: u64, m: usize, n: usize, samples: usize, rng: &mut R) -> Result<IdentityReport> {
    let mut r = linear_identities(q, m * n, samples, rng)?;
    symbol_identities(&mut r, m, n, samples, rng)?;
    Ok(r)
}

/// [`fourier_identity_suite`] over every `(q, m, n)` with `q ≤ max_q` and
/// `q^{mn} ≤ max_dim`.
///
/// Parseval, the convolution identities and orthogonality only see `F_q^{mn}`,
/// so they run once per `(q, mn)` and are shared by the splits `m × n`.
pub fn identity_suite<R: Rng + ?Sized>(max_dim: u64, max_q: u64, samples: usize, rng: &mut R) -> Result<Vec<IdentityReport>> {
    let mut shared: std::collections::BTreeMap<(u64, usize), IdentityReport> = std::collections::BTreeMap::new();
    let mut out = Vec::new();
    for (q, m, n) in identity_parameter_sets(max_dim).into_iter().filter(|s| s.0 <= max_q) {
        let base = match shared.get(&(q, m * n)) {
            Some(r) => r.clone(),
            None => {
                let r = linear_identities(q, m * n, samples, rng)?;
                shared.insert((q, m * n), r.clone());
                r
            }
        };
        let mut r = base;
        symbol_identities(&mut r, m, n, samples, rng)?;
        out.push(r);
    }
    Ok(out)
}

/// Product rule and dual-code transform for the split `Σ = F_q^m`, `n` symbols.
fn symbol_identities<R: Rng + ?Sized>(r: &mut IdentityReport, m: usize, n: usize, samples: usize, rng: &mut R) -> Result<()> {
    let q = r.q;
    let field = Field::new(q)?;
    let len = m * n;
    let dim = (q as usize).pow(len as u32);
    let sym = (q as usize).pow(m as u32);
    r.m = m;
    r.n = n;
    r.product_rule = 0.0;
    r.dual_qft = None;
    for _ in 0..samples {
        let factors: Vec<Vec<Complex64>> = (0..n).map(|_| random_function(rng, sym)).collect();
        let prod = product_spectrum(&factors);
        let factor_hats: Vec<Vec<Complex64>> = factors.iter().map(|fi| fourier(&field, m, fi, Direction::Forward)).collect::<Result<_>>()?;
        let lhs = fourier(&field, len, &prod, Direction::Forward)?;
        let rhs = product_spectrum(&factor_hats);
        r.product_rule = r.product_rule.max(lhs.iter().zip(&rhs).map(|(a, b)| rel_err(*a, *b, 1.0)).fold(0.0, f64::max));
    }
    if (q - 1) as usize == m * n {
        for k in 0..(q - 1) as usize {
            let Ok(code) = FoldedCode::new(q, m, k, None) else { continue };
            let Ok(dual) = code.dual() else { continue };
            let mut s = code_superposition(&code, dim as u64)?;
            s.qft(0, Direction::Forward)?;
            let d = state_distance(&s, &code_superposition(&dual, dim as u64)?)?;
            r.dual_qft = Some(r.dual_qft.unwrap_or(0.0).max(d));
        }
    }
    Ok(())
}

fn random_function<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Identities that depend only on `F_q^len`; reported with `m = len, n = 1`.
fn linear_identities<R: Rng + ?Sized>(q: u64, len: usize, samples: usize, rng: &mut R) -> Result<IdentityReport> {
    let field = Field::new(q)?;
    let space = IndexSpace::new(&field, len);
    let dim = space.dim() as usize;
    let root = (dim as f64).sqrt();
    let points = |rng: &mut R| -> Vec<u64> {
        if dim <= CONV_POINTS {
            (0..dim as u64).collect()
        } else {
            (0..CONV_POINTS).map(|_| rng.gen_range(0..dim as u64)).collect()
        }
    };
    let fwd = |f: &[Complex64]| fourier(&field, len, f, Direction::Forward);
    let mut r = IdentityReport {
        q,
        m: len,
        n: 1,
        samples,
        parseval: 0.0,
        product_rule: 0.0,
        conv_product: 0.0,
        conv_convolution: 0.0,
        conv_mixed: 0.0,
        orthogonality: 0.0,
        dual_qft: None,
    };
    for _ in 0..samples {
        let f = random_function(rng, dim);
        let g = random_function(rng, dim);
        let fh = fwd(&f)?;
        let gh = fwd(&g)?;

        let n1: f64 = f.iter().map(|a| a.norm_sqr()).sum();
        let n2: f64 = fh.iter().map(|a| a.norm_sqr()).sum();
        r.parseval = r.parseval.max((n1 - n2).abs() / n1);

        let fg: Vec<Complex64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
        let fg_hat = fwd(&fg)?;
        for z in points(rng) {
            let rhs = convolve_at(&space, &fh, &gh, z) / root;
            r.conv_product = r.conv_product.max(rel_err(fg_hat[z as usize], rhs, root));
        }

        let g_sparse: Vec<Complex64> = if dim <= 256 {
            g.clone()
        } else {
            let mut s = vec![Complex64::new(0.0, 0.0); dim];
            for _ in 0..16 {
                s[rng.gen_range(0..dim)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            s
        };
        let gs_hat = fwd(&g_sparse)?;
        let lhs = fwd(&sparse_convolve(&space, &f, &g_sparse))?;
        for (z, l) in lhs.iter().enumerate() {
            r.conv_convolution = r.conv_convolution.max(rel_err(*l, fh[z] * gs_hat[z] * root, root));
        }

        let h = random_function(rng, dim);
        let hh = fwd(&h)?;
        let gconvh = sparse_convolve(&space, &h, &g_sparse);
        let mixed: Vec<Complex64> = f.iter().zip(&gconvh).map(|(a, b)| a * b).collect();
        let lhs = fwd(&mixed)?;
        let gh_prod: Vec<Complex64> = gs_hat.iter().zip(&hh).map(|(a, b)| a * b).collect();
        for z in points(rng) {
            let rhs = convolve_at(&space, &fh, &gh_prod, z);
            r.conv_mixed = r.conv_mixed.max(rel_err(lhs[z as usize], rhs, root));
        }

        let x = rng.gen_range(0..dim as u64);
        let xv = field.index_vec(x, len);
        let mut sum = Complex64::new(0.0, 0.0);
        for y in 0..dim as u64 {
            sum += field.phase(&xv, &field.index_vec(y, len))?;
        }
        let expect = if x == 0 { dim as f64 } else { 0.0 };
        r.orthogonality = r.orthogonality.max(rel_err(sum, Complex64::new(expect, 0.0), dim as f64));
    }
    Ok(r)
}

/// Convolution that skips zero entries of `g`.
fn sparse_convolve(space: &IndexSpace, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    convolve(space, g, f)
}

/// Every `(q, m, n)` with `q^{mn} ≤ max_dim`.
pub fn identity_parameter_sets(max_dim: u64) -> Vec<(u64, usize, usize)> {
    let mut out = Vec::new();
    for q in 2..=max_dim {
        if !crate::gf_core::is_prime_power(q) {
            continue;
        }
        let mut len = 1;
        while q.checked_pow(len as u32).is_some_and(|d| d <= max_dim) {
            for m in 1..=len {
                if len % m == 0 {
                    out.push((q, m, len / m));
                }
            }
            len += 1;
        }
    }
    out
}
