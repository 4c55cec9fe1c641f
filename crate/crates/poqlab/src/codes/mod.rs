//! Reed-Solomon, generalized RS and folded RS codes over F_q.
//!
//! All codes have length `N = q - 1` with evaluation points `γ^1, ..., γ^N`.
//! Vectors are kept unfolded as `N` field elements; the folded view groups
//! consecutive runs of `m` elements into one symbol of `Σ = F_q^m`.

mod gs;
pub mod linalg;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::gf_core::{hamming_distance, hamming_weight, Fe, Field};
use crate::{Error, Result};

pub use gs::{brute_force_list_decode, gs_list_decode, gs_parameters, GsParameters};

/// Default cap on exhaustive codeword enumeration.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 22;

/// `GRS_{k,v}`: codewords `(v_1 f(γ), ..., v_N f(γ^N))` for `deg f ≤ k`.
///
/// Plain Reed-Solomon codes are the case `v = (1, ..., 1)`.
#[derive(Debug, Clone)]
pub struct GrsCode {
    field: Arc<Field>,
    k: usize,
    v: Vec<Fe>,
    points: Vec<Fe>,
    parity: Vec<Vec<Fe>>,
}

impl GrsCode {
    /// `RS_{F_q, γ, k}`.
    pub fn rs(field: Arc<Field>, k: usize) -> Result<Self> {
        let n = field.q() as usize - 1;
        Self::grs(field, k, vec![1; n])
    }

    pub fn grs(field: Arc<Field>, k: usize, v: Vec<Fe>) -> Result<Self> {
        let n = field.q() as usize - 1;
        if n == 0 || k >= n {
            return Err(Error::invalid(format!("need 0 <= k < N, got k={k}, N={n}")));
        }
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
        if v.iter().any(|&x| x == 0 || x >= field.q()) {
            return Err(Error::invalid("column multipliers must be nonzero field elements"));
        }
        let points = (1..=n as u64).map(|i| field.gamma_pow(i)).collect();
        let mut code = GrsCode { field, k, v, points, parity: Vec::new() };
        let gen = code.generator_matrix();
        code.parity = linalg::nullspace(&code.field, &gen, n);
        Ok(code)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }
    /// Degree parameter `k`.
    pub fn k(&self) -> usize {
        self.k
    }
    /// Code length `N`.
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn dimension(&self) -> usize {
        self.k + 1
    }
    pub fn multipliers(&self) -> &[Fe] {
        &self.v
    }
    pub fn points(&self) -> &[Fe] {
        &self.points
    }
    pub fn is_rs(&self) -> bool {
        self.v.iter().all(|&x| x == 1)
    }
    /// Rows spanning the dual space, used as a parity check.
    pub fn parity_check(&self) -> &[Vec<Fe>] {
        &self.parity
    }

    /// Number of codewords, `q^{k+1}`, saturating.
    pub fn size(&self) -> u128 {
        (self.field.q() as u128).saturating_pow(self.k as u32 + 1)
    }

    /// Evaluates the polynomial with coefficients `msg` (constant first).
    pub fn encode(&self, msg: &[Fe]) -> Result<Vec<Fe>> {
        if msg.len() != self.k + 1 {
            return Err(Error::LengthMismatch { expected: self.k + 1, got: msg.len() });
        }
        Ok(self.encode_unchecked(msg))
    }

    pub(crate) fn encode_unchecked(&self, msg: &[Fe]) -> Vec<Fe> {
        let f = &self.field;
        self.points
            .iter()
            .zip(&self.v)
            .map(|(&a, &v)| {
                let val = msg.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, a), c));
                f.mul(v, val)
            })
            .collect()
    }

    /// Rows `(v_i α_i^j)_i` for `j = 0..=k`.
    pub fn generator_matrix(&self) -> Vec<Vec<Fe>> {
        let f = &self.field;
        (0..=self.k)
            .map(|j| {
                self.points
                    .iter()
                    .zip(&self.v)
                    .map(|(&a, &v)| f.mul(v, f.pow(a, j as u64)))
                    .collect()
            })
            .collect()
    }

    pub fn contains(&self, x: &[Fe]) -> bool {
        x.len() == self.len()
            && self
                .parity
                .iter()
                .all(|row| self.field.dot(row, x).is_ok_and(|d| d == 0))
    }

    /// Calls `visit` on every codeword in message-index order.
    pub fn for_each_codeword(&self, cap: u64, mut visit: impl FnMut(&[Fe])) -> Result<()> {
        let total = self.size();
        if total > cap as u128 {
            return Err(Error::CapExceeded { what: "codeword enumeration", need: total, cap: cap as u128 });
        }
        let f = &self.field;
        let q = f.q();
        // Row j of the generator scaled by each field element, so a codeword
        // is updated only at the message digits the odometer changed.
        let scaled: Vec<Vec<Vec<Fe>>> = self
            .generator_matrix()
            .iter()
            .map(|row| (0..q).map(|c| row.iter().map(|&g| f.mul(c, g)).collect()).collect())
            .collect();
        let mut msg = vec![0; self.k + 1];
        let mut word = vec![0; self.len()];
        for _ in 0..total {
            visit(&word);
            for (j, d) in msg.iter_mut().enumerate() {
                let old = &scaled[j][*d as usize];
                *d = (*d + 1) % q;
                let new = &scaled[j][*d as usize];
                for ((w, &o), &n) in word.iter_mut().zip(old).zip(new) {
                    *w = f.add(f.sub(*w, o), n);
                }
                if *d != 0 {
                    break;
                }
            }
        }
        Ok(())
    }

    pub fn codewords(&self, cap: u64) -> Result<Vec<Vec<Fe>>> {
        let mut out = Vec::new();
        self.for_each_codeword(cap, |c| out.push(c.to_vec()))?;
        Ok(out)
    }

    /// Uniformly random codeword.
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Fe> {
        let msg: Vec<Fe> = (0..=self.k).map(|_| rng.gen_range(0..self.field.q())).collect();
        self.encode_unchecked(&msg)
    }
}

/// The dual of a GRS code, itself a GRS code of degree parameter `N - k - 2`.
///
/// The multipliers come from the one-dimensional solution space of
/// `sum_i w_i u_i α_i^a = 0` for `a = 0..=N-2`, normalized so `u_1 = 1`.
/// The result is checked for GRS shape, orthogonality and dimension.
pub fn dual_code(code: &GrsCode) -> Result<GrsCode> {
    let n = code.len();
    let k = code.k;
    if k + 2 > n {
        return Err(Error::invalid(format!("dual of a code with k={k} = N-1 is degenerate")));
    }
    let f = code.field.clone();
    let system: Vec<Vec<Fe>> = (0..=n as u64 - 2)
        .map(|a| {
            code.points
                .iter()
                .zip(&code.v)
                .map(|(&x, &w)| f.mul(w, f.pow(x, a)))
                .collect()
        })
        .collect();
    let ns = linalg::nullspace(&f, &system, n);
    if ns.len() != 1 {
        return Err(Error::invalid("multiplier system is not one-dimensional"));
    }
    let u = &ns[0];
    if u.contains(&0) {
        return Err(Error::invalid("dual multipliers contain a zero"));
    }
    let scale = f.inv(u[0]);
    let u: Vec<Fe> = u.iter().map(|&x| f.mul(x, scale)).collect();
    let dual = GrsCode::grs(f.clone(), n - k - 2, u)?;

    let g = code.generator_matrix();
    let h = dual.generator_matrix();
    for c in &g {
        for d in &h {
            if f.dot(c, d)? != 0 {
                return Err(Error::invalid("dual code failed the orthogonality check"));
            }
        }
    }
    if linalg::rank(&f, &h) != n - k - 1 {
        return Err(Error::invalid("dual code has the wrong dimension"));
    }
    Ok(dual)
}

/// The `m`-folded version of a GRS code together with the analysis constants.
#[derive(Debug, Clone)]
pub struct FoldedCode {
    inner: GrsCode,
    m: usize,
    n: usize,
    alpha: f64,
    epsilon: f64,
    /// Analysis-only list-recovery constants, recorded but never enforced.
    pub zeta: f64,
    pub ell: usize,
    pub list_size: usize,
}

/// Serializable code parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub q: u64,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// `ε = -1/4 + 3α/10`.
pub fn default_epsilon(alpha: f64) -> f64 {
    -0.25 + 0.3 * alpha
}

impl FoldedCode {
    /// Folds `RS_k` over F_q with folding parameter `m`.
    pub fn new(q: u64, m: usize, k: usize, epsilon: Option<f64>) -> Result<Self> {
        let field = Field::new(q)?;
        let inner = GrsCode::rs(field, k)?;
        Self::fold(inner, m, epsilon)
    }

    /// `k = ⌊αN⌋`.
    pub fn from_alpha(q: u64, m: usize, alpha: f64, epsilon: Option<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha {alpha} must lie in [0, 1)")));
        }
        let n = q.saturating_sub(1) as f64;
        let mut code = Self::new(q, m, (alpha * n).floor() as usize, epsilon)?;
        code.alpha = alpha;
        if epsilon.is_none() {
            code.epsilon = default_epsilon(alpha);
        }
        Ok(code)
    }

    pub fn from_params(p: &CodeParams) -> Result<Self> {
        match (p.k, p.alpha) {
            (Some(k), None) => Self::new(p.q, p.m, k, p.epsilon),
            (None, Some(a)) => Self::from_alpha(p.q, p.m, a, p.epsilon),
            (Some(k), Some(a)) => {
                let c = Self::from_alpha(p.q, p.m, a, p.epsilon)?;
                if c.k() != k {
                    return Err(Error::invalid(format!("k={k} disagrees with alpha={a}")));
                }
                Ok(c)
            }
            (None, None) => Err(Error::invalid("either k or alpha must be given")),
        }
    }

    /// Folds an arbitrary GRS code.
    pub fn fold(inner: GrsCode, m: usize, epsilon: Option<f64>) -> Result<Self> {
        let big_n = inner.len();
        if m == 0 || !big_n.is_multiple_of(m) {
            return Err(Error::invalid(format!("folding parameter {m} must divide N={big_n}")));
        }
        let alpha = inner.k as f64 / big_n as f64;
        let epsilon = epsilon.unwrap_or_else(|| default_epsilon(alpha));
        Ok(FoldedCode {
            n: big_n / m,
            m,
            alpha,
            epsilon,
            zeta: 0.5,
            ell: 1,
            list_size: 0,
            inner,
        })
    }

    pub fn params(&self) -> CodeParams {
        CodeParams {
            q: self.field().q() as u64,
            m: self.m,
            k: Some(self.k()),
            alpha: None,
            epsilon: Some(self.epsilon),
        }
    }

    pub fn inner(&self) -> &GrsCode {
        &self.inner
    }
    pub fn field(&self) -> &Arc<Field> {
        &self.inner.field
    }
    pub fn m(&self) -> usize {
        self.m
    }
    /// Folded length.
    pub fn n(&self) -> usize {
        self.n
    }
    /// Unfolded length.
    pub fn big_n(&self) -> usize {
        self.inner.len()
    }
    pub fn k(&self) -> usize {
        self.inner.k
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    /// `|Σ| = q^m`, saturating.
    pub fn sigma_size(&self) -> u64 {
        (self.field().q() as u64).saturating_pow(self.m as u32)
    }
    pub fn size(&self) -> u128 {
        self.inner.size()
    }

    /// Folded dual code `(C^⊥)^{(m)}`.
    pub fn dual(&self) -> Result<FoldedCode> {
        let mut d = Self::fold(dual_code(&self.inner)?, self.m, Some(self.epsilon))?;
        d.alpha = self.alpha;
        Ok(d)
    }

    pub fn contains(&self, x: &[Fe]) -> bool {
        self.inner.contains(x)
    }

    /// Radius `⌊(1/2 + ε)N⌋` used by the dual decoder.
    pub fn decode_radius(&self) -> usize {
        ((0.5 + self.epsilon) * self.big_n() as f64).floor().max(0.0) as usize
    }

    /// Regime warnings for parameters outside the asymptotic analysis.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alpha <= 5.0 / 6.0 {
            out.push(format!("rate constant alpha={:.3} is at most 5/6", self.alpha));
        }
        if 2 * self.n as u64 >= self.sigma_size() {
            out.push(format!("2n={} is not below |Sigma|={}", 2 * self.n, self.sigma_size()));
        }
        out
    }

    /// Index of the `i`-th folded symbol of `x` in `0..|Σ|`.
    pub fn symbol(&self, x: &[Fe], i: usize) -> u64 {
        self.field().vec_index(&x[i * self.m..(i + 1) * self.m])
    }

    /// All symbol indices of `x`.
    pub fn symbols(&self, x: &[Fe]) -> Vec<u64> {
        (0..self.n).map(|i| self.symbol(x, i)).collect()
    }

    /// Rebuilds the unfolded vector from symbol indices.
    pub fn from_symbols(&self, syms: &[u64]) -> Vec<Fe> {
        syms.iter()
            .flat_map(|&s| self.field().index_vec(s, self.m))
            .collect()
    }

    /// Index of the whole vector in `Σ^n` (equivalently `F_q^N`), row-major.
    pub fn word_index(&self, x: &[Fe]) -> u64 {
        self.field().vec_index(x)
    }

    pub fn word_from_index(&self, idx: u64) -> Vec<Fe> {
        self.field().index_vec(idx, self.big_n())
    }

    pub fn folded_weight(&self, x: &[Fe]) -> usize {
        hamming_weight(x, self.m).expect("length is a multiple of m")
    }
}

/// Fold `F_q^N` into `Σ^n`.
pub fn fold(x: &[Fe], m: usize) -> Result<Vec<Vec<Fe>>> {
    if m == 0 || !x.len().is_multiple_of(m) {
        return Err(Error::invalid(format!("length {} not divisible by {m}", x.len())));
    }
    Ok(x.chunks(m).map(|c| c.to_vec()).collect())
}

pub fn unfold(x: &[Vec<Fe>]) -> Vec<Fe> {
    x.iter().flatten().copied().collect()
}

/// The error distribution `D^n`: each symbol is 0 with probability 1/2 and
/// otherwise uniform on `Σ \ {0}`.
#[derive(Debug, Clone)]
pub struct ErrorDistribution {
    field: Arc<Field>,
    m: usize,
    n: usize,
}

impl ErrorDistribution {
    pub fn new(code: &FoldedCode) -> Self {
        ErrorDistribution { field: code.field().clone(), m: code.m(), n: code.n() }
    }

    pub fn sigma_size(&self) -> u64 {
        (self.field.q() as u64).pow(self.m as u32)
    }

    /// Probability of one symbol value.
    pub fn symbol_prob(&self, sym: u64) -> f64 {
        if sym == 0 {
            0.5
        } else {
            0.5 / (self.sigma_size() - 1) as f64
        }
    }

    pub fn sample_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if rng.gen_bool(0.5) {
            0
        } else {
            rng.gen_range(1..self.sigma_size())
        }
    }

    /// `n` i.i.d. symbols, returned unfolded.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Fe> {
        (0..self.n)
            .flat_map(|_| {
                let s = self.sample_symbol(rng);
                self.field.index_vec(s, self.m)
            })
            .collect()
    }
}

/// Unique-decoding wrapper for the folded dual code.
///
/// Uses Guruswami-Sudan when the radius is inside the guaranteed bound, a
/// direct candidate scan when the dual has degree parameter 0, and
/// exhaustive search otherwise (subject to the enumeration cap).
#[derive(Debug, Clone)]
pub struct DualDecoder {
    dual: FoldedCode,
    radius: usize,
    strategy: Strategy,
}

#[derive(Debug, Clone)]
enum Strategy {
    ListDecode,
    Exhaustive(Vec<Vec<Fe>>),
}

impl DualDecoder {
    pub fn new(code: &FoldedCode, cap: u64) -> Result<Self> {
        let dual = code.dual()?;
        let radius = code.decode_radius();
        let big_n = dual.big_n();
        let d = dual.k();
        let t = big_n.saturating_sub(radius);
        let strategy = if radius < big_n && (t * t > d * big_n) {
            Strategy::ListDecode
        } else {
            Strategy::Exhaustive(dual.inner().codewords(cap)?)
        };
        Ok(DualDecoder { dual, radius, strategy })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
    pub fn dual(&self) -> &FoldedCode {
        &self.dual
    }
    pub fn uses_list_decoder(&self) -> bool {
        matches!(self.strategy, Strategy::ListDecode)
    }

    /// All dual codewords within the radius of `z`, sorted.
    pub fn list(&self, z: &[Fe]) -> Result<Vec<Vec<Fe>>> {
        match &self.strategy {
            Strategy::ListDecode => gs_list_decode(z, self.dual.inner(), self.radius),
            Strategy::Exhaustive(words) => Ok(words
                .iter()
                .filter(|c| hamming_distance(c, z, 1) <= self.radius)
                .cloned()
                .collect()),
        }
    }

    /// The unique codeword within the radius, or `None` for ⊥.
    pub fn decode(&self, z: &[Fe]) -> Option<Vec<Fe>> {
        let mut list = self.list(z).ok()?;
        if list.len() == 1 {
            list.pop()
        } else {
            None
        }
    }
}

/// `decode_dual(z)` for one-off calls.
pub fn decode_dual(z: &[Fe], code: &FoldedCode) -> Result<Option<Vec<Fe>>> {
    if z.len() != code.big_n() {
        return Err(Error::LengthMismatch { expected: code.big_n(), got: z.len() });
    }
    Ok(DualDecoder::new(code, DEFAULT_ENUM_CAP)?.decode(z))
}

/// Exact weight distribution of a folded code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    pub n: usize,
    /// `counts[w]` = number of codewords of folded weight `w`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl WeightTable {
    pub fn prob_weight(&self, w: usize) -> f64 {
        self.counts[w] as f64 / self.total as f64
    }

    /// `Pr[hw = n - j]`.
    pub fn prob_j(&self, j: usize) -> f64 {
        self.prob_weight(self.n - j)
    }
}

pub fn weight_distribution(code: &FoldedCode, cap: u64) -> Result<WeightTable> {
    let mut counts = vec![0u64; code.n() + 1];
    let mut total = 0;
    code.inner().for_each_codeword(cap, |c| {
        counts[code.folded_weight(c)] += 1;
        total += 1;
    })?;
    Ok(WeightTable { n: code.n(), counts, total })
}

/// Number of codewords agreeing with the candidate sets on at least `(1-ζ)n` positions.
pub fn list_recovery_count(sets: &[Vec<u64>], code: &FoldedCode, zeta: f64, cap: u64) -> Result<u64> {
    if sets.len() != code.n() {
        return Err(Error::LengthMismatch { expected: code.n(), got: sets.len() });
    }
    let need = ((1.0 - zeta) * code.n() as f64).ceil() as usize;
    let lookup: Vec<std::collections::HashSet<u64>> =
        sets.iter().map(|s| s.iter().copied().collect()).collect();
    let mut count = 0;
    code.inner().for_each_codeword(cap, |c| {
        let hits = (0..code.n()).filter(|&i| lookup[i].contains(&code.symbol(c, i))).count();
        if hits >= need {
            count += 1;
        }
    })?;
    Ok(count)
}

/// Writes codewords, one per line, as comma-separated base-p digit strings.
///
/// Each folded symbol becomes `m·r` digits, field elements in order and each
/// element's coefficients leading term first.
pub fn format_codeword(code: &FoldedCode, x: &[Fe]) -> Result<String> {
    let f = code.field();
    if f.p() > 36 {
        return Err(Error::invalid("text format supports p <= 36"));
    }
    let digit = |d: u32| std::char::from_digit(d, 36).expect("digit < 36");
    let syms: Vec<String> = x
        .chunks(code.m())
        .map(|chunk| {
            chunk
                .iter()
                .flat_map(|&e| f.coeffs(e).into_iter().rev())
                .map(digit)
                .collect()
        })
        .collect();
    Ok(syms.join(","))
}

pub fn parse_codeword(code: &FoldedCode, line: &str) -> Result<Vec<Fe>> {
    let f = code.field();
    let r = f.r() as usize;
    let parts: Vec<&str> = line.trim().split(',').collect();
    if parts.len() != code.n() {
        return Err(Error::Parse(format!("expected {} symbols, got {}", code.n(), parts.len())));
    }
    let mut out = Vec::with_capacity(code.big_n());
    for part in parts {
        let digits: Vec<u32> = part
            .chars()
            .map(|c| c.to_digit(36).filter(|&d| d < f.p()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Parse(format!("bad digit in symbol {part:?}")))?;
        if digits.len() != code.m() * r {
            return Err(Error::Parse(format!("symbol {part:?} has the wrong length")));
        }
        for e in digits.chunks(r) {
            let coeffs: Vec<u32> = e.iter().rev().copied().collect();
            out.push(f.from_coeffs(&coeffs)?);
        }
    }
    Ok(out)
}
