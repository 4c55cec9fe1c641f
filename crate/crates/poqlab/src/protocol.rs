//! Prove/Verify, the worst-case variant, and the derived one-way and
//! collision-resistant functions.
//!
//! A [`Protocol`] caches everything that depends only on the code: codeword
//! and dual-codeword indices, the decoder table and the good-error set. A
//! [`Prover`] computes the exact final state for one `(H, y)` and then samples
//! runs from it, so the exact success probability and the sampled runs come
//! from the same amplitudes.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codes::{format_codeword, parse_codeword, CodeParams, DualDecoder, FoldedCode, DEFAULT_ENUM_CAP};
use crate::gf_core::Fe;
use crate::qsim::{
    bad_set_report, codeword_indices, decoder_table, fourier, good_errors, postselected_state, preimage_amplitudes,
    product_state, sample_index, state_distance, BadSetReport, Direction, IndexSpace, StateVector,
    DEFAULT_AMPLITUDE_CAP,
};
use crate::rom::{prefix_restrict, Bits, KWiseHash, OracleMode, OracleTable, WideOracle, DEFAULT_TABLE_CAP};
use crate::{Error, Result};

pub const DEFAULT_LAMBDA: usize = 8;
pub const DEFAULT_REPETITIONS: usize = 4;

fn default_lambda() -> usize {
    DEFAULT_LAMBDA
}
fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

/// Parameters of one protocol instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub code: CodeParams,
    pub oracle_seed: u64,
    /// Retry cap of the postselection loop.
    #[serde(default = "default_lambda")]
    pub lambda: usize,
    /// Parallel repetitions `t` of the worst-case variant.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Salt length in bytes; 0 for the keyless protocol.
    #[serde(default)]
    pub salt_len: usize,
}

impl ProtocolParams {
    pub fn new(code: CodeParams, oracle_seed: u64) -> Self {
        ProtocolParams {
            code,
            oracle_seed,
            lambda: DEFAULT_LAMBDA,
            repetitions: DEFAULT_REPETITIONS,
            salt_len: 0,
        }
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("params serialize");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A candidate codeword, or an abort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub codeword: Option<Vec<Fe>>,
}

impl Proof {
    pub fn abort() -> Self {
        Proof { codeword: None }
    }
    pub fn of(codeword: Vec<Fe>) -> Self {
        Proof { codeword: Some(codeword) }
    }
    pub fn is_abort(&self) -> bool {
        self.codeword.is_none()
    }

    /// Proof file: a header with the params hash and target, then the codeword.
    pub fn to_text(&self, proto: &Protocol, y: &Bits) -> Result<String> {
        let body = match &self.codeword {
            Some(x) => format_codeword(&proto.code, x)?,
            None => "abort".to_string(),
        };
        Ok(format!("# poqlab proof v1\nparams {}\ny {}\n{}\n", proto.params.hash(), y, body))
    }

    pub fn from_text(proto: &Protocol, text: &str) -> Result<(Proof, Bits)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty proof file".into()))?;
        if header.trim() != "# poqlab proof v1" {
            return Err(Error::Parse("missing proof header".into()));
        }
        let field = |line: Option<&str>, key: &str| -> Result<String> {
            let line = line.ok_or_else(|| Error::Parse(format!("missing {key} line")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(|r| r.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected a {key} line")))
        };
        let hash = field(lines.next(), "params")?;
        if hash != proto.params.hash() {
            return Err(Error::Parse("proof was made for different parameters".into()));
        }
        let y: Bits = field(lines.next(), "y")?.parse()?;
        if y.len() != proto.n() {
            return Err(Error::LengthMismatch { expected: proto.n(), got: y.len() });
        }
        let body = lines.next().ok_or_else(|| Error::Parse("missing codeword".into()))?;
        let proof = if body.trim() == "abort" {
            Proof::abort()
        } else {
            Proof::of(parse_codeword(&proto.code, body)?)
        };
        Ok((proof, y))
    }
}

/// Code-dependent data shared by every run at one parameter set.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub params: ProtocolParams,
    pub code: FoldedCode,
    space: IndexSpace,
    codewords: Vec<u64>,
    dual: Vec<u64>,
    table: Vec<u64>,
    good: Vec<bool>,
    psi_hat: StateVector,
    cap: u64,
}

impl Protocol {
    /// Builds the instance; the amplitude cap bounds the two-register state.
    pub fn new(params: ProtocolParams, cap: u64) -> Result<Self> {
        if params.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if params.lambda == 0 {
            return Err(Error::invalid("retry cap must be at least 1"));
        }
        let code = FoldedCode::from_params(&params.code)?;
        let axes = (code.m() * code.n() * 2) as u32;
        let need = (code.field().q() as u128).checked_pow(axes).unwrap_or(u128::MAX);
        if need > cap as u128 {
            return Err(Error::CapExceeded { what: "state vector amplitudes", need, cap: cap as u128 });
        }
        let dual_code = code.dual()?;
        let decoder = DualDecoder::new(&code, DEFAULT_ENUM_CAP)?;
        let space = IndexSpace::new(code.field(), code.big_n());
        let codewords = codeword_indices(&code, DEFAULT_ENUM_CAP)?;
        let dual = codeword_indices(&dual_code, DEFAULT_ENUM_CAP)?;
        let table = decoder_table(&code, &decoder, cap)?;
        let good = good_errors(&space, &table, &dual);
        let mut psi_hat = StateVector::uniform_over(code.field().clone(), code.m(), code.n(), &codewords, cap)?;
        psi_hat.qft(0, Direction::Forward)?;
        Ok(Protocol { params, code, space, codewords, dual, table, good, psi_hat, cap })
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }
    pub fn sigma_size(&self) -> u64 {
        self.code.sigma_size()
    }
    pub fn space(&self) -> &IndexSpace {
        &self.space
    }
    /// Sorted codeword indices of `C`.
    pub fn codewords(&self) -> &[u64] {
        &self.codewords
    }
    /// Sorted codeword indices of `C⊥`.
    pub fn dual_codewords(&self) -> &[u64] {
        &self.dual
    }
    pub fn decoder_table(&self) -> &[u64] {
        &self.table
    }
    pub fn good_errors(&self) -> &[bool] {
        &self.good
    }
    /// `k = 2(λn + 1)` for the worst-case variant.
    pub fn k_hash(&self) -> usize {
        2 * (self.params.lambda * self.n() + 1)
    }
    /// The per-instance oracle `H: Σ → {0,1}^n`.
    pub fn oracle(&self, mode: OracleMode) -> Result<OracleTable> {
        crate::rom::sample_oracle(self.params.oracle_seed, self.sigma_size(), self.n(), mode, DEFAULT_TABLE_CAP)
    }
    pub fn wide_oracle(&self) -> WideOracle {
        WideOracle::new(self.params.oracle_seed)
    }

    /// Symbol indices of a word index in `Σ^n`.
    pub fn symbols_of(&self, z: u64) -> Vec<u64> {
        let sigma = self.sigma_size();
        let mut out = vec![0; self.n()];
        let mut z = z;
        for slot in out.iter_mut().rev() {
            *slot = z % sigma;
            z /= sigma;
        }
        out
    }

    /// `(I ⊗ QFT⁻¹) U_decode U_add (QFT ⊗ QFT) |ψ⟩|φ⟩` for `|φ⟩ = ⊗ W_i`.
    pub fn final_state(&self, factors: &[Vec<Complex64>]) -> Result<StateVector> {
        let mut phi = product_state(self.code.field().clone(), self.code.m(), factors, self.cap)?;
        phi.qft(0, Direction::Forward)?;
        let mut eta = self.psi_hat.tensor(&phi, self.cap)?;
        eta.apply_u_add()?;
        eta.apply_u_decode(&self.table)?;
        eta.qft(1, Direction::Inverse)?;
        Ok(eta)
    }

    /// `|Σ|^{n/2} Σ_z (V·W)(z) |0⟩|z⟩`.
    pub fn target_state(&self, factors: &[Vec<Complex64>]) -> Result<StateVector> {
        let d = self.space.dim() as usize;
        let scale = (d as f64).sqrt() / (self.codewords.len() as f64).sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
        for &z in &self.codewords {
            let w: Complex64 = self
                .symbols_of(z)
                .iter()
                .zip(factors)
                .map(|(&s, f)| f[s as usize])
                .product();
            amps[z as usize] = w * scale;
        }
        StateVector::from_amplitudes(self.code.field().clone(), self.code.m(), self.n(), 2, amps)
    }

    /// Exact distance between the final and target states, with the BAD-set bound.
    pub fn residual_check(&self, h: &OracleTable, y: &Bits) -> Result<Option<ResidualCheck>> {
        let Some(factors) = preimage_factors(h, y)? else {
            return Ok(None);
        };
        let final_state = self.final_state(&factors)?;
        let target = self.target_state(&factors)?;
        let distance = state_distance(&final_state, &target)?;
        let spectra = factors
            .iter()
            .map(|w| fourier(self.code.field(), self.code.m(), w, Direction::Forward))
            .collect::<Result<Vec<_>>>()?;
        let report = bad_set_report(&self.space, &self.dual, &spectra, &self.good, self.cap)?;
        Ok(Some(ResidualCheck { distance, report }))
    }

    /// Whether `x_i ∈ T_i` for every position.
    fn in_targets(&self, z: u64, targets: &[Vec<bool>]) -> bool {
        self.symbols_of(z).iter().zip(targets).all(|(&s, t)| t[s as usize])
    }
}

/// Distance to the ideal state next to its BAD-set bound.
#[derive(Debug, Clone, Copy)]
pub struct ResidualCheck {
    pub distance: f64,
    pub report: BadSetReport,
}

/// `W_i` for each position, or `None` if some `T_i` is empty.
pub fn preimage_factors(h: &OracleTable, y: &Bits) -> Result<Option<Vec<Vec<Complex64>>>> {
    if y.len() != h.n() {
        return Err(Error::LengthMismatch { expected: h.n(), got: y.len() });
    }
    let mut out = Vec::with_capacity(h.n());
    for i in 1..=h.n() {
        match preimage_amplitudes(&h.bit_projection(i)?, y.get(i)) {
            Some(w) => out.push(w),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// The honest prover for one `(H, y)`, with its exact output distribution.
#[derive(Debug, Clone)]
pub struct Prover<'a> {
    proto: &'a Protocol,
    bit_functions: Vec<crate::rom::BitFunction>,
    y: Bits,
    /// Register-2 outcome distribution given no abort.
    marginal: Vec<f64>,
    /// Exact quantities behind the success probability.
    pub exact: ProverExact,
}

/// Exact analysis of one prover instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProverExact {
    /// Probability that every postselection succeeds within `λ` trials.
    pub nonabort: f64,
    /// Register-2 mass on `C ∩ T`, given no abort.
    pub pass_given_nonabort: f64,
    /// Squared norm of the projection onto `|0⟩ ⊗ (C ∩ T)`.
    pub zero_projection: f64,
    /// `nonabort · pass_given_nonabort`.
    pub success: f64,
}

impl<'a> Prover<'a> {
    pub fn new(proto: &'a Protocol, h: &OracleTable, y: &Bits) -> Result<Self> {
        let n = proto.n();
        if h.n() != n || h.domain() != proto.sigma_size() {
            return Err(Error::invalid("oracle shape does not match the protocol"));
        }
        let bit_functions = (1..=n).map(|i| h.bit_projection(i)).collect::<Result<Vec<_>>>()?;
        let sigma = proto.sigma_size() as f64;
        let lambda = proto.params.lambda as i32;
        let nonabort: f64 = bit_functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let t = f.values.iter().filter(|&&v| v == y.get(i + 1)).count() as f64;
                1.0 - (1.0 - t / sigma).powi(lambda)
            })
            .product();
        let (marginal, pass, zero) = match preimage_factors(h, y)? {
            None => (Vec::new(), 0.0, 0.0),
            Some(factors) => {
                let state = proto.final_state(&factors)?;
                let marginal = state.marginal(1)?;
                let targets: Vec<Vec<bool>> = bit_functions
                    .iter()
                    .enumerate()
                    .map(|(i, f)| f.values.iter().map(|&v| v == y.get(i + 1)).collect())
                    .collect();
                let accepted: Vec<u64> = proto
                    .codewords
                    .iter()
                    .copied()
                    .filter(|&z| proto.in_targets(z, &targets))
                    .collect();
                let pass = accepted.iter().map(|&z| marginal[z as usize]).sum();
                let zero = accepted.iter().map(|&z| state.amps()[z as usize].norm_sqr()).sum();
                (marginal, pass, zero)
            }
        };
        let exact = ProverExact {
            nonabort,
            pass_given_nonabort: pass,
            zero_projection: zero,
            success: nonabort * pass,
        };
        Ok(Prover { proto, bit_functions, y: y.clone(), marginal, exact })
    }

    pub fn success_probability(&self) -> f64 {
        self.exact.success
    }

    /// Register-2 outcome distribution given no abort (empty if always aborting).
    pub fn output_distribution(&self) -> &[f64] {
        &self.marginal
    }

    /// One run: postselect each `|φ_i⟩`, then measure register 2.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Proof> {
        let field = self.proto.code.field();
        for (i, f) in self.bit_functions.iter().enumerate() {
            let p = postselected_state(field.clone(), self.proto.code.m(), f, self.y.get(i + 1), self.proto.params.lambda, rng)?;
            if p.state.is_none() {
                return Ok(Proof::abort());
            }
        }
        let total: f64 = self.marginal.iter().sum();
        let z = sample_index(&self.marginal, total, rng);
        Ok(Proof::of(self.proto.code.word_from_index(z as u64)))
    }
}

/// One honest run against `H` with target `y`.
pub fn prove<R: Rng + ?Sized>(proto: &Protocol, h: &OracleTable, y: &Bits, rng: &mut R) -> Result<Proof> {
    Prover::new(proto, h, y)?.sample(rng)
}

/// Exact success probability of [`prove`].
pub fn prove_success_probability(proto: &Protocol, h: &OracleTable, y: &Bits) -> Result<f64> {
    Ok(Prover::new(proto, h, y)?.success_probability())
}

/// `⊤` iff the proof is a codeword and `H_i(x_i) = y_i` for every `i`.
///
/// A codeword proof always costs exactly `n` oracle queries.
pub fn verify(proto: &Protocol, h: &mut OracleTable, proof: &Proof, y: &Bits) -> bool {
    let Some(x) = &proof.codeword else {
        return false;
    };
    if x.len() != proto.code.big_n() || y.len() != proto.n() || !proto.code.contains(x) {
        return false;
    }
    let mut ok = true;
    for (i, s) in proto.code.symbols(x).into_iter().enumerate() {
        ok &= h.query(s).get(i + 1) == y.get(i + 1);
    }
    ok
}

/// `f(x) = (H_1(x_1), …, H_n(x_n))` on codewords.
pub fn owf_eval(proto: &Protocol, h: &mut OracleTable, x: &[Fe]) -> Result<Bits> {
    if x.len() != proto.code.big_n() {
        return Err(Error::LengthMismatch { expected: proto.code.big_n(), got: x.len() });
    }
    if !proto.code.contains(x) {
        return Err(Error::invalid("input is not a codeword"));
    }
    let mut out = Bits::zeros(proto.n());
    for (i, s) in proto.code.symbols(x).into_iter().enumerate() {
        out.set(i + 1, h.query(s).get(i + 1));
    }
    Ok(out)
}

/// Quantum inversion of [`owf_eval`]: the prover with target `y`.
pub fn invert<R: Rng + ?Sized>(proto: &Protocol, h: &OracleTable, y: &Bits, rng: &mut R) -> Result<Proof> {
    prove(proto, h, y, rng)
}

/// Proof for the worst-case variant: one hash key and `t` sub-proofs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorstCaseProof {
    pub key: Vec<Fe>,
    pub proofs: Vec<Proof>,
}

/// The `t` per-repetition oracles `x ↦ H(j‖x)`.
pub fn repetition_oracles(proto: &Protocol, wide: &WideOracle) -> Result<Vec<OracleTable>> {
    (0..proto.params.repetitions)
        .map(|j| {
            let prefix = [b"rep".as_slice(), &(j as u32).to_le_bytes()].concat();
            wide.view(&prefix, proto.sigma_size(), proto.n(), OracleMode::Explicit, DEFAULT_TABLE_CAP)
        })
        .collect()
}

fn shift_all(proto: &Protocol, oracles: &[OracleTable], key: &[Fe]) -> Result<Vec<OracleTable>> {
    let f = KWiseHash::with_key(proto.k_hash(), proto.sigma_size(), proto.n(), key)?;
    oracles.iter().map(|h| h.xor_shift(&f)).collect()
}

/// Samples `K` and proves against each `H^{(j)} ⊕ f_K`.
pub fn prove_wc_with<R: Rng + ?Sized>(proto: &Protocol, oracles: &[OracleTable], y: &Bits, rng: &mut R) -> Result<WorstCaseProof> {
    let f = KWiseHash::random(proto.k_hash(), proto.sigma_size(), proto.n(), rng)?;
    let key = f.key();
    let proofs = shift_all(proto, oracles, &key)?
        .iter()
        .map(|h| prove(proto, h, y, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(WorstCaseProof { key, proofs })
}

/// Accepts iff all `t` sub-proofs verify under the same shift.
pub fn verify_wc_with(proto: &Protocol, oracles: &[OracleTable], proof: &WorstCaseProof, y: &Bits) -> Result<bool> {
    if proof.proofs.len() != oracles.len() {
        return Ok(false);
    }
    let Ok(mut shifted) = shift_all(proto, oracles, &proof.key) else {
        return Ok(false);
    };
    Ok(shifted.iter_mut().zip(&proof.proofs).all(|(h, p)| verify(proto, h, p, y)))
}

pub fn prove_wc<R: Rng + ?Sized>(proto: &Protocol, wide: &WideOracle, rng: &mut R) -> Result<WorstCaseProof> {
    let oracles = repetition_oracles(proto, wide)?;
    prove_wc_with(proto, &oracles, &Bits::ones(proto.n()), rng)
}

pub fn verify_wc(proto: &Protocol, wide: &WideOracle, proof: &WorstCaseProof) -> Result<bool> {
    let oracles = repetition_oracles(proto, wide)?;
    verify_wc_with(proto, &oracles, proof, &Bits::ones(proto.n()))
}

/// `log2(|K| · 2^{-tλ})`, the reported (not enforced) union-bound exponent.
pub fn union_bound_log2(proto: &Protocol) -> Result<f64> {
    let len = KWiseHash::key_len(proto.k_hash(), proto.sigma_size(), proto.n())?;
    let w = (64 - proto.sigma_size().saturating_sub(1).leading_zeros()).max(1) as f64;
    Ok(len as f64 * w - (proto.params.repetitions * proto.params.lambda) as f64)
}

fn encode_proof(proof: &Proof) -> Vec<u8> {
    match &proof.codeword {
        None => vec![0],
        Some(x) => std::iter::once(1u8).chain(x.iter().flat_map(|e| e.to_le_bytes())).collect(),
    }
}

/// `x` if the embedded verifier accepts `π`, otherwise `H(x, π)`.
pub fn crh_eval(proto: &Protocol, wide: &WideOracle, x: &Bits, proof: &Proof) -> Result<Bits> {
    let mut h = wide.view(b"", proto.sigma_size(), proto.n(), OracleMode::Lazy, 0)?;
    if verify(proto, &mut h, proof, &Bits::ones(proto.n())) {
        return Ok(x.clone());
    }
    let mut input = b"crh".to_vec();
    input.extend_from_slice(&(x.len() as u64).to_le_bytes());
    input.extend_from_slice(&x.to_bytes());
    input.extend_from_slice(&encode_proof(proof));
    Ok(wide.eval_bytes(&input, x.len()))
}

/// A fresh salt of the configured length.
pub fn random_salt<R: Rng + ?Sized>(proto: &Protocol, rng: &mut R) -> Vec<u8> {
    (0..proto.params.salt_len).map(|_| rng.gen()).collect()
}

/// `x ↦ H(salt‖x)` as an explicit per-instance oracle.
pub fn salted_oracle(proto: &Protocol, wide: &WideOracle, salt: &[u8]) -> Result<OracleTable> {
    prefix_restrict(wide, salt, proto.sigma_size(), proto.n(), OracleMode::Explicit, DEFAULT_TABLE_CAP)
}

/// `g(s, x) = s ‖ f^{H(s‖·)}(x)`.
pub fn salt_owf(proto: &Protocol, wide: &WideOracle, salt: &[u8], x: &[Fe]) -> Result<(Vec<u8>, Bits)> {
    let mut h = salted_oracle(proto, wide, salt)?;
    Ok((salt.to_vec(), owf_eval(proto, &mut h, x)?))
}

pub fn salt_prove<R: Rng + ?Sized>(proto: &Protocol, wide: &WideOracle, salt: &[u8], y: &Bits, rng: &mut R) -> Result<Proof> {
    prove(proto, &salted_oracle(proto, wide, salt)?, y, rng)
}

pub fn salt_verify(proto: &Protocol, wide: &WideOracle, salt: &[u8], proof: &Proof, y: &Bits) -> Result<bool> {
    let mut h = salted_oracle(proto, wide, salt)?;
    Ok(verify(proto, &mut h, proof, y))
}

/// Protocol at `(q, m, k)` with default knobs.
pub fn tiny_protocol(q: u64, m: usize, k: usize, seed: u64) -> Result<Protocol> {
    let params = ProtocolParams::new(CodeParams { q, m, k: Some(k), alpha: None, epsilon: None }, seed);
    Protocol::new(params, DEFAULT_AMPLITUDE_CAP)
}
