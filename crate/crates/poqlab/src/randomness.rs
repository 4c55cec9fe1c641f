//! Output-distribution estimation, min-entropy, proofs of min-entropy and a
//! pairwise-independent extractor.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::codes::CodeParams;
use crate::gf_core::Fe;
use crate::protocol::{prove, verify, Proof, Protocol, ProtocolParams};
use crate::qsim::DEFAULT_AMPLITUDE_CAP;
use crate::rom::{Bits, OracleTable};
use crate::{Error, Result};

/// Chernoff constant in the run count `⌈C·ℓ·ln(1/δ)/ε²⌉`.
pub const CHERNOFF_C: f64 = 3.0;

/// Runs needed by [`approx_distribution`].
pub fn run_count(ell: usize, eps: f64, delta: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("eps and delta must lie in (0, 1)"));
    }
    Ok((CHERNOFF_C * ell.max(1) as f64 * (1.0 / delta).ln() / (eps * eps)).ceil() as u64)
}

/// Empirical output distribution of a repeatable sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionEstimate {
    pub counts: BTreeMap<Bits, u64>,
    pub runs: u64,
    pub eps: f64,
    pub delta: f64,
}

impl DistributionEstimate {
    pub fn prob(&self, z: &Bits) -> f64 {
        self.counts.get(z).map_or(0.0, |&c| c as f64 / self.runs as f64)
    }

    /// `(outcome, P_z)` pairs in outcome order.
    pub fn table(&self) -> Vec<(Bits, f64)> {
        self.counts.iter().map(|(z, &c)| (z.clone(), c as f64 / self.runs as f64)).collect()
    }

    /// Two columns: hex outcome, probability.
    pub fn dump(&self) -> String {
        self.table()
            .iter()
            .map(|(z, p)| format!("{}\t{p}\n", to_hex(&z.to_bytes())))
            .collect()
    }
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn from_hex(s: &str) -> Result<Vec<u8>> {
    let s = s.trim().trim_start_matches("0x");
    if !s.len().is_multiple_of(2) {
        return Err(Error::Parse("hex string has odd length".into()));
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

/// Runs `sampler` `⌈C·ℓ·ln(1/δ)/ε²⌉` times and tabulates the outputs.
pub fn approx_distribution<R, F>(ell: usize, eps: f64, delta: f64, rng: &mut R, mut sampler: F) -> Result<DistributionEstimate>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<Bits>,
{
    let runs = run_count(ell, eps, delta)?;
    let mut counts = BTreeMap::new();
    for _ in 0..runs {
        *counts.entry(sampler(rng)?).or_insert(0) += 1;
    }
    Ok(DistributionEstimate { counts, runs, eps, delta })
}

/// `-log2 max_z P_z`.
pub fn min_entropy_estimate(est: &DistributionEstimate) -> Result<f64> {
    let max = est.counts.values().copied().max().ok_or_else(|| Error::invalid("empty distribution table"))?;
    Ok(0.0 - (max as f64 / est.runs as f64).log2())
}

/// `-log2 max p` of an exact distribution.
pub fn min_entropy(probs: &[f64]) -> f64 {
    0.0 - probs.iter().copied().fold(0.0, f64::max).log2()
}

/// Pre-registered parameter levels for the proof of min-entropy: `(h, q, m, k)`.
pub const POM_LEVELS: [(u32, u64, usize, usize); 4] = [(1, 3, 1, 0), (2, 4, 1, 1), (3, 5, 2, 1), (4, 5, 1, 2)];

/// The smallest registered code whose level covers `h` bits.
pub fn pom_level(h: u32) -> Result<CodeParams> {
    POM_LEVELS
        .iter()
        .find(|l| l.0 >= h)
        .map(|&(_, q, m, k)| CodeParams { q, m, k: Some(k), alpha: None, epsilon: None })
        .ok_or_else(|| Error::invalid(format!("no registered parameter level for h={h}")))
}

/// Protocol instance at the level for `h`.
pub fn pom_protocol(h: u32, oracle_seed: u64) -> Result<Protocol> {
    Protocol::new(ProtocolParams::new(pom_level(h)?, oracle_seed), DEFAULT_AMPLITUDE_CAP)
}

/// Delegates to the PoQ prover at the leveled parameters.
pub fn pom_prove<R: Rng + ?Sized>(proto: &Protocol, h: &OracleTable, rng: &mut R) -> Result<Proof> {
    prove(proto, h, &Bits::ones(proto.n()), rng)
}

/// The proof itself when the PoQ verifier accepts, `None` for ⊥.
pub fn pom_verify(proto: &Protocol, h: &mut OracleTable, proof: &Proof) -> Option<Vec<Fe>> {
    if verify(proto, h, proof, &Bits::ones(proto.n())) {
        proof.codeword.clone()
    } else {
        None
    }
}

/// Bit encoding of a codeword: `⌈log2 q⌉` bits per field element.
pub fn codeword_bits(proto: &Protocol, x: &[Fe]) -> Bits {
    let q = proto.code.field().q();
    let w = (32 - (q - 1).leading_zeros()).max(1) as usize;
    let mut out = Bits::zeros(w * x.len());
    for (j, &e) in x.iter().enumerate() {
        for b in 0..w {
            out.set(j * w + b + 1, (e >> b) & 1 == 1);
        }
    }
    out
}

/// Supported extractor widths and their reduction polynomials (low terms).
const WIDTHS: [(u32, u128); 5] = [(8, 0x1b), (16, 0x2b), (32, 0x8d), (64, 0x1b), (128, 0x87)];

/// Product in GF(2^w) modulo `x^w + low`.
fn gf2w_mul(mut a: u128, mut b: u128, w: u32, low: u128) -> u128 {
    let top = 1u128 << (w - 1);
    let mask = if w == 128 { u128::MAX } else { (1u128 << w) - 1 };
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        let carry = a & top != 0;
        a = (a << 1) & mask;
        if carry {
            a ^= low;
        }
    }
    acc
}

/// Seeded extractor `x ↦ top h bits of a·x + b` over GF(2^W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractorSpec {
    pub input_bits: usize,
    pub output_bits: usize,
    pub width: u32,
    pub error: f64,
}

/// The pair `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractorSeed {
    pub a: u128,
    pub b: u128,
}

impl ExtractorSpec {
    /// Checks `h ≤ min_entropy - 2·log2(1/error)`.
    pub fn new(input_bits: usize, min_entropy: f64, output_bits: usize, error: f64) -> Result<Self> {
        if !(error > 0.0 && error < 1.0) {
            return Err(Error::invalid("extractor error must lie in (0, 1)"));
        }
        let budget = min_entropy - 2.0 * (1.0 / error).log2();
        if output_bits as f64 > budget + 1e-12 {
            return Err(Error::invalid(format!(
                "output length {output_bits} exceeds the leftover-hash budget {budget:.3}"
            )));
        }
        Self::unchecked(input_bits, output_bits, error)
    }

    /// Spec without the entropy accounting, for statistical tests.
    pub fn unchecked(input_bits: usize, output_bits: usize, error: f64) -> Result<Self> {
        let width = WIDTHS
            .iter()
            .map(|w| w.0)
            .find(|&w| w as usize >= input_bits.max(output_bits))
            .ok_or_else(|| Error::invalid("extractor input longer than 128 bits"))?;
        Ok(ExtractorSpec { input_bits, output_bits, width, error })
    }

    pub fn seed_bits(&self) -> usize {
        2 * self.width as usize
    }

    pub fn random_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> ExtractorSeed {
        let mask = if self.width == 128 { u128::MAX } else { (1u128 << self.width) - 1 };
        ExtractorSeed { a: rng.gen::<u128>() & mask, b: rng.gen::<u128>() & mask }
    }

    /// Seed as hex: `a` then `b`, each `W/4` digits.
    pub fn seed_hex(&self, seed: &ExtractorSeed) -> String {
        let d = self.width as usize / 4;
        format!("{:0d$x}{:0d$x}", seed.a, seed.b, d = d)
    }

    pub fn seed_from_hex(&self, s: &str) -> Result<ExtractorSeed> {
        let d = self.width as usize / 4;
        let s = s.trim().trim_start_matches("0x");
        if s.len() != 2 * d {
            return Err(Error::Parse(format!("extractor seed needs {} hex digits", 2 * d)));
        }
        let parse = |t: &str| u128::from_str_radix(t, 16).map_err(|e| Error::Parse(e.to_string()));
        Ok(ExtractorSeed { a: parse(&s[..d])?, b: parse(&s[d..])? })
    }
}

/// `h` output bits from the source and seed.
pub fn extract(spec: &ExtractorSpec, source: &Bits, seed: &ExtractorSeed) -> Result<Bits> {
    if source.len() < spec.input_bits {
        return Err(Error::LengthMismatch { expected: spec.input_bits, got: source.len() });
    }
    let mut x = 0u128;
    for i in 1..=spec.input_bits {
        if source.get(i) {
            x |= 1 << (i - 1);
        }
    }
    let low = WIDTHS.iter().find(|w| w.0 == spec.width).expect("registered width").1;
    let v = gf2w_mul(seed.a, x, spec.width, low) ^ seed.b;
    let mut out = Bits::zeros(spec.output_bits);
    for j in 0..spec.output_bits {
        out.set(j + 1, (v >> (spec.width as usize - 1 - j)) & 1 == 1);
    }
    Ok(out)
}

/// Threshold `(ε/2)(1 + (2i-1)/(2M))` of adversary `A_i`.
pub fn threshold(eps_a: f64, i: usize, big_m: usize) -> f64 {
    eps_a / 2.0 * (1.0 + (2 * i - 1) as f64 / (2 * big_m) as f64)
}

/// Randomized-threshold adversary `A_i`: the lexicographically smallest
/// accepted outcome whose estimated probability exceeds the `i`-th threshold.
pub fn threshold_adversary<R, S, V>(ell: usize, eps_a: f64, i: usize, rng: &mut R, sampler: S, accepts: V) -> Result<Option<Bits>>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Result<Bits>,
    V: Fn(&Bits) -> bool,
{
    if !(eps_a > 0.0 && eps_a <= 1.0) {
        return Err(Error::invalid("eps_A must lie in (0, 1]"));
    }
    let big_m = (4.0 / eps_a).ceil() as usize;
    if i == 0 || i > big_m {
        return Err(Error::invalid(format!("index {i} outside 1..={big_m}")));
    }
    let est = approx_distribution(ell, eps_a / (4 * big_m) as f64, 0.2, rng, sampler)?;
    let t = threshold(eps_a, i, big_m);
    Ok(est
        .table()
        .into_iter()
        .filter(|(z, p)| *p > t && accepts(z))
        .map(|(z, _)| z)
        .min_by_key(|z| z.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Prover;
    use crate::rom::{sample_oracle, OracleMode, DEFAULT_TABLE_CAP};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn categorical(probs: &'static [f64], ell: usize) -> impl FnMut(&mut ChaCha8Rng) -> Result<Bits> {
        move |rng| {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            let mut idx = probs.len() - 1;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if r < acc {
                    idx = i;
                    break;
                }
            }
            let mut b = Bits::zeros(ell);
            for j in 0..ell {
                b.set(j + 1, (idx >> (ell - 1 - j)) & 1 == 1);
            }
            Ok(b)
        }
    }

    fn outcome(idx: usize, ell: usize) -> Bits {
        let mut b = Bits::zeros(ell);
        for j in 0..ell {
            b.set(j + 1, (idx >> (ell - 1 - j)) & 1 == 1);
        }
        b
    }

    #[test]
    fn run_count_formula() {
        assert_eq!(run_count(1, 0.1, (-1f64).exp()).unwrap(), 300);
        assert!(run_count(1, 0.0, 0.5).is_err());
        assert!(run_count(1, 0.5, 1.0).is_err());
    }

    #[test]
    fn deterministic_sampler() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z: Bits = "101".parse().unwrap();
        let est = approx_distribution(3, 0.1, 0.1, &mut rng, |_| Ok(z.clone())).unwrap();
        assert_eq!(est.counts.len(), 1);
        assert_eq!(est.prob(&z), 1.0);
        assert_eq!(min_entropy_estimate(&est).unwrap(), 0.0);
        assert_eq!(est.dump(), format!("05\t1\n"));
    }

    #[test]
    fn fair_coin_meta_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eps = 0.05;
        let meta = 200;
        let good = (0..meta)
            .filter(|_| {
                let est = approx_distribution(1, eps, 0.05, &mut rng, categorical(&[0.5, 0.5], 1)).unwrap();
                (est.prob(&outcome(0, 1)) - 0.5).abs() <= eps && (est.prob(&outcome(1, 1)) - 0.5).abs() <= eps
            })
            .count();
        assert!(good as f64 >= 0.95 * meta as f64, "good={good}");
    }

    #[test]
    fn three_outcomes_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = approx_distribution(2, 0.03, 0.01, &mut rng, categorical(&[0.5, 0.3, 0.2], 2)).unwrap();
        for (i, p) in [0.5, 0.3, 0.2].iter().enumerate() {
            assert!((est.prob(&outcome(i, 2)) - p).abs() <= 0.03);
        }
        let total: f64 = est.table().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_entropy_examples() {
        let mut counts = BTreeMap::new();
        for i in 0..8 {
            counts.insert(outcome(i, 3), 10);
        }
        let est = DistributionEstimate { counts, runs: 80, eps: 0.1, delta: 0.1 };
        assert!((min_entropy_estimate(&est).unwrap() - 3.0).abs() < 1e-12);
        let empty = DistributionEstimate { counts: BTreeMap::new(), runs: 0, eps: 0.1, delta: 0.1 };
        assert!(min_entropy_estimate(&empty).is_err());
    }

    #[test]
    fn extractor_field_is_a_field() {
        for a in 1u128..256 {
            for b in 1u128..256 {
                assert_ne!(gf2w_mul(a, b, 8, 0x1b), 0);
            }
        }
        // x^(2^w) = x and x^(2^(w/2)) != x for w = 16, 32, 64.
        for &(w, low) in &WIDTHS[1..4] {
            let mut x = 2u128;
            for step in 1..=w {
                x = gf2w_mul(x, x, w, low);
                if step == w / 2 {
                    assert_ne!(x, 2, "w={w}");
                }
            }
            assert_eq!(x, 2, "w={w}");
        }
        assert_eq!(gf2w_mul(3, 7, 128, 0x87), 9);
    }

    #[test]
    fn extractor_pairwise_independent_exhaustive() {
        let spec = ExtractorSpec::unchecked(8, 2, 0.25).unwrap();
        let (x1, x2): (u8, u8) = (17, 200);
        let mut counts = BTreeMap::new();
        for a in 0..256u128 {
            for b in 0..256u128 {
                let seed = ExtractorSeed { a, b };
                let y1 = extract(&spec, &Bits::from_bytes(&[x1], 8), &seed).unwrap();
                let y2 = extract(&spec, &Bits::from_bytes(&[x2], 8), &seed).unwrap();
                *counts.entry((y1, y2)).or_insert(0u32) += 1;
            }
        }
        assert_eq!(counts.len(), 16);
        assert!(counts.values().all(|&c| c == 4096));
    }

    #[test]
    fn extractor_uniform_source() {
        let spec = ExtractorSpec::new(12, 12.0, 4, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples = 10_000;
        let mut counts = [0u64; 16];
        let mut joint = [[0u64; 16]; 2];
        for _ in 0..samples {
            let seed = spec.random_seed(&mut rng);
            let src = Bits::random(12, &mut rng);
            let out = extract(&spec, &src, &seed).unwrap();
            let v = out.to_bytes()[0] as usize & 0xf;
            counts[v] += 1;
            joint[(seed.a & 1) as usize][v] += 1;
        }
        let e = samples as f64 / 16.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 99th percentile, 15 degrees of freedom.
        assert!(chi2 < 30.578, "chi2={chi2}");
        let e2 = samples as f64 / 32.0;
        let chi2j: f64 = joint.iter().flatten().map(|&c| (c as f64 - e2).powi(2) / e2).sum();
        // 99th percentile, 31 degrees of freedom.
        assert!(chi2j < 52.191, "chi2={chi2j}");
    }

    #[test]
    fn extractor_edges() {
        let spec = ExtractorSpec::new(12, 12.0, 0, 0.5).unwrap();
        let seed = ExtractorSeed { a: 3, b: 9 };
        let src = Bits::ones(12);
        assert!(extract(&spec, &src, &seed).unwrap().is_empty());
        let spec = ExtractorSpec::unchecked(12, 5, 0.5).unwrap();
        assert_eq!(extract(&spec, &src, &seed).unwrap(), extract(&spec, &src, &seed).unwrap());
        assert_eq!(extract(&spec, &src, &seed).unwrap().len(), 5);
        assert!(extract(&spec, &Bits::ones(4), &seed).is_err());
        assert!(ExtractorSpec::new(12, 6.0, 4, 0.25).is_err());
        let hex = spec.seed_hex(&seed);
        assert_eq!(spec.seed_from_hex(&hex).unwrap(), seed);
        assert!(spec.seed_from_hex("12").is_err());
    }

    #[test]
    fn threshold_adversary_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let star = outcome(2, 2);
        let s = star.clone();
        let out = threshold_adversary(2, 1.0, 1, &mut rng, move |_| Ok(s.clone()), |_| true).unwrap();
        assert_eq!(out, Some(star.clone()));
        let s = star.clone();
        assert_eq!(threshold_adversary(2, 1.0, 2, &mut rng, move |_| Ok(s.clone()), |_| false).unwrap(), None);

        // Masses 0.9 / 0.1 with eps_A = 0.5: every threshold lies in (0.25, 0.5).
        let heavy = outcome(3, 2);
        for i in 1..=8 {
            assert!(threshold(0.5, i, 8) > 0.25 && threshold(0.5, i, 8) < 0.5);
        }
        for trial in 0..100 {
            let i = trial % 8 + 1;
            let out = threshold_adversary(2, 0.5, i, &mut rng, categorical(&[0.1, 0.0, 0.0, 0.9], 2), |_| true).unwrap();
            assert_eq!(out.as_ref(), Some(&heavy));
        }
        assert!(threshold_adversary(2, 0.5, 9, &mut rng, categorical(&[1.0], 2), |_| true).is_err());
    }

    #[test]
    fn pom_levels_and_entropy() {
        assert!(pom_level(0).is_ok());
        assert!(pom_level(5).is_err());
        let proto = pom_protocol(4, 0).unwrap();
        let mut seed = 40;
        let h = loop {
            seed += 1;
            let h = sample_oracle(seed, proto.sigma_size(), proto.n(), OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
            if h.in_restricted_class().unwrap() {
                break h;
            }
        };
        let prover = Prover::new(&proto, &h, &Bits::ones(proto.n())).unwrap();
        let mut hv = h.clone();
        let accepted: Vec<f64> = proto
            .codewords()
            .iter()
            .filter(|&&z| verify(&proto, &mut hv, &Proof::of(proto.code.word_from_index(z)), &Bits::ones(proto.n())))
            .map(|&z| prover.output_distribution()[z as usize])
            .collect();
        let support = accepted.iter().filter(|&&p| p > 1e-12).count();
        assert!(support >= 2);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut counts: BTreeMap<Vec<Fe>, u64> = BTreeMap::new();
        let mut total = 0;
        for _ in 0..1000 {
            let p = prover.sample(&mut rng).unwrap();
            if let Some(x) = pom_verify(&proto, &mut hv, &p) {
                assert!(verify(&proto, &mut hv, &Proof::of(x.clone()), &Bits::ones(proto.n())));
                *counts.entry(x).or_insert(0) += 1;
                total += 1;
            }
        }
        assert!(total > 0);
        let max = *counts.values().max().unwrap() as f64 / total as f64;
        let measured = -max.log2();
        assert!(measured >= (support as f64).log2() - 1.0, "measured={measured} support={support}");
        assert!(pom_verify(&proto, &mut hv, &Proof::abort()).is_none());
    }

    #[test]
    fn threshold_adversary_is_stable() {
        // Masses 0.6 / 0.3 / 0.1 and threshold ≈ 0.258: the qualifying set is
        // {0.6, 0.3} with margin well above the estimator's eps.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let runs = 50;
        let target = outcome(0, 2);
        let hits = (0..runs)
            .filter(|_| {
                threshold_adversary(2, 0.5, 1, &mut rng, categorical(&[0.6, 0.3, 0.1], 2), |_| true).unwrap()
                    == Some(target.clone())
            })
            .count();
        assert!(hits as f64 >= 0.8 * runs as f64, "hits={hits}");
    }

    proptest! {
        #[test]
        fn merging_outcomes_never_raises_entropy(counts in proptest::collection::vec(1u64..50, 2..8)) {
            let runs: u64 = counts.iter().sum();
            let mk = |cs: &[u64]| DistributionEstimate {
                counts: cs.iter().enumerate().map(|(i, &c)| (outcome(i, 3), c)).collect(),
                runs,
                eps: 0.1,
                delta: 0.1,
            };
            let before = min_entropy_estimate(&mk(&counts)).unwrap();
            let mut merged = counts[1..].to_vec();
            merged[0] += counts[0];
            let after = min_entropy_estimate(&mk(&merged)).unwrap();
            prop_assert!(after <= before + 1e-12);
        }
    }
}
