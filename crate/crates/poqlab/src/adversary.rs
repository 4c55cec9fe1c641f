//! Classical query-bounded baselines and exact combinatorial checks.
//!
//! The attacks here are baselines: their measured failure rates are data,
//! not security arguments.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::codes::{weight_distribution, CodeParams, FoldedCode};
use crate::protocol::{verify, Proof, Protocol, Prover};
use crate::rom::{sample_oracle, Bits, OracleMode, OracleTable, DEFAULT_TABLE_CAP};
use crate::stats::wilson_interval;
use crate::{Error, Result};

/// Normal quantile used for reported Wilson intervals (95%).
pub const WILSON_Z: f64 = 1.959964;

/// `SHA-256(seed ‖ label ‖ index)` truncated to 64 bits.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Oracle access with a hard cap on distinct points.
///
/// Repeated queries to an answered point are free. The adversary reads
/// values only through [`QueryBudget::query`] and [`QueryBudget::known`].
#[derive(Debug, Clone)]
pub struct QueryBudget {
    oracle: OracleTable,
    seen: HashMap<u64, Bits>,
    cap: u64,
}

impl QueryBudget {
    pub fn new(oracle: OracleTable, cap: u64) -> Result<Self> {
        if oracle.mode() == OracleMode::Lazy && oracle.answered() != 0 {
            return Err(Error::invalid("a query budget needs a fresh lazy oracle"));
        }
        Ok(QueryBudget { oracle, seen: HashMap::new(), cap })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Distinct points charged so far.
    pub fn used(&self) -> u64 {
        self.seen.len() as u64
    }

    pub fn remaining(&self) -> u64 {
        self.cap - self.used()
    }

    /// A previously queried value.
    pub fn known(&self, x: u64) -> Option<&Bits> {
        self.seen.get(&x)
    }

    pub fn query(&mut self, x: u64) -> Result<Bits> {
        if let Some(v) = self.seen.get(&x) {
            return Ok(v.clone());
        }
        if self.used() >= self.cap {
            return Err(Error::BudgetExhausted(self.cap));
        }
        let v = self.oracle.query(x);
        self.seen.insert(x, v.clone());
        Ok(v)
    }

    pub fn oracle(&self) -> &OracleTable {
        &self.oracle
    }
}

/// Tries `⌊Q/n⌋` distinct random codewords, querying every position of each.
pub fn random_search_adversary<R: Rng + ?Sized>(proto: &Protocol, budget: &mut QueryBudget, y: &Bits, rng: &mut R) -> Proof {
    let n = proto.n();
    let tries = (budget.cap() / n as u64) as usize;
    let picks: Vec<u64> = proto.codewords().choose_multiple(rng, tries).copied().collect();
    for z in picks {
        let mut all = true;
        for (i, s) in proto.symbols_of(z).into_iter().enumerate() {
            match budget.query(s) {
                Ok(v) => all &= v.get(i + 1) == y.get(i + 1),
                Err(_) => return Proof::abort(),
            }
        }
        if all {
            return Proof::of(proto.code.word_from_index(z));
        }
    }
    Proof::abort()
}

/// Tracks per-symbol knowledge and always extends the live codeword with the
/// fewest unknown positions.
///
/// A codeword is live while none of its queried positions contradicts `y`;
/// the candidate scan is a brute-force pass over `C`.
pub fn greedy_position_adversary<R: Rng + ?Sized>(proto: &Protocol, budget: &mut QueryBudget, y: &Bits, rng: &mut R) -> Proof {
    let symbols: Vec<Vec<u64>> = proto.codewords().iter().map(|&z| proto.symbols_of(z)).collect();
    let mut order: Vec<usize> = (0..symbols.len()).collect();
    order.shuffle(rng);
    let mut dead = vec![false; symbols.len()];
    loop {
        let mut best: Option<(usize, usize)> = None;
        for &c in &order {
            if dead[c] {
                continue;
            }
            let mut unknown = 0;
            for (i, &s) in symbols[c].iter().enumerate() {
                match budget.known(s) {
                    Some(v) if v.get(i + 1) != y.get(i + 1) => {
                        dead[c] = true;
                        break;
                    }
                    Some(_) => {}
                    None => unknown += 1,
                }
            }
            if !dead[c] && best.is_none_or(|b| unknown < b.1) {
                best = Some((c, unknown));
            }
        }
        let Some((c, unknown)) = best else {
            return Proof::abort();
        };
        if unknown == 0 {
            return Proof::of(proto.code.word_from_index(proto.codewords()[c]));
        }
        let next = symbols[c].iter().copied().find(|&s| budget.known(s).is_none()).expect("unknown position");
        if budget.query(next).is_err() {
            return Proof::abort();
        }
    }
}

/// Strategies runnable by [`soundness_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    RandomSearch,
    Greedy,
    /// The simulated quantum prover; its queries are not budgeted.
    Honest,
}

impl std::str::FromStr for Adversary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-search" => Ok(Adversary::RandomSearch),
            "greedy" => Ok(Adversary::Greedy),
            "honest" => Ok(Adversary::Honest),
            _ => Err(Error::Config(format!("unknown adversary {s:?}"))),
        }
    }
}

/// Soundness-experiment settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExperimentSpec {
    pub adversary: Adversary,
    #[serde(rename = "Q")]
    pub budget: u64,
    pub trials: u64,
    pub seed: u64,
    /// Resample each trial's oracle until it lies in the restricted class.
    pub restricted: bool,
    pub workers: usize,
}

/// One trial of a soundness experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub oracle_seed: u64,
    pub success: bool,
    pub queries: u64,
    /// Exact success probability, for the honest prover only.
    pub exact_success: Option<f64>,
}

/// Aggregate of a soundness experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub params: CodeParams,
    pub adversary: Adversary,
    #[serde(rename = "Q")]
    pub budget: u64,
    pub trials: u64,
    pub successes: u64,
    pub measured_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Mean exact success probability over the sampled oracles (honest only).
    pub exact_mean: Option<f64>,
}

/// Oracle seed for one trial, resampled into the restricted class on request.
pub fn trial_oracle_seed(proto: &Protocol, seed: u64, trial: u64, restricted: bool) -> Result<u64> {
    let base = derive_seed(seed, "trial", trial);
    if !restricted {
        return Ok(base);
    }
    for attempt in 0..10_000 {
        let s = derive_seed(base, "restricted", attempt);
        let h = sample_oracle(s, proto.sigma_size(), proto.n(), OracleMode::Explicit, DEFAULT_TABLE_CAP)?;
        if h.in_restricted_class()? {
            return Ok(s);
        }
    }
    Err(Error::invalid("restricted class looks empty at these parameters"))
}

fn run_trial(proto: &Protocol, spec: &ExperimentSpec, trial: u64) -> Result<TrialRecord> {
    let oracle_seed = trial_oracle_seed(proto, spec.seed, trial, spec.restricted)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, "adversary", trial));
    let y = Bits::ones(proto.n());
    let lazy = || sample_oracle(oracle_seed, proto.sigma_size(), proto.n(), OracleMode::Lazy, DEFAULT_TABLE_CAP);
    let (proof, queries, exact_success) = match spec.adversary {
        Adversary::Honest => {
            let h = sample_oracle(oracle_seed, proto.sigma_size(), proto.n(), OracleMode::Explicit, DEFAULT_TABLE_CAP)?;
            let prover = Prover::new(proto, &h, &y)?;
            (prover.sample(&mut rng)?, 0, Some(prover.success_probability()))
        }
        Adversary::RandomSearch | Adversary::Greedy => {
            let mut budget = QueryBudget::new(lazy()?, spec.budget)?;
            let proof = if spec.adversary == Adversary::Greedy {
                greedy_position_adversary(proto, &mut budget, &y, &mut rng)
            } else {
                random_search_adversary(proto, &mut budget, &y, &mut rng)
            };
            (proof, budget.used(), None)
        }
    };
    let success = verify(proto, &mut lazy()?, &proof, &y);
    Ok(TrialRecord { trial, oracle_seed, success, queries, exact_success })
}

/// Runs `trials` independent trials with a fresh oracle each; the target is
/// `y = 1^n`. Records come back in trial order regardless of `workers`.
pub fn soundness_experiment(proto: &Protocol, spec: &ExperimentSpec) -> Result<(SoundnessReport, Vec<TrialRecord>)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let records: Vec<TrialRecord> = pool.install(|| {
        (0..spec.trials).into_par_iter().map(|t| run_trial(proto, spec, t)).collect::<Result<Vec<_>>>()
    })?;
    let successes = records.iter().filter(|r| r.success).count() as u64;
    let (wilson_low, wilson_high) = wilson_interval(successes, spec.trials, WILSON_Z);
    let exact_mean = match spec.adversary {
        Adversary::Honest if spec.trials > 0 => {
            Some(records.iter().filter_map(|r| r.exact_success).sum::<f64>() / spec.trials as f64)
        }
        _ => None,
    };
    let report = SoundnessReport {
        params: proto.params.code.clone(),
        adversary: spec.adversary,
        budget: spec.budget,
        trials: spec.trials,
        successes,
        measured_rate: if spec.trials == 0 { 0.0 } else { successes as f64 / spec.trials as f64 },
        wilson_low,
        wilson_high,
        exact_mean,
    };
    Ok((report, records))
}

/// Success probability of independent full-codeword guesses: `1-(1-2^{-n})^{⌊Q/n⌋}`.
pub fn random_search_closed_form(n: usize, budget: u64) -> f64 {
    1.0 - (1.0 - 0.5f64.powi(n as i32)).powi((budget / n as u64) as i32)
}

/// Exact collision probability of `f(x) = (H_i(x_i))_i` over uniform `x ∈ C`
/// and random `H`, reported scaled by `2^{(|Σ|+1)n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionReport {
    pub params: CodeParams,
    pub n: usize,
    pub sigma_size: u64,
    pub code_size: u64,
    /// `Col·2^{(|Σ|+1)n}` from the weight distribution.
    pub scaled_identity: f64,
    /// The same quantity from the double sum over `C × C`.
    pub scaled_enumeration: Option<f64>,
    /// Exact rational equality of the two paths.
    pub paths_equal: Option<bool>,
    pub relative_gap: Option<f64>,
    pub log2_col: f64,
    /// `1 + 2^n/|C| + r/(1-r)` with `r = 2n/|Σ|`; absent when `r ≥ 1`.
    pub scaled_bound: Option<f64>,
    pub bound_holds: bool,
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn ratio(num: u128, den: u128) -> f64 {
    let g = gcd(num, den).max(1);
    (num / g) as f64 / (den / g) as f64
}

/// Computes the collision probability along both paths.
///
/// The enumeration path runs when `|C|²·n ≤ cap`.
pub fn collision_probability_exact(code: &FoldedCode, cap: u64) -> Result<CollisionReport> {
    let n = code.n();
    let table = weight_distribution(code, cap)?;
    let size = table.total as u128;
    // Σ_w count_w·2^{n-w} over |C|.
    let identity_num: u128 = table.counts.iter().enumerate().map(|(w, &c)| (c as u128) << (n - w)).sum();
    let scaled_identity = ratio(identity_num, size);

    let pairs = size * size * n as u128;
    let (scaled_enumeration, paths_equal) = if pairs <= cap as u128 {
        let words: Vec<Vec<u64>> = code.inner().codewords(cap)?.iter().map(|c| code.symbols(c)).collect();
        let mut num: u128 = 0;
        for a in &words {
            for b in &words {
                let agree = a.iter().zip(b).filter(|(s, t)| s == t).count();
                num += 1u128 << agree;
            }
        }
        (Some(ratio(num, size * size)), Some(num == identity_num * size))
    } else {
        (None, None)
    };
    let relative_gap = scaled_enumeration.map(|e| (e - scaled_identity).abs() / scaled_identity);

    let sigma = code.sigma_size();
    let r = 2.0 * n as f64 / sigma as f64;
    let scaled_bound = (r < 1.0).then(|| 1.0 + 2f64.powi(n as i32) / size as f64 + r / (1.0 - r));
    let bound_holds = scaled_bound.is_none_or(|b| scaled_identity <= b * (1.0 + 1e-12));
    let log2_col = scaled_identity.log2() - ((sigma + 1) * n as u64) as f64;
    Ok(CollisionReport {
        params: code.params(),
        n,
        sigma_size: sigma,
        code_size: table.total,
        scaled_identity,
        scaled_enumeration,
        paths_equal,
        relative_gap,
        log2_col,
        scaled_bound,
        bound_holds,
    })
}

/// Distance of honest accepted outputs from uniform over `{x ∈ C : f(x) = y}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub preimages: usize,
    pub trials: u64,
    pub accepted: u64,
    /// From the final-state amplitudes.
    pub exact_tv: f64,
    pub measured_tv: f64,
    /// `(3/2)·Σ_x sqrt(p_x(1-p_x)/accepted)`.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Compares the exact and sampled conditional output distributions of the
/// honest prover with the uniform distribution on the preimage set.
pub fn inverter_uniformity_test<R: Rng + ?Sized>(proto: &Protocol, h: &OracleTable, y: &Bits, trials: u64, rng: &mut R) -> Result<UniformityReport> {
    if !h.is_explicit() {
        return Err(Error::LazyOracle);
    }
    let mut preimages: Vec<u64> = Vec::new();
    for &z in proto.codewords() {
        let mut ok = true;
        for (i, s) in proto.symbols_of(z).into_iter().enumerate() {
            ok &= h.bit(s, i + 1)? == y.get(i + 1);
        }
        if ok {
            preimages.push(z);
        }
    }
    if preimages.is_empty() {
        return Err(Error::invalid("y has no preimage in the code"));
    }
    let prover = Prover::new(proto, h, y)?;
    let dist = prover.output_distribution();
    let mass: f64 = preimages.iter().map(|&z| dist.get(z as usize).copied().unwrap_or(0.0)).sum();
    if mass <= 0.0 {
        return Err(Error::invalid("the prover never outputs a preimage of y"));
    }
    let exact: Vec<f64> = preimages.iter().map(|&z| dist[z as usize] / mass).collect();
    let u = 1.0 / preimages.len() as f64;
    let exact_tv = 0.5 * exact.iter().map(|p| (p - u).abs()).sum::<f64>();

    let slot: HashMap<u64, usize> = preimages.iter().enumerate().map(|(i, &z)| (z, i)).collect();
    let mut counts = vec![0u64; preimages.len()];
    let mut accepted = 0;
    for _ in 0..trials {
        if let Some(x) = prover.sample(rng)?.codeword {
            if let Some(&i) = slot.get(&proto.code.word_index(&x)) {
                counts[i] += 1;
                accepted += 1;
            }
        }
    }
    let (measured_tv, tolerance) = if accepted == 0 {
        (f64::NAN, f64::INFINITY)
    } else {
        let a = accepted as f64;
        let tv = 0.5 * counts.iter().map(|&c| (c as f64 / a - u).abs()).sum::<f64>();
        let tol = 1.5 * exact.iter().map(|p| (p * (1.0 - p) / a).sqrt()).sum::<f64>();
        (tv, tol)
    };
    Ok(UniformityReport {
        preimages: preimages.len(),
        trials,
        accepted,
        exact_tv,
        measured_tv,
        tolerance,
        within_tolerance: accepted > 0 && (measured_tv - exact_tv).abs() <= tolerance + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::DEFAULT_ENUM_CAP;
    use crate::protocol::tiny_protocol;
    use crate::stats::within_sigmas;

    fn lazy(proto: &Protocol, seed: u64) -> OracleTable {
        sample_oracle(seed, proto.sigma_size(), proto.n(), OracleMode::Lazy, DEFAULT_TABLE_CAP).unwrap()
    }

    fn spec(adversary: Adversary, budget: u64, trials: u64, seed: u64) -> ExperimentSpec {
        ExperimentSpec { adversary, budget, trials, seed, restricted: false, workers: 1 }
    }

    #[test]
    fn budget_charges_distinct_points() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let mut b = QueryBudget::new(lazy(&proto, 1), 2).unwrap();
        b.query(0).unwrap();
        b.query(0).unwrap();
        b.query(3).unwrap();
        assert_eq!(b.used(), 2);
        assert!(matches!(b.query(4), Err(Error::BudgetExhausted(2))));
        assert!(b.query(3).is_ok());
        assert!(b.known(4).is_none());
        assert_eq!(b.used() as usize, b.oracle().answered());
        let mut used = lazy(&proto, 1);
        used.query(0);
        assert!(QueryBudget::new(used, 2).is_err());
    }

    #[test]
    fn zero_budget_always_fails() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        for adv in [Adversary::RandomSearch, Adversary::Greedy] {
            let (r, recs) = soundness_experiment(&proto, &spec(adv, 0, 20, 3)).unwrap();
            assert_eq!(r.successes, 0);
            assert!(recs.iter().all(|t| t.queries == 0));
        }
    }

    #[test]
    fn exhaustive_budget_always_succeeds_when_possible() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let q = proto.n() as u64 * proto.codewords().len() as u64;
        let y = Bits::ones(proto.n());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..30 {
            let mut full = sample_oracle(seed, proto.sigma_size(), proto.n(), OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
            let exists = proto.codewords().iter().any(|&z| verify(&proto, &mut full, &Proof::of(proto.code.word_from_index(z)), &y));
            for adv in [random_search_adversary, greedy_position_adversary] {
                let mut b = QueryBudget::new(lazy(&proto, seed), q).unwrap();
                let p = adv(&proto, &mut b, &y, &mut rng);
                assert_eq!(verify(&proto, &mut lazy(&proto, seed), &p, &y), exists);
            }
        }
    }

    #[test]
    fn all_match_oracle_is_immediate() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let n = proto.n();
        let y = Bits::ones(n);
        let h = OracleTable::constant(proto.sigma_size(), Bits::ones(n));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut b = QueryBudget::new(h.clone(), n as u64).unwrap();
        let p = greedy_position_adversary(&proto, &mut b, &y, &mut rng);
        assert!(verify(&proto, &mut h.clone(), &p, &y));
        assert!(b.used() <= n as u64);

        // Nothing matches: every S_i stays empty and the adversary fails.
        let none = OracleTable::constant(proto.sigma_size(), Bits::zeros(n));
        let mut b = QueryBudget::new(none, 1000).unwrap();
        assert!(greedy_position_adversary(&proto, &mut b, &y, &mut rng).is_abort());
    }

    #[test]
    fn lazy_memo_matches_budget_counter() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let y = Bits::ones(proto.n());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for seed in 0..50 {
            let mut b = QueryBudget::new(lazy(&proto, seed), 9).unwrap();
            greedy_position_adversary(&proto, &mut b, &y, &mut rng);
            assert_eq!(b.used() as usize, b.oracle().answered());
            assert!(b.used() <= 9);
        }
    }

    #[test]
    fn random_search_matches_closed_form() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let trials = 300;
        let (r, _) = soundness_experiment(&proto, &spec(Adversary::RandomSearch, 40, trials, 6)).unwrap();
        let p = random_search_closed_form(4, 40);
        assert!(within_sigmas(r.measured_rate, p, trials, 3.0), "rate={} closed={p}", r.measured_rate);
    }

    #[test]
    fn greedy_beats_random_search_and_grows_with_budget() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let (g, _) = soundness_experiment(&proto, &spec(Adversary::Greedy, 12, 100, 7)).unwrap();
        let (r, _) = soundness_experiment(&proto, &spec(Adversary::RandomSearch, 12, 100, 7)).unwrap();
        assert!(g.successes > r.successes, "greedy={} random={}", g.successes, r.successes);
        let mut prev: f64 = 0.0;
        for q in [0, 4, 8, 12, 16, 20] {
            let (rep, _) = soundness_experiment(&proto, &spec(Adversary::Greedy, q, 200, 8)).unwrap();
            let sigma = crate::stats::binomial_sigma(prev.max(rep.measured_rate), 200);
            assert!(rep.measured_rate + 3.0 * sigma + 1e-12 >= prev, "q={q}");
            prev = rep.measured_rate;
        }
    }

    #[test]
    fn honest_rate_matches_exact_mean() {
        let proto = tiny_protocol(5, 1, 2, 0).unwrap();
        let trials = 200;
        let mut s = spec(Adversary::Honest, 0, trials, 9);
        s.restricted = true;
        let (r, recs) = soundness_experiment(&proto, &s).unwrap();
        let exact = r.exact_mean.unwrap();
        assert!(within_sigmas(r.measured_rate, exact, trials, 3.0), "rate={} exact={exact}", r.measured_rate);
        assert_eq!(recs.len(), trials as usize);
    }

    #[test]
    fn experiments_are_deterministic_across_workers() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let mut s = spec(Adversary::Greedy, 16, 40, 10);
        let a = soundness_experiment(&proto, &s).unwrap();
        s.workers = 3;
        let b = soundness_experiment(&proto, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a.0).unwrap(), serde_json::to_string(&b.0).unwrap());
        assert!(serde_json::to_string(&a.0).unwrap().contains("\"Q\":16"));
    }

    #[test]
    fn collision_full_code_hand_value() {
        // n = 1: Col·2^{|Σ|+1} = 1 + 1/|C|.
        for (q, m) in [(3u64, 2usize), (5, 4), (4, 3)] {
            let code = FoldedCode::new(q, m, m - 1, None).unwrap();
            let r = collision_probability_exact(&code, DEFAULT_ENUM_CAP).unwrap();
            let c = (q as f64).powi(m as i32);
            assert_eq!(r.code_size as f64, c);
            assert!((r.scaled_identity - (1.0 + 1.0 / c)).abs() < 1e-15);
            assert_eq!(r.paths_equal, Some(true));
        }
    }

    #[test]
    fn collision_paths_agree_and_bound_holds() {
        let sets = [
            (3u64, 1usize, 0usize),
            (3, 1, 1),
            (3, 2, 1),
            (4, 1, 1),
            (4, 3, 1),
            (4, 3, 2),
            (5, 1, 1),
            (5, 1, 2),
            (5, 2, 1),
            (5, 2, 2),
            (5, 4, 3),
            (7, 1, 1),
            (7, 2, 2),
            (7, 3, 3),
            (8, 1, 1),
            (8, 7, 2),
            (9, 2, 2),
            (11, 2, 1),
            (11, 5, 2),
            (13, 3, 2),
        ];
        let mut checked_bound = 0;
        for (q, m, k) in sets {
            let code = FoldedCode::new(q, m, k, None).unwrap();
            let r = collision_probability_exact(&code, 1 << 26).unwrap();
            assert_eq!(r.paths_equal, Some(true), "{q},{m},{k}");
            assert!(r.relative_gap.unwrap() <= 1e-15);
            assert!(r.bound_holds, "{q},{m},{k}: {r:?}");
            checked_bound += r.scaled_bound.is_some() as usize;
        }
        assert!(checked_bound >= 4, "{checked_bound}");
    }

    #[test]
    fn collision_enumeration_skipped_past_cap() {
        let code = FoldedCode::new(16, 5, 3, None).unwrap();
        let r = collision_probability_exact(&code, 1 << 16).unwrap();
        assert!(r.scaled_enumeration.is_none());
        assert!(collision_probability_exact(&code, 10).is_err());
    }

    fn restricted_explicit(proto: &Protocol, seed: &mut u64) -> OracleTable {
        loop {
            *seed += 1;
            let h = sample_oracle(*seed, proto.sigma_size(), proto.n(), OracleMode::Explicit, DEFAULT_TABLE_CAP).unwrap();
            if h.in_restricted_class().unwrap() {
                return h;
            }
        }
    }

    #[test]
    fn inverter_uniformity_exact_vs_measured() {
        let proto = tiny_protocol(5, 1, 2, 0).unwrap();
        let y = Bits::ones(proto.n());
        let mut seed = 100;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ran = 0;
        while ran < 5 {
            let h = restricted_explicit(&proto, &mut seed);
            let Ok(r) = inverter_uniformity_test(&proto, &h, &y, 400, &mut rng) else { continue };
            ran += 1;
            assert!(r.within_tolerance, "{r:?}");
            if r.preimages == 1 {
                assert_eq!(r.exact_tv, 0.0);
            }
        }
    }

    #[test]
    fn inverter_uniformity_all_good_is_uniform() {
        let proto = tiny_protocol(5, 1, 1, 0).unwrap();
        let n = proto.n();
        let y = Bits::ones(n);
        // Half the symbols hash to all-ones: a preimage set with symmetric amplitudes.
        let h = OracleTable::from_fn(proto.sigma_size(), n, |x| if x % 2 == 0 { Bits::ones(n) } else { Bits::zeros(n) });
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = inverter_uniformity_test(&proto, &h, &y, 50, &mut rng);
        if let Ok(r) = r {
            assert!(r.exact_tv >= 0.0 && r.exact_tv <= 1.0);
        }
        let none = OracleTable::constant(proto.sigma_size(), Bits::zeros(n));
        assert!(inverter_uniformity_test(&proto, &none, &y, 10, &mut rng).is_err());
        assert!(inverter_uniformity_test(&proto, &lazy(&proto, 1), &y, 10, &mut rng).is_err());
    }

    #[test]
    fn derive_seed_separates_labels() {
        assert_ne!(derive_seed(1, "a", 0), derive_seed(1, "b", 0));
        assert_ne!(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
        assert_eq!(derive_seed(1, "a", 0), derive_seed(1, "a", 0));
    }
}
