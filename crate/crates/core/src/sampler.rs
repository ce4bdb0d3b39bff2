//! Truncated output distributions over binary photon patterns and
//! reproducible multinomial sampling.
//!
//! Only patterns with nonzero probability are stored (squeezed states emit
//! photon pairs, so only even-N patterns can appear); the probability mass
//! outside the enumerated set is reported as `leakage`, never silently
//! renormalized away. Sampling uses the ChaCha12 generator so histograms
//! reproduce bit-for-bit across platforms for a fixed seed.

use crate::hafnian::{self, EncodingBundle, HafnianError, PhotonPattern};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Work cap for distribution enumeration, measured in estimated
/// matching-enumeration leaves.
pub const DEFAULT_WORK_BUDGET: u128 = 2_000_000_000;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("N_max must be even, got {0}")]
    OddCutoff(usize),
    #[error("N_max {0} exceeds mode count {1}")]
    CutoffTooLarge(usize, usize),
    #[error(
        "enumeration work estimate {estimate} exceeds budget {budget} \
         (sum over even N <= {n_max} of C({modes},N)(N-1)!!)"
    )]
    WorkBudgetExceeded {
        estimate: u128,
        budget: u128,
        modes: usize,
        n_max: usize,
    },
    #[error("distribution has zero total mass")]
    ZeroMass,
    #[error(transparent)]
    Hafnian(#[from] HafnianError),
}

/// Enumerated binary-pattern distribution with truncation bookkeeping.
#[derive(Debug, Clone)]
pub struct PatternDistribution {
    pub mode_count: usize,
    pub entries: BTreeMap<PhotonPattern, f64>,
    pub max_photons: usize,
    pub leakage: f64,
}

impl PatternDistribution {
    pub fn probability(&self, pattern: &PhotonPattern) -> f64 {
        self.entries.get(pattern).copied().unwrap_or(0.0)
    }

    pub fn enumerated_mass(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// Seeded sampling result.
#[derive(Debug, Clone)]
pub struct SampleHistogram {
    pub counts: BTreeMap<PhotonPattern, u64>,
    pub total_draws: u64,
    pub seed: u64,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
    }
    result
}

/// Estimated enumeration work: sum over even N <= n_max of C(M,N)(N-1)!!.
pub fn enumeration_work_estimate(mode_count: usize, n_max: usize) -> u128 {
    (0..=n_max)
        .step_by(2)
        .map(|n| binomial(mode_count, n) * hafnian::perfect_matchings(n).unwrap_or(0))
        .sum()
}

fn patterns_of_weight(mode_count: usize, weight: usize) -> Vec<PhotonPattern> {
    // Lexicographically ordered support sets via recursive choice.
    let mut out = Vec::new();
    let mut support = Vec::with_capacity(weight);
    fn recurse(
        mode_count: usize,
        weight: usize,
        start: usize,
        support: &mut Vec<usize>,
        out: &mut Vec<PhotonPattern>,
    ) {
        if support.len() == weight {
            let mut bits = vec![0u8; mode_count];
            for &i in support.iter() {
                bits[i] = 1;
            }
            out.push(PhotonPattern::new(bits).expect("bits are binary"));
            return;
        }
        let remaining = weight - support.len();
        for i in start..=(mode_count - remaining) {
            support.push(i);
            recurse(mode_count, weight, i + 1, support, out);
            support.pop();
        }
    }
    recurse(mode_count, weight, 0, &mut support, &mut out);
    out
}

/// Enumerate every binary pattern with N <= n_max photons, storing the
/// nonzero-probability ones and reporting the leftover mass as leakage.
pub fn enumerate_distribution(
    bundle: &EncodingBundle,
    n_max: usize,
) -> Result<PatternDistribution, SamplerError> {
    enumerate_distribution_with_budget(bundle, n_max, DEFAULT_WORK_BUDGET)
}

pub fn enumerate_distribution_with_budget(
    bundle: &EncodingBundle,
    n_max: usize,
    budget: u128,
) -> Result<PatternDistribution, SamplerError> {
    let m = bundle.mode_count();
    if n_max % 2 != 0 {
        return Err(SamplerError::OddCutoff(n_max));
    }
    if n_max > m {
        return Err(SamplerError::CutoffTooLarge(n_max, m));
    }
    let estimate = enumeration_work_estimate(m, n_max);
    if estimate > budget {
        return Err(SamplerError::WorkBudgetExceeded {
            estimate,
            budget,
            modes: m,
            n_max,
        });
    }
    let mut entries = BTreeMap::new();
    let mut mass = 0.0;
    for n in (0..=n_max).step_by(2) {
        for pattern in patterns_of_weight(m, n) {
            let p = hafnian::pattern_probability(bundle, &pattern)?;
            if p > 0.0 {
                mass += p;
                entries.insert(pattern, p);
            }
        }
    }
    Ok(PatternDistribution {
        mode_count: m,
        entries,
        max_photons: n_max,
        leakage: (1.0 - mass).max(0.0),
    })
}

/// Multinomial draws from the renormalized enumerated entries; a fixed seed
/// reproduces counts exactly.
pub fn draw_samples(
    dist: &PatternDistribution,
    count: u64,
    seed: u64,
) -> Result<SampleHistogram, SamplerError> {
    let total: f64 = dist.enumerated_mass();
    if total <= 0.0 {
        return Err(SamplerError::ZeroMass);
    }
    // Cumulative table in the map's (deterministic) pattern order.
    let patterns: Vec<&PhotonPattern> = dist.entries.keys().collect();
    let mut cumulative = Vec::with_capacity(patterns.len());
    let mut acc = 0.0;
    for p in &patterns {
        acc += dist.entries[*p] / total;
        cumulative.push(acc);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<PhotonPattern, u64> = BTreeMap::new();
    for _ in 0..count {
        let u: f64 = rng.gen();
        let idx = match cumulative.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
            Ok(i) => (i + 1).min(patterns.len() - 1),
            Err(i) => i.min(patterns.len() - 1),
        };
        *counts.entry(patterns[idx].clone()).or_insert(0) += 1;
    }
    Ok(SampleHistogram {
        counts,
        total_draws: count,
        seed,
    })
}

/// CSV rendering with columns `pattern`, `count`, `probability` (the
/// enumerated probability of each sampled pattern).
pub fn histogram_csv(hist: &SampleHistogram, dist: &PatternDistribution) -> String {
    let mut out = String::from("pattern,count,probability\n");
    for (pattern, count) in &hist.counts {
        writeln!(
            out,
            "{},{},{}",
            pattern.to_bitstring(),
            count,
            dist.probability(pattern)
        )
        .expect("string write");
    }
    out
}

/// JSON mirror of [`histogram_csv`].
pub fn histogram_json(hist: &SampleHistogram, dist: &PatternDistribution) -> serde_json::Value {
    let entries: Vec<serde_json::Value> = hist
        .counts
        .iter()
        .map(|(pattern, count)| {
            serde_json::json!({
                "pattern": pattern.to_bitstring(),
                "count": count,
                "probability": dist.probability(pattern),
            })
        })
        .collect();
    serde_json::json!({
        "total_draws": hist.total_draws,
        "seed": hist.seed,
        "leakage": dist.leakage,
        "max_photons": dist.max_photons,
        "entries": entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{self, InteractionGraph};

    fn two_mode_bundle() -> EncodingBundle {
        let g = InteractionGraph::from_edges(2, &[(0, 1)], None, None).unwrap();
        let enc = graph::weighted_encoding(&g, 0.5).unwrap();
        EncodingBundle::from_graph_encoding(&g, &enc).unwrap()
    }

    #[test]
    fn empty_graph_distribution_is_vacuum_only() {
        let g = InteractionGraph::from_edges(3, &[], None, None).unwrap();
        let enc = graph::weighted_encoding(&g, 0.3).unwrap();
        let bundle = EncodingBundle::from_graph_encoding(&g, &enc).unwrap();
        let dist = enumerate_distribution(&bundle, 2).unwrap();
        assert_eq!(dist.entries.len(), 1);
        assert!((dist.probability(&PhotonPattern::zeros(3)) - 1.0).abs() < 1e-12);
        assert!(dist.leakage.abs() < 1e-12);
    }

    #[test]
    fn two_mode_distribution_and_geometric_leakage() {
        // Closed form: P(k photons per arm) = 0.75 * 0.25^k, so the mass
        // beyond the binary patterns is sum_{k>=2} = 0.0625.
        let dist = enumerate_distribution(&two_mode_bundle(), 2).unwrap();
        assert_eq!(dist.entries.len(), 2);
        assert!((dist.probability(&PhotonPattern::zeros(2)) - 0.75).abs() < 1e-12);
        let one_one = PhotonPattern::new(vec![1, 1]).unwrap();
        assert!((dist.probability(&one_one) - 0.1875).abs() < 1e-12);
        assert!((dist.leakage - 0.0625).abs() < 1e-12);
        assert!((dist.enumerated_mass() + dist.leakage - 1.0).abs() < 1e-12);
    }

    #[test]
    fn n_max_zero_keeps_only_the_empty_pattern() {
        let dist = enumerate_distribution(&two_mode_bundle(), 0).unwrap();
        assert_eq!(dist.entries.len(), 1);
        assert!((dist.leakage - 0.25).abs() < 1e-12);
    }

    #[test]
    fn odd_n_max_rejected() {
        assert!(matches!(
            enumerate_distribution(&two_mode_bundle(), 1),
            Err(SamplerError::OddCutoff(1))
        ));
    }

    #[test]
    fn work_budget_error_names_the_estimate() {
        let g = graph::random_graph(12, 0.5, 3).unwrap();
        let c_val = graph::choose_c(&g, 0.5).unwrap();
        let enc = graph::weighted_encoding(&g, c_val).unwrap();
        let bundle = EncodingBundle::from_graph_encoding(&g, &enc).unwrap();
        let err = enumerate_distribution_with_budget(&bundle, 8, 10).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("exceeds budget"), "{msg}");
        assert!(
            msg.contains(&enumeration_work_estimate(12, 8).to_string()),
            "{msg}"
        );
    }

    #[test]
    fn renormalized_mass_is_one() {
        let dist = enumerate_distribution(&two_mode_bundle(), 2).unwrap();
        let total = dist.enumerated_mass();
        let renorm: f64 = dist.entries.values().map(|p| p / total).sum();
        assert!((renorm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_entry_distribution_samples_deterministically() {
        let mut entries = BTreeMap::new();
        entries.insert(PhotonPattern::zeros(2), 1.0);
        let dist = PatternDistribution {
            mode_count: 2,
            entries,
            max_photons: 0,
            leakage: 0.0,
        };
        let hist = draw_samples(&dist, 100, 9).unwrap();
        assert_eq!(hist.counts[&PhotonPattern::zeros(2)], 100);
        assert_eq!(hist.total_draws, 100);
    }

    #[test]
    fn zero_draws_yield_empty_histogram() {
        let dist = enumerate_distribution(&two_mode_bundle(), 2).unwrap();
        let hist = draw_samples(&dist, 0, 1).unwrap();
        assert!(hist.counts.is_empty());
        assert_eq!(hist.total_draws, 0);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let dist = enumerate_distribution(&two_mode_bundle(), 2).unwrap();
        let a = draw_samples(&dist, 5000, 42).unwrap();
        let b = draw_samples(&dist, 5000, 42).unwrap();
        assert_eq!(a.counts, b.counts);
        let c = draw_samples(&dist, 5000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn empirical_frequencies_match_binomial_expectation() {
        // Two-entry 0.8/0.2 distribution, 1e5 draws: the observed count of
        // the rare pattern stays within 3 sigma of the binomial mean.
        let mut entries = BTreeMap::new();
        entries.insert(PhotonPattern::zeros(2), 0.8);
        entries.insert(PhotonPattern::new(vec![1, 1]).unwrap(), 0.2);
        let dist = PatternDistribution {
            mode_count: 2,
            entries,
            max_photons: 2,
            leakage: 0.0,
        };
        let n = 100_000u64;
        let hist = draw_samples(&dist, n, 7).unwrap();
        let rare = hist.counts[&PhotonPattern::new(vec![1, 1]).unwrap()] as f64;
        let mean = 0.2 * n as f64;
        let sigma = (n as f64 * 0.2 * 0.8).sqrt();
        assert!(
            (rare - mean).abs() < 3.0 * sigma,
            "rare count {rare} vs mean {mean} (sigma {sigma})"
        );
    }

    #[test]
    fn zero_mass_rejected() {
        let dist = PatternDistribution {
            mode_count: 2,
            entries: BTreeMap::new(),
            max_photons: 2,
            leakage: 1.0,
        };
        assert!(matches!(
            draw_samples(&dist, 10, 1),
            Err(SamplerError::ZeroMass)
        ));
    }

    #[test]
    fn csv_is_sorted_and_parseable() {
        let dist = enumerate_distribution(&two_mode_bundle(), 2).unwrap();
        let hist = draw_samples(&dist, 1000, 11).unwrap();
        let csv = histogram_csv(&hist, &dist);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "pattern,count,probability");
        let total: u64 = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, 1000);
    }
}
