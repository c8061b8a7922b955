//! Seeded Monte Carlo estimation over i.i.d. Rayleigh fading draws.
//!
//! Trial `i` of a run always consumes the same ChaCha8 keystream words, at
//! offset `4 i` of the stream keyed by the master seed. A worker stream is
//! therefore a contiguous range of trial indices, and any partition of a run
//! merges to exactly the single-stream accumulator.

use std::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{evaluate_outcome, ChannelRealization, OperatingCase, SchemeKind, SystemParams};
use crate::scalar::Real;

/// Two `u64` draws per trial, i.e. four 32-bit ChaCha words.
const WORDS_PER_TRIAL: u128 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_count: u32,
    pub stream_index: u32,
}

impl RngSpec {
    pub fn single(master_seed: u64) -> Self {
        Self { master_seed, stream_count: 1, stream_index: 0 }
    }

    pub fn streams(master_seed: u64, stream_count: u32) -> impl Iterator<Item = RngSpec> {
        (0..stream_count).map(move |stream_index| RngSpec { master_seed, stream_count, stream_index })
    }

    /// Trial indices this stream owns out of `n` total.
    pub fn trial_range(&self, n: u64) -> Range<u64> {
        let count = u128::from(self.stream_count.max(1));
        let idx = u128::from(self.stream_index);
        let start = (u128::from(n) * idx / count) as u64;
        let end = (u128::from(n) * (idx + 1) / count) as u64;
        start..end
    }

    fn validate(&self) -> Result<()> {
        if self.stream_count == 0 || self.stream_index >= self.stream_count {
            return Err(Error::InvalidParameter {
                name: "rng",
                reason: format!("stream {} of {}", self.stream_index, self.stream_count),
            });
        }
        Ok(())
    }
}

/// Fading sampler positioned at a given trial index.
#[derive(Clone, Debug)]
pub struct ChannelStream {
    rng: ChaCha8Rng,
}

impl ChannelStream {
    pub fn at_trial(master_seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_word_pos(u128::from(trial) * WORDS_PER_TRIAL);
        Self { rng }
    }

    /// Uniform on `(0, 1]` with 53 random bits.
    fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unit-mean exponential by inverse CDF.
    fn unit_exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }

    /// `|h|^2` for a unit-variance circular Gaussian `h` is exponential(1).
    pub fn sample_channel<T: Real>(&mut self) -> ChannelRealization<T> {
        let g0 = self.unit_exponential();
        let g1 = self.unit_exponential();
        ChannelRealization { g0: T::lit(g0), g1: T::lit(g1) }
    }
}

/// Non-negative sum in fixed point (2^-40 quanta). Integer addition keeps
/// merging exactly associative and commutative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FixedSum(u128);

impl FixedSum {
    const SCALE: f64 = (1u64 << 40) as f64;

    pub fn add(&mut self, x: f64) {
        debug_assert!(x >= 0.0 && x.is_finite());
        self.0 += (x * Self::SCALE).round() as u128;
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialAccumulator {
    pub n_trials: u64,
    pub u1_outage_count: u64,
    pub u0_outage_count: u64,
    pub case_counts: [u64; 3],
    pub case_outage_counts: [u64; 3],
    pub case2_condition_count: u64,
    pub throughput_sum_fixed: FixedSum,
    pub throughput_sum_adaptive: FixedSum,
}

impl TrialAccumulator {
    pub fn merge(mut self, other: &TrialAccumulator) -> TrialAccumulator {
        self.n_trials += other.n_trials;
        self.u1_outage_count += other.u1_outage_count;
        self.u0_outage_count += other.u0_outage_count;
        for i in 0..3 {
            self.case_counts[i] += other.case_counts[i];
            self.case_outage_counts[i] += other.case_outage_counts[i];
        }
        self.case2_condition_count += other.case2_condition_count;
        self.throughput_sum_fixed.0 += other.throughput_sum_fixed.0;
        self.throughput_sum_adaptive.0 += other.throughput_sum_adaptive.0;
        self
    }
}

pub fn merge(a: &TrialAccumulator, b: &TrialAccumulator) -> TrialAccumulator {
    a.merge(b)
}

/// Runs this stream's share of an `n`-trial experiment.
pub fn run_trials<T: Real>(
    scheme: SchemeKind,
    params: &SystemParams<T>,
    n: u64,
    rng: RngSpec,
) -> Result<TrialAccumulator> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "at least one trial required".into() });
    }
    rng.validate()?;
    let range = rng.trial_range(n);
    let mut stream = ChannelStream::at_trial(rng.master_seed, range.start);
    let mut acc = TrialAccumulator::default();
    for _ in range {
        let ch = stream.sample_channel::<T>();
        let out = evaluate_outcome(scheme, params, &ch);
        debug_assert!(out.alpha >= T::zero() && out.alpha <= T::one());
        debug_assert!(
            !scheme.has_closed_form() || out.u0_outage == (params.p0() * ch.g0 < params.eps0()),
            "primary outage must match OMA"
        );
        let case = out.case.index();
        acc.n_trials += 1;
        acc.case_counts[case] += 1;
        if out.case == OperatingCase::CaseII {
            acc.case2_condition_count += 1;
        }
        if out.u1_outage {
            acc.u1_outage_count += 1;
            acc.case_outage_counts[case] += 1;
        }
        if out.u0_outage {
            acc.u0_outage_count += 1;
        }
        acc.throughput_sum_fixed.add(out.u1_throughput_fixed.as_f64());
        acc.throughput_sum_adaptive.add(out.u1_throughput_adaptive.as_f64());
    }
    Ok(acc)
}

/// Runs all `stream_count` streams on the rayon pool and merges them.
pub fn run_parallel<T: Real>(
    scheme: SchemeKind,
    params: &SystemParams<T>,
    n: u64,
    master_seed: u64,
    stream_count: u32,
) -> Result<TrialAccumulator> {
    let parts = RngSpec::streams(master_seed, stream_count.max(1))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|spec| run_trials(scheme, params, n, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().fold(TrialAccumulator::default(), |acc, p| acc.merge(p)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateWithCI {
    pub p_hat: f64,
    pub n: u64,
    /// Normal approximation; collapses to 0 at `p_hat` of 0 or 1.
    pub ci95_halfwidth: f64,
}

impl EstimateWithCI {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let p_hat = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        Self { p_hat, n, ci95_halfwidth: 1.96 * binomial_sigma(p_hat, n) }
    }
}

/// Standard deviation of a binomial proportion estimate.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub u1: EstimateWithCI,
    pub u0: EstimateWithCI,
    /// Joint probability of each case and a U1 outage.
    pub per_case: [EstimateWithCI; 3],
    pub case2_condition: EstimateWithCI,
    /// `None` when no Case II draw occurred.
    pub conditional_case2: Option<EstimateWithCI>,
    pub throughput_fixed: f64,
    pub throughput_adaptive: f64,
}

pub fn summarize(acc: &TrialAccumulator) -> Result<Summary> {
    let n = acc.n_trials;
    if n == 0 {
        return Err(Error::InvalidParameter { name: "acc", reason: "no trials accumulated".into() });
    }
    let c2 = OperatingCase::CaseII.index();
    Ok(Summary {
        u1: EstimateWithCI::from_counts(acc.u1_outage_count, n),
        u0: EstimateWithCI::from_counts(acc.u0_outage_count, n),
        per_case: [0, 1, 2].map(|i| EstimateWithCI::from_counts(acc.case_outage_counts[i], n)),
        case2_condition: EstimateWithCI::from_counts(acc.case2_condition_count, n),
        conditional_case2: (acc.case2_condition_count > 0)
            .then(|| EstimateWithCI::from_counts(acc.case_outage_counts[c2], acc.case2_condition_count)),
        throughput_fixed: acc.throughput_sum_fixed.value() / n as f64,
        throughput_adaptive: acc.throughput_sum_adaptive.value() / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p0: f64, p1: f64, r0: f64, r1: f64) -> SystemParams<f64> {
        SystemParams::from_linear(p0, p1, r0, r1).unwrap()
    }

    #[test]
    fn sampler_is_deterministic() {
        let mut a = ChannelStream::at_trial(7, 0);
        let mut b = ChannelStream::at_trial(7, 0);
        for _ in 0..100 {
            assert_eq!(a.sample_channel::<f64>(), b.sample_channel::<f64>());
        }
        let mut c = ChannelStream::at_trial(8, 0);
        assert_ne!(ChannelStream::at_trial(7, 0).sample_channel::<f64>(), c.sample_channel::<f64>());
    }

    #[test]
    fn sampler_seeks_by_trial() {
        let mut seq = ChannelStream::at_trial(11, 0);
        let draws: Vec<ChannelRealization<f64>> = (0..50).map(|_| seq.sample_channel()).collect();
        for (i, d) in draws.iter().enumerate() {
            assert_eq!(*d, ChannelStream::at_trial(11, i as u64).sample_channel::<f64>());
        }
    }

    #[test]
    fn exponential_moments() {
        let n = 1_000_000;
        let mut s = ChannelStream::at_trial(2024, 0);
        let (mut sum, mut below) = (0.0, 0u64);
        for _ in 0..n {
            let c = s.sample_channel::<f64>();
            assert!(c.g0 >= 0.0 && c.g1 >= 0.0 && c.g0.is_finite());
            sum += c.g0;
            below += u64::from(c.g0 <= 0.1);
        }
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.004, "mean {mean}");
        let p = 1.0 - (-0.1f64).exp();
        let freq = below as f64 / n as f64;
        assert!((freq - p).abs() < 3.0 * binomial_sigma(p, n), "freq {freq}");
    }

    #[test]
    fn trial_ranges_tile() {
        for n in [1u64, 7, 1000, 1_000_003] {
            for k in [1u32, 3, 8] {
                let mut next = 0;
                for spec in RngSpec::streams(1, k) {
                    let r = spec.trial_range(n);
                    assert_eq!(r.start, next);
                    next = r.end;
                }
                assert_eq!(next, n);
            }
        }
    }

    #[test]
    fn merge_identity_and_counts() {
        let p = params(10.0, 10.0, 1.0, 1.0);
        let a = run_trials(SchemeKind::Rs, &p, 5000, RngSpec::single(3)).unwrap();
        assert_eq!(merge(&a, &TrialAccumulator::default()), a);
        let b = run_trials(SchemeKind::Rs, &p, 700, RngSpec::single(4)).unwrap();
        assert_eq!(merge(&a, &b), merge(&b, &a));
        assert_eq!(merge(&a, &b).n_trials, 5700);
        assert_eq!(a.case_counts.iter().sum::<u64>(), a.n_trials);
        for i in 0..3 {
            assert!(a.case_outage_counts[i] <= a.case_counts[i]);
        }
        assert_eq!(a.case2_condition_count, a.case_counts[1]);
    }

    #[test]
    fn partitions_reproduce_single_stream() {
        let p = params(10.0, 10.0, 1.0, 1.0);
        let one = run_parallel(SchemeKind::NhSic, &p, 100_003, 99, 1).unwrap();
        for k in [2, 5, 8] {
            assert_eq!(run_parallel(SchemeKind::NhSic, &p, 100_003, 99, k).unwrap(), one);
        }
    }

    #[test]
    fn zero_target_has_no_outage() {
        let p = params(10.0, 10.0, 1.0, 0.0);
        for scheme in [SchemeKind::Rs, SchemeKind::QosSic, SchemeKind::NhSic, SchemeKind::CsiSic] {
            let acc = run_trials(scheme, &p, 20_000, RngSpec::single(5)).unwrap();
            assert_eq!(acc.u1_outage_count, 0, "{scheme}");
        }
    }

    #[test]
    fn summarize_edge_cases() {
        assert!(summarize(&TrialAccumulator::default()).is_err());
        let all = TrialAccumulator {
            n_trials: 10,
            u1_outage_count: 10,
            case_counts: [10, 0, 0],
            case_outage_counts: [10, 0, 0],
            ..Default::default()
        };
        let s = summarize(&all).unwrap();
        assert_eq!(s.u1.p_hat, 1.0);
        assert_eq!(s.u1.ci95_halfwidth, 0.0);
        assert!(s.conditional_case2.is_none());

        let p = params(10.0, 10.0, 1.0, 1.0);
        let single = run_trials(SchemeKind::Rs, &p, 1, RngSpec::single(1)).unwrap();
        assert_eq!(summarize(&single).unwrap().u1.n, 1);
    }

    #[test]
    fn rejects_bad_rng_spec() {
        let p = params(10.0, 10.0, 1.0, 1.0);
        let bad = RngSpec { master_seed: 0, stream_count: 2, stream_index: 2 };
        assert!(run_trials(SchemeKind::Rs, &p, 10, bad).is_err());
        assert!(run_trials(SchemeKind::Rs, &p, 0, RngSpec::single(0)).is_err());
    }

    #[test]
    fn fixed_sum_is_order_free() {
        let xs = [0.1, 3.7, 1e-9, 12.25, 5.0 / 3.0];
        let mut a = FixedSum::default();
        let mut b = FixedSum::default();
        xs.iter().for_each(|&x| a.add(x));
        xs.iter().rev().for_each(|&x| b.add(x));
        assert_eq!(a, b);
        assert!((a.value() - xs.iter().sum::<f64>()).abs() < 1e-11);
    }
}
