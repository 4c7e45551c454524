use rayon::prelude::*;
use serde::Serialize;

use super::density::{interval_entropies, mutual_information, Entropies};
use super::state::build_state;
use crate::network::{Interval, MeraNetwork};
use crate::rng::derive_seed;
use crate::stats::SampleStats;
use crate::{Error, Result};

/// Seed of the network sampled in trial `t`.
pub fn trial_seed(seed: u64, t: usize) -> u64 {
    derive_seed(seed, t as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyStats {
    pub interval: Interval,
    pub s: SampleStats,
    pub s2: SampleStats,
    pub exp_neg_s2: SampleStats,
}

impl EntropyStats {
    fn from_samples(interval: Interval, samples: Vec<Entropies>) -> Self {
        EntropyStats {
            interval,
            s: SampleStats::from_samples(samples.iter().map(|e| e.s).collect()),
            s2: SampleStats::from_samples(samples.iter().map(|e| e.s2).collect()),
            exp_neg_s2: SampleStats::from_samples(samples.iter().map(|e| (-e.s2).exp()).collect()),
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 trials, got {trials}")));
    }
    Ok(())
}

/// Runs `f` on one freshly sampled network per trial, in parallel, keeping
/// results in trial order.
fn per_trial<T, F>(net: &MeraNetwork, trials: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&super::MeraState) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(&build_state(net, trial_seed(seed, t))?))
        .collect()
}

pub fn mc_entropy_stats(net: &MeraNetwork, iv: &Interval, trials: usize, seed: u64) -> Result<EntropyStats> {
    Ok(mc_entropy_sweep(net, std::slice::from_ref(iv), trials, seed)?.remove(0))
}

/// Entropy statistics for several intervals, sharing one network per trial.
pub fn mc_entropy_sweep(net: &MeraNetwork, ivs: &[Interval], trials: usize, seed: u64) -> Result<Vec<EntropyStats>> {
    check_trials(trials)?;
    for iv in ivs {
        net.check_interval(iv)?;
    }
    let rows: Vec<Vec<Entropies>> = per_trial(net, trials, seed, |st| {
        ivs.iter()
            .map(|iv| {
                let snap = st.snapshot(iv.level, iv.stage).expect("checked interval");
                interval_entropies(snap, iv)
            })
            .collect()
    })?;
    Ok(ivs
        .iter()
        .enumerate()
        .map(|(i, iv)| EntropyStats::from_samples(*iv, rows.iter().map(|r| r[i]).collect()))
        .collect())
}

/// Mutual information statistics for several interval pairs.
pub fn mc_mutual_information(
    net: &MeraNetwork,
    pairs: &[(Interval, Interval)],
    trials: usize,
    seed: u64,
) -> Result<Vec<SampleStats>> {
    check_trials(trials)?;
    for (a, b) in pairs {
        net.check_interval(a)?;
        net.check_interval(b)?;
    }
    let rows: Vec<Vec<f64>> = per_trial(net, trials, seed, |st| {
        pairs
            .iter()
            .map(|(a, b)| {
                let snap = st.snapshot(a.level, a.stage).expect("checked interval");
                mutual_information(snap, a, b)
            })
            .collect()
    })?;
    Ok((0..pairs.len())
        .map(|i| SampleStats::from_samples(rows.iter().map(|r| r[i]).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::solve_schedule;

    #[test]
    fn reproducible_and_ordered() {
        let net = MeraNetwork::new(solve_schedule(2, 0.3).unwrap());
        let iv = net.leaf_interval(1, 3);
        let a = mc_entropy_stats(&net, &iv, 2, 42).unwrap();
        let b = mc_entropy_stats(&net, &iv, 2, 42).unwrap();
        assert_eq!(a, b);
        let direct = interval_entropies(build_state(&net, trial_seed(42, 1)).unwrap().leaf(), &iv).unwrap();
        assert_eq!(a.s.samples[1], direct.s);
        assert!(mc_entropy_stats(&net, &iv, 1, 42).is_err());
    }

    #[test]
    fn sweep_matches_single_queries() {
        let net = MeraNetwork::new(solve_schedule(2, 0.3).unwrap());
        let ivs = [net.leaf_interval(0, 0), net.leaf_interval(5, 1)];
        let sweep = mc_entropy_sweep(&net, &ivs, 3, 7).unwrap();
        for (iv, st) in ivs.iter().zip(&sweep) {
            assert_eq!(&mc_entropy_stats(&net, iv, 3, 7).unwrap(), st);
            for (s, s2) in st.s.samples.iter().zip(&st.s2.samples) {
                assert!(*s >= *s2 - 1e-10 && *s2 >= -1e-12);
            }
        }
    }
}
