//! Brute-force reduction sequences on explicit site sets.
//!
//! Works with boolean membership vectors instead of (start, length) pairs:
//! at each step every isometry pair with exactly one member in the set must
//! be either absorbed or dropped, at the log-dimension cost of that pair.

use mera_core::network::{Interval, MeraNetwork, Stage};

/// `(cost, height)` of every sequence from `iv` to a terminal set.
pub fn all_sequences(net: &MeraNetwork, iv: &Interval) -> Vec<(f64, usize)> {
    let n = 1usize << iv.level;
    let mut set = vec![false; n];
    for t in 0..iv.len as usize {
        set[(iv.start as usize + t) % n] = true;
    }
    let mut out = Vec::new();
    walk(net, iv.level, iv.stage == Stage::AfterW, set, 0.0, 0, &mut out);
    out
}

fn walk(net: &MeraNetwork, level: usize, after_w: bool, set: Vec<bool>, cost: f64, h: usize, out: &mut Vec<(f64, usize)>) {
    if set.iter().all(|&x| x) || set.iter().all(|&x| !x) {
        out.push((cost, h));
        return;
    }
    let n = set.len();
    let pairs: Vec<(usize, usize)> = (0..n / 2)
        .map(|t| if after_w { (2 * t + 1, (2 * t + 2) % n) } else { (2 * t, 2 * t + 1) })
        .collect();
    let cut: Vec<(usize, usize)> = pairs.into_iter().filter(|&(a, b)| set[a] != set[b]).collect();
    let per_pair = if after_w {
        net.schedule().log_d(level)
    } else {
        net.schedule().log_d_prime(level)
    };
    let step_cost = per_pair * cut.len() as f64;
    for mask in 0..1u32 << cut.len() {
        let mut next = set.clone();
        for (bit, &(a, b)) in cut.iter().enumerate() {
            let keep = mask >> bit & 1 == 1;
            next[a] = keep;
            next[b] = keep;
        }
        if after_w {
            walk(net, level, false, next, cost + step_cost, h + 1, out);
        } else {
            let up: Vec<bool> = (0..n / 2).map(|t| next[2 * t]).collect();
            walk(net, level - 1, true, up, cost + step_cost, h + 1, out);
        }
    }
}

/// `(min S(Q), -log sum exp(-S(Q)), min [S(Q) - log(8) h(Q)])`.
pub fn oracle_bounds(net: &MeraNetwork, iv: &Interval) -> (f64, f64, f64) {
    let seqs = all_sequences(net, iv);
    let min = seqs.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let z: f64 = seqs.iter().map(|s| (-(s.0 - min)).exp()).sum();
    let lower = seqs
        .iter()
        .map(|&(c, h)| c - 8f64.ln() * h as f64)
        .fold(f64::INFINITY, f64::min);
    (min, min - z.ln(), lower)
}
