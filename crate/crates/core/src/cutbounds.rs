//! Reduction sequences: cuts through the network that bound interval
//! entropies.
//!
//! From an interval of `sigma(k)` a W-step moves each end by at most one site
//! so that it starts on an odd site and ends on an even one, i.e. covers whole
//! disentanglers; each moved end costs `log D_k`. From `tau(k)` a V-step moves
//! the ends onto V pairs (even start, odd end) at `log D'_k` per moved end and
//! halves the interval onto `sigma(k-1)`. Empty intervals and the whole ring
//! end a sequence.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::network::{Interval, MeraNetwork, Stage};
use crate::stats::log_add_exp;
use crate::{Error, Result};

/// Per-step constant in the lower bound `min_Q [S(Q) - log(8) h(Q)]`.
pub const STEP_PENALTY: f64 = 3.0 * std::f64::consts::LN_2;

/// Ties in the argmin are broken only by improvements larger than this.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    #[serde(rename = "W")]
    W,
    #[serde(rename = "V")]
    V,
}

/// One application of a reduction equation: the interval is moved to
/// `m..=n` on the ring of `level`, leaving `len` sites (0 for empty, the ring
/// size for the whole ring).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionStep {
    pub stage: StepKind,
    pub level: usize,
    pub m: u64,
    pub n: u64,
    pub len: u64,
}

/// An admissible step together with its cost and the interval it leads to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub step: ReductionStep,
    pub cost: f64,
    pub next: Interval,
}

pub fn is_terminal(iv: &Interval) -> bool {
    iv.is_empty() || iv.is_whole()
}

/// The admissible steps from a non-terminal interval, ordered by `(m, n)`.
pub fn transitions(net: &MeraNetwork, iv: &Interval) -> Vec<Transition> {
    if is_terminal(iv) {
        return Vec::new();
    }
    let k = iv.level;
    let n = iv.ring();
    let (s, e) = (iv.start, iv.end());
    // Required parity of the new start (the new end has the other parity).
    let (start_parity, kind, log_d) = match iv.stage {
        Stage::AfterW => (1, StepKind::W, net.schedule().log_d(k)),
        Stage::AfterV => (0, StepKind::V, net.schedule().log_d_prime(k)),
    };
    let moves = |site: u64, parity: u64| -> &'static [i64] {
        if site % 2 == parity {
            &[0]
        } else {
            &[-1, 1]
        }
    };
    let mut out = Vec::with_capacity(4);
    for &dl in moves(s, start_parity) {
        for &dr in moves(e, 1 - start_parity) {
            let m = shift(s, dl, n);
            let end = shift(e, dr, n);
            let new_len = (iv.len as i64 - dl + dr).clamp(0, n as i64) as u64;
            let cost = log_d * (dl.abs() + dr.abs()) as f64;
            let next = match iv.stage {
                Stage::AfterW => Interval::with_len(k, Stage::AfterV, m, new_len),
                Stage::AfterV => Interval::with_len(k - 1, Stage::AfterW, m / 2, new_len / 2),
            };
            out.push(Transition {
                step: ReductionStep {
                    stage: kind,
                    level: k,
                    m,
                    n: end,
                    len: new_len,
                },
                cost,
                next,
            });
        }
    }
    out.sort_by_key(|t| (t.step.m, t.step.n));
    out
}

fn shift(site: u64, by: i64, n: u64) -> u64 {
    ((site as i128 + by as i128).rem_euclid(n as i128)) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSequence {
    pub start: Interval,
    pub steps: Vec<ReductionStep>,
    /// `S(Q)`, the summed step penalties in nats.
    pub cost: f64,
    /// `h(Q)`, the number of steps.
    pub height: usize,
}

impl ReductionSequence {
    /// Replays the steps from `start`, checking admissibility and
    /// termination; returns the recomputed cost.
    pub fn replay(&self, net: &MeraNetwork) -> Result<f64> {
        net.check_interval(&self.start).map_err(|e| Error::Format(e.to_string()))?;
        let mut cur = self.start;
        let mut cost = 0.0;
        for (i, step) in self.steps.iter().enumerate() {
            let t = transitions(net, &cur)
                .into_iter()
                .find(|t| t.step == *step)
                .ok_or_else(|| Error::Format(format!("step {i} is not admissible from {cur}")))?;
            cost += t.cost;
            cur = t.next;
        }
        if !is_terminal(&cur) {
            return Err(Error::Format(format!("sequence stops at non-terminal {cur}")));
        }
        Ok(cost)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }

    /// Parses a sequence and checks it against `net`.
    pub fn from_json(net: &MeraNetwork, text: &str) -> Result<Self> {
        let seq: ReductionSequence = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if seq.height != seq.steps.len() {
            return Err(Error::Format(format!(
                "height {} differs from the {} steps",
                seq.height,
                seq.steps.len()
            )));
        }
        let cost = seq.replay(net)?;
        if !seq.cost.is_finite() || (cost - seq.cost).abs() > 1e-9 * cost.abs().max(1.0) {
            return Err(Error::Format(format!("stated cost {} differs from {cost}", seq.cost)));
        }
        Ok(seq)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutBounds {
    /// `min_Q S(Q)`.
    pub min_cost: f64,
    /// `-log sum_Q exp(-S(Q))`.
    pub lse: f64,
    /// `min_Q [S(Q) - log(8) h(Q)]`.
    pub lower_bound: f64,
    pub height_of_argmin: usize,
    pub argmin: ReductionSequence,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    min_cost: f64,
    log_z: f64,
    lower: f64,
    height: usize,
    best: Option<usize>,
}

const TERMINAL: Node = Node {
    min_cost: 0.0,
    log_z: 0.0,
    lower: 0.0,
    height: 0,
    best: None,
};

/// Memoised dynamic program over one network; reuse it for many queries.
pub struct CutDp<'a> {
    net: &'a MeraNetwork,
    memo: HashMap<Interval, Node>,
}

impl<'a> CutDp<'a> {
    pub fn new(net: &'a MeraNetwork) -> Self {
        CutDp {
            net,
            memo: HashMap::new(),
        }
    }

    fn node(&mut self, iv: Interval) -> Node {
        if is_terminal(&iv) {
            return TERMINAL;
        }
        if let Some(n) = self.memo.get(&iv) {
            return *n;
        }
        let mut acc = Node {
            min_cost: f64::INFINITY,
            log_z: f64::NEG_INFINITY,
            lower: f64::INFINITY,
            height: 0,
            best: None,
        };
        for (i, t) in transitions(self.net, &iv).into_iter().enumerate() {
            let child = self.node(t.next);
            let c = t.cost + child.min_cost;
            if c < acc.min_cost - TIE_TOL {
                acc.min_cost = c;
                acc.height = child.height + 1;
                acc.best = Some(i);
            }
            acc.log_z = log_add_exp(acc.log_z, child.log_z - t.cost);
            acc.lower = acc.lower.min(t.cost - STEP_PENALTY + child.lower);
        }
        self.memo.insert(iv, acc);
        acc
    }

    pub fn bounds(&mut self, iv: &Interval) -> Result<CutBounds> {
        self.net.check_interval(iv)?;
        let root = self.node(*iv);
        let mut steps = Vec::with_capacity(root.height);
        let mut cur = *iv;
        while let Some(best) = self.node(cur).best {
            let t = transitions(self.net, &cur)[best];
            steps.push(t.step);
            cur = t.next;
        }
        Ok(CutBounds {
            min_cost: root.min_cost,
            lse: -root.log_z,
            lower_bound: root.lower,
            height_of_argmin: root.height,
            argmin: ReductionSequence {
                start: *iv,
                steps,
                cost: root.min_cost,
                height: root.height,
            },
        })
    }
}

pub fn cut_dp(net: &MeraNetwork, iv: &Interval) -> Result<CutBounds> {
    CutDp::new(net).bounds(iv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub upper: f64,
    pub lower: f64,
}

impl From<&CutBounds> for Sandwich {
    fn from(b: &CutBounds) -> Self {
        Sandwich {
            upper: b.min_cost,
            lower: b.lower_bound.max(0.0),
        }
    }
}

/// Bounds on the expected von Neumann entropy of `iv`.
pub fn sandwich(net: &MeraNetwork, iv: &Interval) -> Result<Sandwich> {
    Ok(Sandwich::from(&cut_dp(net, iv)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiPrediction {
    pub i_upper: f64,
    pub i_lower: f64,
}

/// Bounds on the expected mutual information of `left` and the interval
/// `right` that directly follows it.
pub fn mi_prediction(net: &MeraNetwork, left: &Interval, right: &Interval) -> Result<MiPrediction> {
    if !left.is_empty() && !right.is_empty() && left.len != right.len {
        return Err(Error::Usage(format!("{left} and {right} differ in length")));
    }
    let union = left.join(right)?;
    let mut dp = CutDp::new(net);
    let mut sw = |iv: &Interval| dp.bounds(iv).map(|b| Sandwich::from(&b));
    let (l, r, u) = (sw(left)?, sw(right)?, sw(&union)?);
    Ok(MiPrediction {
        i_upper: l.upper + r.upper - u.lower,
        i_lower: (l.lower + r.lower - u.upper).max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub l: u64,
    pub upper: f64,
    pub lower: f64,
    /// `log D_{L - floor(log2 l)}`.
    pub log_d_ref: f64,
}

/// Bounds for the leaf intervals `0..l` for each requested length.
pub fn interval_entropy_scaling(net: &MeraNetwork, lengths: &[u64]) -> Result<Vec<ScalingRow>> {
    let big_l = net.levels();
    let half = 1u64 << (big_l - 1);
    let mut dp = CutDp::new(net);
    lengths
        .iter()
        .map(|&l| {
            if l == 0 || l >= half {
                return Err(Error::Usage(format!("length {l} must lie in 1..{half}")));
            }
            let iv = Interval::with_len(big_l, Stage::AfterW, 0, l);
            let sw = Sandwich::from(&dp.bounds(&iv)?);
            let k = big_l - l.ilog2() as usize;
            Ok(ScalingRow {
                l,
                upper: sw.upper,
                lower: sw.lower,
                log_d_ref: net.schedule().log_d(k),
            })
        })
        .collect()
}
