//! Periodic binary MERA wiring and modular intervals.
//!
//! Level `k` carries `2^k` sites. `V_k` sends site `j` of level `k-1` to the
//! pair `(2j, 2j+1)`; `W_k` then acts on the staggered pairs
//! `(2j+1, 2j+2 mod 2^k)`, the last of which wraps around the ring.

use serde::{Deserialize, Serialize};

use crate::schedule::{BondDim, DimensionSchedule};
use crate::{Error, Result};

/// Which half of a level a state or interval refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// After `V_k`, before `W_k` (sites of dimension `D'_k`).
    AfterV,
    /// After `W_k` (sites of dimension `D_k`).
    AfterW,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::AfterV => "after_v",
            Stage::AfterW => "after_w",
        })
    }
}

/// Number of sites at `level`.
pub fn ring_size(level: usize) -> u64 {
    1u64 << level
}

/// The other output of the `W` isometry touching `site`.
pub fn w_partner(level: usize, site: u64) -> u64 {
    let n = ring_size(level);
    debug_assert!(site < n);
    if site % 2 == 1 {
        (site + 1) % n
    } else {
        (site + n - 1) % n
    }
}

/// Sites of level `level + 1` produced by the `V` isometry acting on `site`
/// of level `level`.
pub fn v_children(level: usize, site: u64) -> (u64, u64) {
    debug_assert!(site < ring_size(level));
    (2 * site, 2 * site + 1)
}

/// Representative of `a - b` modulo `2^level` with the smallest magnitude.
/// At exactly half the ring the positive value is returned.
pub fn modular_distance(level: usize, a: u64, b: u64) -> i64 {
    let n = ring_size(level) as i128;
    let mut d = (a as i128 - b as i128).rem_euclid(n);
    if 2 * d > n {
        d -= n;
    }
    d as i64
}

/// A contiguous, possibly wrapping, range of sites on one ring.
///
/// Stored as a start site and an explicit length in `0..=2^level`, so the
/// empty interval and the whole ring are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub level: usize,
    pub stage: Stage,
    pub start: u64,
    pub len: u64,
}

impl Interval {
    /// Inclusive range `i..=j` taken modulo the ring; `i = j + 1` is empty.
    /// The whole ring cannot be written this way; use [`Interval::whole`].
    pub fn new(level: usize, stage: Stage, i: u64, j: u64) -> Self {
        let n = ring_size(level);
        let (i, j) = (i % n, j % n);
        let len = (j + n + 1 - i) % n;
        Interval {
            level,
            stage,
            start: if len == 0 { 0 } else { i },
            len,
        }
    }

    pub fn with_len(level: usize, stage: Stage, start: u64, len: u64) -> Self {
        let n = ring_size(level);
        let len = len.min(n);
        let start = if len == 0 || len == n { 0 } else { start % n };
        Interval {
            level,
            stage,
            start,
            len,
        }
    }

    pub fn empty(level: usize, stage: Stage) -> Self {
        Interval::with_len(level, stage, 0, 0)
    }

    pub fn whole(level: usize, stage: Stage) -> Self {
        Interval::with_len(level, stage, 0, ring_size(level))
    }

    pub fn ring(&self) -> u64 {
        ring_size(self.level)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_whole(&self) -> bool {
        self.len == self.ring()
    }

    /// Last site (inclusive). Meaningless for the empty interval.
    pub fn end(&self) -> u64 {
        (self.start + self.len + self.ring() - 1) % self.ring()
    }

    /// Sites in ring order starting at `start`.
    pub fn sites(&self) -> impl Iterator<Item = u64> + '_ {
        let n = self.ring();
        (0..self.len).map(move |t| (self.start + t) % n)
    }

    pub fn contains(&self, site: u64) -> bool {
        let n = self.ring();
        (site % n + n - self.start) % n < self.len
    }

    pub fn same_ring(&self, other: &Interval) -> bool {
        self.level == other.level && self.stage == other.stage
    }

    pub fn disjoint(&self, other: &Interval) -> bool {
        self.same_ring(other) && !self.sites().any(|s| other.contains(s))
    }

    /// `other` starts right after `self` ends.
    pub fn followed_by(&self, other: &Interval) -> bool {
        self.same_ring(other)
            && !self.is_empty()
            && !other.is_empty()
            && (self.start + self.len) % self.ring() == other.start
    }

    /// Union of two intervals where `other` directly follows `self` (or
    /// either is empty).
    pub fn join(&self, other: &Interval) -> Result<Interval> {
        if !self.same_ring(other) {
            return Err(Error::Usage(format!("intervals {self} and {other} live on different rings")));
        }
        if other.is_empty() {
            return Ok(*self);
        }
        if self.is_empty() {
            return Ok(*other);
        }
        if !self.followed_by(other) || self.len + other.len > self.ring() {
            return Err(Error::Usage(format!("{other} does not directly follow {self}")));
        }
        Ok(Interval::with_len(self.level, self.stage, self.start, self.len + other.len))
    }

    pub fn complement(&self) -> Interval {
        let n = self.ring();
        Interval::with_len(self.level, self.stage, (self.start + self.len) % n, n - self.len)
    }

    pub fn shifted(&self, by: u64) -> Interval {
        Interval::with_len(self.level, self.stage, self.start + by, self.len)
    }

    /// Mirror image under `site -> n - 1 - site`.
    pub fn reflected(&self) -> Interval {
        if self.is_empty() || self.is_whole() {
            return *self;
        }
        let n = self.ring();
        Interval::with_len(self.level, self.stage, n - 1 - self.end(), self.len)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            write!(f, "[]@{}/{}", self.level, self.stage)
        } else if self.is_whole() {
            write!(f, "[*]@{}/{}", self.level, self.stage)
        } else {
            write!(f, "[{}:{}]@{}/{}", self.start, self.end(), self.level, self.stage)
        }
    }
}

/// The network topology together with its dimension schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct MeraNetwork {
    schedule: DimensionSchedule,
}

impl MeraNetwork {
    pub fn new(schedule: DimensionSchedule) -> Self {
        MeraNetwork { schedule }
    }

    pub fn schedule(&self) -> &DimensionSchedule {
        &self.schedule
    }

    pub fn levels(&self) -> usize {
        self.schedule.levels()
    }

    /// Dimension of every site of `(level, stage)`. Level 0 has a single
    /// site of dimension `D_0 = 1`.
    pub fn site_dim(&self, level: usize, stage: Stage) -> BondDim {
        match stage {
            Stage::AfterW => self.schedule.d(level),
            Stage::AfterV => self.schedule.d_prime(level),
        }
    }

    /// `(input site at level - 1, first output, second output)` for each `V_level` slot.
    pub fn v_slots(&self, level: usize) -> Vec<(u64, u64, u64)> {
        (0..ring_size(level - 1))
            .map(|j| {
                let (a, b) = v_children(level - 1, j);
                (j, a, b)
            })
            .collect()
    }

    /// Ordered output pairs of `W_level`; slot `j` is `(2j+1, 2j+2 mod 2^level)`.
    pub fn w_slots(&self, level: usize) -> Vec<(u64, u64)> {
        let n = ring_size(level);
        (0..n / 2).map(|j| (2 * j + 1, (2 * j + 2) % n)).collect()
    }

    /// Leaf-level interval `i..=j` after the last disentangler.
    pub fn leaf_interval(&self, i: u64, j: u64) -> Interval {
        Interval::new(self.levels(), Stage::AfterW, i, j)
    }

    pub fn check_interval(&self, iv: &Interval) -> Result<()> {
        if iv.level > self.levels() || (iv.level == 0 && iv.stage == Stage::AfterV) {
            return Err(Error::Usage(format!(
                "interval {iv} is not on a ring of this {}-level network",
                self.levels()
            )));
        }
        if iv.len > iv.ring() || iv.start >= iv.ring() {
            return Err(Error::Usage(format!("interval {iv} is malformed")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&NetworkDoc::from_network(self)?)
            .map_err(|e| Error::Format(e.to_string()))
    }

    /// Parses and validates a network document. The pairing lists must
    /// match the canonical wiring exactly.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        doc.into_network()
    }
}

/// Largest network whose wiring is written out explicitly in JSON.
pub const MAX_JSON_LEVELS: usize = 20;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    levels: usize,
    epsilon: f64,
    leaf_dim: u64,
    d: Vec<u64>,
    d_prime: Vec<u64>,
    wiring: Vec<LevelDoc>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    level: usize,
    sites: u64,
    v: Vec<[u64; 3]>,
    w: Vec<[u64; 2]>,
}

impl NetworkDoc {
    fn from_network(net: &MeraNetwork) -> Result<Self> {
        let l = net.levels();
        if l > MAX_JSON_LEVELS {
            return Err(Error::Feasibility(format!(
                "{l} levels is too many to list the wiring (limit {MAX_JSON_LEVELS})"
            )));
        }
        let s = net.schedule();
        let exact = |b: BondDim| {
            b.exact
                .ok_or_else(|| Error::Feasibility(format!("dimension {b} is too large to serialise")))
        };
        Ok(NetworkDoc {
            levels: l,
            epsilon: s.epsilon(),
            leaf_dim: s.leaf(),
            d: (0..=l).map(|k| exact(s.d(k))).collect::<Result<_>>()?,
            d_prime: (1..=l).map(|k| exact(s.d_prime(k))).collect::<Result<_>>()?,
            wiring: (1..=l).map(|k| level_doc(net, k)).collect(),
        })
    }

    fn into_network(self) -> Result<MeraNetwork> {
        let bad = |m: String| Err(Error::Format(m));
        if self.levels == 0 || self.levels > MAX_JSON_LEVELS {
            return bad(format!("levels must be in 1..={MAX_JSON_LEVELS}, got {}", self.levels));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.d.len() != self.levels + 1 || self.d_prime.len() != self.levels {
            return bad("dimension arrays do not match the number of levels".into());
        }
        if self.d.last() != Some(&self.leaf_dim) {
            return bad("leaf_dim differs from the last entry of d".into());
        }
        let schedule = DimensionSchedule::from_dims(self.epsilon, &self.d, &self.d_prime)
            .map_err(|e| Error::Format(e.to_string()))?;
        let net = MeraNetwork::new(schedule);
        if self.wiring.len() != self.levels {
            return bad("one wiring entry per level is required".into());
        }
        for (k, lv) in (1..=self.levels).zip(&self.wiring) {
            if *lv != level_doc(&net, k) {
                return bad(format!("wiring of level {k} is not the periodic binary pairing"));
            }
        }
        Ok(net)
    }
}

fn level_doc(net: &MeraNetwork, k: usize) -> LevelDoc {
    LevelDoc {
        level: k,
        sites: ring_size(k),
        v: net.v_slots(k).into_iter().map(|(j, a, b)| [j, a, b]).collect(),
        w: net.w_slots(k).into_iter().map(|(a, b)| [a, b]).collect(),
    }
}
