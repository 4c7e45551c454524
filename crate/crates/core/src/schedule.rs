//! Level-dependent bond dimensions.
//!
//! Starting from the leaf dimension `D_L` the schedule is built upward with
//!
//! ```text
//! D'_k    = ceil(exp(log D_k - eps * 2^(L-k)))
//! D_{k-1} = ceil(exp(2 log D'_k - eps * 2^(L-k+1)))
//! ```
//!
//! Only `m = L - k` enters the exponent, so the recursion can be run without
//! knowing `L`; the number of levels is the first `m` at which `D_{k-1}`
//! reaches 1.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest exponent whose ceiling is still tracked as an exact integer.
/// Beyond `exp(36) ≈ 4.3e15` an f64 cannot resolve the ceiling anyway.
const EXACT_LOG_LIMIT: f64 = 36.0;

/// Ring sizes are `2^L`; keep them addressable.
pub const MAX_LEVELS: usize = 62;

/// A bond dimension, tracked through its natural log.
///
/// Dimensions from the recursion grow doubly exponentially, so only those
/// small enough to be resolved exactly carry an integer value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondDim {
    pub log: f64,
    pub exact: Option<u64>,
}

impl BondDim {
    pub fn exact(d: u64) -> Self {
        BondDim {
            log: (d as f64).ln(),
            exact: Some(d),
        }
    }

    /// `max(1, ceil(exp(x)))`.
    pub fn ceil_exp(x: f64) -> Self {
        if x <= EXACT_LOG_LIMIT {
            let v = x.exp().ceil().max(1.0) as u64;
            BondDim::exact(v)
        } else {
            BondDim {
                log: x,
                exact: None,
            }
        }
    }

    pub fn is_one(&self) -> bool {
        self.exact == Some(1)
    }
}

impl std::fmt::Display for BondDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.exact {
            Some(d) => write!(f, "{d}"),
            None => write!(f, "e^{:.6}", self.log),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSchedule {
    levels: usize,
    epsilon: f64,
    leaf: u64,
    /// `D_0 ..= D_L`.
    d: Vec<BondDim>,
    /// `D'_1 ..= D'_L`, stored from index 0.
    d_prime: Vec<BondDim>,
}

/// Runs the ceilinged recursion upward from the leaves.
pub fn solve_schedule(leaf: u64, epsilon: f64) -> Result<DimensionSchedule> {
    if leaf < 2 {
        return Err(Error::InvalidParameter(format!(
            "leaf dimension must be at least 2, got {leaf}"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if epsilon > (leaf as f64).ln() {
        return Err(Error::NoLevels { epsilon, leaf });
    }

    // Built leaf-first, reversed at the end.
    let mut d_rev = vec![BondDim::exact(leaf)];
    let mut dp_rev = Vec::new();
    let mut m = 0usize;
    loop {
        if m >= MAX_LEVELS {
            return Err(Error::TooManyLevels { max: MAX_LEVELS });
        }
        let scale = epsilon * (m as f64).exp2();
        let below = d_rev[m];
        let dp = BondDim::ceil_exp(below.log - scale);
        let above = BondDim::ceil_exp(2.0 * dp.log - 2.0 * scale);
        dp_rev.push(dp);
        d_rev.push(above);
        m += 1;
        if above.is_one() {
            break;
        }
    }
    d_rev.reverse();
    dp_rev.reverse();
    Ok(DimensionSchedule {
        levels: m,
        epsilon,
        leaf,
        d: d_rev,
        d_prime: dp_rev,
    })
}

impl DimensionSchedule {
    /// Schedule with explicitly given dimensions (`d` is `D_0..=D_L`,
    /// `d_prime` is `D'_1..=D'_L`). Used for hand-built test networks.
    pub fn from_dims(epsilon: f64, d: &[u64], d_prime: &[u64]) -> Result<Self> {
        if d.len() < 2 || d_prime.len() + 1 != d.len() {
            return Err(Error::InvalidParameter(format!(
                "need L+1 values of D and L values of D', got {} and {}",
                d.len(),
                d_prime.len()
            )));
        }
        let levels = d_prime.len();
        if levels > MAX_LEVELS {
            return Err(Error::TooManyLevels { max: MAX_LEVELS });
        }
        let s = DimensionSchedule {
            levels,
            epsilon,
            leaf: d[levels],
            d: d.iter().map(|&x| BondDim::exact(x)).collect(),
            d_prime: d_prime.iter().map(|&x| BondDim::exact(x)).collect(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks the structural invariants every schedule must satisfy.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.levels == 0 || self.d.len() != self.levels + 1 || self.d_prime.len() != self.levels {
            return bad("inconsistent number of levels".into());
        }
        if !self.d[0].is_one() {
            return bad(format!("D_0 must be 1, got {}", self.d[0]));
        }
        if self.d[self.levels].exact != Some(self.leaf) || self.leaf < 2 {
            return bad("D_L must equal the leaf dimension (>= 2)".into());
        }
        for dim in self.d.iter().chain(&self.d_prime) {
            if !(dim.log.is_finite() && dim.log >= 0.0) || dim.exact == Some(0) {
                return bad(format!("dimension {dim} is not a positive integer"));
            }
        }
        for k in 1..=self.levels {
            let (dk, dpk) = (self.d(k), self.d_prime(k));
            if dpk.log > dk.log + 1e-12 {
                return bad(format!("D'_{k} = {dpk} exceeds D_{k} = {dk}"));
            }
            // V_k maps one site of dimension D_{k-1} to a pair of D'_k sites.
            if self.d(k - 1).log > 2.0 * dpk.log + 1e-12 {
                return bad(format!("D_{} = {} exceeds D'_{k}^2", k - 1, self.d(k - 1)));
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn leaf(&self) -> u64 {
        self.leaf
    }

    /// Number of leaf sites, `2^L`.
    pub fn sites(&self) -> u64 {
        1u64 << self.levels
    }

    /// `D_k` for `0 <= k <= L`.
    pub fn d(&self, k: usize) -> BondDim {
        self.d[k]
    }

    /// `D'_k` for `1 <= k <= L`.
    pub fn d_prime(&self, k: usize) -> BondDim {
        assert!(k >= 1 && k <= self.levels, "D'_k defined for 1 <= k <= L, got {k}");
        self.d_prime[k - 1]
    }

    pub fn log_d(&self, k: usize) -> f64 {
        self.d(k).log
    }

    pub fn log_d_prime(&self, k: usize) -> f64 {
        self.d_prime(k).log
    }

    /// `2^{L-k}`, the number of leaves below a level-`k` node.
    pub fn scale(&self, k: usize) -> f64 {
        ((self.levels - k) as f64).exp2()
    }
}

/// Real-valued recursion without ceilings: `log D_{L-m}` for `m = 0..=levels`.
pub fn reference_log_dims(leaf: u64, epsilon: f64, levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels + 1);
    let mut x = (leaf as f64).ln();
    out.push(x);
    for m in 0..levels {
        let scale = epsilon * (m as f64).exp2();
        let xp = x - scale;
        x = 2.0 * xp - 2.0 * scale;
        out.push(x);
    }
    out
}

/// Closed form of the un-ceilinged recursion,
/// `log D_{L-m} = 2^m log D_L - 4 m eps 2^(m-1)`.
///
/// One level up maps `x` to `2 (x - eps 2^m) - eps 2^(m+1) = 2x - 4 eps 2^m`.
pub fn closed_form_log_d(leaf: u64, epsilon: f64, m: usize) -> f64 {
    let p = (m as f64).exp2();
    p * (leaf as f64).ln() - 2.0 * m as f64 * epsilon * p
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub k: usize,
    pub d: BondDim,
    /// Absent at `k = 0`.
    pub d_prime: Option<BondDim>,
    /// `2^{L-k}`.
    pub scale: f64,
    /// `log D_k / (eps 2^{L-k})`.
    pub ratio: f64,
}

pub fn schedule_report(s: &DimensionSchedule) -> Vec<ScheduleRow> {
    (0..=s.levels())
        .map(|k| {
            let scale = s.scale(k);
            ScheduleRow {
                k,
                d: s.d(k),
                d_prime: (k >= 1).then(|| s.d_prime(k)),
                scale,
                ratio: s.log_d(k) / (s.epsilon() * scale),
            }
        })
        .collect()
}

/// A Hilbert-space dimension count.
#[derive(Debug, Clone, PartialEq)]
pub struct DimCount {
    pub log2: f64,
    /// Exact value when its bit length stays below [`EXACT_BITS_LIMIT`].
    pub exact: Option<BigUint>,
}

/// Above this many bits the exact count is not materialised.
pub const EXACT_BITS_LIMIT: f64 = (1u64 << 24) as f64;

impl DimCount {
    fn power(base: BondDim, exponent: u64) -> Self {
        let log2 = base.log / std::f64::consts::LN_2 * exponent as f64;
        let exact = match base.exact {
            Some(b) if log2 <= EXACT_BITS_LIMIT => u32::try_from(exponent)
                .ok()
                .map(|e| BigUint::from(b).pow(e)),
            _ => None,
        };
        DimCount { log2, exact }
    }

    /// The count as `u64`, when exact and small enough.
    pub fn as_u64(&self) -> Option<u64> {
        self.exact.as_ref().and_then(|b| u64::try_from(b).ok())
    }
}

impl std::fmt::Display for DimCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.exact {
            Some(b) => write!(f, "{b}"),
            None => write!(f, "2^{:.3}", self.log2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelMemory {
    pub k: usize,
    /// `D'_k^{2^k}`, absent at `k = 0`.
    pub after_v: Option<DimCount>,
    /// `D_k^{2^k}`.
    pub after_w: DimCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEstimate {
    pub levels: Vec<LevelMemory>,
    pub peak: DimCount,
}

/// Total Hilbert-space dimension at every stage of every level.
pub fn memory_estimate(s: &DimensionSchedule) -> MemoryEstimate {
    let levels: Vec<LevelMemory> = (0..=s.levels())
        .map(|k| {
            let sites = 1u64 << k;
            LevelMemory {
                k,
                after_v: (k >= 1).then(|| DimCount::power(s.d_prime(k), sites)),
                after_w: DimCount::power(s.d(k), sites),
            }
        })
        .collect();
    let peak = levels
        .iter()
        .flat_map(|l| l.after_v.iter().chain(std::iter::once(&l.after_w)))
        .max_by(|a, b| match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => x.cmp(y),
            _ => a.log2.total_cmp(&b.log2),
        })
        .cloned()
        .expect("at least one level");
    MemoryEstimate { levels, peak }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_epsilon_gives_one_level() {
        let s = solve_schedule(2, 2f64.ln()).unwrap();
        assert_eq!(s.levels(), 1);
        assert_eq!(s.d_prime(1).exact, Some(1));
        assert_eq!(s.d(0).exact, Some(1));
        assert_eq!(s.d(1).exact, Some(2));
    }

    #[test]
    fn too_large_epsilon_has_no_levels() {
        assert!(matches!(solve_schedule(2, 0.7), Err(Error::NoLevels { .. })));
        assert!(matches!(solve_schedule(1, 0.1), Err(Error::InvalidParameter(_))));
        assert!(matches!(solve_schedule(2, -0.1), Err(Error::InvalidParameter(_))));
        assert!(matches!(solve_schedule(2, f64::NAN), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn tiny_epsilon_is_rejected() {
        assert!(matches!(solve_schedule(2, 1e-4), Err(Error::TooManyLevels { .. })));
    }

    #[test]
    fn small_schedules_by_hand() {
        // eps = 0.3: D'_3 = ceil(2 e^-0.3) = 2, D_2 = ceil(4 e^-0.6) = 3,
        // D'_2 = ceil(3 e^-0.6) = 2, D_1 = ceil(4 e^-1.2) = 2,
        // D'_1 = ceil(2 e^-1.2) = 1, D_0 = 1.
        let s = solve_schedule(2, 0.3).unwrap();
        assert_eq!(s.levels(), 3);
        let d: Vec<_> = (0..=3).map(|k| s.d(k).exact.unwrap()).collect();
        let dp: Vec<_> = (1..=3).map(|k| s.d_prime(k).exact.unwrap()).collect();
        assert_eq!(d, vec![1, 2, 3, 2]);
        assert_eq!(dp, vec![1, 2, 2]);
    }

    #[test]
    fn invariants_hold_across_epsilons() {
        for &eps in &[0.02, 0.05, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5] {
            let s = solve_schedule(2, eps).unwrap();
            s.validate().unwrap();
            assert_eq!(s.d(s.levels()).exact, Some(2));
        }
        for &leaf in &[3u64, 5, 10] {
            let s = solve_schedule(leaf, 0.1).unwrap();
            s.validate().unwrap();
        }
    }

    #[test]
    fn ceilings_are_tight() {
        for &eps in &[0.05, 0.1, 0.2, 0.3] {
            let s = solve_schedule(2, eps).unwrap();
            let l = s.levels();
            for k in 1..=l {
                let scale = eps * s.scale(k);
                if let Some(dp) = s.d_prime(k).exact {
                    let t = (s.log_d(k) - scale).exp();
                    let v = dp as f64;
                    assert!(v >= t * (1.0 - 1e-12) && v < t + 1.0, "D'_{k}");
                }
                if let Some(d) = s.d(k - 1).exact {
                    let t = (2.0 * s.log_d_prime(k) - 2.0 * scale).exp();
                    let v = d as f64;
                    assert!(v >= t * (1.0 - 1e-12) && v < t + 1.0, "D_{}", k - 1);
                }
            }
        }
    }

    #[test]
    fn first_steps_of_reference_recursion() {
        let (leaf, eps) = (2u64, 0.01);
        let r = reference_log_dims(leaf, eps, 3);
        let l2 = 2f64.ln();
        assert!((r[1] - (2.0 * l2 - 4.0 * eps)).abs() < 1e-14);
        assert!((r[2] - (4.0 * l2 - 16.0 * eps)).abs() < 1e-14);
        assert!((r[3] - (8.0 * l2 - 48.0 * eps)).abs() < 1e-14);
    }

    #[test]
    fn reference_matches_closed_form() {
        for &eps in &[0.001, 0.01, 0.05] {
            for &leaf in &[2u64, 3, 7] {
                let r = reference_log_dims(leaf, eps, 20);
                for (m, x) in r.iter().enumerate() {
                    let cf = closed_form_log_d(leaf, eps, m);
                    assert!((x - cf).abs() <= 1e-9 * cf.abs().max(1.0), "m={m}: {x} vs {cf}");
                }
            }
        }
    }

    #[test]
    fn levels_scale_like_inverse_epsilon() {
        let eps = [0.05, 0.02, 0.01];
        let prods: Vec<f64> = eps
            .iter()
            .map(|&e| solve_schedule(2, e).unwrap().levels() as f64 * e)
            .collect();
        let lo = prods.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = prods.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo < 1.3, "L*eps = {prods:?}");
        assert!(solve_schedule(2, 0.01).unwrap().levels() > solve_schedule(2, 0.05).unwrap().levels());
    }

    #[test]
    fn report_rows() {
        let s = solve_schedule(2, 0.1).unwrap();
        let rows = schedule_report(&s);
        assert_eq!(rows.len(), s.levels() + 1);
        assert_eq!(rows[0].d.exact, Some(1));
        assert!(rows[0].d_prime.is_none());
        for w in rows.windows(2) {
            assert_eq!(w[0].scale, 2.0 * w[1].scale);
        }
    }

    #[test]
    fn memory_of_four_level_leaf() {
        let s = solve_schedule(2, 0.2).unwrap();
        assert_eq!(s.levels(), 4);
        let mem = memory_estimate(&s);
        assert_eq!(mem.levels[4].after_w.as_u64(), Some(65536));
        let leaf = mem.levels[4].after_w.exact.clone().unwrap();
        let brute = mem
            .levels
            .iter()
            .flat_map(|l| l.after_v.iter().chain(std::iter::once(&l.after_w)))
            .map(|c| c.exact.clone().unwrap())
            .max()
            .unwrap();
        assert_eq!(mem.peak.exact.clone().unwrap(), brute);
        assert!(brute >= leaf);
    }

    #[test]
    fn memory_of_single_level() {
        let s = DimensionSchedule::from_dims(0.1, &[1, 3], &[2]).unwrap();
        let mem = memory_estimate(&s);
        assert_eq!(mem.levels[1].after_w.as_u64(), Some(9));
        assert_eq!(mem.levels[1].after_v.as_ref().unwrap().as_u64(), Some(4));
    }

    #[test]
    fn huge_counts_fall_back_to_logs() {
        let s = solve_schedule(2, 0.01).unwrap();
        let mem = memory_estimate(&s);
        assert!(mem.peak.exact.is_none());
        assert!(mem.peak.log2 > 1e6);
    }

    #[test]
    fn from_dims_checks_invariants() {
        assert!(DimensionSchedule::from_dims(0.1, &[2, 2], &[2]).is_err());
        assert!(DimensionSchedule::from_dims(0.1, &[1, 2], &[3]).is_err());
        assert!(DimensionSchedule::from_dims(0.1, &[1, 5, 2], &[2, 2]).is_err());
        assert!(DimensionSchedule::from_dims(0.1, &[1, 4, 2], &[2, 2]).is_ok());
    }
}
