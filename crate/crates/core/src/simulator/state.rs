use crate::haar::Isometry;
use crate::network::{ring_size, MeraNetwork, Stage};
use crate::rng::stream_rng;
use crate::schedule::memory_estimate;
use crate::{Error, Result, C64};

/// Default limit on the number of amplitudes in any snapshot.
pub const DEFAULT_MEMORY_CAP: u64 = 1 << 26;

/// Environment variable overriding [`DEFAULT_MEMORY_CAP`].
pub const MEMORY_CAP_ENV: &str = "MERA_MEMORY_CAP";

pub fn memory_cap() -> u64 {
    std::env::var(MEMORY_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MEMORY_CAP)
}

/// Kind of isometry slot, used to pick its random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    V = 0,
    W = 1,
}

/// Stream id of one isometry slot: `level << 34 | kind << 33 | slot`.
pub fn slot_stream(level: usize, kind: SlotKind, slot: u64) -> u64 {
    debug_assert!(slot < 1 << 33);
    ((level as u64) << 34) | ((kind as u64) << 33) | slot
}

/// The isometry occupying one slot of a network built from `seed`.
pub fn slot_isometry(net: &MeraNetwork, seed: u64, level: usize, kind: SlotKind, slot: u64) -> Result<Isometry> {
    let exact = |stage| {
        net.site_dim(level, stage)
            .exact
            .ok_or_else(|| Error::Feasibility(format!("level {level} dimension is not representable")))
            .map(|d| d as usize)
    };
    let (d_in, d_out) = match kind {
        SlotKind::V => {
            let below = if level == 1 {
                1
            } else {
                net.site_dim(level - 1, Stage::AfterW)
                    .exact
                    .ok_or_else(|| Error::Feasibility(format!("level {} dimension is not representable", level - 1)))?
                    as usize
            };
            let dp = exact(Stage::AfterV)?;
            (below, dp * dp)
        }
        SlotKind::W => {
            let dp = exact(Stage::AfterV)?;
            let d = exact(Stage::AfterW)?;
            (dp * dp, d * d)
        }
    };
    Isometry::sample(d_in, d_out, &mut stream_rng(seed, slot_stream(level, kind, slot)))
}

/// Exact state vector on one ring. Site 0 is the most significant index.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub level: usize,
    pub stage: Stage,
    pub site_dims: Vec<usize>,
    pub amplitudes: Vec<C64>,
}

impl DenseState {
    pub fn new(level: usize, stage: Stage, site_dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let total: usize = site_dims.iter().product();
        if total != amplitudes.len() || site_dims.len() as u64 != ring_size(level) {
            return Err(Error::InvalidDimension(format!(
                "{} amplitudes for site dimensions {:?} at level {level}",
                amplitudes.len(),
                site_dims
            )));
        }
        Ok(DenseState {
            level,
            stage,
            site_dims,
            amplitudes,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Every snapshot of one sampled network, top to bottom:
/// `(0, after_w), (1, after_v), (1, after_w), ..., (L, after_w)`.
#[derive(Debug, Clone)]
pub struct MeraState {
    snapshots: Vec<DenseState>,
}

impl MeraState {
    pub fn snapshot(&self, level: usize, stage: Stage) -> Option<&DenseState> {
        let idx = match (level, stage) {
            (0, Stage::AfterW) => 0,
            (0, Stage::AfterV) => return None,
            (k, Stage::AfterV) => 2 * k - 1,
            (k, Stage::AfterW) => 2 * k,
        };
        self.snapshots.get(idx)
    }

    pub fn leaf(&self) -> &DenseState {
        self.snapshots.last().expect("at least the top snapshot")
    }

    pub fn snapshots(&self) -> &[DenseState] {
        &self.snapshots
    }
}

/// Rejects networks whose snapshots would exceed `cap` amplitudes.
pub fn check_feasible(net: &MeraNetwork, cap: u64) -> Result<()> {
    let mem = memory_estimate(net.schedule());
    for lv in &mem.levels {
        let stages = lv
            .after_v
            .iter()
            .map(|c| (Stage::AfterV, c))
            .chain(std::iter::once((Stage::AfterW, &lv.after_w)));
        for (stage, count) in stages {
            if count.as_u64().is_none_or(|n| n > cap) {
                return Err(Error::MemoryCap {
                    level: lv.k,
                    stage,
                    amplitudes: count.to_string(),
                    cap,
                });
            }
        }
    }
    Ok(())
}

/// Samples every isometry from `seed` and applies `V_1, W_1, ..., V_L, W_L`
/// to the one-dimensional top state.
pub fn build_state(net: &MeraNetwork, seed: u64) -> Result<MeraState> {
    build_state_with_cap(net, seed, memory_cap())
}

pub fn build_state_with_cap(net: &MeraNetwork, seed: u64, cap: u64) -> Result<MeraState> {
    check_feasible(net, cap)?;
    let mut snapshots = vec![DenseState::new(0, Stage::AfterW, vec![1], vec![C64::new(1.0, 0.0)])?];
    for k in 1..=net.levels() {
        let prev = snapshots.last().expect("top state");
        let after_v = apply_v_layer(net, seed, k, prev)?;
        let after_w = apply_w_layer(net, seed, k, &after_v)?;
        snapshots.push(after_v);
        snapshots.push(after_w);
    }
    Ok(MeraState { snapshots })
}

fn apply_v_layer(net: &MeraNetwork, seed: u64, k: usize, prev: &DenseState) -> Result<DenseState> {
    let dp = net.site_dim(k, Stage::AfterV).exact.expect("checked feasible") as usize;
    let mut amps = prev.amplitudes.clone();
    let mut dims = prev.site_dims.clone();
    for j in 0..ring_size(k - 1) {
        let iso = slot_isometry(net, seed, k, SlotKind::V, j)?;
        // Sites before j have already been split in two.
        let pos = 2 * j as usize;
        amps = apply_isometry(&amps, &dims, pos, 1, iso.entries());
        dims.splice(pos..pos + 1, [dp, dp]);
    }
    DenseState::new(k, Stage::AfterV, dims, amps)
}

fn apply_w_layer(net: &MeraNetwork, seed: u64, k: usize, prev: &DenseState) -> Result<DenseState> {
    let d = net.site_dim(k, Stage::AfterW).exact.expect("checked feasible") as usize;
    let n = prev.n_sites();
    // After rotating site 0 to the end, slot j sits at positions (2j, 2j+1).
    let mut dims = prev.site_dims.clone();
    let mut amps = rotate_left(&prev.amplitudes, dims[0]);
    dims.rotate_left(1);
    for j in 0..n / 2 {
        let iso = slot_isometry(net, seed, k, SlotKind::W, j as u64)?;
        amps = apply_isometry(&amps, &dims, 2 * j, 2, iso.entries());
        dims.splice(2 * j..2 * j + 2, [d, d]);
    }
    let amps = rotate_right(&amps, dims[n - 1]);
    dims.rotate_right(1);
    DenseState::new(k, Stage::AfterW, dims, amps)
}

/// Moves the most significant site (dimension `d0`) to the least significant end.
pub(crate) fn rotate_left(amps: &[C64], d0: usize) -> Vec<C64> {
    let rest = amps.len() / d0;
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for a in 0..d0 {
        for r in 0..rest {
            out[r * d0 + a] = amps[a * rest + r];
        }
    }
    out
}

/// Inverse of [`rotate_left`]; `d_last` is the dimension of the last site.
pub(crate) fn rotate_right(amps: &[C64], d_last: usize) -> Vec<C64> {
    let rest = amps.len() / d_last;
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for r in 0..rest {
        for b in 0..d_last {
            out[b * rest + r] = amps[r * d_last + b];
        }
    }
    out
}

/// Applies `iso` (shape `d_out x d_in`) to the `n_in` consecutive sites
/// starting at `pos`, whose joint dimension must be `d_in`.
pub fn apply_isometry(amps: &[C64], dims: &[usize], pos: usize, n_in: usize, iso: &nalgebra::DMatrix<C64>) -> Vec<C64> {
    let left: usize = dims[..pos].iter().product();
    let d_in: usize = dims[pos..pos + n_in].iter().product();
    let right: usize = dims[pos + n_in..].iter().product();
    assert_eq!(d_in, iso.ncols(), "isometry input does not match the sites");
    let d_out = iso.nrows();
    let mut out = vec![C64::new(0.0, 0.0); left * d_out * right];
    for l in 0..left {
        let src = &amps[l * d_in * right..(l + 1) * d_in * right];
        let dst = &mut out[l * d_out * right..(l + 1) * d_out * right];
        for i in 0..d_in {
            let row = &src[i * right..(i + 1) * right];
            if row.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            for o in 0..d_out {
                let u = iso[(o, i)];
                let target = &mut dst[o * right..(o + 1) * right];
                for (t, s) in target.iter_mut().zip(row) {
                    *t += u * s;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{solve_schedule, DimensionSchedule};

    #[test]
    fn rotations_are_inverse() {
        let amps: Vec<C64> = (0..24).map(|x| C64::new(x as f64, 0.0)).collect();
        let l = rotate_left(&amps, 2);
        assert_eq!(l[1], amps[12]);
        assert_eq!(rotate_right(&l, 2), amps);
    }

    #[test]
    fn apply_identity_is_noop() {
        let amps: Vec<C64> = (0..12).map(|x| C64::new(x as f64, 1.0)).collect();
        let id = nalgebra::DMatrix::<C64>::identity(3, 3);
        assert_eq!(apply_isometry(&amps, &[2, 3, 2], 1, 1, &id), amps);
    }

    #[test]
    fn states_are_normalised_with_expected_shapes() {
        let net = MeraNetwork::new(solve_schedule(2, 0.2).unwrap());
        let st = build_state(&net, 5).unwrap();
        assert_eq!(st.snapshots().len(), 2 * net.levels() + 1);
        for s in st.snapshots() {
            assert!((s.norm() - 1.0).abs() < 1e-10);
            let d = net.site_dim(s.level, s.stage).exact.unwrap() as usize;
            assert!(s.site_dims.iter().all(|&x| x == d));
        }
        assert_eq!(st.leaf().amplitudes.len(), 1 << 16);
    }

    #[test]
    fn build_is_deterministic() {
        let net = MeraNetwork::new(solve_schedule(2, 0.3).unwrap());
        let a = build_state(&net, 11).unwrap();
        let b = build_state(&net, 11).unwrap();
        let c = build_state(&net, 12).unwrap();
        assert_eq!(a.leaf(), b.leaf());
        assert_ne!(a.leaf(), c.leaf());
    }

    #[test]
    fn memory_cap_names_the_level() {
        let net = MeraNetwork::new(solve_schedule(2, 0.2).unwrap());
        match build_state_with_cap(&net, 1, 1000) {
            Err(Error::MemoryCap { level, stage, .. }) => {
                assert_eq!((level, stage), (3, Stage::AfterV));
            }
            other => panic!("expected a memory-cap error, got {other:?}"),
        }
        let big = MeraNetwork::new(solve_schedule(2, 0.01).unwrap());
        assert!(build_state_with_cap(&big, 1, DEFAULT_MEMORY_CAP).unwrap_err().is_feasibility());
    }

    #[test]
    fn single_level_wiring_by_hand() {
        // D'_1 = 1 so V_1 is a phase; W_1 then prepares a 4-dim vector
        // with input site order (1, 0).
        let net = MeraNetwork::new(DimensionSchedule::from_dims(0.5, &[1, 2], &[1]).unwrap());
        let st = build_state(&net, 3).unwrap();
        let v = slot_isometry(&net, 3, 1, SlotKind::V, 0).unwrap();
        let w = slot_isometry(&net, 3, 1, SlotKind::W, 0).unwrap();
        let phase = v.entries()[(0, 0)];
        // Output index of W is (site 1, site 0); the state stores (site 0, site 1).
        for s0 in 0..2 {
            for s1 in 0..2 {
                let expect = w.entries()[(s1 * 2 + s0, 0)] * phase;
                assert!((st.leaf().amplitudes[s0 * 2 + s1] - expect).norm() < 1e-14);
            }
        }
    }
}
