use mera_core::cutbounds::CutDp;
use mera_core::network::{Interval, MeraNetwork, Stage};
use mera_core::schedule::{solve_schedule, DimensionSchedule};
use mera_core::simulator::{
    build_state, correlation_proxies, interval_entropies, mc_entropy_sweep, mutual_information, set_spectrum,
    DenseState,
};

fn net(eps: f64) -> MeraNetwork {
    MeraNetwork::new(solve_schedule(2, eps).unwrap())
}

fn all_intervals(level: usize, stage: Stage) -> impl Iterator<Item = Interval> {
    let n = 1u64 << level;
    (0..n).flat_map(move |s| (1..n).map(move |l| Interval::with_len(level, stage, s, l)))
}

fn spectrum(st: &DenseState, iv: &Interval) -> Vec<f64> {
    let sites: Vec<usize> = iv.sites().map(|s| s as usize).collect();
    set_spectrum(st, &sites).0
}

#[test]
fn complementary_intervals_share_spectra() {
    for (eps, seed) in [(0.3, 1), (0.2, 2)] {
        let n = net(eps);
        let st = build_state(&n, seed).unwrap();
        for snap in st.snapshots().iter().filter(|s| s.level >= 1) {
            for iv in all_intervals(snap.level, snap.stage) {
                let a = spectrum(snap, &iv);
                let b = spectrum(snap, &iv.complement());
                let (a, b) = (a.iter().rev(), b.iter().rev());
                for (x, y) in a.zip(b) {
                    assert!((x - y).abs() < 1e-8, "{iv}: {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn aligned_intervals_are_blind_to_the_isometry() {
    let n = net(0.2);
    for seed in 0..3 {
        let st = build_state(&n, seed).unwrap();
        for k in 1..=n.levels() {
            let sigma = st.snapshot(k, Stage::AfterW).unwrap();
            let tau = st.snapshot(k, Stage::AfterV).unwrap();
            let below = st.snapshot(k - 1, Stage::AfterW).unwrap();
            for iv in all_intervals(k, Stage::AfterW) {
                if iv.start % 2 == 1 && iv.end() % 2 == 0 {
                    let on_tau = Interval { stage: Stage::AfterV, ..iv };
                    let a = interval_entropies(sigma, &iv).unwrap();
                    let b = interval_entropies(tau, &on_tau).unwrap();
                    assert!((a.s - b.s).abs() < 1e-8 && (a.s2 - b.s2).abs() < 1e-8, "{iv}");
                }
            }
            for iv in all_intervals(k, Stage::AfterV) {
                if iv.start % 2 == 0 && iv.end() % 2 == 1 {
                    let up = Interval::with_len(k - 1, Stage::AfterW, iv.start / 2, iv.len / 2);
                    let a = interval_entropies(tau, &iv).unwrap();
                    let b = interval_entropies(below, &up).unwrap();
                    assert!((a.s - b.s).abs() < 1e-8, "{iv}");
                }
            }
        }
    }
}

#[test]
fn entropies_obey_local_bounds() {
    let n = net(0.2);
    for seed in 10..12 {
        let st = build_state(&n, seed).unwrap();
        for k in 1..=n.levels() {
            let sigma = st.snapshot(k, Stage::AfterW).unwrap();
            let log_d = n.schedule().log_d(k);
            let ring = 1u64 << k;
            for s in 0..ring {
                let single = interval_entropies(sigma, &Interval::with_len(k, Stage::AfterW, s, 1)).unwrap();
                assert!(single.s <= log_d + 1e-8);
                assert!(single.s2 <= single.s + 1e-10);
            }
            // Moving either end by one site changes S by at most log D_k.
            for iv in all_intervals(k, Stage::AfterW) {
                let base = interval_entropies(sigma, &iv).unwrap().s;
                for (dl, dr) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1), (-1, 1), (1, -1)] {
                    let len = iv.len as i64 - dl + dr;
                    if len < 0 || len > ring as i64 {
                        continue;
                    }
                    let start = (iv.start as i64 + dl).rem_euclid(ring as i64) as u64;
                    let other = Interval::with_len(k, Stage::AfterW, start, len as u64);
                    let s = interval_entropies(sigma, &other).unwrap().s;
                    let moved = (dl.abs() + dr.abs()) as f64;
                    assert!(base <= s + log_d * moved + 1e-8, "{iv} vs {other}");
                }
            }
        }
    }
}

#[test]
fn mutual_information_is_nonnegative() {
    let n = net(0.2);
    let st = build_state(&n, 4).unwrap();
    let leaf = st.leaf();
    for l in 1..8 {
        for s in 0..16 {
            let a = Interval::with_len(4, Stage::AfterW, s, l);
            let b = Interval::with_len(4, Stage::AfterW, s + l, l);
            assert!(mutual_information(leaf, &a, &b).unwrap() >= -1e-8);
        }
    }
}

#[test]
fn schmidt_ranks_of_a_single_level() {
    let sched = DimensionSchedule::from_dims(0.1, &[1, 3], &[2]).unwrap();
    let n = MeraNetwork::new(sched);
    let rank = |snap: &DenseState| {
        let p = spectrum(snap, &Interval::with_len(1, snap.stage, 0, 1));
        p.iter().filter(|&&x| x > 1e-10).count()
    };
    let mut leaf_ranks = Vec::new();
    for seed in 0..5 {
        let st = build_state(&n, seed).unwrap();
        assert!(rank(st.snapshot(1, Stage::AfterV).unwrap()) <= 2);
        leaf_ranks.push(rank(st.leaf()));
    }
    // W_1 acts on both sites at once, so the leaf rank is bounded by D_1, not D'_1.
    assert!(leaf_ranks.iter().all(|&r| r <= 3));
    assert!(leaf_ranks.contains(&3));
}

#[test]
fn largest_schmidt_weight_scales_like_inverse_rank() {
    let n = net(0.3);
    let x = Interval::with_len(3, Stage::AfterW, 0, 1);
    let y = Interval::with_len(3, Stage::AfterW, 3, 1);
    for seed in 0..100 {
        let st = build_state(&n, seed).unwrap();
        let p = correlation_proxies(st.leaf(), &x, &y).unwrap();
        let ratio = p.schmidt_max * p.d_a_eff as f64;
        assert!((0.5..=10.0).contains(&ratio), "seed {seed}: {ratio}");
        assert!(p.trace_norm_bound >= 0.0 && p.trace_norm_bound <= 2.0 + 1e-9);
    }
}

#[test]
fn samples_respect_cut_bounds_at_three_levels() {
    let n = net(0.3);
    let ivs: Vec<Interval> = all_intervals(3, Stage::AfterW).filter(|iv| iv.len <= 7).collect();
    let stats = mc_entropy_sweep(&n, &ivs, 40, 99).unwrap();
    let mut dp = CutDp::new(&n);
    for st in stats {
        let b = dp.bounds(&st.interval).unwrap();
        for (&s, &s2) in st.s.samples.iter().zip(&st.s2.samples) {
            assert!(s <= b.min_cost + 1e-8, "{}: {s} > {}", st.interval, b.min_cost);
            assert!(s2 <= s + 1e-10);
        }
        assert!(st.s2.mean >= b.lse - 3.0 * st.s2.stderr - 1e-12, "{}", st.interval);
    }
}
