use mera_core::schedule::{memory_estimate, solve_schedule};
use proptest::prelude::*;

proptest! {
    #[test]
    fn larger_epsilon_never_adds_levels(leaf in 2u64..12, a in 0.05f64..2.4, b in 0.05f64..2.4) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assume!(hi <= (leaf as f64).ln());
        let s_lo = solve_schedule(leaf, lo).unwrap();
        let s_hi = solve_schedule(leaf, hi).unwrap();
        prop_assert!(s_hi.levels() <= s_lo.levels());
    }

    #[test]
    fn schedules_are_valid_and_tight(leaf in 2u64..12, eps in 0.05f64..2.4) {
        prop_assume!(eps <= (leaf as f64).ln());
        let s = solve_schedule(leaf, eps).unwrap();
        s.validate().unwrap();
        prop_assert_eq!(s.d(0).exact, Some(1));
        prop_assert_eq!(s.d(s.levels()).exact, Some(leaf));
        // The top step clamps to 1 when its exponent is negative.
        for k in 1..=s.levels() {
            let scale = eps * s.scale(k);
            if let Some(dp) = s.d_prime(k).exact {
                let t = (s.log_d(k) - scale).exp();
                prop_assert!(dp as f64 >= t * (1.0 - 1e-12) && ((dp as f64) < t * (1.0 + 1e-12) + 1.0 || dp == 1));
            }
            if let Some(d) = s.d(k - 1).exact {
                let t = (2.0 * s.log_d_prime(k) - 2.0 * scale).exp();
                prop_assert!(d as f64 >= t * (1.0 - 1e-12) && ((d as f64) < t * (1.0 + 1e-12) + 1.0 || d == 1));
            }
        }
        // Only the topmost step may clamp to 1.
        for k in 1..s.levels() {
            prop_assert!(s.d(k).exact != Some(1));
        }
    }

    #[test]
    fn peak_memory_dominates_every_level(eps in 0.1f64..0.69) {
        let s = solve_schedule(2, eps).unwrap();
        let mem = memory_estimate(&s);
        for lv in &mem.levels {
            prop_assert!(lv.after_w.log2 <= mem.peak.log2 + 1e-9);
            if let Some(v) = &lv.after_v {
                prop_assert!(v.log2 <= mem.peak.log2 + 1e-9);
            }
        }
    }
}
