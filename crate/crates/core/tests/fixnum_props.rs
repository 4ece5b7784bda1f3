mod common;

use common::oracle;
use picoforge::fixnum::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn printer_matches_oracle_exhaustively_near_zero() {
    for v in -(1i64 << 17)..=(1i64 << 17) {
        assert_eq!(format_sp(Sp(v as i32)), oracle::print_dimen(v), "value {v}");
    }
}

#[test]
fn printer_matches_oracle_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1_000_000 {
        let v: i64 = rng.gen_range(-MAX_DIMEN..=MAX_DIMEN);
        assert_eq!(format_sp(Sp(v as i32)), oracle::print_dimen(v), "value {v}");
    }
}

#[test]
fn print_then_read_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100_000 {
        let v: i32 = rng.gen_range(-(1 << 28)..(1 << 28));
        let n = parse_number(&format_sp(Sp(v))).unwrap();
        assert_eq!(n.to_sp_factor().unwrap(), Sp(v));
    }
}

#[test]
fn frozen_pyth_values() {
    // Frozen from the step simulation.
    assert_eq!(oracle::sim_pyth(3 << 16, 4 << 16), Some(sp_pyth(Sp::pt(3), Sp::pt(4)).raw()));
    assert_eq!(sp_pyth(Sp::pt(3), Sp::pt(4)), Sp(FROZEN_3_4));
}

const FROZEN_3_4: i32 = 327702;

proptest! {
    #[test]
    fn div_matches_simulation(a in -(1i32 << 26)..(1 << 26), b in -(1i32 << 26)..(1 << 26)) {
        prop_assume!(b != 0);
        let got = sp_div(Sp(a), Sp(b)).ok().map(|s| s.raw());
        let want = oracle::sim_divide(a as i64, b as i64).filter(|v| v.abs() <= MAX_DIMEN);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn div_small_numerator_is_exact_ratio(a in -16383i32..16383, b in 1i32..(1 << 26)) {
        let q = sp_div(Sp(a), Sp(b)).unwrap().raw();
        prop_assert_eq!(q, (a as i64 * 65536) / b as i64);
    }

    #[test]
    fn pyth_abs_invariant(a in -(1i32 << 24)..(1 << 24), b in -(1i32 << 24)..(1 << 24)) {
        let p = sp_pyth(Sp(a), Sp(b));
        prop_assert_eq!(p, sp_pyth(Sp(a.abs()), Sp(b.abs())));
        prop_assert_eq!(p, sp_pyth(Sp(-a), Sp(b)));
    }

    // The guarded division keeps only s/16^k of the divisor, so relative
    // precision bottoms out near 1/128 when 8|a| reaches 2^26.
    #[test]
    fn pyth_within_guarded_precision(a in -(1i32 << 24)..(1 << 24), b in -(1i32 << 24)..(1 << 24)) {
        let p = sp_pyth(Sp(a), Sp(b)).raw() as f64;
        let h = (a as f64).hypot(b as f64);
        prop_assert!((p - h.round()).abs() <= f64::max(655.0, 0.0125 * h), "{} vs {}", p, h);
    }

    #[test]
    fn pyth_matches_simulation(a in -(1i32 << 24)..(1 << 24), b in -(1i32 << 24)..(1 << 24)) {
        prop_assert_eq!(Some(sp_pyth(Sp(a), Sp(b)).raw()), oracle::sim_pyth(a as i64, b as i64));
    }

    #[test]
    fn div_residual_bound(a in -(1i32 << 26)..(1 << 26), b in -(1i32 << 26)..(1 << 26)) {
        prop_assume!(b != 0);
        if let Ok(q) = sp_div(Sp(a), Sp(b)) {
            let q = q.raw() as i128;
            let mut g = a as i64;
            let mut k = 0u32;
            for _ in 0..4 {
                if g.abs() < 67108863 { g *= 16 } else { k += 1 }
            }
            let resid = (q * b as i128 - a as i128 * 65536).abs();
            let bound = (b as i128).abs() + q.abs() * (16i128.pow(k) - 1) + 16 * 65536;
            prop_assert!(resid <= bound, "a={} b={} q={} k={}", a, b, q, k);
        }
    }

    #[test]
    fn number_format_idempotent(s in "-?[0-9]{0,6}(\\.[0-9]{0,6})?") {
        if let Ok(n) = parse_number(&s) {
            let once = n.to_string();
            let twice = parse_number(&once).unwrap().to_string();
            prop_assert_eq!(once, twice);
        }
    }
}
