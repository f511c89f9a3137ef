use dsr_core::rate::{
    next_state, rate_of, srt_storage, update_table, ControllerParams, SamplingRate,
    SamplingRateTable, TileState,
};
use proptest::prelude::*;

fn state() -> impl Strategy<Value = TileState> {
    prop::sample::select(TileState::ALL.to_vec())
}

/// Position on the ladder, 0 for FULL.
fn rung(s: TileState) -> usize {
    TileState::ALL.iter().position(|&x| x == s).unwrap()
}

#[test]
fn transition_table() {
    let p = ControllerParams::new(10.0, 1).unwrap();
    let expected_low = [
        TileState::Down1Candidate,
        TileState::Quarter,
        TileState::Down2Candidate,
        TileState::Sixteenth,
        TileState::Sixteenth,
    ];
    for (s, want) in TileState::ALL.iter().zip(expected_low) {
        assert_eq!(next_state(*s, 10.0, &p), want);
        assert_eq!(next_state(*s, 0.0, &p), want);
        assert_eq!(next_state(*s, 10.000001, &p), TileState::Full);
    }
}

#[test]
fn rates_by_state() {
    let sides: Vec<usize> = TileState::ALL.iter().map(|&s| rate_of(s).side()).collect();
    assert_eq!(sides, [1, 1, 2, 2, 4]);
    assert_eq!(SamplingRate::Quarter.superfragments_per_tile(16), 64);
    assert_eq!(SamplingRate::Sixteenth.superfragments_per_tile(16), 16);
}

#[test]
fn storage_for_full_hd() {
    let s = srt_storage(8100);
    assert_eq!(s.bits, 24300);
    assert!((s.kilobytes - 2.966).abs() < 5e-4);
}

proptest! {
    #[test]
    fn four_low_frames_reach_bottom(s in state(), t in 0.0f64..1000.0, frac in 0.0f64..=1.0) {
        let p = ControllerParams::new(t, 1).unwrap();
        let mut cur = s;
        for _ in 0..4 {
            cur = next_state(cur, t * frac, &p);
        }
        prop_assert_eq!(cur, TileState::Sixteenth);
    }

    #[test]
    fn high_always_returns_to_full(s in state(), t in 0.0f64..1000.0, excess in 1e-9f64..1000.0) {
        let p = ControllerParams::new(t, 1).unwrap();
        prop_assert_eq!(next_state(s, t + excess, &p), TileState::Full);
    }

    #[test]
    fn low_descends_at_most_one_rung(s in state(), t in 0.0f64..1000.0, frac in 0.0f64..=1.0) {
        let p = ControllerParams::new(t, 1).unwrap();
        let n = next_state(s, t * frac, &p);
        prop_assert!(rung(n) >= rung(s));
        prop_assert!(rung(n) <= rung(s) + 1);
        prop_assert!(rate_of(n).side() >= rate_of(s).side());
    }

    #[test]
    fn deterministic(s in state(), m in 0.0f64..500.0, t in 0.0f64..500.0) {
        let p = ControllerParams::new(t, 2).unwrap();
        prop_assert_eq!(next_state(s, m, &p), next_state(s, m, &p));
    }

    #[test]
    fn table_update_is_elementwise(
        states in prop::collection::vec(state(), 0..64),
        seed in prop::collection::vec(0.0f64..200.0, 64),
        t in 0.0f64..200.0,
    ) {
        let p = ControllerParams::new(t, 1).unwrap();
        let m = &seed[..states.len()];
        let table = SamplingRateTable::from_states(states.clone());
        let next = update_table(&table, m, &p).unwrap();
        for i in 0..states.len() {
            prop_assert_eq!(next.state(i), next_state(states[i], m[i], &p));
        }
    }

    #[test]
    fn pack_round_trips(states in prop::collection::vec(state(), 0..200)) {
        let table = SamplingRateTable::from_states(states.clone());
        let bytes = table.pack();
        prop_assert_eq!(bytes.len(), (states.len() * 3).div_ceil(8));
        let back = SamplingRateTable::unpack(&bytes, states.len()).unwrap();
        prop_assert_eq!(back, table);
    }

    #[test]
    fn encoding_fits_three_bits(s in state()) {
        prop_assert!(s.encode() < 8);
        prop_assert_eq!(TileState::decode(s.encode()).unwrap(), s);
    }

    #[test]
    fn storage_is_three_bits_per_tile(n in 0usize..100_000) {
        let s = srt_storage(n);
        prop_assert_eq!(s.bits, 3 * n as u64);
        prop_assert!((s.kilobytes * 8192.0 - s.bits as f64).abs() < 1e-6);
    }
}

#[test]
fn invalid_codes_rejected() {
    for code in 5..8 {
        assert!(TileState::decode(code).is_err());
    }
    assert!(ControllerParams::new(-1.0, 1).is_err());
    assert!(ControllerParams::new(f64::NAN, 1).is_err());
    assert!(ControllerParams::new(1.0, 32).is_err());
    let t = SamplingRateTable::new(3);
    assert!(update_table(&t, &[0.0; 2], &ControllerParams::new(1.0, 1).unwrap()).is_err());
}
