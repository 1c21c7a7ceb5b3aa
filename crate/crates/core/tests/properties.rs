use proptest::prelude::*;

use erasuresim_core::analysis::bound_violations;
use erasuresim_core::verify::UNADJUSTED_COST_CHECKS;
use erasuresim_core::{run, verify_trace, NoisePattern, PartyInput, Protocol, RunConfig, SchemeKind};

fn scheme() -> impl Strategy<Value = SchemeKind> {
    prop::sample::select(SchemeKind::ALL.to_vec())
}

fn case() -> impl Strategy<Value = (SchemeKind, usize, u64, Vec<bool>, Vec<bool>, Vec<u64>)> {
    (scheme(), 1usize..=6, any::<u64>()).prop_flat_map(|(s, half, seed)| {
        let horizon = 16 * half as u64 * s.layer().width() as u64;
        (
            Just(s),
            Just(2 * half),
            Just(seed),
            prop::collection::vec(any::<bool>(), half),
            prop::collection::vec(any::<bool>(), half),
            prop::collection::vec(1..=horizon, 0..=3 * half),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn any_noise_keeps_outputs_and_adjusted_bounds((scheme, n, seed, x, y, erase) in case()) {
        let pattern: NoisePattern = erase.into_iter().collect();
        let cfg = RunConfig::new(scheme, Protocol::hashed(n, seed).unwrap(), PartyInput::from_bits(x), PartyInput::from_bits(y))
            .with_pattern(pattern.iter());
        let out = run(&cfg).unwrap();
        prop_assert!(out.outputs_correct(), "{} {}", scheme, pattern);
        prop_assert_eq!(run(&cfg).unwrap().trace, out.trace.clone());

        let report = verify_trace(&out.trace);
        for c in report.failures() {
            prop_assert!(UNADJUSTED_COST_CHECKS.contains(&c.id.as_str()), "{} {}: {}", scheme, pattern, c.id);
            prop_assert!(out.metrics.erased_final_answers > 0);
        }
        for v in bound_violations(scheme, n as u64, &out.metrics) {
            prop_assert!(v.bound.is_unadjusted_cost(), "{} {}: {:?}", scheme, pattern, v);
        }
        let m = out.metrics;
        if scheme.is_ags() {
            prop_assert!(m.cc_sym <= n as u64 + m.erasures_logical + m.erased_final_answers);
        } else {
            prop_assert!(m.transmissions <= n as u64 + 2 * m.erasures_logical);
        }
    }
}
