mod common;

use beaconsim::engine::config::RadioKind;
use beaconsim::{run, ScenarioConfig, StrategyConfig, StrategyKind};
use common::assert_apu_closure;
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    (
        any::<u64>(),
        2usize..25,
        0usize..4,
        0.0f64..15.0,
        prop::sample::select(StrategyKind::ALL.to_vec()),
        prop::bool::ANY,
        0.0f64..3.0,
    )
        .prop_map(|(seed, nodes, flows, speed, kind, lossy, sigma)| {
            let mut cfg = ScenarioConfig {
                seed,
                duration: 20.0,
                area_a: 600.0,
                area_b: 500.0,
                node_count: nodes,
                flow_count: flows,
                packet_rate: 2.0,
                speed_min: speed.min(1.0),
                speed_max: speed,
                strategy: StrategyConfig::default_for(kind),
                ..ScenarioConfig::default()
            };
            cfg.perturbations.localization_sigma = sigma;
            if lossy {
                cfg.perturbations.radio_model = RadioKind::LossyDisk;
                cfg.perturbations.loss_probability = 0.1;
            }
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn run_invariants_hold(cfg in scenario()) {
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        prop_assert_eq!(&a.event_digest, &b.event_digest);
        prop_assert_eq!(a.beacons, b.beacons);

        for f in &a.flows {
            prop_assert_eq!(
                f.generated,
                f.delivered + f.dropped_void + f.dropped_retries + f.in_flight
            );
        }
        prop_assert_eq!(a.beacons.initial, cfg.node_count as u64);
        let b = &a.beacons;
        match a.strategy {
            StrategyKind::Apu => {
                prop_assert_eq!(b.periodic + b.distance + b.speed, 0);
                assert_apu_closure(&a);
            }
            _ => prop_assert_eq!(b.mp + b.odl, 0),
        }
        for s in &a.accuracy {
            prop_assert!((0.0..=1.0).contains(&s.unknown_ratio), "{s:?}");
            prop_assert!((0.0..=1.0).contains(&s.false_ratio), "{s:?}");
        }
    }
}
