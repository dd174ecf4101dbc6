use std::collections::HashSet;

use proptest::prelude::*;
use smapy::{
    ContextAgent, Dataset, DatasetKind, Engine, Engine64, EngineConfig, EngineConfig64, GeneratorSpec, Hypercube,
    LinearParams, ModelKind, NcsKind, Resolution,
};

fn config(r: f64, o: Option<f64>, e: bool, alpha: f64, f_minus: f64, seed: u64) -> EngineConfig64 {
    EngineConfig {
        radius: r,
        overlap_threshold: o,
        point_exclusion: e,
        alpha,
        f_plus: 1.0,
        f_minus,
        seed,
        exploration_passes: 2,
        ..Default::default()
    }
}

fn engine_config() -> impl Strategy<Value = EngineConfig64> {
    (
        prop_oneof![Just(0.1), Just(0.2), Just(0.5)],
        prop_oneof![Just(Some(0.2)), Just(Some(0.5)), Just(None)],
        any::<bool>(),
        prop_oneof![Just(0.0), Just(0.1), Just(0.2)],
        prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
        any::<u64>(),
    )
        .prop_map(|(r, o, e, a, f, s)| config(r, o, e, a, f, s))
}

fn kind() -> impl Strategy<Value = ModelKind> {
    prop::sample::select(ModelKind::ALL.to_vec())
}

fn data(ds: DatasetKind, seed: u64) -> Dataset<f64> {
    GeneratorSpec::reference(ds, 60, seed).generate().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn explore_cycles_keep_their_invariants(cfg in engine_config(), kind in kind(), ds in 0usize..3, seed in 0u64..50) {
        let d = data(DatasetKind::ALL[ds], seed);
        let mut e = Engine::new(cfg, LinearParams::new(kind), 2).unwrap();
        let mut processed = 0u64;
        let mut rows: Vec<usize> = (0..d.len()).collect();
        rows.rotate_left((seed as usize) % d.len());
        for &i in &rows {
            let before_cycle = e.cycle();
            let alive_before: HashSet<u64> = e.agents().iter().map(|a| a.id).collect();
            let proposals: Vec<(u64, u8)> = e
                .agents()
                .iter()
                .filter(|a| a.region.contains(&d.x[i]).unwrap())
                .map(|a| (a.id, a.propose(&d.x[i]).unwrap()))
                .collect();
            let report = e.explore_step(&d.x[i], d.y[i]).unwrap();
            processed += 1;
            prop_assert_eq!(e.cycle(), before_cycle + 1);

            // conflicting proposers no longer overlap
            for (a, &(ia, ca)) in proposals.iter().enumerate() {
                for &(ib, cb) in &proposals[a + 1..] {
                    if ca == cb {
                        continue;
                    }
                    let find = |id| e.agents().iter().find(|x| x.id == id);
                    if let (Some(x), Some(y)) = (find(ia), find(ib)) {
                        prop_assert_eq!(x.region.intersection_volume(&y.region).unwrap(), 0.0);
                    }
                }
            }

            // every absorption removes exactly the absorbed agent
            let absorbed: Vec<u64> = report
                .ncs_events
                .iter()
                .filter(|ev| ev.resolution == Resolution::Absorb)
                .map(|ev| ev.participants[1])
                .collect();
            let created = report.ncs_events.iter().filter(|ev| ev.resolution == Resolution::Create).count();
            prop_assert!(created <= 1);
            prop_assert_eq!(e.agents().len() + absorbed.len(), alive_before.len() + created);
            for id in &absorbed {
                prop_assert!(e.agents().iter().all(|a| a.id != *id));
            }

            for a in e.agents() {
                prop_assert!(a.alive);
                // running confidence equals the closed-form sum over its history
                prop_assert_eq!(a.confidence, a.n_correct as f64 * 1.0 - a.n_wrong as f64 * e.config().f_minus);
            }
            let ids: Vec<u64> = e.agents().iter().map(|a| a.id).collect();
            prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(e.agents().len() as u64 <= processed);
        }
    }

    #[test]
    fn exploitation_never_mutates(cfg in engine_config(), kind in kind(), seed in 0u64..20) {
        let d = data(DatasetKind::Moons, seed);
        let mut e = Engine::new(cfg, LinearParams::new(kind), 2).unwrap();
        e.train(&d.x, &d.y).unwrap();
        let snapshot = e.to_json().unwrap();
        let probe: Vec<Vec<f64>> = (0..200).map(|i| vec![(i as f64 * 0.7).sin() * 3.0, (i as f64 * 0.3).cos() * 3.0]).collect();
        let first = e.predict_batch(&probe).unwrap();
        let second = e.predict_batch(&probe).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(e.to_json().unwrap(), snapshot.clone());
        let reloaded: Engine64 = Engine::from_json(&snapshot).unwrap();
        prop_assert_eq!(reloaded.to_json().unwrap(), snapshot);
        prop_assert_eq!(reloaded.predict_batch(&probe).unwrap(), first);
    }

    #[test]
    fn training_is_deterministic(cfg in engine_config(), kind in kind(), seed in 0u64..20) {
        let d = data(DatasetKind::Circles, seed);
        let run = || {
            let mut e = Engine::new(cfg.clone(), LinearParams::new(kind), 2).unwrap();
            let mut trace = Vec::new();
            e.train_traced(&d.x, &d.y, |r| {
                trace.push(serde_json::to_string(r).unwrap());
                Ok(())
            })
            .unwrap();
            (e.to_json().unwrap(), trace, e.predict_batch(&d.x).unwrap())
        };
        prop_assert_eq!(run(), run());
    }
}

/// Feedback bookkeeping: confidence is the plain sum of F+ and -F- terms.
#[test]
fn confidence_is_the_feedback_sum() {
    for (f_plus, f_minus) in [(1.0, 0.5), (1.0, 2.0), (0.25, 0.75)] {
        let cfg = EngineConfig { f_plus, f_minus, alpha: 0.1, ..EngineConfig64::default() };
        let region = Hypercube::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let mut agent =
            ContextAgent::new(0, region, LinearParams::new(ModelKind::PaI).build(2).unwrap(), 0).unwrap();
        let mut expected = 0.0;
        for i in 0..200u32 {
            let correct = (i * 7919) % 5 < 3;
            agent.apply_feedback(correct, &[0.0, 0.0], u8::from(correct), &cfg).unwrap();
            expected += if correct { f_plus } else { -f_minus };
        }
        assert_eq!(agent.confidence, expected);
        assert_eq!(agent.n_correct + agent.n_wrong, 200);
    }
}

#[test]
fn conflict_and_competition_events_are_reported() {
    let d = data(DatasetKind::Moons, 3);
    let mut e: Engine64 = Engine::new(config(0.5, Some(0.2), false, 0.2, 1.0, 1), LinearParams::new(ModelKind::PaI), 2).unwrap();
    let mut kinds = HashSet::new();
    e.train_traced(&d.x, &d.y, |r| {
        for ev in &r.ncs_events {
            kinds.insert((ev.kind, ev.resolution));
        }
        Ok(())
    })
    .unwrap();
    assert!(kinds.contains(&(NcsKind::Incompetence, Resolution::Create)));
    assert!(kinds.contains(&(NcsKind::Conflict, Resolution::Push)));
    assert!(kinds.iter().any(|(k, _)| *k == NcsKind::Competition));
}

#[test]
fn single_precision_engine_runs() {
    let d: Dataset<f32> = GeneratorSpec::reference(DatasetKind::Circles, 100, 0).generate().unwrap();
    let mut e = Engine::new(EngineConfig::<f32>::default(), LinearParams::new(ModelKind::PaIi), 2).unwrap();
    e.train(&d.x, &d.y).unwrap();
    let hits = e.predict_batch(&d.x).unwrap().iter().zip(&d.y).filter(|(a, b)| a == b).count();
    assert!(hits >= 70, "training accuracy {hits}/100");
}
