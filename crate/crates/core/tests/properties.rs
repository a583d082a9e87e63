use mpmab::cli::{parse_config, AdversaryConfig, AttackSetting, ExperimentConfig};
use mpmab::codec::{e_decode, e_encode, r_decode_index, r_encode_index, z_receive, BitString};
use mpmab::env::{global_attackability, local_attackability, regret, ActionProfile, LossMatrix};
use mpmab::env::{burst_adversary, AttackabilityProfile, BurstSpec};
use mpmab::harness::{
    monte_carlo, run_episode, run_seeds, theory_bound, write_aggregate_csv, write_runs_csv, AdversarySpec, BoundModel,
    MonteCarloSpec, RunSeeds, TraceLevel,
};
use mpmab::protocol::{update_period, EstimateGrid, Protocol, ProtocolSettings, BETA_FLOOR};
use mpmab::selector::{elementary_symmetric, log_elementary_symmetric, marginals, MetaArm, WeightVector};
use proptest::prelude::*;

fn loss_matrix(max_arms: usize, max_t: usize) -> impl Strategy<Value = LossMatrix> {
    (2..=max_arms, 1..=max_t).prop_flat_map(|(k, t)| {
        // a quarter of the entries are exact ones so runs of attacks show up
        prop::collection::vec(prop_oneof![3 => 0.0..1.0f64, 1 => Just(1.0)], k * t)
            .prop_map(move |v| LossMatrix::new(k, t, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn z_channel_never_clears_a_one(sent in prop::collection::vec(any::<bool>(), 0..64), seed in any::<u64>()) {
        let attacks: Vec<bool> = (0..sent.len()).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let got = BitString::new(sent.clone()).through_channel(&attacks).unwrap();
        for ((&s, &a), &r) in sent.iter().zip(&attacks).zip(got.bits()) {
            prop_assert_eq!(r, s || a);
            prop_assert_eq!(r, z_receive(s, a));
        }
    }

    #[test]
    fn one_hot_keeps_the_sent_index(
        k in 1usize..12, h in 1usize..6, arm_pick in any::<prop::sample::Index>(), seed in any::<u64>(),
    ) {
        let arm = arm_pick.index(k) + 1;
        let word = e_encode(arm, k, h).unwrap();
        prop_assert_eq!(word.weight(), h);
        prop_assert_eq!(e_decode(word.bits(), k, h).unwrap(), vec![arm]);
        let mut rng = seed;
        let attacks: Vec<bool> = (0..word.len()).map(|_| {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            rng >> 61 == 0
        }).collect();
        let decoded = e_decode(word.through_channel(&attacks).unwrap().bits(), k, h).unwrap();
        prop_assert!(decoded.contains(&arm));
    }

    #[test]
    fn one_hot_flags_exactly_the_covered_blocks(k in 2usize..7, h in 1usize..4, arm_pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let arm = arm_pick.index(k) + 1;
        let word = e_encode(arm, k, h).unwrap();
        let mut rng = seed;
        let attacks: Vec<bool> = (0..word.len()).map(|_| {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            rng >> 62 != 0
        }).collect();
        let set = e_decode(word.through_channel(&attacks).unwrap().bits(), k, h).unwrap();
        let covered = (1..=k).filter(|&b| b != arm && attacks[(b - 1) * h..b * h].iter().all(|&a| a)).count();
        prop_assert_eq!(set.len() > 1, covered > 0);
        prop_assert_eq!(set.len(), covered + 1);
    }

    #[test]
    fn binary_index_roundtrip(k in 1usize..40, h in 1usize..5, arm_pick in any::<prop::sample::Index>()) {
        let arm = arm_pick.index(k) + 1;
        let word = r_encode_index(arm, k, h).unwrap();
        prop_assert_eq!(r_decode_index(word.bits(), k, h).unwrap(), arm);
    }

    #[test]
    fn marginals_sum_to_m(log_w in prop::collection::vec(-30.0..30.0f64, 2..12), m_pick in any::<prop::sample::Index>()) {
        let m = m_pick.index(log_w.len()) + 1;
        let w = WeightVector::from_log_weights(log_w).unwrap();
        let p = marginals(&w, m).unwrap();
        for &q in &p {
            prop_assert!((-1e-12..=1.0 + 1e-9).contains(&q));
        }
        prop_assert!((p.iter().sum::<f64>() - m as f64).abs() < 1e-8);
    }

    #[test]
    fn probabilities_ignore_a_common_shift(
        log_w in prop::collection::vec(-50.0..50.0f64, 3..9), shift in -1e3..1e3f64, pick in any::<prop::sample::Index>(),
    ) {
        let k = log_w.len();
        let subset = MetaArm::new(vec![1, pick.index(k - 1) + 2], k).unwrap();
        let a = WeightVector::from_log_weights(log_w.clone()).unwrap();
        let b = WeightVector::from_log_weights(log_w.iter().map(|x| x + shift).collect()).unwrap();
        prop_assert!((a.log_probability(&subset).unwrap() - b.log_probability(&subset).unwrap()).abs() < 1e-9);
        for (x, y) in marginals(&a, 2).unwrap().iter().zip(marginals(&b, 2).unwrap()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn huge_estimate_spread_stays_normalized(est in prop::collection::vec(0.0..1e6f64, 4..12), eta in 1e-4..1.0f64) {
        let w = WeightVector::from_log_weights(est.iter().map(|l| -eta * l).collect()).unwrap();
        let p = marginals(&w, 3).unwrap();
        prop_assert!(p.iter().all(|q| q.is_finite()));
        prop_assert!((p.iter().sum::<f64>() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn log_esp_matches_direct(w in prop::collection::vec(0.01..10.0f64, 1..10)) {
        let m = w.len();
        let direct = elementary_symmetric(&w, m).unwrap();
        let logs = log_elementary_symmetric(&w.iter().map(|x| x.ln()).collect::<Vec<_>>(), m);
        for (d, l) in direct.iter().zip(&logs) {
            prop_assert!((l.exp() - d).abs() <= 1e-9 * d.max(1.0));
        }
    }

    #[test]
    fn fixed_profiles_have_nonnegative_regret(
        loss in loss_matrix(6, 40), seed in any::<u64>(), m_pick in any::<prop::sample::Index>(),
    ) {
        // the comparator is the best fixed allocation, so any fixed profile (shared
        // arms included) is at least as costly; switching sequences may beat it
        let (k, t) = (loss.num_arms(), loss.horizon());
        let m = m_pick.index(k) + 1;
        let mut s = seed;
        let profile = ActionProfile::new((0..m).map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) as usize % k + 1
        }).collect());
        let checkpoints: Vec<usize> = (1..=t).collect();
        let r = regret(&loss, &vec![profile; t], m, &checkpoints).unwrap();
        prop_assert!(r.iter().all(|&x| x >= -1e-9));

        let cum = loss.cumulative(t);
        let mut order: Vec<usize> = (1..=k).collect();
        order.sort_by(|&a, &b| cum[a - 1].total_cmp(&cum[b - 1]));
        let best = ActionProfile::new(order[..m].to_vec());
        let r = regret(&loss, &vec![best; t], m, &[t]).unwrap();
        prop_assert!(r[0].abs() < 1e-9);
    }

    #[test]
    fn attackability_order(loss in loss_matrix(5, 60)) {
        prop_assert!(local_attackability(&loss) <= global_attackability(&loss));
        prop_assert!(global_attackability(&loss) <= loss.horizon());
    }

    #[test]
    fn loss_csv_roundtrip(loss in loss_matrix(5, 30)) {
        let mut buf = Vec::new();
        loss.write_csv(&mut buf).unwrap();
        prop_assert_eq!(LossMatrix::read_csv(&buf[..]).unwrap(), loss);
    }

    #[test]
    fn escalation_is_monotone_and_capped(base in 0.0..0.5f64, step in 0.005..0.3f64, flags in prop::collection::vec(any::<bool>(), 0..300)) {
        let grid = EstimateGrid { base, step };
        let mut level = 0;
        for f in flags {
            let next = grid.escalate(level, f);
            prop_assert!(next >= level);
            prop_assert!(grid.value(next) >= grid.value(level));
            prop_assert!(grid.value(next) <= 1.0);
            level = next;
        }
    }

    #[test]
    fn bounds_grow_with_t_m_k(
        model_pick in any::<prop::sample::Index>(), m in 1usize..20, k in 1usize..50,
        t in 2usize..10_000_000, attack in 0.0..=1.0f64,
    ) {
        let model = BoundModel::ALL[model_pick.index(BoundModel::ALL.len())];
        let b = theory_bound(model, m, k, t, attack, 0.01).unwrap();
        prop_assert!(b.is_finite() && b > 0.0);
        prop_assert!(theory_bound(model, m, k, t * 2, attack, 0.01).unwrap() >= b);
        prop_assert!(theory_bound(model, m + 1, k, t, attack, 0.01).unwrap() >= b);
        prop_assert!(theory_bound(model, m, k + 1, t, attack, 0.01).unwrap() >= b);
    }

    #[test]
    fn bounds_nondecreasing_in_attack(model_pick in any::<prop::sample::Index>(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let model = BoundModel::ALL[model_pick.index(BoundModel::ALL.len())];
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let at = |x| theory_bound(model, 4, 10, 100_000, x, 0.01).unwrap();
        prop_assert!(at(hi) >= at(lo) * (1.0 - 1e-12));
    }

    #[test]
    fn config_text_roundtrip(
        m in 2usize..6, extra in 0usize..6, runs in 1usize..50, seed in any::<u64>(),
        alpha in prop_oneof![Just(None), (0.0..=1.0f64).prop_map(Some)],
        changepoint in any::<bool>(), eps in 0.001..0.2f64,
    ) {
        // the default changepoint means fix K at 10
        let k = if changepoint { 10 } else { m + extra };
        let cfg = ExperimentConfig {
            players: m,
            num_arms: k,
            horizon: 20_000,
            runs,
            seed,
            protocols: vec![Protocol::AlphaUnaware, Protocol::ParallelExp3],
            alpha: alpha.map_or(AttackSetting::Auto, AttackSetting::Value),
            epsilon_step: eps,
            adversary: if changepoint { AdversaryConfig::default_changepoint() } else { AdversaryConfig::default_burst() },
            ..ExperimentConfig::default()
        };
        prop_assert!(cfg.validate().is_ok());
        prop_assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_slot_is_accounted_for(
        protocol_pick in any::<prop::sample::Index>(), seed in any::<u64>(), t in 50usize..3000, loss_seed in any::<u64>(),
    ) {
        let protocol = Protocol::ALL[protocol_pick.index(Protocol::ALL.len())];
        let (m, k) = (3, 5);
        let mut s = loss_seed;
        let values: Vec<f64> = (0..k * t).map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if s >> 60 == 0 { 1.0 } else { (s >> 11) as f64 / (1u64 << 53) as f64 }
        }).collect();
        let loss = LossMatrix::new(k, t, values).unwrap();
        let settings = ProtocolSettings::new(protocol).with_alpha(0.3).with_beta(0.5);
        let private: Vec<u64> = (0..m as u64).map(|i| seed ^ (i + 1)).collect();
        let trace = run_episode(&settings, &loss, m, seed, &private, TraceLevel::Actions).unwrap();
        prop_assert_eq!(trace.actions.len(), t);
        for &(c, e, open) in &trace.slot_accounting {
            prop_assert_eq!(c + e + open, t);
        }
        for a in &trace.actions {
            prop_assert!(a.arms.iter().all(|&x| (1..=k).contains(&x)));
        }
    }
}

fn bursty(k: usize, t: usize, burst_len: usize, n_bursts: usize, seed: u64) -> LossMatrix {
    let spec = BurstSpec { num_arms: k, horizon: t, c_low: 0.1, c_high: 0.8, l_high: 0.95, burst_len, n_bursts };
    burst_adversary(&spec, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn alpha_aware_players_stay_in_step(seed in any::<u64>(), burst_len in 1usize..12, n_bursts in 0usize..30) {
        let (m, k, t) = (3, 6, 4000);
        let loss = bursty(k, t, burst_len, n_bursts, seed);
        let alpha = AttackabilityProfile::of(&loss).alpha(t);
        let settings = ProtocolSettings::new(Protocol::AlphaAware).with_alpha(alpha);
        let seeds = RunSeeds::from_run_seed(seed);
        let tr = run_episode(&settings, &loss, m, seeds.shared, &seeds.private(m), TraceLevel::Full).unwrap();
        for slot in &tr.slots {
            let s0 = slot.snapshots[0];
            for s in &slot.snapshots[1..] {
                prop_assert_eq!((s.phase, s.kind, s.slot_in_phase), (s0.phase, s0.kind, s0.slot_in_phase), "slot {}", slot.t);
            }
        }
        prop_assert_eq!(tr.explore_collisions, 0);
        prop_assert_eq!(tr.decode_errors, 0);
    }

    #[test]
    fn beta_unaware_counters_follow_the_rules(seed in any::<u64>(), burst_len in 1usize..40, n_bursts in 0usize..60) {
        let (m, k, t) = (3, 5, 20_000);
        let loss = bursty(k, t, burst_len, n_bursts, seed);
        let settings = ProtocolSettings::new(Protocol::BetaUnaware).with_epsilon(0.05);
        let seeds = RunSeeds::from_run_seed(seed);
        let tr = run_episode(&settings, &loss, m, seeds.shared, &seeds.private(m), TraceLevel::Actions).unwrap();
        for agent in &tr.agents[1..] {
            let c = agent.as_coordinated().unwrap();
            // followers count (|S| - 1) * k_code per decoded assignment
            let expected: usize = c.records().iter().map(|r| r.decoded.len().saturating_sub(1) * r.params.k_code).sum();
            prop_assert_eq!(c.snapshot().attack_counter, expected);
        }
        // an update runs once the phase count since the last one reaches ceil(T^b / k)
        let leader = tr.agents[0].as_coordinated().unwrap();
        let mut last_update = 0;
        let mut estimate = BETA_FLOOR;
        for r in leader.records().iter().filter(|r| r.sync_rounds > 0) {
            prop_assert_eq!(r.phase - last_update, update_period(t, estimate, r.params.k_code));
            last_update = r.phase;
            estimate = r.estimate_after;
        }
    }

    #[test]
    fn equal_specs_write_equal_csvs(seed in any::<u64>(), protocol_pick in any::<prop::sample::Index>()) {
        let protocol = Protocol::ALL[protocol_pick.index(Protocol::ALL.len())];
        let spec = MonteCarloSpec {
            settings: ProtocolSettings::new(protocol).with_alpha(0.3).with_beta(0.5),
            adversary: AdversarySpec::Burst(BurstSpec { num_arms: 5, horizon: 3000, c_low: 0.2, c_high: 0.9, l_high: 0.9, burst_len: 8, n_bursts: 5 }),
            environment: "burst".into(),
            players: 3,
            seeds: run_seeds(seed, 4),
            checkpoints: vec![1000, 3000],
        };
        let csv = |spec: &MonteCarloSpec| {
            let rep = [monte_carlo(spec).unwrap()];
            let (mut a, mut b) = (Vec::new(), Vec::new());
            write_runs_csv(&rep, &mut a).unwrap();
            write_aggregate_csv(&rep, &mut b).unwrap();
            (a, b)
        };
        prop_assert_eq!(csv(&spec), csv(&spec.clone()));
    }
}
