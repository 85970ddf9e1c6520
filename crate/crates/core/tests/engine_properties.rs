use incusim::engine::{self, ActuatorOverride, Event, EventKind, SimConfig};
use incusim::output;
use incusim::plant;
use proptest::prelude::*;

fn ideal(duration: f64) -> SimConfig {
    let mut cfg = SimConfig::default().with_ideal_sensors();
    cfg.sim.duration = duration;
    cfg
}

#[test]
fn reruns_serialize_identically() {
    let mut cfg = SimConfig::default();
    cfg.sim.duration = 120.0;
    cfg.sim.seed = 99;
    let a = engine::run(&cfg).unwrap();
    let b = engine::run(&cfg).unwrap();
    assert_eq!(output::telemetry_csv(&a.telemetry), output::telemetry_csv(&b.telemetry));
    assert_eq!(output::summary_json(&a.summary), output::summary_json(&b.summary));

    cfg.sim.seed = 100;
    let c = engine::run(&cfg).unwrap();
    assert_ne!(output::telemetry_csv(&a.telemetry), output::telemetry_csv(&c.telemetry));
}

#[test]
fn halving_dt_barely_moves_the_final_state() {
    let mut cfg = SimConfig::default();
    cfg.sim.duration = 300.0;
    cfg.events = vec![
        Event { time: 100.0, kind: EventKind::DoorOpen { duration: 10.0, h_multiplier: 4.0, gas_mix_rate: 0.05 } },
        Event { time: 200.0, kind: EventKind::AmbientChange { new_t_ambient: 26.0 } },
    ];
    let coarse = engine::run(&cfg).unwrap();
    cfg.sim.dt /= 2.0;
    let fine = engine::run(&cfg).unwrap();
    let (a, b) = (coarse.telemetry.last().unwrap(), fine.telemetry.last().unwrap());
    assert!((a.t - b.t).abs() < 1e-9);
    assert!((a.t_true - b.t_true).abs() <= 1e-3 * b.t_true.abs(), "{} {}", a.t_true, b.t_true);
    assert!((a.f_true - b.f_true).abs() <= 1e-3 * b.f_true.abs(), "{} {}", a.f_true, b.f_true);
}

#[test]
fn capable_heater_always_settles() {
    let tau = plant::time_constant(&SimConfig::default().thermal).unwrap();
    for (power, ambient) in [(1.5, 23.0), (0.8, 23.0), (3.0, 15.0), (1.0, 30.0)] {
        let mut cfg = ideal(10.0 * tau);
        cfg.thermal.heater_power = power;
        cfg.thermal.t_ambient = ambient;
        cfg.sim.initial_t = ambient;
        let t_eff = plant::effective_forcing(&cfg.thermal, true).unwrap();
        assert!(t_eff > cfg.control.t_set + cfg.control.t_hyst);
        let out = engine::run(&cfg).unwrap();
        assert!(out.summary.t_settle.is_some(), "P = {power}, ambient = {ambient}");
    }
}

#[test]
fn forced_actuators_follow_closed_forms() {
    let mut cfg = ideal(120.0);
    cfg.gas.leak_rate = 0.0;
    let out = engine::run_with(&cfg, ActuatorOverride { heater: Some(false), valve: Some(true) }).unwrap();
    let q = plant::orifice_flow(&cfg.gas).unwrap();
    let k = q / cfg.gas.volume;
    for r in &out.telemetry {
        assert!((r.t_true - 23.0).abs() <= 1e-9 * 23.0);
        let analytic = 1.0 - (1.0 - 0.0004) * (-k * r.t).exp();
        assert!((r.f_true - analytic).abs() <= 1e-9 * analytic, "{} vs {}", r.f_true, analytic);
    }
    assert!((out.summary.co2_consumed - q * 120.0).abs() < 1e-12);
}

#[test]
fn temperature_stays_captured_in_band() {
    let mut cfg = ideal(600.0);
    cfg.control.min_dwell_on = 0.0;
    cfg.control.min_dwell_off = 0.0;
    let out = engine::run(&cfg).unwrap();
    let c = cfg.control;
    let p = cfg.thermal;
    let growth = -(-cfg.sim.dt / plant::time_constant(&p).unwrap()).exp_m1();
    let t_on = plant::effective_forcing(&p, true).unwrap();
    let bound = ((t_on - (c.t_set - c.t_hyst)) * growth).max(((c.t_set + c.t_hyst) - p.t_ambient) * growth);
    let entry = out
        .telemetry
        .iter()
        .position(|r| (r.t_true - c.t_set).abs() <= c.t_hyst)
        .unwrap();
    for r in &out.telemetry[entry..] {
        assert!((r.t_true - c.t_set).abs() <= c.t_hyst + bound + 1e-12, "t = {}: {}", r.t, r.t_true);
    }
}

#[test]
fn sweep_over_band_width_is_monotone() {
    let base = ideal(300.0);
    let rows = engine::sweep(&base, "control.t_hyst", &[0.1, 0.25, 0.5]).unwrap();
    let cycles: Vec<u64> = rows.iter().map(|r| r.metrics.heater_cycles).collect();
    assert!(cycles.windows(2).all(|w| w[0] >= w[1]), "{cycles:?}");
    for (row, v) in rows.iter().zip([0.1, 0.25, 0.5]) {
        let mut cfg = base.clone();
        cfg.control.t_hyst = v;
        assert_eq!(row.metrics, engine::run(&cfg).unwrap().summary);
    }
}

fn event_strategy() -> impl Strategy<Value = Event> {
    let time = 0.0..60.0f64;
    prop_oneof![
        (time.clone(), 10.0..35.0f64).prop_map(|(time, t)| Event { time, kind: EventKind::AmbientChange { new_t_ambient: t } }),
        (time.clone(), 0.0..20.0f64, 1.01..10.0f64, 0.0..0.5f64).prop_map(|(time, d, h, g)| Event {
            time,
            kind: EventKind::DoorOpen { duration: d, h_multiplier: h, gas_mix_rate: g }
        }),
        (time, 0.0..=1.0f64).prop_map(|(time, m)| Event { time, kind: EventKind::SupplyDrop { flow_multiplier: m } }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn co2_fraction_stays_physical(
        seed in any::<u64>(),
        initial_f in 0.0..0.3f64,
        events in proptest::collection::vec(event_strategy(), 0..4),
    ) {
        let mut cfg = SimConfig::default();
        cfg.sim.duration = 60.0;
        cfg.sim.seed = seed;
        cfg.sim.initial_f = initial_f;
        cfg.events = events;
        let out = engine::run(&cfg).unwrap();
        let floor = initial_f.min(cfg.gas.f_ambient);
        for r in &out.telemetry {
            prop_assert!(r.f_true <= 1.0 && r.f_true >= floor - 1e-15, "{}", r.f_true);
        }
        let s = out.summary;
        prop_assert!((0.0..=1.0).contains(&s.t_duty) && (0.0..=1.0).contains(&s.f_duty));
        prop_assert!(s.t_ripple >= 0.0 && s.f_ripple >= 0.0 && s.heater_energy >= 0.0 && s.co2_consumed >= 0.0);
    }
}
