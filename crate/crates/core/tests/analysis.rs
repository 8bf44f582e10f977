use noisesync_core::analysis::{
    circular_mean, circular_std_deg, lock_report, lock_report_default, peak_fwhm, phase_report,
    phase_report_window, wrap_deg, Spectrum, WindowKind,
};
use noisesync_core::model::build_network;
use noisesync_core::sim::{simulate, Direction, SwitchEvent};
use noisesync_core::{
    Error, Graph, NetworkSpec, NoiseSpec, OscillatorParams, SimConfig, State, Trace,
};
use proptest::prelude::*;

/// Trace carrying only switching events: a rise at every listed trough and
/// a fall halfway to the next one.
fn synthetic(troughs: &[Vec<f64>], t_end: f64) -> Trace {
    let n = troughs.len();
    let mut events = Vec::new();
    for (i, ts) in troughs.iter().enumerate() {
        for (k, &t) in ts.iter().enumerate() {
            events.push(SwitchEvent {
                oscillator: i,
                time: t,
                direction: Direction::Rise,
            });
            if let Some(next) = ts.get(k + 1) {
                events.push(SwitchEvent {
                    oscillator: i,
                    time: 0.5 * (t + next),
                    direction: Direction::Fall,
                });
            }
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    Trace {
        times: vec![0.0],
        v_samples: vec![vec![0.0]; n],
        s_samples: vec![vec![1]; n],
        events,
        noise_used: NoiseSpec::silent(),
        seed: 0,
        t_end,
        dt_out: t_end,
        final_state: State {
            t: t_end,
            v: vec![0.0; n],
            s: vec![1; n],
        },
    }
}

fn periodic(period: f64, offset: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| offset + k as f64 * period).collect()
}

const T: f64 = 220e-6;

#[test]
fn single_oscillator_locks_vacuously() {
    let net = NetworkSpec::new(vec![OscillatorParams::default()], vec![], vec![0.0], true).unwrap();
    let cfg = SimConfig::for_network(&net, 10e-3);
    let trace = simulate(&net, &NoiseSpec::silent(), &cfg, 0).unwrap();
    let r = lock_report_default(&trace).unwrap();
    assert!(r.locked);
    assert_eq!(r.max_rel_period_spread, 0.0);
    assert_eq!(r.phase_std_deg, 0.0);
    assert_eq!(phase_report(&trace, 0).unwrap().phases_deg, vec![0.0]);
}

#[test]
fn free_running_detuned_pair_unlocked() {
    let g = Graph::new(2, vec![]).unwrap();
    let net = build_network(
        &g,
        &OscillatorParams::default(),
        1e-12,
        1e-12,
        &[0.0, 0.02],
        true,
    )
    .unwrap();
    let cfg = SimConfig::for_network(&net, 20e-3);
    for seed in 0..5 {
        let r = lock_report_default(&simulate(&net, &NoiseSpec::silent(), &cfg, seed).unwrap())
            .unwrap();
        assert!(!r.locked);
        assert!(
            (r.max_rel_period_spread - 0.02).abs() < 2e-3,
            "{}",
            r.max_rel_period_spread
        );
    }
}

#[test]
fn half_period_shift_is_180() {
    let tr = synthetic(&[periodic(T, 0.0, 60), periodic(T, T / 2.0, 60)], 60.0 * T);
    let p = phase_report(&tr, 0).unwrap();
    assert_eq!(p.phases_deg[0], 0.0);
    assert!((p.phases_deg[1] - 180.0).abs() < 1.0, "{:?}", p.phases_deg);
    assert!((p.delta_t[1] - T / 2.0).abs() < T / 360.0);
    assert!((p.period_t - T).abs() < 1e-12);
    let same = synthetic(&[periodic(T, 0.0, 60), periodic(T, 0.0, 60)], 60.0 * T);
    assert_eq!(phase_report(&same, 0).unwrap().phases_deg, vec![0.0, 0.0]);
    assert!(lock_report_default(&same).unwrap().locked);
}

#[test]
fn small_lag_wraps_below_360() {
    let tr = synthetic(
        &[periodic(T, 0.0, 60), periodic(T, -0.01 * T, 60)],
        60.0 * T,
    );
    let p = phase_report(&tr, 0).unwrap();
    assert!((p.phases_deg[1] - 356.4).abs() < 1e-6, "{:?}", p.phases_deg);
    assert!(p.phases_deg.iter().all(|&x| (0.0..360.0).contains(&x)));
}

#[test]
fn frequency_mismatch_unlocks() {
    let tr = synthetic(
        &[periodic(T, 0.0, 60), periodic(T * 1.002, 0.3 * T, 60)],
        60.0 * T,
    );
    let r = lock_report_default(&tr).unwrap();
    assert!(!r.locked);
    assert!((r.max_rel_period_spread - 0.002 / 1.001).abs() < 1e-6);
}

#[test]
fn phase_jitter_unlocks() {
    // Alternating ±20° offsets: R = cos 20°, circular std = sqrt(−2 ln cos 20°).
    let b: Vec<f64> = (0..60)
        .map(|k| k as f64 * T + T / 2.0 + if k % 2 == 0 { 1.0 } else { -1.0 } * 20.0 / 360.0 * T)
        .collect();
    let tr = synthetic(&[periodic(T, 0.0, 60), b], 60.0 * T);
    let r = lock_report_default(&tr).unwrap();
    let expected = (-2.0 * 20f64.to_radians().cos().ln()).sqrt().to_degrees();
    assert!(
        (r.phase_std_deg - expected).abs() < 0.5,
        "{} vs {expected}",
        r.phase_std_deg
    );
    assert!(!r.locked);
}

#[test]
fn insufficient_troughs() {
    let tr = synthetic(&[periodic(T, 0.0, 60), periodic(T, 0.0, 12)], 60.0 * T);
    match lock_report_default(&tr) {
        Err(Error::InsufficientTroughs { oscillator: 1, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(phase_report(&tr, 0).is_err());
    assert!(phase_report(&synthetic(&[periodic(T, 0.0, 60)], 60.0 * T), 3).is_err());
}

#[test]
fn circular_statistics() {
    let (m, r) = circular_mean([350.0, 10.0]);
    assert!(m.abs() < 1e-9 || (m - 360.0).abs() < 1e-9);
    assert!((r - 10f64.to_radians().cos()).abs() < 1e-12);
    assert_eq!(circular_std_deg(1.0), 0.0);
    assert!(circular_std_deg(0.0).is_infinite());
    assert_eq!(wrap_deg(-90.0), 270.0);
    assert_eq!(wrap_deg(720.0), 0.0);
    assert!((0.0..360.0).contains(&wrap_deg(-1e-14)));
}

#[test]
fn lorentzian_fwhm() {
    let (f0, gamma) = (4500.0, 30.0);
    let freqs: Vec<f64> = (0..4000).map(|k| k as f64 * 2.5).collect();
    let power = freqs
        .iter()
        .map(|f| 1.0 / (1.0 + ((f - f0) / gamma).powi(2)))
        .collect();
    let spec = Spectrum {
        freqs,
        power,
        window_length: 0.4,
        window_kind: WindowKind::Rectangular,
    };
    let p = peak_fwhm(&spec).unwrap();
    assert_eq!(p.f_peak, f0);
    assert!((p.fwhm / (2.0 * gamma) - 1.0).abs() < 0.01, "{}", p.fwhm);
}

#[test]
fn peak_at_edge_rejected() {
    let spec = Spectrum {
        freqs: (0..10).map(f64::from).collect(),
        power: (0..10).map(f64::from).collect(),
        window_length: 1.0,
        window_kind: WindowKind::Hann,
    };
    assert!(matches!(peak_fwhm(&spec), Err(Error::PeakAtBoundary)));
}

#[test]
fn phase_window_start_invariance() {
    let g = Graph::new(2, vec![(0, 1)]).unwrap();
    let net = build_network(
        &g,
        &OscillatorParams::default(),
        10e-12,
        1e-12,
        &[0.0, 0.02],
        true,
    )
    .unwrap();
    let cfg = SimConfig::for_network(&net, 20e-3);
    let tr = simulate(&net, &NoiseSpec::silent(), &cfg, 1).unwrap();
    assert!(lock_report_default(&tr).unwrap().locked);
    let base = phase_report_window(&tr, 0, 0.5).unwrap().phases_deg[1];
    for frac in [0.3, 0.4, 0.45, 0.48] {
        let p = phase_report_window(&tr, 0, frac).unwrap().phases_deg[1];
        let d = wrap_deg(p - base + 180.0) - 180.0;
        assert!(d.abs() < 1.0, "window {frac}: {p} vs {base}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn constant_offset_recovered(frac in 0.0f64..1.0, period in 100e-6f64..400e-6) {
        let tr = synthetic(&[periodic(period, 0.0, 50), periodic(period, frac * period, 50)], 50.0 * period);
        let p = phase_report(&tr, 0).unwrap().phases_deg[1];
        let expected = frac * 360.0;
        let d = wrap_deg(p - expected + 180.0) - 180.0;
        prop_assert!(d.abs() < 1e-6, "{} vs {}", p, expected);
    }

    #[test]
    fn relabeling_preserves_verdict(
        periods in proptest::collection::vec(200e-6f64..240e-6, 3),
        offsets in proptest::collection::vec(0.0f64..1.0, 3),
        jitter in proptest::collection::vec(-5e-6f64..5e-6, 3 * 60),
        perm in Just([0usize, 1, 2]).prop_shuffle(),
    ) {
        let troughs: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..60).map(|k| k as f64 * periods[i] + offsets[i] * periods[i] + jitter[i * 60 + k]).collect())
            .collect();
        let t_end = 60.0 * 200e-6;
        let a = lock_report(&synthetic(&troughs, t_end), 0.5, 1e-3, 10.0).unwrap();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| troughs[i].clone()).collect();
        let b = lock_report(&synthetic(&permuted, t_end), 0.5, 1e-3, 10.0).unwrap();
        prop_assert_eq!(a.locked, b.locked);
        for (j, &i) in perm.iter().enumerate() {
            prop_assert_eq!(a.mean_period[i], b.mean_period[j]);
        }
        prop_assert!((a.max_rel_period_spread - b.max_rel_period_spread).abs() < 1e-12);
    }
}
