//! Decision rules restated independently of the controller.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use vrcomfort_core::controller::{apply, decide};
use vrcomfort_core::{Action, ComfortParams, Controller, ControllerConfig};

fn expected(score: f64, fps: f64, p: &ComfortParams, c: &ControllerConfig, low_for: f64) -> Action {
    let ffr_max = p.ffr_level == c.ffr_max;
    let fov_min = p.fov_deg <= c.fov_min;
    if score > c.score_threshold {
        if fps < c.fps_threshold && !ffr_max {
            Action::IncreaseFfr
        } else if fps >= c.fps_threshold && !fov_min {
            Action::ReduceFov
        } else if fps < c.fps_threshold && ffr_max && !fov_min {
            Action::ReduceFov
        } else if ffr_max && fov_min {
            Action::AtLimits
        } else {
            // fps fine, FOV exhausted, FFR left
            Action::IncreaseFfr
        }
    } else if score <= c.score_threshold - c.hysteresis && low_for >= c.relax_dwell_s && *p != c.defaults() {
        Action::Relax
    } else {
        Action::Hold
    }
}

pub fn cross_product_matches_rules() {
    let c = ControllerConfig::default();
    let (s, f, h) = (c.score_threshold, c.fps_threshold, c.hysteresis);
    let scores = [s - h - 1.0, s - 1.0, s + 1.0, 100.0];
    let fpss = [f - 10.0, f, f + 10.0];
    let ffrs = [0, 1, c.ffr_max - 1, c.ffr_max];
    let fovs = [c.fov_min, c.fov_min + c.fov_step, c.fov_max - c.fov_step, c.fov_max];
    let lows = [0.0, c.relax_dwell_s - 1.0, c.relax_dwell_s, c.relax_dwell_s + 3.0];
    let mut n = 0;
    for &score in &scores {
        for &fps in &fpss {
            for &ffr in &ffrs {
                for &fov in &fovs {
                    for &low in &lows {
                        let p = ComfortParams { ffr_level: ffr, fov_deg: fov };
                        let d = decide(score, fps, &p, &c, low);
                        let want = expected(score, fps, &p, &c, low);
                        assert_eq!(d.action, want, "score={score} fps={fps} ffr={ffr} fov={fov} low={low}");
                        assert_eq!((d.score, d.fps), (score, fps));
                        assert!(!d.reason.is_empty());
                        let next = apply(d.action, &p, &c);
                        assert!(next.within(&c));
                        match d.action {
                            Action::IncreaseFfr => assert_eq!(next.ffr_level, ffr + 1),
                            Action::ReduceFov => assert_eq!(next.fov_deg, fov - c.fov_step),
                            Action::Relax if fov < c.fov_max => {
                                assert_eq!((next.ffr_level, next.fov_deg), (ffr, fov + c.fov_step))
                            }
                            Action::Relax => assert_eq!(next.ffr_level, ffr - 1),
                            Action::Hold | Action::AtLimits => assert_eq!(next, p),
                        }
                        n += 1;
                    }
                }
            }
        }
    }
    assert_eq!(n, 4 * 3 * 4 * 4 * 4);
}

pub fn at_limits_on_step_twelve_for_any_fps_pattern() {
    let c = ControllerConfig::default();
    assert_eq!(c.escalation_steps(), 12);
    let patterns: [&dyn Fn(usize) -> f64; 4] =
        [&|_| 50.0, &|_| 90.0, &|i| if i % 2 == 0 { 50.0 } else { 90.0 }, &|i| if i < 6 { 90.0 } else { 40.0 }];
    for fps in patterns {
        let mut ctl = Controller::new(c).unwrap();
        let actions: Vec<Action> = (0..20).map(|i| ctl.step(i as f64, 90.0, fps(i)).1.action).collect();
        assert!(actions[..12].iter().all(|a| a.is_escalation()), "{actions:?}");
        assert!(actions[12..].iter().all(|&a| a == Action::AtLimits), "{actions:?}");
        assert_eq!(ctl.params(), ComfortParams { ffr_level: c.ffr_max, fov_deg: c.fov_min });
    }
}

#[derive(Debug, Clone, Copy)]
struct Tick {
    score: f64,
    fps: f64,
    gap: f64,
}

fn tick() -> impl Strategy<Value = Tick> {
    (
        prop_oneof![0.0f64..=100.0, Just(30.0), Just(25.0), Just(24.999), Just(30.001)],
        prop_oneof![20.0f64..=120.0, Just(65.0)],
        prop_oneof![Just(1.0), 0.01f64..6.0],
    )
        .prop_map(|(score, fps, gap)| Tick { score, fps, gap })
}

/// Random step sequences never leave the parameter bounds, move at most one
/// notch per step and only escalate on a high score.
pub fn random_sequences_respect_bounds(cases: u32) {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let result = runner.run(&proptest::collection::vec(tick(), 1..40), |ticks| {
        let c = ControllerConfig::default();
        let mut ctl = Controller::new(c).unwrap();
        let mut t = 0.0;
        let mut prev = ctl.params();
        for tk in ticks {
            t += tk.gap;
            let (p, d) = ctl.step(t, tk.score, tk.fps);
            prop_assert!(p.within(&c));
            let ffr_moves = (p.ffr_level as i32 - prev.ffr_level as i32).abs();
            let fov_moves = ((p.fov_deg - prev.fov_deg) / c.fov_step).abs();
            prop_assert!(ffr_moves + fov_moves as i32 <= 1);
            if d.action.is_escalation() {
                prop_assert!(tk.score > c.score_threshold);
            }
            if d.action == Action::Relax {
                prop_assert!(tk.score <= c.score_threshold - c.hysteresis);
                prop_assert!(prev != c.defaults());
            }
            prop_assert_eq!(d.action == Action::Hold || d.action == Action::AtLimits, p == prev);
            prev = p;
        }
        Ok(())
    });
    if let Err(e) = result {
        panic!("{e}");
    }
}
