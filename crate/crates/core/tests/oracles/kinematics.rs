//! Analytic trajectories and a rotation-matrix feature implementation.

use std::f64::consts::PI;

use vrcomfort_core::kinematics::{self, kinematic_series, KinematicSeries, N_FEATURES};
use vrcomfort_core::simulator::{generate_motion, MotionKind, MotionProfile};
use vrcomfort_core::{HeadSample, Quat, TelemetryWindow, Vec3};

const UP: Vec3 = Vec3::new(0.0, 1.0, 0.0);

fn window(rate: f64, seconds: f64, pose: impl Fn(f64) -> (Vec3, Quat)) -> TelemetryWindow {
    let n = (seconds * rate).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let (p, q) = pose(t);
            HeadSample::new(t, p, q)
        })
        .collect();
    TelemetryWindow::uniform(samples, rate).unwrap()
}

/// Max interior error of `est` against `truth(t)`; `skip` samples are dropped
/// at each end. Returns (max abs error, max error relative to |truth|).
fn interior_error(t: &[f64], est: &[Vec3], skip: usize, truth: impl Fn(f64) -> Vec3) -> (f64, f64) {
    let mut abs: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for i in skip..est.len() - skip {
        let want = truth(t[i]);
        let err = (est[i] - want).norm();
        abs = abs.max(err);
        if want.norm() > 1e-9 {
            rel = rel.max(err / want.norm());
        } else {
            assert!(err < 1e-6, "t={} err={err} against zero truth", t[i]);
        }
    }
    (abs, rel)
}

fn series(rate: f64, pose: impl Fn(f64) -> (Vec3, Quat)) -> KinematicSeries {
    kinematic_series(&window(rate, 3.0, pose)).unwrap()
}

pub fn linear_position_gives_constant_velocity() {
    let v = Vec3::new(0.4, -0.2, 1.1);
    let s = series(72.0, |t| (Vec3::new(1.0, 1.6, 0.0) + v.scale(t), Quat::IDENTITY));
    let (_, rel) = interior_error(&s.t, &s.lin_vel, 1, |_| v);
    assert!(rel < 1e-9, "{rel}");
    interior_error(&s.t, &s.lin_acc, 2, |_| Vec3::ZERO);
    interior_error(&s.t, &s.lin_jerk, 3, |_| Vec3::ZERO);
}

pub fn quadratic_position_gives_exact_acceleration() {
    let a = Vec3::new(0.5, 0.0, -0.3);
    let v0 = Vec3::new(1.0, 0.2, 2.0);
    let s = series(72.0, |t| (v0.scale(t) + a.scale(0.5 * t * t), Quat::IDENTITY));
    let (_, rel_v) = interior_error(&s.t, &s.lin_vel, 1, |t| v0 + a.scale(t));
    let (_, rel_a) = interior_error(&s.t, &s.lin_acc, 2, |_| a);
    assert!(rel_v < 0.01, "velocity {rel_v}");
    assert!(rel_a < 0.02, "acceleration {rel_a}");
}

pub fn constant_yaw_rate() {
    let w = 1.3;
    let s = series(72.0, |t| (Vec3::ZERO, Quat::from_axis_angle(UP, w * t)));
    let (_, rel) = interior_error(&s.t, &s.ang_vel, 1, |_| UP.scale(w));
    assert!(rel < 1e-9, "{rel}");
    interior_error(&s.t, &s.ang_acc, 2, |_| Vec3::ZERO);
}

pub fn fast_yaw_across_double_cover() {
    // 6 rad/s crosses the quaternion double cover many times in 3 s
    let w = 6.0;
    let s = series(72.0, |t| (Vec3::ZERO, Quat::from_axis_angle(UP, w * t)));
    let (_, rel) = interior_error(&s.t, &s.ang_vel, 0, |_| UP.scale(w));
    assert!(rel < 1e-9, "{rel}");
}

fn sine_yaw(amp: f64, f: f64) -> impl Fn(f64) -> (Vec3, Quat) {
    move |t| (Vec3::ZERO, Quat::from_axis_angle(UP, amp * (2.0 * PI * f * t).sin()))
}

pub fn sinusoidal_yaw_within_tolerance() {
    let (amp, f) = (0.8, 0.7);
    let w = 2.0 * PI * f;
    let s = series(72.0, sine_yaw(amp, f));
    let (_, rel_w) = interior_error(&s.t, &s.ang_vel, 1, |t| UP.scale(amp * w * (w * t).cos()));
    let (_, rel_a) = interior_error(&s.t, &s.ang_acc, 2, |t| UP.scale(-amp * w * w * (w * t).sin()));
    assert!(rel_w < 0.01, "omega {rel_w}");
    assert!(rel_a < 0.02, "alpha {rel_a}");
}

pub fn sinusoidal_position_within_tolerance() {
    let (amp, f) = (0.3, 0.9);
    let w = 2.0 * PI * f;
    let s = series(72.0, |t| (Vec3::new(amp * (w * t).sin(), 0.0, 0.0), Quat::IDENTITY));
    let (_, rel_v) = interior_error(&s.t, &s.lin_vel, 1, |t| Vec3::new(amp * w * (w * t).cos(), 0.0, 0.0));
    let (_, rel_a) = interior_error(&s.t, &s.lin_acc, 2, |t| Vec3::new(-amp * w * w * (w * t).sin(), 0.0, 0.0));
    assert!(rel_v < 0.01, "velocity {rel_v}");
    assert!(rel_a < 0.02, "acceleration {rel_a}");
}

pub fn halving_dt_cuts_error_at_least_threefold() {
    let (amp, f) = (0.8, 0.7);
    let w = 2.0 * PI * f;
    let omega = |t: f64| UP.scale(amp * w * (w * t).cos());
    let alpha = |t: f64| UP.scale(-amp * w * w * (w * t).sin());
    let vel = |t: f64| Vec3::new(amp * w * (w * t).cos(), 0.0, 0.0);
    let pos = |t: f64| (Vec3::new(amp * (w * t).sin(), 0.0, 0.0), Quat::IDENTITY);

    let coarse = series(72.0, sine_yaw(amp, f));
    let fine = series(144.0, sine_yaw(amp, f));
    let ratio_w =
        interior_error(&coarse.t, &coarse.ang_vel, 1, omega).0 / interior_error(&fine.t, &fine.ang_vel, 1, omega).0;
    let ratio_a =
        interior_error(&coarse.t, &coarse.ang_acc, 2, alpha).0 / interior_error(&fine.t, &fine.ang_acc, 2, alpha).0;

    let coarse = series(72.0, pos);
    let fine = series(144.0, pos);
    let ratio_v =
        interior_error(&coarse.t, &coarse.lin_vel, 1, vel).0 / interior_error(&fine.t, &fine.lin_vel, 1, vel).0;

    for (name, r) in [("omega", ratio_w), ("alpha", ratio_a), ("velocity", ratio_v)] {
        assert!(r >= 3.0, "{name} ratio {r}");
    }
}

pub fn boundary_points_converge_too() {
    let (amp, f) = (0.8, 0.7);
    let w = 2.0 * PI * f;
    let omega = |t: f64| UP.scale(amp * w * (w * t).cos());
    let coarse = series(72.0, sine_yaw(amp, f));
    let fine = series(144.0, sine_yaw(amp, f));
    let ratio =
        interior_error(&coarse.t, &coarse.ang_vel, 0, omega).0 / interior_error(&fine.t, &fine.ang_vel, 0, omega).0;
    assert!(ratio >= 3.0, "{ratio}");
}

// Independent implementation: rotation matrices, matrix log, direct stencils
// on plain arrays, two-pass moments.

type M3 = [[f64; 3]; 3];

fn matrix(q: Quat) -> M3 {
    let (w, x, y, z) = (q.w, q.x, q.y, q.z);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn relative(a: &M3, b: &M3) -> M3 {
    // a^T b
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| a[k][i] * b[k][j]).sum();
        }
    }
    r
}

fn matrix_log(r: &M3) -> [f64; 3] {
    let v = [r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]];
    let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() / 2.0;
    let c = (r[0][0] + r[1][1] + r[2][2] - 1.0) / 2.0;
    let theta = s.atan2(c);
    let k = if s < 1e-12 { 0.5 } else { theta / (2.0 * s) };
    [v[0] * k, v[1] * k, v[2] * k]
}

fn diff(x: &[[f64; 3]], dt: f64) -> Vec<[f64; 3]> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut d = [0.0; 3];
            for c in 0..3 {
                d[c] = if i == 0 {
                    (-3.0 * x[0][c] + 4.0 * x[1][c] - x[2][c]) / (2.0 * dt)
                } else if i == n - 1 {
                    (3.0 * x[n - 1][c] - 4.0 * x[n - 2][c] + x[n - 3][c]) / (2.0 * dt)
                } else {
                    (x[i + 1][c] - x[i - 1][c]) / (2.0 * dt)
                };
            }
            d
        })
        .collect()
}

fn oracle_features(samples: &[HeadSample], dt: f64) -> [f64; N_FEATURES] {
    let n = samples.len();
    let pos: Vec<[f64; 3]> = samples.iter().map(|s| s.pos.0).collect();
    let mats: Vec<M3> = samples.iter().map(|s| matrix(s.quat)).collect();
    let rel = |k: usize, j: usize| matrix_log(&relative(&mats[k], &mats[j]));
    let omega: Vec<[f64; 3]> = (0..n)
        .map(|k| {
            let (a, b, sa, sb) = if k == 0 {
                (rel(0, 1), rel(0, 2), 4.0, -1.0)
            } else if k == n - 1 {
                (rel(n - 1, n - 3), rel(n - 1, n - 2), 1.0, -4.0)
            } else {
                (rel(k, k + 1), rel(k, k - 1), 1.0, -1.0)
            };
            [0, 1, 2].map(|c| (sa * a[c] + sb * b[c]) / (2.0 * dt))
        })
        .collect();
    let v = diff(&pos, dt);
    let a = diff(&v, dt);
    let j = diff(&a, dt);
    let al = diff(&omega, dt);
    let aj = diff(&al, dt);
    let mut out = [0.0; N_FEATURES];
    for (c, ch) in [v, a, j, omega, al, aj].iter().enumerate() {
        let mags: Vec<f64> = ch.iter().map(|u| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()).collect();
        let mean = mags.iter().sum::<f64>() / n as f64;
        let var = mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n as f64;
        out[3 * c] = mean;
        out[3 * c + 1] = var.sqrt();
        out[3 * c + 2] = mags.iter().cloned().fold(f64::MIN, f64::max);
    }
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn stress_window(seed: u64, offset: usize) -> Vec<HeadSample> {
    let motion = generate_motion(&MotionProfile::preset(MotionKind::Stress), seed).unwrap();
    motion[offset..offset + 216].to_vec()
}

pub fn features_match_independent_implementation() {
    for (seed, offset) in [(1, 0), (2, 1000), (3, 5000), (4, 8000)] {
        let samples = stress_window(seed, offset);
        let got = kinematics::features(&TelemetryWindow::uniform(samples.clone(), 72.0).unwrap()).unwrap();
        let want = oracle_features(&samples, 1.0 / 72.0);
        for f in 0..N_FEATURES {
            assert!(close(got.0[f], want[f], 1e-9), "seed {seed} feature {f}: {} vs {}", got.0[f], want[f]);
        }
    }
}

fn features_of(samples: Vec<HeadSample>) -> [f64; N_FEATURES] {
    kinematics::features(&TelemetryWindow::uniform(samples, 72.0).unwrap()).unwrap().0
}

pub fn time_shift_invariance() {
    let samples = stress_window(9, 300);
    let shifted: Vec<HeadSample> = samples.iter().map(|s| HeadSample::new(s.t + 1234.5, s.pos, s.quat)).collect();
    let (a, b) = (features_of(samples), features_of(shifted));
    for f in 0..N_FEATURES {
        assert!(close(a[f], b[f], 1e-9), "feature {f}");
    }
}

pub fn position_scaling_is_linear_and_leaves_angular_features() {
    let samples = stress_window(10, 2000);
    let k = 2.5;
    let scaled: Vec<HeadSample> = samples.iter().map(|s| HeadSample::new(s.t, s.pos.scale(k), s.quat)).collect();
    let (a, b) = (features_of(samples), features_of(scaled));
    for f in 0..9 {
        assert!(close(b[f], k * a[f], 1e-9), "linear feature {f}");
    }
    for f in 9..N_FEATURES {
        assert!(close(b[f], a[f], 1e-9), "angular feature {f}");
    }
}

pub fn world_rotation_invariance() {
    let samples = stress_window(11, 4000);
    let g = Quat::from_axis_angle(Vec3::new(1.0, 2.0, -0.5).scale(1.0 / 2.2913), 0.9);
    let turned: Vec<HeadSample> = samples.iter().map(|s| HeadSample::new(s.t, g.rotate(s.pos), g * s.quat)).collect();
    let (a, b) = (features_of(samples), features_of(turned));
    for f in 0..N_FEATURES {
        assert!(close(a[f], b[f], 1e-8), "feature {f}: {} vs {}", a[f], b[f]);
    }
}

pub fn quaternion_sign_flips_do_not_change_features() {
    let samples = stress_window(12, 100);
    let flipped: Vec<HeadSample> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| HeadSample::new(s.t, s.pos, if i % 3 == 0 { -s.quat } else { s.quat }))
        .collect();
    let (a, b) = (features_of(samples), features_of(flipped));
    for f in 0..N_FEATURES {
        assert!(close(a[f], b[f], 1e-12), "feature {f}");
    }
}

pub fn spin_peak_rate_is_pi() {
    let motion = generate_motion(&MotionProfile::preset(MotionKind::Spin), 0).unwrap();
    let win = TelemetryWindow::uniform(motion[..72 * 8].to_vec(), 72.0).unwrap();
    let omega = kinematics::angular_velocity(&win).unwrap();
    let peak = omega.iter().map(|w| w.norm()).fold(0.0, f64::max);
    assert!((peak - PI).abs() / PI < 0.02, "{peak}");
}

/// Analytic trajectories and the convergence check.
pub fn analytic_suite() {
    linear_position_gives_constant_velocity();
    quadratic_position_gives_exact_acceleration();
    constant_yaw_rate();
    fast_yaw_across_double_cover();
    sinusoidal_yaw_within_tolerance();
    sinusoidal_position_within_tolerance();
    halving_dt_cuts_error_at_least_threefold();
    boundary_points_converge_too();
    features_match_independent_implementation();
}
