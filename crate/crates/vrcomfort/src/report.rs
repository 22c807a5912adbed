//! Fixed-key `key = value` reports printed by the CLI.

use std::fmt::Write as _;

use vrcomfort_core::forest::{GridSearchResult, Metrics};
use vrcomfort_core::simulator::{Comparison, SessionSummary};

fn line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {value}");
}

fn f(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), f)
}

pub fn metrics(prefix: &str, m: &Metrics) -> String {
    let mut s = String::new();
    line(&mut s, &format!("{prefix}n"), m.n);
    line(&mut s, &format!("{prefix}mse"), f(m.mse));
    line(&mut s, &format!("{prefix}rmse"), f(m.rmse));
    line(&mut s, &format!("{prefix}mae"), f(m.mae));
    line(&mut s, &format!("{prefix}r2"), opt(m.r2));
    s
}

pub fn grid(r: &GridSearchResult) -> String {
    let mut s = String::new();
    for (i, c) in r.cells.iter().enumerate() {
        let p = &c.params;
        line(
            &mut s,
            &format!("grid.cell{i}"),
            format!(
                "n_trees={} max_depth={} min_samples_leaf={} mean_mse={}",
                p.n_trees,
                p.max_depth,
                p.min_samples_leaf,
                f(c.mean_mse)
            ),
        );
    }
    line(&mut s, "grid.best", r.best_index);
    s
}

pub fn summary(prefix: &str, m: &SessionSummary) -> String {
    let mut s = String::new();
    let k = |name: &str| format!("{prefix}{name}");
    line(&mut s, &k("ticks"), m.ticks);
    line(&mut s, &k("duration_s"), f(m.duration));
    line(&mut s, &k("latent_mean"), f(m.mean_latent));
    line(&mut s, &k("latent_max"), f(m.max_latent));
    line(&mut s, &k("latent_final"), f(m.final_latent));
    line(&mut s, &k("fps_min"), f(m.fps_min));
    line(&mut s, &k("fps_mean"), f(m.fps_mean));
    line(&mut s, &k("fps_violations"), m.fps_violations);
    line(&mut s, &k("fps_mean_post_escalation"), opt(m.fps_mean_post_escalation));
    line(&mut s, &k("adjustments"), m.adjustments);
    line(&mut s, &k("escalations"), m.escalations);
    line(&mut s, &k("fov_restricted_ticks"), m.restricted_ticks);
    line(&mut s, &k("fov_mean"), f(m.mean_fov));
    line(&mut s, &k("fov_min"), f(m.min_fov));
    line(&mut s, &k("ffr_max"), m.max_ffr);
    s
}

pub fn comparison(c: &Comparison) -> String {
    let mut s = summary("baseline.", &c.baseline);
    s.push_str(&summary("adaptive.", &c.adaptive));
    line(&mut s, "delta.latent_mean", f(c.delta_mean_latent));
    line(&mut s, "delta.latent_final", f(c.delta_final_latent));
    line(&mut s, "delta.latent_max", f(c.delta_max_latent));
    line(&mut s, "delta.fps_min", f(c.delta_fps_min));
    line(&mut s, "delta.fps_mean", f(c.delta_fps_mean));
    line(&mut s, "latent_final_reduction", opt(c.final_latent_reduction));
    s
}
