//! Plain-text CSV renderings (header row, LF endings, 17 significant digits).

use std::fmt::Write;

use crate::chain::Path;
use crate::dynamics::Trajectory;
use crate::table::StationaryTable;

/// Round-trippable scientific notation.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// `c;c;c|c;c` with `|` between populations.
pub fn fmt_counts(counts: &[u32], strategy_counts: &[usize]) -> String {
    let mut out = String::new();
    let mut at = 0;
    for (p, &n) in strategy_counts.iter().enumerate() {
        if p > 0 {
            out.push('|');
        }
        let part: Vec<String> = counts[at..at + n].iter().map(u32::to_string).collect();
        out.push_str(&part.join(";"));
        at += n;
    }
    out
}

pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let width = trajectory.states.first().map_or(0, |s| s.flat().len());
    let mut out = String::from("t");
    for i in 1..=width {
        let _ = write!(out, ",x_{i}");
    }
    out.push('\n');
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        out.push_str(&fmt_float(*t));
        for v in s.flat() {
            out.push(',');
            out.push_str(&fmt_float(v));
        }
        out.push('\n');
    }
    out
}

pub fn table_csv(table: &StationaryTable) -> String {
    let grid = table.grid();
    let tag = table.provenance().to_string();
    let mut out = String::from("state_counts,probability,provenance\n");
    for (counts, &p) in grid.iter().zip(table.probabilities()) {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_counts(counts, grid.strategy_counts()),
            fmt_float(p),
            tag
        );
    }
    out
}

pub fn path_csv(path: &Path, strategy_counts: &[usize]) -> String {
    let mut out = String::from("t,state_counts\n");
    for (t, counts) in path.iter() {
        let _ = writeln!(
            out,
            "{},{}",
            fmt_float(t),
            fmt_counts(counts, strategy_counts)
        );
    }
    out
}

/// Path sampled at `0, dt, 2 dt, ..., T`.
pub fn sampled_path_csv(path: &Path, strategy_counts: &[usize], dt: f64) -> String {
    let mut out = String::from("t,state_counts\n");
    let steps = (path.horizon / dt + 1e-9).floor() as usize;
    for s in 0..=steps {
        let t = s as f64 * dt;
        let _ = writeln!(
            out,
            "{},{}",
            fmt_float(t),
            fmt_counts(path.state_at(t), strategy_counts)
        );
    }
    out
}
