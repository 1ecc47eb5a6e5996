//! Plain-text report and transformed-config rendering.

use std::fmt::{Display, Write as _};

use evodyn::io::fmt_float;
use evodyn::TransformedGame;

#[derive(Debug, Default, Clone)]
pub struct Stage {
    name: String,
    lines: Vec<(String, String)>,
}

impl Stage {
    pub fn push(&mut self, key: &str, value: impl Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }
}

/// `[stage]` headers followed by `key: value` lines.
#[derive(Debug, Default, Clone)]
pub struct Report {
    pub preamble: String,
    stages: Vec<Stage>,
}

impl Report {
    pub fn stage(&mut self, name: &str) -> &mut Stage {
        self.stages.push(Stage {
            name: name.to_string(),
            lines: Vec::new(),
        });
        self.stages.last_mut().expect("just pushed")
    }

    pub fn render(&self) -> String {
        let mut out = self.preamble.clone();
        for s in &self.stages {
            let _ = writeln!(out, "\n[{}]", s.name);
            for (k, v) in &s.lines {
                let _ = writeln!(out, "{k}: {v}");
            }
        }
        out
    }
}

fn row(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(fmt_float)
        .collect::<Vec<_>>()
        .join(", ")
}

/// The derived games as a config the runner accepts again. Payoffs and rates
/// are frozen at each base population's fill state.
pub fn transformed_config(games: &[TransformedGame], sizes: Option<&[u64]>) -> String {
    let mut strategies = Vec::new();
    let mut masses = Vec::new();
    let mut payoff = Vec::new();
    let mut rates = Vec::new();
    let mut n = Vec::new();
    let mut lineage = String::new();
    let mut derived = String::new();
    let mut next = 1;
    for tg in games {
        let p = tg.base_population();
        let fill = tg.fill_state();
        let blocks = tg
            .derived_rates(fill)
            .expect("fill state lies on the base state space");
        let payoffs = tg.derived_payoffs(fill);
        let summary = tg.lineage_summary();
        let _ = writeln!(
            lineage,
            "population{} = {}",
            p + 1,
            if summary.is_empty() {
                "pass-through"
            } else {
                &summary
            }
        );
        for (d, dp) in tg.populations().iter().enumerate() {
            strategies.push(dp.arity().to_string());
            masses.push(fmt_float(tg.mass()));
            payoff.extend(payoffs[d].as_slice().iter().copied());
            for i in 0..blocks[d].dim() {
                rates.push(row(blocks[d].row(i).iter().copied()));
            }
            if let Some(s) = sizes {
                n.push(s[p].to_string());
            }
            let _ = writeln!(
                derived,
                "population{next} = base {} strategies {}",
                p + 1,
                dp.labels(tg.base_arity()).join(" | ")
            );
            next += 1;
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "[game]\ntype = table-payoff");
    let _ = writeln!(out, "populations = {}", strategies.len());
    let _ = writeln!(out, "strategies = {}", strategies.join(", "));
    let _ = writeln!(out, "masses = {}", masses.join(", "));
    let _ = writeln!(out, "payoff =\n{}", row(payoff));
    let _ = writeln!(out, "\n[protocol]\nkind = table\nrates =");
    for r in rates {
        let _ = writeln!(out, "{r}");
    }
    if !n.is_empty() {
        let _ = writeln!(out, "\n[run]\nN = {}", n.join(", "));
    }
    let _ = write!(out, "\n[lineage]\n{lineage}\n[derived]\n{derived}");
    out
}
