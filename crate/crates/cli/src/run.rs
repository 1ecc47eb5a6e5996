//! Command dispatch. Every command computes its artifacts in memory; the
//! caller writes them only after the whole command succeeded.

use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use evodyn::chain::{
    build_generator, check_detailed_balance, deviation_vs_ode, exact_stationary, simulate_ensemble,
    OnTheFly, StateGrid, DEFAULT_GRID_LIMIT,
};
use evodyn::game::round_to_lattice;
use evodyn::io::{fmt_float, path_csv, sampled_path_csv, table_csv, trajectory_csv};
use evodyn::protocol::sample_states;
use evodyn::stationary::{self, compare, marginal, transformed_marginals, Variant};
use evodyn::transform::{decompose, transform_population, FStar, TransformedGame};
use evodyn::{
    integrate_mean_dynamic, validate_hypotheses, ExecMode, PopulationGame, Provenance,
    RevisionProtocol, StationaryTable, Trajectory,
};

use crate::config::ExperimentConfig;
use crate::report::{transformed_config, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    MeanDynamic,
    Simulate,
    ExactStationary,
    Transform,
    Predict,
    Compare,
    Experiment,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::MeanDynamic => "mean-dynamic",
            Command::Simulate => "simulate",
            Command::ExactStationary => "exact-stationary",
            Command::Transform => "transform",
            Command::Predict => "predict",
            Command::Compare => "compare",
            Command::Experiment => "experiment",
        }
    }
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub factor: Option<Variant>,
    pub orientation: Option<Variant>,
    pub fstar: Option<FStar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub artifacts: Vec<Artifact>,
    pub report: String,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    command: Command,
    seeds: Vec<u64>,
    factor: Variant,
    orientation: Variant,
    fstar: FStar,
    game: PopulationGame,
    protocol: RevisionProtocol,
    report: Report,
    artifacts: Vec<Artifact>,
}

/// Cached intermediate results shared by the stages of `experiment`.
#[derive(Default)]
struct Cache {
    exact: Option<(evodyn::FiniteChain, StationaryTable)>,
    transformed: Option<Vec<TransformedGame>>,
    predicted: Option<StationaryTable>,
}

pub fn execute(command: Command, cfg: &ExperimentConfig, overrides: &Overrides) -> Result<Outcome> {
    let game = cfg.build_game().context("building the game")?;
    let mut ctx = Ctx {
        cfg,
        command,
        seeds: overrides
            .seeds
            .clone()
            .unwrap_or_else(|| cfg.run.seeds.clone()),
        factor: overrides.factor.unwrap_or(cfg.run.factor),
        orientation: overrides.orientation.unwrap_or(cfg.run.orientation),
        fstar: overrides.fstar.unwrap_or(cfg.run.fstar),
        protocol: cfg.build_protocol(),
        game,
        report: Report::default(),
        artifacts: Vec::new(),
    };
    let header = ctx.header(None);
    ctx.report.preamble = header;
    let mut cache = Cache::default();
    let mut exit_code = 0;
    let hypotheses_ok = ctx.validate()?;
    match command {
        Command::Validate => {
            if !hypotheses_ok {
                exit_code = 1;
            }
        }
        Command::MeanDynamic => {
            ctx.mean_dynamic()?;
        }
        Command::Simulate => ctx.simulate()?,
        Command::ExactStationary => {
            ctx.exact(&mut cache)?;
        }
        Command::Transform => ctx.transform(&mut cache)?,
        Command::Predict => ctx.predict(&mut cache)?,
        Command::Compare => ctx.compare(&mut cache)?,
        Command::Experiment => {
            if ctx.cfg.run.horizon.is_some() {
                ctx.mean_dynamic()?;
                if !ctx.seeds.is_empty() && ctx.cfg.run.sizes.is_some() {
                    ctx.simulate()?;
                }
            }
            ctx.exact(&mut cache)?;
            ctx.transform(&mut cache)?;
            ctx.predict(&mut cache)?;
            ctx.compare(&mut cache)?;
            ctx.balance(&mut cache)?;
        }
    }
    let report = ctx.report.render();
    let wants = |f: &str| ctx.cfg.output.formats.iter().any(|x| x == f);
    let mut artifacts: Vec<Artifact> = if wants("csv") {
        std::mem::take(&mut ctx.artifacts)
    } else {
        ctx.artifacts
            .drain(..)
            .filter(|a| !a.name.ends_with(".csv"))
            .collect()
    };
    if wants("report") {
        artifacts.push(Artifact {
            name: "report.txt".into(),
            contents: report.clone(),
        });
    }
    Ok(Outcome {
        exit_code,
        artifacts,
        report,
    })
}

impl Ctx<'_> {
    fn header(&self, seed: Option<String>) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("command", self.command.name().to_string()),
            ("config_sha256", self.cfg.hash.clone()),
            ("seed", seed.unwrap_or_else(|| "none".into())),
            ("variant_factor", self.factor.to_string()),
            ("variant_orientation", self.orientation.to_string()),
            ("fstar", self.fstar.to_string()),
        ] {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }

    fn table_artifact(&mut self, name: &str, table: &StationaryTable, seed: Option<String>) {
        let mut contents = self.header(seed);
        for (k, v) in &table.metadata {
            contents.push_str(&format!("# {k}: {v}\n"));
        }
        contents.push_str(&table_csv(table));
        self.push(name, contents);
    }

    fn push(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact {
            name: name.into(),
            contents,
        });
    }

    fn sizes(&self) -> Result<Vec<u64>> {
        self.cfg
            .run
            .sizes
            .clone()
            .context("this command needs N in the [run] section")
    }

    fn horizon(&self) -> Result<f64> {
        self.cfg
            .run
            .horizon
            .context("this command needs horizon in the [run] section")
    }

    /// Hypothesis check; also fixes the support floor when the config omits it.
    fn validate(&mut self) -> Result<bool> {
        let resolution = self
            .cfg
            .run
            .sizes
            .as_ref()
            .map_or(12, |s| s.iter().copied().max().unwrap_or(12));
        let seed = self.seeds.first().copied().unwrap_or(0);
        let (samples, exhaustive) = sample_states(&self.game, resolution, seed);
        let mut report = validate_hypotheses(&self.game, &self.protocol, &samples, exhaustive)?;
        if self.cfg.protocol.support_floor.is_none() {
            let floor = report.min_rate.max(0.0);
            self.protocol = self.protocol.clone().with_support_floor(floor);
            report = validate_hypotheses(&self.game, &self.protocol, &samples, exhaustive)?;
        }
        let ok = report.symmetric && report.fully_supported;
        let floor_source = if self.cfg.protocol.support_floor.is_some() {
            "config"
        } else {
            "sampled minimum rate"
        };
        let r = self.report.stage("validate");
        r.push("protocol", self.protocol.kind().tag());
        r.push("symmetric", report.symmetric);
        r.push("fully_supported", report.fully_supported);
        r.push("max_asymmetry", fmt_float(report.max_asymmetry));
        r.push("min_rate", fmt_float(report.min_rate));
        r.push("support_floor", fmt_float(report.support_floor));
        r.push("support_floor_source", floor_source);
        r.push("samples", report.samples);
        r.push("exhaustive", report.exhaustive);
        r.push("sample_resolution", resolution);
        Ok(ok)
    }

    fn mean_dynamic(&mut self) -> Result<Trajectory> {
        let horizon = self.horizon()?;
        let x0 = self.cfg.initial_state(&self.game);
        let tr = integrate_mean_dynamic(&self.game, &self.protocol, &x0, horizon, self.cfg.run.dt)?;
        let contents = self.header(None) + &trajectory_csv(&tr);
        self.push("trajectory.csv", contents);
        let drift = tr.max_mass_drift(self.game.masses());
        let r = self.report.stage("mean-dynamic");
        r.push("horizon", fmt_float(horizon));
        r.push("dt", fmt_float(tr.dt));
        r.push("points", tr.len());
        r.push("max_mass_drift", fmt_float(drift));
        r.push("clamp_events", tr.clamp_events.len());
        r.push(
            "final_state",
            tr.last()
                .flat()
                .iter()
                .map(|v| fmt_float(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
        Ok(tr)
    }

    fn simulate(&mut self) -> Result<()> {
        let sizes = self.sizes()?;
        let horizon = self.horizon()?;
        if self.seeds.is_empty() {
            bail!("simulate needs a nonempty seed list (seeds in [run] or --seed-override)");
        }
        let totals: Vec<u64> = sizes
            .iter()
            .zip(self.game.masses())
            .map(|(&n, &m)| (n as f64 * m).round() as u64)
            .collect();
        let x0 = self.cfg.initial_state(&self.game);
        self.game.check_state(&x0).context("initial state x0")?;
        let start: Vec<u32> = round_to_lattice(&x0, &totals, &sizes)
            .counts
            .into_iter()
            .flatten()
            .map(|c| c as u32)
            .collect();
        let src = OnTheFly {
            game: &self.game,
            protocol: &self.protocol,
            sizes: sizes.clone(),
        };
        let paths = simulate_ensemble(&src, &start, horizon, &self.seeds, ExecMode::Auto)?;
        let trajectory =
            integrate_mean_dynamic(&self.game, &self.protocol, &x0, horizon, self.cfg.run.dt).ok();
        let grid = StateGrid::for_game(&self.game, &sizes, DEFAULT_GRID_LIMIT)
            .ok()
            .map(Arc::new);
        let burn_in = self.cfg.run.burn_in.unwrap_or(horizon / 10.0);
        let mut pooled: Option<Vec<f64>> = None;
        let mut stage: Vec<(String, String)> = vec![
            ("seeds".into(), join(&self.seeds)),
            ("rng".into(), evodyn::chain::simulate::RNG_NAME.into()),
            ("burn_in".into(), fmt_float(burn_in)),
        ];
        let strategy_counts = self.game.strategy_counts().to_vec();
        let mut within = 0;
        for path in &paths {
            let seed = path.seed;
            let csv = match self.cfg.run.sample_time {
                Some(dt) => sampled_path_csv(path, &strategy_counts, dt),
                None => path_csv(path, &strategy_counts),
            };
            let contents = self.header(Some(seed.to_string())) + &csv;
            self.push(&format!("path_seed{seed}.csv"), contents);
            stage.push((format!("events_seed{seed}"), path.num_events().to_string()));
            if let Some(tr) = &trajectory {
                let d = deviation_vs_ode(path, tr)?;
                if d < 0.1 {
                    within += 1;
                }
                stage.push((format!("sup_deviation_seed{seed}"), fmt_float(d)));
            }
            if let Some(grid) = &grid {
                let occ = path.occupancy(grid, burn_in)?;
                let acc = pooled.get_or_insert_with(|| vec![0.0; grid.len()]);
                for (a, p) in acc.iter_mut().zip(occ.probabilities()) {
                    *a += p;
                }
            }
        }
        if trajectory.is_some() {
            stage.push((
                "runs_with_sup_deviation_below_0.1".into(),
                within.to_string(),
            ));
        }
        if let (Some(grid), Some(weights)) = (grid, pooled) {
            let table = StationaryTable::from_weights(grid, weights, Provenance::Empirical)?
                .with_meta("rng", evodyn::chain::simulate::RNG_NAME)
                .with_meta("burn_in", fmt_float(burn_in));
            self.table_artifact("occupancy.csv", &table, Some(join(&self.seeds)));
        } else {
            stage.push(("occupancy".into(), "skipped (grid too large)".into()));
        }
        let r = self.report.stage("simulate");
        for (k, v) in stage {
            r.push(&k, v);
        }
        Ok(())
    }

    fn exact(&mut self, cache: &mut Cache) -> Result<()> {
        if cache.exact.is_some() {
            return Ok(());
        }
        let sizes = self.sizes()?;
        let chain = build_generator(&self.game, &self.protocol, &sizes)?;
        let table = exact_stationary(&chain)?;
        self.table_artifact("exact.csv", &table, None);
        let r = self.report.stage("exact-stationary");
        r.push("N", join(&sizes));
        r.push("states", chain.num_states());
        r.push("transitions", chain.num_transitions());
        for (k, v) in &table.metadata {
            r.push(k, v);
        }
        cache.exact = Some((chain, table));
        Ok(())
    }

    fn transformed(&mut self, cache: &mut Cache) -> Result<Vec<TransformedGame>> {
        if let Some(t) = &cache.transformed {
            return Ok(t.clone());
        }
        let m = self.cfg.target_arity;
        let t: Vec<TransformedGame> = if m == 2 || self.command != Command::Transform {
            decompose(&self.game, &self.protocol)?
        } else {
            (0..self.game.num_populations())
                .map(|p| transform_population(&self.game, &self.protocol, p, m))
                .collect::<evodyn::Result<_>>()?
        };
        let t: Vec<TransformedGame> = t.into_iter().map(|x| x.with_fstar(self.fstar)).collect();
        cache.transformed = Some(t.clone());
        Ok(t)
    }

    fn transform(&mut self, cache: &mut Cache) -> Result<()> {
        let t = self.transformed(cache)?;
        let text = self.header(None) + &transformed_config(&t, self.cfg.run.sizes.as_deref());
        self.push("transformed.cfg", text);
        let r = self.report.stage("transform");
        r.push(
            "target_arity",
            if self.command == Command::Transform {
                self.cfg.target_arity
            } else {
                2
            },
        );
        r.push(
            "derived_populations",
            t.iter()
                .map(TransformedGame::num_populations)
                .sum::<usize>(),
        );
        for tg in &t {
            let p = tg.base_population() + 1;
            let lineage = tg.lineage_summary();
            r.push(
                &format!("lineage_population{p}"),
                if lineage.is_empty() {
                    "pass-through".to_string()
                } else {
                    lineage
                },
            );
            r.push(
                &format!("fill_residual_population{p}"),
                fmt_float(tg.fill_residual()),
            );
        }
        Ok(())
    }

    fn predicted(&mut self, cache: &mut Cache) -> Result<StationaryTable> {
        if let Some(p) = &cache.predicted {
            return Ok(p.clone());
        }
        let sizes = self.sizes()?;
        let t = self.transformed(cache)?;
        let table = stationary::predict(&t, &sizes, self.factor, self.orientation, ExecMode::Auto)?;
        cache.predicted = Some(table.clone());
        Ok(table)
    }

    fn predict(&mut self, cache: &mut Cache) -> Result<()> {
        let sizes = self.sizes()?;
        let table = self.predicted(cache)?;
        let t = self.transformed(cache)?;
        let marginals = transformed_marginals(&t, &sizes, self.factor, self.orientation)?;
        let mut csv = self.header(None) + "strategy,count,probability,degenerate\n";
        for (idx, w) in &marginals {
            for (k, p) in w.normalized()?.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{k},{},{}\n",
                    idx + 1,
                    fmt_float(*p),
                    w.degenerate
                ));
            }
        }
        self.push("marginals.csv", csv);
        self.table_artifact("predicted.csv", &table, None);
        let r = self.report.stage("predict");
        r.push("variant_factor", self.factor);
        r.push("variant_orientation", self.orientation);
        r.push("fstar", self.fstar);
        r.push("degenerate", table.meta("degenerate").unwrap_or("false"));
        r.push("states", table.grid().len());
        Ok(())
    }

    fn compare(&mut self, cache: &mut Cache) -> Result<()> {
        self.exact_quiet(cache)?;
        let predicted = self.predicted(cache)?;
        let (_, exact) = cache.exact.as_ref().expect("computed above");
        let c = compare(&predicted, exact)?;
        let mut marginal_lines = Vec::new();
        for i in 0..self.game.total_strategies() {
            let a = marginal(&predicted, i)?;
            let b = marginal(exact, i)?;
            let tv: f64 = 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>();
            marginal_lines.push((format!("marginal_tv_strategy{}", i + 1), fmt_float(tv)));
        }
        let r = self.report.stage("compare");
        r.push("tv_predicted_vs_exact", fmt_float(c.tv));
        r.push("kl_predicted_vs_exact", fmt_float(c.kl));
        r.push("max_abs_predicted_vs_exact", fmt_float(c.max_abs));
        for (k, v) in marginal_lines {
            r.push(&k, v);
        }
        Ok(())
    }

    /// Exact table for comparison without emitting it as an artifact.
    fn exact_quiet(&mut self, cache: &mut Cache) -> Result<()> {
        if cache.exact.is_some() {
            return Ok(());
        }
        let sizes = self.sizes()?;
        let chain = build_generator(&self.game, &self.protocol, &sizes)?;
        let table = exact_stationary(&chain)?;
        cache.exact = Some((chain, table));
        Ok(())
    }

    fn balance(&mut self, cache: &mut Cache) -> Result<()> {
        self.exact_quiet(cache)?;
        let sizes = self.sizes()?;
        let (chain, exact) = cache.exact.as_ref().expect("computed above");
        let original = check_detailed_balance(chain, exact)?;
        let mut lines = vec![(
            "original_max_imbalance".to_string(),
            fmt_float(original.max_imbalance),
        )];
        let mut worst = 0.0_f64;
        for tg in self.transformed(cache)? {
            let p = tg.base_population();
            for d in 0..tg.num_populations() {
                let (g, proto) = tg.population_game(d)?;
                let c = build_generator(&g, &proto, &[sizes[p]])?;
                let t = exact_stationary(&c)?;
                let b = check_detailed_balance(&c, &t)?;
                worst = worst.max(b.max_imbalance);
                lines.push((
                    format!("derived_population{}_{}_max_imbalance", p + 1, d + 1),
                    fmt_float(b.max_imbalance),
                ));
            }
        }
        lines.push(("derived_worst_max_imbalance".into(), fmt_float(worst)));
        let r = self.report.stage("balance");
        for (k, v) in lines {
            r.push(&k, v);
        }
        Ok(())
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}
