//! Sectioned key-value experiment configuration.
//!
//! ```text
//! [game]
//! type = linear            # linear | table-payoff
//! populations = 1
//! strategies = 3
//! masses = 1
//! payoff =
//!   0, -1,  1
//!   1,  0, -1
//!  -1,  1,  0
//!
//! [protocol]
//! kind = sum_exponential   # constant | sum_exponential | table
//! eta = 1
//! support_floor = 0.1
//!
//! [run]
//! N = 20
//! horizon = 10
//! seeds = 1, 2, 3
//! ```
//!
//! A key with an empty value introduces a matrix: one comma list per
//! following line, up to the next key, section, or blank line.

use std::fmt;

use evodyn::stationary::Variant;
use evodyn::transform::FStar;
use evodyn::{Payoff, PopulationGame, RateMatrix, RevisionProtocol, SocialState, Square};
use sha2::{Digest, Sha256};

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "game",
        &["type", "populations", "strategies", "masses", "payoff"],
    ),
    ("protocol", &["kind", "c", "eta", "rates", "support_floor"]),
    (
        "run",
        &[
            "N",
            "horizon",
            "dt",
            "burn_in",
            "sample_time",
            "seeds",
            "x0",
            "variant_factor",
            "variant_orientation",
            "fstar",
        ],
    ),
    ("output", &["directory", "formats"]),
    ("transform", &["target_arity"]),
];

/// Sections written by `transform` output; accepted and ignored on input.
const PASSIVE_SECTIONS: &[&str] = &["lineage", "derived"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub section: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.section.is_empty() {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "line {} [{}]: {}", self.line, self.section, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
pub struct ConfigErrors(pub Vec<ConfigError>);

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    Rows(Vec<(usize, String)>),
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    line: usize,
    value: Value,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameType {
    Linear,
    TablePayoff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub kind: GameType,
    pub strategies: Vec<usize>,
    pub masses: Vec<f64>,
    pub payoff: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolChoice {
    Constant(f64),
    SumExponential(f64),
    Table(Vec<RateMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub kind: ProtocolChoice,
    pub support_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sizes: Option<Vec<u64>>,
    pub horizon: Option<f64>,
    pub dt: f64,
    pub burn_in: Option<f64>,
    pub sample_time: Option<f64>,
    pub seeds: Vec<u64>,
    pub x0: Option<Vec<f64>>,
    pub factor: Variant,
    pub orientation: Variant,
    pub fstar: FStar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: Option<String>,
    pub formats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub game: GameConfig,
    pub protocol: ProtocolConfig,
    pub run: RunConfig,
    pub output: OutputConfig,
    pub target_arity: usize,
    /// Hex sha256 of the source text.
    pub hash: String,
}

fn nearest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(word, c), c))
        .filter(|&(d, c)| d <= 2.max(c.len() / 3))
        .min()
        .map(|(_, c)| c)
}

fn hint(word: &str, candidates: impl IntoIterator<Item = &'static str>) -> String {
    match nearest(word, candidates) {
        Some(c) => format!(" (did you mean \"{c}\"?)"),
        None => String::new(),
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn lex(text: &str, errors: &mut Vec<ConfigError>) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    let mut open_rows = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            open_rows = false;
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            open_rows = false;
            let name = name.trim().to_string();
            if let Some(prev) = sections.iter().find(|s| s.name == name) {
                errors.push(ConfigError {
                    line,
                    section: name.clone(),
                    message: format!("duplicate section (first at line {})", prev.line),
                });
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(section) = sections.last_mut() else {
            errors.push(ConfigError {
                line,
                section: String::new(),
                message: "content before the first [section]".into(),
            });
            continue;
        };
        if let Some((key, value)) = content.split_once('=') {
            let key = key.trim().to_string();
            let value = value.trim();
            open_rows = value.is_empty();
            if section.entries.iter().any(|e| e.key == key) {
                errors.push(ConfigError {
                    line,
                    section: section.name.clone(),
                    message: format!("duplicate key \"{key}\""),
                });
            }
            section.entries.push(Entry {
                key,
                line,
                value: if open_rows {
                    Value::Rows(Vec::new())
                } else {
                    Value::Scalar(value.to_string())
                },
            });
        } else if open_rows {
            if let Some(Entry {
                value: Value::Rows(rows),
                ..
            }) = section.entries.last_mut()
            {
                rows.push((line, content.to_string()));
            }
        } else {
            errors.push(ConfigError {
                line,
                section: section.name.clone(),
                message: format!("expected \"key = value\", found \"{content}\""),
            });
        }
    }
    sections
}

struct Reader<'a> {
    section: Option<&'a Section>,
    name: &'static str,
    errors: &'a mut Vec<ConfigError>,
}

impl Reader<'_> {
    fn entry(&self, key: &str) -> Option<&Entry> {
        self.section
            .and_then(|s| s.entries.iter().find(|e| e.key == key))
    }

    fn line(&self) -> usize {
        self.section.map_or(0, |s| s.line)
    }

    fn error(&mut self, line: usize, message: String) {
        self.errors.push(ConfigError {
            line,
            section: self.name.to_string(),
            message,
        });
    }

    fn scalar(&mut self, key: &str) -> Option<(usize, String)> {
        let e = self.entry(key)?.clone();
        match e.value {
            Value::Scalar(s) => Some((e.line, s)),
            Value::Rows(_) => {
                self.error(e.line, format!("\"{key}\" needs a value on the same line"));
                None
            }
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let (line, s) = self.scalar(key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(line, format!("\"{key}\" must be {what}, got \"{s}\""));
                None
            }
        }
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<Vec<T>> {
        let (line, s) = self.scalar(key)?;
        parse_list(&s).or_else(|| {
            self.error(
                line,
                format!("\"{key}\" must be a comma list of {what}, got \"{s}\""),
            );
            None
        })
    }

    fn matrix(&mut self, key: &str) -> Option<(usize, Vec<Vec<f64>>)> {
        let e = self.entry(key)?.clone();
        let rows = match e.value {
            Value::Rows(rows) => rows,
            Value::Scalar(s) => vec![(e.line, s)],
        };
        let mut out = Vec::new();
        let mut ok = true;
        for (line, row) in rows {
            match parse_list::<f64>(&row) {
                Some(r) => out.push(r),
                None => {
                    self.error(
                        line,
                        format!("\"{key}\": row \"{row}\" is not a list of numbers"),
                    );
                    ok = false;
                }
            }
        }
        if out.is_empty() && ok {
            self.error(e.line, format!("\"{key}\" has no rows"));
            return None;
        }
        ok.then_some((e.line, out))
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|v| v.trim().parse().ok()).collect()
}

fn variant(r: &mut Reader<'_>, key: &str) -> Variant {
    match r.scalar(key) {
        None => Variant::Standard,
        Some((_, v)) if v == "standard" => Variant::Standard,
        Some((_, v)) if v == "paper" => Variant::Paper,
        Some((line, v)) => {
            r.error(
                line,
                format!("\"{key}\" must be paper or standard, got \"{v}\""),
            );
            Variant::Standard
        }
    }
}

pub fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "standard" => Ok(Variant::Standard),
        "paper" => Ok(Variant::Paper),
        _ => Err(format!("expected paper or standard, got \"{s}\"")),
    }
}

pub fn parse_fstar(s: &str) -> Result<FStar, String> {
    match s {
        "zero" => Ok(FStar::Zero),
        "weighted" => Ok(FStar::Weighted),
        _ => Err(format!("expected zero or weighted, got \"{s}\"")),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let sections = lex(text, &mut errors);

    for s in &sections {
        if PASSIVE_SECTIONS.contains(&s.name.as_str()) {
            continue;
        }
        match SECTIONS.iter().find(|(n, _)| *n == s.name) {
            None => errors.push(ConfigError {
                line: s.line,
                section: s.name.clone(),
                message: format!(
                    "unknown section{}",
                    hint(&s.name, SECTIONS.iter().map(|(n, _)| *n))
                ),
            }),
            Some((_, keys)) => {
                for e in &s.entries {
                    if !keys.contains(&e.key.as_str()) {
                        let all = keys.iter().copied().chain(SECTIONS.iter().map(|(n, _)| *n));
                        errors.push(ConfigError {
                            line: e.line,
                            section: s.name.clone(),
                            message: format!("unknown key \"{}\"{}", e.key, hint(&e.key, all)),
                        });
                    }
                }
            }
        }
    }

    let find = |name: &str| sections.iter().find(|s| s.name == name);

    // [game]
    let mut r = Reader {
        section: find("game"),
        name: "game",
        errors: &mut errors,
    };
    if r.section.is_none() {
        r.error(0, "missing [game] section".into());
    }
    let kind = match r.scalar("type") {
        None => GameType::Linear,
        Some((_, t)) if t == "linear" => GameType::Linear,
        Some((_, t)) if t == "table-payoff" => GameType::TablePayoff,
        Some((line, t)) => {
            r.error(
                line,
                format!(
                    "type must be linear or table-payoff, got \"{t}\"{}",
                    hint(&t, ["linear", "table-payoff"])
                ),
            );
            GameType::Linear
        }
    };
    let populations: Option<usize> = r.parse("populations", "a positive integer");
    let strategies: Option<Vec<usize>> = r.list("strategies", "positive integers");
    let masses: Option<Vec<f64>> = r.list("masses", "numbers");
    let payoff = r.matrix("payoff");
    if r.section.is_some() && r.entry("payoff").is_none() {
        let line = r.line();
        r.error(line, "missing \"payoff\"".into());
    }
    let game_line = r.line();
    let mut game = None;
    if let Some((pline, payoff)) = payoff {
        let strategies = strategies.unwrap_or_else(|| match kind {
            GameType::Linear => vec![payoff.len()],
            GameType::TablePayoff => vec![payoff[0].len()],
        });
        let pops = populations.unwrap_or(strategies.len());
        let masses = masses.unwrap_or_else(|| vec![1.0; pops]);
        let mut ok = true;
        if strategies.len() != pops {
            r.error(
                game_line,
                format!(
                    "{} strategy counts for {pops} populations",
                    strategies.len()
                ),
            );
            ok = false;
        }
        if masses.len() != pops {
            r.error(
                game_line,
                format!("{} masses for {pops} populations", masses.len()),
            );
            ok = false;
        }
        if strategies.iter().any(|&n| n < 2) {
            r.error(
                game_line,
                "every population needs at least 2 strategies".into(),
            );
            ok = false;
        }
        if masses.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            r.error(game_line, "masses must be positive".into());
            ok = false;
        }
        let total: usize = strategies.iter().sum();
        let (rows, cols) = (payoff.len(), payoff.iter().map(Vec::len).max().unwrap_or(0));
        let ragged = payoff.iter().any(|row| row.len() != cols);
        match kind {
            GameType::Linear if rows != total || cols != total || ragged => {
                r.error(
                    pline,
                    format!("payoff matrix is {rows}x{cols}, expected {total}x{total}"),
                );
                ok = false;
            }
            GameType::TablePayoff if rows != 1 || cols != total => {
                r.error(
                    pline,
                    format!("table payoff must be one row of {total} values, got {rows}x{cols}"),
                );
                ok = false;
            }
            _ => {}
        }
        if ok {
            game = Some(GameConfig {
                kind,
                strategies,
                masses,
                payoff,
            });
        }
    }

    // [protocol]
    let mut r = Reader {
        section: find("protocol"),
        name: "protocol",
        errors: &mut errors,
    };
    if r.section.is_none() {
        r.error(0, "missing [protocol] section".into());
    }
    let support_floor: Option<f64> = r.parse("support_floor", "a number");
    let protocol_kind = match r.scalar("kind") {
        Some((_, k)) if k == "constant" => r
            .parse("c", "a number")
            .map(ProtocolChoice::Constant)
            .or_else(|| {
                if r.entry("c").is_none() {
                    Some(ProtocolChoice::Constant(1.0))
                } else {
                    None
                }
            }),
        Some((line, k)) if k == "sum_exponential" => {
            let eta = r.parse("eta", "a number");
            if r.entry("eta").is_none() {
                r.error(line, "sum_exponential needs \"eta\"".into());
            }
            eta.map(ProtocolChoice::SumExponential)
        }
        Some((line, k)) if k == "table" => match (r.matrix("rates"), &game) {
            (Some((rline, rows)), Some(g)) => {
                let mut tables = Vec::new();
                let mut at = 0;
                let mut ok = true;
                for (p, &n) in g.strategies.iter().enumerate() {
                    let block = rows.get(at..at + n).map(|b| b.to_vec());
                    match block.and_then(|b| Square::from_rows(&b)) {
                        Some(t) => tables.push(t),
                        None => {
                            r.error(
                                rline,
                                format!("rates: population {} needs a {n}x{n} block", p + 1),
                            );
                            ok = false;
                            break;
                        }
                    }
                    at += n;
                }
                if ok && at != rows.len() {
                    r.error(
                        rline,
                        format!("rates has {} rows, expected {at}", rows.len()),
                    );
                    ok = false;
                }
                ok.then_some(ProtocolChoice::Table(tables))
            }
            (None, _) => {
                if r.entry("rates").is_none() {
                    r.error(line, "table protocol needs \"rates\"".into());
                }
                None
            }
            _ => None,
        },
        Some((line, k)) => {
            let h = hint(&k, ["constant", "sum_exponential", "table"]);
            r.error(
                line,
                format!("kind must be constant, sum_exponential or table, got \"{k}\"{h}"),
            );
            None
        }
        None => {
            if r.section.is_some() {
                let line = r.line();
                r.error(line, "missing \"kind\"".into());
            }
            None
        }
    };
    if let Some(f) = support_floor {
        if !(f >= 0.0 && f.is_finite()) {
            let line = r.entry("support_floor").map_or(0, |e| e.line);
            r.error(line, "support_floor must be a nonnegative number".into());
        }
    }

    // [run]
    let mut r = Reader {
        section: find("run"),
        name: "run",
        errors: &mut errors,
    };
    let mut sizes: Option<Vec<u64>> = r.list("N", "positive integers");
    if let (Some(s), Some(g)) = (&mut sizes, &game) {
        if s.len() == 1 && g.strategies.len() > 1 {
            *s = vec![s[0]; g.strategies.len()];
        }
        if s.len() != g.strategies.len() || s.contains(&0) {
            let line = r.entry("N").map_or(0, |e| e.line);
            r.error(
                line,
                format!(
                    "N needs one positive size per population ({})",
                    g.strategies.len()
                ),
            );
        }
    }
    let horizon: Option<f64> = r.parse("horizon", "a number");
    let dt: f64 = r
        .parse("dt", "a number")
        .unwrap_or(evodyn::dynamics::DEFAULT_DT);
    let burn_in: Option<f64> = r.parse("burn_in", "a number");
    let sample_time: Option<f64> = r.parse("sample_time", "a number");
    let seeds: Vec<u64> = r.list("seeds", "unsigned integers").unwrap_or_default();
    let x0: Option<Vec<f64>> = r.list("x0", "numbers");
    let factor = variant(&mut r, "variant_factor");
    let orientation = variant(&mut r, "variant_orientation");
    let fstar = match r.scalar("fstar") {
        None => FStar::Zero,
        Some((line, v)) => parse_fstar(&v).unwrap_or_else(|m| {
            r.error(line, format!("fstar: {m}"));
            FStar::Zero
        }),
    };
    for (key, v) in [
        ("horizon", horizon),
        ("dt", Some(dt)),
        ("sample_time", sample_time),
    ] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                let line = r.entry(key).map_or(0, |e| e.line);
                r.error(line, format!("{key} must be positive"));
            }
        }
    }
    if let (Some(b), Some(h)) = (burn_in, horizon) {
        if !(b >= 0.0 && b < h) {
            let line = r.entry("burn_in").map_or(0, |e| e.line);
            r.error(line, format!("burn_in must lie in [0, horizon = {h})"));
        }
    }
    if let (Some(x), Some(g)) = (&x0, &game) {
        let total: usize = g.strategies.iter().sum();
        if x.len() != total {
            let line = r.entry("x0").map_or(0, |e| e.line);
            r.error(
                line,
                format!("x0 has {} entries, expected {total}", x.len()),
            );
        }
    }

    // [output]
    let mut r = Reader {
        section: find("output"),
        name: "output",
        errors: &mut errors,
    };
    let directory = r.scalar("directory").map(|(_, d)| d);
    let formats: Vec<String> = r
        .list("formats", "format names")
        .unwrap_or_else(|| vec!["csv".into(), "report".into()]);
    for f in &formats {
        if f != "csv" && f != "report" {
            let line = r.entry("formats").map_or(0, |e| e.line);
            r.error(
                line,
                format!("unknown format \"{f}\"{}", hint(f, ["csv", "report"])),
            );
        }
    }

    // [transform]
    let mut r = Reader {
        section: find("transform"),
        name: "transform",
        errors: &mut errors,
    };
    let target_arity: usize = r.parse("target_arity", "an integer").unwrap_or(2);
    if target_arity < 2 {
        let line = r.entry("target_arity").map_or(0, |e| e.line);
        r.error(line, "target_arity must be at least 2".into());
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line);
        return Err(ConfigErrors(errors));
    }
    Ok(ExperimentConfig {
        game: game.expect("validated"),
        protocol: ProtocolConfig {
            kind: protocol_kind.expect("validated"),
            support_floor,
        },
        run: RunConfig {
            burn_in: burn_in.or(horizon.map(|h| h / 10.0)),
            sizes,
            horizon,
            dt,
            sample_time,
            seeds,
            x0,
            factor,
            orientation,
            fstar,
        },
        output: OutputConfig { directory, formats },
        target_arity,
        hash: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

impl ExperimentConfig {
    pub fn build_game(&self) -> evodyn::Result<PopulationGame> {
        let g = &self.game;
        let payoff = match g.kind {
            GameType::Linear => {
                Payoff::Linear(Square::from_rows(&g.payoff).expect("validated square"))
            }
            GameType::TablePayoff => Payoff::Constant(g.payoff[0].clone()),
        };
        PopulationGame::new(g.masses.clone(), g.strategies.clone(), payoff)
    }

    /// The protocol without a support floor override applied.
    pub fn build_protocol(&self) -> RevisionProtocol {
        let p = match &self.protocol.kind {
            ProtocolChoice::Constant(c) => RevisionProtocol::constant(*c),
            ProtocolChoice::SumExponential(eta) => RevisionProtocol::sum_exponential(*eta),
            ProtocolChoice::Table(t) => RevisionProtocol::table(t.clone()),
        };
        match self.protocol.support_floor {
            Some(f) => p.with_support_floor(f),
            None => p,
        }
    }

    pub fn initial_state(&self, game: &PopulationGame) -> SocialState {
        match &self.run.x0 {
            Some(x) => SocialState::from_flat(x, game.strategy_counts()),
            None => game.barycenter(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RPS: &str = "\
[game]
type = linear
payoff =
0, -1, 1
1, 0, -1
-1, 1, 0

[protocol]
kind = sum_exponential
eta = 1

[run]
N = 10
horizon = 5
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(RPS).unwrap();
        assert_eq!(c.game.strategies, vec![3]);
        assert_eq!(c.game.masses, vec![1.0]);
        assert_eq!(c.run.dt, 0.01);
        assert_eq!(c.run.burn_in, Some(0.5));
        assert_eq!(c.run.sizes, Some(vec![10]));
        assert_eq!(c.target_arity, 2);
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn non_square_payoff_names_game() {
        let text = RPS.replace("0, -1, 1\n1, 0, -1\n-1, 1, 0", "0, -1\n1, 0\n-1, 1");
        let errs = parse_config(&text).unwrap_err().0;
        assert!(
            errs.iter()
                .any(|e| e.section == "game" && e.message.contains("3x2")),
            "{errs:?}"
        );
    }

    #[test]
    fn unknown_key_gets_hint() {
        let text = RPS.replace("eta = 1", "eta = 1\nprotocl = 2");
        let errs = parse_config(&text).unwrap_err().0;
        assert_eq!(errs.len(), 1);
        assert!(
            errs[0].message.contains("did you mean \"protocol\""),
            "{}",
            errs[0]
        );
        assert_eq!(errs[0].line, 11);
    }

    #[test]
    fn all_errors_collected() {
        let text = RPS
            .replace("eta = 1", "eta = x")
            .replace("N = 10", "N = 10\ndt = -1\nhorizn = 3");
        let errs = parse_config(&text).unwrap_err().0;
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs
            .iter()
            .any(|e| e.message.contains("did you mean \"horizon\"")));
    }

    #[test]
    fn table_protocol_blocks() {
        let text = "\
[game]
populations = 2
strategies = 2, 2
payoff =
0, 0, 0, 0
0, 0, 0, 0
0, 0, 0, 0
0, 0, 0, 0
[protocol]
kind = table
rates =
0, 1
1, 0
0, 2
2, 0
";
        let c = parse_config(text).unwrap();
        match c.protocol.kind {
            ProtocolChoice::Table(t) => assert_eq!(*t[1].get(0, 1), 2.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn passive_sections_are_ignored() {
        let text = format!("{RPS}\n[lineage]\nstages = 3->2 symmetrize\n[derived]\nanything = 1\n");
        assert!(parse_config(&text).is_ok());
    }

    #[test]
    fn hash_depends_on_text() {
        let a = parse_config(RPS).unwrap().hash;
        let b = parse_config(&format!("{RPS}\n")).unwrap().hash;
        assert_ne!(a, b);
    }
}
