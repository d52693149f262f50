//! TOML experiment configuration.
//!
//! ```toml
//! n = 10
//! seed = 7
//!
//! [process]
//! markov_bsc = { p = 0.2, q = 0.25 }
//!
//! odds = "uniform_fair"   # or a list of odds, or a [odds] table
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gambling::OddsModel;
use crate::joint::{Budget, JointTable, DEFAULT_BUDGET};
use crate::markov_example::{sweep, SweepParam, SweepRow, DEFAULT_MAX_LOOKAHEAD};
use crate::portfolio::{horse_race_embedding, MarketSpec};
use crate::process::{MemoryOrder, ProcessSpec};

/// Parameters of the Markov race seen through a binary symmetric channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BscConfig {
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryKind {
    Iid,
    Markov,
    History,
}

/// Inline process: either `markov_bsc = { p, q }` or explicit kernel rows.
///
/// `joint` holds one row per `x` and one column per `y`; `initial` and the
/// `transition` rows are pair pmfs laid out `x * y_size + y`; `table` is the
/// flat joint pmf over `horizon` steps, most significant symbol first,
/// all `x` symbols before all `y` symbols.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov_bsc: Option<BscConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<MemoryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
}

fn keyed(key: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Config(msg) => Error::Config(msg),
        other => Error::Config(format!("`{key}`: {other}")),
    }
}

fn require<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

impl ProcessConfig {
    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut note = |set: bool, key| {
            if set {
                keys.push(key)
            }
        };
        note(self.x_size.is_some(), "x_size");
        note(self.y_size.is_some(), "y_size");
        note(self.memory.is_some(), "memory");
        note(self.joint.is_some(), "joint");
        note(self.initial.is_some(), "initial");
        note(self.transition.is_some(), "transition");
        note(self.horizon.is_some(), "horizon");
        note(self.table.is_some(), "table");
        keys
    }

    fn reject_extra(&self, allowed: &[&str], context: &str) -> Result<()> {
        match self.present_keys().into_iter().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::Config(format!("key `process.{k}` is not used {context}"))),
            None => Ok(()),
        }
    }

    pub fn to_spec(&self) -> Result<ProcessSpec> {
        if let Some(bsc) = self.markov_bsc {
            self.reject_extra(&[], "together with `process.markov_bsc`")?;
            return ProcessSpec::markov_bsc(bsc.p, bsc.q).map_err(keyed("process.markov_bsc"));
        }
        let memory = *require(&self.memory, "process.memory")?;
        let x_size = *require(&self.x_size, "process.x_size")?;
        let y_size = *require(&self.y_size, "process.y_size")?;
        match memory {
            MemoryKind::Iid => {
                self.reject_extra(&["x_size", "y_size", "memory", "joint"], "with `memory = \"iid\"`")?;
                let rows = require(&self.joint, "process.joint")?;
                if rows.len() != x_size || rows.iter().any(|r| r.len() != y_size) {
                    return Err(Error::Config(format!(
                        "`process.joint` must have {x_size} rows of {y_size} entries"
                    )));
                }
                ProcessSpec::iid_from_rows(rows).map_err(keyed("process.joint"))
            }
            MemoryKind::Markov => {
                self.reject_extra(
                    &["x_size", "y_size", "memory", "initial", "transition"],
                    "with `memory = \"markov\"`",
                )?;
                let initial = require(&self.initial, "process.initial")?.clone();
                let transition = require(&self.transition, "process.transition")?.clone();
                let pairs = x_size * y_size;
                if initial.len() != pairs {
                    return Err(Error::Config(format!("`process.initial` must have {pairs} entries")));
                }
                ProcessSpec::markov(x_size, y_size, initial, transition).map_err(keyed("process.transition"))
            }
            MemoryKind::History => {
                self.reject_extra(
                    &["x_size", "y_size", "memory", "horizon", "table"],
                    "with `memory = \"history\"`",
                )?;
                let horizon = *require(&self.horizon, "process.horizon")?;
                let table = require(&self.table, "process.table")?.clone();
                let joint = JointTable::new(x_size, y_size, horizon, horizon, table).map_err(keyed("process.table"))?;
                ProcessSpec::from_history(joint).map_err(keyed("process.horizon"))
            }
        }
    }

    /// Explicit-kernel form of `spec`.
    pub fn from_spec(spec: &ProcessSpec) -> Self {
        let (xs, ys) = (spec.x_size(), spec.y_size());
        let mut cfg = ProcessConfig {
            x_size: Some(xs),
            y_size: Some(ys),
            ..Default::default()
        };
        match spec.memory_order() {
            MemoryOrder::Iid => {
                let joint = spec.pair_kernel(None).expect("memory order <= 1");
                cfg.memory = Some(MemoryKind::Iid);
                cfg.joint = Some(joint.chunks(ys).map(<[f64]>::to_vec).collect());
            }
            MemoryOrder::Markov => {
                cfg.memory = Some(MemoryKind::Markov);
                cfg.initial = spec.pair_kernel(None).map(<[f64]>::to_vec);
                cfg.transition = Some(
                    (0..xs * ys)
                        .map(|i| spec.pair_kernel(Some((i / ys, i % ys))).expect("memory order <= 1").to_vec())
                        .collect(),
                );
            }
            MemoryOrder::History(h) => {
                cfg.memory = Some(MemoryKind::History);
                cfg.horizon = Some(h);
                cfg.table = spec.history_table().map(|t| t.probs().to_vec());
            }
        }
        cfg
    }
}

/// Odds: `"uniform_fair"`, a constant list, or a `[odds]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OddsConfig {
    Named(String),
    Constant(Vec<f64>),
    Table(OddsTable),
}

/// `initial` + `after` for odds depending on the previous winner, or
/// `tables` with one table per race and one row per past sequence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OddsTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<Vec<Vec<f64>>>>,
}

impl Default for OddsConfig {
    fn default() -> Self {
        OddsConfig::Named("uniform_fair".into())
    }
}

impl OddsConfig {
    pub fn to_model(&self, horses: usize) -> Result<OddsModel> {
        let model = match self {
            OddsConfig::Named(name) if name == "uniform_fair" => OddsModel::uniform_fair(horses),
            OddsConfig::Named(name) => {
                return Err(Error::Config(format!(
                    "`odds`: unknown named odds \"{name}\" (expected \"uniform_fair\")"
                )))
            }
            OddsConfig::Constant(row) => OddsModel::constant(row.clone()).map_err(keyed("odds"))?,
            OddsConfig::Table(t) => match (&t.initial, &t.after, &t.tables) {
                (Some(initial), Some(after), None) => {
                    OddsModel::markov(initial.clone(), after.clone()).map_err(keyed("odds.after"))?
                }
                (None, None, Some(tables)) => OddsModel::history(tables.clone()).map_err(keyed("odds.tables"))?,
                _ => {
                    return Err(Error::Config(
                        "`odds` table needs either `initial` and `after`, or `tables`".into(),
                    ))
                }
            },
        };
        if model.horses() != horses {
            return Err(Error::Config(format!(
                "`odds` covers {} horses but the process has {horses}",
                model.horses()
            )));
        }
        Ok(model)
    }
}

/// Price relatives per outcome, or the horse-race embedding of the odds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub horse_race: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Q,
    K,
}

/// Sweep of the Markov example over `q` (no lookahead) or `k` (fixed `q`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepKind,
    pub grid: Vec<f64>,
    pub p: f64,
    #[serde(default)]
    pub q: f64,
}

fn default_n() -> usize {
    1
}

fn default_trials() -> usize {
    10_000
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET as u64
}

/// One experiment: process, odds, market, horizons and output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub odds: OddsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            k: 0,
            trials: default_trials(),
            seed: 0,
            out: None,
            budget: default_budget(),
            odds: OddsConfig::default(),
            process: None,
            market: None,
            sweep: None,
        }
    }
}

/// One-line description of a TOML error, naming the key on the offending line.
fn describe_toml_error(src: &str, err: &toml::de::Error) -> String {
    let msg = err.message().trim().replace('\n', " ");
    let Some(span) = err.span() else { return msg };
    let start = span.start.min(src.len());
    let line_no = src[..start].matches('\n').count() + 1;
    let line_start = src[..start].rfind('\n').map_or(0, |i| i + 1);
    let line = src[line_start..].lines().next().unwrap_or("").trim();
    let section = src[..line_start]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('[') && l.ends_with(']'))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim());
    let key = match line.split_once('=') {
        Some((k, _)) if !line.starts_with('[') => Some(k.trim()),
        _ => None,
    };
    let msg = if msg.contains("did not match any variant of untagged enum OddsConfig") {
        "expected \"uniform_fair\", a list of odds, or a table with `initial`/`after` or `tables`".to_string()
    } else {
        msg
    };
    match (section, key) {
        (Some(s), Some(k)) => format!("key `{s}.{k}` (line {line_no}): {msg}"),
        (None, Some(k)) => format!("key `{k}` (line {line_no}): {msg}"),
        (Some(s), None) => format!("section `{s}` (line {line_no}): {msg}"),
        (None, None) => format!("line {line_no}: {msg}"),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(src).map_err(|e| Error::Config(describe_toml_error(src, &e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Range checks that do not depend on the command.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("`n` must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("`trials` must be >= 1".into()));
        }
        if self.k > DEFAULT_MAX_LOOKAHEAD {
            return Err(Error::Config(format!("`k` must be <= {DEFAULT_MAX_LOOKAHEAD}")));
        }
        if self.budget == 0 {
            return Err(Error::Config("`budget` must be >= 1".into()));
        }
        Ok(())
    }

    pub fn budget(&self) -> Budget {
        Budget(self.budget as u128)
    }

    pub fn process_spec(&self) -> Result<ProcessSpec> {
        self.process
            .as_ref()
            .ok_or_else(|| Error::Config("missing section `process`".into()))?
            .to_spec()
    }

    pub fn odds_model(&self, horses: usize) -> Result<OddsModel> {
        self.odds.to_model(horses)
    }

    pub fn market_spec(&self) -> Result<MarketSpec> {
        let market = self
            .market
            .as_ref()
            .ok_or_else(|| Error::Config("missing section `market`".into()))?;
        let spec = self.process_spec()?;
        match (&market.vectors, market.horse_race) {
            (Some(_), true) => Err(Error::Config(
                "`market.vectors` and `market.horse_race` are mutually exclusive".into(),
            )),
            (Some(v), false) => MarketSpec::new(spec, v.clone()).map_err(keyed("market.vectors")),
            (None, true) => {
                let odds = self.odds_model(spec.x_size())?;
                horse_race_embedding(&spec, &odds).map_err(keyed("odds"))
            }
            (None, false) => Err(Error::Config(
                "`market` needs `vectors` or `horse_race = true`".into(),
            )),
        }
    }

    pub fn sweep_rows(&self) -> Result<Vec<SweepRow>> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing section `sweep`".into()))?;
        let param = match s.param {
            SweepKind::Q => SweepParam::Q,
            SweepKind::K => SweepParam::K,
        };
        sweep(param, &s.grid, s.p, s.q).map_err(keyed("sweep"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markov_bsc_shortcut() {
        let cfg = ExperimentConfig::from_toml_str("n = 3\n[process]\nmarkov_bsc = { p = 0.2, q = 0.25 }\n").unwrap();
        assert_eq!(cfg.process_spec().unwrap(), ProcessSpec::markov_bsc(0.2, 0.25).unwrap());
        assert_eq!(cfg.odds_model(2).unwrap(), OddsModel::uniform_fair(2));
        assert_eq!(cfg.n, 3);
    }

    #[test]
    fn round_trip_through_explicit_kernels() {
        for spec in [
            ProcessSpec::markov_bsc(0.3, 0.1).unwrap(),
            ProcessSpec::iid_from_rows(&[vec![0.1, 0.2, 0.3], vec![0.15, 0.05, 0.2]]).unwrap(),
            ProcessSpec::from_history(ProcessSpec::markov_bsc(0.3, 0.1).unwrap().joint_pmf(2).unwrap()).unwrap(),
        ] {
            let cfg = ExperimentConfig {
                process: Some(ProcessConfig::from_spec(&spec)),
                ..Default::default()
            };
            let text = cfg.to_toml_string().unwrap();
            let back = ExperimentConfig::from_toml_str(&text).unwrap();
            assert_eq!(back.process_spec().unwrap(), spec, "{text}");
        }
    }

    #[test]
    fn odds_forms() {
        let parse = |s: &str| ExperimentConfig::from_toml_str(s).unwrap().odds_model(2);
        assert_eq!(parse("odds = [1.2, 1.2]").unwrap(), OddsModel::constant(vec![1.2, 1.2]).unwrap());
        let m = parse("[odds]\ninitial = [2.0, 2.0]\nafter = [[1.5, 3.0], [3.0, 1.5]]").unwrap();
        assert!(m.has_memory());
        assert!(parse("odds = [1.2, 1.2, 1.2]").is_err());
    }

    #[test]
    fn diagnostics_name_the_key() {
        let err = |s: &str| ExperimentConfig::from_toml_str(s).unwrap_err().to_string();
        assert!(err("n = 2\nbogus = 1").contains("bogus"));
        assert!(err("[process]\nmarkov_bsc = { p = \"x\", q = 0.1 }").contains("process.markov_bsc"));
        assert!(err("n = 0").contains("`n`"));
        assert!(err("odds = 3").contains("odds"));
        let bad_q = ExperimentConfig::from_toml_str("[process]\nmarkov_bsc = { p = 0.2, q = 1.5 }").unwrap();
        assert!(bad_q.process_spec().unwrap_err().to_string().contains("process.markov_bsc"));
        let mixed = ExperimentConfig::from_toml_str("[process]\nmarkov_bsc = { p = 0.2, q = 0.1 }\nx_size = 2").unwrap();
        assert!(mixed.process_spec().unwrap_err().to_string().contains("process.x_size"));
        let missing = ExperimentConfig::from_toml_str("[process]\nmemory = \"iid\"\nx_size = 2\ny_size = 2").unwrap();
        assert!(missing.process_spec().unwrap_err().to_string().contains("process.joint"));
        for e in [err("n = 2\nbogus = 1"), err("odds = 3")] {
            assert!(!e.contains('\n'));
        }
    }

    #[test]
    fn market_forms() {
        let base = "[process]\nmarkov_bsc = { p = 0.2, q = 0.25 }\n";
        let embedded = ExperimentConfig::from_toml_str(&format!("{base}[market]\nhorse_race = true\n")).unwrap();
        assert!(embedded.market_spec().unwrap().is_horse_race());
        let vectors =
            ExperimentConfig::from_toml_str(&format!("{base}[market]\nvectors = [[1.0, 2.0], [1.0, 0.5]]\n")).unwrap();
        assert_eq!(vectors.market_spec().unwrap().stocks(), 2);
        let neither = ExperimentConfig::from_toml_str(&format!("{base}[market]\n")).unwrap();
        assert!(neither.market_spec().is_err());
    }

    #[test]
    fn sweep_section() {
        let cfg = ExperimentConfig::from_toml_str("[sweep]\nparam = \"q\"\ngrid = [0.0, 0.5]\np = 0.2\n").unwrap();
        let rows = cfg.sweep_rows().unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].delta_w.abs() < 1e-15);
    }
}
