//! Experiment configuration: a flat text file of dotted keys.
//!
//! ```text
//! # lines starting with # are comments
//! experiment.name = table3-dist1
//! dataset.kind    = synth          # synth | fig1 | csv
//! dataset.n       = 1000
//! dataset.dist    = dist1          # dist1 | dist2
//! dataset.rate    = 0.05
//! detectors       = three_sigma, boxplot
//! schemes         = partition(k=10), random(pct=10)
//! replicates      = 100
//! master_seed     = 42
//! mode            = blind          # exact | blind
//! ensemble        = false
//! output_dir      = results
//! ```
//!
//! Per-detector overrides use `detector.<method>.<param> = value`, e.g.
//! `detector.lof.min_pts = 15`. Unknown keys are errors: a typo must not
//! silently change an experiment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use outlier_resilience::synthgen::OutlierDistribution;
use outlier_resilience::{AggregationRule, DetectorConfig, Error, Method, Result, SchemeSpec};

/// Where the experiment's records come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synth {
        n: usize,
        dist: OutlierDistribution,
        rate: f64,
    },
    Fig1,
    Csv {
        path: PathBuf,
        gt_column: GtColumn,
    },
}

/// How to treat ground truth when loading a CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GtColumn {
    /// Use `is_outlier` if the header has it, otherwise no ground truth.
    Auto,
    /// Ignore any ground-truth column.
    None,
    /// Require this column.
    Named(String),
}

impl FromStr for GtColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => GtColumn::Auto,
            "none" => GtColumn::None,
            name => GtColumn::Named(name.to_string()),
        })
    }
}

/// One entry of the scheme grid. `RandomPct` defers the sample size until
/// the dataset size is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeCell {
    Fixed(SchemeSpec),
    RandomPct(f64),
}

impl SchemeCell {
    /// Resolves the cell against a concrete dataset size.
    pub fn resolve(self, n: usize) -> SchemeSpec {
        match self {
            SchemeCell::Fixed(s) => s,
            SchemeCell::RandomPct(pct) => SchemeSpec::Random {
                size: ((pct / 100.0 * n as f64).round() as usize).max(1),
            },
        }
    }
}

impl fmt::Display for SchemeCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeCell::Fixed(s) => write!(f, "{s}"),
            SchemeCell::RandomPct(p) => write!(f, "random(pct={p})"),
        }
    }
}

impl FromStr for SchemeCell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::Config(msg);
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| bad(format!("malformed scheme {s:?}: expected name(args)")))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| bad(format!("malformed scheme {s:?}: missing ')'")))?;
        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        for pair in args.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed scheme argument {pair:?} in {s:?}")))?;
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        let int = |key: &str| -> Result<usize> {
            fields
                .get(key)
                .ok_or_else(|| bad(format!("scheme {s:?} is missing {key}")))?
                .parse()
                .map_err(|_| bad(format!("scheme {s:?}: {key} must be an integer")))
        };
        match name.trim() {
            "random" => {
                if let Some(pct) = fields.get("pct") {
                    let pct: f64 = pct
                        .parse()
                        .map_err(|_| bad(format!("scheme {s:?}: pct must be a number")))?;
                    if !(pct > 0.0 && pct <= 100.0) {
                        return Err(bad(format!(
                            "scheme {s:?}: pct must lie in (0, 100], got {pct}"
                        )));
                    }
                    Ok(SchemeCell::RandomPct(pct))
                } else {
                    let size = int("size")?;
                    if size == 0 {
                        return Err(bad(format!("scheme {s:?}: size must be positive")));
                    }
                    Ok(SchemeCell::Fixed(SchemeSpec::Random { size }))
                }
            }
            "block" => {
                let n_blocks = int("n_blocks")?;
                let block_size = int("block_size")?;
                if n_blocks == 0 || block_size == 0 {
                    return Err(bad(format!(
                        "scheme {s:?}: n_blocks and block_size must be positive"
                    )));
                }
                Ok(SchemeCell::Fixed(SchemeSpec::Block {
                    n_blocks,
                    block_size,
                }))
            }
            "partition" => {
                let k = int("k")?;
                if k == 0 {
                    return Err(bad(format!("scheme {s:?}: k must be positive")));
                }
                Ok(SchemeCell::Fixed(SchemeSpec::Partition { k }))
            }
            other => Err(bad(format!(
                "unknown scheme {other:?} (valid: random, block, partition)"
            ))),
        }
    }
}

/// Headline estimate the experiment reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    /// Blind estimates as the headline; exact values are computed alongside
    /// so the summary can report MSE(blind vs exact).
    Blind,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Blind => "blind",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "blind" => Ok(Mode::Blind),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (valid: exact, blind)"
            ))),
        }
    }
}

/// A fully parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetSource,
    pub detectors: Vec<DetectorConfig<f64>>,
    pub schemes: Vec<SchemeCell>,
    pub replicates: usize,
    pub master_seed: u64,
    pub mode: Mode,
    pub ensemble: bool,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parses the dotted-key text format. Every key is validated; unknown
    /// keys and duplicate keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut keys: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "config line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if keys.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!(
                    "config line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Self::from_keys(keys)
    }

    fn from_keys(mut keys: BTreeMap<String, String>) -> Result<Self> {
        let mut take = |key: &str| keys.remove(key);
        let name = take("experiment.name").unwrap_or_else(|| "experiment".to_string());

        let kind = take("dataset.kind")
            .ok_or_else(|| Error::Config("missing required key dataset.kind".into()))?;
        let dataset = match kind.as_str() {
            "synth" => {
                let n: usize = parse_key("dataset.n", take("dataset.n"))?;
                let dist: OutlierDistribution = parse_key("dataset.dist", take("dataset.dist"))?;
                let rate: f64 = parse_key("dataset.rate", take("dataset.rate"))?;
                DatasetSource::Synth { n, dist, rate }
            }
            "fig1" => DatasetSource::Fig1,
            "csv" => {
                let path: PathBuf = take("dataset.path")
                    .ok_or_else(|| Error::Config("dataset.kind = csv needs dataset.path".into()))?
                    .into();
                let gt_column = match take("dataset.gt_column") {
                    Some(v) => v.parse()?,
                    None => GtColumn::Auto,
                };
                DatasetSource::Csv { path, gt_column }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown dataset.kind {other:?} (valid: synth, fig1, csv)"
                )))
            }
        };

        let detector_names = take("detectors")
            .ok_or_else(|| Error::Config("missing required key detectors".into()))?;
        let mut detectors = Vec::new();
        for name in detector_names.split(',') {
            let method: Method = name.trim().parse()?;
            detectors.push(DetectorConfig::new(method));
        }
        if detectors.is_empty() {
            return Err(Error::Config("detectors must name at least one method".into()));
        }

        let scheme_list = take("schemes")
            .ok_or_else(|| Error::Config("missing required key schemes".into()))?;
        let schemes: Vec<SchemeCell> = split_top_level(&scheme_list)
            .into_iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?;
        if schemes.is_empty() {
            return Err(Error::Config("schemes must list at least one scheme".into()));
        }

        let replicates: usize = match take("replicates") {
            Some(v) => parse_key("replicates", Some(v))?,
            None => 100,
        };
        if replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        let master_seed: u64 = match take("master_seed") {
            Some(v) => parse_key("master_seed", Some(v))?,
            None => 0,
        };
        let mode: Mode = match take("mode") {
            Some(v) => v.parse()?,
            None => Mode::Exact,
        };
        let ensemble = match take("ensemble").as_deref() {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => {
                return Err(Error::Config(format!(
                    "ensemble must be true or false, got {other:?}"
                )))
            }
        };
        let output_dir: PathBuf = take("output_dir").unwrap_or_else(|| "results".into()).into();

        // Per-detector overrides.
        let override_keys: Vec<String> = keys
            .keys()
            .filter(|k| k.starts_with("detector."))
            .cloned()
            .collect();
        for key in override_keys {
            let value = keys.remove(&key).expect("key listed above");
            let mut parts = key.splitn(3, '.');
            let (_, method_name, param) = (
                parts.next(),
                parts.next().ok_or_else(|| bad_override(&key))?,
                parts.next().ok_or_else(|| bad_override(&key))?,
            );
            let method: Method = method_name.parse()?;
            let cfg = detectors
                .iter_mut()
                .find(|d| d.method == method)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "override {key:?} refers to {method_name}, which is not in `detectors`"
                    ))
                })?;
            apply_override(cfg, param, &value)?;
        }

        if let Some(unknown) = keys.keys().next() {
            return Err(Error::Config(format!("unknown config key {unknown:?}")));
        }

        let config = ExperimentConfig {
            name,
            dataset,
            detectors,
            schemes,
            replicates,
            master_seed,
            mode,
            ensemble,
            output_dir,
        };
        for d in &config.detectors {
            d.validate()?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// The canonical dotted-key rendering: what gets hashed for provenance
    /// and written back into the results directory.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("experiment.name", self.name.clone());
        match &self.dataset {
            DatasetSource::Synth { n, dist, rate } => {
                push("dataset.kind", "synth".into());
                push("dataset.n", n.to_string());
                push("dataset.dist", dist.to_string());
                push("dataset.rate", rate.to_string());
            }
            DatasetSource::Fig1 => push("dataset.kind", "fig1".into()),
            DatasetSource::Csv { path, gt_column } => {
                push("dataset.kind", "csv".into());
                push("dataset.path", path.display().to_string());
                let gt = match gt_column {
                    GtColumn::Auto => "auto".to_string(),
                    GtColumn::None => "none".to_string(),
                    GtColumn::Named(n) => n.clone(),
                };
                push("dataset.gt_column", gt);
            }
        }
        push(
            "detectors",
            self.detectors
                .iter()
                .map(|d| d.method.name())
                .collect::<Vec<_>>()
                .join(", "),
        );
        for d in &self.detectors {
            let defaults = DetectorConfig::<f64>::new(d.method);
            for (key, value) in d.params() {
                if defaults.params().get(&key) != Some(&value) {
                    push(&format!("detector.{}.{key}", d.method.name()), value);
                }
            }
        }
        push(
            "schemes",
            self.schemes
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", "),
        );
        push("replicates", self.replicates.to_string());
        push("master_seed", self.master_seed.to_string());
        push("mode", self.mode.to_string());
        push("ensemble", self.ensemble.to_string());
        // output_dir is deliberately omitted: where results land is not part
        // of the experiment's identity, and including it would make the
        // provenance hash depend on the destination path.
        out
    }
}

fn bad_override(key: &str) -> Error {
    Error::Config(format!(
        "malformed override {key:?} (expected detector.<method>.<param>)"
    ))
}

/// Applies one `detector.<method>.<param>` override.
fn apply_override(cfg: &mut DetectorConfig<f64>, param: &str, value: &str) -> Result<()> {
    let bad = |what: &str| Error::Config(format!("detector override {param} = {value:?}: {what}"));
    match param {
        "top_fraction" => cfg.top_fraction = value.parse().map_err(|_| bad("expected a number"))?,
        "k_clusters" => cfg.k_clusters = value.parse().map_err(|_| bad("expected an integer"))?,
        "min_pts" => cfg.min_pts = value.parse().map_err(|_| bad("expected an integer"))?,
        "chi_sq_quantile" => {
            cfg.chi_sq_quantile = value.parse().map_err(|_| bad("expected a number"))?
        }
        "mad_multiplier" => {
            cfg.mad_multiplier = value.parse().map_err(|_| bad("expected a number"))?
        }
        "ridge_epsilon" => {
            cfg.ridge_epsilon = value.parse().map_err(|_| bad("expected a number"))?
        }
        "aggregation" => {
            cfg.aggregation = match value {
                "any" => AggregationRule::Any,
                "majority" => AggregationRule::Majority,
                _ => return Err(bad("expected any or majority")),
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown detector parameter {other:?} (valid: top_fraction, k_clusters, \
                 min_pts, chi_sq_quantile, mad_multiplier, ridge_epsilon, aggregation)"
            )))
        }
    }
    Ok(())
}

/// Splits a comma-separated list, but not inside parentheses — scheme
/// descriptors carry their own commas.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                out.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out.retain(|s| !s.is_empty());
    out
}

fn parse_key<T: FromStr>(key: &str, value: Option<String>) -> Result<T> {
    let value = value.ok_or_else(|| Error::Config(format!("missing required key {key}")))?;
    value
        .parse()
        .map_err(|_| Error::Config(format!("key {key}: could not parse {value:?}")))
}
