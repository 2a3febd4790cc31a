use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use surco_core::baselines::HeuristicConfig;
use surco_core::diffsolver::{BlackboxConfig, DEFAULT_LAMBDA};
use surco_core::instances::{DeadlineRegime, RouteInstance};
use surco_core::surco::{CostInit, PriorTrainConfig, ZeroConfig};

use crate::error::{CliError, CliResult};

/// Mixed into the master seed to derive the training-set stream.
const TRAIN_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Route,
    Toy,
    Assignment,
}

impl Domain {
    pub fn label(self) -> &'static str {
        match self {
            Domain::Route => "route",
            Domain::Toy => "toy",
            Domain::Assignment => "assignment",
        }
    }

    pub fn supports(self, method: Method) -> bool {
        match self {
            Domain::Route => true,
            Domain::Assignment => matches!(
                method,
                Method::Zero | Method::Prior | Method::Hybrid | Method::Oracle
            ),
            Domain::Toy => matches!(method, Method::Zero | Method::Oracle),
        }
    }
}

/// Declaration order is the row order within an instance in results.csv.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Zero,
    Prior,
    Hybrid,
    Heuristic,
    Oracle,
    Let,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Zero,
        Method::Prior,
        Method::Hybrid,
        Method::Heuristic,
        Method::Oracle,
        Method::Let,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Zero => "zero",
            Method::Prior => "prior",
            Method::Hybrid => "hybrid",
            Method::Heuristic => "heuristic",
            Method::Oracle => "oracle",
            Method::Let => "let",
        }
    }

    pub fn needs_model(self) -> bool {
        matches!(self, Method::Prior | Method::Hybrid)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s.trim())
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown method {s:?}; expected one of zero, prior, hybrid, heuristic, oracle, let"
                ))
            })
    }
}

/// Parses a comma-separated method list, keeping first occurrences.
pub fn parse_methods(s: &str) -> CliResult<Vec<Method>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("empty method list".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    Random,
    /// Start from the edge means, which makes the first solve the LET path.
    LetWarmStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroSettings {
    pub alpha: f64,
    pub max_steps: usize,
    pub patience: usize,
    pub init_mode: InitMode,
    /// Lower end of the random init range. Defaults per domain when absent.
    pub init_low: Option<f64>,
    pub init_high: Option<f64>,
    pub blackbox_lambda: f64,
}

impl Default for ZeroSettings {
    fn default() -> Self {
        let core = ZeroConfig::default();
        Self {
            alpha: core.alpha,
            max_steps: core.max_steps,
            patience: core.patience,
            init_mode: InitMode::Random,
            init_low: None,
            init_high: None,
            blackbox_lambda: DEFAULT_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSettings {
    pub epochs: usize,
    pub lambda_reg: Option<f64>,
    pub lr: f64,
    pub cost_lr: f64,
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub blackbox_lambda: f64,
}

impl Default for PriorSettings {
    fn default() -> Self {
        let core = PriorTrainConfig::default();
        Self {
            epochs: core.epochs,
            lambda_reg: core.lambda_reg,
            lr: core.lr,
            cost_lr: core.cost_lr,
            hidden: core.hidden,
            batch_size: core.batch_size,
            blackbox_lambda: core.blackbox.lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheorySettings {
    pub epsilon: f64,
    pub lipschitz: f64,
    pub spacings: Vec<f64>,
    pub link_radius: f64,
    /// Sizes of the evenly spaced and random datasets in the cover table.
    pub dataset_sizes: Vec<usize>,
    pub random_trials: usize,
    /// Random queries used to measure the 1-NN error.
    pub probes: usize,
}

impl Default for TheorySettings {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            lipschitz: 1.0,
            spacings: vec![0.1, 0.01, 0.001],
            link_radius: 0.1,
            dataset_sizes: vec![10, 20, 40, 60, 78, 79, 80, 100, 160],
            random_trials: 20,
            probes: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub domain: Domain,
    /// Deadline regime; route only.
    pub regime: DeadlineRegime,
    pub methods: Vec<Method>,
    pub rows: usize,
    pub cols: usize,
    pub items: usize,
    pub devices: usize,
    /// Grid size over `[0, π/2]` for the toy domain; the midpoint is skipped.
    pub toy_points: usize,
    pub train_count: usize,
    pub test_count: usize,
    /// Master seed. Test instances use it directly, training instances a salted copy.
    pub seed: u64,
    pub zero: ZeroSettings,
    pub heuristic: HeuristicConfig,
    pub prior: PriorSettings,
    pub theory: TheorySettings,
    /// Trained model location; defaults to `<out>/prior_model.json`.
    pub model: Option<PathBuf>,
    pub out: PathBuf,
    /// Worker threads for `run`; 0 uses every core.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            domain: Domain::Route,
            regime: DeadlineRegime::Normal,
            methods: vec![Method::Zero, Method::Heuristic, Method::Oracle, Method::Let],
            rows: 5,
            cols: 5,
            items: 6,
            devices: 3,
            toy_points: 50,
            train_count: 25,
            test_count: 25,
            seed: 0,
            zero: ZeroSettings::default(),
            heuristic: HeuristicConfig::default(),
            prior: PriorSettings::default(),
            theory: TheorySettings::default(),
            model: None,
            out: PathBuf::from("out"),
            jobs: 1,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub methods: Option<Vec<Method>>,
    pub regime: Option<DeadlineRegime>,
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str, path: &Path) -> CliResult<Self> {
        serde_json::from_str(s).map_err(|source| CliError::ConfigParse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads `path` (or starts from defaults), applies overrides and validates.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::from_json(&text, p)?
            }
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(m) = &o.methods {
            self.methods = m.clone();
        }
        if let Some(r) = o.regime {
            self.regime = r;
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.methods.is_empty() {
            return bad("methods is empty".into());
        }
        for m in &self.methods {
            if !self.domain.supports(*m) {
                return bad(format!(
                    "method {m} is not available for the {} domain",
                    self.domain.label()
                ));
            }
        }
        if self.test_count == 0 {
            return bad("test_count must be at least 1".into());
        }
        match self.domain {
            Domain::Route => {
                if self.rows < 2 || self.cols < 2 {
                    return bad(format!("grid must be at least 2x2, got {}x{}", self.rows, self.cols));
                }
            }
            Domain::Assignment => {
                if self.items == 0 || self.devices == 0 {
                    return bad("items and devices must be positive".into());
                }
            }
            Domain::Toy => {
                if self.toy_points < 2 {
                    return bad("toy_points must be at least 2".into());
                }
                if self.zero.init_mode == InitMode::LetWarmStart {
                    return bad("let-warm-start needs route instances".into());
                }
            }
        }
        if self.domain == Domain::Assignment && self.zero.init_mode == InitMode::LetWarmStart {
            return bad("let-warm-start needs route instances".into());
        }
        self.zero_config(0, None)?.validate()?;
        self.heuristic.validate()?;
        self.prior_config().validate()?;
        let t = &self.theory;
        if !(t.epsilon > 0.0 && t.lipschitz > 0.0 && t.link_radius > 0.0) {
            return bad("theory epsilon, lipschitz and link_radius must be positive".into());
        }
        if t.spacings.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return bad("theory spacings must be positive".into());
        }
        if t.dataset_sizes.contains(&0) {
            return bad("theory dataset sizes must be positive".into());
        }
        Ok(())
    }

    fn init_range(&self) -> (f64, f64) {
        // the toy solver minimizes, so all-positive costs would pin it to (0,0)
        let (lo, hi) = match self.domain {
            Domain::Toy => (-1.0, 0.0),
            _ => (0.1, 1.0),
        };
        (self.zero.init_low.unwrap_or(lo), self.zero.init_high.unwrap_or(hi))
    }

    /// Per-instance SurCo-zero settings. `route` supplies the warm-start means.
    pub fn zero_config(&self, seed: u64, route: Option<&RouteInstance>) -> CliResult<ZeroConfig> {
        let init = match (self.zero.init_mode, route) {
            (InitMode::LetWarmStart, Some(inst)) => CostInit::Fixed(inst.mu().to_vec()),
            _ => {
                let (low, high) = self.init_range();
                CostInit::Uniform { low, high }
            }
        };
        Ok(ZeroConfig {
            alpha: self.zero.alpha,
            max_steps: self.zero.max_steps,
            patience: self.zero.patience,
            init,
            seed,
            blackbox: BlackboxConfig::new(self.zero.blackbox_lambda)?,
        })
    }

    pub fn prior_config(&self) -> PriorTrainConfig {
        PriorTrainConfig {
            epochs: self.prior.epochs,
            lambda_reg: self.prior.lambda_reg,
            lr: self.prior.lr,
            cost_lr: self.prior.cost_lr,
            hidden: self.prior.hidden.clone(),
            batch_size: self.prior.batch_size,
            seed: self.seed,
            blackbox: BlackboxConfig {
                lambda: self.prior.blackbox_lambda,
            },
        }
    }

    pub fn train_seed(&self) -> u64 {
        self.seed ^ TRAIN_SALT
    }

    pub fn model_path(&self) -> PathBuf {
        self.model
            .clone()
            .unwrap_or_else(|| self.out.join("prior_model.json"))
    }

    pub fn instance_dir(&self, split: Split) -> PathBuf {
        self.out.join("instances").join(split.label())
    }

    /// Canonical JSON of everything that affects results (`out` and `jobs` excluded).
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("out");
            obj.remove("jobs");
        }
        value.to_string()
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"domian": "route"}"#, Path::new("c.json")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = ExperimentConfig::from_json(r#"{"zero": {"alpha": 0.1, "beta": 1}}"#, Path::new("c.json"))
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn hash_ignores_output_location_and_jobs() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out = PathBuf::from("elsewhere");
        b.jobs = 8;
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn method_lists() {
        assert_eq!(
            parse_methods("zero, let,zero").unwrap(),
            vec![Method::Zero, Method::Let]
        );
        assert!(parse_methods("zero,dijkstra").is_err());
        assert!(parse_methods(" , ").is_err());
    }

    #[test]
    fn domain_method_compatibility() {
        let cfg = ExperimentConfig {
            domain: Domain::Toy,
            methods: vec![Method::Heuristic],
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        let cfg = ExperimentConfig {
            domain: Domain::Toy,
            methods: vec![Method::Zero, Method::Oracle],
            ..ExperimentConfig::default()
        };
        cfg.validate().unwrap();
    }

    #[test]
    fn toy_init_defaults_to_negative_costs() {
        let cfg = ExperimentConfig {
            domain: Domain::Toy,
            ..ExperimentConfig::default()
        };
        assert_eq!(
            cfg.zero_config(0, None).unwrap().init,
            CostInit::Uniform { low: -1.0, high: 0.0 }
        );
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_json(&cfg.to_pretty_json(), Path::new("c.json")).unwrap();
        assert_eq!(cfg, back);
    }
}
