//! Flat `section.key = value` configuration files.
//!
//! Lines are UTF-8; `#` starts a comment; blank lines are ignored. Every
//! key is optional and unknown keys are rejected. See the README for the
//! full key list.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::BatchPlan;
use crate::error::{Error, Result};
use crate::nn::LossConfig;
use crate::optim::{AdamHyperParams, LrMode, ZetaHyperParams};

/// Where training data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Blobs {
        n: usize,
        dim: usize,
        classes: usize,
        spread: f64,
    },
    Spirals {
        n: usize,
        classes: usize,
        noise: f64,
    },
    Csv {
        path: PathBuf,
        classes: usize,
        skip_header: bool,
        scale: bool,
    },
}

impl DataSource {
    pub fn num_classes(&self) -> usize {
        match *self {
            DataSource::Blobs { classes, .. }
            | DataSource::Spirals { classes, .. }
            | DataSource::Csv { classes, .. } => classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub source: DataSource,
    /// Symmetric label-noise rate applied to the training split.
    pub label_noise: f64,
    pub test_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerChoice {
    Zeta(ZetaHyperParams),
    Adam(AdamHyperParams),
}

impl OptimizerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerChoice::Zeta(_) => "zeta",
            OptimizerChoice::Adam(_) => "adam",
        }
    }
}

/// Seeds for each random stream, all derived from one global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub data: u64,
    pub noise: u64,
    pub split: u64,
    pub model: u64,
    pub shuffle: u64,
}

impl Seeds {
    pub fn derive(seed: u64) -> Self {
        Self {
            data: seed,
            noise: seed.wrapping_add(1),
            split: seed.wrapping_add(2),
            model: seed.wrapping_add(3),
            shuffle: seed.wrapping_add(4),
        }
    }
}

/// Everything one training run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub run_id: String,
    pub seed: u64,
    pub epochs: usize,
    pub data: DataSpec,
    pub hidden_dim: usize,
    pub loss: LossConfig,
    pub optimizer: OptimizerChoice,
    pub batch_size: usize,
    pub drop_last: bool,
    /// Metrics are streamed here when set.
    pub metrics_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn seeds(&self) -> Seeds {
        Seeds::derive(self.seed)
    }

    pub fn batch_plan(&self) -> BatchPlan {
        BatchPlan {
            batch_size: self.batch_size,
            shuffle_seed: self.seeds().shuffle,
            drop_last: self.drop_last,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Schema("experiment.epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Schema("batch.size must be >= 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::Schema("model.hidden_dim must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.data.label_noise) {
            return Err(Error::Schema("data.label_noise must lie in [0, 1]".into()));
        }
        if !(self.data.test_fraction > 0.0 && self.data.test_fraction < 1.0) {
            return Err(Error::Schema(
                "data.test_fraction must lie in (0, 1)".into(),
            ));
        }
        self.loss.validate()?;
        match &self.optimizer {
            // total_steps = 0 means "derive from the run length".
            OptimizerChoice::Zeta(hp) => ZetaHyperParams {
                total_steps: hp.total_steps.max(1),
                ..*hp
            }
            .validate(),
            OptimizerChoice::Adam(hp) => hp.validate(),
        }
    }
}

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    /// The run described by the file, using `optimizer.kind`.
    pub experiment: ExperimentConfig,
    pub out_dir: PathBuf,
    pub zeta: ZetaHyperParams,
    pub adam: AdamHyperParams,
    /// Label-noise levels swept by `compare`, one condition each.
    pub compare_noise_levels: Vec<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// `origin` is used for diagnostics and to resolve a relative CSV path.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut raw = RawConfig::parse(text, origin)?;
        let cfg = build(&mut raw, origin)?;
        raw.reject_unused()?;
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    /// Replaces the global seed everywhere it is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.experiment.seed = seed;
        self
    }
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile::parse("", Path::new("<defaults>")).expect("defaults are valid")
    }
}

const KNOWN_KEYS: &[&str] = &[
    "experiment.name",
    "experiment.seed",
    "experiment.epochs",
    "experiment.out_dir",
    "data.source",
    "data.n",
    "data.dim",
    "data.classes",
    "data.spread",
    "data.spiral_noise",
    "data.label_noise",
    "data.test_fraction",
    "data.csv_path",
    "data.csv_skip_header",
    "data.csv_scale",
    "model.hidden_dim",
    "loss.entropy_weight",
    "batch.size",
    "batch.drop_last",
    "optimizer.kind",
    "zeta.lr",
    "zeta.s_min",
    "zeta.s_max",
    "zeta.beta1",
    "zeta.beta2",
    "zeta.epsilon",
    "zeta.clip_bound",
    "zeta.base_damp",
    "zeta.adam_mix",
    "zeta.total_steps",
    "zeta.weight_decay",
    "zeta.sam_rho",
    "zeta.centralize",
    "zeta.lr_mode",
    "adam.lr",
    "adam.beta1",
    "adam.beta2",
    "adam.epsilon",
    "compare.label_noise",
];

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct RawConfig {
    origin: PathBuf,
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                path: origin.to_path_buf(),
                line: line_no,
                reason,
            };
            let (key, value) = line.split_once('=').ok_or_else(|| {
                parse_err(format!("expected `section.key = value`, found `{line}`"))
            })?;
            let key = key.trim();
            if !key.contains('.') || key.starts_with('.') || key.ends_with('.') {
                return Err(parse_err(format!(
                    "key `{key}` is not of the form section.key"
                )));
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Schema(format!(
                    "{}:{line_no}: unknown key `{key}`",
                    origin.display()
                )));
            }
            let entry = Entry {
                line: line_no,
                value: value.trim().to_string(),
                used: false,
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(parse_err(format!(
                    "duplicate key `{key}` (first set on line {})",
                    prev.line
                )));
            }
        }
        Ok(Self {
            origin: origin.to_path_buf(),
            entries,
        })
    }

    fn take_str(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take_str(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| {
                Error::Schema(format!(
                    "{}:{line}: `{key}` has invalid value `{v}`",
                    self.origin.display()
                ))
            }),
        }
    }

    fn get_list(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        match self.take_str(key) {
            None => Ok(default),
            Some((v, line)) => v
                .split(',')
                .map(|item| {
                    item.trim().parse::<f64>().map_err(|_| {
                        Error::Schema(format!(
                            "{}:{line}: `{key}` has invalid list item `{}`",
                            self.origin.display(),
                            item.trim()
                        ))
                    })
                })
                .collect(),
        }
    }

    fn reject_unused(&self) -> Result<()> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((key, e)) => Err(Error::Schema(format!(
                "{}:{}: key `{key}` does not apply to this configuration",
                self.origin.display(),
                e.line
            ))),
            None => Ok(()),
        }
    }
}

fn build(raw: &mut RawConfig, origin: &Path) -> Result<ConfigFile> {
    let source_kind: String = raw.get("data.source", "blobs".to_string())?;
    let classes: usize = raw.get("data.classes", 10)?;
    let source = match source_kind.as_str() {
        "blobs" => DataSource::Blobs {
            n: raw.get("data.n", 4000)?,
            dim: raw.get("data.dim", 32)?,
            classes,
            spread: raw.get("data.spread", 0.35)?,
        },
        "spirals" => DataSource::Spirals {
            n: raw.get("data.n", 3000)?,
            classes,
            noise: raw.get("data.spiral_noise", 0.05)?,
        },
        "csv" => {
            let (path, line) = raw
                .take_str("data.csv_path")
                .ok_or_else(|| Error::Schema("data.source = csv requires data.csv_path".into()))?;
            if path.is_empty() {
                return Err(Error::Schema(format!(
                    "{}:{line}: data.csv_path is empty",
                    origin.display()
                )));
            }
            let mut path = PathBuf::from(path);
            if path.is_relative() {
                if let Some(dir) = origin.parent() {
                    path = dir.join(path);
                }
            }
            DataSource::Csv {
                path,
                classes,
                skip_header: raw.get("data.csv_skip_header", false)?,
                scale: raw.get("data.csv_scale", false)?,
            }
        }
        other => {
            return Err(Error::Schema(format!(
                "data.source must be blobs, spirals or csv, got `{other}`"
            )))
        }
    };
    let data = DataSpec {
        source,
        label_noise: raw.get("data.label_noise", 0.0)?,
        test_fraction: raw.get("data.test_fraction", 0.2)?,
    };

    let zd = ZetaHyperParams::default();
    let lr_mode = match raw.get("zeta.lr_mode", "cosine".to_string())?.as_str() {
        "cosine" => LrMode::Cosine,
        "constant" => LrMode::Constant,
        other => {
            return Err(Error::Schema(format!(
                "zeta.lr_mode must be cosine or constant, got `{other}`"
            )))
        }
    };
    let zeta = ZetaHyperParams {
        eta: raw.get("zeta.lr", zd.eta)?,
        s_min: raw.get("zeta.s_min", zd.s_min)?,
        s_max: raw.get("zeta.s_max", zd.s_max)?,
        beta1: raw.get("zeta.beta1", zd.beta1)?,
        beta2: raw.get("zeta.beta2", zd.beta2)?,
        epsilon: raw.get("zeta.epsilon", zd.epsilon)?,
        clip_bound: raw.get("zeta.clip_bound", zd.clip_bound)?,
        base_damp: raw.get("zeta.base_damp", zd.base_damp)?,
        adam_mix: raw.get("zeta.adam_mix", zd.adam_mix)?,
        // 0 = derive from the run length.
        total_steps: raw.get("zeta.total_steps", 0)?,
        weight_decay: raw.get("zeta.weight_decay", zd.weight_decay)?,
        sam_rho: raw.get("zeta.sam_rho", zd.sam_rho)?,
        centralize: raw.get("zeta.centralize", zd.centralize)?,
        lr_mode,
    };
    let ad = AdamHyperParams::default();
    let adam = AdamHyperParams {
        eta: raw.get("adam.lr", ad.eta)?,
        beta1: raw.get("adam.beta1", ad.beta1)?,
        beta2: raw.get("adam.beta2", ad.beta2)?,
        epsilon: raw.get("adam.epsilon", ad.epsilon)?,
    };
    // Validate with a placeholder horizon; the real one is set per run.
    ZetaHyperParams {
        total_steps: zeta.total_steps.max(1),
        ..zeta
    }
    .validate()
    .map_err(|e| Error::Schema(format!("zeta section: {e}")))?;
    adam.validate()
        .map_err(|e| Error::Schema(format!("adam section: {e}")))?;

    let optimizer = match raw.get("optimizer.kind", "zeta".to_string())?.as_str() {
        "zeta" => OptimizerChoice::Zeta(zeta),
        "adam" => OptimizerChoice::Adam(adam),
        other => {
            return Err(Error::Schema(format!(
                "optimizer.kind must be zeta or adam, got `{other}`"
            )))
        }
    };

    let experiment = ExperimentConfig {
        run_id: raw.get("experiment.name", "run".to_string())?,
        seed: raw.get("experiment.seed", 0)?,
        epochs: raw.get("experiment.epochs", 5)?,
        data,
        hidden_dim: raw.get("model.hidden_dim", 64)?,
        loss: LossConfig {
            entropy_weight: raw.get("loss.entropy_weight", LossConfig::default().entropy_weight)?,
        },
        optimizer,
        batch_size: raw.get("batch.size", 64)?,
        drop_last: raw.get("batch.drop_last", false)?,
        metrics_path: None,
    };
    let out_dir = PathBuf::from(raw.get("experiment.out_dir", "out".to_string())?);
    let compare_noise_levels = raw.get_list("compare.label_noise", vec![0.0, 0.1])?;
    if compare_noise_levels.is_empty()
        || compare_noise_levels
            .iter()
            .any(|r| !(0.0..=1.0).contains(r))
    {
        return Err(Error::Schema(
            "compare.label_noise must be a non-empty list of rates in [0, 1]".into(),
        ));
    }
    Ok(ConfigFile {
        experiment,
        out_dir,
        zeta,
        adam,
        compare_noise_levels,
    })
}
