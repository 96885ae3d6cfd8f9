//! Training runs and the ZetA-vs-Adam comparison protocol.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{ConfigFile, DataSource, ExperimentConfig, OptimizerChoice};
use super::metrics::{fmt_sig9, MetricsRecord, MetricsWriter, Split, StepTelemetry};
use crate::data::{
    inject_label_noise, iterate_batches, load_csv_dataset_with, make_blobs, make_spirals,
    train_test_split, CsvOptions, Dataset,
};
use crate::error::{Error, Result};
use crate::nn::{
    accuracy, cross_entropy, entropy_regularized_loss, mlp_backward, mlp_forward, mlp_init,
    MlpConfig, ParamSet, Tensor2,
};
use crate::optim::{Adam, ZetaHyperParams, ZetaOptimizer};

/// Test-set metrics at the end of one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochEval {
    pub epoch: usize,
    pub test_loss: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run_id: String,
    pub optimizer: String,
    pub train_steps: u64,
    /// Checksum of the parameters before the first step.
    pub init_checksum: u64,
    /// Largest class share in the test split.
    pub majority_baseline: f64,
    pub num_classes: usize,
    pub curve: Vec<EpochEval>,
}

impl RunSummary {
    pub fn final_eval(&self) -> EpochEval {
        *self.curve.last().expect("at least one epoch")
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<MetricsRecord>,
    pub summary: RunSummary,
}

/// Builds the (train, test) pair: generate or load, split, then corrupt the
/// training labels only.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let seeds = cfg.seeds();
    let full = match &cfg.data.source {
        DataSource::Blobs {
            n,
            dim,
            classes,
            spread,
        } => make_blobs(*n, *dim, *classes, *spread, seeds.data)?,
        DataSource::Spirals { n, classes, noise } => {
            make_spirals(*n, *classes, *noise, seeds.data)?
        }
        DataSource::Csv {
            path,
            classes,
            skip_header,
            scale,
        } => load_csv_dataset_with(
            path,
            *classes,
            CsvOptions {
                skip_header: *skip_header,
                min_max_scale: *scale,
            },
        )?,
    };
    let (train, test) = train_test_split(&full, cfg.data.test_fraction, seeds.split)?;
    let train = if cfg.data.label_noise > 0.0 {
        inject_label_noise(&train, cfg.data.label_noise, seeds.noise)?.0
    } else {
        train
    };
    Ok((train, test))
}

fn majority_share(ds: &Dataset) -> f64 {
    let top = ds.class_counts().into_iter().max().unwrap_or(0);
    top as f64 / ds.len() as f64
}

enum Stepper {
    Zeta(ZetaOptimizer),
    Adam(Adam),
}

fn loss_and_backward(
    params: &mut ParamSet,
    x: &Tensor2,
    labels: &[usize],
    cfg: &ExperimentConfig,
) -> Result<(f64, f64)> {
    let logits = mlp_forward(params, x)?;
    let (loss, dlogits) = entropy_regularized_loss(&logits, labels, &cfg.loss)?;
    let acc = accuracy(&logits, labels)?;
    mlp_backward(params, x, &dlogits)?;
    Ok((loss, acc))
}

/// Trains one model and evaluates it on the test split after every epoch.
///
/// Training rows carry the entropy-regularized objective on the batch; test
/// rows carry plain cross-entropy over the whole test split. When
/// `cfg.metrics_path` is set every record is streamed there as produced.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run_inner(cfg).map_err(|e| Error::Run {
        run: cfg.run_id.clone(),
        source: Box::new(e),
    })
}

fn run_inner(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (train, test) = prepare_data(cfg)?;
    let plan = cfg.batch_plan();
    let steps_per_epoch = plan.batches_per_epoch(train.len());
    if steps_per_epoch == 0 {
        return Err(Error::invalid(
            "batch plan",
            format!(
                "{} training samples yield no batch of size {}",
                train.len(),
                plan.batch_size
            ),
        ));
    }
    let total_steps = (cfg.epochs * steps_per_epoch) as u64;

    let mut params = mlp_init(&MlpConfig {
        input_dim: train.dim(),
        hidden_dim: cfg.hidden_dim,
        num_classes: train.num_classes,
        seed: cfg.seeds().model,
    })?;
    let init_checksum = params.checksum();

    let mut stepper = match cfg.optimizer {
        OptimizerChoice::Zeta(hp) => {
            let hp = ZetaHyperParams {
                total_steps: if hp.total_steps == 0 {
                    total_steps
                } else {
                    hp.total_steps
                },
                ..hp
            };
            Stepper::Zeta(ZetaOptimizer::new(&params, hp)?)
        }
        OptimizerChoice::Adam(hp) => Stepper::Adam(Adam::new(&params, hp)?),
    };

    let mut writer = cfg
        .metrics_path
        .as_deref()
        .map(MetricsWriter::create)
        .transpose()?;
    let mut records = Vec::new();
    let mut emit = |r: MetricsRecord, records: &mut Vec<MetricsRecord>| -> Result<()> {
        if let Some(w) = writer.as_mut() {
            w.write(&r)?;
        }
        records.push(r);
        Ok(())
    };

    let optimizer = cfg.optimizer.name().to_string();
    let mut step = 0u64;
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        for batch in iterate_batches(&train, &plan, epoch as u64)? {
            step += 1;
            let (loss, acc) = loss_and_backward(&mut params, &batch.features, &batch.labels, cfg)?;
            let telemetry = match &mut stepper {
                Stepper::Zeta(opt) => {
                    let diag = opt.step(&mut params, loss, |p| {
                        loss_and_backward(p, &batch.features, &batch.labels, cfg).map(|_| ())
                    })?;
                    StepTelemetry::Zeta(diag)
                }
                Stepper::Adam(opt) => {
                    let info = opt.step(&mut params)?;
                    StepTelemetry::Adam {
                        lr: opt.hp.eta,
                        grad_norm: info.grad_norm,
                        update_norm: info.update_norm,
                    }
                }
            };
            emit(
                MetricsRecord {
                    run_id: cfg.run_id.clone(),
                    optimizer: optimizer.clone(),
                    step,
                    epoch,
                    split: Split::Train,
                    loss,
                    accuracy: acc,
                    telemetry: Some(telemetry),
                },
                &mut records,
            )?;
        }

        let logits = mlp_forward(&params, &test.features)?;
        let eval = EpochEval {
            epoch,
            test_loss: cross_entropy(&logits, &test.labels)?,
            test_accuracy: accuracy(&logits, &test.labels)?,
        };
        curve.push(eval);
        emit(
            MetricsRecord {
                run_id: cfg.run_id.clone(),
                optimizer: optimizer.clone(),
                step,
                epoch,
                split: Split::Test,
                loss: eval.test_loss,
                accuracy: eval.test_accuracy,
                telemetry: None,
            },
            &mut records,
        )?;
    }
    if let Some(w) = writer {
        w.finish()?;
    }

    Ok(RunOutput {
        records,
        summary: RunSummary {
            run_id: cfg.run_id.clone(),
            optimizer,
            train_steps: step,
            init_checksum,
            majority_baseline: majority_share(&test),
            num_classes: test.num_classes,
            curve,
        },
    })
}

/// One data condition run under both optimizers.
#[derive(Debug, Clone)]
pub struct ConditionResult {
    pub condition: String,
    pub label_noise: f64,
    pub zeta: RunSummary,
    pub adam: RunSummary,
}

#[derive(Debug, Clone)]
pub struct ComparisonSummary {
    pub conditions: Vec<ConditionResult>,
    /// Files written, in creation order.
    pub artifacts: Vec<PathBuf>,
}

pub fn condition_name(label_noise: f64) -> String {
    if label_noise == 0.0 {
        "clean".to_string()
    } else {
        format!("noisy{}", fmt_sig9(label_noise * 100.0))
    }
}

/// Runs every configured noise level under Adam and ZetA from identical
/// data, split and initial parameters, then writes per-run metrics,
/// `summary.csv` and `comparison.svg` into `out_dir`.
pub fn run_comparison(file: &ConfigFile, out_dir: &Path) -> Result<ComparisonSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut conditions = Vec::new();
    let mut artifacts = Vec::new();
    for &noise in &file.compare_noise_levels {
        let condition = condition_name(noise);
        let make = |choice: OptimizerChoice| {
            let mut cfg = file.experiment.clone();
            cfg.data.label_noise = noise;
            cfg.optimizer = choice;
            cfg.run_id = format!("{}-{}-{}", file.experiment.run_id, condition, choice.name());
            cfg.metrics_path = Some(out_dir.join(format!("{condition}-{}.csv", choice.name())));
            cfg
        };
        let zeta_cfg = make(OptimizerChoice::Zeta(file.zeta));
        let adam_cfg = make(OptimizerChoice::Adam(file.adam));

        let (zeta, adam) = std::thread::scope(|s| {
            let z = s.spawn(|| run_experiment(&zeta_cfg));
            let a = run_experiment(&adam_cfg);
            (z.join().expect("zeta run panicked"), a)
        });
        let (zeta, adam) = (zeta?.summary, adam?.summary);
        if zeta.init_checksum != adam.init_checksum {
            return Err(Error::invalid(
                "comparison",
                format!("initial parameters differ between runs for condition `{condition}`"),
            ));
        }
        artifacts.extend(zeta_cfg.metrics_path.clone());
        artifacts.extend(adam_cfg.metrics_path.clone());
        conditions.push(ConditionResult {
            condition,
            label_noise: noise,
            zeta,
            adam,
        });
    }

    let summary_path = out_dir.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(&conditions))
        .map_err(|e| Error::io(&summary_path, e))?;
    artifacts.push(summary_path);
    let svg_path = out_dir.join("comparison.svg");
    super::svg::render_summary_svg(&conditions, &svg_path)?;
    artifacts.push(svg_path);
    Ok(ComparisonSummary {
        conditions,
        artifacts,
    })
}

/// Long-format per-epoch curves for every run.
pub fn summary_csv(conditions: &[ConditionResult]) -> String {
    let mut out =
        String::from("condition,optimizer,epoch,test_accuracy,test_loss,majority_baseline\n");
    for c in conditions {
        for run in [&c.zeta, &c.adam] {
            for e in &run.curve {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.condition,
                    run.optimizer,
                    e.epoch,
                    fmt_sig9(e.test_accuracy),
                    fmt_sig9(e.test_loss),
                    fmt_sig9(run.majority_baseline)
                );
            }
        }
    }
    out
}

/// Side-by-side text table of final test metrics.
pub fn format_table(summary: &ComparisonSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "condition", "zeta_acc", "adam_acc", "delta", "zeta_loss", "adam_loss", "baseline"
    );
    for c in &summary.conditions {
        let (z, a) = (c.zeta.final_eval(), c.adam.final_eval());
        let _ = writeln!(
            out,
            "{:<12} {:>9.4} {:>9.4} {:>+9.4} {:>9.4} {:>9.4} {:>9.4}",
            c.condition,
            z.test_accuracy,
            a.test_accuracy,
            z.test_accuracy - a.test_accuracy,
            z.test_loss,
            a.test_loss,
            c.zeta.majority_baseline
        );
    }
    out
}
