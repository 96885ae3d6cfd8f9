//! Synthetic classification sets, label noise, splitting and batching.
//!
//! Every generator is a pure function of its sizes and seed. Randomness
//! comes from ChaCha8 so streams are stable across platforms and crate
//! versions.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::nn::Tensor2;

/// Turns swept by each spiral arm over `t ∈ [0, 1)`.
pub const SPIRAL_TURNS: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Tensor2,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Tensor2,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid(
                "dataset",
                "must contain at least one sample",
            ));
        }
        if features.rows() != labels.len() {
            return Err(Error::ShapeMismatch {
                context: "dataset labels",
                expected: (features.rows(), 1),
                actual: (labels.len(), 1),
            });
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                index,
                label,
                num_classes,
            });
        }
        if !features.is_finite() {
            return Err(Error::invalid("dataset", "features must be finite"));
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Dataset {
        Dataset {
            name: name.into(),
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian clusters around scaled simplex vertices.
///
/// With `d >= k` class `c` is centred on `e_{π(c)}` for a seeded coordinate
/// permutation `π`; with `d < k` the centres are seeded random unit vectors.
/// Labels cycle `0, 1, …, k-1` so class counts differ by at most one.
pub fn make_blobs(n: usize, d: usize, k: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if k < 2 || n < k || d == 0 {
        return Err(Error::invalid(
            "blobs sizes",
            format!("need n >= k >= 2 and d >= 1, got n={n} d={d} k={k}"),
        ));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::invalid(
            "blobs spread",
            format!("must be positive, got {spread}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = if d >= k {
        let mut axes: Vec<usize> = (0..d).collect();
        axes.shuffle(&mut rng);
        axes[..k]
            .iter()
            .map(|&a| {
                let mut c = vec![0.0; d];
                c[a] = 1.0;
                c
            })
            .collect()
    } else {
        (0..k)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| normal(&mut rng)).collect();
                let norm = v
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
                    .max(f64::MIN_POSITIVE);
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect()
    };

    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        labels.push(c);
        for &mu in &centers[c] {
            data.push(mu + spread * normal(&mut rng));
        }
    }
    Dataset::new(
        format!("blobs-{k}"),
        Tensor2::from_vec(n, d, data)?,
        labels,
        k,
    )
}

/// Point at parameter `t` on arm `arm` of a `k`-arm spiral.
pub fn spiral_point(arm: usize, k: usize, t: f64) -> [f64; 2] {
    let angle = 2.0 * PI * (arm as f64 / k as f64 + SPIRAL_TURNS * t);
    [t * angle.cos(), t * angle.sin()]
}

/// Interleaved 2-D spiral arms, one class per arm, with Gaussian jitter.
pub fn make_spirals(n: usize, k: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if k < 2 || n < k {
        return Err(Error::invalid(
            "spiral sizes",
            format!("need n >= k >= 2, got n={n} k={k}"),
        ));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid(
            "spiral noise",
            format!("must be >= 0, got {noise}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let arm = i % k;
        let t: f64 = rng.gen();
        let [x, y] = spiral_point(arm, k, t);
        if noise > 0.0 {
            data.push(x + noise * normal(&mut rng));
            data.push(y + noise * normal(&mut rng));
        } else {
            data.push(x);
            data.push(y);
        }
        labels.push(arm);
    }
    Dataset::new(
        format!("spirals-{k}"),
        Tensor2::from_vec(n, 2, data)?,
        labels,
        k,
    )
}

/// Symmetric label noise: each sample is flipped with probability `rate`
/// to a uniformly chosen *different* class. Returns the noisy copy and the
/// flipped indices in ascending order.
pub fn inject_label_noise(ds: &Dataset, rate: f64, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(
            "label noise rate",
            format!("must lie in [0, 1], got {rate}"),
        ));
    }
    if ds.num_classes < 2 {
        return Err(Error::invalid("label noise", "needs at least two classes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = ds.labels.clone();
    let mut flipped = Vec::new();
    for (i, label) in labels.iter_mut().enumerate() {
        let u: f64 = rng.gen();
        if u < rate {
            let mut other = rng.gen_range(0..ds.num_classes - 1);
            if other >= *label {
                other += 1;
            }
            *label = other;
            flipped.push(i);
        }
    }
    let noisy = Dataset {
        name: format!("{}-noisy", ds.name),
        features: ds.features.clone(),
        labels,
        num_classes: ds.num_classes,
    };
    Ok((noisy, flipped))
}

/// Seeded split into `(train, test)` with `round(n * test_fraction)` test
/// samples. Classes with at least two samples are represented on both sides.
pub fn train_test_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(
            "test_fraction",
            format!("must lie strictly between 0 and 1, got {test_fraction}"),
        ));
    }
    let n = ds.len();
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::invalid(
            "train/test split",
            format!("{n} samples at fraction {test_fraction} leave one side empty"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (test_part, train_part) = order.split_at_mut(n_test);
    rebalance(ds, test_part, train_part);
    rebalance(ds, train_part, test_part);

    let mut test_idx = test_part.to_vec();
    let mut train_idx = train_part.to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((
        ds.subset(&train_idx, format!("{}-train", ds.name)),
        ds.subset(&test_idx, format!("{}-test", ds.name)),
    ))
}

/// Swaps samples into `needy` for classes it lacks, taking them from
/// `donor` and giving back a sample of a class `needy` holds twice.
fn rebalance(ds: &Dataset, needy: &mut [usize], donor: &mut [usize]) {
    for class in 0..ds.num_classes {
        let count = |side: &[usize]| side.iter().filter(|&&i| ds.labels[i] == class).count();
        if count(needy) > 0 || count(donor) < 2 {
            continue;
        }
        let mut needy_counts = vec![0usize; ds.num_classes];
        for &i in needy.iter() {
            needy_counts[ds.labels[i]] += 1;
        }
        let give = needy.iter().position(|&i| needy_counts[ds.labels[i]] >= 2);
        let take = donor.iter().position(|&i| ds.labels[i] == class);
        if let (Some(g), Some(t)) = (give, take) {
            std::mem::swap(&mut needy[g], &mut donor[t]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchPlan {
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub drop_last: bool,
}

impl Default for BatchPlan {
    fn default() -> Self {
        Self {
            batch_size: 64,
            shuffle_seed: 0,
            drop_last: false,
        }
    }
}

impl BatchPlan {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be >= 1"));
        }
        Ok(())
    }

    pub fn batches_per_epoch(&self, n: usize) -> usize {
        if self.drop_last {
            n / self.batch_size
        } else {
            n.div_ceil(self.batch_size)
        }
    }
}

/// Index order for one epoch: a ChaCha stream keyed by `(shuffle_seed, epoch)`.
pub fn epoch_order(n: usize, plan: &BatchPlan, epoch: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.shuffle_seed);
    rng.set_stream(epoch);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// One mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub features: Tensor2,
    pub labels: Vec<usize>,
}

/// Iterator over the mini-batches of one epoch.
#[derive(Debug)]
pub struct BatchIter<'a> {
    ds: &'a Dataset,
    order: Vec<usize>,
    batch_size: usize,
    drop_last: bool,
    pos: usize,
}

impl Iterator for BatchIter<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        let remaining = self.order.len() - self.pos;
        if remaining == 0 || (self.drop_last && remaining < self.batch_size) {
            return None;
        }
        let end = self.pos + remaining.min(self.batch_size);
        let idx = &self.order[self.pos..end];
        self.pos = end;
        Some(Batch {
            features: self.ds.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.ds.labels[i]).collect(),
        })
    }
}

pub fn iterate_batches<'a>(ds: &'a Dataset, plan: &BatchPlan, epoch: u64) -> Result<BatchIter<'a>> {
    plan.validate()?;
    Ok(BatchIter {
        ds,
        order: epoch_order(ds.len(), plan, epoch),
        batch_size: plan.batch_size,
        drop_last: plan.drop_last,
        pos: 0,
    })
}

/// Options for [`load_csv_dataset_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvOptions {
    pub skip_header: bool,
    /// Min-max scale every feature column to `[0, 1]`.
    pub min_max_scale: bool,
}

/// Reads `label,f1,…,fd` rows.
pub fn load_csv_dataset(path: &Path, num_classes: usize) -> Result<Dataset> {
    load_csv_dataset_with(path, num_classes, CsvOptions::default())
}

pub fn load_csv_dataset_with(path: &Path, num_classes: usize, opts: CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.skip_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut width: Option<usize> = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < 2 {
            return Err(parse_err(
                line,
                "expected a label and at least one feature".into(),
            ));
        }
        let d = record.len() - 1;
        match width {
            None => width = Some(d),
            Some(w) if w != d => {
                return Err(parse_err(line, format!("expected {w} features, found {d}")));
            }
            Some(_) => {}
        }
        let label: usize = record[0]
            .parse()
            .map_err(|_| parse_err(line, format!("label `{}` is not a class index", &record[0])))?;
        if label >= num_classes {
            return Err(parse_err(
                line,
                format!("label {label} out of range for {num_classes} classes"),
            ));
        }
        labels.push(label);
        for field in record.iter().skip(1) {
            let x: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("feature `{field}` is not a number")))?;
            if !x.is_finite() {
                return Err(parse_err(line, format!("feature `{field}` is not finite")));
            }
            data.push(x);
        }
    }
    let Some(d) = width else {
        return Err(Error::invalid(
            "csv dataset",
            format!("{} contains no samples", path.display()),
        ));
    };
    let n = labels.len();
    let mut features = Tensor2::from_vec(n, d, data)?;
    if opts.min_max_scale {
        min_max_scale(&mut features);
    }
    let name = path
        .file_stem()
        .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, features, labels, num_classes)
}

fn min_max_scale(t: &mut Tensor2) {
    for c in 0..t.cols() {
        let (lo, hi) = (0..t.rows())
            .map(|r| t.get(r, c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
        let range = hi - lo;
        for r in 0..t.rows() {
            let x = t.get(r, c);
            t.set(r, c, if range > 0.0 { (x - lo) / range } else { 0.0 });
        }
    }
}
