use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::params::ParamSet;
use crate::error::{Error, Result};

/// Coordinates probed when the parameter set is larger than this.
pub const DEFAULT_SAMPLE: usize = 256;

/// Worst relative error between stored gradients and central differences.
///
/// Probes every coordinate when there are at most [`DEFAULT_SAMPLE`],
/// otherwise a fixed pseudo-random subset of that size. The relative error
/// denominator is `max(|analytic|, |numeric|, 1e-8)`.
pub fn finite_diff_check<F>(params: &ParamSet, loss_fn: F, step: f64) -> Result<f64>
where
    F: FnMut(&ParamSet) -> f64,
{
    finite_diff_check_sampled(params, loss_fn, step, DEFAULT_SAMPLE, 0)
}

pub fn finite_diff_check_sampled<F>(
    params: &ParamSet,
    mut loss_fn: F,
    step: f64,
    sample: usize,
    seed: u64,
) -> Result<f64>
where
    F: FnMut(&ParamSet) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("finite difference step", format!("{step}")));
    }
    let total = params.num_scalars();
    let coords: Vec<usize> = if total <= sample {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, total, sample).into_vec();
        picked.sort_unstable();
        picked
    };

    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for flat in coords {
        let (entry, offset) = params.locate(flat).expect("coordinate in range");
        let original = params.by_index(entry).value.as_slice()[offset];
        let analytic = params.by_index(entry).grad.as_slice()[offset];

        probe.by_index_mut(entry).value.as_mut_slice()[offset] = original + step;
        let plus = loss_fn(&probe);
        probe.by_index_mut(entry).value.as_mut_slice()[offset] = original - step;
        let minus = loss_fn(&probe);
        probe.by_index_mut(entry).value.as_mut_slice()[offset] = original;

        let numeric = (plus - minus) / (2.0 * step);
        let denom = analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    Ok(worst)
}
