use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::criterion::{Evaluator, FrequencyDesign};
use crate::error::{Error, Result};
use crate::model::Design;

pub const MAX_REDRAWS: usize = 100;

/// `n` independent draws from a frequency design.
pub fn sample_discrete<R: Rng + ?Sized>(freq: &FrequencyDesign, n: usize, rng: &mut R) -> Result<Design> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let dist = WeightedIndex::new(freq.values()).map_err(|e| Error::domain(format!("frequency design: {e}")))?;
    Ok(Design::new((0..n).map(|_| dist.sample(rng)).collect()))
}

/// Draws until the criterion of `eval` is finite, giving up after
/// [`MAX_REDRAWS`] singular draws.
pub fn sample_nonsingular<R: Rng + ?Sized>(
    eval: &Evaluator<'_>,
    freq: &FrequencyDesign,
    n: usize,
    rng: &mut R,
) -> Result<Design> {
    if freq.len() != eval.candidates().len() {
        return Err(Error::domain("frequency design does not match the candidate set"));
    }
    for _ in 0..MAX_REDRAWS {
        let d = sample_discrete(freq, n, rng)?;
        match eval.q_value(&d) {
            Ok(_) => return Ok(d),
            Err(e) if e.is_numerical() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SamplingFailed(format!(
        "{MAX_REDRAWS} consecutive draws of {n} runs were singular"
    )))
}
