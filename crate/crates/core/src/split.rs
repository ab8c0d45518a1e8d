use rand::seq::SliceRandom;

use crate::error::{CoreError, Result};
use crate::gesture::GestureClass;
use crate::seed;

/// Stratified split of labelled items into a training and a validation part.
///
/// Returns two ascending index lists. Within every class, `round(fraction·n)`
/// items go to the training part, clamped so each side keeps at least one.
pub fn train_val_split(
    labels: &[GestureClass],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CoreError::Config(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let mut train = Vec::with_capacity(labels.len());
    let mut val = Vec::new();
    for class in GestureClass::ALL {
        let mut members: Vec<usize> =
            labels.iter().enumerate().filter(|(_, &l)| l == class).map(|(i, _)| i).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(CoreError::Stratification { class, count: members.len() });
        }
        let mut rng = seed::rng(seed::derive(seed, &[class.code() as u64]));
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..n_train]);
        val.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}
