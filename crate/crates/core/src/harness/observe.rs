use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Length of the observed prefix: `⌈ratio · len⌉`, clamped to the trace.
pub fn prefix_len(len: usize, ratio: f64) -> usize {
    // The small slack keeps products like 0.6 · 5 from rounding up past 3.
    ((ratio * len as f64 - 1e-9).ceil().max(0.0) as usize).min(len)
}

/// Observed prefix of `trace`; when `partial`, `⌊drop_fraction · len⌋` of the
/// prefix's actions are then removed uniformly at random, keeping order.
pub fn make_observations<T: Clone>(trace: &[T], ratio: f64, partial: bool, drop_fraction: f64, seed: u64) -> Vec<T> {
    let prefix = &trace[..prefix_len(trace.len(), ratio)];
    if !partial {
        return prefix.to_vec();
    }
    let drop = ((drop_fraction * prefix.len() as f64 + 1e-9).floor() as usize).min(prefix.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dropped = sample(&mut rng, prefix.len(), drop).into_vec();
    dropped.sort_unstable();
    prefix
        .iter()
        .enumerate()
        .filter(|(i, _)| dropped.binary_search(i).is_err())
        .map(|(_, a)| a.clone())
        .collect()
}
