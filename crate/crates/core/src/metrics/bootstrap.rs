//! Paired bootstrap resampling over per-document scores.
//!
//! Every resample draws document indices with replacement and compares the
//! two systems' means on the same draw. Resample `i` uses its own ChaCha
//! stream (`seed`, stream `i`), so results do not depend on how resamples are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Fraction of resamples that fail to support the system with the higher
    /// observed mean. Ties count against it.
    pub p_value: f64,
    /// Resamples where mean(a) > mean(b).
    pub wins: u64,
    pub ties: u64,
    /// Resamples where mean(a) < mean(b).
    pub losses: u64,
    pub n_resamples: u64,
    pub seed: u64,
    /// Observed mean(a) - mean(b).
    pub observed_delta: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    wins: u64,
    ties: u64,
    losses: u64,
}

fn resample(a: &[f64], b: &[f64], seed: u64, index: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = a.len();
    let (mut sum_a, mut sum_b) = (0.0, 0.0);
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        sum_a += a[i];
        sum_b += b[i];
    }
    // Same draw count on both sides, so comparing sums compares means.
    match sum_a.partial_cmp(&sum_b) {
        Some(std::cmp::Ordering::Greater) => Tally {
            wins: 1,
            ..Tally::default()
        },
        Some(std::cmp::Ordering::Less) => Tally {
            losses: 1,
            ..Tally::default()
        },
        _ => Tally {
            ties: 1,
            ..Tally::default()
        },
    }
}

pub fn paired_bootstrap(
    per_doc_a: &[f64],
    per_doc_b: &[f64],
    n_resamples: u64,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapResult> {
    if per_doc_a.len() != per_doc_b.len() {
        return Err(Error::LengthMismatch {
            generated: per_doc_a.len(),
            reference: per_doc_b.len(),
        });
    }
    if per_doc_a.len() < 2 {
        return Err(Error::TooFewDocuments {
            min: 2,
            got: per_doc_a.len(),
        });
    }
    if n_resamples == 0 {
        return Err(Error::ZeroResamples);
    }

    let indices: Vec<u64> = (0..n_resamples).collect();
    let tally = exec.fold(
        &indices,
        Tally::default,
        |acc, &i| {
            let t = resample(per_doc_a, per_doc_b, seed, i);
            Tally {
                wins: acc.wins + t.wins,
                ties: acc.ties + t.ties,
                losses: acc.losses + t.losses,
            }
        },
        |x, y| Tally {
            wins: x.wins + y.wins,
            ties: x.ties + y.ties,
            losses: x.losses + y.losses,
        },
    );

    let n = per_doc_a.len() as f64;
    let observed_delta = per_doc_a.iter().sum::<f64>() / n - per_doc_b.iter().sum::<f64>() / n;
    let against = if observed_delta >= 0.0 {
        tally.losses + tally.ties
    } else {
        tally.wins + tally.ties
    };
    Ok(BootstrapResult {
        p_value: against as f64 / n_resamples as f64,
        wins: tally.wins,
        ties: tally.ties,
        losses: tally.losses,
        n_resamples,
        seed,
        observed_delta,
    })
}
