//! ROUGE-1/2/L on linearized tables with the separators turned into spaces.

use std::collections::HashMap;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use super::f1::Prf;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeOptions {
    /// Apply the English Snowball stemmer to every token.
    pub stem: bool,
}

/// Replaces `<>` and `|` with spaces, lowercases and splits on whitespace.
pub fn rouge_preprocess(linearized: &str) -> Vec<String> {
    linearized
        .replace("<>", " ")
        .replace('|', " ")
        .to_lowercase()
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

pub fn rouge_tokens(linearized: &str, options: RougeOptions) -> Vec<String> {
    let tokens = rouge_preprocess(linearized);
    if !options.stem {
        return tokens;
    }
    let stemmer = Stemmer::create(Algorithm::English);
    tokens
        .iter()
        .map(|t| stemmer.stem(t).into_owned())
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap for `n` in {1, 2}.
pub fn rouge_n(generated: &[String], reference: &[String], n: usize) -> Result<Prf> {
    if !(1..=2).contains(&n) {
        return Err(Error::UnsupportedNgram(n));
    }
    let gen = ngram_counts(generated, n);
    let reference = ngram_counts(reference, n);
    let overlap: u64 = gen
        .iter()
        .map(|(gram, &c)| c.min(reference.get(gram).copied().unwrap_or(0)))
        .sum();
    Ok(Prf::from_counts(
        overlap,
        gen.values().sum(),
        reference.values().sum(),
    ))
}

/// Length of the longest common subsequence, O(n·m) time, O(m) memory.
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Whole-sequence LCS F-measure.
pub fn rouge_l(generated: &[String], reference: &[String]) -> Prf {
    let lcs = lcs_len(generated, reference) as u64;
    Prf::from_counts(lcs, generated.len() as u64, reference.len() as u64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: Prf,
    pub rouge2: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
}

/// ROUGE-1/2/L between two linearized strings, on the unit scale.
pub fn rouge_all(generated: &str, reference: &str, options: RougeOptions) -> RougeScores {
    let g = rouge_tokens(generated, options);
    let r = rouge_tokens(reference, options);
    RougeScores {
        rouge1: rouge_n(&g, &r, 1).expect("n = 1"),
        rouge2: rouge_n(&g, &r, 2).expect("n = 2"),
        rouge_l: rouge_l(&g, &r),
    }
}
