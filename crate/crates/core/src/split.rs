//! Deterministic train/valid/test assignment from the SHA-256 of a title.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MODULUS: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLabel {
    Train,
    Valid,
    Test,
}

impl SplitLabel {
    pub const ALL: [SplitLabel; 3] = [SplitLabel::Train, SplitLabel::Valid, SplitLabel::Test];

    pub fn name(self) -> &'static str {
        match self {
            SplitLabel::Train => "train",
            SplitLabel::Valid => "valid",
            SplitLabel::Test => "test",
        }
    }

    fn from_remainder(r: u32) -> SplitLabel {
        match r {
            0 => SplitLabel::Test,
            1 => SplitLabel::Valid,
            _ => SplitLabel::Train,
        }
    }
}

impl fmt::Display for SplitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplitLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SplitLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown split {s:?}"))
    }
}

/// Reduces a big-endian integer given as bytes modulo [`MODULUS`].
pub fn digest_remainder(digest: &[u8]) -> u32 {
    digest
        .iter()
        .fold(0u32, |r, &byte| (r * 256 + u32::from(byte)) % MODULUS)
}

/// Hashes the title bytes as-is; no case folding or Unicode normalization.
pub fn assign_split(title: &str) -> Result<SplitLabel> {
    if title.is_empty() {
        return Err(Error::EmptyTitle);
    }
    let digest = Sha256::digest(title.as_bytes());
    Ok(SplitLabel::from_remainder(digest_remainder(&digest)))
}
