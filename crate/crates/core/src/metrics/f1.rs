//! Clipped multiset F1 over typed cell elements.
//!
//! Each element contributes `min(count in generated, count in reference)`
//! matches, so repeating a cell in the output cannot raise precision past
//! what the reference supports. Table-F1 averages per-document F1; Corpus-F1
//! pools counts over all documents before scoring.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{typed_elements, Cell, CellType, TypedElement};
use crate::par::Execution;

/// Precision, recall and F1 in `[0, 1]`. Zero denominators give zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    pub fn from_counts(matched: u64, generated: u64, reference: u64) -> Prf {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        Prf::new(ratio(matched, generated), ratio(matched, reference))
    }

    pub fn scaled(self, factor: f64) -> Prf {
        Prf {
            precision: self.precision * factor,
            recall: self.recall * factor,
            f1: self.f1 * factor,
        }
    }
}

/// Element counts for a single cell type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMultiset {
    cell_type: CellType,
    counts: HashMap<TypedElement, u64>,
    total: u64,
}

impl CellMultiset {
    pub fn new(cell_type: CellType) -> CellMultiset {
        CellMultiset {
            cell_type,
            counts: HashMap::new(),
            total: 0,
        }
    }

    /// Counts the elements of `cell_type` in a table.
    pub fn from_cells(cells: &[Cell], cell_type: CellType) -> CellMultiset {
        let mut set = CellMultiset::new(cell_type);
        for element in typed_elements(cells) {
            if element.cell_type() == cell_type {
                set.add(element, 1);
            }
        }
        set
    }

    pub fn cell_type(&self) -> CellType {
        self.cell_type
    }

    /// Adds `n` occurrences. Elements of another type are ignored.
    pub fn add(&mut self, element: TypedElement, n: u64) {
        if n == 0 || element.cell_type() != self.cell_type {
            return;
        }
        *self.counts.entry(element).or_default() += n;
        self.total += n;
    }

    pub fn count(&self, element: &TypedElement) -> u64 {
        self.counts.get(element).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TypedElement, u64)> {
        self.counts.iter().map(|(e, &n)| (e, n))
    }

    /// Adds every count of `other` into `self`.
    pub fn merge(mut self, other: CellMultiset) -> CellMultiset {
        if self.counts.len() < other.counts.len() && self.cell_type == other.cell_type {
            return other.merge(self);
        }
        for (element, n) in other.counts {
            self.add(element, n);
        }
        self
    }

    /// Sum of clipped matches against `reference`.
    pub fn clipped_overlap(&self, reference: &CellMultiset) -> u64 {
        let (small, large) = if self.counts.len() <= reference.counts.len() {
            (self, reference)
        } else {
            (reference, self)
        };
        small
            .counts
            .iter()
            .map(|(e, &n)| n.min(large.count(e)))
            .sum()
    }
}

/// `min(count in generated, count in reference)` for one element.
pub fn clipped_match(
    generated: &CellMultiset,
    reference: &CellMultiset,
    element: &TypedElement,
) -> Result<u64> {
    for found in [reference.cell_type, element.cell_type()] {
        if found != generated.cell_type {
            return Err(Error::TypeMismatch {
                expected: generated.cell_type,
                found,
            });
        }
    }
    Ok(generated.count(element).min(reference.count(element)))
}

/// Precision/recall/F1 of one generated table against its reference.
pub fn document_prf(generated: &CellMultiset, reference: &CellMultiset) -> Prf {
    Prf::from_counts(
        generated.clipped_overlap(reference),
        generated.total(),
        reference.total(),
    )
}

fn check_aligned(generated: usize, reference: usize) -> Result<()> {
    if generated != reference {
        return Err(Error::LengthMismatch {
            generated,
            reference,
        });
    }
    if generated == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}

/// Per-type Table-F1.
///
/// A document where neither side has an element of the type is excluded
/// (`None` in `per_doc`) and does not count towards the mean; `mean` is
/// `None` if every document is excluded.
#[derive(Clone, Debug, PartialEq)]
pub struct TableF1 {
    pub mean: Option<f64>,
    pub per_doc: Vec<Option<Prf>>,
}

impl TableF1 {
    pub fn included(&self) -> usize {
        self.per_doc.iter().flatten().count()
    }
}

pub fn table_f1<G, R>(
    generated: &[G],
    reference: &[R],
    cell_type: CellType,
    exec: Execution,
) -> Result<TableF1>
where
    G: AsRef<[Cell]> + Sync,
    R: AsRef<[Cell]> + Sync,
{
    check_aligned(generated.len(), reference.len())?;
    let per_doc = exec.map_range(generated.len(), |i| {
        let g = CellMultiset::from_cells(generated[i].as_ref(), cell_type);
        let r = CellMultiset::from_cells(reference[i].as_ref(), cell_type);
        if g.is_empty() && r.is_empty() {
            None
        } else {
            Some(document_prf(&g, &r))
        }
    });
    let included: Vec<f64> = per_doc.iter().flatten().map(|p| p.f1).collect();
    let mean = (!included.is_empty()).then(|| included.iter().sum::<f64>() / included.len() as f64);
    Ok(TableF1 { mean, per_doc })
}

/// Counts of one type pooled over a whole corpus.
pub fn pooled_multiset<T>(tables: &[T], cell_type: CellType, exec: Execution) -> CellMultiset
where
    T: AsRef<[Cell]> + Sync,
{
    exec.fold(
        tables,
        || CellMultiset::new(cell_type),
        |acc, t| acc.merge(CellMultiset::from_cells(t.as_ref(), cell_type)),
        CellMultiset::merge,
    )
}

pub fn corpus_f1<G, R>(
    generated: &[G],
    reference: &[R],
    cell_type: CellType,
    exec: Execution,
) -> Result<Prf>
where
    G: AsRef<[Cell]> + Sync,
    R: AsRef<[Cell]> + Sync,
{
    check_aligned(generated.len(), reference.len())?;
    let g = pooled_multiset(generated, cell_type, exec);
    let r = pooled_multiset(reference, cell_type, exec);
    Ok(document_prf(&g, &r))
}
