//! Corpus statistics: cell-type frequencies, per-header value frequencies and
//! table sizes, each broken down by split.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::InfoboxRecord;
use crate::metrics::{CellType, PerType};
use crate::model::{typed_elements, Cell, TypedElement};
use crate::par::Execution;
use crate::split::SplitLabel;

/// A value for the whole dataset and for each split.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BySplit<T> {
    pub all: T,
    pub train: T,
    pub valid: T,
    pub test: T,
}

impl<T> BySplit<T> {
    pub fn get(&self, split: SplitLabel) -> &T {
        match split {
            SplitLabel::Train => &self.train,
            SplitLabel::Valid => &self.valid,
            SplitLabel::Test => &self.test,
        }
    }

    fn get_mut(&mut self, split: SplitLabel) -> &mut T {
        match split {
            SplitLabel::Train => &mut self.train,
            SplitLabel::Valid => &mut self.valid,
            SplitLabel::Test => &mut self.test,
        }
    }

    fn rows(&self) -> [(&'static str, &T); 4] {
        [
            ("All", &self.all),
            ("Train", &self.train),
            ("Valid", &self.valid),
            ("Test", &self.test),
        ]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frequency {
    /// Distinct elements.
    pub type_frequency: usize,
    /// Total occurrences.
    pub appearance_frequency: usize,
}

pub type FrequencyTable = BySplit<PerType<Frequency>>;

/// Population statistics of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
}

impl DistributionSummary {
    pub fn of(values: &[f64]) -> Option<DistributionSummary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(DistributionSummary {
            mean,
            std: var.sqrt(),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }
}

type Counts = HashMap<TypedElement, usize>;

#[derive(Default)]
struct SplitCounts {
    by_type: [Counts; 3],
}

impl SplitCounts {
    fn add_cells(&mut self, cells: &[Cell]) {
        for e in typed_elements(cells) {
            *self.by_type[type_index(e.cell_type())]
                .entry(e)
                .or_default() += 1;
        }
    }

    fn merge(mut self, other: SplitCounts) -> SplitCounts {
        for (mine, theirs) in self.by_type.iter_mut().zip(other.by_type) {
            for (e, n) in theirs {
                *mine.entry(e).or_default() += n;
            }
        }
        self
    }

    fn frequencies(&self) -> PerType<Frequency> {
        PerType::from_fn(|t| {
            let counts = &self.by_type[type_index(t)];
            Frequency {
                type_frequency: counts.len(),
                appearance_frequency: counts.values().sum(),
            }
        })
    }
}

fn type_index(t: CellType) -> usize {
    match t {
        CellType::Group => 0,
        CellType::Header => 1,
        CellType::Value => 2,
    }
}

fn count_by_split(dataset: &[InfoboxRecord], exec: Execution) -> BySplit<SplitCounts> {
    exec.fold(
        dataset,
        BySplit::<SplitCounts>::default,
        |mut acc, r| {
            acc.get_mut(r.split).add_cells(r.table.cells());
            acc
        },
        |a, b| BySplit {
            all: SplitCounts::default(),
            train: a.train.merge(b.train),
            valid: a.valid.merge(b.valid),
            test: a.test.merge(b.test),
        },
    )
}

pub fn cell_type_frequencies(dataset: &[InfoboxRecord], exec: Execution) -> Result<FrequencyTable> {
    if dataset.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let counts = count_by_split(dataset, exec);
    let train = counts.train.frequencies();
    let valid = counts.valid.frequencies();
    let test = counts.test.frequencies();
    let all = counts
        .train
        .merge(counts.valid)
        .merge(counts.test)
        .frequencies();
    Ok(BySplit {
        all,
        train,
        valid,
        test,
    })
}

/// Value-frequency summaries across headers: distinct values per header and
/// total value occurrences per header. Groups are not involved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeaderValueStats {
    pub type_frequency: DistributionSummary,
    pub appearance_frequency: DistributionSummary,
    pub headers: usize,
}

fn header_value_stats<'a>(
    records: impl Iterator<Item = &'a InfoboxRecord>,
) -> Option<HeaderValueStats> {
    let mut per_header: HashMap<&str, HashMap<&str, usize>> = HashMap::new();
    for r in records {
        for cell in r.table.cells() {
            if let Cell::Pair { header, value } = cell {
                *per_header
                    .entry(header)
                    .or_default()
                    .entry(value)
                    .or_default() += 1;
            }
        }
    }
    let distinct: Vec<f64> = per_header.values().map(|v| v.len() as f64).collect();
    let total: Vec<f64> = per_header
        .values()
        .map(|v| v.values().sum::<usize>() as f64)
        .collect();
    Some(HeaderValueStats {
        type_frequency: DistributionSummary::of(&distinct)?,
        appearance_frequency: DistributionSummary::of(&total)?,
        headers: per_header.len(),
    })
}

/// Per-split summaries are `None` for splits without pair cells.
pub fn per_header_value_stats(
    dataset: &[InfoboxRecord],
) -> Result<BySplit<Option<HeaderValueStats>>> {
    let all = header_value_stats(dataset.iter()).ok_or(Error::NoPairCells)?;
    let of_split = |s| header_value_stats(dataset.iter().filter(|r| r.split == s));
    Ok(BySplit {
        all: Some(all),
        train: of_split(SplitLabel::Train),
        valid: of_split(SplitLabel::Valid),
        test: of_split(SplitLabel::Test),
    })
}

/// Number of cells per table (a pair counts as one cell).
pub fn cells_per_table_stats(
    dataset: &[InfoboxRecord],
) -> Result<BySplit<Option<DistributionSummary>>> {
    if dataset.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let sizes = |s: Option<SplitLabel>| {
        let v: Vec<f64> = dataset
            .iter()
            .filter(|r| s.is_none_or(|s| r.split == s))
            .map(|r| r.table.len() as f64)
            .collect();
        DistributionSummary::of(&v)
    };
    Ok(BySplit {
        all: sizes(None),
        train: sizes(Some(SplitLabel::Train)),
        valid: sizes(Some(SplitLabel::Valid)),
        test: sizes(Some(SplitLabel::Test)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub records: BySplit<usize>,
    pub cell_frequencies: FrequencyTable,
    /// Absent when the dataset has no pair cells.
    pub header_values: Option<BySplit<Option<HeaderValueStats>>>,
    pub cells_per_table: BySplit<Option<DistributionSummary>>,
}

pub fn compute_stats(dataset: &[InfoboxRecord], exec: Execution) -> Result<StatsReport> {
    let mut records = BySplit {
        all: dataset.len(),
        ..BySplit::default()
    };
    for r in dataset {
        *records.get_mut(r.split) += 1;
    }
    let header_values = match per_header_value_stats(dataset) {
        Ok(s) => Some(s),
        Err(Error::NoPairCells) => None,
        Err(e) => return Err(e),
    };
    Ok(StatsReport {
        records,
        cell_frequencies: cell_type_frequencies(dataset, exec)?,
        header_values,
        cells_per_table: cells_per_table_stats(dataset)?,
    })
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn summary_row(out: &mut String, label: &str, s: Option<&DistributionSummary>) {
    match s {
        Some(s) => writeln!(
            out,
            "{label:<8}{:>12.1}{:>12.1}{:>12}{:>12}",
            s.mean,
            s.std,
            thousands(s.max as usize),
            thousands(s.min as usize)
        ),
        None => writeln!(
            out,
            "{label:<8}{:>12}{:>12}{:>12}{:>12}",
            "-", "-", "-", "-"
        ),
    }
    .unwrap();
}

fn summary_header(out: &mut String, title: &str) {
    writeln!(out, "{title}").unwrap();
    writeln!(
        out,
        "{:<8}{:>12}{:>12}{:>12}{:>12}",
        "Split", "Mean", "Std.", "Max", "Min"
    )
    .unwrap();
}

/// Plain-text tables: cell-type frequencies, header value frequencies and
/// cells per table.
pub fn render_text(report: &StatsReport) -> String {
    let mut out = String::new();
    let freq = &report.cell_frequencies;
    for (title, pick) in [
        (
            "Type Frequency",
            (|f: &Frequency| f.type_frequency) as fn(&Frequency) -> usize,
        ),
        ("Appearance Frequency", |f: &Frequency| {
            f.appearance_frequency
        }),
    ] {
        writeln!(out, "{title}").unwrap();
        writeln!(
            out,
            "{:<8}{:>12}{:>12}{:>12}{:>12}",
            "Type", "Total", "Train", "Valid", "Test"
        )
        .unwrap();
        for t in [CellType::Header, CellType::Group, CellType::Value] {
            let name = match t {
                CellType::Header => "Header",
                CellType::Group => "Group",
                CellType::Value => "Value",
            };
            writeln!(
                out,
                "{name:<8}{:>12}{:>12}{:>12}{:>12}",
                thousands(pick(freq.all.get(t))),
                thousands(pick(freq.train.get(t))),
                thousands(pick(freq.valid.get(t))),
                thousands(pick(freq.test.get(t)))
            )
            .unwrap();
        }
        out.push('\n');
    }

    if let Some(hv) = &report.header_values {
        summary_header(&mut out, "Type frequencies of values for each header");
        for (label, s) in hv.rows() {
            summary_row(&mut out, label, s.as_ref().map(|s| &s.type_frequency));
        }
        out.push('\n');
        summary_header(&mut out, "Appearance frequencies of values for each header");
        for (label, s) in hv.rows() {
            summary_row(&mut out, label, s.as_ref().map(|s| &s.appearance_frequency));
        }
        out.push('\n');
    }

    summary_header(&mut out, "Number of cells in tables");
    for (label, s) in report.cells_per_table.rows() {
        summary_row(&mut out, label, s.as_ref());
    }
    out
}
