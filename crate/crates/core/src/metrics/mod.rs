//! Evaluation of generated linearized tables.
//!
//! [`evaluate`] scores aligned generated/reference strings with ROUGE-1/2/L,
//! Table-F1 and Corpus-F1 for each cell type and returns a [`MetricReport`].
//! Display values are percentages rounded to one decimal; the `raw` section
//! keeps full precision.

mod bootstrap;
mod f1;
mod rouge;

pub use bootstrap::{paired_bootstrap, BootstrapResult};
pub use f1::{
    clipped_match, corpus_f1, document_prf, pooled_multiset, table_f1, CellMultiset, Prf, TableF1,
};
pub use rouge::{
    lcs_len, rouge_all, rouge_l, rouge_n, rouge_preprocess, rouge_tokens, RougeOptions, RougeScores,
};

pub use crate::model::CellType;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{delinearize, Cell, ParseMode};
use crate::par::Execution;

/// One value per cell type, serialized in header/group/value order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerType<T> {
    pub header: T,
    pub group: T,
    pub value: T,
}

impl<T> PerType<T> {
    pub fn from_fn(mut f: impl FnMut(CellType) -> T) -> PerType<T> {
        PerType {
            header: f(CellType::Header),
            group: f(CellType::Group),
            value: f(CellType::Value),
        }
    }

    pub fn get(&self, t: CellType) -> &T {
        match t {
            CellType::Header => &self.header,
            CellType::Group => &self.group,
            CellType::Value => &self.value,
        }
    }
}

impl<T> PerType<Result<T>> {
    fn transpose(self) -> Result<PerType<T>> {
        Ok(PerType {
            header: self.header?,
            group: self.group?,
            value: self.value?,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeTriple {
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableF1Raw {
    /// Mean F1 x100 over included documents.
    pub mean: f64,
    pub included_documents: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawScores {
    /// Mean per-document P/R/F1 x100.
    pub rouge: RougeScores,
    pub table_f1: PerType<Option<TableF1Raw>>,
    /// Pooled P/R/F1 x100.
    pub corpus_f1: PerType<Prf>,
}

/// Scores of one document, x100 at full precision. A `None` Table-F1 means
/// the type is absent from both sides and the document is excluded from that
/// mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentScores {
    pub id: String,
    pub rouge: RougeTriple,
    pub table_f1: PerType<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub documents: usize,
    pub rouge: RougeTriple,
    pub table_f1: PerType<Option<f64>>,
    pub corpus_f1: PerType<f64>,
    pub raw: RawScores,
    pub per_document: Vec<DocumentScores>,
}

impl MetricReport {
    /// Per-document series for a metric name such as `rouge1`, `rougeL`,
    /// `table_f1.value`. `None` marks a document without a score.
    pub fn series(&self, metric: &str) -> Option<Vec<Option<f64>>> {
        let pick: fn(&DocumentScores) -> Option<f64> = match metric {
            "rouge1" => |d| Some(d.rouge.rouge1),
            "rouge2" => |d| Some(d.rouge.rouge2),
            "rougeL" => |d| Some(d.rouge.rouge_l),
            "table_f1.header" => |d| d.table_f1.header,
            "table_f1.group" => |d| d.table_f1.group,
            "table_f1.value" => |d| d.table_f1.value,
            _ => return None,
        };
        Some(self.per_document.iter().map(pick).collect())
    }

    pub const SERIES: [&'static str; 6] = [
        "rouge1",
        "rouge2",
        "rougeL",
        "table_f1.header",
        "table_f1.group",
        "table_f1.value",
    ];
}

pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalOptions {
    /// Parsing of generated strings. References are always parsed strictly.
    pub mode: ParseMode,
    pub rouge: RougeOptions,
    pub exec: Execution,
}

/// An error tied to one document (0-based index into the inputs).
fn at_document(index: usize) -> impl FnOnce(Error) -> Error {
    move |source| Error::Document {
        index,
        source: Box::new(source),
    }
}

/// Parses a generated string. Lenient mode turns unparseable output into an
/// empty table, which scores zero.
pub fn parse_generated(text: &str, mode: ParseMode) -> Result<Vec<Cell>> {
    match (delinearize(text, mode), mode) {
        (Ok(table), _) => Ok(table.into_cells()),
        (Err(_), ParseMode::Lenient) => Ok(Vec::new()),
        (Err(e), ParseMode::Strict) => Err(e),
    }
}

/// Scores aligned generated and reference linearized tables.
pub fn evaluate<S: AsRef<str> + Sync>(
    ids: &[S],
    generated: &[S],
    reference: &[S],
    options: EvalOptions,
) -> Result<MetricReport> {
    if generated.len() != reference.len() || ids.len() != generated.len() {
        return Err(Error::LengthMismatch {
            generated: generated.len(),
            reference: reference.len(),
        });
    }
    if generated.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let exec = options.exec;

    let gen_cells = exec
        .map(generated, |g| parse_generated(g.as_ref(), options.mode))
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(at_document(i)))
        .collect::<Result<Vec<_>>>()?;
    let ref_cells = exec
        .map(reference, |r| delinearize(r.as_ref(), ParseMode::Strict))
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map(|t| t.into_cells()).map_err(at_document(i)))
        .collect::<Result<Vec<_>>>()?;

    let indices: Vec<usize> = (0..generated.len()).collect();
    let rouge_docs = exec.map(&indices, |&i| {
        rouge_all(generated[i].as_ref(), reference[i].as_ref(), options.rouge)
    });
    let table = PerType::from_fn(|t| table_f1(&gen_cells, &ref_cells, t, exec)).transpose()?;
    let corpus = PerType::from_fn(|t| corpus_f1(&gen_cells, &ref_cells, t, exec)).transpose()?;

    let n = generated.len() as f64;
    let mean_prf = |f: &dyn Fn(&RougeScores) -> Prf| {
        let (p, r, f1) = rouge_docs.iter().map(f).fold((0.0, 0.0, 0.0), |acc, x| {
            (acc.0 + x.precision, acc.1 + x.recall, acc.2 + x.f1)
        });
        Prf {
            precision: 100.0 * p / n,
            recall: 100.0 * r / n,
            f1: 100.0 * f1 / n,
        }
    };
    let rouge_raw = RougeScores {
        rouge1: mean_prf(&|s| s.rouge1),
        rouge2: mean_prf(&|s| s.rouge2),
        rouge_l: mean_prf(&|s| s.rouge_l),
    };
    let table_raw = PerType::from_fn(|t| {
        let tf = table.get(t);
        tf.mean.map(|m| TableF1Raw {
            mean: 100.0 * m,
            included_documents: tf.included(),
        })
    });
    let corpus_raw = PerType::from_fn(|t| corpus.get(t).scaled(100.0));

    let per_document = (0..generated.len())
        .map(|i| DocumentScores {
            id: ids[i].as_ref().to_owned(),
            rouge: RougeTriple {
                rouge1: 100.0 * rouge_docs[i].rouge1.f1,
                rouge2: 100.0 * rouge_docs[i].rouge2.f1,
                rouge_l: 100.0 * rouge_docs[i].rouge_l.f1,
            },
            table_f1: PerType::from_fn(|t| table.get(t).per_doc[i].map(|p| 100.0 * p.f1)),
        })
        .collect();

    Ok(MetricReport {
        documents: generated.len(),
        rouge: RougeTriple {
            rouge1: round1(rouge_raw.rouge1.f1),
            rouge2: round1(rouge_raw.rouge2.f1),
            rouge_l: round1(rouge_raw.rouge_l.f1),
        },
        table_f1: PerType::from_fn(|t| table_raw.get(t).map(|r| round1(r.mean))),
        corpus_f1: PerType::from_fn(|t| round1(corpus_raw.get(t).f1)),
        raw: RawScores {
            rouge: rouge_raw,
            table_f1: table_raw,
            corpus_f1: corpus_raw,
        },
        per_document,
    })
}

/// Paired per-document series of two reports for one metric, keeping only
/// documents scored in both.
pub fn paired_series(
    a: &MetricReport,
    b: &MetricReport,
    metric: &str,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let xs = a.series(metric)?;
    let ys = b.series(metric)?;
    Some(xs.into_iter().zip(ys).filter_map(|(x, y)| x.zip(y)).unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FISH_AND_CHIPS_LINE: &str = "Alternative names | Fish supper / Fish 'n' chips <> Course | Main dish <> Place of origin | England <> Region or state | Northwestern Europe <> Serving temperature | Hot <> Main ingredients | Battered and fried fish with deep-fried chips";

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("d{i}")).collect()
    }

    #[test]
    fn fish_and_chips_token_count() {
        let tokens = rouge_preprocess(FISH_AND_CHIPS_LINE);
        assert_eq!(tokens.len(), 32);
        assert_eq!(
            &tokens[..6],
            &["alternative", "names", "fish", "supper", "/", "fish"]
        );
    }

    #[test]
    fn identical_corpus() {
        let docs: Vec<String> = vec![
            FISH_AND_CHIPS_LINE.into(),
            "Species <> Kingdom | Animalia".into(),
        ];
        let r = evaluate(&ids(2), &docs, &docs, EvalOptions::default()).unwrap();
        assert_eq!(
            r.rouge,
            RougeTriple {
                rouge1: 100.0,
                rouge2: 100.0,
                rouge_l: 100.0
            }
        );
        assert_eq!(r.table_f1.header, Some(100.0));
        assert_eq!(r.table_f1.value, Some(100.0));
        assert_eq!(r.table_f1.group, Some(100.0));
        assert_eq!(
            r.corpus_f1,
            PerType {
                header: 100.0,
                group: 100.0,
                value: 100.0
            }
        );
        assert_eq!(r.raw.table_f1.group.unwrap().included_documents, 1);
        assert_eq!(r.per_document[0].table_f1.group, None);
    }

    #[test]
    fn clipping_fixture_display() {
        let gen = vec!["X | Y <> X | Y".to_string()];
        let reference = vec!["X | Y".to_string()];
        let r = evaluate(&ids(1), &gen, &reference, EvalOptions::default()).unwrap();
        assert_eq!(r.table_f1.value, Some(66.7));
        assert_eq!(r.raw.table_f1.value.unwrap().mean, 100.0 * (2.0 / 3.0));
    }

    #[test]
    fn strict_error_carries_document() {
        let gen = vec!["A | B".to_string(), "A | B | C".to_string()];
        let reference = vec!["A | B".to_string(), "A | B".to_string()];
        match evaluate(&ids(2), &gen, &reference, EvalOptions::default()) {
            Err(Error::Document { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        let lenient = EvalOptions {
            mode: ParseMode::Lenient,
            ..EvalOptions::default()
        };
        assert!(evaluate(&ids(2), &gen, &reference, lenient).is_ok());
    }

    #[test]
    fn lenient_empty_generation_scores_zero() {
        let gen = vec!["".to_string()];
        let reference = vec!["A | B".to_string()];
        let lenient = EvalOptions {
            mode: ParseMode::Lenient,
            ..EvalOptions::default()
        };
        let r = evaluate(&ids(1), &gen, &reference, lenient).unwrap();
        assert_eq!(r.table_f1.value, Some(0.0));
        assert_eq!(r.rouge.rouge1, 0.0);
    }

    #[test]
    fn execution_modes_agree() {
        let gen: Vec<String> = (0..50)
            .map(|i| format!("H{} | V{} <> G{}", i % 3, i % 5, i % 2))
            .collect();
        let reference: Vec<String> = (0..50)
            .map(|i| format!("H{} | V{} <> G{}", i % 4, i % 5, i % 3))
            .collect();
        let mut opts = EvalOptions {
            exec: Execution::Sequential,
            ..EvalOptions::default()
        };
        let a = evaluate(&ids(50), &gen, &reference, opts).unwrap();
        opts.exec = Execution::Parallel;
        let b = evaluate(&ids(50), &gen, &reference, opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn series_pairs_scored_documents() {
        let gen = vec!["A | B".to_string(), "G".to_string()];
        let reference = vec!["A | B".to_string(), "A | C".to_string()];
        let r = evaluate(&ids(2), &gen, &reference, EvalOptions::default()).unwrap();
        let (x, y) = paired_series(&r, &r, "table_f1.group").unwrap();
        assert_eq!((x.len(), y.len()), (1, 1));
        assert!(paired_series(&r, &r, "bleu").is_none());
    }
}
