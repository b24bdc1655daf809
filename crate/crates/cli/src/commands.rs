use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use wikitig_core::emit::{emit_dataset, read_dataset, EmitOptions, EmitSummary, SizeCap, Task};
use wikitig_core::extract::{extract_pages, load_pages};
use wikitig_core::metrics::{
    evaluate, paired_bootstrap, paired_series, parse_generated, BootstrapResult, EvalOptions,
    MetricReport, RougeOptions,
};
use wikitig_core::split::assign_split;
use wikitig_core::stats::{compute_stats, render_text};
use wikitig_core::{Error, Execution, ParseMode};

use crate::io::{read_text_lines, with_config, write_json};
use crate::{
    EmitArgs, EvalArgs, ExtractArgs, ModeArg, SignificanceArgs, SplitArgs, StatsArgs, TaskArg,
};

fn threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    1
}

fn config<T: Serialize>(command: &str, args: &T) -> Result<Value> {
    let mut value = json!({
        "command": command,
        "version": wikitig_core::VERSION,
        "threads": threads(),
    });
    if let (Value::Object(target), Value::Object(fields)) =
        (&mut value, serde_json::to_value(args)?)
    {
        target.extend(fields);
    }
    Ok(value)
}

fn emit_options(task: TaskArg, cap: u32) -> Result<EmitOptions> {
    Ok(EmitOptions {
        task: match task {
            TaskArg::Table => Task::Table,
            TaskArg::Image => Task::Image,
        },
        cap: SizeCap::try_from(cap)?,
    })
}

fn summary_json(summary: &EmitSummary) -> Value {
    json!({
        "train": summary.train,
        "valid": summary.valid,
        "test": summary.test,
        "total": summary.total(),
    })
}

pub fn extract(args: &ExtractArgs) -> Result<()> {
    let config = config("extract", args)?;
    let pages =
        load_pages(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    if pages.is_empty() {
        log::warn!("no pages found in {}", args.input.display());
    }
    let (records, report) = extract_pages(&pages, Execution::Parallel);
    if records.is_empty() {
        log::warn!("no qualifying infoboxes found");
    }
    let summary = emit_dataset(&records, emit_options(args.task, args.cap)?, &args.out)?;
    let body = json!({
        "extraction": report,
        "emitted": summary_json(&summary),
    });
    write_json(
        Some(&args.out.join("extraction_report.json")),
        &with_config(&config, &body)?,
    )?;
    eprintln!(
        "{} pages, {} infoboxes, {} records ({} train / {} valid / {} test)",
        report.pages_seen,
        report.infoboxes_seen,
        report.records_emitted,
        summary.train,
        summary.valid,
        summary.test
    );
    Ok(())
}

pub fn split(args: &SplitArgs) -> Result<()> {
    println!("{}", assign_split(&args.title)?);
    Ok(())
}

pub fn emit(args: &EmitArgs) -> Result<()> {
    let config = config("emit", args)?;
    let records = read_dataset(&args.input)
        .with_context(|| format!("reading dataset {}", args.input.display()))?;
    let summary = emit_dataset(&records, emit_options(args.task, args.cap)?, &args.out)?;
    write_json(
        Some(&args.out.join("emit_report.json")),
        &with_config(&config, &json!({ "emitted": summary_json(&summary) }))?,
    )
}

fn describe_ids(ids: &[&str]) -> String {
    const SHOWN: usize = 20;
    let mut s = ids
        .iter()
        .take(SHOWN)
        .map(|i| format!("{i:?}"))
        .collect::<Vec<_>>()
        .join(", ");
    if ids.len() > SHOWN {
        s.push_str(&format!(" and {} more", ids.len() - SHOWN));
    }
    s
}

pub fn eval_table(args: &EvalArgs) -> Result<()> {
    let config = config("eval-table", args)?;
    let generated = read_text_lines(&args.generated)?;
    let reference = read_text_lines(&args.reference)?;

    let by_id: HashMap<&str, usize> = generated
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id.as_str(), i))
        .collect();
    let ref_ids: HashSet<&str> = reference.iter().map(|l| l.id.as_str()).collect();
    let missing: Vec<&str> = reference
        .iter()
        .map(|l| l.id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    let extra: Vec<&str> = generated
        .iter()
        .map(|l| l.id.as_str())
        .filter(|id| !ref_ids.contains(id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        let mut msg = String::from("generated and reference ids differ");
        if !missing.is_empty() {
            msg.push_str(&format!(
                "; missing from generated: {}",
                describe_ids(&missing)
            ));
        }
        if !extra.is_empty() {
            msg.push_str(&format!(
                "; missing from reference: {}",
                describe_ids(&extra)
            ));
        }
        bail!(msg);
    }

    let aligned: Vec<&crate::io::TextLine> = reference
        .iter()
        .map(|l| &generated[by_id[l.id.as_str()]])
        .collect();
    let ids: Vec<&str> = reference.iter().map(|l| l.id.as_str()).collect();
    let gen_texts: Vec<&str> = aligned.iter().map(|l| l.text.as_str()).collect();
    let ref_texts: Vec<&str> = reference.iter().map(|l| l.text.as_str()).collect();
    let options = EvalOptions {
        mode: match args.mode {
            ModeArg::Strict => ParseMode::Strict,
            ModeArg::Lenient => ParseMode::Lenient,
        },
        rouge: RougeOptions { stem: args.stem },
        exec: Execution::Parallel,
    };
    let report = evaluate(&ids, &gen_texts, &ref_texts, options).map_err(|err| match err {
        // Either side failed to parse; generated lines are checked first.
        Error::Document { index, source } => {
            let (path, line) = if parse_generated(&aligned[index].text, options.mode).is_err() {
                (&args.generated, aligned[index])
            } else {
                (&args.reference, &reference[index])
            };
            anyhow::anyhow!(
                "{}:{}: id {:?}: {source}",
                path.display(),
                line.line,
                line.id
            )
        }
        other => other.into(),
    })?;
    write_json(args.out.as_deref(), &with_config(&config, &report)?)
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let config = config("stats", args)?;
    let records = read_dataset(&args.input)
        .with_context(|| format!("reading dataset {}", args.input.display()))?;
    let report = compute_stats(&records, Execution::Parallel)?;
    print!("{}", render_text(&report));
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.input.join("stats.json"));
    write_json(Some(&out), &with_config(&config, &report)?)
}

fn read_report(path: &std::path::Path) -> Result<MetricReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("{} is not an eval-table report", path.display()))
}

#[derive(Serialize)]
struct SignificanceBody {
    documents: usize,
    results: BTreeMap<&'static str, Option<BootstrapResult>>,
}

pub fn significance(args: &SignificanceArgs) -> Result<()> {
    let config = config("significance", args)?;
    if args.resamples == 0 {
        bail!(Error::ZeroResamples);
    }
    let a = read_report(&args.a)?;
    let b = read_report(&args.b)?;
    let ids_a: Vec<&str> = a.per_document.iter().map(|d| d.id.as_str()).collect();
    let ids_b: Vec<&str> = b.per_document.iter().map(|d| d.id.as_str()).collect();
    if ids_a != ids_b {
        let set_b: HashSet<&str> = ids_b.iter().copied().collect();
        let set_a: HashSet<&str> = ids_a.iter().copied().collect();
        let only_a: Vec<&str> = ids_a
            .iter()
            .copied()
            .filter(|i| !set_b.contains(i))
            .collect();
        let only_b: Vec<&str> = ids_b
            .iter()
            .copied()
            .filter(|i| !set_a.contains(i))
            .collect();
        bail!(
            "reports cover different documents; only in A: [{}]; only in B: [{}]",
            describe_ids(&only_a),
            describe_ids(&only_b)
        );
    }

    let mut results = BTreeMap::new();
    for metric in MetricReport::SERIES {
        let (xs, ys) = paired_series(&a, &b, metric).expect("known metric");
        let result =
            match paired_bootstrap(&xs, &ys, args.resamples, args.seed, Execution::Parallel) {
                Ok(r) => Some(r),
                Err(Error::TooFewDocuments { got, .. }) => {
                    log::warn!("{metric}: only {got} paired documents, skipping");
                    None
                }
                Err(e) => return Err(e.into()),
            };
        results.insert(metric, result);
    }
    let body = SignificanceBody {
        documents: ids_a.len(),
        results,
    };
    write_json(args.out.as_deref(), &with_config(&config, &body)?)
}
