use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Keys tried, in order, for the linearized table of an evaluation line.
const TEXT_KEYS: [&str; 4] = ["table_linearized", "prediction", "target", "text"];

pub struct TextLine {
    pub id: String,
    pub text: String,
    /// 1-based line number in the source file.
    pub line: usize,
}

/// Reads `{"id": ..., "<text key>": ...}` lines. Blank lines are skipped;
/// duplicate ids are an error.
pub fn read_text_lines(path: &Path) -> Result<Vec<TextLine>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.with_context(|| format!("{}:{line_no}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .with_context(|| format!("{}:{line_no}: invalid JSON", path.display()))?;
        let id = match value.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => bail!("{}:{line_no}: missing \"id\"", path.display()),
        };
        let text = TEXT_KEYS
            .iter()
            .find_map(|k| value.get(*k).and_then(Value::as_str))
            .with_context(|| {
                format!(
                    "{}:{line_no}: expected one of {TEXT_KEYS:?} as a string",
                    path.display()
                )
            })?
            .to_owned();
        if !seen.insert(id.clone()) {
            bail!("{}:{line_no}: duplicate id {id:?}", path.display());
        }
        out.push(TextLine {
            id,
            text,
            line: line_no,
        });
    }
    Ok(out)
}

/// Prepends a `config` object to a serialized report.
pub fn with_config<T: Serialize>(config: &Value, body: &T) -> Result<Value> {
    let mut object = Map::new();
    object.insert("config".to_owned(), config.clone());
    match serde_json::to_value(body)? {
        Value::Object(fields) => object.extend(fields),
        other => {
            object.insert("result".to_owned(), other);
        }
    }
    Ok(Value::Object(object))
}

pub fn write_json(path: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
