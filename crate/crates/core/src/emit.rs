//! Task files, prompt templates and image preprocessing geometry.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{ImageFormat, ImageRef, InfoboxRecord};
use crate::model::{linearize, Cell, InfoboxTable, ROW_SEPARATOR};
use crate::split::{assign_split, SplitLabel};

/// Side of the square crop fed to image generation.
pub const IMAGE_GEN_SIDE: u32 = 256;

const TABLE_PROMPT_PREFIX: &str = "What is the infobox of \" ";
const TABLE_PROMPT_SUFFIX: &str = " \"?";
const IMAGE_ONLY_TABLE_PROMPT: &str = "What is the infobox of the image?";
const IMAGE_PROMPT_PREFIX: &str = "What is the complete image? Caption: ";

pub fn format_table_prompt(title: Option<&str>, has_image: bool) -> Result<String> {
    match title {
        Some(title) if !title.is_empty() => {
            Ok(format!("{TABLE_PROMPT_PREFIX}{title}{TABLE_PROMPT_SUFFIX}"))
        }
        _ if has_image => Ok(IMAGE_ONLY_TABLE_PROMPT.to_owned()),
        _ => Err(Error::MissingPromptInput),
    }
}

/// Image-generation prompt, optionally with the linearized table appended
/// after a row separator.
pub fn format_image_prompt(caption: &str, table: Option<&InfoboxTable>) -> Result<String> {
    if caption.trim().is_empty() {
        return Err(Error::EmptyCaption);
    }
    let mut prompt = format!("{IMAGE_PROMPT_PREFIX}{caption}");
    if let Some(table) = table {
        prompt.push_str(ROW_SEPARATOR);
        prompt.push_str(&linearize(table));
    }
    Ok(prompt)
}

/// A prompt matched back to the template that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PromptTemplate {
    TableFromTitle {
        title: String,
    },
    TableFromImage,
    ImageFromCaption {
        caption: String,
        table: Option<String>,
    },
}

pub fn recognize_prompt(prompt: &str) -> Option<PromptTemplate> {
    if prompt == IMAGE_ONLY_TABLE_PROMPT {
        return Some(PromptTemplate::TableFromImage);
    }
    if let Some(title) = prompt
        .strip_prefix(TABLE_PROMPT_PREFIX)
        .and_then(|rest| rest.strip_suffix(TABLE_PROMPT_SUFFIX))
    {
        return (!title.is_empty()).then(|| PromptTemplate::TableFromTitle {
            title: title.to_owned(),
        });
    }
    let rest = prompt.strip_prefix(IMAGE_PROMPT_PREFIX)?;
    // Captions are sanitized, so the first separator starts the table.
    let (caption, table) = match rest.split_once(ROW_SEPARATOR) {
        Some((caption, table)) => (caption, Some(table.to_owned())),
        None => (rest, None),
    };
    (!caption.is_empty()).then(|| PromptTemplate::ImageFromCaption {
        caption: caption.to_owned(),
        table,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropGeometry {
    pub scaled_w: u32,
    pub scaled_h: u32,
    pub crop_x: u32,
    pub crop_y: u32,
    pub crop_side: u32,
}

/// `round(long * target / short)` with halves rounded up.
fn scale_long_side(long: u32, short: u32, target: u32) -> u32 {
    let (long, short, target) = (u64::from(long), u64::from(short), u64::from(target));
    ((2 * long * target + short) / (2 * short)) as u32
}

fn check_dims(w: u32, h: u32) -> Result<()> {
    if w == 0 || h == 0 {
        Err(Error::InvalidDimensions {
            width: w,
            height: h,
        })
    } else {
        Ok(())
    }
}

/// Scales the short side to exactly 256px (up or down) and centers a 256px
/// square crop on the long axis.
pub fn image_gen_geometry(w: u32, h: u32) -> Result<CropGeometry> {
    check_dims(w, h)?;
    let side = IMAGE_GEN_SIDE;
    let (scaled_w, scaled_h) = if w <= h {
        (side, scale_long_side(h, w, side))
    } else {
        (scale_long_side(w, h, side), side)
    };
    Ok(CropGeometry {
        scaled_w,
        scaled_h,
        crop_x: (scaled_w - side) / 2,
        crop_y: (scaled_h - side) / 2,
        crop_side: side,
    })
}

/// Short-side limit for table-generation images.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum SizeCap {
    Px256,
    Px384,
    #[default]
    Px480,
}

impl SizeCap {
    pub fn pixels(self) -> u32 {
        match self {
            SizeCap::Px256 => 256,
            SizeCap::Px384 => 384,
            SizeCap::Px480 => 480,
        }
    }
}

impl TryFrom<u32> for SizeCap {
    type Error = Error;

    fn try_from(px: u32) -> Result<SizeCap> {
        match px {
            256 => Ok(SizeCap::Px256),
            384 => Ok(SizeCap::Px384),
            480 => Ok(SizeCap::Px480),
            other => Err(Error::InvalidCap(other)),
        }
    }
}

impl From<SizeCap> for u32 {
    fn from(cap: SizeCap) -> u32 {
        cap.pixels()
    }
}

/// Shrinks the image so its short side is at most `cap`; never upscales.
pub fn table_gen_geometry(w: u32, h: u32, cap: SizeCap) -> Result<(u32, u32)> {
    check_dims(w, h)?;
    let cap = cap.pixels();
    if w.min(h) <= cap {
        return Ok((w, h));
    }
    Ok(if w <= h {
        (cap, scale_long_side(h, w, cap))
    } else {
        (scale_long_side(w, h, cap), cap)
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Table,
    Image,
}

/// One emitted dataset line. Field order is the on-disk key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub id: String,
    pub title: String,
    pub image_url: String,
    pub image_format: ImageFormat,
    pub image_w: Option<u32>,
    pub image_h: Option<u32>,
    pub caption: Option<String>,
    pub table_linearized: String,
    pub cells: Vec<CellLine>,
    pub split: SplitLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CellLine {
    Group { text: String },
    Pair { header: String, value: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptLine {
    pub id: String,
    pub prompt: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryLine {
    pub id: String,
    #[serde(flatten)]
    pub geometry: CropGeometry,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleLine {
    pub id: String,
    pub scaled_w: u32,
    pub scaled_h: u32,
}

impl From<&InfoboxRecord> for RecordLine {
    fn from(r: &InfoboxRecord) -> RecordLine {
        RecordLine {
            id: r.id.clone(),
            title: r.title.clone(),
            image_url: r.image.url.clone(),
            image_format: r.image.format,
            image_w: r.image.width,
            image_h: r.image.height,
            caption: r.caption.clone(),
            table_linearized: linearize(&r.table),
            cells: r
                .table
                .cells()
                .iter()
                .map(|c| match c {
                    Cell::Group(text) => CellLine::Group { text: text.clone() },
                    Cell::Pair { header, value } => CellLine::Pair {
                        header: header.clone(),
                        value: value.clone(),
                    },
                })
                .collect(),
            split: r.split,
        }
    }
}

impl TryFrom<RecordLine> for InfoboxRecord {
    type Error = Error;

    fn try_from(line: RecordLine) -> Result<InfoboxRecord> {
        let invalid = |reason: &str| Error::InvalidRecord {
            id: line.id.clone(),
            reason: reason.to_owned(),
        };
        if line.title.is_empty() {
            return Err(invalid("empty title"));
        }
        if assign_split(&line.title)? != line.split {
            return Err(invalid("split label does not match the title hash"));
        }
        let cells = line
            .cells
            .iter()
            .map(|c| match c {
                CellLine::Group { text } => Cell::Group(text.clone()),
                CellLine::Pair { header, value } => Cell::Pair {
                    header: header.clone(),
                    value: value.clone(),
                },
            })
            .collect();
        let table = InfoboxTable::new(cells).map_err(|e| invalid(&e.to_string()))?;
        if linearize(&table) != line.table_linearized {
            return Err(invalid("table_linearized disagrees with cells"));
        }
        let source_page_id = line
            .id
            .rsplit_once('#')
            .map_or(line.id.as_str(), |(page, _)| page)
            .to_owned();
        Ok(InfoboxRecord {
            source_page_id,
            title: line.title,
            image: ImageRef {
                url: line.image_url,
                format: line.image_format,
                width: line.image_w,
                height: line.image_h,
            },
            caption: line.caption,
            table,
            split: line.split,
            id: line.id,
        })
    }
}

pub fn dataset_file(out_dir: &Path, split: SplitLabel) -> PathBuf {
    out_dir.join(format!("{split}.jsonl"))
}

fn side_file(out_dir: &Path, split: SplitLabel, kind: &str) -> PathBuf {
    out_dir.join(format!("{split}.{kind}.jsonl"))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmitOptions {
    pub task: Task,
    pub cap: SizeCap,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EmitSummary {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub files: Vec<PathBuf>,
}

impl EmitSummary {
    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }

    fn count_mut(&mut self, split: SplitLabel) -> &mut usize {
        match split {
            SplitLabel::Train => &mut self.train,
            SplitLabel::Valid => &mut self.valid,
            SplitLabel::Test => &mut self.test,
        }
    }
}

struct JsonlWriter {
    out: BufWriter<File>,
}

impl JsonlWriter {
    fn create(path: &Path) -> Result<JsonlWriter> {
        Ok(JsonlWriter {
            out: BufWriter::new(File::create(path)?),
        })
    }

    fn write<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, value)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

struct SplitWriters {
    records: JsonlWriter,
    prompts: JsonlWriter,
    alt_prompts: JsonlWriter,
    geometry: JsonlWriter,
}

/// Writes one set of files per split into `out_dir`:
///
/// * `<split>.jsonl` - dataset records
/// * `<split>.prompts.jsonl` - title prompt (table task) or caption prompt
///   (image task)
/// * `<split>.image_prompts.jsonl` (table task) or `<split>.table_prompts.jsonl`
///   (image task) - the alternative input variant
/// * `<split>.geometry.jsonl` - preprocessing geometry for images with known
///   dimensions
///
/// Records are written sorted by title, then id. The image task keeps only
/// records that have a caption.
pub fn emit_dataset(
    records: &[InfoboxRecord],
    options: EmitOptions,
    out_dir: &Path,
) -> Result<EmitSummary> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }

    let mut selected: Vec<&InfoboxRecord> = records
        .iter()
        .filter(|r| options.task == Task::Table || r.caption.is_some())
        .collect();
    selected.sort_by(|a, b| (&a.title, &a.id).cmp(&(&b.title, &b.id)));
    if selected.is_empty() {
        log::warn!(
            "no records to emit; writing empty files to {}",
            out_dir.display()
        );
    }

    fs::create_dir_all(out_dir)?;
    let alt_kind = match options.task {
        Task::Table => "image_prompts",
        Task::Image => "table_prompts",
    };
    let mut summary = EmitSummary::default();
    let mut writers = Vec::new();
    for split in SplitLabel::ALL {
        let paths = [
            dataset_file(out_dir, split),
            side_file(out_dir, split, "prompts"),
            side_file(out_dir, split, alt_kind),
            side_file(out_dir, split, "geometry"),
        ];
        writers.push(SplitWriters {
            records: JsonlWriter::create(&paths[0])?,
            prompts: JsonlWriter::create(&paths[1])?,
            alt_prompts: JsonlWriter::create(&paths[2])?,
            geometry: JsonlWriter::create(&paths[3])?,
        });
        summary.files.extend(paths);
    }

    for record in selected {
        let w = &mut writers[split_index(record.split)];
        w.records.write(&RecordLine::from(record))?;
        *summary.count_mut(record.split) += 1;
        let dims = record.image.width.zip(record.image.height);
        match options.task {
            Task::Table => {
                let target = linearize(&record.table);
                w.prompts.write(&PromptLine {
                    id: record.id.clone(),
                    prompt: format_table_prompt(Some(&record.title), true)?,
                    target: target.clone(),
                })?;
                w.alt_prompts.write(&PromptLine {
                    id: record.id.clone(),
                    prompt: format_table_prompt(None, true)?,
                    target,
                })?;
                if let Some((iw, ih)) = dims {
                    let (scaled_w, scaled_h) = table_gen_geometry(iw, ih, options.cap)?;
                    w.geometry.write(&ScaleLine {
                        id: record.id.clone(),
                        scaled_w,
                        scaled_h,
                    })?;
                }
            }
            Task::Image => {
                let caption = record.caption.as_deref().expect("filtered above");
                w.prompts.write(&PromptLine {
                    id: record.id.clone(),
                    prompt: format_image_prompt(caption, None)?,
                    target: record.image.url.clone(),
                })?;
                w.alt_prompts.write(&PromptLine {
                    id: record.id.clone(),
                    prompt: format_image_prompt(caption, Some(&record.table))?,
                    target: record.image.url.clone(),
                })?;
                if let Some((iw, ih)) = dims {
                    w.geometry.write(&GeometryLine {
                        id: record.id.clone(),
                        geometry: image_gen_geometry(iw, ih)?,
                    })?;
                }
            }
        }
    }

    for w in writers {
        w.records.finish()?;
        w.prompts.finish()?;
        w.alt_prompts.finish()?;
        w.geometry.finish()?;
    }
    Ok(summary)
}

fn split_index(split: SplitLabel) -> usize {
    SplitLabel::ALL.iter().position(|&s| s == split).unwrap()
}

/// Reads dataset records back from a `<split>.jsonl` file.
pub fn read_records(path: &Path) -> Result<Vec<InfoboxRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine = serde_json::from_str(&line)?;
        records.push(InfoboxRecord::try_from(parsed)?);
    }
    Ok(records)
}

/// Reads every split file in a dataset directory, in train/valid/test order.
/// Missing split files are treated as empty.
pub fn read_dataset(dir: &Path) -> Result<Vec<InfoboxRecord>> {
    let mut records = Vec::new();
    for split in SplitLabel::ALL {
        let path = dataset_file(dir, split);
        if path.exists() {
            records.extend(read_records(&path)?);
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_prompts() {
        assert_eq!(
            format_table_prompt(Some("Fish and chips"), false).unwrap(),
            "What is the infobox of \" Fish and chips \"?"
        );
        assert_eq!(
            format_table_prompt(Some("Fish and chips"), true).unwrap(),
            "What is the infobox of \" Fish and chips \"?"
        );
        assert_eq!(
            format_table_prompt(None, true).unwrap(),
            "What is the infobox of the image?"
        );
        assert!(matches!(
            format_table_prompt(None, false),
            Err(Error::MissingPromptInput)
        ));
    }

    #[test]
    fn image_prompts() {
        assert_eq!(
            format_image_prompt("May Lake - View from the trail up Mt. Hoffman.", None).unwrap(),
            "What is the complete image? Caption: May Lake - View from the trail up Mt. Hoffman."
        );
        let table = InfoboxTable::new(vec![Cell::group("X").unwrap()]).unwrap();
        assert_eq!(
            format_image_prompt("c", Some(&table)).unwrap(),
            "What is the complete image? Caption: c <> X"
        );
        assert!(matches!(
            format_image_prompt("", None),
            Err(Error::EmptyCaption)
        ));
    }

    #[test]
    fn image_geometry_examples() {
        let g = image_gen_geometry(512, 768).unwrap();
        assert_eq!(
            (g.scaled_w, g.scaled_h, g.crop_x, g.crop_y, g.crop_side),
            (256, 384, 0, 64, 256)
        );
        let g = image_gen_geometry(256, 256).unwrap();
        assert_eq!(
            (g.scaled_w, g.scaled_h, g.crop_x, g.crop_y),
            (256, 256, 0, 0)
        );
        let g = image_gen_geometry(1000, 400).unwrap();
        assert_eq!(
            (g.scaled_w, g.scaled_h, g.crop_x, g.crop_y),
            (640, 256, 192, 0)
        );
        // upscale: 100x150 -> 256x384
        let g = image_gen_geometry(100, 150).unwrap();
        assert_eq!((g.scaled_w, g.scaled_h), (256, 384));
        assert!(image_gen_geometry(0, 5).is_err());
    }

    #[test]
    fn table_geometry_examples() {
        assert_eq!(
            table_gen_geometry(960, 640, SizeCap::Px480).unwrap(),
            (720, 480)
        );
        assert_eq!(
            table_gen_geometry(300, 200, SizeCap::Px480).unwrap(),
            (300, 200)
        );
        assert_eq!(
            table_gen_geometry(512, 512, SizeCap::Px256).unwrap(),
            (256, 256)
        );
        // 301 * 256 / 300 = 256.85
        assert_eq!(
            table_gen_geometry(301, 300, SizeCap::Px256).unwrap(),
            (257, 256)
        );
        assert!(SizeCap::try_from(300).is_err());
    }

    #[test]
    fn rounding_is_half_up() {
        // 5 * 256 / 512 = 2.5
        assert_eq!(scale_long_side(5, 512, 256), 3);
        assert_eq!(scale_long_side(1000, 400, 256), 640);
    }

    #[test]
    fn recognizer_examples() {
        assert_eq!(
            recognize_prompt("What is the infobox of \" Low Pike \"?"),
            Some(PromptTemplate::TableFromTitle {
                title: "Low Pike".into()
            })
        );
        assert_eq!(
            recognize_prompt("What is the infobox of the image?"),
            Some(PromptTemplate::TableFromImage)
        );
        assert_eq!(
            recognize_prompt("What is the complete image? Caption: c <> A | B"),
            Some(PromptTemplate::ImageFromCaption {
                caption: "c".into(),
                table: Some("A | B".into())
            })
        );
        assert_eq!(recognize_prompt("Describe the image."), None);
    }

    proptest! {
        #[test]
        fn crop_inside_scaled_image(w in 1u32..20_000, h in 1u32..20_000) {
            let g = image_gen_geometry(w, h).unwrap();
            prop_assert_eq!(g.scaled_w.min(g.scaled_h), g.crop_side);
            prop_assert!(g.crop_x + g.crop_side <= g.scaled_w);
            prop_assert!(g.crop_y + g.crop_side <= g.scaled_h);
        }

        #[test]
        fn table_geometry_never_upscales(w in 1u32..20_000, h in 1u32..20_000) {
            let (sw, sh) = table_gen_geometry(w, h, SizeCap::Px384).unwrap();
            prop_assert!(sw <= w && sh <= h);
            prop_assert!(sw.min(sh) <= 384);
        }

        #[test]
        fn prompts_round_trip(title in "[A-Za-z][A-Za-z '.-]{0,20}", caption in "[A-Za-z][A-Za-z '.-]{0,20}") {
            let title = crate::model::sanitize_text(&title);
            let caption = crate::model::sanitize_text(&caption);
            let p = format_table_prompt(Some(&title), true).unwrap();
            prop_assert_eq!(recognize_prompt(&p), Some(PromptTemplate::TableFromTitle { title }));
            let table = InfoboxTable::new(vec![Cell::pair("H", "V").unwrap()]).unwrap();
            let p = format_image_prompt(&caption, Some(&table)).unwrap();
            prop_assert_eq!(
                recognize_prompt(&p),
                Some(PromptTemplate::ImageFromCaption { caption, table: Some("H | V".into()) })
            );
        }
    }
}
