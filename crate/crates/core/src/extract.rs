//! Infobox extraction from rendered Wikipedia article HTML.
//!
//! An infobox qualifies when its first row is a single title cell and its
//! second row holds a jpeg, png or gif image. Later rows become cells: one
//! cell makes a group, two cells make a header/value pair, and anything wider
//! than two columns (counting `colspan`) is dropped.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use scraper::{ElementRef, Html, Node, Selector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{sanitize_text, Cell, InfoboxTable};
use crate::par::Execution;
use crate::split::{assign_split, SplitLabel};

/// Line that starts a new page in a concatenated dump stream.
pub const PAGE_DELIMITER_PREFIX: &str = "<!-- wikitig-page: ";
const PAGE_DELIMITER_SUFFIX: &str = " -->";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Jpeg,
    Png,
    Gif,
}

impl ImageFormat {
    pub fn from_extension(ext: &str) -> Option<ImageFormat> {
        match ext.to_ascii_lowercase().as_str() {
            "jpg" | "jpeg" | "jpe" => Some(ImageFormat::Jpeg),
            "png" => Some(ImageFormat::Png),
            "gif" => Some(ImageFormat::Gif),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ImageFormat::Jpeg => "jpeg",
            ImageFormat::Png => "png",
            ImageFormat::Gif => "gif",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRef {
    pub url: String,
    pub format: ImageFormat,
    /// Original file dimensions when the markup exposes them.
    pub width: Option<u32>,
    pub height: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoboxRecord {
    /// `<page id>#<ordinal of the infobox within the page>`.
    pub id: String,
    pub title: String,
    pub image: ImageRef,
    pub caption: Option<String>,
    pub table: InfoboxTable,
    pub source_page_id: String,
    pub split: SplitLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoTitleRow,
    NoImageRow,
    BadImageFormat,
    EmptyTableAfterFilter,
    MalformedHtml,
}

impl RejectReason {
    pub const ALL: [RejectReason; 5] = [
        RejectReason::NoTitleRow,
        RejectReason::NoImageRow,
        RejectReason::BadImageFormat,
        RejectReason::EmptyTableAfterFilter,
        RejectReason::MalformedHtml,
    ];
}

/// Counters for one extraction run. Reports from disjoint page sets merge by
/// field-wise addition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub pages_seen: usize,
    /// Pages that could not be decoded at all (not UTF-8).
    pub pages_skipped: usize,
    pub infoboxes_seen: usize,
    pub records_emitted: usize,
    pub rejected_by_reason: BTreeMap<RejectReason, usize>,
}

impl Default for ExtractionReport {
    fn default() -> Self {
        ExtractionReport {
            pages_seen: 0,
            pages_skipped: 0,
            infoboxes_seen: 0,
            records_emitted: 0,
            rejected_by_reason: RejectReason::ALL.iter().map(|&r| (r, 0)).collect(),
        }
    }
}

impl ExtractionReport {
    pub fn merge(mut self, other: ExtractionReport) -> ExtractionReport {
        self.pages_seen += other.pages_seen;
        self.pages_skipped += other.pages_skipped;
        self.infoboxes_seen += other.infoboxes_seen;
        self.records_emitted += other.records_emitted;
        for (reason, n) in other.rejected_by_reason {
            *self.rejected_by_reason.entry(reason).or_default() += n;
        }
        self
    }

    pub fn rejected(&self, reason: RejectReason) -> usize {
        self.rejected_by_reason.get(&reason).copied().unwrap_or(0)
    }

    pub fn total_rejected(&self) -> usize {
        self.rejected_by_reason.values().sum()
    }

    /// `records_emitted + rejections == infoboxes_seen`.
    pub fn is_conserved(&self) -> bool {
        self.records_emitted + self.total_rejected() == self.infoboxes_seen
    }

    fn reject(&mut self, reason: RejectReason) {
        *self.rejected_by_reason.entry(reason).or_default() += 1;
    }
}

fn reference_marker() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[#?[0-9]+\]").unwrap())
}

/// Removes `[#N]` and `[N]` reference markers.
pub fn strip_reference_links(text: &str) -> String {
    reference_marker().replace_all(text, "").into_owned()
}

pub fn has_reference_marker(text: &str) -> bool {
    reference_marker().is_match(text)
}

/// Prefixes the caption with `"<title> - "` unless it already mentions the
/// title (compared case-insensitively).
pub fn normalize_caption(title: &str, caption: Option<&str>) -> Option<String> {
    let caption = caption?;
    if caption.to_lowercase().contains(&title.to_lowercase()) {
        Some(caption.to_owned())
    } else {
        Some(format!("{title} - {caption}"))
    }
}

fn clean(text: &str) -> String {
    sanitize_text(&strip_reference_links(text))
}

fn selector(css: &str) -> Selector {
    Selector::parse(css).unwrap()
}

fn infobox_selector() -> &'static Selector {
    static SEL: OnceLock<Selector> = OnceLock::new();
    SEL.get_or_init(|| selector("table.infobox"))
}

fn img_selector() -> &'static Selector {
    static SEL: OnceLock<Selector> = OnceLock::new();
    SEL.get_or_init(|| selector("img"))
}

/// Direct `tr` rows of a table, looking through `thead`/`tbody`/`tfoot` but
/// not into nested tables.
fn table_rows<'a>(table: ElementRef<'a>) -> Vec<ElementRef<'a>> {
    let mut rows = Vec::new();
    for child in table.children().filter_map(ElementRef::wrap) {
        match child.value().name() {
            "tr" => rows.push(child),
            "thead" | "tbody" | "tfoot" => rows.extend(
                child
                    .children()
                    .filter_map(ElementRef::wrap)
                    .filter(|e| e.value().name() == "tr"),
            ),
            _ => {}
        }
    }
    rows
}

fn row_cells<'a>(row: ElementRef<'a>) -> Vec<ElementRef<'a>> {
    row.children()
        .filter_map(ElementRef::wrap)
        .filter(|e| matches!(e.value().name(), "td" | "th"))
        .collect()
}

fn colspan(cell: ElementRef<'_>) -> usize {
    cell.value()
        .attr("colspan")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

const BLOCK_ELEMENTS: &[&str] = &[
    "br", "p", "div", "li", "ul", "ol", "dl", "dt", "dd", "tr", "td", "th", "table", "hr",
];

/// Visible text of an element; block boundaries and `<br>` become spaces,
/// `style`/`script`/`img` subtrees are skipped.
fn element_text(el: ElementRef<'_>) -> String {
    let mut out = String::new();
    collect_text(el, &mut out);
    out
}

fn collect_text(el: ElementRef<'_>, out: &mut String) {
    for child in el.children() {
        match child.value() {
            Node::Text(text) => out.push_str(text),
            Node::Element(e) => {
                let name = e.name();
                if matches!(name, "style" | "script" | "img" | "noscript") {
                    continue;
                }
                let block = BLOCK_ELEMENTS.contains(&name);
                if block {
                    out.push(' ');
                }
                if let Some(child_el) = ElementRef::wrap(child) {
                    collect_text(child_el, out);
                }
                if block {
                    out.push(' ');
                }
            }
            _ => {}
        }
    }
}

fn parse_dimension(value: Option<&str>) -> Option<u32> {
    value?.trim().parse::<u32>().ok().filter(|&n| n > 0)
}

/// File name of the original upload. Thumbnail URLs look like
/// `.../thumb/a/ab/Name.svg/220px-Name.svg.png`, where the segment after the
/// hashed directories names the original file.
fn original_file_name(url: &str) -> &str {
    let path = url.split(['?', '#']).next().unwrap_or(url);
    let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    if let Some(pos) = segments.iter().position(|s| *s == "thumb") {
        if let Some(name) = segments.get(pos + 3) {
            return name;
        }
    }
    segments.last().copied().unwrap_or("")
}

fn image_ref(img: ElementRef<'_>) -> Option<ImageRef> {
    let attr = |name| img.value().attr(name);
    let url = attr("src").or_else(|| attr("data-src"))?.trim().to_owned();
    let name = original_file_name(&url);
    let ext = name.rsplit_once('.').map(|(_, e)| e)?;
    let format = ImageFormat::from_extension(ext)?;
    let width = parse_dimension(attr("data-file-width")).or_else(|| parse_dimension(attr("width")));
    let height =
        parse_dimension(attr("data-file-height")).or_else(|| parse_dimension(attr("height")));
    Some(ImageRef {
        url,
        format,
        width,
        height,
    })
}

enum Qualification {
    Accepted(Box<InfoboxRecord>),
    Rejected(RejectReason),
}

fn qualify(table: ElementRef<'_>, page_id: &str, ordinal: usize) -> Qualification {
    use Qualification::Rejected;

    let rows = table_rows(table);
    if rows.is_empty() {
        return Rejected(RejectReason::MalformedHtml);
    }

    let title_cells = row_cells(rows[0]);
    if title_cells.len() != 1 {
        return Rejected(RejectReason::NoTitleRow);
    }
    let title = clean(&element_text(title_cells[0]));
    if title.is_empty() {
        return Rejected(RejectReason::NoTitleRow);
    }

    let Some(image_row) = rows.get(1) else {
        return Rejected(RejectReason::NoImageRow);
    };
    // TODO: galleries and multi-image rows only contribute their first image.
    let Some(img) = image_row.select(img_selector()).next() else {
        return Rejected(RejectReason::NoImageRow);
    };
    let Some(image) = image_ref(img) else {
        return Rejected(RejectReason::BadImageFormat);
    };
    let caption = clean(&element_text(*image_row));
    let caption = normalize_caption(&title, (!caption.is_empty()).then_some(caption.as_str()));

    let mut cells = Vec::new();
    for row in &rows[2..] {
        let row_cells = row_cells(*row);
        let width: usize = row_cells.iter().map(|c| colspan(*c)).sum();
        if width > 2 {
            continue;
        }
        let texts: Vec<String> = row_cells.iter().map(|c| clean(&element_text(*c))).collect();
        if texts.iter().any(String::is_empty) {
            continue;
        }
        let mut texts = texts.into_iter();
        match (texts.next(), texts.next()) {
            (Some(text), None) => cells.push(Cell::Group(text)),
            (Some(header), Some(value)) => cells.push(Cell::Pair { header, value }),
            _ => {}
        }
    }
    let Ok(table) = InfoboxTable::new(cells) else {
        return Rejected(RejectReason::EmptyTableAfterFilter);
    };

    let split = assign_split(&title).expect("title is non-empty");
    Qualification::Accepted(Box::new(InfoboxRecord {
        id: format!("{page_id}#{ordinal}"),
        title,
        image,
        caption,
        table,
        source_page_id: page_id.to_owned(),
        split,
    }))
}

/// Extracts every qualifying infobox from one article.
pub fn extract_infoboxes(html_page: &str, page_id: &str) -> (Vec<InfoboxRecord>, ExtractionReport) {
    let document = Html::parse_document(html_page);
    let mut report = ExtractionReport {
        pages_seen: 1,
        ..ExtractionReport::default()
    };
    let mut records = Vec::new();
    for (ordinal, table) in document.select(infobox_selector()).enumerate() {
        report.infoboxes_seen += 1;
        match qualify(table, page_id, ordinal) {
            Qualification::Accepted(record) => {
                report.records_emitted += 1;
                records.push(*record);
            }
            Qualification::Rejected(reason) => report.reject(reason),
        }
    }
    (records, report)
}

/// One article as raw bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Page {
    pub id: String,
    pub bytes: Vec<u8>,
}

/// Extracts from one page, skipping it if it is not valid UTF-8.
pub fn extract_page(page: &Page) -> (Vec<InfoboxRecord>, ExtractionReport) {
    match std::str::from_utf8(&page.bytes) {
        Ok(html) => extract_infoboxes(html, &page.id),
        Err(err) => {
            log::warn!("skipping page {}: {err}", page.id);
            let report = ExtractionReport {
                pages_seen: 1,
                pages_skipped: 1,
                ..ExtractionReport::default()
            };
            (Vec::new(), report)
        }
    }
}

/// Extracts from a batch of pages. Records come back in page order whatever
/// the execution strategy.
pub fn extract_pages(pages: &[Page], exec: Execution) -> (Vec<InfoboxRecord>, ExtractionReport) {
    let per_page = exec.map(pages, extract_page);
    let mut records = Vec::new();
    let mut report = ExtractionReport::default();
    for (page_records, page_report) in per_page {
        records.extend(page_records);
        report = report.merge(page_report);
    }
    (records, report)
}

/// Splits a concatenated dump into pages. Each page starts with a line
/// `<!-- wikitig-page: <id> -->`; text before the first delimiter is ignored.
pub fn split_dump(dump: &[u8]) -> Vec<Page> {
    let mut pages: Vec<Page> = Vec::new();
    for line in dump.split_inclusive(|&b| b == b'\n') {
        let trimmed = trim_ascii(line);
        let id = std::str::from_utf8(trimmed).ok().and_then(|s| {
            s.strip_prefix(PAGE_DELIMITER_PREFIX)?
                .strip_suffix(PAGE_DELIMITER_SUFFIX)
                .map(str::trim)
        });
        match (id, pages.last_mut()) {
            (Some(id), _) => pages.push(Page {
                id: id.to_owned(),
                bytes: Vec::new(),
            }),
            (None, Some(page)) => page.bytes.extend_from_slice(line),
            (None, None) => {}
        }
    }
    pages
}

fn trim_ascii(bytes: &[u8]) -> &[u8] {
    let start = bytes
        .iter()
        .position(|b| !b.is_ascii_whitespace())
        .unwrap_or(bytes.len());
    let end = bytes
        .iter()
        .rposition(|b| !b.is_ascii_whitespace())
        .map_or(start, |p| p + 1);
    &bytes[start..end]
}

/// Loads pages from a directory of `*.html` files (id = file stem, sorted by
/// file name) or from a single dump file.
pub fn load_pages(path: &Path) -> Result<Vec<Page>> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "html" || e == "htm"))
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                let id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(Page {
                    id,
                    bytes: fs::read(&p)?,
                })
            })
            .collect()
    } else {
        Ok(split_dump(&fs::read(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(infobox: &str) -> String {
        format!("<html><body><p>Lead</p>{infobox}</body></html>")
    }

    const IMAGE_ROW: &str = r#"<tr><td colspan="2"><a href="/wiki/File:X.jpg"><img src="//upload.wikimedia.org/x/X.jpg" width="220" height="147" data-file-width="1000" data-file-height="400"></a><div>X on a plate</div></td></tr>"#;

    #[test]
    fn strip_reference_examples() {
        assert_eq!(strip_reference_links("England[#1]"), "England");
        assert_eq!(strip_reference_links("Aves[#12][#3]"), "Aves");
        assert_eq!(sanitize_text(&strip_reference_links("A[12] B")), "A B");
        assert_eq!(strip_reference_links("[a] [#] [1a]"), "[a] [#] [1a]");
    }

    #[test]
    fn caption_examples() {
        assert_eq!(
            normalize_caption("May Lake", Some("View from the trail up Mt. Hoffman.")).as_deref(),
            Some("May Lake - View from the trail up Mt. Hoffman.")
        );
        assert_eq!(
            normalize_caption("Giant's Castle", Some("Panorama at Giant's Castle")).as_deref(),
            Some("Panorama at Giant's Castle")
        );
        assert_eq!(normalize_caption("X", None), None);
        assert_eq!(
            normalize_caption("Fish and chips", Some("fish and chips in a box")).as_deref(),
            Some("fish and chips in a box")
        );
    }

    #[test]
    fn qualifying_infobox() {
        let html = page(&format!(
            r#"<table class="infobox hrecipe"><tbody>
            <tr><th colspan="2"><b>X</b></th></tr>{IMAGE_ROW}
            <tr><th colspan="2">Group row</th></tr>
            <tr><th>Course</th><td>Main<br>dish<sup class="reference">[1]</sup></td></tr>
            </tbody></table>"#
        ));
        let (records, report) = extract_infoboxes(&html, "p1");
        assert!(report.is_conserved());
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.id, "p1#0");
        assert_eq!(r.title, "X");
        assert_eq!(r.caption.as_deref(), Some("X on a plate"));
        assert_eq!(r.image.format, ImageFormat::Jpeg);
        assert_eq!((r.image.width, r.image.height), (Some(1000), Some(400)));
        assert_eq!(
            r.table.cells(),
            &[
                Cell::group("Group row").unwrap(),
                Cell::pair("Course", "Main dish").unwrap()
            ]
        );
    }

    #[test]
    fn rejections() {
        let cases = [
            ("<table class=\"infobox\"></table>", RejectReason::MalformedHtml),
            (
                "<table class=\"infobox\"><tr><th>A</th><td>B</td></tr></table>",
                RejectReason::NoTitleRow,
            ),
            (
                "<table class=\"infobox\"><tr><th>T</th></tr><tr><td>no image</td></tr><tr><th>A</th><td>B</td></tr></table>",
                RejectReason::NoImageRow,
            ),
            (
                "<table class=\"infobox\"><tr><th>T</th></tr><tr><td><img src=\"/a/B.svg\"></td></tr><tr><th>A</th><td>B</td></tr></table>",
                RejectReason::BadImageFormat,
            ),
            (
                "<table class=\"infobox\"><tr><th>T</th></tr><tr><td><img src=\"/a/B.png\"></td></tr><tr><td>1</td><td>2</td><td>3</td></tr></table>",
                RejectReason::EmptyTableAfterFilter,
            ),
        ];
        for (table, reason) in cases {
            let (records, report) = extract_infoboxes(&page(table), "p");
            assert!(records.is_empty(), "{table}");
            assert_eq!(report.rejected(reason), 1, "{table}");
            assert!(report.is_conserved());
        }
    }

    #[test]
    fn colspan_counts_as_width() {
        let html = page(&format!(
            r#"<table class="infobox"><tr><th>X</th></tr>{IMAGE_ROW}
            <tr><th colspan="2">A</th><td>wide</td></tr>
            <tr><td colspan="3">too wide</td></tr>
            <tr><th>H</th><td>V</td></tr></table>"#
        ));
        let (records, _) = extract_infoboxes(&html, "p");
        assert_eq!(records[0].table.cells(), &[Cell::pair("H", "V").unwrap()]);
    }

    #[test]
    fn thumbnail_format_uses_original_file() {
        assert_eq!(
            original_file_name(
                "//upload.wikimedia.org/wikipedia/commons/thumb/a/ab/Map.svg/220px-Map.svg.png"
            ),
            "Map.svg"
        );
        assert_eq!(
            original_file_name(
                "//upload.wikimedia.org/wikipedia/commons/thumb/a/ab/Fish.JPG/220px-Fish.JPG?x=1"
            ),
            "Fish.JPG"
        );
        assert_eq!(original_file_name("/img/plain.gif"), "plain.gif");
    }

    #[test]
    fn nested_tables_flatten_to_text() {
        let html = page(&format!(
            r#"<table class="infobox"><tr><th>X</th></tr>{IMAGE_ROW}
            <tr><th>Coords</th><td><table><tr><td>1</td><td>2</td></tr></table></td></tr></table>"#
        ));
        let (records, _) = extract_infoboxes(&html, "p");
        assert_eq!(
            records[0].table.cells(),
            &[Cell::pair("Coords", "1 2").unwrap()]
        );
    }

    #[test]
    fn invalid_utf8_page_is_skipped() {
        let (records, report) = extract_page(&Page {
            id: "bad".into(),
            bytes: vec![0xff, 0xfe, b'<'],
        });
        assert!(records.is_empty());
        assert_eq!((report.pages_seen, report.pages_skipped), (1, 1));
    }

    #[test]
    fn dump_splitting() {
        let dump =
            b"junk\n<!-- wikitig-page: a -->\n<p>A</p>\n<!-- wikitig-page: b -->\n<p>B</p>\n";
        let pages = split_dump(dump);
        assert_eq!(pages.len(), 2);
        assert_eq!(pages[0].id, "a");
        assert_eq!(pages[0].bytes, b"<p>A</p>\n");
        assert_eq!(pages[1].id, "b");
    }

    #[test]
    fn reports_merge_fieldwise() {
        let mut a = ExtractionReport {
            infoboxes_seen: 2,
            records_emitted: 1,
            ..ExtractionReport::default()
        };
        a.reject(RejectReason::NoImageRow);
        let merged = a.clone().merge(a.clone());
        assert_eq!(merged.infoboxes_seen, 4);
        assert_eq!(merged.rejected(RejectReason::NoImageRow), 2);
        assert!(merged.is_conserved());
    }
}
