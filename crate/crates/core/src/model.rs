//! Table data model, cell typing and the linearized text format.
//!
//! A table is an ordered list of cells. One-column rows are [`Cell::Group`]
//! cells, two-column rows are [`Cell::Pair`] cells. The linearized form joins
//! cells with [`ROW_SEPARATOR`] and renders a pair as `header | value`:
//!
//! ```
//! use wikitig_core::model::{linearize, Cell, InfoboxTable};
//!
//! let table = InfoboxTable::new(vec![
//!     Cell::pair("Course", "Main dish").unwrap(),
//!     Cell::group("Naming").unwrap(),
//! ])
//! .unwrap();
//! assert_eq!(linearize(&table), "Course | Main dish <> Naming");
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ROW_SEPARATOR: &str = " <> ";
pub const COLUMN_SEPARATOR: &str = " | ";

const ROW_TOKEN: &str = "<>";
const COLUMN_TOKEN: &str = "|";

/// Collapses whitespace, trims, replaces `|` with `/` and deletes `<>`.
///
/// The result never contains either separator token, so any non-empty output
/// is a valid cell text. The function is idempotent.
pub fn sanitize_text(raw: &str) -> String {
    let mut text = raw.replace(COLUMN_TOKEN, "/");
    // Deleting "<>" can splice a new one together ("<<>>"), so repeat.
    while text.contains(ROW_TOKEN) {
        text = text.replace(ROW_TOKEN, "");
    }
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn is_sanitized(text: &str) -> bool {
    !text.is_empty() && sanitize_text(text) == text
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellType {
    Group,
    Header,
    Value,
}

impl CellType {
    pub const ALL: [CellType; 3] = [CellType::Group, CellType::Header, CellType::Value];

    pub fn name(self) -> &'static str {
        match self {
            CellType::Group => "group",
            CellType::Header => "header",
            CellType::Value => "value",
        }
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One infobox row.
///
/// Use [`Cell::group`] and [`Cell::pair`] to build cells from raw text; they
/// sanitize and reject empty text. [`InfoboxTable::new`] re-validates cells
/// built directly from the variants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Group(String),
    Pair { header: String, value: String },
}

impl Cell {
    pub fn group(text: &str) -> Result<Cell> {
        Ok(Cell::Group(clean_field(text)?))
    }

    pub fn pair(header: &str, value: &str) -> Result<Cell> {
        Ok(Cell::Pair {
            header: clean_field(header)?,
            value: clean_field(value)?,
        })
    }

    fn validate(&self) -> Result<()> {
        let check = |text: &String| {
            if is_sanitized(text) {
                Ok(())
            } else {
                Err(Error::InvalidCell(text.clone()))
            }
        };
        match self {
            Cell::Group(text) => check(text),
            Cell::Pair { header, value } => check(header).and(check(value)),
        }
    }

    fn render(&self, out: &mut String) {
        match self {
            Cell::Group(text) => out.push_str(text),
            Cell::Pair { header, value } => {
                out.push_str(header);
                out.push_str(COLUMN_SEPARATOR);
                out.push_str(value);
            }
        }
    }
}

fn clean_field(raw: &str) -> Result<String> {
    let text = sanitize_text(raw);
    if text.is_empty() {
        Err(Error::InvalidCell(raw.to_owned()))
    } else {
        Ok(text)
    }
}

/// A non-empty, ordered list of valid cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InfoboxTable {
    cells: Vec<Cell>,
}

impl InfoboxTable {
    pub fn new(cells: Vec<Cell>) -> Result<InfoboxTable> {
        if cells.is_empty() {
            return Err(Error::EmptyTable);
        }
        for cell in &cells {
            cell.validate()?;
        }
        Ok(InfoboxTable { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Cell> {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn group_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, Cell::Group(_)))
            .count()
    }

    pub fn pair_count(&self) -> usize {
        self.len() - self.group_count()
    }
}

impl AsRef<[Cell]> for InfoboxTable {
    fn as_ref(&self) -> &[Cell] {
        &self.cells
    }
}

pub fn linearize(table: &InfoboxTable) -> String {
    linearize_cells(table.cells())
}

/// Linearizes any cell slice, including an empty one (which yields `""`).
pub fn linearize_cells(cells: &[Cell]) -> String {
    let mut out = String::new();
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            out.push_str(ROW_SEPARATOR);
        }
        cell.render(&mut out);
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Every row must have one or two non-empty fields.
    #[default]
    Strict,
    /// Drops empty fields and folds extra columns into the value.
    Lenient,
}

/// Parses a linearized string back into a table.
///
/// In [`ParseMode::Lenient`] a row with three or more fields becomes a pair
/// whose value is the remaining fields joined with `" | "` and then
/// sanitized, so `A | B | C` parses as `A | B / C`.
pub fn delinearize(text: &str, mode: ParseMode) -> Result<InfoboxTable> {
    let mut cells = Vec::new();
    for (row, raw_row) in text.split(ROW_TOKEN).enumerate() {
        let fields: Vec<String> = raw_row.split(COLUMN_TOKEN).map(sanitize_text).collect();
        match mode {
            ParseMode::Strict => {
                if let Some(pos) = fields.iter().position(String::is_empty) {
                    if fields.len() == 1 && text.trim().is_empty() {
                        return Err(Error::EmptyTable);
                    }
                    return Err(Error::Parse {
                        row,
                        reason: format!("field {pos} is empty"),
                    });
                }
                match fields.len() {
                    1 => cells.push(Cell::Group(fields.into_iter().next().unwrap())),
                    2 => {
                        let mut it = fields.into_iter();
                        let header = it.next().unwrap();
                        let value = it.next().unwrap();
                        cells.push(Cell::Pair { header, value });
                    }
                    n => {
                        return Err(Error::Parse {
                            row,
                            reason: format!("expected 1 or 2 fields, found {n}"),
                        })
                    }
                }
            }
            ParseMode::Lenient => {
                let fields: Vec<String> = fields.into_iter().filter(|f| !f.is_empty()).collect();
                match fields.len() {
                    0 => {}
                    1 => cells.push(Cell::Group(fields.into_iter().next().unwrap())),
                    _ => {
                        let header = fields[0].clone();
                        let value = sanitize_text(&fields[1..].join(COLUMN_SEPARATOR));
                        cells.push(Cell::Pair { header, value });
                    }
                }
            }
        }
    }
    InfoboxTable::new(cells)
}

/// A cell reduced to one of the three evaluation types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypedElement {
    Group(String),
    Header(String),
    Value(String, String),
}

impl TypedElement {
    pub fn cell_type(&self) -> CellType {
        match self {
            TypedElement::Group(_) => CellType::Group,
            TypedElement::Header(_) => CellType::Header,
            TypedElement::Value(..) => CellType::Value,
        }
    }
}

/// Expands cells into typed elements; a pair yields its header and then the
/// `(header, value)` element.
pub fn typed_elements(cells: &[Cell]) -> Vec<TypedElement> {
    let mut out = Vec::with_capacity(cells.len() * 2);
    for cell in cells {
        match cell {
            Cell::Group(text) => out.push(TypedElement::Group(text.clone())),
            Cell::Pair { header, value } => {
                out.push(TypedElement::Header(header.clone()));
                out.push(TypedElement::Value(header.clone(), value.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn fish_and_chips() -> InfoboxTable {
        InfoboxTable::new(
            [
                ("Alternative names", "Fish supper / Fish 'n' chips"),
                ("Course", "Main dish"),
                ("Place of origin", "England"),
                ("Region or state", "Northwestern Europe"),
                ("Serving temperature", "Hot"),
                (
                    "Main ingredients",
                    "Battered and fried fish with deep-fried chips",
                ),
            ]
            .iter()
            .map(|(h, v)| Cell::pair(h, v).unwrap())
            .collect(),
        )
        .unwrap()
    }

    const FISH_AND_CHIPS_LINE: &str = "Alternative names | Fish supper / Fish 'n' chips <> Course | Main dish <> Place of origin | England <> Region or state | Northwestern Europe <> Serving temperature | Hot <> Main ingredients | Battered and fried fish with deep-fried chips";

    #[test]
    fn sanitize_examples() {
        assert_eq!(
            sanitize_text("Fish supper / Fish 'n' chips"),
            "Fish supper / Fish 'n' chips"
        );
        assert_eq!(sanitize_text("  a   b  "), "a b");
        assert_eq!(sanitize_text("x | y <> z"), "x / y z");
        assert_eq!(sanitize_text("a<<>>b"), "ab");
        assert_eq!(sanitize_text("\t\n "), "");
    }

    #[test]
    fn linearize_examples() {
        assert_eq!(linearize(&fish_and_chips()), FISH_AND_CHIPS_LINE);
        let t = InfoboxTable::new(vec![Cell::group("Species").unwrap()]).unwrap();
        assert_eq!(linearize(&t), "Species");
        let t = InfoboxTable::new(vec![
            Cell::pair("A", "B").unwrap(),
            Cell::pair("C", "D").unwrap(),
        ])
        .unwrap();
        assert_eq!(linearize(&t), "A | B <> C | D");
    }

    #[test]
    fn delinearize_examples() {
        assert_eq!(
            delinearize(FISH_AND_CHIPS_LINE, ParseMode::Strict).unwrap(),
            fish_and_chips()
        );
        let t = delinearize("A | B | C", ParseMode::Lenient).unwrap();
        assert_eq!(t.cells(), &[Cell::pair("A", "B / C").unwrap()]);
        assert!(matches!(
            delinearize("", ParseMode::Strict),
            Err(Error::EmptyTable)
        ));
        assert!(matches!(
            delinearize("", ParseMode::Lenient),
            Err(Error::EmptyTable)
        ));
    }

    #[test]
    fn strict_reports_row_index() {
        match delinearize("A | B <> C | D | E", ParseMode::Strict) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
        match delinearize("A | B <>  | x", ParseMode::Strict) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lenient_drops_empty_fields() {
        let t = delinearize(" | A <> <> B | ", ParseMode::Lenient).unwrap();
        assert_eq!(
            t.cells(),
            &[Cell::group("A").unwrap(), Cell::group("B").unwrap()]
        );
    }

    #[test]
    fn constructors_reject_bad_cells() {
        assert!(Cell::group("  ").is_err());
        assert!(Cell::pair("a", "<>").is_err());
        assert!(InfoboxTable::new(vec![]).is_err());
        assert!(InfoboxTable::new(vec![Cell::Group(" padded".into())]).is_err());
        assert!(InfoboxTable::new(vec![Cell::Group("a | b".into())]).is_err());
    }

    #[test]
    fn typed_element_examples() {
        let els = typed_elements(&[Cell::pair("Course", "Main dish").unwrap()]);
        assert_eq!(
            els,
            vec![
                TypedElement::Header("Course".into()),
                TypedElement::Value("Course".into(), "Main dish".into())
            ]
        );
        assert_eq!(
            typed_elements(&[Cell::group("Naming").unwrap()]),
            vec![TypedElement::Group("Naming".into())]
        );
        let els = typed_elements(fish_and_chips().cells());
        let count = |t| els.iter().filter(|e| e.cell_type() == t).count();
        assert_eq!(
            (
                count(CellType::Header),
                count(CellType::Value),
                count(CellType::Group)
            ),
            (6, 6, 0)
        );
    }

    fn arb_cell() -> impl Strategy<Value = Cell> {
        let text = "[a-zA-Z0-9 |<>/'\\-]{1,12}";
        prop_oneof![
            text.prop_filter_map("empty", |t| Cell::group(&t).ok()),
            (text, text).prop_filter_map("empty", |(h, v)| Cell::pair(&h, &v).ok()),
        ]
    }

    proptest! {
        #[test]
        fn sanitize_is_idempotent(raw in "\\PC{0,40}") {
            let once = sanitize_text(&raw);
            prop_assert_eq!(sanitize_text(&once), once.clone());
            prop_assert!(!once.contains('|') && !once.contains("<>"));
        }

        #[test]
        fn element_count_law(cells in prop::collection::vec(arb_cell(), 1..12)) {
            let t = InfoboxTable::new(cells).unwrap();
            let els = typed_elements(t.cells());
            prop_assert_eq!(els.len(), t.group_count() + 2 * t.pair_count());
            let headers = els.iter().filter(|e| e.cell_type() == CellType::Header).count();
            let values = els.iter().filter(|e| e.cell_type() == CellType::Value).count();
            prop_assert_eq!(headers, values);
        }

        #[test]
        fn round_trip(cells in prop::collection::vec(arb_cell(), 1..12)) {
            let t = InfoboxTable::new(cells).unwrap();
            let line = linearize(&t);
            prop_assert_eq!(line.matches(ROW_SEPARATOR).count(), t.len() - 1);
            prop_assert_eq!(line.matches(COLUMN_SEPARATOR).count(), t.pair_count());
            prop_assert_eq!(delinearize(&line, ParseMode::Strict).unwrap(), t);
        }
    }
}
