//! CSV ingestion of entity metrics, world baselines and economic data.
//!
//! All inputs are UTF-8, comma-separated files with a header row;
//! quoted fields are allowed. Every diagnostic carries the file name
//! and a 1-based line number. Parsed structures are immutable and safe
//! to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::fields::FieldId;
use crate::indicators::CountPair;

/// Default document threshold: entities must show more than this many
/// documents to be analysed.
pub const DEFAULT_MIN_DOCS: u64 = 50;

/// Explicit totals row differing from the field sum by more than this
/// fraction triggers a warning.
const TOTALS_WARN_FRACTION: f64 = 0.05;

/// Literal used in the `field` column for the all-fields totals row.
pub const ALL_FIELDS: &str = "ALL";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed CSV: {message}")]
    Csv {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}:1: expected header `{expected}`, found `{found}`")]
    Header {
        path: String,
        expected: &'static str,
        found: String,
    },
    #[error("{path}:{line}: unknown field name `{name}`")]
    UnknownField {
        path: String,
        line: u64,
        name: String,
    },
    #[error("{path}: missing field `{name}`")]
    MissingField { path: String, name: &'static str },
    #[error("{path}:{line}: duplicate entry for {key} (first seen at line {first_line})")]
    Duplicate {
        path: String,
        line: u64,
        first_line: u64,
        key: String,
    },
    #[error("{path}:{line}: column `{column}` must be a nonnegative integer, got `{value}`")]
    BadCount {
        path: String,
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("{path}:{line}: negative count in column `{column}`: {value}")]
    NegativeCount {
        path: String,
        line: u64,
        column: &'static str,
        value: i64,
    },
    #[error(
        "{path}:{line}: unknown entity kind `{value}` (expected country, institution or us_state)"
    )]
    BadKind {
        path: String,
        line: u64,
        value: String,
    },
    #[error(
        "{path}:{line}: entity `{code}` declared with kind `{found}` but previously `{first}`"
    )]
    InconsistentKind {
        path: String,
        line: u64,
        code: String,
        first: String,
        found: String,
    },
    #[error("{path}:{line}: invalid entity code `{code}`: {reason}")]
    BadCode {
        path: String,
        line: u64,
        code: String,
        reason: &'static str,
    },
    #[error("{path}:{line}: column `{column}` must be a positive number, got `{value}`")]
    NonPositiveNumber {
        path: String,
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("{path}:{line}: zero count in column `{column}` not allowed for the world baseline")]
    ZeroWorldCount {
        path: String,
        line: u64,
        column: &'static str,
    },
    #[error("{path}:{line}: totals row for `{code}` lists fewer documents ({total}) than its `{field}` row ({field_docs})")]
    TotalsBelowField {
        path: String,
        line: u64,
        code: String,
        field: String,
        total: u64,
        field_docs: u64,
    },
    #[error("{path}: no entities")]
    Empty { path: String },
    #[error("economic record references unknown entity `{code}`")]
    UnknownEntity { code: String },
}

/// What a metrics row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Country,
    Institution,
    UsState,
}

impl EntityKind {
    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Country => "country",
            EntityKind::Institution => "institution",
            EntityKind::UsState => "us_state",
        }
    }

    pub fn parse(s: &str) -> Option<EntityKind> {
        match s.trim() {
            "country" => Some(EntityKind::Country),
            "institution" => Some(EntityKind::Institution),
            "us_state" => Some(EntityKind::UsState),
            _ => None,
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identifier of a country, institution or US state. Country codes are
/// ISO alpha-3; other kinds use free-form slugs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId {
    pub code: String,
    pub kind: EntityKind,
}

impl EntityId {
    pub fn new(code: impl Into<String>, kind: EntityKind) -> Self {
        Self {
            code: code.into(),
            kind,
        }
    }
}

/// Per-entity document and citation counts, total and by field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMetrics {
    pub id: EntityId,
    pub totals: CountPair,
    pub by_field: BTreeMap<FieldId, CountPair>,
}

/// World per-field and total counts; all 22 fields present with
/// positive documents and citations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldBaseline {
    pub totals: CountPair,
    pub by_field: BTreeMap<FieldId, CountPair>,
}

impl WorldBaseline {
    /// All-fields world quality `C/N`.
    pub fn quality(&self) -> f64 {
        self.totals.citations as f64 / self.totals.n_docs as f64
    }

    /// World quality within one field.
    pub fn field_quality(&self, field: FieldId) -> f64 {
        let p = self.by_field[&field];
        p.citations as f64 / p.n_docs as f64
    }

    pub fn field_counts(&self, field: FieldId) -> CountPair {
        self.by_field[&field]
    }
}

/// Average GDP and per-capita purchasing power for one entity, with the
/// derived wealth index.
#[derive(Debug, Clone, PartialEq)]
pub struct EconRecord {
    pub code: String,
    /// Billions of current US dollars, period average.
    pub gdp: f64,
    /// Thousands of PPP dollars per capita, period average.
    pub ppc: f64,
    /// `sqrt(gdp * ppc)`.
    pub wth: f64,
}

impl EconRecord {
    pub fn new(code: impl Into<String>, gdp: f64, ppc: f64) -> Self {
        Self {
            code: code.into(),
            gdp,
            ppc,
            wth: wealth_index(gdp, ppc),
        }
    }
}

/// Wealth index: geometric mean of GDP and per-capita purchasing power.
pub fn wealth_index(gdp: f64, ppc: f64) -> f64 {
    (gdp * ppc).sqrt()
}

/// A parsed entity-metrics file plus non-fatal validation warnings.
#[derive(Debug, Clone)]
pub struct ParsedEntities {
    /// Entities sorted by code.
    pub entities: Vec<EntityMetrics>,
    /// One message per explicit totals row that disagrees with its
    /// field sum by more than 5%.
    pub warnings: Vec<String>,
}

/// A coherent in-memory dataset for analysis.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub world: WorldBaseline,
    pub entities: Vec<EntityMetrics>,
    pub econ: BTreeMap<String, EconRecord>,
    pub min_docs: u64,
}

impl Dataset {
    /// Checks that every economic record matches a known entity.
    pub fn validate_econ(&self) -> Result<(), ParseError> {
        let codes: BTreeSet<&str> = self.entities.iter().map(|e| e.id.code.as_str()).collect();
        for code in self.econ.keys() {
            if !codes.contains(code.as_str()) {
                return Err(ParseError::UnknownEntity { code: code.clone() });
            }
        }
        Ok(())
    }
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// 1-based line number of the current record.
fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>, ParseError> {
    let file = fs::File::open(path).map_err(|source| ParseError::Io {
        path: path_str(path),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file))
}

fn check_header(
    reader: &mut csv::Reader<fs::File>,
    path: &Path,
    expected: &'static str,
) -> Result<(), ParseError> {
    let headers = reader.headers().map_err(|e| csv_error(path, &e))?;
    let found = headers.iter().collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(ParseError::Header {
            path: path_str(path),
            expected,
            found,
        });
    }
    Ok(())
}

fn csv_error(path: &Path, err: &csv::Error) -> ParseError {
    let line = match err.position() {
        Some(p) => p.line(),
        None => 0,
    };
    ParseError::Csv {
        path: path_str(path),
        line,
        message: err.to_string(),
    }
}

fn parse_count(raw: &str, path: &Path, line: u64, column: &'static str) -> Result<u64, ParseError> {
    let trimmed = raw.trim();
    match trimmed.parse::<i64>() {
        Ok(v) if v < 0 => Err(ParseError::NegativeCount {
            path: path_str(path),
            line,
            column,
            value: v,
        }),
        Ok(v) => Ok(v as u64),
        Err(_) => Err(ParseError::BadCount {
            path: path_str(path),
            line,
            column,
            value: trimmed.to_string(),
        }),
    }
}

fn validate_code(code: &str, path: &Path, line: u64) -> Result<String, ParseError> {
    let code = code.trim();
    let reason = if code.is_empty() {
        Some("empty")
    } else if code.contains(',') {
        Some("contains a comma")
    } else if code.contains('\n') || code.contains('\r') {
        Some("contains a newline")
    } else {
        None
    };
    match reason {
        Some(reason) => Err(ParseError::BadCode {
            path: path_str(path),
            line,
            code: code.to_string(),
            reason,
        }),
        None => Ok(code.to_string()),
    }
}

/// Reads a world baseline file (`field,n_docs,citations`): one row per
/// research field plus one `ALL` totals row, each exactly once, all
/// counts positive.
pub fn parse_world_baseline(path: &Path) -> Result<WorldBaseline, ParseError> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, "field,n_docs,citations")?;

    let mut totals: Option<CountPair> = None;
    let mut totals_line = 0u64;
    let mut by_field: BTreeMap<FieldId, CountPair> = BTreeMap::new();
    let mut first_lines: BTreeMap<FieldId, u64> = BTreeMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = record_line(&record);
        let name = record.get(0).unwrap_or("").trim();
        let n_docs = parse_count(record.get(1).unwrap_or(""), path, line, "n_docs")?;
        let citations = parse_count(record.get(2).unwrap_or(""), path, line, "citations")?;
        for (column, value) in [("n_docs", n_docs), ("citations", citations)] {
            if value == 0 {
                return Err(ParseError::ZeroWorldCount {
                    path: path_str(path),
                    line,
                    column,
                });
            }
        }
        let pair = CountPair::new(n_docs, citations);
        if name == ALL_FIELDS {
            if totals.is_some() {
                return Err(ParseError::Duplicate {
                    path: path_str(path),
                    line,
                    first_line: totals_line,
                    key: format!("field `{ALL_FIELDS}`"),
                });
            }
            totals = Some(pair);
            totals_line = line;
            continue;
        }
        let field = FieldId::parse(name).ok_or_else(|| ParseError::UnknownField {
            path: path_str(path),
            line,
            name: name.to_string(),
        })?;
        if let Some(&first_line) = first_lines.get(&field) {
            return Err(ParseError::Duplicate {
                path: path_str(path),
                line,
                first_line,
                key: format!("field `{}`", field.name()),
            });
        }
        first_lines.insert(field, line);
        by_field.insert(field, pair);
    }

    for field in FieldId::ALL {
        if !by_field.contains_key(&field) {
            return Err(ParseError::MissingField {
                path: path_str(path),
                name: field.name(),
            });
        }
    }
    let totals = totals.ok_or(ParseError::MissingField {
        path: path_str(path),
        name: ALL_FIELDS,
    })?;
    Ok(WorldBaseline { totals, by_field })
}

/// Reads an entity-metrics file (`entity,kind,field,n_docs,citations`).
///
/// Rows are grouped by entity code. Each entity may carry per-field
/// rows and at most one `ALL` totals row; without a totals row the
/// totals are the field sums. Output is sorted by code, so the result
/// is independent of row order.
pub fn parse_entity_metrics(path: &Path) -> Result<ParsedEntities, ParseError> {
    struct Building {
        kind: EntityKind,
        totals: Option<(CountPair, u64)>,
        by_field: BTreeMap<FieldId, CountPair>,
        field_lines: BTreeMap<FieldId, u64>,
    }

    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, "entity,kind,field,n_docs,citations")?;

    let mut building: BTreeMap<String, Building> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = record_line(&record);
        let code = validate_code(record.get(0).unwrap_or(""), path, line)?;
        let kind_raw = record.get(1).unwrap_or("").trim();
        let kind = EntityKind::parse(kind_raw).ok_or_else(|| ParseError::BadKind {
            path: path_str(path),
            line,
            value: kind_raw.to_string(),
        })?;
        let field_raw = record.get(2).unwrap_or("").trim();
        let n_docs = parse_count(record.get(3).unwrap_or(""), path, line, "n_docs")?;
        let citations = parse_count(record.get(4).unwrap_or(""), path, line, "citations")?;
        let pair = CountPair::new(n_docs, citations);

        let entry = building.entry(code.clone()).or_insert_with(|| Building {
            kind,
            totals: None,
            by_field: BTreeMap::new(),
            field_lines: BTreeMap::new(),
        });
        if entry.kind != kind {
            return Err(ParseError::InconsistentKind {
                path: path_str(path),
                line,
                code,
                first: entry.kind.name().to_string(),
                found: kind.name().to_string(),
            });
        }

        if field_raw == ALL_FIELDS {
            if let Some((_, first_line)) = entry.totals {
                return Err(ParseError::Duplicate {
                    path: path_str(path),
                    line,
                    first_line,
                    key: format!("(`{code}`, `{ALL_FIELDS}`)"),
                });
            }
            entry.totals = Some((pair, line));
        } else {
            let field = FieldId::parse(field_raw).ok_or_else(|| ParseError::UnknownField {
                path: path_str(path),
                line,
                name: field_raw.to_string(),
            })?;
            if let Some(&first_line) = entry.field_lines.get(&field) {
                return Err(ParseError::Duplicate {
                    path: path_str(path),
                    line,
                    first_line,
                    key: format!("(`{code}`, `{}`)", field.name()),
                });
            }
            entry.field_lines.insert(field, line);
            entry.by_field.insert(field, pair);
        }
    }

    if building.is_empty() {
        return Err(ParseError::Empty {
            path: path_str(path),
        });
    }

    let mut warnings = Vec::new();
    let mut entities = Vec::with_capacity(building.len());
    for (code, b) in building {
        let field_sum = CountPair::new(
            b.by_field.values().map(|p| p.n_docs).sum(),
            b.by_field.values().map(|p| p.citations).sum(),
        );
        let totals = match b.totals {
            Some((explicit, line)) => {
                if let Some((&field, counts)) =
                    b.by_field.iter().find(|(_, p)| p.n_docs > explicit.n_docs)
                {
                    return Err(ParseError::TotalsBelowField {
                        path: path_str(path),
                        line,
                        code,
                        field: field.name().to_string(),
                        total: explicit.n_docs,
                        field_docs: counts.n_docs,
                    });
                }
                // field schemes may overlap or omit documents, so the
                // two counts are compared, never asserted equal
                if !b.by_field.is_empty() {
                    let rel = (explicit.n_docs as f64 - field_sum.n_docs as f64).abs()
                        / (explicit.n_docs.max(1)) as f64;
                    if rel > TOTALS_WARN_FRACTION {
                        warnings.push(format!(
                            "{}: entity `{code}` totals row lists {} documents but field rows sum to {} ({:.1}% apart)",
                            path_str(path),
                            explicit.n_docs,
                            field_sum.n_docs,
                            rel * 100.0,
                        ));
                    }
                }
                explicit
            }
            None => field_sum,
        };
        entities.push(EntityMetrics {
            id: EntityId::new(code, b.kind),
            totals,
            by_field: b.by_field,
        });
    }
    Ok(ParsedEntities { entities, warnings })
}

/// Reads an economic file (`entity,gdp_busd,ppc_kusd`), computing the
/// wealth index per row.
pub fn parse_econ(path: &Path) -> Result<BTreeMap<String, EconRecord>, ParseError> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, path, "entity,gdp_busd,ppc_kusd")?;

    let mut records: BTreeMap<String, EconRecord> = BTreeMap::new();
    let mut first_lines: BTreeMap<String, u64> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, &e))?;
        let line = record_line(&record);
        let code = validate_code(record.get(0).unwrap_or(""), path, line)?;
        let mut numbers = [0.0f64; 2];
        for (i, column) in ["gdp_busd", "ppc_kusd"].into_iter().enumerate() {
            let raw = record.get(1 + i).unwrap_or("").trim();
            let value: f64 = raw.parse().map_err(|_| ParseError::NonPositiveNumber {
                path: path_str(path),
                line,
                column,
                value: raw.to_string(),
            })?;
            if !value.is_finite() || value <= 0.0 {
                return Err(ParseError::NonPositiveNumber {
                    path: path_str(path),
                    line,
                    column,
                    value: raw.to_string(),
                });
            }
            numbers[i] = value;
        }
        if let Some(&first_line) = first_lines.get(&code) {
            return Err(ParseError::Duplicate {
                path: path_str(path),
                line,
                first_line,
                key: format!("entity `{code}`"),
            });
        }
        first_lines.insert(code.clone(), line);
        records.insert(code.clone(), EconRecord::new(code, numbers[0], numbers[1]));
    }
    if records.is_empty() {
        return Err(ParseError::Empty {
            path: path_str(path),
        });
    }
    Ok(records)
}

/// Reads an exclusion list: one entity code per line, `#` comments and
/// blank lines ignored.
pub fn parse_exclusions(path: &Path) -> Result<BTreeSet<String>, ParseError> {
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path_str(path),
        source,
    })?;
    let mut codes = BTreeSet::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            codes.insert(line.to_string());
        }
    }
    Ok(codes)
}

/// Splits entities into those with strictly more than `min_docs`
/// documents and the rest. Excluded entities are preserved for
/// reporting, never silently dropped.
pub fn apply_threshold(
    entities: Vec<EntityMetrics>,
    min_docs: u64,
) -> (Vec<EntityMetrics>, Vec<EntityMetrics>) {
    entities
        .into_iter()
        .partition(|e| e.totals.n_docs > min_docs)
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Canonical serialization of a world baseline: `ALL` first, then the
/// 22 fields in canonical order.
pub fn write_world_baseline(world: &WorldBaseline) -> String {
    let mut out = String::from("field,n_docs,citations\n");
    out.push_str(&format!(
        "{ALL_FIELDS},{},{}\n",
        world.totals.n_docs, world.totals.citations
    ));
    for (field, pair) in &world.by_field {
        out.push_str(&format!(
            "{},{},{}\n",
            csv_quote(field.name()),
            pair.n_docs,
            pair.citations
        ));
    }
    out
}

/// Canonical serialization of entity metrics: entities by code, each
/// with an explicit `ALL` row followed by fields in canonical order.
pub fn write_entity_metrics(entities: &[EntityMetrics]) -> String {
    let mut sorted: Vec<&EntityMetrics> = entities.iter().collect();
    sorted.sort_by(|a, b| a.id.code.cmp(&b.id.code));
    let mut out = String::from("entity,kind,field,n_docs,citations\n");
    for e in sorted {
        out.push_str(&format!(
            "{},{},{ALL_FIELDS},{},{}\n",
            csv_quote(&e.id.code),
            e.id.kind,
            e.totals.n_docs,
            e.totals.citations
        ));
        for (field, pair) in &e.by_field {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_quote(&e.id.code),
                e.id.kind,
                csv_quote(field.name()),
                pair.n_docs,
                pair.citations
            ));
        }
    }
    out
}

/// Canonical serialization of economic records, sorted by code.
pub fn write_econ(records: &BTreeMap<String, EconRecord>) -> String {
    let mut out = String::from("entity,gdp_busd,ppc_kusd\n");
    for (code, rec) in records {
        out.push_str(&format!("{},{},{}\n", csv_quote(code), rec.gdp, rec.ppc));
    }
    out
}
