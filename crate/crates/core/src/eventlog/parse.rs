use std::io::{Read, Write};

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{EventLog, EventLogError, EventRecord, ValidationIssue};

/// Maps each logical field to the header name used in the source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogSchema {
    pub case_id: String,
    pub activity: String,
    pub start: String,
    pub end: String,
    pub duration_hours: String,
    pub resource: String,
    pub business_unit: String,
    pub article_type: String,
    pub quantity: String,
    pub customer_id: String,
    pub country: String,
}

impl Default for LogSchema {
    fn default() -> Self {
        LogSchema {
            case_id: "case_id".into(),
            activity: "activity".into(),
            start: "start".into(),
            end: "end".into(),
            duration_hours: "duration_hours".into(),
            resource: "resource".into(),
            business_unit: "business_unit".into(),
            article_type: "article_type".into(),
            quantity: "quantity".into(),
            customer_id: "customer_id".into(),
            country: "country".into(),
        }
    }
}

struct Columns {
    case_id: usize,
    activity: usize,
    start: usize,
    end: Option<usize>,
    duration: Option<usize>,
    resource: usize,
    business_unit: usize,
    article_type: usize,
    quantity: Option<usize>,
    customer_id: Option<usize>,
    country: Option<usize>,
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, schema: &LogSchema) -> Result<Self, EventLogError> {
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let need =
            |name: &str| find(name).ok_or_else(|| EventLogError::MissingColumn(name.to_string()));
        let cols = Columns {
            case_id: need(&schema.case_id)?,
            activity: need(&schema.activity)?,
            start: need(&schema.start)?,
            end: find(&schema.end),
            duration: find(&schema.duration_hours),
            resource: need(&schema.resource)?,
            business_unit: need(&schema.business_unit)?,
            article_type: need(&schema.article_type)?,
            quantity: find(&schema.quantity),
            customer_id: find(&schema.customer_id),
            country: find(&schema.country),
        };
        if cols.end.is_none() && cols.duration.is_none() {
            return Err(EventLogError::NoDurationColumn);
        }
        Ok(cols)
    }
}

/// Parses a timestamp given as an ISO-8601 date or date-time.
pub(crate) fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    if let Some(t) = FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
    {
        return Some(t);
    }
    DateTime::parse_from_rfc3339(raw)
        .ok()
        .map(|t| t.naive_local())
}

pub(crate) fn hours_to_duration(hours: f64) -> Duration {
    Duration::milliseconds((hours * 3_600_000.0).round() as i64)
}

fn optional(row: &csv::StringRecord, idx: Option<usize>) -> Option<String> {
    idx.and_then(|i| row.get(i))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
}

fn parse_row(row: &csv::StringRecord, cols: &Columns) -> Result<EventRecord, String> {
    let field = |i: usize| row.get(i).map(str::trim).unwrap_or("");
    let case_id = field(cols.case_id);
    let activity = field(cols.activity);
    if case_id.is_empty() {
        return Err("empty case_id".into());
    }
    if activity.is_empty() {
        return Err("empty activity".into());
    }
    let start_raw = field(cols.start);
    let start =
        parse_timestamp(start_raw).ok_or_else(|| format!("unparsable start `{start_raw}`"))?;

    let end_raw = optional(row, cols.end);
    let duration_raw = optional(row, cols.duration);
    let (end, duration_hours) = match (end_raw, duration_raw) {
        (Some(e), _) => {
            let end = parse_timestamp(&e).ok_or_else(|| format!("unparsable end `{e}`"))?;
            if end < start {
                return Err(format!("end {end} before start {start}"));
            }
            let hours = (end - start).num_milliseconds() as f64 / 3_600_000.0;
            (end, hours)
        }
        (None, Some(d)) => {
            let hours: f64 = d
                .parse()
                .map_err(|_| format!("unparsable duration `{d}`"))?;
            if !hours.is_finite() || hours < 0.0 {
                return Err(format!("invalid duration {hours}"));
            }
            (start + hours_to_duration(hours), hours)
        }
        (None, None) => return Err("neither end nor duration given".into()),
    };

    let quantity = match optional(row, cols.quantity) {
        Some(q) => q
            .parse::<u32>()
            .map_err(|_| format!("invalid quantity `{q}`"))?,
        None => 0,
    };

    Ok(EventRecord {
        case_id: case_id.to_string(),
        activity: activity.to_string(),
        start,
        end,
        duration_hours,
        resource: field(cols.resource).to_string(),
        business_unit: field(cols.business_unit).to_string(),
        article_type: field(cols.article_type).to_string(),
        quantity,
        customer_id: optional(row, cols.customer_id),
        country: optional(row, cols.country),
    })
}

/// Reads a comma-delimited log with a header row. Bad rows end up in the
/// validation report; only a missing column or a log without a single usable
/// row is fatal.
pub fn parse_log<R: Read>(source: R, schema: &LogSchema) -> Result<EventLog, EventLogError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(source);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(e.into()),
        Err(_) => return Err(EventLogError::EmptyLog { rejected: 0 }),
    };
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(EventLogError::EmptyLog { rejected: 0 });
    }
    let cols = Columns::resolve(&headers, schema)?;

    let mut records = Vec::new();
    let mut report = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                report.push(ValidationIssue::RejectedRow {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match parse_row(&row, &cols) {
            Ok(r) => records.push(r),
            Err(reason) => report.push(ValidationIssue::RejectedRow { line, reason }),
        }
    }
    EventLog::from_records(records, report)
}

const HEADER: [&str; 11] = [
    "case_id",
    "activity",
    "start",
    "end",
    "duration_hours",
    "resource",
    "business_unit",
    "article_type",
    "quantity",
    "customer_id",
    "country",
];

fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.f").to_string()
}

/// Writes the log back out in the default column layout, one row per event.
pub fn write_log<W: Write>(log: &EventLog, sink: W) -> Result<(), EventLogError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for e in log.events() {
        w.write_record([
            e.case_id.as_str(),
            e.activity.as_str(),
            &format_timestamp(&e.start),
            &format_timestamp(&e.end),
            &e.duration_hours.to_string(),
            e.resource.as_str(),
            e.business_unit.as_str(),
            e.article_type.as_str(),
            &e.quantity.to_string(),
            e.customer_id.as_deref().unwrap_or(""),
            e.country.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
