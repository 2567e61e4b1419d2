use std::io::Read;

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use super::{Event, EventLogError, OrderKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    #[default]
    Timestamp,
    Index,
}

/// Column mapping for CSV event logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvConfig {
    #[serde(with = "delimiter_char")]
    pub delimiter: u8,
    pub case_col: String,
    pub activity_col: String,
    pub order_col: String,
    pub order_kind: OrderKind,
}

impl Default for CsvConfig {
    fn default() -> Self {
        CsvConfig {
            delimiter: b',',
            case_col: "case".to_string(),
            activity_col: "activity".to_string(),
            order_col: "timestamp".to_string(),
            order_kind: OrderKind::Timestamp,
        }
    }
}

mod delimiter_char {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &u8, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_char(char::from(*d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u8, D::Error> {
        let c = char::deserialize(d)?;
        u8::try_from(c).map_err(|_| D::Error::custom("delimiter must be a single-byte character"))
    }
}

/// Reads one event per data row. Row numbers in errors are 1-based and
/// count the header as row 1.
pub fn parse_csv<R: Read>(source: R, config: &CsvConfig) -> Result<Vec<Event>, EventLogError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(true)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| EventLogError::Row {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| EventLogError::MissingColumn(name.to_string()))
    };
    let case_i = column(&config.case_col)?;
    let act_i = column(&config.activity_col)?;
    let order_i = column(&config.order_col)?;

    let mut events = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let row = n + 2;
        let record = record.map_err(|e| EventLogError::Row {
            row,
            message: e.to_string(),
        })?;
        let field = |i: usize, name: &str| {
            record.get(i).ok_or_else(|| EventLogError::Row {
                row,
                message: format!("missing value for `{name}`"),
            })
        };
        let case_id = field(case_i, &config.case_col)?;
        let activity = field(act_i, &config.activity_col)?;
        let raw_order = field(order_i, &config.order_col)?.trim();
        if activity.is_empty() {
            return Err(EventLogError::Row {
                row,
                message: "empty activity label".to_string(),
            });
        }
        let order_key = match config.order_kind {
            OrderKind::Index => raw_order.parse::<i64>().map(OrderKey::Index).map_err(|e| EventLogError::Row {
                row,
                message: format!("invalid index `{raw_order}`: {e}"),
            })?,
            OrderKind::Timestamp => DateTime::parse_from_rfc3339(raw_order)
                .map(OrderKey::Timestamp)
                .map_err(|e| EventLogError::Row {
                    row,
                    message: format!("invalid RFC 3339 timestamp `{raw_order}`: {e}"),
                })?,
        };
        events.push(Event {
            case_id: case_id.to_string(),
            activity: activity.to_string(),
            order_key,
        });
    }
    Ok(events)
}
