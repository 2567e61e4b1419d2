use std::io::BufRead;

use chrono::{DateTime, FixedOffset, NaiveDateTime};
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::{Reader, XmlVersion};

use super::{Event, EventLogError, OrderKey};

const ATTRIBUTE_TAGS: [&str; 8] = ["string", "date", "int", "float", "boolean", "id", "list", "container"];

#[derive(Default)]
struct PendingEvent {
    activity: Option<String>,
    timestamp: Option<DateTime<FixedOffset>>,
}

#[derive(Default)]
struct PendingTrace {
    name: Option<String>,
    events: Vec<PendingEvent>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    Log,
    Trace,
    Event,
    Other,
}

/// Parses the control-flow subset of XES: `log/trace/event` with
/// `concept:name` and optional `time:timestamp`. Other attributes and
/// elements are skipped.
///
/// Events of a trace use their timestamps as order keys when every event in
/// the trace has one; otherwise document order is used for the whole trace.
pub fn parse_xes<R: BufRead>(source: R) -> Result<Vec<Event>, EventLogError> {
    let mut reader = Reader::from_reader(source);
    let mut buf = Vec::new();
    let mut scopes: Vec<Scope> = Vec::new();
    let mut trace: Option<PendingTrace> = None;
    let mut trace_count = 0usize;
    let mut out = Vec::new();

    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| EventLogError::Xml {
            position: reader.error_position(),
            message: e.to_string(),
        })?;
        let position = reader.buffer_position();
        match event {
            XmlEvent::Start(ref e) | XmlEvent::Empty(ref e) => {
                let is_empty = matches!(event, XmlEvent::Empty(_));
                let parent = scopes.last().copied();
                let name = e.local_name();
                let name: &str = name.as_ref();
                let scope = match (parent, name) {
                    (None, "log") => Scope::Log,
                    (Some(Scope::Log), "trace") => {
                        trace = Some(PendingTrace::default());
                        Scope::Trace
                    }
                    (Some(Scope::Trace), "event") => {
                        if let Some(t) = trace.as_mut() {
                            t.events.push(PendingEvent::default());
                        }
                        Scope::Event
                    }
                    (Some(p @ (Scope::Trace | Scope::Event)), tag) if ATTRIBUTE_TAGS.contains(&tag) => {
                        if let Some(t) = trace.as_mut() {
                            apply_attribute(e, tag, p, t, position)?;
                        }
                        Scope::Other
                    }
                    _ => Scope::Other,
                };
                if is_empty {
                    if scope == Scope::Trace {
                        finish_trace(trace.take(), &mut trace_count, &mut out)?;
                    }
                } else {
                    scopes.push(scope);
                }
            }
            XmlEvent::End(_) => {
                if scopes.pop() == Some(Scope::Trace) {
                    finish_trace(trace.take(), &mut trace_count, &mut out)?;
                }
            }
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !scopes.is_empty() {
        return Err(EventLogError::Xml {
            position: reader.buffer_position(),
            message: "unexpected end of document".to_string(),
        });
    }
    Ok(out)
}

fn apply_attribute(
    e: &BytesStart<'_>,
    tag: &str,
    scope: Scope,
    trace: &mut PendingTrace,
    position: u64,
) -> Result<(), EventLogError> {
    let mut key = None;
    let mut value = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| EventLogError::Xml {
            position,
            message: err.to_string(),
        })?;
        let v = attr
            .normalized_value(XmlVersion::Implicit1_0)
            .map_err(|err| EventLogError::Xml {
                position,
                message: err.to_string(),
            })?
            .into_owned();
        let attr_key: &str = attr.key.as_ref();
        match attr_key {
            "key" => key = Some(v),
            "value" => value = Some(v),
            _ => {}
        }
    }
    let (Some(key), Some(value)) = (key, value) else {
        return Ok(());
    };
    match (scope, key.as_str(), tag) {
        (Scope::Trace, "concept:name", _) => trace.name = Some(value),
        (Scope::Event, "concept:name", _) => {
            if let Some(ev) = trace.events.last_mut() {
                ev.activity = Some(value);
            }
        }
        (Scope::Event, "time:timestamp", "date") => {
            let ts = parse_timestamp(&value).ok_or_else(|| EventLogError::Xml {
                position,
                message: format!("invalid timestamp `{value}`"),
            })?;
            if let Some(ev) = trace.events.last_mut() {
                ev.timestamp = Some(ts);
            }
        }
        _ => {}
    }
    Ok(())
}

fn parse_timestamp(raw: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Some(t);
    }
    NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f")
        .ok()
        .map(|n| n.and_utc().fixed_offset())
}

fn finish_trace(trace: Option<PendingTrace>, count: &mut usize, out: &mut Vec<Event>) -> Result<(), EventLogError> {
    let Some(trace) = trace else { return Ok(()) };
    let case_id = trace.name.unwrap_or_else(|| format!("trace-{}", *count));
    *count += 1;
    let timed = trace.events.iter().all(|e| e.timestamp.is_some());
    for (i, ev) in trace.events.into_iter().enumerate() {
        let activity = ev.activity.ok_or_else(|| EventLogError::MissingActivity {
            trace: case_id.clone(),
            event: i,
        })?;
        let order_key = match (timed, ev.timestamp) {
            (true, Some(ts)) => OrderKey::Timestamp(ts),
            _ => OrderKey::Index(i as i64),
        };
        out.push(Event {
            case_id: case_id.clone(),
            activity,
            order_key,
        });
    }
    Ok(())
}
