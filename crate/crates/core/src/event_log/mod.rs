//! Event ingestion and variant compression.
//!
//! Raw events (from CSV or XES) are grouped into cases, ordered, and merged
//! into a [`VariantLog`]: the distinct control-flow traces of the log together
//! with how many cases exhibit each of them. Activity labels are interned in
//! an [`Alphabet`] that always reserves two ids for the artificial begin and
//! end-of-sequence activities.

mod csv_source;
mod json;
mod xes;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, FixedOffset};
use thiserror::Error;

pub use csv_source::{parse_csv, CsvConfig, OrderKind};
pub use json::{VariantEntry, VariantLogJson};
pub use xes::parse_xes;

/// Reserved label of the begin-of-sequence sentinel.
pub const BOS: &str = "__BOS__";
/// Reserved label of the end-of-sequence sentinel.
pub const EOS: &str = "__EOS__";

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("XES parse error at byte {position}: {message}")]
    Xml { position: u64, message: String },
    #[error("event {event} of trace `{trace}` has no concept:name")]
    MissingActivity { trace: String, event: usize },
    #[error("activity label `{0}` collides with a reserved sentinel")]
    ReservedLabel(String),
    #[error("invalid variant log: {0}")]
    InvalidVariantLog(String),
    #[error("empty activity label in case `{0}`")]
    EmptyActivity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Interned activity label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Activity(pub u32);

impl Activity {
    pub const BOS: Activity = Activity(0);
    pub const EOS: Activity = Activity(1);

    pub fn is_sentinel(self) -> bool {
        self.0 < 2
    }
}

/// Bidirectional label table. Ids 0 and 1 always denote BOS and EOS; every
/// other label, even one spelled like a sentinel, gets a fresh id so that
/// collisions can be detected rather than silently merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, Activity>,
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new()
    }
}

impl Alphabet {
    pub fn new() -> Self {
        Alphabet {
            labels: vec![BOS.to_string(), EOS.to_string()],
            index: HashMap::new(),
        }
    }

    pub fn intern(&mut self, label: &str) -> Activity {
        if let Some(&a) = self.index.get(label) {
            return a;
        }
        let a = Activity(self.labels.len() as u32);
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), a);
        a
    }

    /// Looks up a non-sentinel label.
    pub fn get(&self, label: &str) -> Option<Activity> {
        self.index.get(label).copied()
    }

    /// Resolves a label, mapping the reserved spellings to the sentinels.
    pub fn resolve(&self, label: &str) -> Option<Activity> {
        match label {
            BOS => Some(Activity::BOS),
            EOS => Some(Activity::EOS),
            _ => self.get(label),
        }
    }

    pub fn label(&self, a: Activity) -> &str {
        &self.labels[a.0 as usize]
    }

    /// Number of ids, sentinels included.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.len() == 2
    }

    /// Non-sentinel activities in id order.
    pub fn vocabulary(&self) -> impl Iterator<Item = Activity> + '_ {
        (2..self.labels.len() as u32).map(Activity)
    }
}

/// Position of an event within its case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrderKey {
    Index(i64),
    Timestamp(DateTime<FixedOffset>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub case_id: String,
    pub activity: String,
    pub order_key: OrderKey,
}

impl Event {
    pub fn new(case_id: impl Into<String>, activity: impl Into<String>, order_key: OrderKey) -> Self {
        Event {
            case_id: case_id.into(),
            activity: activity.into(),
            order_key,
        }
    }
}

/// Sequence of interned activities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Trace(Vec<Activity>);

impl Trace {
    pub fn new(activities: Vec<Activity>) -> Self {
        Trace(activities)
    }

    pub fn activities(&self) -> &[Activity] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when the trace starts with BOS, ends with EOS and has no other
    /// sentinel occurrence.
    pub fn is_augmented(&self) -> bool {
        let n = self.0.len();
        n >= 2
            && self.0[0] == Activity::BOS
            && self.0[n - 1] == Activity::EOS
            && self.0[1..n - 1].iter().all(|a| !a.is_sentinel())
    }

    pub fn augmented(&self) -> Trace {
        let mut acts = Vec::with_capacity(self.0.len() + 2);
        acts.push(Activity::BOS);
        acts.extend_from_slice(&self.0);
        acts.push(Activity::EOS);
        Trace(acts)
    }

    /// Activities without the sentinels.
    pub fn body(&self) -> &[Activity] {
        if self.is_augmented() {
            &self.0[1..self.0.len() - 1]
        } else {
            &self.0
        }
    }

    /// Adjacent pairs, in order.
    pub fn transitions(&self) -> impl Iterator<Item = (Activity, Activity)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> TraceDisplay<'a> {
        TraceDisplay { trace: self, alphabet }
    }
}

pub struct TraceDisplay<'a> {
    trace: &'a Trace,
    alphabet: &'a Alphabet,
}

impl fmt::Display for TraceDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, a) in self.trace.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.alphabet.label(*a))?;
        }
        write!(f, ">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub trace: Trace,
    pub multiplicity: u64,
    /// Index of the first case (in source order) exhibiting this trace.
    pub first_seen: usize,
    /// Case ids exhibiting this trace, in source order. Empty for logs
    /// imported from a variant export.
    pub case_ids: Vec<String>,
}

/// Distinct traces with multiplicities, ordered by decreasing multiplicity
/// and then by first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantLog {
    alphabet: Arc<Alphabet>,
    variants: Vec<Variant>,
    total_cases: u64,
}

impl VariantLog {
    /// Builds a log from already-compressed variants. Duplicate traces are
    /// merged; the result is sorted into canonical order.
    pub fn from_variants(alphabet: Arc<Alphabet>, variants: Vec<Variant>) -> Result<Self, EventLogError> {
        let mut merged: Vec<Variant> = Vec::with_capacity(variants.len());
        let mut seen: HashMap<Trace, usize> = HashMap::new();
        for v in variants {
            if v.multiplicity == 0 {
                return Err(EventLogError::InvalidVariantLog(format!(
                    "variant {} has multiplicity 0",
                    v.trace.display(&alphabet)
                )));
            }
            match seen.get(&v.trace) {
                Some(&i) => {
                    let m = &mut merged[i];
                    m.multiplicity += v.multiplicity;
                    m.first_seen = m.first_seen.min(v.first_seen);
                    m.case_ids.extend(v.case_ids);
                }
                None => {
                    seen.insert(v.trace.clone(), merged.len());
                    merged.push(v);
                }
            }
        }
        merged.sort_by(|a, b| b.multiplicity.cmp(&a.multiplicity).then(a.first_seen.cmp(&b.first_seen)));
        let total_cases = merged.iter().map(|v| v.multiplicity).sum();
        Ok(VariantLog {
            alphabet,
            variants: merged,
            total_cases,
        })
    }

    /// Convenience constructor from label sequences, mostly for tests and
    /// bindings. Traces are taken as given (no augmentation).
    pub fn from_label_traces<S: AsRef<str>>(traces: &[(Vec<S>, u64)]) -> Result<Self, EventLogError> {
        let mut alphabet = Alphabet::new();
        let variants = traces
            .iter()
            .enumerate()
            .map(|(i, (labels, m))| Variant {
                trace: Trace(labels.iter().map(|l| alphabet.intern(l.as_ref())).collect()),
                multiplicity: *m,
                first_seen: i,
                case_ids: Vec::new(),
            })
            .collect();
        Self::from_variants(Arc::new(alphabet), variants)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    pub fn variant(&self, index: usize) -> &Variant {
        &self.variants[index]
    }

    /// Number of distinct variants.
    pub fn len(&self) -> usize {
        self.variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variants.is_empty()
    }

    pub fn total_cases(&self) -> u64 {
        self.total_cases
    }

    /// Labels occurring in at least one trace, sentinels excluded.
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut used = vec![false; self.alphabet.len()];
        for v in &self.variants {
            for a in v.trace.activities() {
                used[a.0 as usize] = true;
            }
        }
        self.alphabet
            .vocabulary()
            .filter(|a| used[a.0 as usize])
            .map(|a| self.alphabet.label(a))
            .collect()
    }

    pub fn is_augmented(&self) -> bool {
        self.variants.iter().all(|v| v.trace.is_augmented())
    }

    /// Prepends BOS and appends EOS to every trace. Fails if a real activity
    /// is spelled like one of the reserved sentinels.
    pub fn augment_bos_eos(self) -> Result<VariantLog, EventLogError> {
        for reserved in [BOS, EOS] {
            if let Some(a) = self.alphabet.get(reserved) {
                if self.variants.iter().any(|v| v.trace.activities().contains(&a)) {
                    return Err(EventLogError::ReservedLabel(reserved.to_string()));
                }
            }
        }
        let variants = self
            .variants
            .into_iter()
            .map(|v| Variant {
                trace: v.trace.augmented(),
                ..v
            })
            .collect();
        Ok(VariantLog {
            alphabet: self.alphabet,
            variants,
            total_cases: self.total_cases,
        })
    }

    /// Sub-log over the given variant indices, keeping canonical order.
    pub fn subset(&self, indices: &[usize]) -> VariantLog {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        let variants: Vec<Variant> = idx.iter().map(|&i| self.variants[i].clone()).collect();
        let total_cases = variants.iter().map(|v| v.multiplicity).sum();
        VariantLog {
            alphabet: Arc::clone(&self.alphabet),
            variants,
            total_cases,
        }
    }

    /// Case-level traces obtained by expanding multiplicities.
    pub fn expand(&self) -> Vec<&Trace> {
        self.variants
            .iter()
            .flat_map(|v| std::iter::repeat_n(&v.trace, v.multiplicity as usize))
            .collect()
    }
}

/// Groups events into cases, orders each case by `order_key` (ties keep
/// input order) and merges identical traces into variants.
pub fn to_variant_log(events: &[Event]) -> Result<VariantLog, EventLogError> {
    let mut case_index: HashMap<&str, usize> = HashMap::new();
    let mut cases: Vec<(&str, Vec<(usize, &Event)>)> = Vec::new();
    for (pos, e) in events.iter().enumerate() {
        if e.activity.is_empty() {
            return Err(EventLogError::EmptyActivity(e.case_id.clone()));
        }
        let ci = *case_index.entry(e.case_id.as_str()).or_insert_with(|| {
            cases.push((e.case_id.as_str(), Vec::new()));
            cases.len() - 1
        });
        cases[ci].1.push((pos, e));
    }

    let mut alphabet = Alphabet::new();
    let mut variants: Vec<Variant> = Vec::new();
    let mut by_trace: HashMap<Trace, usize> = HashMap::new();
    for (ci, (case_id, mut evs)) in cases.into_iter().enumerate() {
        // stable sort keeps input order for equal keys
        evs.sort_by_key(|a| a.1.order_key);
        let trace = Trace(evs.iter().map(|(_, e)| alphabet.intern(&e.activity)).collect());
        match by_trace.get(&trace) {
            Some(&vi) => {
                variants[vi].multiplicity += 1;
                variants[vi].case_ids.push(case_id.to_string());
            }
            None => {
                by_trace.insert(trace.clone(), variants.len());
                variants.push(Variant {
                    trace,
                    multiplicity: 1,
                    first_seen: ci,
                    case_ids: vec![case_id.to_string()],
                });
            }
        }
    }
    VariantLog::from_variants(Arc::new(alphabet), variants)
}
