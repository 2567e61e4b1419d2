//! Directly-follows graphs stored as sparse node and edge counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_log::{Activity, Alphabet, Trace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DfgError {
    #[error("trace is not BOS/EOS-augmented")]
    NotAugmented,
    #[error("removing the variant would make the count of {0} negative")]
    Underflow(String),
    #[error("node {0} is not in the graph")]
    UnknownNode(String),
    #[error("metric undefined for a graph with {0} node(s)")]
    UndefinedMetric(usize),
    #[error("multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("invalid DFG snapshot: {0}")]
    InvalidSnapshot(String),
}

/// Read access to node and edge counts. Implemented by [`Dfg`] and by
/// overlays that add a hypothetical variant without mutating the base graph.
pub trait TransitionCounts {
    fn node_count(&self, a: Activity) -> u64;
    fn edge_count(&self, from: Activity, to: Activity) -> u64;
}

/// Directly-follows graph. Counts are exact; probabilities are derived on
/// demand as `edge_count(a, b) / node_count(a)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Dfg {
    nodes: BTreeMap<Activity, u64>,
    edges: BTreeMap<(Activity, Activity), u64>,
}

/// Node and edge increments contributed by `m` copies of a trace.
pub(crate) fn trace_increments(t: &Trace, m: u64) -> (BTreeMap<Activity, u64>, BTreeMap<(Activity, Activity), u64>) {
    let mut nodes = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for &a in t.activities() {
        *nodes.entry(a).or_insert(0) += m;
    }
    for e in t.transitions() {
        *edges.entry(e).or_insert(0) += m;
    }
    (nodes, edges)
}

impl TransitionCounts for Dfg {
    fn node_count(&self, a: Activity) -> u64 {
        self.nodes.get(&a).copied().unwrap_or(0)
    }

    fn edge_count(&self, from: Activity, to: Activity) -> u64 {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }
}

impl Dfg {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build<'a, I>(variants: I) -> Result<Dfg, DfgError>
    where
        I: IntoIterator<Item = (&'a Trace, u64)>,
    {
        let mut g = Dfg::new();
        for (t, m) in variants {
            g.add_variant(t, m)?;
        }
        Ok(g)
    }

    pub fn add_variant(&mut self, t: &Trace, m: u64) -> Result<(), DfgError> {
        if !t.is_augmented() {
            return Err(DfgError::NotAugmented);
        }
        if m == 0 {
            return Err(DfgError::ZeroMultiplicity);
        }
        for &a in t.activities() {
            *self.nodes.entry(a).or_insert(0) += m;
        }
        for e in t.transitions() {
            *self.edges.entry(e).or_insert(0) += m;
        }
        Ok(())
    }

    /// Inverse of [`Dfg::add_variant`]. Leaves the graph untouched on error.
    pub fn remove_variant(&mut self, t: &Trace, m: u64) -> Result<(), DfgError> {
        if !t.is_augmented() {
            return Err(DfgError::NotAugmented);
        }
        if m == 0 {
            return Err(DfgError::ZeroMultiplicity);
        }
        let (dn, de) = trace_increments(t, m);
        for (a, d) in &dn {
            if self.node_count(*a) < *d {
                return Err(DfgError::Underflow(format!("node {}", a.0)));
            }
        }
        for ((a, b), d) in &de {
            if self.edge_count(*a, *b) < *d {
                return Err(DfgError::Underflow(format!("edge {}->{}", a.0, b.0)));
            }
        }
        for (a, d) in dn {
            let c = self.nodes.get_mut(&a).expect("checked");
            *c -= d;
            if *c == 0 {
                self.nodes.remove(&a);
            }
        }
        for (e, d) in de {
            let c = self.edges.get_mut(&e).expect("checked");
            *c -= d;
            if *c == 0 {
                self.edges.remove(&e);
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_counts(&self) -> &BTreeMap<Activity, u64> {
        &self.nodes
    }

    pub fn edge_counts(&self) -> &BTreeMap<(Activity, Activity), u64> {
        &self.edges
    }

    /// Outgoing edges of `a` with their counts, in target id order.
    pub fn successors(&self, a: Activity) -> impl Iterator<Item = (Activity, u64)> + '_ {
        self.edges
            .range((a, Activity(0))..=(a, Activity(u32::MAX)))
            .map(|(&(_, b), &c)| (b, c))
    }

    pub fn transition_prob(&self, from: Activity, to: Activity) -> Result<f64, DfgError> {
        let n = self.node_count(from);
        if n == 0 {
            return Err(DfgError::UnknownNode(from.0.to_string()));
        }
        Ok(self.edge_count(from, to) as f64 / n as f64)
    }

    fn kept(a: Activity, include_sentinels: bool) -> bool {
        include_sentinels || !a.is_sentinel()
    }

    /// Present edges over possible directed edges `n * (n - 1)`.
    pub fn graph_density(&self, include_sentinels: bool) -> Result<f64, DfgError> {
        let n = self.nodes.keys().filter(|a| Self::kept(**a, include_sentinels)).count();
        if n < 2 {
            return Err(DfgError::UndefinedMetric(n));
        }
        let e = self
            .edges
            .keys()
            .filter(|(a, b)| Self::kept(*a, include_sentinels) && Self::kept(*b, include_sentinels))
            .count();
        Ok(e as f64 / (n * (n - 1)) as f64)
    }

    /// Sum over nodes of the Shannon entropy (bits) of their outgoing
    /// transition probabilities. With sentinels excluded, terms whose source
    /// or target is a sentinel are dropped; the remaining probabilities keep
    /// their full-graph values.
    pub fn graph_entropy(&self, include_sentinels: bool) -> f64 {
        let mut total = 0.0;
        for (&a, &n) in &self.nodes {
            if !Self::kept(a, include_sentinels) {
                continue;
            }
            let mut h = 0.0;
            for (b, c) in self.successors(a) {
                if !Self::kept(b, include_sentinels) {
                    continue;
                }
                let p = c as f64 / n as f64;
                if p < 1.0 {
                    h -= p * p.log2();
                }
            }
            total += h;
        }
        total
    }

    pub fn to_dot(&self, alphabet: &Alphabet, labels: EdgeLabels) -> String {
        let mut out = String::new();
        out.push_str("digraph dfg {\n");
        out.push_str("  rankdir=LR;\n");
        out.push_str("  node [shape=box, style=rounded];\n");
        for (&a, &c) in &self.nodes {
            let name = escape_dot(alphabet.label(a));
            if a.is_sentinel() {
                let _ = writeln!(
                    out,
                    "  n{} [label=\"{}\", shape=circle, style=filled, fillcolor=\"#d9d9d9\"];",
                    a.0, name
                );
            } else {
                let _ = writeln!(out, "  n{} [label=\"{}\\n{}\"];", a.0, name, c);
            }
        }
        for (&(a, b), &c) in &self.edges {
            let p = c as f64 / self.node_count(a) as f64;
            let label = match labels {
                EdgeLabels::CountAndProbability => format!("{c} ({p:.3})"),
                EdgeLabels::Count => c.to_string(),
                EdgeLabels::Probability => format!("{p:.3}"),
            };
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", a.0, b.0, label);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_snapshot(&self, alphabet: &Alphabet) -> DfgSnapshot {
        DfgSnapshot {
            nodes: self
                .nodes
                .iter()
                .map(|(a, c)| (alphabet.label(*a).to_string(), *c))
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|((a, b), c)| SnapshotEdge {
                    from: alphabet.label(*a).to_string(),
                    to: alphabet.label(*b).to_string(),
                    count: *c,
                })
                .collect(),
        }
    }

    /// Rebuilds a graph from a snapshot, interning unseen labels.
    pub fn from_snapshot(snapshot: &DfgSnapshot, alphabet: &mut Alphabet) -> Result<Dfg, DfgError> {
        let mut resolve = |label: &str| alphabet.resolve(label).unwrap_or_else(|| alphabet.intern(label));
        let mut g = Dfg::new();
        for (label, &c) in &snapshot.nodes {
            if c == 0 {
                return Err(DfgError::InvalidSnapshot(format!("node `{label}` has count 0")));
            }
            g.nodes.insert(resolve(label), c);
        }
        for e in &snapshot.edges {
            let (a, b) = (resolve(&e.from), resolve(&e.to));
            if e.count == 0 || !g.nodes.contains_key(&a) || !g.nodes.contains_key(&b) {
                return Err(DfgError::InvalidSnapshot(format!("bad edge `{}` -> `{}`", e.from, e.to)));
            }
            g.edges.insert((a, b), e.count);
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeLabels {
    #[default]
    CountAndProbability,
    Count,
    Probability,
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEdge {
    pub from: String,
    pub to: String,
    pub count: u64,
}

/// JSON form: `{ "nodes": {label: count}, "edges": [{"from","to","count"}] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfgSnapshot {
    pub nodes: IndexMap<String, u64>,
    pub edges: Vec<SnapshotEdge>,
}
