//! Entropic relevance of traces against directly-follows graphs.
//!
//! The cost of a trace is `-log2(p)` where `p` is the product of the
//! transition probabilities along the BOS/EOS-augmented trace. Probabilities
//! are accumulated in log space and the result is clamped so that `p` never
//! drops below [`EPSILON`]. There is no background model: every transition of
//! an evaluated trace must exist in the graph.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::dfg::{trace_increments, Dfg, TransitionCounts};
use crate::event_log::{Activity, Trace, VariantLog};

/// Lower bound on a trace probability.
pub const EPSILON: f64 = 1e-10;

/// Largest cost a single trace can have, `-log2(EPSILON)`.
pub fn max_cost_bits() -> f64 {
    -EPSILON.log2()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelevanceError {
    #[error("trace is not BOS/EOS-augmented")]
    NotAugmented,
    #[error("variant {variant:?} does not fit the graph: no transition {from} -> {to}")]
    NonFitting {
        variant: Option<usize>,
        from: u32,
        to: u32,
    },
}

/// A graph with the counts of one hypothetically added variant layered on
/// top. The base graph is never modified.
pub struct Overlay<'a> {
    base: &'a Dfg,
    nodes: BTreeMap<Activity, u64>,
    edges: BTreeMap<(Activity, Activity), u64>,
}

impl<'a> Overlay<'a> {
    pub fn new(base: &'a Dfg, trace: &Trace, multiplicity: u64) -> Self {
        let (nodes, edges) = trace_increments(trace, multiplicity);
        Overlay { base, nodes, edges }
    }
}

impl TransitionCounts for Overlay<'_> {
    fn node_count(&self, a: Activity) -> u64 {
        self.base.node_count(a) + self.nodes.get(&a).copied().unwrap_or(0)
    }

    fn edge_count(&self, from: Activity, to: Activity) -> u64 {
        self.base.edge_count(from, to) + self.edges.get(&(from, to)).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCost {
    pub bits: f64,
    /// The raw probability fell below [`EPSILON`].
    pub clamped: bool,
}

/// Cost of `t` under any count source.
pub fn trace_cost<C: TransitionCounts + ?Sized>(t: &Trace, counts: &C) -> Result<TraceCost, RelevanceError> {
    if !t.is_augmented() {
        return Err(RelevanceError::NotAugmented);
    }
    let floor = EPSILON.log2();
    let mut log_p = 0.0f64;
    for (a, b) in t.transitions() {
        let e = counts.edge_count(a, b);
        if e == 0 {
            return Err(RelevanceError::NonFitting {
                variant: None,
                from: a.0,
                to: b.0,
            });
        }
        log_p += (e as f64 / counts.node_count(a) as f64).log2();
    }
    if log_p < floor {
        Ok(TraceCost {
            bits: -floor,
            clamped: true,
        })
    } else {
        Ok(TraceCost {
            bits: 0.0 - log_p,
            clamped: false,
        })
    }
}

/// Cost in bits of `t` against `g`, optionally with `(trace, multiplicity)`
/// hypothetically added to `g`.
pub fn trace_er(t: &Trace, g: &Dfg, overlay: Option<(&Trace, u64)>) -> Result<f64, RelevanceError> {
    let cost = match overlay {
        Some((ot, m)) => trace_cost(t, &Overlay::new(g, ot, m))?,
        None => trace_cost(t, g)?,
    };
    Ok(cost.bits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErReport {
    /// `(variant index, cost in bits)`.
    pub per_variant: Vec<(usize, f64)>,
    pub total_bits: f64,
    pub average_bits: f64,
    pub clamped_count: usize,
}

impl Serialize for ErReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            variant: usize,
            bits: f64,
        }
        #[derive(Serialize)]
        struct Repr {
            average_bits: f64,
            total_bits: f64,
            clamped: usize,
            per_variant: Vec<Entry>,
        }
        Repr {
            average_bits: self.average_bits,
            total_bits: self.total_bits,
            clamped: self.clamped_count,
            per_variant: self
                .per_variant
                .iter()
                .map(|&(variant, bits)| Entry { variant, bits })
                .collect(),
        }
        .serialize(s)
    }
}

/// Average cost over the cases of the selected variants.
pub fn average_er_of<C: TransitionCounts + ?Sized>(
    log: &VariantLog,
    indices: impl IntoIterator<Item = usize>,
    counts: &C,
) -> Result<ErReport, RelevanceError> {
    let mut per_variant = Vec::new();
    let mut total_bits = 0.0;
    let mut cases = 0u64;
    let mut clamped_count = 0;
    for i in indices {
        let v = log.variant(i);
        let cost = trace_cost(&v.trace, counts).map_err(|e| match e {
            RelevanceError::NonFitting { from, to, .. } => RelevanceError::NonFitting {
                variant: Some(i),
                from,
                to,
            },
            other => other,
        })?;
        if cost.clamped {
            clamped_count += 1;
        }
        total_bits += v.multiplicity as f64 * cost.bits;
        cases += v.multiplicity;
        per_variant.push((i, cost.bits));
    }
    let average_bits = if cases == 0 { 0.0 } else { total_bits / cases as f64 };
    Ok(ErReport {
        per_variant,
        total_bits,
        average_bits,
        clamped_count,
    })
}

/// Average cost of every variant in `log` against `g`.
pub fn average_er(log: &VariantLog, g: &Dfg, overlay: Option<(&Trace, u64)>) -> Result<ErReport, RelevanceError> {
    match overlay {
        Some((t, m)) => average_er_of(log, 0..log.len(), &Overlay::new(g, t, m)),
        None => average_er_of(log, 0..log.len(), g),
    }
}

/// Costs of `a` and `b` against the graph built from one copy of each.
pub fn pairwise_components(a: &Trace, b: &Trace) -> Result<(f64, f64), RelevanceError> {
    let g = Dfg::build([(a, 1), (b, 1)]).map_err(|_| RelevanceError::NotAugmented)?;
    Ok((trace_cost(a, &g)?.bits, trace_cost(b, &g)?.bits))
}

/// Mean cost of two traces against the graph built from just the two of
/// them. Symmetric, and zero for identical loop-free traces.
pub fn pairwise_er(a: &Trace, b: &Trace) -> Result<f64, RelevanceError> {
    let (ca, cb) = pairwise_components(a, b)?;
    Ok((ca + cb) / 2.0)
}

/// Cost of a trace against its own single-trace graph. Non-zero only when
/// some activity repeats.
pub fn self_er(t: &Trace) -> Result<f64, RelevanceError> {
    let g = Dfg::build([(t, 1)]).map_err(|_| RelevanceError::NotAugmented)?;
    Ok(trace_cost(t, &g)?.bits)
}
