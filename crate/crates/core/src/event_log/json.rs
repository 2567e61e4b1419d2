use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Alphabet, EventLogError, Variant, VariantLog};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantEntry {
    pub trace: Vec<String>,
    pub multiplicity: u64,
}

/// Portable variant-log export. Traces are stored without sentinels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantLogJson {
    pub variants: Vec<VariantEntry>,
    pub total_cases: u64,
}

impl VariantLogJson {
    pub fn from_log(log: &VariantLog) -> Self {
        let alphabet = log.alphabet();
        let variants = log
            .variants()
            .iter()
            .map(|v| VariantEntry {
                trace: v.trace.body().iter().map(|a| alphabet.label(*a).to_string()).collect(),
                multiplicity: v.multiplicity,
            })
            .collect();
        VariantLogJson {
            variants,
            total_cases: log.total_cases(),
        }
    }

    /// Rebuilds the log and applies BOS/EOS augmentation.
    pub fn into_log(self) -> Result<VariantLog, EventLogError> {
        let sum: u64 = self.variants.iter().map(|v| v.multiplicity).sum();
        if sum != self.total_cases {
            return Err(EventLogError::InvalidVariantLog(format!(
                "total_cases is {} but multiplicities sum to {sum}",
                self.total_cases
            )));
        }
        let mut alphabet = Alphabet::new();
        let variants = self
            .variants
            .into_iter()
            .enumerate()
            .map(|(i, v)| Variant {
                trace: super::Trace::new(v.trace.iter().map(|l| alphabet.intern(l)).collect()),
                multiplicity: v.multiplicity,
                first_seen: i,
                case_ids: Vec::new(),
            })
            .collect();
        VariantLog::from_variants(Arc::new(alphabet), variants)?.augment_bos_eos()
    }

    pub fn to_json(&self) -> Result<String, EventLogError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, EventLogError> {
        Ok(serde_json::from_str(text)?)
    }
}
