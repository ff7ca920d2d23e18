//! JSON form shared by tensors and multivectors:
//! `{"dim": d, "order": N, "entries": [{"idx": [...], "val": "p/q"}, ...]}`.

use serde::{Deserialize, Serialize};

use super::{LinError, Multivector, Rational, Tensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub idx: Vec<usize>,
    pub val: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub dim: usize,
    pub order: usize,
    pub entries: Vec<EntryJson>,
    /// Declared symmetry class, e.g. `"riemann"`; absent for plain tensors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<String>,
}

/// 1-based line of the `k`-th `"idx"` key in `text`, for error messages.
fn line_of_entry(text: &str, k: usize) -> Option<usize> {
    let (pos, _) = text.match_indices("\"idx\"").nth(k)?;
    Some(text[..pos].matches('\n').count() + 1)
}

fn duplicate_error(text: &str, k: usize, idx: &[usize]) -> LinError {
    match line_of_entry(text, k) {
        Some(line) => LinError::Parse(format!("line {line}: duplicate idx {idx:?}")),
        None => LinError::Parse(format!("entry {k}: duplicate idx {idx:?}")),
    }
}

impl TensorJson {
    pub fn parse(text: &str) -> Result<Self, LinError> {
        serde_json::from_str(text).map_err(|e| LinError::Parse(e.to_string()))
    }

    fn check(&self, text: &str) -> Result<(), LinError> {
        let mut seen = std::collections::BTreeSet::new();
        for (k, e) in self.entries.iter().enumerate() {
            let at = || line_of_entry(text, k).map_or(format!("entry {k}"), |l| format!("line {l}"));
            if e.idx.len() != self.order {
                return Err(LinError::Parse(format!("{}: idx has length {}, expected {}", at(), e.idx.len(), self.order)));
            }
            if let Some(bad) = e.idx.iter().find(|&&i| i >= self.dim) {
                return Err(LinError::Parse(format!("{}: index {bad} out of range for dim {}", at(), self.dim)));
            }
            if !seen.insert(e.idx.clone()) {
                return Err(duplicate_error(text, k, &e.idx));
            }
        }
        Ok(())
    }
}

impl Tensor {
    pub fn to_json_value(&self) -> TensorJson {
        TensorJson {
            dim: self.dim(),
            order: self.order(),
            entries: self.entries().map(|(i, v)| EntryJson { idx: i.clone(), val: v.clone() }).collect(),
            symmetry: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json_value(js: &TensorJson, text: &str) -> Result<Tensor, LinError> {
        js.check(text)?;
        Tensor::from_entries(js.dim, js.order, js.entries.iter().map(|e| (e.idx.clone(), e.val.clone())))
    }

    pub fn from_json(text: &str) -> Result<Tensor, LinError> {
        Self::from_json_value(&TensorJson::parse(text)?, text)
    }
}

impl Multivector {
    pub fn to_json(&self) -> String {
        let js = TensorJson {
            dim: self.dim(),
            order: self.grade(),
            entries: self.terms().map(|(i, v)| EntryJson { idx: i.clone(), val: v.clone() }).collect(),
            symmetry: None,
        };
        serde_json::to_string_pretty(&js).expect("serializable")
    }

    /// Entries must use strictly increasing index sets.
    pub fn from_json(text: &str) -> Result<Multivector, LinError> {
        let js = TensorJson::parse(text)?;
        js.check(text)?;
        let mut m = Multivector::zero(js.dim, js.order);
        for (k, e) in js.entries.iter().enumerate() {
            if e.idx.windows(2).any(|w| w[0] >= w[1]) {
                let at = line_of_entry(text, k).map_or(format!("entry {k}"), |l| format!("line {l}"));
                return Err(LinError::Parse(format!("{at}: idx {:?} is not strictly increasing", e.idx)));
            }
            m.add_term(e.idx.clone(), e.val.clone());
        }
        Ok(m)
    }
}
