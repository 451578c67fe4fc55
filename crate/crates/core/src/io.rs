//! Allocation documents.
//!
//! ```json
//! { "bundles": [ { "agent": "a1", "goods": ["g1"], "cake": [], "utility": "3/5" },
//!                { "agent": "a2", "goods": [], "cake": [["0","1"]], "utility": "2/5" } ] }
//! ```
//!
//! `cake` is in concatenated coordinates on `[0, 1]`. With several cakes a
//! `cake_local` list of `[cake, start, end]` triples in each cake's own
//! coordinates is added; it is ignored on input.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fairness::{Allocation, AllocationError, Bundle, IntervalSet};
use crate::model::Instance;
use crate::scalar::{format_scalar, int, to_f64, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum AllocationLoadError {
    #[error("{path}: cannot read file: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("agent `{0}` appears twice")]
    DuplicateAgent(String),
    #[error("unknown good `{0}`")]
    UnknownGood(String),
    #[error(transparent)]
    Invalid(#[from] AllocationError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleDoc {
    pub agent: String,
    #[serde(default)]
    pub goods: Vec<String>,
    #[serde(default)]
    pub cake: IntervalSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility_decimal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cake_local: Option<Vec<(usize, String, String)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocationDoc {
    pub bundles: Vec<BundleDoc>,
    #[serde(default, skip_serializing_if = "IntervalSet::is_empty")]
    pub unallocated: IntervalSet,
}

impl AllocationDoc {
    pub fn new(inst: &Instance, alloc: &Allocation, decimal: bool) -> Self {
        let bundles = alloc
            .bundles
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let u = b.value(inst, i);
                BundleDoc {
                    agent: inst.agent_names()[i].clone(),
                    goods: b.goods.iter().map(|&g| inst.good_names()[g].clone()).collect(),
                    cake: b.cake.clone(),
                    utility_decimal: decimal.then(|| format!("{:.6}", to_f64(&u))),
                    utility: Some(format_scalar(&u)),
                    cake_local: (inst.cake_offsets().len() > 2).then(|| local_pieces(inst, &b.cake)),
                }
            })
            .collect();
        Self {
            bundles,
            unallocated: alloc.unallocated.clone(),
        }
    }

    /// Resolves names against `inst` and checks the allocation's structure.
    /// Agents missing from the document get an empty bundle.
    pub fn into_allocation(self, inst: &Instance) -> Result<Allocation, AllocationLoadError> {
        let mut bundles = vec![None; inst.n()];
        for doc in self.bundles {
            let i = inst
                .agent_index(&doc.agent)
                .ok_or_else(|| AllocationLoadError::UnknownAgent(doc.agent.clone()))?;
            if bundles[i].is_some() {
                return Err(AllocationLoadError::DuplicateAgent(doc.agent));
            }
            let mut goods = Vec::with_capacity(doc.goods.len());
            for name in &doc.goods {
                let g = inst
                    .good_index(name)
                    .ok_or_else(|| AllocationLoadError::UnknownGood(name.clone()))?;
                if goods.contains(&g) {
                    return Err(AllocationError::DuplicateGood { good: g, first: i, second: i }.into());
                }
                goods.push(g);
            }
            bundles[i] = Some(Bundle {
                goods: goods.into_iter().collect(),
                cake: doc.cake,
            });
        }
        let alloc = Allocation {
            bundles: bundles.into_iter().map(Option::unwrap_or_default).collect(),
            unallocated: IntervalSet::empty(),
        }
        .with_derived_unallocated(inst);
        alloc.validate(inst, false)?;
        Ok(alloc)
    }
}

fn local_pieces(inst: &Instance, cake: &IntervalSet) -> Vec<(usize, String, String)> {
    let offsets = inst.cake_offsets();
    let l = int((offsets.len() - 1) as i64);
    let mut out = Vec::new();
    for (k, w) in offsets.windows(2).enumerate() {
        for (a, b) in cake.clip(&w[0], &w[1]).iter() {
            let local = |x: &Scalar| format_scalar(&((x - &w[0]) * &l));
            out.push((k, local(a), local(b)));
        }
    }
    out
}

pub fn allocation_to_json(inst: &Instance, alloc: &Allocation, decimal: bool) -> String {
    serde_json::to_string_pretty(&AllocationDoc::new(inst, alloc, decimal)).expect("allocation serializes")
}

pub fn read_allocation_str(inst: &Instance, text: &str) -> Result<Allocation, AllocationLoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: AllocationDoc = serde_path_to_error::deserialize(de).map_err(|e| AllocationLoadError::Parse {
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    doc.into_allocation(inst)
}

pub fn read_allocation(inst: &Instance, path: impl AsRef<Path>) -> Result<Allocation, AllocationLoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AllocationLoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_allocation_str(inst, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_instance_str;
    use crate::samples::efm_po_conflict;
    use crate::scalar::ratio;

    #[test]
    fn round_trip() {
        let inst = efm_po_conflict();
        let mut a = Allocation::from_assignment(&inst, &[0]);
        a.give_cake(1, &IntervalSet::unit());
        let text = allocation_to_json(&inst, &a, true);
        assert!(text.contains("\"utility\": \"3/5\""));
        assert!(text.contains("\"utility_decimal\": \"0.600000\""));
        assert!(!text.contains("cake_local"));
        assert_eq!(read_allocation_str(&inst, &text).unwrap(), a);
    }

    #[test]
    fn rejects_bad_documents() {
        let inst = efm_po_conflict();
        let unknown = r#"{"bundles":[{"agent":"zed"}]}"#;
        assert!(matches!(read_allocation_str(&inst, unknown), Err(AllocationLoadError::UnknownAgent(_))));
        let twice = r#"{"bundles":[{"agent":"a1","goods":["g1"]},{"agent":"a2","goods":["g1"]}]}"#;
        assert!(matches!(
            read_allocation_str(&inst, twice),
            Err(AllocationLoadError::Invalid(AllocationError::DuplicateGood { .. }))
        ));
        let overlap = r#"{"bundles":[{"agent":"a1","cake":[["0","2/3"]]},{"agent":"a2","cake":[["1/2","1"]]}]}"#;
        assert!(matches!(
            read_allocation_str(&inst, overlap),
            Err(AllocationLoadError::Invalid(AllocationError::CakeOverlap(0, 1)))
        ));
        let bad = r#"{"bundles":[{"agent":"a1","cake":[["x","1"]]}]}"#;
        match read_allocation_str(&inst, bad) {
            Err(AllocationLoadError::Parse { field, .. }) => assert_eq!(field, "bundles[0].cake"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_cakes_get_local_coordinates() {
        let inst = load_instance_str(
            r#"{"agents":["a","b"],"cakes":[
                {"per_agent":{"a":[{"start":"0","end":"1","left":"1","right":"1"}],
                              "b":[{"start":"0","end":"1","left":"1","right":"1"}]}},
                {"per_agent":{"a":[{"start":"0","end":"1","left":"1","right":"1"}],
                              "b":[{"start":"0","end":"1","left":"1","right":"1"}]}}]}"#,
        )
        .unwrap();
        let mut a = Allocation::empty(&inst);
        a.give_cake(0, &IntervalSet::interval(ratio(1, 4), ratio(3, 4)));
        let doc = AllocationDoc::new(&inst, &a, false);
        assert_eq!(
            doc.bundles[0].cake_local,
            Some(vec![(0, "1/2".to_string(), "1".to_string()), (1, "0".to_string(), "1/2".to_string())])
        );
    }
}
