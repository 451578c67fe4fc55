//! Instance documents.
//!
//! ```json
//! { "agents": ["a1","a2"],
//!   "goods":  [ {"id":"g1", "utilities": {"a1":"3/5","a2":"3/5"}} ],
//!   "cakes":  [ { "per_agent": { "a1": [ {"start":"0","end":"1/2","left":"4/5","right":"4/5"} ] } } ],
//!   "normalize": true }
//! ```
//!
//! Several cakes are laid side by side on `[0, 1]`, cake `k` of `l` taking
//! `[k/l, (k+1)/l)` with its densities scaled by `l` so values are preserved.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use super::{AgentValuation, Density, DensitySegment, Instance};
use crate::scalar::{int, serde_scalar, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: cannot read file: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: at `{field}`: {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("at `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// A rational that must be `>= 0`; rejected during parsing so the error
/// carries the line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
struct NonNeg(Scalar);

impl<'de> Deserialize<'de> for NonNeg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_scalar::deserialize(d)?;
        if v.is_negative() {
            return Err(serde::de::Error::custom(format!("negative value {v}")));
        }
        Ok(NonNeg(v))
    }
}

impl Serialize for NonNeg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_scalar::serialize(&self.0, s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    #[serde(with = "serde_scalar")]
    pub start: Scalar,
    #[serde(with = "serde_scalar")]
    pub end: Scalar,
    left: NonNeg,
    right: NonNeg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodDoc {
    pub id: String,
    utilities: BTreeMap<String, NonNeg>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CakeDoc {
    pub per_agent: BTreeMap<String, Vec<SegmentDoc>>,
}

fn yes() -> bool {
    true
}

/// Wire form of an [`Instance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub agents: Vec<String>,
    #[serde(default)]
    pub goods: Vec<GoodDoc>,
    #[serde(default)]
    pub cakes: Vec<CakeDoc>,
    #[serde(default = "yes")]
    pub normalize: bool,
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_instance_str(&text)
}

pub fn load_instance_str(text: &str) -> Result<Instance, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: InstanceDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        LoadError::Parse {
            field,
            line: inner.line(),
            column: inner.column(),
            message: strip_position(&inner.to_string()),
        }
    })?;
    doc.into_instance()
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance, LoadError> {
        if self.agents.is_empty() {
            return Err(invalid("agents", "at least one agent is required"));
        }
        let mut seen = BTreeSet::new();
        for (k, a) in self.agents.iter().enumerate() {
            if !seen.insert(a.as_str()) {
                return Err(invalid(format!("agents[{k}]"), format!("duplicate agent id {a:?}")));
            }
        }
        let agent_set: BTreeSet<&str> = self.agents.iter().map(String::as_str).collect();
        let check_keys = |field: String, keys: BTreeSet<&str>| -> Result<(), LoadError> {
            if let Some(missing) = agent_set.difference(&keys).next() {
                return Err(invalid(field, format!("missing agent {missing:?}")));
            }
            if let Some(extra) = keys.difference(&agent_set).next() {
                return Err(invalid(field, format!("unknown agent {extra:?}")));
            }
            Ok(())
        };

        let mut good_ids = BTreeSet::new();
        for (k, g) in self.goods.iter().enumerate() {
            if !good_ids.insert(g.id.as_str()) {
                return Err(invalid(format!("goods[{k}].id"), format!("duplicate good id {:?}", g.id)));
            }
            check_keys(
                format!("goods[{k}].utilities"),
                g.utilities.keys().map(String::as_str).collect(),
            )?;
        }

        let cake_count = self.cakes.len();
        let mut per_agent_segments: Vec<Vec<DensitySegment>> = vec![Vec::new(); self.agents.len()];
        for (c, cake) in self.cakes.iter().enumerate() {
            check_keys(
                format!("cakes[{c}].per_agent"),
                cake.per_agent.keys().map(String::as_str).collect(),
            )?;
            for (i, agent) in self.agents.iter().enumerate() {
                let field = format!("cakes[{c}].per_agent.{agent}");
                let segs: Vec<DensitySegment> = cake.per_agent[agent]
                    .iter()
                    .map(|s| DensitySegment {
                        start: s.start.clone(),
                        end: s.end.clone(),
                        left: s.left.0.clone(),
                        right: s.right.0.clone(),
                    })
                    .collect();
                // Validate each cake on its own unit interval first.
                Density::new(segs.clone()).map_err(|e| invalid(&field, e.to_string()))?;
                let l = int(cake_count as i64);
                let offset = int(c as i64);
                per_agent_segments[i].extend(segs.into_iter().map(|s| DensitySegment {
                    start: (&offset + &s.start) / &l,
                    end: (&offset + &s.end) / &l,
                    left: &s.left * &l,
                    right: &s.right * &l,
                }));
            }
        }

        let valuations = per_agent_segments
            .into_iter()
            .enumerate()
            .map(|(i, segs)| {
                let agent = &self.agents[i];
                let density = if segs.is_empty() {
                    Density::zero()
                } else {
                    Density::new(segs).map_err(|e| invalid(format!("cakes[*].per_agent.{agent}"), e.to_string()))?
                };
                let goods = self.goods.iter().map(|g| g.utilities[agent].0.clone()).collect();
                Ok(AgentValuation { goods, density })
            })
            .collect::<Result<Vec<_>, LoadError>>()?;

        let offsets = (0..=cake_count.max(1))
            .map(|k| Scalar::new(k.into(), cake_count.max(1).into()))
            .collect();
        let inst = Instance::new(
            self.agents.clone(),
            self.goods.iter().map(|g| g.id.clone()).collect(),
            valuations,
            cake_count > 0,
        )
        .map_err(|e| invalid("", e.to_string()))?
        .with_cake_offsets(offsets);

        if self.normalize {
            for i in 0..inst.n() {
                if inst.valuation(i).total().is_zero() {
                    return Err(invalid(
                        format!("agents[{i}]"),
                        format!("agent {:?} has zero total utility; normalization impossible", self.agents[i]),
                    ));
                }
            }
            return inst.normalized().map_err(|e| invalid("", e.to_string()));
        }
        Ok(inst)
    }
}

impl Instance {
    /// Wire form, splitting the concatenated cake back into its original cakes.
    pub fn to_document(&self) -> InstanceDoc {
        let goods = self
            .good_names()
            .iter()
            .enumerate()
            .map(|(g, id)| GoodDoc {
                id: id.clone(),
                utilities: self
                    .agent_names()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (a.clone(), NonNeg(self.good_value(i, g).clone())))
                    .collect(),
            })
            .collect();
        let mut cakes = Vec::new();
        if self.has_cake() {
            let offsets = self.cake_offsets();
            let l = int((offsets.len() - 1) as i64);
            for w in offsets.windows(2) {
                let (lo, hi) = (&w[0], &w[1]);
                let per_agent = self
                    .agent_names()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let segs = self
                            .density(i)
                            .segments()
                            .iter()
                            .filter(|s| &s.start >= lo && &s.end <= hi)
                            .map(|s| SegmentDoc {
                                start: (&s.start - lo) * &l,
                                end: (&s.end - lo) * &l,
                                left: NonNeg(&s.left / &l),
                                right: NonNeg(&s.right / &l),
                            })
                            .collect();
                        (a.clone(), segs)
                    })
                    .collect();
                cakes.push(CakeDoc { per_agent });
            }
        }
        InstanceDoc {
            agents: self.agent_names().to_vec(),
            goods,
            cakes,
            normalize: true,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("instance documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    const EFM_PO: &str = r#"{
        "agents": ["a1", "a2"],
        "goods": [{"id": "g1", "utilities": {"a1": "3/5", "a2": "3/5"}}],
        "cakes": [{"per_agent": {
            "a1": [{"start": "0", "end": "1/2", "left": "4/5", "right": "4/5"},
                   {"start": "1/2", "end": "1", "left": "0", "right": "0"}],
            "a2": [{"start": "0", "end": "1/2", "left": "0", "right": "0"},
                   {"start": "1/2", "end": "1", "left": "4/5", "right": "4/5"}]
        }}],
        "normalize": true
    }"#;

    #[test]
    fn loads_conflict_example() {
        let inst = load_instance_str(EFM_PO).unwrap();
        assert_eq!((inst.n(), inst.m()), (2, 1));
        let seg = &inst.density(0).segments()[0];
        assert_eq!((&seg.start, &seg.end, &seg.left), (&int(0), &ratio(1, 2), &ratio(4, 5)));
        assert_eq!(inst.density(0).total(), &ratio(2, 5));
        assert!(inst.is_normalized());
    }

    #[test]
    fn pure_cake_instance() {
        let doc = r#"{"agents": ["x"], "cakes": [{"per_agent": {"x": [{"start":0,"end":1,"left":1,"right":1}]}}]}"#;
        let inst = load_instance_str(doc).unwrap();
        assert_eq!(inst.m(), 0);
        assert!(inst.has_cake());
        assert_eq!(inst.density(0).total(), &int(1));
    }

    #[test]
    fn normalize_halves_utilities() {
        let doc = r#"{"agents": ["x"], "goods": [{"id":"g","utilities":{"x":"1"}},{"id":"h","utilities":{"x":"1"}}], "normalize": true}"#;
        let inst = load_instance_str(doc).unwrap();
        assert_eq!(inst.good_value(0, 0), &ratio(1, 2));
        assert_eq!(inst.good_value(0, 1), &ratio(1, 2));
        let raw = load_instance_str(&doc.replace("true", "false")).unwrap();
        assert_eq!(raw.good_value(0, 0), &int(1));
    }

    #[test]
    fn several_cakes_are_concatenated() {
        let doc = r#"{"agents": ["x"], "cakes": [
            {"per_agent": {"x": [{"start":0,"end":1,"left":1,"right":1}]}},
            {"per_agent": {"x": [{"start":0,"end":1,"left":3,"right":3}]}}], "normalize": false}"#;
        let inst = load_instance_str(doc).unwrap();
        assert_eq!(inst.density(0).total(), &int(4));
        assert_eq!(inst.density(0).cdf(&ratio(1, 2)), int(1));
        assert_eq!(inst.cake_offsets(), &[int(0), ratio(1, 2), int(1)]);
        let back = load_instance_str(&inst.to_json().replace("true", "false")).unwrap();
        assert_eq!(back, inst);
    }

    fn err_of(doc: &str) -> String {
        load_instance_str(doc).unwrap_err().to_string()
    }

    #[test]
    fn errors_name_the_field() {
        let e = err_of(r#"{"agents": ["x"], "goods": [{"id":"g","utilities":{"x":"1/0"}}]}"#);
        assert!(e.contains("goods[0].utilities.x") && e.contains("line 1"), "{e}");
        let e = err_of("{\"agents\": [\"x\"],\n \"goods\": [{\"id\":\"g\",\"utilities\":{\"x\":\"-1\"}}]}");
        assert!(e.contains("negative") && e.contains("line 2"), "{e}");
        let e = err_of(r#"{"agents": ["x","y"], "goods": [{"id":"g","utilities":{"x":"1"}}]}"#);
        assert!(e.contains("goods[0].utilities") && e.contains("missing agent \"y\""), "{e}");
        let e = err_of(r#"{"agents": ["x"], "cakes": [{"per_agent": {"x": [{"start":0,"end":"1/2","left":1,"right":1}]}}]}"#);
        assert!(e.contains("cakes[0].per_agent.x") && e.contains("must end at 1"), "{e}");
        let e = err_of(r#"{"agents": ["x"], "goods": [{"id":"g","utilities":{"x":"0"}}]}"#);
        assert!(e.contains("zero total utility"), "{e}");
        let e = err_of(r#"{"agents": ["x"], "goods": [{"id":"g","utilities":{"x":0.5}}]}"#);
        assert!(e.contains("floating-point"), "{e}");
    }
}
