use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::{Allocation, ValueTable};
use crate::model::Instance;
use crate::scalar::{format_scalar, Scalar};

/// Outcome of one fairness notion over all ordered pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Verdict {
    pub pass: bool,
    /// Ordered pairs `(i, j)` where `i`'s condition toward `j` fails.
    pub violations: Vec<(usize, usize)>,
}

impl Verdict {
    fn from_pairs(n: usize, mut ok: impl FnMut(usize, usize) -> bool) -> Self {
        let violations: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && !ok(i, j))
            .collect();
        Self {
            pass: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("EF1 is only defined for goods-only allocations; agent {0} holds cake")]
pub struct CakePresent(pub usize);

fn ef_clause(t: &ValueTable, i: usize, j: usize, slack: &Scalar) -> bool {
    t.own(i) + slack >= t.get(i, j).total
}

/// `∃ g ∈ M_j: u_i(A_i) ≥ u_i(A_j \ {g})`. The max-valued good is the
/// canonical witness; an empty `M_j` leaves `u_i(A_j \ ·) = u_i(A_j)`.
fn ef1_clause(t: &ValueTable, i: usize, j: usize, slack: &Scalar) -> bool {
    let p = t.get(i, j);
    t.own(i) + slack >= &p.total - &p.max_good
}

fn efx_clause(t: &ValueTable, i: usize, j: usize, slack: &Scalar) -> bool {
    let p = t.get(i, j);
    if t.goods_free[j] {
        return ef_clause(t, i, j, slack);
    }
    t.own(i) + slack >= &p.total - &p.min_good
}

pub fn is_ef(t: &ValueTable, slack: &Scalar) -> Verdict {
    Verdict::from_pairs(t.n(), |i, j| ef_clause(t, i, j, slack))
}

pub fn is_ef1(t: &ValueTable, slack: &Scalar) -> Result<Verdict, CakePresent> {
    if let Some(i) = t.cake_free.iter().position(|free| !free) {
        return Err(CakePresent(i));
    }
    Ok(Verdict::from_pairs(t.n(), |i, j| ef1_clause(t, i, j, slack)))
}

pub fn is_efm(t: &ValueTable, slack: &Scalar) -> Verdict {
    is_eps_efm(t, &Scalar::zero(), slack)
}

/// The EF clause is relaxed by `eps`; the EF1 clause toward cake-free
/// bundles is not.
pub fn is_eps_efm(t: &ValueTable, eps: &Scalar, slack: &Scalar) -> Verdict {
    let relaxed = eps + slack;
    Verdict::from_pairs(t.n(), |i, j| {
        if t.cake_free[j] {
            ef1_clause(t, i, j, slack)
        } else {
            ef_clause(t, i, j, &relaxed)
        }
    })
}

/// EF1 clause also toward bundles whose cake is worth nothing to the envier.
pub fn is_weak_efm(t: &ValueTable, slack: &Scalar) -> Verdict {
    Verdict::from_pairs(t.n(), |i, j| {
        if t.cake_free[j] || t.get(i, j).cake.is_zero() {
            ef1_clause(t, i, j, slack)
        } else {
            ef_clause(t, i, j, slack)
        }
    })
}

/// EFX toward cake-free bundles, EF toward the rest.
pub fn is_efx_mixed(t: &ValueTable, slack: &Scalar) -> Verdict {
    Verdict::from_pairs(t.n(), |i, j| {
        if t.cake_free[j] {
            efx_clause(t, i, j, slack)
        } else {
            ef_clause(t, i, j, slack)
        }
    })
}

/// Goods-only EFX: removing any single good from the envied bundle
/// removes the envy.
pub fn is_efx(t: &ValueTable, slack: &Scalar) -> Verdict {
    Verdict::from_pairs(t.n(), |i, j| efx_clause(t, i, j, slack))
}

/// For pairs that pass only after removing a good: the good in `M_j` that
/// `i` values most (lowest index on ties).
pub fn ef1_witnesses(inst: &Instance, alloc: &Allocation, t: &ValueTable) -> Vec<(usize, usize, usize)> {
    let n = t.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !t.cake_free[j] || t.own(i) >= &t.get(i, j).total {
                continue;
            }
            if !ef1_clause(t, i, j, &Scalar::zero()) {
                continue;
            }
            let best = alloc.bundles[j]
                .goods
                .iter()
                .copied()
                .fold(None::<usize>, |acc, g| match acc {
                    Some(b) if inst.good_value(i, b) >= inst.good_value(i, g) => Some(b),
                    _ => Some(g),
                });
            if let Some(g) = best {
                out.push((i, j, g));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub envier: String,
    pub envied: String,
    pub good: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpsVerdict {
    #[serde(with = "crate::scalar::serde_scalar")]
    pub eps: Scalar,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Notions {
    #[serde(rename = "EF")]
    pub ef: bool,
    /// `None` when some bundle holds cake (EF1 undefined).
    #[serde(rename = "EF1")]
    pub ef1: Option<bool>,
    #[serde(rename = "EFM")]
    pub efm: bool,
    #[serde(rename = "weakEFM")]
    pub weak_efm: bool,
    #[serde(rename = "EFXM")]
    pub efx_mixed: bool,
    #[serde(rename = "epsEFM", skip_serializing_if = "Option::is_none")]
    pub eps_efm: Option<EpsVerdict>,
}

/// Full verdict sheet for one allocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FairnessReport {
    pub agents: Vec<String>,
    /// `u_i(A_j) - u_i(A_i)`
    #[serde(serialize_with = "serialize_matrix")]
    pub pairwise_envy: Vec<Vec<Scalar>>,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub slack: Scalar,
    pub notions: Notions,
    pub violations: BTreeMap<String, Vec<(String, String)>>,
    pub witnesses: Vec<Witness>,
}

fn serialize_matrix<S: serde::Serializer>(m: &[Vec<Scalar>], s: S) -> Result<S::Ok, S::Error> {
    let text: Vec<Vec<String>> = m.iter().map(|row| row.iter().map(format_scalar).collect()).collect();
    text.serialize(s)
}

impl FairnessReport {
    /// Evaluates every notion; `eps` adds the ε-EFM verdict.
    pub fn compute(inst: &Instance, alloc: &Allocation, eps: Option<&Scalar>, slack: &Scalar) -> Self {
        Self::from_table(inst, alloc, &ValueTable::new(inst, alloc), eps, slack)
    }

    pub fn from_table(
        inst: &Instance,
        alloc: &Allocation,
        t: &ValueTable,
        eps: Option<&Scalar>,
        slack: &Scalar,
    ) -> Self {
        let names = inst.agent_names();
        let n = t.n();
        let pairwise_envy = (0..n)
            .map(|i| (0..n).map(|j| &t.get(i, j).total - t.own(i)).collect())
            .collect();
        let mut violations = BTreeMap::new();
        let mut record = |key: &str, v: &Verdict| {
            if !v.pass {
                violations.insert(
                    key.to_string(),
                    v.violations
                        .iter()
                        .map(|&(i, j)| (names[i].clone(), names[j].clone()))
                        .collect(),
                );
            }
            v.pass
        };
        let ef = record("EF", &is_ef(t, slack));
        let ef1 = is_ef1(t, slack).ok().map(|v| record("EF1", &v));
        let efm = record("EFM", &is_efm(t, slack));
        let weak_efm = record("weakEFM", &is_weak_efm(t, slack));
        let efx_mixed = record("EFXM", &is_efx_mixed(t, slack));
        let eps_efm = eps.map(|e| EpsVerdict {
            eps: e.clone(),
            pass: record("epsEFM", &is_eps_efm(t, e, slack)),
        });
        let witnesses = ef1_witnesses(inst, alloc, t)
            .into_iter()
            .map(|(i, j, g)| Witness {
                envier: names[i].clone(),
                envied: names[j].clone(),
                good: inst.good_names()[g].clone(),
            })
            .collect();
        Self {
            agents: names.to_vec(),
            pairwise_envy,
            slack: slack.clone(),
            notions: Notions {
                ef,
                ef1,
                efm,
                weak_efm,
                efx_mixed,
                eps_efm,
            },
            violations,
            witnesses,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{Bundle, IntervalSet};
    use crate::model::Instance;
    use crate::samples::{efm_po_conflict, mnw_not_efm};
    use crate::scalar::{int, ratio};

    fn zero() -> Scalar {
        Scalar::zero()
    }

    fn goods_only(utils: Vec<Vec<(i64, i64)>>) -> Instance {
        Instance::anonymous(
            utils
                .into_iter()
                .map(|row| row.into_iter().map(|(p, q)| ratio(p, q)).collect())
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn ef_examples() {
        // perfect split of a pure cake
        let inst = Instance::anonymous(vec![vec![], vec![]], Some(vec![crate::model::Density::uniform(int(1)); 2])).unwrap();
        let mut a = Allocation::empty(&inst);
        a.give_cake(0, &IntervalSet::interval(int(0), ratio(1, 2)));
        a.give_cake(1, &IntervalSet::interval(ratio(1, 2), int(1)));
        assert!(is_ef(&ValueTable::new(&inst, &a), &zero()).pass);

        // good to agent 1, cake to agent 2: agent 2 envies (3/5 > 2/5)
        let inst = efm_po_conflict();
        let mut a = Allocation::from_assignment(&inst, &[0]);
        a.give_cake(1, &IntervalSet::unit());
        let v = is_ef(&ValueTable::new(&inst, &a), &zero());
        assert_eq!(v.violations, vec![(1, 0)]);

        let single = goods_only(vec![vec![(1, 1)]]);
        assert!(is_ef(&ValueTable::new(&single, &Allocation::from_assignment(&single, &[0])), &zero()).pass);
    }

    #[test]
    fn ef1_examples() {
        let inst = goods_only(vec![vec![(1, 1)], vec![(1, 1)]]);
        let a = Allocation::from_assignment(&inst, &[0]);
        let t = ValueTable::new(&inst, &a);
        assert!(is_ef1(&t, &zero()).unwrap().pass);
        assert_eq!(ef1_witnesses(&inst, &a, &t), vec![(1, 0, 0)]);

        let inst = goods_only(vec![vec![(1, 2), (1, 2)], vec![(1, 2), (1, 2)]]);
        let a = Allocation::from_assignment(&inst, &[0, 0]);
        let v = is_ef1(&ValueTable::new(&inst, &a), &zero()).unwrap();
        assert_eq!(v.violations, vec![(1, 0)]);

        let inst = efm_po_conflict();
        let mut a = Allocation::from_assignment(&inst, &[0]);
        a.give_cake(1, &IntervalSet::unit());
        assert_eq!(is_ef1(&ValueTable::new(&inst, &a), &zero()), Err(CakePresent(1)));
    }

    #[test]
    fn half_split_fails_efm_but_not_weak_efm() {
        // good to agent 1, cake halves: agent 2 envies a cake-holding bundle
        let inst = efm_po_conflict();
        let mut a = Allocation::from_assignment(&inst, &[0]);
        a.give_cake(0, &IntervalSet::interval(int(0), ratio(1, 2)));
        a.give_cake(1, &IntervalSet::interval(ratio(1, 2), int(1)));
        let t = ValueTable::new(&inst, &a);
        assert_eq!(is_efm(&t, &zero()).violations, vec![(1, 0)]);
        // agent 2 values agent 1's cake at zero, so weak EFM only asks for EF1
        assert!(is_weak_efm(&t, &zero()).pass);
    }

    #[test]
    fn good_and_whole_cake_split_is_efm_and_weak_efm() {
        let inst = efm_po_conflict();
        let mut a = Allocation::from_assignment(&inst, &[0]);
        a.give_cake(1, &IntervalSet::unit());
        let t = ValueTable::new(&inst, &a);
        assert!(is_efm(&t, &zero()).pass);
        assert!(is_weak_efm(&t, &zero()).pass);
        assert!(is_eps_efm(&t, &ratio(1, 10), &zero()).pass);
    }

    #[test]
    fn mnw_allocation_is_not_weak_efm() {
        let inst = mnw_not_efm();
        let a = Allocation {
            bundles: vec![
                Bundle {
                    goods: [0].into(),
                    cake: IntervalSet::unit(),
                },
                Bundle::goods([1]),
            ],
            unallocated: IntervalSet::empty(),
        };
        let t = ValueTable::new(&inst, &a);
        assert_eq!(is_weak_efm(&t, &zero()).violations, vec![(1, 0)]);
        assert!(!is_efm(&t, &zero()).pass);
    }

    #[test]
    fn eps_relaxes_only_cake_clause() {
        let inst = efm_po_conflict();
        let mut a = Allocation::from_assignment(&inst, &[0]);
        a.give_cake(0, &IntervalSet::interval(int(0), ratio(1, 2)));
        a.give_cake(1, &IntervalSet::interval(ratio(1, 2), int(1)));
        let t = ValueTable::new(&inst, &a);
        // agent 2: own 2/5, other 3/5 → gap 1/5
        assert!(!is_eps_efm(&t, &ratio(1, 10), &zero()).pass);
        assert!(is_eps_efm(&t, &ratio(1, 5), &zero()).pass);

        // cake-free envied bundle: EF1 clause, eps does not help
        let inst = goods_only(vec![vec![(1, 2), (1, 2)], vec![(1, 2), (1, 2)]]);
        let a = Allocation::from_assignment(&inst, &[0, 0]);
        assert!(!is_eps_efm(&ValueTable::new(&inst, &a), &int(1), &zero()).pass);
    }

    #[test]
    fn empty_bundle_is_never_envied() {
        let inst = goods_only(vec![vec![(1, 1)], vec![(1, 1)], vec![(1, 1)]]);
        let a = Allocation::from_assignment(&inst, &[0]);
        assert!(is_efm(&ValueTable::new(&inst, &a), &zero()).pass);
    }

    #[test]
    fn report_serializes_deterministically() {
        let inst = efm_po_conflict();
        let mut a = Allocation::from_assignment(&inst, &[0]);
        a.give_cake(1, &IntervalSet::unit());
        let r = FairnessReport::compute(&inst, &a, Some(&ratio(1, 10)), &zero());
        assert!(r.notions.efm && !r.notions.ef && r.notions.ef1.is_none());
        assert_eq!(r.violations["EF"], vec![("a2".to_string(), "a1".to_string())]);
        assert_eq!(r.pairwise_envy[1][0], ratio(1, 5));
        let json = r.to_json();
        assert!(json.contains("\"1/5\""));
        assert_eq!(json, FairnessReport::compute(&inst, &a, Some(&ratio(1, 10)), &zero()).to_json());
    }
}
