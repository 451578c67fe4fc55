//! The two small instances behind the EFM/PO conflict and the MNW
//! counterexample.

use crate::model::{Density, DensitySegment, Instance};
use crate::scalar::{int, ratio};

/// One good worth 3/5 to both agents; agent 1 values only `[0, 1/2)` and
/// agent 2 only `[1/2, 1)`, each at density 4/5. Every EFM allocation gives
/// the good to one agent and the whole cake to the other, and none is PO.
pub fn efm_po_conflict() -> Instance {
    let half = |first: bool| {
        let (a, b) = if first { (ratio(4, 5), int(0)) } else { (int(0), ratio(4, 5)) };
        Density::new(vec![
            DensitySegment::constant(int(0), ratio(1, 2), a),
            DensitySegment::constant(ratio(1, 2), int(1), b),
        ])
        .expect("valid density")
    };
    Instance::anonymous(
        vec![vec![ratio(3, 5)], vec![ratio(3, 5)]],
        Some(vec![half(true), half(false)]),
    )
    .expect("valid instance")
}

/// Two goods and a homogeneous cake: agent 1 values them 0.4, 0.4, 0.2 and
/// agent 2 values them 0.499, 0.499, 0.002. The max Nash welfare allocation
/// (one good plus all cake to agent 1) is not weak EFM.
pub fn mnw_not_efm() -> Instance {
    Instance::anonymous(
        vec![vec![ratio(2, 5), ratio(2, 5)], vec![ratio(499, 1000), ratio(499, 1000)]],
        Some(vec![Density::uniform(ratio(1, 5)), Density::uniform(ratio(1, 500))]),
    )
    .expect("valid instance")
}
