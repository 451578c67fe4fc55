//! Seeded random instances.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{AgentValuation, Density, DensitySegment, Instance};
use crate::scalar::{int, ratio, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Constant,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub m: usize,
    /// Density segments per agent; `0` means no cake at all.
    pub segments: usize,
    pub kind: DensityKind,
}

/// Grid that breakpoints are drawn from.
const GRID: i64 = 120;
const MAX_VALUE: i64 = 20;

/// Normalized instance drawn from `ChaCha8` seeded with `seed`.
///
/// Good utilities are integers in `0..=20` (about one in eight is zero).
/// Each agent gets its own breakpoints on a grid of 1/120 and segment
/// values in `0..=20`; linear segments draw both ends independently. The
/// cake's weight relative to the goods is scaled by a random factor in
/// `1/4..=4` so that both sides matter. Agents whose draw is all zero get a
/// uniform cake (or a unit good when there is no cake).
pub fn random_instance(p: &GenParams, seed: u64) -> Instance {
    assert!(p.n >= 1, "need at least one agent");
    let segments = if p.m == 0 { p.segments.max(1) } else { p.segments };
    let segments = segments.min(GRID as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let valuations = (0..p.n)
        .map(|_| {
            let mut goods: Vec<Scalar> = (0..p.m)
                .map(|_| if rng.gen_ratio(1, 8) { int(0) } else { int(rng.gen_range(1..=MAX_VALUE)) })
                .collect();
            let mut density = if segments == 0 {
                Density::zero()
            } else {
                let weight = ratio(rng.gen_range(1..=16), 4);
                random_density(&mut rng, segments, p.kind).scaled(&weight)
            };
            let total: Scalar = goods.iter().sum::<Scalar>() + density.total();
            if total == int(0) {
                if segments > 0 {
                    density = Density::uniform(int(1));
                } else {
                    goods[0] = int(1);
                }
            }
            AgentValuation { goods, density }
        })
        .collect();
    Instance::new(
        (1..=p.n).map(|i| format!("a{i}")).collect(),
        (1..=p.m).map(|g| format!("g{g}")).collect(),
        valuations,
        segments > 0,
    )
    .and_then(|inst| inst.normalized())
    .expect("generated instances are valid")
}

fn random_density(rng: &mut ChaCha8Rng, segments: usize, kind: DensityKind) -> Density {
    let mut cuts: Vec<i64> = sample(rng, (GRID - 1) as usize, segments - 1)
        .into_iter()
        .map(|c| c as i64 + 1)
        .collect();
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(GRID);
    let segs = bounds
        .windows(2)
        .map(|w| {
            let (start, end) = (ratio(w[0], GRID), ratio(w[1], GRID));
            let left = int(rng.gen_range(0..=MAX_VALUE));
            let right = match kind {
                DensityKind::Constant => left.clone(),
                DensityKind::Linear => int(rng.gen_range(0..=MAX_VALUE)),
            };
            DensitySegment { start, end, left, right }
        })
        .collect();
    Density::new(segs).expect("segments tile [0, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let p = GenParams {
            n: 3,
            m: 5,
            segments: 4,
            kind: DensityKind::Linear,
        };
        assert_eq!(random_instance(&p, 7), random_instance(&p, 7));
        assert_ne!(random_instance(&p, 7), random_instance(&p, 8));
    }

    #[test]
    fn instances_are_normalized_and_shaped() {
        for seed in 0..40 {
            let p = GenParams {
                n: 1 + seed as usize % 4,
                m: seed as usize % 6,
                segments: seed as usize % 5,
                kind: if seed % 2 == 0 { DensityKind::Constant } else { DensityKind::Linear },
            };
            let inst = random_instance(&p, seed);
            assert!(inst.is_normalized());
            assert_eq!(inst.has_cake(), p.segments > 0 || p.m == 0);
            if p.kind == DensityKind::Constant {
                assert!(inst.is_piecewise_constant());
            }
        }
    }
}
