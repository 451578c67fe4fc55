//! Fairness definitions written out again from scratch, straight from the
//! bundles, as a second opinion on the library checkers.

#![allow(dead_code)]

use mixdiv::{Allocation, Instance, Scalar};
use num_traits::Zero;

pub struct Pair {
    pub total: Scalar,
    pub max_good: Option<Scalar>,
    pub min_good: Option<Scalar>,
    pub cake_free: bool,
}

pub fn pair(inst: &Instance, alloc: &Allocation, i: usize, j: usize) -> Pair {
    let b = &alloc.bundles[j];
    let goods: Vec<Scalar> = b.goods.iter().map(|&g| inst.good_value(i, g).clone()).collect();
    let mut total = inst.cake_value(i, &b.cake);
    for v in &goods {
        total += v;
    }
    Pair {
        total,
        max_good: goods.iter().max().cloned(),
        min_good: goods.iter().min().cloned(),
        cake_free: b.cake.is_empty(),
    }
}

fn own(inst: &Instance, alloc: &Allocation, i: usize) -> Scalar {
    pair(inst, alloc, i, i).total
}

fn all_pairs(inst: &Instance, mut ok: impl FnMut(usize, usize) -> bool) -> bool {
    let n = inst.n();
    (0..n).all(|i| (0..n).all(|j| i == j || ok(i, j)))
}

pub fn ef(inst: &Instance, alloc: &Allocation, slack: &Scalar) -> bool {
    all_pairs(inst, |i, j| own(inst, alloc, i) + slack >= pair(inst, alloc, i, j).total)
}

pub fn ef1(inst: &Instance, alloc: &Allocation) -> bool {
    all_pairs(inst, |i, j| {
        let p = pair(inst, alloc, i, j);
        own(inst, alloc, i) >= p.total - p.max_good.unwrap_or_else(Scalar::zero)
    })
}

/// EF1 toward bundles without cake, EF (up to `eps`) toward the rest.
pub fn eps_efm(inst: &Instance, alloc: &Allocation, eps: &Scalar, slack: &Scalar) -> bool {
    all_pairs(inst, |i, j| {
        let p = pair(inst, alloc, i, j);
        let mine = own(inst, alloc, i) + slack;
        if p.cake_free {
            mine >= p.total - p.max_good.unwrap_or_else(Scalar::zero)
        } else {
            mine + eps >= p.total
        }
    })
}

pub fn efm(inst: &Instance, alloc: &Allocation, slack: &Scalar) -> bool {
    eps_efm(inst, alloc, &Scalar::zero(), slack)
}

/// EFX toward bundles without cake, EF toward the rest.
pub fn efxm(inst: &Instance, alloc: &Allocation) -> bool {
    all_pairs(inst, |i, j| {
        let p = pair(inst, alloc, i, j);
        let mine = own(inst, alloc, i);
        if p.cake_free {
            mine >= p.total - p.min_good.unwrap_or_else(Scalar::zero)
        } else {
            mine >= p.total
        }
    })
}

/// Agent `i` envies nobody, exactly.
pub fn envy_free_agent(inst: &Instance, alloc: &Allocation, i: usize) -> bool {
    let mine = own(inst, alloc, i);
    (0..inst.n()).all(|j| mine >= pair(inst, alloc, i, j).total)
}
