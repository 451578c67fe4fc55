use std::cell::Cell;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{DensitySegment, Instance};
use crate::fairness::IntervalSet;
use crate::scalar::{cmp, cut_tolerance, int, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("query interval [{0}, {1}] is not inside [0, 1]")]
    OutOfRange(Scalar, Scalar),
    #[error("cut target {target} for agent {agent} exceeds the {available} available from {start}")]
    TargetExceeds {
        agent: usize,
        start: Scalar,
        target: Scalar,
        available: Scalar,
    },
    #[error("negative cut target {0}")]
    NegativeTarget(Scalar),
}

/// Per-run RW query accounting. Single writer; not shared across threads.
#[derive(Debug, Default)]
pub struct QueryCounter {
    eval: Cell<u64>,
    cut: Cell<u64>,
    perfect: Cell<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryCounts {
    pub eval_queries: u64,
    pub cut_queries: u64,
    pub perfect_oracle_calls: u64,
}

impl QueryCounter {
    pub fn add_eval(&self, k: u64) {
        self.eval.set(self.eval.get() + k);
    }

    pub fn add_cut(&self) {
        self.cut.set(self.cut.get() + 1);
    }

    pub fn add_perfect(&self) {
        self.perfect.set(self.perfect.get() + 1);
    }

    pub fn snapshot(&self) -> QueryCounts {
        QueryCounts {
            eval_queries: self.eval.get(),
            cut_queries: self.cut.get(),
            perfect_oracle_calls: self.perfect.get(),
        }
    }
}

/// Robertson–Webb access to an instance: every `eval` and `cut` is counted.
#[derive(Debug)]
pub struct RwOracle<'a> {
    inst: &'a Instance,
    counter: QueryCounter,
}

impl<'a> RwOracle<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Self {
            inst,
            counter: QueryCounter::default(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn counter(&self) -> &QueryCounter {
        &self.counter
    }

    pub fn counts(&self) -> QueryCounts {
        self.counter.snapshot()
    }

    /// `u_agent([x, y])`.
    pub fn eval(&self, agent: usize, x: &Scalar, y: &Scalar) -> Result<Scalar, QueryError> {
        if x.is_negative() || cmp(x, y).is_gt() || cmp(y, &int(1)).is_gt() {
            return Err(QueryError::OutOfRange(x.clone(), y.clone()));
        }
        self.counter.add_eval(1);
        Ok(self.inst.density(agent).integral(x, y))
    }

    /// `u_agent(S)`, one counted eval per interval of `S`.
    pub fn value_of_set(&self, agent: usize, set: &IntervalSet) -> Scalar {
        self.counter.add_eval(set.len() as u64);
        self.inst.cake_value(agent, set)
    }

    /// Smallest `y` with `u_agent([start, y]) = target`.
    ///
    /// Exact whenever the root is rational (always on constant segments).
    /// Otherwise returns `ŷ <= y` with `target - 2^-64 <= u_agent([start, ŷ]) <= target`.
    pub fn cut(&self, agent: usize, start: &Scalar, target: &Scalar) -> Result<Scalar, QueryError> {
        if start.is_negative() || cmp(start, &int(1)).is_gt() {
            return Err(QueryError::OutOfRange(start.clone(), int(1)));
        }
        if target.is_negative() {
            return Err(QueryError::NegativeTarget(target.clone()));
        }
        self.counter.add_cut();
        if target.is_zero() {
            return Ok(start.clone());
        }
        let d = self.inst.density(agent);
        let goal = d.cdf(start) + target;
        if cmp(&goal, d.total()).is_gt() {
            return Err(QueryError::TargetExceeds {
                agent,
                start: start.clone(),
                target: target.clone(),
                available: d.total() - d.cdf(start),
            });
        }
        // first segment whose end reaches the goal
        let first = d.segment_index(start);
        let n = d.segments().len();
        let end_prefix = |k: usize| if k + 1 < n { d.prefix(k + 1).clone() } else { d.total().clone() };
        let (mut lo, mut hi) = (first, n - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cmp(&end_prefix(mid), &goal).is_ge() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let seg = d.segment(lo);
        let local = goal - d.prefix(lo);
        Ok(cut_in_segment(seg, &local))
    }
}

fn rational_sqrt(v: &Scalar) -> Option<Scalar> {
    let (p, q) = (v.numer(), v.denom());
    let sp = p.sqrt();
    let sq = q.sqrt();
    (&sp * &sp == *p && &sq * &sq == *q).then(|| Scalar::new(sp, sq))
}

/// Point `x` in `seg` with `∫_{seg.start}^x f = local` (`0 < local <= seg.total()`).
///
/// Exact when the quadratic's root is rational; otherwise a point below the
/// root whose value gap is at most `2^-64`.
pub fn cut_in_segment(seg: &DensitySegment, local: &Scalar) -> Scalar {
    if seg.is_constant() {
        return &seg.start + local / &seg.left;
    }
    // left·w + slope·w²/2 = local  ⇒  w = 2·local / (left + √(left² + 2·slope·local))
    let slope = seg.slope();
    let disc = &seg.left * &seg.left + int(2) * &slope * local;
    if let Some(root) = rational_sqrt(&disc) {
        return &seg.start + int(2) * local / (&seg.left + root);
    }
    // Round an upper bound on the root down onto a dyadic grid; the grid
    // keeps denominators bounded when cuts are chained.
    let tau = cut_tolerance();
    let width = &seg.end - &seg.start;
    let mut bits = 80usize;
    loop {
        let one = BigInt::one() << bits;
        let scale = Scalar::from_integer(one.clone());
        let scaled = (&disc * &scale * &scale).ceil().to_integer();
        let mut r = scaled.sqrt();
        if &r * &r < scaled {
            r += 1;
        }
        let w = int(2) * local / (&seg.left + Scalar::new(r, one.clone()));
        let w = ((w * &scale).floor() / &scale).min(width.clone());
        let y = &seg.start + w;
        if local - seg.integral_to(&y) <= tau {
            return y;
        }
        bits += 32;
    }
}
