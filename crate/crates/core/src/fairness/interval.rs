use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::scalar::{cmp, format_scalar, parse_scalar, sort_by_scalar, Scalar};

/// Finite union of disjoint half-open intervals `[start, end)` inside `[0, 1]`.
///
/// Stored sorted with empty intervals dropped and touching intervals merged,
/// so two sets covering the same points compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    intervals: Vec<(Scalar, Scalar)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self::interval(Scalar::zero(), crate::scalar::int(1))
    }

    pub fn interval(start: Scalar, end: Scalar) -> Self {
        Self::from_intervals(vec![(start, end)])
    }

    /// Builds a canonical set from arbitrary (possibly overlapping) intervals.
    pub fn from_intervals(mut raw: Vec<(Scalar, Scalar)>) -> Self {
        raw.retain(|(a, b)| cmp(a, b).is_lt());
        sort_by_scalar(&mut raw, |iv| &iv.0);
        let mut out: Vec<(Scalar, Scalar)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if cmp(&a, &last.1).is_le() => {
                    if cmp(&b, &last.1).is_gt() {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        Self { intervals: out }
    }

    /// Like [`from_intervals`](Self::from_intervals) but reports overlaps
    /// instead of merging them.
    pub fn from_disjoint(raw: Vec<(Scalar, Scalar)>) -> Result<Self, (Scalar, Scalar)> {
        let mut sorted: Vec<_> = raw.into_iter().filter(|(a, b)| cmp(a, b).is_lt()).collect();
        sort_by_scalar(&mut sorted, |iv| &iv.0);
        for w in sorted.windows(2) {
            if cmp(&w[1].0, &w[0].1).is_lt() {
                return Err(w[1].clone());
            }
        }
        Ok(Self::from_intervals(sorted))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Scalar, Scalar)> {
        self.intervals.iter()
    }

    pub fn intervals(&self) -> &[(Scalar, Scalar)] {
        &self.intervals
    }

    pub fn measure(&self) -> Scalar {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn min(&self) -> Option<&Scalar> {
        self.intervals.first().map(|(a, _)| a)
    }

    pub fn max(&self) -> Option<&Scalar> {
        self.intervals.last().map(|(_, b)| b)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = self.clone();
        out.absorb(other);
        out
    }

    /// In-place union; moves the existing intervals instead of cloning them.
    pub fn absorb(&mut self, other: &IntervalSet) {
        fn push(out: &mut Vec<(Scalar, Scalar)>, (a, b): (Scalar, Scalar)) {
            match out.last_mut() {
                Some(last) if cmp(&a, &last.1).is_le() => {
                    if cmp(&b, &last.1).is_gt() {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        let mine = std::mem::take(&mut self.intervals);
        let y = &other.intervals;
        let mut out = Vec::with_capacity(mine.len() + y.len());
        let mut j = 0;
        for iv in mine {
            while j < y.len() && cmp(&y[j].0, &iv.0).is_lt() {
                push(&mut out, y[j].clone());
                j += 1;
            }
            push(&mut out, iv);
        }
        for iv in &y[j..] {
            push(&mut out, iv.clone());
        }
        self.intervals = out;
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a0, a1) = &self.intervals[i];
            let (b0, b1) = &other.intervals[j];
            let lo = if cmp(a0, b0).is_ge() { a0 } else { b0 };
            let hi = if cmp(a1, b1).is_le() { a1 } else { b1 };
            if cmp(lo, hi).is_lt() {
                out.push((lo.clone(), hi.clone()));
            }
            if cmp(a1, b1).is_lt() {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let mut j = 0;
        for (a, b) in &self.intervals {
            let mut cur = a.clone();
            while j < other.intervals.len() && cmp(&other.intervals[j].1, a).is_le() {
                j += 1;
            }
            let mut k = j;
            while k < other.intervals.len() && cmp(&other.intervals[k].0, b).is_lt() {
                let (c, d) = &other.intervals[k];
                if cmp(c, &cur).is_gt() {
                    out.push((cur.clone(), c.clone()));
                }
                if cmp(d, &cur).is_gt() {
                    cur = d.clone();
                }
                k += 1;
            }
            if cmp(&cur, b).is_lt() {
                out.push((cur, b.clone()));
            }
        }
        Self::from_intervals(out)
    }

    pub fn is_disjoint(&self, other: &IntervalSet) -> bool {
        self.intersection(other).is_empty()
    }

    pub fn contains_set(&self, other: &IntervalSet) -> bool {
        other.difference(self).is_empty()
    }

    /// Restriction to `[lo, hi)`.
    pub fn clip(&self, lo: &Scalar, hi: &Scalar) -> IntervalSet {
        self.intersection(&IntervalSet::interval(lo.clone(), hi.clone()))
    }

    /// Splits every interval at the given sorted points.
    pub fn refine<'a>(&'a self, cuts: &'a [Scalar]) -> impl Iterator<Item = (Scalar, Scalar)> + 'a {
        self.intervals.iter().flat_map(move |(a, b)| {
            let lo = cuts.partition_point(|c| cmp(c, a).is_le());
            let hi = cuts.partition_point(|c| cmp(c, b).is_lt());
            let mut pts = Vec::with_capacity(hi - lo + 2);
            pts.push(a.clone());
            pts.extend(cuts[lo..hi].iter().cloned());
            pts.push(b.clone());
            pts.windows(2)
                .map(|w| (w[0].clone(), w[1].clone()))
                .collect::<Vec<_>>()
        })
    }

    pub fn endpoints(&self) -> impl Iterator<Item = &Scalar> {
        self.intervals.iter().flat_map(|(a, b)| [a, b])
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        for (k, (a, b)) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "[{a}, {b})")?;
        }
        Ok(())
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.intervals.len()))?;
        for (a, b) in &self.intervals {
            seq.serialize_element(&[format_scalar(a), format_scalar(b)])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw: Vec<(String, String)> = Vec::deserialize(d)?;
        let mut parsed = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            let a = parse_scalar(&a).map_err(D::Error::custom)?;
            let b = parse_scalar(&b).map_err(D::Error::custom)?;
            if a > b {
                return Err(D::Error::custom(format!("interval [{a}, {b}) has start > end")));
            }
            parsed.push((a, b));
        }
        IntervalSet::from_disjoint(parsed)
            .map_err(|(a, b)| D::Error::custom(format!("interval [{a}, {b}) overlaps another")))
    }
}
