use num_traits::{Signed, Zero};

use crate::scalar::{cmp, int, Scalar};

/// One linear piece of a density: value `left` at `start`, `right` at `end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensitySegment {
    pub start: Scalar,
    pub end: Scalar,
    pub left: Scalar,
    pub right: Scalar,
}

impl DensitySegment {
    pub fn constant(start: Scalar, end: Scalar, value: Scalar) -> Self {
        Self {
            start,
            end,
            left: value.clone(),
            right: value,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.left == self.right
    }

    pub fn slope(&self) -> Scalar {
        (&self.right - &self.left) / (&self.end - &self.start)
    }

    pub fn at(&self, x: &Scalar) -> Scalar {
        if self.is_constant() {
            return self.left.clone();
        }
        &self.left + self.slope() * (x - &self.start)
    }

    /// `∫_start^x f` for `x` inside the segment. Trapezoid rule, exact for linear `f`.
    pub fn integral_to(&self, x: &Scalar) -> Scalar {
        let w = x - &self.start;
        if self.is_constant() {
            return w * &self.left;
        }
        let fx = self.at(x);
        w * (&self.left + fx) / int(2)
    }

    pub fn total(&self) -> Scalar {
        (&self.end - &self.start) * (&self.left + &self.right) / int(2)
    }

    pub fn scaled(&self, factor: &Scalar) -> Self {
        Self {
            start: self.start.clone(),
            end: self.end.clone(),
            left: &self.left * factor,
            right: &self.right * factor,
        }
    }
}

/// Piecewise-linear density on `[0, 1]` with cached prefix integrals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Density {
    segments: Vec<DensitySegment>,
    // prefix[k] = ∫_0^{segments[k].start} f
    prefix: Vec<Scalar>,
    total: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DensityError {
    #[error("density has no segments")]
    Empty,
    #[error("segment {index} has start >= end")]
    EmptySegment { index: usize },
    #[error("segment {index} has a negative density value")]
    Negative { index: usize },
    #[error("density must start at 0 (first segment starts at {0})")]
    BadStart(Scalar),
    #[error("density must end at 1 (last segment ends at {0})")]
    BadEnd(Scalar),
    #[error("segment {index} starts at {start} but the previous one ends at {prev_end}")]
    Gap {
        index: usize,
        start: Scalar,
        prev_end: Scalar,
    },
}

impl Density {
    pub fn new(segments: Vec<DensitySegment>) -> Result<Self, DensityError> {
        let first = segments.first().ok_or(DensityError::Empty)?;
        if !first.start.is_zero() {
            return Err(DensityError::BadStart(first.start.clone()));
        }
        for (index, s) in segments.iter().enumerate() {
            if s.start >= s.end {
                return Err(DensityError::EmptySegment { index });
            }
            if s.left.is_negative() || s.right.is_negative() {
                return Err(DensityError::Negative { index });
            }
            if index > 0 && segments[index - 1].end != s.start {
                return Err(DensityError::Gap {
                    index,
                    start: s.start.clone(),
                    prev_end: segments[index - 1].end.clone(),
                });
            }
        }
        let last = segments.last().expect("non-empty");
        if last.end != int(1) {
            return Err(DensityError::BadEnd(last.end.clone()));
        }
        Ok(Self::from_valid(segments))
    }

    fn from_valid(segments: Vec<DensitySegment>) -> Self {
        let mut prefix = Vec::with_capacity(segments.len());
        let mut acc = Scalar::zero();
        for s in &segments {
            prefix.push(acc.clone());
            acc += s.total();
        }
        Self {
            segments,
            prefix,
            total: acc,
        }
    }

    pub fn zero() -> Self {
        Self::from_valid(vec![DensitySegment::constant(Scalar::zero(), int(1), Scalar::zero())])
    }

    pub fn uniform(value: Scalar) -> Self {
        Self::from_valid(vec![DensitySegment::constant(Scalar::zero(), int(1), value)])
    }

    pub fn segments(&self) -> &[DensitySegment] {
        &self.segments
    }

    pub fn total(&self) -> &Scalar {
        &self.total
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.segments.iter().all(DensitySegment::is_constant)
    }

    /// Interior breakpoints (segment boundaries strictly inside `(0, 1)`).
    pub fn breakpoints(&self) -> impl Iterator<Item = &Scalar> {
        self.segments.iter().skip(1).map(|s| &s.start)
    }

    pub fn scaled(&self, factor: &Scalar) -> Self {
        Self::from_valid(self.segments.iter().map(|s| s.scaled(factor)).collect())
    }

    /// Index of the segment containing `x` (`x = 1` maps to the last one).
    pub fn segment_index(&self, x: &Scalar) -> usize {
        let k = self.segments.partition_point(|s| cmp(&s.end, x).is_le());
        k.min(self.segments.len() - 1)
    }

    pub fn segment(&self, k: usize) -> &DensitySegment {
        &self.segments[k]
    }

    /// Prefix integral at the start of segment `k`.
    pub fn prefix(&self, k: usize) -> &Scalar {
        &self.prefix[k]
    }

    pub fn at(&self, x: &Scalar) -> Scalar {
        self.segments[self.segment_index(x)].at(x)
    }

    /// `∫_0^x f`.
    pub fn cdf(&self, x: &Scalar) -> Scalar {
        let k = self.segment_index(x);
        &self.prefix[k] + self.segments[k].integral_to(x)
    }

    /// `∫_a^b f` for `a <= b`.
    pub fn integral(&self, a: &Scalar, b: &Scalar) -> Scalar {
        if cmp(a, b).is_ge() {
            return Scalar::zero();
        }
        let (ka, kb) = (self.segment_index(a), self.segment_index(b));
        if ka == kb {
            let seg = &self.segments[ka];
            if seg.is_constant() {
                return (b - a) * &seg.left;
            }
            return seg.integral_to(b) - seg.integral_to(a);
        }
        &self.prefix[kb] + self.segments[kb].integral_to(b) - &self.prefix[ka] - self.segments[ka].integral_to(a)
    }
}
