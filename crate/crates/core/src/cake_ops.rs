//! Cake-division subroutines: perfect allocation for piecewise-linear
//! densities, value-capped pieces and the ε-EF round robin over atoms.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::fairness::IntervalSet;
use crate::model::{Instance, RwOracle};
use crate::scalar::{fast_cmp, int, midpoint, sort_by_scalar, to_f64, Scalar};

/// Splits `piece` into `k` parts that every agent in the instance values at
/// exactly `u_i(piece) / k`.
///
/// Each segment on which all densities are linear is cut into `2k` equal
/// slices and part `j` takes slices `j` and `2k - 1 - j`. The two slices sit
/// symmetrically around the segment midpoint, so for linear `f` their value
/// is `len / k * f(mid)` regardless of `j`.
pub fn perfect_allocation(rw: &RwOracle, piece: &IntervalSet, k: usize) -> Vec<IntervalSet> {
    assert!(k >= 1, "perfect allocation needs at least one part");
    rw.counter().add_perfect();
    let cuts = rw.instance().breakpoints();
    let mut parts: Vec<Vec<(Scalar, Scalar)>> = vec![Vec::new(); k];
    let slices = 2 * k;
    for (a, b) in piece.refine(&cuts) {
        let step = (&b - &a) / int(slices as i64);
        let at = |t: usize| if t == slices { b.clone() } else { &a + &step * int(t as i64) };
        for (j, part) in parts.iter_mut().enumerate() {
            part.push((at(j), at(j + 1)));
            part.push((at(slices - 1 - j), at(slices - j)));
        }
    }
    parts.into_iter().map(IntervalSet::from_intervals).collect()
}

/// `max_{i, j} |u_i(parts_j) - u_i(whole) / k|`; zero for a perfect split.
pub fn perfect_residual(inst: &Instance, whole: &IntervalSet, parts: &[IntervalSet]) -> Scalar {
    let k = int(parts.len() as i64);
    (0..inst.n())
        .flat_map(|i| {
            let share = inst.cake_value(i, whole) / &k;
            parts.iter().map(move |p| (inst.cake_value(i, p) - &share).abs())
        })
        .max()
        .unwrap_or_else(Scalar::zero)
}

/// Result of [`capped_piece`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CappedPiece {
    pub piece: IntervalSet,
    /// Lowest-index agent whose cap is met with equality; `None` when the
    /// whole cake stays under every cap.
    pub binding: Option<usize>,
}

/// Leftmost piece of `cake` with `u_i(piece) <= cap_i` for every listed
/// agent and equality for at least one of them, whenever some agent values
/// the whole cake at `cap_i` or more.
///
/// The cake is walked left to right over segments on which every capped
/// agent's density is linear. Whole segments are taken while they fit. In
/// the first segment that does not fit, a prefix is taken when all densities
/// are constant there; otherwise a window `[c - h, c + h)` around the
/// segment midpoint `c`, whose value `2h f_i(c)` is linear in `h` for every
/// linear density. Either way the binding agent lands exactly on its cap,
/// with no root finding.
pub fn capped_piece(rw: &RwOracle, cake: &IntervalSet, caps: &[(usize, Scalar)]) -> CappedPiece {
    let inst = rw.instance();
    let cuts = inst.breakpoints_of(caps.iter().map(|(i, _)| *i));
    let mut cum: Vec<Scalar> = vec![Scalar::zero(); caps.len()];
    let mut taken: Vec<(Scalar, Scalar)> = Vec::new();
    let binding_at = |cum: &[Scalar]| caps.iter().zip(cum).find(|((_, cap), c)| c == &cap).map(|((i, _), _)| *i);

    if let Some(i) = binding_at(&cum) {
        return CappedPiece {
            piece: IntervalSet::empty(),
            binding: Some(i),
        };
    }
    for (a, b) in cake.refine(&cuts) {
        let values: Vec<Scalar> = caps.iter().map(|(i, _)| rw.eval(*i, &a, &b).expect("segment inside cake")).collect();
        let fits = caps
            .iter()
            .zip(&cum)
            .zip(&values)
            .all(|(((_, cap), c), v)| &(c + v) <= cap);
        if fits {
            for (c, v) in cum.iter_mut().zip(&values) {
                *c += v;
            }
            taken.push((a, b));
            if let Some(i) = binding_at(&cum) {
                return CappedPiece {
                    piece: IntervalSet::from_intervals(taken),
                    binding: Some(i),
                };
            }
            continue;
        }
        // Fraction of the segment each agent can still afford; the smallest wins.
        let (best, frac) = caps
            .iter()
            .zip(&cum)
            .zip(&values)
            .filter(|(_, v)| v.is_positive())
            .map(|(((i, cap), c), v)| (*i, (cap - c) / v))
            .min_by(|x, y| x.1.cmp(&y.1).then(x.0.cmp(&y.0)))
            .expect("a segment that does not fit has positive value");
        let width = &b - &a;
        let mid = midpoint(&a, &b);
        let all_constant = caps.iter().all(|(i, _)| {
            let d = inst.density(*i);
            d.segment(d.segment_index(&mid)).is_constant()
        });
        if all_constant {
            let end = &a + &width * &frac;
            taken.push((a, end));
        } else {
            let h = &width * &frac / int(2);
            taken.push((&mid - &h, &mid + &h));
        }
        return CappedPiece {
            piece: IntervalSet::from_intervals(taken),
            binding: Some(best),
        };
    }
    CappedPiece {
        piece: IntervalSet::from_intervals(taken),
        binding: None,
    }
}

/// Output of [`eps_ef_allocation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsEfSplit {
    /// One piece per agent, in the order the agents were given.
    pub pieces: Vec<IntervalSet>,
    pub atoms: usize,
    /// `max_{i, atom} u_i(atom)`.
    pub max_atom_value: Scalar,
}

/// ε-EF division of `piece` among `agents`.
///
/// Every agent marks the cake at value increments `eps` (restarting at each
/// interval of `piece`), so every atom of the common refinement is worth at
/// most `eps` to every agent. The agents then pick atoms round robin in the
/// given order, always taking their favourite remaining atom (leftmost on
/// ties). Envy toward an earlier picker is bounded by one atom.
pub fn eps_ef_allocation(rw: &RwOracle, piece: &IntervalSet, agents: &[usize], eps: &Scalar) -> EpsEfSplit {
    assert!(eps.is_positive(), "eps must be positive");
    if agents.len() <= 1 {
        return EpsEfSplit {
            pieces: agents.iter().map(|_| piece.clone()).collect(),
            atoms: usize::from(!piece.is_empty()),
            max_atom_value: agents
                .first()
                .map_or_else(Scalar::zero, |&i| rw.instance().cake_value(i, piece)),
        };
    }

    let mut marks: Vec<Scalar> = Vec::new();
    for &i in agents {
        for (a, b) in piece.iter() {
            mark_interval(rw, i, a, b, eps, &mut marks);
        }
    }
    sort_by_scalar(&mut marks, |x| x);
    marks.dedup();
    let atoms: Vec<(Scalar, Scalar)> = piece.refine(&marks).collect();

    // values[k][t] = u_{agents[k]}(atom t)
    let values: Vec<Vec<Scalar>> = agents
        .iter()
        .map(|&i| {
            atoms
                .iter()
                .map(|(a, b)| rw.eval(i, a, b).expect("atom inside cake"))
                .collect()
        })
        .collect();
    let max_atom_value = values.iter().flatten().max().cloned().unwrap_or_else(Scalar::zero);

    let orders: Vec<Vec<usize>> = values
        .iter()
        .map(|row| {
            let approx: Vec<f64> = row.iter().map(to_f64).collect();
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&x, &y| match fast_cmp(&row[y], approx[y], &row[x], approx[x]) {
                Ordering::Equal => x.cmp(&y),
                other => other,
            });
            order
        })
        .collect();

    let mut owner: Vec<Option<usize>> = vec![None; atoms.len()];
    let mut cursor = vec![0usize; agents.len()];
    let mut left = atoms.len();
    'rounds: while left > 0 {
        for k in 0..agents.len() {
            if left == 0 {
                break 'rounds;
            }
            let order = &orders[k];
            while owner[order[cursor[k]]].is_some() {
                cursor[k] += 1;
            }
            owner[order[cursor[k]]] = Some(k);
            left -= 1;
        }
    }

    let mut parts: Vec<Vec<(Scalar, Scalar)>> = vec![Vec::new(); agents.len()];
    for (atom, k) in atoms.iter().zip(&owner) {
        parts[k.expect("every atom is picked")].push(atom.clone());
    }
    EpsEfSplit {
        pieces: parts.into_iter().map(IntervalSet::from_intervals).collect(),
        atoms: atoms.len(),
        max_atom_value,
    }
}

/// Marks `[a, b)` for agent `i` so that consecutive marks enclose value at
/// most `eps`. Cuts undershoot on irrational roots, so the running lower
/// bound on what remains is rechecked with one eval before stopping.
fn mark_interval(rw: &RwOracle, i: usize, a: &Scalar, b: &Scalar, eps: &Scalar, marks: &mut Vec<Scalar>) {
    let mut cur = a.clone();
    let mut rest = rw.eval(i, a, b).expect("interval inside cake");
    loop {
        while &rest > eps {
            let y = rw.cut(i, &cur, eps).expect("remaining value exceeds eps");
            if &y >= b {
                return;
            }
            marks.push(y.clone());
            cur = y;
            rest -= eps;
        }
        if &cur >= b {
            return;
        }
        rest = rw.eval(i, &cur, b).expect("interval inside cake");
        if &rest <= eps {
            return;
        }
    }
}

/// `max(0, max_{i, j} u_i(pieces_j) - u_i(pieces_i))` over the given agents.
pub fn max_envy_within(inst: &Instance, agents: &[usize], pieces: &[IntervalSet]) -> Scalar {
    let mut worst = Scalar::zero();
    for (k, &i) in agents.iter().enumerate() {
        let own = inst.cake_value(i, &pieces[k]);
        for other in pieces {
            let gap = inst.cake_value(i, other) - &own;
            if gap > worst {
                worst = gap;
            }
        }
    }
    worst
}
