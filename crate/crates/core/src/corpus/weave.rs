//! Plat-style diagram builder.
//!
//! Strands run left to right across `width` positions. A word of generators
//! permutes positions; each generator becomes one crossing. At either side a
//! position is a free cable end or half of a cap joining it to its
//! neighbour. Tracing from the free ends yields the cables.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::diagram::{CableId, CrossingId, Diagram, Endpoint, SegmentDepth, Side, Visit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gen {
    /// Swap positions `i` and `i + 1`; the strand entering at `i` is on top
    /// when `left_over`.
    Sigma { i: usize, left_over: bool },
    /// Reverse positions `i..i + 3` through one point. `ranks[j]` is the
    /// stacking rank (1 = top) of the strand entering at `i + j`.
    Triple { i: usize, ranks: [u32; 3] },
}

impl Gen {
    /// Checkerboard sign: over for even `i`, under for odd `i`.
    pub fn alt(i: usize) -> Gen {
        Gen::Sigma {
            i,
            left_over: i.is_multiple_of(2),
        }
    }

    fn span(self) -> (usize, usize) {
        match self {
            Gen::Sigma { i, .. } => (i, 2),
            Gen::Triple { i, .. } => (i, 3),
        }
    }

    /// Position after the generator and stacking rank for a strand entering
    /// at `p`, or `None` if the strand is not involved.
    fn forward(self, p: usize) -> Option<(usize, u32)> {
        let (i, n) = self.span();
        if p < i || p >= i + n {
            return None;
        }
        let j = p - i;
        let rank = match self {
            Gen::Sigma { left_over, .. } => {
                if (j == 0) == left_over {
                    1
                } else {
                    2
                }
            }
            Gen::Triple { ranks, .. } => ranks[j],
        };
        Some((i + n - 1 - j, rank))
    }

    /// Generators are involutions on positions, so the inverse is the same
    /// map applied to the exit position; the rank belongs to the entry.
    fn backward(self, q: usize) -> Option<(usize, u32)> {
        let (p, _) = self.forward(q)?;
        let (_, rank) = self.forward(p)?;
        Some((p, rank))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeaveError {
    #[error("generator out of range at word index {0}")]
    OutOfRange(usize),
    #[error("triple point ranks must be a permutation of 1..=3 at word index {0}")]
    BadRanks(usize),
    #[error("cap ({0}, {1}) must join adjacent in-range positions without overlap")]
    BadCap(usize, usize),
    #[error("the weave contains a closed loop")]
    ClosedLoop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weave {
    pub width: usize,
    /// Caps on the left side as `(p, p + 1)`; other positions are free ends.
    pub left_caps: Vec<usize>,
    pub right_caps: Vec<usize>,
    pub word: Vec<Gen>,
}

fn cap_partners(width: usize, caps: &[usize]) -> Result<BTreeMap<usize, usize>, WeaveError> {
    let mut m = BTreeMap::new();
    for &p in caps {
        if p + 1 >= width || m.contains_key(&p) || m.contains_key(&(p + 1)) {
            return Err(WeaveError::BadCap(p, p + 1));
        }
        m.insert(p, p + 1);
        m.insert(p + 1, p);
    }
    Ok(m)
}

impl Weave {
    pub fn new(
        width: usize,
        left_caps: Vec<usize>,
        right_caps: Vec<usize>,
        word: Vec<Gen>,
    ) -> Self {
        Weave {
            width,
            left_caps,
            right_caps,
            word,
        }
    }

    pub fn build(&self) -> Result<Diagram, WeaveError> {
        for (t, g) in self.word.iter().enumerate() {
            let (i, n) = g.span();
            if i + n > self.width {
                return Err(WeaveError::OutOfRange(t));
            }
            if let Gen::Triple { ranks, .. } = g {
                let mut r = *ranks;
                r.sort_unstable();
                if r != [1, 2, 3] {
                    return Err(WeaveError::BadRanks(t));
                }
            }
        }
        let left = cap_partners(self.width, &self.left_caps)?;
        let right = cap_partners(self.width, &self.right_caps)?;
        let len = self.word.len();

        // Free ends in endpoint order: left side by position, then right.
        let ends: Vec<(Side, usize)> = (0..self.width)
            .filter(|p| !left.contains_key(p))
            .map(|p| (Side::L, p))
            .chain(
                (0..self.width)
                    .filter(|p| !right.contains_key(p))
                    .map(|p| (Side::R, p)),
            )
            .collect();

        let mut used: BTreeSet<(Side, usize)> = BTreeSet::new();
        let mut cables = BTreeMap::new();
        let mut order = vec![None; ends.len()];
        let mut next_id = 1;
        for (start_idx, &start) in ends.iter().enumerate() {
            if used.contains(&start) {
                continue;
            }
            let id = CableId(next_id);
            next_id += 1;
            let (mut t, mut p, mut rightward) = match start.0 {
                Side::L => (0, start.1, true),
                Side::R => (len, start.1, false),
            };
            let mut visits = Vec::new();
            let finish = loop {
                if rightward {
                    if t == len {
                        match right.get(&p) {
                            Some(&q) => {
                                p = q;
                                rightward = false;
                                continue;
                            }
                            None => break (Side::R, p),
                        }
                    }
                    if let Some((q, rank)) = self.word[t].forward(p) {
                        visits.push(Visit::new(
                            CrossingId(t as u32 + 1),
                            SegmentDepth::from_rank(rank - 1),
                        ));
                        p = q;
                    }
                    t += 1;
                } else {
                    if t == 0 {
                        match left.get(&p) {
                            Some(&q) => {
                                p = q;
                                rightward = true;
                                continue;
                            }
                            None => break (Side::L, p),
                        }
                    }
                    if let Some((q, rank)) = self.word[t - 1].backward(p) {
                        visits.push(Visit::new(
                            CrossingId(t as u32),
                            SegmentDepth::from_rank(rank - 1),
                        ));
                        p = q;
                    }
                    t -= 1;
                }
            };
            used.insert(start);
            used.insert(finish);
            let finish_idx = ends
                .iter()
                .position(|e| *e == finish)
                .expect("finish is a free end");
            order[start_idx] = Some(Endpoint::left(id));
            order[finish_idx] = Some(Endpoint::right(id));
            cables.insert(id, visits);
        }

        let slots: usize = self.word.iter().map(|g| g.span().1).sum();
        let seen: usize = cables.values().map(Vec::len).sum();
        if seen != slots {
            return Err(WeaveError::ClosedLoop);
        }
        let order = order
            .into_iter()
            .map(|e| e.expect("every free end is reached"))
            .collect();
        Ok(Diagram::from_parts(cables, order, BTreeSet::new()))
    }
}
