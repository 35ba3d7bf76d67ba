//! Crossing classification and target selection.
//!
//! A crossing is *trivial* when taut-pull simplification removes it without
//! a Node Deletion. Simplification is the fixpoint of three rewrite rules on
//! arity-2 crossings:
//!
//! * **monogon**: both segments are consecutive visits of one cable;
//! * **bigon**: two crossings joined by two parallel edges, with the same
//!   strand on top at both;
//! * **free ends**: each of the two segments has a crossing-free run to one
//!   of its own cable's endpoints.
//!
//! Crossings of arity three or more are never trivial.
//!
//! Bigons can chain (one strand passing over another three or more times in
//! a row). Only the first bigon of a chain, counted along the top strand, is
//! eligible; otherwise the surviving crossing of an odd chain would depend on
//! rule order.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::diagram::{
    CableId, Crossing, CrossingId, Diagram, DiagramError, Endpoint, SegmentRef, Side,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Monogon,
    Bigon,
    FreeEnds,
}

/// One applicable rewrite: the rule and the crossings it removes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    pub rule: Rule,
    pub crossings: Vec<CrossingId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrivialityReport {
    pub trivial: BTreeSet<CrossingId>,
    pub reduced: Diagram,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("workspace is empty")]
    EmptyWorkspace,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

fn neighbours(d: &Diagram, s: SegmentRef) -> impl Iterator<Item = SegmentRef> {
    let len = d.visits(s.cable).map_or(0, <[_]>::len);
    let prev = s.index.checked_sub(1);
    let next = (s.index + 1 < len).then_some(s.index + 1);
    [prev, next]
        .into_iter()
        .flatten()
        .map(move |index| SegmentRef {
            cable: s.cable,
            index,
        })
}

fn has_free_run(d: &Diagram, s: SegmentRef) -> bool {
    let len = d.visits(s.cable).map_or(0, <[_]>::len);
    s.index == 0 || s.index + 1 == len
}

fn depth_is_top(d: &Diagram, s: SegmentRef) -> bool {
    d.visit(s).is_some_and(|v| v.depth.is_top())
}

/// Bigons as `(first, second)` ordered along the shared top strand.
fn bigons(d: &Diagram, crossings: &[Crossing]) -> Vec<(CrossingId, CrossingId)> {
    let mut out = Vec::new();
    for x in crossings.iter().filter(|c| c.arity() == 2) {
        let (s, t) = (x.segments[0], x.segments[1]);
        for sn in neighbours(d, s) {
            let Some(sv) = d.visit(sn) else { continue };
            let y = sv.crossing;
            if y <= x.id {
                continue;
            }
            let Some(yc) = crossings.iter().find(|c| c.id == y) else {
                continue;
            };
            if yc.arity() != 2 {
                continue;
            }
            let other = if yc.segments[0] == sn {
                yc.segments[1]
            } else {
                yc.segments[0]
            };
            if !neighbours(d, t).any(|tn| tn == other) {
                continue;
            }
            let top = if depth_is_top(d, s) && depth_is_top(d, sn) {
                Some((s, sn))
            } else if depth_is_top(d, t) && depth_is_top(d, other) {
                Some((t, other))
            } else {
                None
            };
            if let Some((at_x, at_y)) = top {
                let pair = if at_x.index < at_y.index {
                    (x.id, y)
                } else {
                    (y, x.id)
                };
                if !out.contains(&pair) {
                    out.push(pair);
                }
            }
        }
    }
    out
}

/// Every rewrite applicable to `d`, grouped by rule, each group in ascending
/// crossing-id order.
pub fn redexes(d: &Diagram) -> Vec<Redex> {
    let crossings: Vec<Crossing> = d.crossings().into_values().collect();
    let mut out = Vec::new();

    for c in crossings.iter().filter(|c| c.arity() == 2) {
        let (s, t) = (c.segments[0], c.segments[1]);
        if s.cable == t.cable && s.index + 1 == t.index {
            out.push(Redex {
                rule: Rule::Monogon,
                crossings: vec![c.id],
            });
        }
    }

    let all = bigons(d, &crossings);
    let seconds: BTreeSet<CrossingId> = all.iter().map(|p| p.1).collect();
    let mut eligible: Vec<(CrossingId, CrossingId)> = all
        .into_iter()
        .filter(|(first, _)| !seconds.contains(first))
        .collect();
    eligible.sort_by_key(|&(a, b)| (a.min(b), a.max(b)));
    for (a, b) in eligible {
        out.push(Redex {
            rule: Rule::Bigon,
            crossings: vec![a, b],
        });
    }

    for c in crossings.iter().filter(|c| c.arity() == 2) {
        if c.segments.iter().all(|&s| has_free_run(d, s)) {
            out.push(Redex {
                rule: Rule::FreeEnds,
                crossings: vec![c.id],
            });
        }
    }
    out
}

/// Reduce to the fixpoint, letting `choose` pick which applicable rewrite
/// fires at each step.
pub fn classify_trivial_with<F>(d: &Diagram, mut choose: F) -> TrivialityReport
where
    F: FnMut(&[Redex]) -> usize,
{
    let mut reduced = d.clone();
    let mut trivial = BTreeSet::new();
    loop {
        let options = redexes(&reduced);
        if options.is_empty() {
            break;
        }
        let pick = &options[choose(&options)];
        let ids: BTreeSet<CrossingId> = pick.crossings.iter().copied().collect();
        reduced.remove_crossings(&ids);
        trivial.extend(ids);
    }
    TrivialityReport { trivial, reduced }
}

/// Deterministic reduction: monogons first, then bigons, then free-end
/// slides, each at the lowest eligible crossing id.
pub fn classify_trivial(d: &Diagram) -> TrivialityReport {
    // `redexes` already lists rules in priority order and ids ascending.
    classify_trivial_with(d, |_| 0)
}

pub fn is_semi_disentangled(d: &Diagram, cable: CableId) -> Result<bool, DiagramError> {
    d.trace_cable(cable, true)?;
    Ok(semi_disentangled_in(&classify_trivial(d).reduced, cable))
}

fn semi_disentangled_in(reduced: &Diagram, cable: CableId) -> bool {
    reduced.visits(cable).is_none_or(<[_]>::is_empty)
}

/// Endpoints used by Reidemeister and Cable Extraction moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EndpointSelection {
    pub v_r: Endpoint,
    pub v_l: Endpoint,
}

impl EndpointSelection {
    pub fn right_cable(&self) -> CableId {
        self.v_r.cable
    }

    pub fn left_cable(&self) -> CableId {
        self.v_l.cable
    }
}

/// `v_r` is the rightmost endpoint; `v_l` the leftmost endpoint on a
/// different cable, or the other end of the same cable when it is alone.
pub fn select_endpoints(d: &Diagram) -> Result<EndpointSelection, AnalysisError> {
    let order = d.endpoint_order();
    let v_r = *order.last().ok_or(AnalysisError::EmptyWorkspace)?;
    let v_l = order
        .iter()
        .copied()
        .find(|e| e.cable != v_r.cable)
        .unwrap_or_else(|| v_r.other());
    Ok(EndpointSelection { v_r, v_l })
}

/// Hold and pull segments for one Node Deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeDeletionTarget {
    pub crossing: CrossingId,
    /// The topmost segment at `crossing`.
    pub hold: SegmentRef,
    /// The under-segment pulled out of `crossing`.
    pub pull: SegmentRef,
}

/// Walk the cable of `from` starting at that endpoint; return the first
/// under-pass through a crossing outside `trivial`.
fn search_from(
    d: &Diagram,
    from: Endpoint,
    trivial: &BTreeSet<CrossingId>,
) -> Option<NodeDeletionTarget> {
    let visits = d.visits(from.cable)?;
    let indices: Box<dyn Iterator<Item = usize>> = match from.side {
        Side::L => Box::new(0..visits.len()),
        Side::R => Box::new((0..visits.len()).rev()),
    };
    for index in indices {
        let v = visits[index];
        if !v.depth.is_under() || trivial.contains(&v.crossing) {
            continue;
        }
        let hold = d.crossing(v.crossing)?.top()?;
        return Some(NodeDeletionTarget {
            crossing: v.crossing,
            hold,
            pull: SegmentRef {
                cable: from.cable,
                index,
            },
        });
    }
    None
}

/// First non-trivial under-crossing met when tracing from the rightmost endpoint.
pub fn first_nontrivial_undercrossing(d: &Diagram) -> Option<NodeDeletionTarget> {
    let sel = select_endpoints(d).ok()?;
    let trivial = classify_trivial(d).trivial;
    search_from(d, sel.v_r, &trivial)
}

/// Like [`first_nontrivial_undercrossing`], but when the rightmost cable
/// only passes over its non-trivial crossings, retry from `v_l` and then from
/// the rightmost endpoint of every other cable, right to left.
pub fn node_deletion_target(d: &Diagram) -> Option<NodeDeletionTarget> {
    let sel = select_endpoints(d).ok()?;
    let trivial = classify_trivial(d).trivial;
    let mut starts = vec![sel.v_r, sel.v_l];
    let mut seen: BTreeSet<CableId> = BTreeSet::from([sel.v_r.cable, sel.v_l.cable]);
    for e in d.endpoint_order().iter().rev() {
        if seen.insert(e.cable) {
            starts.push(*e);
        }
    }
    starts.into_iter().find_map(|e| search_from(d, e, &trivial))
}
