//! Multi-cable knot diagrams.
//!
//! A [`Diagram`] stores, for every cable, the ordered list of crossings it
//! passes through from its left endpoint to its right endpoint, together with
//! the depth of the cable at each pass. Crossings are not stored separately:
//! a crossing of arity `k` is exactly the set of `k` visits that carry its id.
//! [`Diagram::crossings`] materializes that view when it is needed.
//!
//! Depths follow the usual stacking rule: the topmost segment at a crossing
//! is labelled `+1` and a segment lying under `m` others is labelled `-m`, so
//! a valid crossing of arity `k` carries exactly `{+1, -1, ..., -(k-1)}`.

mod mcd;

pub use mcd::{parse, serialize, ParseError};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CableId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CrossingId(pub u32);

impl fmt::Display for CableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CrossingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.0)
    }
}

/// Depth label of one segment at one crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SegmentDepth(pub i32);

impl SegmentDepth {
    pub const TOP: SegmentDepth = SegmentDepth(1);

    /// The label of a segment lying under `m` others.
    pub fn under(m: u32) -> SegmentDepth {
        debug_assert!(m >= 1);
        SegmentDepth(-(m as i32))
    }

    pub fn is_top(self) -> bool {
        self.0 == 1
    }

    pub fn is_under(self) -> bool {
        self.0 < 0
    }

    /// Position in the stack, 0 for the topmost segment.
    pub fn rank(self) -> u32 {
        if self.0 == 1 {
            0
        } else {
            self.0.unsigned_abs()
        }
    }

    pub fn from_rank(rank: u32) -> SegmentDepth {
        if rank == 0 {
            SegmentDepth::TOP
        } else {
            SegmentDepth::under(rank)
        }
    }
}

impl fmt::Display for SegmentDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 > 0 {
            write!(f, "+{}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// One pass of a cable through a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Visit {
    pub crossing: CrossingId,
    pub depth: SegmentDepth,
}

impl Visit {
    pub fn new(crossing: CrossingId, depth: SegmentDepth) -> Self {
        Visit { crossing, depth }
    }
}

/// A segment slot: the `index`-th visit (counted from the left endpoint) of `cable`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SegmentRef {
    pub cable: CableId,
    pub index: usize,
}

impl fmt::Display for SegmentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.cable, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Side {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Endpoint {
    pub cable: CableId,
    pub side: Side,
}

impl Endpoint {
    pub fn left(cable: CableId) -> Self {
        Endpoint {
            cable,
            side: Side::L,
        }
    }

    pub fn right(cable: CableId) -> Self {
        Endpoint {
            cable,
            side: Side::R,
        }
    }

    pub fn other(self) -> Self {
        Endpoint {
            cable: self.cable,
            side: match self.side {
                Side::L => Side::R,
                Side::R => Side::L,
            },
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::L => 'L',
            Side::R => 'R',
        };
        write!(f, "{}{}", self.cable, s)
    }
}

/// Materialized view of one crossing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub id: CrossingId,
    /// Segment slots in canonical order (cable id, then visit index).
    pub segments: Vec<SegmentRef>,
    pub depths: Vec<SegmentDepth>,
}

impl Crossing {
    pub fn arity(&self) -> usize {
        self.segments.len()
    }

    /// Edge-ends incident to the vertex.
    pub fn degree(&self) -> usize {
        2 * self.arity()
    }

    pub fn top(&self) -> Option<SegmentRef> {
        self.segments
            .iter()
            .zip(&self.depths)
            .find(|(_, d)| d.is_top())
            .map(|(s, _)| *s)
    }

    pub fn is_intra_cable(&self) -> bool {
        self.segments.windows(2).all(|w| w[0].cable == w[1].cable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CableTrace {
    pub cable: CableId,
    pub visits: Vec<Visit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("unknown cable {0}")]
    UnknownCable(CableId),
    #[error("cable {0} is terminated")]
    TerminatedCable(CableId),
}

/// The full configuration: cables, their crossing visits, the left-to-right
/// order of live endpoints and the cables already moved out of the workspace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Diagram {
    cables: BTreeMap<CableId, Vec<Visit>>,
    endpoint_order: Vec<Endpoint>,
    terminated: BTreeSet<CableId>,
}

impl Diagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assemble a diagram from raw parts. No checks are made; call
    /// [`validate`] on the result when the parts come from outside.
    pub fn from_parts(
        cables: BTreeMap<CableId, Vec<Visit>>,
        endpoint_order: Vec<Endpoint>,
        terminated: BTreeSet<CableId>,
    ) -> Self {
        Diagram {
            cables,
            endpoint_order,
            terminated,
        }
    }

    /// Every cable, live or terminated.
    pub fn cables(&self) -> &BTreeMap<CableId, Vec<Visit>> {
        &self.cables
    }

    pub fn cables_mut(&mut self) -> &mut BTreeMap<CableId, Vec<Visit>> {
        &mut self.cables
    }

    pub fn visits(&self, cable: CableId) -> Option<&[Visit]> {
        self.cables.get(&cable).map(Vec::as_slice)
    }

    pub fn endpoint_order(&self) -> &[Endpoint] {
        &self.endpoint_order
    }

    pub fn set_endpoint_order(&mut self, order: Vec<Endpoint>) {
        self.endpoint_order = order;
    }

    pub fn terminated(&self) -> &BTreeSet<CableId> {
        &self.terminated
    }

    pub fn is_live(&self, cable: CableId) -> bool {
        self.cables.contains_key(&cable) && !self.terminated.contains(&cable)
    }

    pub fn live_cables(&self) -> impl Iterator<Item = CableId> + '_ {
        self.cables
            .keys()
            .copied()
            .filter(move |c| !self.terminated.contains(c))
    }

    pub fn live_cable_count(&self) -> usize {
        self.live_cables().count()
    }

    /// True when no live cable remains.
    pub fn workspace_empty(&self) -> bool {
        self.live_cable_count() == 0
    }

    /// Move a cable to the termination area. Its visits must already be gone.
    pub fn terminate(&mut self, cable: CableId) {
        debug_assert!(self.cables.get(&cable).is_some_and(Vec::is_empty));
        self.terminated.insert(cable);
        self.endpoint_order.retain(|e| e.cable != cable);
    }

    pub fn crossing_ids(&self) -> BTreeSet<CrossingId> {
        self.cables
            .values()
            .flat_map(|v| v.iter().map(|x| x.crossing))
            .collect()
    }

    pub fn crossing_count(&self) -> usize {
        self.crossing_ids().len()
    }

    /// Smallest id greater than every crossing id in use.
    pub fn fresh_crossing_id(&self) -> CrossingId {
        CrossingId(self.crossing_ids().last().map_or(1, |c| c.0 + 1))
    }

    pub fn crossings(&self) -> BTreeMap<CrossingId, Crossing> {
        let mut out: BTreeMap<CrossingId, Crossing> = BTreeMap::new();
        for (&cable, visits) in &self.cables {
            for (index, v) in visits.iter().enumerate() {
                let c = out.entry(v.crossing).or_insert_with(|| Crossing {
                    id: v.crossing,
                    segments: Vec::new(),
                    depths: Vec::new(),
                });
                c.segments.push(SegmentRef { cable, index });
                c.depths.push(v.depth);
            }
        }
        out
    }

    pub fn crossing(&self, id: CrossingId) -> Option<Crossing> {
        let mut segments = Vec::new();
        let mut depths = Vec::new();
        for (&cable, visits) in &self.cables {
            for (index, v) in visits.iter().enumerate() {
                if v.crossing == id {
                    segments.push(SegmentRef { cable, index });
                    depths.push(v.depth);
                }
            }
        }
        (!segments.is_empty()).then_some(Crossing {
            id,
            segments,
            depths,
        })
    }

    pub fn visit(&self, seg: SegmentRef) -> Option<Visit> {
        self.cables.get(&seg.cable)?.get(seg.index).copied()
    }

    /// Visit list of a live cable, left to right or right to left.
    pub fn trace_cable(&self, cable: CableId, from_left: bool) -> Result<CableTrace, DiagramError> {
        let visits = self
            .cables
            .get(&cable)
            .ok_or(DiagramError::UnknownCable(cable))?;
        if self.terminated.contains(&cable) {
            return Err(DiagramError::TerminatedCable(cable));
        }
        let mut visits = visits.clone();
        if !from_left {
            visits.reverse();
        }
        Ok(CableTrace { cable, visits })
    }

    /// Sum over crossings of `C(k, 2)`: the number of pairwise segment crossings.
    pub fn potential(&self) -> u64 {
        let mut arity: HashMap<CrossingId, u64> = HashMap::new();
        for v in self.cables.values().flatten() {
            *arity.entry(v.crossing).or_default() += 1;
        }
        arity.values().map(|&k| k * k.saturating_sub(1) / 2).sum()
    }

    /// Remove the given visits from their cables and renormalize the depth
    /// stack of every affected crossing, preserving the relative order of the
    /// surviving segments. Crossings left with a single segment are spliced
    /// away entirely.
    pub fn remove_segments(&mut self, segments: &[SegmentRef]) {
        let mut touched = BTreeSet::new();
        let mut by_cable: BTreeMap<CableId, Vec<usize>> = BTreeMap::new();
        for s in segments {
            if let Some(v) = self.visit(*s) {
                touched.insert(v.crossing);
                by_cable.entry(s.cable).or_default().push(s.index);
            }
        }
        for (cable, mut idx) in by_cable {
            idx.sort_unstable();
            idx.dedup();
            let visits = self.cables.get_mut(&cable).expect("cable exists");
            for i in idx.into_iter().rev() {
                visits.remove(i);
            }
        }
        self.renormalize(&touched);
    }

    /// Remove every visit to the given crossings.
    pub fn remove_crossings(&mut self, crossings: &BTreeSet<CrossingId>) {
        for visits in self.cables.values_mut() {
            visits.retain(|v| !crossings.contains(&v.crossing));
        }
    }

    fn renormalize(&mut self, crossings: &BTreeSet<CrossingId>) {
        for &id in crossings {
            let Some(c) = self.crossing(id) else { continue };
            if c.arity() < 2 {
                self.remove_crossings(&BTreeSet::from([id]));
                continue;
            }
            let mut order: Vec<(u32, SegmentRef)> = c
                .segments
                .iter()
                .zip(&c.depths)
                .map(|(s, d)| (d.rank(), *s))
                .collect();
            order.sort();
            for (rank, (_, seg)) in order.into_iter().enumerate() {
                let v = &mut self.cables.get_mut(&seg.cable).unwrap()[seg.index];
                v.depth = SegmentDepth::from_rank(rank as u32);
            }
        }
    }
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A crossing with fewer than two segments.
    ArityTooLow {
        crossing: CrossingId,
        arity: usize,
    },
    /// More than one segment labelled `+1`.
    DuplicateTopmost {
        crossing: CrossingId,
    },
    /// No segment labelled `+1`.
    MissingTopmost {
        crossing: CrossingId,
    },
    /// Depth multiset is not `{+1, -1, .., -(k-1)}`.
    BadDepthStack {
        crossing: CrossingId,
        depths: Vec<SegmentDepth>,
    },
    /// Two parallel edges between the same pair of vertices with the same
    /// annotation pair.
    DuplicateEdgeAnnotation {
        a: CrossingId,
        b: CrossingId,
    },
    /// A terminated cable still visits crossings.
    TerminatedCableHasVisits {
        cable: CableId,
    },
    /// A terminated id that is not a known cable.
    UnknownTerminated {
        cable: CableId,
    },
    /// Endpoint order references an unknown or terminated cable.
    ForeignEndpoint {
        endpoint: Endpoint,
    },
    DuplicateEndpoint {
        endpoint: Endpoint,
    },
    MissingEndpoint {
        endpoint: Endpoint,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ArityTooLow { crossing, arity } => {
                write!(f, "{crossing}: arity {arity} < 2")
            }
            Violation::DuplicateTopmost { crossing } => write!(f, "{crossing}: duplicate topmost"),
            Violation::MissingTopmost { crossing } => write!(f, "{crossing}: missing topmost"),
            Violation::BadDepthStack { crossing, depths } => {
                let d: Vec<String> = depths.iter().map(|d| d.to_string()).collect();
                write!(
                    f,
                    "{crossing}: depth stack {{{}}} is not strict",
                    d.join(", ")
                )
            }
            Violation::DuplicateEdgeAnnotation { a, b } => {
                write!(f, "{a}-{b}: parallel edges with identical annotations")
            }
            Violation::TerminatedCableHasVisits { cable } => {
                write!(f, "cable {cable}: terminated but still crosses")
            }
            Violation::UnknownTerminated { cable } => write!(f, "terminated cable {cable} unknown"),
            Violation::ForeignEndpoint { endpoint } => {
                write!(f, "endpoint {endpoint}: not a live cable")
            }
            Violation::DuplicateEndpoint { endpoint } => {
                write!(f, "endpoint {endpoint}: listed twice")
            }
            Violation::MissingEndpoint { endpoint } => {
                write!(f, "endpoint {endpoint}: missing from order")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every structural invariant of `d`. Violations are collected, not raised.
pub fn validate(d: &Diagram) -> ValidationReport {
    let mut out = Vec::new();

    for (id, c) in d.crossings() {
        let k = c.arity();
        if k < 2 {
            out.push(Violation::ArityTooLow {
                crossing: id,
                arity: k,
            });
            continue;
        }
        let tops = c.depths.iter().filter(|d| d.is_top()).count();
        if tops > 1 {
            out.push(Violation::DuplicateTopmost { crossing: id });
        } else if tops == 0 {
            out.push(Violation::MissingTopmost { crossing: id });
        }
        let mut ranks: Vec<u32> = c.depths.iter().map(|d| d.rank()).collect();
        ranks.sort_unstable();
        let bad_value = c.depths.iter().any(|d| d.0 == 0 || d.0 > 1);
        if tops == 1 && (bad_value || ranks.iter().enumerate().any(|(i, &r)| r != i as u32)) {
            out.push(Violation::BadDepthStack {
                crossing: id,
                depths: c.depths.clone(),
            });
        }
    }

    // Edges between consecutive crossing visits; parallel edges between the
    // same vertex pair must carry distinct annotation pairs.
    let mut seen: HashMap<(CrossingId, SegmentDepth, CrossingId, SegmentDepth), usize> =
        HashMap::new();
    for visits in d.cables.values() {
        for w in visits.windows(2) {
            let (a, b) = (w[0], w[1]);
            let key = if (a.crossing, a.depth) <= (b.crossing, b.depth) {
                (a.crossing, a.depth, b.crossing, b.depth)
            } else {
                (b.crossing, b.depth, a.crossing, a.depth)
            };
            let n = seen.entry(key).or_default();
            *n += 1;
            if *n == 2 {
                out.push(Violation::DuplicateEdgeAnnotation { a: key.0, b: key.2 });
            }
        }
    }

    for &t in &d.terminated {
        match d.cables.get(&t) {
            None => out.push(Violation::UnknownTerminated { cable: t }),
            Some(v) if !v.is_empty() => out.push(Violation::TerminatedCableHasVisits { cable: t }),
            Some(_) => {}
        }
    }

    let mut listed = BTreeSet::new();
    for &e in &d.endpoint_order {
        if !d.is_live(e.cable) {
            out.push(Violation::ForeignEndpoint { endpoint: e });
        } else if !listed.insert(e) {
            out.push(Violation::DuplicateEndpoint { endpoint: e });
        }
    }
    for c in d.live_cables() {
        for e in [Endpoint::left(c), Endpoint::right(c)] {
            if !listed.contains(&e) {
                out.push(Violation::MissingEndpoint { endpoint: e });
            }
        }
    }

    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: u32, d: i32) -> Visit {
        Visit::new(CrossingId(c), SegmentDepth(d))
    }

    fn two_cables(a: Vec<Visit>, b: Vec<Visit>) -> Diagram {
        let (c1, c2) = (CableId(1), CableId(2));
        Diagram::from_parts(
            BTreeMap::from([(c1, a), (c2, b)]),
            vec![
                Endpoint::left(c1),
                Endpoint::left(c2),
                Endpoint::right(c2),
                Endpoint::right(c1),
            ],
            BTreeSet::new(),
        )
    }

    #[test]
    fn empty_diagram_is_valid() {
        let d = Diagram::new();
        assert!(validate(&d).is_valid());
        assert_eq!(d.potential(), 0);
    }

    #[test]
    fn duplicate_topmost_reported() {
        let d = two_cables(vec![v(1, 1)], vec![v(1, 1)]);
        let r = validate(&d);
        assert_eq!(
            r.violations,
            vec![Violation::DuplicateTopmost {
                crossing: CrossingId(1)
            }]
        );
        assert!(r.to_string().contains("duplicate topmost"));
    }

    #[test]
    fn potential_counts_pairs() {
        let d = two_cables(vec![v(1, 1)], vec![v(1, -1)]);
        assert_eq!(d.potential(), 1);
        let d = two_cables(vec![v(1, 1), v(1, -2)], vec![v(1, -1)]);
        assert!(validate(&d).is_valid());
        assert_eq!(d.potential(), 3);
    }

    #[test]
    fn arity_one_and_gaps_rejected() {
        let d = two_cables(vec![v(1, 1)], vec![]);
        assert!(matches!(
            validate(&d).violations[0],
            Violation::ArityTooLow { .. }
        ));
        let d = two_cables(vec![v(1, 1), v(1, -2)], vec![v(1, -3)]);
        assert!(matches!(
            validate(&d).violations[0],
            Violation::BadDepthStack { .. }
        ));
    }

    #[test]
    fn endpoint_order_checked() {
        let mut d = two_cables(vec![], vec![]);
        d.set_endpoint_order(vec![Endpoint::left(CableId(1)), Endpoint::left(CableId(1))]);
        let r = validate(&d);
        assert!(r.violations.contains(&Violation::DuplicateEndpoint {
            endpoint: Endpoint::left(CableId(1))
        }));
        assert!(r.violations.contains(&Violation::MissingEndpoint {
            endpoint: Endpoint::right(CableId(2))
        }));
    }

    #[test]
    fn trace_monogon_has_consecutive_visits() {
        let d = two_cables(vec![v(1, 1), v(1, -1)], vec![]);
        assert!(validate(&d).is_valid());
        let t = d.trace_cable(CableId(1), true).unwrap();
        assert_eq!(
            t.visits.iter().map(|x| x.crossing).collect::<Vec<_>>(),
            vec![CrossingId(1); 2]
        );
        assert!(d.trace_cable(CableId(2), true).unwrap().visits.is_empty());
        assert_eq!(
            d.trace_cable(CableId(9), true),
            Err(DiagramError::UnknownCable(CableId(9)))
        );
    }

    #[test]
    fn trace_reverses() {
        let d = two_cables(vec![v(1, 1), v(2, -1)], vec![v(2, 1), v(1, -1)]);
        let l = d.trace_cable(CableId(1), true).unwrap();
        let mut r = d.trace_cable(CableId(1), false).unwrap();
        r.visits.reverse();
        assert_eq!(l, r);
    }

    #[test]
    fn remove_segment_renormalizes() {
        let mut d = two_cables(vec![v(1, 1), v(1, -2)], vec![v(1, -1)]);
        d.remove_segments(&[SegmentRef {
            cable: CableId(2),
            index: 0,
        }]);
        assert!(validate(&d).is_valid());
        assert_eq!(d.visits(CableId(1)).unwrap(), &[v(1, 1), v(1, -1)]);
        assert_eq!(d.potential(), 1);

        d.remove_segments(&[SegmentRef {
            cable: CableId(1),
            index: 1,
        }]);
        assert_eq!(d.potential(), 0);
        assert!(d.visits(CableId(1)).unwrap().is_empty());
    }

    #[test]
    fn terminated_cable_rejected_by_trace() {
        let mut d = two_cables(vec![], vec![]);
        d.terminate(CableId(1));
        assert!(validate(&d).is_valid());
        assert_eq!(
            d.trace_cable(CableId(1), true),
            Err(DiagramError::TerminatedCable(CableId(1)))
        );
        assert_eq!(d.endpoint_order().len(), 2);
    }
}
