//! Rewrite semantics of the manipulation primitives.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    classify_trivial, is_semi_disentangled, EndpointSelection, NodeDeletionTarget,
};
use crate::diagram::{CableId, CrossingId, Diagram, Endpoint, SegmentDepth, SegmentRef, Visit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ActionKind {
    Reidemeister,
    NodeDeletion,
    CableExtraction,
    Done,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::Reidemeister => "Reidemeister",
            ActionKind::NodeDeletion => "NodeDeletion",
            ActionKind::CableExtraction => "CableExtraction",
            ActionKind::Done => "Done",
        })
    }
}

/// One planner decision with its graph targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Action {
    /// Pull `v_r` and `v_l` apart.
    Reidemeister(EndpointSelection),
    /// Hold the top segment of a crossing and pull one under-segment out.
    NodeDeletion(NodeDeletionTarget),
    /// Soft-pin `pin` and pull `cable` to the termination area.
    CableExtraction {
        cable: CableId,
        pin: Endpoint,
    },
    Done,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Reidemeister(_) => ActionKind::Reidemeister,
            Action::NodeDeletion(_) => ActionKind::NodeDeletion,
            Action::CableExtraction { .. } => ActionKind::CableExtraction,
            Action::Done => ActionKind::Done,
        }
    }

    /// 1 when the grippers close on the cable, 0 for a soft pin.
    pub fn pin_grasp_flag(&self) -> u8 {
        match self {
            Action::Reidemeister(_) | Action::NodeDeletion(_) => 1,
            Action::CableExtraction { .. } | Action::Done => 0,
        }
    }

    /// Node Deletions and Cable Extractions count against the budget.
    pub fn is_disentangling(&self) -> bool {
        matches!(
            self,
            Action::NodeDeletion(_) | Action::CableExtraction { .. }
        )
    }

    /// Compact description of the graph targets, e.g. `v_r=1R,v_l=2L`.
    pub fn targets(&self) -> String {
        match self {
            Action::Reidemeister(s) => format!("v_r={},v_l={}", s.v_r, s.v_l),
            Action::NodeDeletion(t) => format!("{},hold={},pull={}", t.crossing, t.hold, t.pull),
            Action::CableExtraction { cable, pin } => format!("cable={cable},pin={pin}"),
            Action::Done => "-".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("endpoint {0} is not live")]
    StaleEndpoint(Endpoint),
    #[error("selection uses the same endpoint twice")]
    DegenerateSelection,
    #[error("crossing {0} does not exist")]
    UnknownCrossing(CrossingId),
    #[error("segment {0} is not part of the target crossing")]
    StaleSegment(SegmentRef),
    #[error("hold segment {0} is not topmost")]
    HoldNotTopmost(SegmentRef),
    #[error("pull segment {0} is not an under-segment")]
    PullNotUnder(SegmentRef),
    #[error("crossing {0} is trivial; Node Deletion refused")]
    TrivialTarget(CrossingId),
    #[error("cable {0} is not live")]
    DeadCable(CableId),
    #[error("cable {0} is not semi-disentangled")]
    NotSemiDisentangled(CableId),
    #[error("pin {pin} must lie on a cable other than {cable}")]
    PinOnExtractedCable { cable: CableId, pin: Endpoint },
}

fn check_endpoint(d: &Diagram, e: Endpoint) -> Result<(), MoveError> {
    if d.endpoint_order().contains(&e) {
        Ok(())
    } else {
        Err(MoveError::StaleEndpoint(e))
    }
}

/// Remove every trivial crossing and spread `v_l` and `v_r` to the extreme
/// left and right of the endpoint order.
pub fn apply_reidemeister(d: &Diagram, sel: EndpointSelection) -> Result<Diagram, MoveError> {
    check_endpoint(d, sel.v_r)?;
    check_endpoint(d, sel.v_l)?;
    if sel.v_r == sel.v_l {
        return Err(MoveError::DegenerateSelection);
    }
    let mut out = classify_trivial(d).reduced;
    let mut order: Vec<Endpoint> = d
        .endpoint_order()
        .iter()
        .copied()
        .filter(|&e| e != sel.v_r && e != sel.v_l)
        .collect();
    order.insert(0, sel.v_l);
    order.push(sel.v_r);
    out.set_endpoint_order(order);
    Ok(out)
}

/// Pull one under-segment out of a non-trivial crossing. Potential drops by
/// exactly `k - 1` for a crossing of arity `k`.
pub fn apply_node_deletion(d: &Diagram, t: NodeDeletionTarget) -> Result<Diagram, MoveError> {
    let c = d
        .crossing(t.crossing)
        .ok_or(MoveError::UnknownCrossing(t.crossing))?;
    for s in [t.hold, t.pull] {
        if !c.segments.contains(&s) {
            return Err(MoveError::StaleSegment(s));
        }
    }
    let depth = |s| d.visit(s).map(|v| v.depth).unwrap_or(SegmentDepth(0));
    if !depth(t.hold).is_top() {
        return Err(MoveError::HoldNotTopmost(t.hold));
    }
    if !depth(t.pull).is_under() {
        return Err(MoveError::PullNotUnder(t.pull));
    }
    if classify_trivial(d).trivial.contains(&t.crossing) {
        return Err(MoveError::TrivialTarget(t.crossing));
    }
    let mut out = d.clone();
    out.remove_segments(&[t.pull]);
    Ok(out)
}

/// Move a semi-disentangled cable to the termination area. Every crossing it
/// took part in loses that segment; crossings left with one segment vanish.
pub fn apply_cable_extraction(
    d: &Diagram,
    cable: CableId,
    pin: Endpoint,
) -> Result<Diagram, MoveError> {
    if !d.is_live(cable) {
        return Err(MoveError::DeadCable(cable));
    }
    check_endpoint(d, pin)?;
    if pin.cable == cable && d.live_cable_count() > 1 {
        return Err(MoveError::PinOnExtractedCable { cable, pin });
    }
    if !is_semi_disentangled(d, cable).map_err(|_| MoveError::DeadCable(cable))? {
        return Err(MoveError::NotSemiDisentangled(cable));
    }
    let mut out = d.clone();
    let n = out.visits(cable).map_or(0, <[_]>::len);
    let slots: Vec<SegmentRef> = (0..n).map(|index| SegmentRef { cable, index }).collect();
    out.remove_segments(&slots);
    out.terminate(cable);
    Ok(out)
}

/// Noise-free transition.
pub fn apply(d: &Diagram, action: &Action) -> Result<Diagram, MoveError> {
    match *action {
        Action::Reidemeister(sel) => apply_reidemeister(d, sel),
        Action::NodeDeletion(t) => apply_node_deletion(d, t),
        Action::CableExtraction { cable, pin } => apply_cable_extraction(d, cable, pin),
        Action::Done => Ok(d.clone()),
    }
}

/// Imperfect execution: the action is skipped with probability `p_fail`,
/// and afterwards a monogon appears on a random live cable with
/// probability `p_spawn`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseConfig {
    pub p_fail: f64,
    pub p_spawn: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(p_fail: f64, p_spawn: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&p_fail), "p_fail out of [0, 1]");
        assert!((0.0..=1.0).contains(&p_spawn), "p_spawn out of [0, 1]");
        NoiseConfig {
            p_fail,
            p_spawn,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        NoiseConfig { seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoisyOutcome {
    pub diagram: Diagram,
    /// The action was skipped.
    pub failed: bool,
    /// Id of a monogon spawned after the action.
    pub spawned: Option<CrossingId>,
}

pub fn apply_noisy(
    d: &Diagram,
    action: &Action,
    cfg: &NoiseConfig,
) -> Result<NoisyOutcome, MoveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let failed = rng.gen::<f64>() < cfg.p_fail;
    let mut diagram = if failed { d.clone() } else { apply(d, action)? };
    let mut spawned = None;
    if rng.gen::<f64>() < cfg.p_spawn {
        let live: Vec<CableId> = diagram.live_cables().collect();
        if !live.is_empty() {
            let cable = live[rng.gen_range(0..live.len())];
            let id = diagram.fresh_crossing_id();
            let visits = diagram.cables_mut().get_mut(&cable).expect("live cable");
            let at = rng.gen_range(0..=visits.len());
            let (first, second) = if rng.gen::<bool>() {
                (SegmentDepth::TOP, SegmentDepth::under(1))
            } else {
                (SegmentDepth::under(1), SegmentDepth::TOP)
            };
            visits.insert(at, Visit::new(id, second));
            visits.insert(at, Visit::new(id, first));
            spawned = Some(id);
        }
    }
    Ok(NoisyOutcome {
        diagram,
        failed,
        spawned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{first_nontrivial_undercrossing, select_endpoints};
    use crate::diagram::{parse, validate};

    fn d(text: &str) -> Diagram {
        parse(text).unwrap()
    }

    const PAIR: &str = "mcd 1\ncables 2\ncable 1: X1@+1\ncable 2: X1@-1\norder: 1L 2L 2R 1R\n";
    const OVERHAND: &str =
        "mcd 1\ncables 1\ncable 1: X1@+1 X2@-1 X3@+1 X1@-1 X2@+1 X3@-1\norder: 1L 1R\n";

    #[test]
    fn reidemeister_reorders_endpoints() {
        let dia = d(OVERHAND);
        let sel = select_endpoints(&dia).unwrap();
        let out = apply_reidemeister(&dia, sel).unwrap();
        assert_eq!(out, dia);

        let dia = d("mcd 1\ncables 2\ncable 1:\ncable 2:\norder: 1L 2L 2R 1R\n");
        let sel = EndpointSelection {
            v_r: Endpoint::right(CableId(2)),
            v_l: Endpoint::left(CableId(1)),
        };
        let out = apply_reidemeister(&dia, sel).unwrap();
        let order: Vec<String> = out
            .endpoint_order()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(order, ["1L", "2L", "1R", "2R"]);
    }

    #[test]
    fn stale_selection_rejected() {
        let mut dia = d(PAIR);
        let sel = select_endpoints(&dia).unwrap();
        dia.set_endpoint_order(vec![
            Endpoint::left(CableId(1)),
            Endpoint::left(CableId(2)),
            Endpoint::right(CableId(2)),
        ]);
        assert!(matches!(
            apply_reidemeister(&dia, sel),
            Err(MoveError::StaleEndpoint(_))
        ));
    }

    #[test]
    fn node_deletion_on_pair_is_refused_as_trivial() {
        let dia = d(PAIR);
        let t = NodeDeletionTarget {
            crossing: CrossingId(1),
            hold: SegmentRef {
                cable: CableId(1),
                index: 0,
            },
            pull: SegmentRef {
                cable: CableId(2),
                index: 0,
            },
        };
        assert_eq!(
            apply_node_deletion(&dia, t),
            Err(MoveError::TrivialTarget(CrossingId(1)))
        );
    }

    #[test]
    fn node_deletion_on_triple_renormalizes() {
        let dia = d("mcd 1\ncables 3\ncable 1: X1@+1\ncable 2: X1@-1\ncable 3: X1@-2\norder: 1L 2L 3L 1R 2R 3R\n");
        let t = NodeDeletionTarget {
            crossing: CrossingId(1),
            hold: SegmentRef {
                cable: CableId(1),
                index: 0,
            },
            pull: SegmentRef {
                cable: CableId(3),
                index: 0,
            },
        };
        let out = apply_node_deletion(&dia, t).unwrap();
        assert!(validate(&out).is_valid());
        assert_eq!(dia.potential() - out.potential(), 2);
        let c = out.crossing(CrossingId(1)).unwrap();
        assert_eq!(c.depths, vec![SegmentDepth::TOP, SegmentDepth::under(1)]);
    }

    #[test]
    fn node_deletion_checks_roles() {
        let dia = d(OVERHAND);
        let t = first_nontrivial_undercrossing(&dia).unwrap();
        let swapped = NodeDeletionTarget {
            hold: t.pull,
            pull: t.hold,
            ..t
        };
        assert_eq!(
            apply_node_deletion(&dia, swapped),
            Err(MoveError::HoldNotTopmost(t.pull))
        );
        let out = apply_node_deletion(&dia, t).unwrap();
        assert!(validate(&out).is_valid());
        assert_eq!(dia.potential() - out.potential(), 1);
    }

    #[test]
    fn extraction_of_over_cable() {
        let dia = d(PAIR);
        let out = apply_cable_extraction(&dia, CableId(1), Endpoint::left(CableId(2))).unwrap();
        assert!(validate(&out).is_valid());
        assert_eq!(out.potential(), 0);
        assert!(out.terminated().contains(&CableId(1)));
        assert!(out.visits(CableId(2)).unwrap().is_empty());

        let err = apply_cable_extraction(&dia, CableId(1), Endpoint::left(CableId(1)));
        assert!(matches!(err, Err(MoveError::PinOnExtractedCable { .. })));
    }

    #[test]
    fn extraction_requires_semi_disentangled() {
        let dia = d(OVERHAND);
        assert_eq!(
            apply_cable_extraction(&dia, CableId(1), Endpoint::left(CableId(1))),
            Err(MoveError::NotSemiDisentangled(CableId(1)))
        );
        let lone = d("mcd 1\ncables 1\ncable 1:\norder: 1L 1R\n");
        let out = apply_cable_extraction(&lone, CableId(1), Endpoint::left(CableId(1))).unwrap();
        assert!(out.workspace_empty());
        assert!(out.endpoint_order().is_empty());
    }

    #[test]
    fn noise_extremes() {
        let dia = d(OVERHAND);
        let t = first_nontrivial_undercrossing(&dia).unwrap();
        let a = Action::NodeDeletion(t);
        let out = apply_noisy(&dia, &a, &NoiseConfig::new(1.0, 0.0, 3)).unwrap();
        assert!(out.failed);
        assert_eq!(out.diagram, dia);

        let out = apply_noisy(&dia, &a, &NoiseConfig::new(0.0, 0.0, 3)).unwrap();
        assert_eq!(out.diagram, apply(&dia, &a).unwrap());

        let out = apply_noisy(&dia, &Action::Done, &NoiseConfig::new(0.0, 1.0, 3)).unwrap();
        assert_eq!(out.diagram.potential(), dia.potential() + 1);
        assert!(validate(&out.diagram).is_valid());
        let id = out.spawned.unwrap();
        assert!(classify_trivial(&out.diagram).trivial.contains(&id));
    }

    #[test]
    fn noise_is_reproducible() {
        let dia = d(OVERHAND);
        let cfg = NoiseConfig::new(0.5, 0.5, 99);
        let a = apply_noisy(&dia, &Action::Done, &cfg).unwrap();
        let b = apply_noisy(&dia, &Action::Done, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn action_flags() {
        let a = Action::CableExtraction {
            cable: CableId(1),
            pin: Endpoint::left(CableId(2)),
        };
        assert_eq!(a.pin_grasp_flag(), 0);
        assert!(a.is_disentangling());
        assert_eq!(a.targets(), "cable=1,pin=2L");
        assert_eq!(Action::Done.kind(), ActionKind::Done);
    }
}
