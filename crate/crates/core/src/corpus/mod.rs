//! Knot generators, random instances, the golden corpus and a brute-force
//! oracle.

pub mod oracle;
pub mod random;
pub mod weave;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::diagram::{parse, CableId, CrossingId, Diagram, SegmentDepth, Visit};
use crate::planner::BenchCase;
use weave::{Gen, Weave};

pub use oracle::{bfs_solve, OracleResult, Reachability};
pub use random::generate_random;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KnotName {
    Twist,
    Braid3,
    Square,
    Carrick,
    SheetBend,
    Overhand2,
    Crown,
    Fisherman,
    Square3,
    Carrick3,
    Sheet3,
    Random,
}

impl KnotName {
    pub const ALL: [KnotName; 12] = [
        KnotName::Twist,
        KnotName::Braid3,
        KnotName::Square,
        KnotName::Carrick,
        KnotName::SheetBend,
        KnotName::Overhand2,
        KnotName::Crown,
        KnotName::Fisherman,
        KnotName::Square3,
        KnotName::Carrick3,
        KnotName::Sheet3,
        KnotName::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KnotName::Twist => "twist",
            KnotName::Braid3 => "braid3",
            KnotName::Square => "square",
            KnotName::Carrick => "carrick",
            KnotName::SheetBend => "sheet_bend",
            KnotName::Overhand2 => "overhand2",
            KnotName::Crown => "crown",
            KnotName::Fisherman => "fisherman",
            KnotName::Square3 => "square3",
            KnotName::Carrick3 => "carrick3",
            KnotName::Sheet3 => "sheet3",
            KnotName::Random => "random",
        }
    }
}

impl fmt::Display for KnotName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown knot class `{0}`")]
    UnknownName(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("corpus directory {0}: {1}")]
    Io(PathBuf, String),
    #[error("corpus file {0}: {1}")]
    BadFile(PathBuf, String),
}

impl FromStr for KnotName {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        KnotName::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownName(s.to_string()))
    }
}

/// A generator request. Fields not used by a class are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KnotSpec {
    pub name: KnotName,
    /// Twist count for `twist`, periods for `braid3`.
    pub n: u32,
    /// Trivial monogons padded onto the core.
    pub slack: u32,
    pub seed: u64,
    pub cables: u32,
    pub crossings: u32,
}

impl KnotSpec {
    pub fn named(name: KnotName) -> Self {
        KnotSpec {
            name,
            n: 2,
            slack: 0,
            seed: 0,
            cables: 2,
            crossings: 4,
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn with_slack(mut self, slack: u32) -> Self {
        self.slack = slack;
        self
    }

    pub fn random(seed: u64, cables: u32, crossings: u32) -> Self {
        KnotSpec {
            seed,
            cables,
            crossings,
            ..KnotSpec::named(KnotName::Random)
        }
    }

    pub fn tier(&self) -> u8 {
        match self.name {
            KnotName::Twist | KnotName::Square | KnotName::Carrick | KnotName::SheetBend => 1,
            KnotName::Crown | KnotName::Fisherman | KnotName::Overhand2 => 2,
            KnotName::Square3 | KnotName::Carrick3 | KnotName::Sheet3 | KnotName::Braid3 => 3,
            KnotName::Random if self.cables >= 3 => 3,
            KnotName::Random => 1,
        }
    }

    pub fn params(&self) -> String {
        match self.name {
            KnotName::Twist | KnotName::Braid3 => format!("{}_s{}", self.n, self.slack),
            KnotName::Random => format!("seed{}_c{}_x{}", self.seed, self.cables, self.crossings),
            _ => format!("s{}", self.slack),
        }
    }

    /// `tier<k>_<name>_<params>.mcd`
    pub fn file_name(&self) -> String {
        format!("tier{}_{}_{}.mcd", self.tier(), self.name, self.params())
    }
}

fn sigmas(idx: &[usize]) -> Vec<Gen> {
    idx.iter().map(|&i| Gen::alt(i)).collect()
}

fn triple(i: usize) -> Gen {
    Gen::Triple {
        i,
        ranks: [1, 3, 2],
    }
}

/// Two-cable layout: a cap between the middle positions on each side.
fn plat4(word: Vec<Gen>) -> Weave {
    Weave::new(4, vec![1], vec![1], word)
}

/// Three-cable layout: one cap on the left, two on the right.
fn plat6(word: Vec<Gen>) -> Weave {
    Weave::new(6, vec![1], vec![1, 3], word)
}

fn core(spec: &KnotSpec) -> Result<Diagram, CorpusError> {
    let w = match spec.name {
        KnotName::Twist => {
            if spec.n == 0 {
                return Err(CorpusError::InvalidParams("twist needs n >= 1".into()));
            }
            Weave::new(2, vec![], vec![], vec![Gen::alt(0); spec.n as usize])
        }
        KnotName::Braid3 => {
            if spec.n == 0 {
                return Err(CorpusError::InvalidParams("braid3 needs n >= 1".into()));
            }
            Weave::new(3, vec![], vec![], sigmas(&[0, 1].repeat(spec.n as usize)))
        }
        KnotName::SheetBend => plat4(sigmas(&[0, 2, 0, 1, 2])),
        KnotName::Square => plat4(sigmas(&[0, 1, 2, 2, 0, 0])),
        KnotName::Carrick => plat4(sigmas(&[2, 1, 0, 1, 2, 0, 0, 2])),
        KnotName::Crown => plat4(sigmas(&[0, 0, 1, 0, 0, 2, 0, 1, 2])),
        KnotName::Fisherman => plat4(sigmas(&[2, 0, 1, 1, 0, 1, 2, 2, 0, 2])),
        KnotName::Overhand2 => return Ok(overhand2()),
        KnotName::Sheet3 => {
            let mut w = sigmas(&[2, 0, 1, 0, 1, 1, 0]);
            w[1] = triple(3);
            plat6(w)
        }
        KnotName::Square3 => {
            let mut w = sigmas(&[2, 0, 4, 0, 3, 0, 2, 4]);
            w[1] = triple(2);
            plat6(w)
        }
        KnotName::Carrick3 => {
            let mut w = sigmas(&[0, 4, 4, 1, 0, 4, 4, 0, 4]);
            w[0] = triple(2);
            plat6(w)
        }
        KnotName::Random => {
            if spec.cables == 0 {
                return Err(CorpusError::InvalidParams(
                    "random needs at least one cable".into(),
                ));
            }
            return Ok(generate_random(spec.seed, spec.cables, spec.crossings));
        }
    };
    w.build()
        .map_err(|e| CorpusError::InvalidParams(e.to_string()))
}

/// A single cable tied in a trefoil, doubled into two parallel cables. Each
/// crossing of the trefoil becomes four.
fn overhand2() -> Diagram {
    // Trefoil passes: (crossing, over?) in order along the cable.
    const PASSES: [(usize, bool); 6] = [
        (0, true),
        (1, false),
        (2, true),
        (0, false),
        (1, true),
        (2, false),
    ];
    let id =
        |i: usize, over: usize, under: usize| CrossingId((4 * i + 2 * over + under + 1) as u32);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, over) in PASSES {
        if over {
            a.push(Visit::new(id(i, 0, 0), SegmentDepth::TOP));
            a.push(Visit::new(id(i, 0, 1), SegmentDepth::TOP));
            b.push(Visit::new(id(i, 1, 0), SegmentDepth::TOP));
            b.push(Visit::new(id(i, 1, 1), SegmentDepth::TOP));
        } else {
            a.push(Visit::new(id(i, 1, 0), SegmentDepth::under(1)));
            a.push(Visit::new(id(i, 0, 0), SegmentDepth::under(1)));
            b.push(Visit::new(id(i, 1, 1), SegmentDepth::under(1)));
            b.push(Visit::new(id(i, 0, 1), SegmentDepth::under(1)));
        }
    }
    let (c1, c2) = (CableId(1), CableId(2));
    use crate::diagram::Endpoint;
    Diagram::from_parts(
        [(c1, a), (c2, b)].into_iter().collect(),
        vec![
            Endpoint::left(c1),
            Endpoint::left(c2),
            Endpoint::right(c2),
            Endpoint::right(c1),
        ],
        Default::default(),
    )
}

/// Pad with `slack` monogons, alternately at the front and back of cables
/// taken in id order.
fn pad(mut d: Diagram, slack: u32) -> Diagram {
    let ids: Vec<CableId> = d.live_cables().collect();
    if ids.is_empty() {
        return d;
    }
    for i in 0..slack as usize {
        let x = d.fresh_crossing_id();
        let loop_ = [
            Visit::new(x, SegmentDepth::TOP),
            Visit::new(x, SegmentDepth::under(1)),
        ];
        let visits = d
            .cables_mut()
            .get_mut(&ids[i % ids.len()])
            .expect("live cable");
        if i % 2 == 0 {
            visits.splice(0..0, loop_);
        } else {
            visits.extend(loop_);
        }
    }
    d
}

pub fn generate(spec: &KnotSpec) -> Result<Diagram, CorpusError> {
    Ok(pad(core(spec)?, spec.slack))
}

/// Every (class, params) pair frozen in the golden corpus.
pub fn golden_specs() -> Vec<KnotSpec> {
    let mut v = Vec::new();
    for slack in [0, 2] {
        for n in 2..=6 {
            v.push(KnotSpec::named(KnotName::Twist).with_n(n).with_slack(slack));
        }
        v.push(
            KnotSpec::named(KnotName::Braid3)
                .with_n(2)
                .with_slack(slack),
        );
        for name in [
            KnotName::Square,
            KnotName::Carrick,
            KnotName::SheetBend,
            KnotName::Overhand2,
            KnotName::Crown,
            KnotName::Fisherman,
            KnotName::Square3,
            KnotName::Carrick3,
            KnotName::Sheet3,
        ] {
            v.push(KnotSpec::named(name).with_slack(slack));
        }
    }
    v.sort_by_key(|s| (s.tier(), s.file_name()));
    v
}

/// `CABLEGRAPH_CORPUS` if set, otherwise the corpus shipped with the crate.
pub fn corpus_dir() -> PathBuf {
    std::env::var_os("CABLEGRAPH_CORPUS")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus"))
}

fn tier_of(file: &str) -> Option<u8> {
    let rest = file.strip_prefix("tier")?;
    let (k, _) = rest.split_once('_')?;
    k.parse().ok().filter(|t| (1..=3).contains(t))
}

/// Load every `tier<k>_*.mcd` file, sorted by tier then name.
pub fn load_corpus(dir: &Path) -> Result<Vec<BenchCase>, CorpusError> {
    let io = |e: std::io::Error| CorpusError::Io(dir.to_path_buf(), e.to_string());
    let mut cases = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let Some(file) = path.file_name().and_then(|f| f.to_str()) else {
            continue;
        };
        let Some(stem) = file.strip_suffix(".mcd") else {
            continue;
        };
        let Some(tier) = tier_of(stem) else {
            continue;
        };
        let text = std::fs::read_to_string(&path).map_err(io)?;
        let diagram =
            parse(&text).map_err(|e| CorpusError::BadFile(path.clone(), e.to_string()))?;
        cases.push(BenchCase {
            name: stem.to_string(),
            tier,
            diagram,
        });
    }
    if cases.is_empty() {
        return Err(CorpusError::Io(dir.to_path_buf(), "no corpus files".into()));
    }
    cases.sort_by(|a, b| (a.tier, &a.name).cmp(&(b.tier, &b.name)));
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify_trivial, is_semi_disentangled};
    use crate::diagram::{serialize, validate};

    #[test]
    fn minimal_twist() {
        let d = generate(&KnotSpec::named(KnotName::Twist).with_n(1)).unwrap();
        assert_eq!(d.live_cable_count(), 2);
        assert_eq!(d.crossing_count(), 1);
        assert!(!d.crossing(CrossingId(1)).unwrap().is_intra_cable());
    }

    #[test]
    fn overhand2_has_no_free_cable() {
        let d = generate(&KnotSpec::named(KnotName::Overhand2)).unwrap();
        assert!(validate(&d).is_valid(), "{:?}", validate(&d));
        assert_eq!(d.crossing_count(), 12);
        for c in d.live_cables() {
            assert!(!is_semi_disentangled(&d, c).unwrap());
        }
        assert!(classify_trivial(&d).trivial.is_empty());
    }

    #[test]
    fn square3_shape() {
        let d = generate(&KnotSpec::named(KnotName::Square3)).unwrap();
        assert!(validate(&d).is_valid());
        assert_eq!(d.live_cable_count(), 3);
        assert_eq!(d.endpoint_order().len(), 6);
        assert!(d.crossings().values().any(|c| c.arity() == 3));
    }

    #[test]
    fn every_class_generates_valid_diagrams() {
        for name in KnotName::ALL {
            for slack in [0, 3] {
                let d = generate(&KnotSpec::named(name).with_slack(slack)).unwrap();
                assert!(validate(&d).is_valid(), "{name}");
            }
        }
    }

    #[test]
    fn slack_adds_trivial_monogons() {
        let spec = KnotSpec::named(KnotName::Square);
        let bare = generate(&spec).unwrap();
        let padded = generate(&spec.with_slack(2)).unwrap();
        assert_eq!(padded.crossing_count(), bare.crossing_count() + 2);
        let r = classify_trivial(&padded);
        assert_eq!(r.trivial.len(), 2);
        assert_eq!(serialize(&r.reduced), serialize(&bare));
    }

    #[test]
    fn names_and_files() {
        assert_eq!(
            "sheet_bend".parse::<KnotName>().unwrap(),
            KnotName::SheetBend
        );
        assert!("granny".parse::<KnotName>().is_err());
        assert_eq!(
            KnotSpec::named(KnotName::Twist).file_name(),
            "tier1_twist_2_s0.mcd"
        );
        assert_eq!(
            KnotSpec::named(KnotName::Square).file_name(),
            "tier1_square_s0.mcd"
        );
        assert_eq!(
            KnotSpec::named(KnotName::Carrick3)
                .with_slack(2)
                .file_name(),
            "tier3_carrick3_s2.mcd"
        );
        assert_eq!(golden_specs().len(), 30);
    }

    #[test]
    fn bad_params() {
        assert!(generate(&KnotSpec::named(KnotName::Twist).with_n(0)).is_err());
        assert!(generate(&KnotSpec::random(1, 0, 3)).is_err());
    }
}
