//! Internal integer-indexed view of a market instance.
//!
//! Agent ids are interned into dense indices (lexicographic order) and every
//! preference list becomes a rank vector over the opposite side, so the hot
//! loops in verification and enumeration are plain array lookups.

use std::collections::HashMap;

use crate::instance::{AgentId, MarketInstance, Matching, Profile, ScenarioSet, Side};

pub const NOT_RANKED: u32 = u32::MAX;

/// Rank of each opposite-side agent in one list; `NOT_RANKED` for
/// non-neighbors.
pub type RankVec = Vec<u32>;

/// Vote induced by a single rank vector: +1 when the current partner ranks
/// strictly better than the candidate, -1 when strictly worse, 0 on equality.
/// Being unmatched ranks below everything.
pub fn vote_by_rank(r: &RankVec, current: Option<usize>, candidate: Option<usize>) -> i64 {
    let rc = current.map_or(u64::from(NOT_RANKED) + 1, |v| u64::from(r[v]));
    let rn = candidate.map_or(u64::from(NOT_RANKED) + 1, |v| u64::from(r[v]));
    match rc.cmp(&rn) {
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => -1,
    }
}

#[derive(Clone)]
pub struct ProfileRanks {
    pub a: Vec<RankVec>,
    pub b: Vec<RankVec>,
}

pub enum IndexedScen {
    Layers(Vec<ProfileRanks>),
    Independent {
        a: Vec<Vec<RankVec>>,
        b: Vec<Vec<RankVec>>,
    },
    Robust {
        base: ProfileRanks,
        k: u32,
    },
}

pub struct Indexed {
    pub side: Side,
    pub a_ids: Vec<AgentId>,
    pub b_ids: Vec<AgentId>,
    pub a_idx: HashMap<AgentId, usize>,
    pub b_idx: HashMap<AgentId, usize>,
    pub cap: Vec<u32>,
    pub edges: Vec<(usize, usize)>,
    pub scen: IndexedScen,
}

impl Indexed {
    pub fn new(inst: &MarketInstance) -> Indexed {
        let mut a_ids: Vec<AgentId> = inst.agents_a().to_vec();
        a_ids.sort();
        let mut b_ids: Vec<AgentId> = inst.agents_b().to_vec();
        b_ids.sort();
        let a_idx: HashMap<AgentId, usize> = a_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let b_idx: HashMap<AgentId, usize> = b_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let mut edges = Vec::new();
        for (a, b) in inst.edges() {
            edges.push((a_idx[a], b_idx[b]));
        }
        edges.sort_unstable();
        let cap = b_ids.iter().map(|b| inst.capacity(b)).collect();

        let mut out = Indexed {
            side: inst.side(),
            a_ids,
            b_ids,
            a_idx,
            b_idx,
            cap,
            edges,
            scen: IndexedScen::Layers(Vec::new()),
        };
        out.scen = match inst.scenarios() {
            ScenarioSet::Layers(ps) => {
                IndexedScen::Layers(ps.iter().map(|p| out.profile_ranks(p)).collect())
            }
            ScenarioSet::Independent(sets) => {
                let a = out
                    .a_ids
                    .iter()
                    .map(|u| {
                        sets.get(u)
                            .map(|ls| ls.iter().map(|l| out.rank_list(false, l)).collect())
                            .unwrap_or_default()
                    })
                    .collect();
                let b = out
                    .b_ids
                    .iter()
                    .map(|u| {
                        sets.get(u)
                            .map(|ls| ls.iter().map(|l| out.rank_list(true, l)).collect())
                            .unwrap_or_default()
                    })
                    .collect();
                IndexedScen::Independent { a, b }
            }
            ScenarioSet::Robust { base, k } => IndexedScen::Robust {
                base: out.profile_ranks(base),
                k: *k,
            },
        };
        out
    }

    /// Rank vector of one list; `on_b` selects which side's index to use for
    /// the listed partners.
    pub fn rank_list(&self, on_b: bool, list: &[AgentId]) -> RankVec {
        let (idx, n) = if on_b {
            (&self.a_idx, self.a_ids.len())
        } else {
            (&self.b_idx, self.b_ids.len())
        };
        let mut r = vec![NOT_RANKED; n];
        for (pos, v) in list.iter().enumerate() {
            r[idx[v]] = pos as u32;
        }
        r
    }

    pub fn profile_ranks(&self, p: &Profile) -> ProfileRanks {
        let a = self
            .a_ids
            .iter()
            .map(|u| self.rank_list(false, p.ranking(u).unwrap_or(&[])))
            .collect();
        let b = self
            .b_ids
            .iter()
            .map(|u| self.rank_list(true, p.ranking(u).unwrap_or(&[])))
            .collect();
        ProfileRanks { a, b }
    }

    pub fn n_a(&self) -> usize {
        self.a_ids.len()
    }

    pub fn n_b(&self) -> usize {
        self.b_ids.len()
    }

    /// Some realizable list of agent `(on_b, u)` ranks `x` above `y`.
    pub fn may_prefer(&self, on_b: bool, u: usize, x: Option<usize>, y: Option<usize>) -> bool {
        let (x, y) = match (x, y) {
            (None, _) => return false,
            (Some(_), None) => return true,
            (Some(x), Some(y)) => (x, y),
        };
        if x == y {
            return false;
        }
        match &self.scen {
            IndexedScen::Layers(ps) => ps.iter().any(|p| {
                let r = if on_b { &p.b[u] } else { &p.a[u] };
                r[x] < r[y]
            }),
            IndexedScen::Independent { a, b } => {
                let lists = if on_b { &b[u] } else { &a[u] };
                lists.iter().any(|r| r[x] < r[y])
            }
            IndexedScen::Robust { base, k } => {
                let r = if on_b { &base.b[u] } else { &base.a[u] };
                r[x] < r[y] || r[x] - r[y] <= *k
            }
        }
    }

    /// Worst-case vote of `u` for keeping `current` against `candidate`:
    /// -1 if some realizable list prefers the candidate, +1 if every list
    /// prefers the current partner, 0 iff they are identical.
    pub fn vote_star(&self, on_b: bool, u: usize, current: Option<usize>, candidate: Option<usize>) -> i64 {
        if current == candidate {
            0
        } else if self.may_prefer(on_b, u, candidate, current) {
            -1
        } else {
            1
        }
    }

    pub fn matching_to_ids(&self, pairs: &[(usize, usize)]) -> Matching {
        Matching::from_pairs(
            pairs
                .iter()
                .map(|&(i, j)| (self.a_ids[i].clone(), self.b_ids[j].clone())),
        )
    }

    /// Per-A-agent partner array for a matching; `None` when unmatched.
    pub fn a_partners(&self, m: &Matching) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n_a()];
        for (a, b) in m.pairs() {
            out[self.a_idx[a]] = Some(self.b_idx[b]);
        }
        out
    }

    /// Per-B-agent partner array (two-sided markets only).
    pub fn b_partners(&self, m: &Matching) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n_b()];
        for (a, b) in m.pairs() {
            out[self.b_idx[b]] = Some(self.a_idx[a]);
        }
        out
    }
}
