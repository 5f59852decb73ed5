//! Two-sided market algorithms: deferred acceptance, verification of certain
//! and aggregated popularity/dominance, and the solvers for certainly stable,
//! certainly dominant and swap-robust matchings.

mod super_stable;

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::assign::{min_weight_perfect_matching, WeightMatrix};
use crate::indexed::{vote_by_rank, Indexed, IndexedScen};
use crate::instance::{
    may_prefer, swap_up, AgentId, Error, MarketInstance, Matching, PreferenceList, Profile,
    Result, ScenarioSet, ScenarioWitness, Side, Verdict, Witness,
};
use super_stable::PosetMarket;

fn require_two_sided(inst: &MarketInstance) -> Result<()> {
    if inst.side() != Side::TwoSided {
        return Err(Error::Unsupported(
            "operation requires a two-sided market".into(),
        ));
    }
    Ok(())
}

/// Deferred acceptance with the `A` side proposing. Returns the A-optimal
/// stable matching for the given profile; the result does not depend on
/// proposal order.
pub fn gale_shapley(inst: &MarketInstance, profile: &Profile) -> Result<Matching> {
    require_two_sided(inst)?;
    inst.check_profile(profile)?;
    let idx = Indexed::new(inst);
    let prefs_a: Vec<Vec<usize>> = idx
        .a_ids
        .iter()
        .map(|a| {
            profile
                .ranking(a)
                .unwrap_or(&[])
                .iter()
                .map(|b| idx.b_idx[b])
                .collect()
        })
        .collect();
    let rank_b: Vec<Vec<u32>> = idx
        .b_ids
        .iter()
        .map(|b| {
            let mut r = vec![u32::MAX; idx.n_a()];
            for (pos, a) in profile.ranking(b).unwrap_or(&[]).iter().enumerate() {
                r[idx.a_idx[a]] = pos as u32;
            }
            r
        })
        .collect();

    let mut next = vec![0usize; idx.n_a()];
    let mut held: Vec<Option<usize>> = vec![None; idx.n_b()];
    let mut free: std::collections::VecDeque<usize> = (0..idx.n_a()).collect();
    while let Some(a) = free.pop_front() {
        while next[a] < prefs_a[a].len() {
            let b = prefs_a[a][next[a]];
            next[a] += 1;
            match held[b] {
                None => {
                    held[b] = Some(a);
                    break;
                }
                Some(other) => {
                    if rank_b[b][a] < rank_b[b][other] {
                        held[b] = Some(a);
                        free.push_back(other);
                        break;
                    }
                }
            }
        }
    }
    let pairs = held
        .iter()
        .enumerate()
        .filter_map(|(b, a)| a.map(|a| (a, b)));
    Ok(idx.matching_to_ids(&pairs.collect::<Vec<_>>()))
}

/// All edges `(a, b)` where both endpoints strictly prefer each other to
/// their partners under `profile`. Empty iff the matching is stable.
pub fn blocking_edges(
    inst: &MarketInstance,
    profile: &Profile,
    m: &Matching,
) -> Result<BTreeSet<(AgentId, AgentId)>> {
    require_two_sided(inst)?;
    inst.check_profile(profile)?;
    m.validate(inst)?;
    let mut out = BTreeSet::new();
    for (a, b) in inst.edges() {
        if m.contains(a, b) {
            continue;
        }
        let rank = |u: &str, v: Option<&AgentId>| -> u64 {
            v.and_then(|v| profile.rank_of(u, v))
                .map_or(u64::MAX, |r| r as u64)
        };
        let a_wants = (profile.rank_of(a, b).unwrap() as u64) < rank(a, m.partner_of_a(a));
        let b_wants = (profile.rank_of(b, a).unwrap() as u64) < rank(b, m.partner_of_b(b));
        if a_wants && b_wants {
            out.insert((a.clone(), b.clone()));
        }
    }
    Ok(out)
}

/// Worst-case vote of `u` for keeping `current` against `candidate` over all
/// realizable lists: -1 when some list prefers the candidate, +1 when every
/// list prefers the current partner, 0 iff the two coincide.
pub fn worst_case_vote(
    inst: &MarketInstance,
    u: &str,
    current: Option<&str>,
    candidate: Option<&str>,
) -> Result<i8> {
    if may_prefer(inst, u, candidate, current)? {
        Ok(-1)
    } else if current == candidate {
        Ok(0)
    } else {
        Ok(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoSidedCriterion {
    Popular,
    Dominant,
}

/// Verifies certain (or aggregated) popularity or dominance of `m`.
///
/// The check pads both sides to equal size with isolated agents, completes
/// the bipartite graph, weighs each edge with the two endpoint votes against
/// `m` and asks for a minimum-weight perfect matching. A negative minimum
/// disproves popularity; for dominance the weights are additionally scaled
/// by `|m|+1` with 1 subtracted on original edges, so a perfect matching at
/// or below `-(|m|+1)` exposes a larger matching that ties in some scenario.
///
/// Layered scenarios are checked one layer at a time with that layer's exact
/// votes; the other flavors use per-agent worst-case votes. With
/// `aggregated` set, votes are summed over layers (or over each agent's own
/// list set, which must then have one common size) instead.
pub fn verify_two_sided(
    inst: &MarketInstance,
    m: &Matching,
    criterion: TwoSidedCriterion,
    aggregated: bool,
) -> Result<Verdict> {
    require_two_sided(inst)?;
    m.validate(inst)?;
    let idx = Indexed::new(inst);
    let a_of = idx.a_partners(m);
    let b_of = idx.b_partners(m);
    let dominant = criterion == TwoSidedCriterion::Dominant;

    if aggregated {
        let weigh: Box<dyn Fn(usize, bool, Option<usize>) -> i64> = match &idx.scen {
            IndexedScen::Robust { .. } => {
                return Err(Error::Unsupported(
                    "aggregated voting is undefined for the robust flavor".into(),
                ))
            }
            IndexedScen::Layers(ps) => {
                let ps = ps.clone();
                let (a_of, b_of) = (a_of.clone(), b_of.clone());
                Box::new(move |u, on_b, cand| {
                    let cur = if on_b { b_of[u] } else { a_of[u] };
                    ps.iter()
                        .map(|p| {
                            let r = if on_b { &p.b[u] } else { &p.a[u] };
                            vote_by_rank(r, cur, cand)
                        })
                        .sum()
                })
            }
            IndexedScen::Independent { a, b } => {
                let sizes: BTreeSet<usize> =
                    a.iter().chain(b.iter()).map(|ls| ls.len()).collect();
                if sizes.len() > 1 {
                    return Err(Error::Unsupported(
                        "aggregated voting needs the same number of lists per agent".into(),
                    ));
                }
                let (a, b) = (a.clone(), b.clone());
                let (a_of, b_of) = (a_of.clone(), b_of.clone());
                Box::new(move |u, on_b, cand| {
                    let cur = if on_b { b_of[u] } else { a_of[u] };
                    let lists = if on_b { &b[u] } else { &a[u] };
                    lists.iter().map(|r| vote_by_rank(r, cur, cand)).sum()
                })
            }
        };
        let fail = min_weight_failure(&idx, &*weigh, dominant, m.len());
        return Ok(match fail {
            None => Verdict::pass(),
            Some(n) => Verdict::fail(Witness::Matching(idx.matching_to_ids(&n)), None),
        });
    }

    if let IndexedScen::Layers(ps) = &idx.scen {
        // Certain popularity across layers is popularity in each layer.
        for (layer, p) in ps.iter().enumerate() {
            let p = p.clone();
            let (a_of2, b_of2) = (a_of.clone(), b_of.clone());
            let weigh = move |u: usize, on_b: bool, cand: Option<usize>| {
                let cur = if on_b { b_of2[u] } else { a_of2[u] };
                let r = if on_b { &p.b[u] } else { &p.a[u] };
                vote_by_rank(r, cur, cand)
            };
            if let Some(n) = min_weight_failure(&idx, &weigh, dominant, m.len()) {
                return Ok(Verdict::fail(
                    Witness::Matching(idx.matching_to_ids(&n)),
                    Some(ScenarioWitness::Layer(layer)),
                ));
            }
        }
        return Ok(Verdict::pass());
    }

    let (a_of2, b_of2) = (a_of.clone(), b_of.clone());
    let idx_ref = &idx;
    let weigh = move |u: usize, on_b: bool, cand: Option<usize>| {
        let cur = if on_b { b_of2[u] } else { a_of2[u] };
        idx_ref.vote_star(on_b, u, cur, cand)
    };
    match min_weight_failure(&idx, &weigh, dominant, m.len()) {
        None => Ok(Verdict::pass()),
        Some(n) => {
            let scenario = witness_profile(inst, &idx, &a_of, &b_of, &n);
            Ok(Verdict::fail(
                Witness::Matching(idx.matching_to_ids(&n)),
                Some(ScenarioWitness::Profile(scenario)),
            ))
        }
    }
}

/// Runs the padded minimum-weight perfect-matching check; returns the
/// offending matching (restricted to real edges) or `None` when the
/// criterion holds.
fn min_weight_failure(
    idx: &Indexed,
    weigh: &dyn Fn(usize, bool, Option<usize>) -> i64,
    dominant: bool,
    m_len: usize,
) -> Option<Vec<(usize, usize)>> {
    let n = idx.n_a().max(idx.n_b());
    if n == 0 {
        return None;
    }
    let mut is_edge = vec![vec![false; n]; n];
    for &(i, j) in &idx.edges {
        is_edge[i][j] = true;
    }
    let weight = |i: usize, j: usize| -> i64 {
        if i < idx.n_a() && j < idx.n_b() && is_edge[i][j] {
            weigh(i, false, Some(j)) + weigh(j, true, Some(i))
        } else {
            // Missing edges compare each endpoint to being unmatched;
            // padding agents vote 0.
            let wa = if i < idx.n_a() { weigh(i, false, None) } else { 0 };
            let wb = if j < idx.n_b() { weigh(j, true, None) } else { 0 };
            wa + wb
        }
    };
    let extract = |assignment: &[usize]| -> Vec<(usize, usize)> {
        assignment
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i < idx.n_a() && j < idx.n_b() && is_edge[i][j])
            .map(|(i, &j)| (i, j))
            .collect()
    };

    let w: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| weight(i, j)).collect())
        .collect();
    let matrix = WeightMatrix::new(w.clone()).expect("square by construction");
    let (assignment, total) = min_weight_perfect_matching(&matrix);
    if total < 0 {
        return Some(extract(&assignment));
    }
    if dominant {
        let d = m_len as i64 + 1;
        let scaled: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let real = i < idx.n_a() && j < idx.n_b() && is_edge[i][j];
                        d * w[i][j] - i64::from(real)
                    })
                    .collect()
            })
            .collect();
        let matrix = WeightMatrix::new(scaled).expect("square by construction");
        let (assignment, total) = min_weight_perfect_matching(&matrix);
        if total <= -d {
            return Some(extract(&assignment));
        }
    }
    None
}

/// Builds a realizable profile under which the witness matching actually
/// beats (or ties) `m`: each agent picks a list realizing its worst-case
/// vote.
fn witness_profile(
    inst: &MarketInstance,
    idx: &Indexed,
    a_of: &[Option<usize>],
    b_of: &[Option<usize>],
    n: &[(usize, usize)],
) -> Profile {
    let mut n_a_of: Vec<Option<usize>> = vec![None; idx.n_a()];
    let mut n_b_of: Vec<Option<usize>> = vec![None; idx.n_b()];
    for &(i, j) in n {
        n_a_of[i] = Some(j);
        n_b_of[j] = Some(i);
    }
    let mut out = BTreeMap::new();
    for (i, a) in idx.a_ids.iter().enumerate() {
        out.insert(
            a.clone(),
            pick_list(inst, idx, false, i, a_of[i], n_a_of[i]),
        );
    }
    for (j, b) in idx.b_ids.iter().enumerate() {
        out.insert(
            b.clone(),
            pick_list(inst, idx, true, j, b_of[j], n_b_of[j]),
        );
    }
    Profile(out)
}

/// A list of `u` under which the candidate partner beats the current one, if
/// any list does; otherwise the first list.
fn pick_list(
    inst: &MarketInstance,
    idx: &Indexed,
    on_b: bool,
    u: usize,
    current: Option<usize>,
    candidate: Option<usize>,
) -> Vec<AgentId> {
    let id = if on_b { &idx.b_ids[u] } else { &idx.a_ids[u] };
    match inst.scenarios() {
        ScenarioSet::Layers(_) => unreachable!("layered scenarios use layer witnesses"),
        ScenarioSet::Independent(sets) => {
            let lists = &sets[id];
            let to_idx = |v: &AgentId| {
                if on_b {
                    idx.a_idx[v]
                } else {
                    idx.b_idx[v]
                }
            };
            if let (Some(cur), Some(cand)) = (current, candidate) {
                for l in lists {
                    let pc = l.iter().position(|v| to_idx(v) == cand);
                    let pm = l.iter().position(|v| to_idx(v) == cur);
                    if pc < pm {
                        return l.clone();
                    }
                }
            } else if current.is_none() && candidate.is_some() {
                return lists[0].clone();
            }
            lists[0].clone()
        }
        ScenarioSet::Robust { base, k } => {
            let base_list = PreferenceList::new(id.clone(), base.ranking(id).unwrap().to_vec());
            if let (Some(cur), Some(cand)) = (current, candidate) {
                let cand_id = if on_b {
                    &idx.a_ids[cand]
                } else {
                    &idx.b_ids[cand]
                };
                let lifted = swap_up(&base_list, cand_id, *k).expect("candidate is ranked");
                let pc = lifted.rank_of(cand_id);
                let cur_id = if on_b { &idx.a_ids[cur] } else { &idx.b_ids[cur] };
                if pc < lifted.rank_of(cur_id) {
                    return lifted.ranking;
                }
            }
            base_list.ranking
        }
    }
}

// ---------------------------------------------------------------------------
// Duplication: dominant matchings through stable matchings
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CopyKind {
    X,
    Y,
}

/// One of the two parallel copies of a base edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeCopy {
    pub kind: CopyKind,
    pub a: AgentId,
    pub b: AgentId,
}

impl std::fmt::Display for EdgeCopy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match self.kind {
            CopyKind::X => "x",
            CopyKind::Y => "y",
        };
        write!(f, "{k}({},{})", self.a, self.b)
    }
}

/// The instance obtained by doubling every edge into an `x` and a `y` copy.
/// The `A` side ranks all `x` copies (in base order) before all `y` copies;
/// the `B` side ranks the `y` copies first. Each original possible list maps
/// to exactly one transformed list.
#[derive(Debug, Clone)]
pub struct DuplicatedInstance {
    pub base: MarketInstance,
    pub lists_a: BTreeMap<AgentId, Vec<Vec<EdgeCopy>>>,
    pub lists_b: BTreeMap<AgentId, Vec<Vec<EdgeCopy>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DuplicatedMatching(pub BTreeSet<EdgeCopy>);

/// Possible lists per agent, normalizing every accepted flavor to a set.
fn independent_sets(inst: &MarketInstance) -> Result<BTreeMap<AgentId, Vec<Vec<AgentId>>>> {
    match inst.scenarios() {
        ScenarioSet::Independent(sets) => Ok(sets.clone()),
        ScenarioSet::Layers(_) => {
            if inst.single_profile().is_some() {
                let ScenarioSet::Independent(sets) = inst.to_independent()?.scenarios().clone()
                else {
                    unreachable!()
                };
                Ok(sets)
            } else {
                Err(Error::Unsupported(
                    "duplication requires independent list sets or a single profile".into(),
                ))
            }
        }
        ScenarioSet::Robust { base, k } => {
            if *k == 0 {
                Ok(base
                    .0
                    .iter()
                    .map(|(u, l)| (u.clone(), vec![l.clone()]))
                    .collect())
            } else {
                Err(Error::Unsupported(
                    "convert robust instances to independent sets before duplicating".into(),
                ))
            }
        }
    }
}

/// Builds the two-copies-per-edge instance used to reduce dominant matchings
/// to stable ones.
pub fn duplicate_instance(inst: &MarketInstance) -> Result<DuplicatedInstance> {
    require_two_sided(inst)?;
    let sets = independent_sets(inst)?;
    let mut lists_a = BTreeMap::new();
    for a in inst.agents_a() {
        let transformed = sets[a]
            .iter()
            .map(|l| {
                let x = l.iter().map(|b| EdgeCopy {
                    kind: CopyKind::X,
                    a: a.clone(),
                    b: b.clone(),
                });
                let y = l.iter().map(|b| EdgeCopy {
                    kind: CopyKind::Y,
                    a: a.clone(),
                    b: b.clone(),
                });
                x.chain(y).collect()
            })
            .collect();
        lists_a.insert(a.clone(), transformed);
    }
    let mut lists_b = BTreeMap::new();
    for b in inst.agents_b() {
        let transformed = sets[b]
            .iter()
            .map(|l| {
                let y = l.iter().map(|a| EdgeCopy {
                    kind: CopyKind::Y,
                    a: a.clone(),
                    b: b.clone(),
                });
                let x = l.iter().map(|a| EdgeCopy {
                    kind: CopyKind::X,
                    a: a.clone(),
                    b: b.clone(),
                });
                y.chain(x).collect()
            })
            .collect();
        lists_b.insert(b.clone(), transformed);
    }
    Ok(DuplicatedInstance {
        base: inst.clone(),
        lists_a,
        lists_b,
    })
}

/// Collapses a matching of the duplicated instance back to base edges.
pub fn project_matching(m: &DuplicatedMatching) -> Matching {
    Matching::from_pairs(m.0.iter().map(|c| (c.a.clone(), c.b.clone())))
}

impl DuplicatedInstance {
    fn market(&self) -> PosetMarket {
        let idx = Indexed::new(&self.base);
        // Slots 2e and 2e+1 are the x and y copies of base edge e.
        let endpoints: Vec<(u32, u32)> = idx
            .edges
            .iter()
            .flat_map(|&(i, j)| [(i as u32, j as u32), (i as u32, j as u32)])
            .collect();
        let mut market = PosetMarket::new(idx.n_a(), idx.n_b(), &endpoints);
        let slot_of = |e: usize, kind: CopyKind| match kind {
            CopyKind::X => 2 * e,
            CopyKind::Y => 2 * e + 1,
        };
        let edge_pos: std::collections::HashMap<(usize, usize), usize> = idx
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(i, j))| ((i, j), e))
            .collect();
        for (a, lists) in &self.lists_a {
            let i = idx.a_idx[a];
            for list in lists {
                let mut rank = vec![u32::MAX; market.a_slots[i].len()];
                for (pos, c) in list.iter().enumerate() {
                    let e = edge_pos[&(i, idx.b_idx[&c.b])];
                    let s = slot_of(e, c.kind);
                    rank[market.local_a[s] as usize] = pos as u32;
                }
                market.ranks_a[i].push(rank);
            }
        }
        for (b, lists) in &self.lists_b {
            let j = idx.b_idx[b];
            for list in lists {
                let mut rank = vec![u32::MAX; market.b_slots[j].len()];
                for (pos, c) in list.iter().enumerate() {
                    let e = edge_pos[&(idx.a_idx[&c.a], j)];
                    let s = slot_of(e, c.kind);
                    rank[market.local_b[s] as usize] = pos as u32;
                }
                market.ranks_b[j].push(rank);
            }
        }
        market
    }

    /// A matching of the duplicated instance that is stable under every
    /// realizable profile, when one exists.
    pub fn certainly_stable(&self) -> Option<DuplicatedMatching> {
        let idx = Indexed::new(&self.base);
        let market = self.market();
        let chosen = market.solve()?;
        let copies = chosen
            .iter()
            .map(|&s| {
                let e = (s / 2) as usize;
                let (i, j) = idx.edges[e];
                EdgeCopy {
                    kind: if s % 2 == 0 { CopyKind::X } else { CopyKind::Y },
                    a: idx.a_ids[i].clone(),
                    b: idx.b_ids[j].clone(),
                }
            })
            .collect();
        Some(DuplicatedMatching(copies))
    }
}

/// A matching with no edge that both endpoints might prefer to their
/// partners under any realizable profile, or `None` when no such matching
/// exists. Requires independent list sets; list choices being independent,
/// an edge blocks in some profile exactly when both endpoints may prefer it.
pub fn certainly_stable(inst: &MarketInstance) -> Result<Option<Matching>> {
    require_two_sided(inst)?;
    let ScenarioSet::Independent(sets) = inst.scenarios() else {
        return Err(Error::Unsupported(
            "certainly-stable requires independent list sets".into(),
        ));
    };
    let idx = Indexed::new(inst);
    let endpoints: Vec<(u32, u32)> = idx
        .edges
        .iter()
        .map(|&(i, j)| (i as u32, j as u32))
        .collect();
    let mut market = PosetMarket::new(idx.n_a(), idx.n_b(), &endpoints);
    let edge_pos: std::collections::HashMap<(usize, usize), usize> = idx
        .edges
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| ((i, j), e))
        .collect();
    for (i, a) in idx.a_ids.iter().enumerate() {
        for list in &sets[a] {
            let mut rank = vec![u32::MAX; market.a_slots[i].len()];
            for (pos, b) in list.iter().enumerate() {
                let s = edge_pos[&(i, idx.b_idx[b])];
                rank[market.local_a[s] as usize] = pos as u32;
            }
            market.ranks_a[i].push(rank);
        }
    }
    for (j, b) in idx.b_ids.iter().enumerate() {
        for list in &sets[b] {
            let mut rank = vec![u32::MAX; market.b_slots[j].len()];
            for (pos, a) in list.iter().enumerate() {
                let s = edge_pos[&(idx.a_idx[a], j)];
                rank[market.local_b[s] as usize] = pos as u32;
            }
            market.ranks_b[j].push(rank);
        }
    }
    Ok(market.solve().map(|chosen| {
        idx.matching_to_ids(
            &chosen
                .iter()
                .map(|&s| idx.edges[s as usize])
                .collect::<Vec<_>>(),
        )
    }))
}

/// A matching that is dominant under every realizable profile: solved by
/// finding a certainly stable matching of the duplicated instance and
/// projecting it back. Absence of the latter implies absence of the former.
pub fn certainly_dominant(inst: &MarketInstance) -> Result<Option<Matching>> {
    require_two_sided(inst)?;
    if !matches!(inst.scenarios(), ScenarioSet::Independent(_)) {
        return Err(Error::Unsupported(
            "certainly-dominant requires independent list sets".into(),
        ));
    }
    let dup = duplicate_instance(inst)?;
    Ok(dup.certainly_stable().map(|m| project_matching(&m)))
}

/// Rewrites a robust scenario as independent list sets: for each agent `u`
/// and each acceptable partner `v`, the list obtained from the base by
/// swapping `v` up `k` places. These lists realize every pairwise preference
/// reachable within the swap budget.
pub fn robust_to_uncertain(inst: &MarketInstance) -> Result<MarketInstance> {
    let ScenarioSet::Robust { base, k } = inst.scenarios() else {
        return Err(Error::Unsupported(
            "robust-to-uncertain requires the robust flavor".into(),
        ));
    };
    let mut sets = BTreeMap::new();
    for (u, ranking) in &base.0 {
        let list = PreferenceList::new(u.clone(), ranking.clone());
        let mut lifted: Vec<Vec<AgentId>> = Vec::new();
        if ranking.is_empty() {
            lifted.push(Vec::new());
        }
        for v in ranking {
            let l = swap_up(&list, v, *k)?.ranking;
            if !lifted.contains(&l) {
                lifted.push(l);
            }
        }
        sets.insert(u.clone(), lifted);
    }
    inst.with_scenarios(ScenarioSet::Independent(sets))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobustTarget {
    Stable,
    Dominant,
}

/// Finds a matching that stays stable (or dominant) under every profile
/// within per-agent swap distance `k` of the base profile.
pub fn solve_robust_two_sided(
    inst: &MarketInstance,
    target: RobustTarget,
) -> Result<Option<Matching>> {
    require_two_sided(inst)?;
    let uncertain = robust_to_uncertain(inst)?;
    match target {
        RobustTarget::Stable => certainly_stable(&uncertain),
        RobustTarget::Dominant => certainly_dominant(&uncertain),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    fn profile(entries: &[(&str, &[&str])]) -> Profile {
        Profile(
            entries
                .iter()
                .map(|(u, l)| (u.to_string(), l.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
    }

    fn two_by_two() -> (MarketInstance, Profile) {
        let p = profile(&[
            ("a1", &["b1", "b2"]),
            ("a2", &["b1", "b2"]),
            ("b1", &["a2", "a1"]),
            ("b2", &["a1", "a2"]),
        ]);
        let inst = MarketInstance::two_sided(
            vec!["a1".into(), "a2".into()],
            vec!["b1".into(), "b2".into()],
            ScenarioSet::Layers(vec![p.clone()]),
        )
        .unwrap();
        (inst, p)
    }

    fn one_edge() -> (MarketInstance, Profile) {
        let p = profile(&[("a", &["b"]), ("b", &["a"])]);
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b".into()],
            ScenarioSet::Layers(vec![p.clone()]),
        )
        .unwrap();
        (inst, p)
    }

    fn pairs(m: &Matching) -> Vec<(String, String)> {
        m.pairs().cloned().collect()
    }

    #[test]
    fn gale_shapley_is_a_optimal() {
        let (inst, p) = two_by_two();
        let m = gale_shapley(&inst, &p).unwrap();
        assert_eq!(
            pairs(&m),
            vec![
                ("a1".to_string(), "b2".to_string()),
                ("a2".to_string(), "b1".to_string())
            ]
        );
    }

    #[test]
    fn gale_shapley_trivial_cases() {
        let (inst, p) = one_edge();
        assert_eq!(gale_shapley(&inst, &p).unwrap().len(), 1);

        let p = profile(&[("a", &[]), ("b", &[])]);
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b".into()],
            ScenarioSet::Layers(vec![p.clone()]),
        )
        .unwrap();
        assert!(gale_shapley(&inst, &p).unwrap().is_empty());
    }

    #[test]
    fn blocking_edges_examples() {
        let (inst, p) = two_by_two();
        let gs = gale_shapley(&inst, &p).unwrap();
        assert!(blocking_edges(&inst, &p, &gs).unwrap().is_empty());

        let (inst1, p1) = one_edge();
        let blocks = blocking_edges(&inst1, &p1, &Matching::new()).unwrap();
        assert_eq!(blocks.len(), 1);

        let m = Matching::from_pairs([
            ("a1".to_string(), "b1".to_string()),
            ("a2".to_string(), "b2".to_string()),
        ]);
        let blocks = blocking_edges(&inst, &p, &m).unwrap();
        assert_eq!(
            blocks.into_iter().collect::<Vec<_>>(),
            vec![("a2".to_string(), "b1".to_string())]
        );
    }

    #[test]
    fn worst_case_vote_examples() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a"}],
            "agents_b": [{"id": "b1"}, {"id": "b2"}, {"id": "b3"}],
            "scenario": {"type": "robust", "k": 1, "profile": {
                "a": ["b1", "b2", "b3"], "b1": ["a"], "b2": ["a"], "b3": ["a"]
            }}
        }"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(worst_case_vote(&inst, "a", Some("b1"), None).unwrap(), 1);
        assert_eq!(worst_case_vote(&inst, "a", Some("b2"), Some("b2")).unwrap(), 0);
        assert_eq!(worst_case_vote(&inst, "a", Some("b3"), Some("b2")).unwrap(), -1);
    }

    #[test]
    fn verify_one_edge_cases() {
        let (inst, _) = one_edge();
        let v = verify_two_sided(&inst, &Matching::new(), TwoSidedCriterion::Popular, false)
            .unwrap();
        assert!(!v.holds);
        match v.witness.unwrap() {
            Witness::Matching(n) => assert_eq!(n.len(), 1),
            w => panic!("unexpected witness {w:?}"),
        }

        let m = Matching::from_pairs([("a".to_string(), "b".to_string())]);
        for aggregated in [false, true] {
            for crit in [TwoSidedCriterion::Popular, TwoSidedCriterion::Dominant] {
                let v = verify_two_sided(&inst, &m, crit, aggregated).unwrap();
                assert!(v.holds, "crit={crit:?} aggregated={aggregated}");
            }
        }
    }

    #[test]
    fn verify_rejects_aggregated_robust() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a"}],
            "agents_b": [{"id": "b"}],
            "scenario": {"type": "robust", "k": 1, "profile": {"a": ["b"], "b": ["a"]}}
        }"#;
        let inst = parse_instance(text).unwrap();
        let m = Matching::from_pairs([("a".to_string(), "b".to_string())]);
        assert!(matches!(
            verify_two_sided(&inst, &m, TwoSidedCriterion::Popular, true),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn duplicate_transforms_lists() {
        let sets: BTreeMap<AgentId, Vec<Vec<AgentId>>> = [
            ("a".to_string(), vec![vec!["b1".to_string(), "b2".to_string()]]),
            ("b1".to_string(), vec![vec!["a".to_string()]]),
            ("b2".to_string(), vec![vec!["a".to_string()]]),
        ]
        .into();
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b1".into(), "b2".into()],
            ScenarioSet::Independent(sets),
        )
        .unwrap();
        let dup = duplicate_instance(&inst).unwrap();
        let rendered: Vec<String> = dup.lists_a["a"][0].iter().map(|c| c.to_string()).collect();
        assert_eq!(rendered, vec!["x(a,b1)", "x(a,b2)", "y(a,b1)", "y(a,b2)"]);
        let rendered: Vec<String> = dup.lists_b["b1"][0].iter().map(|c| c.to_string()).collect();
        assert_eq!(rendered, vec!["y(a,b1)", "x(a,b1)"]);
    }

    #[test]
    fn duplicate_preserves_list_counts() {
        let sets: BTreeMap<AgentId, Vec<Vec<AgentId>>> = [
            (
                "a".to_string(),
                vec![
                    vec!["b1".to_string(), "b2".to_string()],
                    vec!["b2".to_string(), "b1".to_string()],
                ],
            ),
            ("b1".to_string(), vec![vec!["a".to_string()]]),
            ("b2".to_string(), vec![vec!["a".to_string()]]),
        ]
        .into();
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b1".into(), "b2".into()],
            ScenarioSet::Independent(sets),
        )
        .unwrap();
        let dup = duplicate_instance(&inst).unwrap();
        assert_eq!(dup.lists_a["a"].len(), 2);
    }

    #[test]
    fn duplicate_rejects_multi_layer() {
        let p1 = profile(&[("a", &["b"]), ("b", &["a"])]);
        let mut p2 = p1.clone();
        p2.0.insert("a".into(), vec!["b".into()]);
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b".into()],
            ScenarioSet::Layers(vec![
                profile(&[("a", &["b"]), ("b", &["a"])]),
                profile(&[("a", &["b"]), ("b", &["a"])]),
            ]),
        )
        .unwrap();
        // Two identical layers are still a single profile, so this passes.
        assert!(duplicate_instance(&inst).is_ok());
        let _ = (p1, p2);
    }

    #[test]
    fn project_matching_examples() {
        let copy = EdgeCopy {
            kind: CopyKind::X,
            a: "a".into(),
            b: "b".into(),
        };
        let m = DuplicatedMatching([copy].into_iter().collect());
        assert_eq!(project_matching(&m).len(), 1);
        assert!(project_matching(&DuplicatedMatching::default()).is_empty());
    }

    fn independent(inst_sets: &[(&str, &[&[&str]])], a: &[&str], b: &[&str]) -> MarketInstance {
        let sets: BTreeMap<AgentId, Vec<Vec<AgentId>>> = inst_sets
            .iter()
            .map(|(u, ls)| {
                (
                    u.to_string(),
                    ls.iter()
                        .map(|l| l.iter().map(|s| s.to_string()).collect())
                        .collect(),
                )
            })
            .collect();
        MarketInstance::two_sided(
            a.iter().map(|s| s.to_string()).collect(),
            b.iter().map(|s| s.to_string()).collect(),
            ScenarioSet::Independent(sets),
        )
        .unwrap()
    }

    #[test]
    fn certainly_stable_with_fixed_lists_exists() {
        let inst = independent(
            &[
                ("a1", &[&["b1", "b2"]]),
                ("a2", &[&["b1", "b2"]]),
                ("b1", &[&["a2", "a1"]]),
                ("b2", &[&["a1", "a2"]]),
            ],
            &["a1", "a2"],
            &["b1", "b2"],
        );
        let m = certainly_stable(&inst).unwrap().unwrap();
        assert_eq!(m.len(), 2);
        // With singleton list sets this is plain stability.
        let p = inst.single_profile().unwrap();
        assert!(blocking_edges(&inst, &p, &m).unwrap().is_empty());
    }

    #[test]
    fn mutually_exclusive_pair_is_always_matched() {
        let inst = independent(
            &[
                ("a", &[&["b"]]),
                ("b", &[&["a"]]),
            ],
            &["a"],
            &["b"],
        );
        let m = certainly_stable(&inst).unwrap().unwrap();
        assert_eq!(m.len(), 1);
        let d = certainly_dominant(&inst).unwrap().unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn certainly_dominant_exists_for_fixed_lists() {
        let inst = independent(
            &[
                ("a1", &[&["b1", "b2"]]),
                ("a2", &[&["b1"]]),
                ("b1", &[&["a1", "a2"]]),
                ("b2", &[&["a1"]]),
            ],
            &["a1", "a2"],
            &["b1", "b2"],
        );
        let m = certainly_dominant(&inst).unwrap().unwrap();
        let v = verify_two_sided(&inst, &m, TwoSidedCriterion::Dominant, false).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn robust_to_uncertain_examples() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a"}],
            "agents_b": [{"id": "v1"}, {"id": "v2"}, {"id": "v3"}, {"id": "v4"}],
            "scenario": {"type": "robust", "k": 2, "profile": {
                "a": ["v1", "v2", "v3", "v4"],
                "v1": ["a"], "v2": ["a"], "v3": ["a"], "v4": ["a"]
            }}
        }"#;
        let inst = parse_instance(text).unwrap();
        let converted = robust_to_uncertain(&inst).unwrap();
        let ScenarioSet::Independent(sets) = converted.scenarios() else {
            panic!("expected independent sets");
        };
        let lifted: Vec<Vec<String>> = sets["a"].clone();
        assert!(lifted.contains(&vec![
            "v1".to_string(),
            "v4".to_string(),
            "v2".to_string(),
            "v3".to_string()
        ]));
    }

    #[test]
    fn robust_to_uncertain_k0_is_identity_sets() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a"}],
            "agents_b": [{"id": "b1"}, {"id": "b2"}],
            "scenario": {"type": "robust", "k": 0, "profile": {
                "a": ["b1", "b2"], "b1": ["a"], "b2": ["a"]
            }}
        }"#;
        let inst = parse_instance(text).unwrap();
        let converted = robust_to_uncertain(&inst).unwrap();
        let ScenarioSet::Independent(sets) = converted.scenarios() else {
            panic!()
        };
        assert_eq!(sets["a"], vec![vec!["b1".to_string(), "b2".to_string()]]);
    }

    #[test]
    fn robust_to_uncertain_short_list() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a"}],
            "agents_b": [{"id": "v1"}, {"id": "v2"}],
            "scenario": {"type": "robust", "k": 1, "profile": {
                "a": ["v1", "v2"], "v1": ["a"], "v2": ["a"]
            }}
        }"#;
        let inst = parse_instance(text).unwrap();
        let converted = robust_to_uncertain(&inst).unwrap();
        let ScenarioSet::Independent(sets) = converted.scenarios() else {
            panic!()
        };
        assert_eq!(sets["a"].len(), 2);
    }

    #[test]
    fn solve_robust_k0_matches_deferred_acceptance() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a1"}, {"id": "a2"}],
            "agents_b": [{"id": "b1"}, {"id": "b2"}],
            "scenario": {"type": "robust", "k": 0, "profile": {
                "a1": ["b1", "b2"], "a2": ["b1", "b2"],
                "b1": ["a2", "a1"], "b2": ["a1", "a2"]
            }}
        }"#;
        let inst = parse_instance(text).unwrap();
        let m = solve_robust_two_sided(&inst, RobustTarget::Stable)
            .unwrap()
            .unwrap();
        let p = inst.first_profile();
        assert!(blocking_edges(&inst, &p, &m).unwrap().is_empty());
    }

    #[test]
    fn solve_robust_single_edge_any_k() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a"}],
            "agents_b": [{"id": "b"}],
            "scenario": {"type": "robust", "k": 3, "profile": {"a": ["b"], "b": ["a"]}}
        }"#;
        let inst = parse_instance(text).unwrap();
        for target in [RobustTarget::Stable, RobustTarget::Dominant] {
            let m = solve_robust_two_sided(&inst, target).unwrap().unwrap();
            assert_eq!(m.len(), 1);
        }
    }
}
