//! House allocation algorithms: the first/pseudo-second house machinery for
//! popular matchings, certainly popular solvers for layered and independent
//! scenarios, sum-popularity verification with the two-layer partial-order
//! reduction, and swap-robust popular matchings.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::assign::{min_weight_perfect_matching, solve_fill, FillProblem, WeightMatrix};
use crate::instance::{
    may_prefer, AgentId, Error, MarketInstance, Matching, Profile, Result, ScenarioSet,
    ScenarioWitness, Side, Verdict, Witness, LAST_RESORT_ID,
};

fn require_ha(inst: &MarketInstance) -> Result<()> {
    if inst.side() != Side::Ha {
        return Err(Error::Unsupported(
            "operation requires a house allocation market".into(),
        ));
    }
    Ok(())
}

/// All possible lists per applicant, across the whole scenario set.
fn possible_lists(inst: &MarketInstance) -> Result<BTreeMap<AgentId, Vec<Vec<AgentId>>>> {
    match inst.scenarios() {
        ScenarioSet::Layers(profiles) => Ok(inst
            .agents_a()
            .iter()
            .map(|a| {
                (
                    a.clone(),
                    profiles
                        .iter()
                        .map(|p| p.ranking(a).unwrap_or(&[]).to_vec())
                        .collect(),
                )
            })
            .collect()),
        ScenarioSet::Independent(sets) => Ok(sets.clone()),
        ScenarioSet::Robust { .. } => Err(Error::Unsupported(
            "operation is undefined for the robust flavor".into(),
        )),
    }
}

/// Appends the reserved last-resort house with capacity `|A|` to the end of
/// every list of every scenario. Idempotent; rejected for the robust flavor,
/// where an artificial house could overtake real ones within the swap budget.
pub fn append_last_resort(inst: &MarketInstance) -> Result<MarketInstance> {
    require_ha(inst)?;
    if matches!(inst.scenarios(), ScenarioSet::Robust { .. }) {
        return Err(Error::Unsupported(
            "a last-resort house is not allowed under the robust flavor".into(),
        ));
    }
    if inst.last_resort().is_some() {
        return Ok(inst.clone());
    }
    if inst.agents_a().is_empty() {
        return Err(Error::Invalid(
            "cannot append a last-resort house without applicants".into(),
        ));
    }
    let append = |l: &[AgentId]| -> Vec<AgentId> {
        let mut l = l.to_vec();
        l.push(LAST_RESORT_ID.to_string());
        l
    };
    let scenarios = match inst.scenarios() {
        ScenarioSet::Layers(profiles) => ScenarioSet::Layers(
            profiles
                .iter()
                .map(|p| {
                    Profile(
                        p.0.iter()
                            .map(|(a, l)| (a.clone(), append(l)))
                            .collect(),
                    )
                })
                .collect(),
        ),
        ScenarioSet::Independent(sets) => ScenarioSet::Independent(
            sets.iter()
                .map(|(a, ls)| (a.clone(), ls.iter().map(|l| append(l)).collect()))
                .collect(),
        ),
        ScenarioSet::Robust { .. } => unreachable!(),
    };
    let mut houses: Vec<(AgentId, u32)> = inst
        .agents_b()
        .iter()
        .map(|b| (b.clone(), inst.capacity(b)))
        .collect();
    houses.push((LAST_RESORT_ID.to_string(), inst.agents_a().len() as u32));
    MarketInstance::ha(inst.agents_a().to_vec(), houses, scenarios)
}

/// First house, pseudo-second house, admirers and tight houses of a single
/// profile, plus the induced candidate edge set.
#[derive(Debug, Clone)]
pub struct ProfileGraph {
    pub first: BTreeMap<AgentId, AgentId>,
    pub second: BTreeMap<AgentId, AgentId>,
    pub edges: BTreeSet<(AgentId, AgentId)>,
    pub admirers: BTreeMap<AgentId, BTreeSet<AgentId>>,
    pub tight: BTreeSet<AgentId>,
}

/// Computes the candidate-edge structure of one profile. Requires the
/// last-resort house so that the pseudo-second house always exists.
pub fn profile_graph(inst: &MarketInstance, profile: &Profile) -> Result<ProfileGraph> {
    require_ha(inst)?;
    if inst.last_resort().is_none() {
        return Err(Error::Unsupported(
            "the profile graph needs the last-resort house appended".into(),
        ));
    }
    inst.check_profile(profile)?;

    let mut admirers: BTreeMap<AgentId, BTreeSet<AgentId>> = inst
        .agents_b()
        .iter()
        .map(|b| (b.clone(), BTreeSet::new()))
        .collect();
    let mut first = BTreeMap::new();
    for a in inst.agents_a() {
        let f = profile.ranking(a).unwrap()[0].clone();
        admirers.get_mut(&f).unwrap().insert(a.clone());
        first.insert(a.clone(), f);
    }
    let tight: BTreeSet<AgentId> = inst
        .agents_b()
        .iter()
        .filter(|b| admirers[*b].len() as u32 >= inst.capacity(b))
        .cloned()
        .collect();

    let mut second = BTreeMap::new();
    let mut edges = BTreeSet::new();
    for a in inst.agents_a() {
        let f = &first[a];
        let s = if (admirers[f].len() as u32) <= inst.capacity(f) {
            f.clone()
        } else {
            profile
                .ranking(a)
                .unwrap()
                .iter()
                .find(|b| (admirers[*b].len() as u32) < inst.capacity(b))
                .expect("the last-resort house always has spare admirer room")
                .clone()
        };
        edges.insert((a.clone(), f.clone()));
        edges.insert((a.clone(), s.clone()));
        second.insert(a.clone(), s);
    }
    Ok(ProfileGraph {
        first,
        second,
        edges,
        admirers,
        tight,
    })
}

fn solve_candidate_graph(
    inst: &MarketInstance,
    edges: &BTreeSet<(AgentId, AgentId)>,
    required: &BTreeSet<AgentId>,
) -> Option<Matching> {
    let houses: Vec<&AgentId> = inst.agents_b().iter().collect();
    let house_idx: BTreeMap<&AgentId, usize> =
        houses.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let agents: Vec<&AgentId> = inst.agents_a().iter().collect();
    let adj: Vec<Vec<usize>> = agents
        .iter()
        .map(|a| {
            edges
                .iter()
                .filter(|(x, _)| x == *a)
                .map(|(_, b)| house_idx[b])
                .collect()
        })
        .collect();
    let problem = FillProblem {
        adj,
        capacities: houses.iter().map(|b| inst.capacity(b)).collect(),
        required_fill: required.iter().map(|b| house_idx[b]).collect(),
        a_perfect: true,
    };
    let sol = solve_fill(&problem)?;
    Some(Matching::from_pairs(
        sol.into_iter()
            .map(|(i, j)| (agents[i].clone(), houses[j].clone())),
    ))
}

fn strip_last_resort(m: Matching) -> Matching {
    Matching::from_pairs(m.pairs().filter(|(_, b)| b != LAST_RESORT_ID).cloned())
}

/// A popular matching for a single profile, or `None` when none exists. The
/// last-resort house is appended internally when missing, in which case it
/// is also stripped from the result.
pub fn popular_ha(inst: &MarketInstance, profile: &Profile) -> Result<Option<Matching>> {
    require_ha(inst)?;
    if inst.agents_a().is_empty() {
        return Ok(Some(Matching::new()));
    }
    let appended;
    let (work, profile, strip) = if inst.last_resort().is_some() {
        (inst, profile.clone(), false)
    } else {
        inst.check_profile(profile)?;
        appended = append_last_resort(inst)?;
        let extended = Profile(
            profile
                .0
                .iter()
                .map(|(a, l)| {
                    let mut l = l.clone();
                    l.push(LAST_RESORT_ID.to_string());
                    (a.clone(), l)
                })
                .collect(),
        );
        (&appended, extended, true)
    };
    let pg = profile_graph(work, &profile)?;
    let m = solve_candidate_graph(work, &pg.edges, &pg.tight);
    Ok(m.map(|m| if strip { strip_last_resort(m) } else { m }))
}

/// Certain and possible admirers per house, and per edge the houses that are
/// better in some possible list.
#[derive(Debug, Clone)]
pub struct AdmirerAnalysis {
    pub certain: BTreeMap<AgentId, BTreeSet<AgentId>>,
    pub possible: BTreeMap<AgentId, BTreeSet<AgentId>>,
    /// `possibly_better[(a, b)]` = houses ranked above `b` in some possible
    /// list of `a`.
    pub possibly_better: BTreeMap<(AgentId, AgentId), BTreeSet<AgentId>>,
}

pub fn admirer_analysis(inst: &MarketInstance) -> Result<AdmirerAnalysis> {
    require_ha(inst)?;
    let lists = possible_lists(inst)?;
    let mut certain: BTreeMap<AgentId, BTreeSet<AgentId>> = inst
        .agents_b()
        .iter()
        .map(|b| (b.clone(), BTreeSet::new()))
        .collect();
    let mut possible = certain.clone();
    let mut possibly_better = BTreeMap::new();
    for a in inst.agents_a() {
        let ls = &lists[a];
        let firsts: BTreeSet<&AgentId> =
            ls.iter().filter_map(|l| l.first()).collect();
        for f in &firsts {
            possible.get_mut(*f).unwrap().insert(a.clone());
        }
        if firsts.len() == 1 {
            let f = firsts.into_iter().next().unwrap();
            certain.get_mut(f).unwrap().insert(a.clone());
        }
        for (_, b) in inst.edges().iter().filter(|(x, _)| x == a) {
            let mut better = BTreeSet::new();
            for l in ls {
                let pos = l.iter().position(|x| x == b).expect("edge is ranked");
                better.extend(l[..pos].iter().cloned());
            }
            possibly_better.insert((a.clone(), b.clone()), better);
        }
    }
    Ok(AdmirerAnalysis {
        certain,
        possible,
        possibly_better,
    })
}

/// Decides whether `(a, b)` is a first or pseudo-second edge in *every*
/// realizable profile, by worst-case counting: for each list of `a` where
/// `b` is not first, every better house must be certainly tight no matter
/// how the other agents choose, and `b` itself must never be tight there.
pub fn edge_in_e_hat(inst: &MarketInstance, a: &str, b: &str) -> Result<bool> {
    require_ha(inst)?;
    if !matches!(inst.scenarios(), ScenarioSet::Independent(_)) {
        return Err(Error::Unsupported(
            "the candidate-edge test requires independent list sets".into(),
        ));
    }
    if inst.last_resort().is_none() {
        return Err(Error::Unsupported(
            "the candidate-edge test needs the last-resort house appended".into(),
        ));
    }
    if !inst.has_edge(a, b) {
        return Err(Error::NotNeighbors(a.to_string(), b.to_string()));
    }
    let analysis = admirer_analysis(inst)?;
    Ok(edge_in_e_hat_with(inst, &analysis, a, b))
}

fn edge_in_e_hat_with(
    inst: &MarketInstance,
    analysis: &AdmirerAnalysis,
    a: &str,
    b: &str,
) -> bool {
    let ScenarioSet::Independent(sets) = inst.scenarios() else {
        unreachable!("checked by callers")
    };
    let minus_a = |s: &BTreeSet<AgentId>| s.iter().filter(|x| *x != a).count() as u32;
    for list in &sets[a] {
        let pos = list.iter().position(|x| x == b).expect("edge is ranked");
        if pos == 0 {
            continue;
        }
        for better in &list[..pos] {
            // Smallest possible admirer count of `better` once a's list is
            // fixed: its certain admirers besides `a`, plus `a` itself when
            // this list starts with it.
            let mut have = minus_a(&analysis.certain[better]);
            if better == &list[0] {
                have += 1;
            }
            if have < inst.capacity(better) {
                return false;
            }
        }
        // `b` must stay below capacity in admirers, else it stops being the
        // pseudo-second house in some profile realizing this list.
        if minus_a(&analysis.possible[b]) >= inst.capacity(b) {
            return false;
        }
    }
    true
}

/// A matching popular under every realizable profile of a layered or
/// independent scenario, or `None` when none exists.
pub fn certainly_popular_ha(inst: &MarketInstance) -> Result<Option<Matching>> {
    require_ha(inst)?;
    if matches!(inst.scenarios(), ScenarioSet::Robust { .. }) {
        return Err(Error::Unsupported(
            "use the swap-robust solver for robust scenarios".into(),
        ));
    }
    if inst.agents_a().is_empty() {
        return Ok(Some(Matching::new()));
    }
    let strip = inst.last_resort().is_none();
    let work = append_last_resort(inst)?;

    let (edges, required) = match work.scenarios() {
        ScenarioSet::Layers(profiles) => {
            let graphs: Vec<ProfileGraph> = profiles
                .iter()
                .map(|p| profile_graph(&work, p))
                .collect::<Result<_>>()?;
            let mut edges: BTreeSet<(AgentId, AgentId)> = graphs[0].edges.clone();
            for g in &graphs[1..] {
                edges = edges.intersection(&g.edges).cloned().collect();
            }
            // A house tight in any layer may only hold that layer's admirers.
            edges.retain(|(a, b)| {
                graphs
                    .iter()
                    .all(|g| !g.tight.contains(b) || g.admirers[b].contains(a))
            });
            let required: BTreeSet<AgentId> =
                graphs.iter().flat_map(|g| g.tight.iter().cloned()).collect();
            (edges, required)
        }
        ScenarioSet::Independent(_) => {
            let analysis = admirer_analysis(&work)?;
            let mut edges: BTreeSet<(AgentId, AgentId)> = work
                .edges()
                .iter()
                .filter(|(a, b)| edge_in_e_hat_with(&work, &analysis, a, b))
                .cloned()
                .collect();
            edges.retain(|(a, b)| {
                let pa = &analysis.possible[b];
                if pa.len() as u32 >= work.capacity(b) && !pa.contains(a) {
                    return false;
                }
                let ca = &analysis.certain[b];
                if ca.len() as u32 >= work.capacity(b) && !ca.contains(a) {
                    return false;
                }
                analysis.possibly_better[&(a.clone(), b.clone())]
                    .iter()
                    .all(|b2| analysis.certain[b2].len() as u32 >= work.capacity(b2))
            });
            let required: BTreeSet<AgentId> = work
                .agents_b()
                .iter()
                .filter(|b| analysis.possible[*b].len() as u32 >= work.capacity(b))
                .cloned()
                .collect();
            (edges, required)
        }
        ScenarioSet::Robust { .. } => unreachable!(),
    };
    let m = solve_candidate_graph(&work, &edges, &required);
    Ok(m.map(|m| if strip { strip_last_resort(m) } else { m }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaCriterion {
    CertainlyPopular,
    SumPopular,
    KRobustPopular,
}

/// Verifies a house allocation matching against one of the three criteria.
pub fn verify_ha(inst: &MarketInstance, m: &Matching, criterion: HaCriterion) -> Result<Verdict> {
    require_ha(inst)?;
    m.validate(inst)?;
    match criterion {
        HaCriterion::CertainlyPopular => verify_certainly_popular(inst, m),
        HaCriterion::SumPopular => verify_sum_popular(inst, m),
        HaCriterion::KRobustPopular => verify_k_robust(inst, m),
    }
}

/// Extends a matching to cover every applicant by parking the unmatched ones
/// at the last-resort house.
fn extend_to_last_resort(inst: &MarketInstance, m: &Matching) -> Matching {
    let mut pairs: Vec<(AgentId, AgentId)> = m.pairs().cloned().collect();
    for a in inst.agents_a() {
        if m.partner_of_a(a).is_none() {
            pairs.push((a.clone(), LAST_RESORT_ID.to_string()));
        }
    }
    Matching::from_pairs(pairs)
}

fn verify_certainly_popular(inst: &MarketInstance, m: &Matching) -> Result<Verdict> {
    let work = append_last_resort(inst)?;
    let extended = extend_to_last_resort(&work, m);
    match work.scenarios() {
        ScenarioSet::Layers(profiles) => {
            let graphs: Vec<ProfileGraph> = profiles
                .iter()
                .map(|p| profile_graph(&work, p))
                .collect::<Result<_>>()?;
            for (a, b) in extended.pairs() {
                for (layer, g) in graphs.iter().enumerate() {
                    if !g.edges.contains(&(a.clone(), b.clone())) {
                        return Ok(Verdict::fail(
                            Witness::Edge((a.clone(), b.clone())),
                            Some(ScenarioWitness::Layer(layer)),
                        ));
                    }
                }
            }
            for (layer, g) in graphs.iter().enumerate() {
                for b in &g.tight {
                    let occupants = extended.assigned_to(b);
                    let fail = (occupants.len() as u32) < work.capacity(b)
                        || occupants.iter().any(|a| !g.admirers[b].contains(*a));
                    if fail {
                        let culprit = occupants
                            .iter()
                            .find(|a| !g.admirers[b].contains(**a))
                            .map(|a| (*a).clone())
                            .or_else(|| {
                                g.admirers[b]
                                    .iter()
                                    .find(|a| extended.partner_of_a(a) != Some(b))
                                    .cloned()
                            })
                            .unwrap_or_else(|| b.clone());
                        return Ok(Verdict::fail(
                            Witness::Edge((culprit, b.clone())),
                            Some(ScenarioWitness::Layer(layer)),
                        ));
                    }
                }
            }
            Ok(Verdict::pass())
        }
        ScenarioSet::Independent(_) => {
            let analysis = admirer_analysis(&work)?;
            for (a, b) in extended.pairs() {
                if !edge_in_e_hat_with(&work, &analysis, a, b) {
                    return Ok(Verdict::fail(Witness::Edge((a.clone(), b.clone())), None));
                }
            }
            let check_fill = |who: &BTreeMap<AgentId, BTreeSet<AgentId>>,
                              b: &AgentId|
             -> Option<AgentId> {
                let set = &who[b];
                if (set.len() as u32) < work.capacity(b) {
                    return None;
                }
                let occupants = extended.assigned_to(b);
                if (occupants.len() as u32) < work.capacity(b) {
                    return Some(
                        set.iter()
                            .find(|a| extended.partner_of_a(a) != Some(b))
                            .cloned()
                            .unwrap_or_else(|| b.clone()),
                    );
                }
                occupants
                    .iter()
                    .find(|a| !set.contains(**a))
                    .map(|a| (*a).clone())
            };
            for b in work.agents_b() {
                if let Some(culprit) = check_fill(&analysis.possible, b) {
                    return Ok(Verdict::fail(Witness::Edge((culprit, b.clone())), None));
                }
                if let Some(culprit) = check_fill(&analysis.certain, b) {
                    return Ok(Verdict::fail(Witness::Edge((culprit, b.clone())), None));
                }
            }
            for (a, b) in extended.pairs() {
                for b2 in &analysis.possibly_better[&(a.clone(), b.clone())] {
                    let occupants = extended.assigned_to(b2);
                    let filled_certainly = (occupants.len() as u32) == work.capacity(b2)
                        && occupants.iter().all(|x| analysis.certain[b2].contains(*x));
                    if !filled_certainly {
                        return Ok(Verdict::fail(Witness::Edge((a.clone(), b.clone())), None));
                    }
                }
            }
            Ok(Verdict::pass())
        }
        ScenarioSet::Robust { .. } => Err(Error::Unsupported(
            "certain popularity under swaps uses the robust criterion".into(),
        )),
    }
}

fn verify_sum_popular(inst: &MarketInstance, m: &Matching) -> Result<Verdict> {
    let work = append_last_resort(inst)?;
    let lists = possible_lists(&work)?;
    if matches!(inst.scenarios(), ScenarioSet::Independent(_)) {
        let sizes: BTreeSet<usize> = lists.values().map(|ls| ls.len()).collect();
        if sizes.len() > 1 {
            return Err(Error::Unsupported(
                "aggregated voting needs the same number of lists per agent".into(),
            ));
        }
    }
    let extended = extend_to_last_resort(&work, m);

    // One column per unit of house capacity; the last-resort house
    // contributes one slot per applicant so an A-perfect assignment always
    // exists.
    let mut slots: Vec<&AgentId> = Vec::new();
    for b in work.agents_b() {
        for _ in 0..work.capacity(b) {
            slots.push(b);
        }
    }
    let agents: Vec<&AgentId> = work.agents_a().iter().collect();
    let n = slots.len().max(agents.len());
    const FORBIDDEN: i64 = 1 << 40;
    let mut w = vec![vec![0i64; n]; n];
    for (i, a) in agents.iter().enumerate() {
        let current = extended.partner_of_a(a).expect("extension covers A");
        for (j, b) in slots.iter().enumerate() {
            w[i][j] = if work.has_edge(a, b) {
                lists[*a]
                    .iter()
                    .map(|l| {
                        // Vote of `a` for keeping `current` against `b`
                        // under this list; appended lists always rank both.
                        let lc = l.iter().position(|x| x == current);
                        let ln = l.iter().position(|x| x == *b);
                        match (lc, ln) {
                            (Some(c), Some(nn)) => (nn as i64 - c as i64).signum(),
                            _ => unreachable!("appended lists rank all neighbors"),
                        }
                    })
                    .sum()
            } else {
                FORBIDDEN
            };
        }
    }
    let matrix = WeightMatrix::new(w)?;
    let (assignment, total) = min_weight_perfect_matching(&matrix);
    if total >= 0 {
        return Ok(Verdict::pass());
    }
    let witness = Matching::from_pairs(assignment.iter().enumerate().filter_map(|(i, &j)| {
        if i < agents.len() && j < slots.len() && slots[j] != LAST_RESORT_ID {
            Some((agents[i].clone(), slots[j].clone()))
        } else {
            None
        }
    }));
    Ok(Verdict::fail(Witness::Matching(witness), None))
}

/// Agents with a single acceptable house, per house, and the unique house
/// each multi-house agent may occupy in a swap-robust popular matching.
#[derive(Debug, Clone)]
pub struct RobustStructure {
    pub only_house: BTreeMap<AgentId, BTreeSet<AgentId>>,
    pub target: BTreeMap<AgentId, Option<AgentId>>,
}

pub fn robust_structures(inst: &MarketInstance) -> Result<RobustStructure> {
    require_ha(inst)?;
    let ScenarioSet::Robust { base, .. } = inst.scenarios() else {
        return Err(Error::Unsupported(
            "robust structures require the robust flavor".into(),
        ));
    };
    let mut only_house: BTreeMap<AgentId, BTreeSet<AgentId>> = inst
        .agents_b()
        .iter()
        .map(|b| (b.clone(), BTreeSet::new()))
        .collect();
    for a in inst.agents_a() {
        let ranking = base.ranking(a).unwrap();
        if ranking.len() == 1 {
            only_house
                .get_mut(&ranking[0])
                .unwrap()
                .insert(a.clone());
        }
    }
    let saturated =
        |b: &AgentId| -> bool { only_house[b].len() as u32 >= inst.capacity(b) };
    let mut target = BTreeMap::new();
    for a in inst.agents_a() {
        let ranking = base.ranking(a).unwrap();
        if ranking.len() < 2 {
            continue;
        }
        let mut found = None;
        for b in ranking {
            if saturated(b) {
                continue;
            }
            // Every house the agent might prefer to `b` within the swap
            // budget must be saturated by single-house agents.
            let ok = ranking.iter().filter(|b2| *b2 != b).all(|b2| {
                !may_prefer(inst, a, Some(b2), Some(b)).expect("neighbors") || saturated(b2)
            });
            if ok {
                found = Some(b.clone());
                break;
            }
        }
        target.insert(a.clone(), found);
    }
    Ok(RobustStructure { only_house, target })
}

/// The swap-robust popular characterization, checked directly: existence
/// first requires that any multi-house agent without a target house sees
/// only saturated houses; then every multi-house agent must sit at its
/// target, saturated houses must be filled by their single-house agents, and
/// unsaturated houses must hold all of theirs.
fn verify_k_robust(inst: &MarketInstance, m: &Matching) -> Result<Verdict> {
    let ScenarioSet::Robust { base, .. } = inst.scenarios() else {
        return Err(Error::Unsupported(
            "the robust criterion requires the robust flavor".into(),
        ));
    };
    let st = robust_structures(inst)?;
    let saturated =
        |b: &AgentId| -> bool { st.only_house[b].len() as u32 >= inst.capacity(b) };
    for a in inst.agents_a() {
        let ranking = base.ranking(a).unwrap();
        if ranking.len() >= 2 && st.target[a].is_none() {
            if let Some(b) = ranking.iter().find(|b| !saturated(b)) {
                return Ok(Verdict::fail(Witness::Edge((a.clone(), b.clone())), None));
            }
        }
    }
    for a in inst.agents_a() {
        let ranking = base.ranking(a).unwrap();
        if ranking.len() < 2 {
            continue;
        }
        if m.partner_of_a(a) != st.target[a].as_ref() {
            let b = m
                .partner_of_a(a)
                .cloned()
                .or_else(|| st.target[a].clone())
                .unwrap_or_else(|| ranking[0].clone());
            return Ok(Verdict::fail(Witness::Edge((a.clone(), b)), None));
        }
    }
    for b in inst.agents_b() {
        let occupants = m.assigned_to(b);
        if saturated(b) {
            let ok = occupants.len() as u32 == inst.capacity(b)
                && occupants.iter().all(|a| st.only_house[b].contains(*a));
            if !ok {
                let culprit = occupants
                    .iter()
                    .find(|a| !st.only_house[b].contains(**a))
                    .map(|a| (*a).clone())
                    .or_else(|| {
                        st.only_house[b]
                            .iter()
                            .find(|a| m.partner_of_a(a) != Some(b))
                            .cloned()
                    })
                    .unwrap_or_else(|| b.clone());
                return Ok(Verdict::fail(Witness::Edge((culprit, b.clone())), None));
            }
        } else if let Some(a) = st.only_house[b]
            .iter()
            .find(|a| m.partner_of_a(a) != Some(b))
        {
            return Ok(Verdict::fail(Witness::Edge((a.clone(), b.clone())), None));
        }
    }
    Ok(Verdict::pass())
}

/// Builds the swap-robust popular matching when one exists.
pub fn k_robust_popular_ha(inst: &MarketInstance) -> Result<Option<Matching>> {
    require_ha(inst)?;
    let ScenarioSet::Robust { base, .. } = inst.scenarios() else {
        return Err(Error::Unsupported(
            "the swap-robust solver requires the robust flavor".into(),
        ));
    };
    let st = robust_structures(inst)?;
    let saturated =
        |b: &AgentId| -> bool { st.only_house[b].len() as u32 >= inst.capacity(b) };
    for a in inst.agents_a() {
        let ranking = base.ranking(a).unwrap();
        if ranking.len() >= 2
            && st.target[a].is_none()
            && ranking.iter().any(|b| !saturated(b))
        {
            return Ok(None);
        }
    }
    let mut pairs: Vec<(AgentId, AgentId)> = Vec::new();
    let mut load: BTreeMap<&AgentId, u32> = BTreeMap::new();
    for b in inst.agents_b() {
        let picked: Vec<&AgentId> = if saturated(b) {
            st.only_house[b]
                .iter()
                .take(inst.capacity(b) as usize)
                .collect()
        } else {
            st.only_house[b].iter().collect()
        };
        for a in picked {
            pairs.push((a.clone(), b.clone()));
            *load.entry(b).or_insert(0) += 1;
        }
    }
    for (a, target) in &st.target {
        if let Some(b) = target {
            pairs.push((a.clone(), b.clone()));
            let l = load.entry(b).or_insert(0);
            *l += 1;
            if *l > inst.capacity(b) {
                return Ok(None);
            }
        }
    }
    Ok(Some(Matching::from_pairs(pairs)))
}

// ---------------------------------------------------------------------------
// Two-layer aggregation via partial orders
// ---------------------------------------------------------------------------

/// The partial-order market induced by two layers: a house pair is ordered
/// when both layers agree, incomparable otherwise. For every agent and every
/// pair of outcomes, the two layer votes sum to exactly twice the
/// partial-order vote.
#[derive(Debug, Clone, Serialize)]
pub struct PartialOrderInstance {
    pub agents_a: Vec<AgentId>,
    pub houses: Vec<(AgentId, u32)>,
    /// Ordered pairs `(better, worse)` per agent.
    pub relations: BTreeMap<AgentId, Vec<(AgentId, AgentId)>>,
}

impl PartialOrderInstance {
    /// Partial-order vote: +1 when `x` is related above `y`, -1 for the
    /// reverse, 0 for incomparable pairs; unmatched sits below everything.
    pub fn vote(&self, a: &str, x: Option<&str>, y: Option<&str>) -> i8 {
        match (x, y) {
            (None, None) => 0,
            (Some(_), None) => 1,
            (None, Some(_)) => -1,
            (Some(x), Some(y)) if x == y => 0,
            (Some(x), Some(y)) => {
                let rel = &self.relations[a];
                if rel.iter().any(|(p, q)| p == x && q == y) {
                    1
                } else if rel.iter().any(|(p, q)| p == y && q == x) {
                    -1
                } else {
                    0
                }
            }
        }
    }
}

pub fn aggregate_to_partial_order(inst: &MarketInstance) -> Result<PartialOrderInstance> {
    require_ha(inst)?;
    let ScenarioSet::Layers(profiles) = inst.scenarios() else {
        return Err(Error::Unsupported(
            "the partial-order reduction requires layered profiles".into(),
        ));
    };
    if profiles.len() != 2 {
        return Err(Error::Unsupported(
            "the partial-order reduction is defined for exactly two layers".into(),
        ));
    }
    let mut relations = BTreeMap::new();
    for a in inst.agents_a() {
        let l1 = profiles[0].ranking(a).unwrap();
        let l2 = profiles[1].ranking(a).unwrap();
        let mut rel = Vec::new();
        for x in l1 {
            for y in l1 {
                if x == y {
                    continue;
                }
                let above1 = l1.iter().position(|v| v == x) < l1.iter().position(|v| v == y);
                let above2 = l2.iter().position(|v| v == x) < l2.iter().position(|v| v == y);
                if above1 && above2 {
                    rel.push((x.clone(), y.clone()));
                }
            }
        }
        relations.insert(a.clone(), rel);
    }
    Ok(PartialOrderInstance {
        agents_a: inst.agents_a().to_vec(),
        houses: inst
            .agents_b()
            .iter()
            .map(|b| (b.clone(), inst.capacity(b)))
            .collect(),
        relations,
    })
}
