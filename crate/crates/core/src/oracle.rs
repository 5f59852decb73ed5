//! Exhaustive ground truth on small instances: enumerate matchings and
//! realizable profiles, evaluate vote sums literally from the definitions,
//! and decide every property by brute force.
//!
//! The point of this module is to be boringly literal. There is no pruning
//! beyond early exit of the quantifiers, so its correctness is immediate and
//! every polynomial solver can be accepted against it.

use std::collections::BTreeSet;

use crate::indexed::{vote_by_rank, Indexed, ProfileRanks};
use crate::instance::{
    AgentId, Error, MarketInstance, Matching, Profile, Result, ScenarioSet, ScenarioWitness,
    Side, Verdict, Witness,
};

/// Enumeration limits; exceeding either aborts with a budget error.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_matchings: u64,
    pub max_profiles: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_matchings: 1_000_000,
            max_profiles: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Stable,
    Popular,
    Dominant,
    CertainlyStable,
    CertainlyPopular,
    CertainlyDominant,
    SumPopular,
    SumDominant,
    KRobustStable,
    KRobustPopular,
    KRobustDominant,
}

impl Property {
    fn is_aggregated(self) -> bool {
        matches!(self, Property::SumPopular | Property::SumDominant)
    }

    fn needs_stability(self) -> bool {
        matches!(
            self,
            Property::Stable | Property::CertainlyStable | Property::KRobustStable
        )
    }
}

/// All lists within swap distance `k` of `list`, by breadth-first closure
/// over adjacent transpositions, in first-reached order.
pub fn swap_ball(list: &[AgentId], k: u32) -> Vec<Vec<AgentId>> {
    let mut seen: BTreeSet<Vec<AgentId>> = BTreeSet::new();
    let mut out = vec![list.to_vec()];
    seen.insert(list.to_vec());
    let mut frontier = vec![list.to_vec()];
    for _ in 0..k {
        let mut next = Vec::new();
        for l in &frontier {
            for i in 0..l.len().saturating_sub(1) {
                let mut swapped = l.clone();
                swapped.swap(i, i + 1);
                if seen.insert(swapped.clone()) {
                    out.push(swapped.clone());
                    next.push(swapped);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Every capacity-respecting matching, in the deterministic order of an
/// exclude-first scan over the lexicographically sorted edge list (so the
/// empty matching comes first).
pub fn enumerate_matchings(
    inst: &MarketInstance,
    budget: &EnumerationBudget,
) -> Result<Vec<Matching>> {
    let idx = Indexed::new(inst);
    let raw = enumerate_matchings_idx(&idx, budget)?;
    Ok(raw.iter().map(|m| idx.matching_to_ids(&m.pairs)).collect())
}

/// Every realizable profile: the listed layers, the cartesian product of
/// independent sets, or the product of per-agent swap balls.
pub fn enumerate_profiles(
    inst: &MarketInstance,
    budget: &EnumerationBudget,
) -> Result<Vec<Profile>> {
    let choices: Vec<(AgentId, Vec<Vec<AgentId>>)> = match inst.scenarios() {
        ScenarioSet::Layers(ps) => {
            if ps.len() as u64 > budget.max_profiles {
                return Err(Error::BudgetExceeded(format!(
                    "{} profiles exceed the budget of {}",
                    ps.len(),
                    budget.max_profiles
                )));
            }
            return Ok(ps.clone());
        }
        ScenarioSet::Independent(sets) => sets
            .iter()
            .map(|(u, ls)| (u.clone(), ls.clone()))
            .collect(),
        ScenarioSet::Robust { base, k } => base
            .0
            .iter()
            .map(|(u, l)| (u.clone(), swap_ball(l, *k)))
            .collect(),
    };
    let mut total: u64 = 1;
    for (_, ls) in &choices {
        total = total
            .checked_mul(ls.len() as u64)
            .filter(|t| *t <= budget.max_profiles)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!(
                    "profile product exceeds the budget of {}",
                    budget.max_profiles
                ))
            })?;
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut counter = vec![0usize; choices.len()];
    loop {
        out.push(Profile(
            choices
                .iter()
                .zip(&counter)
                .map(|((u, ls), &i)| (u.clone(), ls[i].clone()))
                .collect(),
        ));
        // Odometer over the agents, last agent varying fastest.
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            counter[pos] += 1;
            if counter[pos] < choices[pos].1.len() {
                break;
            }
            counter[pos] = 0;
        }
    }
}

/// Signed vote sum between two matchings under one profile: both sides vote
/// in two-sided markets, only applicants vote in house allocation.
pub fn delta(
    inst: &MarketInstance,
    profile: &Profile,
    m: &Matching,
    n: &Matching,
) -> Result<i64> {
    inst.check_profile(profile)?;
    m.validate(inst)?;
    n.validate(inst)?;
    let idx = Indexed::new(inst);
    let p = idx.profile_ranks(profile);
    let mi = IdxMatching::new(&idx, m);
    let ni = IdxMatching::new(&idx, n);
    Ok(delta_idx(&idx, &p, &mi, &ni))
}

/// Decides `property` for `m` by full enumeration; the verdict carries the
/// first counterexample in enumeration order.
pub fn brute_check(
    inst: &MarketInstance,
    m: &Matching,
    property: Property,
    budget: &EnumerationBudget,
) -> Result<Verdict> {
    m.validate(inst)?;
    let ctx = OracleCtx::new(inst, property, budget)?;
    Ok(ctx.check(&IdxMatching::new(&ctx.idx, m)))
}

/// First matching satisfying `property` in enumeration order, if any.
pub fn brute_exists(
    inst: &MarketInstance,
    property: Property,
    budget: &EnumerationBudget,
) -> Result<Option<Matching>> {
    let ctx = OracleCtx::new(inst, property, budget)?;
    for m in &ctx.matchings {
        if ctx.check(m).holds {
            return Ok(Some(ctx.idx.matching_to_ids(&m.pairs)));
        }
    }
    Ok(None)
}

struct IdxMatching {
    pairs: Vec<(usize, usize)>,
    a_of: Vec<Option<usize>>,
    b_of: Vec<Option<usize>>,
}

impl IdxMatching {
    fn new(idx: &Indexed, m: &Matching) -> IdxMatching {
        IdxMatching {
            pairs: m
                .pairs()
                .map(|(a, b)| (idx.a_idx[a], idx.b_idx[b]))
                .collect(),
            a_of: idx.a_partners(m),
            b_of: if idx.side == Side::TwoSided {
                idx.b_partners(m)
            } else {
                Vec::new()
            },
        }
    }
}

fn delta_idx(idx: &Indexed, p: &ProfileRanks, m: &IdxMatching, n: &IdxMatching) -> i64 {
    let mut d: i64 = 0;
    for i in 0..idx.n_a() {
        d += vote_by_rank(&p.a[i], m.a_of[i], n.a_of[i]);
    }
    if idx.side == Side::TwoSided {
        for j in 0..idx.n_b() {
            d += vote_by_rank(&p.b[j], m.b_of[j], n.b_of[j]);
        }
    }
    d
}

fn enumerate_matchings_idx(
    idx: &Indexed,
    budget: &EnumerationBudget,
) -> Result<Vec<IdxMatching>> {
    struct Dfs<'a> {
        idx: &'a Indexed,
        budget: u64,
        out: Vec<IdxMatching>,
        chosen: Vec<(usize, usize)>,
        a_used: Vec<bool>,
        b_load: Vec<u32>,
    }
    impl Dfs<'_> {
        fn go(&mut self, e: usize) -> Result<()> {
            if e == self.idx.edges.len() {
                if self.out.len() as u64 >= self.budget {
                    return Err(Error::BudgetExceeded(format!(
                        "more than {} matchings",
                        self.budget
                    )));
                }
                let mut a_of = vec![None; self.idx.n_a()];
                let mut b_of = vec![None; self.idx.n_b()];
                for &(i, j) in &self.chosen {
                    a_of[i] = Some(j);
                    b_of[j] = Some(i);
                }
                self.out.push(IdxMatching {
                    pairs: self.chosen.clone(),
                    a_of,
                    b_of,
                });
                return Ok(());
            }
            let (i, j) = self.idx.edges[e];
            self.go(e + 1)?;
            if !self.a_used[i] && self.b_load[j] < self.idx.cap[j] {
                self.a_used[i] = true;
                self.b_load[j] += 1;
                self.chosen.push((i, j));
                self.go(e + 1)?;
                self.chosen.pop();
                self.b_load[j] -= 1;
                self.a_used[i] = false;
            }
            Ok(())
        }
    }
    let mut dfs = Dfs {
        idx,
        budget: budget.max_matchings,
        out: Vec::new(),
        chosen: Vec::new(),
        a_used: vec![false; idx.n_a()],
        b_load: vec![0; idx.n_b()],
    };
    dfs.go(0)?;
    Ok(dfs.out)
}

struct OracleCtx {
    idx: Indexed,
    property: Property,
    profiles: Vec<Profile>,
    profile_ranks: Vec<ProfileRanks>,
    matchings: Vec<IdxMatching>,
    /// Per-agent list sets for aggregated voting, as rank vectors.
    agg_a: Vec<Vec<Vec<u32>>>,
    agg_b: Vec<Vec<Vec<u32>>>,
}

impl OracleCtx {
    fn new(inst: &MarketInstance, property: Property, budget: &EnumerationBudget) -> Result<Self> {
        if property.needs_stability() && inst.side() != Side::TwoSided {
            return Err(Error::Unsupported(
                "stability is a two-sided notion".into(),
            ));
        }
        match property {
            Property::Stable | Property::Popular | Property::Dominant => {
                if inst.single_profile().is_none() {
                    return Err(Error::Unsupported(
                        "plain properties need a deterministic instance; use the certainly-* form"
                            .into(),
                    ));
                }
            }
            Property::KRobustStable | Property::KRobustPopular | Property::KRobustDominant => {
                if !matches!(inst.scenarios(), ScenarioSet::Robust { .. }) {
                    return Err(Error::Unsupported(
                        "swap-robust properties need the robust flavor".into(),
                    ));
                }
            }
            Property::SumPopular | Property::SumDominant => {
                if matches!(inst.scenarios(), ScenarioSet::Robust { .. }) {
                    return Err(Error::Unsupported(
                        "aggregated voting is undefined for the robust flavor".into(),
                    ));
                }
            }
            _ => {}
        }
        let idx = Indexed::new(inst);
        let profiles = if property.is_aggregated() {
            Vec::new()
        } else {
            enumerate_profiles(inst, budget)?
        };
        let profile_ranks = profiles.iter().map(|p| idx.profile_ranks(p)).collect();
        let matchings = enumerate_matchings_idx(&idx, budget)?;
        let (agg_a, agg_b) = if property.is_aggregated() {
            aggregated_rank_sets(inst, &idx)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(OracleCtx {
            idx,
            property,
            profiles,
            profile_ranks,
            matchings,
            agg_a,
            agg_b,
        })
    }

    fn check(&self, m: &IdxMatching) -> Verdict {
        match self.property {
            Property::Stable | Property::CertainlyStable | Property::KRobustStable => {
                for (pi, p) in self.profile_ranks.iter().enumerate() {
                    if let Some(edge) = self.blocking_edge(p, m) {
                        return Verdict::fail(
                            Witness::Edge(edge),
                            Some(ScenarioWitness::Profile(self.profiles[pi].clone())),
                        );
                    }
                }
                Verdict::pass()
            }
            Property::Popular | Property::CertainlyPopular | Property::KRobustPopular => {
                for (pi, p) in self.profile_ranks.iter().enumerate() {
                    for n in &self.matchings {
                        if delta_idx(&self.idx, p, m, n) < 0 {
                            return Verdict::fail(
                                Witness::Matching(self.idx.matching_to_ids(&n.pairs)),
                                Some(ScenarioWitness::Profile(self.profiles[pi].clone())),
                            );
                        }
                    }
                }
                Verdict::pass()
            }
            Property::Dominant | Property::CertainlyDominant | Property::KRobustDominant => {
                for (pi, p) in self.profile_ranks.iter().enumerate() {
                    for n in &self.matchings {
                        let d = delta_idx(&self.idx, p, m, n);
                        let beaten = d < 0 || (d <= 0 && n.pairs.len() > m.pairs.len());
                        if beaten {
                            return Verdict::fail(
                                Witness::Matching(self.idx.matching_to_ids(&n.pairs)),
                                Some(ScenarioWitness::Profile(self.profiles[pi].clone())),
                            );
                        }
                    }
                }
                Verdict::pass()
            }
            Property::SumPopular | Property::SumDominant => {
                let dominant = self.property == Property::SumDominant;
                for n in &self.matchings {
                    let d = self.aggregated_delta(m, n);
                    let beaten = d < 0 || (dominant && d <= 0 && n.pairs.len() > m.pairs.len());
                    if beaten {
                        return Verdict::fail(
                            Witness::Matching(self.idx.matching_to_ids(&n.pairs)),
                            None,
                        );
                    }
                }
                Verdict::pass()
            }
        }
    }

    fn blocking_edge(&self, p: &ProfileRanks, m: &IdxMatching) -> Option<(AgentId, AgentId)> {
        for &(i, j) in &self.idx.edges {
            if m.a_of[i] == Some(j) {
                continue;
            }
            let a_rank_of = |v: Option<usize>| v.map_or(u64::MAX, |v| u64::from(p.a[i][v]));
            let b_rank_of = |v: Option<usize>| v.map_or(u64::MAX, |v| u64::from(p.b[j][v]));
            if u64::from(p.a[i][j]) < a_rank_of(m.a_of[i])
                && u64::from(p.b[j][i]) < b_rank_of(m.b_of[j])
            {
                return Some((self.idx.a_ids[i].clone(), self.idx.b_ids[j].clone()));
            }
        }
        None
    }

    fn aggregated_delta(&self, m: &IdxMatching, n: &IdxMatching) -> i64 {
        let mut d = 0;
        for i in 0..self.idx.n_a() {
            for r in &self.agg_a[i] {
                d += vote_by_rank(r, m.a_of[i], n.a_of[i]);
            }
        }
        if self.idx.side == Side::TwoSided {
            for j in 0..self.idx.n_b() {
                for r in &self.agg_b[j] {
                    d += vote_by_rank(r, m.b_of[j], n.b_of[j]);
                }
            }
        }
        d
    }
}

/// Rank vectors of every list each agent casts in aggregated voting: the
/// per-layer lists, or the agent's own possible lists.
fn aggregated_rank_sets(
    inst: &MarketInstance,
    idx: &Indexed,
) -> (Vec<Vec<Vec<u32>>>, Vec<Vec<Vec<u32>>>) {
    let lists_for = |u: &AgentId, on_b: bool| -> Vec<Vec<u32>> {
        let lists: Vec<Vec<AgentId>> = match inst.scenarios() {
            ScenarioSet::Layers(ps) => ps
                .iter()
                .filter_map(|p| p.ranking(u).map(|l| l.to_vec()))
                .collect(),
            ScenarioSet::Independent(sets) => sets.get(u).cloned().unwrap_or_default(),
            ScenarioSet::Robust { .. } => unreachable!("rejected earlier"),
        };
        lists
            .iter()
            .map(|l| {
                let (index, len) = if on_b {
                    (&idx.a_idx, idx.n_a())
                } else {
                    (&idx.b_idx, idx.n_b())
                };
                let mut r = vec![u32::MAX; len];
                for (pos, v) in l.iter().enumerate() {
                    r[index[v]] = pos as u32;
                }
                r
            })
            .collect()
    };
    let agg_a = idx.a_ids.iter().map(|a| lists_for(a, false)).collect();
    let agg_b = if inst.side() == Side::TwoSided {
        idx.b_ids.iter().map(|b| lists_for(b, true)).collect()
    } else {
        Vec::new()
    };
    (agg_a, agg_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use std::collections::BTreeMap;

    fn profile(entries: &[(&str, &[&str])]) -> Profile {
        Profile(
            entries
                .iter()
                .map(|(u, l)| (u.to_string(), l.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
    }

    fn budget() -> EnumerationBudget {
        EnumerationBudget::default()
    }

    #[test]
    fn one_edge_matchings_in_order() {
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b".into()],
            ScenarioSet::Layers(vec![profile(&[("a", &["b"]), ("b", &["a"])])]),
        )
        .unwrap();
        let ms = enumerate_matchings(&inst, &budget()).unwrap();
        assert_eq!(ms.len(), 2);
        assert!(ms[0].is_empty());
        assert_eq!(ms[1].len(), 1);
    }

    #[test]
    fn k22_has_seven_matchings() {
        let p = profile(&[
            ("a1", &["b1", "b2"]),
            ("a2", &["b1", "b2"]),
            ("b1", &["a1", "a2"]),
            ("b2", &["a1", "a2"]),
        ]);
        let inst = MarketInstance::two_sided(
            vec!["a1".into(), "a2".into()],
            vec!["b1".into(), "b2".into()],
            ScenarioSet::Layers(vec![p]),
        )
        .unwrap();
        assert_eq!(enumerate_matchings(&inst, &budget()).unwrap().len(), 7);
    }

    #[test]
    fn capacity_two_house_has_four_matchings() {
        let inst = MarketInstance::ha(
            vec!["a1".into(), "a2".into()],
            vec![("b1".into(), 2)],
            ScenarioSet::Layers(vec![profile(&[("a1", &["b1"]), ("a2", &["b1"])])]),
        )
        .unwrap();
        assert_eq!(enumerate_matchings(&inst, &budget()).unwrap().len(), 4);
    }

    #[test]
    fn matching_budget_is_enforced() {
        let p = profile(&[
            ("a1", &["b1", "b2"]),
            ("a2", &["b1", "b2"]),
            ("b1", &["a1", "a2"]),
            ("b2", &["a1", "a2"]),
        ]);
        let inst = MarketInstance::two_sided(
            vec!["a1".into(), "a2".into()],
            vec!["b1".into(), "b2".into()],
            ScenarioSet::Layers(vec![p]),
        )
        .unwrap();
        let tight = EnumerationBudget {
            max_matchings: 3,
            max_profiles: 10,
        };
        assert!(matches!(
            enumerate_matchings(&inst, &tight),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn profile_enumeration_examples() {
        let inst = MarketInstance::ha(
            vec!["a1".into()],
            vec![("b1".into(), 1), ("b2".into(), 1)],
            ScenarioSet::Layers(vec![
                profile(&[("a1", &["b1", "b2"])]),
                profile(&[("a1", &["b2", "b1"])]),
            ]),
        )
        .unwrap();
        assert_eq!(enumerate_profiles(&inst, &budget()).unwrap().len(), 2);

        let sets: BTreeMap<AgentId, Vec<Vec<AgentId>>> = [
            (
                "a1".to_string(),
                vec![
                    vec!["b1".to_string(), "b2".to_string()],
                    vec!["b2".to_string(), "b1".to_string()],
                ],
            ),
            (
                "a2".to_string(),
                vec![
                    vec!["b1".to_string(), "b2".to_string()],
                    vec!["b2".to_string(), "b1".to_string()],
                ],
            ),
        ]
        .into();
        let inst = MarketInstance::ha(
            vec!["a1".into(), "a2".into()],
            vec![("b1".into(), 1), ("b2".into(), 1)],
            ScenarioSet::Independent(sets),
        )
        .unwrap();
        assert_eq!(enumerate_profiles(&inst, &budget()).unwrap().len(), 4);

        let inst = MarketInstance::ha(
            vec!["a1".into()],
            vec![("b1".into(), 1), ("b2".into(), 1), ("b3".into(), 1)],
            ScenarioSet::Robust {
                base: profile(&[("a1", &["b1", "b2", "b3"])]),
                k: 1,
            },
        )
        .unwrap();
        assert_eq!(enumerate_profiles(&inst, &budget()).unwrap().len(), 3);
    }

    /// Number of permutations of n elements at each swap distance, by the
    /// inversion-count generating function.
    fn mahonian(n: usize) -> Vec<u64> {
        let mut coeffs = vec![1u64];
        for i in 1..=n {
            let mut next = vec![0u64; coeffs.len() + i - 1];
            for (d, &c) in coeffs.iter().enumerate() {
                for j in 0..i {
                    next[d + j] += c;
                }
            }
            coeffs = next;
        }
        coeffs
    }

    #[test]
    fn swap_ball_sizes_match_inversion_counts() {
        for n in 1..=4usize {
            let list: Vec<AgentId> = (0..n).map(|i| format!("v{i}")).collect();
            let counts = mahonian(n);
            for k in 0..=3usize {
                let expect: u64 = counts.iter().take(k + 1).sum();
                assert_eq!(
                    swap_ball(&list, k as u32).len() as u64,
                    expect,
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn delta_examples() {
        let p = profile(&[("a", &["b"]), ("b", &["a"])]);
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b".into()],
            ScenarioSet::Layers(vec![p.clone()]),
        )
        .unwrap();
        let matched = Matching::from_pairs([("a".to_string(), "b".to_string())]);
        let empty = Matching::new();
        assert_eq!(delta(&inst, &p, &matched, &matched).unwrap(), 0);
        assert_eq!(delta(&inst, &p, &matched, &empty).unwrap(), 2);

        let hp = profile(&[("a", &["b"])]);
        let ha = MarketInstance::ha(
            vec!["a".into()],
            vec![("b".into(), 1)],
            ScenarioSet::Layers(vec![hp.clone()]),
        )
        .unwrap();
        let matched = Matching::from_pairs([("a".to_string(), "b".to_string())]);
        assert_eq!(delta(&ha, &hp, &matched, &Matching::new()).unwrap(), 1);
    }

    #[test]
    fn delta_opposing_preferences_cancel() {
        let p = profile(&[
            ("a1", &["b1", "b2"]),
            ("a2", &["b2", "b1"]),
            ("b1", &["a2", "a1"]),
            ("b2", &["a1", "a2"]),
        ]);
        let inst = MarketInstance::two_sided(
            vec!["a1".into(), "a2".into()],
            vec!["b1".into(), "b2".into()],
            ScenarioSet::Layers(vec![p.clone()]),
        )
        .unwrap();
        let m = Matching::from_pairs([
            ("a1".to_string(), "b1".to_string()),
            ("a2".to_string(), "b2".to_string()),
        ]);
        let n = Matching::from_pairs([
            ("a1".to_string(), "b2".to_string()),
            ("a2".to_string(), "b1".to_string()),
        ]);
        assert_eq!(delta(&inst, &p, &m, &n).unwrap(), 0);
    }

    #[test]
    fn brute_check_examples() {
        let (inst, p) = {
            let p = profile(&[
                ("a1", &["b1", "b2"]),
                ("a2", &["b1", "b2"]),
                ("b1", &["a2", "a1"]),
                ("b2", &["a1", "a2"]),
            ]);
            (
                MarketInstance::two_sided(
                    vec!["a1".into(), "a2".into()],
                    vec!["b1".into(), "b2".into()],
                    ScenarioSet::Layers(vec![p.clone()]),
                )
                .unwrap(),
                p,
            )
        };
        let gs = crate::two_sided::gale_shapley(&inst, &p).unwrap();
        assert!(brute_check(&inst, &gs, Property::Popular, &budget())
            .unwrap()
            .holds);
        let v = brute_check(&inst, &Matching::new(), Property::Popular, &budget()).unwrap();
        assert!(!v.holds);
        assert!(v.witness.is_some());
    }

    #[test]
    fn brute_exists_examples() {
        // Three identical applicants over two unit houses: no popular
        // matching exists.
        let inst = MarketInstance::ha(
            vec!["a1".into(), "a2".into(), "a3".into()],
            vec![("b1".into(), 1), ("b2".into(), 1)],
            ScenarioSet::Layers(vec![profile(&[
                ("a1", &["b1", "b2"]),
                ("a2", &["b1", "b2"]),
                ("a3", &["b1", "b2"]),
            ])]),
        )
        .unwrap();
        assert!(brute_exists(&inst, Property::Popular, &budget())
            .unwrap()
            .is_none());

        // Stability always has a witness on deterministic two-sided input.
        let p = profile(&[("a", &["b"]), ("b", &["a"])]);
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b".into()],
            ScenarioSet::Layers(vec![p]),
        )
        .unwrap();
        assert!(brute_exists(&inst, Property::Stable, &budget())
            .unwrap()
            .is_some());

        // Single edge with two lists per agent is certainly dominant.
        let sets: BTreeMap<AgentId, Vec<Vec<AgentId>>> = [
            ("a".to_string(), vec![vec!["b".to_string()], vec!["b".to_string()]]),
            ("b".to_string(), vec![vec!["a".to_string()], vec!["a".to_string()]]),
        ]
        .into();
        let inst = MarketInstance::two_sided(
            vec!["a".into()],
            vec!["b".into()],
            ScenarioSet::Independent(sets),
        )
        .unwrap();
        let m = brute_exists(&inst, Property::CertainlyDominant, &budget())
            .unwrap()
            .unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn plain_properties_need_deterministic_instances() {
        let inst = MarketInstance::ha(
            vec!["a1".into()],
            vec![("b1".into(), 1), ("b2".into(), 1)],
            ScenarioSet::Layers(vec![
                profile(&[("a1", &["b1", "b2"])]),
                profile(&[("a1", &["b2", "b1"])]),
            ]),
        )
        .unwrap();
        assert!(matches!(
            brute_check(&inst, &Matching::new(), Property::Popular, &budget()),
            Err(Error::Unsupported(_))
        ));
    }
}
