//! Market data types, scenario flavors, swap arithmetic and the instance file
//! format.
//!
//! Everything downstream consumes the types defined here. All types are
//! immutable after construction and every invariant is checked when an
//! instance is built, so the algorithm modules can take them for granted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Agents and houses are identified by arbitrary strings. Iteration orders
/// are lexicographic throughout so that every operation is deterministic.
pub type AgentId = String;

/// Reserved id for the artificial last-resort house appended to house
/// allocation instances. It always has capacity `|A|` and sits at the end of
/// every preference list.
pub const LAST_RESORT_ID: &str = "~last-resort";

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("`{0}` and `{1}` are not neighbors")]
    NotNeighbors(AgentId, AgentId),
    #[error("preference lists rank different sets")]
    DifferentSets,
    #[error("`{0}` does not appear in the list")]
    NotInList(AgentId),
    #[error("operation not applicable: {0}")]
    Unsupported(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
}

/// Which side of the market carries preferences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Both sides rank each other; all capacities are 1.
    TwoSided,
    /// House allocation: only `A`-side agents rank, houses have capacities.
    Ha,
}

/// A strict ranking of acceptable partners for one agent, most preferred
/// first. Being unmatched is implicitly worse than every ranked entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceList {
    pub owner: AgentId,
    pub ranking: Vec<AgentId>,
}

impl PreferenceList {
    pub fn new(owner: impl Into<AgentId>, ranking: Vec<AgentId>) -> Self {
        PreferenceList {
            owner: owner.into(),
            ranking,
        }
    }

    /// Position of `id` in the ranking, 0 = most preferred.
    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.ranking.iter().position(|x| x == id)
    }
}

/// One full preference profile: a ranking for every agent that has one
/// (both sides in two-sided markets, only the `A` side in house allocation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile(pub BTreeMap<AgentId, Vec<AgentId>>);

impl Profile {
    pub fn ranking(&self, u: &str) -> Option<&[AgentId]> {
        self.0.get(u).map(|v| v.as_slice())
    }

    pub fn rank_of(&self, u: &str, x: &str) -> Option<usize> {
        self.0.get(u).and_then(|r| r.iter().position(|v| v == x))
    }
}

/// The uncertainty structure over preferences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioSet {
    /// A list of full profiles that are realized jointly: profile `i` of one
    /// agent only ever occurs together with profile `i` of every other agent.
    Layers(Vec<Profile>),
    /// Per-agent sets of possible lists; every combination is realizable.
    Independent(BTreeMap<AgentId, Vec<Vec<AgentId>>>),
    /// A base profile; every profile within per-agent swap distance `k` of it
    /// is realizable.
    Robust { base: Profile, k: u32 },
}

impl ScenarioSet {
    pub fn flavor_name(&self) -> &'static str {
        match self {
            ScenarioSet::Layers(_) => "layers",
            ScenarioSet::Independent(_) => "independent",
            ScenarioSet::Robust { .. } => "robust",
        }
    }
}

/// A bipartite market (two-sided or house allocation) bundled with its
/// scenario set. Construction validates every structural invariant; see
/// [`MarketInstance::two_sided`] and [`MarketInstance::ha`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketInstance {
    side: Side,
    agents_a: Vec<AgentId>,
    agents_b: Vec<AgentId>,
    capacities: BTreeMap<AgentId, u32>,
    edges: BTreeSet<(AgentId, AgentId)>,
    scenarios: ScenarioSet,
    last_resort: Option<AgentId>,
}

impl MarketInstance {
    /// Builds a two-sided market. The edge set is derived from the scenario's
    /// preference lists; both sides must rank exactly each other.
    pub fn two_sided(
        agents_a: Vec<AgentId>,
        agents_b: Vec<AgentId>,
        scenarios: ScenarioSet,
    ) -> Result<Self> {
        let capacities = agents_b.iter().map(|b| (b.clone(), 1)).collect();
        let inst = MarketInstance {
            side: Side::TwoSided,
            agents_a,
            agents_b,
            capacities,
            edges: BTreeSet::new(),
            scenarios,
            last_resort: None,
        };
        inst.finish()
    }

    /// Builds a house allocation market. `houses` carries the capacities.
    pub fn ha(
        agents_a: Vec<AgentId>,
        houses: Vec<(AgentId, u32)>,
        scenarios: ScenarioSet,
    ) -> Result<Self> {
        let agents_b: Vec<AgentId> = houses.iter().map(|(b, _)| b.clone()).collect();
        let capacities = houses.into_iter().collect();
        let inst = MarketInstance {
            side: Side::Ha,
            agents_a,
            agents_b,
            capacities,
            edges: BTreeSet::new(),
            scenarios,
            last_resort: None,
        };
        inst.finish()
    }

    fn finish(mut self) -> Result<Self> {
        self.check_ids()?;
        self.derive_edges()?;
        self.check_scenarios()?;
        self.check_last_resort()?;
        Ok(self)
    }

    fn check_ids(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for id in self.agents_a.iter().chain(self.agents_b.iter()) {
            if id.is_empty() {
                return Err(Error::Invalid("empty agent id".into()));
            }
            if !seen.insert(id) {
                return Err(Error::Invalid(format!("duplicate id `{id}`")));
            }
        }
        if self.side == Side::TwoSided
            && self
                .agents_a
                .iter()
                .chain(self.agents_b.iter())
                .any(|id| id == LAST_RESORT_ID)
        {
            return Err(Error::Invalid(format!(
                "`{LAST_RESORT_ID}` is reserved for house allocation instances"
            )));
        }
        for (b, q) in &self.capacities {
            if *q == 0 {
                return Err(Error::Invalid(format!("capacity of `{b}` must be positive")));
            }
            if self.side == Side::TwoSided && *q != 1 {
                return Err(Error::Invalid(format!(
                    "two-sided market requires unit capacities, `{b}` has {q}"
                )));
            }
        }
        Ok(())
    }

    /// Every agent's lists must rank the same set across the whole scenario;
    /// the edge set is that common acceptability relation.
    fn derive_edges(&mut self) -> Result<()> {
        let a_set: BTreeSet<&AgentId> = self.agents_a.iter().collect();
        let b_set: BTreeSet<&AgentId> = self.agents_b.iter().collect();
        let mut edges = BTreeSet::new();
        for a in &self.agents_a {
            let lists = self.lists_of(a);
            if lists.is_empty() {
                return Err(Error::Invalid(format!("agent `{a}` has no preference list")));
            }
            let neighbors = check_same_set(a, &lists)?;
            for b in &neighbors {
                if !b_set.contains(b) {
                    return Err(Error::Invalid(format!(
                        "list of `{a}` mentions unknown partner `{b}`"
                    )));
                }
                edges.insert((a.clone(), (*b).clone()));
            }
        }
        if self.side == Side::TwoSided {
            let mut from_b = BTreeSet::new();
            for b in &self.agents_b {
                let lists = self.lists_of(b);
                if lists.is_empty() {
                    return Err(Error::Invalid(format!("agent `{b}` has no preference list")));
                }
                let neighbors = check_same_set(b, &lists)?;
                for a in &neighbors {
                    if !a_set.contains(a) {
                        return Err(Error::Invalid(format!(
                            "list of `{b}` mentions unknown partner `{a}`"
                        )));
                    }
                    from_b.insert(((*a).clone(), b.clone()));
                }
            }
            if from_b != edges {
                return Err(Error::Invalid(
                    "preference lists of the two sides disagree on acceptability".into(),
                ));
            }
        } else {
            // Houses never rank in house allocation.
            for b in &self.agents_b {
                if !self.lists_of(b).is_empty() {
                    return Err(Error::Invalid(format!(
                        "house `{b}` must not carry a preference list"
                    )));
                }
            }
        }
        self.edges = edges;
        Ok(())
    }

    /// All lists owned by `u` anywhere in the scenario set.
    fn lists_of(&self, u: &str) -> Vec<&[AgentId]> {
        match &self.scenarios {
            ScenarioSet::Layers(profiles) => profiles
                .iter()
                .filter_map(|p| p.ranking(u))
                .collect(),
            ScenarioSet::Independent(sets) => sets
                .get(u)
                .map(|ls| ls.iter().map(|l| l.as_slice()).collect())
                .unwrap_or_default(),
            ScenarioSet::Robust { base, .. } => {
                base.ranking(u).map(|l| vec![l]).unwrap_or_default()
            }
        }
    }

    fn ranked_agents(&self) -> Vec<&AgentId> {
        match self.side {
            Side::TwoSided => self.agents_a.iter().chain(self.agents_b.iter()).collect(),
            Side::Ha => self.agents_a.iter().collect(),
        }
    }

    fn check_scenarios(&self) -> Result<()> {
        let ranked: BTreeSet<&AgentId> = self.ranked_agents().into_iter().collect();
        match &self.scenarios {
            ScenarioSet::Layers(profiles) => {
                if profiles.is_empty() {
                    return Err(Error::Invalid("layers scenario needs at least one profile".into()));
                }
                for p in profiles {
                    let keys: BTreeSet<&AgentId> = p.0.keys().collect();
                    if keys != ranked {
                        return Err(Error::Invalid(
                            "every layer must assign exactly one list to every ranked agent".into(),
                        ));
                    }
                }
            }
            ScenarioSet::Independent(sets) => {
                let keys: BTreeSet<&AgentId> = sets.keys().collect();
                if keys != ranked {
                    return Err(Error::Invalid(
                        "independent sets must cover exactly the ranked agents".into(),
                    ));
                }
                for (u, ls) in sets {
                    if ls.is_empty() {
                        return Err(Error::Invalid(format!("agent `{u}` has an empty list set")));
                    }
                }
            }
            ScenarioSet::Robust { base, .. } => {
                let keys: BTreeSet<&AgentId> = base.0.keys().collect();
                if keys != ranked {
                    return Err(Error::Invalid(
                        "robust base profile must cover exactly the ranked agents".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn check_last_resort(&mut self) -> Result<()> {
        let has = self.agents_b.iter().any(|b| b == LAST_RESORT_ID);
        if !has {
            return Ok(());
        }
        if matches!(self.scenarios, ScenarioSet::Robust { .. }) {
            return Err(Error::Invalid(
                "a last-resort house is not allowed under the robust flavor".into(),
            ));
        }
        let want = self.agents_a.len() as u32;
        if self.capacities.get(LAST_RESORT_ID) != Some(&want) {
            return Err(Error::Invalid(format!(
                "last-resort house must have capacity {want}"
            )));
        }
        for a in &self.agents_a {
            for list in self.lists_of(a) {
                if list.last().map(|x| x.as_str()) != Some(LAST_RESORT_ID) {
                    return Err(Error::Invalid(format!(
                        "last-resort house must be last in every list of `{a}`"
                    )));
                }
            }
        }
        self.last_resort = Some(LAST_RESORT_ID.to_string());
        Ok(())
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn agents_a(&self) -> &[AgentId] {
        &self.agents_a
    }

    pub fn agents_b(&self) -> &[AgentId] {
        &self.agents_b
    }

    pub fn capacity(&self, b: &str) -> u32 {
        self.capacities.get(b).copied().unwrap_or(0)
    }

    pub fn edges(&self) -> &BTreeSet<(AgentId, AgentId)> {
        &self.edges
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&(a.to_string(), b.to_string()))
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn last_resort(&self) -> Option<&AgentId> {
        self.last_resort.as_ref()
    }

    pub fn is_agent(&self, u: &str) -> bool {
        self.agents_a.iter().any(|x| x == u) || self.agents_b.iter().any(|x| x == u)
    }

    pub fn neighbors_of_a(&self, a: &str) -> Vec<&AgentId> {
        self.edges
            .iter()
            .filter(|(x, _)| x == a)
            .map(|(_, b)| b)
            .collect()
    }

    pub fn neighbors_of_b(&self, b: &str) -> Vec<&AgentId> {
        self.edges
            .iter()
            .filter(|(_, y)| y == b)
            .map(|(a, _)| a)
            .collect()
    }

    /// The first listed profile: layer 1, each agent's first possible list,
    /// or the robust base profile.
    pub fn first_profile(&self) -> Profile {
        match &self.scenarios {
            ScenarioSet::Layers(ps) => ps[0].clone(),
            ScenarioSet::Independent(sets) => Profile(
                sets.iter()
                    .map(|(u, ls)| (u.clone(), ls[0].clone()))
                    .collect(),
            ),
            ScenarioSet::Robust { base, .. } => base.clone(),
        }
    }

    /// When exactly one profile is realizable, returns it.
    pub fn single_profile(&self) -> Option<Profile> {
        let unique = match &self.scenarios {
            ScenarioSet::Layers(ps) => ps.iter().all(|p| *p == ps[0]),
            ScenarioSet::Independent(sets) => sets.values().all(|ls| {
                let first = &ls[0];
                ls.iter().all(|l| l == first)
            }),
            ScenarioSet::Robust { base, k } => {
                *k == 0 || base.0.values().all(|l| l.len() <= 1)
            }
        };
        unique.then(|| self.first_profile())
    }

    /// Lossy conversion of a layers scenario to independent per-agent sets.
    /// Correlation between the layers is dropped, so this is only meaningful
    /// where the two views provably coincide.
    pub fn to_independent(&self) -> Result<MarketInstance> {
        let ScenarioSet::Layers(profiles) = &self.scenarios else {
            return Err(Error::Unsupported(
                "only layers scenarios convert to independent sets".into(),
            ));
        };
        let mut sets: BTreeMap<AgentId, Vec<Vec<AgentId>>> = BTreeMap::new();
        for u in self.ranked_agents() {
            let mut lists: Vec<Vec<AgentId>> = Vec::new();
            for p in profiles {
                let l = p.ranking(u).expect("validated").to_vec();
                if !lists.contains(&l) {
                    lists.push(l);
                }
            }
            sets.insert(u.clone(), lists);
        }
        self.with_scenarios(ScenarioSet::Independent(sets))
    }

    /// Rebuilds the instance around a replacement scenario set, re-running
    /// all validation.
    pub fn with_scenarios(&self, scenarios: ScenarioSet) -> Result<MarketInstance> {
        let inst = MarketInstance {
            side: self.side,
            agents_a: self.agents_a.clone(),
            agents_b: self.agents_b.clone(),
            capacities: self.capacities.clone(),
            edges: BTreeSet::new(),
            scenarios,
            last_resort: None,
        };
        inst.finish()
    }

    /// Validates a profile against this instance: one ranking per ranked
    /// agent, each a permutation of that agent's neighbors.
    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        let ranked: BTreeSet<&AgentId> = self.ranked_agents().into_iter().collect();
        let keys: BTreeSet<&AgentId> = profile.0.keys().collect();
        if keys != ranked {
            return Err(Error::Invalid(
                "profile must rank exactly the instance's ranked agents".into(),
            ));
        }
        for (u, list) in &profile.0 {
            let neighbors: BTreeSet<&AgentId> = if self.agents_a.contains(u) {
                self.neighbors_of_a(u).into_iter().collect()
            } else {
                self.neighbors_of_b(u).into_iter().collect()
            };
            let listed: BTreeSet<&AgentId> = list.iter().collect();
            if listed.len() != list.len() || listed != neighbors {
                return Err(Error::Invalid(format!(
                    "profile list of `{u}` is not a permutation of its neighbors"
                )));
            }
        }
        Ok(())
    }
}

fn check_same_set<'a>(owner: &str, lists: &[&'a [AgentId]]) -> Result<BTreeSet<&'a AgentId>> {
    let first: BTreeSet<&AgentId> = lists[0].iter().collect();
    if first.len() != lists[0].len() {
        return Err(Error::Invalid(format!("list of `{owner}` contains duplicates")));
    }
    for l in &lists[1..] {
        let s: BTreeSet<&AgentId> = l.iter().collect();
        if s.len() != l.len() {
            return Err(Error::Invalid(format!("list of `{owner}` contains duplicates")));
        }
        if s != first {
            return Err(Error::Invalid(format!(
                "all lists of `{owner}` must rank the same acceptable set"
            )));
        }
    }
    Ok(first)
}

/// A set of agent–partner pairs respecting capacities.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Matching(BTreeSet<(AgentId, AgentId)>);

impl Matching {
    pub fn new() -> Self {
        Matching(BTreeSet::new())
    }

    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (AgentId, AgentId)>,
    {
        Matching(pairs.into_iter().collect())
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(AgentId, AgentId)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.0.contains(&(a.to_string(), b.to_string()))
    }

    pub fn partner_of_a(&self, a: &str) -> Option<&AgentId> {
        self.0.iter().find(|(x, _)| x == a).map(|(_, b)| b)
    }

    pub fn partner_of_b(&self, b: &str) -> Option<&AgentId> {
        self.0.iter().find(|(_, y)| y == b).map(|(a, _)| a)
    }

    pub fn assigned_to(&self, b: &str) -> Vec<&AgentId> {
        self.0
            .iter()
            .filter(|(_, y)| y == b)
            .map(|(a, _)| a)
            .collect()
    }

    /// Checks that the pairs are instance edges and capacities hold.
    pub fn validate(&self, inst: &MarketInstance) -> Result<()> {
        let mut a_used: BTreeMap<&AgentId, u32> = BTreeMap::new();
        let mut b_used: BTreeMap<&AgentId, u32> = BTreeMap::new();
        for (a, b) in &self.0 {
            if !inst.has_edge(a, b) {
                return Err(Error::Invalid(format!("pair ({a},{b}) is not an instance edge")));
            }
            *a_used.entry(a).or_insert(0) += 1;
            *b_used.entry(b).or_insert(0) += 1;
        }
        for (a, n) in a_used {
            if n > 1 {
                return Err(Error::Invalid(format!("agent `{a}` is matched {n} times")));
            }
        }
        for (b, n) in b_used {
            if n > inst.capacity(b) {
                return Err(Error::Invalid(format!(
                    "house `{b}` holds {n} agents but has capacity {}",
                    inst.capacity(b)
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, b)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({a},{b})")?;
        }
        write!(f, "}}")
    }
}

/// A verification outcome: either the property holds, or it fails with a
/// witness and, where one exists, the scenario in which it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub scenario: Option<ScenarioWitness>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            witness: None,
            scenario: None,
        }
    }

    pub fn fail(witness: Witness, scenario: Option<ScenarioWitness>) -> Self {
        Verdict {
            holds: false,
            witness: Some(witness),
            scenario,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Matching(Matching),
    Edge((AgentId, AgentId)),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioWitness {
    /// Index into the layers of a layered scenario.
    Layer(usize),
    /// A fully realized profile.
    Profile(Profile),
}

// ---------------------------------------------------------------------------
// Swap arithmetic
// ---------------------------------------------------------------------------

/// Minimum number of adjacent transpositions turning `x` into `y`; equals the
/// number of discordant pairs (Kendall tau distance).
pub fn swap_distance(x: &PreferenceList, y: &PreferenceList) -> Result<u32> {
    let xs: BTreeSet<&AgentId> = x.ranking.iter().collect();
    let ys: BTreeSet<&AgentId> = y.ranking.iter().collect();
    if xs.len() != x.ranking.len() || ys.len() != y.ranking.len() || xs != ys {
        return Err(Error::DifferentSets);
    }
    let pos: BTreeMap<&AgentId, usize> = y
        .ranking
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let mapped: Vec<usize> = x.ranking.iter().map(|v| pos[v]).collect();
    let mut d = 0;
    for i in 0..mapped.len() {
        for j in i + 1..mapped.len() {
            if mapped[i] > mapped[j] {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// Moves `v` up to `k` places toward the front, preserving all other relative
/// orders. Moving past the front is clamped.
pub fn swap_up(list: &PreferenceList, v: &str, k: u32) -> Result<PreferenceList> {
    let Some(p) = list.rank_of(v) else {
        return Err(Error::NotInList(v.to_string()));
    };
    let target = p.saturating_sub(k as usize);
    let mut ranking = list.ranking.clone();
    let item = ranking.remove(p);
    ranking.insert(target, item);
    Ok(PreferenceList {
        owner: list.owner.clone(),
        ranking,
    })
}

// ---------------------------------------------------------------------------
// Possible and certain preference queries
// ---------------------------------------------------------------------------

fn check_partner_arg(inst: &MarketInstance, u: &str, x: Option<&str>) -> Result<()> {
    if let Some(x) = x {
        let ok = inst.has_edge(u, x) || inst.has_edge(x, u);
        if !ok {
            return Err(Error::NotNeighbors(u.to_string(), x.to_string()));
        }
    }
    Ok(())
}

/// True iff some realizable list of `u` ranks `x` above `y`. `None` stands
/// for being unmatched, which no scenario may rank above an acceptable
/// partner.
pub fn may_prefer(
    inst: &MarketInstance,
    u: &str,
    x: Option<&str>,
    y: Option<&str>,
) -> Result<bool> {
    if !inst.is_agent(u) {
        return Err(Error::UnknownAgent(u.to_string()));
    }
    check_partner_arg(inst, u, x)?;
    check_partner_arg(inst, u, y)?;
    let (x, y) = match (x, y) {
        (None, _) => return Ok(false),
        (Some(_), None) => return Ok(true),
        (Some(x), Some(y)) => (x, y),
    };
    if x == y {
        return Ok(false);
    }
    match inst.scenarios() {
        ScenarioSet::Layers(profiles) => Ok(profiles
            .iter()
            .any(|p| p.rank_of(u, x) < p.rank_of(u, y))),
        ScenarioSet::Independent(sets) => {
            let lists = sets.get(u).expect("validated agent");
            Ok(lists.iter().any(|l| {
                let px = l.iter().position(|v| v == x);
                let py = l.iter().position(|v| v == y);
                px < py
            }))
        }
        ScenarioSet::Robust { base, k } => {
            let px = base.rank_of(u, x).expect("neighbor is ranked");
            let py = base.rank_of(u, y).expect("neighbor is ranked");
            // A pair at positional distance d needs exactly d adjacent swaps
            // to invert, and only one agent's budget applies to it.
            Ok(px < py || (px - py) as u32 <= *k)
        }
    }
}

/// True iff every realizable list of `u` ranks `x` above `y`.
pub fn always_prefers(
    inst: &MarketInstance,
    u: &str,
    x: Option<&str>,
    y: Option<&str>,
) -> Result<bool> {
    if x == y {
        return Ok(false);
    }
    Ok(!may_prefer(inst, u, y, x)?)
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct AgentEntry {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    capacity: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum ScenarioFile {
    #[serde(rename = "layers")]
    Layers { profiles: Vec<Profile> },
    #[serde(rename = "independent")]
    Independent {
        sets: BTreeMap<String, Vec<Vec<String>>>,
    },
    #[serde(rename = "robust")]
    Robust { k: u32, profile: Profile },
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    model: String,
    agents_a: Vec<AgentEntry>,
    agents_b: Vec<AgentEntry>,
    scenario: ScenarioFile,
}

/// Parses the UTF-8 JSON instance format.
pub fn parse_instance(text: &str) -> Result<MarketInstance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let side = match file.model.as_str() {
        "two-sided" => Side::TwoSided,
        "ha" => Side::Ha,
        other => return Err(Error::Malformed(format!("unknown model `{other}`"))),
    };
    for a in &file.agents_a {
        if a.capacity.is_some_and(|q| q != 1) {
            return Err(Error::Invalid(format!(
                "applicant `{}` cannot have a capacity other than 1",
                a.id
            )));
        }
    }
    let scenarios = match file.scenario {
        ScenarioFile::Layers { profiles } => ScenarioSet::Layers(profiles),
        ScenarioFile::Independent { sets } => ScenarioSet::Independent(sets),
        ScenarioFile::Robust { k, profile } => ScenarioSet::Robust { base: profile, k },
    };
    let agents_a = file.agents_a.into_iter().map(|a| a.id).collect();
    match side {
        Side::TwoSided => {
            for b in &file.agents_b {
                if b.capacity.is_some_and(|q| q != 1) {
                    return Err(Error::Invalid(format!(
                        "two-sided agent `{}` cannot have a capacity other than 1",
                        b.id
                    )));
                }
            }
            let agents_b = file.agents_b.into_iter().map(|b| b.id).collect();
            MarketInstance::two_sided(agents_a, agents_b, scenarios)
        }
        Side::Ha => {
            let houses = file
                .agents_b
                .into_iter()
                .map(|b| {
                    let q = b.capacity.unwrap_or(1);
                    (b.id, q)
                })
                .collect();
            MarketInstance::ha(agents_a, houses, scenarios)
        }
    }
}

/// Canonical serialization: keys sorted, arrays in input order, two-space
/// indentation, trailing newline. `parse_instance ∘ serialize_instance` is
/// the identity, and so is the reverse on canonical input.
pub fn serialize_instance(inst: &MarketInstance) -> String {
    let scenario = match inst.scenarios() {
        ScenarioSet::Layers(profiles) => ScenarioFile::Layers {
            profiles: profiles.clone(),
        },
        ScenarioSet::Independent(sets) => ScenarioFile::Independent { sets: sets.clone() },
        ScenarioSet::Robust { base, k } => ScenarioFile::Robust {
            k: *k,
            profile: base.clone(),
        },
    };
    let file = InstanceFile {
        model: match inst.side() {
            Side::TwoSided => "two-sided".into(),
            Side::Ha => "ha".into(),
        },
        agents_a: inst
            .agents_a()
            .iter()
            .map(|id| AgentEntry {
                id: id.clone(),
                capacity: None,
            })
            .collect(),
        agents_b: inst
            .agents_b()
            .iter()
            .map(|id| AgentEntry {
                id: id.clone(),
                capacity: match inst.side() {
                    Side::TwoSided => None,
                    Side::Ha => Some(inst.capacity(id)),
                },
            })
            .collect(),
        scenario,
    };
    // serde_json's Value sorts object keys, which pins the canonical bytes.
    let value = serde_json::to_value(&file).expect("instance serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}

/// Parses a matching file: a JSON array of `[a, b]` pairs.
pub fn parse_matching(text: &str) -> Result<Matching> {
    let pairs: Vec<(AgentId, AgentId)> =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    Ok(Matching::from_pairs(pairs))
}

pub fn serialize_matching(m: &Matching) -> String {
    let pairs: Vec<[&AgentId; 2]> = m.pairs().map(|(a, b)| [a, b]).collect();
    let mut s = serde_json::to_string_pretty(&pairs).expect("matching serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(owner: &str, ranking: &[&str]) -> PreferenceList {
        PreferenceList::new(owner, ranking.iter().map(|s| s.to_string()).collect())
    }

    pub(crate) fn profile(entries: &[(&str, &[&str])]) -> Profile {
        Profile(
            entries
                .iter()
                .map(|(u, l)| (u.to_string(), l.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
    }

    fn robust_one_agent(base: &[&str], k: u32) -> MarketInstance {
        let houses = base.iter().map(|b| (b.to_string(), 1)).collect();
        MarketInstance::ha(
            vec!["a".into()],
            houses,
            ScenarioSet::Robust {
                base: profile(&[("a", base)]),
                k,
            },
        )
        .unwrap()
    }

    #[test]
    fn minimal_two_sided_round_trip() {
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a1"}],
            "agents_b": [{"id": "b1"}],
            "scenario": {"type": "layers", "profiles": [{"a1": ["b1"], "b1": ["a1"]}]}
        }"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.agents_a().len(), 1);
        assert_eq!(inst.agents_b().len(), 1);
        assert!(inst.has_edge("a1", "b1"));
        let canon = serialize_instance(&inst);
        let again = parse_instance(&canon).unwrap();
        assert_eq!(inst, again);
        assert_eq!(serialize_instance(&again), canon);
    }

    #[test]
    fn list_omitting_neighbor_is_rejected() {
        // a1 ranks only b1 while b2 ranks a1: acceptability disagrees.
        let text = r#"{
            "model": "two-sided",
            "agents_a": [{"id": "a1"}],
            "agents_b": [{"id": "b1"}, {"id": "b2"}],
            "scenario": {"type": "layers", "profiles": [
                {"a1": ["b1"], "b1": ["a1"], "b2": ["a1"]}
            ]}
        }"#;
        assert!(matches!(parse_instance(text), Err(Error::Invalid(_))));
    }

    #[test]
    fn capacity_zero_is_rejected() {
        let text = r#"{
            "model": "ha",
            "agents_a": [{"id": "a1"}],
            "agents_b": [{"id": "b1", "capacity": 0}],
            "scenario": {"type": "layers", "profiles": [{"a1": ["b1"]}]}
        }"#;
        assert!(matches!(parse_instance(text), Err(Error::Invalid(_))));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = r#"{
            "model": "ha",
            "agents_a": [{"id": "a1"}, {"id": "a1"}],
            "agents_b": [{"id": "b1"}],
            "scenario": {"type": "layers", "profiles": [{"a1": ["b1"]}]}
        }"#;
        assert!(matches!(parse_instance(text), Err(Error::Invalid(_))));
    }

    #[test]
    fn ha_independent_round_trips_byte_identically() {
        let text = r#"{
            "model": "ha",
            "agents_a": [{"id": "a1"}, {"id": "a2"}],
            "agents_b": [{"id": "b1", "capacity": 2}, {"id": "b2", "capacity": 1}],
            "scenario": {"type": "independent", "sets": {
                "a1": [["b1", "b2"], ["b2", "b1"]],
                "a2": [["b1", "b2"], ["b2", "b1"]]
            }}
        }"#;
        let inst = parse_instance(text).unwrap();
        let canon = serialize_instance(&inst);
        assert_eq!(serialize_instance(&parse_instance(&canon).unwrap()), canon);
    }

    #[test]
    fn swap_distance_examples() {
        let x = list("u", &["a1", "a2", "a3"]);
        let y = list("u", &["a2", "a3", "a1"]);
        assert_eq!(swap_distance(&x, &y).unwrap(), 2);
        assert_eq!(swap_distance(&x, &x).unwrap(), 0);
        let rev = list("u", &["a3", "a2", "a1"]);
        assert_eq!(swap_distance(&x, &rev).unwrap(), 3);
    }

    #[test]
    fn swap_distance_rejects_different_sets() {
        let x = list("u", &["a1", "a2"]);
        let y = list("u", &["a1", "a3"]);
        assert!(matches!(swap_distance(&x, &y), Err(Error::DifferentSets)));
    }

    #[test]
    fn swap_up_examples() {
        let l = list("u", &["v1", "v2", "v3", "v4"]);
        let up = swap_up(&l, "v4", 2).unwrap();
        assert_eq!(up.ranking, vec!["v1", "v4", "v2", "v3"]);

        let l2 = list("u", &["v1", "v2"]);
        assert_eq!(swap_up(&l2, "v1", 5).unwrap().ranking, vec!["v1", "v2"]);

        let l3 = list("u", &["v1", "v2", "v3"]);
        assert_eq!(swap_up(&l3, "v3", 1).unwrap().ranking, vec!["v1", "v3", "v2"]);

        assert!(matches!(swap_up(&l3, "v9", 1), Err(Error::NotInList(_))));
    }

    #[test]
    fn may_prefer_robust_matches_pairwise_rule() {
        let inst = robust_one_agent(&["b1", "b2", "b3"], 1);
        assert!(may_prefer(&inst, "a", Some("b2"), Some("b1")).unwrap());
        assert!(!may_prefer(&inst, "a", Some("b3"), Some("b1")).unwrap());
    }

    #[test]
    fn unmatched_is_never_preferred() {
        let inst = robust_one_agent(&["b1", "b2"], 2);
        assert!(!may_prefer(&inst, "a", None, Some("b1")).unwrap());
        assert!(may_prefer(&inst, "a", Some("b1"), None).unwrap());
    }

    #[test]
    fn may_prefer_independent_uses_any_list() {
        let sets: BTreeMap<AgentId, Vec<Vec<AgentId>>> = [(
            "a".to_string(),
            vec![
                vec!["b1".to_string(), "b2".to_string()],
                vec!["b2".to_string(), "b1".to_string()],
            ],
        )]
        .into();
        let inst = MarketInstance::ha(
            vec!["a".into()],
            vec![("b1".into(), 1), ("b2".into(), 1)],
            ScenarioSet::Independent(sets),
        )
        .unwrap();
        assert!(may_prefer(&inst, "a", Some("b2"), Some("b1")).unwrap());
    }

    #[test]
    fn always_prefers_robust_gap() {
        let inst = robust_one_agent(&["b1", "b2", "b3", "b4"], 2);
        assert!(always_prefers(&inst, "a", Some("b1"), Some("b4")).unwrap());
        assert!(!always_prefers(&inst, "a", Some("b1"), Some("b3")).unwrap());
        assert!(!always_prefers(&inst, "a", Some("b1"), Some("b1")).unwrap());
    }

    #[test]
    fn identical_layers_behave_like_one_list() {
        let p = profile(&[("a", &["b1", "b2"])]);
        let inst = MarketInstance::ha(
            vec!["a".into()],
            vec![("b1".into(), 1), ("b2".into(), 1)],
            ScenarioSet::Layers(vec![p.clone(), p]),
        )
        .unwrap();
        assert!(always_prefers(&inst, "a", Some("b1"), Some("b2")).unwrap());
        assert!(!may_prefer(&inst, "a", Some("b2"), Some("b1")).unwrap());
    }

    #[test]
    fn unknown_agent_is_reported() {
        let inst = robust_one_agent(&["b1"], 0);
        assert!(matches!(
            may_prefer(&inst, "zz", Some("b1"), None),
            Err(Error::UnknownAgent(_))
        ));
    }

    #[test]
    fn last_resort_must_be_last_and_sized() {
        let text = r#"{
            "model": "ha",
            "agents_a": [{"id": "a1"}, {"id": "a2"}],
            "agents_b": [{"id": "b1"}, {"id": "~last-resort", "capacity": 2}],
            "scenario": {"type": "layers", "profiles": [
                {"a1": ["b1", "~last-resort"], "a2": ["~last-resort", "b1"]}
            ]}
        }"#;
        assert!(matches!(parse_instance(text), Err(Error::Invalid(_))));
    }
}
