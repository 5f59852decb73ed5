//! Proposal-and-deletion solver for matchings that are stable under every
//! realizable preference profile.
//!
//! The market is modeled as a bipartite multigraph of *slots* (edge copies).
//! Each agent carries a non-empty set of possible linear orders over its
//! incident slots; slot `x` certainly dominates slot `y` for an agent when
//! every order ranks `x` above `y`. A matching is certainly stable iff no
//! unused slot exists whose two endpoints both fail to certainly prefer
//! their assigned slot.
//!
//! The solver deletes slots that can belong to no certainly stable matching:
//!
//! 1. while slot `s` is maximal (undominated among the agent's alive slots)
//!    for its A-endpoint, it counts as a proposal to its B-endpoint, and the
//!    B-endpoint deletes every alive slot certainly dominated by a proposal;
//! 2. a B-endpoint holding two incomparable proposals deletes both, because
//!    matching either one leaves the other as a possible blocking slot.
//!
//! Deletions are monotone, so the fixpoint is reached after at most one
//! deletion per slot. The surviving proposal assignment is returned only
//! after the unconditional pairwise certification below passes; otherwise no
//! certainly stable matching exists.

/// A bipartite slot market with per-agent sets of possible slot orders.
pub(crate) struct PosetMarket {
    pub n_a: usize,
    pub n_b: usize,
    /// Endpoints per slot.
    pub slot_a: Vec<u32>,
    pub slot_b: Vec<u32>,
    /// Incident slots per agent, ascending slot id.
    pub a_slots: Vec<Vec<u32>>,
    pub b_slots: Vec<Vec<u32>>,
    /// `ranks_a[a][list][local]` = rank of `a_slots[a][local]` in that list.
    pub ranks_a: Vec<Vec<Vec<u32>>>,
    pub ranks_b: Vec<Vec<Vec<u32>>>,
    /// Position of each slot inside its endpoint's incidence list.
    pub local_a: Vec<u32>,
    pub local_b: Vec<u32>,
}

impl PosetMarket {
    pub fn new(n_a: usize, n_b: usize, endpoints: &[(u32, u32)]) -> PosetMarket {
        let mut a_slots = vec![Vec::new(); n_a];
        let mut b_slots = vec![Vec::new(); n_b];
        let mut local_a = vec![0u32; endpoints.len()];
        let mut local_b = vec![0u32; endpoints.len()];
        for (s, &(a, b)) in endpoints.iter().enumerate() {
            local_a[s] = a_slots[a as usize].len() as u32;
            a_slots[a as usize].push(s as u32);
            local_b[s] = b_slots[b as usize].len() as u32;
            b_slots[b as usize].push(s as u32);
        }
        PosetMarket {
            n_a,
            n_b,
            slot_a: endpoints.iter().map(|&(a, _)| a).collect(),
            slot_b: endpoints.iter().map(|&(_, b)| b).collect(),
            a_slots,
            b_slots,
            ranks_a: vec![Vec::new(); n_a],
            ranks_b: vec![Vec::new(); n_b],
            local_a,
            local_b,
        }
    }

    /// Every order of `a` ranks slot `s` above slot `t`.
    fn a_dominates(&self, a: usize, s: u32, t: u32) -> bool {
        let ls = self.local_a[s as usize] as usize;
        let lt = self.local_a[t as usize] as usize;
        self.ranks_a[a].iter().all(|r| r[ls] < r[lt])
    }

    fn b_dominates(&self, b: usize, s: u32, t: u32) -> bool {
        let ls = self.local_b[s as usize] as usize;
        let lt = self.local_b[t as usize] as usize;
        self.ranks_b[b].iter().all(|r| r[ls] < r[lt])
    }

    /// Runs the deletion fixpoint and certifies the surviving assignment.
    /// Returns the chosen slots, or `None` when no certainly stable matching
    /// exists.
    pub fn solve(&self) -> Option<Vec<u32>> {
        let n_slots = self.slot_a.len();
        let mut alive = vec![true; n_slots];
        // Number of alive same-agent slots certainly dominating each slot.
        let mut cnt = vec![0u32; n_slots];
        for a in 0..self.n_a {
            let slots = &self.a_slots[a];
            for &s in slots {
                let mut c = 0;
                for &t in slots {
                    if t != s && self.a_dominates(a, t, s) {
                        c += 1;
                    }
                }
                cnt[s as usize] = c;
            }
        }

        let mut pending: Vec<Vec<u32>> = vec![Vec::new(); self.n_b];
        let mut applied: Vec<Vec<u32>> = vec![Vec::new(); self.n_b];
        let mut in_queue = vec![false; self.n_b];
        let mut queue = std::collections::VecDeque::new();
        for s in 0..n_slots {
            if cnt[s] == 0 {
                let b = self.slot_b[s] as usize;
                pending[b].push(s as u32);
                if !in_queue[b] {
                    in_queue[b] = true;
                    queue.push_back(b);
                }
            }
        }

        // Deleting a slot may promote lower slots of the same A-agent to
        // maximality, which turns them into proposals.
        let delete = |s: u32,
                      alive: &mut Vec<bool>,
                      cnt: &mut Vec<u32>,
                      pending: &mut Vec<Vec<u32>>,
                      in_queue: &mut Vec<bool>,
                      queue: &mut std::collections::VecDeque<usize>| {
            if !alive[s as usize] {
                return;
            }
            alive[s as usize] = false;
            let a = self.slot_a[s as usize] as usize;
            for &t in &self.a_slots[a] {
                if t != s && alive[t as usize] && self.a_dominates(a, s, t) {
                    cnt[t as usize] -= 1;
                    if cnt[t as usize] == 0 {
                        let b = self.slot_b[t as usize] as usize;
                        pending[b].push(t);
                        if !in_queue[b] {
                            in_queue[b] = true;
                            queue.push_back(b);
                        }
                    }
                }
            }
        };

        while let Some(b) = queue.pop_front() {
            in_queue[b] = false;
            let mut new: Vec<u32> = std::mem::take(&mut pending[b]);
            new.sort_unstable();
            new.dedup();
            new.retain(|&s| alive[s as usize]);
            if new.is_empty() {
                continue;
            }
            applied[b].retain(|&s| alive[s as usize]);
            let mut doomed: Vec<u32> = Vec::new();
            // Rule 1 against the new proposals only; older proposals already
            // had their dominated slots removed when they arrived.
            for &s in &self.b_slots[b] {
                if !alive[s as usize] {
                    continue;
                }
                if new.iter().any(|&p| p != s && self.b_dominates(b, p, s)) {
                    doomed.push(s);
                }
            }
            // Rule 2: any incomparable pair of proposals dooms both ends.
            for (i, &p) in new.iter().enumerate() {
                for &q in applied[b].iter().chain(new[i + 1..].iter()) {
                    if p != q && !self.b_dominates(b, p, q) && !self.b_dominates(b, q, p) {
                        doomed.push(p);
                        doomed.push(q);
                    }
                }
            }
            doomed.sort_unstable();
            doomed.dedup();
            for &s in &new {
                if !doomed.contains(&s) {
                    applied[b].push(s);
                }
            }
            for s in doomed {
                delete(s, &mut alive, &mut cnt, &mut pending, &mut in_queue, &mut queue);
            }
        }

        // Surviving maximal slots form the candidate assignment. An agent
        // with two surviving maximal slots cannot be satisfied.
        let mut chosen: Vec<u32> = Vec::new();
        for a in 0..self.n_a {
            let heads: Vec<u32> = self.a_slots[a]
                .iter()
                .copied()
                .filter(|&s| alive[s as usize] && cnt[s as usize] == 0)
                .collect();
            match heads.len() {
                0 => {}
                1 => chosen.push(heads[0]),
                _ => return None,
            }
        }
        if !self.certifies(&chosen) {
            return None;
        }
        Some(chosen)
    }

    /// Pairwise certification: no unused slot may block, i.e. for every slot
    /// outside the assignment at least one endpoint certainly prefers its
    /// assigned slot.
    pub fn certifies(&self, chosen: &[u32]) -> bool {
        let mut at_a: Vec<Option<u32>> = vec![None; self.n_a];
        let mut at_b: Vec<Option<u32>> = vec![None; self.n_b];
        for &s in chosen {
            at_a[self.slot_a[s as usize] as usize] = Some(s);
            at_b[self.slot_b[s as usize] as usize] = Some(s);
        }
        for s in 0..self.slot_a.len() as u32 {
            let a = self.slot_a[s as usize] as usize;
            let b = self.slot_b[s as usize] as usize;
            if at_a[a] == Some(s) {
                continue;
            }
            let a_holds = at_a[a].is_some_and(|m| self.a_dominates(a, m, s));
            let b_holds = at_b[b].is_some_and(|m| self.b_dominates(b, m, s));
            if !a_holds && !b_holds {
                return false;
            }
        }
        true
    }
}
