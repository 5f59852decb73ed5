//! Bipartite assignment engines shared by the solvers: maximum matching,
//! minimum-weight perfect matching on complete weight matrices, and
//! feasibility of capacitated assignments with fill (lower-bound)
//! constraints.
//!
//! All functions are pure and deterministic for a fixed input order.

use crate::instance::{Error, Result};

/// A square integer weight matrix for the perfect-matching verifier.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<Vec<i64>>,
}

impl WeightMatrix {
    pub fn new(w: Vec<Vec<i64>>) -> Result<Self> {
        let n = w.len();
        if w.iter().any(|row| row.len() != n) {
            return Err(Error::Invalid("weight matrix must be square".into()));
        }
        Ok(WeightMatrix { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.w[i][j]
    }
}

/// Maximum-cardinality matching via augmenting paths. Returns, per left
/// vertex, the matched right vertex. `adj` lists right neighbors per left
/// vertex; `n_right` is the size of the right side.
pub fn max_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut right_of: Vec<Option<usize>> = vec![None; n_left];
    let mut left_of: Vec<Option<usize>> = vec![None; n_right];

    fn try_augment(
        u: usize,
        adj: &[Vec<usize>],
        visited: &mut [bool],
        right_of: &mut [Option<usize>],
        left_of: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            let free = match left_of[v] {
                None => true,
                Some(w) => try_augment(w, adj, visited, right_of, left_of),
            };
            if free {
                right_of[u] = Some(v);
                left_of[v] = Some(u);
                return true;
            }
        }
        false
    }

    for u in 0..n_left {
        let mut visited = vec![false; n_right];
        try_augment(u, adj, &mut visited, &mut right_of, &mut left_of);
    }
    right_of
}

/// Minimum-weight perfect matching on a complete square matrix, O(n³)
/// shortest-augmenting-path form with integer potentials. Returns the column
/// assigned to each row and the total weight.
pub fn min_weight_perfect_matching(m: &WeightMatrix) -> (Vec<usize>, i64) {
    let n = m.n();
    if n == 0 {
        return (Vec::new(), 0);
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based columns; p[j] = row matched to column j, p[0] = row being placed.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = m.at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| m.at(i, row_to_col[i])).sum();
    (row_to_col, total)
}

/// A capacitated assignment problem with fill constraints: every house in
/// `required_fill` must receive exactly its capacity, and when `a_perfect`
/// is set every left agent must be matched.
#[derive(Debug, Clone)]
pub struct FillProblem {
    /// Right neighbors per left agent.
    pub adj: Vec<Vec<usize>>,
    /// Capacity per right vertex.
    pub capacities: Vec<u32>,
    /// Right vertices that must be filled to capacity.
    pub required_fill: Vec<usize>,
    pub a_perfect: bool,
}

/// Decides feasibility of a [`FillProblem`] via a max-flow with lower bounds
/// (one feasibility check on the transformed network) and returns a matching
/// meeting all constraints, or `None` when none exists.
pub fn solve_fill(problem: &FillProblem) -> Option<Vec<(usize, usize)>> {
    let n_a = problem.adj.len();
    let n_b = problem.capacities.len();
    let mut required = vec![false; n_b];
    for &b in &problem.required_fill {
        required[b] = true;
    }
    // Quick infeasibility: a required house cannot exceed its degree.
    let mut degree = vec![0u32; n_b];
    for l in &problem.adj {
        for &b in l {
            degree[b] += 1;
        }
    }
    for b in 0..n_b {
        if required[b] && degree[b] < problem.capacities[b] {
            return None;
        }
    }

    // Nodes: 0 = source, 1 = sink, 2 = super-source, 3 = super-sink,
    // then A agents, then B houses.
    let source = 0;
    let sink = 1;
    let ss = 2;
    let tt = 3;
    let a_node = |a: usize| 4 + a;
    let b_node = |b: usize| 4 + n_a + b;
    let mut net = Dinic::new(4 + n_a + n_b);

    let mut lower_total: i64 = 0;
    let mut add = |net: &mut Dinic, from: usize, to: usize, lower: i64, upper: i64| -> usize {
        // Standard lower-bound transformation: route the mandatory part
        // through the super terminals.
        if lower > 0 {
            net.add_edge(ss, to, lower);
            net.add_edge(from, tt, lower);
            lower_total += lower;
        }
        net.add_edge(from, to, upper - lower)
    };

    for a in 0..n_a {
        let lower = i64::from(problem.a_perfect);
        add(&mut net, source, a_node(a), lower, 1);
    }
    let mut edge_handles = Vec::new();
    for a in 0..n_a {
        for &b in &problem.adj[a] {
            let h = add(&mut net, a_node(a), b_node(b), 0, 1);
            edge_handles.push((a, b, h));
        }
    }
    for b in 0..n_b {
        let q = i64::from(problem.capacities[b]);
        let lower = if required[b] { q } else { 0 };
        add(&mut net, b_node(b), sink, lower, q);
    }
    // Close the circulation.
    add(&mut net, sink, source, 0, i64::MAX / 4);

    let flow = net.max_flow(ss, tt);
    if flow < lower_total {
        return None;
    }
    let mut out = Vec::new();
    for (a, b, h) in edge_handles {
        if net.flow_on(h) > 0 {
            out.push((a, b));
        }
    }
    out.sort_unstable();
    Some(out)
}

/// Plain Dinic max-flow.
struct Dinic {
    to: Vec<usize>,
    cap: Vec<i64>,
    head: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
    initial: Vec<i64>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            to: Vec::new(),
            cap: Vec::new(),
            head: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
            initial: Vec::new(),
        }
    }

    /// Returns a handle usable with [`Dinic::flow_on`].
    fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> usize {
        let h = self.to.len();
        self.head[from].push(h);
        self.to.push(to);
        self.cap.push(cap);
        self.initial.push(cap);
        self.head[to].push(h + 1);
        self.to.push(from);
        self.cap.push(0);
        self.initial.push(0);
        h
    }

    fn flow_on(&self, handle: usize) -> i64 {
        self.initial[handle] - self.cap[handle]
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &h in &self.head[u] {
                let v = self.to[h];
                if self.cap[h] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, f: i64) -> i64 {
        if u == t {
            return f;
        }
        while self.iter[u] < self.head[u].len() {
            let h = self.head[u][self.iter[u]];
            let v = self.to[h];
            if self.cap[h] > 0 && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(self.cap[h]));
                if d > 0 {
                    self.cap[h] -= d;
                    self.cap[h ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX / 4);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}
