//! A small finite-domain table-constraint engine: depth-first search with generalized arc
//! consistency, deterministic lexicographic solution order, budgets and a parallel split.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Allowed tuples of one arity, stored flat.
#[derive(Clone, Debug)]
pub struct Table {
    arity: usize,
    tuples: Vec<u32>,
}

impl Table {
    pub fn new(arity: usize, tuples: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut flat = Vec::new();
        for t in tuples {
            assert_eq!(t.len(), arity, "tuple arity mismatch");
            flat.extend(t);
        }
        Table { arity, tuples: flat }
    }

    pub fn from_quads(quads: &[[u32; 4]]) -> Self {
        Table {
            arity: 4,
            tuples: quads.iter().flatten().copied().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len().checked_div(self.arity).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn rows(&self) -> std::slice::ChunksExact<'_, u32> {
        self.tuples.chunks_exact(self.arity.max(1))
    }
}

#[derive(Clone, Debug)]
struct Constraint {
    scope: Vec<usize>,
    table: Arc<Table>,
}

/// Search limits; exceeding either aborts with [`Error::Budget`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn nodes(n: u64) -> Self {
        Budget {
            max_nodes: Some(n),
            deadline: None,
        }
    }
}

/// A constraint network over variables with domains `0..size`.
#[derive(Clone, Debug)]
pub struct Csp {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    words: usize,
    constraints: Vec<Constraint>,
    var_cons: Vec<Vec<usize>>,
}

fn words_for(size: usize) -> usize {
    size.div_ceil(64).max(1)
}

struct Shared {
    nodes: AtomicU64,
    found: AtomicU64,
    stop: AtomicBool,
    exceeded: AtomicBool,
    budget: Budget,
}

impl Shared {
    fn new(budget: Budget) -> Self {
        Shared {
            nodes: AtomicU64::new(0),
            found: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            exceeded: AtomicBool::new(false),
            budget,
        }
    }

    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over_nodes = self.budget.max_nodes.is_some_and(|m| n > m);
        let over_time = n.is_multiple_of(1024) && self.budget.deadline.is_some_and(|d| Instant::now() >= d);
        if over_nodes || over_time {
            self.exceeded.store(true, Ordering::Relaxed);
            self.stop.store(true, Ordering::Relaxed);
        }
        !self.stop.load(Ordering::Relaxed)
    }

    fn outcome(&self) -> Result<()> {
        if self.exceeded.load(Ordering::Relaxed) {
            Err(Error::Budget {
                nodes: self.nodes.load(Ordering::Relaxed),
                lower_bound: self.found.load(Ordering::Relaxed),
            })
        } else {
            Ok(())
        }
    }
}

/// What a visitor wants after seeing a solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Visit {
    Continue,
    Stop,
}

impl Csp {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut words = 0;
        for &s in &sizes {
            offsets.push(words);
            words += words_for(s);
        }
        let var_cons = vec![Vec::new(); sizes.len()];
        Csp {
            sizes,
            offsets,
            words,
            constraints: Vec::new(),
            var_cons,
        }
    }

    pub fn var_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn add(&mut self, scope: Vec<usize>, table: Arc<Table>) {
        assert_eq!(scope.len(), table.arity, "scope/table arity mismatch");
        let id = self.constraints.len();
        for &v in &scope {
            if !self.var_cons[v].contains(&id) {
                self.var_cons[v].push(id);
            }
        }
        self.constraints.push(Constraint { scope, table });
    }

    /// Adds a unary restriction of `var` to `values`.
    pub fn restrict(&mut self, var: usize, values: &[u32]) {
        let table = Table::new(1, values.iter().map(|&v| vec![v]));
        self.add(vec![var], Arc::new(table));
    }

    fn initial_domains(&self) -> Vec<u64> {
        let mut dom = vec![0u64; self.words];
        for (v, &s) in self.sizes.iter().enumerate() {
            let off = self.offsets[v];
            for x in 0..s {
                dom[off + x / 64] |= 1 << (x % 64);
            }
        }
        dom
    }

    fn has(&self, dom: &[u64], var: usize, x: u32) -> bool {
        let x = x as usize;
        x < self.sizes[var] && dom[self.offsets[var] + x / 64] >> (x % 64) & 1 == 1
    }

    fn slice<'a>(&self, dom: &'a [u64], var: usize) -> &'a [u64] {
        &dom[self.offsets[var]..self.offsets[var] + words_for(self.sizes[var])]
    }

    fn domain_size(&self, dom: &[u64], var: usize) -> u32 {
        self.slice(dom, var).iter().map(|w| w.count_ones()).sum()
    }

    fn values(&self, dom: &[u64], var: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for (k, &w) in self.slice(dom, var).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros();
                out.push(k as u32 * 64 + b);
                w &= w - 1;
            }
        }
        out
    }

    fn assign(&self, dom: &mut [u64], var: usize, x: u32) {
        let off = self.offsets[var];
        for w in &mut dom[off..off + words_for(self.sizes[var])] {
            *w = 0;
        }
        dom[off + x as usize / 64] |= 1 << (x % 64);
    }

    /// Generalized arc consistency for one constraint; pushes narrowed variables onto
    /// `changed` and returns false on a domain wipeout.
    fn revise(&self, c: usize, dom: &mut [u64], scratch: &mut Vec<u64>, changed: &mut Vec<usize>) -> bool {
        let con = &self.constraints[c];
        let mut starts = Vec::with_capacity(con.scope.len());
        let mut total = 0;
        for &v in &con.scope {
            starts.push(total);
            total += words_for(self.sizes[v]);
        }
        scratch.clear();
        scratch.resize(total, 0);
        'rows: for row in con.table.rows() {
            for (p, &v) in con.scope.iter().enumerate() {
                if !self.has(dom, v, row[p]) {
                    continue 'rows;
                }
            }
            for (p, &x) in row.iter().enumerate() {
                scratch[starts[p] + x as usize / 64] |= 1 << (x % 64);
            }
        }
        for (p, &v) in con.scope.iter().enumerate() {
            let off = self.offsets[v];
            let n = words_for(self.sizes[v]);
            let mut any = false;
            let mut diff = false;
            for k in 0..n {
                let new = dom[off + k] & scratch[starts[p] + k];
                diff |= new != dom[off + k];
                any |= new != 0;
                dom[off + k] = new;
            }
            if !any {
                return false;
            }
            if diff {
                changed.push(v);
            }
        }
        true
    }

    fn propagate(&self, dom: &mut [u64], mut queue: Vec<usize>, scratch: &mut Vec<u64>) -> bool {
        let mut queued = vec![false; self.constraints.len()];
        for &c in &queue {
            queued[c] = true;
        }
        let mut changed = Vec::new();
        let mut head = 0;
        while head < queue.len() {
            let c = queue[head];
            head += 1;
            queued[c] = false;
            changed.clear();
            if !self.revise(c, dom, scratch, &mut changed) {
                return false;
            }
            for &v in &changed {
                for &d in &self.var_cons[v] {
                    if d != c && !queued[d] {
                        queued[d] = true;
                        queue.push(d);
                    }
                }
            }
            if head > 4096 && head * 2 > queue.len() {
                queue.drain(..head);
                head = 0;
            }
        }
        true
    }

    fn root(&self, scratch: &mut Vec<u64>) -> Option<Vec<u64>> {
        let mut dom = self.initial_domains();
        if self.sizes.contains(&0) {
            return None;
        }
        let all: Vec<usize> = (0..self.constraints.len()).collect();
        self.propagate(&mut dom, all, scratch).then_some(dom)
    }

    fn solution(&self, dom: &[u64]) -> Vec<u32> {
        (0..self.sizes.len()).map(|v| self.values(dom, v)[0]).collect()
    }

    fn first_open(&self, dom: &[u64], from: usize) -> Option<usize> {
        (from..self.sizes.len()).find(|&v| self.domain_size(dom, v) > 1)
    }

    fn child(&self, dom: &[u64], var: usize, x: u32, scratch: &mut Vec<u64>) -> Option<Vec<u64>> {
        let mut next = dom.to_vec();
        self.assign(&mut next, var, x);
        self.propagate(&mut next, self.var_cons[var].clone(), scratch)
            .then_some(next)
    }

    fn dfs(
        &self,
        dom: &[u64],
        from: usize,
        shared: &Shared,
        scratch: &mut Vec<u64>,
        visit: &mut dyn FnMut(&[u32]) -> Visit,
    ) {
        if shared.stop.load(Ordering::Relaxed) {
            return;
        }
        match self.first_open(dom, from) {
            None => {
                shared.found.fetch_add(1, Ordering::Relaxed);
                if visit(&self.solution(dom)) == Visit::Stop {
                    shared.stop.store(true, Ordering::Relaxed);
                }
            }
            Some(var) => {
                for x in self.values(dom, var) {
                    if !shared.tick() {
                        return;
                    }
                    if let Some(next) = self.child(dom, var, x, scratch) {
                        self.dfs(&next, var + 1, shared, scratch, visit);
                    }
                    if shared.stop.load(Ordering::Relaxed) {
                        return;
                    }
                }
            }
        }
    }

    /// Visits every solution in lexicographic order (variable order, then value order).
    pub fn visit(&self, budget: Budget, mut f: impl FnMut(&[u32]) -> Visit) -> Result<u64> {
        let shared = Shared::new(budget);
        let mut scratch = Vec::new();
        if let Some(dom) = self.root(&mut scratch) {
            self.dfs(&dom, 0, &shared, &mut scratch, &mut f);
        }
        shared.outcome()?;
        Ok(shared.found.load(Ordering::Relaxed))
    }

    /// Subproblems obtained by branching on leading open variables, in lexicographic order,
    /// until there are at least `want` of them or nothing is left to split.
    fn frontier(&self, want: usize, scratch: &mut Vec<u64>) -> Vec<(Vec<u64>, usize)> {
        let Some(dom) = self.root(scratch) else {
            return Vec::new();
        };
        let mut layer = vec![(dom, 0usize)];
        loop {
            if layer.len() >= want {
                return layer;
            }
            let mut next = Vec::new();
            let mut split_any = false;
            for (dom, from) in layer {
                match self.first_open(&dom, from) {
                    None => next.push((dom, from)),
                    Some(var) => {
                        split_any = true;
                        for x in self.values(&dom, var) {
                            if let Some(ch) = self.child(&dom, var, x, scratch) {
                                next.push((ch, var + 1));
                            }
                        }
                    }
                }
            }
            layer = next;
            if !split_any {
                return layer;
            }
        }
    }

    fn pool(threads: usize) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::usage(format!("cannot build thread pool: {e}")))
    }

    /// Number of solutions; independent of `threads`.
    pub fn count(&self, threads: usize, budget: Budget) -> Result<u64> {
        if threads <= 1 {
            return self.visit(budget, |_| Visit::Continue);
        }
        let shared = Shared::new(budget);
        let mut scratch = Vec::new();
        let tasks = self.frontier(threads * 8, &mut scratch);
        let pool = Self::pool(threads)?;
        pool.install(|| {
            tasks.par_iter().for_each(|(dom, from)| {
                let mut scratch = Vec::new();
                self.dfs(dom, *from, &shared, &mut scratch, &mut |_| Visit::Continue);
            })
        });
        shared.outcome()?;
        Ok(shared.found.load(Ordering::Relaxed))
    }

    /// Runs `f` on every solution across `threads` workers; stops at the first `Stop`.
    /// Returns the number of solutions visited.
    pub fn visit_parallel(&self, threads: usize, budget: Budget, f: impl Fn(&[u32]) -> Visit + Sync) -> Result<u64> {
        let shared = Shared::new(budget);
        let mut scratch = Vec::new();
        let tasks = self.frontier(threads.max(1) * 8, &mut scratch);
        let pool = Self::pool(threads)?;
        pool.install(|| {
            tasks.par_iter().for_each(|(dom, from)| {
                let mut scratch = Vec::new();
                self.dfs(dom, *from, &shared, &mut scratch, &mut |s| f(s));
            })
        });
        shared.outcome()?;
        Ok(shared.found.load(Ordering::Relaxed))
    }

    /// Up to `limit` solutions in lexicographic order, and whether more exist.
    pub fn enumerate(&self, limit: Option<usize>, budget: Budget) -> Result<(Vec<Vec<u32>>, bool)> {
        let mut out = Vec::new();
        let mut truncated = false;
        self.visit(budget, |s| {
            if limit.is_some_and(|l| out.len() >= l) {
                truncated = true;
                return Visit::Stop;
            }
            out.push(s.to_vec());
            Visit::Continue
        })
        .map_err(|e| match e {
            Error::Budget { nodes, .. } => Error::Budget {
                nodes,
                lower_bound: out.len() as u64,
            },
            other => other,
        })?;
        Ok((out, truncated))
    }

    /// First solution, if any.
    pub fn first(&self, budget: Budget) -> Result<Option<Vec<u32>>> {
        let mut found = None;
        self.visit(budget, |s| {
            found = Some(s.to_vec());
            Visit::Stop
        })?;
        Ok(found)
    }

    /// Whether an assignment satisfies every constraint.
    pub fn satisfied_by(&self, values: &[u32]) -> bool {
        values.len() == self.sizes.len()
            && values.iter().zip(&self.sizes).all(|(&x, &s)| (x as usize) < s)
            && self.constraints.iter().all(|c| {
                c.table
                    .rows()
                    .any(|row| c.scope.iter().zip(row).all(|(&v, &x)| values[v] == x))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(csp: &Csp) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; csp.var_count()];
        fn rec(csp: &Csp, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i == cur.len() {
                if csp.satisfied_by(cur) {
                    out.push(cur.clone());
                }
                return;
            }
            for x in 0..csp.sizes[i] as u32 {
                cur[i] = x;
                rec(csp, i + 1, cur, out);
            }
        }
        rec(csp, 0, &mut cur, &mut out);
        out
    }

    fn sample(seed: u64) -> Csp {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..7);
        let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..4)).collect();
        let mut csp = Csp::new(sizes.clone());
        for _ in 0..rng.gen_range(1..5) {
            let arity = rng.gen_range(1..4).min(n);
            let mut scope: Vec<usize> = Vec::new();
            while scope.len() < arity {
                let v = rng.gen_range(0..n);
                if !scope.contains(&v) {
                    scope.push(v);
                }
            }
            let rows: Vec<Vec<u32>> = (0..rng.gen_range(0..10))
                .map(|_| scope.iter().map(|&v| rng.gen_range(0..sizes[v] as u32)).collect())
                .collect();
            csp.add(scope, Arc::new(Table::new(arity, rows)));
        }
        csp
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..300 {
            let csp = sample(seed);
            let expected = brute(&csp);
            let (got, truncated) = csp.enumerate(None, Budget::unlimited()).unwrap();
            assert!(!truncated);
            assert_eq!(got, expected, "seed {seed}");
            for t in [1, 3] {
                assert_eq!(csp.count(t, Budget::unlimited()).unwrap(), expected.len() as u64);
            }
        }
    }

    #[test]
    fn budget_and_limit() {
        let mut csp = Csp::new(vec![3; 10]);
        csp.restrict(0, &[0, 1, 2]);
        match csp.count(1, Budget::nodes(50)) {
            Err(Error::Budget { lower_bound, .. }) => assert!(lower_bound > 0),
            other => panic!("unexpected {other:?}"),
        }
        let (sols, truncated) = csp.enumerate(Some(5), Budget::unlimited()).unwrap();
        assert_eq!(sols.len(), 5);
        assert!(truncated);
    }

    #[test]
    fn wide_domains() {
        let mut csp = Csp::new(vec![130, 130]);
        csp.add(vec![0, 1], Arc::new(Table::new(2, (0..130).map(|x| vec![x, 129 - x]))));
        csp.restrict(0, &[64, 100]);
        let (sols, _) = csp.enumerate(None, Budget::unlimited()).unwrap();
        assert_eq!(sols, vec![vec![64, 65], vec![100, 29]]);
    }
}
