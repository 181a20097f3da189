//! Bounded bottom-up proof search in the down fragment (the rules of
//! BVr), with canonical-form memoization.
//!
//! The up fragment is never searched: cut elimination makes the down
//! fragment complete for provability, and excluding ai_up keeps the state
//! space finite (sizes never grow along down steps).
//!
//! The engine decomposes before it searches. Derivability of structures
//! splits seq and copar tops into independent subgoals, binder tops
//! unwrap, and par children factor into components connected by shared
//! names; only a connected par core is fed to best-first search. The
//! search orders states by steps-so-far plus half the atom count — an
//! admissible demand, since ai_down is the only rule that consumes atoms
//! and removes exactly two. Every proved outcome carries a derivation the
//! kernel checker accepts; the exhaustive oracle revalidates refutations
//! on small goals with the unrestricted move set.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::atom::AtomName;
use crate::canonical::canonicalize;
use crate::context::Context;
use crate::lambda::LamTerm;
use crate::rules::{
    compose, down_fragment, enumerate_applications_with_alphabet, plug_in_context, search_moves,
    Derivation, RuleInstance, RuleName,
};
use crate::structure::{assemble, Kind, Structure};
use crate::translate::{translate, ChannelSupply, TranslateError};

#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Cap on rule applications along one search branch per component.
    pub max_depth: usize,
    /// Cap on expanded states across the whole search.
    pub max_states: usize,
    pub wall_clock: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_depth: 16,
            max_states: 5_000_000,
            wall_clock: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Proved(Derivation),
    /// No proof exists: the state space was fully explored in budget.
    ExhaustedComplete,
    BudgetHit,
}

impl SearchOutcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, SearchOutcome::Proved(_))
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SearchStats {
    pub states_expanded: usize,
    pub memo_hits: usize,
    pub depth_reached: usize,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, Copy)]
pub struct PruneOpts {
    pub balance: bool,
    pub depth_demand: bool,
}

impl Default for PruneOpts {
    fn default() -> Self {
        PruneOpts { balance: true, depth_demand: true }
    }
}

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("oracle guard: size {0} exceeds the limit of {1}")]
    TooLarge(usize, usize),
}

/// Proof search for `goal` being congruent to a BVr theorem.
pub fn prove(goal: &Structure, budget: &SearchBudget) -> (SearchOutcome, SearchStats) {
    prove_with(goal, budget, PruneOpts::default())
}

pub fn prove_with(
    goal: &Structure,
    budget: &SearchBudget,
    prune: PruneOpts,
) -> (SearchOutcome, SearchStats) {
    let start = Instant::now();
    let goal_c = canonicalize(goal);
    let mut engine = Engine {
        budget,
        prune,
        deadline: start + budget.wall_clock,
        stats: SearchStats::default(),
        memo: HashMap::new(),
    };
    let outcome = match engine.solve(&goal_c) {
        Err(Cut) => SearchOutcome::BudgetHit,
        Ok(Solved::Proved(d)) => {
            let mut full = Derivation::identity(goal.clone());
            full.steps = d.steps;
            if full.steps.is_empty() && !goal_c.is_unit() {
                // unreachable: proved implies premise is the unit
                full.conclusion = goal.clone();
            }
            SearchOutcome::Proved(full)
        }
        Ok(Solved::Refuted) => SearchOutcome::ExhaustedComplete,
        Ok(Solved::Unknown) => SearchOutcome::BudgetHit,
    };
    let mut stats = engine.stats;
    stats.wall_time_ms = start.elapsed().as_millis();
    (outcome, stats)
}

struct Cut;

#[derive(Clone)]
enum Solved {
    /// Derivation from the canonical state down to the unit.
    Proved(Derivation),
    Refuted,
    /// The depth budget cut a branch; refutation is inconclusive.
    Unknown,
}

#[derive(Clone)]
enum Cached {
    Proved(Derivation),
    Refuted,
}

struct Engine<'a> {
    budget: &'a SearchBudget,
    prune: PruneOpts,
    deadline: Instant,
    stats: SearchStats,
    memo: HashMap<Structure, Cached>,
}

impl<'a> Engine<'a> {
    fn tick(&mut self) -> Result<(), Cut> {
        self.stats.states_expanded += 1;
        if self.stats.states_expanded > self.budget.max_states {
            return Err(Cut);
        }
        if self.stats.states_expanded % 64 == 0 && Instant::now() > self.deadline {
            return Err(Cut);
        }
        Ok(())
    }

    /// Decides a canonical state, producing a checkable derivation to the
    /// unit on success.
    fn solve(&mut self, state: &Structure) -> Result<Solved, Cut> {
        if state.is_unit() {
            return Ok(Solved::Proved(Derivation::identity(Structure::Unit)));
        }
        if let Some(cached) = self.memo.get(state) {
            self.stats.memo_hits += 1;
            return Ok(match cached {
                Cached::Proved(d) => Solved::Proved(d.clone()),
                Cached::Refuted => Solved::Refuted,
            });
        }
        if self.prune.balance && !balanced(state) {
            self.memo.insert(state.clone(), Cached::Refuted);
            return Ok(Solved::Refuted);
        }
        let result = match state {
            Structure::Atom(_) => Solved::Refuted,
            Structure::Ren(a, body) => {
                let sub = self.solve(&canonicalize(body))?;
                match sub {
                    Solved::Proved(d) => {
                        let ctx = Context::Ren(a.clone(), Box::new(Context::Hole));
                        let mut plugged = plug_in_context(&d, &ctx);
                        plugged.relabel_premise(Structure::Unit);
                        Solved::Proved(with_conclusion(state, plugged))
                    }
                    other => other,
                }
            }
            Structure::Seq(cs) => self.solve_parts(state, Kind::Seq, cs.clone())?,
            Structure::CoPar(cs) => self.solve_parts(state, Kind::CoPar, cs.clone())?,
            Structure::Par(cs) => {
                let comps = par_components(cs);
                if comps.len() > 1 {
                    let parts: Vec<Structure> = comps
                        .into_iter()
                        .map(|group| {
                            assemble(Kind::Par, group.into_iter().map(|i| cs[i].clone()).collect())
                        })
                        .collect();
                    self.solve_parts(state, Kind::Par, parts)?
                } else {
                    self.search_connected(state)?
                }
            }
            Structure::Unit => unreachable!(),
        };
        match &result {
            Solved::Proved(d) => {
                self.memo.insert(state.clone(), Cached::Proved(d.clone()));
            }
            Solved::Refuted => {
                self.memo.insert(state.clone(), Cached::Refuted);
            }
            Solved::Unknown => {}
        }
        Ok(result)
    }

    /// A seq, copar, or factored par is provable iff every part is;
    /// sub-proofs chain left to right through shrinking contexts.
    fn solve_parts(
        &mut self,
        state: &Structure,
        kind: Kind,
        parts: Vec<Structure>,
    ) -> Result<Solved, Cut> {
        let mut subs = Vec::with_capacity(parts.len());
        let mut unknown = false;
        for p in &parts {
            match self.solve(&canonicalize(p))? {
                Solved::Proved(d) => subs.push(d),
                Solved::Refuted => return Ok(Solved::Refuted),
                Solved::Unknown => unknown = true,
            }
        }
        if unknown {
            return Ok(Solved::Unknown);
        }
        let mut acc = Derivation::identity(state.clone());
        for (i, sub) in subs.into_iter().enumerate() {
            let rest: Vec<Structure> = parts[i + 1..].to_vec();
            let ctx = match kind {
                Kind::Par => Context::Par(rest, Box::new(Context::Hole)),
                Kind::CoPar => Context::CoPar(rest, Box::new(Context::Hole)),
                Kind::Seq => Context::Seq(Vec::new(), Box::new(Context::Hole), rest),
            };
            let plugged = plug_in_context(&sub, &ctx);
            acc = compose(&acc, &plugged).expect("part boundary");
        }
        acc.relabel_premise(Structure::Unit);
        Ok(Solved::Proved(acc))
    }

    /// Best-first search over a connected par state.
    fn search_connected(&mut self, root: &Structure) -> Result<Solved, Cut> {
        let mut open: std::collections::BinaryHeap<std::cmp::Reverse<OpenEntry>> =
            Default::default();
        let mut parents: HashMap<Structure, (usize, Option<(RuleName, Structure)>)> =
            HashMap::new();
        open.push(std::cmp::Reverse(OpenEntry {
            f: root.atom_count().div_ceil(2),
            g: 0,
            state: root.clone(),
        }));
        parents.insert(root.clone(), (0, None));
        let mut depth_cut = false;

        while let Some(std::cmp::Reverse(OpenEntry { g, state, .. })) = open.pop() {
            if let Some((best_g, _)) = parents.get(&state) {
                if *best_g < g {
                    continue;
                }
            }
            // a state that factors or restructures hands back to solve
            if &state != root && decomposable(&state) {
                match self.solve(&state)? {
                    Solved::Proved(sub) => {
                        let d = rebuild_path(root, &state, &parents, Some(sub));
                        return Ok(Solved::Proved(d));
                    }
                    Solved::Refuted => continue,
                    Solved::Unknown => {
                        depth_cut = true;
                        continue;
                    }
                }
            }
            if state.is_unit() {
                let d = rebuild_path(root, &state, &parents, None);
                return Ok(Solved::Proved(d));
            }
            if let Some(Cached::Refuted) = self.memo.get(&state) {
                self.stats.memo_hits += 1;
                continue;
            }
            if g >= self.budget.max_depth {
                depth_cut = true;
                continue;
            }
            if self.prune.depth_demand
                && state.atom_count() > 2 * (self.budget.max_depth - g)
            {
                depth_cut = true;
                continue;
            }
            self.tick()?;
            self.stats.depth_reached = self.stats.depth_reached.max(g);
            for (rule, next) in down_successors(&state) {
                let g2 = g + 1;
                match parents.get(&next) {
                    Some((old_g, _)) if *old_g <= g2 => {
                        self.stats.memo_hits += 1;
                        continue;
                    }
                    _ => {}
                }
                parents.insert(next.clone(), (g2, Some((rule, state.clone()))));
                let h = next.atom_count().div_ceil(2);
                open.push(std::cmp::Reverse(OpenEntry { f: g2 + h, g: g2, state: next }));
            }
        }
        if depth_cut {
            Ok(Solved::Unknown)
        } else {
            Ok(Solved::Refuted)
        }
    }
}

/// A state leaves pure par search when its top restructures or its par
/// children factor into more than one component.
fn decomposable(state: &Structure) -> bool {
    match state {
        Structure::Par(cs) => par_components(cs).len() > 1,
        Structure::Unit => false,
        _ => true,
    }
}

/// Derivation from `root` to `last` along recorded parents, optionally
/// extended by a sub-derivation from `last` to the unit.
fn rebuild_path(
    root: &Structure,
    last: &Structure,
    parents: &HashMap<Structure, (usize, Option<(RuleName, Structure)>)>,
    sub: Option<Derivation>,
) -> Derivation {
    let mut chain: Vec<(RuleName, Structure)> = Vec::new();
    let mut cur = last.clone();
    while let Some((_, Some((rule, parent)))) = parents.get(&cur) {
        chain.push((*rule, cur.clone()));
        cur = parent.clone();
    }
    chain.reverse();
    let mut d = Derivation::identity(root.clone());
    let mut below = root.clone();
    for (rule, premise) in chain {
        d.steps.push(RuleInstance::new(rule, below, premise.clone()));
        below = premise;
    }
    if let Some(sub) = sub {
        d.steps.extend(sub.steps);
    }
    d.relabel_premise(Structure::Unit);
    d
}

fn with_conclusion(conclusion: &Structure, mut d: Derivation) -> Derivation {
    d.conclusion = conclusion.clone();
    if let Some(first) = d.steps.first_mut() {
        first.conclusion = conclusion.clone();
    }
    d
}

/// Open-list entry ordered by (f, deeper-first, canonical order).
#[derive(PartialEq, Eq)]
struct OpenEntry {
    f: usize,
    g: usize,
    state: Structure,
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.f
            .cmp(&other.f)
            .then(other.g.cmp(&self.g))
            .then(self.state.cmp(&other.state))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Par children grouped by shared names (free names connect components;
/// names bound above the par occur free in its children).
fn par_components(cs: &[Structure]) -> Vec<Vec<usize>> {
    let n = cs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut by_name: BTreeMap<AtomName, Vec<usize>> = BTreeMap::new();
    for (i, c) in cs.iter().enumerate() {
        for name in c.free_names() {
            by_name.entry(name).or_default().push(i);
        }
    }
    for (_, members) in by_name {
        for w in members.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Congruence-distinct successor states under the restricted search
/// moves, sorted for determinism, with no-progress moves removed.
pub fn down_successors(state: &Structure) -> Vec<(RuleName, Structure)> {
    successors_from(state, search_moves)
}

/// Successors under the full unrestricted move set; the oracle uses this.
pub fn full_successors(state: &Structure) -> Vec<(RuleName, Structure)> {
    successors_from(state, |rule, s| {
        enumerate_applications_with_alphabet(rule, s, &[])
            .into_iter()
            .map(|i| i.premise)
            .collect()
    })
}

fn successors_from(
    state: &Structure,
    moves: impl Fn(RuleName, &Structure) -> Vec<Structure>,
) -> Vec<(RuleName, Structure)> {
    let mut out: Vec<(RuleName, Structure)> = Vec::new();
    let mut seen: std::collections::HashSet<Structure> = Default::default();
    for rule in down_fragment() {
        for premise in moves(rule, state) {
            let premise = canonicalize(&premise);
            if &premise == state || !seen.insert(premise.clone()) {
                continue;
            }
            out.push((rule, premise));
        }
    }
    out.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    out.dedup_by(|a, b| a.1 == b.1);
    out
}

/// Necessary condition for provability: per free name the polarities
/// balance, and bound occurrences balance in total.
pub fn balanced(s: &Structure) -> bool {
    let mut free: BTreeMap<AtomName, (i64, i64)> = BTreeMap::new();
    let mut bound_net: i64 = 0;
    fn walk(
        s: &Structure,
        env: &mut Vec<AtomName>,
        free: &mut BTreeMap<AtomName, (i64, i64)>,
        bound_net: &mut i64,
    ) {
        match s {
            Structure::Unit => {}
            Structure::Atom(a) => {
                let is_bound = env.iter().rev().any(|n| n == &a.name);
                let delta = match a.polarity {
                    crate::atom::Polarity::Positive => 1,
                    crate::atom::Polarity::Negative => -1,
                };
                if is_bound {
                    *bound_net += delta;
                } else {
                    let e = free.entry(a.name.clone()).or_insert((0, 0));
                    if delta > 0 {
                        e.0 += 1;
                    } else {
                        e.1 += 1;
                    }
                }
            }
            Structure::Par(cs) | Structure::CoPar(cs) | Structure::Seq(cs) => {
                for c in cs {
                    walk(c, env, free, bound_net);
                }
            }
            Structure::Ren(a, body) => {
                env.push(a.clone());
                walk(body, env, free, bound_net);
                env.pop();
            }
        }
    }
    walk(s, &mut Vec::new(), &mut free, &mut bound_net);
    bound_net == 0 && free.values().all(|(p, n)| p == n)
}

/// Plain breadth-first closure with no pruning over the unrestricted
/// moves; ground truth for small goals.
pub fn exhaustive_oracle(goal: &Structure, max_size: usize) -> Result<bool, OracleError> {
    let size = goal.size();
    if size > max_size {
        return Err(OracleError::TooLarge(size, max_size));
    }
    let start = canonicalize(goal);
    if start.is_unit() {
        return Ok(true);
    }
    let mut seen: HashMap<Structure, ()> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    seen.insert(start.clone(), ());
    queue.push_back(start);
    while let Some(state) = queue.pop_front() {
        for (_, next) in full_successors(&state) {
            if next.is_unit() {
                return Ok(true);
            }
            if seen.insert(next.clone(), ()).is_none() {
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

/// Proves that `m` reduces to `n` by closing the pair against each other:
/// the goal is `[ [[m]]o ; negate([[n]]o) ]`.
pub fn prove_reduction(
    m: &LamTerm,
    n: &LamTerm,
    o: &AtomName,
    budget: &SearchBudget,
) -> Result<(SearchOutcome, SearchStats), TranslateError> {
    let goal = reduction_goal(m, n, o)?;
    Ok(prove(&goal, budget))
}

pub fn reduction_goal(
    m: &LamTerm,
    n: &LamTerm,
    o: &AtomName,
) -> Result<Structure, TranslateError> {
    let sm = translate(m, o, &mut ChannelSupply::new())?;
    let sn = translate(n, o, &mut ChannelSupply::new())?;
    Ok(assemble(Kind::Par, vec![sm, sn.negate()]))
}

/// Batch proving; parallel when the `parallel` feature is on, in input
/// order either way.
pub fn prove_batch(
    goals: &[Structure],
    budget: &SearchBudget,
) -> Vec<(SearchOutcome, SearchStats)> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        goals.par_iter().map(|g| prove(g, budget)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        prove_batch_seq(goals, budget)
    }
}

/// Always-sequential variant, kept for benchmark comparison.
pub fn prove_batch_seq(
    goals: &[Structure],
    budget: &SearchBudget,
) -> Vec<(SearchOutcome, SearchStats)> {
    goals.iter().map(|g| prove(g, budget)).collect()
}

/// Batch oracle sweep, parallel when available.
pub fn oracle_batch(goals: &[Structure], max_size: usize) -> Vec<Result<bool, OracleError>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        goals.par_iter().map(|g| exhaustive_oracle(g, max_size)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        goals.iter().map(|g| exhaustive_oracle(g, max_size)).collect()
    }
}
