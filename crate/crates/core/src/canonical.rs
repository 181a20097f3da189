//! Canonical representatives for the congruence on structures.
//!
//! The congruence is generated by: associativity of par/copar/seq,
//! commutativity of par/copar, units, alpha-conversion of binders,
//! commutation of adjacent binders, renaming elimination (`{a}R = R` when
//! `a` is not free in `R`), the renaming unit `{a}1 = 1`, and scope
//! extrusion through each connective (`{a}[R;T] = [{a}R;T]`,
//! `{a}(R;T) = ({a}R;T)`, `{a}<R;T> = <{a}R;T> = <R;{a}T>` whenever `a`
//! is not free in the child leaving the scope). Scope extrusion is forced
//! by the derivations that motivate the binder: moving a substitution
//! under an abstraction slides a binder past material it does not touch.
//!
//! Two structures are congruent iff their canonical forms are identical
//! trees. Canonicalization:
//!   * absorbs units and flattens associative nests,
//!   * sorts par/copar children,
//!   * drops vacuous binders,
//!   * narrows every binder to the smallest child (or seq window) that
//!     contains all of its occurrences, lifting binders out of nested
//!     same-kind layers first so placement does not depend on the input's
//!     association,
//!   * nests binders with genuinely overlapping multi-child scopes in the
//!     order that minimizes the resulting tree, making the choice
//!     independent of the input binder order,
//!   * renames every binder to a positional canonical name.

use std::collections::BTreeSet;

use crate::atom::{Atom, AtomName};
use crate::structure::{assemble, Kind, Structure};

/// Binder groups larger than this fall back to input order instead of the
/// exact minimal-tree search. Overlapping groups stay tiny in practice;
/// the cap only guards against adversarial inputs.
const PERM_CAP: usize = 6;

pub fn canonicalize(s: &Structure) -> Structure {
    let shaped = shape(s);
    let mut cz = Canonicalizer::new(&shaped);
    cz.canon(&shaped, &Env::new())
}

pub fn equiv(a: &Structure, b: &Structure) -> bool {
    canonicalize(a) == canonicalize(b)
}

/// Unit absorption and associative flattening only; no binder movement.
fn shape(s: &Structure) -> Structure {
    match s {
        Structure::Unit | Structure::Atom(_) => s.clone(),
        Structure::Par(cs) => assemble(Kind::Par, cs.iter().map(shape).collect()),
        Structure::CoPar(cs) => assemble(Kind::CoPar, cs.iter().map(shape).collect()),
        Structure::Seq(cs) => assemble(Kind::Seq, cs.iter().map(shape).collect()),
        Structure::Ren(a, body) => Structure::ren(a.clone(), shape(body)),
    }
}

#[derive(Clone)]
struct Env(Vec<(AtomName, usize)>);

impl Env {
    fn new() -> Self {
        Env(Vec::new())
    }

    fn level(&self) -> usize {
        self.0.len()
    }

    fn lookup(&self, name: &AtomName) -> Option<usize> {
        self.0.iter().rev().find(|(n, _)| n == name).map(|(_, l)| *l)
    }

    fn push(&mut self, name: AtomName) {
        let l = self.0.len();
        self.0.push((name, l));
    }
}

struct Canonicalizer {
    /// Free names of the whole input; canonical binder names skip these.
    avoid: BTreeSet<AtomName>,
    /// Every name seen so far, for minting collision-free temporaries.
    seen: BTreeSet<AtomName>,
    temp_counter: usize,
}

impl Canonicalizer {
    fn new(root: &Structure) -> Self {
        Canonicalizer {
            avoid: root.free_names(),
            seen: root.all_names(),
            temp_counter: 0,
        }
    }

    /// Canonical binder name for nesting depth `level`.
    fn level_name(&self, level: usize) -> AtomName {
        let mut remaining = level;
        for i in 0.. {
            let cand = AtomName::new(format!("r{i}"));
            if self.avoid.contains(&cand) {
                continue;
            }
            if remaining == 0 {
                return cand;
            }
            remaining -= 1;
        }
        unreachable!()
    }

    fn fresh_temp(&mut self) -> AtomName {
        loop {
            let cand = AtomName::new(format!("zt{}", self.temp_counter));
            self.temp_counter += 1;
            if self.seen.insert(cand.clone()) {
                return cand;
            }
        }
    }

    fn canon(&mut self, s: &Structure, env: &Env) -> Structure {
        match s {
            Structure::Unit => Structure::Unit,
            Structure::Atom(a) => self.canon_atom(a, env),
            Structure::Ren(_, _) => {
                let (chain, core) = self.strip_chain(s);
                self.node(&core, chain, env)
            }
            Structure::Par(_) | Structure::CoPar(_) | Structure::Seq(_) => {
                self.node(s, Vec::new(), env)
            }
        }
    }

    fn canon_atom(&self, a: &Atom, env: &Env) -> Structure {
        match env.lookup(&a.name) {
            Some(level) => Structure::Atom(Atom {
                name: self.level_name(level),
                polarity: a.polarity,
            }),
            None => Structure::Atom(a.clone()),
        }
    }

    /// Strips the top binder chain, renaming each binder to a fresh
    /// temporary so chains and lifted binders never collide by text.
    fn strip_chain(&mut self, s: &Structure) -> (Vec<AtomName>, Structure) {
        let mut chain = Vec::new();
        let mut cur = s.clone();
        while let Structure::Ren(name, body) = cur {
            let temp = self.fresh_temp();
            cur = body.subst_atom(&name, &temp);
            chain.push(temp);
        }
        (chain, cur)
    }

    /// Canonicalizes a non-binder `core` with `pending` binders over it.
    fn node(&mut self, core: &Structure, mut pending: Vec<AtomName>, env: &Env) -> Structure {
        let kind = match Kind::of(core) {
            Some(k) => k,
            None => {
                pending.retain(|b| core.has_free(b));
                return self.wrap_leaf(core, pending, env);
            }
        };

        // Flatten same-kind layers, lifting binder chains found on the way.
        let raw_children = match core {
            Structure::Par(cs) | Structure::CoPar(cs) | Structure::Seq(cs) => cs.clone(),
            _ => unreachable!(),
        };
        let mut children: Vec<Structure> = Vec::new();
        let mut stack: Vec<Structure> = raw_children.into_iter().rev().collect();
        while let Some(c) = stack.pop() {
            let (chain, body) = self.strip_chain(&c);
            pending.extend(chain);
            match (&body, kind) {
                (Structure::Unit, _) => {}
                (Structure::Par(cs), Kind::Par)
                | (Structure::CoPar(cs), Kind::CoPar)
                | (Structure::Seq(cs), Kind::Seq) => {
                    for sub in cs.iter().rev() {
                        stack.push(sub.clone());
                    }
                }
                _ => children.push(body),
            }
        }

        pending.retain(|b| children.iter().any(|c| c.has_free(b)));

        if children.len() <= 1 {
            let inner = children.pop().unwrap_or(Structure::Unit);
            if pending.is_empty() {
                return self.canon(&inner, env);
            }
            return match Kind::of(&inner) {
                Some(_) => self.node(&inner, pending, env),
                None => self.wrap_leaf(&inner, pending, env),
            };
        }

        if pending.is_empty() {
            let done: Vec<Structure> = children.iter().map(|c| self.canon(c, env)).collect();
            return finish(kind, done);
        }

        // Scope analysis. Hulls are child-index sets; on seq they are the
        // contiguous cover, since extrusion cannot reorder seq children.
        let hull_of = |b: &AtomName, children: &[Structure]| -> BTreeSet<usize> {
            let sp: Vec<usize> = children
                .iter()
                .enumerate()
                .filter(|(_, c)| c.has_free(b))
                .map(|(i, _)| i)
                .collect();
            if kind == Kind::Seq {
                (sp[0]..=sp[sp.len() - 1]).collect()
            } else {
                sp.into_iter().collect()
            }
        };

        // Binders confined to one child sink into it; the rest wait.
        let mut multis: Vec<(AtomName, BTreeSet<usize>)> = Vec::new();
        for b in pending {
            let hull = hull_of(&b, &children);
            if hull.len() == 1 {
                let i = *hull.iter().next().unwrap();
                children[i] = Structure::ren(b, children[i].clone());
            } else {
                multis.push((b, hull));
            }
        }

        // Overlapping multi-child scopes must nest together: group them.
        let mut groups: Vec<(Vec<AtomName>, BTreeSet<usize>)> = Vec::new();
        for (b, hull) in multis {
            let mut names = vec![b];
            let mut merged = hull;
            loop {
                let mut absorbed = false;
                groups.retain(|(gn, gh)| {
                    let touches = if kind == Kind::Seq {
                        hulls_overlap(gh, &merged)
                    } else {
                        gh.intersection(&merged).next().is_some()
                    };
                    if touches {
                        names.extend(gn.clone());
                        merged.extend(gh.iter().copied());
                        absorbed = true;
                        false
                    } else {
                        true
                    }
                });
                if !absorbed {
                    break;
                }
            }
            if kind == Kind::Seq {
                let lo = *merged.iter().next().unwrap();
                let hi = *merged.iter().last().unwrap();
                merged = (lo..=hi).collect();
            }
            groups.push((names, merged));
        }
        groups.sort_by_key(|(_, h)| *h.iter().next().unwrap());

        if groups.len() == 1 && groups[0].1.len() == children.len() {
            let (names, _) = groups.remove(0);
            return self.chain_over(kind, &children, names, env);
        }

        let mut owner: Vec<Option<usize>> = vec![None; children.len()];
        for (gid, (_, hull)) in groups.iter().enumerate() {
            for &i in hull {
                owner[i] = Some(gid);
            }
        }
        let mut out: Vec<Structure> = Vec::new();
        let mut emitted = vec![false; groups.len()];
        for (i, c) in children.iter().enumerate() {
            match owner[i] {
                None => out.push(self.canon(c, env)),
                Some(gid) if !emitted[gid] => {
                    emitted[gid] = true;
                    let (names, hull) = &groups[gid];
                    let kids: Vec<Structure> =
                        hull.iter().map(|&j| children[j].clone()).collect();
                    out.push(self.chain_over(kind, &kids, names.clone(), env));
                }
                Some(_) => {}
            }
        }
        finish(kind, out)
    }

    /// Builds the canonical binder chain for `names` over a same-kind node
    /// of `kids`, choosing the nesting order that minimizes the result.
    fn chain_over(
        &mut self,
        kind: Kind,
        kids: &[Structure],
        names: Vec<AtomName>,
        env: &Env,
    ) -> Structure {
        let orders: Vec<Vec<AtomName>> = if names.len() > PERM_CAP {
            vec![names]
        } else {
            permutations(&names)
        };
        let base = env.level();
        let mut best: Option<Structure> = None;
        for order in orders {
            let mut env2 = env.clone();
            for n in &order {
                env2.push(n.clone());
            }
            let done: Vec<Structure> = kids.iter().map(|c| self.canon(c, &env2)).collect();
            let mut built = finish(kind, done);
            for i in (0..order.len()).rev() {
                built = Structure::ren(self.level_name(base + i), built);
            }
            if best.as_ref().map_or(true, |b| built < *b) {
                best = Some(built);
            }
        }
        best.unwrap()
    }

    fn wrap_leaf(&mut self, core: &Structure, pending: Vec<AtomName>, env: &Env) -> Structure {
        if pending.is_empty() {
            return self.canon(core, env);
        }
        let base = env.level();
        let mut env2 = env.clone();
        for n in &pending {
            env2.push(n.clone());
        }
        let mut built = self.canon(core, &env2);
        for i in (0..pending.len()).rev() {
            built = Structure::ren(self.level_name(base + i), built);
        }
        built
    }
}

fn hulls_overlap(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    let (alo, ahi) = (*a.iter().next().unwrap(), *a.iter().last().unwrap());
    let (blo, bhi) = (*b.iter().next().unwrap(), *b.iter().last().unwrap());
    alo <= bhi && blo <= ahi
}

/// Assemble, then sort commutative children. Sorting runs after
/// flattening so nothing escapes the order.
fn finish(kind: Kind, children: Vec<Structure>) -> Structure {
    let assembled = assemble(kind, children);
    match (kind, assembled) {
        (Kind::Par, Structure::Par(mut cs)) => {
            cs.sort();
            Structure::Par(cs)
        }
        (Kind::CoPar, Structure::CoPar(mut cs)) => {
            cs.sort();
            Structure::CoPar(cs)
        }
        (_, other) => other,
    }
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}
