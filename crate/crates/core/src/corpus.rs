//! Deterministic generators for structures, contexts and linear terms,
//! used by the test suites and benches. Ordering is controlled by the
//! `SEQREN_SEED` environment variable when set.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::atom::AtomName;
use crate::context::Context;
use crate::lambda::LamTerm;
use crate::structure::{assemble, Kind, Structure};

pub const DEFAULT_SEED: u64 = 0x5e94e4;

/// Seed from `SEQREN_SEED` when present, else the fixed default.
pub fn seed_from_env() -> u64 {
    std::env::var("SEQREN_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_from_env())
}

const NAME_POOL: [&str; 5] = ["a", "b", "c", "d", "e"];

/// A random structure with at most `max_atoms` atom occurrences and at
/// most `max_binders` renamings.
pub fn random_structure(rng: &mut ChaCha8Rng, max_atoms: usize, max_binders: usize) -> Structure {
    gen_structure(rng, max_atoms.max(1), max_binders)
}

fn gen_structure(rng: &mut ChaCha8Rng, atoms: usize, binders: usize) -> Structure {
    if atoms == 0 {
        return Structure::Unit;
    }
    if atoms == 1 {
        let name = NAME_POOL[rng.gen_range(0..NAME_POOL.len())];
        return if rng.gen_bool(0.5) {
            Structure::atom(name)
        } else {
            Structure::natom(name)
        };
    }
    let choice = rng.gen_range(0..if binders > 0 { 4 } else { 3 });
    match choice {
        0 | 1 | 2 => {
            let n_children = rng.gen_range(2..=3.min(atoms));
            let mut budgets = vec![1usize; n_children];
            let mut extra = atoms - n_children;
            while extra > 0 {
                let i = rng.gen_range(0..n_children);
                budgets[i] += 1;
                extra -= 1;
            }
            let kids: Vec<Structure> = budgets
                .into_iter()
                .map(|b| gen_structure(rng, b, binders / n_children))
                .collect();
            let kind = match choice {
                0 => Kind::Par,
                1 => Kind::CoPar,
                _ => Kind::Seq,
            };
            assemble(kind, kids)
        }
        _ => {
            let name = NAME_POOL[rng.gen_range(0..NAME_POOL.len())];
            let body = gen_structure(rng, atoms, binders - 1);
            Structure::ren(name, body)
        }
    }
}

/// A random one-hole context built from the same material.
pub fn random_context(rng: &mut ChaCha8Rng, depth: usize) -> Context {
    if depth == 0 {
        return Context::Hole;
    }
    let inner = Box::new(random_context(rng, depth - 1));
    match rng.gen_range(0..4) {
        0 => Context::Par(vec![random_structure(rng, 3, 1)], inner),
        1 => Context::CoPar(vec![random_structure(rng, 3, 1)], inner),
        2 => {
            if rng.gen_bool(0.5) {
                Context::Seq(vec![random_structure(rng, 2, 0)], inner, vec![])
            } else {
                Context::Seq(vec![], inner, vec![random_structure(rng, 2, 0)])
            }
        }
        _ => {
            let name = NAME_POOL[rng.gen_range(0..NAME_POOL.len())];
            Context::Ren(AtomName::new(name), inner)
        }
    }
}

/// A random linear term whose free variables are exactly `free`.
pub fn random_linear_term(rng: &mut ChaCha8Rng, free: &[String], budget: usize) -> LamTerm {
    let mut counter = free.len();
    gen_term(rng, free.to_vec(), budget, &mut counter)
}

/// A random closed-or-open linear term of roughly `budget` nodes.
pub fn random_term(rng: &mut ChaCha8Rng, budget: usize) -> LamTerm {
    let open = rng.gen_range(0..=2usize);
    let free: Vec<String> = (0..open).map(|i| format!("u{i}")).collect();
    random_linear_term(rng, &free, budget)
}

fn gen_term(
    rng: &mut ChaCha8Rng,
    must_use: Vec<String>,
    budget: usize,
    counter: &mut usize,
) -> LamTerm {
    if budget == 0 {
        return close_term(must_use, counter);
    }
    if must_use.len() == 1 && rng.gen_bool(0.3) {
        return LamTerm::var(must_use.into_iter().next().unwrap());
    }
    let choice = if must_use.is_empty() { 0 } else { rng.gen_range(0..4) };
    match choice {
        0 => {
            let x = fresh_var(counter);
            let mut inner = must_use;
            inner.push(x.clone());
            LamTerm::abs(x, gen_term(rng, inner, budget - 1, counter))
        }
        1 => {
            let (lhs, rhs) = split_vars(rng, &must_use);
            LamTerm::app(
                gen_term(rng, lhs, budget / 2, counter),
                gen_term(rng, rhs, budget.saturating_sub(1) / 2, counter),
            )
        }
        _ => {
            // explicit substitution; the fresh variable lives in the body
            let x = fresh_var(counter);
            let (lhs, rhs) = split_vars(rng, &must_use);
            let mut body_vars = lhs;
            body_vars.push(x.clone());
            LamTerm::esub(
                gen_term(rng, body_vars, budget / 2, counter),
                x,
                gen_term(rng, rhs, budget.saturating_sub(1) / 2, counter),
            )
        }
    }
}

/// Smallest linear term using exactly the given variables.
fn close_term(must_use: Vec<String>, counter: &mut usize) -> LamTerm {
    match must_use.len() {
        0 => {
            let x = fresh_var(counter);
            LamTerm::abs(x.clone(), LamTerm::var(x))
        }
        1 => LamTerm::var(must_use.into_iter().next().unwrap()),
        n => {
            let mid = n / 2;
            let rhs = must_use[mid..].to_vec();
            let lhs = must_use[..mid].to_vec();
            LamTerm::app(close_term(lhs, counter), close_term(rhs, counter))
        }
    }
}

fn fresh_var(counter: &mut usize) -> String {
    let v = format!("v{counter}");
    *counter += 1;
    v
}

fn split_vars(rng: &mut ChaCha8Rng, vars: &[String]) -> (Vec<String>, Vec<String>) {
    let mut l = Vec::new();
    let mut r = Vec::new();
    for v in vars {
        if rng.gen_bool(0.5) {
            l.push(v.clone());
        } else {
            r.push(v.clone());
        }
    }
    (l, r)
}

/// Handcrafted linear terms covering every beta clause, open terms and
/// nested substitutions.
pub fn beta_corpus() -> Vec<&'static str> {
    vec![
        "(\\x. x) y",
        "x[x:=y]",
        "(\\y. y x)[x:=z]",
        "(x y)[x:=z]",
        "(y x)[x:=z]",
        "(\\x. x) (\\y. y)",
        "(\\x. \\y. x y) u v",
        "(\\x. \\y. y x) u v",
        "x[x:=y[y:=z]]",
        "(x[x:=y])[y:=z]",
        "\\w. (\\x. w x) u",
        "(\\x. x u) (\\y. y)",
        "(\\f. f z) (\\x. x)",
        "((\\x. x) y) z",
        "z ((\\x. x) y)",
        "(\\x. x y) z",
        "(\\x. y x) z",
        "((x y)[x:=z])[y:=w]",
        "(\\w. w) ((\\x. x) y)",
        "(x (y z))[x:=\\u. u]",
        "(\\x. \\y. x y) (\\z. z) w",
        "\\a. a ((\\x. x) b)",
    ]
}

/// The enumerated family for prover-versus-oracle agreement: structures
/// over at most three names with sizes up to the oracle guard.
pub fn oracle_family(max_names: usize, sample_extra: usize) -> Vec<Structure> {
    let names = &NAME_POOL[..max_names.min(3)];
    let mut atoms: Vec<Structure> = Vec::new();
    for n in names {
        atoms.push(Structure::atom(*n));
        atoms.push(Structure::natom(*n));
    }

    // exhaustive combinations with up to three binary connectives over
    // two names, deduplicated by canonical form
    let two: Vec<Structure> = atoms
        .iter()
        .filter(|s| {
            s.free_names()
                .iter()
                .all(|n| n.text() == "a" || n.text() == "b")
        })
        .cloned()
        .collect();
    let mut layer: Vec<Structure> = two.clone();
    let mut all: Vec<Structure> = two.clone();
    for _round in 0..2 {
        let mut next = Vec::new();
        for l in &layer {
            for r in &two {
                for kind in [Kind::Par, Kind::CoPar, Kind::Seq] {
                    next.push(assemble(kind, vec![l.clone(), r.clone()]));
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    // renaming-wrapped variants
    let mut wrapped = Vec::new();
    for s in &all {
        for n in ["a", "b"] {
            if s.has_free(&AtomName::new(n)) {
                wrapped.push(Structure::ren(n, s.clone()));
            }
        }
    }
    all.extend(wrapped);

    // sampled larger goals over three names
    let mut rng = rng();
    for _ in 0..sample_extra {
        all.push(random_structure(&mut rng, 8, 2));
    }

    // named negative and positive cases from the seq-order family
    all.push(crate::parse::parse_structure("[<a;b>;<~a;~b>]").unwrap());
    all.push(crate::parse::parse_structure("[<a;b>;<~b;~a>]").unwrap());

    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for s in all {
        if s.size() > 8 {
            continue;
        }
        let key = crate::canonical::canonicalize(&s);
        if seen.insert(key.clone()) {
            out.push(key);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::is_linear;

    #[test]
    fn terms_are_linear() {
        let mut r = rng();
        for i in 0..200 {
            let t = random_term(&mut r, 12);
            assert!(is_linear(&t), "generator emitted non-linear term #{i}: {t}");
        }
    }

    #[test]
    fn corpus_is_linear_and_covers_clauses() {
        use crate::lambda::{find_redexes, parse_lam, reduce, RedexRule, Strategy};
        let mut seen = std::collections::BTreeSet::new();
        for src in beta_corpus() {
            let m = parse_lam(src).unwrap();
            assert!(is_linear(&m), "corpus term not linear: {src}");
            let trace = reduce(&m, &Strategy::LeftmostOutermost, 400).unwrap();
            let mut cur = m;
            for (site, next) in &trace.steps {
                let _ = find_redexes(&cur);
                seen.insert(site.rule);
                cur = next.clone();
            }
        }
        for rule in [
            RedexRule::BetaIntro,
            RedexRule::SubVar,
            RedexRule::SubAbs,
            RedexRule::SubAppLeft,
            RedexRule::SubAppRight,
        ] {
            assert!(seen.contains(&rule), "corpus never exercises {rule:?}");
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a: Vec<Structure> =
            (0..10).map(|_| random_structure(&mut rng(), 10, 2)).collect();
        let b: Vec<Structure> =
            (0..10).map(|_| random_structure(&mut rng(), 10, 2)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn family_has_both_answers_and_fits_guard() {
        let fam = oracle_family(3, 50);
        assert!(fam.len() > 100);
        assert!(fam.iter().all(|s| s.size() <= 8));
    }
}
