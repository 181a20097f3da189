//! Combinators for the rules that are derivable in SBVr: general
//! interaction (down and up), the def rules, and the two mix rules.
//!
//! Every combinator emits a fully expanded step list, so the kernel
//! checker needs no knowledge of derived rules. The up-fragment variants
//! come from dualizing the down-fragment constructions.

use thiserror::Error;

use crate::atom::{Atom, AtomName, Polarity};
use crate::canonical::{canonicalize, equiv};
use crate::context::Context;
use crate::rules::{compose, dualize, plug_in_context, Derivation, RuleName};
use crate::structure::{assemble, Kind, Structure};

#[derive(Debug, Clone, Error)]
pub enum DerivedError {
    #[error("placeholder `{0}` must be fresh for both operands")]
    PlaceholderNotFresh(AtomName),
}

fn par2(a: Structure, b: Structure) -> Structure {
    assemble(Kind::Par, vec![a, b])
}

fn copar2(a: Structure, b: Structure) -> Structure {
    assemble(Kind::CoPar, vec![a, b])
}

fn seq2(a: Structure, b: Structure) -> Structure {
    assemble(Kind::Seq, vec![a, b])
}

fn append(lower: &mut Derivation, upper: Derivation) {
    debug_assert!(
        equiv(lower.premise(), &upper.conclusion),
        "chain break: {} vs {}",
        lower.premise(),
        upper.conclusion
    );
    lower.steps.extend(upper.steps);
}

/// General interaction down: a derivation from the unit down to
/// `[r; negate(r)]`, inside {ai_down, switch, q_down, r_down}.
pub fn gen_interaction_down(r: &Structure) -> Derivation {
    let r = canonicalize(r);
    let mut d = build_interaction(&r);
    d.relabel_premise(Structure::Unit);
    d
}

fn build_interaction(r: &Structure) -> Derivation {
    let neg = r.negate();
    let conclusion = par2(r.clone(), neg.clone());
    let mut d = Derivation::identity(conclusion);
    match r {
        Structure::Unit => {}
        Structure::Atom(_) => {
            d.push_step(RuleName::AiDown, Structure::Unit);
        }
        Structure::Seq(cs) => {
            let head = cs[0].clone();
            let rest = assemble(Kind::Seq, cs[1..].to_vec());
            let pair_rest = par2(rest.clone(), rest.negate());
            d.push_step(
                RuleName::QDown,
                seq2(par2(head.clone(), head.negate()), pair_rest.clone()),
            );
            let sub = plug_in_context(
                &build_interaction(&head),
                &Context::Seq(vec![], Box::new(Context::Hole), vec![pair_rest]),
            );
            append(&mut d, sub);
            append(&mut d, build_interaction(&rest));
        }
        Structure::CoPar(cs) => {
            let head = cs[0].clone();
            let rest = assemble(Kind::CoPar, cs[1..].to_vec());
            d.push_step(
                RuleName::Switch,
                par2(
                    copar2(par2(head.clone(), head.negate()), rest.clone()),
                    rest.negate(),
                ),
            );
            let ctx = Context::Par(
                vec![rest.negate()],
                Box::new(Context::CoPar(vec![rest.clone()], Box::new(Context::Hole))),
            );
            append(&mut d, plug_in_context(&build_interaction(&head), &ctx));
            append(&mut d, build_interaction(&rest));
        }
        Structure::Par(cs) => {
            let head = cs[0].clone();
            let rest = assemble(Kind::Par, cs[1..].to_vec());
            d.push_step(
                RuleName::Switch,
                par2(
                    copar2(par2(head.clone(), head.negate()), rest.negate()),
                    rest.clone(),
                ),
            );
            let ctx = Context::Par(
                vec![rest.clone()],
                Box::new(Context::CoPar(vec![rest.negate()], Box::new(Context::Hole))),
            );
            append(&mut d, plug_in_context(&build_interaction(&head), &ctx));
            append(&mut d, build_interaction(&rest));
        }
        Structure::Ren(a, body) => {
            d.push_step(
                RuleName::RDown,
                Structure::ren(a.clone(), par2((**body).clone(), body.negate())),
            );
            let ctx = Context::Ren(a.clone(), Box::new(Context::Hole));
            append(&mut d, plug_in_context(&build_interaction(body), &ctx));
        }
    }
    d
}

/// General interaction up: from `(r; negate(r))` down to the unit, inside
/// {ai_up, switch, q_up, r_up}.
pub fn gen_interaction_up(r: &Structure) -> Derivation {
    let mut d = dualize(&gen_interaction_down(&r.negate()));
    d.conclusion = Structure::Unit;
    let want = copar2(r.clone(), r.negate());
    debug_assert!(equiv(d.premise(), &want));
    d.relabel_premise(want);
    d
}

/// The def-down construction with an explicitly polarized placeholder:
/// a derivation from `<r;t>` down to `[<r;ph>;(negate(ph);t)]` inside
/// {ai_down, switch, q_down}.
pub fn def_down_atom(r: &Structure, t: &Structure, placeholder: Atom) -> Derivation {
    let ph = Structure::Atom(placeholder.clone());
    let nph = Structure::Atom(placeholder.negate());
    let conclusion = par2(seq2(r.clone(), ph.clone()), copar2(nph.clone(), t.clone()));
    let mut d = Derivation::identity(conclusion);
    d.push_step(
        RuleName::QDown,
        seq2(r.clone(), par2(ph.clone(), copar2(nph.clone(), t.clone()))),
    );
    d.push_step(
        RuleName::Switch,
        seq2(r.clone(), copar2(par2(ph, nph), t.clone())),
    );
    d.push_step(RuleName::AiDown, seq2(r.clone(), t.clone()));
    d
}

/// def-down for a positive placeholder name fresh for `r` and `t`.
pub fn def_down(r: &Structure, t: &Structure, a: &AtomName) -> Result<Derivation, DerivedError> {
    if r.has_free(a) || t.has_free(a) {
        return Err(DerivedError::PlaceholderNotFresh(a.clone()));
    }
    Ok(def_down_atom(r, t, Atom { name: a.clone(), polarity: Polarity::Positive }))
}

/// def-up, the dual: from `(<r;~a>;[a;t])` down to `<r;t>` inside
/// {ai_up, switch, q_up}.
pub fn def_up(r: &Structure, t: &Structure, a: &AtomName) -> Result<Derivation, DerivedError> {
    let down = def_down(&r.negate(), &t.negate(), a)?;
    Ok(dualize(&down))
}

/// mixp: from `(r;t)` down to `<r;t>`, one q_up modulo units.
pub fn mixp(r: &Structure, t: &Structure) -> Derivation {
    let mut d = Derivation::identity(seq2(r.clone(), t.clone()));
    d.push_step(RuleName::QUp, copar2(r.clone(), t.clone()));
    d
}

/// pmix: from `<r;t>` down to `[r;t]`, one q_down modulo units.
pub fn pmix(r: &Structure, t: &Structure) -> Derivation {
    let mut d = Derivation::identity(par2(r.clone(), t.clone()));
    d.push_step(RuleName::QDown, seq2(r.clone(), t.clone()));
    d
}

/// Derivations stacked bottom-up; panics on a boundary mismatch.
pub fn stack(parts: Vec<Derivation>) -> Derivation {
    let mut iter = parts.into_iter();
    let mut acc = iter.next().expect("stack of at least one derivation");
    for upper in iter {
        acc = compose(&acc, &upper).expect("stacked derivations must meet");
    }
    acc
}
