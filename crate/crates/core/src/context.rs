//! One-hole structure contexts.

use crate::atom::AtomName;
use crate::structure::{assemble, Kind, Structure};

/// A structure with a single hole. Plugging is literal: binders in the
/// context capture names of the plugged structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Context {
    Hole,
    /// Par with the hole inside one child; the remaining children sit beside.
    Par(Vec<Structure>, Box<Context>),
    CoPar(Vec<Structure>, Box<Context>),
    /// Seq keeps the children before and after the hole apart.
    Seq(Vec<Structure>, Box<Context>, Vec<Structure>),
    Ren(AtomName, Box<Context>),
}

impl Context {
    pub fn plug(&self, s: &Structure) -> Structure {
        match self {
            Context::Hole => s.clone(),
            Context::Par(others, inner) => {
                let mut cs = vec![inner.plug(s)];
                cs.extend(others.iter().cloned());
                assemble(Kind::Par, cs)
            }
            Context::CoPar(others, inner) => {
                let mut cs = vec![inner.plug(s)];
                cs.extend(others.iter().cloned());
                assemble(Kind::CoPar, cs)
            }
            Context::Seq(pre, inner, post) => {
                let mut cs = pre.clone();
                cs.push(inner.plug(s));
                cs.extend(post.iter().cloned());
                assemble(Kind::Seq, cs)
            }
            Context::Ren(a, inner) => Structure::ren(a.clone(), inner.plug(s)),
        }
    }

    /// Composition: a context whose hole is `other`'s hole.
    pub fn compose(&self, other: &Context) -> Context {
        match self {
            Context::Hole => other.clone(),
            Context::Par(o, inner) => Context::Par(o.clone(), Box::new(inner.compose(other))),
            Context::CoPar(o, inner) => Context::CoPar(o.clone(), Box::new(inner.compose(other))),
            Context::Seq(pre, inner, post) => {
                Context::Seq(pre.clone(), Box::new(inner.compose(other)), post.clone())
            }
            Context::Ren(a, inner) => Context::Ren(a.clone(), Box::new(inner.compose(other))),
        }
    }

    /// Names bound by binders on the path from the root to the hole.
    pub fn binders_on_path(&self) -> Vec<AtomName> {
        match self {
            Context::Hole => Vec::new(),
            Context::Par(_, inner) | Context::CoPar(_, inner) => inner.binders_on_path(),
            Context::Seq(_, inner, _) => inner.binders_on_path(),
            Context::Ren(a, inner) => {
                let mut v = vec![a.clone()];
                v.extend(inner.binders_on_path());
                v
            }
        }
    }

    /// Substitutes a free atom throughout the context material and its
    /// binder names. Used to rename a context binder apart; the caller is
    /// responsible for `replacement` being globally fresh.
    pub fn subst_atom(&self, target: &AtomName, replacement: &AtomName) -> Context {
        match self {
            Context::Hole => Context::Hole,
            Context::Par(o, inner) => Context::Par(
                o.iter().map(|s| s.subst_atom(target, replacement)).collect(),
                Box::new(inner.subst_atom(target, replacement)),
            ),
            Context::CoPar(o, inner) => Context::CoPar(
                o.iter().map(|s| s.subst_atom(target, replacement)).collect(),
                Box::new(inner.subst_atom(target, replacement)),
            ),
            Context::Seq(pre, inner, post) => Context::Seq(
                pre.iter().map(|s| s.subst_atom(target, replacement)).collect(),
                Box::new(inner.subst_atom(target, replacement)),
                post.iter().map(|s| s.subst_atom(target, replacement)).collect(),
            ),
            Context::Ren(a, inner) => {
                let name = if a == target { replacement.clone() } else { a.clone() };
                Context::Ren(name, Box::new(inner.subst_atom(target, replacement)))
            }
        }
    }
}
