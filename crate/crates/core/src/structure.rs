//! The structure algebra: syntax trees built from the unit, polarized atoms,
//! par `[R;T]`, copar `(R;T)`, seq `<R;T>` and the renaming binder `{a}R`.
//!
//! Negation lives only on atoms; every structure is kept in negation-normal
//! form by construction. The binder `{a}R` binds both polarities of the
//! positive name `a` in `R`.

use std::collections::BTreeSet;
use std::fmt;

use crate::atom::{fresh_name, Atom, AtomName, Polarity};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Structure {
    Unit,
    Atom(Atom),
    Par(Vec<Structure>),
    CoPar(Vec<Structure>),
    Seq(Vec<Structure>),
    Ren(AtomName, Box<Structure>),
}

use Structure::*;

impl Structure {
    pub fn unit() -> Structure {
        Unit
    }

    pub fn atom(name: impl Into<AtomName>) -> Structure {
        Atom(crate::atom::Atom::positive(name))
    }

    pub fn natom(name: impl Into<AtomName>) -> Structure {
        Atom(crate::atom::Atom::negative(name))
    }

    /// n-ary par, flattening nested pars and absorbing units.
    pub fn par(children: Vec<Structure>) -> Structure {
        assemble(Kind::Par, children)
    }

    /// n-ary copar, flattening and absorbing units.
    pub fn copar(children: Vec<Structure>) -> Structure {
        assemble(Kind::CoPar, children)
    }

    /// n-ary seq, flattening and absorbing units; order is significant.
    pub fn seq(children: Vec<Structure>) -> Structure {
        assemble(Kind::Seq, children)
    }

    /// Renaming binder. `{a}R` collapses to `R` only during canonicalization,
    /// not here: parsers and rule builders need the literal node.
    pub fn ren(name: impl Into<AtomName>, body: Structure) -> Structure {
        Ren(name.into(), Box::new(body))
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Unit)
    }

    /// The dual structure, in negation-normal form.
    pub fn negate(&self) -> Structure {
        match self {
            Unit => Unit,
            Atom(a) => Atom(a.negate()),
            Par(cs) => CoPar(cs.iter().map(Structure::negate).collect()),
            CoPar(cs) => Par(cs.iter().map(Structure::negate).collect()),
            Seq(cs) => Seq(cs.iter().map(Structure::negate).collect()),
            Ren(a, body) => Ren(a.clone(), Box::new(body.negate())),
        }
    }

    /// Free names; polarity is ignored and the binder removes its name.
    pub fn free_names(&self) -> BTreeSet<AtomName> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<AtomName>, out: &mut BTreeSet<AtomName>) {
        match self {
            Unit => {}
            Atom(a) => {
                if !bound.contains(&a.name) {
                    out.insert(a.name.clone());
                }
            }
            Par(cs) | CoPar(cs) | Seq(cs) => {
                for c in cs {
                    c.collect_free(bound, out);
                }
            }
            Ren(a, body) => {
                bound.push(a.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_free(&self, name: &AtomName) -> bool {
        match self {
            Unit => false,
            Atom(a) => &a.name == name,
            Par(cs) | CoPar(cs) | Seq(cs) => cs.iter().any(|c| c.has_free(name)),
            Ren(a, body) => a != name && body.has_free(name),
        }
    }

    /// Number of atom occurrences plus the number of renamings whose bound
    /// name is free in their body.
    pub fn size(&self) -> usize {
        match self {
            Unit => 0,
            Atom(_) => 1,
            Par(cs) | CoPar(cs) | Seq(cs) => cs.iter().map(Structure::size).sum(),
            Ren(a, body) => body.size() + usize::from(body.has_free(a)),
        }
    }

    /// Count of atom leaves (both polarities), bound or free.
    pub fn atom_count(&self) -> usize {
        match self {
            Unit => 0,
            Atom(_) => 1,
            Par(cs) | CoPar(cs) | Seq(cs) => cs.iter().map(Structure::atom_count).sum(),
            Ren(_, body) => body.atom_count(),
        }
    }

    /// Capture-free substitution of the atom `replacement` for every free
    /// occurrence of `target`, acting on both polarities.
    pub fn subst_atom(&self, target: &AtomName, replacement: &AtomName) -> Structure {
        if target == replacement {
            return self.clone();
        }
        match self {
            Unit => Unit,
            Atom(a) => {
                if &a.name == target {
                    Atom(crate::atom::Atom { name: replacement.clone(), polarity: a.polarity })
                } else {
                    self.clone()
                }
            }
            Par(cs) => Par(cs.iter().map(|c| c.subst_atom(target, replacement)).collect()),
            CoPar(cs) => CoPar(cs.iter().map(|c| c.subst_atom(target, replacement)).collect()),
            Seq(cs) => Seq(cs.iter().map(|c| c.subst_atom(target, replacement)).collect()),
            Ren(a, body) => {
                if a == target {
                    // occurrences below are bound, not ours to touch
                    self.clone()
                } else if a == replacement {
                    // the binder would capture the incoming name
                    let mut avoid: Vec<AtomName> =
                        body.free_names().into_iter().collect();
                    avoid.push(replacement.clone());
                    avoid.push(target.clone());
                    let fresh = fresh_name("c", avoid.iter());
                    let renamed = body.subst_atom(a, &fresh);
                    Ren(fresh, Box::new(renamed.subst_atom(target, replacement)))
                } else {
                    Ren(a.clone(), Box::new(body.subst_atom(target, replacement)))
                }
            }
        }
    }

    /// Occurrence counts per polarity for one name, free occurrences only.
    pub fn polarity_counts(&self, name: &AtomName) -> (usize, usize) {
        match self {
            Unit => (0, 0),
            Atom(a) => {
                if &a.name == name {
                    match a.polarity {
                        Polarity::Positive => (1, 0),
                        Polarity::Negative => (0, 1),
                    }
                } else {
                    (0, 0)
                }
            }
            Par(cs) | CoPar(cs) | Seq(cs) => cs.iter().fold((0, 0), |(p, n), c| {
                let (cp, cn) = c.polarity_counts(name);
                (p + cp, n + cn)
            }),
            Ren(a, body) => {
                if a == name {
                    (0, 0)
                } else {
                    body.polarity_counts(name)
                }
            }
        }
    }

    /// Legality check: every atom class (free name, or bound class per
    /// binder) has at most two occurrences, pooling polarities.
    pub fn is_legal(&self) -> bool {
        fn walk(
            s: &Structure,
            env: &mut Vec<(AtomName, usize)>,
            free: &mut std::collections::BTreeMap<AtomName, usize>,
            classes: &mut Vec<usize>,
            next_id: &mut usize,
        ) -> bool {
            match s {
                Unit => true,
                Atom(a) => {
                    let slot = env.iter().rev().find(|(n, _)| n == &a.name);
                    match slot {
                        Some((_, id)) => {
                            classes[*id] += 1;
                            classes[*id] <= 2
                        }
                        None => {
                            let c = free.entry(a.name.clone()).or_insert(0);
                            *c += 1;
                            *c <= 2
                        }
                    }
                }
                Par(cs) | CoPar(cs) | Seq(cs) => {
                    cs.iter().all(|c| walk(c, env, free, classes, next_id))
                }
                Ren(a, body) => {
                    let id = *next_id;
                    *next_id += 1;
                    classes.push(0);
                    env.push((a.clone(), id));
                    let ok = walk(body, env, free, classes, next_id);
                    env.pop();
                    ok
                }
            }
        }
        walk(
            self,
            &mut Vec::new(),
            &mut std::collections::BTreeMap::new(),
            &mut Vec::new(),
            &mut 0,
        )
    }

    /// All names occurring anywhere, free or bound (binder names included).
    pub fn all_names(&self) -> BTreeSet<AtomName> {
        let mut out = BTreeSet::new();
        fn walk(s: &Structure, out: &mut BTreeSet<AtomName>) {
            match s {
                Unit => {}
                Atom(a) => {
                    out.insert(a.name.clone());
                }
                Par(cs) | CoPar(cs) | Seq(cs) => cs.iter().for_each(|c| walk(c, out)),
                Ren(a, body) => {
                    out.insert(a.clone());
                    walk(body, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Par,
    CoPar,
    Seq,
}

impl Kind {
    pub(crate) fn wrap(self, children: Vec<Structure>) -> Structure {
        match self {
            Kind::Par => Par(children),
            Kind::CoPar => CoPar(children),
            Kind::Seq => Seq(children),
        }
    }

    pub(crate) fn of(s: &Structure) -> Option<Kind> {
        match s {
            Par(_) => Some(Kind::Par),
            CoPar(_) => Some(Kind::CoPar),
            Seq(_) => Some(Kind::Seq),
            _ => None,
        }
    }
}

/// Flattens same-kind children, drops units, and collapses trivial nodes.
pub(crate) fn assemble(kind: Kind, children: Vec<Structure>) -> Structure {
    let mut out = Vec::with_capacity(children.len());
    for c in children {
        match (kind, c) {
            (_, Unit) => {}
            (Kind::Par, Par(cs)) => out.extend(cs),
            (Kind::CoPar, CoPar(cs)) => out.extend(cs),
            (Kind::Seq, Seq(cs)) => out.extend(cs),
            (_, other) => out.push(other),
        }
    }
    match out.len() {
        0 => Unit,
        1 => out.pop().unwrap(),
        _ => kind.wrap(out),
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, cs: &[Structure]) -> fmt::Result {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(";")?;
                }
                write!(f, "{c}")?;
            }
            Ok(())
        }
        match self {
            Unit => f.write_str("1"),
            Atom(a) => match a.polarity {
                Polarity::Positive => write!(f, "{}", a.name),
                Polarity::Negative => write!(f, "~{}", a.name),
            },
            Par(cs) => {
                f.write_str("[")?;
                join(f, cs)?;
                f.write_str("]")
            }
            CoPar(cs) => {
                f.write_str("(")?;
                join(f, cs)?;
                f.write_str(")")
            }
            Seq(cs) => {
                f.write_str("<")?;
                join(f, cs)?;
                f.write_str(">")
            }
            Ren(a, body) => write!(f, "{{{a}}}{body}"),
        }
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
