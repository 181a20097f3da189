//! Atom names, polarities and the syntactic namespace split.
//!
//! Names beginning with `ch_` live in the channel namespace; everything else
//! is a plain variable name. The translator relies on the two namespaces
//! being disjoint so that lambda variables and output channels never clash.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which of the two name pools an atom name belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Namespace {
    Variable,
    Channel,
}

/// A propositional variable name. Equality is on the text; the namespace is
/// a function of the text (`ch_` prefix).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomName(String);

impl AtomName {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        debug_assert!(is_valid_name(&text), "invalid atom name: {text:?}");
        AtomName(text)
    }

    pub fn text(&self) -> &str {
        &self.0
    }

    pub fn namespace(&self) -> Namespace {
        if self.0.starts_with("ch_") {
            Namespace::Channel
        } else {
            Namespace::Variable
        }
    }
}

impl fmt::Display for AtomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AtomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for AtomName {
    fn from(s: &str) -> Self {
        AtomName::new(s)
    }
}

pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// A polarized occurrence of a name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub name: AtomName,
    pub polarity: Polarity,
}

impl Atom {
    pub fn positive(name: impl Into<AtomName>) -> Self {
        Atom { name: name.into(), polarity: Polarity::Positive }
    }

    pub fn negative(name: impl Into<AtomName>) -> Self {
        Atom { name: name.into(), polarity: Polarity::Negative }
    }

    /// Negation flips polarity and fixes the name.
    pub fn negate(&self) -> Self {
        Atom { name: self.name.clone(), polarity: self.polarity.flip() }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Positive => write!(f, "{}", self.name),
            Polarity::Negative => write!(f, "~{}", self.name),
        }
    }
}

impl From<AtomName> for Atom {
    fn from(name: AtomName) -> Self {
        Atom { name, polarity: Polarity::Positive }
    }
}

/// Picks a name of the form `basei` (i = 0, 1, ...) not contained in `taken`.
pub fn fresh_name<'a, I>(base: &str, taken: I) -> AtomName
where
    I: IntoIterator<Item = &'a AtomName>,
{
    let taken: std::collections::BTreeSet<&str> =
        taken.into_iter().map(|n| n.text()).collect();
    for i in 0.. {
        let cand = format!("{base}{i}");
        if !taken.contains(cand.as_str()) {
            return AtomName(cand);
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn namespace_is_syntactic() {
        assert_eq!(AtomName::new("ch_p0").namespace(), Namespace::Channel);
        assert_eq!(AtomName::new("x").namespace(), Namespace::Variable);
        assert_eq!(AtomName::new("chx").namespace(), Namespace::Variable);
    }

    #[test]
    fn negate_flips_polarity_and_fixes_name() {
        let a = Atom::positive("a");
        assert_eq!(a.negate(), Atom::negative("a"));
        assert_eq!(a.negate().negate(), a);
    }

    #[test]
    fn fresh_avoids_taken() {
        let taken = vec![AtomName::new("f0"), AtomName::new("f1")];
        assert_eq!(fresh_name("f", &taken).text(), "f2");
    }
}
