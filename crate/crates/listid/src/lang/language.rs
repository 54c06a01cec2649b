//! Languages over the integer universe.
//!
//! A language is either an explicit finite set or a cofinite set `Z \ F`
//! with a finite exclusion set `F`. Membership, subset and equality are all
//! decidable in this representation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::spiral;

/// A single member of the universe. External universes (strings, tokens)
/// must be pre-encoded to integers by the caller.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub i64);

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for Element {
    fn from(v: i64) -> Self {
        Element(v)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Language {
    /// An explicit, non-empty finite set.
    Finite { members: BTreeSet<Element> },
    /// The integers minus a finite (possibly empty) exclusion set.
    Cofinite { excluded: BTreeSet<Element> },
}

impl Language {
    pub fn finite<I: IntoIterator<Item = i64>>(members: I) -> Result<Self> {
        let members: BTreeSet<Element> = members.into_iter().map(Element).collect();
        if members.is_empty() {
            return Err(Error::EmptyLanguage);
        }
        Ok(Language::Finite { members })
    }

    /// `Z \ excluded`. An empty exclusion set denotes the full set of integers.
    pub fn cofinite<I: IntoIterator<Item = i64>>(excluded: I) -> Self {
        Language::Cofinite {
            excluded: excluded.into_iter().map(Element).collect(),
        }
    }

    pub fn all_integers() -> Self {
        Language::Cofinite {
            excluded: BTreeSet::new(),
        }
    }

    pub fn contains(&self, x: Element) -> bool {
        match self {
            Language::Finite { members } => members.contains(&x),
            Language::Cofinite { excluded } => !excluded.contains(&x),
        }
    }

    /// Number of members, or `None` for cofinite (infinite) languages.
    pub fn len(&self) -> Option<usize> {
        match self {
            Language::Finite { members } => Some(members.len()),
            Language::Cofinite { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Language::Finite { .. })
    }

    /// Members sorted by spiral position. Only defined for finite languages.
    pub fn members_in_spiral_order(&self) -> Option<Vec<Element>> {
        match self {
            Language::Finite { members } => {
                let mut v: Vec<Element> = members.iter().copied().collect();
                v.sort_by_key(|e| spiral::position_of(e.0));
                Some(v)
            }
            Language::Cofinite { .. } => None,
        }
    }

    /// Removes a single element. Returns `None` when the result is empty.
    pub fn without(&self, x: Element) -> Option<Language> {
        match self {
            Language::Finite { members } => {
                let mut m = members.clone();
                m.remove(&x);
                if m.is_empty() {
                    None
                } else {
                    Some(Language::Finite { members: m })
                }
            }
            Language::Cofinite { excluded } => {
                let mut e = excluded.clone();
                e.insert(x);
                Some(Language::Cofinite { excluded: e })
            }
        }
    }
}

/// `a ⊆ b`.
pub fn is_subset(a: &Language, b: &Language) -> bool {
    match (a, b) {
        (Language::Finite { members: ma }, Language::Finite { members: mb }) => ma.is_subset(mb),
        (Language::Finite { members }, Language::Cofinite { excluded }) => {
            members.iter().all(|x| !excluded.contains(x))
        }
        // A cofinite set is infinite, so it never fits inside a finite one.
        (Language::Cofinite { .. }, Language::Finite { .. }) => false,
        (Language::Cofinite { excluded: fa }, Language::Cofinite { excluded: fb }) => {
            fb.is_subset(fa)
        }
    }
}

/// `a ⊊ b`.
pub fn is_proper_subset(a: &Language, b: &Language) -> bool {
    a != b && is_subset(a, b)
}
