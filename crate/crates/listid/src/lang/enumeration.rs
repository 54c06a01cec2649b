//! Deterministic enumerations of a language.
//!
//! An enumeration is an infinite stream `x_1, x_2, ...` covering exactly the
//! members of its language. Finite languages follow the repeat-last-element
//! convention: once the members are exhausted the final element repeats
//! forever, which keeps the stream infinite without changing its set of
//! distinct values.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::language::{Element, Language};
use crate::lang::rng::RngState;
use crate::lang::spiral;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Enumeration {
    /// Spiral order restricted to the language.
    Canonical { language: Language },
    /// A fixed prefix, then the canonical order over the not-yet-shown
    /// members. Each prefix element must belong to the language.
    PrefixThenCanonical {
        prefix: Vec<Element>,
        language: Language,
    },
    /// Canonical order permuted within consecutive blocks by a seeded
    /// shuffle. Every member still appears, displaced at most a block away.
    BlockShuffled {
        language: Language,
        seed: u64,
        block_size: u32,
    },
}

/// Where a value occurs in a stream: finitely many explicit positions plus,
/// for finite languages, the position from which it repeats forever.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Occurrences {
    pub positions: Vec<u64>,
    pub tail_from: Option<u64>,
}

/// The `i`-th member (1-based) of `language` in spiral order, ignoring the
/// repeat convention. `None` past the end of a finite language.
fn nth_member(language: &Language, i: u64) -> Option<Element> {
    match language {
        Language::Finite { .. } => {
            let sorted = language.members_in_spiral_order().unwrap();
            sorted.get(i as usize - 1).copied()
        }
        Language::Cofinite { excluded } => {
            let ex_positions: Vec<u64> =
                excluded.iter().map(|e| spiral::position_of(e.0)).collect();
            let mut p = i;
            loop {
                let c = ex_positions.iter().filter(|&&q| q <= p).count() as u64;
                let next = i + c;
                if next == p {
                    break;
                }
                p = next;
            }
            debug_assert!(!excluded.contains(&Element(spiral::value_at(p))));
            Some(Element(spiral::value_at(p)))
        }
    }
}

/// Rank of `x` within the spiral order restricted to `language` (1-based).
fn member_rank(language: &Language, x: Element) -> Option<u64> {
    if !language.contains(x) {
        return None;
    }
    match language {
        Language::Finite { .. } => {
            let sorted = language.members_in_spiral_order().unwrap();
            sorted.iter().position(|&e| e == x).map(|p| p as u64 + 1)
        }
        Language::Cofinite { excluded } => {
            let p = spiral::position_of(x.0);
            let skipped = excluded
                .iter()
                .filter(|e| spiral::position_of(e.0) < p)
                .count() as u64;
            Some(p - skipped)
        }
    }
}

impl Enumeration {
    pub fn canonical(language: Language) -> Self {
        Enumeration::Canonical { language }
    }

    pub fn language(&self) -> &Language {
        match self {
            Enumeration::Canonical { language } => language,
            Enumeration::PrefixThenCanonical { language, .. } => language,
            Enumeration::BlockShuffled { language, .. } => language,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Enumeration::PrefixThenCanonical { prefix, language } => {
                for e in prefix {
                    if !language.contains(*e) {
                        return Err(Error::InvalidDistribution(format!(
                            "prefix element {e} lies outside the language"
                        )));
                    }
                }
                Ok(())
            }
            Enumeration::BlockShuffled { block_size, .. } => {
                if *block_size == 0 {
                    return Err(Error::InvalidDistribution("block_size must be >= 1".into()));
                }
                Ok(())
            }
            Enumeration::Canonical { .. } => Ok(()),
        }
    }

    /// The element at 1-based position `pos`. Total for every `pos >= 1`.
    pub fn element_at(&self, pos: u64) -> Element {
        debug_assert!(pos >= 1);
        match self {
            Enumeration::Canonical { language } => match language.len() {
                None => nth_member(language, pos).unwrap(),
                Some(n) => nth_member(language, pos.min(n as u64)).unwrap(),
            },
            Enumeration::PrefixThenCanonical { prefix, language } => {
                if pos as usize <= prefix.len() {
                    return prefix[pos as usize - 1];
                }
                let shown: BTreeSet<Element> = prefix.iter().copied().collect();
                let residual_pos = pos - prefix.len() as u64;
                residual_element(language, &shown, residual_pos)
                    .or_else(|| prefix.last().copied())
                    .expect("prefix covers a finite language, so it is non-empty")
            }
            Enumeration::BlockShuffled {
                language,
                seed,
                block_size,
            } => {
                let b = *block_size as u64;
                match language.len() {
                    None => {
                        let block = (pos - 1) / b;
                        let within = ((pos - 1) % b) as usize;
                        shuffled_block(language, *seed, block, b)[within]
                    }
                    Some(n) => {
                        let n = n as u64;
                        let p = pos.min(n);
                        let block = (p - 1) / b;
                        let within = ((p - 1) % b) as usize;
                        let start = block * b + 1;
                        let len = b.min(n - start + 1);
                        let mut items: Vec<Element> = (start..start + len)
                            .map(|i| nth_member(language, i).unwrap())
                            .collect();
                        let mut rng = RngState::substream(*seed, block);
                        items.shuffle(&mut rng);
                        items[within]
                    }
                }
            }
        }
    }

    /// The first `t` elements of the stream.
    pub fn prefix(&self, t: u64) -> Vec<Element> {
        (1..=t).map(|i| self.element_at(i)).collect()
    }

    /// Every position at which `x` occurs.
    pub fn occurrences_of(&self, x: Element) -> Occurrences {
        match self {
            Enumeration::Canonical { language } => {
                let mut occ = Occurrences::default();
                if let Some(r) = member_rank(language, x) {
                    occ.positions.push(r);
                    if let Some(n) = language.len() {
                        if r == n as u64 {
                            occ.tail_from = Some(r + 1);
                        }
                    }
                }
                occ
            }
            Enumeration::PrefixThenCanonical { prefix, language } => {
                let mut occ = Occurrences::default();
                for (i, e) in prefix.iter().enumerate() {
                    if *e == x {
                        occ.positions.push(i as u64 + 1);
                    }
                }
                let shown: BTreeSet<Element> = prefix.iter().copied().collect();
                let offset = prefix.len() as u64;
                if language.contains(x) && !shown.contains(&x) {
                    if let Some(r) = residual_rank(language, &shown, x) {
                        occ.positions.push(offset + r);
                    }
                }
                // Repeat tail for finite languages.
                if language.is_finite() {
                    let residual_len = residual_count(language, &shown);
                    let (last, tail_start) = if residual_len > 0 {
                        (
                            residual_element(language, &shown, residual_len),
                            offset + residual_len + 1,
                        )
                    } else {
                        (prefix.last().copied(), offset + 1)
                    };
                    if last == Some(x) {
                        occ.tail_from = Some(tail_start);
                    }
                }
                occ
            }
            Enumeration::BlockShuffled { language, .. } => {
                let mut occ = Occurrences::default();
                if let Some(r) = member_rank(language, x) {
                    // Locate x inside its (shuffled) block.
                    let n = language.len().map(|n| n as u64);
                    let b = match self {
                        Enumeration::BlockShuffled { block_size, .. } => *block_size as u64,
                        _ => unreachable!(),
                    };
                    let block = (r - 1) / b;
                    let start = block * b + 1;
                    let end = match n {
                        None => start + b - 1,
                        Some(n) => (start + b - 1).min(n),
                    };
                    let mut found = 0;
                    for p in start..=end {
                        if self.element_at(p) == x {
                            found = p;
                            break;
                        }
                    }
                    debug_assert!(found >= 1);
                    occ.positions.push(found);
                    if let Some(n) = n {
                        if self.element_at(n) == x {
                            occ.tail_from = Some(n + 1);
                        }
                    }
                }
                occ
            }
        }
    }
}

fn residual_element(
    language: &Language,
    shown: &BTreeSet<Element>,
    residual_pos: u64,
) -> Option<Element> {
    match language {
        Language::Finite { .. } => {
            let rest: Vec<Element> = language
                .members_in_spiral_order()
                .unwrap()
                .into_iter()
                .filter(|e| !shown.contains(e))
                .collect();
            if rest.is_empty() {
                None
            } else {
                Some(rest[(residual_pos as usize - 1).min(rest.len() - 1)])
            }
        }
        Language::Cofinite { excluded } => {
            let mut bigger = excluded.clone();
            bigger.extend(shown.iter().copied());
            nth_member(&Language::Cofinite { excluded: bigger }, residual_pos)
        }
    }
}

fn residual_rank(language: &Language, shown: &BTreeSet<Element>, x: Element) -> Option<u64> {
    match language {
        Language::Finite { .. } => {
            let rest: Vec<Element> = language
                .members_in_spiral_order()
                .unwrap()
                .into_iter()
                .filter(|e| !shown.contains(e))
                .collect();
            rest.iter().position(|&e| e == x).map(|p| p as u64 + 1)
        }
        Language::Cofinite { excluded } => {
            let mut bigger = excluded.clone();
            bigger.extend(shown.iter().copied());
            member_rank(&Language::Cofinite { excluded: bigger }, x)
        }
    }
}

fn residual_count(language: &Language, shown: &BTreeSet<Element>) -> u64 {
    match language {
        Language::Finite { members } => members.iter().filter(|e| !shown.contains(e)).count() as u64,
        Language::Cofinite { .. } => u64::MAX,
    }
}

fn shuffled_block(language: &Language, seed: u64, block: u64, block_size: u64) -> Vec<Element> {
    let start = block * block_size + 1;
    let mut items: Vec<Element> = (start..start + block_size)
        .map(|i| nth_member(language, i).unwrap())
        .collect();
    let mut rng = RngState::substream(seed, block);
    items.shuffle(&mut rng);
    items
}
