//! Indexed collections of languages.
//!
//! Two families are supported:
//!
//! * `Finite`: an explicit ordered list of finite languages over a finite
//!   universe (duplicates at distinct indices are allowed).
//! * `Canonical { k_max }`: index 1 is the full set of integers; the
//!   remaining indices enumerate every cofinite language `Z \ F` with
//!   `1 <= |F| <= k_max` exactly once. `k_max = None` places no bound on
//!   `|F|`.
//!
//! Canonical index order: exclusion sets are grouped by the largest spiral
//! position occurring in them, groups are listed in increasing order, and
//! within a group sets are sorted by cardinality and then lexicographically
//! on their sorted spiral positions. Every finite exclusion set therefore
//! receives a finite index.

use std::collections::BTreeSet;

use crate::angluin::TelltaleAssignment;
use crate::error::{Error, Result};
use crate::lang::language::{Element, Language};
use crate::lang::spiral;

#[derive(Clone, Debug)]
pub enum CollectionKind {
    Finite {
        languages: Vec<Language>,
        universe: BTreeSet<Element>,
    },
    Canonical {
        /// Maximum exclusion-set size; `None` means unbounded.
        k_max: Option<u32>,
    },
}

#[derive(Clone, Debug)]
pub struct Collection {
    pub kind: CollectionKind,
    pub telltales: TelltaleAssignment,
}

impl Collection {
    pub fn canonical(k_max: u32) -> Self {
        Collection {
            kind: CollectionKind::Canonical { k_max: Some(k_max) },
            telltales: TelltaleAssignment::AllEmpty,
        }
    }

    pub fn canonical_unbounded() -> Self {
        Collection {
            kind: CollectionKind::Canonical { k_max: None },
            telltales: TelltaleAssignment::AllEmpty,
        }
    }

    pub fn finite(languages: Vec<Language>, universe: BTreeSet<Element>) -> Result<Self> {
        for (i, lang) in languages.iter().enumerate() {
            match lang {
                Language::Finite { members } => {
                    if members.is_empty() {
                        return Err(Error::EmptyLanguage);
                    }
                    if !members.is_subset(&universe) {
                        return Err(Error::InvalidCollection(format!(
                            "language {} has members outside the universe",
                            i + 1
                        )));
                    }
                }
                Language::Cofinite { .. } => {
                    return Err(Error::InvalidCollection(format!(
                        "language {} is cofinite; finite collections hold finite languages",
                        i + 1
                    )));
                }
            }
        }
        if languages.is_empty() {
            return Err(Error::InvalidCollection("no languages given".into()));
        }
        Ok(Collection {
            kind: CollectionKind::Finite {
                languages,
                universe,
            },
            telltales: TelltaleAssignment::AllEmpty,
        })
    }

    /// Convenience constructor from plain member lists.
    pub fn finite_from_members(lists: &[&[i64]]) -> Result<Self> {
        let mut universe = BTreeSet::new();
        let mut languages = Vec::new();
        for l in lists {
            universe.extend(l.iter().map(|&x| Element(x)));
            languages.push(Language::finite(l.iter().copied())?);
        }
        Collection::finite(languages, universe)
    }

    pub fn with_telltales(mut self, telltales: TelltaleAssignment) -> Self {
        self.telltales = telltales;
        self
    }

    /// Number of languages, or `None` for infinite families.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            CollectionKind::Finite { languages, .. } => Some(languages.len()),
            CollectionKind::Canonical { .. } => None,
        }
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self.kind, CollectionKind::Canonical { .. })
    }

    pub fn canonical_k_max(&self) -> Option<Option<u32>> {
        match self.kind {
            CollectionKind::Canonical { k_max } => Some(k_max),
            _ => None,
        }
    }

    pub fn universe(&self) -> Option<&BTreeSet<Element>> {
        match &self.kind {
            CollectionKind::Finite { universe, .. } => Some(universe),
            CollectionKind::Canonical { .. } => None,
        }
    }

    /// The language at 1-based index `i`. Total for canonical families.
    pub fn language_at(&self, index: u64) -> Result<Language> {
        match &self.kind {
            CollectionKind::Finite { languages, .. } => {
                if index == 0 || index as usize > languages.len() {
                    Err(Error::IndexOutOfRange {
                        index,
                        size: languages.len(),
                    })
                } else {
                    Ok(languages[index as usize - 1].clone())
                }
            }
            CollectionKind::Canonical { k_max } => {
                let excluded = exclusion_at(*k_max, index)?;
                Ok(Language::Cofinite { excluded })
            }
        }
    }

    /// Smallest index holding the same language as index `l`.
    pub fn first_index(&self, l: u64) -> Result<u64> {
        match &self.kind {
            CollectionKind::Finite { languages, .. } => {
                let target = self.language_at(l)?;
                for (i, lang) in languages.iter().enumerate() {
                    if *lang == target {
                        return Ok(i as u64 + 1);
                    }
                }
                unreachable!("l itself always matches");
            }
            CollectionKind::Canonical { .. } => {
                // Canonical families are duplicate-free and total on
                // indices, so no unranking is needed.
                if l == 0 {
                    return Err(Error::IndexOutOfRange { index: l, size: 0 });
                }
                Ok(l)
            }
        }
    }

    /// Whether indices `a` and `b` name the same language.
    pub fn same_language(&self, a: u64, b: u64) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        match &self.kind {
            CollectionKind::Canonical { .. } => Ok(false),
            CollectionKind::Finite { .. } => Ok(self.language_at(a)? == self.language_at(b)?),
        }
    }

    /// Whether any index in `guesses` names the same language as `target`.
    pub fn identifies(&self, guesses: &[u64], target: u64) -> Result<bool> {
        for &g in guesses {
            if self.same_language(g, target)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// The canonical index of `Z \ excluded`, when it belongs to the family.
    pub fn index_of_exclusion(&self, excluded: &BTreeSet<Element>) -> Result<u64> {
        match self.kind {
            CollectionKind::Canonical { k_max } => index_of_exclusion(k_max, excluded),
            _ => Err(Error::InvalidCollection(
                "index_of_exclusion requires a canonical family".into(),
            )),
        }
    }

    /// All exclusion sets of a canonical family, in index order starting at
    /// index 1 (the empty set).
    pub fn canonical_exclusions(&self) -> Result<impl Iterator<Item = BTreeSet<Element>>> {
        match self.kind {
            CollectionKind::Canonical { k_max } => Ok(canonical_exclusions(k_max)),
            _ => Err(Error::InvalidCollection(
                "canonical_exclusions requires a canonical family".into(),
            )),
        }
    }

    /// Finite restriction of a canonical family to the universe
    /// `{-bound..bound}`: every `Z \ F` with `F` inside the universe becomes
    /// the explicit set `universe \ F`, listed in canonical index order.
    /// Because groups are position-complete, truncation indices coincide
    /// with canonical indices.
    pub fn truncate_canonical(&self, bound: i64) -> Result<Collection> {
        let k_max = match self.kind {
            CollectionKind::Canonical { k_max } => k_max,
            _ => {
                return Err(Error::InvalidCollection(
                    "truncate_canonical requires a canonical family".into(),
                ))
            }
        };
        let universe: BTreeSet<Element> = (-bound..=bound).map(Element).collect();
        let max_pos = 2 * bound as u64 + 1;
        let mut languages = Vec::new();
        for f in canonical_exclusions(k_max) {
            if f.iter().any(|e| spiral::position_of(e.0) > max_pos) {
                break;
            }
            let members: BTreeSet<Element> =
                universe.iter().copied().filter(|x| !f.contains(x)).collect();
            languages.push(Language::Finite { members });
        }
        Collection::finite(languages, universe)
    }
}

const BINOM_CAP: u128 = u128::MAX / 4;

fn binom(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc >= BINOM_CAP {
            return BINOM_CAP;
        }
    }
    acc
}

fn group_size(m: u64, k_max: Option<u32>) -> u128 {
    let lim = match k_max {
        Some(k) => (k as u64).min(m),
        None => m,
    };
    let mut total: u128 = 0;
    for s in 1..=lim {
        total = total.saturating_add(binom(m - 1, s - 1));
    }
    total
}

/// Positions (ascending) of the r-subset of {1..n} with the given lex rank.
fn unrank_combination(n: u64, r: u64, mut rank: u128) -> Vec<u64> {
    let mut out = Vec::with_capacity(r as usize);
    let mut next = 1u64;
    let mut rem = r;
    while rem > 0 {
        let c = binom(n - next, rem - 1);
        if rank < c {
            out.push(next);
            rem -= 1;
        } else {
            rank -= c;
        }
        next += 1;
    }
    out
}

/// Lex rank of an ascending r-subset of {1..n}.
fn rank_combination(n: u64, combo: &[u64]) -> u128 {
    let mut rank: u128 = 0;
    let mut next = 1u64;
    let mut rem = combo.len() as u64;
    for &p in combo {
        for q in next..p {
            rank += binom(n - q, rem - 1);
        }
        next = p + 1;
        rem -= 1;
    }
    rank
}

/// Exclusion set at a canonical index (index 1 is the empty set).
pub fn exclusion_at(k_max: Option<u32>, index: u64) -> Result<BTreeSet<Element>> {
    if index == 0 {
        return Err(Error::IndexOutOfRange { index, size: 0 });
    }
    if index == 1 {
        return Ok(BTreeSet::new());
    }
    let mut j = index as u128 - 1; // 1-based rank among non-empty exclusion sets
    let mut m = 1u64;
    loop {
        let sz = group_size(m, k_max);
        if j <= sz {
            break;
        }
        j -= sz;
        m += 1;
    }
    let lim = match k_max {
        Some(k) => (k as u64).min(m),
        None => m,
    };
    let mut s = 1u64;
    loop {
        debug_assert!(s <= lim);
        let c = binom(m - 1, s - 1);
        if j <= c {
            let mut positions = unrank_combination(m - 1, s - 1, j - 1);
            positions.push(m);
            return Ok(positions
                .into_iter()
                .map(|p| Element(spiral::value_at(p)))
                .collect());
        }
        j -= c;
        s += 1;
    }
}

/// Canonical index of an exclusion set, when `|F| <= k_max`.
pub fn index_of_exclusion(k_max: Option<u32>, excluded: &BTreeSet<Element>) -> Result<u64> {
    if excluded.is_empty() {
        return Ok(1);
    }
    if let Some(k) = k_max {
        if excluded.len() as u64 > k as u64 {
            return Err(Error::InvalidCollection(format!(
                "exclusion set of size {} exceeds k_max {}",
                excluded.len(),
                k
            )));
        }
    }
    let mut positions: Vec<u64> = excluded.iter().map(|e| spiral::position_of(e.0)).collect();
    positions.sort_unstable();
    let m = *positions.last().unwrap();
    let s = positions.len() as u64;
    let mut idx: u128 = 1;
    for g in 1..m {
        idx += group_size(g, k_max);
    }
    for t in 1..s {
        idx += binom(m - 1, t - 1);
    }
    idx += rank_combination(m - 1, &positions[..positions.len() - 1]);
    idx += 1;
    u64::try_from(idx).map_err(|_| Error::InvalidCollection("index overflows u64".into()))
}

/// Exclusion sets of a canonical family in index order, starting with the
/// empty set at index 1.
pub fn canonical_exclusions(k_max: Option<u32>) -> impl Iterator<Item = BTreeSet<Element>> {
    use itertools::Itertools;
    std::iter::once(BTreeSet::new()).chain((1u64..).flat_map(move |m| {
        let lim = match k_max {
            Some(k) => (k as u64).min(m),
            None => m,
        };
        (1..=lim).flat_map(move |s| {
            let pool: Vec<u64> = (1..m).collect();
            pool.into_iter()
                .combinations(s as usize - 1)
                .map(move |mut positions| {
                    positions.push(m);
                    positions
                        .into_iter()
                        .map(|p| Element(spiral::value_at(p)))
                        .collect::<BTreeSet<Element>>()
                })
        })
    }))
}
