//! The k-list identification algorithm.
//!
//! `list_identify` follows the recursive scheme: find the least index whose
//! language is consistent with the observed set and whose tell-tale has
//! fully appeared, emit it, then recurse over the proper subsets of that
//! language which contain its tell-tale. The recursion depth bounds the
//! output arity by `k`.
//!
//! Index sets arising in the recursion are represented lazily as a stack of
//! constraint frames rather than materialised, so the same code drives both
//! finite explicit collections and the infinite canonical families.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::angluin::{assign_telltales, TelltaleAssignment};
use crate::error::{Error, Result};
use crate::lang::collection::index_of_exclusion;
use crate::lang::language::{is_proper_subset, is_subset, Element, Language};
use crate::lang::spiral;
use crate::lang::{Collection, CollectionKind, Enumeration};

pub const DEFAULT_SCAN_CAP: u64 = 1_000_000;

/// An ordered list of at most `k` collection indices, with flags recording
/// how it was produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GuessList {
    pub indices: Vec<u64>,
    /// Some recursion level found no feasible index and fell back to 1.
    pub fallback: bool,
    /// Some search hit its scan cap; minimality is not certified.
    pub approximate: bool,
}

impl GuessList {
    pub fn from_indices(indices: Vec<u64>) -> Self {
        GuessList {
            indices,
            fallback: false,
            approximate: false,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Right-pads with index 1 up to arity `k`, mirroring the algorithm's
    /// own infeasibility fallback.
    pub fn padded(&self, k: u32) -> Vec<u64> {
        let mut v = self.indices.clone();
        while (v.len() as u32) < k {
            v.push(1);
        }
        v
    }
}

/// One recursion frame: guesses below must be proper subsets of the parent
/// language and contain the parent's tell-tale, at indices past the parent.
#[derive(Clone, Debug)]
struct Frame {
    parent_index: u64,
    parent_language: Language,
    parent_telltale: BTreeSet<Element>,
}

/// The index set of one recursion level, decided lazily from the frames.
#[derive(Clone)]
pub struct LazyIndexSet<'a> {
    collection: &'a Collection,
    frames: Vec<Frame>,
}

impl<'a> LazyIndexSet<'a> {
    pub fn full(collection: &'a Collection) -> Self {
        LazyIndexSet {
            collection,
            frames: Vec::new(),
        }
    }

    fn lower_bound(&self) -> u64 {
        self.frames.last().map(|f| f.parent_index).unwrap_or(0)
    }

    fn push(&self, frame: Frame) -> Self {
        let mut frames = self.frames.clone();
        frames.push(frame);
        LazyIndexSet {
            collection: self.collection,
            frames,
        }
    }

    /// Membership of `j`, given its language.
    fn contains_language(&self, j: u64, lang: &Language) -> bool {
        j > self.lower_bound()
            && self.frames.iter().all(|f| {
                is_proper_subset(lang, &f.parent_language)
                    && f.parent_telltale.iter().all(|x| lang.contains(*x))
            })
    }

    /// True when the set is certainly empty. For canonical families the
    /// frames are nested exclusion sets, so the set is empty exactly when
    /// the innermost exclusion set has already reached `k_max`.
    fn provably_empty(&self) -> bool {
        match &self.collection.kind {
            CollectionKind::Canonical { k_max } => match (self.frames.last(), k_max) {
                (Some(f), Some(km)) => match &f.parent_language {
                    Language::Cofinite { excluded } => excluded.len() as u64 >= *km as u64,
                    Language::Finite { .. } => false,
                },
                _ => false,
            },
            CollectionKind::Finite { languages, .. } => !(1..=languages.len() as u64)
                .any(|j| self.contains_language(j, &languages[j as usize - 1])),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct FeasibleSearch {
    pub index: Option<u64>,
    /// Whether the set was observed to contain any member at all.
    pub any_member: bool,
    pub approximate: bool,
}

/// Least index `i` in the set with `S ⊆ L_i` and `T_i^(level) ⊆ S`.
///
/// Canonical families with all-empty tell-tales admit a closed form: the
/// group-then-size-then-lex index order refines strict inclusion, so the
/// least feasible index is the parent exclusion set extended by the first
/// spiral element outside `S` and the parent exclusion. Finite collections
/// are scanned exhaustively; anything else is scanned up to `scan_cap` and
/// flagged approximate when nothing is found.
pub fn feasible_min_index(
    set: &LazyIndexSet<'_>,
    s: &BTreeSet<Element>,
    level: u32,
    scan_cap: u64,
) -> FeasibleSearch {
    let c = set.collection;
    match (&c.kind, &c.telltales) {
        (CollectionKind::Canonical { k_max }, TelltaleAssignment::AllEmpty) => {
            if set.provably_empty() {
                return FeasibleSearch {
                    index: None,
                    any_member: false,
                    approximate: false,
                };
            }
            let parent_excluded: BTreeSet<Element> = match set.frames.last() {
                None => {
                    // Index 1 (the full set) is always feasible.
                    return FeasibleSearch {
                        index: Some(1),
                        any_member: true,
                        approximate: false,
                    };
                }
                Some(f) => match &f.parent_language {
                    Language::Cofinite { excluded } => excluded.clone(),
                    Language::Finite { .. } => unreachable!("canonical languages are cofinite"),
                },
            };
            let gap = spiral::values()
                .map(Element)
                .find(|x| !s.contains(x) && !parent_excluded.contains(x))
                .unwrap();
            let mut witness = parent_excluded;
            witness.insert(gap);
            let index = index_of_exclusion(*k_max, &witness)
                .expect("witness size is bounded by k_max when the set is non-empty");
            debug_assert!(minimality_spot_check(set, s, index, &witness));
            FeasibleSearch {
                index: Some(index),
                any_member: true,
                approximate: false,
            }
        }
        (CollectionKind::Finite { languages, .. }, telltales) => {
            let mut any_member = false;
            for j in 1..=languages.len() as u64 {
                let lang = &languages[j as usize - 1];
                if !set.contains_language(j, lang) {
                    continue;
                }
                any_member = true;
                if !s.iter().all(|x| lang.contains(*x)) {
                    continue;
                }
                match telltales.lookup(j, level) {
                    Some(t) if t.is_subset(s) => {
                        return FeasibleSearch {
                            index: Some(j),
                            any_member: true,
                            approximate: false,
                        }
                    }
                    _ => {}
                }
            }
            FeasibleSearch {
                index: None,
                any_member,
                approximate: false,
            }
        }
        (CollectionKind::Canonical { k_max }, telltales) => {
            // Explicit tell-tales over an infinite family: scan in index
            // order up to the cap.
            let lower = set.lower_bound();
            let mut examined = 0u64;
            for (offset, excluded) in
                crate::lang::collection::canonical_exclusions(*k_max).enumerate()
            {
                let j = offset as u64 + 1;
                if j <= lower {
                    continue;
                }
                examined += 1;
                if examined > scan_cap {
                    break;
                }
                let lang = Language::Cofinite { excluded };
                if !set.contains_language(j, &lang) {
                    continue;
                }
                if !s.iter().all(|x| lang.contains(*x)) {
                    continue;
                }
                if let Some(t) = telltales.lookup(j, level) {
                    if t.is_subset(s) {
                        return FeasibleSearch {
                            index: Some(j),
                            any_member: true,
                            approximate: false,
                        };
                    }
                }
            }
            FeasibleSearch {
                index: None,
                any_member: true,
                approximate: true,
            }
        }
    }
}

/// Cross-checks the closed-form least index against a bounded scan.
fn minimality_spot_check(
    set: &LazyIndexSet<'_>,
    s: &BTreeSet<Element>,
    index: u64,
    witness: &BTreeSet<Element>,
) -> bool {
    if index > 5_000 {
        return true; // skip expensive scans in debug runs
    }
    let k_max = match set.collection.kind {
        CollectionKind::Canonical { k_max } => k_max,
        _ => return true,
    };
    for (offset, excluded) in crate::lang::collection::canonical_exclusions(k_max)
        .enumerate()
        .take(index as usize)
    {
        let j = offset as u64 + 1;
        if j == index {
            return excluded == *witness;
        }
        let lang = Language::Cofinite { excluded };
        if set.contains_language(j, &lang) && s.iter().all(|x| lang.contains(*x)) {
            return false; // a smaller feasible index exists
        }
    }
    true
}

/// Runs the recursion on the distinct-element set `s`; output length <= k.
pub fn list_identify(
    c: &Collection,
    k: u32,
    s: &BTreeSet<Element>,
    scan_cap: u64,
) -> Result<GuessList> {
    let mut out = GuessList::from_indices(Vec::new());
    let set = LazyIndexSet::full(c);
    identify_level(c, set, k, s, scan_cap, &mut out)?;
    debug_assert!(out.indices.len() as u32 <= k);
    Ok(out)
}

fn identify_level(
    c: &Collection,
    set: LazyIndexSet<'_>,
    level: u32,
    s: &BTreeSet<Element>,
    scan_cap: u64,
    out: &mut GuessList,
) -> Result<()> {
    if level == 0 || set.provably_empty() {
        return Ok(());
    }
    let found = feasible_min_index(&set, s, level, scan_cap);
    out.approximate |= found.approximate;
    match found.index {
        None if !found.any_member => Ok(()),
        None => {
            out.indices.push(1);
            out.fallback = true;
            Ok(())
        }
        Some(i) => {
            out.indices.push(i);
            let lang = c.language_at(i)?;
            let telltale = c
                .telltales
                .lookup(i, level)
                .cloned()
                .unwrap_or_default();
            let next = set.push(Frame {
                parent_index: i,
                parent_language: lang,
                parent_telltale: telltale,
            });
            identify_level(c, next, level - 1, s, scan_cap, out)
        }
    }
}

/// A deterministic list identifier: a total function from finite input
/// sequences to guess lists.
pub trait Identifier: Send + Sync {
    fn guess(&self, input: &[Element]) -> GuessList;
    fn arity(&self) -> u32;
}

/// `list_identify` over a fixed collection and level.
pub struct ListIdentifier {
    collection: Arc<Collection>,
    k: u32,
    scan_cap: u64,
}

impl ListIdentifier {
    /// Validates the k-Angluin condition and installs the tell-tale
    /// assignment it induces.
    pub fn new(collection: Collection, k: u32) -> Result<Self> {
        let telltales = assign_telltales(&collection, k)?;
        Ok(ListIdentifier {
            collection: Arc::new(collection.with_telltales(telltales)),
            k,
            scan_cap: DEFAULT_SCAN_CAP,
        })
    }

    /// Runs the machinery with whatever tell-tales the collection already
    /// carries (all-empty by default), without checking the condition.
    /// This is how an identifier with too small a list is pitted against
    /// an adversary on a family where it must fail.
    pub fn with_existing_telltales(collection: Collection, k: u32) -> Self {
        ListIdentifier {
            collection: Arc::new(collection),
            k,
            scan_cap: DEFAULT_SCAN_CAP,
        }
    }

    pub fn collection(&self) -> &Arc<Collection> {
        &self.collection
    }
}

impl Identifier for ListIdentifier {
    fn guess(&self, input: &[Element]) -> GuessList {
        let s: BTreeSet<Element> = input.iter().copied().collect();
        list_identify(&self.collection, self.k, &s, self.scan_cap)
            .expect("indices produced by the recursion are always valid")
    }

    fn arity(&self) -> u32 {
        self.k
    }
}

/// Ignores its input entirely.
pub struct ConstantIdentifier {
    pub list: Vec<u64>,
}

impl Identifier for ConstantIdentifier {
    fn guess(&self, _input: &[Element]) -> GuessList {
        GuessList::from_indices(self.list.clone())
    }

    fn arity(&self) -> u32 {
        self.list.len() as u32
    }
}

/// Time-indexed record of inputs and guesses.
#[derive(Clone, Debug, Serialize)]
pub struct TranscriptStep {
    pub t: u64,
    pub input: Element,
    pub guesses: GuessList,
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    pub steps: Vec<TranscriptStep>,
}

/// Feeds the first `horizon` elements of an enumeration to the identifier.
pub fn run_identifier(
    c: &Collection,
    k: u32,
    enumeration: &Enumeration,
    horizon: u64,
    scan_cap: u64,
) -> Result<Transcript> {
    let mut s: BTreeSet<Element> = BTreeSet::new();
    let mut steps = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let x = enumeration.element_at(t);
        s.insert(x);
        let guesses = list_identify(c, k, &s, scan_cap)?;
        steps.push(TranscriptStep {
            t,
            input: x,
            guesses,
        });
    }
    Ok(Transcript { steps })
}

/// Least time from which every recorded guess list identifies the target,
/// or `None` when the final recorded guess fails.
pub fn converged_at(tr: &Transcript, c: &Collection, z: u64) -> Result<Option<u64>> {
    let mut last_fail: Option<u64> = None;
    for step in &tr.steps {
        if !c.identifies(&step.guesses.indices, z)? {
            last_fail = Some(step.t);
        }
    }
    match last_fail {
        None => Ok(Some(1)),
        Some(t) if Some(t) == tr.steps.last().map(|s| s.t) => Ok(None),
        Some(t) => Ok(Some(t + 1)),
    }
}

/// The `k` most frequent indices of a multiset, ties broken toward the
/// smaller index. Fewer than `k` distinct values yield a shorter list.
pub fn topk_multiset(values: &[u64], k: u32) -> GuessList {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let mut ranked: Vec<(u64, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    GuessList::from_indices(ranked.into_iter().take(k as usize).map(|(v, _)| v).collect())
}

/// Membership description of one stratum of a collection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StratumMembers {
    Explicit { indices: BTreeSet<u64> },
    /// All canonical indices whose exclusion set has the given size.
    ExclusionSize { size: u32 },
}

/// One stratum with the tell-tales certifying its base predicate.
#[derive(Clone, Debug, Serialize)]
pub struct StratumSpec {
    pub level: u32,
    pub members: StratumMembers,
    /// Per-index tell-tales; an empty map means every tell-tale is empty.
    pub telltales: BTreeMap<u64, BTreeSet<Element>>,
}

impl StratumSpec {
    fn telltale_of(&self, index: u64) -> BTreeSet<Element> {
        self.telltales.get(&index).cloned().unwrap_or_default()
    }

    /// Least feasible member of the stratum for the observed set, treating
    /// the stratum as a standalone collection with single guesses.
    fn least_feasible(&self, c: &Collection, s: &BTreeSet<Element>) -> Result<Option<u64>> {
        match &self.members {
            StratumMembers::Explicit { indices } => {
                for &i in indices {
                    let lang = c.language_at(i)?;
                    if s.iter().all(|x| lang.contains(*x)) && self.telltale_of(i).is_subset(s) {
                        return Ok(Some(i));
                    }
                }
                Ok(None)
            }
            StratumMembers::ExclusionSize { size } => {
                let k_max = c.canonical_k_max().ok_or_else(|| {
                    Error::InvalidCollection(
                        "exclusion-size strata require a canonical family".into(),
                    )
                })?;
                if *size == 0 {
                    return Ok(Some(1));
                }
                let mut f: BTreeSet<Element> = BTreeSet::new();
                for x in spiral::values().map(Element) {
                    if !s.contains(&x) {
                        f.insert(x);
                        if f.len() as u32 == *size {
                            break;
                        }
                    }
                }
                Ok(Some(index_of_exclusion(k_max, &f)?))
            }
        }
    }

    pub fn is_empty_stratum(&self) -> bool {
        match &self.members {
            StratumMembers::Explicit { indices } => indices.is_empty(),
            StratumMembers::ExclusionSize { .. } => false,
        }
    }
}

/// Concatenates one single-guess identifier per stratum, top level first.
pub fn stratified_identify(
    c: &Collection,
    strata: &[StratumSpec],
    s: &BTreeSet<Element>,
) -> Result<GuessList> {
    let mut out = GuessList::from_indices(Vec::new());
    for stratum in strata {
        if stratum.is_empty_stratum() {
            continue;
        }
        match stratum.least_feasible(c, s)? {
            Some(i) => out.indices.push(i),
            None => {
                out.indices.push(1);
                out.fallback = true;
            }
        }
    }
    Ok(out)
}

/// The concatenation identifier over a fixed stratification.
pub struct StratifiedIdentifier {
    collection: Arc<Collection>,
    strata: Vec<StratumSpec>,
}

impl StratifiedIdentifier {
    pub fn new(collection: Arc<Collection>, strata: Vec<StratumSpec>) -> Self {
        StratifiedIdentifier { collection, strata }
    }
}

impl Identifier for StratifiedIdentifier {
    fn guess(&self, input: &[Element]) -> GuessList {
        let s: BTreeSet<Element> = input.iter().copied().collect();
        stratified_identify(&self.collection, &self.strata, &s)
            .expect("strata indices are validated at construction")
    }

    fn arity(&self) -> u32 {
        self.strata.len() as u32
    }
}

/// Recomputes the stabilised value of the per-level minimum directly from
/// its definition: the least index `i <= z` that remains in the lazy set,
/// whose language contains the target, and whose tell-tale lies inside the
/// target. Descends level by level until the target itself is reached.
/// Used as an independent oracle for convergence checks.
pub fn stabilized_levels(c: &Collection, k: u32, z: u64) -> Result<Vec<u64>> {
    let target = c.language_at(z)?;
    let mut out = Vec::new();
    let mut set = LazyIndexSet::full(c);
    let mut level = k;
    while level >= 1 {
        let mut found = None;
        for i in 1..=z {
            let lang = c.language_at(i)?;
            if !set.contains_language(i, &lang) {
                continue;
            }
            if !is_subset(&target, &lang) {
                continue;
            }
            match c.telltales.lookup(i, level) {
                Some(t) if t.iter().all(|x| target.contains(*x)) => {
                    found = Some((i, lang.clone(), t.clone()));
                    break;
                }
                _ => continue,
            }
        }
        match found {
            None => break,
            Some((i, lang, telltale)) => {
                out.push(i);
                if lang == target {
                    break;
                }
                set = set.push(Frame {
                    parent_index: i,
                    parent_language: lang,
                    parent_telltale: telltale,
                });
                level -= 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vals: &[i64]) -> BTreeSet<Element> {
        vals.iter().map(|&v| Element(v)).collect()
    }

    #[test]
    fn feasible_min_on_canonical() {
        let c1 = Collection::canonical(1);
        let full = LazyIndexSet::full(&c1);
        let r = feasible_min_index(&full, &set(&[0, -1, 1]), 2, DEFAULT_SCAN_CAP);
        assert_eq!(r.index, Some(1));

        let frame = Frame {
            parent_index: 1,
            parent_language: Language::all_integers(),
            parent_telltale: BTreeSet::new(),
        };
        let level1 = full.push(frame);
        let r = feasible_min_index(&level1, &set(&[0, -1, 1]), 1, DEFAULT_SCAN_CAP);
        // First singleton exclusion disjoint from S is {-2}, at index 5.
        assert_eq!(r.index, Some(5));
    }

    #[test]
    fn feasible_min_on_finite() {
        let c = Collection::finite_from_members(&[&[1, 2], &[1]]).unwrap();
        let telltales = assign_telltales(&c, 1).unwrap();
        let c = c.with_telltales(telltales);
        let full = LazyIndexSet::full(&c);
        let r = feasible_min_index(&full, &set(&[1]), 1, DEFAULT_SCAN_CAP);
        assert_eq!(r.index, Some(2));
    }

    #[test]
    fn list_identify_examples() {
        let c1 = Collection::canonical(1);
        let g = list_identify(&c1, 2, &set(&[0, -1, 1]), DEFAULT_SCAN_CAP).unwrap();
        assert_eq!(g.indices, vec![1, 5]);
        let g = list_identify(&c1, 2, &set(&[]), DEFAULT_SCAN_CAP).unwrap();
        assert_eq!(g.indices, vec![1, 2]);

        let c = Collection::finite_from_members(&[&[1, 2], &[1]]).unwrap();
        let telltales = assign_telltales(&c, 1).unwrap();
        let c = c.with_telltales(telltales);
        let g = list_identify(&c, 1, &set(&[1]), DEFAULT_SCAN_CAP).unwrap();
        assert_eq!(g.indices, vec![2]);
    }

    #[test]
    fn arity_never_exceeds_level() {
        let c2 = Collection::canonical(2);
        for k in 1..=4u32 {
            for s in [set(&[]), set(&[0]), set(&[3, -3, 7]), set(&[0, -1, 1, -2, 2])] {
                let g = list_identify(&c2, k, &s, DEFAULT_SCAN_CAP).unwrap();
                assert!(g.indices.len() as u32 <= k);
            }
        }
    }

    #[test]
    fn transcripts_converge_as_traced() {
        let c1 = Collection::canonical(1);
        let e = Enumeration::canonical(Language::cofinite([-2]));
        let tr = run_identifier(&c1, 2, &e, 10, DEFAULT_SCAN_CAP).unwrap();
        // Index 5 is Z \ {-2}.
        for step in tr.steps.iter().filter(|s| s.t >= 4) {
            assert!(step.guesses.indices.contains(&5), "t={}", step.t);
        }

        let ez = Enumeration::canonical(Language::all_integers());
        let tr = run_identifier(&c1, 2, &ez, 10, DEFAULT_SCAN_CAP).unwrap();
        for step in &tr.steps {
            assert!(step.guesses.indices.contains(&1));
        }

        let c2 = Collection::canonical(2);
        let target = Language::cofinite([0, 1]);
        let z = c2
            .index_of_exclusion(&set(&[0, 1]))
            .unwrap();
        assert_eq!(z, 6);
        let tr = run_identifier(&c2, 3, &Enumeration::canonical(target), 20, DEFAULT_SCAN_CAP)
            .unwrap();
        let tstar = converged_at(&tr, &c2, z).unwrap().expect("must converge");
        assert!(tstar <= 20);
        for step in tr.steps.iter().filter(|s| s.t >= tstar) {
            assert!(c2.identifies(&step.guesses.indices, z).unwrap());
        }
    }

    #[test]
    fn convergence_time_edge_cases() {
        let c1 = Collection::canonical(1);
        let mk = |fails: &[u64], horizon: u64| Transcript {
            steps: (1..=horizon)
                .map(|t| TranscriptStep {
                    t,
                    input: Element(0),
                    guesses: GuessList::from_indices(if fails.contains(&t) {
                        vec![2]
                    } else {
                        vec![1]
                    }),
                })
                .collect(),
        };
        assert_eq!(converged_at(&mk(&[], 10), &c1, 1).unwrap(), Some(1));
        assert_eq!(converged_at(&mk(&[5], 10), &c1, 1).unwrap(), Some(6));
        assert_eq!(converged_at(&mk(&[10], 10), &c1, 1).unwrap(), None);
    }

    /// The stabilised per-level minima match a direct recomputation.
    #[test]
    fn stabilization_matches_direct_recomputation() {
        let c2 = Collection::canonical(2);
        let z = 6; // Z \ {0, 1}
        let tr = run_identifier(
            &c2,
            3,
            &Enumeration::canonical(Language::cofinite([0, 1])),
            25,
            DEFAULT_SCAN_CAP,
        )
        .unwrap();
        let tstar = converged_at(&tr, &c2, z).unwrap().unwrap();
        let expect = stabilized_levels(&c2, 3, z).unwrap();
        assert_eq!(expect, vec![1, 2, 6]);
        for step in tr.steps.iter().filter(|s| s.t >= tstar) {
            assert_eq!(&step.guesses.indices[..expect.len()], &expect[..]);
        }
    }

    #[test]
    fn determinism() {
        let c2 = Collection::canonical(2);
        let e = Enumeration::BlockShuffled {
            language: Language::cofinite([4]),
            seed: 3,
            block_size: 4,
        };
        let a = run_identifier(&c2, 3, &e, 30, DEFAULT_SCAN_CAP).unwrap();
        let b = run_identifier(&c2, 3, &e, 30, DEFAULT_SCAN_CAP).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn topk_examples() {
        assert_eq!(topk_multiset(&[1, 1, 2, 3], 2).indices, vec![1, 2]);
        assert_eq!(topk_multiset(&[5, 5, 5], 2).indices, vec![5]);
        // 70 nines among 200 entries coming from 100 lists of arity <= 2:
        // no two rivals can both outnumber it.
        let mut values = vec![9u64; 70];
        values.extend(vec![3u64; 65]);
        values.extend(vec![5u64; 65]);
        let top = topk_multiset(&values, 2);
        assert!(top.indices.contains(&9));
    }

    #[test]
    fn topk_is_a_prefix_of_the_frequency_sort() {
        let values = [4u64, 4, 4, 2, 2, 9, 9, 1];
        let full = topk_multiset(&values, 10).indices;
        for k in 1..=4u32 {
            assert_eq!(topk_multiset(&values, k).indices, full[..(k as usize).min(full.len())]);
        }
        // Sorted by frequency desc, then index asc.
        assert_eq!(full, vec![4, 2, 9, 1]);
    }

    #[test]
    fn stratified_concatenation() {
        let c1 = Collection::canonical(1);
        let strata = vec![
            StratumSpec {
                level: 2,
                members: StratumMembers::ExclusionSize { size: 0 },
                telltales: BTreeMap::new(),
            },
            StratumSpec {
                level: 1,
                members: StratumMembers::ExclusionSize { size: 1 },
                telltales: BTreeMap::new(),
            },
        ];
        let g = stratified_identify(&c1, &strata, &set(&[0, -1, 1])).unwrap();
        assert_eq!(g.indices, vec![1, 5]);

        let c2 = Collection::canonical(2);
        let strata2 = vec![
            StratumSpec {
                level: 3,
                members: StratumMembers::ExclusionSize { size: 0 },
                telltales: BTreeMap::new(),
            },
            StratumSpec {
                level: 2,
                members: StratumMembers::ExclusionSize { size: 1 },
                telltales: BTreeMap::new(),
            },
            StratumSpec {
                level: 1,
                members: StratumMembers::ExclusionSize { size: 2 },
                telltales: BTreeMap::new(),
            },
        ];
        let g = stratified_identify(&c2, &strata2, &set(&[])).unwrap();
        assert_eq!(g.indices, vec![1, 2, 4]);
    }

    /// Reference implementation over explicitly materialised index sets:
    /// simulates the recursion by scanning indices 1..=max_index, which is
    /// faithful whenever every selected index and witness stays below the
    /// bound. Cross-checks the lazy constraint-stack implementation.
    fn list_identify_by_scan(
        c: &Collection,
        k: u32,
        s: &BTreeSet<Element>,
        max_index: u64,
    ) -> Vec<u64> {
        fn go(
            c: &Collection,
            level: u32,
            set: &[u64],
            s: &BTreeSet<Element>,
            out: &mut Vec<u64>,
        ) {
            if level == 0 || set.is_empty() {
                return;
            }
            let feasible = set.iter().copied().find(|&i| {
                let lang = c.language_at(i).unwrap();
                s.iter().all(|x| lang.contains(*x))
                    && c.telltales
                        .lookup(i, level)
                        .map(|t| t.is_subset(s))
                        .unwrap_or(false)
            });
            match feasible {
                None => out.push(1),
                Some(star) => {
                    out.push(star);
                    let parent = c.language_at(star).unwrap();
                    let telltale = c.telltales.lookup(star, level).cloned().unwrap_or_default();
                    let next: Vec<u64> = set
                        .iter()
                        .copied()
                        .filter(|&j| {
                            j > star && {
                                let lang = c.language_at(j).unwrap();
                                is_proper_subset(&lang, &parent)
                                    && telltale.iter().all(|x| lang.contains(*x))
                            }
                        })
                        .collect();
                    go(c, level - 1, &next, s, out);
                }
            }
        }
        let all: Vec<u64> = (1..=max_index).collect();
        let mut out = Vec::new();
        go(c, k, &all, s, &mut out);
        out
    }

    #[test]
    fn lazy_recursion_matches_materialised_scan() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        let strategy = (
            1u32..=3,
            proptest::collection::btree_set(-3i64..=3, 0..6),
        );
        runner
            .run(&strategy, |(k_max, raw)| {
                let c = Collection::canonical(k_max);
                let s: BTreeSet<Element> = raw.into_iter().map(Element).collect();
                let k = k_max + 1;
                let fast = list_identify(&c, k, &s, DEFAULT_SCAN_CAP).unwrap();
                let slow = list_identify_by_scan(&c, k, &s, 500);
                prop_assert_eq!(fast.indices, slow);
                Ok(())
            })
            .unwrap();
    }

    #[test]
    fn single_stratum_matches_level_one_identify() {
        let c = Collection::finite_from_members(&[&[1, 2], &[1]]).unwrap();
        let telltales = assign_telltales(&c, 1).unwrap();
        let c = c.with_telltales(telltales);
        let t1 = match &c.telltales {
            TelltaleAssignment::Explicit { table } => table.clone(),
            _ => unreachable!(),
        };
        let mut stratum_telltales = BTreeMap::new();
        for ((i, _), t) in t1 {
            stratum_telltales.insert(i, t);
        }
        let strata = vec![StratumSpec {
            level: 1,
            members: StratumMembers::Explicit {
                indices: [1u64, 2].into_iter().collect(),
            },
            telltales: stratum_telltales,
        }];
        for s in [set(&[1]), set(&[1, 2]), set(&[2])] {
            let a = stratified_identify(&c, &strata, &s).unwrap();
            let b = list_identify(&c, 1, &s, DEFAULT_SCAN_CAP).unwrap();
            assert_eq!(a.indices, b.indices);
        }
    }
}
