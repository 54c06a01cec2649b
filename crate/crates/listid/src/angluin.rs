//! The recursive tell-tale predicate and the k-Angluin condition.
//!
//! `psi(L_i, 1)` asks for a finite `T ⊆ L_i` that no proper-subset language
//! in the collection contains. `psi(L_i, k)` for `k > 1` relaxes the base
//! case: a proper subset may contain `T` provided it satisfies
//! `psi(., k-1)`. The k-Angluin condition requires `psi(L_i, k)` at every
//! index, and characterises which collections admit a k-list identifier.
//!
//! For finite explicit collections the predicate is decided exactly by
//! exhaustive search over candidate tell-tales (cardinality-ascending, then
//! lexicographic). For the canonical families the predicate has the closed
//! form `|F| >= k_max - j + 1`, which the brute-force oracle cross-checks on
//! truncations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::lang::language::{is_proper_subset, Element, Language};
use crate::lang::{Collection, CollectionKind};

static EMPTY_TELLTALE: BTreeSet<Element> = BTreeSet::new();

/// Tell-tale sets per (index, level). One set per pair; once a level is
/// assigned, every higher level reuses it.
#[derive(Clone, Debug)]
pub enum TelltaleAssignment {
    /// Every tell-tale is the empty set. Valid for the canonical families
    /// at level `k_max + 1` and above.
    AllEmpty,
    /// An explicit table, usually produced by `assign_telltales`.
    Explicit {
        table: BTreeMap<(u64, u32), BTreeSet<Element>>,
    },
}

impl TelltaleAssignment {
    /// The tell-tale for `(index, level)`. Falls back to the largest
    /// assigned level at or below `level`, which is sound because a
    /// tell-tale certifying `psi(., j)` also certifies `psi(., j')` for
    /// every `j' >= j`.
    pub fn lookup(&self, index: u64, level: u32) -> Option<&BTreeSet<Element>> {
        match self {
            TelltaleAssignment::AllEmpty => Some(&EMPTY_TELLTALE),
            TelltaleAssignment::Explicit { table } => table
                .range((index, 0)..=(index, level))
                .next_back()
                .map(|(_, t)| t),
        }
    }

    pub fn is_all_empty(&self) -> bool {
        matches!(self, TelltaleAssignment::AllEmpty)
    }
}

/// Outcome of a predicate decision, with a certificate either way: the
/// tell-tale when the predicate holds, or a strictly decreasing chain of
/// indices of length `k + 1` demonstrating how the negation unfolds.
///
/// `exact` is false when the tell-tale search was clipped by the size cap
/// somewhere in the recursion, in which case `holds = false` reflects the
/// capped search rather than a certainty. Positive verdicts are always
/// exact: a found certificate only relies on positive sub-verdicts.
#[derive(Clone, Debug)]
pub struct PsiVerdict {
    pub holds: bool,
    pub exact: bool,
    pub telltale: Option<BTreeSet<Element>>,
    pub chain: Option<Vec<u64>>,
}

/// Exhaustive decision procedure over a finite explicit collection.
struct PsiSolver<'a> {
    languages: &'a [Language],
    cap: usize,
    /// (holds, exact) per (0-based index, level).
    memo: HashMap<(usize, u32), (bool, bool)>,
    certs: HashMap<(usize, u32), BTreeSet<Element>>,
}

impl<'a> PsiSolver<'a> {
    fn new(languages: &'a [Language], cap: usize) -> Self {
        PsiSolver {
            languages,
            cap,
            memo: HashMap::new(),
            certs: HashMap::new(),
        }
    }

    fn members(&self, i: usize) -> &BTreeSet<Element> {
        match &self.languages[i] {
            Language::Finite { members } => members,
            Language::Cofinite { .. } => unreachable!("finite collections hold finite languages"),
        }
    }

    fn proper_subsets(&self, i: usize) -> Vec<usize> {
        (0..self.languages.len())
            .filter(|&j| is_proper_subset(&self.languages[j], &self.languages[i]))
            .collect()
    }

    /// Candidate tell-tales in cardinality-ascending, then lexicographic
    /// order on sorted elements.
    fn candidates(&self, i: usize) -> impl Iterator<Item = BTreeSet<Element>> + '_ {
        let elems: Vec<Element> = self.members(i).iter().copied().collect();
        let max = self.cap.min(elems.len());
        (0..=max).flat_map(move |size| {
            elems
                .clone()
                .into_iter()
                .combinations(size)
                .map(|c| c.into_iter().collect::<BTreeSet<Element>>())
        })
    }

    fn psi(&mut self, i: usize, k: u32) -> (bool, bool) {
        if k == 0 {
            return (false, true);
        }
        if let Some(&r) = self.memo.get(&(i, k)) {
            return r;
        }
        // Guard against re-entry; the subset relation is a strict order, so
        // recursion only descends and never revisits (i, k).
        let subs = self.proper_subsets(i);
        let search_exact = self.cap >= self.members(i).len();
        let mut all_rejections_exact = search_exact;
        let mut result = (false, false);
        let candidates: Vec<BTreeSet<Element>> = self.candidates(i).collect();
        'outer: for t in candidates {
            let mut rejection_exact = true;
            for &j in &subs {
                if t.iter().all(|x| self.languages[j].contains(*x)) {
                    let (sub_holds, sub_exact) = self.psi(j, k - 1);
                    if !sub_holds {
                        if !sub_exact {
                            rejection_exact = false;
                        }
                        if !rejection_exact {
                            all_rejections_exact = false;
                        }
                        continue 'outer;
                    }
                }
            }
            // Certificate found; certificates only rely on positive
            // sub-verdicts, which are always exact.
            self.certs.insert((i, k), t);
            result = (true, true);
            break;
        }
        if !result.0 {
            result = (false, all_rejections_exact);
        }
        self.memo.insert((i, k), result);
        result
    }

    /// Least index strictly below `i` in the subset order that fails
    /// `psi(., level)`.
    fn least_failing_subset(&mut self, i: usize, level: u32) -> Option<usize> {
        let subs = self.proper_subsets(i);
        subs.into_iter().find(|&j| !self.psi(j, level).0)
    }

    fn negation_chain(&mut self, i: usize, k: u32) -> Vec<u64> {
        let mut chain = vec![i as u64 + 1];
        let mut cur = i;
        for step in 1..=k {
            let need = k - step;
            match self.least_failing_subset(cur, need) {
                Some(j) => {
                    chain.push(j as u64 + 1);
                    cur = j;
                }
                None => break,
            }
        }
        chain
    }
}

fn finite_languages(c: &Collection) -> Result<&[Language]> {
    match &c.kind {
        CollectionKind::Finite { languages, .. } => Ok(languages),
        CollectionKind::Canonical { .. } => Err(Error::InvalidCollection(
            "brute-force predicate requires a finite explicit collection".into(),
        )),
    }
}

/// Decides `psi(L_i, k)` over a finite collection by exhaustive tell-tale
/// search up to the size cap. `max_telltale_size >= |universe|` guarantees
/// an exact verdict; a smaller cap may clip the search, which is reported
/// through `PsiVerdict::exact` rather than silently.
///
/// Note that with an unclipped cap every finite language certifies its own
/// base predicate (`T = L` fits in no proper subset), so capped searches
/// are what make a finite truncation behave like the unbounded family it
/// was cut from; see [`faithful_truncation_cap`].
pub fn psi_bruteforce(
    c: &Collection,
    index: u64,
    k: u32,
    max_telltale_size: usize,
) -> Result<PsiVerdict> {
    let languages = finite_languages(c)?;
    if index == 0 || index as usize > languages.len() {
        return Err(Error::IndexOutOfRange {
            index,
            size: languages.len(),
        });
    }
    let i = index as usize - 1;
    let mut solver = PsiSolver::new(languages, max_telltale_size);
    let (holds, exact) = solver.psi(i, k);
    if holds {
        Ok(PsiVerdict {
            holds: true,
            exact,
            telltale: solver.certs.get(&(i, k)).cloned(),
            chain: None,
        })
    } else {
        let chain = solver.negation_chain(i, k);
        Ok(PsiVerdict {
            holds: false,
            exact,
            telltale: None,
            chain: Some(chain),
        })
    }
}

/// The largest tell-tale cap under which the truncation of a canonical
/// family to a finite universe decides the predicate like the unbounded
/// family: any tell-tale leaving `k_max` universe elements uncovered can
/// still be trapped by a proper subset, exactly as an infinite tail would.
pub fn faithful_truncation_cap(universe_len: usize, k_max: u32) -> usize {
    universe_len.saturating_sub(k_max as usize)
}

/// Decides the predicate at every index and level up to `max_level` with a
/// single shared memo. `verdicts[i - 1][j - 1]` is `(holds, exact)` for
/// index `i` at level `j`.
pub fn psi_bruteforce_sweep(
    c: &Collection,
    max_level: u32,
    max_telltale_size: usize,
) -> Result<Vec<Vec<(bool, bool)>>> {
    let languages = finite_languages(c)?;
    let mut solver = PsiSolver::new(languages, max_telltale_size);
    let mut out = Vec::with_capacity(languages.len());
    for i in 0..languages.len() {
        let mut row = Vec::with_capacity(max_level as usize);
        for j in 1..=max_level {
            row.push(solver.psi(i, j));
        }
        out.push(row);
    }
    Ok(out)
}

/// Closed form of the predicate on the canonical family with parameter
/// `k_max`: `psi(Z \ F, j)` holds iff `|F| >= k_max - j + 1`. The unbounded
/// family fails the predicate at every finite level.
pub fn psi_canonical(k_max: Option<u32>, excluded: &BTreeSet<Element>, j: u32) -> bool {
    if j == 0 {
        return false;
    }
    match k_max {
        None => false,
        Some(m) => excluded.len() as u64 + j as u64 > m as u64,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionOutcome {
    pub holds: bool,
    pub failing_index: Option<u64>,
}

/// Whether every index of the collection satisfies `psi(., k)`.
pub fn check_k_angluin(c: &Collection, k: u32) -> Result<ConditionOutcome> {
    if k == 0 {
        return Err(Error::Config("list size k must be at least 1".into()));
    }
    match &c.kind {
        CollectionKind::Canonical { k_max } => {
            let holds = match k_max {
                None => false,
                Some(m) => k > *m,
            };
            Ok(ConditionOutcome {
                holds,
                // The full set of integers has the smallest exclusion set,
                // so it is always the least failing index.
                failing_index: if holds { None } else { Some(1) },
            })
        }
        CollectionKind::Finite {
            languages,
            universe,
        } => {
            let cap = universe.len();
            for i in 1..=languages.len() as u64 {
                let v = psi_bruteforce(c, i, k, cap)?;
                if !v.holds {
                    return Ok(ConditionOutcome {
                        holds: false,
                        failing_index: Some(i),
                    });
                }
            }
            Ok(ConditionOutcome {
                holds: true,
                failing_index: None,
            })
        }
    }
}

/// Builds the tell-tale assignment used by identification and
/// stratification. Requires the k-Angluin condition.
///
/// Canonical families take the all-empty assignment. Finite collections get
/// an explicit table: at level `k` every index receives the minimal
/// (cardinality, then lexicographic) certificate of `psi(., k)`; at each
/// lower level `j`, exactly the indices reachable as proper subsets
/// containing a level-`j+1` tell-tale receive a certificate of `psi(., j)`.
/// A final pass propagates each index's lowest-level set upward so levels
/// share one tell-tale per index.
pub fn assign_telltales(c: &Collection, k: u32) -> Result<TelltaleAssignment> {
    let outcome = check_k_angluin(c, k)?;
    if !outcome.holds {
        return Err(Error::ConditionNotSatisfied {
            k,
            failing_index: outcome.failing_index.unwrap_or(0),
        });
    }
    match &c.kind {
        CollectionKind::Canonical { .. } => Ok(TelltaleAssignment::AllEmpty),
        CollectionKind::Finite {
            languages,
            universe,
        } => {
            let cap = universe.len();
            let mut solver = PsiSolver::new(languages, cap);
            let n = languages.len();
            let mut table: BTreeMap<(u64, u32), BTreeSet<Element>> = BTreeMap::new();

            let mut current: Vec<usize> = (0..n).collect();
            for level in (1..=k).rev() {
                let mut next: BTreeSet<usize> = BTreeSet::new();
                for &i in &current {
                    let (holds, exact) = solver.psi(i, level);
                    debug_assert!(exact);
                    if !holds {
                        return Err(Error::ConditionNotSatisfied {
                            k: level,
                            failing_index: i as u64 + 1,
                        });
                    }
                    let t = solver
                        .certs
                        .get(&(i, level))
                        .cloned()
                        .unwrap_or_default();
                    for j in 0..n {
                        if is_proper_subset(&languages[j], &languages[i])
                            && t.iter().all(|x| languages[j].contains(*x))
                        {
                            next.insert(j);
                        }
                    }
                    table.insert((i as u64 + 1, level), t);
                }
                current = next.into_iter().collect();
                if current.is_empty() {
                    break;
                }
            }

            // One tell-tale per index: reuse the lowest assigned level.
            let indices: BTreeSet<u64> = table.keys().map(|&(i, _)| i).collect();
            for i in indices {
                let lowest = table
                    .range((i, 0)..=(i, k))
                    .next()
                    .map(|(&(_, lvl), t)| (lvl, t.clone()));
                if let Some((lvl, t)) = lowest {
                    if lvl < k {
                        let higher: Vec<u32> = table
                            .range((i, lvl + 1)..=(i, k))
                            .map(|(&(_, l), _)| l)
                            .collect();
                        for l in higher {
                            table.insert((i, l), t.clone());
                        }
                    }
                }
            }
            Ok(TelltaleAssignment::Explicit { table })
        }
    }
}
