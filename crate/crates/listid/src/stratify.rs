//! Greedy decomposition of a k-list identifiable collection into k strata,
//! each satisfying the base (single-guess) condition.
//!
//! The peel draws an edge from a language to every proper subset containing
//! its tell-tale, removes the sources-only layer as one stratum, and
//! repeats on the residue with the next-lower tell-tales. On canonical
//! families with all-empty tell-tales the layers are exactly the exclusion
//! sets grouped by size; the generic peeler cross-checks this closed form
//! on truncations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::angluin::{assign_telltales, check_k_angluin};
use crate::error::{Error, Result};
use crate::identify::{StratifiedIdentifier, StratumMembers, StratumSpec};
use crate::lang::language::is_proper_subset;
use crate::lang::{Collection, CollectionKind};

#[derive(Clone, Debug, Serialize)]
pub struct Stratification {
    pub k: u32,
    /// Exactly `k` strata, level `k` first. Some may be empty.
    pub strata: Vec<StratumSpec>,
}

impl Stratification {
    pub fn empty_levels(&self) -> Vec<u32> {
        self.strata
            .iter()
            .filter(|s| s.is_empty_stratum())
            .map(|s| s.level)
            .collect()
    }

    pub fn identifier(&self, collection: Arc<Collection>) -> StratifiedIdentifier {
        StratifiedIdentifier::new(collection, self.strata.clone())
    }

    /// Which stratum (position in `strata`) an index belongs to, if any.
    pub fn stratum_of(&self, c: &Collection, index: u64) -> Result<Option<usize>> {
        for (pos, s) in self.strata.iter().enumerate() {
            match &s.members {
                StratumMembers::Explicit { indices } => {
                    if indices.contains(&index) {
                        return Ok(Some(pos));
                    }
                }
                StratumMembers::ExclusionSize { size } => {
                    if let crate::lang::Language::Cofinite { excluded } = c.language_at(index)? {
                        if excluded.len() as u32 == *size {
                            return Ok(Some(pos));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Directed edges (i, j) over the index set: `L_j ⊊ L_i` and the level
/// tell-tale of `i` is contained in `L_j`.
pub fn peel_relation(c: &Collection, indices: &[u64], level: u32) -> Result<Vec<(u64, u64)>> {
    let mut edges = Vec::new();
    for &a in indices {
        let la = c.language_at(a)?;
        let ta = c.telltales.lookup(a, level).cloned().unwrap_or_default();
        for &b in indices {
            if a == b {
                continue;
            }
            let lb = c.language_at(b)?;
            if is_proper_subset(&lb, &la) && ta.iter().all(|x| lb.contains(*x)) {
                edges.push((a, b));
            }
        }
    }
    Ok(edges)
}

/// Peels the collection into exactly `k` strata. Requires the k-Angluin
/// condition; canonical families additionally need a finite `k_max` with
/// `k >= k_max + 1`, where the strata are the exclusion-size classes in
/// closed form.
pub fn stratify(c: &Collection, k: u32) -> Result<Stratification> {
    let outcome = check_k_angluin(c, k)?;
    if !outcome.holds {
        return Err(Error::ConditionNotSatisfied {
            k,
            failing_index: outcome.failing_index.unwrap_or(0),
        });
    }
    match &c.kind {
        CollectionKind::Canonical { k_max } => {
            let m = k_max.expect("the unbounded family never satisfies the condition");
            let mut strata = Vec::new();
            for level in (1..=k).rev() {
                let s = k - level;
                if s <= m {
                    strata.push(StratumSpec {
                        level,
                        members: StratumMembers::ExclusionSize { size: s },
                        telltales: BTreeMap::new(),
                    });
                } else {
                    strata.push(StratumSpec {
                        level,
                        members: StratumMembers::Explicit {
                            indices: BTreeSet::new(),
                        },
                        telltales: BTreeMap::new(),
                    });
                }
            }
            Ok(Stratification { k, strata })
        }
        CollectionKind::Finite { languages, .. } => {
            let telltales = assign_telltales(c, k)?;
            let working = c.clone().with_telltales(telltales);
            let mut remaining: Vec<u64> = (1..=languages.len() as u64).collect();
            let mut strata = Vec::new();
            for level in (1..=k).rev() {
                let edges = peel_relation(&working, &remaining, level)?;
                let with_incoming: BTreeSet<u64> = edges.iter().map(|&(_, b)| b).collect();
                let layer: BTreeSet<u64> = remaining
                    .iter()
                    .copied()
                    .filter(|j| !with_incoming.contains(j))
                    .collect();
                if level == 1 && !edges.is_empty() {
                    return Err(Error::ResidueNonEmpty(
                        with_incoming.into_iter().collect(),
                    ));
                }
                let mut layer_telltales = BTreeMap::new();
                for &i in &layer {
                    if let Some(t) = working.telltales.lookup(i, level) {
                        if !t.is_empty() {
                            layer_telltales.insert(i, t.clone());
                        }
                    }
                }
                strata.push(StratumSpec {
                    level,
                    members: StratumMembers::Explicit { indices: layer },
                    telltales: layer_telltales,
                });
                remaining.retain(|j| with_incoming.contains(j));
            }
            if !remaining.is_empty() {
                return Err(Error::ResidueNonEmpty(remaining));
            }
            Ok(Stratification { k, strata })
        }
    }
}

/// Whether the base predicate holds inside the stratum: no member language
/// properly contains another member while holding its tell-tale. Canonical
/// size-classes are incomparable by construction and are additionally
/// checked on a truncation.
pub fn verify_stratum_identifiable(c: &Collection, stratum: &StratumSpec) -> Result<bool> {
    match &stratum.members {
        StratumMembers::Explicit { indices } => {
            let idx: Vec<u64> = indices.iter().copied().collect();
            for &a in &idx {
                let la = c.language_at(a)?;
                let ta = stratum.telltales.get(&a).cloned().unwrap_or_default();
                for &b in &idx {
                    if a == b {
                        continue;
                    }
                    let lb = c.language_at(b)?;
                    if is_proper_subset(&lb, &la) && ta.iter().all(|x| lb.contains(*x)) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        StratumMembers::ExclusionSize { size } => {
            // Same-size exclusion sets are never strictly nested; verify on
            // a truncation window anyway.
            let k_max = c
                .canonical_k_max()
                .ok_or_else(|| {
                    Error::InvalidCollection(
                        "exclusion-size strata require a canonical family".into(),
                    )
                })?
                .unwrap_or(u32::MAX);
            if *size > k_max {
                return Ok(true);
            }
            let sets: Vec<BTreeSet<crate::lang::Element>> =
                crate::lang::collection::canonical_exclusions(Some(k_max.min(6)))
                    .take(500)
                    .filter(|f| f.len() as u32 == *size)
                    .collect();
            for a in &sets {
                for b in &sets {
                    if a != b && a.is_subset(b) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}
