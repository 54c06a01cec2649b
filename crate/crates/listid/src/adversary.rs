//! Adversarial enumeration against a black-box list identifier.
//!
//! The adversary keeps a chain of languages, each a proper subset of the
//! one above and each failing the predicate at the level its chain position
//! demands. It enumerates the deepest chain language until the identifier
//! names it, then either descends to a consistent proper subset or jumps
//! back to the shallowest chain language currently missing from the
//! identifier's list. Every jump-back records a witness: a time step at
//! which that language was not identified. A run that ends with the inner
//! loop still feeding one language without ever being named records one
//! starvation witness per step of that final segment, since each of those
//! steps is a missed time step for the language being enumerated.
//!
//! The recursion is flattened to a loop with a step budget, which is the
//! only normal exit besides the chain overrunning `k + 1` against a list
//! wider than `k` (the termination guard of the strategy).

use std::collections::BTreeSet;

use serde::Serialize;

use crate::angluin::{psi_bruteforce, psi_canonical, check_k_angluin};
use crate::error::{Error, Result};
use crate::identify::Identifier;
use crate::lang::language::{is_proper_subset, Element, Language};
use crate::lang::spiral;
use crate::lang::{Collection, CollectionKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// The identifier's list missed a chain language at a jump-back.
    JumpBack,
    /// A step of the final never-broken enumeration segment.
    Starvation,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessEvent {
    pub t: u64,
    pub level: u32,
    pub index: u64,
    pub kind: WitnessKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvocationRecord {
    pub t: u64,
    pub chain: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    /// The budget ran out; `starved_on` names the language the inner loop
    /// was still enumerating if it never broke in its final segment.
    BudgetExhausted {
        starved_on: Option<u64>,
    },
    /// The strategy would need a failing predicate below level zero, which
    /// happens only against identifiers wider than the adversary's level.
    ChainCapReached,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryRun {
    pub emitted: Vec<Element>,
    pub invocations: Vec<InvocationRecord>,
    pub witness_log: Vec<WitnessEvent>,
    pub invariant_checks: u64,
    pub termination: Termination,
    pub budget: u64,
    pub k: u32,
}

impl AdversaryRun {
    pub fn witness_count(&self) -> usize {
        self.witness_log.len()
    }
}

/// Whether `psi(L_index, level)` fails, decided by the closed form on
/// canonical families and by the exhaustive oracle on finite ones.
fn psi_fails(c: &Collection, index: u64, level: u32) -> Result<bool> {
    if level == 0 {
        return Ok(true);
    }
    match &c.kind {
        CollectionKind::Canonical { k_max } => {
            let excluded = match c.language_at(index)? {
                Language::Cofinite { excluded } => excluded,
                Language::Finite { .. } => unreachable!(),
            };
            Ok(!psi_canonical(*k_max, &excluded, level))
        }
        CollectionKind::Finite { universe, .. } => {
            let v = psi_bruteforce(c, index, level, universe.len())?;
            Ok(!v.holds)
        }
    }
}

/// Least index whose language fails `psi(., k)`. Errors when the
/// k-Angluin condition holds.
pub fn find_unfoolable_root(c: &Collection, k: u32) -> Result<u64> {
    let outcome = check_k_angluin(c, k)?;
    if outcome.holds {
        return Err(Error::ConditionSatisfied { k });
    }
    Ok(outcome.failing_index.expect("non-holding outcome names an index"))
}

/// Least index `i` with `L_i ⊊ L_parent`, `S ⊆ L_i` and `psi(L_i, level)`
/// failing. On canonical families the answer is the parent exclusion set
/// extended by the first spiral element outside `S` and the parent
/// exclusion; the index order refines strict inclusion, so this extension
/// is the least such index.
pub fn find_descendant(
    c: &Collection,
    parent: u64,
    s: &BTreeSet<Element>,
    level_needed: u32,
) -> Result<u64> {
    match &c.kind {
        CollectionKind::Canonical { k_max } => {
            let parent_excluded = match c.language_at(parent)? {
                Language::Cofinite { excluded } => excluded,
                Language::Finite { .. } => unreachable!(),
            };
            if let Some(km) = k_max {
                if parent_excluded.len() as u64 >= *km as u64 {
                    return Err(Error::NoDescendant { parent });
                }
            }
            let gap = spiral::values()
                .map(Element)
                .find(|x| !s.contains(x) && !parent_excluded.contains(x))
                .unwrap();
            let mut f = parent_excluded;
            f.insert(gap);
            let idx = c.index_of_exclusion(&f)?;
            if !psi_fails(c, idx, level_needed)? {
                return Err(Error::NoDescendant { parent });
            }
            Ok(idx)
        }
        CollectionKind::Finite { languages, .. } => {
            let parent_lang = c.language_at(parent)?;
            for j in 1..=languages.len() as u64 {
                let lang = &languages[j as usize - 1];
                if is_proper_subset(lang, &parent_lang)
                    && s.iter().all(|x| lang.contains(*x))
                    && psi_fails(c, j, level_needed)?
                {
                    return Ok(j);
                }
            }
            Err(Error::NoDescendant { parent })
        }
    }
}

struct ChainState<'a> {
    c: &'a Collection,
    k: u32,
    chain: Vec<u64>,
    chain_languages: Vec<Language>,
    seen: BTreeSet<Element>,
    /// Per-chain-level cursor into the spiral scan for fresh elements.
    cursors: Vec<u64>,
}

impl<'a> ChainState<'a> {
    fn check_invariants(&self, emitted_len: usize) -> Result<()> {
        let ell = self.chain.len();
        if ell == 0 {
            return Err(Error::InvariantViolation("empty chain".into()));
        }
        if ell as u32 > self.k + 1 {
            return Err(Error::InvariantViolation(format!(
                "chain length {ell} exceeds k+1 = {} at t = {emitted_len}",
                self.k + 1
            )));
        }
        for w in self.chain_languages.windows(2) {
            if !is_proper_subset(&w[1], &w[0]) {
                return Err(Error::InvariantViolation(
                    "chain is not strictly decreasing under proper inclusion".into(),
                ));
            }
        }
        for (j, (idx, lang)) in self.chain.iter().zip(&self.chain_languages).enumerate() {
            let level = self.k - j as u32;
            if !psi_fails(self.c, *idx, level)? {
                return Err(Error::InvariantViolation(format!(
                    "chain entry {idx} at position {} satisfies the level-{level} predicate",
                    j + 1
                )));
            }
            if let Some(x) = self.seen.iter().find(|x| !lang.contains(**x)) {
                return Err(Error::InvariantViolation(format!(
                    "emitted element {x} escapes chain language at index {idx}"
                )));
            }
        }
        Ok(())
    }

    /// First element of the deepest language's canonical enumeration that
    /// has not yet been emitted. The cursor only moves forward: everything
    /// before it was either emitted or excluded, and stays so.
    fn next_fresh(&mut self) -> Element {
        let lang = self.chain_languages.last().unwrap().clone();
        let cursor = self.cursors.last_mut().unwrap();
        loop {
            *cursor += 1;
            let x = Element(spiral::value_at(*cursor));
            if lang.contains(x) && !self.seen.contains(&x) {
                return x;
            }
        }
    }
}

/// Runs the adversarial strategy against `identifier` for exactly
/// `step_budget` emitted elements, checking the chain invariants at every
/// invocation boundary.
pub fn adv_enum(
    c: &Collection,
    k: u32,
    identifier: &dyn Identifier,
    step_budget: u64,
) -> Result<AdversaryRun> {
    let root = find_unfoolable_root(c, k)?;
    let mut state = ChainState {
        c,
        k,
        chain: vec![root],
        chain_languages: vec![c.language_at(root)?],
        seen: BTreeSet::new(),
        cursors: vec![0],
    };
    let mut emitted: Vec<Element> = Vec::new();
    let mut invocations = Vec::new();
    let mut witness_log = Vec::new();
    let mut invariant_checks = 0u64;

    let termination = 'outer: loop {
        state.check_invariants(emitted.len())?;
        invariant_checks += 1;
        invocations.push(InvocationRecord {
            t: emitted.len() as u64,
            chain: state.chain.clone(),
        });

        let ell = state.chain.len();
        let deepest = *state.chain.last().unwrap();
        let mut segment_steps: Vec<u64> = Vec::new();
        let guesses = loop {
            if emitted.len() as u64 >= step_budget {
                // Budget ran out mid-segment: if the identifier never named
                // the language in this segment, classify it as starvation
                // and count each missed step as a witness.
                let starved = !segment_steps.is_empty();
                if starved {
                    for &t in &segment_steps {
                        witness_log.push(WitnessEvent {
                            t,
                            level: ell as u32,
                            index: deepest,
                            kind: WitnessKind::Starvation,
                        });
                    }
                }
                break 'outer Termination::BudgetExhausted {
                    starved_on: if starved { Some(deepest) } else { None },
                };
            }
            let x = state.next_fresh();
            emitted.push(x);
            state.seen.insert(x);
            let mu = identifier.guess(&emitted);
            if c.identifies(&mu.indices, deepest)? {
                break mu;
            }
            segment_steps.push(emitted.len() as u64);
        };

        let missing = {
            let mut m = None;
            for (j, idx) in state.chain.iter().enumerate() {
                if !c.identifies(&guesses.indices, *idx)? {
                    m = Some(j);
                    break;
                }
            }
            m
        };
        match missing {
            None => {
                // Every chain language is currently named: descend.
                if (ell as u32) > k {
                    break Termination::ChainCapReached;
                }
                let level_needed = k - ell as u32;
                let next = find_descendant(c, deepest, &state.seen, level_needed)?;
                state.chain.push(next);
                state.chain_languages.push(c.language_at(next)?);
                state.cursors.push(0);
            }
            Some(j) => {
                witness_log.push(WitnessEvent {
                    t: emitted.len() as u64,
                    level: j as u32 + 1,
                    index: state.chain[j],
                    kind: WitnessKind::JumpBack,
                });
                state.chain.truncate(j + 1);
                state.chain_languages.truncate(j + 1);
                state.cursors.truncate(j + 1);
            }
        }
    };

    Ok(AdversaryRun {
        emitted,
        invocations,
        witness_log,
        invariant_checks,
        termination,
        budget: step_budget,
        k,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    /// Empirical liminf of the chain length over the suffix window.
    pub ell_star: Option<u32>,
    /// The stable chain prefix index at depth `ell_star`.
    pub index: Option<u64>,
    /// Invocation range (0-based, half-open) the liminf was read from.
    pub window: (usize, usize),
    /// Last invocation before the window whose chain was shorter than
    /// `ell_star`, if any.
    pub settle_invocation: Option<usize>,
}

/// Reads the language the adversary is en route to enumerating fully: the
/// least chain length recurring over the recorded suffix and the stable
/// prefix index at that depth. A finite window can only approximate the
/// true liminf; the window is reported alongside.
pub fn limit_language(run: &AdversaryRun) -> LimitReport {
    let n = run.invocations.len();
    if n == 0 {
        return LimitReport {
            ell_star: None,
            index: None,
            window: (0, 0),
            settle_invocation: None,
        };
    }
    let start = n / 2;
    let window = &run.invocations[start..];
    let ell = window.iter().map(|r| r.chain.len()).min().unwrap() as u32;
    let prefix: Vec<u64> = window
        .iter()
        .find(|r| r.chain.len() == ell as usize)
        .map(|r| r.chain.clone())
        .unwrap();
    debug_assert!(window
        .iter()
        .all(|r| r.chain[..ell as usize] == prefix[..ell as usize]));
    let settle = run.invocations[..start]
        .iter()
        .rposition(|r| r.chain.len() < ell as usize);
    LimitReport {
        ell_star: Some(ell),
        index: Some(prefix[ell as usize - 1]),
        window: (start, n),
        settle_invocation: settle,
    }
}
