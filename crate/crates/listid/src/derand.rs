//! Probabilistic identifiers, their computation trees, and the exact
//! derandomization machinery.
//!
//! A probabilistic identifier reads its randomness from an explicit bit
//! sequence, so its behaviour on a fixed input enumeration is a finite
//! binary tree: node `n` at level `i` carries the list guessed after seeing
//! `i - 1` inputs and the `i - 1` bits on the root path. All probabilities
//! over the random bits are dyadic rationals with denominator `2^(d-1)` and
//! are computed exactly; the level-wise disjoint-sum identity is an
//! equality of rationals, not an approximation.
//!
//! The derandomizer collapses all level `t + 1` labels through the
//! first-occurrence map and keeps the k most frequent indices. Whenever
//! more than a `k / (k + 1)` fraction of the level identifies the target,
//! a counting argument forces the target into the top k.


use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::exec;
use crate::identify::{topk_multiset, GuessList, Identifier};
use crate::lang::language::Element;
use crate::lang::rng::mix64;
use crate::lang::{Collection, Enumeration, ValidDistribution};

pub const MAX_TREE_DEPTH: u32 = 20;

pub type DyadicProb = Ratio<u128>;

/// A list identifier that may consult one fair bit per input element.
pub trait ProbIdentifier: Send + Sync {
    fn guess(&self, inputs: &[Element], bits: &[bool]) -> GuessList;
    fn arity(&self) -> u32;
}

/// Wraps a deterministic identifier, ignoring the bits.
pub struct DerandomizableProb<I: Identifier> {
    pub inner: I,
}

impl<I: Identifier> ProbIdentifier for DerandomizableProb<I> {
    fn guess(&self, inputs: &[Element], _bits: &[bool]) -> GuessList {
        self.inner.guess(inputs)
    }
    fn arity(&self) -> u32 {
        self.inner.arity()
    }
}

fn bits_value(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Behaves like `good` with dyadic probability `num / 2^log_den`, decided
/// by thresholding the first `log_den` bits; otherwise it guesses a
/// k-subset of the decoys selected by the full bit prefix. Too few bits to
/// decide counts as good.
pub struct CoinMixture {
    pub num: u64,
    pub log_den: u32,
    pub good: Box<dyn Identifier>,
    pub decoys: Vec<u64>,
}

impl ProbIdentifier for CoinMixture {
    fn guess(&self, inputs: &[Element], bits: &[bool]) -> GuessList {
        let bad = bits.len() >= self.log_den as usize
            && bits_value(&bits[..self.log_den as usize]) >= self.num;
        if !bad {
            return self.good.guess(inputs);
        }
        let omit = (bits_value(bits) % self.decoys.len() as u64) as usize;
        GuessList::from_indices(
            self.decoys
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != omit)
                .map(|(_, &d)| d)
                .collect(),
        )
    }
    fn arity(&self) -> u32 {
        self.good.arity().max(self.decoys.len() as u32 - 1)
    }
}

/// Always guesses all but one of its `k + 1` decoys, rotating the omitted
/// one with the bit prefix. Realises success fraction about `k / (k + 1)`
/// for each decoy, the exact threshold the derandomizer cannot beat.
pub struct UniformSplitter {
    pub decoys: Vec<u64>,
}

impl ProbIdentifier for UniformSplitter {
    fn guess(&self, _inputs: &[Element], bits: &[bool]) -> GuessList {
        let omit = (bits_value(bits) % self.decoys.len() as u64) as usize;
        GuessList::from_indices(
            self.decoys
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != omit)
                .map(|(_, &d)| d)
                .collect(),
        )
    }
    fn arity(&self) -> u32 {
        self.decoys.len() as u32 - 1
    }
}

/// Pseudo-random labels derived from a stable hash of the node's inputs
/// and bit prefix. Used to exercise the exact counting identities on
/// arbitrary trees.
pub struct HashProb {
    pub seed: u64,
    pub max_index: u64,
    pub arity: u32,
}

impl ProbIdentifier for HashProb {
    fn guess(&self, inputs: &[Element], bits: &[bool]) -> GuessList {
        let mut h = mix64(self.seed);
        for e in inputs {
            h = mix64(h ^ e.0 as u64);
        }
        h = mix64(h ^ bits_value(bits));
        let mut out = Vec::with_capacity(self.arity as usize);
        for i in 0..self.arity {
            h = mix64(h.wrapping_add(i as u64 + 1));
            out.push(1 + h % self.max_index);
        }
        GuessList::from_indices(out)
    }
    fn arity(&self) -> u32 {
        self.arity
    }
}

/// Finite-depth computation tree. Nodes are numbered breadth-first from 1;
/// node `n` sits at level `floor(log2 n) + 1`, its children are `2n` and
/// `2n + 1` over edges labelled 0 and 1. Labels exist for levels 2 and up.
pub struct ComputationTree {
    pub depth: u32,
    pub inputs: Vec<Element>,
    labels: Vec<Vec<u64>>,
}

pub fn node_level(n: u64) -> u32 {
    64 - n.leading_zeros()
}

fn node_bits(n: u64) -> Vec<bool> {
    let level = node_level(n);
    (0..level - 1)
        .rev()
        .map(|i| (n >> i) & 1 == 1)
        .collect()
}

impl ComputationTree {
    pub fn node_count(&self) -> u64 {
        (1u64 << self.depth) - 1
    }

    pub fn label(&self, n: u64) -> &[u64] {
        &self.labels[n as usize]
    }

    fn identifies(&self, c: &Collection, n: u64, target_first: u64) -> bool {
        self.labels[n as usize]
            .iter()
            .any(|&g| c.first_index(g).map(|f| f == target_first).unwrap_or(false))
    }
}

fn check_tree_bounds(depth: u32, prefix_len: usize) -> Result<()> {
    if depth > MAX_TREE_DEPTH {
        return Err(Error::DepthTooLarge {
            depth,
            max: MAX_TREE_DEPTH,
        });
    }
    if depth >= 1 && prefix_len + 1 < depth as usize {
        return Err(Error::PrefixTooShort {
            got: prefix_len,
            need: depth as usize - 1,
        });
    }
    Ok(())
}

fn build_tree_impl(
    a: &dyn ProbIdentifier,
    sigma_prefix: &[Element],
    depth: u32,
    parallel: bool,
) -> Result<ComputationTree> {
    check_tree_bounds(depth, sigma_prefix.len())?;
    let total = (1usize << depth) - 1;
    let compute = |i: usize| -> Vec<u64> {
        let n = i as u64 + 2; // nodes 2..=total
        let level = node_level(n) as usize;
        let bits = node_bits(n);
        a.guess(&sigma_prefix[..level - 1], &bits).indices
    };
    let count = total.saturating_sub(1);
    let mut labels = vec![Vec::new(), Vec::new()]; // node 0 unused, root unlabelled
    labels.extend(if parallel {
        exec::map_indexed(count, compute)
    } else {
        exec::map_indexed_seq(count, compute)
    });
    Ok(ComputationTree {
        depth,
        inputs: sigma_prefix[..depth as usize - 1].to_vec(),
        labels,
    })
}

/// Materialises every label up to `depth` (data-parallel).
pub fn build_tree(
    a: &dyn ProbIdentifier,
    sigma_prefix: &[Element],
    depth: u32,
) -> Result<ComputationTree> {
    build_tree_impl(a, sigma_prefix, depth, true)
}

/// Sequential twin of [`build_tree`].
pub fn build_tree_seq(
    a: &dyn ProbIdentifier,
    sigma_prefix: &[Element],
    depth: u32,
) -> Result<ComputationTree> {
    build_tree_impl(a, sigma_prefix, depth, false)
}

/// Fraction of nodes at `level` whose label identifies the target, as an
/// exact rational with denominator `2^(level-1)`.
pub fn level_fraction_identifying(
    tree: &ComputationTree,
    c: &Collection,
    z: u64,
    level: u32,
) -> Result<DyadicProb> {
    assert!(level >= 2 && level <= tree.depth);
    let fz = c.first_index(z)?;
    let first = 1u64 << (level - 1);
    let count = (first..2 * first)
        .filter(|&n| tree.identifies(c, n, fz))
        .count() as u128;
    Ok(Ratio::new(count, 1u128 << (level - 1)))
}

/// Exact probability that a random path appears to converge to the target
/// at node `n`, looking down to level `d`: the path must reach `n`, the
/// label just above `n` must miss the target (or `n` sits at level 2), and
/// every label from `n` to level `d` must identify it.
pub fn prob_converged_at_node(
    tree: &ComputationTree,
    c: &Collection,
    z: u64,
    n: u64,
    d: u32,
) -> Result<DyadicProb> {
    let dn = node_level(n);
    assert!(dn >= 2 && dn <= d && d <= tree.depth);
    let fz = c.first_index(z)?;
    if dn > 2 && tree.identifies(c, n / 2, fz) {
        return Ok(Ratio::new(0, 1));
    }
    fn count_paths(tree: &ComputationTree, c: &Collection, fz: u64, n: u64, d: u32) -> u64 {
        if !tree.identifies(c, n, fz) {
            return 0;
        }
        if node_level(n) == d {
            return 1;
        }
        count_paths(tree, c, fz, 2 * n, d) + count_paths(tree, c, fz, 2 * n + 1, d)
    }
    let count = count_paths(tree, c, fz, n, d) as u128;
    Ok(Ratio::new(count, 1u128 << (d - 1)))
}

/// Left side of the disjoint-sum identity: the total apparent-convergence
/// probability over all nodes at levels up to `d`.
pub fn sum_converged_up_to(
    tree: &ComputationTree,
    c: &Collection,
    z: u64,
    d: u32,
) -> Result<DyadicProb> {
    let mut total: DyadicProb = Ratio::new(0, 1);
    for n in 2..(1u64 << d) {
        total += prob_converged_at_node(tree, c, z, n, d)?;
    }
    Ok(total)
}

/// Level-wise top-k derandomization: evaluates the identifier at all
/// `2^t` bit prefixes, collapses indices through their first occurrence,
/// and keeps the k most frequent.
pub fn derandomize(
    a: &dyn ProbIdentifier,
    c: &Collection,
    k: u32,
    x_prefix: &[Element],
    t: u32,
) -> Result<GuessList> {
    if t + 1 > MAX_TREE_DEPTH {
        return Err(Error::DepthTooLarge {
            depth: t + 1,
            max: MAX_TREE_DEPTH,
        });
    }
    if x_prefix.len() < t as usize {
        return Err(Error::PrefixTooShort {
            got: x_prefix.len(),
            need: t as usize,
        });
    }
    let lists = exec::map_indexed(1usize << t, |v| {
        let bits: Vec<bool> = (0..t).rev().map(|i| (v >> i) & 1 == 1).collect();
        a.guess(&x_prefix[..t as usize], &bits).indices
    });
    let mut multiset = Vec::new();
    for list in lists {
        for g in list {
            multiset.push(c.first_index(g)?);
        }
    }
    Ok(topk_multiset(&multiset, k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractResult {
    pub bits: Vec<bool>,
    /// Number of stream elements consumed (prefix length).
    pub consumed: usize,
    /// False when the stream ended before `n_bits` bits were extracted.
    pub complete: bool,
}

/// Extracts fair bits from an i.i.d. stream: `a` is the first element, `b`
/// the first differing one; thereafter consecutive disjoint pairs of the
/// even-position substream emit 1 on `(a, b)`, 0 on `(b, a)`, and are
/// skipped otherwise. Odd positions stay untouched for a simulated
/// identifier to consume, which keeps the bits independent of that input.
pub fn extract_bits(stream: &[Element], n_bits: usize) -> ExtractResult {
    let mut bits = Vec::with_capacity(n_bits);
    if stream.is_empty() || n_bits == 0 {
        return ExtractResult {
            bits,
            consumed: 0,
            complete: n_bits == 0,
        };
    }
    let a = stream[0];
    let j1 = match stream.iter().position(|&x| x != a) {
        Some(p) => p as u64 + 1,
        None => {
            return ExtractResult {
                bits,
                consumed: stream.len(),
                complete: false,
            }
        }
    };
    let b = stream[j1 as usize - 1];
    // Even-position substream: y_i = x_{2i} (1-based), scanned in disjoint
    // pairs (y_m, y_{m+1}) from m = j1 + 1.
    let y = |i: u64| -> Option<Element> {
        let idx = 2 * i; // 1-based position in the raw stream
        stream.get(idx as usize - 1).copied()
    };
    let mut m = j1 + 1;
    let mut consumed = stream.len().min((2 * j1) as usize);
    while bits.len() < n_bits {
        let (p, q) = match (y(m), y(m + 1)) {
            (Some(p), Some(q)) => (p, q),
            _ => {
                return ExtractResult {
                    bits,
                    consumed: stream.len(),
                    complete: false,
                }
            }
        };
        consumed = (2 * (m + 1)) as usize;
        if p == a && q == b {
            bits.push(true);
        } else if p == b && q == a {
            bits.push(false);
        }
        m += 2;
    }
    ExtractResult {
        bits,
        consumed,
        complete: true,
    }
}

/// Samples a stream from the distribution until `n_bits` bits come out.
pub fn extract_bits_from_distribution(
    dist: &ValidDistribution,
    rng: &mut crate::lang::RngState,
    n_bits: usize,
    max_elements: usize,
) -> ExtractResult {
    let mut stream: Vec<Element> = Vec::new();
    loop {
        let chunk = 4 * n_bits.max(64);
        for _ in 0..chunk {
            stream.push(dist.sample_one(rng));
        }
        let r = extract_bits(&stream, n_bits);
        if r.complete || stream.len() >= max_elements {
            return r;
        }
    }
}

/// The geometric-weights distribution induced by an enumeration.
pub fn reduce_enumeration_to_distribution(sigma: Enumeration) -> ValidDistribution {
    ValidDistribution::EnumerationGeometric { enumeration: sigma }
}
