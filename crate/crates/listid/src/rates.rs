//! Monte Carlo machinery for statistical identification rates.
//!
//! An error curve records, per time step, how often the identifier's list
//! missed the target over independent trials of i.i.d. draws, with exact
//! binomial confidence intervals. Trials use per-index RNG substreams and
//! are aggregated in trial order, so curves are bit-identical across
//! thread counts.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::identify::{topk_multiset, GuessList, Identifier};
use crate::lang::language::Element;
use crate::lang::rng::mix64;
use crate::lang::{Collection, RngState, ValidDistribution};
use crate::stats::{clopper_pearson, least_squares};

#[derive(Clone)]
pub struct RateExperiment {
    pub collection: Arc<Collection>,
    pub k: u32,
    pub target: u64,
    pub distribution: ValidDistribution,
    pub identifier: Arc<dyn Identifier>,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub t: u64,
    pub failures: u64,
    pub e_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorCurve {
    pub trials: u64,
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    pub fn point(&self, t: u64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.t == t)
    }

    fn from_failures(failures: Vec<u64>, trials: u64) -> Self {
        let points = failures
            .into_iter()
            .enumerate()
            .map(|(i, f)| {
                let (ci_lo, ci_hi) = clopper_pearson(f, trials, 0.05);
                CurvePoint {
                    t: i as u64 + 1,
                    failures: f,
                    e_hat: f as f64 / trials as f64,
                    ci_lo,
                    ci_hi,
                }
            })
            .collect();
        ErrorCurve { trials, points }
    }
}

fn validate_experiment(exp: &RateExperiment) -> Result<u64> {
    if exp.trials == 0 || exp.horizon == 0 {
        return Err(Error::Config("trials and horizon must be positive".into()));
    }
    exp.distribution.validate()?;
    let target_lang = exp.collection.language_at(exp.target)?;
    if exp.distribution.target_language() != target_lang {
        return Err(Error::InvalidDistribution(
            "distribution support differs from the target language".into(),
        ));
    }
    exp.collection.first_index(exp.target)
}

/// One trial: a fresh substream draws a single length-`horizon` stream and
/// every prefix of it is scored, so per-`t` estimates share draws within a
/// trial but are independent across trials.
fn trial_misses(exp: &RateExperiment, target_first: u64, trial: u64) -> Vec<bool> {
    let mut rng = RngState::substream(exp.seed, trial);
    let stream = exp.distribution.sample(&mut rng, exp.horizon);
    let mut misses = Vec::with_capacity(exp.horizon as usize);
    for t in 1..=exp.horizon as usize {
        let g = exp.identifier.guess(&stream[..t]);
        let hit = g.indices.iter().any(|&i| {
            exp.collection
                .first_index(i)
                .map(|f| f == target_first)
                .unwrap_or(false)
        });
        misses.push(!hit);
    }
    misses
}

fn accumulate(per_trial: Vec<Vec<bool>>, horizon: u64, trials: u64) -> ErrorCurve {
    let mut failures = vec![0u64; horizon as usize];
    for misses in per_trial {
        for (i, m) in misses.into_iter().enumerate() {
            failures[i] += m as u64;
        }
    }
    ErrorCurve::from_failures(failures, trials)
}

pub fn run_rate_experiment(exp: &RateExperiment) -> Result<ErrorCurve> {
    let target_first = validate_experiment(exp)?;
    let per_trial = exec::map_indexed(exp.trials as usize, |r| {
        trial_misses(exp, target_first, r as u64)
    });
    Ok(accumulate(per_trial, exp.horizon, exp.trials))
}

/// Sequential twin of [`run_rate_experiment`].
pub fn run_rate_experiment_seq(exp: &RateExperiment) -> Result<ErrorCurve> {
    let target_first = validate_experiment(exp)?;
    let per_trial = exec::map_indexed_seq(exp.trials as usize, |r| {
        trial_misses(exp, target_first, r as u64)
    });
    Ok(accumulate(per_trial, exp.horizon, exp.trials))
}

#[derive(Clone, Debug, Serialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Time steps whose zero frequency was clamped to the CI upper bound.
    pub clamped_ts: Vec<u64>,
    pub window: (u64, u64),
}

/// Least-squares fit of `ln e_hat(t)` against `t` over the window. Zero
/// frequencies are clamped to their CI upper bound and flagged; at least
/// three genuinely positive points are required.
pub fn fit_exponential(curve: &ErrorCurve, window: (u64, u64)) -> Result<FitSummary> {
    let pts: Vec<&CurvePoint> = curve
        .points
        .iter()
        .filter(|p| p.t >= window.0 && p.t <= window.1)
        .collect();
    let positive = pts.iter().filter(|p| p.failures > 0).count();
    if positive < 3 {
        return Err(Error::InsufficientPositivePoints(positive));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut clamped = Vec::new();
    for p in pts {
        let value = if p.failures > 0 {
            p.e_hat
        } else {
            clamped.push(p.t);
            p.ci_hi
        };
        xs.push(p.t as f64);
        ys.push(value.ln());
    }
    let fit = least_squares(&xs, &ys)?;
    Ok(FitSummary {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        clamped_ts: clamped,
        window,
    })
}

/// Batch size `ceil(ln t)` (at least 1) used by the boosting wrapper.
pub fn boost_batch_size(t: u64) -> u64 {
    ((t as f64).ln().ceil() as u64).max(1)
}

/// Number of full batches at sample length `t`.
pub fn boost_batch_count(t: u64) -> u64 {
    (t / boost_batch_size(t)).max(1)
}

/// Runs the base identifier on `floor(t / ceil(ln t))` disjoint batches of
/// size `ceil(ln t)` (the leftover tail is discarded), collapses all
/// guessed indices through their first occurrence, and keeps the top k.
pub fn boosted_identify(
    base: &dyn Identifier,
    c: &Collection,
    k: u32,
    sample: &[Element],
) -> Result<GuessList> {
    if sample.is_empty() {
        return Err(Error::Config("boosted identification needs a sample".into()));
    }
    let t = sample.len() as u64;
    let size = boost_batch_size(t) as usize;
    let m = boost_batch_count(t) as usize;
    let mut multiset = Vec::with_capacity(m * k as usize);
    for j in 0..m {
        let lo = j * size;
        let hi = (lo + size).min(sample.len());
        let g = base.guess(&sample[lo..hi]);
        for idx in g.indices {
            multiset.push(c.first_index(idx)?);
        }
    }
    Ok(topk_multiset(&multiset, k))
}

/// Identifier wrapper applying the batching rule to its whole input.
pub struct BoostedIdentifier {
    pub base: Arc<dyn Identifier>,
    pub collection: Arc<Collection>,
    pub k: u32,
}

impl Identifier for BoostedIdentifier {
    fn guess(&self, input: &[Element]) -> GuessList {
        if input.is_empty() {
            return GuessList::from_indices(vec![1]);
        }
        boosted_identify(self.base.as_ref(), &self.collection, self.k, input)
            .expect("validated collection indices")
    }
    fn arity(&self) -> u32 {
        self.k
    }
}

/// A test-bench identifier with a controlled per-call failure probability:
/// a stable hash of the input decides failure, so failures are independent
/// across independent random batches. On success the output contains the
/// designated target; on failure it yields a fresh junk pair.
pub struct SyntheticBatchIdentifier {
    pub target_first: u64,
    /// Failure probability in parts per million.
    pub fail_ppm: u64,
    pub salt: u64,
    pub junk_base: u64,
}

impl Identifier for SyntheticBatchIdentifier {
    fn guess(&self, input: &[Element]) -> GuessList {
        let mut h = mix64(self.salt);
        for e in input {
            h = mix64(h ^ (e.0 as u64).rotate_left(17));
        }
        let fail = h % 1_000_000 < self.fail_ppm;
        let j = self.junk_base + (mix64(h) % 500_000) * 2;
        if fail {
            GuessList::from_indices(vec![j, j + 1])
        } else {
            GuessList::from_indices(vec![self.target_first, j])
        }
    }
    fn arity(&self) -> u32 {
        2
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PigeonholeRow {
    pub t: u64,
    pub identified: Vec<bool>,
    pub identified_count: u32,
    /// Position (0-based, into `languages`) of the least missed language.
    pub least_missed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FloorRow {
    pub t: u64,
    pub language_pos: usize,
    pub ci_hi: f64,
    pub threshold: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub shared_x: Element,
    pub languages: Vec<u64>,
    pub pigeonhole: Vec<PigeonholeRow>,
    pub curves: Vec<ErrorCurve>,
    pub floor: Vec<FloorRow>,
}

/// The exponential lower-bound experiment: `k + 1` distinct languages
/// sharing an element can never all be identified at once by a k-list, so
/// on the constant stream some designated language is missed at every `t`
/// (evaluated exactly), and under a half-mass distribution that event has
/// probability at least `2^-t` (confirmed by Monte Carlo).
#[allow(clippy::too_many_arguments)]
pub fn lower_bound_experiment(
    c: &Arc<Collection>,
    k: u32,
    shared_x: i64,
    languages: &[u64],
    identifier: &Arc<dyn Identifier>,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<LowerBoundReport> {
    if languages.len() != k as usize + 1 {
        return Err(Error::Config(format!(
            "need exactly k+1 = {} designated languages",
            k + 1
        )));
    }
    let x = Element(shared_x);
    let mut langs = Vec::new();
    for &i in languages {
        let l = c.language_at(i)?;
        if !l.contains(x) {
            return Err(Error::NonTrivialityUnwitnessed(format!(
                "element {x} is not in language {i}"
            )));
        }
        langs.push(l);
    }
    for a in 0..langs.len() {
        for b in a + 1..langs.len() {
            if langs[a] == langs[b] {
                return Err(Error::NonTrivialityUnwitnessed(format!(
                    "languages {} and {} coincide",
                    languages[a], languages[b]
                )));
            }
        }
    }

    // Exact pigeonhole on the constant stream.
    let mut pigeonhole = Vec::new();
    let mut constant = Vec::new();
    for t in 1..=horizon {
        constant.push(x);
        let g = identifier.guess(&constant);
        let identified: Vec<bool> = languages
            .iter()
            .map(|&i| c.identifies(&g.indices, i).unwrap_or(false))
            .collect();
        let count = identified.iter().filter(|&&b| b).count() as u32;
        debug_assert!(count <= k);
        let least_missed = identified
            .iter()
            .position(|&b| !b)
            .expect("a k-list cannot cover k+1 distinct languages");
        pigeonhole.push(PigeonholeRow {
            t,
            identified,
            identified_count: count,
            least_missed,
        });
    }

    // Per-language Monte Carlo under the half-mass distributions.
    let mut curves = Vec::new();
    for (pos, &z) in languages.iter().enumerate() {
        let dist = ValidDistribution::half_mass_point(shared_x, langs[pos].clone())?;
        let exp = RateExperiment {
            collection: c.clone(),
            k,
            target: z,
            distribution: dist,
            identifier: identifier.clone(),
            horizon,
            trials,
            seed: seed.wrapping_add(pos as u64 + 1),
        };
        curves.push(run_rate_experiment(&exp)?);
    }

    let mut floor = Vec::new();
    for row in &pigeonhole {
        if row.t > 10 {
            break;
        }
        let pos = row.least_missed;
        let ci_hi = curves[pos].point(row.t).map(|p| p.ci_hi).unwrap_or(0.0);
        let threshold = (0.5f64).powi(row.t as i32);
        floor.push(FloorRow {
            t: row.t,
            language_pos: pos,
            ci_hi,
            threshold,
            ok: ci_hi >= threshold,
        });
    }

    Ok(LowerBoundReport {
        shared_x: x,
        languages: languages.to_vec(),
        pigeonhole,
        curves,
        floor,
    })
}
