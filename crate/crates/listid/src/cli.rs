//! Command-line entry points, run orchestration and result serialization.
//!
//! Every file-producing subcommand also writes a manifest next to its
//! outputs with the tool version, wall time and a sha256 digest per file.
//! Outputs themselves are deterministic functions of config and seed;
//! manifests carry the timing and are the one non-reproducible artifact.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::adversary::{adv_enum, limit_language};
use crate::angluin::check_k_angluin;
use crate::config::{
    parse_collection, parse_distribution, parse_lower_bound_config, parse_rates_config,
    IdentifierConfig,
};
use crate::derand::{derandomize, extract_bits_from_distribution, CoinMixture, DerandomizableProb, ProbIdentifier, UniformSplitter};
use crate::error::{Error, Result};
use crate::identify::{run_identifier, ListIdentifier, DEFAULT_SCAN_CAP};
use crate::lang::{Collection, Enumeration, RngState};
use crate::rates::{fit_exponential, lower_bound_experiment, run_rate_experiment, RateExperiment};
use crate::stats::{chi_square_uniformity_pvalue, runs_test_pvalue};
use crate::stratify::stratify;

#[derive(Parser, Debug)]
#[command(name = "listid", version, about = "k-list language identification in the limit: checks, simulations and rate experiments")]
pub struct Cli {
    /// Master seed overriding any seed found in config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for data-parallel runs (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for output files.
    #[arg(long, global = true, env = "LISTID_OUT_DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide the k-Angluin condition for a collection.
    CheckAngluin {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the list identifier on an enumeration of a target language.
    SimulateIdentify {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        target: u64,
        #[arg(long)]
        horizon: u64,
        /// Block-shuffle the canonical enumeration with this seed.
        #[arg(long)]
        shuffle_seed: Option<u64>,
        #[arg(long, default_value_t = 8)]
        block_size: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pit the adversarial enumeration strategy against an identifier.
    Adversary {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long)]
        k: u32,
        /// listidentify | constant:i,j,... | custom-exec:PATH
        #[arg(long)]
        identifier: String,
        /// List size of the identifier (defaults to k).
        #[arg(long)]
        identifier_k: Option<u32>,
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Peel a collection into singly identifiable strata.
    Stratify {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Level-wise top-k derandomization of a probabilistic identifier.
    Derandomize {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long)]
        k: u32,
        /// derandomizable | coin-mixture:NUM/DEN,d1;d2;... | uniform-splitter:d1;d2;...
        #[arg(long)]
        prob_identifier: String,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        target: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract fair bits from i.i.d. draws of a distribution.
    ExtractBits {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo error curves for an identifier under i.i.d. input.
    Rates {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also fit a log-linear model over the configured window.
        #[arg(long)]
        fit: bool,
    },
    /// The pigeonhole lower-bound experiment.
    LowerBound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct OutputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    version: String,
    command: String,
    wall_time_ms: u128,
    outputs: Vec<OutputDigest>,
}

struct OutputSink {
    dir: PathBuf,
    started: Instant,
    command: String,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSink {
    fn new(dir: &Path, command: String) -> Self {
        OutputSink {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            command,
            files: Vec::new(),
        }
    }

    fn add(&mut self, rel: &Path, contents: impl Into<Vec<u8>>) {
        self.files.push((self.dir.join(rel), contents.into()));
    }

    /// Writes all files plus a manifest named after the first output.
    fn finish(self) -> Result<()> {
        if self.files.is_empty() {
            return Ok(());
        }
        let mut outputs = Vec::new();
        for (path, contents) in &self.files {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, contents)?;
            let mut hasher = Sha256::new();
            hasher.update(contents);
            outputs.push(OutputDigest {
                path: path.display().to_string(),
                sha256: format!("{:x}", hasher.finalize()),
            });
        }
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            wall_time_ms: self.started.elapsed().as_millis(),
            outputs,
        };
        let first = &self.files[0].0;
        let manifest_path = first.with_extension(format!(
            "{}manifest.json",
            first
                .extension()
                .map(|e| format!("{}.", e.to_string_lossy()))
                .unwrap_or_default()
        ));
        fs::write(manifest_path, serde_json::to_vec_pretty(&manifest)?)?;
        Ok(())
    }
}

fn load_collection(path: &Path) -> Result<Collection> {
    let text = fs::read_to_string(path)?;
    parse_collection(&text)?.build()
}

fn parse_simple_identifier(
    spec: &str,
    collection: &Arc<Collection>,
    k: u32,
) -> Result<Arc<dyn crate::identify::Identifier>> {
    let cfg = if spec == "listidentify" {
        IdentifierConfig::ListIdentifyUnchecked
    } else if let Some(rest) = spec.strip_prefix("constant:") {
        let list = rest
            .split(',')
            .map(|w| w.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("bad constant list: {e}")))?;
        IdentifierConfig::Constant { list }
    } else if let Some(path) = spec.strip_prefix("custom-exec:") {
        IdentifierConfig::CustomExec { path: path.into() }
    } else {
        return Err(Error::Config(format!("unknown identifier spec '{spec}'")));
    };
    cfg.build(collection, k)
}

fn parse_prob_identifier(
    spec: &str,
    collection: &Collection,
    k: u32,
) -> Result<Box<dyn ProbIdentifier>> {
    if spec == "derandomizable" {
        return Ok(Box::new(DerandomizableProb {
            inner: ListIdentifier::new(collection.clone(), k)?,
        }));
    }
    if let Some(rest) = spec.strip_prefix("coin-mixture:") {
        let (frac, decoys) = rest
            .split_once(',')
            .ok_or_else(|| Error::Config("coin-mixture needs NUM/DEN,decoys".into()))?;
        let (num, den) = frac
            .split_once('/')
            .ok_or_else(|| Error::Config("probability must be NUM/DEN".into()))?;
        let num: u64 = num.trim().parse().map_err(|_| Error::Config("bad numerator".into()))?;
        let den: u64 = den.trim().parse().map_err(|_| Error::Config("bad denominator".into()))?;
        if !den.is_power_of_two() || num > den {
            return Err(Error::Config(
                "mixture probability must be dyadic with numerator <= denominator".into(),
            ));
        }
        let decoys = parse_index_list(decoys)?;
        return Ok(Box::new(CoinMixture {
            num,
            log_den: den.trailing_zeros(),
            good: Box::new(ListIdentifier::new(collection.clone(), k)?),
            decoys,
        }));
    }
    if let Some(rest) = spec.strip_prefix("uniform-splitter:") {
        let decoys = parse_index_list(rest)?;
        if decoys.len() as u32 != k + 1 {
            return Err(Error::Config(format!(
                "uniform splitter needs exactly k+1 = {} decoys",
                k + 1
            )));
        }
        return Ok(Box::new(UniformSplitter { decoys }));
    }
    Err(Error::Config(format!(
        "unknown probabilistic identifier spec '{spec}'"
    )))
}

fn parse_index_list(s: &str) -> Result<Vec<u64>> {
    s.split(';')
        .map(|w| w.trim().parse::<u64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Config(format!("bad index list: {e}")))
}

fn float(v: f64) -> String {
    format!("{v:.12}")
}

pub fn run(cli: Cli) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        return pool.install(|| dispatch(&cli));
    }
    dispatch(&cli)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    match &cli.command {
        Command::CheckAngluin { collection, k, out } => {
            let c = load_collection(collection)?;
            let outcome = check_k_angluin(&c, *k)?;
            let verdict = serde_json::json!({
                "k": k,
                "holds": outcome.holds,
                "failing_index": outcome.failing_index,
            });
            let text = serde_json::to_string_pretty(&verdict)?;
            println!("{text}");
            if let Some(rel) = out {
                let mut sink = OutputSink::new(&out_dir, format!("check-angluin k={k}"));
                sink.add(rel, text);
                sink.finish()?;
            }
            Ok(())
        }
        Command::SimulateIdentify {
            collection,
            k,
            target,
            horizon,
            shuffle_seed,
            block_size,
            out,
        } => {
            let c = load_collection(collection)?;
            let telltales = crate::angluin::assign_telltales(&c, *k)?;
            let c = c.with_telltales(telltales);
            let lang = c.language_at(*target)?;
            let shuffle = cli.seed.or(*shuffle_seed);
            let e = match shuffle {
                Some(seed) => Enumeration::BlockShuffled {
                    language: lang,
                    seed,
                    block_size: *block_size,
                },
                None => Enumeration::canonical(lang),
            };
            let tr = run_identifier(&c, *k, &e, *horizon, DEFAULT_SCAN_CAP)?;
            let mut csv = String::from("t,x_t");
            for i in 1..=*k {
                csv.push_str(&format!(",guess_{i}"));
            }
            csv.push_str(",contains_target\n");
            for step in &tr.steps {
                let contains = c.identifies(&step.guesses.indices, *target)?;
                csv.push_str(&format!("{},{}", step.t, step.input));
                for g in step.guesses.padded(*k) {
                    csv.push_str(&format!(",{g}"));
                }
                csv.push_str(&format!(",{}\n", contains as u8));
            }
            let mut sink = OutputSink::new(
                &out_dir,
                format!("simulate-identify k={k} target={target} horizon={horizon}"),
            );
            sink.add(out, csv);
            sink.finish()
        }
        Command::Adversary {
            collection,
            k,
            identifier,
            identifier_k,
            budget,
            out,
        } => {
            let c = Arc::new(load_collection(collection)?);
            let ident_k = identifier_k.unwrap_or(*k);
            let ident = parse_simple_identifier(identifier, &c, ident_k)?;
            let run = adv_enum(&c, *k, ident.as_ref(), *budget)?;
            let limit = limit_language(&run);
            let doc = serde_json::json!({
                "run": run,
                "limit": limit,
            });
            let mut sink = OutputSink::new(
                &out_dir,
                format!("adversary k={k} identifier={identifier} budget={budget}"),
            );
            sink.add(out, serde_json::to_string_pretty(&doc)?);
            sink.finish()
        }
        Command::Stratify { collection, k, out } => {
            let c = load_collection(collection)?;
            let s = stratify(&c, *k)?;
            let doc = serde_json::json!({
                "k": s.k,
                "empty_levels": s.empty_levels(),
                "strata": s.strata,
            });
            let mut sink = OutputSink::new(&out_dir, format!("stratify k={k}"));
            sink.add(out, serde_json::to_string_pretty(&doc)?);
            sink.finish()
        }
        Command::Derandomize {
            collection,
            k,
            prob_identifier,
            depth,
            target,
            out,
        } => {
            let c = load_collection(collection)?;
            let prob = parse_prob_identifier(prob_identifier, &c, *k)?;
            let lang = c.language_at(*target)?;
            let prefix = Enumeration::canonical(lang).prefix(*depth as u64);
            let mut rows = Vec::new();
            for t in 1..*depth {
                let g = derandomize(prob.as_ref(), &c, *k, &prefix, t)?;
                let contains = c.identifies(&g.indices, *target)?;
                rows.push(serde_json::json!({
                    "t": t,
                    "output": g.indices,
                    "contains_target": contains,
                }));
            }
            let text = serde_json::to_string_pretty(&serde_json::json!({
                "k": k,
                "target": target,
                "levels": rows,
            }))?;
            println!("{text}");
            if let Some(rel) = out {
                let mut sink = OutputSink::new(
                    &out_dir,
                    format!("derandomize k={k} depth={depth} target={target}"),
                );
                sink.add(rel, text);
                sink.finish()?;
            }
            Ok(())
        }
        Command::ExtractBits { dist, n, out } => {
            let text = fs::read_to_string(dist)?;
            let d = parse_distribution(&text)?.build()?;
            let seed = cli.seed.unwrap_or(0);
            let mut rng = RngState::from_seed(seed);
            let r = extract_bits_from_distribution(&d, &mut rng, *n, 64 * (*n).max(1_000));
            let bits: String = r.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let ones = r.bits.iter().filter(|&&b| b).count() as u64;
            let zeros = r.bits.len() as u64 - ones;
            let stats = serde_json::json!({
                "requested": n,
                "extracted": r.bits.len(),
                "complete": r.complete,
                "consumed_elements": r.consumed,
                "ones": ones,
                "chi_square_p": chi_square_uniformity_pvalue(zeros, ones),
                "runs_p": runs_test_pvalue(&r.bits),
            });
            println!("{}", serde_json::to_string_pretty(&stats)?);
            let mut sink = OutputSink::new(&out_dir, format!("extract-bits n={n} seed={seed}"));
            sink.add(out, bits);
            sink.finish()
        }
        Command::Rates { config, out, fit } => {
            let text = fs::read_to_string(config)?;
            let cfg = parse_rates_config(&text)?;
            let collection = Arc::new(cfg.collection.build()?);
            let seed = cli.seed.unwrap_or(cfg.seed);
            let exp = RateExperiment {
                collection: collection.clone(),
                k: cfg.k,
                target: cfg.target,
                distribution: cfg.distribution.build()?,
                identifier: cfg.identifier.build(&collection, cfg.k)?,
                horizon: cfg.horizon,
                trials: cfg.trials,
                seed,
            };
            let curve = run_rate_experiment(&exp)?;
            let mut csv = String::from("t,failures,trials,e_hat,ci_lo,ci_hi\n");
            for p in &curve.points {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.t,
                    p.failures,
                    curve.trials,
                    float(p.e_hat),
                    float(p.ci_lo),
                    float(p.ci_hi)
                ));
            }
            let mut sink =
                OutputSink::new(&out_dir, format!("rates k={} target={}", cfg.k, cfg.target));
            sink.add(out, csv);
            if *fit {
                let window = cfg
                    .fit
                    .as_ref()
                    .map(|w| (w.from, w.to))
                    .unwrap_or((1, cfg.horizon));
                let summary = fit_exponential(&curve, window)?;
                let fit_path = out.with_extension("fit.json");
                sink.add(&fit_path, serde_json::to_string_pretty(&summary)?);
            }
            sink.finish()
        }
        Command::LowerBound { config, out } => {
            let text = fs::read_to_string(config)?;
            let cfg = parse_lower_bound_config(&text)?;
            let collection = Arc::new(cfg.collection.build()?);
            let seed = cli.seed.unwrap_or(cfg.seed);
            let identifier = cfg.identifier.build(&collection, cfg.k)?;
            let report = lower_bound_experiment(
                &collection,
                cfg.k,
                cfg.shared_x,
                &cfg.languages,
                &identifier,
                cfg.horizon,
                cfg.trials,
                seed,
            )?;
            let mut csv = String::from(
                "t,language,failures,trials,e_hat,ci_lo,ci_hi,pigeonholed,threshold,floor_ok\n",
            );
            for (pos, &lang) in report.languages.iter().enumerate() {
                for p in &report.curves[pos].points {
                    let row = report
                        .pigeonhole
                        .iter()
                        .find(|r| r.t == p.t)
                        .expect("pigeonhole covers the horizon");
                    let pigeonholed = row.least_missed == pos;
                    let floor = report
                        .floor
                        .iter()
                        .find(|f| f.t == p.t && f.language_pos == pos);
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{}\n",
                        p.t,
                        lang,
                        p.failures,
                        report.curves[pos].trials,
                        float(p.e_hat),
                        float(p.ci_lo),
                        float(p.ci_hi),
                        pigeonholed as u8,
                        floor.map(|f| float(f.threshold)).unwrap_or_default(),
                        floor.map(|f| (f.ok as u8).to_string()).unwrap_or_default(),
                    ));
                }
            }
            let mut sink = OutputSink::new(&out_dir, format!("lower-bound k={}", cfg.k));
            sink.add(out, csv);
            sink.finish()
        }
    }
}

/// Maps errors to the documented exit codes: 0 success, 1 internal or
/// invariant failure, 2 configuration error.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => match e {
            Error::Config(_)
            | Error::ConditionNotSatisfied { .. }
            | Error::ConditionSatisfied { .. }
            | Error::IndexOutOfRange { .. }
            | Error::InvalidCollection(_)
            | Error::InvalidDistribution(_)
            | Error::EmptyLanguage
            | Error::NonTrivialityUnwitnessed(_)
            | Error::InsufficientPositivePoints(_)
            | Error::DepthTooLarge { .. }
            | Error::PrefixTooShort { .. }
            | Error::SizeCapTooSmall { .. } => 2,
            _ => 1,
        },
    }
}
