//! Structured text configuration for collections, distributions and runs.
//!
//! Configs are TOML with every field validated and unknown fields
//! rejected. The documented schema lives in the README.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::{Identifier, ListIdentifier};
use crate::lang::{Collection, Element, Enumeration, Language, ValidDistribution};
use crate::rates::BoostedIdentifier;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LanguageConfig {
    Finite { members: Vec<i64> },
    Cofinite { excluded: Vec<i64> },
}

impl LanguageConfig {
    pub fn build(&self) -> Result<Language> {
        match self {
            LanguageConfig::Finite { members } => Language::finite(members.iter().copied()),
            LanguageConfig::Cofinite { excluded } => Ok(Language::cofinite(excluded.iter().copied())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteLanguageConfig {
    pub members: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollectionConfig {
    /// The canonical cofinite family; omit `k_max` for the unbounded one.
    Canonical { k_max: Option<u32> },
    Finite {
        universe: Vec<i64>,
        languages: Vec<FiniteLanguageConfig>,
    },
}

impl CollectionConfig {
    pub fn build(&self) -> Result<Collection> {
        match self {
            CollectionConfig::Canonical { k_max } => Ok(match k_max {
                Some(m) => {
                    if *m == 0 {
                        return Err(Error::Config("k_max must be at least 1".into()));
                    }
                    Collection::canonical(*m)
                }
                None => Collection::canonical_unbounded(),
            }),
            CollectionConfig::Finite {
                universe,
                languages,
            } => {
                let uni: BTreeSet<Element> = universe.iter().map(|&v| Element(v)).collect();
                let langs = languages
                    .iter()
                    .map(|l| Language::finite(l.members.iter().copied()))
                    .collect::<Result<Vec<_>>>()?;
                Collection::finite(langs, uni)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnumerationConfig {
    Canonical {
        language: LanguageConfig,
    },
    PrefixThenCanonical {
        prefix: Vec<i64>,
        language: LanguageConfig,
    },
    BlockShuffled {
        language: LanguageConfig,
        seed: u64,
        block_size: u32,
    },
}

impl EnumerationConfig {
    pub fn build(&self) -> Result<Enumeration> {
        let e = match self {
            EnumerationConfig::Canonical { language } => Enumeration::Canonical {
                language: language.build()?,
            },
            EnumerationConfig::PrefixThenCanonical { prefix, language } => {
                Enumeration::PrefixThenCanonical {
                    prefix: prefix.iter().map(|&v| Element(v)).collect(),
                    language: language.build()?,
                }
            }
            EnumerationConfig::BlockShuffled {
                language,
                seed,
                block_size,
            } => Enumeration::BlockShuffled {
                language: language.build()?,
                seed: *seed,
                block_size: *block_size,
            },
        };
        e.validate()?;
        Ok(e)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    EnumerationGeometric { enumeration: EnumerationConfig },
    HalfMassPoint { x0: i64, language: LanguageConfig },
}

impl DistributionConfig {
    pub fn build(&self) -> Result<ValidDistribution> {
        let d = match self {
            DistributionConfig::EnumerationGeometric { enumeration } => {
                ValidDistribution::EnumerationGeometric {
                    enumeration: enumeration.build()?,
                }
            }
            DistributionConfig::HalfMassPoint { x0, language } => {
                ValidDistribution::half_mass_point(*x0, language.build()?)?
            }
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdentifierConfig {
    /// The recursive list identification algorithm on the run's collection.
    ListIdentify,
    /// Like `list_identify`, but with the tell-tales the collection already
    /// carries and no condition check (for adversarial experiments).
    ListIdentifyUnchecked,
    Constant { list: Vec<u64> },
    /// The batch-boosted wrapper around `list_identify`.
    BoostedListIdentify,
    /// An external executable speaking the line protocol documented in the
    /// README.
    CustomExec { path: String },
}

impl IdentifierConfig {
    pub fn build(&self, collection: &Arc<Collection>, k: u32) -> Result<Arc<dyn Identifier>> {
        Ok(match self {
            IdentifierConfig::ListIdentify => {
                Arc::new(ListIdentifier::new((**collection).clone(), k)?)
            }
            IdentifierConfig::ListIdentifyUnchecked => Arc::new(
                ListIdentifier::with_existing_telltales((**collection).clone(), k),
            ),
            IdentifierConfig::Constant { list } => {
                if list.is_empty() || list.len() as u32 > k {
                    return Err(Error::Config(format!(
                        "constant identifier list must have between 1 and k = {k} entries"
                    )));
                }
                Arc::new(crate::identify::ConstantIdentifier { list: list.clone() })
            }
            IdentifierConfig::BoostedListIdentify => {
                let base = ListIdentifier::new((**collection).clone(), k)?;
                Arc::new(BoostedIdentifier {
                    base: Arc::new(base),
                    collection: collection.clone(),
                    k,
                })
            }
            IdentifierConfig::CustomExec { path } => Arc::new(ExecIdentifier {
                path: path.clone(),
                k,
            }),
        })
    }
}

/// Identifier backed by an external executable. Each query writes one line
/// of space-separated integers to stdin and reads one line of
/// space-separated indices from stdout.
pub struct ExecIdentifier {
    pub path: String,
    pub k: u32,
}

impl Identifier for ExecIdentifier {
    fn guess(&self, input: &[Element]) -> crate::identify::GuessList {
        use std::io::Write;
        use std::process::{Command, Stdio};
        let line = input
            .iter()
            .map(|e| e.0.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let output = Command::new(&self.path)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .and_then(|mut child| {
                child
                    .stdin
                    .as_mut()
                    .expect("stdin piped")
                    .write_all(line.as_bytes())?;
                child.wait_with_output()
            });
        let indices = match output {
            Ok(out) => String::from_utf8_lossy(&out.stdout)
                .split_whitespace()
                .filter_map(|w| w.parse::<u64>().ok())
                .take(self.k as usize)
                .collect(),
            Err(_) => vec![1],
        };
        crate::identify::GuessList::from_indices(indices)
    }
    fn arity(&self) -> u32 {
        self.k
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindowConfig {
    pub from: u64,
    pub to: u64,
}

/// Config for the rate experiment command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub k: u32,
    pub target: u64,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
    pub collection: CollectionConfig,
    pub distribution: DistributionConfig,
    pub identifier: IdentifierConfig,
    pub fit: Option<FitWindowConfig>,
}

/// Config for the lower-bound experiment command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundConfig {
    pub k: u32,
    pub shared_x: i64,
    pub languages: Vec<u64>,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
    pub collection: CollectionConfig,
    pub identifier: IdentifierConfig,
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::Config("list size k must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub fn parse_collection(text: &str) -> Result<CollectionConfig> {
    let cfg: CollectionConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.build()?;
    Ok(cfg)
}

pub fn parse_distribution(text: &str) -> Result<DistributionConfig> {
    let cfg: DistributionConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.build()?;
    Ok(cfg)
}

pub fn parse_rates_config(text: &str) -> Result<RatesConfig> {
    let cfg: RatesConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    check_k(cfg.k)?;
    if cfg.horizon == 0 || cfg.trials == 0 {
        return Err(Error::Config("horizon and trials must be positive".into()));
    }
    if let Some(w) = &cfg.fit {
        if w.from == 0 || w.to < w.from {
            return Err(Error::Config("fit window must satisfy 1 <= from <= to".into()));
        }
    }
    cfg.collection.build()?;
    cfg.distribution.build()?;
    Ok(cfg)
}

pub fn parse_lower_bound_config(text: &str) -> Result<LowerBoundConfig> {
    let cfg: LowerBoundConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    check_k(cfg.k)?;
    if cfg.languages.len() != cfg.k as usize + 1 {
        return Err(Error::Config(format!(
            "need exactly k+1 = {} designated languages",
            cfg.k + 1
        )));
    }
    cfg.collection.build()?;
    Ok(cfg)
}
