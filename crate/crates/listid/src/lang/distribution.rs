//! Distributions whose support is exactly a target language.
//!
//! `EnumerationGeometric` places mass `sum_{i: sigma_i = x} 2^-i` on `x` for
//! an enumeration `sigma`; the repeat-last convention on finite languages
//! folds the residual tail mass onto the final element, so masses always sum
//! to one with positive mass everywhere on the support. `HalfMassPoint`
//! puts half the mass on a designated point and spreads the rest
//! geometrically over the canonical order of the remaining members.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::enumeration::Enumeration;
use crate::lang::language::{Element, Language};
use crate::lang::rng::RngState;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValidDistribution {
    EnumerationGeometric { enumeration: Enumeration },
    HalfMassPoint { x0: Element, language: Language },
}

fn pow2neg(p: u64) -> f64 {
    if p > 1074 {
        0.0
    } else {
        (0.5f64).powi(p as i32)
    }
}

/// A geometric index draw: `P(i) = 2^-i`.
fn geometric_index(rng: &mut RngState) -> u64 {
    let mut i = 1u64;
    while !rng.gen::<bool>() {
        i += 1;
    }
    i
}

impl ValidDistribution {
    pub fn geometric_over(language: Language) -> Self {
        ValidDistribution::EnumerationGeometric {
            enumeration: Enumeration::canonical(language),
        }
    }

    pub fn half_mass_point(x0: i64, language: Language) -> Result<Self> {
        let d = ValidDistribution::HalfMassPoint {
            x0: Element(x0),
            language,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ValidDistribution::EnumerationGeometric { enumeration } => enumeration.validate(),
            ValidDistribution::HalfMassPoint { x0, language } => {
                if !language.contains(*x0) {
                    return Err(Error::InvalidDistribution(format!(
                        "point {x0} lies outside the target language"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn target_language(&self) -> Language {
        match self {
            ValidDistribution::EnumerationGeometric { enumeration } => {
                enumeration.language().clone()
            }
            ValidDistribution::HalfMassPoint { language, .. } => language.clone(),
        }
    }

    fn residual_enumeration(&self) -> Option<Enumeration> {
        match self {
            ValidDistribution::HalfMassPoint { x0, language } => {
                language.without(*x0).map(Enumeration::canonical)
            }
            _ => None,
        }
    }

    pub fn sample_one(&self, rng: &mut RngState) -> Element {
        match self {
            ValidDistribution::EnumerationGeometric { enumeration } => {
                enumeration.element_at(geometric_index(rng))
            }
            ValidDistribution::HalfMassPoint { x0, .. } => {
                if rng.gen::<bool>() {
                    *x0
                } else {
                    match self.residual_enumeration() {
                        None => *x0,
                        Some(rest) => rest.element_at(geometric_index(rng)),
                    }
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut RngState, t: u64) -> Vec<Element> {
        (0..t).map(|_| self.sample_one(rng)).collect()
    }

    /// Analytic mass of `x`. Exact up to f64 rounding of dyadic values.
    pub fn mass_of(&self, x: Element) -> f64 {
        match self {
            ValidDistribution::EnumerationGeometric { enumeration } => {
                let occ = enumeration.occurrences_of(x);
                let mut mass: f64 = occ.positions.iter().map(|&p| pow2neg(p)).sum();
                if let Some(tail) = occ.tail_from {
                    mass += pow2neg(tail - 1);
                }
                mass
            }
            ValidDistribution::HalfMassPoint { x0, .. } => {
                let base = if x == *x0 { 0.5 } else { 0.0 };
                match self.residual_enumeration() {
                    None => {
                        if x == *x0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Some(rest) => {
                        let occ = rest.occurrences_of(x);
                        let mut rest_mass: f64 =
                            occ.positions.iter().map(|&p| pow2neg(p)).sum();
                        if let Some(tail) = occ.tail_from {
                            rest_mass += pow2neg(tail - 1);
                        }
                        base + 0.5 * rest_mass
                    }
                }
            }
        }
    }
}
