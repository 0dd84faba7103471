//! Fuzzy semantics for cardinality restrictions.
//!
//! Conjunction is the Zadeh minimum, fuzzy cardinality is the σ-count, and a
//! minimum-cardinality restriction is a left-shoulder membership `^aΩ(k)`
//! that is 0 up to `k⁻ = k·(1−a)`, ramps linearly and reaches 1 at `k`.
//!
//! The subsumption degree between two restrictions sharing the same
//! fuzziness is the infimum over `c` of the residuated implication
//! `Ω₂(c) ⇒ Ω₁(c)`. For two left shoulders with equal `a` that infimum is
//! attained at `c = k₂` and equals `Ω₁(k₂)`, which is what
//! [`subsumption_degree`] computes.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sit::{BeliefBag, Category};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("cardinality {0} is negative")]
    NegativeCardinality(f64),
    #[error("conjunction of an empty list")]
    EmptyInput,
    #[error("degree {0} is outside [0, 1]")]
    DegreeOutOfRange(f64),
    #[error("fuzziness {0} is outside [0, 1]")]
    InvalidFuzziness(f64),
    #[error("restriction cardinality {0} is negative or not finite")]
    InvalidCardinality(f64),
    #[error("restrictions use different fuzziness values ({0} vs {1})")]
    FuzzinessMismatch(f64, f64),
    #[error("operands are built over different reification modes")]
    InterfaceMismatch,
}

pub(crate) fn check_fuzziness(a: f64) -> Result<f64, FuzzyError> {
    if (0.0..=1.0).contains(&a) {
        Ok(a)
    } else {
        Err(FuzzyError::InvalidFuzziness(a))
    }
}

/// Left-shoulder minimum-cardinality restriction `^aΩ(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShoulderRestriction {
    k: f64,
    a: f64,
}

impl ShoulderRestriction {
    pub fn new(k: f64, a: f64) -> Result<Self, FuzzyError> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(FuzzyError::InvalidCardinality(k));
        }
        Ok(Self {
            k,
            a: check_fuzziness(a)?,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn fuzziness(&self) -> f64 {
        self.a
    }

    pub fn k_minus(&self) -> f64 {
        self.k * (1.0 - self.a)
    }

    /// Same `k`, different fuzziness.
    pub fn with_fuzziness(&self, a: f64) -> Result<Self, FuzzyError> {
        Self::new(self.k, a)
    }

    /// Membership of cardinality `c`; callers guarantee `c ≥ 0`.
    pub fn membership(&self, c: f64) -> f64 {
        let lo = self.k_minus();
        if self.k == 0.0 || c >= self.k {
            1.0
        } else if c <= lo {
            0.0
        } else {
            ((c - lo) / (self.k - lo)).clamp(0.0, 1.0)
        }
    }
}

/// Membership of cardinality `c` in `rest`.
pub fn shoulder_eval(rest: &ShoulderRestriction, c: f64) -> Result<f64, FuzzyError> {
    if c < 0.0 || c.is_nan() {
        return Err(FuzzyError::NegativeCardinality(c));
    }
    Ok(rest.membership(c))
}

/// Zadeh conjunction: the minimum degree.
pub fn zadeh_and(degrees: &[f64]) -> Result<f64, FuzzyError> {
    if let Some(&bad) = degrees.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(FuzzyError::DegreeOutOfRange(bad));
    }
    degrees
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(FuzzyError::EmptyInput)
}

/// σ-count cardinality: the sum of membership degrees.
pub fn sigma_count(degrees: &[f64]) -> f64 {
    degrees.iter().sum()
}

/// A subsumption degree in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsumptionDegree(f64);

impl SubsumptionDegree {
    pub const ZERO: Self = Self(0.0);
    pub const ONE: Self = Self(1.0);

    pub fn new(value: f64) -> Result<Self, FuzzyError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(FuzzyError::DegreeOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0.0
    }
}

impl fmt::Display for SubsumptionDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.0)
    }
}

/// Degree to which `child` implies `parent` on one role key.
pub fn subsumption_degree(
    parent: &ShoulderRestriction,
    child: &ShoulderRestriction,
) -> Result<SubsumptionDegree, FuzzyError> {
    if parent.a != child.a {
        return Err(FuzzyError::FuzzinessMismatch(parent.a, child.a));
    }
    Ok(SubsumptionDegree(parent.membership(child.k)))
}

/// Degree to which category `child` implies category `parent`.
///
/// Keys restricted by `parent` but not by `child` yield 0; keys restricted
/// only by `child` are ignored.
pub fn category_subsumption(
    parent: &Category,
    child: &Category,
) -> Result<SubsumptionDegree, FuzzyError> {
    if parent.mode() != child.mode() {
        return Err(FuzzyError::InterfaceMismatch);
    }
    if parent.fuzziness() != child.fuzziness() {
        return Err(FuzzyError::FuzzinessMismatch(
            parent.fuzziness(),
            child.fuzziness(),
        ));
    }
    let mut degree = 1.0_f64;
    for (key, rest) in parent.restrictions() {
        let Some(other) = child.restriction(key) else {
            return Ok(SubsumptionDegree::ZERO);
        };
        degree = degree.min(subsumption_degree(rest, other)?.0);
        if degree == 0.0 {
            break;
        }
    }
    Ok(SubsumptionDegree(degree))
}

/// Degree to which the scene described by `beliefs` is an instance of `cat`.
///
/// Each restricted key is evaluated at the scene's cardinality (0 when the
/// scene has no such belief); the result is the minimum.
pub fn classification_degree(cat: &Category, beliefs: &BeliefBag) -> Result<f64, FuzzyError> {
    if cat.mode() != beliefs.mode() {
        return Err(FuzzyError::InterfaceMismatch);
    }
    let mut degree = 1.0_f64;
    for (key, rest) in cat.restrictions() {
        degree = degree.min(rest.membership(beliefs.cardinality(key)));
        if degree == 0.0 {
            break;
        }
    }
    Ok(degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega(k: f64, a: f64) -> ShoulderRestriction {
        ShoulderRestriction::new(k, a).unwrap()
    }

    #[test]
    fn shoulder_examples() {
        assert_eq!(shoulder_eval(&omega(1.0, 0.5), 0.75).unwrap(), 0.5);
        assert_eq!(shoulder_eval(&omega(1.0, 0.5), 1.2).unwrap(), 1.0);
        assert_eq!(shoulder_eval(&omega(1.0, 0.0), 0.999).unwrap(), 0.0);
        assert_eq!(shoulder_eval(&omega(1.0, 0.0), 1.0).unwrap(), 1.0);
        assert_eq!(shoulder_eval(&omega(1.0, 0.5), 0.5).unwrap(), 0.0);
        assert!(matches!(
            shoulder_eval(&omega(1.0, 0.5), -0.1),
            Err(FuzzyError::NegativeCardinality(_))
        ));
    }

    #[test]
    fn degenerate_restrictions() {
        let zero = omega(0.0, 0.4);
        assert_eq!(zero.membership(0.0), 1.0);
        assert_eq!(zero.membership(3.0), 1.0);
        // a = 1 leaves everything above zero partially satisfied
        let wide = omega(2.0, 1.0);
        assert_eq!(wide.k_minus(), 0.0);
        assert_eq!(wide.membership(0.0), 0.0);
        assert_eq!(wide.membership(1.0), 0.5);
        assert!(ShoulderRestriction::new(-1.0, 0.3).is_err());
        assert!(ShoulderRestriction::new(1.0, 1.3).is_err());
    }

    #[test]
    fn zadeh_and_examples() {
        assert_eq!(zadeh_and(&[0.9, 0.8, 0.9]).unwrap(), 0.8);
        assert_eq!(zadeh_and(&[1.0]).unwrap(), 1.0);
        assert_eq!(zadeh_and(&[0.5, 0.0]).unwrap(), 0.0);
        assert_eq!(zadeh_and(&[]), Err(FuzzyError::EmptyInput));
        assert!(zadeh_and(&[0.5, 1.5]).is_err());
    }

    #[test]
    fn sigma_count_examples() {
        assert!((sigma_count(&[0.6, 0.5, 0.1]) - 1.2).abs() < 1e-12);
        assert_eq!(sigma_count(&[]), 0.0);
        assert_eq!(sigma_count(&[1.0, 1.0, 1.0]), 3.0);
    }

    #[test]
    fn subsumption_cases() {
        // child at or above the parent's k: always respected
        assert_eq!(
            subsumption_degree(&omega(1.0, 0.3), &omega(2.0, 0.3))
                .unwrap()
                .value(),
            1.0
        );
        // child below the parent's k⁻: never respected
        assert_eq!(
            subsumption_degree(&omega(2.0, 0.3), &omega(1.0, 0.3))
                .unwrap()
                .value(),
            0.0
        );
        // inside the ramp
        let p = subsumption_degree(&omega(2.0, 0.5), &omega(1.8, 0.5))
            .unwrap()
            .value();
        assert!((p - 0.8).abs() < 1e-12);
        assert!(matches!(
            subsumption_degree(&omega(1.0, 0.3), &omega(1.0, 0.5)),
            Err(FuzzyError::FuzzinessMismatch(..))
        ));
    }
}
