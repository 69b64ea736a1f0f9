//! Fairness and efficiency predicates. Every check returns an
//! [`AuditReport`] whose witness can be re-verified independently.

mod dominance;
mod efficiency;
mod fairness;
mod fpo;
mod pdp;

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

pub use dominance::{dominates, Dominance, DominanceMode};
pub use efficiency::{allocation_dominates, exhaustive_witness, is_efficient, EfficiencyCriterion};
pub use fairness::{is_ef1, is_envy_free, is_fulfilling};
pub use fpo::{fpo_slack, is_fpo, FpoMethod};
pub use pdp::{is_pigou_dalton_transfer, pdp_holds};

use crate::mechanisms::MechanismError;
use crate::model::{Allocation, ModelError};
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error("utility vectors are not related by a Pigou-Dalton transfer")]
    NotPigouDalton,
    #[error("linear program failed: {0}")]
    Lp(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    Ef1,
    EnvyFree,
    Pareto,
    Sd,
    SdPlus,
    Fpo,
    Fulfilling,
    Proportional,
}

impl Predicate {
    pub fn name(self) -> &'static str {
        match self {
            Predicate::Ef1 => "ef1",
            Predicate::EnvyFree => "ef",
            Predicate::Pareto => "pareto",
            Predicate::Sd => "sd",
            Predicate::SdPlus => "sd-plus",
            Predicate::Fpo => "fpo",
            Predicate::Fulfilling => "fulfilling",
            Predicate::Proportional => "proportional",
        }
    }

    pub fn parse(s: &str) -> Option<Predicate> {
        [
            Predicate::Ef1,
            Predicate::EnvyFree,
            Predicate::Pareto,
            Predicate::Sd,
            Predicate::SdPlus,
            Predicate::Fpo,
            Predicate::Fulfilling,
            Predicate::Proportional,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evidence attached to a failed predicate. Indices are 0-based here and
/// shifted to 1-based in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T = Rational> {
    /// A dominating integral allocation with its utility profile.
    Allocation {
        allocation: Allocation,
        utilities: Vec<T>,
    },
    /// `envious` prefers `envied`'s bundle (even after the item removal
    /// allowed by the predicate).
    EnvyPair { envious: usize, envied: usize },
    /// Fractional allocation `shares[i][j]` and its utility profile.
    Fractional {
        shares: Vec<Vec<T>>,
        utilities: Vec<T>,
    },
    /// The single agent violating the predicate.
    Agent(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport<T = Rational> {
    pub predicate: Predicate,
    pub verdict: bool,
    pub witness: Option<Witness<T>>,
}

impl<T: Scalar> AuditReport<T> {
    pub fn pass(predicate: Predicate) -> Self {
        Self {
            predicate,
            verdict: true,
            witness: None,
        }
    }

    pub fn fail(predicate: Predicate, witness: Witness<T>) -> Self {
        Self {
            predicate,
            verdict: false,
            witness: Some(witness),
        }
    }

    /// `{"predicate":…, "verdict":…, "witness":…}` with 1-based indices and
    /// rationals rendered as `"p/q"`.
    pub fn to_json(&self) -> Value {
        json!({
            "predicate": self.predicate.name(),
            "verdict": self.verdict,
            "witness": self.witness.as_ref().map_or(Value::Null, Witness::to_json),
        })
    }
}

fn scalars<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

impl<T: Scalar> Witness<T> {
    pub fn to_json(&self) -> Value {
        match self {
            Witness::Allocation {
                allocation,
                utilities,
            } => json!({
                "kind": "allocation",
                "owners": allocation.owners().iter().map(|o| o + 1).collect::<Vec<_>>(),
                "utilities": scalars(utilities),
            }),
            Witness::EnvyPair { envious, envied } => json!({
                "kind": "envy-pair",
                "envious": envious + 1,
                "envied": envied + 1,
            }),
            Witness::Fractional { shares, utilities } => json!({
                "kind": "fractional",
                "shares": shares.iter().map(|r| scalars(r)).collect::<Vec<_>>(),
                "utilities": scalars(utilities),
            }),
            Witness::Agent(i) => json!({ "kind": "agent", "agent": i + 1 }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn report_json_shape() {
        let r: AuditReport = AuditReport::fail(
            Predicate::Ef1,
            Witness::EnvyPair {
                envious: 1,
                envied: 0,
            },
        );
        assert_eq!(
            r.to_json(),
            json!({"predicate":"ef1","verdict":false,"witness":{"kind":"envy-pair","envious":2,"envied":1}})
        );
        let f: AuditReport = AuditReport::fail(
            Predicate::Fpo,
            Witness::Fractional {
                shares: vec![vec![ratio(3, 4)]],
                utilities: vec![ratio(3, 5)],
            },
        );
        assert_eq!(f.to_json()["witness"]["utilities"][0], "3/5");
        let p: AuditReport = AuditReport::pass(Predicate::SdPlus);
        assert_eq!(p.to_json()["witness"], Value::Null);
    }

    #[test]
    fn predicate_names_parse() {
        for p in [
            "ef1",
            "ef",
            "pareto",
            "sd",
            "sd-plus",
            "fpo",
            "fulfilling",
            "proportional",
        ] {
            assert_eq!(Predicate::parse(p).unwrap().name(), p);
        }
        assert!(Predicate::parse("efx").is_none());
    }
}
