//! Identifier newtypes shared by every module.
//!
//! All identifiers are restricted to ASCII: a leading letter or underscore
//! followed by letters, digits, `_`, `-` or `.`. They order lexicographically
//! as plain strings, which is the order used for every deterministic
//! tie-break in the crate.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {kind} identifier {value:?}: {reason}")]
pub struct IdentError {
    pub kind: &'static str,
    pub value: String,
    pub reason: &'static str,
}

/// Checks the ASCII identifier rule, returning the reason on failure.
pub fn check_ident(s: &str) -> Result<(), &'static str> {
    let mut chars = s.chars();
    match chars.next() {
        None => return Err("identifier is empty"),
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        Some(c) if !c.is_ascii() => return Err("identifiers must be ASCII"),
        Some(_) => return Err("identifier must start with a letter or '_'"),
    }
    for c in chars {
        if !c.is_ascii() {
            return Err("identifiers must be ASCII");
        }
        if !(c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')) {
            return Err("identifier contains a character outside [A-Za-z0-9_.-]");
        }
    }
    Ok(())
}

macro_rules! ident_newtype {
    ($(#[$meta:meta])* $name:ident, $kind:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Result<Self, IdentError> {
                let value = value.into();
                match check_ident(&value) {
                    Ok(()) => Ok(Self(value)),
                    Err(reason) => Err(IdentError { kind: $kind, value, reason }),
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl TryFrom<&str> for $name {
            type Error = IdentError;

            fn try_from(value: &str) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }

        impl std::str::FromStr for $name {
            type Err = IdentError;

            fn from_str(value: &str) -> Result<Self, Self::Err> {
                Self::new(value)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(deserializer)?;
                Self::new(raw).map_err(serde::de::Error::custom)
            }
        }
    };
}

ident_newtype!(
    /// A hardware block that sends or receives flow messages.
    ComponentId,
    "component"
);
ident_newtype!(PlaceId, "place");
ident_newtype!(TransitionId, "transition");
ident_newtype!(FlowId, "flow");
ident_newtype!(
    /// A monitored communication link. Each link has its own monitor and
    /// event queue in the tracing module.
    LinkId,
    "link"
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_plain_ascii() {
        assert!(ComponentId::new("Cache_0").is_ok());
        assert!(LinkId::new("L07").is_ok());
        assert!(PlaceId::new("p1.a-b").is_ok());
    }

    #[test]
    fn rejects_unicode_and_bad_leading_chars() {
        let err = ComponentId::new("Cach\u{e9}").unwrap_err();
        assert_eq!(err.reason, "identifiers must be ASCII");
        assert!(ComponentId::new("9lives").is_err());
        assert!(ComponentId::new("").is_err());
        assert!(ComponentId::new("a:b").is_err());
    }

    #[test]
    fn orders_lexicographically() {
        let mut ids: Vec<TransitionId> = ["t2", "t10", "t1"]
            .iter()
            .map(|s| TransitionId::new(*s).unwrap())
            .collect();
        ids.sort();
        let names: Vec<&str> = ids.iter().map(|t| t.as_str()).collect();
        assert_eq!(names, ["t1", "t10", "t2"]);
    }

    #[test]
    fn deserialize_validates() {
        let ok: FlowId = serde_json::from_str("\"cpu0_rd\"").unwrap();
        assert_eq!(ok.as_str(), "cpu0_rd");
        assert!(serde_json::from_str::<FlowId>("\"bad id\"").is_err());
    }
}
