use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Cultural concept an artifact or prompt belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Concept {
    Cuisine,
    Landmarks,
    Art,
}

impl Concept {
    pub const ALL: [Concept; 3] = [Concept::Cuisine, Concept::Landmarks, Concept::Art];

    pub fn as_str(self) -> &'static str {
        match self {
            Concept::Cuisine => "cuisine",
            Concept::Landmarks => "landmarks",
            Concept::Art => "art",
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} `{value}`")]
pub struct ParseEnumError {
    pub kind: &'static str,
    pub value: String,
}

impl FromStr for Concept {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cuisine" | "food" => Ok(Concept::Cuisine),
            "landmarks" | "landmark" => Ok(Concept::Landmarks),
            "art" | "arts" => Ok(Concept::Art),
            _ => Err(ParseEnumError {
                kind: "concept",
                value: s.to_string(),
            }),
        }
    }
}

/// Which art subtree an art artifact was reached from; selects the prompt template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtSubkind {
    Clothing,
    Painting,
    Performance,
}

impl ArtSubkind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtSubkind::Clothing => "clothing",
            ArtSubkind::Painting => "painting",
            ArtSubkind::Performance => "performance",
        }
    }
}

impl fmt::Display for ArtSubkind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArtSubkind {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clothing" => Ok(ArtSubkind::Clothing),
            "painting" => Ok(ArtSubkind::Painting),
            "performance" => Ok(ArtSubkind::Performance),
            _ => Err(ParseEnumError {
                kind: "art subkind",
                value: s.to_string(),
            }),
        }
    }
}
