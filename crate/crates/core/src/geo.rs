//! Country and continent reference data.
//!
//! The table is a static ISO 3166-1 alpha-2 list with a six-continent
//! assignment. Countries spanning two continents carry one fixed assignment,
//! listed in the header of `data/countries.tsv`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const COUNTRY_TABLE: &str = include_str!("../data/countries.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Continent {
    Africa,
    Asia,
    Europe,
    #[serde(rename = "North America")]
    NorthAmerica,
    #[serde(rename = "South America")]
    SouthAmerica,
    Oceania,
}

impl Continent {
    pub const ALL: [Continent; 6] = [
        Continent::Africa,
        Continent::Asia,
        Continent::Europe,
        Continent::NorthAmerica,
        Continent::SouthAmerica,
        Continent::Oceania,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Continent::Africa => "Africa",
            Continent::Asia => "Asia",
            Continent::Europe => "Europe",
            Continent::NorthAmerica => "North America",
            Continent::SouthAmerica => "South America",
            Continent::Oceania => "Oceania",
        }
    }
}

impl fmt::Display for Continent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown continent `{0}`")]
pub struct UnknownContinent(pub String);

impl FromStr for Continent {
    type Err = UnknownContinent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .flat_map(char::to_lowercase)
            .collect();
        Continent::ALL
            .into_iter()
            .find(|c| c.as_str().replace(' ', "").to_lowercase() == norm)
            .ok_or_else(|| UnknownContinent(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Country {
    pub code: String,
    pub name: String,
    pub continent: Continent,
}

/// Lookup table from ISO code to display name and continent.
#[derive(Debug)]
pub struct CountryTable {
    rows: Vec<Country>,
    by_code: HashMap<String, usize>,
}

impl CountryTable {
    /// The table shipped with the crate.
    pub fn shipped() -> &'static CountryTable {
        static TABLE: OnceLock<CountryTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            CountryTable::parse(COUNTRY_TABLE).expect("shipped country table is well formed")
        })
    }

    fn parse(text: &str) -> Result<CountryTable, String> {
        let mut rows = Vec::new();
        let mut by_code = HashMap::new();
        let mut lines = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        // header
        lines.next();
        for line in lines {
            let mut cols = line.split('\t');
            let (Some(code), Some(name), Some(cont)) = (cols.next(), cols.next(), cols.next())
            else {
                return Err(format!("short row: {line}"));
            };
            let continent = cont.parse::<Continent>().map_err(|e| e.to_string())?;
            if by_code.insert(code.to_string(), rows.len()).is_some() {
                return Err(format!("duplicate code {code}"));
            }
            rows.push(Country {
                code: code.to_string(),
                name: name.to_string(),
                continent,
            });
        }
        Ok(CountryTable { rows, by_code })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, code: &str) -> Option<&Country> {
        self.by_code.get(code).map(|&i| &self.rows[i])
    }

    pub fn contains(&self, code: &str) -> bool {
        self.by_code.contains_key(code)
    }

    pub fn continent_of(&self, code: &str) -> Option<Continent> {
        self.get(code).map(|c| c.continent)
    }

    pub fn name_of(&self, code: &str) -> Option<&str> {
        self.get(code).map(|c| c.name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Country> {
        self.rows.iter()
    }
}
