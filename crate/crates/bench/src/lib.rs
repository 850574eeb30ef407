//! Input generators shared by the benchmarks.

use cubekit_core::{Continent, MappedItem};

const COUNTRIES: [(&str, Continent); 8] = [
    ("JP", Continent::Asia),
    ("IN", Continent::Asia),
    ("FR", Continent::Europe),
    ("IT", Continent::Europe),
    ("NG", Continent::Africa),
    ("US", Continent::NorthAmerica),
    ("BR", Continent::SouthAmerica),
    ("AU", Continent::Oceania),
];

/// `n` items cycling through eight countries with `artifacts` artifacts each.
pub fn items(n: usize, artifacts: usize) -> Vec<MappedItem> {
    (0..n)
        .map(|i| {
            let (code, cont) = COUNTRIES[i % COUNTRIES.len()];
            let art = (i / COUNTRIES.len()) % artifacts.max(1);
            MappedItem::from_triple(format!("img{i}"), cont, code, format!("{code}-{art}"))
        })
        .collect()
}

/// Synthetic KB-JSONL dump: a root with a `fanout`-ary tree of category nodes
/// whose leaves carry a country.
pub fn synthetic_dump(lines: usize, fanout: usize) -> String {
    let codes = ["JP", "IN", "FR", "IT", "NG", "US", "BR", "AU"];
    let mut out = String::with_capacity(lines * 64);
    out.push_str("{\"id\":\"N0\",\"label\":\"root\"}\n");
    let internal = lines / (fanout + 1);
    for i in 1..lines {
        let parent = (i - 1) / fanout;
        if i <= internal {
            out.push_str(&format!(
                "{{\"id\":\"N{i}\",\"label\":\"cat{i}\",\"p279\":[\"N{parent}\"]}}\n"
            ));
        } else {
            let code = codes[i % codes.len()];
            out.push_str(&format!(
                "{{\"id\":\"N{i}\",\"label\":\"item{i}\",\"p31\":[\"N{parent}\"],\"p495\":[\"{code}\"]}}\n"
            ));
        }
    }
    out
}
