//! Mapped-items files: CSV with header
//! `image_id,template_index,seed,continent,country,artifact_id`, or JSON Lines
//! with the same fields (selected by a `.jsonl` extension).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::PipelineError;
use crate::geo::{Continent, CountryTable};
use crate::item::MappedItem;

#[derive(Deserialize)]
struct RawRow {
    image_id: String,
    template_index: usize,
    seed: u64,
    continent: String,
    country: String,
    artifact_id: String,
}

fn validate(row: RawRow, row_no: usize) -> Result<MappedItem, PipelineError> {
    let table = CountryTable::shipped();
    let continent: Continent = row
        .continent
        .parse()
        .map_err(|e| PipelineError::input(row_no, format!("{e}")))?;
    let expected = table.continent_of(&row.country).ok_or_else(|| {
        PipelineError::input(row_no, format!("unknown country `{}`", row.country))
    })?;
    if expected != continent {
        return Err(PipelineError::input(
            row_no,
            format!(
                "continent `{continent}` does not match country `{}` ({expected})",
                row.country
            ),
        ));
    }
    if row.image_id.is_empty() || row.artifact_id.is_empty() {
        return Err(PipelineError::input(
            row_no,
            "empty image_id or artifact_id",
        ));
    }
    Ok(MappedItem {
        image_id: row.image_id,
        template_index: row.template_index,
        seed: row.seed,
        continent,
        country: row.country,
        artifact_id: row.artifact_id,
    })
}

pub fn read_mapped_csv<R: Read>(reader: R) -> Result<Vec<MappedItem>, PipelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    rdr.deserialize::<RawRow>()
        .enumerate()
        .map(|(idx, row)| {
            let row = row.map_err(|e| PipelineError::input(idx + 1, e.to_string()))?;
            validate(row, idx + 1)
        })
        .collect()
}

pub fn read_mapped_jsonl<R: Read>(reader: R) -> Result<Vec<MappedItem>, PipelineError> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: RawRow = serde_json::from_str(&line)
            .map_err(|e| PipelineError::input(idx + 1, e.to_string()))?;
        out.push(validate(row, idx + 1)?);
    }
    Ok(out)
}

pub fn read_mapped(path: &Path) -> Result<Vec<MappedItem>, PipelineError> {
    let file = std::fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        read_mapped_jsonl(file)
    } else {
        read_mapped_csv(file)
    }
}

pub fn write_mapped_csv<W: Write>(writer: W, items: &[MappedItem]) -> Result<(), PipelineError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "image_id",
        "template_index",
        "seed",
        "continent",
        "country",
        "artifact_id",
    ])?;
    for item in items {
        wtr.write_record([
            item.image_id.as_str(),
            &item.template_index.to_string(),
            &item.seed.to_string(),
            item.continent.as_str(),
            &item.country,
            &item.artifact_id,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
