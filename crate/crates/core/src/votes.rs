//! Roll-call ingestion: map raw vote codes to three strategies
//! (1 = yes, 2 = abstain, 3 = no).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::observation::Dataset;

/// Strategy used for abstentions, 1-indexed.
pub const ABSTAIN: usize = 2;

/// A total map from source vote codes to strategies in `{1, 2, 3}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteMappingRule {
    name: String,
    map: BTreeMap<String, usize>,
}

impl VoteMappingRule {
    pub fn new(name: impl Into<String>, pairs: &[(&str, usize)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(code, s) in pairs {
            if !(1..=3).contains(&s) {
                return Err(Error::InvalidParameter(format!(
                    "code `{code}` maps to {s}, outside 1..=3"
                )));
            }
            if map.insert(code.trim().to_string(), s).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "code `{code}` mapped twice"
                )));
            }
        }
        Ok(VoteMappingRule {
            name: name.into(),
            map,
        })
    }

    /// Majority codes 1, 3, 4, 5 are yes; concurrences 6, 7, 8 are
    /// abstentions; code 2 (dissent) is no.
    pub fn supreme_court() -> Self {
        Self::new(
            "supreme-court",
            &[
                ("1", 1),
                ("3", 1),
                ("4", 1),
                ("5", 1),
                ("6", 2),
                ("7", 2),
                ("8", 2),
                ("2", 3),
            ],
        )
        .unwrap()
    }

    pub fn senate() -> Self {
        Self::new(
            "senate",
            &[("Yea", 1), ("Not Voting", 2), ("Present", 2), ("Nay", 3)],
        )
        .unwrap()
    }

    pub fn un() -> Self {
        Self::new("un", &[("1", 1), ("2", 2), ("3", 3)]).unwrap()
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "supreme-court" => Ok(Self::supreme_court()),
            "senate" => Ok(Self::senate()),
            "un" => Ok(Self::un()),
            other => Err(Error::InvalidParameter(format!(
                "unknown vote rule `{other}`"
            ))),
        }
    }

    /// Parses `code = strategy` lines; `#` starts a comment.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (code, s) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(k + 1, "expected `code = strategy`"))?;
            let s: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::parse(k + 1, format!("bad strategy `{}`", s.trim())))?;
            pairs.push((code.trim().to_string(), s));
        }
        let borrowed: Vec<(&str, usize)> = pairs.iter().map(|(c, s)| (c.as_str(), *s)).collect();
        Self::new(name, &borrowed)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Maps a code to a 1-indexed strategy.
    pub fn get(&self, code: &str) -> Option<usize> {
        self.map.get(code.trim()).copied()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOptions {
    /// Treat empty and missing cells as abstentions instead of rejecting them.
    pub fill_abstain: bool,
}

/// Ingested votes with the column names from the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteTable {
    pub players: Vec<String>,
    pub dataset: Dataset,
    /// Cells that were filled as abstentions.
    pub filled: usize,
}

/// Reads a CSV with a header row of player names and one row per vote.
/// Lines starting with `#` are ignored. Errors name the 1-based file line
/// and column.
pub fn ingest_votes(
    text: &str,
    rule: &VoteMappingRule,
    options: IngestOptions,
) -> Result<VoteTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let players: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(csv_line(&e), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if players.is_empty() || players.iter().all(String::is_empty) {
        return Err(Error::parse(1, "missing header row"));
    }
    let p = players.len();
    let mut rows = Vec::new();
    let mut filled = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(csv_line(&e), e.to_string()))?;
        let line = record.position().map_or(0, |pos| pos.line() as usize);
        if record.len() > p {
            return Err(Error::Cell {
                row: line,
                column: p + 1,
                message: format!("row has {} cells, header has {p}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(p);
        for col in 0..p {
            let cell = record.get(col).unwrap_or("");
            let s = if cell.is_empty() {
                if !options.fill_abstain {
                    return Err(Error::Cell {
                        row: line,
                        column: col + 1,
                        message: if col < record.len() {
                            "empty cell".into()
                        } else {
                            format!("row has {} cells, header has {p}", record.len())
                        },
                    });
                }
                filled += 1;
                ABSTAIN
            } else {
                rule.get(cell).ok_or_else(|| Error::Cell {
                    row: line,
                    column: col + 1,
                    message: format!("code `{cell}` is not covered by rule `{}`", rule.name),
                })?
            };
            row.push(s - 1);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(0, "no vote rows"));
    }
    Ok(VoteTable {
        players,
        dataset: Dataset::new(vec![3; p], rows)?,
        filled,
    })
}

fn csv_line(e: &csv::Error) -> usize {
    e.position().map_or(0, |p| p.line() as usize)
}
