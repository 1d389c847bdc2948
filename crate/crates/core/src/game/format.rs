//! Plain-text game files.
//!
//! ```text
//! # comment
//! players 2
//! strategies 2 3
//! individual 1 0.5 -1
//! individual 2 0 0 0
//! edge 1 2
//! 1 0 0
//! 0 1 0
//! ```
//!
//! Players and strategies are 1-indexed. An `edge i j` block holds `m_i`
//! rows of `m_j` values. A line reading `diagnostics` ends the game section;
//! everything after it is returned untouched by [`parse_game_sections`].

use std::fmt::{self, Write as _};

use super::{GameBuilder, PolymatrixGame};
use crate::error::{Error, Result};

/// Shortest decimal that parses back to exactly `v`.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl fmt::Display for PolymatrixGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "players {}", self.num_players())?;
        write!(out, "strategies")?;
        for m in self.strategy_counts() {
            write!(out, " {m}")?;
        }
        writeln!(out)?;
        for i in 0..self.num_players() {
            write!(out, "individual {}", i + 1)?;
            for &v in self.individual(i) {
                write!(out, " {}", format_real(v))?;
            }
            writeln!(out)?;
        }
        for i in 0..self.num_players() {
            for e in self.incoming(i) {
                writeln!(out, "edge {} {}", i + 1, e.source + 1)?;
                let mj = self.strategy_counts()[e.source];
                for row in e.payoffs.chunks(mj) {
                    let cells: Vec<_> = row.iter().map(|&v| format_real(v)).collect();
                    writeln!(out, "{}", cells.join(" "))?;
                }
            }
        }
        f.write_str(&out)
    }
}

pub fn parse_game(text: &str) -> Result<PolymatrixGame> {
    let (game, rest) = parse_game_sections(text)?;
    if let Some((line, _)) = rest.first() {
        return Err(Error::parse(*line, "unexpected diagnostics section"));
    }
    Ok(game)
}

/// Parses the game section and returns the remaining numbered lines that
/// follow a `diagnostics` marker.
pub fn parse_game_sections(text: &str) -> Result<(PolymatrixGame, Vec<(usize, &str)>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty game file"))?;
    let p: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["players", n] => parse_num(ln, n)?,
        _ => return Err(Error::parse(ln, "expected `players <p>`")),
    };
    let (ln, strat) = lines
        .next()
        .ok_or_else(|| Error::parse(ln, "missing `strategies` line"))?;
    let mut toks = strat.split_whitespace();
    if toks.next() != Some("strategies") {
        return Err(Error::parse(ln, "expected `strategies m_1 ... m_p`"));
    }
    let counts = toks
        .map(|t| parse_num(ln, t))
        .collect::<Result<Vec<usize>>>()?;
    if counts.len() != p {
        return Err(Error::parse(
            ln,
            format!("expected {p} strategy counts, got {}", counts.len()),
        ));
    }
    let mut b = GameBuilder::new(counts.clone()).map_err(|e| Error::parse(ln, e.to_string()))?;
    let mut seen_edges = std::collections::HashSet::new();

    let mut rest = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("individual") => {
                let i = parse_player(ln, toks.next(), p)?;
                let vals = toks
                    .map(|t| parse_real(ln, t))
                    .collect::<Result<Vec<_>>>()?;
                b.set_individual(i, vals)
                    .map_err(|e| Error::parse(ln, e.to_string()))?;
            }
            Some("edge") => {
                let i = parse_player(ln, toks.next(), p)?;
                let j = parse_player(ln, toks.next(), p)?;
                if toks.next().is_some() {
                    return Err(Error::parse(ln, "trailing tokens after `edge i j`"));
                }
                if !seen_edges.insert((i, j)) {
                    return Err(Error::parse(
                        ln,
                        format!("duplicate edge {} {}", i + 1, j + 1),
                    ));
                }
                let mut rows = Vec::with_capacity(counts[i]);
                for _ in 0..counts[i] {
                    let (rl, row) = lines
                        .next()
                        .ok_or_else(|| Error::parse(ln, "edge block ended early"))?;
                    let vals = row
                        .split_whitespace()
                        .map(|t| parse_real(rl, t))
                        .collect::<Result<Vec<_>>>()?;
                    if vals.len() != counts[j] {
                        return Err(Error::parse(
                            rl,
                            format!("expected {} values, got {}", counts[j], vals.len()),
                        ));
                    }
                    rows.push(vals);
                }
                b.set_edge(i, j, &rows)
                    .map_err(|e| Error::parse(ln, e.to_string()))?;
            }
            Some("diagnostics") => {
                rest.extend(lines.by_ref());
                break;
            }
            _ => return Err(Error::parse(ln, format!("unrecognized line `{line}`"))),
        }
    }
    Ok((b.build()?, rest))
}

fn parse_num(line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("`{tok}` is not a non-negative integer")))
}

fn parse_real(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("`{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("`{tok}` is not finite")));
    }
    Ok(v)
}

fn parse_player(line: usize, tok: Option<&str>, p: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::parse(line, "missing player index"))?;
    let i = parse_num(line, tok)?;
    if i == 0 || i > p {
        return Err(Error::parse(
            line,
            format!("player {i} out of range 1..={p}"),
        ));
    }
    Ok(i - 1)
}
