//! Observation models: how strategy profiles are drawn from a game.
//!
//! The global model mixes a uniform distribution on the equilibrium set
//! with a uniform distribution on its complement. The local model picks an
//! equilibrium uniformly and corrupts each player's strategy independently.
//! Arbitrary distributions over an enumerable profile space are supported
//! through [`PmfTable`].

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{
    enumerate_psne_capped, validate_profile, PolymatrixGame, ProfileSpace, PsneSet,
    DEFAULT_ENUMERATION_CAP,
};

/// Tolerance on `sum P(x) = 1` for user-supplied tables.
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// Weight `q` on the equilibrium set.
    Global { q: f64 },
    /// Per-player fidelity `q_i`.
    Local { q: Vec<f64> },
}

impl NoiseModel {
    pub fn local_uniform(players: usize, q: f64) -> Self {
        NoiseModel::Local {
            q: vec![q; players],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Global { .. } => "global",
            NoiseModel::Local { .. } => "local",
        }
    }
}

/// Ordered strategy profiles with their strategy counts. Strategies are
/// 0-indexed in memory and 1-indexed on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    counts: Vec<usize>,
    data: Vec<usize>,
}

impl Dataset {
    pub fn new(counts: Vec<usize>, profiles: Vec<Vec<usize>>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::InvalidInput(
                "a dataset needs at least one profile".into(),
            ));
        }
        for x in &profiles {
            validate_profile(x, &counts)?;
        }
        Ok(Dataset {
            data: profiles.concat(),
            counts,
        })
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn profile(&self, l: usize) -> &[usize] {
        let p = self.counts.len();
        &self.data[l * p..(l + 1) * p]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, usize> {
        self.data.chunks_exact(self.counts.len())
    }

    /// Unique profiles with their multiplicities, in first-seen order.
    pub fn compressed(&self) -> Vec<(&[usize], usize)> {
        let mut index: std::collections::HashMap<&[usize], usize> =
            std::collections::HashMap::new();
        let mut out: Vec<(&[usize], usize)> = Vec::new();
        for x in self.iter() {
            match index.get(x) {
                Some(&k) => out[k].1 += 1,
                None => {
                    index.insert(x, out.len());
                    out.push((x, 1));
                }
            }
        }
        out
    }

    /// CSV text: optional comment lines, the `# strategies` line, a header,
    /// then one 1-indexed row per profile.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let counts: Vec<_> = self.counts.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(out, "# strategies {}", counts.join(" "));
        let header: Vec<_> = (1..=self.num_players())
            .map(|i| format!("player_{i}"))
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for x in self.iter() {
            let row: Vec<_> = x.iter().map(|s| (s + 1).to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut counts: Option<Vec<usize>> = None;
        let mut header_seen = false;
        let mut rows = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let ln = k + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                let mut toks = c.split_whitespace();
                if toks.next() == Some("strategies") {
                    let parsed = toks
                        .map(|t| {
                            t.parse::<usize>().ok().filter(|&m| m > 0).ok_or_else(|| {
                                Error::parse(ln, format!("bad strategy count `{t}`"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    counts = Some(parsed);
                }
                continue;
            }
            let counts = counts
                .as_ref()
                .ok_or_else(|| Error::parse(ln, "missing `# strategies` line before data"))?;
            if !header_seen {
                header_seen = true;
                let cols = line.split(',').count();
                if cols != counts.len() {
                    return Err(Error::parse(
                        ln,
                        format!("header has {cols} columns, expected {}", counts.len()),
                    ));
                }
                continue;
            }
            let row = line
                .split(',')
                .enumerate()
                .map(|(col, t)| {
                    let s: usize = t.trim().parse().map_err(|_| Error::Cell {
                        row: ln,
                        column: col + 1,
                        message: format!("`{t}` is not a strategy"),
                    })?;
                    if s == 0 || col >= counts.len() || s > counts[col] {
                        return Err(Error::Cell {
                            row: ln,
                            column: col + 1,
                            message: format!("strategy `{t}` out of range"),
                        });
                    }
                    Ok(s - 1)
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != counts.len() {
                return Err(Error::parse(
                    ln,
                    format!("row has {} entries, expected {}", row.len(), counts.len()),
                ));
            }
            rows.push(row);
        }
        let counts = counts.ok_or_else(|| Error::parse(0, "missing `# strategies` line"))?;
        if rows.is_empty() {
            return Err(Error::parse(0, "dataset has no rows"));
        }
        Dataset::new(counts, rows)
    }
}

/// A probability table over an enumerable profile space.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    space: ProfileSpace,
    probs: Vec<f64>,
}

impl PmfTable {
    /// Validates non-negativity and normalization.
    pub fn new(counts: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let space = ProfileSpace::new(counts);
        let size = space.size_capped(DEFAULT_ENUMERATION_CAP)?;
        if probs.len() != size {
            return Err(Error::InvalidDistribution(format!(
                "expected {size} probabilities, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDistribution(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(PmfTable { space, probs })
    }

    /// Empirical frequencies of a dataset.
    pub fn empirical(data: &Dataset) -> Result<Self> {
        let space = ProfileSpace::new(data.strategy_counts().to_vec());
        let size = space.size_capped(DEFAULT_ENUMERATION_CAP)?;
        let mut probs = vec![0.0; size];
        for x in data.iter() {
            probs[space.encode(x)] += 1.0;
        }
        let n = data.len() as f64;
        probs.iter_mut().for_each(|v| *v /= n);
        Ok(PmfTable { space, probs })
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &[usize]) -> f64 {
        self.probs[self.space.encode(x)]
    }

    pub fn total_variation(&self, other: &PmfTable) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::InvalidInput("tables cover different spaces".into()));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// `n` i.i.d. draws by inverse CDF.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be at least 1".into()));
        }
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &v in &self.probs {
            acc += v;
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.space.counts().len();
        let mut data = Vec::with_capacity(n * p);
        let mut buf = vec![0; p];
        for _ in 0..n {
            let u = rng.random::<f64>() * acc;
            let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            self.space.decode_into(k, &mut buf);
            data.extend_from_slice(&buf);
        }
        Ok(Dataset {
            counts: self.space.counts().to_vec(),
            data,
        })
    }
}

/// A validated noise model bound to a game's equilibrium set.
#[derive(Debug, Clone)]
pub struct ObservationModel {
    counts: Vec<usize>,
    equilibria: PsneSet,
    space_size: usize,
    noise: NoiseModel,
    /// Lexicographic ranks of the equilibria, ascending.
    ranks: Vec<usize>,
}

impl ObservationModel {
    pub fn new(game: &PolymatrixGame, noise: NoiseModel) -> Result<Self> {
        let ne = enumerate_psne_capped(game, DEFAULT_ENUMERATION_CAP)?;
        Self::from_equilibria(game.strategy_counts().to_vec(), ne, noise)
    }

    pub fn from_equilibria(counts: Vec<usize>, ne: PsneSet, noise: NoiseModel) -> Result<Self> {
        let space = ProfileSpace::new(counts.clone());
        let space_size = space.size_capped(DEFAULT_ENUMERATION_CAP)?;
        if ne.is_empty() {
            return Err(Error::ModelUndefined(
                "the game has no pure-strategy Nash equilibrium".into(),
            ));
        }
        match &noise {
            NoiseModel::Global { q } => {
                let lower = ne.len() as f64 / space_size as f64;
                if !(*q >= lower && *q <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "global noise q = {q} must lie in [{lower}, 1]"
                    )));
                }
                if ne.len() == space_size && *q < 1.0 {
                    return Err(Error::ModelUndefined(
                        "every profile is an equilibrium; only q = 1 is defined".into(),
                    ));
                }
            }
            NoiseModel::Local { q } => {
                if q.len() != counts.len() {
                    return Err(Error::InvalidParameter(format!(
                        "local noise needs {} fidelities, got {}",
                        counts.len(),
                        q.len()
                    )));
                }
                if let Some(i) = counts.iter().position(|&m| m < 2) {
                    return Err(Error::ModelUndefined(format!(
                        "local noise needs at least two strategies; player {} has {}",
                        i + 1,
                        counts[i]
                    )));
                }
                if let Some((i, v)) = q.iter().enumerate().find(|(_, &v)| !(v > 0.5 && v <= 1.0)) {
                    return Err(Error::InvalidParameter(format!(
                        "local fidelity q_{} = {v} must lie in (0.5, 1]",
                        i + 1
                    )));
                }
            }
        }
        let ranks = ne.iter().map(|x| space.encode(x)).collect();
        Ok(ObservationModel {
            counts,
            equilibria: ne,
            space_size,
            noise,
            ranks,
        })
    }

    pub fn equilibria(&self) -> &PsneSet {
        &self.equilibria
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn pmf(&self, x: &[usize]) -> Result<f64> {
        validate_profile(x, &self.counts)?;
        Ok(self.pmf_unchecked(x))
    }

    fn pmf_unchecked(&self, x: &[usize]) -> f64 {
        let ne = self.equilibria.len() as f64;
        match &self.noise {
            NoiseModel::Global { q } => {
                if self.equilibria.contains(x) {
                    q / ne
                } else {
                    (1.0 - q) / (self.space_size as f64 - ne)
                }
            }
            NoiseModel::Local { q } => {
                let total: f64 = self
                    .equilibria
                    .iter()
                    .map(|y| {
                        (0..self.counts.len())
                            .map(|i| {
                                if x[i] == y[i] {
                                    q[i]
                                } else {
                                    (1.0 - q[i]) / (self.counts[i] - 1) as f64
                                }
                            })
                            .product::<f64>()
                    })
                    .sum();
                total / ne
            }
        }
    }

    pub fn pmf_table(&self) -> PmfTable {
        let space = ProfileSpace::new(self.counts.clone());
        let probs = space.iter().map(|x| self.pmf_unchecked(&x)).collect();
        PmfTable { space, probs }
    }

    /// `n` i.i.d. draws. Deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.counts.len();
        let space = ProfileSpace::new(self.counts.clone());
        let ne = self.equilibria.profiles();
        let mut data = Vec::with_capacity(n * p);
        let mut buf = vec![0; p];
        for _ in 0..n {
            match &self.noise {
                NoiseModel::Global { q } => {
                    if rng.random::<f64>() < *q {
                        let y = &ne[rng.random_range(0..ne.len())];
                        data.extend_from_slice(y);
                    } else {
                        let r = rng.random_range(0..self.space_size - ne.len());
                        space.decode_into(self.nth_non_equilibrium(r), &mut buf);
                        data.extend_from_slice(&buf);
                    }
                }
                NoiseModel::Local { q } => {
                    let y = &ne[rng.random_range(0..ne.len())];
                    for i in 0..p {
                        let s = if rng.random::<f64>() < q[i] {
                            y[i]
                        } else {
                            // uniform over the other m_i - 1 strategies
                            let r = rng.random_range(0..self.counts[i] - 1);
                            if r >= y[i] {
                                r + 1
                            } else {
                                r
                            }
                        };
                        data.push(s);
                    }
                }
            }
        }
        Ok(Dataset {
            counts: self.counts.clone(),
            data,
        })
    }

    /// Rank of the `r`-th profile (0-based) outside the equilibrium set.
    fn nth_non_equilibrium(&self, r: usize) -> usize {
        let mut idx = r;
        for &e in &self.ranks {
            if e <= idx {
                idx += 1;
            } else {
                break;
            }
        }
        idx
    }
}

/// Global mixture probability of `x`.
pub fn global_noise_pmf(game: &PolymatrixGame, q: f64, x: &[usize]) -> Result<f64> {
    ObservationModel::new(game, NoiseModel::Global { q })?.pmf(x)
}

/// Local corruption probability of `x`.
pub fn local_noise_pmf(game: &PolymatrixGame, q: &[f64], x: &[usize]) -> Result<f64> {
    ObservationModel::new(game, NoiseModel::Local { q: q.to_vec() })?.pmf(x)
}

pub fn sample_dataset(
    game: &PolymatrixGame,
    noise: NoiseModel,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    ObservationModel::new(game, noise)?.sample(n, seed)
}

/// True iff every equilibrium is strictly more likely than every
/// non-equilibrium profile.
pub fn check_observation_condition(pmf: &PmfTable, psne: &PsneSet) -> Result<bool> {
    let total: f64 = pmf.probs.iter().sum();
    if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    if psne.is_empty() {
        return Ok(false);
    }
    let mut min_ne = f64::INFINITY;
    let mut max_other = f64::NEG_INFINITY;
    for (k, x) in pmf.space.iter().enumerate() {
        let v = pmf.probs[k];
        if psne.contains(&x) {
            min_ne = min_ne.min(v);
        } else {
            max_other = max_other.max(v);
        }
    }
    Ok(min_ne > max_other)
}
