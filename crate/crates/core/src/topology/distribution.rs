//! Discrete distributions for node degrees and edge weights.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;
const FILE_RENORMALIZE_TOLERANCE: f64 = 0.01;

/// The synthetic heavy-tailed degree distribution shipped with the crate.
pub const BUNDLED_DEGREE_FILE: &str = include_str!("../../data/degree_distribution.txt");

/// Cumulative-probability sampler over a finite support.
#[derive(Debug, Clone, PartialEq)]
#[derive(Default)]
struct Cumulative(Vec<f64>);

impl Cumulative {
    fn new(probabilities: impl Iterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        Cumulative(
            probabilities
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect(),
        )
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.0.last().expect("non-empty support");
        let u: f64 = rng.gen::<f64>() * total;
        self.0
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.0.len() - 1)
    }
}

fn check_probabilities(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidDistribution(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Distribution of the number of intra-domain neighbours of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    entries: Vec<(usize, f64)>,
    cumulative: Cumulative,
}

impl DegreeDistribution {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.iter().any(|&(d, _)| d == 0) {
            return Err(Error::InvalidDistribution("degrees must be >= 1".into()));
        }
        let probs: Vec<f64> = entries.iter().map(|e| e.1).collect();
        check_probabilities(&probs)?;
        let cumulative = Cumulative::new(probs.into_iter());
        Ok(DegreeDistribution {
            entries,
            cumulative,
        })
    }

    /// Every node gets degree `degree`.
    pub fn constant(degree: usize) -> Result<Self> {
        Self::new(vec![(degree, 1.0)])
    }

    /// Parses the `degree probability` text format.
    ///
    /// Blank lines and `#` comments are ignored. Probabilities that sum to
    /// within 1% of one are renormalized; anything further off is rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("degree file line {}: {raw:?}", lineno + 1));
            let mut fields = line.split_whitespace();
            let degree: usize = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let prob: f64 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if fields.next().is_some() {
                return Err(bad());
            }
            entries.push((degree, prob));
        }
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        if entries.is_empty() || (sum - 1.0).abs() > FILE_RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "degree file probabilities sum to {sum}, not within 1% of 1"
            )));
        }
        for e in &mut entries {
            e.1 /= sum;
        }
        Self::new(entries)
    }

    /// The distribution bundled with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_DEGREE_FILE).expect("bundled degree file is valid")
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.entries[self.cumulative.sample_index(rng)].0
    }
}

/// Distribution of link weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightTable", into = "WeightTable")]
pub struct WeightDistribution {
    entries: Vec<(f64, f64)>,
    #[serde(skip)]
    cumulative: Cumulative,
}

/// Serialized form: parallel `values` / `probabilities` arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct WeightTable {
    values: Vec<f64>,
    probabilities: Vec<f64>,
}

impl TryFrom<WeightTable> for WeightDistribution {
    type Error = Error;

    fn try_from(t: WeightTable) -> Result<Self> {
        if t.values.len() != t.probabilities.len() {
            return Err(Error::InvalidDistribution(
                "values and probabilities differ in length".into(),
            ));
        }
        Self::new(t.values.into_iter().zip(t.probabilities).collect())
    }
}

impl From<WeightDistribution> for WeightTable {
    fn from(w: WeightDistribution) -> Self {
        WeightTable {
            values: w.entries.iter().map(|e| e.0).collect(),
            probabilities: w.entries.iter().map(|e| e.1).collect(),
        }
    }
}


impl WeightDistribution {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(&(w, _)) = entries.iter().find(|e| !(e.0 > 0.0 && e.0.is_finite())) {
            return Err(Error::InvalidDistribution(format!(
                "weight {w} is not a positive real"
            )));
        }
        let probs: Vec<f64> = entries.iter().map(|e| e.1).collect();
        check_probabilities(&probs)?;
        let cumulative = Cumulative::new(probs.into_iter());
        Ok(WeightDistribution {
            entries,
            cumulative,
        })
    }

    /// Weights {1, 2, 5, 8, 10, 12} with probabilities {.1, .1, .1, .3, .2, .2}.
    pub fn evaluation_default() -> Self {
        Self::new(vec![
            (1.0, 0.1),
            (2.0, 0.1),
            (5.0, 0.1),
            (8.0, 0.3),
            (10.0, 0.2),
            (12.0, 0.2),
        ])
        .expect("default weights are valid")
    }

    pub fn constant(weight: f64) -> Result<Self> {
        Self::new(vec![(weight, 1.0)])
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn contains(&self, weight: f64) -> bool {
        self.entries.iter().any(|e| e.0 == weight)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.entries[self.cumulative.sample_index(rng)].0
    }
}
