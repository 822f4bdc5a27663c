//! Payoff matrices and the declarative opinion-game models.
//!
//! Two base games cover the binary-opinion setting: `Bso`, where agents are
//! rewarded for agreeing, and `Bdo`, where they are rewarded for disagreeing.
//! Either can be extended with an equivocator opinion `E` sitting at
//! similarity `r` from `A` and `1 - r` from `B`, and with a preference bonus
//! `delta` added to every payoff of one opinion.
//!
//! In the agreement game a meeting pays the similarity of the two opinions;
//! in the disagreement game it pays their distance, `1 - similarity`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Short text tag naming one opinion (strategy) of a game.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpinionLabel(String);

impl OpinionLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidMatrix(format!(
                "opinion label {name:?} must be nonempty and contain no whitespace"
            )));
        }
        Ok(OpinionLabel(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OpinionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Square table `a[i][j]`: payoff to opinion `i` when it meets opinion `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    labels: Vec<OpinionLabel>,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    /// Builds a matrix from labels and rows. Requires `n >= 2`, a square
    /// table, finite entries and unique labels.
    pub fn new(labels: Vec<OpinionLabel>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::InvalidMatrix(format!(
                "need at least 2 opinions, got {n}"
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidMatrix(format!("duplicate label {l}")));
            }
        }
        if rows.len() != n {
            return Err(Error::InvalidMatrix(format!(
                "{n} labels but {} rows",
                rows.len()
            )));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} contains non-finite entry {v}"
                )));
            }
            entries.extend(row);
        }
        Ok(PayoffMatrix { labels, entries })
    }

    /// Convenience constructor from string labels.
    pub fn from_rows(labels: &[&str], rows: Vec<Vec<f64>>) -> Result<Self> {
        let labels = labels
            .iter()
            .map(|l| OpinionLabel::new(*l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, rows)
    }

    /// Number of opinions.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[OpinionLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.as_str() == label)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest minus smallest entry.
    pub fn spread(&self) -> f64 {
        let max = self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.entries.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Copy with `c` added to every entry of column `j`. The replicator flow
    /// is unchanged by this.
    pub fn with_column_shift(&self, j: usize, c: f64) -> PayoffMatrix {
        let mut out = self.clone();
        let n = self.n();
        for i in 0..n {
            out.entries[i * n + j] += c;
        }
        out
    }

    /// Copy with opinions reordered: new index `k` is old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<PayoffMatrix> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let rows = perm
            .iter()
            .map(|&p| perm.iter().map(|&q| self.get(p, q)).collect())
            .collect();
        PayoffMatrix::new(labels, rows)
    }

    /// Plain-text form: labels on the first line, then one row per line.
    /// Entries use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let mut s = self
            .labels
            .iter()
            .map(OpinionLabel::as_str)
            .collect::<Vec<_>>()
            .join(" ");
        s.push('\n');
        for i in 0..self.n() {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the plain-text form. Blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let labels = header
            .split_whitespace()
            .map(OpinionLabel::new)
            .collect::<Result<Vec<_>>>()?;
        let rows = lines
            .enumerate()
            .map(|(i, line)| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>().map_err(|_| {
                            Error::Parse(format!("row {i}: {tok:?} is not a number"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PayoffMatrix::new(labels, rows)
    }
}

impl fmt::Display for PayoffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The two coordination games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseGame {
    /// Same opinion rewarded.
    Bso,
    /// Different opinions rewarded.
    Bdo,
}

impl FromStr for BaseGame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bso" => Ok(BaseGame::Bso),
            "bdo" => Ok(BaseGame::Bdo),
            other => Err(Error::Parse(format!(
                "unknown base game {other:?} (expected bso or bdo)"
            ))),
        }
    }
}

impl fmt::Display for BaseGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseGame::Bso => "bso",
            BaseGame::Bdo => "bdo",
        })
    }
}

/// Bonus `delta` paid to `target` in every interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preference {
    pub target: String,
    pub delta: f64,
}

/// Declarative description of one opinion game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub base: BaseGame,
    /// Similarity of the equivocator to opinion `A`, in (0, 1).
    pub equivocator: Option<f64>,
    pub preference: Option<Preference>,
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value })
    }
}

impl ModelSpec {
    pub fn new(base: BaseGame) -> Self {
        ModelSpec {
            base,
            equivocator: None,
            preference: None,
        }
    }

    pub fn bso() -> Self {
        Self::new(BaseGame::Bso)
    }

    pub fn bdo() -> Self {
        Self::new(BaseGame::Bdo)
    }

    pub fn with_equivocator(mut self, r: f64) -> Self {
        self.equivocator = Some(r);
        self
    }

    pub fn with_preference(mut self, target: impl Into<String>, delta: f64) -> Self {
        self.preference = Some(Preference {
            target: target.into(),
            delta,
        });
        self
    }

    pub fn r(&self) -> Option<f64> {
        self.equivocator
    }

    pub fn delta(&self) -> Option<f64> {
        self.preference.as_ref().map(|p| p.delta)
    }

    pub fn labels(&self) -> Vec<&'static str> {
        if self.equivocator.is_some() {
            vec!["A", "B", "E"]
        } else {
            vec!["A", "B"]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.equivocator {
            check_unit("r", r)?;
        }
        if let Some(p) = &self.preference {
            check_unit("delta", p.delta)?;
            if !self.labels().contains(&p.target.as_str()) {
                return Err(Error::UnknownPreferenceTarget(p.target.clone()));
            }
        }
        Ok(())
    }

    /// Model name in the usual abbreviation, e.g. `BSOEP_A`.
    pub fn name(&self) -> String {
        let mut s = match self.base {
            BaseGame::Bso => "BSO".to_string(),
            BaseGame::Bdo => "BDO".to_string(),
        };
        if self.equivocator.is_some() {
            s.push('E');
        }
        if let Some(p) = &self.preference {
            s.push_str("P_");
            s.push_str(&p.target);
        }
        s
    }

    /// Parses the `key=value` config form. Keys: `base`, `r`, `delta`,
    /// `preferred` (defaults to `A` when `delta` is given).
    pub fn from_config(text: &str) -> Result<Self> {
        let mut base = None;
        let mut r = None;
        let mut delta = None;
        let mut preferred = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let value = value.trim();
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: {value:?} is not a number", lineno + 1)))
            };
            match key.trim() {
                "base" => base = Some(value.parse::<BaseGame>()?),
                "r" => r = Some(num()?),
                "delta" => delta = Some(num()?),
                "preferred" => preferred = Some(value.to_string()),
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let base = base.ok_or_else(|| Error::Parse("missing key `base`".into()))?;
        let preference = match (preferred, delta) {
            (None, None) => None,
            (Some(t), Some(d)) => Some(Preference { target: t, delta: d }),
            (None, Some(d)) => Some(Preference {
                target: "A".into(),
                delta: d,
            }),
            (Some(_), None) => {
                return Err(Error::Parse("`preferred` given without `delta`".into()))
            }
        };
        let spec = ModelSpec {
            base,
            equivocator: r,
            preference,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_config(&self) -> String {
        let mut s = format!("base={}\n", self.base);
        if let Some(r) = self.equivocator {
            s.push_str(&format!("r={r}\n"));
        }
        if let Some(p) = &self.preference {
            s.push_str(&format!("delta={}\npreferred={}\n", p.delta, p.target));
        }
        s
    }
}

/// Similarity between two of the opinions `A`, `B`, `E` for equivocator
/// parameter `r`: `S(A,B) = 0`, `S(E,A) = r`, `S(E,B) = 1 - r`, `S(X,X) = 1`.
pub fn similarity(r: f64, p: &str, q: &str) -> Result<f64> {
    check_unit("r", r)?;
    for l in [p, q] {
        if !matches!(l, "A" | "B" | "E") {
            return Err(Error::InvalidArgument(format!(
                "similarity is defined on A, B, E; got {l:?}"
            )));
        }
    }
    if p == q {
        return Ok(1.0);
    }
    Ok(match (p, q) {
        ("A", "B") | ("B", "A") => 0.0,
        ("E", "A") | ("A", "E") => r,
        _ => 1.0 - r,
    })
}

/// `1 - similarity`, written out so BDO entries carry `r` and `1 - r` exactly.
fn distance(r: f64, p: &str, q: &str) -> f64 {
    match (p, q) {
        _ if p == q => 0.0,
        ("A", "B") | ("B", "A") => 1.0,
        ("E", "A") | ("A", "E") => 1.0 - r,
        _ => r,
    }
}

/// Builds the payoff matrix of a model.
pub fn build(spec: &ModelSpec) -> Result<PayoffMatrix> {
    spec.validate()?;
    let labels = spec.labels();
    // r only matters for pairs involving E, so any valid value works without one.
    let r = spec.equivocator.unwrap_or(0.5);
    let mut rows = Vec::with_capacity(labels.len());
    for p in &labels {
        let mut row = Vec::with_capacity(labels.len());
        for q in &labels {
            row.push(match spec.base {
                BaseGame::Bso => similarity(r, p, q)?,
                BaseGame::Bdo => distance(r, p, q),
            });
        }
        if let Some(pref) = &spec.preference {
            if pref.target == *p {
                row.iter_mut().for_each(|v| *v += pref.delta);
            }
        }
        rows.push(row);
    }
    PayoffMatrix::from_rows(&labels, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_games() {
        assert_eq!(build(&ModelSpec::bso()).unwrap().rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(build(&ModelSpec::bdo()).unwrap().rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn preference_shifts_row() {
        let d = 0.3;
        let m = build(&ModelSpec::bso().with_preference("A", d)).unwrap();
        assert_eq!(m.rows(), vec![vec![1.0 + d, d], vec![0.0, 1.0]]);
        let m = build(&ModelSpec::bdo().with_preference("A", d)).unwrap();
        assert_eq!(m.rows(), vec![vec![d, 1.0 + d], vec![1.0, 0.0]]);
    }

    #[test]
    fn equivocator_games() {
        let r = 0.3;
        let m = build(&ModelSpec::bso().with_equivocator(r)).unwrap();
        assert_eq!(
            m.rows(),
            vec![vec![1.0, 0.0, r], vec![0.0, 1.0, 1.0 - r], vec![r, 1.0 - r, 1.0]]
        );
        let d = 0.2;
        let m = build(&ModelSpec::bso().with_equivocator(r).with_preference("A", d)).unwrap();
        assert_eq!(m.row(0), &[1.0 + d, d, r + d]);
        let m = build(&ModelSpec::bdo().with_equivocator(r).with_preference("A", d)).unwrap();
        assert_eq!(
            m.rows(),
            vec![
                vec![d, 1.0 + d, 1.0 - r + d],
                vec![1.0, 0.0, r],
                vec![1.0 - r, r, 0.0]
            ]
        );
        assert_eq!(m.labels().iter().map(|l| l.as_str()).collect::<Vec<_>>(), ["A", "B", "E"]);
    }

    #[test]
    fn out_of_range_parameters() {
        for spec in [
            ModelSpec::bso().with_equivocator(1.2),
            ModelSpec::bso().with_equivocator(0.0),
            ModelSpec::bdo().with_preference("A", 1.0),
            ModelSpec::bdo().with_preference("A", f64::NAN),
        ] {
            assert!(matches!(build(&spec), Err(Error::ParameterOutOfRange { .. })), "{spec:?}");
        }
        assert_eq!(
            build(&ModelSpec::bso().with_preference("E", 0.2)),
            Err(Error::UnknownPreferenceTarget("E".into()))
        );
    }

    #[test]
    fn similarity_values() {
        assert_eq!(similarity(0.3, "E", "A").unwrap(), 0.3);
        assert_eq!(similarity(0.3, "A", "B").unwrap(), 0.0);
        assert_eq!(similarity(0.3, "E", "E").unwrap(), 1.0);
        assert_eq!(similarity(0.3, "B", "E").unwrap(), 1.0 - 0.3);
        assert!(similarity(1.0, "A", "E").is_err());
        assert!(similarity(0.5, "A", "Z").is_err());
        for p in ["A", "B", "E"] {
            for q in ["A", "B", "E"] {
                assert_eq!(similarity(0.7, p, q), similarity(0.7, q, p));
            }
        }
    }

    #[test]
    fn matrix_validation() {
        assert!(PayoffMatrix::from_rows(&["A"], vec![vec![1.0]]).is_err());
        assert!(PayoffMatrix::from_rows(&["A", "A"], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(PayoffMatrix::from_rows(&["A", "B"], vec![vec![1.0], vec![0.0, 1.0]]).is_err());
        assert!(
            PayoffMatrix::from_rows(&["A", "B"], vec![vec![1.0, f64::INFINITY], vec![0.0, 1.0]])
                .is_err()
        );
    }

    #[test]
    fn text_format() {
        let m = PayoffMatrix::parse_text("# game\nX Y\n1 0.5\n-2 3e-1\n").unwrap();
        assert_eq!(m.rows(), vec![vec![1.0, 0.5], vec![-2.0, 0.3]]);
        assert_eq!(m.labels()[1].as_str(), "Y");
        assert!(PayoffMatrix::parse_text("").is_err());
        assert!(PayoffMatrix::parse_text("A B\n1 x\n0 1").is_err());
    }

    #[test]
    fn config_round_trip() {
        let spec = ModelSpec::bdo().with_equivocator(0.25).with_preference("A", 0.4);
        assert_eq!(ModelSpec::from_config(&spec.to_config()).unwrap(), spec);
        let s = ModelSpec::from_config("base = bso\nr=0.5\ndelta=0.3 # A implied\n").unwrap();
        assert_eq!(s.preference.unwrap().target, "A");
        assert!(ModelSpec::from_config("r=0.5").is_err());
        assert!(matches!(
            ModelSpec::from_config("base=bso\nr=1.5"),
            Err(Error::ParameterOutOfRange { .. })
        ));
    }

    #[test]
    fn names() {
        assert_eq!(ModelSpec::bso().with_equivocator(0.5).with_preference("A", 0.1).name(), "BSOEP_A");
        assert_eq!(ModelSpec::bdo().with_equivocator(0.5).name(), "BDOE");
    }

    #[test]
    fn permutation() {
        let m = build(&ModelSpec::bso().with_equivocator(0.3)).unwrap();
        let p = m.permuted(&[1, 0, 2]).unwrap();
        let q = build(&ModelSpec::bso().with_equivocator(0.7)).unwrap();
        for (a, b) in p.rows().iter().flatten().zip(q.rows().iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(m.permuted(&[0, 0, 1]).is_err());
    }
}
