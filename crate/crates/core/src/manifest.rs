//! Expectations manifest: expected values with per-entry tolerances.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::stepfn::StepFunction;

#[derive(Debug, Error, PartialEq)]
#[error("manifest line {line}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Approx,
    Above,
    Below,
}

impl FromStr for Relation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "approx" => Ok(Relation::Approx),
            "above" => Ok(Relation::Above),
            "below" => Ok(Relation::Below),
            other => Err(format!("unknown relation {other:?}")),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Approx => "approx",
            Relation::Above => "above",
            Relation::Below => "below",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub file: String,
    pub quantity: String,
    pub relation: Relation,
    pub value: f64,
    pub tolerance: f64,
}

impl Expectation {
    pub fn holds(&self, actual: f64) -> bool {
        match self.relation {
            Relation::Approx => (actual - self.value).abs() <= self.tolerance,
            Relation::Above => actual > self.value,
            Relation::Below => actual < self.value,
        }
    }
}

pub fn parse(text: &str) -> Result<Vec<Expectation>, ManifestError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ManifestError {
            line: idx + 1,
            message,
        };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(err(format!("expected 5 columns, found {}", cols.len())));
        }
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("{s:?} is not a number")))
        };
        out.push(Expectation {
            file: cols[0].to_string(),
            quantity: cols[1].to_string(),
            relation: cols[2].parse().map_err(err)?,
            value: number(cols[3])?,
            tolerance: number(cols[4])?,
        });
    }
    Ok(out)
}

/// Value of a manifest quantity (`n`, `coeff_sum`, `sup`, `c`) for `f`.
pub fn quantity(f: &StepFunction, quantity: &str) -> Option<f64> {
    match quantity {
        "n" => Some(f.n() as f64),
        "coeff_sum" => Some(f.coeff_sum()),
        "sup" => Some(f.unit_sup()),
        "c" => f.c_constant().ok(),
        _ => None,
    }
}

/// Computes `quantity` for the bundled list `file`; `None` when either is unknown.
pub fn measure(file: &str, q: &str) -> Option<f64> {
    let coeffs = crate::coeffs::parse(crate::assets::by_name(file)?).ok()?;
    quantity(&StepFunction::with_sign(coeffs, true).ok()?, q)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    #[serde(flatten)]
    pub expectation: Expectation,
    pub actual: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn new(expectation: Expectation, actual: Option<f64>) -> Self {
        let pass = actual.is_some_and(|a| expectation.holds(a));
        Check {
            expectation,
            actual,
            pass,
        }
    }
}

/// Evaluates every entry of the bundled manifest.
pub fn check_bundled() -> Result<Vec<Check>, ManifestError> {
    Ok(parse(crate::assets::EXPECTATIONS_MANIFEST)?
        .into_iter()
        .map(|e| {
            let actual = measure(&e.file, &e.quantity);
            Check::new(e, actual)
        })
        .collect())
}
