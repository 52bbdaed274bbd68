//! Value domains for holes and reachability inputs, and the domains file format.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    Range { lo: i64, hi: i64 },
    /// Sorted, deduplicated.
    Set { values: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("empty range {0}..{1}")]
    EmptyRange(i64, i64),
    #[error("empty value set")]
    EmptySet,
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("duplicate domain for `{0}`")]
    Duplicate(String),
}

impl Domain {
    pub fn range(lo: i64, hi: i64) -> Result<Domain, DomainError> {
        if lo > hi {
            Err(DomainError::EmptyRange(lo, hi))
        } else {
            Ok(Domain::Range { lo, hi })
        }
    }

    pub fn set(values: impl IntoIterator<Item = i64>) -> Result<Domain, DomainError> {
        let mut values: Vec<i64> = values.into_iter().collect();
        values.sort_unstable();
        values.dedup();
        if values.is_empty() {
            Err(DomainError::EmptySet)
        } else {
            Ok(Domain::Set { values })
        }
    }

    pub fn lo(&self) -> i64 {
        match self {
            Domain::Range { lo, .. } => *lo,
            Domain::Set { values } => values[0],
        }
    }

    pub fn hi(&self) -> i64 {
        match self {
            Domain::Range { hi, .. } => *hi,
            Domain::Set { values } => *values.last().unwrap(),
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        match self {
            Domain::Range { lo, hi } => (*lo..=*hi).contains(&v),
            Domain::Set { values } => values.binary_search(&v).is_ok(),
        }
    }

    pub fn size(&self) -> u128 {
        match self {
            Domain::Range { lo, hi } => (*hi as i128 - *lo as i128 + 1) as u128,
            Domain::Set { values } => values.len() as u128,
        }
    }

    /// Members in ascending order.
    pub fn values(&self) -> Box<dyn Iterator<Item = i64> + '_> {
        match self {
            Domain::Range { lo, hi } => Box::new(*lo..=*hi),
            Domain::Set { values } => Box::new(values.iter().copied()),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Range { lo, hi } => write!(f, "{lo}..{hi}"),
            Domain::Set { values } => {
                let vs: Vec<String> = values.iter().map(i64::to_string).collect();
                write!(f, "{{{}}}", vs.join(","))
            }
        }
    }
}

/// Ordered `name -> domain` map; order is the parameter order used by the solver.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Domains(pub Vec<(String, Domain)>);

impl Domains {
    pub fn get(&self, name: &str) -> Option<&Domain> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(n, _)| n.as_str())
    }

    pub fn to_map(&self) -> BTreeMap<String, Domain> {
        self.0.iter().cloned().collect()
    }

    /// Parses lines `name: lo..hi` or `name: {a,b,c}`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Domains, DomainError> {
        let mut out: Vec<(String, Domain)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |m: &str| DomainError::Syntax(lineno, m.to_string());
            let (name, spec) = line.split_once(':').ok_or_else(|| syntax("expected `name: domain`"))?;
            let name = name.trim().to_string();
            let spec = spec.trim();
            let int = |s: &str| s.trim().parse::<i64>().map_err(|_| syntax(&format!("bad integer `{}`", s.trim())));
            let dom = if let Some(inner) = spec.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
                let vals = inner.split(',').filter(|s| !s.trim().is_empty()).map(int).collect::<Result<Vec<_>, _>>()?;
                Domain::set(vals)?
            } else if let Some((lo, hi)) = spec.split_once("..") {
                Domain::range(int(lo)?, int(hi)?)?
            } else {
                return Err(syntax("expected `lo..hi` or `{a,b,...}`"));
            };
            if out.iter().any(|(n, _)| *n == name) {
                return Err(DomainError::Duplicate(name));
            }
            out.push((name, dom));
        }
        Ok(Domains(out))
    }
}

impl fmt::Display for Domains {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, d) in &self.0 {
            writeln!(f, "{n}: {d}")?;
        }
        Ok(())
    }
}
