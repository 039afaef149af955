//! The projection file format.
//!
//! ```json
//! { "l": 2, "N": 16, "r": 1,
//!   "entries": [[ { "scalar": [1, 0],
//!                   "compact": [ { "leg": 1, "rows": [[0, 0, -1, 0]] } ] } ]] }
//! ```
//!
//! Each compact block lists its non-zero entries as `[row, col, re, im]`.
//! Legs that are absent are zero.

use qlens_core::linalg::SparseMatrix;
use qlens_core::modules::{ProjectionRep, UnitizedElement};
use qlens_core::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionFile {
    pub l: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub r: usize,
    pub entries: Vec<Vec<EntryFile>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub scalar: [f64; 2],
    #[serde(default)]
    pub compact: Vec<LegFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegFile {
    pub leg: usize,
    pub rows: Vec<(usize, usize, f64, f64)>,
}

impl ProjectionFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_projection(&self) -> Result<ProjectionRep, CliError> {
        if self.l == 0 || self.n == 0 {
            return Err(CliError::Format("l and N must be positive".into()));
        }
        if self.entries.len() != self.r || self.entries.iter().any(|row| row.len() != self.r) {
            return Err(CliError::Format(format!("entries must form an {0} x {0} array", self.r)));
        }
        let mut out = Vec::with_capacity(self.r * self.r);
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let mut triplets: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); self.l as usize];
                for leg in &e.compact {
                    if !(1..=self.l as usize).contains(&leg.leg) {
                        return Err(CliError::Format(format!(
                            "entry ({i}, {j}): leg {} out of 1..={}",
                            leg.leg, self.l
                        )));
                    }
                    for &(a, b, re, im) in &leg.rows {
                        if a >= self.n || b >= self.n {
                            return Err(CliError::Format(format!(
                                "entry ({i}, {j}), leg {}: index ({a}, {b}) outside N = {}",
                                leg.leg, self.n
                            )));
                        }
                        triplets[leg.leg - 1].push((a, b, C64::new(re, im)));
                    }
                }
                let compact = triplets.into_iter().map(|t| SparseMatrix::from_triplets(self.n, self.n, t)).collect();
                out.push(UnitizedElement::new(C64::new(e.scalar[0], e.scalar[1]), compact)?);
            }
        }
        Ok(ProjectionRep::new(self.l, self.n, self.r, out)?)
    }

    pub fn from_projection(p: &ProjectionRep) -> Self {
        let entries = (0..p.r())
            .map(|i| {
                (0..p.r())
                    .map(|j| {
                        let e = p.get(i, j);
                        let compact = e
                            .compact
                            .iter()
                            .enumerate()
                            .filter(|(_, m)| m.nnz() > 0)
                            .map(|(s, m)| LegFile {
                                leg: s + 1,
                                rows: m.entries().map(|(a, b, v)| (a, b, v.re, v.im)).collect(),
                            })
                            .collect();
                        EntryFile { scalar: [e.scalar.re, e.scalar.im], compact }
                    })
                    .collect()
            })
            .collect();
        ProjectionFile { l: p.l(), n: p.n(), r: p.r(), entries }
    }
}
