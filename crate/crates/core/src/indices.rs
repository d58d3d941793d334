//! Community structure validation indices.
//!
//! UCSV is the share of the test family rejected at level alpha; WCSV weights
//! each rejection by `(alpha - p_adj) / alpha`. UCV and WCV restrict the same
//! computation to the `q` tests involving a single community.
//!
//! For directed graphs the per-community indices use the within test plus
//! the `q - 1` between tests in the `r -> s` orientation, keeping `q` as the
//! denominator.

use std::fmt::Write as _;

use serde::Serialize;

use crate::enrichment::{enrichment_matrix, EnrichmentMatrix, EnrichmentResult};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Significance level, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::AlphaOutOfRange(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    fn rejects(self, adj_p: f64) -> bool {
        adj_p <= self.0
    }

    fn weight(self, adj_p: f64) -> f64 {
        if self.rejects(adj_p) {
            (self.0 - adj_p) / self.0
        } else {
            0.0
        }
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha(0.05)
    }
}

fn mean_over<'a>(tests: impl Iterator<Item = &'a EnrichmentResult>, denom: usize, f: impl Fn(f64) -> f64) -> f64 {
    if denom == 0 {
        return 0.0;
    }
    tests.map(|t| f(t.adj_p)).sum::<f64>() / denom as f64
}

pub fn ucsv(matrix: &EnrichmentMatrix, alpha: Alpha) -> f64 {
    mean_over(matrix.results.iter(), matrix.len(), |p| f64::from(u8::from(alpha.rejects(p))))
}

pub fn wcsv(matrix: &EnrichmentMatrix, alpha: Alpha) -> f64 {
    mean_over(matrix.results.iter(), matrix.len(), |p| alpha.weight(p))
}

pub fn ucv(matrix: &EnrichmentMatrix, r: usize, alpha: Alpha) -> f64 {
    mean_over(matrix.tests_for(r), matrix.q, |p| f64::from(u8::from(alpha.rejects(p))))
}

pub fn wcv(matrix: &EnrichmentMatrix, r: usize, alpha: Alpha) -> f64 {
    mean_over(matrix.tests_for(r), matrix.q, |p| alpha.weight(p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityIndex {
    pub id: usize,
    pub size: usize,
    pub ucv: f64,
    pub wcv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvReport {
    pub alpha: Alpha,
    pub ucsv: f64,
    pub wcsv: f64,
    pub communities: Vec<CommunityIndex>,
    pub matrix: EnrichmentMatrix,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema_version: u32,
    alpha: Alpha,
    ucsv: f64,
    wcsv: f64,
    communities: &'a [CommunityIndex],
    tests: &'a [EnrichmentResult],
}

impl CsvReport {
    pub fn to_json(&self) -> String {
        let body = ReportJson {
            schema_version: REPORT_SCHEMA_VERSION,
            alpha: self.alpha,
            ucsv: self.ucsv,
            wcsv: self.wcsv,
            communities: &self.communities,
            tests: &self.matrix.results,
        };
        let mut s = serde_json::to_string_pretty(&body).expect("report is always serialisable");
        s.push('\n');
        s
    }

    /// Tab-separated test table preceded by `#` comment lines carrying the
    /// summary and per-community indices.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={REPORT_SCHEMA_VERSION}");
        let _ = writeln!(out, "# alpha={}\tucsv={}\twcsv={}", self.alpha.get(), self.ucsv, self.wcsv);
        let _ = writeln!(out, "# community\tid\tsize\tucv\twcv");
        for c in &self.communities {
            let _ = writeln!(out, "# community\t{}\t{}\t{}\t{}", c.id, c.size, c.ucv, c.wcv);
        }
        out.push_str("r\ts\tdirection\tn_obs\tmu0\traw_p\tadj_p\tdegenerate\n");
        for t in &self.matrix.results {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.r,
                t.s,
                t.direction.as_str(),
                t.n_obs,
                t.mu0,
                t.raw_p,
                t.adj_p,
                t.degenerate
            );
        }
        out
    }
}

pub fn report_from_matrix(matrix: EnrichmentMatrix, sizes: &[usize], alpha: Alpha) -> CsvReport {
    let communities = (0..matrix.q)
        .map(|r| CommunityIndex {
            id: r,
            size: sizes[r],
            ucv: ucv(&matrix, r, alpha),
            wcv: wcv(&matrix, r, alpha),
        })
        .collect();
    CsvReport {
        alpha,
        ucsv: ucsv(&matrix, alpha),
        wcsv: wcsv(&matrix, alpha),
        communities,
        matrix,
    }
}

/// Runs the enrichment family and derives every index.
pub fn csv_report(graph: &Graph, partition: &Partition, alpha: Alpha) -> Result<CsvReport> {
    let matrix = enrichment_matrix(graph, partition)?;
    Ok(report_from_matrix(matrix, &partition.sizes(), alpha))
}
