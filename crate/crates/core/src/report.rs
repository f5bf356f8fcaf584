//! Side-by-side table of exact optima, strategy worst cases and bounds.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, Factor};
use crate::channel::GameConfig;
use crate::engine::{default_round_cap, worst_case_rounds, DEFAULT_ENUMERATION_BUDGET};
use crate::error::{Error, Result};
use crate::oracle::{exact_optimal_rounds, OracleLimits};
use crate::strategies::{LinearScan, Strategy, TreeSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Flag {
    /// Some claimed bound is larger than the exact optimum.
    #[serde(rename = "CLAIM_EXCEEDS_OPT")]
    ClaimExceedsOpt,
    /// The information-theoretic bound is larger than the exact optimum.
    #[serde(rename = "LB_VIOLATION")]
    LbViolation,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flag::ClaimExceedsOpt => "CLAIM_EXCEEDS_OPT",
            Flag::LbViolation => "LB_VIOLATION",
        })
    }
}

/// One `(n, d)` cell. Absent values either fall outside the oracle's limits
/// or failed; failures are described in `notes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub n: u32,
    pub d: u32,
    pub oracle_opt: Option<u32>,
    pub tree_worst: Option<usize>,
    pub linear_worst: Option<usize>,
    pub info_lb: Option<u32>,
    pub claimed_factorial: Option<u64>,
    pub claimed_power: Option<u64>,
    pub claimed_analytic: Option<u64>,
    pub flags: Vec<Flag>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportLimits {
    pub oracle: OracleLimits,
    pub enumeration_budget: u64,
}

impl Default for ReportLimits {
    fn default() -> Self {
        Self {
            oracle: OracleLimits::default(),
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

fn cell<T>(notes: &mut Vec<String>, column: &str, value: Result<T>) -> Option<T> {
    value
        .map_err(|e| notes.push(format!("{column}: {}: {e}", e.name())))
        .ok()
}

fn row(n: u32, d: u32, limits: &ReportLimits) -> ReportRow {
    let mut notes = Vec::new();
    let config = GameConfig::new(n, d);
    let worst = |notes: &mut Vec<String>, column: &str, strategy: &dyn Strategy| {
        let value = config.clone().and_then(|c| {
            worst_case_rounds(strategy, c, default_round_cap(&c), limits.enumeration_budget)
                .map(|(rounds, _)| rounds)
        });
        cell(notes, column, value)
    };
    let oracle_opt = if n <= limits.oracle.max_n && d <= limits.oracle.max_d {
        let value = config.clone().and_then(|c| exact_optimal_rounds(c, limits.oracle));
        cell(&mut notes, "oracle_opt", value)
    } else {
        None
    };
    let tree_worst = worst(&mut notes, "tree_worst", &TreeSplit);
    let linear_worst = worst(&mut notes, "linear_worst", &LinearScan);
    let (n64, d64) = (u64::from(n), u64::from(d));
    let info_lb = cell(&mut notes, "info_lb", bounds::info_lower_bound(n64, d64));
    let claimed_factorial = cell(
        &mut notes,
        "claimed_factorial",
        bounds::claimed_bound_combinatorial(n64, d64, Factor::Factorial),
    );
    let claimed_power = cell(
        &mut notes,
        "claimed_power",
        bounds::claimed_bound_combinatorial(n64, d64, Factor::Power),
    );
    let claimed_analytic = cell(
        &mut notes,
        "claimed_analytic",
        bounds::claimed_bound_analytic(n64, d64),
    );

    let mut flags = Vec::new();
    if let Some(opt) = oracle_opt {
        let claims = [claimed_factorial, claimed_power, claimed_analytic];
        if claims.iter().flatten().any(|&c| c > u64::from(opt)) {
            flags.push(Flag::ClaimExceedsOpt);
        }
        if info_lb.is_some_and(|lb| lb > opt) {
            flags.push(Flag::LbViolation);
        }
    }
    ReportRow {
        n,
        d,
        oracle_opt,
        tree_worst,
        linear_worst,
        info_lb,
        claimed_factorial,
        claimed_power,
        claimed_analytic,
        flags,
        notes,
    }
}

/// One row per `(n, d)` with `2 <= n <= n_max` and `1 <= d <= min(n, d_max)`,
/// ordered by `n` then `d`.
pub fn generate_report(n_max: u32, d_max: u32, limits: ReportLimits) -> Result<Vec<ReportRow>> {
    if n_max < 2 || d_max < 1 {
        return Err(Error::domain(
            "generate_report",
            format!("need n_max >= 2 and d_max >= 1, got n_max={n_max}, d_max={d_max}"),
        ));
    }
    let cells: Vec<(u32, u32)> = (2..=n_max)
        .flat_map(|n| (1..=n.min(d_max)).map(move |d| (n, d)))
        .collect();
    Ok(cells.par_iter().map(|&(n, d)| row(n, d, &limits)).collect())
}

pub const CSV_HEADER: &str =
    "n,d,oracle_opt,tree_worst,linear_worst,info_lb,claimed_factorial,claimed_power,claimed_analytic,flags";

fn field<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// The report as CSV: fixed header, absent values as empty fields, flags
/// joined by `;`.
pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let flags: Vec<String> = r.flags.iter().map(Flag::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.d,
            field(r.oracle_opt),
            field(r.tree_worst),
            field(r.linear_worst),
            field(r.info_lb),
            field(r.claimed_factorial),
            field(r.claimed_power),
            field(r.claimed_analytic),
            flags.join(";"),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find(rows: &[ReportRow], n: u32, d: u32) -> &ReportRow {
        rows.iter().find(|r| r.n == n && r.d == d).unwrap()
    }

    #[test]
    fn small_report_rows() {
        let rows = generate_report(4, 2, ReportLimits::default()).unwrap();
        let cells: Vec<_> = rows.iter().map(|r| (r.n, r.d)).collect();
        assert_eq!(cells, vec![(2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2)]);

        let r = find(&rows, 4, 1);
        assert_eq!(r.oracle_opt, Some(1));
        assert_eq!(r.info_lb, Some(2));
        assert!(r.flags.contains(&Flag::ClaimExceedsOpt));

        let r = find(&rows, 2, 2);
        assert_eq!((r.oracle_opt, r.info_lb), (Some(2), Some(0)));
        assert!(!r.flags.contains(&Flag::LbViolation));

        let r = find(&rows, 3, 2);
        assert_eq!((r.oracle_opt, r.info_lb), (Some(3), Some(1)));
        assert!(rows.iter().all(|r| r.notes.is_empty()));
    }

    #[test]
    fn out_of_cap_cells_are_blank() {
        let limits = ReportLimits {
            oracle: OracleLimits {
                max_n: 3,
                ..OracleLimits::default()
            },
            ..ReportLimits::default()
        };
        let rows = generate_report(4, 1, limits).unwrap();
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        let last = csv.lines().last().unwrap();
        assert!(last.starts_with("4,1,,1,4,2,"), "{last}");
        assert!(last.ends_with(','));
    }

    #[test]
    fn failures_become_notes() {
        let limits = ReportLimits {
            enumeration_budget: 2,
            ..ReportLimits::default()
        };
        let rows = generate_report(3, 1, limits).unwrap();
        let r = find(&rows, 3, 1);
        assert_eq!(r.tree_worst, None);
        assert!(r.notes.iter().any(|n| n.contains("BudgetExceeded")));
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(generate_report(1, 1, ReportLimits::default()).is_err());
    }
}
