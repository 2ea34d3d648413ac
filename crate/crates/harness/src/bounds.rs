//! Cost-bound checks and the fit of the headline constants.

use robust_send::protocol::{
    cost_upper_bound_g, cost_upper_bound_slack, HeadlineConstants, ProtocolParams,
};

use crate::sweep::SweepRow;

/// Constants from [`fit_headline`] on the default `L = 256` grid
/// (1000 trials per cell, seed 1), rounded up.
pub const DEFAULT_HEADLINE: HeadlineConstants = HeadlineConstants {
    c1: 0.0,
    c2: 173.0,
    c3: 0.0,
};

/// Multiplier applied to fitted slopes so that other lengths fit too.
pub const FIT_MARGIN: f64 = 1.5;

/// Fits `(c1, c2, c3)` on known-length rows, in that order of dependence:
/// `c3` absorbs round-0 padding, `c2` the per-round cost while
/// `T + 1 <= L / log L`, and `c1` whatever remains per flip beyond that.
/// Slopes are scaled by `margin`.
pub fn fit_headline(rows: &[SweepRow], margin: f64) -> HeadlineConstants {
    let rows: Vec<&SweepRow> = rows.iter().filter(|r| !r.unknown_length).collect();
    let c3 = rows
        .iter()
        .filter_map(|r| ProtocolParams::derive(r.message_len, r.delta).ok())
        .map(|p| p.plaintext_len().saturating_sub(p.message_len()) as f64)
        .fold(0.0, f64::max);
    let capped = |r: &SweepRow| {
        let l = r.message_len.max(2) as f64;
        r.flips as f64 + 1.0 > l / l.log2().ceil().max(1.0)
    };
    let excess = |r: &SweepRow| r.total_sent as f64 - r.message_len as f64 - c3;
    let c2 = rows
        .iter()
        .filter(|r| !capped(r))
        .map(|r| excess(r) / HeadlineConstants::round_term(r.message_len, r.flips, r.delta))
        .fold(0.0, f64::max)
        * margin;
    let c1 = rows
        .iter()
        .filter(|r| capped(r))
        .map(|r| {
            let rest =
                excess(r) - c2 * HeadlineConstants::round_term(r.message_len, r.flips, r.delta);
            rest / r.flips as f64
        })
        .fold(0.0, f64::max)
        * margin;
    HeadlineConstants { c1, c2, c3 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `totalSent <= g(tuplesSent) + slack`.
    TupleCost,
    /// `totalSent <= L + c1 T + c2 min(T + 1, L / log L) log(L / delta) + c3`.
    Headline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: BoundKind,
    pub row: SweepRow,
    pub limit: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Limit on a known-length row's cost from the tuple count, including the
/// rounding slack of [`cost_upper_bound_slack`].
pub fn tuple_cost_limit(row: &SweepRow) -> Option<f64> {
    if row.unknown_length {
        return None;
    }
    let p = ProtocolParams::derive(row.message_len, row.delta).ok()?;
    Some(cost_upper_bound_g(row.tuples_sent, &p) + cost_upper_bound_slack(row.rounds, &p))
}

/// Checks every row against both bounds. Each violation carries the row,
/// whose seed replays the run.
pub fn check_cost_bounds(rows: &[SweepRow], constants: &HeadlineConstants) -> BoundReport {
    let mut report = BoundReport::default();
    for row in rows {
        report.checked += 1;
        let sent = row.total_sent as f64;
        if let Some(limit) = tuple_cost_limit(row) {
            if sent > limit {
                report.violations.push(Violation {
                    kind: BoundKind::TupleCost,
                    row: row.clone(),
                    limit,
                });
            }
        }
        let limit = constants.bound(row.message_len, row.flips, row.delta);
        if sent > limit {
            report.violations.push(Violation {
                kind: BoundKind::Headline,
                row: row.clone(),
                limit,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{run_trial, TrialSpec};
    use robust_send::adversary::AdversarySpec;

    fn row(spec: TrialSpec) -> SweepRow {
        let report = run_trial(&spec, false).unwrap();
        SweepRow::from_report(&spec, &report, &DEFAULT_HEADLINE)
    }

    fn spec(adversary: AdversarySpec, seed: u64) -> TrialSpec {
        TrialSpec {
            message_len: 256,
            delta: 0.1,
            adversary,
            seed,
            unknown_length: false,
            max_rounds: None,
        }
    }

    #[test]
    fn noiseless_rows_fit_with_room() {
        let rows: Vec<SweepRow> = (0..5).map(|s| row(spec(AdversarySpec::Null, s))).collect();
        for r in &rows {
            assert!((r.total_sent as f64) < tuple_cost_limit(r).unwrap());
        }
        let c = fit_headline(&rows, FIT_MARGIN);
        assert!(check_cost_bounds(&rows, &c).passed());
    }

    #[test]
    fn inflated_cost_is_caught() {
        let mut rows: Vec<SweepRow> = (0..5)
            .map(|s| row(spec(AdversarySpec::PlaintextCorruptor(3), s)))
            .collect();
        let c = fit_headline(&rows, FIT_MARGIN);
        assert!(check_cost_bounds(&rows, &c).passed());
        // A test double whose slots were twice the scheduled size.
        rows[2].total_sent *= 2;
        let report = check_cost_bounds(&rows, &c);
        assert_eq!(report.checked, 5);
        let kinds: Vec<BoundKind> = report.violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&BoundKind::TupleCost));
        assert!(kinds.contains(&BoundKind::Headline));
        assert!(report.violations.iter().all(|v| v.row.seed == rows[2].seed));
    }
}
