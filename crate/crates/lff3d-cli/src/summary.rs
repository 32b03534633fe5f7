//! Run summaries.
//!
//! Every field except the QP iteration counters is computed from the
//! rendered CSV text, not from the in-memory log, so recomputing a summary
//! from a log file on disk reproduces it bit for bit. The iteration
//! counters come from the in-memory run (they are not part of the CSV
//! column contract) and are checked by rerunning instead.

use crate::csvlog::{ParsedLog, QPSTAT_TERMINATED};
use lff3d::{wrap_finite, SimLog};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub run: RunSection,
    #[serde(default)]
    pub follower: Vec<FollowerSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub dt: f64,
    pub ticks: usize,
    pub followers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerSummary {
    /// One-based index, matching the `f{i}` CSV prefix.
    pub index: usize,
    pub terminated_at_tick: Option<usize>,
    /// Smallest barrier value over all live ticks.
    pub min_barrier: f64,
    /// Seconds with the intervention flag set.
    pub intervention_seconds: f64,
    pub qp_iterations_total: u64,
    pub qp_iterations_max: u64,
    #[serde(default)]
    pub stage: Vec<StageSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub start_tick: usize,
    /// Exclusive.
    pub end_tick: usize,
    /// Max of |error| per component (range, azimuth, elevation, heading)
    /// over the live ticks of the stage.
    pub max_abs: [f64; 4],
    /// Mean of |error| per component over the live ticks of the stage.
    pub mean_abs: [f64; 4],
}

/// Computes the CSV-derived fields of a follower summary.
///
/// `bounds` holds the stage boundaries in ticks (first 0, last = tick
/// count); iteration counters are filled with zero and belong to the
/// caller.
pub fn follower_summary_from_csv(
    parsed: &ParsedLog,
    index: usize,
    bounds: &[usize],
) -> Result<FollowerSummary, crate::csvlog::LogReadError> {
    let prefix = format!("f{index}");
    let col = |name: &str| parsed.column(&format!("{prefix}.{name}"));
    let qpstat = col("qpstat")?;
    let minh = col("minh")?;
    let interv = col("interv")?;
    let state = [col("L")?, col("phi")?, col("xi")?, col("alpha")?];
    let desired = [col("Ld")?, col("phid")?, col("xid")?, col("alphad")?];
    let t = parsed.column("t")?;
    let dt = if t.len() >= 2 { t[1] - t[0] } else { 0.0 };

    let live = |tick: usize| qpstat[tick] != QPSTAT_TERMINATED as f64;
    let terminated_at_tick = (0..qpstat.len()).find(|&k| !live(k));

    let mut min_barrier = f64::INFINITY;
    let mut intervention_seconds = 0.0;
    for k in 0..qpstat.len() {
        if live(k) {
            min_barrier = min_barrier.min(minh[k]);
            if interv[k] != 0.0 {
                intervention_seconds += dt;
            }
        }
    }

    // angular components wrap; range and elevation difference directly
    let error_at = |c: usize, k: usize| -> f64 {
        let raw = state[c][k] - desired[c][k];
        if c == 1 || c == 3 {
            wrap_finite(raw)
        } else {
            raw
        }
    };
    let mut stage = Vec::with_capacity(bounds.len().saturating_sub(1));
    for w in bounds.windows(2) {
        let (start_tick, end_tick) = (w[0], w[1]);
        let mut max_abs = [0.0f64; 4];
        let mut sum_abs = [0.0f64; 4];
        let mut count = 0usize;
        for k in start_tick..end_tick.min(qpstat.len()) {
            if !live(k) {
                continue;
            }
            count += 1;
            for c in 0..4 {
                let e = error_at(c, k).abs();
                max_abs[c] = max_abs[c].max(e);
                sum_abs[c] += e;
            }
        }
        let mean_abs = if count > 0 {
            std::array::from_fn(|c| sum_abs[c] / count as f64)
        } else {
            [f64::NAN; 4]
        };
        stage.push(StageSummary { start_tick, end_tick, max_abs, mean_abs });
    }

    Ok(FollowerSummary {
        index,
        terminated_at_tick,
        min_barrier,
        intervention_seconds,
        qp_iterations_total: 0,
        qp_iterations_max: 0,
        stage,
    })
}

/// Builds the full summary for a finished run: CSV-derived fields come from
/// the rendered log text, iteration counters from the in-memory log.
pub fn summarize(
    log: &SimLog,
    csv_text: &str,
    stage_bounds: &[Vec<usize>],
) -> Result<SummaryFile, crate::csvlog::LogReadError> {
    let parsed = ParsedLog::parse(csv_text)?;
    let mut followers = Vec::with_capacity(log.follower_count);
    for i in 0..log.follower_count {
        let mut summary = follower_summary_from_csv(&parsed, i + 1, &stage_bounds[i])?;
        let mut total = 0u64;
        let mut max = 0u64;
        for tick in &log.ticks {
            if let Some(record) = &tick.followers[i] {
                total += record.qp_iterations as u64;
                max = max.max(record.qp_iterations as u64);
            }
        }
        summary.qp_iterations_total = total;
        summary.qp_iterations_max = max;
        followers.push(summary);
    }
    Ok(SummaryFile {
        run: RunSection { dt: log.dt, ticks: log.tick_count(), followers: log.follower_count },
        follower: followers,
    })
}

impl SummaryFile {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("summary serializes")
    }

    pub fn parse(text: &str) -> Result<SummaryFile, toml::de::Error> {
        toml::from_str(text)
    }
}
