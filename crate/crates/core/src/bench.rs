//! Operation counts for centralized versus distributed learning.
//!
//! Both engines spend almost all of their arithmetic in RLS, whose update
//! costs [`rls::update_macs`]`(q) = 2q² + 3q` multiply-accumulates for `q`
//! parameters. The centralized learner estimates
//! `q_c = N(n+m)(N(n+m)+1)/2` parameters, while the distributed one runs `N`
//! estimators of `q_d = (n+m)(n+m+1)/2` each, so the saving tends to
//! `100·(N³ − 1)/N³` percent as `n + m` grows.
//!
//! The literature writes the RLS cost as `O(γ²)` with γ the parameter
//! count; here that count is always called `q` to keep it apart from the
//! discount factor.

use alloc::string::String;
use core::fmt::Write;

use crate::qfunction::param_count;
use crate::rls;

/// Exact RLS multiply-accumulates for `iterations` rounds of `samples` updates.
pub fn count_rls_ops(q: usize, samples: usize, iterations: usize) -> u64 {
    iterations as u64 * samples as u64 * rls::update_macs(q)
}

/// Parameters of the stacked problem with `N·n` states and `N·m` inputs.
pub fn central_param_count(num_agents: usize, n: usize, m: usize) -> usize {
    param_count(num_agents * n, num_agents * m)
}

/// `100·(N³ − 1)/N³`.
pub fn predicted_saving_pct(num_agents: usize) -> f64 {
    let n = num_agents as f64;
    let cube = n * n * n;
    100.0 * (cube - 1.0) / cube
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpCountReport {
    pub num_agents: usize,
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    pub iterations: usize,
    pub q_central: usize,
    pub q_dist: usize,
    pub centralized_ops: u64,
    pub distributed_ops: u64,
    pub predicted_saving_pct: f64,
    pub measured_saving_pct: f64,
}

impl OpCountReport {
    /// Predicted minus measured saving, in percentage points.
    pub fn gap_pct(&self) -> f64 {
        self.predicted_saving_pct - self.measured_saving_pct
    }
}

/// Counts both engines on the same `(M, k)` budget.
pub fn saving_report(
    num_agents: usize,
    n: usize,
    m: usize,
    samples: usize,
    iterations: usize,
) -> OpCountReport {
    let q_central = central_param_count(num_agents, n, m);
    let q_dist = param_count(n, m);
    let centralized_ops = count_rls_ops(q_central, samples, iterations);
    let distributed_ops = num_agents as u64 * count_rls_ops(q_dist, samples, iterations);
    OpCountReport {
        num_agents,
        n,
        m,
        samples,
        iterations,
        q_central,
        q_dist,
        centralized_ops,
        distributed_ops,
        predicted_saving_pct: predicted_saving_pct(num_agents),
        measured_saving_pct: 100.0 * (1.0 - distributed_ops as f64 / centralized_ops as f64),
    }
}

/// Percentage truncated (not rounded) to two decimals with trailing zeros
/// dropped: `96.296… → "96.29"`, `99.2 → "99.2"`, `99.9999 → "99.99"`.
pub fn format_saving(pct: f64) -> String {
    let hundredths = libm::floor(pct * 100.0 + 1e-9);
    let mut s = alloc::format!("{:.2}", hundredths / 100.0);
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

/// Plain-text savings table: one column per agent count, with the
/// predicted row followed by the measured op-count row. Both rows are
/// truncated like [`format_saving`], so a saving never prints as 100.
pub fn render_saving_table(reports: &[OpCountReport]) -> String {
    let mut cells: [alloc::vec::Vec<String>; 3] = Default::default();
    cells[0].push("N".into());
    cells[1].push("Saving (%)".into());
    cells[2].push("Measured (%)".into());
    for r in reports {
        cells[0].push(alloc::format!("{}", r.num_agents));
        cells[1].push(format_saving(r.predicted_saving_pct));
        cells[2].push(format_saving(r.measured_saving_pct));
    }
    let widths: alloc::vec::Vec<usize> = (0..cells[0].len())
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: alloc::vec::Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| alloc::format!("{cell:>w$}"))
            .collect();
        let _ = writeln!(out, "| {} |", line.join(" | "));
    }
    out
}
