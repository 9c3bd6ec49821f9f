//! Capacity-sweep engine: re-solves the scenario across a grid of prosumer
//! capacities and emits one CSV row per point.
//!
//! The header is fixed; models that were not requested (or do not apply)
//! leave their cells empty rather than zero, so plots can tell "not run"
//! from an actual zero. Rows are computed in parallel when asked, then
//! ordered and formatted sequentially, so the bytes never depend on the job
//! count.

use rayon::prelude::*;

use dermkt_core::{
    aggregator_optimal_price, poag, solve_benchmark, solve_no_der, solve_one_part, validate,
    Normalization, Scenario, SolveOptions,
};

use crate::output::fmt_sig;
use crate::CliError;

pub const CSV_HEADER: &str =
    "capacity,welfare_efficient,welfare_no_der,welfare_one_part,poag,lambda,x_efficient,P_star,p_star";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepModel {
    Benchmark,
    NoDer,
    OnePart,
}

impl SweepModel {
    pub fn parse_list(text: &str) -> Result<Vec<SweepModel>, CliError> {
        text.split(',')
            .map(|name| match name.trim() {
                "benchmark" => Ok(SweepModel::Benchmark),
                "no_der" => Ok(SweepModel::NoDer),
                "one_part" => Ok(SweepModel::OnePart),
                other => Err(CliError::Input(format!(
                    "unknown model '{other}' (expected benchmark, no_der, one_part)"
                ))),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub models: Vec<SweepModel>,
    pub jobs: usize,
    pub solve: SolveOptions,
    pub normalization: Normalization,
}

/// One sweep point; `None` cells print empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub capacity: f64,
    pub welfare_efficient: Option<f64>,
    pub welfare_no_der: Option<f64>,
    pub welfare_one_part: Option<f64>,
    pub poag: Option<f64>,
    pub lambda: Option<f64>,
    pub x_efficient: Option<f64>,
    pub participation_fee_total: Option<f64>,
    pub unit_price: Option<f64>,
}

pub fn capacity_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![from];
    }
    (0..steps)
        .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn sweep_point(
    scenario: &Scenario,
    capacity: f64,
    cfg: &SweepConfig,
) -> Result<SweepRow, CliError> {
    let mut scn = scenario.clone();
    for p in &mut scn.prosumers {
        p.capacity = capacity;
    }
    let violations = validate(&scn);
    if !violations.is_empty() {
        return Err(CliError::Input(format!(
            "sweep point capacity {capacity}: {}",
            violations.join("; ")
        )));
    }
    let fail = |e: CliError| -> CliError {
        match e {
            CliError::Input(m) => CliError::Input(format!("sweep point capacity {capacity}: {m}")),
            CliError::Solver(m) => {
                CliError::Solver(format!("sweep point capacity {capacity}: {m}"))
            }
        }
    };

    let mut row = SweepRow {
        capacity,
        welfare_efficient: None,
        welfare_no_der: None,
        welfare_one_part: None,
        poag: None,
        lambda: None,
        x_efficient: None,
        participation_fee_total: None,
        unit_price: None,
    };

    if cfg.models.contains(&SweepModel::Benchmark) {
        let sol = solve_benchmark(&scn, &cfg.solve).map_err(|e| fail(e.into()))?;
        row.welfare_efficient = Some(sol.welfare);
        row.x_efficient = Some(sol.sell.iter().sum());
        if scn.node_count() == 1 {
            row.lambda = Some(sol.nodal_price[0]);
            row.unit_price = Some(sol.nodal_price[0]);
        }
        let mut fees = 0.0;
        for p in &scn.prosumers {
            let outcome = aggregator_optimal_price(p, sol.nodal_price[p.node])
                .map_err(|e| fail(CliError::Solver(e.to_string())))?;
            if outcome.trade_occurs {
                fees += outcome.price.participation_fee;
            }
        }
        row.participation_fee_total = Some(fees);
    }
    if cfg.models.contains(&SweepModel::NoDer) {
        let sol = solve_no_der(&scn, &cfg.solve).map_err(|e| fail(e.into()))?;
        row.welfare_no_der = Some(sol.welfare);
    }
    if cfg.models.contains(&SweepModel::OnePart) {
        let dispatch = solve_one_part(&scn, &cfg.solve).map_err(|e| fail(e.into()))?;
        row.welfare_one_part = Some(dispatch.solution.welfare);
        let ratio = poag(&scn, &cfg.solve, cfg.normalization).map_err(|e| fail(e.into()))?;
        row.poag = Some(ratio.poag);
    }
    Ok(row)
}

/// Runs the sweep and returns the full CSV text (LF line endings).
pub fn run_sweep(scenario: &Scenario, cfg: &SweepConfig) -> Result<String, CliError> {
    let grid = capacity_grid(cfg.from, cfg.to, cfg.steps);
    let rows: Result<Vec<SweepRow>, CliError> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| CliError::Input(format!("cannot build worker pool: {e}")))?;
        pool.install(|| {
            grid.par_iter()
                .map(|c| sweep_point(scenario, *c, cfg))
                .collect()
        })
    } else {
        grid.iter()
            .map(|c| sweep_point(scenario, *c, cfg))
            .collect()
    };
    let rows = rows?;

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        let cell = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        csv.push_str(&fmt_sig(row.capacity));
        for value in [
            row.welfare_efficient,
            row.welfare_no_der,
            row.welfare_one_part,
            row.poag,
            row.lambda,
            row.x_efficient,
            row.participation_fee_total,
            row.unit_price,
        ] {
            csv.push(',');
            csv.push_str(&cell(value));
        }
        csv.push('\n');
    }
    Ok(csv)
}
