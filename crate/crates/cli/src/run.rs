//! Solve and sweep command implementations.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use std::fs;
use std::path::Path;
use swarmjam::{
    baseline1, baseline2, random_scenario, solve, AdmmConfig, BcdConfig, RegionBounds, Scenario,
    SolverReport,
};

use crate::config::{SchemeArg, SolveArgs, SweepArgs};

/// One sweep request: which schemes to run over which swarm sizes, how many
/// seeded scenarios per point, and where the seeds start.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub m_values: Vec<usize>,
    pub k: usize,
    pub num_seeds: usize,
    pub base_seed: u64,
    pub schemes: Vec<SchemeArg>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() {
            bail!("m_values must not be empty");
        }
        if self.num_seeds < 1 {
            bail!("num_seeds must be >= 1");
        }
        if self.schemes.is_empty() {
            bail!("at least one scheme is required");
        }
        if self.k < 1 {
            bail!("k must be >= 1");
        }
        Ok(())
    }
}

fn run_scheme(
    scheme: SchemeArg,
    scenario: &Scenario,
    admm: &AdmmConfig,
    bcd: &BcdConfig,
) -> swarmjam::Result<SolverReport> {
    match scheme {
        SchemeArg::Proposed => solve(scenario, None, admm),
        SchemeArg::Baseline1 => baseline1(scenario, bcd),
        SchemeArg::Baseline2 => baseline2(scenario, bcd),
    }
}

fn write_solve_outputs(out: &Path, scenario: &Scenario, report: &SolverReport) -> Result<()> {
    fs::create_dir_all(out)?;
    let json = serde_json::to_string_pretty(report)?;
    fs::write(out.join("report.json"), json + "\n")?;

    let mut w = csv::Writer::from_path(out.join("deployment.csv"))?;
    w.write_record(["uav_id", "x", "y", "z", "psi_rad"])?;
    for (i, p) in report.deployment.positions().iter().enumerate() {
        w.write_record([
            i.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            p[2].to_string(),
            report.deployment.azimuths()[i].to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out.join("target_sinr.csv"))?;
    w.write_record(["target_id", "sinr_linear", "sinr_db"])?;
    for k in 0..scenario.num_targets() {
        w.write_record([
            k.to_string(),
            report.per_target_sinr[k].to_string(),
            report.per_target_sinr_db[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Solve one scenario file. Returns the process exit code: 0 when the solver
/// converged, 2 when it hit its iteration budget.
pub fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading {}", args.scenario.display()))?;
    let scenario = Scenario::parse_toml(&text)?;
    let report = run_scheme(
        args.scheme,
        &scenario,
        &args.overrides.admm_config(),
        &args.overrides.bcd_config(),
    )?;
    write_solve_outputs(&args.out, &scenario, &report)?;
    eprintln!(
        "{}: avg SINR {:.4} dB over {} targets ({} outer iterations, {:.3} s)",
        report.scheme,
        report.avg_sinr_db,
        scenario.num_targets(),
        report.outer_iterations,
        report.wall_time.as_secs_f64()
    );
    Ok(if report.converged { 0 } else { 2 })
}

#[derive(Debug)]
struct SweepRow {
    scheme: &'static str,
    m: usize,
    seed: u64,
    outcome: std::result::Result<(f64, f64, bool), String>,
}

/// Run the sweep and write detail plus aggregate CSVs. Every cell must keep
/// at least one successful row for a zero exit.
pub fn run_sweep(spec: &SweepSpec, admm: &AdmmConfig, bcd: &BcdConfig, out: &Path, jobs: usize) -> Result<u8> {
    spec.validate()?;
    let bounds = RegionBounds::default();

    let mut tasks: Vec<(SchemeArg, usize, u64)> = Vec::new();
    for &scheme in &spec.schemes {
        for &m in &spec.m_values {
            for idx in 0..spec.num_seeds {
                tasks.push((scheme, m, spec.base_seed + idx as u64));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building the worker pool")?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(scheme, m, seed)| {
                let outcome = random_scenario(seed, m, spec.k, &bounds)
                    .and_then(|scenario| run_scheme(scheme, &scenario, admm, bcd))
                    .map(|report| {
                        (
                            report.avg_sinr_db,
                            report.wall_time.as_secs_f64(),
                            report.converged,
                        )
                    })
                    .map_err(|e| e.to_string());
                SweepRow {
                    scheme: scheme.name(),
                    m,
                    seed,
                    outcome,
                }
            })
            .collect()
    });
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(b.scheme)
            .then(a.m.cmp(&b.m))
            .then(a.seed.cmp(&b.seed))
    });

    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("sweep_detail.csv"))?;
    w.write_record([
        "scheme",
        "m",
        "seed",
        "avg_sinr_db",
        "runtime_s",
        "converged",
        "status",
    ])?;
    for row in &rows {
        match &row.outcome {
            Ok((db, secs, converged)) => w.write_record([
                row.scheme.to_string(),
                row.m.to_string(),
                row.seed.to_string(),
                db.to_string(),
                format!("{secs:.6}"),
                converged.to_string(),
                "ok".to_string(),
            ])?,
            Err(msg) => w.write_record([
                row.scheme.to_string(),
                row.m.to_string(),
                row.seed.to_string(),
                String::new(),
                String::new(),
                String::new(),
                format!("error: {}", msg.replace(',', ";")),
            ])?,
        }
    }
    w.flush()?;

    let mut cells: Vec<(&'static str, usize, Vec<f64>)> = Vec::new();
    for row in &rows {
        if cells
            .last()
            .map(|c| (c.0, c.1) != (row.scheme, row.m))
            .unwrap_or(true)
        {
            cells.push((row.scheme, row.m, Vec::new()));
        }
        if let Ok((db, _, _)) = &row.outcome {
            cells.last_mut().unwrap().2.push(*db);
        }
    }
    let mut w = csv::Writer::from_path(out.join("sweep_aggregate.csv"))?;
    w.write_record(["scheme", "m", "mean_avg_sinr_db", "samples"])?;
    let mut all_cells_ok = true;
    for (scheme, m, values) in &cells {
        if values.is_empty() {
            all_cells_ok = false;
            w.write_record([scheme.to_string(), m.to_string(), String::new(), "0".into()])?;
        } else {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            w.write_record([
                scheme.to_string(),
                m.to_string(),
                mean.to_string(),
                values.len().to_string(),
            ])?;
        }
    }
    w.flush()?;
    if all_cells_ok {
        Ok(0)
    } else {
        bail!("at least one sweep cell produced no successful run")
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<u8> {
    let spec = SweepSpec {
        m_values: args.m_values.clone(),
        k: args.k,
        num_seeds: args.num_seeds,
        base_seed: args.seed,
        schemes: args.schemes.clone(),
    };
    run_sweep(
        &spec,
        &args.overrides.admm_config(),
        &args.overrides.bcd_config(),
        &args.out,
        args.jobs,
    )
}
