use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::denoise::{
    bfp_denoise, bit_error_rate, dude, forward_backward, gibbs_denoise, map_denoise, BerReport, BfpMode,
};
use crate::model::ChannelParams;
use crate::sim::{self, SimulatedPath, GENERATOR_DESCRIPTION};

use super::{read_path_file, Algorithm, CommandError, CommandResult, ExperimentConfig, Outcome, SCHEMA_VERSION};

struct Scored {
    ber: f64,
    p_hat: Option<f64>,
    clamped: Option<usize>,
}

fn score(algorithm: Algorithm, k: Option<usize>, path: &SimulatedPath, params: &ChannelParams) -> crate::Result<Scored> {
    let (y, x, eps) = (&path.y, &path.x, params.epsilon());
    let plain = |xhat: &[crate::Spin]| -> crate::Result<Scored> {
        Ok(Scored {
            ber: bit_error_rate(xhat, x)?,
            p_hat: None,
            clamped: None,
        })
    };
    match algorithm {
        Algorithm::ExactBf => plain(&map_denoise(&forward_backward(y, params)?)),
        Algorithm::Gibbs => {
            let out = gibbs_denoise(y, eps)?;
            Ok(Scored {
                p_hat: Some(out.p_hat),
                ..plain(&out.denoised)?
            })
        }
        Algorithm::Dude => {
            let out = dude(y, eps, k.expect("context algorithms carry k"))?;
            Ok(Scored {
                clamped: Some(out.clamped),
                ..plain(&out.denoised)?
            })
        }
        Algorithm::BfpExact | Algorithm::BfpEmpirical => {
            let mode = match k {
                Some(k) => BfpMode::Empirical(k),
                None => BfpMode::Exact,
            };
            let out = bfp_denoise(y, params, mode)?;
            Ok(Scored {
                clamped: Some(out.clamped),
                ..plain(&out.denoised)?
            })
        }
    }
}

/// Simulates (or takes) one path and scores every requested denoiser on it.
///
/// Failures are recorded in the report's `error` field; the other
/// algorithms of the cell still run.
pub fn run_bench_cell(
    params: &ChannelParams,
    n: usize,
    seed: u64,
    algorithms: &[Algorithm],
    context_lengths: &[usize],
    supplied: Option<&SimulatedPath>,
) -> Vec<BerReport> {
    let generated;
    let path = match supplied {
        Some(p) => Ok(p),
        None => match sim::generate_dataset(params, n, seed) {
            Ok(p) => {
                generated = p;
                Ok(&generated)
            }
            Err(e) => Err(e),
        },
    };
    let runs: Vec<(Algorithm, Option<usize>)> = algorithms
        .iter()
        .flat_map(|&a| {
            if a.uses_context() {
                context_lengths.iter().map(|&k| (a, Some(k))).collect::<Vec<_>>()
            } else {
                vec![(a, None)]
            }
        })
        .collect();
    runs.into_iter()
        .map(|(algorithm, k)| {
            let start = Instant::now();
            let result = path.clone().and_then(|p| score(algorithm, k, p, params));
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let (n_used, seed_used) = match &path {
                Ok(p) => (p.len(), p.seed),
                Err(_) => (n, seed),
            };
            let mut report = BerReport {
                schema_version: SCHEMA_VERSION,
                algorithm: algorithm.to_string(),
                p: params.p(),
                epsilon: params.epsilon(),
                n: n_used,
                seed: seed_used,
                ber: None,
                runtime_ms,
                k,
                p_hat: None,
                clamped: None,
                error: None,
                generator: GENERATOR_DESCRIPTION.to_string(),
            };
            match result {
                Ok(s) => {
                    report.ber = Some(s.ber);
                    report.p_hat = s.p_hat;
                    report.clamped = s.clamped;
                }
                Err(e) => report.error = Some(e.to_string()),
            }
            report
        })
        .collect()
}

/// Seed-averaged BER of one algorithm in one cell; context algorithms keep
/// the context length with the lowest mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub p: f64,
    pub epsilon: f64,
    pub algorithm: String,
    pub k: Option<usize>,
    pub mean_ber: f64,
    /// Standard error of the mean over seeds; 0 for a single seed.
    pub std_err: f64,
    pub runs: usize,
    pub failures: usize,
}

fn cell_key(p: f64, e: f64) -> (u64, u64) {
    (p.to_bits(), e.to_bits())
}

/// Groups reports by `(p, ε, algorithm, k)`, averages over seeds, then keeps
/// the best `k` per algorithm. Rows follow the first-seen cell order and the
/// order of [`Algorithm::ALL`].
pub fn aggregate_reports(reports: &[BerReport]) -> Vec<BenchRow> {
    let mut cell_order: Vec<(u64, u64)> = Vec::new();
    let mut groups: BTreeMap<((u64, u64), String, Option<usize>), (Vec<f64>, usize)> = BTreeMap::new();
    for r in reports {
        let cell = cell_key(r.p, r.epsilon);
        if !cell_order.contains(&cell) {
            cell_order.push(cell);
        }
        let entry = groups.entry((cell, r.algorithm.clone(), r.k)).or_default();
        match r.ber {
            Some(b) if r.error.is_none() => entry.0.push(b),
            _ => entry.1 += 1,
        }
    }
    let mut rows = Vec::new();
    for cell in cell_order {
        for algorithm in Algorithm::ALL {
            let name = algorithm.as_str();
            let candidates: Vec<BenchRow> = groups
                .iter()
                .filter(|((c, a, _), _)| *c == cell && a == name)
                .map(|((_, _, k), (bers, failures))| {
                    let runs = bers.len();
                    let mean = if runs == 0 { f64::NAN } else { bers.iter().sum::<f64>() / runs as f64 };
                    let std_err = if runs < 2 {
                        0.0
                    } else {
                        let var = bers.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
                        (var / runs as f64).sqrt()
                    };
                    BenchRow {
                        p: f64::from_bits(cell.0),
                        epsilon: f64::from_bits(cell.1),
                        algorithm: name.to_string(),
                        k: *k,
                        mean_ber: mean,
                        std_err,
                        runs,
                        failures: *failures,
                    }
                })
                .collect();
            let best = candidates
                .into_iter()
                .filter(|r| r.runs > 0 || r.failures > 0)
                .min_by(|a, b| match (a.mean_ber.is_nan(), b.mean_ber.is_nan()) {
                    (false, true) => std::cmp::Ordering::Less,
                    (true, false) => std::cmp::Ordering::Greater,
                    _ => a.mean_ber.total_cmp(&b.mean_ber),
                });
            rows.extend(best);
        }
    }
    rows
}

fn algorithms_present(rows: &[BenchRow]) -> Vec<&'static str> {
    Algorithm::ALL
        .iter()
        .map(|a| a.as_str())
        .filter(|a| rows.iter().any(|r| r.algorithm == *a))
        .collect()
}

fn percent(row: &BenchRow) -> String {
    if row.runs == 0 {
        return "failed".to_string();
    }
    let mut s = format!("{:.2}%", 100.0 * row.mean_ber);
    if let Some(k) = row.k {
        s.push_str(&format!(" (k={k})"));
    }
    s
}

/// One line per `(p, ε)` cell and one column per algorithm, BER in percent.
pub fn render_table_markdown(rows: &[BenchRow], config: &ExperimentConfig) -> String {
    let algorithms = algorithms_present(rows);
    let mut out = format!("<!-- schema_version={SCHEMA_VERSION} command=bench -->\n");
    for (k, v) in config.to_pairs() {
        out.push_str(&format!("<!-- config.{k}={v} -->\n"));
    }
    out.push_str("\n| ε | p |");
    for a in &algorithms {
        out.push_str(&format!(" {a} |"));
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---|".repeat(algorithms.len()));
    out.push('\n');
    let mut cells: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        if !cells.contains(&(r.p, r.epsilon)) {
            cells.push((r.p, r.epsilon));
        }
    }
    for (p, e) in cells {
        out.push_str(&format!("| {e} | {p} |"));
        for a in &algorithms {
            let cell = rows
                .iter()
                .find(|r| r.p == p && r.epsilon == e && r.algorithm == *a)
                .map(percent)
                .unwrap_or_default();
            out.push_str(&format!(" {cell} |"));
        }
        out.push('\n');
    }
    out
}

/// Long-format CSV of the aggregated rows.
pub fn render_table_csv(rows: &[BenchRow], config: &ExperimentConfig) -> String {
    let mut buf = Vec::new();
    super::write_csv_preamble(&mut buf, "bench", config).expect("writing to memory");
    let mut out = String::from_utf8(buf).expect("utf-8 preamble");
    out.push_str("p,eps,algorithm,k,mean_ber,std_err,runs,failures\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.p,
            r.epsilon,
            r.algorithm,
            r.k.map_or_else(String::new, |k| k.to_string()),
            r.mean_ber,
            r.std_err,
            r.runs,
            r.failures
        ));
    }
    out
}

fn with_suffix(path: &std::path::Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Runs every `(cell, seed)` pair in parallel and writes JSON lines followed
/// by the aggregated table.
///
/// With `--out run.jsonl` the tables go to `run.table.md` and
/// `run.table.csv`; without it everything goes to `jsonl`.
pub fn cmd_bench(config: &ExperimentConfig, jsonl: &mut dyn Write) -> CommandResult<(Outcome, Vec<BenchRow>)> {
    config.validate()?;
    let supplied = match &config.input {
        Some(path) => Some(read_path_file(path)?),
        None => None,
    };
    let ks = config.context_lengths();
    let jobs: Vec<(ChannelParams, u64)> = match &supplied {
        Some(p) => config.cells().into_iter().map(|c| (c, p.seed)).collect(),
        None => config
            .cells()
            .into_iter()
            .flat_map(|c| config.seeds.iter().map(move |&s| (c, s)))
            .collect(),
    };
    let reports: Vec<Vec<BerReport>> = jobs
        .par_iter()
        .map(|(params, seed)| run_bench_cell(params, config.n, *seed, &config.algorithms, &ks, supplied.as_ref()))
        .collect();
    let reports: Vec<BerReport> = reports.into_iter().flatten().collect();

    let io_err = |e: std::io::Error| CommandError::Io {
        path: "output".into(),
        source: e,
    };
    let header = json!({
        "schema_version": SCHEMA_VERSION,
        "record": "config",
        "command": "bench",
        "generator": GENERATOR_DESCRIPTION,
        "config": config.to_pairs().into_iter().collect::<BTreeMap<_, _>>(),
    });
    writeln!(jsonl, "{header}").map_err(io_err)?;
    for r in &reports {
        let line = serde_json::to_string(r).expect("reports serialize");
        writeln!(jsonl, "{line}").map_err(io_err)?;
    }
    let rows = aggregate_reports(&reports);
    let markdown = render_table_markdown(&rows, config);
    let csv = render_table_csv(&rows, config);
    match &config.out {
        Some(out) => {
            for (suffix, body) in [(".table.md", &markdown), (".table.csv", &csv)] {
                let target = with_suffix(out, suffix);
                std::fs::write(&target, body).map_err(|e| CommandError::Io {
                    path: target.display().to_string(),
                    source: e,
                })?;
            }
        }
        None => write!(jsonl, "\n{markdown}").map_err(io_err)?,
    }
    jsonl.flush().map_err(io_err)?;

    let mut outcome = Outcome::default();
    let failures = reports.iter().filter(|r| r.error.is_some()).count();
    outcome.check(
        "bench cells completed",
        failures == 0,
        format!("{failures} of {} runs failed", reports.len()),
    );
    Ok((outcome, rows))
}
