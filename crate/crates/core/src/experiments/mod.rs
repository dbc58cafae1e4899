//! Subcommands of the `bsc-thermo` binary.
//!
//! Every command writes a self-describing artifact: CSV files start with
//! `# key=value` comment lines carrying the schema version, the command and
//! the full effective configuration; JSON-lines files start with a header
//! record holding the same. Data rows depend only on the configuration, so
//! reruns are byte-identical apart from measured runtimes.

mod bench;
mod config;

pub use bench::{aggregate_reports, cmd_bench, render_table_csv, render_table_markdown, run_bench_cell, BenchRow};
pub use config::{read_grid_file, Algorithm, ConfigError, ExperimentConfig, Location, KNOWN_KEYS};

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::error::Error as ModelError;
use crate::gibbs::{decay_rate_bound, g_continued_fraction, variation_estimate, DecayRegime};
use crate::model::ChannelParams;
use crate::sim::{self, SimulatedPath, GENERATOR_DESCRIPTION};
use crate::spin::{all_words, format_spins, Spin};
use crate::transfer::{brute_force_cylinder, conditional_prob, log_cylinder_prob, MAX_ENUMERATION_LEN};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest relative error accepted between the recursion and enumeration.
pub const PROBS_REL_TOL: f64 = 1e-12;
/// Largest deviation of a summed enumeration from one.
pub const PROBS_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error(transparent)]
    Model(#[from] ModelError),
}

impl CommandError {
    fn io(path: impl Into<String>, source: io::Error) -> Self {
        CommandError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CommandResult<T> = std::result::Result<T, CommandError>;

/// A numerical self-check performed while producing an artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// `# key=value` preamble shared by every CSV artifact.
pub fn write_csv_preamble(w: &mut dyn Write, command: &str, config: &ExperimentConfig) -> io::Result<()> {
    writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
    writeln!(w, "# command={command}")?;
    writeln!(w, "# generator={GENERATOR_DESCRIPTION}")?;
    for (k, v) in config.to_pairs() {
        writeln!(w, "# config.{k}={v}")?;
    }
    Ok(())
}

/// Opens `path`, or stdout when `None`.
pub fn open_output(path: Option<&Path>) -> CommandResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CommandError::io(p.display().to_string(), e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn stdout_err(e: io::Error) -> CommandError {
    CommandError::io("output", e)
}

/// Reads a path written by `simulate`; `.csv` selects the text format.
pub fn read_path_file(path: &Path) -> CommandResult<SimulatedPath> {
    let file = File::open(path).map_err(|e| CommandError::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let parsed = if is_csv(path) {
        sim::read_path_csv(reader)
    } else {
        sim::read_path_binary(reader)
    };
    Ok(parsed?)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Cylinder probabilities of every word up to `config.length`, by recursion
/// and by enumeration.
pub fn cmd_probs(config: &ExperimentConfig, w: &mut dyn Write) -> CommandResult<Outcome> {
    config.validate()?;
    if config.length == 0 || config.length > MAX_ENUMERATION_LEN {
        return Err(ConfigError::Field {
            location: Location(None),
            field: "length".into(),
            message: format!("must be in 1..={MAX_ENUMERATION_LEN}"),
        }
        .into());
    }
    struct Row {
        word: String,
        q_transfer: f64,
        q_brute: f64,
        rel_err: f64,
    }
    let cells = config.cells();
    let tables: Vec<(ChannelParams, Vec<Vec<Row>>)> = cells
        .par_iter()
        .map(|params| {
            let model = params.couplings();
            let by_length = (1..=config.length)
                .map(|len| {
                    all_words(len)
                        .map(|word| {
                            let q_transfer = log_cylinder_prob(&word, &model).exp();
                            let q_brute = brute_force_cylinder(&word, params)?;
                            Ok(Row {
                                word: format_spins(&word),
                                q_transfer,
                                q_brute,
                                rel_err: (q_transfer - q_brute).abs() / q_brute,
                            })
                        })
                        .collect::<crate::Result<Vec<_>>>()
                })
                .collect::<crate::Result<Vec<_>>>()?;
            Ok((*params, by_length))
        })
        .collect::<crate::Result<_>>()?;

    write_csv_preamble(w, "probs", config).map_err(stdout_err)?;
    writeln!(w, "p,eps,y,q_transfer,q_bruteforce,rel_err").map_err(stdout_err)?;
    let mut outcome = Outcome::default();
    for (params, by_length) in &tables {
        let mut max_rel = 0.0f64;
        let mut max_sum_dev = 0.0f64;
        for rows in by_length {
            let total: f64 = rows.iter().map(|r| r.q_transfer).sum();
            max_sum_dev = max_sum_dev.max((total - 1.0).abs());
            for r in rows {
                max_rel = max_rel.max(r.rel_err);
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    params.p(),
                    params.epsilon(),
                    r.word,
                    r.q_transfer,
                    r.q_brute,
                    r.rel_err
                )
                .map_err(stdout_err)?;
            }
        }
        let cell = format!("({}, {})", params.p(), params.epsilon());
        outcome.check(
            format!("probs rel_err {cell}"),
            max_rel < PROBS_REL_TOL,
            format!("max rel_err {max_rel:e}"),
        );
        outcome.check(
            format!("probs normalization {cell}"),
            max_sum_dev < PROBS_SUM_TOL,
            format!("max |sum - 1| {max_sum_dev:e}"),
        );
    }
    w.flush().map_err(stdout_err)?;
    Ok(outcome)
}

/// One row of the decay table.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub params: ChannelParams,
    pub naive: f64,
    pub rho: f64,
    pub regime: DecayRegime,
    pub c: f64,
    /// `exp` of the least-squares slope of `log var_n(g)` over the upper half
    /// of the informative `n`; 0 when fewer than two values are informative.
    pub empirical_rate: f64,
    /// Whether `var_n(g) ≤ C·ρ^n` held for every examined `n`.
    pub within_bound: bool,
    pub variations: Vec<f64>,
}

/// Variations below this are dominated by rounding and are not fitted.
const VARIATION_FLOOR: f64 = 1e-13;

pub fn decay_row(params: &ChannelParams, max_n: usize, samples: usize, seed: u64) -> crate::Result<DecayRow> {
    let model = params.couplings();
    let bound = decay_rate_bound(params);
    let variations = (1..=max_n)
        .map(|n| variation_estimate(n, samples, &model, seed))
        .collect::<crate::Result<Vec<_>>>()?;
    let within_bound = variations
        .iter()
        .enumerate()
        .all(|(i, &v)| v <= bound.tail_bound(i + 1) * (1.0 + 1e-12) + 1e-15);
    let informative: Vec<(f64, f64)> = variations
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > VARIATION_FLOOR)
        .map(|(i, &v)| ((i + 1) as f64, v.ln()))
        .collect();
    let tail = &informative[informative.len() / 2..];
    let empirical_rate = if tail.len() < 2 { 0.0 } else { least_squares_slope(tail).exp() };
    Ok(DecayRow {
        params: *params,
        naive: crate::gibbs::DecayBound::naive_rate(params),
        rho: bound.rho,
        regime: bound.regime,
        c: bound.c,
        empirical_rate,
        within_bound,
        variations,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Naive and improved decay bounds against the measured decay of `var_n(g)`.
pub fn cmd_decay(config: &ExperimentConfig, w: &mut dyn Write) -> CommandResult<Outcome> {
    config.validate()?;
    let seed = config.seeds[0];
    let rows: Vec<DecayRow> = config
        .cells()
        .par_iter()
        .map(|params| decay_row(params, config.max_n, config.samples, seed))
        .collect::<crate::Result<_>>()?;
    write_csv_preamble(w, "decay", config).map_err(stdout_err)?;
    writeln!(w, "p,eps,naive,improved,regime,C,empirical_rate").map_err(stdout_err)?;
    let mut outcome = Outcome::default();
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.params.p(),
            r.params.epsilon(),
            r.naive,
            r.rho,
            r.regime,
            r.c,
            r.empirical_rate
        )
        .map_err(stdout_err)?;
        let cell = format!("({}, {})", r.params.p(), r.params.epsilon());
        outcome.check(
            format!("decay variation within C*rho^n {cell}"),
            r.within_bound,
            format!("max_n {}", config.max_n),
        );
        outcome.check(
            format!("decay empirical rate <= rho {cell}"),
            r.empirical_rate <= r.rho + 1e-9,
            format!("empirical {} vs rho {}", r.empirical_rate, r.rho),
        );
    }
    w.flush().map_err(stdout_err)?;
    Ok(outcome)
}

/// One scored window of the g-function comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct GfunRow {
    pub id: String,
    pub window: Vec<Spin>,
    pub g_recursion: f64,
    pub g_contfrac: Option<f64>,
    pub flag: &'static str,
}

impl GfunRow {
    pub fn abs_diff(&self) -> Option<f64> {
        self.g_contfrac.map(|g| (g - self.g_recursion).abs())
    }
}

/// `g` on `window` by the field recursion and by the continued fraction of
/// depth `window.len() − 1`; a vanishing denominator is flagged, not dropped.
pub fn gfun_row(id: String, window: &[Spin], params: &ChannelParams, tol: f64) -> GfunRow {
    let model = params.couplings();
    let depth = window.len() - 1;
    let g_recursion = conditional_prob(window[0], &window[1..], &model);
    let (g_contfrac, flag) = match g_continued_fraction(window, depth, &model) {
        Ok(cf) if (cf.g - g_recursion).abs() < tol => (Some(cf.g), "ok"),
        Ok(cf) => (Some(cf.g), "exceeds_tol"),
        Err(ModelError::DivisionNearZero { .. }) => (None, "division_near_zero"),
        Err(_) => (None, "error"),
    };
    GfunRow {
        id,
        window: window.to_vec(),
        g_recursion,
        g_contfrac,
        flag,
    }
}

/// Compares the two representations of `g` on consecutive windows of a
/// simulated or supplied output sequence, plus the all-plus window.
pub fn cmd_gfun(config: &ExperimentConfig, w: &mut dyn Write) -> CommandResult<Outcome> {
    config.validate()?;
    if config.depth == 0 {
        return Err(ConfigError::Field {
            location: Location(None),
            field: "depth".into(),
            message: "must be at least 1".into(),
        }
        .into());
    }
    let span = config.depth + 1;
    let supplied = match &config.input {
        Some(path) => Some(read_path_file(path)?),
        None => None,
    };
    let seed = config.seeds[0];
    let mut tables = Vec::new();
    for params in config.cells() {
        let y: Vec<Spin> = match &supplied {
            Some(path) => path.y.to_vec(),
            None => sim::generate_dataset(&params, config.windows * span, seed)?.y.to_vec(),
        };
        let available = y.len() / span;
        if available < config.windows {
            return Err(ModelError::SequenceTooShort {
                len: y.len(),
                min: config.windows * span,
            }
            .into());
        }
        let mut rows = vec![gfun_row("all_plus".into(), &vec![Spin::Plus; span], &params, config.tol)];
        rows.par_extend(
            (0..config.windows)
                .into_par_iter()
                .map(|i| gfun_row(i.to_string(), &y[i * span..(i + 1) * span], &params, config.tol)),
        );
        tables.push((params, rows));
    }

    write_csv_preamble(w, "gfun", config).map_err(stdout_err)?;
    writeln!(w, "p,eps,id,window,g_recursion,g_contfrac,abs_diff,flag").map_err(stdout_err)?;
    let mut outcome = Outcome::default();
    for (params, rows) in &tables {
        let mut max_diff = 0.0f64;
        let mut flagged = 0usize;
        for r in rows {
            let fmt_opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                params.p(),
                params.epsilon(),
                r.id,
                format_spins(&r.window),
                r.g_recursion,
                fmt_opt(r.g_contfrac),
                fmt_opt(r.abs_diff()),
                r.flag
            )
            .map_err(stdout_err)?;
            max_diff = max_diff.max(r.abs_diff().unwrap_or(0.0));
            flagged += usize::from(r.flag != "ok");
        }
        outcome.check(
            format!("gfun agreement ({}, {})", params.p(), params.epsilon()),
            flagged == 0,
            format!("max |diff| {max_diff:e}, {flagged} flagged rows"),
        );
    }
    w.flush().map_err(stdout_err)?;
    Ok(outcome)
}

/// Simulates one path and writes it in the binary or CSV format.
pub fn cmd_simulate(config: &ExperimentConfig) -> CommandResult<PathBuf> {
    config.validate()?;
    let out = config.out.clone().ok_or_else(|| ConfigError::Field {
        location: Location(None),
        field: "out".into(),
        message: "simulate needs an output path (.bin or .csv)".into(),
    })?;
    let params = config.cells()[0];
    let path = sim::generate_dataset(&params, config.n, config.seeds[0])?;
    let mut w = open_output(Some(&out))?;
    let name = out.display().to_string();
    if is_csv(&out) {
        let mut meta = vec![("command".to_string(), "simulate".to_string())];
        meta.extend(config.to_pairs().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
        sim::write_path_csv(&path, &meta, &mut w)?;
    } else {
        sim::write_path_binary(&path, &mut w)?;
    }
    w.flush().map_err(|e| CommandError::io(name, e))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            length: 4,
            windows: 5,
            depth: 40,
            max_n: 12,
            samples: 256,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn probs_table_contains_oracle_row() {
        let cfg = ExperimentConfig { length: 2, ..small_config() };
        let mut buf = Vec::new();
        let outcome = cmd_probs(&cfg, &mut buf).unwrap();
        assert!(outcome.passed());
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().find(|l| l.starts_with("0.2,0.1,++,")).unwrap();
        let q: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((q - 0.346).abs() < 1e-12);
        assert!(text.starts_with("# schema_version=1\n# command=probs\n"));
    }

    #[test]
    fn probs_rejects_long_enumeration() {
        let cfg = ExperimentConfig { length: 23, ..small_config() };
        assert!(matches!(cmd_probs(&cfg, &mut Vec::new()), Err(CommandError::Config(_))));
    }

    #[test]
    fn decay_rows() {
        let row = decay_row(&validate_params(0.2, 0.05).unwrap(), 12, 256, 1).unwrap();
        assert!((row.rho - 0.407_142_857_142_857).abs() < 1e-9);
        assert!((row.naive - 0.6).abs() < 1e-15);
        assert!(row.within_bound);
        assert!(row.empirical_rate <= row.rho);
        let sym = decay_row(&validate_params(0.5, 0.3).unwrap(), 5, 64, 1).unwrap();
        assert_eq!((sym.naive, sym.rho, sym.empirical_rate), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gfun_rows_agree() {
        let cfg = small_config();
        let mut buf = Vec::new();
        let outcome = cmd_gfun(&cfg, &mut buf).unwrap();
        assert!(outcome.passed(), "{:?}", outcome.checks);
        let text = String::from_utf8(buf).unwrap();
        let all_plus = text.lines().find(|l| l.contains(",all_plus,")).unwrap();
        let g: f64 = all_plus.split(',').nth(4).unwrap().parse().unwrap();
        assert!((g - 0.72558).abs() < 5e-6);
    }

    #[test]
    fn outputs_are_reproducible() {
        let cfg = small_config();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        cmd_gfun(&cfg, &mut a).unwrap();
        cmd_gfun(&cfg, &mut b).unwrap();
        assert_eq!(a, b);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        cmd_decay(&cfg, &mut a).unwrap();
        cmd_decay(&cfg, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn simulate_round_trips_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["path.bin", "path.csv"] {
            let cfg = ExperimentConfig {
                n: 500,
                out: Some(dir.path().join(name)),
                ..small_config()
            };
            let out = cmd_simulate(&cfg).unwrap();
            let back = read_path_file(&out).unwrap();
            let expected = sim::generate_dataset(&validate_params(0.2, 0.1).unwrap(), 500, 1).unwrap();
            assert_eq!(back, expected);
        }
        assert!(cmd_simulate(&small_config()).is_err());
    }
}
