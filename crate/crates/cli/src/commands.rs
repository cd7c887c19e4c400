// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mlrss_core::comparators::EwmaState;
use mlrss_core::evaluation::{amoc, calibrate_threshold, evaluate, EvalOptions, Truth};
use mlrss_core::io;
use mlrss_core::scenario::{run_ewma, run_mlrss, sub_seed};
use mlrss_core::simulator::signature_window;
use mlrss_core::{
    build_bank, fit_baseline, predict_lambda, simulate, CountSeries, Detector, Error, ErrorKind, LabeledSeries, Method,
    Scenario, Source,
};

use crate::config::{parse_threshold_grid, Preset, RunConfig};
use crate::{Command, Common};

/// False-alarm budgets (per 100 days) whose null-calibrated thresholds
/// make up the demo's AMOC curves.
const DEMO_RATES: [f64; 8] = [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Data => 3,
                ErrorKind::Numerical => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Core(e) => match e.kind() {
                ErrorKind::Data => write!(f, "data error: {e}"),
                ErrorKind::Numerical => write!(f, "numerical error: {e}"),
            },
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::FitBaseline { input, output, common } => {
            let cfg = load(&common)?;
            fit_baseline_cmd(&cfg, &input, output.as_deref())
        }
        Command::FitProfiles {
            input,
            outbreaks,
            baseline,
            output,
            common,
        } => {
            let cfg = load(&common)?;
            fit_profiles_cmd(&cfg, common.preset, &input, &outbreaks, &baseline, output.as_deref())
        }
        Command::Simulate {
            seed,
            outbreak_count,
            output,
            common,
        } => {
            let cfg = load(&common)?;
            let seed = require_seed(seed, &cfg)?;
            simulate_cmd(&cfg, common.preset, seed, outbreak_count, &output)
        }
        Command::Detect {
            input,
            baseline,
            bank,
            output,
            common,
        } => {
            let cfg = load(&common)?;
            detect_cmd(&cfg, common.preset, &input, &baseline, bank.as_deref(), output.as_deref())
        }
        Command::Evaluate {
            input,
            outbreaks,
            threshold_grid,
            threshold,
            output,
            common,
        } => {
            let cfg = load(&common)?;
            evaluate_cmd(&cfg, &input, &outbreaks, threshold_grid, threshold, output.as_deref())
        }
        Command::Demo { seed, output, common } => {
            let cfg = load(&common)?;
            let seed = require_seed(seed, &cfg)?;
            demo_cmd(&cfg, common.preset, seed, &output)
        }
    }
}

fn load(common: &Common) -> CliResult<RunConfig> {
    Ok(RunConfig::load(common.config.as_deref())?)
}

fn require_seed(flag: Option<u64>, cfg: &RunConfig) -> CliResult<u64> {
    flag.or(cfg.seed)
        .ok_or_else(|| CliError::Usage("a seed is required: pass --seed or set `seed` in the config".into()))
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())).into())
}

fn open(path: &Path) -> CliResult<fs::File> {
    fs::File::open(path).map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())).into())
}

fn read_counts_file(path: &Path) -> CliResult<CountSeries> {
    io::read_counts(open(path)?).map_err(|e| in_file(path, e))
}

/// Prefixes parse and range diagnostics with the offending file.
fn in_file(path: &Path, err: Error) -> CliError {
    match err {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())).into(),
        Error::RangeMismatch(m) => Error::RangeMismatch(format!("{}: {m}", path.display())).into(),
        other => other.into(),
    }
}

/// Writes to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(Error::from)?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())).into())
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| Error::Parse(format!("cannot create {}: {e}", path.display())).into())
}

fn scenario_source(cfg: &RunConfig, preset: Option<Preset>, command: &str) -> CliResult<Source> {
    match preset.or(cfg.preset) {
        Some(Preset::Source(s)) => Ok(s),
        None => Ok(Source::Otc),
        Some(Preset::Custom) => Err(CliError::Usage(format!(
            "`{command}` runs a preset scenario; pass --preset ED, OTC or TH"
        ))),
    }
}

fn fit_baseline_cmd(cfg: &RunConfig, input: &Path, output: Option<&Path>) -> CliResult<()> {
    let series = read_counts_file(input)?;
    let model = fit_baseline(&series, &cfg.design)?;
    emit(output, &io::write_baseline(&model)?)
}

fn fit_profiles_cmd(
    cfg: &RunConfig,
    preset: Option<Preset>,
    input: &Path,
    outbreaks: &Path,
    baseline: &Path,
    output: Option<&Path>,
) -> CliResult<()> {
    let resolved = cfg.resolve(preset);
    let series = read_counts_file(input)?;
    let truths = io::read_outbreaks(open(outbreaks)?, series.start).map_err(|e| in_file(outbreaks, e))?;
    let model = io::read_baseline(&read_text(baseline)?).map_err(|e| in_file(baseline, e))?;
    let lambdas = predict_lambda(&model, &model.spec.days_for(&series))?;
    let signatures = truths
        .iter()
        .map(|t| signature_window(&series.counts, &lambdas, t).map(|s| s.signature))
        .collect::<mlrss_core::Result<Vec<_>>>()?;
    let built = build_bank(&signatures, resolved.family, &cfg.profiles.fit)?;
    for (index, reason) in &built.failures {
        eprintln!("mlrss: warning: outbreak {} skipped: {reason}", index + 1);
    }
    emit(output, &io::write_bank(&built.bank)?)
}

fn simulate_cmd(
    cfg: &RunConfig,
    preset: Option<Preset>,
    seed: u64,
    outbreak_count: Option<usize>,
    output: &Path,
) -> CliResult<()> {
    let source = scenario_source(cfg, preset, "simulate")?;
    let scenario = Scenario::for_source(source);
    let count = outbreak_count.unwrap_or(cfg.simulation.outbreaks);
    let sim_config = if count == 0 {
        scenario.null_config(cfg.simulation.null_days, seed)
    } else {
        scenario.outbreak_config(count, cfg.simulation.spacing, seed)?
    };
    let labeled = simulate(&sim_config)?;
    create_dir(output)?;
    write_labeled(output, &labeled)
}

fn write_labeled(dir: &Path, labeled: &LabeledSeries) -> CliResult<()> {
    write_file(&dir.join("counts.csv"), &io::write_counts(&labeled.series))?;
    write_file(&dir.join("truth.csv"), &io::write_truth(labeled))?;
    write_file(
        &dir.join("outbreaks.csv"),
        &io::write_outbreaks(&labeled.series, &labeled.outbreaks),
    )
}

fn detect_cmd(
    cfg: &RunConfig,
    preset: Option<Preset>,
    input: &Path,
    baseline: &Path,
    bank: Option<&Path>,
    output: Option<&Path>,
) -> CliResult<()> {
    let resolved = cfg.resolve(preset);
    let series = read_counts_file(input)?;
    let model = io::read_baseline(&read_text(baseline)?).map_err(|e| in_file(baseline, e))?;
    let days = model.spec.days_for(&series);
    let rows = match resolved.method {
        Method::Mlrss => {
            let bank_path =
                bank.ok_or_else(|| CliError::Usage("the scan detector needs a profile bank (--bank)".into()))?;
            let bank = io::read_bank(&read_text(bank_path)?).map_err(|e| in_file(bank_path, e))?;
            let mut detector = Detector::with_baseline(resolved.detector.clone(), bank, model)?;
            let mut rows = Vec::with_capacity(series.len());
            for (day, &count) in days.iter().zip(&series.counts) {
                rows.push(io::ScoreRow::from(&detector.step(count, day)?));
            }
            rows
        }
        Method::Ewma => {
            let mut state = EwmaState::new(cfg.ewma.phi)?;
            let mut rows = Vec::with_capacity(series.len());
            for (day, &count) in days.iter().zip(&series.counts) {
                let score = state.step(count, model.lambda(day)?)?;
                rows.push(io::ScoreRow::plain(day.t, score));
            }
            rows
        }
    };
    emit(output, &io::write_scores(&series, resolved.method.tag(), &rows))
}

fn evaluate_cmd(
    cfg: &RunConfig,
    input: &Path,
    outbreaks: &Path,
    threshold_grid: Option<String>,
    threshold: Option<f64>,
    output: Option<&Path>,
) -> CliResult<()> {
    let (first_date, rows) = io::read_scores(open(input)?).map_err(|e| in_file(input, e))?;
    let truths = io::read_outbreaks(open(outbreaks)?, first_date).map_err(|e| in_file(outbreaks, e))?;
    let truth = Truth::new(rows.len() as u32, truths);
    let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
    let options = EvalOptions {
        buffer_days: cfg.evaluation.buffer_days,
    };
    if let Some(tau) = threshold {
        let report = evaluate(&scores, &truth, tau, &options)?;
        return emit(output, &io::write_report(&report)?);
    }
    let grid_text = threshold_grid.or_else(|| cfg.evaluation.threshold_grid.clone()).ok_or_else(|| {
        CliError::Usage("pass --threshold, --threshold-grid or set evaluation.threshold_grid".into())
    })?;
    let grid = parse_threshold_grid(&grid_text)?;
    let curve = amoc(&scores, &truth, &grid, &options)?;
    emit(output, &io::write_amoc(&curve))
}

struct SummaryRow {
    source: Source,
    method: Method,
    threshold: f64,
    false_alarm_rate: f64,
    penalized_mean_delay: f64,
    mean_delay: Option<f64>,
    missed: usize,
    outbreaks: usize,
}

fn demo_cmd(cfg: &RunConfig, preset: Option<Preset>, seed: u64, output: &Path) -> CliResult<()> {
    let sources: Vec<Source> = match preset.or(cfg.preset) {
        Some(Preset::Source(s)) => vec![s],
        None => Source::ALL.to_vec(),
        Some(Preset::Custom) => {
            return Err(CliError::Usage("`demo` runs preset scenarios; pass --preset ED, OTC or TH or omit it".into()))
        }
    };
    create_dir(output)?;
    let mut summary = Vec::new();
    for source in sources {
        let stream_seed = sub_seed(seed, source_stream(source));
        let dir: PathBuf = output.join(source.to_string());
        create_dir(&dir)?;
        summary.extend(demo_source(cfg, source, stream_seed, &dir)?);
    }
    write_file(&output.join("summary.csv"), &summary_csv(&summary))
}

fn source_stream(source: Source) -> u64 {
    match source {
        Source::Ed => 1,
        Source::Otc => 2,
        Source::Th => 3,
    }
}

fn demo_source(cfg: &RunConfig, source: Source, seed: u64, dir: &Path) -> CliResult<Vec<SummaryRow>> {
    let scenario = Scenario::for_source(source);
    let trained = scenario.train(sub_seed(seed, 1), &cfg.profiles.fit)?;
    let null = simulate(&scenario.null_config(cfg.simulation.null_days, sub_seed(seed, 2)))?;
    let test = simulate(&scenario.outbreak_config(cfg.simulation.outbreaks, cfg.simulation.spacing, sub_seed(seed, 3))?)?;
    let truth = Truth::from(&test);
    let options = EvalOptions {
        buffer_days: cfg.evaluation.buffer_days,
    };

    write_file(&dir.join("baseline.toml"), &io::write_baseline(&trained.baseline)?)?;
    write_file(&dir.join("bank.toml"), &io::write_bank(&trained.bank)?)?;
    write_labeled(dir, &test)?;

    // The preset's method first, then the EWMA comparator where it differs.
    let mut methods = vec![source.preset().method];
    if !methods.contains(&Method::Ewma) {
        methods.push(Method::Ewma);
    }
    let detector = cfg.study_detector(source);
    let mut rows = Vec::new();
    for method in methods {
        let (null_scores, test_rows) = match method {
            Method::Mlrss => {
                let null_scores = run_mlrss(&null.series, &trained.baseline, &trained.bank, &detector)?
                    .iter()
                    .map(|r| r.score)
                    .collect::<Vec<_>>();
                let test_rows = run_mlrss(&test.series, &trained.baseline, &trained.bank, &detector)?
                    .iter()
                    .map(io::ScoreRow::from)
                    .collect::<Vec<_>>();
                (null_scores, test_rows)
            }
            Method::Ewma => {
                let null_scores = run_ewma(&null.series, &trained.baseline, cfg.ewma.phi)?;
                let test_rows = run_ewma(&test.series, &trained.baseline, cfg.ewma.phi)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| io::ScoreRow::plain(i as u32 + 1, a))
                    .collect::<Vec<_>>();
                (null_scores, test_rows)
            }
        };
        let tag = method.tag();
        let scores: Vec<f64> = test_rows.iter().map(|r| r.score).collect();
        let tau = calibrate_threshold(&null_scores, cfg.evaluation.max_false_alarm_rate);
        let report = evaluate(&scores, &truth, tau, &options)?;
        let grid: Vec<f64> = DEMO_RATES.iter().map(|&r| calibrate_threshold(&null_scores, r)).collect();
        let curve = amoc(&scores, &truth, &grid, &options)?;

        write_file(&dir.join(format!("scores-{tag}.csv")), &io::write_scores(&test.series, tag, &test_rows))?;
        write_file(&dir.join(format!("report-{tag}.toml")), &io::write_report(&report)?)?;
        write_file(&dir.join(format!("amoc-{tag}.csv")), &io::write_amoc(&curve))?;
        rows.push(SummaryRow {
            source,
            method,
            threshold: tau,
            false_alarm_rate: report.false_alarm_rate,
            penalized_mean_delay: report.penalized_mean_delay,
            mean_delay: report.mean_delay,
            missed: report.missed,
            outbreaks: report.detections.len(),
        });
    }
    Ok(rows)
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("source,method,threshold,false_alarm_rate,mean_delay,mean_detected_delay,missed,outbreaks\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.source,
            r.method.tag(),
            r.threshold,
            r.false_alarm_rate,
            r.penalized_mean_delay,
            r.mean_delay.map(|d| d.to_string()).unwrap_or_default(),
            r.missed,
            r.outbreaks
        ));
    }
    out
}
