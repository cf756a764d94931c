//! Command-line front end: argument and config-file resolution, command dispatch,
//! artifact writing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::echo::{purity, reduced_density, EchoTrace};
use crate::error::Error;
use crate::model::{BathParams, CentralQubit, ExcitationPattern, NORM_TOL};
use crate::oracles::{ed_loschmidt, fock_mode_check};
use crate::spectrum::ModeTable;
use crate::sweep::{
    grid_sidecar_json, quasiperiod, sidecar_path, surface_with_workers, write_grid, Axis,
    TOOL_VERSION,
};

/// Largest accepted `|closed form - oracle|` for `oracle-fock`.
pub const FOCK_TOL: f64 = 1e-10;
/// Largest accepted deviation between ED and the sector-resolved product for `oracle-ed`.
pub const ED_SECTOR_TOL: f64 = 1e-8;
/// Echo threshold used for the decayed-row count in surface summaries.
pub const DECAY_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// L(t) and R(t) over the time axis
    Trace,
    /// L over the lambda x t grid
    Surface,
    /// L(t) with the --excited modes singly occupied
    Excited,
    /// Purity and reduced density matrix of the central qubit
    Purity,
    /// Per-mode Fock-space oracle against the closed form
    OracleFock,
    /// Exact diagonalization of the full chain (N <= 13)
    OracleEd,
    /// Per-mode table: k, momentum, energies, angles
    Modes,
    /// Throughput of the surface kernel
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Loschmidt echo of a central qubit coupled to an XY spin chain.
///
/// Values are resolved as defaults < config file < LOSCHMIDT_THREADS < flags.
#[derive(Debug, Parser)]
#[command(name = "loschmidt", version)]
pub struct Cli {
    /// Command to run (may also come from the config file)
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Chain size N, odd [default: 201]
    #[arg(long)]
    pub n: Option<usize>,
    /// Anisotropy gamma >= 0 [default: 1.0]
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Transverse field lambda [default: 0.9]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Qubit-bath coupling delta [default: 0.1]
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Rotation angle phi about z [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Level splitting w_e of the central qubit [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub we: Option<f64>,
    /// Amplitude alpha as `re` or `re,im`; the pair is normalized [default: 1/sqrt 2]
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Amplitude beta as `re` or `re,im` [default: 1/sqrt 2]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// End of the time axis, which starts at 0 [default: 20]
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of time points [default: 201]
    #[arg(long)]
    pub t_steps: Option<usize>,
    /// Start of the lambda axis [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_min: Option<f64>,
    /// End of the lambda axis [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_max: Option<f64>,
    /// Number of lambda points [default: 201]
    #[arg(long)]
    pub lambda_steps: Option<usize>,
    /// Excited modes, e.g. `1,4,10-20` [default: none]
    #[arg(long)]
    pub excited: Option<String>,
    /// Output file; a `<out>.meta.json` sidecar is written next to it [default: none]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for surfaces [default: available cores]
    #[arg(long, env = "LOSCHMIDT_THREADS")]
    pub threads: Option<usize>,
    /// TOML config file with the same keys as the flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suppress the JSON summary on stdout
    #[arg(long)]
    pub quiet: bool,
}

/// Config-file schema. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excited: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quiet: Option<bool>,
}

/// Fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: BathParams,
    pub qubit: CentralQubit,
    pub t_axis: Axis,
    pub lambda_axis: Axis,
    pub pattern: ExcitationPattern,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub quiet: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or parameters (exit 2).
    Usage(String),
    /// Reading or writing files failed (exit 3).
    Io(String),
    /// An oracle disagreed with the closed form beyond tolerance (exit 4).
    Disagreement(String, Value),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Disagreement(..) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Disagreement(m, _) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => CliError::Io(e.to_string()),
            Error::Json(e) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "cannot parse amplitude `{text}`; expected `re` or `re,im`"
        ))
    };
    let mut parts = text.split(',').map(str::trim);
    let re = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let im = match parts.next() {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        CliError::Usage(format!(
            "config {}: {}",
            path.display(),
            msg.lines().last().unwrap_or_default().trim()
        ))
    })
}

/// Resolves defaults, config file and flags into a [`RunConfig`].
pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(p) => read_config(p)?,
        None => ConfigFile::default(),
    };
    let command = cli
        .command
        .or(file.command)
        .ok_or_else(|| CliError::Usage("no command given".into()))?;

    let params = BathParams {
        n_sites: cli.n.or(file.n_sites).unwrap_or(201),
        gamma: cli.gamma.or(file.gamma).unwrap_or(1.0),
        lambda_field: cli.lambda.or(file.lambda).unwrap_or(0.9),
        delta: cli.delta.or(file.delta).unwrap_or(0.1),
        phi: cli.phi.or(file.phi).unwrap_or(0.0),
    }
    .validate()?;

    let default_amp = std::f64::consts::FRAC_1_SQRT_2;
    let alpha = match &cli.alpha {
        Some(s) => parse_complex(s)?,
        None => Complex64::new(
            file.alpha_re.unwrap_or(default_amp),
            file.alpha_im.unwrap_or(0.0),
        ),
    };
    let beta = match &cli.beta {
        Some(s) => parse_complex(s)?,
        None => Complex64::new(
            file.beta_re.unwrap_or(default_amp),
            file.beta_im.unwrap_or(0.0),
        ),
    };
    let w_e = cli.we.or(file.w_e).unwrap_or(0.0);
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    let qubit = if (norm - 1.0).abs() <= NORM_TOL {
        CentralQubit::new(alpha, beta, w_e)?
    } else {
        CentralQubit::normalized(alpha, beta, w_e)?
    };

    let t_axis = Axis::new(
        0.0,
        cli.t_max.or(file.t_max).unwrap_or(20.0),
        cli.t_steps.or(file.t_steps).unwrap_or(201),
    )?;
    let lambda_axis = Axis::new(
        cli.lambda_min.or(file.lambda_min).unwrap_or(0.0),
        cli.lambda_max.or(file.lambda_max).unwrap_or(2.0),
        cli.lambda_steps.or(file.lambda_steps).unwrap_or(201),
    )?;
    let pattern = match cli.excited.as_deref().or(file.excited.as_deref()) {
        Some(s) => ExcitationPattern::parse(s, params.mode_count())?,
        None => ExcitationPattern::ground(),
    };
    let threads = cli
        .threads
        .or(file.threads)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::Usage("--threads must be >= 1".into()));
    }

    Ok(RunConfig {
        command,
        params,
        qubit,
        t_axis,
        lambda_axis,
        pattern,
        output: cli.out.or(file.out),
        format: cli.format.or(file.format).unwrap_or_default(),
        threads,
        quiet: cli.quiet || file.quiet.unwrap_or(false),
    })
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let text = e.to_string();
        CliError::Usage(text.lines().next().unwrap_or_default().to_string())
    })?;
    resolve(cli)
}

impl RunConfig {
    /// Config file that resolves back to this run.
    pub fn to_config_file(&self) -> ConfigFile {
        ConfigFile {
            command: Some(self.command),
            n_sites: Some(self.params.n_sites),
            gamma: Some(self.params.gamma),
            lambda: Some(self.params.lambda_field),
            delta: Some(self.params.delta),
            phi: Some(self.params.phi),
            alpha_re: Some(self.qubit.alpha.re),
            alpha_im: Some(self.qubit.alpha.im),
            beta_re: Some(self.qubit.beta.re),
            beta_im: Some(self.qubit.beta.im),
            w_e: Some(self.qubit.w_e),
            t_max: Some(self.t_axis.stop),
            t_steps: Some(self.t_axis.steps),
            lambda_min: Some(self.lambda_axis.start),
            lambda_max: Some(self.lambda_axis.stop),
            lambda_steps: Some(self.lambda_axis.steps),
            excited: (!self.pattern.is_empty()).then(|| self.pattern.to_spec_string()),
            out: self.output.clone(),
            format: Some(self.format),
            threads: Some(self.threads),
            quiet: Some(self.quiet),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config_file()).expect("config serializes")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_sidecar(path: &Path, config: &RunConfig) -> Result<(), CliError> {
    let meta = json!({ "tool_version": TOOL_VERSION, "config": config });
    let mut text = serde_json::to_string_pretty(&meta).map_err(Error::from)?;
    text.push('\n');
    std::fs::write(sidecar_path(path), text)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes `csv` or `json` output depending on the configured format, plus the sidecar.
fn emit<F>(config: &RunConfig, json_doc: impl FnOnce() -> Value, csv: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let Some(path) = &config.output else {
        return Ok(());
    };
    let mut out = create(path)?;
    match config.format {
        Format::Csv => csv(&mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &json_doc()).map_err(Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    write_sidecar(path, config)
}

fn summary(config: &RunConfig, extra: Value) -> Value {
    let mut v = json!({
        "command": config.command,
        "tool_version": TOOL_VERSION,
        "params": config.params,
        "output": config.output,
    });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    v
}

/// Executes a resolved run and returns its JSON summary.
pub fn run(config: &RunConfig) -> Result<Value, CliError> {
    let times = config.t_axis.points();
    match config.command {
        Command::Trace => {
            let table = ModeTable::build(&config.params)?;
            let trace = EchoTrace::from_table(&table, &times, true);
            emit(
                config,
                || json!({ "tool_version": TOOL_VERSION, "params": config.params, "trace": trace }),
                |w| trace.write_csv(w),
            )?;
            Ok(summary(
                config,
                json!({
                    "points": trace.len(),
                    "min_l": trace.min_l(),
                    "max_l": trace.max_l(),
                    "quasiperiod": quasiperiod(&trace),
                }),
            ))
        }
        Command::Excited => {
            let table = ModeTable::build(&config.params)?;
            let trace = EchoTrace::excited(&table, &config.pattern, &times)?;
            emit(
                config,
                || {
                    json!({
                        "tool_version": TOOL_VERSION,
                        "params": config.params,
                        "excited": config.pattern.modes(),
                        "trace": trace,
                    })
                },
                |w| trace.write_csv(w),
            )?;
            Ok(summary(
                config,
                json!({
                    "excited": config.pattern.to_spec_string(),
                    "excited_count": config.pattern.modes().len(),
                    "points": trace.len(),
                    "min_l": trace.min_l(),
                    "max_l": trace.max_l(),
                    "constant_one": trace.l_values.iter().all(|&l| (l - 1.0).abs() <= 1e-12),
                }),
            ))
        }
        Command::Purity => {
            let table = ModeTable::build(&config.params)?;
            let trace = EchoTrace::from_table(&table, &times, true);
            let r_values = trace.r_values.as_deref().unwrap_or_default();
            let mut rows = Vec::with_capacity(times.len());
            for ((&t, &l), &r) in times.iter().zip(&trace.l_values).zip(r_values) {
                let rho = reduced_density(&config.qubit, r, t)?;
                let p = purity(&config.qubit, l.clamp(0.0, 1.0))?;
                rows.push((t, l, p, rho));
            }
            emit(
                config,
                || {
                    let data: Vec<Value> = rows
                        .iter()
                        .map(|(t, l, p, rho)| json!({"t": t, "L": l, "purity": p, "rho": rho.entries}))
                        .collect();
                    json!({
                        "tool_version": TOOL_VERSION,
                        "params": config.params,
                        "qubit": config.qubit,
                        "samples": data,
                    })
                },
                |w| {
                    writeln!(w, "t,L,P,rho00,rho11,Re_rho01,Im_rho01")?;
                    for (t, l, p, rho) in &rows {
                        let e = rho.entries;
                        writeln!(
                            w,
                            "{t},{l},{p},{},{},{},{}",
                            e[0][0].re, e[1][1].re, e[0][1].re, e[0][1].im
                        )?;
                    }
                    Ok(())
                },
            )?;
            let min_p = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
            Ok(summary(
                config,
                json!({ "qubit": config.qubit, "points": rows.len(), "min_purity": min_p }),
            ))
        }
        Command::Surface => {
            let grid = surface_with_workers(
                &config.params,
                config.lambda_axis,
                config.t_axis,
                config.threads,
            )?;
            if let Some(path) = &config.output {
                match config.format {
                    Format::Csv => write_grid(&grid, path)?,
                    Format::Json => {
                        let mut out = create(path)?;
                        serde_json::to_writer_pretty(
                            &mut out,
                            &json!({
                                "tool_version": TOOL_VERSION,
                                "lambda": grid.lambda_axis.points(),
                                "t": grid.t_axis.points(),
                                "grid": grid,
                            }),
                        )
                        .map_err(Error::from)?;
                        writeln!(out)?;
                        out.flush()?;
                        let mut meta = grid_sidecar_json(&grid).map_err(Error::from)?;
                        meta.push('\n');
                        std::fs::write(sidecar_path(path), meta)?;
                    }
                }
            }
            Ok(summary(
                config,
                json!({
                    "lambda_axis": grid.lambda_axis,
                    "t_axis": grid.t_axis,
                    "min": grid.min(),
                    "max": grid.max(),
                    "decayed_rows": grid.decayed_rows(DECAY_THRESHOLD),
                    "decay_threshold": DECAY_THRESHOLD,
                }),
            ))
        }
        Command::Modes => {
            let table = ModeTable::build(&config.params)?;
            emit(
                config,
                || json!({ "tool_version": TOOL_VERSION, "table": table }),
                |w| table.write_csv(w),
            )?;
            Ok(summary(config, json!({ "modes": table.len() })))
        }
        Command::OracleFock => {
            let m = config.params.mode_count();
            let mut results = Vec::with_capacity(m * times.len());
            for k in 1..=m {
                for &t in &times {
                    results.push(fock_mode_check(k, &config.params, t)?);
                }
            }
            emit(
                config,
                || json!({ "tool_version": TOOL_VERSION, "params": config.params, "results": results }),
                |w| {
                    writeln!(w, "k,t,Re_closed,Im_closed,Re_oracle,Im_oracle,abs_diff")?;
                    for r in &results {
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{}",
                            r.k,
                            r.t,
                            r.r_closed.re,
                            r.r_closed.im,
                            r.r_oracle.re,
                            r.r_oracle.im,
                            r.abs_diff
                        )?;
                    }
                    Ok(())
                },
            )?;
            let max_diff = results.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
            let s = summary(
                config,
                json!({ "checks": results.len(), "max_abs_diff": max_diff, "tolerance": FOCK_TOL }),
            );
            if max_diff > FOCK_TOL {
                return Err(CliError::Disagreement(
                    format!("Fock oracle deviates by {max_diff:e} > {FOCK_TOL:e}"),
                    s,
                ));
            }
            Ok(s)
        }
        Command::OracleEd => {
            let res = ed_loschmidt(&config.params, &times)?;
            emit(
                config,
                || json!({ "tool_version": TOOL_VERSION, "params": config.params, "result": res }),
                |w| res.write_csv(w),
            )?;
            let s = summary(
                config,
                json!({
                    "points": res.times.len(),
                    "max_abs_dev": res.max_abs_dev,
                    "max_sector_dev": res.max_sector_dev,
                    "tolerance": ED_SECTOR_TOL,
                    "ground_energy": res.ground_energy,
                    "gap": res.gap,
                    "parity": res.parity,
                    "substeps": res.substeps,
                }),
            );
            if !config.quiet {
                eprintln!("max_abs_dev = {:e}", res.max_abs_dev);
            }
            if res.max_sector_dev > ED_SECTOR_TOL {
                return Err(CliError::Disagreement(
                    format!(
                        "ED deviates from the sector-resolved product by {:e}",
                        res.max_sector_dev
                    ),
                    s,
                ));
            }
            Ok(s)
        }
        Command::Bench => {
            let m = config.params.mode_count();
            let evaluations = config.lambda_axis.steps * config.t_axis.steps * m;
            let start = Instant::now();
            let grid = surface_with_workers(
                &config.params,
                config.lambda_axis,
                config.t_axis,
                config.threads,
            )?;
            let secs = start.elapsed().as_secs_f64();
            std::hint::black_box(&grid);
            Ok(summary(
                config,
                json!({
                    "threads": config.threads,
                    "mode_evaluations": evaluations,
                    "seconds": secs,
                    "mode_evaluations_per_second": evaluations as f64 / secs.max(1e-12),
                }),
            ))
        }
    }
}

/// Entry point used by the binary. Returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    // help and version go through clap's own printing
    if let Err(e) = Cli::try_parse_from(&argv) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            let _ = e.print();
            return 0;
        }
    }
    let config = match parse_args(&argv) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message().trim_start_matches("error: "));
            return e.exit_code();
        }
    };
    match run(&config) {
        Ok(s) => {
            if !config.quiet {
                println!("{s}");
            }
            0
        }
        Err(e) => {
            if let CliError::Disagreement(_, s) = &e {
                if !config.quiet {
                    println!("{s}");
                }
            }
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
