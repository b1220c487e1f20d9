//! Command-line front end. Every subcommand maps onto one library call;
//! the binary in `main.rs` only forwards `argv` and the exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use alamouti_blind::harness::{
    decode_burst, histogram_experiment, sweep_q, sweep_samples, sweep_snr, write_histogram_csv,
    write_sweep_csv, Experiment, Manifest,
};
use alamouti_blind::textio::{format_complex, read_matrix};
use alamouti_blind::{DetectorKind, EilsConfig, HistogramConfig, Modulation, SweepConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "alamouti-blind",
    version,
    about = "Blind detection of Alamouti-coded 2x2 MIMO bursts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error rates against SNR.
    SweepSnr(SweepArgs),
    /// Error rates against the number of blocks N (`--n` takes a list).
    SweepN(SweepArgs),
    /// E-ILS error rates against Q, with T = clamp(Q-1, 1, 4) (`--q` takes a list).
    SweepQ(SweepArgs),
    /// Residual and error-count histograms of single ILS runs on one burst.
    Histogram(HistogramArgs),
    /// Decode one received 4xN matrix read from a text file.
    DecodeOnce(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "mod", default_value = "bpsk")]
    pub modulation: Modulation,
    /// Blocks per burst; a comma list for sweep-n.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub n: Vec<usize>,
    /// `start:step:stop`, a comma list, or a single value (dB).
    #[arg(long, default_value = "0:2:12", value_parser = parse_grid)]
    pub snr: Grid,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Maximum ILS executions; a comma list for sweep-q.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub q: Vec<usize>,
    /// Majority threshold (ignored by sweep-q).
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "ml_csi,ils,eils")]
    pub detectors: Vec<DetectorKind>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV path; the manifest goes next to it. Omit to print CSV on stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long = "mod", default_value = "bpsk")]
    pub modulation: Modulation,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Transmit power P in dB.
    #[arg(long = "p-db", default_value_t = 8.0, allow_negative_numbers = true)]
    pub p_db: f64,
    #[arg(long = "noise-var", default_value_t = 1.0)]
    pub noise_var: f64,
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Text matrix with 4 rows; `-` reads stdin.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "mod", default_value = "bpsk")]
    pub modulation: Modulation,
    #[arg(long, default_value_t = 20)]
    pub q: usize,
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("invalid number '{t}'"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if step <= 0.0 || stop < start {
                return Err(format!("empty or unbounded range '{s}'"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok(Grid((0..count).map(|i| start + step * i as f64).collect()))
        }
        [_] => s
            .split(',')
            .map(num)
            .collect::<Result<Vec<_>, _>>()
            .map(Grid),
        _ => Err(format!(
            "expected start:step:stop or a comma list, got '{s}'"
        )),
    }
}

type BoxError = Box<dyn std::error::Error>;

fn single(values: &[usize], flag: &str) -> Result<usize, BoxError> {
    match values {
        [v] => Ok(*v),
        _ => Err(format!("--{flag} takes a single value for this command").into()),
    }
}

fn sweep_config(a: &SweepArgs, blocks: usize, q: usize, t: usize) -> SweepConfig {
    SweepConfig {
        modulation: a.modulation,
        blocks,
        snr_grid_db: a.snr.0.clone(),
        trials: a.trials,
        max_executions: q,
        majority: t,
        seed: a.seed,
        detectors: a.detectors.clone(),
        workers: a.workers,
        ..Default::default()
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the CSV to `--out` plus a manifest beside it, or the CSV alone to `stdout`.
fn emit(
    out: Option<&Path>,
    experiment: Experiment,
    rows: usize,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> alamouti_blind::Result<()>,
) -> Result<(), BoxError> {
    match out {
        None => write(stdout)?,
        Some(path) => {
            let mut w = BufWriter::new(
                File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?,
            );
            write(&mut w)?;
            w.flush()?;
            let mpath = manifest_path(path);
            let mut m = BufWriter::new(
                File::create(&mpath)
                    .map_err(|e| format!("cannot create {}: {e}", mpath.display()))?,
            );
            Manifest::new(experiment, rows, Some(path.display().to_string())).write_json(&mut m)?;
            m.flush()?;
        }
    }
    Ok(())
}

fn run_sweep(kind: &str, a: &SweepArgs, stdout: &mut dyn Write) -> Result<(), BoxError> {
    let (experiment, records) = match kind {
        "snr" => {
            let cfg = sweep_config(a, single(&a.n, "n")?, single(&a.q, "q")?, a.t);
            let recs = sweep_snr(&cfg)?;
            (Experiment::SweepSnr { config: cfg }, recs)
        }
        "n" => {
            let cfg = sweep_config(a, a.n[0], single(&a.q, "q")?, a.t);
            let recs = sweep_samples(&cfg, &a.n)?;
            (
                Experiment::SweepN {
                    config: cfg,
                    n_grid: a.n.clone(),
                },
                recs,
            )
        }
        _ => {
            let cfg = sweep_config(a, single(&a.n, "n")?, a.q[0], a.t);
            let recs = sweep_q(&cfg, &a.q)?;
            (
                Experiment::SweepQ {
                    config: cfg,
                    q_grid: a.q.clone(),
                },
                recs,
            )
        }
    };
    let rows = records.len();
    let exp = experiment.clone();
    emit(a.out.as_deref(), experiment, rows, stdout, |w| {
        write_sweep_csv(w, &exp, &records)
    })
}

fn run_histogram(a: &HistogramArgs, stdout: &mut dyn Write) -> Result<(), BoxError> {
    let cfg = HistogramConfig {
        modulation: a.modulation,
        blocks: a.n,
        power_db: a.p_db,
        noise_var: a.noise_var,
        runs: a.runs,
        residual_bins: a.bins,
        seed: a.seed,
        workers: a.workers,
        ..HistogramConfig::standard()
    };
    let result = histogram_experiment(&cfg)?;
    let rows = result.residual.counts.len() + result.errors.counts.len();
    let experiment = Experiment::Histogram { config: cfg };
    let exp = experiment.clone();
    emit(a.out.as_deref(), experiment, rows, stdout, |w| {
        write_histogram_csv(w, &exp, &result)
    })
}

fn run_decode(a: &DecodeArgs, stdout: &mut dyn Write) -> Result<(), BoxError> {
    let y = if a.input.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        read_matrix(text.as_bytes())?
    } else {
        let f =
            File::open(&a.input).map_err(|e| format!("cannot open {}: {e}", a.input.display()))?;
        read_matrix(BufReader::new(f))?
    };
    let cfg = EilsConfig::new(a.q, a.t)?;
    let res = decode_burst(&y, a.modulation, &cfg, a.seed)?;
    let s = res.best.s_hat.as_matrix();
    for i in 0..s.rows() {
        let row: Vec<String> = s.row(i).iter().map(|&z| format_complex(z)).collect();
        writeln!(stdout, "s_hat[{i}] {}", row.join(" "))?;
    }
    writeln!(stdout, "residual {:.16e}", res.best.residual)?;
    writeln!(stdout, "executions {}", res.executions)?;
    writeln!(stdout, "majority_stop {}", res.stopped_by_majority)?;
    Ok(())
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), BoxError> {
    match &cli.command {
        Command::SweepSnr(a) => run_sweep("snr", a, stdout),
        Command::SweepN(a) => run_sweep("n", a, stdout),
        Command::SweepQ(a) => run_sweep("q", a, stdout),
        Command::Histogram(a) => run_histogram(a, stdout),
        Command::DecodeOnce(a) => run_decode(a, stdout),
    }
}

/// Parses `argv` (program name first) and runs it, writing results to
/// `stdout` and diagnostics to `stderr`. Returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                writeln!(
                    stderr,
                    "{}",
                    text.lines().next().unwrap_or("invalid arguments")
                )
            };
            return code;
        }
    };
    match run(&cli, stdout).and_then(|()| stdout.flush().map_err(Into::into)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

pub fn parse_and_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let mut out = stdout.lock();
    run_with(argv, &mut out, &mut io::stderr())
}
