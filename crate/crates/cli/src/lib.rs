//! Command-line frontend: argument parsing and subcommand dispatch.
//!
//! [`run`] never panics on bad input and never calls `exit`; it returns the
//! process status so tests can drive it in-process.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use gdt_core::harness::{self, scenarios};
use gdt_core::io::{self as gio, fmt_num};
use gdt_core::{
    analyze_with_residual, apply_filter, convolve, eigen_check, synthesize, Basis, BuiltinBasis, Error, RenderMode,
    Signal, TransferFunction,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "gdt",
    version,
    about = "Generic discrete transform over single-function bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report the convergence ratio and class of a basis.
    CheckBasis {
        #[command(flatten)]
        basis: BasisArgs,
    },
    /// Analyze a signal into a polar spectrum (CSV on stdout unless --out).
    Analyze {
        #[arg(long)]
        signal: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a signal from a polar spectrum.
    Synth {
        #[arg(long)]
        spectrum: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        /// Defaults to the file's `# mode=` line, else band-limited.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Output length. Defaults to the file's `# n=` line, else 2*(K+1).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiply a signal's spectrum by a real transfer function.
    Filter {
        #[arg(long)]
        signal: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        gain: GainArgs,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convolve two signals in the basis domain.
    Convolve {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether a signal is an eigenfunction of a filter.
    Eigen {
        #[arg(long)]
        signal: PathBuf,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        gain: GainArgs,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Run a frozen experiment.
    #[command(long_about = DEMO_HELP)]
    Demo {
        #[arg(value_enum)]
        figure: Figure,
        /// Directory for the CSV artifacts; nothing is written without it.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
}

const DEMO_HELP: &str = "Run a frozen experiment.

fig1  order sweep: f(x) = exp(sin x) + 0.5 cos(3x+1) - 0.3 sin(7x), N = 128,
      Nyquist bin removed, generic basis (m, amplitude, phase) =
      (1,1,0) (2,0.5,1.3) (3,0.35,0.4) (5,0.2,2.2) (7,0.1,5.0),
      orders 10, 30, 63
fig3  sin x at N = 128 rebuilt from the 21 lowest nonzero components in the
      square basis (99 harmonics)
fig5  the fig3 reconstruction against the best 32-coefficient Haar
      approximation of the same sine
fig6  band-limited square wave delayed by 11 samples, N = 128, plus
      0.3 cos(k x + p) for (k, p) = (9,0.4) (17,1.9) (26,3.3) (40,5.1);
      square basis (99 harmonics), cutoff 1";

#[derive(Args, Debug)]
#[group(skip)]
#[command(group = ArgGroup::new("basis_source").required(true).args(["builtin", "basis_file"]))]
struct BasisArgs {
    /// Built-in basis: square, sawtooth, triangle or cosine.
    #[arg(long, alias = "basis-builtin", conflicts_with = "basis_file")]
    builtin: Option<String>,
    /// Highest harmonic of a built-in basis.
    #[arg(long, default_value_t = 99, requires = "builtin")]
    harmonics: usize,
    /// Basis CSV with `m,amplitude,phase` rows.
    #[arg(long)]
    basis_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct GainArgs {
    /// allpass, lowpass:K, highpass:K or keep:K1,K2,...
    #[arg(long)]
    gain: Option<String>,
    /// Transfer CSV with `k,gain` rows.
    #[arg(long)]
    gain_file: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    BandLimited,
    Sampled,
}

impl From<Mode> for RenderMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::BandLimited => RenderMode::BandLimited,
            Mode::Sampled => RenderMode::Sampled,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Figure {
    Fig1,
    Fig3,
    Fig5,
    Fig6,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_io() { EXIT_IO } else { EXIT_DOMAIN },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn at_path(path: &Path) -> impl Fn(Failure) -> Failure + '_ {
    move |f| Failure {
        message: format!("{}: {}", path.display(), f.message),
        ..f
    }
}

fn open(path: &Path) -> std::result::Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| at_path(path)(e.into()))
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| at_path(path)(e.into()))
}

fn load<T>(path: &Path, read: impl FnOnce(BufReader<File>) -> gdt_core::Result<T>) -> std::result::Result<T, Failure> {
    read(open(path)?).map_err(|e| at_path(path)(e.into()))
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn resolve_basis(args: &BasisArgs) -> std::result::Result<Basis, Failure> {
    match (&args.builtin, &args.basis_file) {
        (Some(name), _) => Ok(Basis::builtin(name.parse::<BuiltinBasis>()?, args.harmonics)?),
        (None, Some(path)) => load(path, gio::read_basis),
        (None, None) => unreachable!("clap requires one basis source"),
    }
}

fn resolve_gain(args: &GainArgs, k_max: usize) -> std::result::Result<TransferFunction, Failure> {
    match (&args.gain, &args.gain_file) {
        (Some(spec), _) => Ok(TransferFunction::from_shorthand(spec, k_max)?),
        (None, Some(path)) => load(path, gio::read_transfer),
        (None, None) => unreachable!("clap requires one gain source"),
    }
}

fn resolve_mode(mode: Option<Mode>, fallback: RenderMode, stderr: &mut dyn Write) -> RenderMode {
    let mode = mode.map(RenderMode::from).unwrap_or(fallback);
    if mode == RenderMode::Sampled {
        let _ = writeln!(
            stderr,
            "warning: sampled mode aliases harmonics above Nyquist; perfect reconstruction is not guaranteed"
        );
    }
    mode
}

fn emit_signal(s: &Signal, out: Option<&Path>, meta: &[(&str, String)], stdout: &mut dyn Write) -> Outcome {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            gio::write_signal(&mut w, s, meta).map_err(|e| at_path(path)(e.into()))?;
            w.flush()?;
            writeln!(stdout, "n={}", s.len())?;
            writeln!(stdout, "rms={}", fmt_num(s.rms()))?;
            writeln!(stdout, "out={}", path.display())?;
            Ok(())
        }
        None => Ok(gio::write_signal(stdout, s, meta)?),
    }
}

fn kv(w: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Outcome {
    writeln!(w, "{key}={value}")?;
    Ok(())
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    match command {
        Command::CheckBasis { basis } => {
            let b = resolve_basis(&basis)?;
            let report = b.convergence_report();
            kv(stdout, "basis", b.label())?;
            kv(stdout, "nonzero_harmonics", b.harmonics().len())?;
            kv(stdout, "max_harmonic", b.harmonics().last().map_or(0, |h| h.index))?;
            kv(stdout, "ratio", fmt_num(report.ratio))?;
            kv(stdout, "classification", report.classification)
        }
        Command::Analyze {
            signal,
            basis,
            mode,
            out,
        } => {
            let f = load(&signal, gio::read_signal)?;
            let b = resolve_basis(&basis)?;
            let mode = resolve_mode(mode, RenderMode::BandLimited, stderr);
            let a = analyze_with_residual(&f, &b.normalize(), mode);
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    gio::write_spectrum(&mut w, &a.spectrum, Some(f.len())).map_err(|e| at_path(&path)(e.into()))?;
                    w.flush()?;
                    kv(stdout, "n", f.len())?;
                    kv(stdout, "k_max", a.spectrum.k_max())?;
                    kv(stdout, "dc", fmt_num(a.spectrum.dc))?;
                    kv(
                        stdout,
                        "components",
                        a.spectrum.nonzero_frequencies(harness::COMPONENT_FLOOR).len(),
                    )?;
                    kv(stdout, "residual_rms", fmt_num(a.residual.rms()))?;
                    kv(stdout, "out", path.display())
                }
                None => Ok(gio::write_spectrum(stdout, &a.spectrum, Some(f.len()))?),
            }
        }
        Command::Synth {
            spectrum,
            basis,
            mode,
            n,
            out,
        } => {
            let file = load(&spectrum, gio::read_spectrum)?;
            let b = resolve_basis(&basis)?;
            let mode = resolve_mode(mode, file.spectrum.mode, stderr);
            let n = n.or(file.n).unwrap_or(2 * (file.spectrum.k_max() + 1));
            let s = synthesize(&file.spectrum, &b.normalize(), n, mode)?;
            let meta = [("basis", b.label().to_string()), ("mode", mode.to_string())];
            emit_signal(&s, out.as_deref(), &meta, stdout)
        }
        Command::Filter {
            signal,
            basis,
            gain,
            mode,
            out,
        } => {
            let f = load(&signal, gio::read_signal)?;
            let b = resolve_basis(&basis)?;
            let g = resolve_gain(&gain, f.k_max())?;
            let mode = resolve_mode(mode, RenderMode::BandLimited, stderr);
            let s = apply_filter(&f, &b.normalize(), &g, mode)?;
            let meta = [("basis", b.label().to_string()), ("mode", mode.to_string())];
            emit_signal(&s, out.as_deref(), &meta, stdout)
        }
        Command::Convolve {
            signal,
            kernel,
            basis,
            mode,
            out,
        } => {
            let f = load(&signal, gio::read_signal)?;
            let g = load(&kernel, gio::read_signal)?;
            let b = resolve_basis(&basis)?;
            let mode = resolve_mode(mode, RenderMode::BandLimited, stderr);
            let s = convolve(&f, &g, &b.normalize(), mode)?;
            let meta = [("basis", b.label().to_string()), ("mode", mode.to_string())];
            emit_signal(&s, out.as_deref(), &meta, stdout)
        }
        Command::Eigen {
            signal,
            basis,
            gain,
            mode,
        } => {
            let f = load(&signal, gio::read_signal)?;
            let b = resolve_basis(&basis)?;
            let g = resolve_gain(&gain, f.k_max())?;
            let mode = resolve_mode(mode, RenderMode::BandLimited, stderr);
            let r = eigen_check(&f, &b.normalize(), &g, mode)?;
            kv(stdout, "is_eigenfunction", r.is_eigenfunction)?;
            kv(stdout, "eigen_modulus", fmt_num(r.eigen_modulus))?;
            kv(stdout, "eigen_phase", fmt_num(r.eigen_phase))?;
            kv(stdout, "residual_rms", fmt_num(r.residual_rms))
        }
        Command::Demo { figure, out_dir, mode } => {
            let mode = resolve_mode(mode, RenderMode::BandLimited, stderr);
            demo(figure, out_dir.as_deref(), mode, stdout)
        }
    }
}

fn write_artifact(
    dir: Option<&Path>,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> gdt_core::Result<()>,
) -> Outcome {
    let Some(dir) = dir else { return Ok(()) };
    std::fs::create_dir_all(dir).map_err(|e| at_path(dir)(e.into()))?;
    let path = dir.join(name);
    let mut w = create(&path)?;
    body(&mut w).map_err(|e| at_path(&path)(e.into()))?;
    w.flush().map_err(|e| at_path(&path)(e.into()))
}

fn demo(figure: Figure, dir: Option<&Path>, mode: RenderMode, stdout: &mut dyn Write) -> Outcome {
    let meta = |label: &str, n: usize| {
        vec![
            ("basis", label.to_string()),
            ("mode", mode.to_string()),
            ("n", n.to_string()),
        ]
    };
    match figure {
        Figure::Fig1 => {
            let f = scenarios::sweep_signal();
            let b = scenarios::sweep_basis();
            let r = harness::reconstruct_experiment(&f, &b, &scenarios::SWEEP_ORDERS, mode)?;
            kv(stdout, "basis", &r.basis_label)?;
            kv(stdout, "n", r.n)?;
            kv(stdout, "signal_rms", fmt_num(f.rms()))?;
            for (o, e) in r.orders.iter().zip(&r.rms_errors) {
                kv(stdout, &format!("rms_error_order_{o}"), fmt_num(*e))?;
            }
            write_artifact(dir, "fig1_signal.csv", |w| {
                gio::write_signal(w, &f, &meta(b.label(), f.len()))
            })?;
            write_artifact(dir, "fig1_report.csv", |w| gio::write_reconstruction_report(w, &r))
        }
        Figure::Fig3 => {
            let f = scenarios::sine(scenarios::SINE_N);
            let b = scenarios::square();
            let r = harness::component_reconstruct(&f, &b, scenarios::SQUARE_COMPONENTS, mode)?;
            kv(stdout, "n", f.len())?;
            kv(stdout, "components", r.frequencies.len())?;
            kv(stdout, "highest_frequency", r.frequencies.last().copied().unwrap_or(0))?;
            kv(stdout, "rms_error", fmt_num(r.rms_error))?;
            write_artifact(dir, "fig3_reconstruction.csv", |w| {
                gio::write_signal(w, &r.signal, &meta(b.label(), f.len()))
            })?;
            write_artifact(dir, "fig3_spectrum.csv", |w| {
                gio::write_spectrum(w, &r.spectrum, Some(f.len()))
            })
        }
        Figure::Fig5 => {
            let f = scenarios::sine(scenarios::SINE_N);
            let b = scenarios::square();
            let r = harness::haar_comparison(&f, &b, scenarios::SQUARE_COMPONENTS, scenarios::HAAR_COEFFICIENTS, mode)?;
            kv(stdout, "n", f.len())?;
            kv(stdout, "gdt_components", r.gdt.frequencies.len())?;
            kv(stdout, "gdt_rms_error", fmt_num(r.gdt.rms_error))?;
            kv(stdout, "components_up_to_55", r.components_up_to_55)?;
            kv(stdout, "haar_coefficients", r.haar_coefficients)?;
            kv(stdout, "haar_rms_error", fmt_num(r.haar_rms))?;
            kv(stdout, "gdt_wins", r.gdt.rms_error < r.haar_rms)?;
            write_artifact(dir, "fig5_haar.csv", |w| {
                gio::write_signal(
                    w,
                    &r.haar_signal,
                    &[("method", "haar".into()), ("n", f.len().to_string())],
                )
            })?;
            write_artifact(dir, "fig5_gdt.csv", |w| {
                gio::write_signal(w, &r.gdt.signal, &meta(b.label(), f.len()))
            })
        }
        Figure::Fig6 => {
            let (clean, noisy) = scenarios::separation_signals();
            let b = scenarios::square();
            let cutoff = 1;
            let r = harness::noise_separation(&noisy, &b, cutoff, mode, Some(&clean))?;
            let n = noisy.len();
            let relative = r.kept_rms_error_vs_reference.unwrap_or(f64::NAN) / clean.rms();
            kv(stdout, "n", n)?;
            kv(stdout, "cutoff", cutoff)?;
            kv(stdout, "kept_rms", fmt_num(r.kept.rms()))?;
            kv(stdout, "residual_rms", fmt_num(r.residual.rms()))?;
            kv(stdout, "kept_relative_error", fmt_num(relative))?;
            kv(stdout, "threshold", fmt_num(scenarios::SEPARATION_THRESHOLD))?;
            write_artifact(dir, "fig6_noisy.csv", |w| {
                gio::write_signal(w, &noisy, &meta(b.label(), n))
            })?;
            write_artifact(dir, "fig6_clean.csv", |w| {
                gio::write_signal(w, &clean, &meta(b.label(), n))
            })?;
            write_artifact(dir, "fig6_kept.csv", |w| {
                gio::write_signal(w, &r.kept, &meta(b.label(), n))
            })?;
            write_artifact(dir, "fig6_residual.csv", |w| {
                gio::write_signal(w, &r.residual, &meta(b.label(), n))
            })?;
            write_artifact(dir, "fig6_summary.csv", |w| {
                gio::write_summary(w, &meta(b.label(), n), &gio::separation_summary(&r, cutoff))
            })
        }
    }
}
