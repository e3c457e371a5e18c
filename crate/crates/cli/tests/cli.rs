use std::fs;
use std::path::Path;

use gdt_cli::{run, EXIT_DOMAIN, EXIT_IO, EXIT_USAGE};
use gdt_core::io::{read_signal, write_signal};
use gdt_core::{apply_filter, Basis, BuiltinBasis, RenderMode, Signal, TransferFunction};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn gdt(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("gdt").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key}= line in {text:?}"))
}

fn test_signal(n: usize) -> Signal {
    Signal::from_fn(n, |x| {
        0.3 + (x + 0.2).sin().exp() - 0.4 * (5.0 * x).cos() + 0.1 * (17.0 * x + 1.0).sin()
    })
    .unwrap()
    .without_nyquist()
}

fn save(path: &Path, s: &Signal) {
    write_signal(fs::File::create(path).unwrap(), s, &[]).unwrap();
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_basis_square() {
    let r = gdt(&["check-basis", "--builtin", "square", "--harmonics", "999"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let ratio: f64 = value(&r.out, "ratio").parse().unwrap();
    assert!((ratio - 0.2337).abs() < 1e-3);
    assert_eq!(value(&r.out, "classification"), "Converging");
}

#[test]
fn check_basis_without_fundamental() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nofund.csv");
    fs::write(&path, "m,amplitude,phase\n2,1,0\n3,0.5,0\n").unwrap();
    let r = gdt(&["check-basis", "--basis-file", p(&path)]);
    assert_eq!(r.code, EXIT_DOMAIN);
    assert!(r.err.contains("fundamental"), "{}", r.err);
    assert_eq!(r.err.lines().count(), 1);
}

#[test]
fn analyze_then_synth_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = test_signal(64);
    let sig = dir.path().join("f.csv");
    let spec = dir.path().join("spec.csv");
    let back = dir.path().join("back.csv");
    save(&sig, &f);

    let r = gdt(&[
        "analyze",
        "--signal",
        p(&sig),
        "--basis-builtin",
        "square",
        "--harmonics",
        "99",
        "--mode",
        "band-limited",
        "--out",
        p(&spec),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(value(&r.out, "n"), "64");

    let r = gdt(&[
        "synth",
        "--spectrum",
        p(&spec),
        "--builtin",
        "square",
        "--out",
        p(&back),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let g = read_signal(fs::File::open(&back).unwrap()).unwrap();
    assert!(g.rms_diff(&f).unwrap() < 1e-9 * f.rms());
}

#[test]
fn filter_matches_the_library_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let f = test_signal(32);
    let sig = dir.path().join("f.csv");
    let out = dir.path().join("y.csv");
    save(&sig, &f);
    let r = gdt(&[
        "filter",
        "--signal",
        p(&sig),
        "--builtin",
        "sawtooth",
        "--harmonics",
        "20",
        "--gain",
        "lowpass:4",
        "--out",
        p(&out),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);

    // the CLI sees the 12-digit text, so the library must too
    let f = read_signal(fs::File::open(&sig).unwrap()).unwrap();
    let b = Basis::builtin(BuiltinBasis::Sawtooth, 20).unwrap();
    let g = TransferFunction::lowpass(f.k_max(), 4);
    let y = apply_filter(&f, &b.normalize(), &g, RenderMode::BandLimited).unwrap();
    let mut expected = Vec::new();
    write_signal(
        &mut expected,
        &y,
        &[("basis", "sawtooth".into()), ("mode", "band_limited".into())],
    )
    .unwrap();
    assert_eq!(fs::read(&out).unwrap(), expected);
}

#[test]
fn gain_file_and_stdout_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = test_signal(16);
    let sig = dir.path().join("f.csv");
    let gains = dir.path().join("g.csv");
    save(&sig, &f);
    fs::write(&gains, "k,gain\n0,1\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n7,1\n").unwrap();
    let r = gdt(&[
        "filter",
        "--signal",
        p(&sig),
        "--builtin",
        "cosine",
        "--gain-file",
        p(&gains),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let y = read_signal(r.out.as_bytes()).unwrap();
    assert!(y.rms_diff(&f).unwrap() < 1e-9);

    fs::write(&gains, "1,1\n3,1\n").unwrap();
    let r = gdt(&[
        "filter",
        "--signal",
        p(&sig),
        "--builtin",
        "cosine",
        "--gain-file",
        p(&gains),
    ]);
    assert_eq!(r.code, EXIT_IO);
}

#[test]
fn eigen_and_convolve() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("cos.csv");
    save(&sig, &Signal::from_fn(64, f64::cos).unwrap());
    let r = gdt(&["eigen", "--signal", p(&sig), "--builtin", "square", "--gain", "keep:1"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(value(&r.out, "is_eigenfunction"), "false");

    let square = Basis::builtin(BuiltinBasis::Square, 99)
        .unwrap()
        .normalize()
        .render(1, 0.0, 1.0, 64, RenderMode::BandLimited)
        .unwrap();
    save(&sig, &square);
    let r = gdt(&["eigen", "--signal", p(&sig), "--builtin", "square", "--gain", "keep:1"]);
    assert_eq!(value(&r.out, "is_eigenfunction"), "true");

    let r = gdt(&[
        "convolve",
        "--signal",
        p(&sig),
        "--kernel",
        p(&sig),
        "--builtin",
        "square",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(read_signal(r.out.as_bytes()).unwrap().len(), 64);
}

#[test]
fn sampled_mode_warns() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("f.csv");
    save(&sig, &test_signal(16));
    let r = gdt(&[
        "analyze",
        "--signal",
        p(&sig),
        "--builtin",
        "square",
        "--mode",
        "sampled",
    ]);
    assert_eq!(r.code, 0);
    assert!(r.err.starts_with("warning:"));
    assert!(r.out.contains("# mode=sampled"));
    let r = gdt(&["analyze", "--signal", p(&sig), "--builtin", "square"]);
    assert!(r.err.is_empty());
}

#[test]
fn demos() {
    let dir = tempfile::tempdir().unwrap();
    let r = gdt(&["demo", "fig5"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(value(&r.out, "gdt_wins"), "true");
    assert_eq!(value(&r.out, "gdt_components"), "21");

    let r = gdt(&["demo", "fig6", "--out-dir", p(dir.path())]);
    assert_eq!(r.code, 0, "{}", r.err);
    let err: f64 = value(&r.out, "kept_relative_error").parse().unwrap();
    assert!(err < 1e-9);
    for name in ["fig6_kept.csv", "fig6_residual.csv", "fig6_summary.csv"] {
        assert!(fs::read_to_string(dir.path().join(name))
            .unwrap()
            .starts_with("# basis=square\n"));
    }

    let a = gdt(&["demo", "fig1"]);
    let b = gdt(&["demo", "fig1"]);
    assert_eq!(a.out, b.out);
    let help = gdt(&["demo", "--help"]);
    assert_eq!(help.code, 0);
    assert!(help.out.contains("(17,1.9)"));
}

#[test]
fn error_exit_codes() {
    assert_eq!(gdt(&[]).code, EXIT_USAGE);
    assert_eq!(gdt(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(gdt(&["check-basis"]).code, EXIT_USAGE);
    assert_eq!(
        gdt(&["check-basis", "--builtin", "square", "--basis-file", "x.csv"]).code,
        EXIT_USAGE
    );
    assert_eq!(gdt(&["demo", "fig2"]).code, EXIT_USAGE);
    assert_eq!(gdt(&["--help"]).code, 0);

    let r = gdt(&["check-basis", "--builtin", "hexagon"]);
    assert_eq!(r.code, EXIT_DOMAIN);
    assert_eq!(
        gdt(&["check-basis", "--builtin", "square", "--harmonics", "0"]).code,
        EXIT_DOMAIN
    );

    let r = gdt(&["analyze", "--signal", "/definitely/not/here.csv", "--builtin", "square"]);
    assert_eq!(r.code, EXIT_IO);
    assert!(r.err.contains("/definitely/not/here.csv"));

    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("odd.csv");
    fs::write(&sig, "1\n2\n3\n4\n5\n").unwrap();
    assert_eq!(
        gdt(&["analyze", "--signal", p(&sig), "--builtin", "square"]).code,
        EXIT_DOMAIN
    );
    fs::write(&sig, "1\nabc\n3\n4\n").unwrap();
    let r = gdt(&["analyze", "--signal", p(&sig), "--builtin", "square"]);
    assert_eq!(r.code, EXIT_IO);
    assert!(r.err.contains("line 2"), "{}", r.err);
}
