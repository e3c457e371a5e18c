//! CSV file formats.
//!
//! Every reader skips lines starting with `#`. Writers put `key=value`
//! provenance lines in `#` comments at the top and render numbers with 12
//! significant digits.
//!
//! | file          | rows                                                   |
//! |---------------|--------------------------------------------------------|
//! | signal        | `value` or `index,value` (index `0..N-1` in order)     |
//! | basis         | `m,amplitude,phase`                                    |
//! | spectrum      | `0,dc,0` then `k,modulus,phase` for `k = 1..`          |
//! | transfer      | `k,gain` for `k = 1..`, optional `0,dc_gain`           |
//! | report        | `order,rms_error`                                      |

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::basis::{Basis, Harmonic, RenderMode};
use crate::error::{Error, Result};
use crate::harness::{ReconstructionReport, SeparationReport};
use crate::signal::{Polar, Signal};
use crate::systems::TransferFunction;
use crate::transform::PolarSpectrum;

/// Formats `x` with 12 significant digits, trimming trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Parsed `#` comment lines of the form `key=value`.
pub type Metadata = BTreeMap<String, String>;

struct Table {
    rows: Vec<(usize, Vec<String>)>,
    meta: Metadata,
}

fn read_table(mut reader: impl Read) -> Result<Table> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let meta = text
        .lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(Table { rows, meta })
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| format_err(line, format!("expected a number, found {field:?}")))
}

fn parse_index(line: usize, field: &str) -> Result<usize> {
    field
        .parse::<usize>()
        .map_err(|_| format_err(line, format!("expected a non-negative integer, found {field:?}")))
}

/// Drops a leading header row (any row whose first field is not numeric).
fn skip_header(rows: &mut Vec<(usize, Vec<String>)>) {
    if let Some((_, first)) = rows.first() {
        if first.first().is_some_and(|f| f.parse::<f64>().is_err()) {
            rows.remove(0);
        }
    }
}

fn write_meta(w: &mut impl Write, meta: &[(&str, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Reads a signal in either the one- or two-column form.
pub fn read_signal(reader: impl Read) -> Result<Signal> {
    let mut table = read_table(reader)?;
    skip_header(&mut table.rows);
    let mut values = Vec::with_capacity(table.rows.len());
    for (pos, (line, row)) in table.rows.iter().enumerate() {
        match row.as_slice() {
            [v] => values.push(parse_f64(*line, v)?),
            [i, v] => {
                let index = parse_index(*line, i)?;
                if index != pos {
                    return Err(format_err(*line, format!("expected index {pos}, found {index}")));
                }
                values.push(parse_f64(*line, v)?);
            }
            _ => return Err(format_err(*line, "expected `value` or `index,value`")),
        }
    }
    Signal::from_samples(values)
}

/// Writes `index,value` rows.
pub fn write_signal(mut w: impl Write, s: &Signal, meta: &[(&str, String)]) -> Result<()> {
    write_meta(&mut w, meta)?;
    writeln!(w, "index,value")?;
    for (i, v) in s.samples().iter().enumerate() {
        writeln!(w, "{i},{}", fmt_num(*v))?;
    }
    Ok(())
}

/// Reads `m,amplitude,phase` rows. A `# name=...` comment names the basis.
pub fn read_basis(reader: impl Read) -> Result<Basis> {
    let mut table = read_table(reader)?;
    skip_header(&mut table.rows);
    let mut harmonics = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        match row.as_slice() {
            [m, a, p] => harmonics.push(Harmonic::new(
                parse_index(*line, m)?,
                parse_f64(*line, a)?,
                parse_f64(*line, p)?,
            )),
            _ => return Err(format_err(*line, "expected `m,amplitude,phase`")),
        }
    }
    let basis = Basis::from_harmonics(harmonics)?;
    Ok(match table.meta.get("name") {
        Some(name) => basis.with_name(name.clone()),
        None => basis,
    })
}

pub fn write_basis(mut w: impl Write, b: &Basis) -> Result<()> {
    if let Some(name) = b.name() {
        write_meta(&mut w, &[("name", name.to_string())])?;
    }
    for h in b.harmonics() {
        writeln!(w, "{},{},{}", h.index, fmt_num(h.amplitude), fmt_num(h.phase))?;
    }
    Ok(())
}

/// A spectrum file together with its provenance comments.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFile {
    pub spectrum: PolarSpectrum,
    /// Signal length recorded by the writer, if present.
    pub n: Option<usize>,
    pub meta: Metadata,
}

pub fn read_spectrum(reader: impl Read) -> Result<SpectrumFile> {
    let table = read_table(reader)?;
    let mut rows = table.rows.iter();
    let dc = match rows.next() {
        Some((line, row)) => match row.as_slice() {
            [k, dc, _] if parse_index(*line, k)? == 0 => parse_f64(*line, dc)?,
            _ => return Err(format_err(*line, "first row must be `0,dc,0`")),
        },
        None => return Err(format_err(0, "empty spectrum file")),
    };
    let mut entries = Vec::new();
    for (line, row) in rows {
        match row.as_slice() {
            [k, m, p] => {
                let k = parse_index(*line, k)?;
                if k != entries.len() + 1 {
                    return Err(format_err(
                        *line,
                        format!("expected k = {}, found {k}", entries.len() + 1),
                    ));
                }
                let modulus = parse_f64(*line, m)?;
                let phase = parse_f64(*line, p)?;
                if modulus < 0.0 || !modulus.is_finite() || !phase.is_finite() {
                    return Err(format_err(*line, "modulus must be finite and non-negative"));
                }
                entries.push(Polar::new(modulus, phase));
            }
            _ => return Err(format_err(*line, "expected `k,modulus,phase`")),
        }
    }
    let mode = match table.meta.get("mode") {
        Some(m) => m.parse::<RenderMode>().map_err(|e| format_err(0, e))?,
        None => RenderMode::default(),
    };
    let n = table
        .meta
        .get("n")
        .map(|v| v.parse::<usize>().map_err(|_| format_err(0, format!("bad n={v}"))))
        .transpose()?;
    let mut spectrum = PolarSpectrum::new(dc, entries, mode);
    spectrum.basis_label = table.meta.get("basis").cloned();
    Ok(SpectrumFile {
        spectrum,
        n,
        meta: table.meta,
    })
}

pub fn write_spectrum(mut w: impl Write, ps: &PolarSpectrum, n: Option<usize>) -> Result<()> {
    let mut meta = vec![("mode", ps.mode.to_string())];
    if let Some(label) = &ps.basis_label {
        meta.push(("basis", label.clone()));
    }
    if let Some(n) = n {
        meta.push(("n", n.to_string()));
    }
    write_meta(&mut w, &meta)?;
    writeln!(w, "0,{},0", fmt_num(ps.dc))?;
    for (i, e) in ps.entries.iter().enumerate() {
        writeln!(w, "{},{},{}", i + 1, fmt_num(e.modulus), fmt_num(e.phase))?;
    }
    Ok(())
}

/// Reads `k,gain` rows; `k` must run over `1..=K` in any order without
/// gaps. The dc gain defaults to 1.
pub fn read_transfer(reader: impl Read) -> Result<TransferFunction> {
    let mut table = read_table(reader)?;
    skip_header(&mut table.rows);
    let mut gains = BTreeMap::new();
    let mut dc_gain = 1.0;
    for (line, row) in &table.rows {
        match row.as_slice() {
            [k, g] => {
                let k = parse_index(*line, k)?;
                let g = parse_f64(*line, g)?;
                if k == 0 {
                    dc_gain = g;
                } else if gains.insert(k, g).is_some() {
                    return Err(format_err(*line, format!("bin {k} given twice")));
                }
            }
            _ => return Err(format_err(*line, "expected `k,gain`")),
        }
    }
    if let Some((&last, _)) = gains.last_key_value() {
        if last != gains.len() {
            return Err(format_err(0, "transfer bins must cover 1..=K without gaps"));
        }
    }
    TransferFunction::new(gains.into_values().collect(), dc_gain)
}

pub fn write_transfer(mut w: impl Write, g: &TransferFunction) -> Result<()> {
    writeln!(w, "0,{}", fmt_num(g.dc_gain()))?;
    for (i, v) in g.gains().iter().enumerate() {
        writeln!(w, "{},{}", i + 1, fmt_num(*v))?;
    }
    Ok(())
}

pub fn write_reconstruction_report(mut w: impl Write, r: &ReconstructionReport) -> Result<()> {
    write_meta(
        &mut w,
        &[
            ("basis", r.basis_label.clone()),
            ("mode", r.mode.to_string()),
            ("n", r.n.to_string()),
        ],
    )?;
    writeln!(w, "order,rms_error")?;
    for (o, e) in r.orders.iter().zip(&r.rms_errors) {
        writeln!(w, "{o},{}", fmt_num(*e))?;
    }
    Ok(())
}

/// Writes `key,value` summary rows.
pub fn write_summary(mut w: impl Write, meta: &[(&str, String)], rows: &[(&str, String)]) -> Result<()> {
    write_meta(&mut w, meta)?;
    writeln!(w, "key,value")?;
    for (k, v) in rows {
        writeln!(w, "{k},{v}")?;
    }
    Ok(())
}

/// Summary rows of a separation run.
pub fn separation_summary(s: &SeparationReport, cutoff: usize) -> Vec<(&'static str, String)> {
    let mut rows = vec![
        ("cutoff", cutoff.to_string()),
        ("kept_rms", fmt_num(s.kept.rms())),
        ("residual_rms", fmt_num(s.residual.rms())),
    ];
    if let Some(e) = s.kept_rms_error_vs_reference {
        rows.push(("kept_rms_error_vs_reference", fmt_num(e)));
    }
    rows
}
