//! Plain-text file formats: excitation CSV, tiling export, enumeration
//! checkpoints, and the CSV emitters for traces, patterns and scan maps.
//!
//! All readers are total: malformed input comes back as an error carrying the
//! offending 1-based line number, never a panic. Lines that are empty or
//! start with `#` are ignored everywhere.

use thiserror::Error;

use crate::iga::RunTrace;
use crate::lattice::HexAperture;
use crate::pattern::{ExcitationSet, PatternGrid, ScanSample};
use crate::tiling::{encode, Orientation, Tiling, TilingWord};

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
    #[error("missing header line `triangle_index,amplitude,phase_deg`")]
    MissingHeader,
    #[error("element {index} is {problem}")]
    Coverage { index: usize, problem: &'static str },
    #[error("file holds {got} tiles, aperture needs {expected}")]
    TileCount { expected: usize, got: usize },
    #[error("missing word line")]
    MissingWord,
    #[error("word line does not match the tile records")]
    WordMismatch,
    #[error("{0}")]
    Invalid(String),
}

fn row_err(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Row {
        line,
        reason: reason.into(),
    }
}

/// Numbered payload lines, comments and blanks skipped.
fn payload_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

// ---------------------------------------------------------------------------
// Excitation CSV: `triangle_index,amplitude,phase_deg` with a header line.
// ---------------------------------------------------------------------------

pub fn write_excitations(set: &ExcitationSet) -> String {
    let mut out = String::from("triangle_index,amplitude,phase_deg\n");
    for i in 0..set.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            i,
            set.amplitudes()[i],
            set.phases_deg()[i]
        ));
    }
    out
}

/// Parses and validates a full excitation file against the aperture: every
/// triangle index must appear exactly once.
pub fn read_excitations(text: &str, ap: &HexAperture) -> Result<ExcitationSet, FormatError> {
    let n = ap.triangle_count();
    let mut lines = payload_lines(text);
    match lines.next() {
        Some((_, header))
            if header
                .split(',')
                .map(str::trim)
                .collect::<Vec<_>>()
                == ["triangle_index", "amplitude", "phase_deg"] => {}
        _ => return Err(FormatError::MissingHeader),
    }
    let mut amplitude = vec![f64::NAN; n];
    let mut phase = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    for (line, text) in lines {
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(row_err(line, format!("expected 3 fields, got {}", fields.len())));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| row_err(line, format!("bad triangle index `{}`", fields[0])))?;
        if index >= n {
            return Err(row_err(line, format!("triangle index {index} out of range (N = {n})")));
        }
        if seen[index] {
            return Err(row_err(line, format!("triangle index {index} repeated")));
        }
        let a: f64 = fields[1]
            .parse()
            .map_err(|_| row_err(line, format!("bad amplitude `{}`", fields[1])))?;
        if !a.is_finite() || a < 0.0 {
            return Err(row_err(line, "amplitude must be finite and non-negative"));
        }
        let p: f64 = fields[2]
            .parse()
            .map_err(|_| row_err(line, format!("bad phase `{}`", fields[2])))?;
        if !p.is_finite() {
            return Err(row_err(line, "phase must be finite"));
        }
        seen[index] = true;
        amplitude[index] = a;
        phase[index] = p;
    }
    if let Some(index) = seen.iter().position(|s| !s) {
        return Err(FormatError::Coverage {
            index,
            problem: "missing",
        });
    }
    ExcitationSet::new(amplitude, phase).map_err(|e| FormatError::Invalid(e.to_string()))
}

// ---------------------------------------------------------------------------
// Tiling export: one `q,orientation,a,b` record per tile plus a word line.
// ---------------------------------------------------------------------------

pub fn write_tiling(ap: &HexAperture, tiling: &Tiling) -> String {
    let word = encode(ap, tiling).expect("complete tilings encode");
    let mut out = format!("# tiling rings={} tiles={}\n", ap.rings(), tiling.tile_count());
    for (q, tile) in tiling.tiles().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            q,
            tile.orientation.letter(),
            tile.triangles.0,
            tile.triangles.1
        ));
    }
    out.push_str(&format!("{word}\n"));
    out
}

/// Reads a tiling file back. Tile records are validated as a complete
/// tiling; the word line must match the records.
pub fn read_tiling(text: &str, ap: &HexAperture) -> Result<(Tiling, TilingWord), FormatError> {
    let mut pairs = Vec::new();
    let mut word: Option<TilingWord> = None;
    for (line, payload) in payload_lines(text) {
        if payload.contains(',') {
            if word.is_some() {
                return Err(row_err(line, "tile record after the word line"));
            }
            let fields: Vec<&str> = payload.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(row_err(line, format!("expected 4 fields, got {}", fields.len())));
            }
            let _q: usize = fields[0]
                .parse()
                .map_err(|_| row_err(line, format!("bad tile id `{}`", fields[0])))?;
            let orientation = fields[1]
                .chars()
                .next()
                .and_then(Orientation::from_letter)
                .filter(|_| fields[1].len() == 1)
                .ok_or_else(|| row_err(line, format!("bad orientation `{}`", fields[1])))?;
            let a: usize = fields[2]
                .parse()
                .map_err(|_| row_err(line, format!("bad triangle index `{}`", fields[2])))?;
            let b: usize = fields[3]
                .parse()
                .map_err(|_| row_err(line, format!("bad triangle index `{}`", fields[3])))?;
            pairs.push(((a, b), orientation, line));
        } else {
            if word.is_some() {
                return Err(row_err(line, "second word line"));
            }
            let letters = payload
                .split_whitespace()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| row_err(line, format!("bad word letter `{t}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            word = Some(TilingWord::new(letters));
        }
    }
    if pairs.len() != ap.tile_count() {
        return Err(FormatError::TileCount {
            expected: ap.tile_count(),
            got: pairs.len(),
        });
    }
    let tiling = Tiling::from_pairs(ap, &pairs.iter().map(|(p, _, _)| *p).collect::<Vec<_>>())
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    for &((a, b), orientation, line) in &pairs {
        let q = tiling.tile_of(a.min(b));
        if tiling.tiles()[q].orientation != orientation {
            return Err(row_err(line, "orientation does not match the tile geometry"));
        }
    }
    let word = word.ok_or(FormatError::MissingWord)?;
    let expected = encode(ap, &tiling).expect("validated tiling encodes");
    if word != expected {
        return Err(FormatError::WordMismatch);
    }
    Ok((tiling, word))
}

// ---------------------------------------------------------------------------
// Enumeration checkpoints: the current word, then its 1-based index.
// ---------------------------------------------------------------------------

pub fn write_checkpoint(word: &TilingWord, t: u64) -> String {
    format!("{word}\n{t}\n")
}

pub fn read_checkpoint(text: &str) -> Result<(TilingWord, u64), FormatError> {
    let mut lines = payload_lines(text);
    let (line, word_text) = lines.next().ok_or(FormatError::MissingWord)?;
    let letters = word_text
        .split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| row_err(line, format!("bad word letter `{t}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (line, t_text) = lines
        .next()
        .ok_or_else(|| row_err(line + 1, "missing index line"))?;
    let t: u64 = t_text
        .parse()
        .map_err(|_| row_err(line, format!("bad index `{t_text}`")))?;
    Ok((TilingWord::new(letters), t))
}

// ---------------------------------------------------------------------------
// CSV emitters.
// ---------------------------------------------------------------------------

pub fn write_trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from("iteration,best_chi,mean_chi,evaluations\n");
    for (k, ((b, m), e)) in trace.best.iter().zip(&trace.mean).zip(&trace.evals).enumerate() {
        out.push_str(&format!("{k},{b:e},{m:e},{e}\n"));
    }
    out
}

const EXPORT_FLOOR_DB: f64 = -100.0;

fn power_db(p: f64) -> f64 {
    (10.0 * p.max(1e-300).log10()).max(EXPORT_FLOOR_DB)
}

/// `u,v,power_db` over the visible samples, clamped at -100 dB.
pub fn write_pattern_csv(pattern: &PatternGrid) -> String {
    let res = pattern.resolution();
    let mut out = String::from("u,v,power_db\n");
    for i in 0..res {
        for j in 0..res {
            if !pattern.is_visible(i, j) {
                continue;
            }
            let (u, v) = pattern.uv(i, j);
            out.push_str(&format!("{u:.6},{v:.6},{:.6}\n", power_db(pattern.value(i, j))));
        }
    }
    out
}

/// Principal-plane cuts through the origin: the `phi0` rows sweep u at the
/// v = 0 grid line, `phi90` sweeps v at u = 0.
pub fn write_cuts_csv(pattern: &PatternGrid) -> String {
    let res = pattern.resolution();
    let mid = res / 2;
    let mut out = String::from("cut,coordinate,power_db\n");
    for j in 0..res {
        if pattern.is_visible(mid, j) {
            let (u, _) = pattern.uv(mid, j);
            out.push_str(&format!("phi0,{u:.6},{:.6}\n", power_db(pattern.value(mid, j))));
        }
    }
    for i in 0..res {
        if pattern.is_visible(i, mid) {
            let (_, v) = pattern.uv(i, mid);
            out.push_str(&format!("phi90,{v:.6},{:.6}\n", power_db(pattern.value(i, mid))));
        }
    }
    out
}

pub fn write_scan_csv(samples: &[ScanSample]) -> String {
    let mut out = String::from("theta_gamma,phi_gamma,sll_db,d_dbi\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            s.theta_gamma_deg, s.phi_gamma_deg, s.sll_db, s.d_dbi
        ));
    }
    out
}

/// Sorted cost curve, worst tiling first.
pub fn write_curve_csv(chis_sorted_desc: &[f64]) -> String {
    let mut out = String::from("rank,chi\n");
    for (rank, chi) in chis_sorted_desc.iter().enumerate() {
        out.push_str(&format!("{},{chi:e}\n", rank + 1));
    }
    out
}
