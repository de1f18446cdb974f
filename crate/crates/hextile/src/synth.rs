//! End-to-end design drivers: the exhaustive (enumerative) search with
//! checkpoint/resume, the genetic search wrapper, and the solution records
//! the command-line tool writes to disk.

use std::path::PathBuf;
use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::enumerate::{regular_cardinality, Enumeration};
use crate::iga::{self, GaConfig, RunTrace};
use crate::lattice::HexAperture;
use crate::pattern::{
    array_factor_with, expand_to_elements, metrics, subarray_coefficients, ElementPattern,
    Evaluator, ExcitationSet, PatternError, PatternGrid, PatternMetrics, PowerMask,
};
use crate::tiling::{Orientation, Tiling, TilingError, TilingWord};

/// Ties within this relative band of the running optimum count as co-optimal
/// (mirrored layouts radiate identical patterns up to rounding).
const CO_OPTIMUM_REL_TOL: f64 = 1e-12;
/// Co-optimal words kept verbatim; the total count is always exact.
const CO_OPTIMA_CAP: usize = 16;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Iga(#[from] iga::IgaError),
    #[error("checkpoint i/o: {0}")]
    Checkpoint(#[from] std::io::Error),
    #[error("checkpoint decode: {0}")]
    CheckpointDecode(#[from] serde_json::Error),
    #[error("checkpoint belongs to a different setup (hash {found}, expected {expected})")]
    CheckpointMismatch { expected: String, found: String },
}

/// Everything needed to score and report one tiling: aperture, reference
/// excitations, mask, grid resolution and the precomputed evaluator.
pub struct EvalContext<'a> {
    ap: &'a HexAperture,
    pub reference: ExcitationSet,
    pub mask: PowerMask,
    pub resolution: usize,
    pub element: ElementPattern,
    evaluator: Evaluator,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        ap: &'a HexAperture,
        reference: ExcitationSet,
        mask: PowerMask,
        resolution: usize,
        element: ElementPattern,
    ) -> Result<Self, PatternError> {
        if reference.len() != ap.triangle_count() {
            return Err(PatternError::SizeMismatch {
                expected: ap.triangle_count(),
                got: reference.len(),
            });
        }
        let evaluator = Evaluator::new(ap, &mask, resolution, element)?;
        Ok(Self {
            ap,
            reference,
            mask,
            resolution,
            element,
            evaluator,
        })
    }

    pub fn from_config(
        config: &RunConfig,
        ap: &'a HexAperture,
    ) -> Result<Self, crate::config::ConfigError> {
        let reference = config.reference(ap)?;
        Self::new(
            ap,
            reference,
            config.power_mask(),
            config.grid.resolution,
            config.element_pattern(),
        )
        .map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))
    }

    pub fn aperture(&self) -> &HexAperture {
        self.ap
    }

    /// Mask-violation cost of one tiling.
    pub fn chi(&self, tiling: &Tiling) -> f64 {
        self.evaluator
            .chi_tiling(tiling, &self.reference)
            .expect("context sizes are construction-checked")
    }

    fn chi_scratch(&self, tiling: &Tiling, field: &mut Vec<f64>) -> f64 {
        let coeffs =
            subarray_coefficients(tiling, &self.reference).expect("construction-checked");
        let (amplitude, phase) = expand_to_elements(tiling, &coeffs);
        self.evaluator.chi_elements_with(&amplitude, &phase, field)
    }

    /// Full normalized pattern of a tiling at the context resolution.
    pub fn pattern(&self, tiling: &Tiling) -> Result<PatternGrid, PatternError> {
        let coeffs = subarray_coefficients(tiling, &self.reference)?;
        let (amplitude, phase) = expand_to_elements(tiling, &coeffs);
        array_factor_with(self.ap, &amplitude, &phase, self.resolution, self.element)
    }

    /// Pattern of the fully-populated reference array.
    pub fn reference_pattern(&self) -> Result<PatternGrid, PatternError> {
        array_factor_with(
            self.ap,
            self.reference.amplitudes(),
            &self.reference.phases_rad(),
            self.resolution,
            self.element,
        )
    }

    /// Scores a tiling and assembles the exportable record.
    pub fn record(
        &self,
        tiling: &Tiling,
        method: &str,
        seed: Option<u64>,
        config_hash: &str,
    ) -> Result<SolutionRecord, SynthError> {
        let chi = self.chi(tiling);
        let pattern = self.pattern(tiling)?;
        let m = metrics(&pattern, &self.mask)?;
        let coeffs = subarray_coefficients(tiling, &self.reference)?;
        let word = crate::tiling::encode(self.ap, tiling)?;
        Ok(SolutionRecord {
            schema_version: 1,
            method: method.to_string(),
            seed,
            config_hash: config_hash.to_string(),
            rings: self.ap.rings(),
            cell_side: self.ap.cell_side(),
            word: word.letters().to_vec(),
            tiles: tiling
                .tiles()
                .iter()
                .enumerate()
                .map(|(q, t)| TileRecord {
                    q,
                    orientation: t.orientation.letter(),
                    a: t.triangles.0,
                    b: t.triangles.1,
                })
                .collect(),
            subarray_amplitudes: coeffs.amplitude,
            subarray_phases_rad: coeffs.phase_rad,
            chi,
            metrics: MetricsRecord {
                sll_db: m.sll_db,
                d_dbi: m.d_dbi,
                hpbw_az_deg: m.hpbw_az_deg,
                hpbw_el_deg: m.hpbw_el_deg,
                chi,
            },
        })
    }

    pub fn pattern_metrics(&self, pattern: &PatternGrid) -> Result<PatternMetrics, PatternError> {
        metrics(pattern, &self.mask)
    }
}

/// One stored solution: tiling, coefficients, score and provenance. Wall
/// clock is deliberately absent so identical configurations and seeds yield
/// byte-identical files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolutionRecord {
    pub schema_version: u32,
    pub method: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub rings: u32,
    pub cell_side: f64,
    pub word: Vec<u32>,
    pub tiles: Vec<TileRecord>,
    pub subarray_amplitudes: Vec<f64>,
    pub subarray_phases_rad: Vec<f64>,
    pub chi: f64,
    pub metrics: MetricsRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TileRecord {
    pub q: usize,
    pub orientation: char,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsRecord {
    pub sll_db: f64,
    pub d_dbi: f64,
    pub hpbw_az_deg: f64,
    pub hpbw_el_deg: f64,
    pub chi: f64,
}

impl SolutionRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Rebuilds the tiling from the stored tile records.
    pub fn tiling(&self, ap: &HexAperture) -> Result<Tiling, TilingError> {
        let pairs: Vec<(usize, usize)> = self.tiles.iter().map(|t| (t.a, t.b)).collect();
        let tiling = Tiling::from_pairs(ap, &pairs)?;
        for t in &self.tiles {
            let q = tiling.tile_of(t.a);
            let expect = tiling.tiles()[q].orientation;
            if Orientation::from_letter(t.orientation) != Some(expect) {
                return Err(TilingError::InvalidWord);
            }
        }
        Ok(tiling)
    }
}

// ---------------------------------------------------------------------------
// Exhaustive search.
// ---------------------------------------------------------------------------

/// Serialized mid-run state of the exhaustive search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdmCheckpoint {
    pub schema_version: u32,
    pub config_hash: String,
    pub next_word: Vec<u32>,
    pub next_t: u64,
    pub chis: Vec<f64>,
    pub best_t: u64,
    pub best_word: Vec<u32>,
    pub best_chi: f64,
    pub worst_t: u64,
    pub worst_word: Vec<u32>,
    pub worst_chi: f64,
    pub co_words: Vec<Vec<u32>>,
    pub co_count: u64,
}

#[derive(Debug, Clone, Default)]
pub struct EdmOptions {
    pub checkpoint_path: Option<PathBuf>,
    pub checkpoint_every: Option<u64>,
    /// Resume from a previously written checkpoint file.
    pub resume: Option<EdmCheckpoint>,
    /// Identifies the setup in checkpoints.
    pub config_hash: String,
}

#[derive(Debug, Clone)]
pub struct EdmOutcome {
    pub best_t: u64,
    pub best_word: TilingWord,
    pub best_chi: f64,
    pub worst_t: u64,
    pub worst_word: TilingWord,
    pub worst_chi: f64,
    /// Words tied with the optimum (capped), and the exact tie count.
    pub co_optima: Vec<TilingWord>,
    pub co_count: u64,
    /// chi per tiling index (1-based index t maps to `chis[t - 1]`).
    pub chis: Vec<f64>,
    pub evaluations: u64,
}

impl EdmOutcome {
    pub fn sorted_chis_desc(&self) -> Vec<f64> {
        let mut v = self.chis.clone();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }
}

struct EdmAccumulator {
    chis: Vec<f64>,
    best: (u64, Vec<u32>, f64),
    worst: (u64, Vec<u32>, f64),
    co_words: Vec<Vec<u32>>,
    co_count: u64,
}

impl EdmAccumulator {
    fn fresh() -> Self {
        Self {
            chis: Vec::new(),
            best: (0, Vec::new(), f64::INFINITY),
            worst: (0, Vec::new(), f64::NEG_INFINITY),
            co_words: Vec::new(),
            co_count: 0,
        }
    }

    fn from_checkpoint(c: &EdmCheckpoint) -> Self {
        Self {
            chis: c.chis.clone(),
            best: (c.best_t, c.best_word.clone(), c.best_chi),
            worst: (c.worst_t, c.worst_word.clone(), c.worst_chi),
            co_words: c.co_words.clone(),
            co_count: c.co_count,
        }
    }

    fn tie_band(&self) -> f64 {
        CO_OPTIMUM_REL_TOL * self.best.2.abs().max(f64::MIN_POSITIVE)
    }

    fn push(&mut self, t: u64, word: &TilingWord, chi: f64) {
        debug_assert_eq!(self.chis.len() as u64, t - 1);
        self.chis.push(chi);
        if chi < self.best.2 - self.tie_band() {
            self.best = (t, word.letters().to_vec(), chi);
            self.co_words = vec![word.letters().to_vec()];
            self.co_count = 1;
        } else if (chi - self.best.2).abs() <= self.tie_band() {
            if chi < self.best.2 {
                self.best = (t, word.letters().to_vec(), chi);
            }
            self.co_count += 1;
            if self.co_words.len() < CO_OPTIMA_CAP {
                self.co_words.push(word.letters().to_vec());
            }
        }
        if chi > self.worst.2 {
            self.worst = (t, word.letters().to_vec(), chi);
        }
    }
}

/// Runs the exhaustive search: every tiling is generated in word order and
/// scored; the optimum, any co-optima, the worst tiling and the full cost
/// curve come back. Evaluation is fanned out over worker threads in batches
/// while the word stream itself stays sequential, so results match the
/// single-threaded run exactly.
pub fn run_edm(ctx: &EvalContext, options: &EdmOptions) -> Result<EdmOutcome, SynthError> {
    let ap = ctx.aperture();
    let mut acc;
    let mut cursor;
    match &options.resume {
        Some(c) => {
            if c.config_hash != options.config_hash {
                return Err(SynthError::CheckpointMismatch {
                    expected: options.config_hash.clone(),
                    found: c.config_hash.clone(),
                });
            }
            acc = EdmAccumulator::from_checkpoint(c);
            cursor = Enumeration::resume(ap, TilingWord::new(c.next_word.clone()), c.next_t)?;
        }
        None => {
            acc = EdmAccumulator::fresh();
            cursor = Enumeration::new(ap);
        }
    }

    const BATCH: usize = 256;
    let mut since_checkpoint = 0u64;
    loop {
        let batch: Vec<(u64, TilingWord, Tiling)> = (&mut cursor).take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let scored: Vec<(u64, TilingWord, f64)> = batch
            .into_par_iter()
            .map_init(Vec::new, |field, (t, word, tiling)| {
                let chi = ctx.chi_scratch(&tiling, field);
                (t, word, chi)
            })
            .collect();
        for (t, word, chi) in &scored {
            acc.push(*t, word, *chi);
        }
        since_checkpoint += scored.len() as u64;
        if let (Some(path), Some(every)) = (&options.checkpoint_path, options.checkpoint_every) {
            if since_checkpoint >= every {
                since_checkpoint = 0;
                if let Some(next) = cursor.peek_word() {
                    let state = EdmCheckpoint {
                        schema_version: 1,
                        config_hash: options.config_hash.clone(),
                        next_word: next.letters().to_vec(),
                        next_t: cursor.next_index(),
                        chis: acc.chis.clone(),
                        best_t: acc.best.0,
                        best_word: acc.best.1.clone(),
                        best_chi: acc.best.2,
                        worst_t: acc.worst.0,
                        worst_word: acc.worst.1.clone(),
                        worst_chi: acc.worst.2,
                        co_words: acc.co_words.clone(),
                        co_count: acc.co_count,
                    };
                    std::fs::write(path, serde_json::to_string(&state)?)?;
                }
            }
        }
    }

    let evaluations = acc.chis.len() as u64;
    Ok(EdmOutcome {
        best_t: acc.best.0,
        best_word: TilingWord::new(acc.best.1),
        best_chi: acc.best.2,
        worst_t: acc.worst.0,
        worst_word: TilingWord::new(acc.worst.1),
        worst_chi: acc.worst.2,
        co_optima: acc.co_words.into_iter().map(TilingWord::new).collect(),
        co_count: acc.co_count,
        chis: acc.chis,
        evaluations,
    })
}

/// Predicted exhaustive-search cost: the exact tiling count and the wall
/// time extrapolated from a short measured warm-up.
#[derive(Debug, Clone)]
pub struct EdmEstimate {
    pub tilings: num_bigint::BigUint,
    pub seconds_per_tiling: f64,
    pub total_seconds: f64,
}

pub fn estimate_edm(ctx: &EvalContext, warmup: usize) -> EdmEstimate {
    let ap = ctx.aperture();
    let tilings = regular_cardinality(ap);
    let mut field = Vec::new();
    let start = Instant::now();
    let mut measured = 0usize;
    for (_, _, tiling) in Enumeration::new(ap).take(warmup.max(1)) {
        ctx.chi_scratch(&tiling, &mut field);
        measured += 1;
    }
    let dt = start.elapsed().as_secs_f64() / measured as f64;
    let total = tilings.to_f64().unwrap_or(f64::INFINITY) * dt;
    EdmEstimate {
        tilings,
        seconds_per_tiling: dt,
        total_seconds: total,
    }
}

// ---------------------------------------------------------------------------
// Genetic search wrapper.
// ---------------------------------------------------------------------------

/// Runs the seeded genetic search against the context cost and packages the
/// winner as a solution record.
pub fn run_cdm(
    ctx: &EvalContext,
    ga: &GaConfig,
    config_hash: &str,
) -> Result<(SolutionRecord, RunTrace), SynthError> {
    let (_best, tiling, trace) = iga::run_cdm(ctx.aperture(), ga, |t| ctx.chi(t))?;
    let record = ctx.record(&tiling, "cdm", Some(ga.seed), config_hash)?;
    Ok((record, trace))
}
