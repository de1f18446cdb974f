//! Integer-coded genetic search over tiling words.
//!
//! Chromosomes are the L-letter tiling words themselves, so every gene is an
//! integer bounded by its vertex depth and the feasible set is exactly the
//! set of valid words. The population stays feasible throughout: offspring
//! failing the word validity test have the operators re-applied, with a
//! bounded retry budget falling back to a parent copy.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::HexAperture;
use crate::tiling::{
    boundary_known, extend_heights, Extend, Tiling, TilingWord, WordCodec,
};

const FITNESS_EPSILON: f64 = 1e-12;
const REPAIR_ATTEMPTS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum IgaError {
    #[error("invalid GA configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("could not build {requested} distinct feasible words (reached {reached})")]
    PopulationInfeasible { requested: usize, reached: usize },
}

/// Control parameters of the genetic search.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub max_iterations: u32,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Trailing window length of the stagnation test.
    pub stagnation_window: u32,
    pub stagnation_threshold: f64,
    /// Minimum normalized Hamming distance between initial words.
    pub diversity_threshold: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 542,
            max_iterations: 1000,
            crossover_prob: 0.9,
            mutation_prob: 0.01,
            stagnation_window: 50,
            stagnation_threshold: 1e-4,
            diversity_threshold: 0.1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), IgaError> {
        let bad = |reason: &str| -> Result<(), IgaError> {
            Err(IgaError::InvalidConfig {
                reason: reason.to_string(),
            })
        };
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad("crossover_prob must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad("mutation_prob must lie in [0, 1]");
        }
        if self.stagnation_window < 2 {
            return bad("stagnation_window must be at least 2");
        }
        if !self.stagnation_threshold.is_finite() || self.stagnation_threshold < 0.0 {
            return bad("stagnation_threshold must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.diversity_threshold) {
            return bad("diversity_threshold must lie in [0, 1]");
        }
        Ok(())
    }
}

/// A feasible chromosome with its cached cost.
#[derive(Debug, Clone)]
pub struct Individual {
    pub word: TilingWord,
    pub chi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaskSatisfied,
    MaxIterations,
    Stagnation,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::MaskSatisfied => "mask-satisfied",
            Termination::MaxIterations => "max-iterations",
            Termination::Stagnation => "stagnation",
        };
        write!(f, "{s}")
    }
}

/// Per-iteration best/mean costs and the run outcome. Elitism makes the best
/// sequence non-increasing.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub best: Vec<f64>,
    pub mean: Vec<f64>,
    /// Cumulative cost evaluations after each recorded iteration.
    pub evals: Vec<u64>,
    pub evaluations: u64,
    pub termination: Termination,
    pub wall: Duration,
}

/// Samples a random valid word by walking the internal vertices in raster
/// order and picking each letter uniformly from its feasible interval given
/// the letters already fixed.
pub fn random_word(codec: &WordCodec, rng: &mut impl Rng) -> TilingWord {
    let ap = codec.aperture();
    let internal = ap.internal_vertices();
    let h1 = codec.minimal_full();
    let mut known = boundary_known(ap);
    let mut letters = Vec::with_capacity(internal.len());
    for &v in internal {
        let lo = extend_heights(ap, &known, Extend::Lowest).expect("prefix stays consistent")[v];
        let hi = extend_heights(ap, &known, Extend::Highest).expect("prefix stays consistent")[v];
        let (wl, wh) = (((lo - h1[v]) / 3) as u32, ((hi - h1[v]) / 3) as u32);
        let w = if wl == wh {
            wl
        } else {
            rng.random_range(wl..=wh)
        };
        known[v] = Some(h1[v] + 3 * w as i64);
        letters.push(w);
    }
    let word = TilingWord::new(letters);
    debug_assert!(codec.is_valid(&word));
    word
}

fn hamming_frac(a: &TilingWord, b: &TilingWord) -> f64 {
    let diff = a
        .letters()
        .iter()
        .zip(b.letters())
        .filter(|(x, y)| x != y)
        .count();
    diff as f64 / a.len() as f64
}

/// Builds the initial population: the minimal and maximal words are always
/// seeded, the rest are random feasible words kept pairwise apart by the
/// diversity threshold (relaxed progressively when the space is too small).
pub fn init_population(
    ap: &HexAperture,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> Result<Vec<TilingWord>, IgaError> {
    config.validate()?;
    let codec = WordCodec::new(ap);
    let mut words = vec![
        TilingWord::zeros(ap.internal_count()),
        TilingWord::new(ap.depths().to_vec()),
    ];
    words.truncate(config.population);
    let mut threshold = config.diversity_threshold;
    let mut budget = 200 * config.population;
    while words.len() < config.population {
        if budget == 0 {
            if threshold > 0.0 {
                threshold = if threshold < 1e-3 { 0.0 } else { threshold / 2.0 };
                budget = 200 * config.population;
                continue;
            }
            return Err(IgaError::PopulationInfeasible {
                requested: config.population,
                reached: words.len(),
            });
        }
        budget -= 1;
        let candidate = random_word(&codec, rng);
        let ok = words
            .iter()
            .all(|w| w != &candidate && hamming_frac(w, &candidate) >= threshold);
        if ok {
            words.push(candidate);
        }
    }
    Ok(words)
}

fn roulette_pick(cumulative: &[f64], rng: &mut impl Rng) -> usize {
    let total = *cumulative.last().unwrap();
    let x = rng.random::<f64>() * total;
    match cumulative.binary_search_by(|c| c.partial_cmp(&x).unwrap()) {
        Ok(i) => i,
        Err(i) => i.min(cumulative.len() - 1),
    }
}

fn crossover_and_mutate(
    codec: &WordCodec,
    a: &TilingWord,
    b: &TilingWord,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> (TilingWord, TilingWord) {
    let l = a.len();
    let depths = codec.aperture().depths();
    let (mut x, mut y) = (a.letters().to_vec(), b.letters().to_vec());
    if l >= 2 && rng.random::<f64>() < config.crossover_prob {
        let cut = rng.random_range(1..l);
        for i in cut..l {
            std::mem::swap(&mut x[i], &mut y[i]);
        }
    }
    for genes in [&mut x, &mut y] {
        for (i, g) in genes.iter_mut().enumerate() {
            if rng.random::<f64>() < config.mutation_prob {
                // +/- 1 step clamped to the letter bounds.
                if rng.random::<bool>() {
                    *g = (*g + 1).min(depths[i]);
                } else {
                    *g = g.saturating_sub(1);
                }
            }
        }
    }
    (TilingWord::new(x), TilingWord::new(y))
}

/// One generation: roulette-wheel selection on `1 / (chi + eps)`, single
/// point crossover, clamped integer mutation, feasibility repair and elitism.
/// Returns the next population and the number of cost evaluations spent.
pub fn step<F>(
    codec: &WordCodec,
    population: &[Individual],
    config: &GaConfig,
    rng: &mut impl Rng,
    oracle: F,
) -> (Vec<Individual>, u64)
where
    F: Fn(&Tiling) -> f64 + Sync,
{
    let mut cumulative = Vec::with_capacity(population.len());
    let mut acc = 0.0;
    for ind in population {
        acc += 1.0 / (ind.chi + FITNESS_EPSILON);
        cumulative.push(acc);
    }

    // All randomness is drawn here, sequentially; evaluation below may run
    // in parallel without touching the generator.
    let mut offspring: Vec<TilingWord> = Vec::with_capacity(population.len());
    while offspring.len() < population.len() {
        let pa = &population[roulette_pick(&cumulative, rng)];
        let pb = &population[roulette_pick(&cumulative, rng)];
        let mut produced = None;
        for _ in 0..REPAIR_ATTEMPTS {
            let (x, y) = crossover_and_mutate(codec, &pa.word, &pb.word, config, rng);
            if codec.is_valid(&x) && codec.is_valid(&y) {
                produced = Some((x, y));
                break;
            }
        }
        let (x, y) = produced.unwrap_or_else(|| (pa.word.clone(), pb.word.clone()));
        offspring.push(x);
        if offspring.len() < population.len() {
            offspring.push(y);
        }
    }

    let evaluations = offspring.len() as u64;
    let mut next: Vec<Individual> = offspring
        .into_par_iter()
        .map(|word| {
            let tiling = codec.decode(&word).expect("feasible offspring");
            let chi = oracle(&tiling);
            Individual { word, chi }
        })
        .collect();

    // Elitism: the best parent survives verbatim if no offspring beats it.
    let best_parent = population
        .iter()
        .min_by(|a, b| a.chi.partial_cmp(&b.chi).unwrap())
        .unwrap();
    let (worst_idx, worst) = next
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.chi.partial_cmp(&b.1.chi).unwrap())
        .map(|(i, ind)| (i, ind.chi))
        .unwrap();
    let best_offspring = next
        .iter()
        .map(|i| i.chi)
        .fold(f64::INFINITY, f64::min);
    if best_offspring > best_parent.chi && worst >= best_parent.chi {
        next[worst_idx] = best_parent.clone();
    }
    (next, evaluations)
}

/// Runs the full genetic search. Terminates when the mask is met exactly
/// (`chi = 0`), after `max_iterations`, or when the trailing-window
/// stagnation test fires. Fully reproducible from the seed, independent of
/// the evaluation thread count.
pub fn run_cdm<F>(
    ap: &HexAperture,
    config: &GaConfig,
    oracle: F,
) -> Result<(Individual, Tiling, RunTrace), IgaError>
where
    F: Fn(&Tiling) -> f64 + Sync,
{
    config.validate()?;
    let start = Instant::now();
    let codec = WordCodec::new(ap);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let words = init_population(ap, config, &mut rng)?;
    let mut population: Vec<Individual> = words
        .into_par_iter()
        .map(|word| {
            let tiling = codec.decode(&word).expect("initial words are feasible");
            let chi = oracle(&tiling);
            Individual { word, chi }
        })
        .collect();
    let mut evaluations = population.len() as u64;

    let mut best_hist = Vec::new();
    let mut mean_hist = Vec::new();
    let mut evals_hist = Vec::new();
    let record =
        |pop: &[Individual], evals: u64, b: &mut Vec<f64>, m: &mut Vec<f64>, e: &mut Vec<u64>| {
            b.push(pop.iter().map(|i| i.chi).fold(f64::INFINITY, f64::min));
            m.push(pop.iter().map(|i| i.chi).sum::<f64>() / pop.len() as f64);
            e.push(evals);
        };
    record(
        &population,
        evaluations,
        &mut best_hist,
        &mut mean_hist,
        &mut evals_hist,
    );

    let mut termination = Termination::MaxIterations;
    if best_hist[0] == 0.0 {
        termination = Termination::MaskSatisfied;
    } else {
        for k in 1..=config.max_iterations {
            let (next, evals) = step(&codec, &population, config, &mut rng, &oracle);
            population = next;
            evaluations += evals;
            record(
                &population,
                evaluations,
                &mut best_hist,
                &mut mean_hist,
                &mut evals_hist,
            );
            let current = *best_hist.last().unwrap();
            if current == 0.0 {
                termination = Termination::MaskSatisfied;
                break;
            }
            let window = config.stagnation_window as usize;
            if k as usize > window {
                let tail = &best_hist[best_hist.len() - window..];
                let sum: f64 = tail.iter().sum();
                if (window as f64 * current - sum).abs() / current <= config.stagnation_threshold
                {
                    termination = Termination::Stagnation;
                    break;
                }
            }
        }
    }

    let best = population
        .iter()
        .min_by(|a, b| a.chi.partial_cmp(&b.chi).unwrap())
        .unwrap()
        .clone();
    let tiling = codec.decode(&best.word).expect("best word is feasible");
    let trace = RunTrace {
        best: best_hist,
        mean: mean_hist,
        evals: evals_hist,
        evaluations,
        termination,
        wall: start.elapsed(),
    };
    Ok((best, tiling, trace))
}
