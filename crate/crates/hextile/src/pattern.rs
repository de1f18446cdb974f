//! Radiated power patterns of tiled apertures in (u, v) space.
//!
//! Elements are isotropic by default and live at triangle centroids with
//! positions in wavelengths, so the wavenumber is `2 * PI`. A tiling maps
//! per-element reference excitations to per-tile coefficients by averaging
//! the two member amplitudes and (unwrapped) phases; the resulting pattern is
//! scored against a user power mask by integrating mask violations over the
//! visible range `u^2 + v^2 <= 1` with a midpoint rule.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::HexAperture;
use crate::tiling::Tiling;

const WAVENUMBER: f64 = 2.0 * PI;

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("expected {expected} per-element values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("amplitude at element {index} is negative or not finite")]
    BadAmplitude { index: usize },
    #[error("all excitations are zero; the pattern cannot be normalized")]
    AllZeroExcitations,
    #[error("grid resolution must be at least 2")]
    ResolutionTooSmall,
    #[error("pattern peak lies outside the mainlobe region")]
    PeakOutsideMainlobe,
}

// ---------------------------------------------------------------------------
// Excitations.
// ---------------------------------------------------------------------------

/// Per-element reference amplitudes and phases of a fully-populated array.
///
/// Phases are stored in degrees, matching the excitation file format, so a
/// file round-trip is bit-exact; use [`ExcitationSet::phases_rad`] for math.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSet {
    amplitude: Vec<f64>,
    phase_deg: Vec<f64>,
}

impl ExcitationSet {
    pub fn new(amplitude: Vec<f64>, phase_deg: Vec<f64>) -> Result<Self, PatternError> {
        if amplitude.len() != phase_deg.len() {
            return Err(PatternError::SizeMismatch {
                expected: amplitude.len(),
                got: phase_deg.len(),
            });
        }
        for (i, a) in amplitude.iter().enumerate() {
            if !a.is_finite() || *a < 0.0 {
                return Err(PatternError::BadAmplitude { index: i });
            }
        }
        Ok(Self {
            amplitude,
            phase_deg,
        })
    }

    /// Unit amplitude, zero phase on every element.
    pub fn uniform(ap: &HexAperture) -> Self {
        Self {
            amplitude: vec![1.0; ap.triangle_count()],
            phase_deg: vec![0.0; ap.triangle_count()],
        }
    }

    /// Radial cosine taper `cos^p(pi r / (2 R))` with `R` the aperture
    /// circumradius; amplitude 1 at the center, near 0 on the rim.
    pub fn cosine_taper(ap: &HexAperture, p: f64) -> Self {
        let radius = ap.rings() as f64 * ap.cell_side();
        let amplitude = ap
            .element_positions()
            .iter()
            .map(|&(x, y)| {
                let r = (x * x + y * y).sqrt();
                (PI * r / (2.0 * radius)).cos().max(0.0).powf(p)
            })
            .collect();
        Self {
            amplitude,
            phase_deg: vec![0.0; ap.triangle_count()],
        }
    }

    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phases_deg(&self) -> &[f64] {
        &self.phase_deg
    }

    pub fn phases_rad(&self) -> Vec<f64> {
        self.phase_deg.iter().map(|p| p.to_radians()).collect()
    }

    /// Adds steering phases for the given pointing direction.
    pub fn steer(&mut self, ap: &HexAperture, theta_deg: f64, phi_deg: f64) {
        for (p, s) in self
            .phase_deg
            .iter_mut()
            .zip(steering_phases(ap, theta_deg, phi_deg))
        {
            *p += s.to_degrees();
        }
    }

    /// Replaces all phases with the steering phases of the given direction.
    pub fn set_steering(&mut self, ap: &HexAperture, theta_deg: f64, phi_deg: f64) {
        self.phase_deg = steering_phases(ap, theta_deg, phi_deg)
            .iter()
            .map(|r| r.to_degrees())
            .collect();
    }
}

/// Per-tile amplitude and phase coefficients (phases in radians).
#[derive(Debug, Clone, PartialEq)]
pub struct SubarrayCoefficients {
    pub amplitude: Vec<f64>,
    pub phase_rad: Vec<f64>,
}

impl SubarrayCoefficients {
    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }
}

/// Averages the two member excitations of every tile. Member phases are
/// unwrapped to within half a turn of each other before averaging so steered
/// references do not pick up branch-cut artifacts.
pub fn subarray_coefficients(
    tiling: &Tiling,
    reference: &ExcitationSet,
) -> Result<SubarrayCoefficients, PatternError> {
    if reference.len() != tiling.triangle_count() {
        return Err(PatternError::SizeMismatch {
            expected: tiling.triangle_count(),
            got: reference.len(),
        });
    }
    let mut amplitude = Vec::with_capacity(tiling.tile_count());
    let mut phase_rad = Vec::with_capacity(tiling.tile_count());
    for tile in tiling.tiles() {
        let (a, b) = tile.triangles;
        amplitude.push(0.5 * (reference.amplitude[a] + reference.amplitude[b]));
        let pa = reference.phase_deg[a];
        let pb = reference.phase_deg[b];
        let pb = pb + 360.0 * ((pa - pb) / 360.0).round();
        phase_rad.push((0.5 * (pa + pb)).to_radians());
    }
    Ok(SubarrayCoefficients {
        amplitude,
        phase_rad,
    })
}

/// Spreads per-tile coefficients back onto the elements.
pub fn expand_to_elements(
    tiling: &Tiling,
    coeffs: &SubarrayCoefficients,
) -> (Vec<f64>, Vec<f64>) {
    let n = tiling.triangle_count();
    let mut amplitude = vec![0.0; n];
    let mut phase = vec![0.0; n];
    for t in 0..n {
        let q = tiling.tile_of(t);
        amplitude[t] = coeffs.amplitude[q];
        phase[t] = coeffs.phase_rad[q];
    }
    (amplitude, phase)
}

/// Linear-phase steering toward `(theta, phi)`:
/// `beta = -k (x u0 + y v0)` with `u0 = sin(theta) cos(phi)`,
/// `v0 = sin(theta) sin(phi)`. Returns radians per element.
pub fn steering_phases(ap: &HexAperture, theta_deg: f64, phi_deg: f64) -> Vec<f64> {
    let theta = theta_deg.to_radians();
    let phi = phi_deg.to_radians();
    let (u0, v0) = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
    ap.element_positions()
        .iter()
        .map(|&(x, y)| -WAVENUMBER * (x * u0 + y * v0))
        .collect()
}

// ---------------------------------------------------------------------------
// Masks and grids.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskShape {
    Rectangle,
    Ellipse,
}

/// Upper bound on the normalized power: 1 inside the mainlobe region,
/// `10^(floor_db / 10)` outside, over the visible range.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMask {
    pub center: (f64, f64),
    /// Full extents of the mainlobe region along u and v.
    pub width_u: f64,
    pub width_v: f64,
    pub floor_db: f64,
    pub shape: MaskShape,
}

impl PowerMask {
    pub fn in_mainlobe(&self, u: f64, v: f64) -> bool {
        let du = u - self.center.0;
        let dv = v - self.center.1;
        match self.shape {
            MaskShape::Rectangle => {
                du.abs() <= self.width_u / 2.0 && dv.abs() <= self.width_v / 2.0
            }
            MaskShape::Ellipse => {
                let a = du / (self.width_u / 2.0);
                let b = dv / (self.width_v / 2.0);
                a * a + b * b <= 1.0
            }
        }
    }

    /// Mask value in normalized linear power.
    pub fn value(&self, u: f64, v: f64) -> f64 {
        if self.in_mainlobe(u, v) {
            1.0
        } else {
            10f64.powf(self.floor_db / 10.0)
        }
    }

    /// Same mask with the mainlobe recentered (used when scanning).
    pub fn recentered(&self, u0: f64, v0: f64) -> Self {
        Self {
            center: (u0, v0),
            ..self.clone()
        }
    }
}

/// Optional element pattern factor multiplying the array factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementPattern {
    Isotropic,
    /// `cos(theta)^exponent`, with `cos(theta) = sqrt(1 - u^2 - v^2)`.
    CosTheta { exponent: f64 },
}

impl ElementPattern {
    fn field_factor(&self, u: f64, v: f64) -> f64 {
        match self {
            ElementPattern::Isotropic => 1.0,
            ElementPattern::CosTheta { exponent } => {
                (1.0 - u * u - v * v).max(0.0).sqrt().powf(*exponent)
            }
        }
    }
}

/// Normalized power samples on a uniform midpoint grid over `[-1, 1]^2`.
/// Samples outside the visible circle are zero and excluded from the
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    resolution: usize,
    power: Vec<f64>,
    peak: (usize, usize),
}

impl PatternGrid {
    pub(crate) fn from_power(resolution: usize, mut power: Vec<f64>) -> Result<Self, PatternError> {
        assert_eq!(power.len(), resolution * resolution);
        let mut max = 0.0f64;
        let mut peak = (0, 0);
        for i in 0..resolution {
            for j in 0..resolution {
                let (u, v) = Self::sample_at(resolution, i, j);
                let idx = i * resolution + j;
                if u * u + v * v > 1.0 {
                    power[idx] = 0.0;
                } else if power[idx] > max {
                    max = power[idx];
                    peak = (i, j);
                }
            }
        }
        if max <= 0.0 {
            return Err(PatternError::AllZeroExcitations);
        }
        for p in &mut power {
            *p /= max;
        }
        Ok(Self {
            resolution,
            power,
            peak,
        })
    }

    fn sample_at(resolution: usize, i: usize, j: usize) -> (f64, f64) {
        let step = 2.0 / resolution as f64;
        (
            -1.0 + (j as f64 + 0.5) * step,
            -1.0 + (i as f64 + 0.5) * step,
        )
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Cell side length of the midpoint grid.
    pub fn cell(&self) -> f64 {
        2.0 / self.resolution as f64
    }

    /// `(u, v)` of sample `(row i, column j)`; rows sweep v, columns sweep u.
    pub fn uv(&self, i: usize, j: usize) -> (f64, f64) {
        Self::sample_at(self.resolution, i, j)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.power[i * self.resolution + j]
    }

    pub fn is_visible(&self, i: usize, j: usize) -> bool {
        let (u, v) = self.uv(i, j);
        u * u + v * v <= 1.0
    }

    /// Grid indices of the normalized peak.
    pub fn peak(&self) -> (usize, usize) {
        self.peak
    }

    pub fn peak_uv(&self) -> (f64, f64) {
        self.uv(self.peak.0, self.peak.1)
    }
}

/// Evaluates the array factor for per-element amplitudes and phases
/// (radians) and returns the normalized power grid.
pub fn array_factor(
    ap: &HexAperture,
    amplitude: &[f64],
    phase_rad: &[f64],
    resolution: usize,
) -> Result<PatternGrid, PatternError> {
    array_factor_with(
        ap,
        amplitude,
        phase_rad,
        resolution,
        ElementPattern::Isotropic,
    )
}

pub fn array_factor_with(
    ap: &HexAperture,
    amplitude: &[f64],
    phase_rad: &[f64],
    resolution: usize,
    element: ElementPattern,
) -> Result<PatternGrid, PatternError> {
    let n = ap.triangle_count();
    if amplitude.len() != n || phase_rad.len() != n {
        return Err(PatternError::SizeMismatch {
            expected: n,
            got: amplitude.len().min(phase_rad.len()),
        });
    }
    if resolution < 2 {
        return Err(PatternError::ResolutionTooSmall);
    }
    if amplitude.iter().all(|&a| a == 0.0) {
        return Err(PatternError::AllZeroExcitations);
    }
    let positions = ap.element_positions();
    let mut power = vec![0.0; resolution * resolution];
    // Rows are independent; fixed-order summation per sample keeps the
    // result identical for any thread count.
    power
        .par_chunks_mut(resolution)
        .enumerate()
        .for_each(|(i, row)| {
            for (j, out) in row.iter_mut().enumerate() {
                let (u, v) = PatternGrid::sample_at(resolution, i, j);
                if u * u + v * v > 1.0 {
                    continue;
                }
                let mut re = 0.0;
                let mut im = 0.0;
                for e in 0..n {
                    if amplitude[e] == 0.0 {
                        continue;
                    }
                    let (x, y) = positions[e];
                    let arg = WAVENUMBER * (x * u + y * v) + phase_rad[e];
                    re += amplitude[e] * arg.cos();
                    im += amplitude[e] * arg.sin();
                }
                let g = element.field_factor(u, v);
                *out = (re * re + im * im) * g * g;
            }
        });
    PatternGrid::from_power(resolution, power)
}

/// Area fractions of the grid cell at `(u, v)`: how much lies in the visible
/// mainlobe region and how much under the visible sidelobe floor. Interior
/// cells resolve by their corners; cells straddling the mask edge or the
/// visible rim are split by a fixed 16x16 subsample, which keeps the cost
/// quadrature converging through the mask discontinuity.
fn cell_fractions(mask: &PowerMask, u: f64, v: f64, half: f64) -> (f64, f64) {
    let visible = |x: f64, y: f64| x * x + y * y <= 1.0;
    let corners = [
        (u - half, v - half),
        (u + half, v - half),
        (u - half, v + half),
        (u + half, v + half),
    ];
    let fully_visible = corners.iter().all(|&(x, y)| visible(x, y));
    let in_main: u32 = corners
        .iter()
        .map(|&(x, y)| mask.in_mainlobe(x, y) as u32)
        .sum();
    // A region smaller than one cell can hide between the corners; its
    // bounding box overlapping the cell forces the subsampled path.
    let region_near = (u - mask.center.0).abs() <= half + mask.width_u / 2.0
        && (v - mask.center.1).abs() <= half + mask.width_v / 2.0;
    if fully_visible && (in_main == 4 || (in_main == 0 && !region_near)) {
        return if in_main == 4 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    const S: usize = 16;
    let step = 2.0 * half / S as f64;
    let mut main = 0u32;
    let mut floor = 0u32;
    for a in 0..S {
        for b in 0..S {
            let x = u - half + (a as f64 + 0.5) * step;
            let y = v - half + (b as f64 + 0.5) * step;
            if visible(x, y) {
                if mask.in_mainlobe(x, y) {
                    main += 1;
                } else {
                    floor += 1;
                }
            }
        }
    }
    let n = (S * S) as f64;
    (main as f64 / n, floor as f64 / n)
}

/// Mask-violation cost: the midpoint-rule integral of
/// `max(|E|^2 - U, 0)` over the visible range, with cells that straddle the
/// mask edge or the visible rim split by their exact area shares.
pub fn cost(pattern: &PatternGrid, mask: &PowerMask) -> f64 {
    let res = pattern.resolution();
    let half = pattern.cell() / 2.0;
    let cell_area = pattern.cell() * pattern.cell();
    let floor = 10f64.powf(mask.floor_db / 10.0);
    let mut chi = 0.0;
    for i in 0..res {
        for j in 0..res {
            let (u, v) = pattern.uv(i, j);
            if u * u + v * v > 1.0 {
                continue;
            }
            let (frac_main, frac_floor) = cell_fractions(mask, u, v, half);
            let p = pattern.value(i, j);
            chi += (frac_main * (p - 1.0).max(0.0) + frac_floor * (p - floor).max(0.0))
                * cell_area;
        }
    }
    chi
}

/// Sidelobe level, directivity and half-power beamwidths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub sll_db: f64,
    pub d_dbi: f64,
    pub hpbw_az_deg: f64,
    pub hpbw_el_deg: f64,
}

/// Computes the radiation metrics of a normalized pattern. The mask supplies
/// the mainlobe region used both as the sidelobe exclusion zone and as the
/// sanity check that the peak landed where expected.
pub fn metrics(pattern: &PatternGrid, mask: &PowerMask) -> Result<PatternMetrics, PatternError> {
    let res = pattern.resolution();
    let (pi, pj) = pattern.peak();
    let (pu, pv) = pattern.uv(pi, pj);
    if !mask.in_mainlobe(pu, pv) {
        return Err(PatternError::PeakOutsideMainlobe);
    }

    let mut sidelobe: f64 = 0.0;
    let mut integral = 0.0;
    let cell_area = pattern.cell() * pattern.cell();
    for i in 0..res {
        for j in 0..res {
            let (u, v) = pattern.uv(i, j);
            let r2 = u * u + v * v;
            if r2 > 1.0 {
                continue;
            }
            let p = pattern.value(i, j);
            if !mask.in_mainlobe(u, v) {
                sidelobe = sidelobe.max(p);
            }
            // Hemispherical radiated power with the 1/cos(theta) Jacobian;
            // skip the rim where the Jacobian blows up.
            if r2 < 1.0 - 1e-9 {
                integral += p / (1.0 - r2).sqrt() * cell_area;
            }
        }
    }
    let d_lin = 4.0 * PI * pattern.value(pi, pj) / integral;

    let hpbw_az = half_power_width(pattern, pi, pj, true);
    let hpbw_el = half_power_width(pattern, pi, pj, false);

    Ok(PatternMetrics {
        sll_db: 10.0 * sidelobe.max(1e-30).log10(),
        d_dbi: 10.0 * d_lin.log10(),
        hpbw_az_deg: hpbw_az,
        hpbw_el_deg: hpbw_el,
    })
}

/// -3 dB width of the cut through the peak, in degrees of `asin(coordinate)`.
/// `along_u` walks the row through the peak, otherwise the column.
fn half_power_width(pattern: &PatternGrid, pi: usize, pj: usize, along_u: bool) -> f64 {
    let res = pattern.resolution();
    let peak_value = pattern.value(pi, pj);
    let half = 0.5 * peak_value;
    let coord = |idx: usize| {
        let (u, v) = if along_u {
            pattern.uv(pi, idx)
        } else {
            pattern.uv(idx, pj)
        };
        if along_u {
            u
        } else {
            v
        }
    };
    let value = |idx: usize| {
        if along_u {
            pattern.value(pi, idx)
        } else {
            pattern.value(idx, pj)
        }
    };
    let start = if along_u { pj } else { pi };

    let crossing = |dir: i64| -> f64 {
        let mut prev = start;
        loop {
            let next = prev as i64 + dir;
            if next < 0 || next >= res as i64 {
                return coord(prev).clamp(-1.0, 1.0);
            }
            let next = next as usize;
            let (v0, v1) = (value(prev), value(next));
            if v1 < half {
                // Linear interpolation between the straddling samples.
                let t = (v0 - half) / (v0 - v1);
                return coord(prev) + t * (coord(next) - coord(prev));
            }
            prev = next;
        }
    };
    let lo = crossing(-1);
    let hi = crossing(1);
    (hi.clamp(-1.0, 1.0).asin() - lo.clamp(-1.0, 1.0).asin()).to_degrees()
}

// ---------------------------------------------------------------------------
// Fast repeated evaluation.
// ---------------------------------------------------------------------------

/// Precomputed per-element phase table over the visible grid samples, plus
/// the sampled mask: turns one tiling evaluation into a dense
/// multiply-accumulate sweep. This is the cost oracle behind the exhaustive
/// and genetic drivers.
pub struct Evaluator {
    n_elements: usize,
    resolution: usize,
    /// Interleaved (re, im) of `exp(j k (x u + y v))`, element-major.
    table: Vec<f64>,
    /// Mainlobe / floor area fractions per visible sample.
    frac_main: Vec<f64>,
    frac_floor: Vec<f64>,
    floor: f64,
    cell_area: f64,
    points: usize,
}

impl Evaluator {
    pub fn new(
        ap: &HexAperture,
        mask: &PowerMask,
        resolution: usize,
        element: ElementPattern,
    ) -> Result<Self, PatternError> {
        if resolution < 2 {
            return Err(PatternError::ResolutionTooSmall);
        }
        let half = 1.0 / resolution as f64;
        let mut samples = Vec::new();
        let mut frac_main = Vec::new();
        let mut frac_floor = Vec::new();
        let mut factors = Vec::new();
        for i in 0..resolution {
            for j in 0..resolution {
                let (u, v) = PatternGrid::sample_at(resolution, i, j);
                if u * u + v * v <= 1.0 {
                    samples.push((u, v));
                    let (m, f) = cell_fractions(mask, u, v, half);
                    frac_main.push(m);
                    frac_floor.push(f);
                    factors.push(element.field_factor(u, v));
                }
            }
        }
        let positions = ap.element_positions();
        let points = samples.len();
        let mut table = vec![0.0; 2 * positions.len() * points];
        for (e, &(x, y)) in positions.iter().enumerate() {
            let row = &mut table[2 * e * points..2 * (e + 1) * points];
            for (p, &(u, v)) in samples.iter().enumerate() {
                let arg = WAVENUMBER * (x * u + y * v);
                let g = factors[p];
                row[2 * p] = g * arg.cos();
                row[2 * p + 1] = g * arg.sin();
            }
        }
        let cell = 2.0 / resolution as f64;
        Ok(Self {
            n_elements: positions.len(),
            resolution,
            table,
            frac_main,
            frac_floor,
            floor: 10f64.powf(mask.floor_db / 10.0),
            cell_area: cell * cell,
            points,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Mask-violation cost for per-element weights.
    pub fn chi_elements(&self, amplitude: &[f64], phase_rad: &[f64]) -> f64 {
        let mut field = vec![0.0f64; 2 * self.points];
        self.chi_elements_with(amplitude, phase_rad, &mut field)
    }

    /// Same as [`Evaluator::chi_elements`] with a caller-provided scratch
    /// buffer, for tight loops.
    pub fn chi_elements_with(
        &self,
        amplitude: &[f64],
        phase_rad: &[f64],
        field: &mut Vec<f64>,
    ) -> f64 {
        assert_eq!(amplitude.len(), self.n_elements);
        field.clear();
        field.resize(2 * self.points, 0.0);
        for e in 0..self.n_elements {
            let a = amplitude[e];
            if a == 0.0 {
                continue;
            }
            let (wr, wi) = (a * phase_rad[e].cos(), a * phase_rad[e].sin());
            let row = &self.table[2 * e * self.points..2 * (e + 1) * self.points];
            for p in 0..self.points {
                let (gr, gi) = (row[2 * p], row[2 * p + 1]);
                field[2 * p] += wr * gr - wi * gi;
                field[2 * p + 1] += wr * gi + wi * gr;
            }
        }
        let mut max = 0.0f64;
        for p in 0..self.points {
            let pw = field[2 * p] * field[2 * p] + field[2 * p + 1] * field[2 * p + 1];
            field[2 * p] = pw;
            if pw > max {
                max = pw;
            }
        }
        debug_assert!(max > 0.0, "cannot normalize an all-zero pattern");
        let mut chi = 0.0;
        for p in 0..self.points {
            let value = field[2 * p] / max;
            chi += (self.frac_main[p] * (value - 1.0).max(0.0)
                + self.frac_floor[p] * (value - self.floor).max(0.0))
                * self.cell_area;
        }
        chi
    }

    /// Cost of a tiling under the given reference excitations.
    pub fn chi_tiling(
        &self,
        tiling: &Tiling,
        reference: &ExcitationSet,
    ) -> Result<f64, PatternError> {
        let coeffs = subarray_coefficients(tiling, reference)?;
        let (amplitude, phase) = expand_to_elements(tiling, &coeffs);
        Ok(self.chi_elements(&amplitude, &phase))
    }
}

// ---------------------------------------------------------------------------
// Scan maps.
// ---------------------------------------------------------------------------

/// Scan cone: offsets around a pointing direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub theta0_deg: f64,
    pub phi0_deg: f64,
    pub theta_gamma: GridRange,
    pub phi_gamma: GridRange,
}

/// Half-open sampled range `start..end` with the given step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridRange {
    pub fn samples(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let x = self.start + k as f64 * self.step;
            if x >= self.end - 1e-12 {
                break;
            }
            out.push(x);
            k += 1;
        }
        out
    }
}

impl Default for ScanSpec {
    /// The benchmark cone: pointing at 30 degrees elevation, sweeping the
    /// full azimuth circle and +/- 30 degrees in elevation offset.
    fn default() -> Self {
        Self {
            theta0_deg: 30.0,
            phi0_deg: 0.0,
            theta_gamma: GridRange {
                start: -30.0,
                end: 30.0,
                step: 5.0,
            },
            phi_gamma: GridRange {
                start: 0.0,
                end: 360.0,
                step: 5.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSample {
    pub theta_gamma_deg: f64,
    pub phi_gamma_deg: f64,
    pub sll_db: f64,
    pub d_dbi: f64,
}

/// What the scan drives: a tiled array re-averaging phases per tile, or the
/// fully-populated control with one phase shifter per element.
#[derive(Debug, Clone, Copy)]
pub enum ScanTarget<'a> {
    Tiled(&'a Tiling),
    FullyPopulated,
}

/// Sweeps the scan cone. For every offset the reference phases are recomputed
/// for the scanned direction, averaged per tile (for tiled targets), and the
/// resulting pattern's SLL and directivity are recorded with the mainlobe
/// region re-centered on the scanned direction.
pub fn scan_map(
    ap: &HexAperture,
    target: ScanTarget<'_>,
    ref_amplitudes: &ExcitationSet,
    mask: &PowerMask,
    resolution: usize,
    spec: &ScanSpec,
) -> Result<Vec<ScanSample>, PatternError> {
    if ref_amplitudes.len() != ap.triangle_count() {
        return Err(PatternError::SizeMismatch {
            expected: ap.triangle_count(),
            got: ref_amplitudes.len(),
        });
    }
    let thetas = spec.theta_gamma.samples();
    let phis = spec.phi_gamma.samples();
    let mut cells = Vec::new();
    for &tg in &thetas {
        for &pg in &phis {
            cells.push((tg, pg));
        }
    }
    cells
        .par_iter()
        .map(|&(tg, pg)| {
            let theta = spec.theta0_deg + tg;
            let phi = spec.phi0_deg + pg;
            let mut excitations = ref_amplitudes.clone();
            excitations.set_steering(ap, theta, phi);
            let (amplitude, phase) = match target {
                ScanTarget::Tiled(tiling) => {
                    let coeffs = subarray_coefficients(tiling, &excitations)?;
                    expand_to_elements(tiling, &coeffs)
                }
                ScanTarget::FullyPopulated => {
                    (excitations.amplitudes().to_vec(), excitations.phases_rad())
                }
            };
            let pattern = array_factor(ap, &amplitude, &phase, resolution)?;
            let (u0, v0) = (
                theta.to_radians().sin() * phi.to_radians().cos(),
                theta.to_radians().sin() * phi.to_radians().sin(),
            );
            let m = metrics(&pattern, &mask.recentered(u0, v0))?;
            Ok(ScanSample {
                theta_gamma_deg: tg,
                phi_gamma_deg: pg,
                sll_db: m.sll_db,
                d_dbi: m.d_dbi,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_all;
    use crate::tiling::minimal_tiling;

    fn ap(rings: u32, rho: f64) -> HexAperture {
        HexAperture::new(rings, rho).unwrap()
    }

    #[test]
    fn two_element_pattern_matches_closed_form() {
        // Two elements at x = +/- rho/2 on the same row; the normalized
        // power is cos^2(k * (rho/2) * u) independent of v.
        let rho = 1.5;
        let ap = ap(1, rho);
        let mut amplitude = vec![0.0; 6];
        amplitude[0] = 1.0;
        amplitude[2] = 1.0;
        let phase = vec![0.0; 6];
        let pos = ap.element_positions();
        assert!((pos[0].0 + rho / 2.0).abs() < 1e-12);
        assert!((pos[2].0 - rho / 2.0).abs() < 1e-12);
        assert!((pos[0].1 - pos[2].1).abs() < 1e-12);

        let pattern = array_factor(&ap, &amplitude, &phase, 201).unwrap();
        for i in 0..201 {
            for j in 0..201 {
                if !pattern.is_visible(i, j) {
                    continue;
                }
                let (u, _) = pattern.uv(i, j);
                let expect = (WAVENUMBER * (rho / 2.0) * u).cos().powi(2);
                assert!(
                    (pattern.value(i, j) - expect).abs() < 1e-9,
                    "off at u={u}: {} vs {expect}",
                    pattern.value(i, j)
                );
            }
        }
    }

    #[test]
    fn two_element_metrics_match_analytic_values() {
        let rho = 1.5;
        let ap = ap(1, rho);
        let mut amplitude = vec![0.0; 6];
        amplitude[0] = 1.0;
        amplitude[2] = 1.0;
        let pattern = array_factor(&ap, &amplitude, &vec![0.0; 6], 801).unwrap();
        let mask = PowerMask {
            center: (0.0, 0.0),
            width_u: 0.8,
            width_v: 2.2,
            floor_db: -20.0,
            shape: MaskShape::Rectangle,
        };
        let m = metrics(&pattern, &mask).unwrap();
        // Grating peaks at u = 2/3 have full height: SLL ~ 0 dB.
        assert!(m.sll_db.abs() < 0.01, "sll {}", m.sll_db);
        // Half power at k x0 u = pi/4 -> u = 1/6.
        let expect = 2.0 * (1.0f64 / 6.0).asin().to_degrees();
        assert!((m.hpbw_az_deg - expect).abs() < 0.05, "{}", m.hpbw_az_deg);
    }

    #[test]
    fn steering_phase_values() {
        let ap = ap(2, 0.5);
        let zero = steering_phases(&ap, 0.0, 0.0);
        assert!(zero.iter().all(|&b| b == 0.0));
        // (u0, v0) = (0.5, 0): beta depends only on x.
        let b = steering_phases(&ap, 30.0, 0.0);
        for (i, &(x, _)) in ap.element_positions().iter().enumerate() {
            assert!((b[i] - (-WAVENUMBER * x * 0.5)).abs() < 1e-9);
        }
    }

    #[test]
    fn steering_reciprocity_under_half_turn() {
        let ap = ap(3, 0.5);
        let there = steering_phases(&ap, 25.0, 40.0);
        let back = steering_phases(&ap, 25.0, 220.0);
        for (a, b) in there.iter().zip(&back) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn tile_phase_error_is_half_the_member_difference() {
        let ap = ap(2, 3f64.sqrt() / 4.0);
        let tiling = minimal_tiling(&ap);
        let mut reference = ExcitationSet::uniform(&ap);
        reference.set_steering(&ap, 30.0, 10.0);
        let coeffs = subarray_coefficients(&tiling, &reference).unwrap();
        let phases = reference.phases_rad();
        for (q, tile) in tiling.tiles().iter().enumerate() {
            let (a, b) = tile.triangles;
            let half = (phases[a] - phases[b]) / 2.0;
            assert!((coeffs.phase_rad[q] - phases[a] + half).abs() < 1e-12);
            assert!((coeffs.phase_rad[q] - phases[b] - half).abs() < 1e-12);
        }
    }

    #[test]
    fn large_uniform_aperture_peaks_at_broadside() {
        let ap = ap(10, 3f64.sqrt() / 4.0);
        let amplitude = vec![1.0; 600];
        let pattern = array_factor(&ap, &amplitude, &vec![0.0; 600], 101).unwrap();
        assert_eq!(pattern.peak_uv(), (0.0, 0.0));
        assert_eq!(pattern.value(pattern.peak().0, pattern.peak().1), 1.0);
    }

    #[test]
    fn steered_peak_lands_on_target() {
        let ap = ap(4, 3f64.sqrt() / 4.0);
        let phase = steering_phases(&ap, 30.0, 0.0);
        let amplitude = vec![1.0; ap.triangle_count()];
        let pattern = array_factor(&ap, &amplitude, &phase, 201).unwrap();
        let (pu, pv) = pattern.peak_uv();
        assert!((pu - 0.5).abs() <= pattern.cell());
        assert!(pv.abs() <= pattern.cell());
    }

    #[test]
    fn subarray_averaging() {
        let ap = ap(2, 0.5);
        let tiling = minimal_tiling(&ap);
        let (a, b) = tiling.tiles()[0].triangles;
        let mut amplitude = vec![1.0; 24];
        amplitude[a] = 1.0;
        amplitude[b] = 0.6;
        let mut phases = vec![0.0; 24];
        phases[a] = 10.0;
        phases[b] = 20.0;
        let reference = ExcitationSet::new(amplitude, phases).unwrap();
        let coeffs = subarray_coefficients(&tiling, &reference).unwrap();
        assert!((coeffs.amplitude[0] - 0.8).abs() < 1e-12);
        assert!((coeffs.phase_rad[0] - 15f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn phase_averaging_unwraps_branch_cuts() {
        let ap = ap(2, 0.5);
        let tiling = minimal_tiling(&ap);
        let (a, b) = tiling.tiles()[0].triangles;
        let mut phases = vec![0.0; 24];
        phases[a] = 179.0;
        phases[b] = -179.0; // same direction as 181 degrees
        let reference = ExcitationSet::new(vec![1.0; 24], phases).unwrap();
        let coeffs = subarray_coefficients(&tiling, &reference).unwrap();
        let mean = coeffs.phase_rad[0].to_degrees();
        let wrapped = (mean - 180.0).rem_euclid(360.0).min((180.0 - mean).rem_euclid(360.0));
        assert!(wrapped < 1e-9, "mean {mean}");
    }

    #[test]
    fn uniform_reference_makes_every_tiling_transparent() {
        let ap = ap(2, 3f64.sqrt() / 4.0);
        let reference = ExcitationSet::uniform(&ap);
        let full = array_factor(&ap, reference.amplitudes(), &reference.phases_rad(), 101).unwrap();
        for (_, tiling) in enumerate_all(&ap) {
            let coeffs = subarray_coefficients(&tiling, &reference).unwrap();
            let (amp, ph) = expand_to_elements(&tiling, &coeffs);
            let tiled = array_factor(&ap, &amp, &ph, 101).unwrap();
            for i in 0..101 {
                for j in 0..101 {
                    let d = (tiled.value(i, j) - full.value(i, j)).abs();
                    let rel = d / full.value(i, j).max(1e-300);
                    assert!(rel < 1e-10 || d < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cost_is_zero_under_a_loose_mask() {
        let ap = ap(2, 0.5);
        let amplitude = vec![1.0; 24];
        let pattern = array_factor(&ap, &amplitude, &vec![0.0; 24], 101).unwrap();
        let mask = PowerMask {
            center: (0.0, 0.0),
            width_u: 2.0,
            width_v: 2.0,
            floor_db: 0.0,
            shape: MaskShape::Rectangle,
        };
        assert_eq!(cost(&pattern, &mask), 0.0);
    }

    #[test]
    fn cost_of_a_single_hot_cell() {
        let res = 101;
        let mut power = vec![1e-12; res * res];
        // A visible off-center cell forced to the normalization peak.
        let (i, j) = (50, 85);
        power[i * res + j] = 1.0;
        let pattern = PatternGrid::from_power(res, power).unwrap();
        let mask = PowerMask {
            center: (0.0, 0.0),
            width_u: 0.5,
            width_v: 0.5,
            floor_db: -20.0,
            shape: MaskShape::Rectangle,
        };
        let cell_area = pattern.cell() * pattern.cell();
        let expect = (1.0 - 0.01) * cell_area;
        assert!((cost(&pattern, &mask) - expect).abs() < 1e-15);
    }

    #[test]
    fn cost_is_monotone_in_mask_and_pattern() {
        let res = 61;
        let mut power = vec![0.0; res * res];
        for (k, p) in power.iter_mut().enumerate() {
            *p = 0.5 + 0.5 * ((k * 2654435761) % 1000) as f64 / 1000.0;
        }
        let pattern = PatternGrid::from_power(res, power.clone()).unwrap();
        let tight = PowerMask {
            center: (0.0, 0.0),
            width_u: 0.3,
            width_v: 0.3,
            floor_db: -30.0,
            shape: MaskShape::Rectangle,
        };
        let loose = PowerMask {
            floor_db: -10.0,
            ..tight.clone()
        };
        assert!(cost(&pattern, &loose) <= cost(&pattern, &tight));

        let lowered: Vec<f64> = power.iter().map(|p| p * 0.5).collect();
        let lower_pattern = PatternGrid::from_power(res, lowered).unwrap();
        // Uniform damping cancels in the normalization.
        assert_eq!(cost(&lower_pattern, &tight), cost(&pattern, &tight));

        // Raising samples while keeping the peak cell fixed never lowers chi.
        let mut raised = power.clone();
        let peak = raised
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        for (k, p) in raised.iter_mut().enumerate() {
            if k % 3 == 0 && *p < peak {
                *p = (*p * 1.3).min(peak);
            }
        }
        let raised_pattern = PatternGrid::from_power(res, raised).unwrap();
        assert!(cost(&raised_pattern, &tight) >= cost(&pattern, &tight));
    }

    #[test]
    fn directivity_tracks_aperture_area() {
        let rho = 3f64.sqrt() / 4.0;
        let ap = ap(4, rho);
        let amplitude = vec![1.0; ap.triangle_count()];
        let pattern = array_factor(&ap, &amplitude, &vec![0.0; 96], 201).unwrap();
        let mask = PowerMask {
            center: (0.0, 0.0),
            width_u: 0.9,
            width_v: 0.9,
            floor_db: -26.0,
            shape: MaskShape::Rectangle,
        };
        let m = metrics(&pattern, &mask).unwrap();
        let side = 4.0 * rho;
        let area = 1.5 * 3f64.sqrt() * side * side;
        let estimate = 10.0 * (4.0 * PI * area).log10();
        assert!(
            (m.d_dbi - estimate).abs() < 0.5,
            "D {} vs estimate {estimate}",
            m.d_dbi
        );
    }

    #[test]
    fn metrics_reject_peak_outside_mainlobe() {
        let ap = ap(2, 0.5);
        let phase = steering_phases(&ap, 30.0, 0.0);
        let pattern = array_factor(&ap, &vec![1.0; 24], &phase, 101).unwrap();
        let mask = PowerMask {
            center: (0.0, 0.0),
            width_u: 0.2,
            width_v: 0.2,
            floor_db: -20.0,
            shape: MaskShape::Rectangle,
        };
        assert_eq!(metrics(&pattern, &mask), Err(PatternError::PeakOutsideMainlobe));
    }

    #[test]
    fn evaluator_matches_one_shot_path() {
        let ap = ap(2, 3f64.sqrt() / 4.0);
        let mask = PowerMask {
            center: (0.0, 0.0),
            width_u: 0.9,
            width_v: 0.9,
            floor_db: -20.0,
            shape: MaskShape::Rectangle,
        };
        let evaluator = Evaluator::new(&ap, &mask, 101, ElementPattern::Isotropic).unwrap();
        let reference = ExcitationSet::cosine_taper(&ap, 1.0);
        let tiling = minimal_tiling(&ap);
        let chi_fast = evaluator.chi_tiling(&tiling, &reference).unwrap();
        let coeffs = subarray_coefficients(&tiling, &reference).unwrap();
        let (amp, ph) = expand_to_elements(&tiling, &coeffs);
        let pattern = array_factor(&ap, &amp, &ph, 101).unwrap();
        let chi_slow = cost(&pattern, &mask);
        assert!((chi_fast - chi_slow).abs() <= 1e-15 + 1e-12 * chi_slow.abs());
    }

    #[test]
    fn cosine_taper_shape() {
        let ap = ap(2, 0.5);
        let taper = ExcitationSet::cosine_taper(&ap, 1.0);
        let pos = ap.element_positions();
        let radius = 2.0 * 0.5;
        for (i, a) in taper.amplitudes().iter().enumerate() {
            let r = (pos[i].0.powi(2) + pos[i].1.powi(2)).sqrt();
            let expect = (PI * r / (2.0 * radius)).cos();
            assert!((a - expect).abs() < 1e-12);
        }
        // Center-most elements near 1, rim elements well below.
        let max = taper.amplitudes().iter().cloned().fold(0.0, f64::max);
        let min = taper.amplitudes().iter().cloned().fold(1.0, f64::min);
        assert!(max > 0.85 && min < 0.4, "max {max} min {min}");
    }

    #[test]
    fn scan_single_point_matches_direct_evaluation() {
        let ap = ap(2, 3f64.sqrt() / 4.0);
        let tiling = minimal_tiling(&ap);
        let reference = ExcitationSet::uniform(&ap);
        let mask = PowerMask {
            center: (0.5, 0.0),
            width_u: 0.9,
            width_v: 0.9,
            floor_db: -20.0,
            shape: MaskShape::Ellipse,
        };
        let spec = ScanSpec {
            theta0_deg: 30.0,
            phi0_deg: 0.0,
            theta_gamma: GridRange {
                start: 0.0,
                end: 1.0,
                step: 5.0,
            },
            phi_gamma: GridRange {
                start: 0.0,
                end: 1.0,
                step: 5.0,
            },
        };
        let samples = scan_map(&ap, ScanTarget::Tiled(&tiling), &reference, &mask, 101, &spec)
            .unwrap();
        assert_eq!(samples.len(), 1);

        let mut excitations = reference.clone();
        excitations.set_steering(&ap, 30.0, 0.0);
        let coeffs = subarray_coefficients(&tiling, &excitations).unwrap();
        let (amp, ph) = expand_to_elements(&tiling, &coeffs);
        let pattern = array_factor(&ap, &amp, &ph, 101).unwrap();
        let m = metrics(&pattern, &mask).unwrap();
        assert_eq!(samples[0].sll_db, m.sll_db);
        assert_eq!(samples[0].d_dbi, m.d_dbi);
    }

    #[test]
    fn fully_populated_scan_is_azimuth_symmetric() {
        let ap = ap(2, 3f64.sqrt() / 4.0);
        let reference = ExcitationSet::uniform(&ap);
        let mask = PowerMask {
            center: (0.5, 0.0),
            width_u: 0.9,
            width_v: 0.9,
            floor_db: -20.0,
            shape: MaskShape::Ellipse,
        };
        let spec = ScanSpec {
            theta0_deg: 30.0,
            phi0_deg: 0.0,
            theta_gamma: GridRange {
                start: 0.0,
                end: 1.0,
                step: 5.0,
            },
            phi_gamma: GridRange {
                start: 0.0,
                end: 360.0,
                step: 30.0,
            },
        };
        let samples = scan_map(
            &ap,
            ScanTarget::FullyPopulated,
            &reference,
            &mask,
            201,
            &spec,
        )
        .unwrap();
        assert_eq!(samples.len(), 12);
        let slls: Vec<f64> = samples.iter().map(|s| s.sll_db).collect();
        let spread = slls.iter().cloned().fold(f64::MIN, f64::max)
            - slls.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.3, "sll spread {spread}");
    }

    #[test]
    fn grid_range_sampling() {
        let r = GridRange {
            start: -30.0,
            end: 30.0,
            step: 5.0,
        };
        let s = r.samples();
        assert_eq!(s.len(), 12);
        assert_eq!(s[0], -30.0);
        assert_eq!(*s.last().unwrap(), 25.0);
    }

    #[test]
    fn excitation_validation() {
        assert!(matches!(
            ExcitationSet::new(vec![1.0, -0.5], vec![0.0, 0.0]),
            Err(PatternError::BadAmplitude { index: 1 })
        ));
        assert!(matches!(
            ExcitationSet::new(vec![1.0, f64::NAN], vec![0.0, 0.0]),
            Err(PatternError::BadAmplitude { index: 1 })
        ));
        let ap = ap(1, 0.5);
        assert!(matches!(
            array_factor(&ap, &vec![0.0; 6], &vec![0.0; 6], 101),
            Err(PatternError::AllZeroExcitations)
        ));
        assert!(matches!(
            array_factor(&ap, &vec![1.0; 5], &vec![0.0; 5], 101),
            Err(PatternError::SizeMismatch { .. })
        ));
    }
}
