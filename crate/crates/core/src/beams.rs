//! Analog beam codebooks for uniform planar arrays.
//!
//! Beams are modelled as flat-top azimuth sectors: a codeword radiates its
//! full coherent gain (one unit per active element) inside its sector and a
//! constant sidelobe floor everywhere else. The elevation dimension of the
//! array is collapsed, so every element contributes to the azimuth gain.
//!
//! A codebook of `N` codewords tiles `[0, 2π)` with sectors of width `2π/N`.
//! Each sector is half-open, `[center - bw/2, center + bw/2)`, so any azimuth
//! falls in the mainlobe of exactly one codeword.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Default sidelobe floor, linear (-20 dB).
pub const DEFAULT_SIDELOBE_GAIN: f64 = 0.01;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Smallest absolute angle between two azimuths, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    pub element_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "array must have at least one element, got {rows}x{cols}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            element_spacing: 0.5,
        })
    }

    /// 8×8 base-station array.
    pub fn bs_8x8() -> Self {
        Self::new(8, 8).expect("non-empty array")
    }

    /// 4×4 user-equipment array.
    pub fn ue_4x4() -> Self {
        Self::new(4, 4).expect("non-empty array")
    }

    /// 2×2 user-equipment array.
    pub fn ue_2x2() -> Self {
        Self::new(2, 2).expect("non-empty array")
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }
}

/// One steerable analog beam.
///
/// A codeword remembers its slot in the tiling it came from (`index` out of
/// `count`, rotated by `offset`), which is what makes the mainlobe test exact
/// at sector boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamCodeword {
    pub center_azimuth: f64,
    pub beamwidth: f64,
    pub active_elements: usize,
    pub mainlobe_gain: f64,
    pub sidelobe_gain: f64,
    index: usize,
    count: usize,
    offset: f64,
}

impl BeamCodeword {
    /// Index of the codeword within its codebook.
    pub fn index(&self) -> usize {
        self.index
    }

    /// True when `azimuth` falls inside this codeword's half-open sector.
    pub fn in_mainlobe(&self, azimuth: f64) -> bool {
        sector_of(azimuth, self.offset, self.count) == self.index
    }
}

/// Sector index of `azimuth` in a tiling of `count` sectors whose first
/// center sits at `offset`.
fn sector_of(azimuth: f64, offset: f64, count: usize) -> usize {
    let width = TAU / count as f64;
    let pos = wrap_angle(azimuth - offset + width / 2.0) / width;
    (pos.floor() as usize) % count
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    codewords: Vec<BeamCodeword>,
    offset: f64,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[BeamCodeword] {
        &self.codewords
    }

    pub fn get(&self, index: usize) -> Option<&BeamCodeword> {
        self.codewords.get(index)
    }

    pub fn beamwidth(&self) -> f64 {
        TAU / self.len() as f64
    }

    pub fn active_elements(&self) -> usize {
        self.codewords[0].active_elements
    }

    /// Rotation of the first beam center away from azimuth zero.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Index of the codeword whose mainlobe contains `azimuth`.
    pub fn mainlobe_index(&self, azimuth: f64) -> usize {
        sector_of(azimuth, self.offset, self.len())
    }

    /// Same codebook with every center rotated by `offset` radians.
    pub fn rotated(&self, offset: f64) -> Codebook {
        let offset = wrap_angle(self.offset + offset);
        let n = self.len();
        let codewords = self
            .codewords
            .iter()
            .map(|cw| BeamCodeword {
                center_azimuth: wrap_angle(offset + TAU * cw.index as f64 / n as f64),
                offset,
                ..cw.clone()
            })
            .collect();
        Codebook { codewords, offset }
    }

    /// Same codebook with a different sidelobe floor.
    pub fn with_sidelobe_gain(mut self, sidelobe_gain: f64) -> Result<Codebook> {
        if !(sidelobe_gain > 0.0 && sidelobe_gain < 1.0) {
            return Err(Error::invalid(format!(
                "sidelobe gain must be in (0, 1), got {sidelobe_gain}"
            )));
        }
        for cw in &mut self.codewords {
            cw.sidelobe_gain = sidelobe_gain;
        }
        Ok(self)
    }
}

/// Builds a codebook of `n_directions` flat-top beams with centers at
/// `2πk/N`, each combining `active_elements` elements coherently.
pub fn make_codebook(
    geometry: ArrayGeometry,
    n_directions: usize,
    active_elements: usize,
) -> Result<Codebook> {
    if n_directions == 0 {
        return Err(Error::invalid("codebook needs at least one direction"));
    }
    if active_elements == 0 || active_elements > geometry.elements() {
        return Err(Error::invalid(format!(
            "active elements {active_elements} not in 1..={} for a {}x{} array",
            geometry.elements(),
            geometry.rows,
            geometry.cols
        )));
    }
    let beamwidth = TAU / n_directions as f64;
    let codewords = (0..n_directions)
        .map(|k| BeamCodeword {
            center_azimuth: TAU * k as f64 / n_directions as f64,
            beamwidth,
            active_elements,
            mainlobe_gain: active_elements as f64,
            sidelobe_gain: DEFAULT_SIDELOBE_GAIN,
            index: k,
            count: n_directions,
            offset: 0.0,
        })
        .collect();
    Ok(Codebook {
        codewords,
        offset: 0.0,
    })
}

/// Linear power gain of `codeword` towards `azimuth`.
pub fn beam_gain(codeword: &BeamCodeword, azimuth: f64) -> f64 {
    if codeword.in_mainlobe(azimuth) {
        codeword.mainlobe_gain
    } else {
        codeword.sidelobe_gain
    }
}

/// Index of the codeword whose center is closest to `bearing`. Ties go to
/// the lowest index.
pub fn best_beam_for_bearing(codebook: &Codebook, bearing: f64) -> usize {
    const TIE_EPS: f64 = 1e-12;
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (k, cw) in codebook.codewords.iter().enumerate() {
        let d = angular_distance(cw.center_azimuth, bearing);
        if d < best_dist - TIE_EPS {
            best = k;
            best_dist = d;
        }
    }
    best
}

/// `index` followed by its neighbours out to `half_window` on each side,
/// alternating below/above: `[i, i-1, i+1, i-2, i+2, ...]` (circular).
pub fn adjacent_beams(codebook: &Codebook, index: usize, half_window: usize) -> Result<Vec<usize>> {
    let n = codebook.len();
    if index >= n {
        return Err(Error::invalid(format!(
            "beam index {index} out of range for {n} beams"
        )));
    }
    if 2 * half_window >= n {
        return Err(Error::invalid(format!(
            "half window {half_window} overlaps itself in a {n}-beam codebook"
        )));
    }
    let mut out = Vec::with_capacity(2 * half_window + 1);
    out.push(index);
    for step in 1..=half_window {
        out.push((index + n - step) % n);
        out.push((index + step) % n);
    }
    Ok(out)
}
