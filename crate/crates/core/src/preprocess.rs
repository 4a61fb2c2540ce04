//! The two diffusion-memristive cellular layers.
//!
//! Both layers look at the same 3x3 window of the (noisy) input. Layer 1 is
//! a threshold switch on the centre pixel whose threshold is the mean of the
//! eight neighbours. Layer 2 has one switch per neighbour, driven by the
//! centre/neighbour voltage difference, and sums whatever fires. The
//! processed pixel is the sum of the two output currents. Borders are
//! dropped, so an HxW image yields (H-2)x(W-2) outputs.

use crate::device::fire_unchecked;
use crate::encoding::training_mv;
use crate::error::{Error, Result};
use crate::image::{Grid, Image};

/// Upper bound of a processed pixel: 25.5 (layer 1) + 8 * 25.5 (layer 2).
pub const CURRENT_CEILING_MA: f64 = 229.5;

/// Layer-2 threshold used when none is given, in mV.
pub const DEFAULT_EDGE_THRESHOLD_MV: f64 = 3.0;

/// Centre voltage plus its eight neighbours in the order
/// NW, N, NE, W, E, SW, S, SE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window3x3 {
    pub center: f64,
    pub neighbors: [f64; 8],
}

impl Window3x3 {
    pub fn new(center: f64, neighbors: [f64; 8]) -> Result<Self> {
        if !(center >= 0.0) || neighbors.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "window voltages must be non-negative".into(),
            ));
        }
        Ok(Self { center, neighbors })
    }

    /// Window centred on `(r, c)`; caller guarantees `(r, c)` is interior.
    #[inline]
    fn at(v: &Grid<f64>, r: usize, c: usize) -> Self {
        Self {
            center: v.get(r, c),
            neighbors: [
                v.get(r - 1, c - 1),
                v.get(r - 1, c),
                v.get(r - 1, c + 1),
                v.get(r, c - 1),
                v.get(r, c + 1),
                v.get(r + 1, c - 1),
                v.get(r + 1, c),
                v.get(r + 1, c + 1),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig {
    edge_threshold: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            edge_threshold: DEFAULT_EDGE_THRESHOLD_MV,
        }
    }
}

impl PreprocessConfig {
    pub fn new(edge_threshold_mv: f64) -> Result<Self> {
        if !(edge_threshold_mv >= 0.0 && edge_threshold_mv.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "edge threshold must be >= 0 mV, got {edge_threshold_mv}"
            )));
        }
        Ok(Self {
            edge_threshold: edge_threshold_mv,
        })
    }

    pub fn edge_threshold(&self) -> f64 {
        self.edge_threshold
    }
}

/// Layer-1 fire threshold: mean of the eight neighbours.
pub fn layer1_threshold(neighbors: &[f64; 8]) -> f64 {
    neighbors.iter().sum::<f64>() / 8.0
}

/// Layer-1 output: the centre spike passes only if it exceeds the local mean.
pub fn layer1_denoise(w: &Window3x3) -> f64 {
    fire_unchecked(w.center, layer1_threshold(&w.neighbors))
}

/// Layer-2 output: sum over neighbours of `|centre - neighbour|` where that
/// difference exceeds the edge threshold. Summed in neighbour order.
pub fn layer2_edge(w: &Window3x3, edge_threshold: f64) -> f64 {
    w.neighbors
        .iter()
        .map(|&n| fire_unchecked((w.center - n).abs(), edge_threshold))
        .sum()
}

/// Output current (mA) of the full preprocessing pass for one window.
#[inline]
pub fn process_window(w: &Window3x3, cfg: &PreprocessConfig) -> f64 {
    layer1_denoise(w) + layer2_edge(w, cfg.edge_threshold)
}

/// 2-D map of processed pixel currents in mA.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentMap(Grid<f64>);

impl CurrentMap {
    pub fn new(values: Grid<f64>) -> Result<Self> {
        if let Some(v) = values
            .as_slice()
            .iter()
            .find(|v| !(0.0..=CURRENT_CEILING_MA).contains(*v))
        {
            return Err(Error::Validation(format!(
                "current {v} outside [0, {CURRENT_CEILING_MA}] mA"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// Plain-text matrix, one row per line, values space-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows() {
            let row: Vec<String> = (0..self.cols())
                .map(|c| format!("{}", self.0.get(r, c)))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// 8-bit visualisation scaled so the ceiling maps to 255.
    pub fn to_gray(&self) -> Image {
        self.0
            .map(|v| (v * 255.0 / CURRENT_CEILING_MA).round().clamp(0.0, 255.0) as u8)
    }
}

/// Runs both cellular layers over every interior window of `image`,
/// encoding pixels at training scale.
pub fn preprocess_image(image: &Image, cfg: &PreprocessConfig) -> Result<CurrentMap> {
    if image.rows() < 3 || image.cols() < 3 {
        return Err(Error::InvalidArgument(format!(
            "preprocessing needs at least a 3x3 image, got {}x{}",
            image.rows(),
            image.cols()
        )));
    }
    let volts = image.map(training_mv);
    let (h, w) = (image.rows() - 2, image.cols() - 2);
    let mut out = Vec::with_capacity(h * w);
    for r in 1..=h {
        for c in 1..=w {
            out.push(process_window(&Window3x3::at(&volts, r, c), cfg));
        }
    }
    Ok(CurrentMap(Grid::from_vec(h, w, out)?))
}
