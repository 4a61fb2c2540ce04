//! Drift-memristive feedforward layer.
//!
//! One drift device per (class, pixel). Training is pure potentiation: every
//! processed training image pushes its per-pixel current spikes into the
//! devices of its class, and memristance falls linearly with the accumulated
//! spike area. After the pass a single global slope `k2` is chosen so the
//! largest accumulated area lands exactly on `r_on`.
//!
//! Inference drives each class array with the image at inference scale and
//! sums the device currents; the class with the largest total current wins.

use std::fmt;

use crate::dataset::{Dataset, NUM_CLASSES};
use crate::device::{memristance_unchecked, DriftParams};
use crate::encoding::{inference_mv, training_mv};
use crate::error::{Error, Result};
use crate::image::{Grid, Image};
use crate::noise::{add_noise, NoiseConfig};
use crate::preprocess::{preprocess_image, PreprocessConfig};

/// What drives the drift layer during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainingDrive {
    /// Currents from the two cellular layers.
    #[default]
    Preprocessed,
    /// Control: the noisy interior crop at training scale, no cellular layers.
    RawCrop,
}

/// What drives the drift layer during inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InferenceMode {
    /// Interior crop of the image at inference scale; drift layer only.
    #[default]
    Raw,
    /// Cellular-layer currents scaled by 1/10.
    Preprocessed,
}

impl InferenceMode {
    pub fn from_flag(preprocess_inference: bool) -> Self {
        if preprocess_inference {
            InferenceMode::Preprocessed
        } else {
            InferenceMode::Raw
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub noise: NoiseConfig,
    pub preprocess: PreprocessConfig,
    /// Device bounds and window factor. `k2` is replaced by calibration.
    pub drift: DriftParams,
    pub drive: TrainingDrive,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            noise: NoiseConfig::default(),
            preprocess: PreprocessConfig::default(),
            drift: DriftParams::default(),
            drive: TrainingDrive::Preprocessed,
        }
    }
}

/// Accumulated spike area per (class, pixel), class-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAreas {
    rows: usize,
    cols: usize,
    areas: Vec<f64>,
}

impl ClassAreas {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            areas: vec![0.0; NUM_CLASSES * rows * cols],
        }
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn class(&self, c: usize) -> &[f64] {
        let n = self.cells();
        &self.areas[c * n..(c + 1) * n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.areas
    }

    /// Adds one spike frame (amplitude x one hold cycle per cell) to class `c`.
    pub fn add_frame(&mut self, c: usize, frame: &[f64]) {
        let n = self.cells();
        debug_assert_eq!(frame.len(), n);
        for (a, &v) in self.areas[c * n..(c + 1) * n].iter_mut().zip(frame) {
            *a += v;
        }
    }

    /// Adds `other` cell by cell, in order.
    pub fn merge(&mut self, other: &ClassAreas) {
        for (a, b) in self.areas.iter_mut().zip(&other.areas) {
            *a += b;
        }
    }

    pub fn max(&self) -> f64 {
        self.areas.iter().copied().fold(0.0, f64::max)
    }
}

/// Spike frame presented to the drift layer for one training image.
pub fn training_frame(image: &Image, index: u64, cfg: &TrainConfig) -> Result<Vec<f64>> {
    let noisy = add_noise(image, &cfg.noise, index);
    Ok(match cfg.drive {
        TrainingDrive::Preprocessed => preprocess_image(&noisy, &cfg.preprocess)?
            .values()
            .as_slice()
            .to_vec(),
        TrainingDrive::RawCrop => noisy.interior()?.map(training_mv).into_vec(),
    })
}

/// First pass of training: accumulate spike areas in ascending image order.
pub fn accumulate(data: &Dataset, cfg: &TrainConfig) -> Result<ClassAreas> {
    let first = data
        .images()
        .first()
        .ok_or_else(|| Error::InvalidArgument("training set is empty".into()))?;
    if first.rows() < 3 || first.cols() < 3 {
        return Err(Error::InvalidArgument(
            "training images must be >= 3x3".into(),
        ));
    }
    let mut areas = ClassAreas::zeros(first.rows() - 2, first.cols() - 2);
    for (i, (img, label)) in data.iter().enumerate() {
        if img.rows() != first.rows() || img.cols() != first.cols() {
            return Err(Error::InvalidArgument(format!(
                "training image {i} is {}x{}, expected {}x{}",
                img.rows(),
                img.cols(),
                first.rows(),
                first.cols()
            )));
        }
        let frame = training_frame(img, i as u64, cfg)?;
        areas.add_frame(label as usize, &frame);
    }
    Ok(areas)
}

/// Second pass of training: choose `k2` so the largest area maps onto
/// `r_on`, then convert every area to a memristance.
pub fn calibrate(areas: &ClassAreas, cfg: &TrainConfig) -> Result<DriftArray> {
    cfg.drift.validate()?;
    let a_max = areas.max();
    if !(a_max > 0.0) {
        return Err(Error::Calibration(
            "no spike charge accumulated (all-blank training data)".into(),
        ));
    }
    let mut params = cfg.drift;
    params.k2 = (params.r_off - params.r_on) / (a_max * params.window_factor);
    let memristances = areas
        .as_slice()
        .iter()
        .map(|&a| memristance_unchecked(&params, a))
        .collect();
    Ok(DriftArray {
        rows: areas.rows,
        cols: areas.cols,
        memristances,
        params,
        a_max,
        preprocess: cfg.preprocess,
        noise: cfg.noise,
    })
}

pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<DriftArray> {
    calibrate(&accumulate(data, cfg)?, cfg)
}

/// Trained layer: a `classes x rows x cols` block of memristances plus the
/// settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftArray {
    rows: usize,
    cols: usize,
    memristances: Vec<f64>,
    params: DriftParams,
    a_max: f64,
    preprocess: PreprocessConfig,
    noise: NoiseConfig,
}

impl DriftArray {
    /// Every device still at `r_off`.
    pub fn untrained(rows: usize, cols: usize, params: DriftParams) -> Self {
        Self {
            rows,
            cols,
            memristances: vec![params.r_off; NUM_CLASSES * rows * cols],
            params,
            a_max: 0.0,
            preprocess: PreprocessConfig::default(),
            noise: NoiseConfig::default(),
        }
    }

    /// Assembles a model from raw parts, checking every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        rows: usize,
        cols: usize,
        memristances: Vec<f64>,
        params: DriftParams,
        a_max: f64,
        preprocess: PreprocessConfig,
        noise: NoiseConfig,
    ) -> Result<Self> {
        params.validate()?;
        noise.validate()?;
        if memristances.len() != NUM_CLASSES * rows * cols {
            return Err(Error::Format(format!(
                "expected {} memristances for {NUM_CLASSES}x{rows}x{cols}, got {}",
                NUM_CLASSES * rows * cols,
                memristances.len()
            )));
        }
        if let Some((i, m)) = memristances
            .iter()
            .enumerate()
            .find(|(_, m)| !(params.r_on..=params.r_off).contains(*m))
        {
            return Err(Error::Validation(format!(
                "memristance {m} at cell {i} outside [{}, {}]",
                params.r_on, params.r_off
            )));
        }
        if !(a_max >= 0.0 && a_max.is_finite()) {
            return Err(Error::Validation(format!(
                "A_max must be >= 0, got {a_max}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            memristances,
            params,
            a_max,
            preprocess,
            noise,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn classes(&self) -> usize {
        NUM_CLASSES
    }

    pub fn params(&self) -> &DriftParams {
        &self.params
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn preprocess_config(&self) -> &PreprocessConfig {
        &self.preprocess
    }

    pub fn noise_config(&self) -> &NoiseConfig {
        &self.noise
    }

    pub fn memristances(&self) -> &[f64] {
        &self.memristances
    }

    pub fn class_memristances(&self, c: usize) -> &[f64] {
        let n = self.cells();
        &self.memristances[c * n..(c + 1) * n]
    }

    /// Memristance of one device.
    pub fn memristance(&self, class: usize, r: usize, c: usize) -> f64 {
        self.memristances[class * self.cells() + r * self.cols + c]
    }

    pub fn device_counts(&self) -> DeviceCounts {
        DeviceCounts {
            drift: self.memristances.len(),
            diffusion_per_window: 1 + 2 * 8,
        }
    }

    /// Drive voltages (mV) presented to the array for a test image.
    pub fn drive(&self, image: &Image, mode: InferenceMode) -> Result<Vec<f64>> {
        if image.rows() != self.rows + 2 || image.cols() != self.cols + 2 {
            return Err(Error::InvalidArgument(format!(
                "model expects {}x{} images, got {}x{}",
                self.rows + 2,
                self.cols + 2,
                image.rows(),
                image.cols()
            )));
        }
        Ok(match mode {
            InferenceMode::Raw => image.interior()?.map(inference_mv).into_vec(),
            InferenceMode::Preprocessed => preprocess_image(image, &self.preprocess)?
                .as_slice()
                .iter()
                .map(|v| v / 10.0)
                .collect(),
        })
    }

    /// Total output current (mA) per class.
    pub fn class_scores(&self, image: &Image, mode: InferenceMode) -> Result<[f64; NUM_CLASSES]> {
        let drive = self.drive(image, mode)?;
        Ok(self.scores_for_drive(&drive))
    }

    /// Kirchhoff sum of `u / m` over each class array, in pixel order.
    pub fn scores_for_drive(&self, drive: &[f64]) -> [f64; NUM_CLASSES] {
        let mut scores = [0.0; NUM_CLASSES];
        for (c, s) in scores.iter_mut().enumerate() {
            *s = drive
                .iter()
                .zip(self.class_memristances(c))
                .map(|(u, m)| u / m)
                .sum();
        }
        scores
    }

    pub fn classify(&self, image: &Image, mode: InferenceMode) -> Result<usize> {
        Ok(argmax(&self.class_scores(image, mode)?))
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviceCounts {
    pub drift: usize,
    /// Layer 1 has one device per window, layer 2 two per neighbour.
    pub diffusion_per_window: usize,
}

/// Classifies the noisy test set image by image.
pub fn evaluate(
    model: &DriftArray,
    test: &Dataset,
    noise: &NoiseConfig,
    mode: InferenceMode,
) -> Result<Evaluation> {
    let mut confusion = ConfusionMatrix::default();
    for (i, (img, label)) in test.iter().enumerate() {
        let noisy = add_noise(img, noise, i as u64);
        let pred = model.classify(&noisy, mode)?;
        confusion.record(pred, label as usize);
    }
    Ok(Evaluation {
        accuracy: confusion.accuracy(),
        confusion,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
}

/// 10x10 counts; rows are predicted classes, columns are true classes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn record(&mut self, predicted: usize, truth: usize) {
        self.counts[predicted][truth] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }

    /// Items per true class.
    pub fn column_sums(&self) -> [u64; NUM_CLASSES] {
        let mut out = [0; NUM_CLASSES];
        for row in &self.counts {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    /// Items per predicted class.
    pub fn row_sums(&self) -> [u64; NUM_CLASSES] {
        self.counts.map(|row| row.iter().sum())
    }

    /// CSV with a header row of true labels and a leading column of predicted
    /// labels. `comments` become leading `# ` lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(CSV_CORNER);
        for t in 0..NUM_CLASSES {
            out.push_str(&format!(",{t}"));
        }
        out.push('\n');
        for (p, row) in self.counts.iter().enumerate() {
            out.push_str(&p.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("confusion CSV is empty".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let expected: Vec<String> = (0..NUM_CLASSES).map(|i| i.to_string()).collect();
        if cols.len() != NUM_CLASSES + 1 || cols[1..] != expected[..] {
            return Err(Error::Format(format!("bad confusion CSV header: {header}")));
        }
        let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
        for (p, row) in counts.iter_mut().enumerate() {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("confusion CSV missing row {p}")))?;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != NUM_CLASSES + 1 || fields[0] != p.to_string() {
                return Err(Error::Format(format!("bad confusion CSV row {p}: {line}")));
            }
            for (slot, f) in row.iter_mut().zip(&fields[1..]) {
                *slot = f
                    .parse()
                    .map_err(|_| Error::Format(format!("bad count {f:?} in row {p}")))?;
            }
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Format(format!(
                "unexpected line after matrix: {extra}"
            )));
        }
        Ok(Self { counts })
    }
}

const CSV_CORNER: &str = "predicted\\expected";

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>5}", "")?;
        for t in 0..NUM_CLASSES {
            write!(f, "{t:>6}")?;
        }
        writeln!(f)?;
        for (p, row) in self.counts.iter().enumerate() {
            write!(f, "{p:>5}")?;
            for v in row {
                write!(f, "{v:>6}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Memristance grid of one class, for inspection.
pub fn class_grid(model: &DriftArray, class: usize) -> Grid<f64> {
    Grid::from_vec(
        model.rows,
        model.cols,
        model.class_memristances(class).to_vec(),
    )
    .expect("model shape is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;
    use crate::device::{R_OFF, R_ON};

    fn clean_cfg(edge: f64) -> TrainConfig {
        TrainConfig {
            noise: NoiseConfig::new(0.0, 0).unwrap(),
            preprocess: PreprocessConfig::new(edge).unwrap(),
            ..TrainConfig::default()
        }
    }

    /// 28x28 image with a bright square at `(r0, c0)` of side `s`.
    fn square(r0: usize, c0: usize, s: usize) -> Image {
        let mut img = Image::blank(28, 28);
        for r in r0..r0 + s {
            for c in c0..c0 + s {
                img.set(r, c, 255);
            }
        }
        img
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let ds = Dataset::new(vec![], vec![], Split::Train).unwrap();
        assert!(matches!(
            train(&ds, &clean_cfg(3.0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn blank_dataset_fails_calibration() {
        let ds = Dataset::new(vec![Image::blank(28, 28)], vec![3], Split::Train).unwrap();
        assert!(matches!(
            train(&ds, &clean_cfg(3.0)),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn absent_class_stays_at_r_off() {
        let ds = Dataset::new(
            vec![square(5, 5, 4), square(15, 15, 4)],
            vec![0, 1],
            Split::Train,
        )
        .unwrap();
        let model = train(&ds, &clean_cfg(3.0)).unwrap();
        assert!(model.class_memristances(7).iter().all(|&m| m == R_OFF));
        let min = model
            .memristances()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, R_ON);
    }

    #[test]
    fn duplicating_data_leaves_memristances_unchanged() {
        let imgs = vec![square(5, 5, 4), square(12, 3, 6), square(20, 20, 3)];
        let labels = vec![2, 5, 2];
        let once = Dataset::new(imgs.clone(), labels.clone(), Split::Train).unwrap();
        let twice = Dataset::new(
            imgs.iter().chain(&imgs).cloned().collect(),
            labels.iter().chain(&labels).copied().collect(),
            Split::Train,
        )
        .unwrap();
        let cfg = clean_cfg(3.0);
        let a1 = accumulate(&once, &cfg).unwrap();
        let a2 = accumulate(&twice, &cfg).unwrap();
        for (x, y) in a1.as_slice().iter().zip(a2.as_slice()) {
            assert_eq!(2.0 * x, *y);
        }
        let m1 = calibrate(&a1, &cfg).unwrap();
        let m2 = calibrate(&a2, &cfg).unwrap();
        assert_eq!(m1.memristances(), m2.memristances());
    }

    #[test]
    fn untrained_model_ties_to_class_zero() {
        let model = DriftArray::untrained(26, 26, DriftParams::default());
        let img = square(3, 3, 10);
        let s = model.class_scores(&img, InferenceMode::Raw).unwrap();
        assert!(s.iter().all(|&v| v == s[0]));
        assert_eq!(model.classify(&img, InferenceMode::Raw).unwrap(), 0);
        let zeros = model
            .class_scores(&Image::blank(28, 28), InferenceMode::Raw)
            .unwrap();
        assert_eq!(zeros, [0.0; 10]);
    }

    #[test]
    fn wrong_image_shape_is_rejected() {
        let model = DriftArray::untrained(26, 26, DriftParams::default());
        assert!(model
            .class_scores(&Image::blank(27, 28), InferenceMode::Raw)
            .is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0; 10]), 0);
    }

    #[test]
    fn window_factor_is_absorbed_by_calibration() {
        let ds = Dataset::new(
            vec![square(5, 5, 4), square(9, 9, 8)],
            vec![0, 4],
            Split::Train,
        )
        .unwrap();
        let mut cfg = clean_cfg(3.0);
        let a = calibrate(&accumulate(&ds, &cfg).unwrap(), &cfg).unwrap();
        cfg.drift.window_factor = 0.25;
        let b = calibrate(&accumulate(&ds, &cfg).unwrap(), &cfg).unwrap();
        for (x, y) in a.memristances().iter().zip(b.memristances()) {
            assert!((x - y).abs() <= 1e-9 * x, "{x} vs {y}");
        }
    }

    #[test]
    fn confusion_bookkeeping() {
        let mut cm = ConfusionMatrix::default();
        for t in 0..10 {
            cm.record(t, t);
        }
        cm.record(8, 3);
        assert_eq!(cm.total(), 11);
        assert_eq!(cm.correct(), 10);
        assert_eq!(cm.column_sums()[3], 2);
        assert_eq!(cm.row_sums()[8], 2);
        let back = ConfusionMatrix::from_csv(&cm.to_csv(&["seed=1".into()])).unwrap();
        assert_eq!(back, cm);
    }

    #[test]
    fn perfect_classifier_is_diagonal() {
        let mut cm = ConfusionMatrix::default();
        for i in 0..1000 {
            cm.record(i % 10, i % 10);
        }
        assert_eq!(cm.accuracy(), 1.0);
        for p in 0..10 {
            for t in 0..10 {
                assert_eq!(cm.counts()[p][t] > 0, p == t);
            }
        }
    }

    #[test]
    fn csv_parse_errors() {
        assert!(ConfusionMatrix::from_csv("").is_err());
        assert!(ConfusionMatrix::from_csv("a,b\n").is_err());
        let good = ConfusionMatrix::default().to_csv(&[]);
        let truncated: String = good.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(ConfusionMatrix::from_csv(&truncated).is_err());
        let bad = good.replace("\n3,0,", "\n3,x,");
        assert!(ConfusionMatrix::from_csv(&bad).is_err());
    }
}
