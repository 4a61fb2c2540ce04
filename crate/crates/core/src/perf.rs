//! Closed-form timing model of the pipelined hardware.
//!
//! The pipeline loads and processes one 3x3 window per clock, so an HxW
//! image costs (H-2)(W-2) cycles for training or inference alike. Reported
//! figures follow a fixed rounding chain: training time in ms to two
//! decimals, latency in µs to three significant digits, and throughput as
//! the floor of the reciprocal of the *rounded* latency. Unrounded values
//! are reported alongside.

use std::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_CLOCK_HZ: f64 = 517.87e6;
pub const DEFAULT_TRAIN_IMAGES: u64 = 60_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfConfig {
    pub clock_hz: f64,
    pub image_h: usize,
    pub image_w: usize,
    pub n_train: u64,
}

impl Default for PerfConfig {
    fn default() -> Self {
        Self {
            clock_hz: DEFAULT_CLOCK_HZ,
            image_h: 28,
            image_w: 28,
            n_train: DEFAULT_TRAIN_IMAGES,
        }
    }
}

impl PerfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "clock must be positive, got {} Hz",
                self.clock_hz
            )));
        }
        windows_per_image(self.image_h, self.image_w).map(|_| ())
    }
}

pub fn windows_per_image(h: usize, w: usize) -> Result<u64> {
    if h < 3 || w < 3 {
        return Err(Error::InvalidArgument(format!(
            "image must be at least 3x3, got {h}x{w}"
        )));
    }
    Ok(((h - 2) * (w - 2)) as u64)
}

/// Rounds to `digits` decimal places.
pub fn round_decimals(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

/// Rounds to `sig` significant digits via decimal formatting, which avoids
/// the representation error of scale-and-round on already-short values.
pub fn round_significant(x: f64, sig: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", sig.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses")
}

/// Exact training time for the whole set, in ms.
pub fn training_time_exact_ms(cfg: &PerfConfig) -> Result<f64> {
    cfg.validate()?;
    let windows = windows_per_image(cfg.image_h, cfg.image_w)?;
    Ok(cfg.n_train as f64 * windows as f64 / cfg.clock_hz * 1e3)
}

/// Training time in ms, rounded to two decimals.
pub fn training_time(cfg: &PerfConfig) -> Result<f64> {
    Ok(round_decimals(training_time_exact_ms(cfg)?, 2))
}

/// `(latency µs to 3 significant digits, throughput images/s)` where
/// throughput is the floored reciprocal of the rounded latency.
pub fn inference_latency_and_throughput(cfg: &PerfConfig) -> Result<(f64, u64)> {
    cfg.validate()?;
    let windows = windows_per_image(cfg.image_h, cfg.image_w)?;
    let latency_us = round_significant(windows as f64 / cfg.clock_hz * 1e6, 3);
    // 1 / (latency_us * 1e-6) written as 1e6 / latency_us keeps 1.00 µs at
    // exactly 1,000,000.
    let throughput = (1e6 / latency_us).floor() as u64;
    Ok((latency_us, throughput))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfReport {
    pub config: PerfConfig,
    pub windows_per_image: u64,
    pub train_time_ms: f64,
    pub infer_latency_us: f64,
    pub throughput_images_per_s: u64,
    pub exact_train_time_ms: f64,
    pub exact_infer_latency_us: f64,
    pub exact_throughput_images_per_s: f64,
}

impl PerfReport {
    pub fn compute(cfg: &PerfConfig) -> Result<Self> {
        let windows = windows_per_image(cfg.image_h, cfg.image_w)?;
        let (lat, thr) = inference_latency_and_throughput(cfg)?;
        let exact_lat_s = windows as f64 / cfg.clock_hz;
        Ok(Self {
            config: *cfg,
            windows_per_image: windows,
            train_time_ms: training_time(cfg)?,
            infer_latency_us: lat,
            throughput_images_per_s: thr,
            exact_train_time_ms: training_time_exact_ms(cfg)?,
            exact_infer_latency_us: exact_lat_s * 1e6,
            exact_throughput_images_per_s: cfg.clock_hz / windows as f64,
        })
    }

    /// Machine-readable `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let c = &self.config;
        format!(
            "clock_hz={}\nimage_h={}\nimage_w={}\nn_train={}\nwindows_per_image={}\n\
             train_time_ms={:.2}\ninfer_latency_us={}\nthroughput_images_per_s={}\n\
             exact_train_time_ms={}\nexact_infer_latency_us={}\nexact_throughput_images_per_s={}\n",
            c.clock_hz,
            c.image_h,
            c.image_w,
            c.n_train,
            self.windows_per_image,
            self.train_time_ms,
            format_sig3(self.infer_latency_us),
            self.throughput_images_per_s,
            self.exact_train_time_ms,
            self.exact_infer_latency_us,
            self.exact_throughput_images_per_s,
        )
    }
}

/// Three significant digits, fixed notation (e.g. `1.31`, `0.0131`).
fn format_sig3(x: f64) -> String {
    if x == 0.0 {
        return "0.00".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (2 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// `763358` -> `763,358`.
pub fn group_thousands(n: u64) -> String {
    let s = n.to_string();
    let mut out = String::with_capacity(s.len() + s.len() / 3);
    for (i, ch) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

impl fmt::Display for PerfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        writeln!(f, "clock                {:.2} MHz", c.clock_hz / 1e6)?;
        writeln!(f, "image                {}x{}", c.image_h, c.image_w)?;
        writeln!(f, "training images      {}", group_thousands(c.n_train))?;
        writeln!(f, "windows per image    {}", self.windows_per_image)?;
        writeln!(f, "training time        {:.2} ms", self.train_time_ms)?;
        writeln!(
            f,
            "inference latency    {} µs",
            format_sig3(self.infer_latency_us)
        )?;
        writeln!(
            f,
            "throughput           {} images/s",
            group_thousands(self.throughput_images_per_s)
        )?;
        writeln!(f, "exact training time  {} ms", self.exact_train_time_ms)?;
        writeln!(f, "exact latency        {} µs", self.exact_infer_latency_us)?;
        writeln!(
            f,
            "exact throughput     {} images/s",
            group_thousands(self.exact_throughput_images_per_s.round() as u64)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        assert_eq!(windows_per_image(28, 28).unwrap(), 676);
        assert_eq!(windows_per_image(3, 3).unwrap(), 1);
        assert_eq!(windows_per_image(30, 30).unwrap(), 784);
        assert!(windows_per_image(2, 28).is_err());
    }

    #[test]
    fn training_times() {
        let d = PerfConfig::default();
        assert_eq!(training_time(&d).unwrap(), 78.32);
        let zero = PerfConfig { n_train: 0, ..d };
        assert_eq!(training_time(&zero).unwrap(), 0.0);
        let fast = PerfConfig {
            clock_hz: 2.0 * d.clock_hz,
            ..d
        };
        assert_eq!(training_time(&fast).unwrap(), 39.16);
    }

    #[test]
    fn latency_and_throughput() {
        assert_eq!(
            inference_latency_and_throughput(&PerfConfig::default()).unwrap(),
            (1.31, 763_358)
        );
        let unit = PerfConfig {
            clock_hz: 1e6,
            image_h: 3,
            image_w: 3,
            n_train: 1,
        };
        assert_eq!(
            inference_latency_and_throughput(&unit).unwrap(),
            (1.0, 1_000_000)
        );
        let r = PerfReport::compute(&PerfConfig::default()).unwrap();
        assert_eq!(r.exact_throughput_images_per_s.round() as u64, 766_080);
    }

    #[test]
    fn bad_config() {
        let c = PerfConfig {
            clock_hz: 0.0,
            ..PerfConfig::default()
        };
        assert!(training_time(&c).is_err());
        assert!(inference_latency_and_throughput(&c).is_err());
    }

    #[test]
    fn rounding_helpers() {
        assert_eq!(round_significant(1.305_344, 3), 1.31);
        assert_eq!(round_significant(0.001_234_5, 3), 0.001_23);
        assert_eq!(round_significant(0.0, 3), 0.0);
        assert_eq!(round_decimals(78.320_048, 2), 78.32);
        assert_eq!(group_thousands(763_358), "763,358");
        assert_eq!(group_thousands(1_000_000), "1,000,000");
        assert_eq!(group_thousands(12), "12");
        assert_eq!(format_sig3(1.31), "1.31");
        assert_eq!(format_sig3(1.0), "1.00");
        assert_eq!(format_sig3(13.1), "13.1");
    }

    #[test]
    fn linear_in_images_inverse_in_clock() {
        let d = PerfConfig::default();
        let base = training_time_exact_ms(&d).unwrap();
        for k in [2u64, 3, 7] {
            let more = PerfConfig {
                n_train: d.n_train * k,
                ..d
            };
            let t = training_time_exact_ms(&more).unwrap();
            assert!((t - base * k as f64).abs() <= 1e-9 * t);
            let faster = PerfConfig {
                clock_hz: d.clock_hz * k as f64,
                ..d
            };
            let t = training_time_exact_ms(&faster).unwrap();
            assert!((t - base / k as f64).abs() <= 1e-9 * base);
        }
    }

    #[test]
    fn convention_close_to_exact() {
        for clock in [100e6, 250e6, 517.87e6, 1e9, 3.3e9] {
            for side in [5usize, 28, 64, 100] {
                let c = PerfConfig {
                    clock_hz: clock,
                    image_h: side,
                    image_w: side,
                    n_train: 1,
                };
                let r = PerfReport::compute(&c).unwrap();
                let rel = (r.throughput_images_per_s as f64 - r.exact_throughput_images_per_s)
                    .abs()
                    / r.exact_throughput_images_per_s;
                assert!(rel < 0.01, "clock {clock} side {side}: {rel}");
            }
        }
    }
}
