//! Text model file.
//!
//! ```text
//! MMNW 1
//! r_on=1.4000000000000000e1
//! r_off=1.4000000000000000e4
//! k2=...
//! window_factor=...
//! a_max=...
//! edge_threshold=...
//! noise_seed=42
//! noise_sigma=...
//! grid=26x26
//! classes=10
//! <classes * rows * cols memristances, class-major then row-major>
//! ```
//!
//! Reals are written with 17 significant digits, enough to round-trip an
//! f64 exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dataset::NUM_CLASSES;
use crate::device::DriftParams;
use crate::error::{Error, Result};
use crate::noise::NoiseConfig;
use crate::preprocess::PreprocessConfig;
use crate::recognizer::DriftArray;

pub const MAGIC: &str = "MMNW";
pub const VERSION: u32 = 1;

/// 17 significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn model_to_string(model: &DriftArray) -> String {
    let p = model.params();
    let mut out = String::with_capacity(32 * (model.memristances().len() + 12));
    out.push_str(&format!("{MAGIC} {VERSION}\n"));
    let header = [
        ("r_on", format_real(p.r_on)),
        ("r_off", format_real(p.r_off)),
        ("k2", format_real(p.k2)),
        ("window_factor", format_real(p.window_factor)),
        ("a_max", format_real(model.a_max())),
        (
            "edge_threshold",
            format_real(model.preprocess_config().edge_threshold()),
        ),
        ("noise_seed", model.noise_config().seed.to_string()),
        ("noise_sigma", format_real(model.noise_config().sigma)),
        ("grid", format!("{}x{}", model.rows(), model.cols())),
        ("classes", model.classes().to_string()),
    ];
    for (k, v) in header {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    }
    for m in model.memristances() {
        out.push_str(&format_real(*m));
        out.push('\n');
    }
    out
}

struct Header<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Header<'a> {
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let (n, line) = self
            .lines
            .next()
            .ok_or_else(|| Error::Format(format!("model file ends before `{key}`")))?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| {
                Error::Format(format!("line {}: expected `{key}=`, got {line:?}", n + 1))
            })
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| Error::Format(format!("`{key}` is not a number: {v:?}")))
    }
}

pub fn model_from_str(text: &str) -> Result<DriftArray> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Format("model file is empty".into()))?;
    let mut parts = first.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format(format!(
            "bad magic in {first:?}, expected {MAGIC}"
        )));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format(format!("missing version in {first:?}")))?;
    if version != VERSION || parts.next().is_some() {
        return Err(Error::Format(format!(
            "unsupported model version {version} (this build reads version {VERSION})"
        )));
    }

    let mut h = Header { lines };
    let r_on = h.real("r_on")?;
    let r_off = h.real("r_off")?;
    let k2 = h.real("k2")?;
    let window_factor = h.real("window_factor")?;
    let a_max = h.real("a_max")?;
    let edge = h.real("edge_threshold")?;
    let seed_s = h.field("noise_seed")?;
    let seed: u64 = seed_s
        .parse()
        .map_err(|_| Error::Format(format!("bad noise_seed {seed_s:?}")))?;
    let sigma = h.real("noise_sigma")?;
    let grid = h.field("grid")?;
    let (rows, cols) = grid
        .split_once('x')
        .and_then(|(r, c)| Some((r.parse::<usize>().ok()?, c.parse::<usize>().ok()?)))
        .ok_or_else(|| Error::Format(format!("bad grid {grid:?}")))?;
    let classes_s = h.field("classes")?;
    let classes: usize = classes_s
        .parse()
        .map_err(|_| Error::Format(format!("bad classes {classes_s:?}")))?;
    if classes != NUM_CLASSES {
        return Err(Error::Format(format!(
            "model has {classes} classes, expected {NUM_CLASSES}"
        )));
    }

    let expected = classes * rows * cols;
    let mut memristances = Vec::with_capacity(expected);
    for (n, line) in h.lines {
        if memristances.len() == expected {
            return Err(Error::Format(format!(
                "more than {expected} memristance lines (extra at line {})",
                n + 1
            )));
        }
        memristances.push(
            line.trim()
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("line {}: bad value {line:?}", n + 1)))?,
        );
    }
    if memristances.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} memristance lines, found {}",
            memristances.len()
        )));
    }

    let params = DriftParams {
        r_on,
        r_off,
        k2,
        window_factor,
    };
    DriftArray::from_parts(
        rows,
        cols,
        memristances,
        params,
        a_max,
        PreprocessConfig::new(edge)?,
        NoiseConfig::new(sigma, seed)?,
    )
}

/// Writes the model next to `path` and renames it into place after syncing,
/// so a failed save never leaves a partial file behind.
pub fn save_model(model: &DriftArray, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("partial");
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(model_to_string(model).as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DriftArray> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
