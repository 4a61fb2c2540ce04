//! Minimal PGM (P2 plain / P5 raw, maxval <= 255) reading and P2 writing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Plain (ASCII) PGM, one image row per line.
pub fn encode_p2(image: &Image) -> String {
    let mut out = format!("P2\n{} {}\n255\n", image.cols(), image.rows());
    for r in 0..image.rows() {
        let row: Vec<String> = (0..image.cols())
            .map(|c| image.get(r, c).to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_p2(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_p2(image)).map_err(|e| Error::io(path, e))
}

/// Splits header tokens, skipping `#` comments. Returns the tokens and the
/// byte offset just past the single whitespace that ends the header.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(Error::Format("PGM header is incomplete".into()));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let (t, body) = header_tokens(bytes, 4)?;
    let num = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad PGM header value {s:?}")))
    };
    let (w, h, maxval) = (num(&t[1])?, num(&t[2])?, num(&t[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported PGM maxval {maxval}")));
    }
    let scale = |v: usize| -> Result<u8> {
        if v > maxval {
            return Err(Error::Format(format!(
                "PGM sample {v} exceeds maxval {maxval}"
            )));
        }
        Ok(((v * 255 + maxval / 2) / maxval) as u8)
    };
    let pixels = match t[0].as_str() {
        "P2" => {
            let text = std::str::from_utf8(bytes.get(body..).unwrap_or_default())
                .map_err(|_| Error::Format("P2 body is not ASCII".into()))?;
            text.split_whitespace()
                .map(|s| num(s).and_then(scale))
                .collect::<Result<Vec<u8>>>()?
        }
        "P5" => {
            let raw = bytes.get(body..).unwrap_or_default();
            if raw.len() < w * h {
                return Err(Error::Truncated {
                    what: "PGM raster",
                    expected: w * h,
                    found: raw.len(),
                });
            }
            raw[..w * h]
                .iter()
                .map(|&v| scale(v as usize))
                .collect::<Result<Vec<u8>>>()?
        }
        other => return Err(Error::Format(format!("not a PGM file (magic {other:?})"))),
    };
    if pixels.len() != w * h {
        return Err(Error::Format(format!(
            "PGM has {} samples, expected {}",
            pixels.len(),
            w * h
        )));
    }
    Image::from_pixels(h, w, pixels)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    decode_pgm(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
