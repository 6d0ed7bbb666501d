//! Binary PGM (P5, 8-bit) and grayscale PFM (Pf) files.
//!
//! PGM samples map `v -> v / 255` on read and `round(clamp(x) * 255)` on
//! write. PFM is written little-endian (scale `-1.0`) with rows stored
//! bottom-to-top as the format prescribes; both byte orders are accepted on read.

use std::fs;
use std::path::Path;

use crate::error::{PnpError, Result};

use super::Image;

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| PnpError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|reason| PnpError::Format {
        path: path.to_path_buf(),
        reason,
    })
}

/// Writes PFM when the extension is `.pfm`, PGM otherwise.
pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_pfm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pfm"));
    let bytes = if is_pfm { encode_pfm(img) } else { encode_pgm(img) };
    fs::write(path, bytes).map_err(|source| PnpError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn encode_pfm(img: &Image) -> Vec<u8> {
    let (w, h) = img.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for r in (0..h).rev() {
        for c in 0..w {
            out.extend_from_slice(&(img.get(r, c) as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Image, String> {
    match bytes.get(..2) {
        Some(b"P5") => decode_pgm(bytes),
        Some(b"Pf") => decode_pfm(bytes),
        _ => Err("unsupported magic (expected P5 or Pf)".into()),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn token(&mut self) -> std::result::Result<&'a str, String> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err("truncated header".into());
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| "non-ASCII header".into())
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> std::result::Result<T, String> {
        let t = self.token()?;
        t.parse().map_err(|_| format!("bad {what} {t:?}"))
    }

    /// Skips the single whitespace byte that ends the header.
    fn payload(mut self) -> std::result::Result<&'a [u8], String> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err("missing header terminator".into());
        }
        self.pos += 1;
        Ok(&self.bytes[self.pos..])
    }
}

fn dims(h: &mut Header<'_>) -> std::result::Result<(usize, usize), String> {
    let w: usize = h.number("width")?;
    let ht: usize = h.number("height")?;
    if w == 0 || ht == 0 {
        return Err(format!("empty image {w}x{ht}"));
    }
    Ok((w, ht))
}

fn decode_pgm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let mut h = Header { bytes, pos: 2 };
    let (w, ht) = dims(&mut h)?;
    let maxval: u32 = h.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("only 8-bit PGM supported, maxval {maxval}"));
    }
    let payload = h.payload()?;
    if payload.len() < w * ht {
        return Err(format!("truncated payload: {} of {} bytes", payload.len(), w * ht));
    }
    let scale = maxval as f64;
    let data = payload[..w * ht].iter().map(|&b| b as f64 / scale).collect();
    Image::new(w, ht, data).map_err(|e| e.to_string())
}

fn decode_pfm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let mut h = Header { bytes, pos: 2 };
    let (w, ht) = dims(&mut h)?;
    let scale: f64 = h.number("scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(format!("bad scale {scale}"));
    }
    let little = scale < 0.0;
    let payload = h.payload()?;
    if payload.len() < w * ht * 4 {
        return Err(format!("truncated payload: {} of {} bytes", payload.len(), w * ht * 4));
    }
    let mut img = Image::zeros(w, ht);
    for (i, chunk) in payload[..w * ht * 4].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        if !v.is_finite() {
            return Err(format!("non-finite sample at {i}"));
        }
        let row = ht - 1 - i / w;
        img.set(row, i % w, v as f64);
    }
    Ok(img)
}
