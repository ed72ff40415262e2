//! Binary PGM (P5) images with values 0 and 255.

use std::path::Path;

use lambpolar_core::polar::BinaryImage;

use crate::error::{AppError, IoContext, Result};

pub fn encode(img: &BinaryImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.bits);
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<BinaryImage> {
    let bad = |m: &str| AppError::format(path, m.to_string());
    // Four header tokens separated by whitespace, with `#` comments.
    let mut fields = Vec::new();
    let mut i = 0;
    while fields.len() < 4 {
        match bytes.get(i) {
            None => return Err(bad("truncated header")),
            Some(b'#') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            Some(c) if c.is_ascii_whitespace() => i += 1,
            Some(_) => {
                let s = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                fields.push(std::str::from_utf8(&bytes[s..i]).map_err(|_| bad("non-ASCII header"))?);
            }
        }
    }
    if fields[0] != "P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(bad("maxval must be 255"));
    }
    // Exactly one whitespace byte ends the header.
    let data = &bytes[(i + 1).min(bytes.len())..];
    if data.len() != w * h {
        return Err(bad(&format!("expected {} pixels, found {}", w * h, data.len())));
    }
    if data.iter().any(|&b| b != 0 && b != 255) {
        return Err(bad("pixel values must be 0 or 255"));
    }
    let mut img = BinaryImage::blank(w, h);
    img.bits.copy_from_slice(data);
    Ok(img)
}

pub fn write(path: &Path, img: &BinaryImage) -> Result<()> {
    std::fs::write(path, encode(img)).at(path)
}

pub fn read(path: &Path) -> Result<BinaryImage> {
    let bytes = std::fs::read(path).at(path)?;
    decode(&bytes, path)
}
