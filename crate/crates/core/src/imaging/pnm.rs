//! Binary portable graymap / pixmap (P5 / P6) codec.

use super::{GrayRaster, ImageError, Raster};

fn corrupt(msg: &str) -> ImageError {
    ImageError::CorruptImage(msg.to_owned())
}

struct Header {
    magic: u8,
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn skip_space_and_comments(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn read_uint(bytes: &[u8], pos: &mut usize) -> Result<u32, ImageError> {
    *pos = skip_space_and_comments(bytes, *pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(corrupt("truncated or malformed header"));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| corrupt("header value out of range"))
}

fn parse_header(bytes: &[u8]) -> Result<Header, ImageError> {
    let magic = match bytes {
        [b'P', m @ (b'5' | b'6'), ..] => *m,
        [b'P', b'1'..=b'4' | b'7', ..] => return Err(ImageError::UnsupportedFormat),
        [] | [b'P'] => return Err(corrupt("truncated magic")),
        _ => return Err(ImageError::UnsupportedFormat),
    };
    let mut pos = 2;
    let width = read_uint(bytes, &mut pos)? as usize;
    let height = read_uint(bytes, &mut pos)? as usize;
    let maxval = read_uint(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(ImageError::InvalidDimensions { width, height });
    }
    if maxval == 0 {
        return Err(corrupt("maxval must be positive"));
    }
    if maxval > 255 {
        // 16-bit samples
        return Err(ImageError::UnsupportedFormat);
    }
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => {}
        _ => return Err(corrupt("missing separator after header")),
    }
    Ok(Header {
        magic,
        width,
        height,
        maxval,
        data_start: pos + 1,
    })
}

pub(super) fn decode(bytes: &[u8]) -> Result<Raster, ImageError> {
    let h = parse_header(bytes)?;
    let channels = if h.magic == b'6' { 3 } else { 1 };
    let n = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| corrupt("dimensions overflow"))?;
    let data = bytes
        .get(h.data_start..h.data_start + n)
        .ok_or_else(|| corrupt("truncated pixel data"))?;
    let scale = |v: u8| -> u8 {
        if h.maxval == 255 {
            v
        } else {
            let v = u32::from(v).min(h.maxval);
            ((v * 255 + h.maxval / 2) / h.maxval) as u8
        }
    };
    let pixels = if channels == 3 {
        data.chunks_exact(3)
            .map(|c| [scale(c[0]), scale(c[1]), scale(c[2])])
            .collect()
    } else {
        data.iter()
            .map(|&v| {
                let v = scale(v);
                [v, v, v]
            })
            .collect()
    };
    Raster::new(h.width, h.height, pixels)
}

/// Binary P6 with maxval 255.
pub fn encode_ppm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", r.width(), r.height()).into_bytes();
    out.reserve(r.pixels().len() * 3);
    for p in r.pixels() {
        out.extend_from_slice(p);
    }
    out
}

/// Binary P5 with maxval 255.
pub fn encode_pgm(g: &GrayRaster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", g.width(), g.height()).into_bytes();
    out.extend_from_slice(g.pixels());
    out
}
