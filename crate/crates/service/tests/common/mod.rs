#![allow(dead_code)]

use vidseek_core::imaging::encode_ppm;
use vidseek_core::Raster;

/// A textured 48x36 frame; different seeds give visibly different frames.
pub fn frame(seed: u64) -> Vec<u8> {
    let s = seed as usize;
    let r = Raster::from_fn(48, 36, |x, y| {
        let a = ((x * (3 + s % 5) + y * (1 + s % 3)) * 7 + s * 37) % 256;
        let b = ((x ^ y) * (2 + s % 4) + s * 11) % 256;
        let c = if (x / (4 + s % 6) + y / 5) % 2 == 0 { 40 + s * 13 % 200 } else { 220 - s * 7 % 180 };
        [a as u8, b as u8, c as u8]
    })
    .unwrap();
    encode_ppm(&r)
}

pub const BOUNDARY: &str = "vidseek-test-boundary";

pub enum Part<'a> {
    Text(&'a str, &'a str),
    File(&'a str, &'a str, &'a [u8]),
}

pub fn multipart(parts: &[Part<'_>]) -> Vec<u8> {
    let mut body = Vec::new();
    for p in parts {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        match p {
            Part::Text(name, value) => {
                body.extend_from_slice(format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n{value}\r\n").as_bytes());
            }
            Part::File(name, file, bytes) => {
                body.extend_from_slice(
                    format!(
                        "Content-Disposition: form-data; name=\"{name}\"; filename=\"{file}\"\r\n\
                         Content-Type: application/octet-stream\r\n\r\n"
                    )
                    .as_bytes(),
                );
                body.extend_from_slice(bytes);
                body.extend_from_slice(b"\r\n");
            }
        }
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

pub fn content_type() -> String {
    format!("multipart/form-data; boundary={BOUNDARY}")
}
