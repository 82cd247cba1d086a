//! Minimal raster I/O: binary/ASCII graymaps (P5/P2) and 8-bit grayscale PNG
//! in, graymaps (P5) and pixmaps (P6) out.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::BinaryMask;

/// Largest accepted pixel count (256 Mpx).
const MAX_PIXELS: usize = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[u8; 3]>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_mask(mask: &BinaryMask, on: u8) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            data: mask.bits().iter().map(|&b| if b { on } else { 0 }).collect(),
        }
    }

    /// Pixels strictly brighter than `threshold` become true.
    pub fn threshold(&self, threshold: u8) -> Result<BinaryMask> {
        BinaryMask::from_bits(
            self.height,
            self.width,
            self.data.iter().map(|&v| v > threshold).collect(),
        )
    }
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![[0; 3]; width * height],
        }
    }

    pub fn put(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = color;
        }
    }
}

/// Cursor over a netpbm header: whitespace-separated tokens with `#` comments.
struct PnmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmHeader<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Option<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok()?.parse().ok()
    }
}

fn checked_area(path: &Path, width: usize, height: usize) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::io(path, format!("empty image {width}x{height}")));
    }
    match width.checked_mul(height) {
        Some(n) if n <= MAX_PIXELS => Ok(n),
        _ => Err(Error::io(path, format!("image dimensions {width}x{height} too large"))),
    }
}

fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<GrayImage> {
    let binary = &bytes[..2] == b"P5";
    let mut hdr = PnmHeader { bytes, pos: 2 };
    let bad = |what: &str| Error::io(path, format!("malformed graymap header: {what}"));
    let width = hdr.number().ok_or_else(|| bad("width"))?;
    let height = hdr.number().ok_or_else(|| bad("height"))?;
    let maxval = hdr.number().ok_or_else(|| bad("maxval"))?;
    let area = checked_area(path, width, height)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::io(path, format!("unsupported maxval {maxval} (need 1..=255)")));
    }
    let scale = |v: usize| ((v * 255 + maxval / 2) / maxval) as u8;

    let raw: Vec<usize> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = hdr.pos + 1;
        let end = start + area;
        if end > bytes.len() {
            return Err(Error::io(path, "truncated raster"));
        }
        bytes[start..end].iter().map(|&b| b as usize).collect()
    } else {
        let mut out = Vec::with_capacity(area);
        for _ in 0..area {
            out.push(hdr.number().ok_or_else(|| Error::io(path, "truncated raster"))?);
        }
        out
    };
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(Error::io(path, format!("sample {v} exceeds maxval {maxval}")));
    }
    Ok(GrayImage {
        width,
        height,
        data: raw.into_iter().map(scale).collect(),
    })
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<GrayImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| Error::io(path, e))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::io(
            path,
            format!(
                "unsupported PNG {:?}/{:?}; need 8-bit grayscale",
                info.color_type, info.bit_depth
            ),
        ));
    }
    let area = checked_area(path, width, height)?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(area)];
    let frame = reader.next_frame(&mut buf).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::with_capacity(area);
    for row in buf[..frame.buffer_size()].chunks(frame.line_size).take(height) {
        data.extend_from_slice(&row[..width]);
    }
    Ok(GrayImage {
        width,
        height,
        data,
    })
}

/// Reads a P2/P5 graymap or an 8-bit grayscale PNG, scaled to 0..=255.
pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        decode_pnm(path, &bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(path, &bytes)
    } else {
        Err(Error::io(path, "unsupported format (expected P2/P5 graymap or PNG)"))
    }
}

/// Reads a mask file; gray levels above `threshold` are lane pixels.
pub fn load_mask(path: impl AsRef<Path>, threshold: u8) -> Result<BinaryMask> {
    read_gray(path)?.threshold(threshold)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.data.iter().flatten());
    out
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn write_ppm(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, bytes).unwrap();
        p
    }

    #[test]
    fn p5_all_zero_and_all_max() {
        let dir = tempfile::tempdir().unwrap();
        let zero = write_tmp(&dir, "z.pgm", &encode_pgm(&GrayImage::new(4, 3)));
        let m = load_mask(&zero, 127).unwrap();
        assert_eq!((m.height(), m.width(), m.count_ones()), (3, 4, 0));

        let mut full = GrayImage::new(4, 3);
        full.data.fill(255);
        let full = write_tmp(&dir, "f.pgm", &encode_pgm(&full));
        assert_eq!(load_mask(&full, 127).unwrap().count_ones(), 12);
    }

    #[test]
    fn p2_checkerboard_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let text = "P2\n# a comment\n3 2 # trailing\n255\n0 255 0\n255 0 255\n";
        let p = write_tmp(&dir, "c.pgm", text.as_bytes());
        let m = load_mask(&p, 127).unwrap();
        for r in 0..2 {
            for c in 0..3 {
                assert_eq!(m.get(r, c), (r + c) % 2 == 1);
            }
        }
    }

    #[test]
    fn p2_small_maxval_is_rescaled() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "b.pgm", b"P2 2 1 1 0 1");
        assert_eq!(read_gray(&p).unwrap().data, vec![0, 255]);
    }

    #[test]
    fn png_grayscale_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        let data: Vec<u8> = (0..15).map(|i| if i % 2 == 0 { 255 } else { 0 }).collect();
        {
            let f = fs::File::create(&p).unwrap();
            let mut enc = png::Encoder::new(f, 5, 3);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            enc.write_header().unwrap().write_image_data(&data).unwrap();
        }
        let img = read_gray(&p).unwrap();
        assert_eq!((img.width, img.height), (5, 3));
        assert_eq!(img.data, data);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let cases: [(&str, &[u8]); 5] = [
            ("bmp.bin", b"BM\x00\x00"),
            ("trunc.pgm", b"P5\n4 4\n255\n\x00\x00"),
            ("deep.pgm", b"P5\n1 1\n65535\n\x00\x00"),
            ("huge.pgm", b"P5\n99999999 99999999\n255\n"),
            ("over.pgm", b"P2 1 1 10 11"),
        ];
        for (name, bytes) in cases {
            let p = write_tmp(&dir, name, bytes);
            assert!(matches!(read_gray(&p), Err(Error::Io { .. })), "{name}");
        }
        assert!(matches!(
            read_gray(dir.path().join("missing.pgm")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn rgb_png_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rgb.png");
        {
            let f = fs::File::create(&p).unwrap();
            let mut enc = png::Encoder::new(f, 1, 1);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            enc.write_header().unwrap().write_image_data(&[1, 2, 3]).unwrap();
        }
        assert!(matches!(read_gray(&p), Err(Error::Io { .. })));
    }
}
