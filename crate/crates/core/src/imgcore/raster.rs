use std::fs;
use std::path::Path;

use super::ImageError;

/// 8-bit grayscale image, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    luma: Vec<u8>,
}

impl std::fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RasterImage({}x{})", self.width, self.height)
    }
}

impl RasterImage {
    pub fn new(width: usize, height: usize, luma: Vec<u8>) -> Result<Self, ImageError> {
        if luma.len() != width * height {
            return Err(ImageError::Malformed(format!(
                "{} pixels for a {width}x{height} image",
                luma.len()
            )));
        }
        Ok(Self {
            width,
            height,
            luma,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            luma: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut luma = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                luma.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            luma,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn luma(&self) -> &[u8] {
        &self.luma
    }

    #[inline]
    pub fn luma_mut(&mut self) -> &mut [u8] {
        &mut self.luma
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.luma[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.luma[y * self.width + x] = v;
    }

    /// Pixel with coordinates clamped to the image.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.luma[y * self.width + x]
    }

    /// Bilinear resample to an explicit size, sampling at pixel centers.
    pub fn resize(&self, width: usize, height: usize) -> Self {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        Self::from_fn(width, height, |x, y| {
            let fx = ((x as f64 + 0.5) * sx - 0.5).max(0.0);
            let fy = ((y as f64 + 0.5) * sy - 0.5).max(0.0);
            let x0 = (fx.floor() as usize).min(self.width - 1);
            let y0 = (fy.floor() as usize).min(self.height - 1);
            let x1 = (x0 + 1).min(self.width - 1);
            let y1 = (y0 + 1).min(self.height - 1);
            let ax = fx - x0 as f64;
            let ay = fy - y0 as f64;
            let top = self.get(x0, y0) as f64 * (1.0 - ax) + self.get(x1, y0) as f64 * ax;
            let bot = self.get(x0, y1) as f64 * (1.0 - ax) + self.get(x1, y1) as f64 * ax;
            (top * (1.0 - ay) + bot * ay).round().clamp(0.0, 255.0) as u8
        })
    }

    /// Scales so the longer side equals `max_side`, keeping the aspect ratio.
    pub fn normalize_max_side(&self, max_side: usize) -> Self {
        let longest = self.width.max(self.height);
        if longest == max_side {
            return self.clone();
        }
        let s = max_side as f64 / longest as f64;
        let w = ((self.width as f64 * s).round() as usize).max(1);
        let h = ((self.height as f64 * s).round() as usize).max(1);
        self.resize(w, h)
    }

    /// Rotates 90° clockwise: pixel `(x, y)` moves to `(height − 1 − y, x)`.
    pub fn rotate90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |nx, ny| self.get(ny, h - 1 - nx))
    }

    pub fn mirror_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| {
            self.get(self.width - 1 - x, y)
        })
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Self::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y))
    }

    /// Binary PGM (P5) bytes.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.luma);
        out
    }

    pub fn save_pgm(&self, path: &Path) -> Result<(), ImageError> {
        fs::write(path, self.to_pgm()).map_err(|source| ImageError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Reads a binary PGM (P5) or PPM (P6) file with maxval 255.
pub fn load_image(path: &Path) -> Result<RasterImage, ImageError> {
    let bytes = fs::read(path).map_err(|source| ImageError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_pnm(&bytes)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
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

    fn number(&mut self, what: &str) -> Result<usize, ImageError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::Malformed(format!("missing {what} in header")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Malformed(format!("bad {what} in header")))
    }
}

pub fn decode_pnm(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::Malformed("file too short".into()));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(ImageError::UnsupportedFormat(
                String::from_utf8_lossy(other).into_owned(),
            ))
        }
    };
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(ImageError::Malformed(format!(
            "maxval {maxval}; only 255 is supported"
        )));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::Malformed("zero image dimension".into()));
    }
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(ImageError::Malformed(
                "missing separator after header".into(),
            ))
        }
    }
    let payload = &bytes[cur.pos..];
    let need = width * height * channels;
    if payload.len() < need {
        return Err(ImageError::Malformed(format!(
            "payload has {} bytes, expected {need}",
            payload.len()
        )));
    }
    let luma = if channels == 1 {
        payload[..need].to_vec()
    } else {
        payload[..need]
            .chunks_exact(3)
            .map(|p| {
                let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                y.round().clamp(0.0, 255.0) as u8
            })
            .collect()
    };
    RasterImage::new(width, height, luma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p5_identity_decode() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 128, 64]);
        let img = decode_pnm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.luma(), &[0, 255, 128, 64]);
    }

    #[test]
    fn p6_red_to_luma() {
        let mut bytes = b"P6 1 1 255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0]);
        assert_eq!(decode_pnm(&bytes).unwrap().luma(), &[76]);
    }

    #[test]
    fn comments_in_header() {
        let mut bytes = b"P5\n# made by hand\n1 # width\n1\n255\n".to_vec();
        bytes.push(9);
        assert_eq!(decode_pnm(&bytes).unwrap().luma(), &[9]);
    }

    #[test]
    fn truncated_payload() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        assert!(matches!(decode_pnm(&bytes), Err(ImageError::Malformed(_))));
    }

    #[test]
    fn unsupported_magic_and_header_errors() {
        assert!(
            matches!(decode_pnm(b"P2\n1 1\n255\n0"), Err(ImageError::UnsupportedFormat(m)) if m == "P2")
        );
        assert!(matches!(
            decode_pnm(b"P5\n1\n"),
            Err(ImageError::Malformed(_))
        ));
        assert!(matches!(
            decode_pnm(b"P5 1 1 65535\n\0\0"),
            Err(ImageError::Malformed(_))
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_image(Path::new("/nonexistent/x.pgm")),
            Err(ImageError::Io { .. })
        ));
    }

    #[test]
    fn pgm_round_trip() {
        let img = RasterImage::from_fn(5, 3, |x, y| (x * 40 + y) as u8);
        assert_eq!(decode_pnm(&img.to_pgm()).unwrap(), img);
    }

    #[test]
    fn rotate_four_times_is_identity() {
        let img = RasterImage::from_fn(7, 4, |x, y| (x * 31 + y * 7) as u8);
        let r = img.rotate90();
        assert_eq!((r.width(), r.height()), (4, 7));
        assert_eq!(r.get(4 - 1 - 2, 5), img.get(5, 2));
        assert_eq!(r.rotate90().rotate90().rotate90(), img);
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = RasterImage::filled(10, 6, 77);
        let r = img.resize(23, 4);
        assert!(r.luma().iter().all(|&v| v == 77));
        assert_eq!(img.normalize_max_side(20).width(), 20);
        assert_eq!(img.normalize_max_side(20).height(), 12);
    }
}
