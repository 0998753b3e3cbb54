use super::SemError;

/// Smallest accepted width and height.
pub const MIN_SIDE: usize = 16;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, SemError> {
        if width < MIN_SIDE || height < MIN_SIDE {
            return Err(SemError::ImageTooSmall {
                width,
                height,
                min: MIN_SIDE,
            });
        }
        if pixels.len() != width * height {
            return Err(SemError::BadImage(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> u8,
    ) -> Result<Self, SemError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Binary PGM (`P5`, maxval 255). Header comments are allowed.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self, SemError> {
        let bad = |m: &str| SemError::BadImage(m.to_string());
        let mut pos = 0;
        let mut token = || -> Result<String, SemError> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P5" {
            return Err(bad("not a binary PGM (P5)"));
        }
        let mut number = |what: &str| -> Result<usize, SemError> {
            token()?
                .parse()
                .map_err(|_| SemError::BadImage(format!("bad {what}")))
        };
        let width = number("width")?;
        let height = number("height")?;
        let maxval = number("maxval")?;
        if maxval != 255 {
            return Err(bad("maxval must be 255"));
        }
        // exactly one whitespace byte separates the header from the raster
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(bad("missing raster"));
        }
        let raster = &bytes[pos + 1..];
        let n = width
            .checked_mul(height)
            .ok_or_else(|| bad("image dimensions overflow"))?;
        if raster.len() < n {
            return Err(bad("raster shorter than width*height"));
        }
        Self::new(width, height, raster[..n].to_vec())
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Removes the bottom `info_bar_px` rows.
pub fn crop_info_bar(image: &GrayImage, info_bar_px: usize) -> Result<GrayImage, SemError> {
    if info_bar_px >= image.height {
        return Err(SemError::CropTooLarge {
            crop: info_bar_px,
            height: image.height,
        });
    }
    let rows = image.height - info_bar_px;
    GrayImage::new(
        image.width,
        rows,
        image.pixels[..rows * image.width].to_vec(),
    )
}
