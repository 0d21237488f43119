use crate::{BBox, Error, Result};

/// Packed RGB frame, row-major, three 8-bit channels per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBuffer {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl FrameBuffer {
    pub const CHANNELS: usize = 3;

    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid("frame dimensions must be positive".into()));
        }
        if pixels.len() != width * height * Self::CHANNELS {
            return Err(Error::Invalid(format!(
                "pixel buffer has {} bytes, expected {}",
                pixels.len(),
                width * height * Self::CHANNELS
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height * Self::CHANNELS])
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

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * Self::CHANNELS;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Half-open pixel index range whose pixel centers fall in `[lo, hi)`.
fn pixel_span(lo: f64, hi: f64, limit: usize) -> (usize, usize) {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return (0, 0);
    }
    let clamp = |v: f64| v.clamp(0.0, limit as f64) as usize;
    (clamp((lo - 0.5).ceil()), clamp((hi - 0.5).ceil()))
}

/// Keeps the pixels inside `bbox` and sets every other channel value to
/// `fill`. A pixel is inside when its center lies in the half-open box
/// `[left, right) x [top, bottom)`; the box is clipped to the frame and an
/// empty or degenerate box yields an all-fill frame.
pub fn mask_context(frame: &FrameBuffer, bbox: &BBox, fill: u8) -> FrameBuffer {
    let (x0, x1) = pixel_span(bbox.left(), bbox.right(), frame.width);
    let (y0, y1) = pixel_span(bbox.top(), bbox.bottom(), frame.height);
    let mut pixels = vec![fill; frame.pixels.len()];
    let stride = frame.width * FrameBuffer::CHANNELS;
    for y in y0..y1 {
        let a = y * stride + x0 * FrameBuffer::CHANNELS;
        let b = y * stride + x1 * FrameBuffer::CHANNELS;
        pixels[a..b].copy_from_slice(&frame.pixels[a..b]);
    }
    FrameBuffer {
        width: frame.width,
        height: frame.height,
        pixels,
    }
}
