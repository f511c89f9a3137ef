//! Raster and tile geometry.
//!
//! A [`Frame`] is an 8-bit RGBA raster stored row-major. It is split into a
//! [`TileGrid`] of square tiles (16×16 by default); the grid uses ceiling
//! division so frames whose dimensions are not multiples of the tile size get
//! partial tiles on the right and bottom edges. Partial tiles are padded by
//! replicating the nearest in-frame pixel, so every analysis window is a full
//! `tile_size × tile_size` block.

use crate::error::{Error, Result};

/// Default tile side in pixels.
pub const TILE_SIZE: usize = 16;

/// One 8-bit RGBA pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: u8,
}

impl Color {
    pub const BLACK: Color = Color::rgb(0, 0, 0);
    pub const WHITE: Color = Color::rgb(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8, a: u8) -> Self {
        Color { r, g, b, a }
    }

    /// Opaque color.
    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Color { r, g, b, a: 255 }
    }

    pub const fn gray(v: u8) -> Self {
        Color::rgb(v, v, v)
    }

    /// Rec. 601 luma, unquantized, in `[0, 255]`.
    #[inline]
    pub fn luma(self) -> f64 {
        0.299 * f64::from(self.r) + 0.587 * f64::from(self.g) + 0.114 * f64::from(self.b)
    }
}

/// Row-major RGBA raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<Color>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<Color>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    /// Frame filled with a single color.
    pub fn filled(width: usize, height: usize, color: Color) -> Result<Self> {
        Frame::new(width, height, vec![color; width * height])
    }

    /// Builds a frame by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Color,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Frame::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Color] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Color] {
        &mut self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Color {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, c: Color) {
        self.pixels[y * self.width + x] = c;
    }

    /// Pixel at `(x, y)` with coordinates clamped into the frame.
    #[inline]
    pub fn pixel_clamped(&self, x: usize, y: usize) -> Color {
        self.pixel(x.min(self.width - 1), y.min(self.height - 1))
    }

    /// Copies the full `tile_size²` window of a tile, edge-clamped.
    pub fn tile_pixels(&self, grid: &TileGrid, tile_id: usize) -> Result<Vec<Color>> {
        grid.check_frame(self)?;
        let (ox, oy) = grid.origin(tile_id)?;
        let ts = grid.tile_size();
        let mut out = Vec::with_capacity(ts * ts);
        for y in 0..ts {
            for x in 0..ts {
                out.push(self.pixel_clamped(ox + x, oy + y));
            }
        }
        Ok(out)
    }

    /// Writes a `tile_size²` block back into the frame; pixels that fall
    /// outside the frame are dropped.
    pub fn write_tile(&mut self, grid: &TileGrid, tile_id: usize, block: &[Color]) -> Result<()> {
        grid.check_frame(self)?;
        let (ox, oy) = grid.origin(tile_id)?;
        let ts = grid.tile_size();
        if block.len() != ts * ts {
            return Err(Error::invalid(format!(
                "tile block has {} pixels, expected {}",
                block.len(),
                ts * ts
            )));
        }
        for y in 0..ts.min(self.height - oy) {
            for x in 0..ts.min(self.width - ox) {
                self.set_pixel(ox + x, oy + y, block[y * ts + x]);
            }
        }
        Ok(())
    }
}

/// Partition of a frame into square tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGrid {
    tile_size: usize,
    cols: usize,
    rows: usize,
    frame_width: usize,
    frame_height: usize,
}

/// Builds the tile grid for a frame, rounding partial tiles up.
pub fn make_grid(frame_width: usize, frame_height: usize, tile_size: usize) -> Result<TileGrid> {
    if frame_width == 0 || frame_height == 0 || tile_size == 0 {
        return Err(Error::invalid(format!(
            "grid arguments must be positive (width={frame_width}, height={frame_height}, tile_size={tile_size})"
        )));
    }
    Ok(TileGrid {
        tile_size,
        cols: frame_width.div_ceil(tile_size),
        rows: frame_height.div_ceil(tile_size),
        frame_width,
        frame_height,
    })
}

impl TileGrid {
    pub fn for_frame(frame: &Frame, tile_size: usize) -> Result<Self> {
        make_grid(frame.width(), frame.height(), tile_size)
    }

    pub fn tile_size(&self) -> usize {
        self.tile_size
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn frame_width(&self) -> usize {
        self.frame_width
    }

    pub fn frame_height(&self) -> usize {
        self.frame_height
    }

    pub fn tile_count(&self) -> usize {
        self.cols * self.rows
    }

    /// Top-left pixel of a tile.
    pub fn origin(&self, tile_id: usize) -> Result<(usize, usize)> {
        if tile_id >= self.tile_count() {
            return Err(Error::Index {
                index: tile_id,
                limit: self.tile_count(),
            });
        }
        Ok((
            (tile_id % self.cols) * self.tile_size,
            (tile_id / self.cols) * self.tile_size,
        ))
    }

    fn check_frame(&self, frame: &Frame) -> Result<()> {
        if frame.width() != self.frame_width || frame.height() != self.frame_height {
            return Err(Error::invalid(format!(
                "frame is {}x{} but grid was built for {}x{}",
                frame.width(),
                frame.height(),
                self.frame_width,
                self.frame_height
            )));
        }
        Ok(())
    }
}

/// Luma window of one tile.
#[derive(Debug, Clone, PartialEq)]
pub struct TileView {
    pub tile_id: usize,
    pub origin_x: usize,
    pub origin_y: usize,
    /// Row-major `size × size` luma values.
    pub luma: Vec<f64>,
    pub size: usize,
}

impl TileView {
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.luma[y * self.size + x]
    }
}

/// Extracts the luma window of `tile_id`, replicating edge pixels for
/// partial tiles.
pub fn extract_tile(frame: &Frame, grid: &TileGrid, tile_id: usize) -> Result<TileView> {
    grid.check_frame(frame)?;
    let (origin_x, origin_y) = grid.origin(tile_id)?;
    let ts = grid.tile_size();
    let mut luma = Vec::with_capacity(ts * ts);
    for y in 0..ts {
        for x in 0..ts {
            luma.push(frame.pixel_clamped(origin_x + x, origin_y + y).luma());
        }
    }
    Ok(TileView {
        tile_id,
        origin_x,
        origin_y,
        luma,
        size: ts,
    })
}
