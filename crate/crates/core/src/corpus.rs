//! Deterministic synthetic sequences used for calibration and tests.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{Color, Frame};
use crate::image_io::{write_frame, ImageFormat};

/// `frames` copies of a single-color frame.
pub fn constant(width: usize, height: usize, frames: usize, color: Color) -> Result<Vec<Frame>> {
    let f = Frame::filled(width, height, color)?;
    Ok(vec![f; frames])
}

/// Alternating 0/255 pixels, static.
pub fn checkerboard(width: usize, height: usize, frames: usize) -> Result<Vec<Frame>> {
    let f = Frame::from_fn(width, height, |x, y| {
        if (x + y) % 2 == 0 {
            Color::BLACK
        } else {
            Color::WHITE
        }
    })?;
    Ok(vec![f; frames])
}

/// Parameters of the mixed gradient + sprite sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedCorpus {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub sprite_size: usize,
    /// Checker cell side inside the sprite.
    pub cell: usize,
    pub start: (usize, usize),
    /// Sprite displacement per frame.
    pub velocity: (usize, usize),
}

impl Default for MixedCorpus {
    fn default() -> Self {
        MixedCorpus {
            width: 128,
            height: 128,
            frames: 30,
            sprite_size: 24,
            cell: 3,
            start: (8, 20),
            velocity: (2, 1),
        }
    }
}

impl MixedCorpus {
    /// Smooth background gradient.
    pub fn background(&self, x: usize, y: usize) -> Color {
        Color::rgb(
            (40 + x / 2) as u8,
            (60 + y / 2) as u8,
            (100 + (x + y) / 4) as u8,
        )
    }

    pub fn frame(&self, k: usize) -> Result<Frame> {
        let sx = self.start.0 + self.velocity.0 * k;
        let sy = self.start.1 + self.velocity.1 * k;
        let s = self.sprite_size;
        let cell = self.cell.max(1);
        Frame::from_fn(self.width, self.height, |x, y| {
            if x >= sx && x < sx + s && y >= sy && y < sy + s {
                if ((x - sx) / cell + (y - sy) / cell).is_multiple_of(2) {
                    Color::rgb(240, 240, 240)
                } else {
                    Color::rgb(20, 20, 20)
                }
            } else {
                self.background(x, y)
            }
        })
    }

    pub fn generate(&self) -> Result<Vec<Frame>> {
        (0..self.frames).map(|k| self.frame(k)).collect()
    }
}

/// Writes `frame_0001.<ext>`, `frame_0002.<ext>`, ... into `dir`.
pub fn write_sequence(dir: &Path, frames: &[Frame], format: ImageFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let p = dir.join(format!("frame_{:04}.{}", i + 1, format.extension()));
            write_frame(&p, f, format).map(|_| p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_sprite_moves() {
        let c = MixedCorpus::default();
        let f0 = c.frame(0).unwrap();
        let f1 = c.frame(1).unwrap();
        assert_eq!(f0.pixel(8, 20), Color::rgb(240, 240, 240));
        assert_eq!(f0.pixel(0, 0), c.background(0, 0));
        assert_eq!(f1.pixel(10, 21), Color::rgb(240, 240, 240));
        assert_ne!(f0, f1);
        assert_eq!(c.generate().unwrap().len(), 30);
    }

    #[test]
    fn checkerboard_alternates() {
        let f = &checkerboard(4, 4, 1).unwrap()[0];
        assert_eq!(f.pixel(0, 0), Color::BLACK);
        assert_eq!(f.pixel(1, 0), Color::WHITE);
    }
}
