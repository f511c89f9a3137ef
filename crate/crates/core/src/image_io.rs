//! Frame files: binary PPM (P6, 8-bit) and PNG.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::{Color, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "ppm" => Some(ImageFormat::Ppm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Ppm => "ppm",
            ImageFormat::Png => "png",
        }
    }
}

/// Decodes a binary P6 image with maxval 255.
pub fn decode_ppm(bytes: &[u8]) -> std::result::Result<Frame, String> {
    let mut pos = 0;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        // Skip whitespace and comments.
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PPM header".into());
        }
        header.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if header[0] != "P6" {
        return Err(format!(
            "unsupported magic `{}` (only binary P6 is read)",
            header[0]
        ));
    }
    let num = |s: &str, what: &str| -> std::result::Result<usize, String> {
        s.parse().map_err(|_| format!("invalid {what} `{s}`"))
    };
    let width = num(&header[1], "width")?;
    let height = num(&header[2], "height")?;
    let maxval = num(&header[3], "maxval")?;
    if maxval != 255 {
        return Err(format!("maxval {maxval} unsupported, expected 255"));
    }
    if width == 0 || height == 0 {
        return Err("zero image dimension".into());
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = width * height * 3;
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| format!("raster truncated: need {need} bytes"))?;
    let pixels = data
        .chunks_exact(3)
        .map(|c| Color::rgb(c[0], c[1], c[2]))
        .collect();
    Frame::new(width, height, pixels).map_err(|e| e.to_string())
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.reserve(frame.pixels().len() * 3);
    for p in frame.pixels() {
        out.extend_from_slice(&[p.r, p.g, p.b]);
    }
    out
}

fn decode_png(bytes: &[u8]) -> std::result::Result<Frame, String> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or("image too large")?];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    let data = &buf[..info.buffer_size()];
    let (w, h) = (info.width as usize, info.height as usize);
    let pixels: Vec<Color> = match info.color_type {
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|c| Color::rgb(c[0], c[1], c[2]))
            .collect(),
        png::ColorType::Rgba => data
            .chunks_exact(4)
            .map(|c| Color::new(c[0], c[1], c[2], c[3]))
            .collect(),
        png::ColorType::Grayscale => data.iter().map(|&v| Color::gray(v)).collect(),
        png::ColorType::GrayscaleAlpha => data
            .chunks_exact(2)
            .map(|c| Color::new(c[0], c[0], c[0], c[1]))
            .collect(),
        png::ColorType::Indexed => return Err("palette was not expanded".into()),
    };
    Frame::new(w, h, pixels).map_err(|e| e.to_string())
}

fn encode_png(width: usize, height: usize, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(data).expect("in-memory PNG data");
    }
    out
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    let format = ImageFormat::from_path(path)
        .ok_or_else(|| Error::format(path, "unknown image extension (expected .ppm or .png)"))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        ImageFormat::Ppm => decode_ppm(&bytes),
        ImageFormat::Png => decode_png(&bytes),
    }
    .map_err(|msg| Error::format(path, msg))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_frame(path: &Path, frame: &Frame, format: ImageFormat) -> Result<()> {
    let bytes = match format {
        ImageFormat::Ppm => encode_ppm(frame),
        ImageFormat::Png => {
            let data: Vec<u8> = frame
                .pixels()
                .iter()
                .flat_map(|p| [p.r, p.g, p.b])
                .collect();
            encode_png(frame.width(), frame.height(), png::ColorType::Rgb, &data)
        }
    };
    write_bytes(path, &bytes)
}

/// Writes an 8-bit grayscale image: PGM (P5) or grayscale PNG.
pub fn write_gray(
    path: &Path,
    width: usize,
    height: usize,
    data: &[u8],
    format: ImageFormat,
) -> Result<()> {
    if data.len() != width * height {
        return Err(Error::invalid("grayscale buffer size mismatch"));
    }
    let bytes = match format {
        ImageFormat::Ppm => {
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend_from_slice(data);
            out
        }
        ImageFormat::Png => encode_png(width, height, png::ColorType::Grayscale, data),
    };
    write_bytes(path, &bytes)
}

/// Extension used for grayscale outputs of a given frame format.
pub fn gray_extension(format: ImageFormat) -> &'static str {
    match format {
        ImageFormat::Ppm => "pgm",
        ImageFormat::Png => "png",
    }
}

/// Frames of a directory in file-name order. All frames must share one
/// format.
pub fn list_sequence(dir: &Path) -> Result<(Vec<PathBuf>, ImageFormat)> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && ImageFormat::from_path(&path).is_some() {
            paths.push(path);
        }
    }
    paths.sort();
    let first = paths
        .first()
        .ok_or_else(|| Error::format(dir, "no .ppm or .png frames found"))?;
    let format = ImageFormat::from_path(first).expect("filtered above");
    if let Some(p) = paths
        .iter()
        .find(|p| ImageFormat::from_path(p) != Some(format))
    {
        return Err(Error::format(
            p,
            "frame format differs from the rest of the sequence",
        ));
    }
    Ok((paths, format))
}

pub fn load_sequence(dir: &Path) -> Result<(Vec<PathBuf>, Vec<Frame>, ImageFormat)> {
    let (paths, format) = list_sequence(dir)?;
    let frames = paths
        .iter()
        .map(|p| read_frame(p))
        .collect::<Result<Vec<_>>>()?;
    Ok((paths, frames, format))
}
