use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::Color;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
    /// Depth in `[0, 1]`, smaller is nearer.
    pub z: f64,
    /// RGBA in `[0, 1]`.
    pub color: [f64; 4],
    pub uv: [f64; 2],
}

impl Vertex {
    /// Vertex whose texture coordinates default to its screen position.
    pub fn new(x: f64, y: f64, z: f64, color: [f64; 4]) -> Self {
        Vertex {
            x,
            y,
            z,
            color,
            uv: [x, y],
        }
    }

    pub fn with_uv(mut self, u: f64, v: f64) -> Self {
        self.uv = [u, v];
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shader {
    /// First vertex color.
    Flat,
    /// Affine interpolation of vertex colors.
    Gouraud,
    /// Procedural checkerboard in uv space: even cells take the interpolated
    /// color, odd cells its RGB complement.
    Checker { cell_size: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Vertex; 3],
    pub shader: Shader,
}

impl Triangle {
    pub fn new(v0: Vertex, v1: Vertex, v2: Vertex, shader: Shader) -> Self {
        Triangle {
            v: [v0, v1, v2],
            shader,
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut t = *self;
        for v in &mut t.v {
            v.x += dx;
            v.y += dy;
        }
        t
    }
}

/// Animated scene: triangles plus a per-frame linear translation.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub clear: Color,
    pub triangles: Vec<Triangle>,
    /// Per-frame `(dx, dy)` for each triangle.
    pub motion: Vec<[f64; 2]>,
}

impl Scene {
    pub fn new(width: usize, height: usize, frames: usize) -> Self {
        Scene {
            width,
            height,
            frames,
            clear: Color::BLACK,
            triangles: Vec::new(),
            motion: Vec::new(),
        }
    }

    pub fn push(&mut self, tri: Triangle, motion: [f64; 2]) {
        self.triangles.push(tri);
        self.motion.push(motion);
    }

    /// Triangles positioned for frame `k`.
    pub fn frame_triangles(&self, k: usize) -> Vec<Triangle> {
        self.triangles
            .iter()
            .zip(&self.motion)
            .map(|(t, m)| t.translated(m[0] * k as f64, m[1] * k as f64))
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_scene(&text).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::format(path, msg),
            other => other,
        })
    }
}

/// Parses the line-oriented scene format:
///
/// ```text
/// # comment
/// scene <width> <height> <frames> [<dx> <dy>]
/// clear <r> <g> <b>
/// tri <x y z r g b [u v]> x3 <flat|gouraud|checker:<cell>> [alpha <a>] [move <dx> <dy>]
/// ```
///
/// Vertex colors are reals in `[0, 1]`; the clear color is 8-bit. The header
/// translation applies to every triangle without its own `move`.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let mut scene: Option<Scene> = None;
    let mut default_motion = [0.0, 0.0];
    let mut pending: Vec<(Triangle, Option<[f64; 2]>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::invalid(format!("line {}: {msg}", lineno + 1));
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("scene") => {
                let rest: Vec<&str> = tokens.collect();
                if rest.len() != 3 && rest.len() != 5 {
                    return Err(bad("expected `scene <w> <h> <frames> [<dx> <dy>]`".into()));
                }
                let w = parse_usize(rest[0]).map_err(&bad)?;
                let h = parse_usize(rest[1]).map_err(&bad)?;
                let f = parse_usize(rest[2]).map_err(&bad)?;
                if w == 0 || h == 0 || f == 0 {
                    return Err(bad(
                        "scene dimensions and frame count must be positive".into()
                    ));
                }
                if rest.len() == 5 {
                    default_motion = [
                        parse_f64(rest[3]).map_err(&bad)?,
                        parse_f64(rest[4]).map_err(&bad)?,
                    ];
                }
                scene = Some(Scene::new(w, h, f));
            }
            Some("clear") => {
                let s = scene
                    .as_mut()
                    .ok_or_else(|| bad("`clear` before `scene` header".into()))?;
                let rest: Vec<&str> = tokens.collect();
                if rest.len() != 3 {
                    return Err(bad("expected `clear <r> <g> <b>`".into()));
                }
                let mut c = [0u8; 3];
                for (dst, tok) in c.iter_mut().zip(&rest) {
                    *dst = tok
                        .parse()
                        .map_err(|_| bad(format!("invalid 8-bit channel `{tok}`")))?;
                }
                s.clear = Color::rgb(c[0], c[1], c[2]);
            }
            Some("tri") => {
                if scene.is_none() {
                    return Err(bad("`tri` before `scene` header".into()));
                }
                let rest: Vec<&str> = tokens.collect();
                pending.push(parse_triangle(&rest).map_err(&bad)?);
            }
            Some(other) => return Err(bad(format!("unknown directive `{other}`"))),
            None => unreachable!(),
        }
    }

    let mut scene = scene.ok_or_else(|| Error::invalid("missing `scene` header"))?;
    for (tri, motion) in pending {
        scene.push(tri, motion.unwrap_or(default_motion));
    }
    Ok(scene)
}

fn parse_usize(tok: &str) -> std::result::Result<usize, String> {
    tok.parse().map_err(|_| format!("invalid integer `{tok}`"))
}

fn parse_f64(tok: &str) -> std::result::Result<f64, String> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("invalid number `{tok}`"))
}

fn parse_triangle(tokens: &[&str]) -> std::result::Result<(Triangle, Option<[f64; 2]>), String> {
    let numeric = tokens
        .iter()
        .take_while(|t| t.parse::<f64>().is_ok())
        .count();
    let per_vertex = match numeric {
        18 => 6,
        24 => 8,
        n => return Err(format!("expected 18 or 24 vertex numbers, found {n}")),
    };
    let nums: Vec<f64> = tokens[..numeric]
        .iter()
        .map(|t| parse_f64(t))
        .collect::<std::result::Result<_, _>>()?;

    let mut verts = [Vertex::new(0.0, 0.0, 0.0, [0.0; 4]); 3];
    for (i, v) in verts.iter_mut().enumerate() {
        let c = &nums[i * per_vertex..(i + 1) * per_vertex];
        if !(0.0..=1.0).contains(&c[2]) {
            return Err(format!("vertex {i} depth {} outside [0, 1]", c[2]));
        }
        *v = Vertex::new(c[0], c[1], c[2], [c[3], c[4], c[5], 1.0]);
        if per_vertex == 8 {
            *v = v.with_uv(c[6], c[7]);
        }
    }

    let mut rest = tokens[numeric..].iter();
    let shader = match rest.next() {
        Some(&"flat") => Shader::Flat,
        Some(&"gouraud") => Shader::Gouraud,
        Some(tag) if tag.starts_with("checker:") => {
            let cell = parse_f64(&tag["checker:".len()..])?;
            if cell <= 0.0 {
                return Err("checker cell size must be positive".into());
            }
            Shader::Checker { cell_size: cell }
        }
        Some(tag) => return Err(format!("unknown shader `{tag}`")),
        None => return Err("missing shader tag".into()),
    };

    let mut motion = None;
    while let Some(&kw) = rest.next() {
        match kw {
            "alpha" => {
                let a = parse_f64(rest.next().ok_or("`alpha` needs a value")?)?;
                for v in &mut verts {
                    v.color[3] = a.clamp(0.0, 1.0);
                }
            }
            "move" => {
                let dx = parse_f64(rest.next().ok_or("`move` needs dx dy")?)?;
                let dy = parse_f64(rest.next().ok_or("`move` needs dx dy")?)?;
                motion = Some([dx, dy]);
            }
            other => return Err(format!("unexpected token `{other}`")),
        }
    }
    Ok((Triangle::new(verts[0], verts[1], verts[2], shader), motion))
}
