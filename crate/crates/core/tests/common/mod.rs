//! Shared test oracles. Nothing here calls into the code paths it checks.
#![allow(dead_code)]

use dsr_core::frame::{Color, Frame};
use dsr_core::pipeline::{Shader, Triangle, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tile(r: &mut impl Rng) -> Vec<f64> {
    (0..256).map(|_| r.gen_range(0.0..255.0)).collect()
}

pub fn random_frame(r: &mut impl Rng, w: usize, h: usize) -> Frame {
    Frame::from_fn(w, h, |_, _| Color::new(r.gen(), r.gen(), r.gen(), 255)).unwrap()
}

/// Literal double-sum DCT-II, written out independently of the library.
pub fn reference_dct(input: &[f64]) -> Vec<f64> {
    let n = 16usize;
    let pi = std::f64::consts::PI;
    let a = |k: usize| {
        if k == 0 {
            (1.0 / 16.0f64).sqrt()
        } else {
            (2.0 / 16.0f64).sqrt()
        }
    };
    let mut out = vec![0.0; 256];
    for p in 0..n {
        for q in 0..n {
            let mut s = 0.0;
            for m in 0..n {
                for k in 0..n {
                    s += input[m * n + k]
                        * ((2 * m + 1) as f64 * pi * p as f64 / 32.0).cos()
                        * ((2 * k + 1) as f64 * pi * q as f64 / 32.0).cos();
                }
            }
            out[p * n + q] = a(p) * a(q) * s;
        }
    }
    out
}

pub fn checkerboard_luma() -> Vec<f64> {
    (0..256)
        .map(|i| {
            if (i / 16 + i % 16) % 2 == 0 {
                0.0
            } else {
                255.0
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Per-pixel reference renderer.
//
// A conventional one-sample-per-pixel rasterizer over the whole frame: the
// same fixed-point snapping (1/256 px), pixel-center sampling, top-left
// rule, strict less-than depth test against a far (1.0) buffer, affine
// barycentric interpolation and 8-bit rounding.

const SUB: f64 = 256.0;

fn fx(v: f64) -> i64 {
    (v * SUB).round() as i64
}

struct RefTri {
    pts: [(i64, i64); 3],
    verts: [Vertex; 3],
    shader: Shader,
    area: i64,
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn setup(t: &Triangle) -> Option<RefTri> {
    let mut verts = t.v;
    let mut pts = verts.map(|v| (fx(v.x), fx(v.y)));
    let mut area = cross(pts[0], pts[1], pts[2]);
    if area == 0 {
        return None;
    }
    if area < 0 {
        verts.swap(1, 2);
        pts.swap(1, 2);
        area = -area;
    }
    Some(RefTri {
        pts,
        verts,
        shader: t.shader,
        area,
    })
}

/// Edge from `a` to `b` owns samples lying exactly on it when it is a left
/// edge (going up in y-down screen space) or a flat top edge going right.
fn owns(a: (i64, i64), b: (i64, i64)) -> bool {
    b.1 < a.1 || (b.1 == a.1 && b.0 > a.0)
}

/// Barycentric weights (over the area) if the fixed-point point is covered.
fn inside(t: &RefTri, p: (i64, i64)) -> Option<[f64; 3]> {
    let [a, b, c] = t.pts;
    let e = [(b, c), (c, a), (a, b)];
    let mut w = [0i64; 3];
    for (i, (s, d)) in e.iter().enumerate() {
        w[i] = cross(*s, *d, p);
        let ok = w[i] > 0 || (w[i] == 0 && owns(*s, *d));
        if !ok {
            return None;
        }
    }
    let ar = t.area as f64;
    Some([w[0] as f64 / ar, w[1] as f64 / ar, w[2] as f64 / ar])
}

fn shade(t: &RefTri, b: [f64; 3]) -> [f64; 4] {
    let v = &t.verts;
    let mix = |k: usize| b[0] * v[0].color[k] + b[1] * v[1].color[k] + b[2] * v[2].color[k];
    match t.shader {
        Shader::Flat => v[0].color,
        Shader::Gouraud => [mix(0), mix(1), mix(2), mix(3)],
        Shader::Checker { cell_size } => {
            let c = [mix(0), mix(1), mix(2), mix(3)];
            let u = b[0] * v[0].uv[0] + b[1] * v[1].uv[0] + b[2] * v[2].uv[0];
            let w = b[0] * v[0].uv[1] + b[1] * v[1].uv[1] + b[2] * v[2].uv[1];
            let cells = (u / cell_size).floor() + (w / cell_size).floor();
            if (cells as i64).rem_euclid(2) == 0 {
                c
            } else {
                [1.0 - c[0], 1.0 - c[1], 1.0 - c[2], c[3]]
            }
        }
    }
}

fn to8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub struct Reference {
    pub frame: Frame,
    pub invocations: u64,
    /// Per-pixel count of covering triangles.
    pub coverage: Vec<u32>,
}

pub fn reference_render(tris: &[Triangle], w: usize, h: usize, clear: Color) -> Reference {
    let set: Vec<RefTri> = tris.iter().filter_map(setup).collect();
    let mut depth = vec![1.0f64; w * h];
    let mut color: Vec<Option<[f64; 4]>> = vec![None; w * h];
    let mut coverage = vec![0u32; w * h];
    let mut invocations = 0;
    for t in &set {
        for y in 0..h {
            for x in 0..w {
                let p = (x as i64 * 256 + 128, y as i64 * 256 + 128);
                if let Some(b) = inside(t, p) {
                    let i = y * w + x;
                    coverage[i] += 1;
                    let z = b[0] * t.verts[0].z + b[1] * t.verts[1].z + b[2] * t.verts[2].z;
                    if z < depth[i] {
                        depth[i] = z;
                        color[i] = Some(shade(t, b));
                        invocations += 1;
                    }
                }
            }
        }
    }
    let frame = Frame::from_fn(w, h, |x, y| match color[y * w + x] {
        Some(c) => Color::rgb(to8(c[0]), to8(c[1]), to8(c[2])),
        None => Color::rgb(clear.r, clear.g, clear.b),
    })
    .unwrap();
    Reference {
        frame,
        invocations,
        coverage,
    }
}

pub fn random_vertex(r: &mut impl Rng, w: f64, h: f64) -> Vertex {
    let v = Vertex::new(
        r.gen_range(-8.0..w + 8.0),
        r.gen_range(-8.0..h + 8.0),
        r.gen_range(0.0..1.0),
        [r.gen(), r.gen(), r.gen(), 1.0],
    );
    v.with_uv(r.gen_range(0.0..32.0), r.gen_range(0.0..32.0))
}

pub fn random_scene(r: &mut impl Rng, w: usize, h: usize, count: usize) -> Vec<Triangle> {
    (0..count)
        .map(|_| {
            let shader = match r.gen_range(0..3) {
                0 => Shader::Flat,
                1 => Shader::Gouraud,
                _ => Shader::Checker {
                    cell_size: r.gen_range(1.0..6.0),
                },
            };
            Triangle::new(
                random_vertex(r, w as f64, h as f64),
                random_vertex(r, w as f64, h as f64),
                random_vertex(r, w as f64, h as f64),
                shader,
            )
        })
        .collect()
}
