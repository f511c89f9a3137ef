use std::ops::AddAssign;

use rayon::prelude::*;

use super::scene::{Scene, Shader, Triangle};
use crate::dct::{build_kernel, tile_max_c, KernelMatrix};
use crate::error::{Error, Result};
use crate::frame::{extract_tile, make_grid, Color, Frame, TileGrid};
use crate::metrics::{aggregate, mse, psnr, FrameReport, RateHistogram, SequenceReport};
use crate::rate::{update_table, ControllerParams, SamplingRate, SamplingRateTable};

/// Fractional bits of the fixed-point screen grid.
pub const SUBPIXEL_BITS: u32 = 8;
const ONE: i64 = 1 << SUBPIXEL_BITS;
const HALF: i64 = ONE / 2;

#[inline]
fn snap(v: f64) -> i64 {
    (v * ONE as f64).round() as i64
}

#[inline]
fn edge(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> i64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

/// Interior lies on the positive side, y pointing down. An edge owns its
/// samples when it is a left edge or a horizontal top edge.
#[inline]
fn is_top_left(a: (i64, i64), b: (i64, i64)) -> bool {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    dy < 0 || (dy == 0 && dx > 0)
}

/// Triangle after setup: snapped, wound so the area is positive.
#[derive(Debug, Clone, Copy)]
pub struct PreparedTriangle {
    pub source: Triangle,
    /// Index into the draw list the triangle came from.
    pub index: usize,
    p: [(i64, i64); 3],
    area: i64,
    owns_edge: [bool; 3],
    bbox: (i64, i64, i64, i64),
}

impl PreparedTriangle {
    fn new(tri: &Triangle, index: usize) -> Option<Self> {
        let mut src = *tri;
        let mut p = src.v.map(|v| (snap(v.x), snap(v.y)));
        let mut area = edge(p[0], p[1], p[2]);
        if area == 0 {
            return None;
        }
        if area < 0 {
            src.v.swap(1, 2);
            p.swap(1, 2);
            area = -area;
        }
        let owns_edge = [
            is_top_left(p[1], p[2]),
            is_top_left(p[2], p[0]),
            is_top_left(p[0], p[1]),
        ];
        let xs = [p[0].0, p[1].0, p[2].0];
        let ys = [p[0].1, p[1].1, p[2].1];
        let bbox = (
            *xs.iter().min().unwrap(),
            *ys.iter().min().unwrap(),
            *xs.iter().max().unwrap(),
            *ys.iter().max().unwrap(),
        );
        Some(PreparedTriangle {
            source: src,
            index,
            p,
            area,
            owns_edge,
            bbox,
        })
    }

    /// Barycentric weights of a fixed-point sample, or `None` if the sample
    /// is not covered.
    #[inline]
    fn cover(&self, s: (i64, i64)) -> Option<[f64; 3]> {
        let w = [
            edge(self.p[1], self.p[2], s),
            edge(self.p[2], self.p[0], s),
            edge(self.p[0], self.p[1], s),
        ];
        for (&wi, &owns) in w.iter().zip(&self.owns_edge) {
            if wi < 0 || (wi == 0 && !owns) {
                return None;
            }
        }
        let a = self.area as f64;
        Some([w[0] as f64 / a, w[1] as f64 / a, w[2] as f64 / a])
    }

    /// Whether the bounding box touches the pixel rectangle `[x0, x1) × [y0, y1)`.
    fn overlaps(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> bool {
        let (bx0, by0, bx1, by1) = self.bbox;
        bx1 >= x0 as i64 * ONE
            && bx0 <= x1 as i64 * ONE
            && by1 >= y0 as i64 * ONE
            && by0 <= y1 as i64 * ONE
    }

    #[inline]
    fn depth(&self, b: [f64; 3]) -> f64 {
        let v = &self.source.v;
        b[0] * v[0].z + b[1] * v[1].z + b[2] * v[2].z
    }

    /// Runs the triangle's shader at barycentric position `b`.
    fn shade(&self, b: [f64; 3]) -> [f64; 4] {
        let v = &self.source.v;
        let lerp = |f: &dyn Fn(usize) -> f64| b[0] * f(0) + b[1] * f(1) + b[2] * f(2);
        match self.source.shader {
            Shader::Flat => v[0].color,
            Shader::Gouraud => [
                lerp(&|i| v[i].color[0]),
                lerp(&|i| v[i].color[1]),
                lerp(&|i| v[i].color[2]),
                lerp(&|i| v[i].color[3]),
            ],
            Shader::Checker { cell_size } => {
                let c = [
                    lerp(&|i| v[i].color[0]),
                    lerp(&|i| v[i].color[1]),
                    lerp(&|i| v[i].color[2]),
                    lerp(&|i| v[i].color[3]),
                ];
                let u = lerp(&|i| v[i].uv[0]);
                let w = lerp(&|i| v[i].uv[1]);
                let parity = ((u / cell_size).floor() + (w / cell_size).floor()) as i64;
                if parity.rem_euclid(2) == 0 {
                    c
                } else {
                    [1.0 - c[0], 1.0 - c[1], 1.0 - c[2], c[3]]
                }
            }
        }
    }
}

/// Sets up a draw list, dropping degenerate triangles.
pub fn prepare_triangles(triangles: &[Triangle]) -> Vec<PreparedTriangle> {
    triangles
        .iter()
        .enumerate()
        .filter_map(|(i, t)| PreparedTriangle::new(t, i))
        .collect()
}

/// One shaded sample standing for an `n × n` pixel block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superfragment {
    /// Top-left pixel of the block, frame coordinates.
    pub block_x: usize,
    pub block_y: usize,
    pub n: usize,
    /// Continuous sample position, `block + n/2`.
    pub sample_x: f64,
    pub sample_y: f64,
    pub depth: f64,
    pub barycentric: [f64; 3],
}

/// 2×2 superfragments of one triangle, in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superquad {
    /// Position of the triangle in the prepared list handed to the rasterizer.
    pub triangle: usize,
    pub fragments: [Superfragment; 4],
    pub coverage: [bool; 4],
}

impl Superquad {
    pub fn covered(&self) -> impl Iterator<Item = &Superfragment> {
        self.fragments
            .iter()
            .zip(self.coverage)
            .filter_map(|(f, c)| c.then_some(f))
    }
}

fn check_tile_size(tile_size: usize) -> Result<()> {
    if tile_size == 0 || !tile_size.is_multiple_of(8) {
        return Err(Error::invalid(format!(
            "tile size {tile_size} must be a positive multiple of 8"
        )));
    }
    Ok(())
}

/// Walks the tile's `2n × 2n` regions for every triangle, in draw order, and
/// emits one superquad per region with at least one covered sample.
pub fn rasterize_tile(
    triangles: &[PreparedTriangle],
    origin: (usize, usize),
    tile_size: usize,
    rate: SamplingRate,
) -> Vec<Superquad> {
    let n = rate.side();
    let blocks = tile_size / n;
    let (ox, oy) = origin;
    let mut out = Vec::new();
    for (ti, tri) in triangles.iter().enumerate() {
        if !tri.overlaps(ox, oy, ox + tile_size, oy + tile_size) {
            continue;
        }
        for qy in (0..blocks).step_by(2) {
            for qx in (0..blocks).step_by(2) {
                let (rx, ry) = (ox + qx * n, oy + qy * n);
                if !tri.overlaps(rx, ry, rx + 2 * n, ry + 2 * n) {
                    continue;
                }
                let mut coverage = [false; 4];
                let fragments = std::array::from_fn(|k| {
                    let block_x = rx + (k % 2) * n;
                    let block_y = ry + (k / 2) * n;
                    let s = (
                        block_x as i64 * ONE + n as i64 * HALF,
                        block_y as i64 * ONE + n as i64 * HALF,
                    );
                    let (barycentric, depth) = match tri.cover(s) {
                        Some(b) => {
                            coverage[k] = true;
                            (b, tri.depth(b))
                        }
                        None => ([0.0; 3], 1.0),
                    };
                    Superfragment {
                        block_x,
                        block_y,
                        n,
                        sample_x: block_x as f64 + n as f64 / 2.0,
                        sample_y: block_y as f64 + n as f64 / 2.0,
                        depth,
                        barycentric,
                    }
                });
                if coverage.iter().any(|&c| c) {
                    out.push(Superquad {
                        triangle: ti,
                        fragments,
                        coverage,
                    });
                }
            }
        }
    }
    out
}

/// Depth and color storage for one tile. Each superfragment uses the entry
/// of its block's top-left pixel.
#[derive(Debug, Clone)]
pub struct TileBuffers {
    pub origin: (usize, usize),
    pub size: usize,
    pub depth: Vec<f64>,
    pub color: Vec<[f64; 4]>,
    pub initialized: Vec<bool>,
}

impl TileBuffers {
    pub fn new(origin: (usize, usize), size: usize) -> Self {
        TileBuffers {
            origin,
            size,
            depth: vec![1.0; size * size],
            color: vec![[0.0; 4]; size * size],
            initialized: vec![false; size * size],
        }
    }

    #[inline]
    fn entry(&self, f: &Superfragment) -> usize {
        (f.block_y - self.origin.1) * self.size + (f.block_x - self.origin.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PipelineCounters {
    pub superquads: u64,
    pub covered_superfragments: u64,
    pub shader_invocations: u64,
    /// One combined read/write per depth-tested superfragment.
    pub depth_ops: u64,
    /// One combined read/write per superfragment that reaches the color buffer.
    pub color_ops: u64,
}

impl AddAssign for PipelineCounters {
    fn add_assign(&mut self, o: Self) {
        self.superquads += o.superquads;
        self.covered_superfragments += o.covered_superfragments;
        self.shader_invocations += o.shader_invocations;
        self.depth_ops += o.depth_ops;
        self.color_ops += o.color_ops;
    }
}

/// Strict less-than depth test, then one shader call per surviving
/// superfragment. With `blend` the result is composited source-over onto
/// the stored color (or the clear color for untouched entries).
pub fn depth_test_and_shade(
    quad: &Superquad,
    triangles: &[PreparedTriangle],
    buffers: &mut TileBuffers,
    counters: &mut PipelineCounters,
    blend: Option<Color>,
) {
    let tri = &triangles[quad.triangle];
    counters.superquads += 1;
    for f in quad.covered() {
        counters.covered_superfragments += 1;
        counters.depth_ops += 1;
        let e = buffers.entry(f);
        if f.depth.is_nan() || f.depth >= buffers.depth[e] {
            continue;
        }
        buffers.depth[e] = f.depth;
        let src = tri.shade(f.barycentric);
        counters.shader_invocations += 1;
        counters.color_ops += 1;
        buffers.color[e] = match blend {
            Some(clear) => {
                let dst = if buffers.initialized[e] {
                    buffers.color[e]
                } else {
                    [
                        f64::from(clear.r) / 255.0,
                        f64::from(clear.g) / 255.0,
                        f64::from(clear.b) / 255.0,
                        1.0,
                    ]
                };
                let a = src[3];
                [
                    src[0] * a + dst[0] * (1.0 - a),
                    src[1] * a + dst[1] * (1.0 - a),
                    src[2] * a + dst[2] * (1.0 - a),
                    1.0,
                ]
            }
            None => src,
        };
        buffers.initialized[e] = true;
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Upsamples by replication: every pixel of a block gets its
/// superfragment's color, untouched blocks get `clear`. Output is opaque.
pub fn resolve_tile(buffers: &TileBuffers, rate: SamplingRate, clear: Color) -> Vec<Color> {
    let n = rate.side();
    let size = buffers.size;
    let mut out = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let e = (y / n * n) * size + x / n * n;
            out.push(if buffers.initialized[e] {
                let c = buffers.color[e];
                Color::rgb(quantize(c[0]), quantize(c[1]), quantize(c[2]))
            } else {
                Color::rgb(clear.r, clear.g, clear.b)
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams {
    pub controller: ControllerParams,
    pub clear: Color,
    pub blend: bool,
}

#[derive(Debug, Clone)]
pub struct RenderedFrame {
    pub frame: Frame,
    pub max_c: Vec<f64>,
    pub counters: PipelineCounters,
    pub per_tile: Vec<PipelineCounters>,
}

fn render_tile(
    triangles: &[PreparedTriangle],
    origin: (usize, usize),
    tile_size: usize,
    rate: SamplingRate,
    params: &RenderParams,
) -> (Vec<Color>, PipelineCounters) {
    let mut buffers = TileBuffers::new(origin, tile_size);
    let mut counters = PipelineCounters::default();
    let blend = params.blend.then_some(params.clear);
    for quad in rasterize_tile(triangles, origin, tile_size, rate) {
        depth_test_and_shade(&quad, triangles, &mut buffers, &mut counters, blend);
    }
    (resolve_tile(&buffers, rate, params.clear), counters)
}

/// Renders one frame tile by tile at the SRT's rates, then analyzes every
/// resolved tile. The caller advances the SRT.
pub fn render_frame(
    scene: &[Triangle],
    grid: &TileGrid,
    srt: &SamplingRateTable,
    params: &RenderParams,
) -> Result<RenderedFrame> {
    let kernel = build_kernel(grid.tile_size())?;
    render_frame_with(scene, grid, srt, params, &kernel)
}

fn render_frame_with(
    scene: &[Triangle],
    grid: &TileGrid,
    srt: &SamplingRateTable,
    params: &RenderParams,
    kernel: &KernelMatrix,
) -> Result<RenderedFrame> {
    check_tile_size(grid.tile_size())?;
    if srt.tile_count() != grid.tile_count() {
        return Err(Error::invalid(format!(
            "SRT has {} entries but the grid has {} tiles",
            srt.tile_count(),
            grid.tile_count()
        )));
    }
    let prepared = prepare_triangles(scene);
    let ts = grid.tile_size();
    let tiles: Vec<(Vec<Color>, PipelineCounters)> = (0..grid.tile_count())
        .into_par_iter()
        .map(|id| {
            let origin = grid.origin(id).expect("tile id in range");
            render_tile(&prepared, origin, ts, srt.rate(id), params)
        })
        .collect();

    let mut frame = Frame::filled(grid.frame_width(), grid.frame_height(), params.clear)?;
    let mut counters = PipelineCounters::default();
    let mut per_tile = Vec::with_capacity(tiles.len());
    for (id, (block, c)) in tiles.into_iter().enumerate() {
        frame.write_tile(grid, id, &block)?;
        counters += c;
        per_tile.push(c);
    }

    let max_c = (0..grid.tile_count())
        .into_par_iter()
        .map(|id| {
            let view = extract_tile(&frame, grid, id)?;
            tile_max_c(&view.luma, kernel, params.controller.d)
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(RenderedFrame {
        frame,
        max_c,
        counters,
        per_tile,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub frames: Vec<Frame>,
    pub reference_frames: Vec<Frame>,
    pub report: SequenceReport,
    /// Table each frame was rendered with.
    pub tables: Vec<SamplingRateTable>,
}

/// Renders every frame of an animated scene with the rate controller in
/// the loop, alongside a full-rate reference render for quality and
/// baseline invocation counts.
pub fn run_scene(
    scene: &Scene,
    params: &RenderParams,
    tile_size: usize,
) -> Result<PipelineOutcome> {
    let grid = make_grid(scene.width, scene.height, tile_size)?;
    let kernel = build_kernel(tile_size)?;
    let full = SamplingRateTable::new(grid.tile_count());
    let mut srt = SamplingRateTable::new(grid.tile_count());
    let mut frames = Vec::with_capacity(scene.frames);
    let mut reference_frames = Vec::with_capacity(scene.frames);
    let mut reports = Vec::with_capacity(scene.frames);
    let mut tables = Vec::with_capacity(scene.frames);

    for k in 0..scene.frames {
        let tris = scene.frame_triangles(k);
        let rendered = render_frame_with(&tris, &grid, &srt, params, &kernel)?;
        let reference = render_frame_with(&tris, &grid, &full, params, &kernel)?;
        let err = mse(&rendered.frame, &reference.frame)?;
        reports.push(FrameReport {
            frame_index: k,
            mse: err,
            psnr_db: psnr(err)?,
            shader_invocations: rendered.counters.shader_invocations,
            baseline_invocations: reference.counters.shader_invocations,
            depth_ops: rendered.counters.depth_ops,
            color_ops: rendered.counters.color_ops,
            rate_histogram: RateHistogram(srt.histogram()),
        });
        let next = update_table(&srt, &rendered.max_c, &params.controller)?;
        tables.push(std::mem::replace(&mut srt, next));
        frames.push(rendered.frame);
        reference_frames.push(reference.frame);
    }

    Ok(PipelineOutcome {
        frames,
        reference_frames,
        report: aggregate(reports)?,
        tables,
    })
}
