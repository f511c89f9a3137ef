//! Minimal tile-based renderer with per-tile sampling rates.
//!
//! Each tile is rasterized on its own at the rate stored in the SRT. At rate
//! `1/(n×n)` the rasterizer samples one point per `n × n` pixel block (the
//! block center), groups 2×2 blocks into superquads, and each covered
//! superfragment is depth-tested and shaded once. The tile is then resolved
//! by replicating each superfragment's color over its block.
//!
//! Geometry is snapped to a fixed-point grid with [`SUBPIXEL_BITS`]
//! fractional bits, so coverage (edge functions plus the top-left rule) is
//! exact integer arithmetic and watertight. Attribute interpolation is
//! affine.

mod raster;
mod scene;

pub use raster::{
    depth_test_and_shade, prepare_triangles, rasterize_tile, render_frame, resolve_tile, run_scene,
    PipelineCounters, PipelineOutcome, PreparedTriangle, RenderParams, RenderedFrame,
    Superfragment, Superquad, TileBuffers, SUBPIXEL_BITS,
};
pub use scene::{parse_scene, Scene, Shader, Triangle, Vertex};
