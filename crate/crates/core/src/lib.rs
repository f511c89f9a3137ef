//! Simulator for per-tile dynamic sampling rates on tile-based GPUs.
//!
//! Each 16×16 tile of a rendered frame is transformed with a 2D DCT; the
//! largest coefficient outside the lowest-frequency diagonals (MaxC) is
//! compared with a threshold and drives a small per-tile state machine that
//! picks the sampling rate (1, 1/4 or 1/16 samples per pixel) for the next
//! frame.
//!
//! * [`frame`]: rasters, tile grids, luma windows
//! * [`dct`]: kernel-matrix DCT, reference DCT, MaxC
//! * [`rate`]: state machine and Sampling Rate Table
//! * [`pipeline`]: tile-based rasterizer rendering at reduced rates
//! * [`replay`]: rate control over pre-rendered sequences, calibration
//! * [`metrics`]: MSE/PSNR and invocation accounting
//! * [`cli`]: batch front end used by the `dsr` binary

pub mod cli;
pub mod corpus;
pub mod dct;
pub mod error;
pub mod frame;
pub mod image_io;
pub mod metrics;
pub mod pipeline;
pub mod rate;
pub mod replay;

pub use error::{Error, Result};
pub use frame::{extract_tile, make_grid, Color, Frame, TileGrid, TileView, TILE_SIZE};
pub use rate::{ControllerParams, SamplingRate, SamplingRateTable, TileState};
