//! Rate control applied to pre-rendered frame sequences.
//!
//! A reference frame stands in for the full-rate render. A tile at rate
//! `1/(n×n)` is simulated by point-sampling one reference pixel per `n × n`
//! block and replicating it, which is exactly what a reduced-rate render
//! followed by replication would produce for a final image. The simulated
//! tile, not the reference, is what gets analyzed, matching the hardware
//! order (resolve, then analyze).

use rayon::prelude::*;
use serde::Serialize;

use crate::dct::{build_kernel, tile_max_c, KernelMatrix};
use crate::error::{Error, Result};
use crate::frame::{extract_tile, Color, Frame, TileGrid, TILE_SIZE};
use crate::metrics::{aggregate, mse, psnr, FrameReport, RateHistogram, SequenceReport, Summary};
use crate::rate::{update_table, ControllerParams, SamplingRate, SamplingRateTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplayConfig {
    pub params: ControllerParams,
    pub tile_size: usize,
    pub emit_frames: bool,
    pub emit_rate_maps: bool,
}

impl ReplayConfig {
    pub fn new(params: ControllerParams) -> Self {
        ReplayConfig {
            params,
            tile_size: TILE_SIZE,
            emit_frames: true,
            emit_rate_maps: true,
        }
    }
}

/// Point-samples each `n × n` block at offset `(n/2, n/2)` and replicates it.
pub fn simulate_tile(
    reference: &[Color],
    tile_size: usize,
    rate: SamplingRate,
) -> Result<Vec<Color>> {
    let n = rate.side();
    if reference.len() != tile_size * tile_size {
        return Err(Error::invalid(format!(
            "tile has {} pixels, expected {}",
            reference.len(),
            tile_size * tile_size
        )));
    }
    if !tile_size.is_multiple_of(n) {
        return Err(Error::invalid(format!(
            "tile size {tile_size} is not divisible by {n}"
        )));
    }
    let off = n / 2;
    let mut out = Vec::with_capacity(reference.len());
    for y in 0..tile_size {
        let sy = y / n * n + off;
        for x in 0..tile_size {
            let sx = x / n * n + off;
            out.push(reference[sy * tile_size + sx]);
        }
    }
    Ok(out)
}

/// Result of one replayed frame.
#[derive(Debug, Clone)]
pub struct ReplayStep {
    pub output: Frame,
    pub report: FrameReport,
    /// Table the frame was simulated with.
    pub table: SamplingRateTable,
    pub max_c: Vec<f64>,
}

/// Incremental replay: one reference frame in, one simulated frame out.
#[derive(Debug, Clone)]
pub struct ReplaySession {
    grid: Option<TileGrid>,
    kernel: KernelMatrix,
    srt: SamplingRateTable,
    config: ReplayConfig,
    frame_index: usize,
}

impl ReplaySession {
    pub fn new(config: ReplayConfig) -> Result<Self> {
        if config.tile_size != TILE_SIZE {
            return Err(Error::invalid(format!(
                "replay tile size must be {TILE_SIZE}, got {}",
                config.tile_size
            )));
        }
        Ok(ReplaySession {
            grid: None,
            kernel: build_kernel(config.tile_size)?,
            srt: SamplingRateTable::new(0),
            config,
            frame_index: 0,
        })
    }

    pub fn config(&self) -> &ReplayConfig {
        &self.config
    }

    /// Table that will govern the next frame.
    pub fn table(&self) -> &SamplingRateTable {
        &self.srt
    }

    pub fn grid(&self) -> Option<&TileGrid> {
        self.grid.as_ref()
    }

    pub fn frames_processed(&self) -> usize {
        self.frame_index
    }

    pub fn step(&mut self, reference: &Frame) -> Result<ReplayStep> {
        let grid = match self.grid {
            Some(g) => {
                if g.frame_width() != reference.width() || g.frame_height() != reference.height() {
                    return Err(Error::invalid(format!(
                        "frame {} is {}x{}, sequence is {}x{}",
                        self.frame_index,
                        reference.width(),
                        reference.height(),
                        g.frame_width(),
                        g.frame_height()
                    )));
                }
                g
            }
            None => {
                let g = TileGrid::for_frame(reference, self.config.tile_size)?;
                self.grid = Some(g);
                self.srt = SamplingRateTable::new(g.tile_count());
                g
            }
        };
        let ts = grid.tile_size();

        let blocks = (0..grid.tile_count())
            .into_par_iter()
            .map(|id| {
                let tile = reference.tile_pixels(&grid, id)?;
                simulate_tile(&tile, ts, self.srt.rate(id))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut output = reference.clone();
        for (id, block) in blocks.iter().enumerate() {
            output.write_tile(&grid, id, block)?;
        }

        let d = self.config.params.d;
        let max_c = (0..grid.tile_count())
            .into_par_iter()
            .map(|id| {
                let view = extract_tile(&output, &grid, id)?;
                tile_max_c(&view.luma, &self.kernel, d)
            })
            .collect::<Result<Vec<f64>>>()?;

        let invocations: u64 = self
            .srt
            .states()
            .iter()
            .map(|&s| crate::rate::rate_of(s).superfragments_per_tile(ts) as u64)
            .sum();
        let err = mse(&output, reference)?;
        let report = FrameReport {
            frame_index: self.frame_index,
            mse: err,
            psnr_db: psnr(err)?,
            shader_invocations: invocations,
            baseline_invocations: (grid.tile_count() * ts * ts) as u64,
            depth_ops: invocations,
            color_ops: invocations,
            rate_histogram: RateHistogram(self.srt.histogram()),
        };

        let next = update_table(&self.srt, &max_c, &self.config.params)?;
        let table = std::mem::replace(&mut self.srt, next);
        self.frame_index += 1;
        Ok(ReplayStep {
            output,
            report,
            table,
            max_c,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub output_frames: Vec<Frame>,
    pub report: SequenceReport,
    /// Per-frame state histogram.
    pub srt_trace: Vec<RateHistogram>,
    /// Table each frame was simulated with.
    pub tables: Vec<SamplingRateTable>,
}

fn check_sequence(frames: &[Frame]) -> Result<()> {
    let first = frames
        .first()
        .ok_or_else(|| Error::invalid("sequence needs at least one frame"))?;
    if let Some((i, f)) = frames
        .iter()
        .enumerate()
        .find(|(_, f)| f.width() != first.width() || f.height() != first.height())
    {
        return Err(Error::invalid(format!(
            "frame {i} is {}x{}, frame 0 is {}x{}",
            f.width(),
            f.height(),
            first.width(),
            first.height()
        )));
    }
    Ok(())
}

pub fn simulate_sequence(frames: &[Frame], config: &ReplayConfig) -> Result<ReplayOutcome> {
    check_sequence(frames)?;
    let mut session = ReplaySession::new(*config)?;
    let mut output_frames = Vec::with_capacity(frames.len());
    let mut reports = Vec::with_capacity(frames.len());
    let mut tables = Vec::with_capacity(frames.len());
    for f in frames {
        let step = session.step(f)?;
        output_frames.push(step.output);
        reports.push(step.report);
        tables.push(step.table);
    }
    Ok(ReplayOutcome {
        srt_trace: reports.iter().map(|r| r.rate_histogram).collect(),
        report: aggregate(reports)?,
        output_frames,
        tables,
    })
}

/// Summary only, without keeping output frames.
pub fn evaluate(frames: &[Frame], params: ControllerParams) -> Result<Summary> {
    check_sequence(frames)?;
    let mut session = ReplaySession::new(ReplayConfig::new(params))?;
    let reports = frames
        .iter()
        .map(|f| session.step(f).map(|s| s.report))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(reports)?.summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub t: f64,
    pub d: usize,
    #[serde(serialize_with = "crate::metrics::serialize_db")]
    pub mean_psnr_db: f64,
    pub invocation_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub t: f64,
    pub d: usize,
    #[serde(serialize_with = "crate::metrics::serialize_db")]
    pub mean_psnr_db: f64,
    pub invocation_ratio: f64,
    /// False when no grid point reached the floor and the
    /// highest-quality point was returned instead.
    pub meets_floor: bool,
    #[serde(serialize_with = "crate::metrics::serialize_db")]
    pub psnr_floor_db: f64,
    pub grid: Vec<CalibrationPoint>,
}

/// Picks the point with the lowest invocation ratio whose mean PSNR reaches
/// the floor. Ties go to lower `t`, then lower `d`.
pub fn select_point(
    points: &[CalibrationPoint],
    psnr_floor: f64,
) -> Option<(CalibrationPoint, bool)> {
    let by_params =
        |a: &CalibrationPoint, b: &CalibrationPoint| a.t.total_cmp(&b.t).then(a.d.cmp(&b.d));
    let feasible = points
        .iter()
        .filter(|p| p.mean_psnr_db >= psnr_floor)
        .min_by(|a, b| {
            a.invocation_ratio
                .total_cmp(&b.invocation_ratio)
                .then_with(|| by_params(a, b))
        });
    if let Some(p) = feasible {
        return Some((*p, true));
    }
    points
        .iter()
        .min_by(|a, b| {
            b.mean_psnr_db
                .total_cmp(&a.mean_psnr_db)
                .then(a.invocation_ratio.total_cmp(&b.invocation_ratio))
                .then_with(|| by_params(a, b))
        })
        .map(|p| (*p, false))
}

/// Exhaustive sweep of `t_grid × d_grid` over a reference sequence.
pub fn calibrate_parameters(
    frames: &[Frame],
    psnr_floor: f64,
    t_grid: &[f64],
    d_grid: &[usize],
) -> Result<Calibration> {
    if t_grid.is_empty() || d_grid.is_empty() {
        return Err(Error::invalid("calibration grids must be non-empty"));
    }
    if frames.len() < 2 {
        return Err(Error::invalid("calibration needs at least two frames"));
    }
    if psnr_floor.is_nan() {
        return Err(Error::invalid("PSNR floor must be a number"));
    }
    let params = t_grid
        .iter()
        .flat_map(|&t| d_grid.iter().map(move |&d| ControllerParams::new(t, d)))
        .collect::<Result<Vec<_>>>()?;
    let grid = params
        .par_iter()
        .map(|&p| {
            evaluate(frames, p).map(|s| CalibrationPoint {
                t: p.t,
                d: p.d,
                mean_psnr_db: s.mean_psnr_db,
                invocation_ratio: s.invocation_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (best, meets_floor) = select_point(&grid, psnr_floor).expect("grid is non-empty");
    Ok(Calibration {
        t: best.t,
        d: best.d,
        mean_psnr_db: best.mean_psnr_db,
        invocation_ratio: best.invocation_ratio,
        meets_floor,
        psnr_floor_db: psnr_floor,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::TileState;

    fn ramp_tile() -> Vec<Color> {
        (0..256)
            .map(|i| Color::gray(((i % 16) * 17) as u8))
            .collect()
    }

    #[test]
    fn full_rate_is_identity() {
        let t = ramp_tile();
        assert_eq!(simulate_tile(&t, 16, SamplingRate::Full).unwrap(), t);
    }

    #[test]
    fn constant_tile_survives_any_rate() {
        let t = vec![Color::rgb(3, 4, 5); 256];
        assert_eq!(simulate_tile(&t, 16, SamplingRate::Sixteenth).unwrap(), t);
    }

    #[test]
    fn quarter_rate_samples_offset_one() {
        let out = simulate_tile(&ramp_tile(), 16, SamplingRate::Quarter).unwrap();
        assert_eq!(out[0], Color::gray(17));
        assert_eq!(out[1], Color::gray(17));
        assert_eq!(out[2], Color::gray(51));
        let out = simulate_tile(&ramp_tile(), 16, SamplingRate::Sixteenth).unwrap();
        assert_eq!(out[3], Color::gray(34));
        assert_eq!(out[4], Color::gray(102));
    }

    #[test]
    fn simulate_tile_rejects_bad_size() {
        assert!(simulate_tile(&[Color::BLACK; 10], 16, SamplingRate::Full).is_err());
    }

    #[test]
    fn mismatched_sequence() {
        let frames = vec![
            Frame::filled(16, 16, Color::BLACK).unwrap(),
            Frame::filled(32, 16, Color::BLACK).unwrap(),
        ];
        let cfg = ReplayConfig::new(ControllerParams::new(1.0, 1).unwrap());
        assert!(matches!(
            simulate_sequence(&frames, &cfg),
            Err(Error::InvalidArgument(_))
        ));
        assert!(simulate_sequence(&[], &cfg).is_err());
    }

    #[test]
    fn constant_sequence_converges() {
        let frames = vec![Frame::filled(48, 32, Color::rgb(90, 30, 200)).unwrap(); 10];
        let cfg = ReplayConfig::new(ControllerParams::new(1.0, 1).unwrap());
        let out = simulate_sequence(&frames, &cfg).unwrap();
        assert_eq!(out.output_frames, frames);
        assert_eq!(out.srt_trace[4].count(TileState::Sixteenth), 6);
        assert_eq!(out.report.per_frame[4].shader_invocations, 6 * 16);
    }

    #[test]
    fn session_rejects_other_tile_sizes() {
        let mut cfg = ReplayConfig::new(ControllerParams::new(1.0, 1).unwrap());
        cfg.tile_size = 8;
        assert!(ReplaySession::new(cfg).is_err());
    }

    #[test]
    fn selection_rules() {
        let pt = |t, d, psnr, ratio| CalibrationPoint {
            t,
            d,
            mean_psnr_db: psnr,
            invocation_ratio: ratio,
        };
        let grid = [
            pt(4.0, 2, 45.0, 0.5),
            pt(2.0, 3, 45.0, 0.5),
            pt(2.0, 1, 41.0, 0.5),
            pt(8.0, 1, 30.0, 0.1),
        ];
        let (best, ok) = select_point(&grid, 40.0).unwrap();
        assert!(ok);
        assert_eq!((best.t, best.d), (2.0, 1));

        let (best, ok) = select_point(&grid, 50.0).unwrap();
        assert!(!ok);
        assert_eq!((best.t, best.d), (2.0, 3));
    }

    #[test]
    fn calibrate_rejects_bad_input() {
        let frames = vec![Frame::filled(16, 16, Color::BLACK).unwrap(); 2];
        assert!(calibrate_parameters(&frames, 40.0, &[], &[1]).is_err());
        assert!(calibrate_parameters(&frames, 40.0, &[1.0], &[]).is_err());
        assert!(calibrate_parameters(&frames[..1], 40.0, &[1.0], &[1]).is_err());
        assert!(calibrate_parameters(&frames, 40.0, &[-1.0], &[1]).is_err());
    }
}
