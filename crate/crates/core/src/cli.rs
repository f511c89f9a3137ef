//! Batch front end: argument parsing, experiment runs, and artifact output.
//!
//! Every run writes its artifacts into the output directory and finishes by
//! writing `manifest.txt`, which lists every other emitted file. A missing
//! manifest means the run did not complete.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::corpus::{self, MixedCorpus};
use crate::dct::{build_kernel, dct2d_rowcol};
use crate::error::{Error, Result};
use crate::frame::{extract_tile, TileGrid, TILE_SIZE};
use crate::image_io::{gray_extension, load_sequence, write_frame, write_gray, ImageFormat};
use crate::metrics::SequenceReport;
use crate::pipeline::{run_scene, RenderParams, Scene};
use crate::rate::{ControllerParams, SamplingRate, SamplingRateTable, MAX_DIAGONALS};
use crate::replay::{calibrate_parameters, ReplayConfig, ReplaySession};

/// Threshold picked by calibrating the bundled mixed corpus at a 40 dB floor
/// over [`DEFAULT_T_GRID`] × [`DEFAULT_D_GRID`].
pub const DEFAULT_T: f64 = 128.0;
/// Diagonal count picked by the same calibration run.
pub const DEFAULT_D: usize = 1;
/// Floor used to derive the defaults.
pub const DEFAULT_PSNR_FLOOR: f64 = 40.0;
pub const DEFAULT_T_GRID: &[f64] = &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
pub const DEFAULT_D_GRID: &[usize] = &[1, 2, 3, 4, 6, 8];

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "DSR_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "dsr",
    version,
    about = "Per-tile dynamic sampling rate simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply rate control to a directory of pre-rendered frames.
    Replay(ReplayArgs),
    /// Render an animated scene file with the tile-based pipeline.
    Pipeline(PipelineArgs),
    /// Sweep T and D over a frame directory and pick the cheapest pair
    /// meeting a PSNR floor.
    Calibrate(CalibrateArgs),
    /// Write one of the bundled synthetic sequences.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct ControllerArgs {
    /// MaxC threshold T.
    #[arg(long = "threshold-t", value_name = "T")]
    pub threshold_t: Option<f64>,
    /// Number D of excluded low-frequency diagonals.
    #[arg(long = "diagonals-d", value_name = "D")]
    pub diagonals_d: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Do not write output frames.
    #[arg(long)]
    pub no_frames: bool,
    /// Do not write rate-map images.
    #[arg(long)]
    pub no_rate_maps: bool,
    /// Write a per-frame SRT snapshot CSV.
    #[arg(long)]
    pub srt_csv: bool,
    /// Dump DCT coefficients of every tile of the first frame as CSV.
    #[arg(long)]
    pub dct_dump: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub controller: ControllerArgs,
    #[command(flatten)]
    pub emit: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Scene file.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub controller: ControllerArgs,
    #[command(flatten)]
    pub emit: OutputArgs,
    /// Source-over alpha blending instead of opaque overwrite.
    #[arg(long)]
    pub blend: bool,
    /// Image format for rendered frames.
    #[arg(long, default_value = "ppm", value_parser = ["ppm", "png"])]
    pub format: String,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Minimum mean PSNR in dB; `inf` demands exact output.
    #[arg(long, default_value_t = DEFAULT_PSNR_FLOOR)]
    pub psnr_floor: f64,
    /// Comma-separated thresholds to try.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    /// Comma-separated diagonal counts to try.
    #[arg(long, value_delimiter = ',')]
    pub d_grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusKind {
    Mixed,
    Constant,
    Checkerboard,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "mixed")]
    pub kind: CorpusKind,
    #[arg(long, default_value = "ppm", value_parser = ["ppm", "png"])]
    pub format: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Replay,
    Pipeline,
    Calibrate,
    Corpus,
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    #[serde(skip)]
    pub output: PathBuf,
    pub t: f64,
    pub d: usize,
    /// Whether `t`/`d` came from the built-in defaults.
    pub t_is_default: bool,
    pub d_is_default: bool,
    pub tile_size: usize,
    pub emit_frames: bool,
    pub emit_rate_maps: bool,
    pub emit_srt_csv: bool,
    pub emit_dct_dump: bool,
    pub blend: bool,
    #[serde(skip)]
    pub frame_format: ImageFormat,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub t_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub d_grid: Vec<usize>,
    #[serde(serialize_with = "crate::metrics::serialize_db")]
    pub psnr_floor: f64,
    #[serde(skip)]
    pub corpus: CorpusKind,
}

fn parse_format(s: &str) -> ImageFormat {
    if s == "png" {
        ImageFormat::Png
    } else {
        ImageFormat::Ppm
    }
}

impl RunConfig {
    fn base(mode: Mode, input: Option<PathBuf>, output: PathBuf) -> Self {
        RunConfig {
            mode,
            input,
            output,
            t: DEFAULT_T,
            d: DEFAULT_D,
            t_is_default: true,
            d_is_default: true,
            tile_size: TILE_SIZE,
            emit_frames: true,
            emit_rate_maps: true,
            emit_srt_csv: false,
            emit_dct_dump: false,
            blend: false,
            frame_format: ImageFormat::Ppm,
            t_grid: Vec::new(),
            d_grid: Vec::new(),
            psnr_floor: DEFAULT_PSNR_FLOOR,
            corpus: CorpusKind::Mixed,
        }
    }

    fn apply(&mut self, c: &ControllerArgs, e: &OutputArgs) {
        if let Some(t) = c.threshold_t {
            self.t = t;
            self.t_is_default = false;
        }
        if let Some(d) = c.diagonals_d {
            self.d = d;
            self.d_is_default = false;
        }
        self.emit_frames = !e.no_frames;
        self.emit_rate_maps = !e.no_rate_maps;
        self.emit_srt_csv = e.srt_csv;
        self.emit_dct_dump = e.dct_dump;
    }

    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let cfg = match &cli.command {
            Command::Replay(a) => {
                let mut c = RunConfig::base(Mode::Replay, Some(a.input.clone()), a.output.clone());
                c.apply(&a.controller, &a.emit);
                c
            }
            Command::Pipeline(a) => {
                let mut c =
                    RunConfig::base(Mode::Pipeline, Some(a.input.clone()), a.output.clone());
                c.apply(&a.controller, &a.emit);
                c.blend = a.blend;
                c.frame_format = parse_format(&a.format);
                c
            }
            Command::Calibrate(a) => {
                let mut c =
                    RunConfig::base(Mode::Calibrate, Some(a.input.clone()), a.output.clone());
                c.psnr_floor = a.psnr_floor;
                c.t_grid = a.t_grid.clone().unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
                c.d_grid = a.d_grid.clone().unwrap_or_else(|| DEFAULT_D_GRID.to_vec());
                c
            }
            Command::Corpus(a) => {
                let mut c = RunConfig::base(Mode::Corpus, None, a.output.clone());
                c.corpus = a.kind;
                c.frame_format = parse_format(&a.format);
                c
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks mode-specific requirements before any work starts.
    pub fn validate(&self) -> Result<()> {
        ControllerParams::new(self.t, self.d)?;
        if self.tile_size != TILE_SIZE {
            return Err(Error::invalid(format!("tile size must be {TILE_SIZE}")));
        }
        match self.mode {
            Mode::Replay | Mode::Pipeline | Mode::Calibrate => {
                if self.input.is_none() {
                    return Err(Error::invalid("an input path is required"));
                }
            }
            Mode::Corpus => {}
        }
        if self.mode == Mode::Calibrate {
            if self.t_grid.is_empty() || self.d_grid.is_empty() {
                return Err(Error::invalid("calibration grids must be non-empty"));
            }
            if self.psnr_floor.is_nan() {
                return Err(Error::invalid("PSNR floor must be a number"));
            }
            for &t in &self.t_grid {
                ControllerParams::new(t, 0)?;
            }
            if let Some(&d) = self.d_grid.iter().find(|&&d| d > MAX_DIAGONALS) {
                return Err(Error::invalid(format!(
                    "grid diagonal count {d} exceeds {MAX_DIAGONALS}"
                )));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> ControllerParams {
        ControllerParams {
            t: self.t,
            d: self.d,
        }
    }

    fn input(&self) -> &Path {
        self.input.as_deref().expect("validated")
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub report: Option<SequenceReport>,
    pub message: String,
}

/// Collects emitted files so the manifest can list them.
struct Artifacts {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        // A stale manifest from an earlier run must not vouch for this one.
        let manifest = root.join("manifest.txt");
        if manifest.exists() {
            fs::remove_file(&manifest).map_err(|e| Error::io(&manifest, e))?;
        }
        Ok(Artifacts {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn dir(&self, name: &str) -> Result<PathBuf> {
        let d = self.root.join(name);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        Ok(d)
    }

    fn text(&mut self, rel: &str, contents: &str) -> Result<()> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&p, contents).map_err(|e| Error::io(&p, e))?;
        self.files.push(p);
        Ok(())
    }

    fn record(&mut self, p: PathBuf) {
        self.files.push(p);
    }

    fn finish(mut self) -> Result<Vec<PathBuf>> {
        let mut listing = String::new();
        for f in &self.files {
            let rel = f.strip_prefix(&self.root).unwrap_or(f);
            listing.push_str(&rel.to_string_lossy());
            listing.push('\n');
        }
        let p = self.root.join("manifest.txt");
        fs::write(&p, listing).map_err(|e| Error::io(&p, e))?;
        self.files.push(p);
        Ok(self.files)
    }
}

/// Grayscale image of a table: 255 at full rate, darker at lower rates.
pub fn rate_map(grid: &TileGrid, srt: &SamplingRateTable) -> Vec<u8> {
    let (w, h) = (grid.frame_width(), grid.frame_height());
    let ts = grid.tile_size();
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let id = (y / ts) * grid.cols() + x / ts;
            out[y * w + x] = match srt.rate(id) {
                SamplingRate::Full => 255,
                SamplingRate::Quarter => 128,
                SamplingRate::Sixteenth => 32,
            };
        }
    }
    out
}

fn frame_stem(path: &Path, index: usize) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("frame_{:04}", index + 1))
}

#[derive(Serialize)]
struct ReportConfig<'a> {
    #[serde(flatten)]
    run: &'a RunConfig,
    default_t: f64,
    default_d: usize,
}

fn report_config(cfg: &RunConfig) -> ReportConfig<'_> {
    ReportConfig {
        run: cfg,
        default_t: DEFAULT_T,
        default_d: DEFAULT_D,
    }
}

fn run_replay(cfg: &RunConfig) -> Result<RunSummary> {
    let (paths, frames, format) = load_sequence(cfg.input())?;
    let mut art = Artifacts::new(&cfg.output)?;
    let mut replay_cfg = ReplayConfig::new(cfg.params());
    replay_cfg.emit_frames = cfg.emit_frames;
    replay_cfg.emit_rate_maps = cfg.emit_rate_maps;
    let mut session = ReplaySession::new(replay_cfg)?;
    let mut reports = Vec::with_capacity(frames.len());

    for (i, (path, frame)) in paths.iter().zip(&frames).enumerate() {
        let step = session.step(frame)?;
        let grid = *session.grid().expect("grid set after first step");
        let stem = frame_stem(path, i);
        if cfg.emit_frames {
            let p = art
                .dir("frames")?
                .join(format!("{stem}.{}", format.extension()));
            write_frame(&p, &step.output, format)?;
            art.record(p);
        }
        if cfg.emit_rate_maps {
            let p = art
                .dir("rate_maps")?
                .join(format!("{stem}.{}", gray_extension(format)));
            write_gray(
                &p,
                grid.frame_width(),
                grid.frame_height(),
                &rate_map(&grid, &step.table),
                format,
            )?;
            art.record(p);
        }
        if cfg.emit_srt_csv {
            art.text(&format!("srt/{stem}.csv"), &step.table.to_csv())?;
        }
        if cfg.emit_dct_dump && i == 0 {
            dump_dct(&mut art, &step.output, &grid)?;
        }
        reports.push(step.report);
    }
    finish_report(cfg, art, reports)
}

fn dump_dct(art: &mut Artifacts, frame: &crate::frame::Frame, grid: &TileGrid) -> Result<()> {
    let kernel = build_kernel(grid.tile_size())?;
    for id in 0..grid.tile_count() {
        let view = extract_tile(frame, grid, id)?;
        let (coeffs, _) = dct2d_rowcol(&view.luma, &kernel)?;
        art.text(&format!("dct/tile_{id:05}.csv"), &coeffs.to_csv())?;
    }
    Ok(())
}

fn finish_report(
    cfg: &RunConfig,
    mut art: Artifacts,
    reports: Vec<crate::metrics::FrameReport>,
) -> Result<RunSummary> {
    let report = crate::metrics::aggregate(reports)?;
    art.text("report.json", &report.to_json(&report_config(cfg)))?;
    art.text("report.csv", &report.to_csv())?;
    let s = report.summary;
    let message = format!(
        "frames={} invocation_ratio={:.4} savings={:.4} mean_psnr_db={}",
        report.per_frame.len(),
        s.invocation_ratio,
        s.savings,
        if s.mean_psnr_db.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.3}", s.mean_psnr_db)
        }
    );
    Ok(RunSummary {
        files: art.finish()?,
        report: Some(report),
        message,
    })
}

fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary> {
    let scene = Scene::load(cfg.input())?;
    let params = RenderParams {
        controller: cfg.params(),
        clear: scene.clear,
        blend: cfg.blend,
    };
    let outcome = run_scene(&scene, &params, cfg.tile_size)?;
    let grid = TileGrid::for_frame(&outcome.frames[0], cfg.tile_size)?;
    let mut art = Artifacts::new(&cfg.output)?;
    let format = cfg.frame_format;
    for (i, (frame, table)) in outcome.frames.iter().zip(&outcome.tables).enumerate() {
        let stem = format!("frame_{:04}", i + 1);
        if cfg.emit_frames {
            let p = art
                .dir("frames")?
                .join(format!("{stem}.{}", format.extension()));
            write_frame(&p, frame, format)?;
            art.record(p);
        }
        if cfg.emit_rate_maps {
            let p = art
                .dir("rate_maps")?
                .join(format!("{stem}.{}", gray_extension(format)));
            write_gray(
                &p,
                grid.frame_width(),
                grid.frame_height(),
                &rate_map(&grid, table),
                format,
            )?;
            art.record(p);
        }
        if cfg.emit_srt_csv {
            art.text(&format!("srt/{stem}.csv"), &table.to_csv())?;
        }
        if cfg.emit_dct_dump && i == 0 {
            dump_dct(&mut art, frame, &grid)?;
        }
    }
    finish_report(cfg, art, outcome.report.per_frame)
}

#[derive(Serialize)]
struct CalibrationDocument<'a> {
    config: ReportConfig<'a>,
    result: &'a crate::replay::Calibration,
}

fn run_calibrate(cfg: &RunConfig) -> Result<RunSummary> {
    let (_, frames, _) = load_sequence(cfg.input())?;
    let cal = calibrate_parameters(&frames, cfg.psnr_floor, &cfg.t_grid, &cfg.d_grid)?;
    let mut art = Artifacts::new(&cfg.output)?;
    let doc = CalibrationDocument {
        config: report_config(cfg),
        result: &cal,
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("calibration serializes");
    json.push('\n');
    art.text("calibration.json", &json)?;
    let message = format!(
        "t={} d={} invocation_ratio={:.4} savings={:.4} mean_psnr_db={} meets_floor={}",
        cal.t,
        cal.d,
        cal.invocation_ratio,
        1.0 - cal.invocation_ratio,
        if cal.mean_psnr_db.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.3}", cal.mean_psnr_db)
        },
        cal.meets_floor
    );
    Ok(RunSummary {
        files: art.finish()?,
        report: None,
        message,
    })
}

fn run_corpus(cfg: &RunConfig) -> Result<RunSummary> {
    let mixed = MixedCorpus::default();
    let frames = match cfg.corpus {
        CorpusKind::Mixed => mixed.generate()?,
        CorpusKind::Constant => corpus::constant(
            mixed.width,
            mixed.height,
            10,
            crate::frame::Color::rgb(90, 140, 200),
        )?,
        CorpusKind::Checkerboard => corpus::checkerboard(mixed.width, mixed.height, 10)?,
    };
    let mut art = Artifacts::new(&cfg.output)?;
    for p in corpus::write_sequence(&cfg.output, &frames, cfg.frame_format)? {
        art.record(p);
    }
    Ok(RunSummary {
        message: format!("wrote {} frames", frames.len()),
        files: art.finish()?,
        report: None,
    })
}

/// Runs one experiment. Honors [`WORKERS_ENV`] for the tile worker count.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let body = || match cfg.mode {
        Mode::Replay => run_replay(cfg),
        Mode::Pipeline => run_pipeline(cfg),
        Mode::Calibrate => run_calibrate(cfg),
        Mode::Corpus => run_corpus(cfg),
    };
    match std::env::var(WORKERS_ENV).ok() {
        Some(v) => {
            let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                Error::invalid(format!(
                    "{WORKERS_ENV} must be a positive integer, got `{v}`"
                ))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(e.to_string()))?;
            pool.install(body)
        }
        None => body(),
    }
}
