//! Quality and cost accounting.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::rate::TileState;

/// Mean squared error over RGB channels of two equally sized frames.
/// Alpha is ignored.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::invalid(format!(
            "cannot compare {}x{} with {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(p, q)| {
            let dr = i64::from(p.r) - i64::from(q.r);
            let dg = i64::from(p.g) - i64::from(q.g);
            let db = i64::from(p.b) - i64::from(q.b);
            (dr * dr + dg * dg + db * db) as u64
        })
        .sum();
    Ok(sum as f64 / (3 * a.pixels().len()) as f64)
}

/// PSNR in dB for 8-bit content; `f64::INFINITY` when `mse == 0`.
pub fn psnr(mse_value: f64) -> Result<f64> {
    if mse_value.is_nan() || mse_value < 0.0 {
        return Err(Error::invalid(format!("mse must be >= 0, got {mse_value}")));
    }
    if mse_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0f64 * 255.0 / mse_value).log10())
}

/// Serializes non-finite dB values as the string `"inf"`.
pub(crate) fn serialize_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn format_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Tile counts per FSM state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateHistogram(pub [u64; 5]);

impl RateHistogram {
    pub fn count(&self, state: TileState) -> u64 {
        self.0[usize::from(state.encode())]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl Serialize for RateHistogram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(5))?;
        for state in TileState::ALL {
            m.serialize_entry(state.name(), &self.count(state))?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub frame_index: usize,
    pub mse: f64,
    #[serde(serialize_with = "serialize_db")]
    pub psnr_db: f64,
    pub shader_invocations: u64,
    pub baseline_invocations: u64,
    pub depth_ops: u64,
    pub color_ops: u64,
    /// States the frame was rendered with.
    pub rate_histogram: RateHistogram,
}

impl FrameReport {
    pub fn invocation_ratio(&self) -> f64 {
        if self.baseline_invocations == 0 {
            1.0
        } else {
            self.shader_invocations as f64 / self.baseline_invocations as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    /// Mean over frames with finite PSNR; `inf` only if every frame is exact.
    #[serde(serialize_with = "serialize_db")]
    pub mean_psnr_db: f64,
    pub invocation_ratio: f64,
    pub savings: f64,
    pub shader_invocations: u64,
    pub baseline_invocations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub per_frame: Vec<FrameReport>,
    pub summary: Summary,
}

#[derive(Serialize)]
struct ReportDocument<'a, C: Serialize> {
    config: &'a C,
    per_frame: &'a [FrameReport],
    summary: &'a Summary,
}

/// Folds per-frame reports into sequence totals.
pub fn aggregate(reports: Vec<FrameReport>) -> Result<SequenceReport> {
    if reports.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty report list"));
    }
    let shader_invocations: u64 = reports.iter().map(|r| r.shader_invocations).sum();
    let baseline_invocations: u64 = reports.iter().map(|r| r.baseline_invocations).sum();
    let invocation_ratio = if baseline_invocations == 0 {
        1.0
    } else {
        shader_invocations as f64 / baseline_invocations as f64
    };
    let finite: Vec<f64> = reports
        .iter()
        .map(|r| r.psnr_db)
        .filter(|v| v.is_finite())
        .collect();
    let mean_psnr_db = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    Ok(SequenceReport {
        summary: Summary {
            mean_psnr_db,
            invocation_ratio,
            savings: 1.0 - invocation_ratio,
            shader_invocations,
            baseline_invocations,
        },
        per_frame: reports,
    })
}

impl SequenceReport {
    /// `{config, per_frame, summary}` as pretty-printed JSON.
    pub fn to_json<C: Serialize>(&self, config: &C) -> String {
        let doc = ReportDocument {
            config,
            per_frame: &self.per_frame,
            summary: &self.summary,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "frame_index,mse,psnr_db,shader_invocations,baseline_invocations,depth_ops,color_ops,full,down1_candidate,quarter,down2_candidate,sixteenth\n",
        );
        for r in &self.per_frame {
            let h = r.rate_histogram.0;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.frame_index,
                r.mse,
                format_db(r.psnr_db),
                r.shader_invocations,
                r.baseline_invocations,
                r.depth_ops,
                r.color_ops,
                h[0],
                h[1],
                h[2],
                h[3],
                h[4]
            ));
        }
        out
    }
}
