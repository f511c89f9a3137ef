//! Per-tile sampling-rate controller.
//!
//! Every tile carries one of five states in the Sampling Rate Table (SRT).
//! After a tile is analyzed, its MaxC is compared against the threshold `T`:
//! a detailed tile (`MaxC > T`) goes straight back to full rate, while a
//! smooth tile (`MaxC <= T`) moves one step down the ladder
//!
//! ```text
//! Full -> Down1Candidate -> Quarter -> Down2Candidate -> Sixteenth
//! ```
//!
//! The two candidate states keep the current rate for one extra frame before
//! the rate actually drops. The new state governs the *next* frame.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// One sample per `n × n` pixel block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SamplingRate {
    Full,
    Quarter,
    Sixteenth,
}

impl SamplingRate {
    pub const ALL: [SamplingRate; 3] = [
        SamplingRate::Full,
        SamplingRate::Quarter,
        SamplingRate::Sixteenth,
    ];

    /// Block side `n`.
    pub fn side(self) -> usize {
        match self {
            SamplingRate::Full => 1,
            SamplingRate::Quarter => 2,
            SamplingRate::Sixteenth => 4,
        }
    }

    pub fn from_side(n: usize) -> Result<Self> {
        match n {
            1 => Ok(SamplingRate::Full),
            2 => Ok(SamplingRate::Quarter),
            4 => Ok(SamplingRate::Sixteenth),
            _ => Err(Error::invalid(format!(
                "unsupported sampling grid side {n}"
            ))),
        }
    }

    /// Shaded samples for a full tile of side `tile_size`.
    pub fn superfragments_per_tile(self, tile_size: usize) -> usize {
        let per_side = tile_size / self.side();
        per_side * per_side
    }
}

impl fmt::Display for SamplingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.side();
        write!(f, "1/{n}x{n}")
    }
}

/// FSM state of one tile, stored in 3 bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[repr(u8)]
pub enum TileState {
    #[default]
    Full = 0,
    Down1Candidate = 1,
    Quarter = 2,
    Down2Candidate = 3,
    Sixteenth = 4,
}

impl TileState {
    pub const ALL: [TileState; 5] = [
        TileState::Full,
        TileState::Down1Candidate,
        TileState::Quarter,
        TileState::Down2Candidate,
        TileState::Sixteenth,
    ];

    pub const BITS: u32 = 3;

    pub fn encode(self) -> u8 {
        self as u8
    }

    pub fn decode(bits: u8) -> Result<Self> {
        TileState::ALL
            .get(usize::from(bits))
            .copied()
            .ok_or_else(|| Error::invalid(format!("invalid tile state encoding {bits}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            TileState::Full => "FULL",
            TileState::Down1Candidate => "DOWN1_CANDIDATE",
            TileState::Quarter => "QUARTER",
            TileState::Down2Candidate => "DOWN2_CANDIDATE",
            TileState::Sixteenth => "SIXTEENTH",
        }
    }

    /// Next rung down the ladder; the bottom rung stays put.
    fn step_down(self) -> Self {
        match self {
            TileState::Full => TileState::Down1Candidate,
            TileState::Down1Candidate => TileState::Quarter,
            TileState::Quarter => TileState::Down2Candidate,
            TileState::Down2Candidate | TileState::Sixteenth => TileState::Sixteenth,
        }
    }
}

impl fmt::Display for TileState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampling rate a state renders at.
pub fn rate_of(state: TileState) -> SamplingRate {
    match state {
        TileState::Full | TileState::Down1Candidate => SamplingRate::Full,
        TileState::Quarter | TileState::Down2Candidate => SamplingRate::Quarter,
        TileState::Sixteenth => SamplingRate::Sixteenth,
    }
}

/// Threshold `T` on MaxC and number `D` of excluded low-frequency diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControllerParams {
    pub t: f64,
    pub d: usize,
}

/// Largest meaningful `D` for 16×16 tiles.
pub const MAX_DIAGONALS: usize = 31;

impl ControllerParams {
    pub fn new(t: f64, d: usize) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::invalid(format!("threshold T must be >= 0, got {t}")));
        }
        if d > MAX_DIAGONALS {
            return Err(Error::invalid(format!(
                "diagonal count D must be in [0, {MAX_DIAGONALS}], got {d}"
            )));
        }
        Ok(ControllerParams { t, d })
    }
}

/// Transition function. `max_c <= t` counts as smooth.
pub fn next_state(current: TileState, max_c: f64, params: &ControllerParams) -> TileState {
    if max_c > params.t {
        TileState::Full
    } else {
        current.step_down()
    }
}

/// SRT size for `tile_count` tiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrtStorage {
    pub bits: u64,
    pub kilobytes: f64,
}

pub fn srt_storage(tile_count: usize) -> SrtStorage {
    let bits = u64::from(TileState::BITS) * tile_count as u64;
    SrtStorage {
        bits,
        kilobytes: bits as f64 / 8.0 / 1024.0,
    }
}

/// Per-tile states carried from one frame to the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingRateTable {
    states: Vec<TileState>,
}

impl SamplingRateTable {
    /// Fresh table, every tile at full rate.
    pub fn new(tile_count: usize) -> Self {
        SamplingRateTable {
            states: vec![TileState::Full; tile_count],
        }
    }

    pub fn from_states(states: Vec<TileState>) -> Self {
        SamplingRateTable { states }
    }

    pub fn tile_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[TileState] {
        &self.states
    }

    pub fn state(&self, tile_id: usize) -> TileState {
        self.states[tile_id]
    }

    pub fn rate(&self, tile_id: usize) -> SamplingRate {
        rate_of(self.states[tile_id])
    }

    pub fn storage(&self) -> SrtStorage {
        srt_storage(self.states.len())
    }

    /// Tile counts per state, indexed by [`TileState::encode`].
    pub fn histogram(&self) -> [u64; 5] {
        let mut h = [0u64; 5];
        for s in &self.states {
            h[usize::from(s.encode())] += 1;
        }
        h
    }

    /// Packs the table at 3 bits per entry, little-endian bit order.
    pub fn pack(&self) -> Vec<u8> {
        let total_bits = self.states.len() * TileState::BITS as usize;
        let mut out = vec![0u8; total_bits.div_ceil(8)];
        for (i, s) in self.states.iter().enumerate() {
            for b in 0..TileState::BITS as usize {
                if s.encode() >> b & 1 == 1 {
                    let bit = i * TileState::BITS as usize + b;
                    out[bit / 8] |= 1 << (bit % 8);
                }
            }
        }
        out
    }

    pub fn unpack(bytes: &[u8], tile_count: usize) -> Result<Self> {
        let width = TileState::BITS as usize;
        if bytes.len() * 8 < tile_count * width {
            return Err(Error::invalid("packed table is too short"));
        }
        let states = (0..tile_count)
            .map(|i| {
                let mut v = 0u8;
                for b in 0..width {
                    let bit = i * width + b;
                    v |= (bytes[bit / 8] >> (bit % 8) & 1) << b;
                }
                TileState::decode(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SamplingRateTable { states })
    }

    /// `tile_id,state,n` lines with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tile_id,state,n\n");
        for (i, s) in self.states.iter().enumerate() {
            out.push_str(&format!("{i},{},{}\n", s.name(), rate_of(*s).side()));
        }
        out
    }
}

/// Applies [`next_state`] to every tile, producing next frame's table.
pub fn update_table(
    srt: &SamplingRateTable,
    max_c_per_tile: &[f64],
    params: &ControllerParams,
) -> Result<SamplingRateTable> {
    if max_c_per_tile.len() != srt.tile_count() {
        return Err(Error::invalid(format!(
            "got {} MaxC values for {} tiles",
            max_c_per_tile.len(),
            srt.tile_count()
        )));
    }
    Ok(SamplingRateTable {
        states: srt
            .states
            .iter()
            .zip(max_c_per_tile)
            .map(|(&s, &m)| next_state(s, m, params))
            .collect(),
    })
}
