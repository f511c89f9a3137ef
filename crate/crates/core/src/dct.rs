//! Tile frequency analysis.
//!
//! The 2D DCT-II of an `n × n` block is computed as `K · X · Kᵀ` using a
//! precomputed kernel matrix, split into two 1D passes over a single scratch
//! buffer: pass one leaves `Aux = (K · X)ᵀ`, pass two leaves `(K · Aux)ᵀ`,
//! which is the coefficient matrix. Each pass stores its output lines as
//! rows, so the transposes come from the store order rather than an explicit
//! transpose step.
//!
//! [`dct2d_naive`] evaluates the separable double cosine sum directly and is
//! kept as an independent reference.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Number of compute lanes in the modeled analysis unit.
pub const FAU_LANES: usize = 4;

/// Precomputed DCT-II scale factors and cosines, row-major `n × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    k: Vec<f64>,
}

/// Scale factor of the orthonormal DCT-II for frequency index `p`.
#[inline]
pub fn alpha(p: usize, n: usize) -> f64 {
    if p == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Builds the `n × n` kernel matrix.
pub fn build_kernel(n: usize) -> Result<KernelMatrix> {
    if n == 0 {
        return Err(Error::invalid("kernel size must be at least 1"));
    }
    let nf = n as f64;
    let mut k = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            k.push(if p == 0 {
                1.0 / nf.sqrt()
            } else {
                (2.0 / nf).sqrt() * ((2 * q + 1) as f64 * PI * p as f64 / (2.0 * nf)).cos()
            });
        }
    }
    Ok(KernelMatrix { n, k })
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.k[p * self.n + q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.k
    }

    /// `max |K·Kᵀ − I|` over all entries.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|m| self.get(i, m) * self.get(j, m)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Scratch matrix shared by both passes.
#[derive(Debug, Clone)]
pub struct DctBuffer {
    n: usize,
    cells: Vec<f64>,
}

impl DctBuffer {
    pub fn new(n: usize) -> Self {
        DctBuffer {
            n,
            cells: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.n + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.cells
    }

    /// One pass of the unit: `self ← (K · src)ᵀ`.
    ///
    /// Line `j` of the source (its column `j`) is multiplied by the kernel
    /// and stored as row `j`, so the transpose comes from the store order.
    /// Lines are dealt to lanes round-robin; the schedule changes the op
    /// count bookkeeping only.
    fn run_pass(&mut self, kernel: &KernelMatrix, src: &[f64], macs: &mut u64) {
        let n = self.n;
        let mut staged = vec![0.0; n * n];
        let mut line = vec![0.0; n];
        for lane in 0..FAU_LANES.min(n) {
            for j in (lane..n).step_by(FAU_LANES) {
                for (m, v) in line.iter_mut().enumerate() {
                    *v = src[m * n + j];
                }
                let dst = &mut staged[j * n..(j + 1) * n];
                for (p, out) in dst.iter_mut().enumerate() {
                    let krow = &kernel.k[p * n..(p + 1) * n];
                    *out = krow.iter().zip(&line).map(|(a, b)| a * b).sum();
                }
                *macs += (n * n) as u64;
            }
        }
        self.cells = staged;
    }
}

fn check_block(input: &[f64], n: usize) -> Result<()> {
    if input.len() != n * n {
        return Err(Error::invalid(format!(
            "input block has {} samples, expected {n}x{n}",
            input.len()
        )));
    }
    Ok(())
}

/// Runs only the first pass, leaving `(K · input)ᵀ` in the buffer.
pub fn rowcol_first_pass(input: &[f64], kernel: &KernelMatrix) -> Result<DctBuffer> {
    check_block(input, kernel.n)?;
    let mut buffer = DctBuffer::new(kernel.n);
    let mut macs = 0;
    buffer.run_pass(kernel, input, &mut macs);
    Ok(buffer)
}

/// Row-column 2D DCT: `DCT = (K · (K · X)ᵀ)ᵀ = K · X · Kᵀ`.
pub fn dct2d_rowcol(input: &[f64], kernel: &KernelMatrix) -> Result<(DctCoefficients, FauOpCount)> {
    let n = kernel.n;
    check_block(input, n)?;
    let mut buffer = DctBuffer::new(n);
    let mut macs = 0u64;
    buffer.run_pass(kernel, input, &mut macs);
    let aux = std::mem::take(&mut buffer.cells);
    buffer.run_pass(kernel, &aux, &mut macs);

    Ok((
        DctCoefficients { n, c: buffer.cells },
        FauOpCount {
            multiply_accumulates: macs,
            passes: 2,
            lanes: FAU_LANES as u32,
            rows_per_lane: n.div_ceil(FAU_LANES) as u32,
        },
    ))
}

/// `n × n` coefficients; `get(p, q)` is vertical frequency `p`, horizontal
/// frequency `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctCoefficients {
    n: usize,
    c: Vec<f64>,
}

impl DctCoefficients {
    pub fn from_vec(n: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != n * n {
            return Err(Error::invalid(format!(
                "coefficient matrix has {} entries, expected {}",
                c.len(),
                n * n
            )));
        }
        Ok(DctCoefficients { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.c[p * self.n + q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn energy(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum()
    }

    /// Row-major CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.c.chunks(self.n) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Multiply-accumulate count of one transform on the lane-parallel unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FauOpCount {
    pub multiply_accumulates: u64,
    pub passes: u32,
    pub lanes: u32,
    pub rows_per_lane: u32,
}

impl FauOpCount {
    /// Steps each lane runs sequentially for a whole tile (both passes).
    pub fn lane_steps(&self) -> u64 {
        u64::from(self.passes) * u64::from(self.rows_per_lane)
    }
}

/// Direct evaluation of the separable double cosine sum.
pub fn dct2d_naive(input: &[f64], n: usize) -> Result<DctCoefficients> {
    if n == 0 {
        return Err(Error::invalid("block size must be at least 1"));
    }
    check_block(input, n)?;
    let nf = n as f64;
    let mut c = vec![0.0; n * n];
    for p in 0..n {
        for q in 0..n {
            let mut outer = 0.0;
            for m in 0..n {
                let mut inner = 0.0;
                for k in 0..n {
                    inner +=
                        input[m * n + k] * ((2 * k + 1) as f64 * PI * q as f64 / (2.0 * nf)).cos();
                }
                outer += ((2 * m + 1) as f64 * PI * p as f64 / (2.0 * nf)).cos() * inner;
            }
            c[p * n + q] = alpha(p, n) * alpha(q, n) * outer;
        }
    }
    Ok(DctCoefficients { n, c })
}

/// Largest coefficient magnitude outside the `d` lowest anti-diagonals
/// (those with `p + q < d`). Zero when nothing is retained.
pub fn max_coefficient(coeffs: &DctCoefficients, d: usize) -> Result<f64> {
    let n = coeffs.n;
    let limit = 2 * n - 1;
    if d > limit {
        return Err(Error::invalid(format!(
            "excluded diagonal count {d} exceeds {limit}"
        )));
    }
    let mut best = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            if p + q >= d {
                best = best.max(coeffs.get(p, q).abs());
            }
        }
    }
    Ok(best)
}

/// MaxC of a luma block in one call.
pub fn tile_max_c(luma: &[f64], kernel: &KernelMatrix, d: usize) -> Result<f64> {
    let (coeffs, _) = dct2d_rowcol(luma, kernel)?;
    max_coefficient(&coeffs, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel16() -> KernelMatrix {
        build_kernel(16).unwrap()
    }

    #[test]
    fn kernel_values() {
        let k = kernel16();
        for q in 0..16 {
            assert_eq!(k.get(0, q), 0.25);
        }
        let expected = (2.0f64 / 16.0).sqrt() * (PI / 32.0).cos();
        assert!((k.get(1, 0) - expected).abs() < 1e-15);
        assert!(k.orthonormality_error() <= 1e-12);
    }

    #[test]
    fn kernel_rejects_zero() {
        assert!(matches!(build_kernel(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn constant_tile_is_pure_dc() {
        let (c, ops) = dct2d_rowcol(&[1.0; 256], &kernel16()).unwrap();
        assert!((c.get(0, 0) - 16.0).abs() < 1e-9);
        for p in 0..16 {
            for q in 0..16 {
                if p + q > 0 {
                    assert!(c.get(p, q).abs() <= 1e-9, "({p},{q}) = {}", c.get(p, q));
                }
            }
        }
        assert_eq!(ops.multiply_accumulates, 8192);
        assert_eq!((ops.passes, ops.lanes, ops.rows_per_lane), (2, 4, 4));
        assert_eq!(ops.lane_steps(), 8);
    }

    #[test]
    fn zero_tile() {
        let (c, _) = dct2d_rowcol(&[0.0; 256], &kernel16()).unwrap();
        assert!(c.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn naive_dc_and_impulse() {
        let c = dct2d_naive(&[3.5; 256], 16).unwrap();
        assert!((c.get(0, 0) - 56.0).abs() < 1e-9);

        let mut impulse = [0.0; 256];
        impulse[0] = 1.0;
        let c = dct2d_naive(&impulse, 16).unwrap();
        for p in 0..16 {
            for q in 0..16 {
                let expected = alpha(p, 16)
                    * alpha(q, 16)
                    * (PI * p as f64 / 32.0).cos()
                    * (PI * q as f64 / 32.0).cos();
                assert!((c.get(p, q) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn horizontal_cosine_lands_in_column_three() {
        let mut input = [0.0; 256];
        for m in 0..16 {
            for n in 0..16 {
                input[m * 16 + n] = ((2 * n + 1) as f64 * PI * 3.0 / 32.0).cos();
            }
        }
        let c = dct2d_naive(&input, 16).unwrap();
        let (mut best, mut at) = (0.0, (0, 0));
        for p in 0..16 {
            for q in 0..16 {
                if c.get(p, q).abs() > best {
                    best = c.get(p, q).abs();
                    at = (p, q);
                }
            }
        }
        assert_eq!(at, (0, 3));
    }

    #[test]
    fn first_pass_holds_transposed_kernel_product() {
        let k = kernel16();
        let input: Vec<f64> = (0..256).map(|i| ((i * 37) % 255) as f64).collect();
        let buf = rowcol_first_pass(&input, &k).unwrap();
        for p in 0..16 {
            for m in 0..16 {
                let km: f64 = (0..16).map(|r| k.get(p, r) * input[r * 16 + m]).sum();
                assert!((buf.get(m, p) - km).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn checkerboard_max_c() {
        let input: Vec<f64> = (0..256)
            .map(|i| {
                if (i / 16 + i % 16) % 2 == 0 {
                    0.0
                } else {
                    255.0
                }
            })
            .collect();
        let c = dct2d_naive(&input, 16).unwrap();
        let mut brute = 0.0f64;
        for p in 0..16 {
            for q in 0..16 {
                if p + q >= 2 {
                    brute = brute.max(c.get(p, q).abs());
                }
            }
        }
        assert_eq!(max_coefficient(&c, 2).unwrap(), brute);
        assert_eq!(brute, c.get(15, 15).abs());
    }

    #[test]
    fn max_c_diagonal_exclusion() {
        let (c, _) = dct2d_rowcol(&[7.0; 256], &kernel16()).unwrap();
        assert!(max_coefficient(&c, 1).unwrap() <= 1e-9);
        assert!((max_coefficient(&c, 0).unwrap() - 112.0).abs() < 1e-9);
        assert_eq!(max_coefficient(&c, 31).unwrap(), 0.0);
        assert!(matches!(
            max_coefficient(&c, 32),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let k = kernel16();
        assert!(matches!(
            dct2d_rowcol(&[0.0; 255], &k),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            dct2d_naive(&[0.0; 64], 16),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn csv_dump_shape() {
        let (c, _) = dct2d_rowcol(&[1.0; 256], &kernel16()).unwrap();
        let csv = c.to_csv();
        assert_eq!(csv.lines().count(), 16);
        assert!(csv.lines().all(|l| l.split(',').count() == 16));
    }
}
