//! Sweeps T and D over the bundled mixed corpus and prints every grid point.
//!
//! This is the run that fixes the CLI defaults in `cli::DEFAULT_T` and
//! `cli::DEFAULT_D`.

use dsr_core::cli::{DEFAULT_D_GRID, DEFAULT_PSNR_FLOOR, DEFAULT_T_GRID};
use dsr_core::corpus::MixedCorpus;
use dsr_core::replay::calibrate_parameters;

fn main() -> dsr_core::Result<()> {
    let frames = MixedCorpus::default().generate()?;
    let args: Vec<String> = std::env::args().skip(1).collect();
    let t_grid: Vec<f64> = match args.first() {
        Some(s) => s.split(',').map(|v| v.parse().expect("number")).collect(),
        None => DEFAULT_T_GRID.to_vec(),
    };
    let d_grid: Vec<usize> = match args.get(1) {
        Some(s) => s.split(',').map(|v| v.parse().expect("integer")).collect(),
        None => DEFAULT_D_GRID.to_vec(),
    };
    let cal = calibrate_parameters(&frames, DEFAULT_PSNR_FLOOR, &t_grid, &d_grid)?;
    println!("{:>8} {:>3} {:>10} {:>8}", "t", "d", "psnr_db", "savings");
    for p in &cal.grid {
        println!(
            "{:>8} {:>3} {:>10.3} {:>8.4}",
            p.t,
            p.d,
            p.mean_psnr_db,
            1.0 - p.invocation_ratio
        );
    }
    println!(
        "selected t={} d={} psnr={:.3} savings={:.4} meets_floor={}",
        cal.t,
        cal.d,
        cal.mean_psnr_db,
        1.0 - cal.invocation_ratio,
        cal.meets_floor
    );
    Ok(())
}
