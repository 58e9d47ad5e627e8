//! Gaussian-sampling iterate representation.
//!
//! Instead of the dense PSD iterate X, keep one sample z ~ N(0, X) together
//! with the barrier coordinates v = B(X). The Frank-Wolfe update
//! `X' = (1 - gamma) X + gamma u u^T` maps to
//! `z' = sqrt(1 - gamma) z + sqrt(gamma) zeta u` with zeta ~ N(0, 1), which
//! preserves the covariance recursion in distribution. Every scalar the
//! solver needs is a function of v and w, so a solve stores O(n + d) floats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::barrier::BarrierParams;
use crate::error::{Error, Result};
use crate::linmap::Instance;
use crate::oracle::Oracle;
use crate::solver::{solve, Mode, SolveResult, SolverConfig};

/// Draws z ~ N(0, I/n): standard normal entries scaled by 1/sqrt(n).
pub fn init_samples(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    assert!(n >= 1);
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            g * scale
        })
        .collect()
}

/// One sampling update `z' = sqrt(1 - gamma) z + sqrt(gamma) zeta u`, with
/// zeta drawn from the sampling stream.
pub fn update_sample(z: &[f64], u: &[f64], gamma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    debug_assert_eq!(z.len(), u.len());
    debug_assert!((0.0..=1.0).contains(&gamma));
    let zeta: f64 = StandardNormal.sample(rng);
    let a = (1.0 - gamma).sqrt();
    let b = gamma.sqrt() * zeta;
    z.iter().zip(u.iter()).map(|(&zi, &ui)| a * zi + b * ui).collect()
}

/// Runs the solver in sampling mode: identical control flow and scalars, but
/// the iterate is (z, v) instead of (X, v).
pub fn run_sampling_mode(
    instance: &Instance,
    params: &BarrierParams,
    config: &SolverConfig,
    oracle: &dyn Oracle,
) -> Result<SolveResult> {
    let mut config = config.clone();
    config.mode = Mode::Sampling;
    solve(instance, params, &config, oracle)
}

/// Writes the final sampling-mode state: dimensions, seed, iteration count,
/// then the sample and barrier coordinates.
pub fn dump_state(path: &Path, result: &SolveResult, instance: &Instance, seed: u64) -> Result<()> {
    let z = result
        .sample
        .as_ref()
        .ok_or_else(|| Error::Config("state dump requires a sampling-mode result".into()))?;
    let file = File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    writeln!(out, "scfw-state v1").map_err(io_err)?;
    writeln!(
        out,
        "{} {} {} {}",
        instance.n(),
        instance.d(),
        seed,
        result.iterations
    )
    .map_err(io_err)?;
    writeln!(out, "{}", join_floats(z)).map_err(io_err)?;
    writeln!(out, "{}", join_floats(&result.v)).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(())
}

fn join_floats(xs: &[f64]) -> String {
    let strs: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    strs.join(" ")
}
