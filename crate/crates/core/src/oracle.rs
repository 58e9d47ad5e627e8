//! Inexact linear-minimization oracles over the spectrahedron.
//!
//! The linearized subproblem at barrier coordinates `v` is an extreme
//! eigenvalue problem for `J = sum_i A_i / v_i`: its optimal value is
//! `-lambda_max(J)` attained at the rank-one matrix of the top eigenvector.
//! An oracle output reports a unit direction `u` (meaning `H = u u^T`) or the
//! `Stay` sentinel (meaning `h = x`), together with the approximate duality
//! gap `G^a = u^T J u - theta`, which must be nonnegative.
//!
//! A valid output satisfies, possibly only with probability `1 - p`, at least
//! one of
//!
//! * C.1 (large gap): `G^a > theta + R_g`;
//! * C.2 (delta-suboptimality): the direction is within `delta_t` of the
//!   subproblem optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barrier::approx_gap;
use crate::eigen::{dense_max_eig, lanczos_iters_for, lanczos_max_eig, EigResult};
use crate::error::{Error, Result};
use crate::linmap::{GradientOperator, Instance};
use crate::mem::MemMeter;

/// RNG stream ids derived from the master seed. Streams 3 and 4 belong to the
/// solver (sampling draws and random initialization).
pub const STREAM_LANCZOS: u64 = 1;
pub const STREAM_FAULT: u64 = 2;

/// Floor for the Lanczos accuracy parameter when `delta_t = 0` falls through
/// to the iterative path.
const RHO_FLOOR: f64 = 1e-12;

/// Update direction encoded in an oracle output.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    /// `H = u u^T` for this unit vector.
    Unit(Vec<f64>),
    /// `h = x`: keep the current iterate (the nonnegativity repair).
    Stay,
}

/// Output of one oracle call.
#[derive(Clone, Debug)]
pub struct OracleOutput {
    pub direction: Direction,
    /// Approximate duality gap; nonnegative in every mode.
    pub g_approx: f64,
    /// Lanczos iterations consumed (0 for exact and corrupted calls).
    pub inner_iters: usize,
    /// `w = B(h)`: the barrier coordinates of the returned direction. Equals
    /// `v` for `Stay`.
    pub map_coords: Vec<f64>,
    /// Diagnostic: condition C.1, filled by [`classify_conditions`].
    pub cond_c1: Option<bool>,
    /// Diagnostic: condition C.2, requires an exact solve at the same state.
    pub cond_c2: Option<bool>,
    /// Set by the fault-injection wrapper on deliberately corrupted calls.
    pub corrupted: bool,
}

impl OracleOutput {
    fn from_direction(u: Vec<f64>, w: Vec<f64>, g: f64, inner_iters: usize) -> Self {
        Self {
            direction: Direction::Unit(u),
            g_approx: g,
            inner_iters,
            map_coords: w,
            cond_c1: None,
            cond_c2: None,
            corrupted: false,
        }
    }

    fn stay(v: &[f64], inner_iters: usize) -> Self {
        Self {
            direction: Direction::Stay,
            g_approx: 0.0,
            inner_iters,
            map_coords: v.to_vec(),
            cond_c1: None,
            cond_c2: None,
            corrupted: false,
        }
    }
}

/// Oracle mode selection.
#[derive(Clone, Debug)]
pub enum OracleMode {
    Lanczos,
    Exact,
    FaultInjected { inner: Box<OracleMode>, q: f64 },
}

/// Configuration shared by the oracle implementations.
#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Relative-error constant; must exceed 2 for the multiplicative-error
    /// reduction to apply.
    pub c: f64,
    /// Per-call failure probability bound.
    pub p: f64,
    pub mode: OracleMode,
    /// Re-run the Lanczos solve once when the gap comes back negative instead
    /// of returning `Stay` immediately. Off by default for determinism.
    pub retry_on_stay: bool,
    /// Size limit for dense eigensolves and dense-assembled operators.
    pub dense_cap: usize,
}

impl OracleConfig {
    pub fn lanczos(p: f64) -> Self {
        Self {
            c: 4.0,
            p,
            mode: OracleMode::Lanczos,
            retry_on_stay: false,
            dense_cap: crate::eigen::DEFAULT_DENSE_CAP,
        }
    }

    pub fn exact() -> Self {
        Self {
            mode: OracleMode::Exact,
            ..Self::lanczos(0.1)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 2.0) {
            return Err(Error::Config(format!(
                "oracle constant c must exceed 2, got {}",
                self.c
            )));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!(
                "oracle failure probability must lie in (0, 1), got {}",
                self.p
            )));
        }
        if let OracleMode::FaultInjected { q, .. } = self.mode {
            if !(0.0..1.0).contains(&q) {
                return Err(Error::Config(format!(
                    "fault probability q must lie in [0, 1), got {q}"
                )));
            }
        }
        Ok(())
    }
}

/// Named RNG streams consumed by oracle calls, both derived from the master
/// seed so fault injection never perturbs the Lanczos stream.
#[derive(Clone, Debug)]
pub struct OracleRng {
    pub lanczos: ChaCha8Rng,
    pub fault: ChaCha8Rng,
}

impl OracleRng {
    pub fn from_seed(seed: u64) -> Self {
        let mut lanczos = ChaCha8Rng::seed_from_u64(seed);
        lanczos.set_stream(STREAM_LANCZOS);
        let mut fault = ChaCha8Rng::seed_from_u64(seed);
        fault.set_stream(STREAM_FAULT);
        Self { lanczos, fault }
    }
}

/// Relative-error parameter `tau_t = min(delta_t, (c-2) theta) / (c theta)`,
/// always in [0, 1).
pub fn tau_for(delta_t: f64, theta: f64, c: f64) -> f64 {
    debug_assert!(delta_t >= 0.0 && theta >= 1.0 && c > 2.0);
    delta_t.min((c - 2.0) * theta) / (c * theta)
}

/// Lanczos iteration budget used by [`plmo`] for a given call.
pub fn plmo_iteration_budget(delta_t: f64, theta: f64, n: usize, c: f64, p: f64) -> usize {
    let rho = if delta_t == 0.0 {
        RHO_FLOOR
    } else {
        (8.0 * tau_for(delta_t, theta, c)).min(1.0)
    };
    lanczos_iters_for(rho, n, p)
}

/// Probabilistic LMO for the sum-of-logs barrier: runs Lanczos on
/// `J = sum_i A_i / v_i` for the iteration budget implied by `delta_t`, and
/// repairs a negative gap by returning `Stay`.
///
/// With probability at least `1 - p` the output satisfies C.1 or C.2.
/// `delta_t = 0` falls back to the dense exact solve when the dimension
/// permits it.
pub fn plmo(
    instance: &Instance,
    v: &[f64],
    delta_t: f64,
    config: &OracleConfig,
    rng: &mut ChaCha8Rng,
    meter: Option<&MemMeter>,
) -> Result<OracleOutput> {
    if !(delta_t >= 0.0) {
        return Err(Error::Config(format!("delta_t must be nonnegative, got {delta_t}")));
    }
    let n = instance.n();
    let theta = instance.d() as f64;
    if delta_t == 0.0 && n <= config.dense_cap {
        return exact_lmo(instance, v, config.dense_cap);
    }

    instance.build_quad_cache();
    let gop = GradientOperator::new(instance, v)?;
    let num_iters = plmo_iteration_budget(delta_t, theta, n, config.c, config.p);

    // A dense-assembled operator pays off when a streamed product costs more
    // than a couple of dense ones.
    let use_dense = n <= config.dense_cap && gop.stream_matvec_flops() > 4 * n * n;
    let run = |rng: &mut ChaCha8Rng| -> Result<EigResult> {
        if use_dense {
            let j = gop.assemble_dense(config.dense_cap)?;
            if let Some(m) = meter {
                m.transient(n * n);
            }
            Ok(lanczos_max_eig(&j, num_iters, rng))
        } else {
            Ok(lanczos_max_eig(&gop, num_iters, rng))
        }
    };

    let mut res = run(rng)?;
    let mut total_iters = res.iters;
    if let Some(m) = meter {
        m.transient((res.iters + 2) * n + 3 * res.iters + instance.d());
    }
    let mut w = instance.apply_map_rank1(&res.vector)?;
    let mut g = approx_gap(v, &w);

    if g < 0.0 && config.retry_on_stay {
        res = run(rng)?;
        total_iters += res.iters;
        w = instance.apply_map_rank1(&res.vector)?;
        g = approx_gap(v, &w);
    }

    if g < 0.0 {
        Ok(OracleOutput::stay(v, total_iters))
    } else {
        Ok(OracleOutput::from_direction(res.vector, w, g, total_iters))
    }
}

/// Exact LMO: dense (or diagonal fast-path) largest eigenpair of the
/// assembled gradient operator. The returned gap is the exact duality gap
/// `G = lambda_max(J) - theta`.
pub fn exact_lmo(instance: &Instance, v: &[f64], dense_cap: usize) -> Result<OracleOutput> {
    let theta = instance.d() as f64;
    let gop = GradientOperator::new(instance, v)?;

    let res = if let Some(jd) = gop.diag_form() {
        // Diagonal J: the top eigenpair is a coordinate direction.
        let mut best = 0usize;
        for (i, &x) in jd.iter().enumerate() {
            if x > jd[best] {
                best = i;
            }
        }
        let mut u = vec![0.0; instance.n()];
        u[best] = 1.0;
        EigResult {
            lambda: jd[best],
            vector: u,
            iters: 0,
            breakdown: false,
        }
    } else {
        let j = gop.assemble_dense(dense_cap)?;
        dense_max_eig(&j, dense_cap)?
    };

    // The subproblem optimum satisfies F_lin(h*) = -lambda_max <= -theta.
    let slack = 1e-9 * (1.0 + res.lambda.abs() + theta);
    if res.lambda < theta - slack {
        return Err(Error::Internal(format!(
            "exact LMO found lambda_max = {} below theta = {theta}",
            res.lambda
        )));
    }

    let w = instance.apply_map_rank1(&res.vector)?;
    let g = approx_gap(v, &w);
    if g < 0.0 {
        // Roundoff at stationarity; the repair output is still exact here.
        Ok(OracleOutput::stay(v, 0))
    } else {
        Ok(OracleOutput::from_direction(res.vector, w, g, 0))
    }
}

/// Classifies an output against the two oracle conditions, given an exact
/// solve at the same state. C.1 uses a strict inequality, so a tie at
/// `theta + R_g` classifies as false.
pub fn classify_conditions(
    output: &OracleOutput,
    exact: &OracleOutput,
    theta: f64,
    r_g: f64,
    delta_t: f64,
) -> (bool, bool) {
    let c1 = output.g_approx > theta + r_g;
    // F_lin(h) - F_lin(h*) = G - G^a.
    let c2 = exact.g_approx - output.g_approx <= delta_t;
    (c1, c2)
}

/// Oracle contract used by the solver loop.
pub trait Oracle: Sync {
    fn call(
        &self,
        instance: &Instance,
        v: &[f64],
        delta_t: f64,
        rng: &mut OracleRng,
        meter: Option<&MemMeter>,
    ) -> Result<OracleOutput>;
}

/// Lanczos-backed probabilistic LMO.
pub struct LanczosOracle {
    pub config: OracleConfig,
}

impl Oracle for LanczosOracle {
    fn call(
        &self,
        instance: &Instance,
        v: &[f64],
        delta_t: f64,
        rng: &mut OracleRng,
        meter: Option<&MemMeter>,
    ) -> Result<OracleOutput> {
        plmo(instance, v, delta_t, &self.config, &mut rng.lanczos, meter)
    }
}

/// Exact LMO (dense eigensolve), the baseline oracle.
pub struct ExactOracle {
    pub dense_cap: usize,
}

impl Oracle for ExactOracle {
    fn call(
        &self,
        instance: &Instance,
        v: &[f64],
        _delta_t: f64,
        _rng: &mut OracleRng,
        _meter: Option<&MemMeter>,
    ) -> Result<OracleOutput> {
        exact_lmo(instance, v, self.dense_cap)
    }
}

/// Wraps an oracle and, with probability `q` per call, replaces its output by
/// a corrupted-but-legal one: a random coordinate direction with its honestly
/// computed gap, clamped to nonnegativity through `Stay`. Exercises the
/// failure tolerance of the repeated stopping rule.
pub struct FaultInjectingOracle<O> {
    pub inner: O,
    pub q: f64,
}

impl<O: Oracle> Oracle for FaultInjectingOracle<O> {
    fn call(
        &self,
        instance: &Instance,
        v: &[f64],
        delta_t: f64,
        rng: &mut OracleRng,
        meter: Option<&MemMeter>,
    ) -> Result<OracleOutput> {
        let coin: f64 = rng.fault.gen();
        if coin >= self.q {
            return self.inner.call(instance, v, delta_t, rng, meter);
        }
        let n = instance.n();
        let k = rng.fault.gen_range(0..n);
        let mut u = vec![0.0; n];
        u[k] = 1.0;
        let w = instance.apply_map_rank1(&u)?;
        let g = approx_gap(v, &w);
        let mut out = if g < 0.0 {
            OracleOutput::stay(v, 0)
        } else {
            OracleOutput::from_direction(u, w, g, 0)
        };
        out.corrupted = true;
        Ok(out)
    }
}

impl Oracle for Box<dyn Oracle> {
    fn call(
        &self,
        instance: &Instance,
        v: &[f64],
        delta_t: f64,
        rng: &mut OracleRng,
        meter: Option<&MemMeter>,
    ) -> Result<OracleOutput> {
        (**self).call(instance, v, delta_t, rng, meter)
    }
}

/// Builds the oracle selected by `config.mode`.
pub fn build_oracle(config: &OracleConfig) -> Result<Box<dyn Oracle>> {
    config.validate()?;
    fn build(mode: &OracleMode, config: &OracleConfig) -> Box<dyn Oracle> {
        match mode {
            OracleMode::Lanczos => Box::new(LanczosOracle {
                config: OracleConfig {
                    mode: OracleMode::Lanczos,
                    ..config.clone()
                },
            }),
            OracleMode::Exact => Box::new(ExactOracle {
                dense_cap: config.dense_cap,
            }),
            OracleMode::FaultInjected { inner, q } => Box::new(FaultInjectingOracle {
                inner: build(inner, config),
                q: *q,
            }),
        }
    }
    Ok(build(&config.mode, config))
}
