//! The approximate generalized Frank-Wolfe loop with inexact and
//! probabilistic oracles.
//!
//! One loop serves both the plain and the repeated-stopping variants: the
//! stopping criterion `G^a <= eps && delta_t <= 3 eps / 2` increments a hit
//! counter, iterations that hit with fewer than `l` hits still perform their
//! update, and the `l`-th hit returns the current iterate without updating.
//!
//! Randomness is split into named ChaCha streams derived from the master
//! seed: 1 = Lanczos start vectors, 2 = fault injection, 3 = sampling draws,
//! 4 = random initialization. Identical seeds therefore yield bit-identical
//! traces, and sampling mode consumes exactly one Gaussian per iteration
//! regardless of oracle outcomes.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::barrier::{f_value, hessian_distance, BarrierParams};
use crate::error::{Error, Result};
use crate::linmap::Instance;
use crate::mem::MemMeter;
use crate::oracle::{classify_conditions, exact_lmo, Direction, Oracle, OracleRng};
use crate::sampling;

pub const STREAM_SAMPLING: u64 = 3;
pub const STREAM_INIT: u64 = 4;

/// Scalars retained per trace row, for allocation accounting.
const TRACE_FLOATS: usize = 12;

/// Scheduled delta sequences.
#[derive(Clone, Debug)]
pub enum Schedule {
    /// `delta_t = eps / 2` for every `t`, the setting that makes the
    /// scheduled bound's K_q equal 1.
    EpsOverTwo,
    /// `delta_t = 0`: exact-oracle semantics.
    Zero,
    /// `delta_t = scale / (t + 1)`, a generic positive sequence converging to
    /// zero.
    InverseT { scale: f64 },
}

/// How `delta_t` is chosen at each iteration.
#[derive(Clone, Debug)]
pub enum DeltaStrategy {
    Scheduled(Schedule),
    /// `delta_t = eps / kappa + min_{tau < t} G^a_tau`, with the empty-history
    /// minimum taken as `theta + R_g`.
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Maintain the dense iterate X alongside the barrier coordinates.
    Matrix,
    /// Maintain one Gaussian sample z ~ N(0, X) instead of X.
    Sampling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    /// X0 = I/n, the initializer the closed-form bounds assume.
    ScaledIdentity,
    /// Random PSD start (trace-normalized), for experiment replication.
    RandomPsd,
}

/// Which closed-form iteration bound applies to a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundsVariant {
    ApproxIScheduled,
    ApproxIIAdaptive,
    Exact,
}

impl BoundsVariant {
    /// Partition constant used by the convergence analysis of each variant.
    pub fn partition_constant(self) -> f64 {
        match self {
            BoundsVariant::ApproxIScheduled => 0.5,
            BoundsVariant::ApproxIIAdaptive => 1.0,
            BoundsVariant::Exact => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundsVariant::ApproxIScheduled => "GFW-ApproxI",
            BoundsVariant::ApproxIIAdaptive => "GFW-ApproxII",
            BoundsVariant::Exact => "GFW-Exact",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Suboptimality target; must satisfy `0 < eps <= theta + R_g`.
    pub epsilon: f64,
    /// Stopping repetition count.
    pub l: usize,
    pub strategy: DeltaStrategy,
    /// Adaptive-strategy divisor.
    pub kappa: f64,
    /// Oracle relative-error constant (reported; the oracle carries its own).
    pub c: f64,
    /// Oracle failure probability bound, used by the bound calculators.
    pub p: f64,
    /// Confidence parameter for bound reporting.
    pub p_bar: f64,
    pub seed: u64,
    pub max_iters: usize,
    pub mode: Mode,
    /// Track the exact gap and condition flags each iteration (small n only).
    pub diagnostics: bool,
    pub variant: BoundsVariant,
    pub init: InitMode,
    /// Known optimal value, when available; enables optimality-gap tracking
    /// and partition labels.
    pub f_star: Option<f64>,
    /// Cap for dense eigensolves in diagnostics.
    pub dense_cap: usize,
    /// Cap for materializing the dense iterate in matrix mode.
    pub matrix_cap: usize,
    /// Allocation meter threaded through the solve when present.
    pub meter: Option<Arc<MemMeter>>,
}

impl SolverConfig {
    /// Scheduled strategy with `delta_t = eps/2` and the Lanczos oracle bound
    /// row.
    pub fn approx_i(epsilon: f64, seed: u64) -> Self {
        Self::base(
            epsilon,
            seed,
            DeltaStrategy::Scheduled(Schedule::EpsOverTwo),
            BoundsVariant::ApproxIScheduled,
        )
    }

    /// Adaptive strategy with kappa = 2.
    pub fn approx_ii(epsilon: f64, seed: u64) -> Self {
        Self::base(
            epsilon,
            seed,
            DeltaStrategy::Adaptive,
            BoundsVariant::ApproxIIAdaptive,
        )
    }

    /// Exact-oracle semantics: `delta_t = 0`.
    pub fn exact(epsilon: f64, seed: u64) -> Self {
        Self::base(
            epsilon,
            seed,
            DeltaStrategy::Scheduled(Schedule::Zero),
            BoundsVariant::Exact,
        )
    }

    fn base(epsilon: f64, seed: u64, strategy: DeltaStrategy, variant: BoundsVariant) -> Self {
        Self {
            epsilon,
            l: 1,
            strategy,
            kappa: 2.0,
            c: 4.0,
            p: 0.1,
            p_bar: 0.1,
            seed,
            max_iters: 1_000_000,
            mode: Mode::Matrix,
            diagnostics: false,
            variant,
            init: InitMode::ScaledIdentity,
            f_star: None,
            dense_cap: crate::eigen::DEFAULT_DENSE_CAP,
            matrix_cap: 4000,
            meter: None,
        }
    }

    pub fn validate(&self, params: &BarrierParams) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= params.gap_scale()) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, theta + R_g] = (0, {}], got {}",
                params.gap_scale(),
                self.epsilon
            )));
        }
        if self.l < 1 {
            return Err(Error::Config("stopping count l must be at least 1".into()));
        }
        if !(self.kappa >= 1.0) {
            return Err(Error::Config("kappa must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config("p must lie in (0, 1)".into()));
        }
        if !(self.p_bar > 0.0 && self.p_bar < 1.0) {
            return Err(Error::Config("p_bar must lie in (0, 1)".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if let DeltaStrategy::Scheduled(Schedule::InverseT { scale }) = self.strategy {
            if !(scale > 0.0) {
                return Err(Error::Config("schedule scale must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Iterate partition labels from the convergence analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubseqLabel {
    /// Large gap: `G^a > theta + R_g`.
    R,
    /// Informative gap: `G^a <= theta + R_g` and `G^a >= Delta / (2C + 1)`.
    S,
    /// Oracle-limited gap: the remainder.
    Q,
}

impl SubseqLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SubseqLabel::R => "r",
            SubseqLabel::S => "s",
            SubseqLabel::Q => "q",
        }
    }
}

/// One iteration of the solve.
#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub t: usize,
    pub delta_t: f64,
    pub g_approx: f64,
    pub d_t: f64,
    pub gamma_t: f64,
    pub f_value: f64,
    /// `F(x_t) - F*`, present when the optimal value is known.
    pub delta_opt: Option<f64>,
    /// Exact duality gap at the same state (diagnostic runs only).
    pub gap_exact: Option<f64>,
    pub label: Option<SubseqLabel>,
    pub oracle_iters: usize,
    /// Stopping-criterion satisfactions observed so far (including this row).
    pub stop_hits: usize,
    pub cond_c1: Option<bool>,
    pub cond_c2: Option<bool>,
}

impl TraceRecord {
    pub fn gap_pair(&self) -> crate::barrier::GapPair {
        crate::barrier::GapPair {
            g_approx: self.g_approx,
            g_exact: self.gap_exact,
        }
    }
}

/// Closed-form worst-case iteration constants for a variant.
#[derive(Clone, Copy, Debug)]
pub struct TheoryBounds {
    pub k_r: u64,
    pub k_s: u64,
    pub k_q: u64,
    pub m_hoeffding: f64,
    pub k_u: f64,
    pub delta0: f64,
    pub variant: BoundsVariant,
    pub partition_c: f64,
}

/// Step size `gamma = min(G^a / (D (D + G^a)), 1)`.
///
/// `G^a = 0` maps to 0. `D = 0` with a positive gap maps to 1: the quadratic
/// model has no curvature along the step, so the full step is taken.
pub fn step_size(g_approx: f64, d_t: f64) -> f64 {
    debug_assert!(g_approx >= 0.0 && d_t >= 0.0);
    if g_approx <= 0.0 {
        return 0.0;
    }
    if d_t == 0.0 {
        return 1.0;
    }
    (g_approx / (d_t * (d_t + g_approx))).min(1.0)
}

/// The next `delta_t` under the given strategy. `gap_min` is the running
/// minimum of past approximate gaps (`None` while the history is empty).
pub fn next_delta(
    strategy: &DeltaStrategy,
    t: usize,
    epsilon: f64,
    kappa: f64,
    gap_scale: f64,
    gap_min: Option<f64>,
) -> f64 {
    match strategy {
        DeltaStrategy::Scheduled(Schedule::EpsOverTwo) => epsilon / 2.0,
        DeltaStrategy::Scheduled(Schedule::Zero) => 0.0,
        DeltaStrategy::Scheduled(Schedule::InverseT { scale }) => scale / (t as f64 + 1.0),
        DeltaStrategy::Adaptive => epsilon / kappa + gap_min.unwrap_or(gap_scale),
    }
}

/// Convex combination `(1 - gamma) v + gamma w`.
pub fn update_iterate(v: &[f64], w: &[f64], gamma: f64) -> Vec<f64> {
    debug_assert_eq!(v.len(), w.len());
    debug_assert!((0.0..=1.0).contains(&gamma));
    v.iter()
        .zip(w.iter())
        .map(|(&vi, &wi)| (1.0 - gamma) * vi + gamma * wi)
        .collect()
}

/// Hoeffding trial-count lower bound
/// `M = (l - 1 + log(1/p_bar)) / (1 - p) + 2 log(1/p_bar)`.
pub fn hoeffding_m(l: usize, p_bar: f64, p: f64) -> f64 {
    assert!(l >= 1);
    assert!(p > 0.0 && p < 1.0);
    assert!(p_bar > 0.0 && p_bar < 1.0);
    let log_term = (1.0 / p_bar).ln();
    ((l - 1) as f64 + log_term) / (1.0 - p) + 2.0 * log_term
}

/// Closed-form iteration-bound constants per variant, instantiated exactly as
/// reported alongside the experiments.
pub fn bounds(
    variant: BoundsVariant,
    delta0: f64,
    theta: f64,
    r_g: f64,
    epsilon: f64,
    l: usize,
    p: f64,
    p_bar: f64,
) -> TheoryBounds {
    let tr = theta + r_g;
    let k_r = (10.6 * delta0).floor().max(0.0) as u64;
    let k_r_ceil = (10.6 * delta0).ceil().max(0.0);
    let (k_s, k_q, m, k_u) = match variant {
        BoundsVariant::ApproxIScheduled => {
            let k_s = (48.0 * tr * tr / epsilon).ceil();
            let m = hoeffding_m(l, p_bar, p);
            let k_u = k_r_ceil + 2.0 * k_s + 2.0 + m;
            (k_s as u64, 1u64, m, k_u)
        }
        BoundsVariant::ApproxIIAdaptive => {
            let k_s = (72.0 * tr * tr / epsilon).ceil();
            let k_q = 2.0 + (tr / epsilon).log2().ceil().max(0.0);
            let m = hoeffding_m(l, p_bar, p);
            let k_u = k_r_ceil + 2.0 * k_s + 2.0 * k_q / (1.0 - p) + 2.0 * (1.0 / p_bar).ln();
            (k_s as u64, k_q as u64, m, k_u)
        }
        BoundsVariant::Exact => {
            let k_s = (24.0 * tr * tr / epsilon).ceil();
            let lead = if 10.6 * delta0 > 1.0 {
                (5.3 * (delta0 + tr) * (10.6 * delta0).ln()).ceil()
            } else {
                0.0
            };
            (k_s as u64, 0u64, 0.0, lead + k_s)
        }
    };
    TheoryBounds {
        k_r,
        k_s,
        k_q,
        m_hoeffding: m,
        k_u,
        delta0,
        variant,
        partition_c: variant.partition_constant(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionCounts {
    pub n_r: usize,
    pub n_s: usize,
    pub n_q: usize,
}

/// Assigns each trace row its r/s/q label. Requires the per-iteration
/// optimality gap, i.e. a diagnostic run against a known optimal value.
pub fn partition_iterates(
    trace: &[TraceRecord],
    c: f64,
    theta: f64,
    r_g: f64,
) -> Result<(Vec<SubseqLabel>, PartitionCounts)> {
    assert!(c >= 0.0);
    let scale = theta + r_g;
    let mut labels = Vec::with_capacity(trace.len());
    let mut counts = PartitionCounts {
        n_r: 0,
        n_s: 0,
        n_q: 0,
    };
    for row in trace {
        let delta = row.delta_opt.ok_or(Error::MissingOptGap)?;
        let label = if row.g_approx > scale {
            counts.n_r += 1;
            SubseqLabel::R
        } else if row.g_approx >= delta / (2.0 * c + 1.0) {
            counts.n_s += 1;
            SubseqLabel::S
        } else {
            counts.n_q += 1;
            SubseqLabel::Q
        };
        labels.push(label);
    }
    Ok((labels, counts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The stopping criterion was met `l` times.
    Converged,
    /// The iteration cap was reached first.
    IterationCap,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::IterationCap => "iteration_cap",
        }
    }
}

/// Final state and per-iteration history of one solve.
#[derive(Debug)]
pub struct SolveResult {
    /// Barrier coordinates of the returned iterate.
    pub v: Vec<f64>,
    /// Dense iterate (matrix mode).
    pub x_dense: Option<Vec<f64>>,
    /// Gaussian sample of the returned iterate (sampling mode).
    pub sample: Option<Vec<f64>>,
    /// Oracle calls performed, the K of the experiment tables.
    pub iterations: usize,
    pub stop: StopReason,
    pub final_delta_t: f64,
    pub final_g_approx: f64,
    /// `F(x_K) - F*` when the optimal value is known.
    pub delta_final: Option<f64>,
    pub f_final: f64,
    pub trace: Vec<TraceRecord>,
    pub bounds: TheoryBounds,
    pub seconds: f64,
}

/// Runs the Frank-Wolfe loop on `min -sum log <A_i, X>` over the
/// spectrahedron with the supplied oracle.
pub fn solve(
    instance: &Instance,
    params: &BarrierParams,
    config: &SolverConfig,
    oracle: &dyn Oracle,
) -> Result<SolveResult> {
    config.validate(params)?;
    instance.build_quad_cache();

    let n = instance.n();
    let d = instance.d();
    let gap_scale = params.gap_scale();
    let eps = config.epsilon;
    let meter = config.meter.as_deref();

    let start_time = Instant::now();

    let mut oracle_rng = OracleRng::from_seed(config.seed);
    let mut sampling_rng = ChaCha8Rng::seed_from_u64(config.seed);
    sampling_rng.set_stream(STREAM_SAMPLING);

    // Initial iterate.
    let mut x_dense: Option<Vec<f64>> = None;
    let mut v: Vec<f64> = match config.init {
        InitMode::ScaledIdentity => {
            if config.mode == Mode::Matrix {
                x_dense = Some(scaled_identity(n, config.matrix_cap)?);
            }
            instance.traces().iter().map(|t| t / n as f64).collect()
        }
        InitMode::RandomPsd => {
            if config.mode != Mode::Matrix {
                return Err(Error::Config(
                    "random initialization requires matrix mode".into(),
                ));
            }
            let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
            init_rng.set_stream(STREAM_INIT);
            let x = random_psd_start(n, config.matrix_cap, &mut init_rng)?;
            let v = instance.apply_map(&x)?;
            x_dense = Some(x);
            v
        }
    };
    if let Some((i, &vi)) = v.iter().enumerate().find(|(_, &vi)| !(vi > 0.0)) {
        return Err(Error::DomainViolation(format!(
            "initial iterate has nonpositive barrier coordinate v[{i}] = {vi}"
        )));
    }

    let mut sample: Option<Vec<f64>> = if config.mode == Mode::Sampling {
        Some(sampling::init_samples(n, &mut sampling_rng))
    } else {
        None
    };

    if let Some(m) = meter {
        m.alloc(d); // v
        if sample.is_some() {
            m.alloc(n);
        }
        if x_dense.is_some() {
            m.alloc(n * n);
        }
    }

    let f0 = f_value(&v)?;
    let delta0 = match config.f_star {
        Some(fs) => f0 - fs,
        None => d as f64 * (n as f64).ln(),
    };
    let theory = bounds(
        config.variant,
        delta0,
        params.theta,
        params.r_g,
        eps,
        config.l,
        config.p,
        config.p_bar,
    );

    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut gap_min: Option<f64> = None;
    let mut count = 0usize;
    let mut stop = StopReason::IterationCap;
    let mut final_delta_t = f64::NAN;
    let mut final_g = f64::NAN;

    for t in 0..config.max_iters {
        let delta_t = next_delta(&config.strategy, t, eps, config.kappa, gap_scale, gap_min);
        let out = oracle.call(instance, &v, delta_t, &mut oracle_rng, meter)?;
        if !(out.g_approx >= 0.0) {
            return Err(Error::Internal(format!(
                "oracle returned negative gap {}",
                out.g_approx
            )));
        }
        let g = out.g_approx;
        let w = &out.map_coords;
        let f_t = f_value(&v)?;
        let delta_opt = config.f_star.map(|fs| f_t - fs);

        // Diagnostics: exact gap and condition flags at the same state.
        let (gap_exact, c1, c2) = if config.diagnostics {
            let exact = exact_lmo(instance, &v, config.dense_cap)?;
            let (c1, c2) = classify_conditions(&out, &exact, params.theta, params.r_g, delta_t);
            (Some(exact.g_approx), Some(c1), Some(c2))
        } else {
            (None, None, None)
        };

        let hit = g <= eps && delta_t <= 1.5 * eps;
        if hit {
            count += 1;
        }

        let d_t = hessian_distance(&v, w);
        let gamma = step_size(g, d_t);

        if let Some(m) = meter {
            m.transient(2 * n + 3 * d);
            m.alloc(TRACE_FLOATS);
        }
        trace.push(TraceRecord {
            t,
            delta_t,
            g_approx: g,
            d_t,
            gamma_t: gamma,
            f_value: f_t,
            delta_opt,
            gap_exact,
            label: None,
            oracle_iters: out.inner_iters,
            stop_hits: count,
            cond_c1: c1,
            cond_c2: c2,
        });

        if hit && count >= config.l {
            // The l-th hit stops before the update: the returned iterate is
            // x_t itself.
            stop = StopReason::Converged;
            final_delta_t = delta_t;
            final_g = g;
            break;
        }

        // Update the iterate: v always, X or z per mode.
        v = update_iterate(&v, w, gamma);
        if let Some((i, &vi)) = v.iter().enumerate().find(|(_, &vi)| !(vi > 0.0)) {
            return Err(Error::Internal(format!(
                "interiority lost at iteration {t}: v[{i}] = {vi}"
            )));
        }
        if let Some(x) = x_dense.as_mut() {
            if let Direction::Unit(u) = &out.direction {
                rank_one_blend(x, u, gamma);
            }
        }
        if let Some(z) = sample.as_mut() {
            match &out.direction {
                Direction::Unit(u) => {
                    *z = sampling::update_sample(z, u, gamma, &mut sampling_rng);
                }
                Direction::Stay => {
                    // Keep the sampling stream aligned across oracle
                    // outcomes.
                    let _discard: f64 = StandardNormal.sample(&mut sampling_rng);
                }
            }
        }

        gap_min = Some(match gap_min {
            Some(m) => m.min(g),
            None => g,
        });
        final_delta_t = delta_t;
        final_g = g;
    }

    let f_final = f_value(&v)?;
    let delta_final = config.f_star.map(|fs| f_final - fs);

    // Partition labels for diagnostic runs with a known optimum.
    if config.diagnostics && config.f_star.is_some() {
        let c = config.variant.partition_constant();
        if let Ok((labels, _)) = partition_iterates(&trace, c, params.theta, params.r_g) {
            for (row, label) in trace.iter_mut().zip(labels) {
                row.label = Some(label);
            }
        }
    }

    Ok(SolveResult {
        v,
        x_dense,
        sample,
        iterations: trace.len(),
        stop,
        final_delta_t,
        final_g_approx: final_g,
        delta_final,
        f_final,
        trace,
        bounds: theory,
        seconds: start_time.elapsed().as_secs_f64(),
    })
}

fn scaled_identity(n: usize, cap: usize) -> Result<Vec<f64>> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut x = vec![0.0; n * n];
    for i in 0..n {
        x[i * n + i] = 1.0 / n as f64;
    }
    Ok(x)
}

fn random_psd_start(n: usize, cap: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut x = vec![0.0; n * n];
    for _ in 0..n {
        let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for i in 0..n {
            for j in 0..n {
                x[i * n + j] += u[i] * u[j];
            }
        }
    }
    let tr: f64 = (0..n).map(|i| x[i * n + i]).sum();
    for e in x.iter_mut() {
        *e /= tr;
    }
    Ok(x)
}

/// `X <- (1 - gamma) X + gamma u u^T`.
fn rank_one_blend(x: &mut [f64], u: &[f64], gamma: f64) {
    let n = u.len();
    for i in 0..n {
        for j in 0..n {
            x[i * n + j] = (1.0 - gamma) * x[i * n + j] + gamma * u[i] * u[j];
        }
    }
}

/// Serializes a trace in the fixed CSV layout
/// `t,delta_t,G_a,D_t,gamma_t,F,Delta,G_exact,label,oracle_iters,stop_hits`.
/// Optional columns are empty when diagnostics were off.
pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str("t,delta_t,G_a,D_t,gamma_t,F,Delta,G_exact,label,oracle_iters,stop_hits\n");
    for row in trace {
        let delta = row
            .delta_opt
            .map(|x| x.to_string())
            .unwrap_or_default();
        let gex = row
            .gap_exact
            .map(|x| x.to_string())
            .unwrap_or_default();
        let label = row.label.map(|l| l.as_str()).unwrap_or("");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.t,
            row.delta_t,
            row.g_approx,
            row.d_t,
            row.gamma_t,
            row.f_value,
            delta,
            gex,
            label,
            row.oracle_iters,
            row.stop_hits,
        ));
    }
    out
}
