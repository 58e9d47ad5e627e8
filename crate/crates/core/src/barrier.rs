//! The self-concordant barrier calculus in `v = B(X)` coordinates.
//!
//! Every scalar the solver needs — objective value, approximate duality gap,
//! Hessian-seminorm distance — is a function of the length-d vectors `v` and
//! `w = B(h)`. Running the calculus in v-space is what makes the O(n + d)
//! iterate representation possible.

use crate::error::{Error, Result};
use crate::linmap::Instance;

/// Coordinates this close to zero signal a lost interior iterate rather than
/// a legitimate evaluation; the step-size safeguards keep iterates strictly
/// interior, so hitting the floor is a bug upstream.
const DOMAIN_FLOOR: f64 = 1e-300;

/// Parameters of a standardized logarithmically-homogeneous self-concordant
/// barrier.
#[derive(Clone, Copy, Debug)]
pub struct BarrierParams {
    /// Logarithmic-homogeneity parameter theta (= d for the sum-of-logs
    /// barrier over the spectrahedron).
    pub theta: f64,
    /// Self-concordance constant, 2 after standardization.
    pub self_concordance: f64,
    /// Maximum variation of the nonsmooth part over its domain; 0 for
    /// indicator functions.
    pub r_g: f64,
}

impl BarrierParams {
    pub fn new(theta: f64, self_concordance: f64, r_g: f64) -> Result<Self> {
        if !(theta >= 1.0) {
            return Err(Error::Config(format!(
                "theta must be at least 1, got {theta}"
            )));
        }
        if !(self_concordance > 0.0) {
            return Err(Error::Config("self-concordance constant must be positive".into()));
        }
        if !(r_g >= 0.0) {
            return Err(Error::Config("R_g must be nonnegative".into()));
        }
        Ok(Self {
            theta,
            self_concordance,
            r_g,
        })
    }

    /// The standard barrier for the sum-of-logs objective with `d` terms.
    pub fn sc_gmean(d: usize) -> Self {
        Self {
            theta: d as f64,
            self_concordance: 2.0,
            r_g: 0.0,
        }
    }

    /// `theta + R_g`, the gap scale that separates large-gap iterations from
    /// suboptimality-controlled ones.
    pub fn gap_scale(&self) -> f64 {
        self.theta + self.r_g
    }
}

/// Approximate duality gap paired with the exact gap when a diagnostic run
/// computed one.
#[derive(Clone, Copy, Debug)]
pub struct GapPair {
    pub g_approx: f64,
    pub g_exact: Option<f64>,
}

impl GapPair {
    /// Checks the sandwich `G - delta_t <= G^a <= G` that holds whenever the
    /// suboptimality condition was met; `None` without an exact gap.
    pub fn sandwich_holds(&self, delta_t: f64) -> Option<bool> {
        self.g_exact.map(|g| {
            self.g_approx >= g - delta_t - 1e-9 && self.g_approx <= g + 1e-9
        })
    }
}

/// `omega(a) = -a - log(1 - a)` for `a < 1`, +inf otherwise.
pub fn omega(a: f64) -> f64 {
    if a < 1.0 {
        -a - (-a).ln_1p()
    } else {
        f64::INFINITY
    }
}

/// Fenchel conjugate `omega*(a) = a - log(1 + a)` for `a > -1`, +inf
/// otherwise.
pub fn omega_star(a: f64) -> f64 {
    if a > -1.0 {
        a - a.ln_1p()
    } else {
        f64::INFINITY
    }
}

/// Barrier value `f(v) = -sum_i log(v_i)`.
pub fn f_value(v: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        if !(vi >= DOMAIN_FLOOR) {
            return Err(Error::DomainViolation(format!(
                "f_value: coordinate v[{i}] = {vi} outside the barrier domain"
            )));
        }
        s -= vi.ln();
    }
    Ok(s)
}

/// Approximate duality gap `G^a = sum_i (w_i / v_i - 1)`, equal to
/// `<v - w, grad f(v)>` for the separable log barrier.
pub fn approx_gap(v: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(v.len(), w.len());
    debug_assert!(v.iter().all(|&x| x > 0.0));
    let mut s = 0.0;
    for i in 0..v.len() {
        s += w[i] / v[i] - 1.0;
    }
    s
}

/// Hessian-seminorm distance `D = sqrt(sum_i (w_i / v_i - 1)^2)`, the norm of
/// `B(h - x)` in the metric of the barrier Hessian at `v`.
pub fn hessian_distance(v: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(v.len(), w.len());
    debug_assert!(v.iter().all(|&x| x > 0.0));
    let mut s = 0.0;
    for i in 0..v.len() {
        let r = w[i] / v[i] - 1.0;
        s += r * r;
    }
    s.sqrt()
}

/// Standardizes an M-self-concordant, theta-bar-homogeneous barrier by the
/// scaling `f = (M^2/4) f_bar`, returning the standardized parameters and the
/// scale factor. Callers must scale objective values and the target epsilon
/// by the same factor.
pub fn rescale_to_standard(theta_bar: f64, self_concordance: f64) -> Result<(BarrierParams, f64)> {
    if !(self_concordance > 0.0) {
        return Err(Error::Config("self-concordance constant must be positive".into()));
    }
    if !(theta_bar >= 1.0) {
        return Err(Error::Config(format!(
            "theta_bar must be at least 1, got {theta_bar}"
        )));
    }
    let scale = self_concordance * self_concordance / 4.0;
    let theta = scale * theta_bar;
    let params = BarrierParams::new(theta, 2.0, 0.0)?;
    Ok((params, scale))
}

/// Initial-gap data for the scaled-identity initializer `X0 = I/n`.
#[derive(Clone, Copy, Debug)]
pub struct InitialGap {
    /// The closed-form bound `d log n`.
    pub bound: f64,
    /// `f(B(I/n))`, computable without the optimum.
    pub f_init: f64,
    /// Dual-feasible lower bound `-sum_i log Tr(A_i)` on the optimal value.
    pub dual_lower: f64,
}

/// Bound on the initial optimality gap at `X0 = I/n`: the dual-feasible point
/// certifies `f* >= -sum_i log Tr(A_i)`, and `f(B(I/n))` exceeds that by
/// exactly `d log n`.
pub fn initial_gap_bound(instance: &Instance) -> InitialGap {
    let n = instance.n() as f64;
    let d = instance.d() as f64;
    let mut f_init = 0.0;
    let mut dual_lower = 0.0;
    for &t in instance.traces() {
        f_init -= (t / n).ln();
        dual_lower -= t.ln();
    }
    InitialGap {
        bound: d * n.ln(),
        f_init,
        dual_lower,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_diag;
    use crate::linmap::{MatrixData, PackedSym};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn omega_values() {
        assert_eq!(omega(0.0), 0.0);
        assert!((omega(0.5) - (2.0f64.ln() - 0.5)).abs() < 1e-15);
        assert_eq!(omega(1.0), f64::INFINITY);
        assert_eq!(omega(5.0), f64::INFINITY);
    }

    #[test]
    fn omega_star_values() {
        assert_eq!(omega_star(0.0), 0.0);
        assert!((omega_star(1.0) - (1.0 - 2.0f64.ln())).abs() < 1e-15);
        assert_eq!(omega_star(-1.0), f64::INFINITY);
    }

    #[test]
    fn omega_nonnegative_with_unique_zero() {
        for k in 0..10_000 {
            let a = -5.0 + 5.99 * (k as f64) / 10_000.0;
            let w = omega(a);
            assert!(w >= 0.0, "omega({a}) = {w}");
            if a != 0.0 {
                assert!(w > 0.0, "omega({a}) should be strictly positive");
            }
        }
        for k in 0..10_000 {
            let a = -0.999 + 100.0 * (k as f64) / 10_000.0;
            let w = omega_star(a);
            assert!(w >= 0.0, "omega_star({a}) = {w}");
            if a != 0.0 {
                assert!(w > 0.0);
            }
        }
    }

    #[test]
    fn omega_star_descent_inequalities_on_grid() {
        // omega*(s) >= s/5.3 for s >= 1/2, and omega*(s) >= s^2/3 on [0, 1/2].
        for k in 0..10_000 {
            let s = 0.5 + 99.5 * (k as f64) / 10_000.0;
            assert!(omega_star(s) >= s / 5.3, "s = {s}");
        }
        for k in 0..=10_000 {
            let s = 0.5 * (k as f64) / 10_000.0;
            assert!(omega_star(s) >= s * s / 3.0, "s = {s}");
        }
    }

    #[test]
    fn f_value_examples() {
        assert_eq!(f_value(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        let f = f_value(&[0.25, 0.5]).unwrap();
        assert!((f - 3.0 * 2.0f64.ln()).abs() < 1e-14);
        assert!(f_value(&[1.0, 0.0]).is_err());
        assert!(f_value(&[1.0, -2.0]).is_err());
        assert!(f_value(&[1.0, 1e-305]).is_err());
    }

    #[test]
    fn gap_examples() {
        assert_eq!(approx_gap(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(approx_gap(&[1.0, 1.0], &[2.0, 3.0]), 3.0);
        assert_eq!(hessian_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert!((hessian_distance(&[1.0, 1.0], &[2.0, 3.0]) - 5.0f64.sqrt()).abs() < 1e-15);
    }

    /// The v-space gap and distance must match their matrix-form definitions
    /// computed through dense assembly of B*(grad f) and the dense Hessian.
    #[test]
    fn gap_and_distance_match_matrix_forms() {
        let n = 6;
        let d = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mats: Vec<MatrixData> = (0..d)
            .map(|_| {
                let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut p = PackedSym::zeros(n);
                for i in 0..n {
                    for j in 0..=i {
                        let mut s = 0.0;
                        for k in 0..n {
                            s += b[k * n + i] * b[k * n + j];
                        }
                        p.set(i, j, s);
                    }
                }
                MatrixData::DenseSym(p)
            })
            .collect();
        let inst = Instance::new(n, mats).unwrap();

        // X = I/n, H = u u^T for a random unit u.
        let mut x = vec![0.0; n * n];
        for i in 0..n {
            x[i * n + i] = 1.0 / n as f64;
        }
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nrm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        u.iter_mut().for_each(|a| *a /= nrm);

        let v = inst.apply_map(&x).unwrap();
        let w = inst.apply_map_rank1(&u).unwrap();

        // Matrix form of the gap: <B*(grad f(v)), X - H> with
        // B*(grad f) = -sum A_i / v_i assembled densely.
        let mut grad_full = vec![0.0; n * n];
        for (idx, m) in inst.matrices().iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let a = match m {
                        MatrixData::DenseSym(p) => p.get(i, j),
                        _ => unreachable!(),
                    };
                    grad_full[i * n + j] -= a / v[idx];
                }
            }
        }
        let mut gap_matrix = 0.0;
        for i in 0..n {
            for j in 0..n {
                let xh = x[i * n + j] - u[i] * u[j];
                gap_matrix += grad_full[i * n + j] * xh;
            }
        }
        let gap_v = approx_gap(&v, &w);
        assert!(
            (gap_v - gap_matrix).abs() <= 1e-10 * gap_matrix.abs().max(1.0),
            "v-space {gap_v} vs matrix form {gap_matrix}"
        );

        // Dense Hessian of f at v is diag(1/v^2); the seminorm of B(h - x).
        let mut dist_sq = 0.0;
        for i in 0..d {
            let diff = w[i] - v[i];
            dist_sq += diff * diff / (v[i] * v[i]);
        }
        let dist_v = hessian_distance(&v, &w);
        assert!((dist_v - dist_sq.sqrt()).abs() <= 1e-10 * dist_sq.sqrt().max(1.0));
    }

    #[test]
    fn rescale_examples() {
        let (p, scale) = rescale_to_standard(50.0, 2.0).unwrap();
        assert_eq!(p.theta, 50.0);
        assert_eq!(scale, 1.0);
        assert_eq!(p.self_concordance, 2.0);

        let (p, scale) = rescale_to_standard(4.0, 4.0).unwrap();
        assert_eq!(p.theta, 16.0);
        assert_eq!(scale, 4.0);

        // M = 2/sqrt(c) with c = 4 gives M = 1 and theta = 1/4 < 1: rejected.
        assert!(rescale_to_standard(1.0, 1.0).is_err());
    }

    #[test]
    fn initial_gap_examples() {
        let inst = gen_diag(500, 50).unwrap();
        let g = initial_gap_bound(&inst);
        assert!((g.bound - 50.0 * 500.0f64.ln()).abs() < 1e-9);
        assert!((g.bound - 310.7304).abs() < 1e-3);

        let inst = gen_diag(1, 1).unwrap();
        let g = initial_gap_bound(&inst);
        assert!(g.bound.abs() < 1e-15);
        assert!((g.f_init - g.dual_lower).abs() < 1e-12);

        // Diag n=4, d=2: f(B(I/4)) - dual lower bound = d log n exactly.
        let inst = gen_diag(4, 2).unwrap();
        let g = initial_gap_bound(&inst);
        assert!(((g.f_init - g.dual_lower) - 2.0 * 4.0f64.ln()).abs() < 1e-12);
        assert!((g.f_init - 3.0 * 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_inner_product_is_exactly_minus_d() {
        // <grad f(v), v> = sum v_i * (-1/v_i) = -d in exact f64 arithmetic.
        let v = [0.3, 1.7, 42.0, 1e-4, 8.0];
        let s: f64 = v.iter().map(|&vi| vi * (-1.0 / vi)).sum();
        assert_eq!(s, -(v.len() as f64));
    }

    proptest! {
        #[test]
        fn log_homogeneity(
            coords in proptest::collection::vec(1e-3f64..1e3, 1..8),
            c in 1e-3f64..1e3,
        ) {
            let scaled: Vec<f64> = coords.iter().map(|x| x * c).collect();
            let lhs = f_value(&scaled).unwrap();
            let rhs = f_value(&coords).unwrap() - coords.len() as f64 * c.ln();
            let tol = 1e-12 * (1.0 + lhs.abs() + rhs.abs());
            prop_assert!((lhs - rhs).abs() <= tol);
        }

        #[test]
        fn gap_is_stationary_at_w_equals_v(
            coords in proptest::collection::vec(1e-3f64..1e3, 1..8),
        ) {
            prop_assert_eq!(approx_gap(&coords, &coords), 0.0);
            prop_assert_eq!(hessian_distance(&coords, &coords), 0.0);
        }
    }
}
