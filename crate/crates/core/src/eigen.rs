//! Extreme-eigenpair computation.
//!
//! Two routes to the largest eigenpair of a symmetric PSD operator:
//!
//! * [`lanczos_max_eig`] — randomized Lanczos with full reorthogonalization,
//!   driven purely through a matrix-vector product contract. The iteration
//!   count that certifies a relative-accuracy/failure-probability pair comes
//!   from [`lanczos_iters_for`].
//! * [`dense_max_eig`] — an in-repo dense symmetric eigensolver (Householder
//!   tridiagonalization followed by implicit-shift QL), used as the exact
//!   baseline and as the test oracle for the Lanczos path.

use crate::error::{Error, Result};
use crate::vecops::{axpy, dot, norm2, scale};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Default size limit for dense eigendecompositions.
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// A Lanczos step whose residual norm falls below this fraction of the
/// operator-norm estimate has exhausted an invariant subspace.
const BREAKDOWN_RELTOL: f64 = 1e-13;

const QL_MAX_ITERS: usize = 60;

/// Matrix-vector product contract for symmetric operators.
///
/// Implementations must be safe for concurrent read-only use; the eigensolvers
/// never mutate the operator.
pub trait MatVec {
    fn dim(&self) -> usize;
    /// Writes `A x` into `y`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<T: MatVec + ?Sized> MatVec for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// Dense symmetric matrix in full row-major storage.
#[derive(Clone, Debug)]
pub struct SymDense {
    n: usize,
    a: Vec<f64>,
}

impl SymDense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * n],
        }
    }

    /// Builds from a full row-major buffer, rejecting asymmetric input.
    pub fn from_full(n: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "dense matrix buffer",
                expected: n * n,
                got: a.len(),
            });
        }
        let amax = a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let tol = 1e-12 * amax.max(1e-300);
        for i in 0..n {
            for j in 0..i {
                if (a[i * n + j] - a[j * n + i]).abs() > tol {
                    return Err(Error::NotSymmetric { index: 0 });
                }
            }
        }
        Ok(Self { n, a })
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = diag[i];
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// Sets both (i, j) and (j, i).
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, val: f64) {
        self.a[i * self.n + j] = val;
        self.a[j * self.n + i] = val;
    }

    #[inline]
    pub fn add_sym(&mut self, i: usize, j: usize, val: f64) {
        self.a[i * self.n + j] += val;
        if i != j {
            self.a[j * self.n + i] += val;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        dot(x, &y)
    }

    pub fn frob_norm(&self) -> f64 {
        norm2(&self.a)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

impl MatVec for SymDense {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            y[i] = dot(&self.a[i * self.n..(i + 1) * self.n], x);
        }
    }
}

/// Output of an extreme-eigenpair solve.
#[derive(Clone, Debug)]
pub struct EigResult {
    /// Rayleigh quotient `u^T J u` of the returned vector, recomputed against
    /// the operator.
    pub lambda: f64,
    /// Unit eigenvector estimate.
    pub vector: Vec<f64>,
    /// Lanczos iterations consumed (0 for the dense solver).
    pub iters: usize,
    /// Set when the Krylov space was exhausted before the requested depth.
    pub breakdown: bool,
}

/// Iteration count for the Lanczos method to reach relative accuracy `rho/8`
/// with failure probability at most `p` on an `n`-dimensional PSD operator:
/// `ceil(1/2 + log(4 n / p^2) / sqrt(rho))` with the natural logarithm.
pub fn lanczos_iters_for(rho: f64, n: usize, p: f64) -> usize {
    assert!(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    assert!(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
    assert!(n >= 1);
    let raw = 0.5 + (4.0 * n as f64 / (p * p)).ln() / rho.sqrt();
    raw.ceil() as usize
}

/// Randomized Lanczos for the largest eigenpair of a symmetric PSD operator.
///
/// Starts from an i.i.d. standard-normal vector normalized to unit length
/// (uniform on the sphere), keeps the full basis with two-pass
/// reorthogonalization, and returns the top Ritz pair after
/// `min(num_iters, n)` steps. On breakdown the best Ritz pair found so far is
/// returned with the `breakdown` flag set.
pub fn lanczos_max_eig<M: MatVec + ?Sized>(
    op: &M,
    num_iters: usize,
    rng: &mut ChaCha8Rng,
) -> EigResult {
    let n = op.dim();
    assert!(n >= 1, "operator dimension must be positive");
    assert!(num_iters >= 1, "at least one Lanczos iteration is required");
    let steps = num_iters.min(n);

    let start = random_unit_vector(n, rng);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    basis.push(start);

    let mut alphas: Vec<f64> = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps.saturating_sub(1));
    let mut work = vec![0.0; n];
    let mut norm_est = 0.0f64;
    let mut breakdown = false;

    for j in 0..steps {
        op.apply(&basis[j], &mut work);
        let alpha = dot(&basis[j], &work);
        axpy(-alpha, &basis[j], &mut work);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut work);
        }
        // Full reorthogonalization, two classical Gram-Schmidt passes.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &work);
                if c != 0.0 {
                    axpy(-c, q, &mut work);
                }
            }
        }
        alphas.push(alpha);
        if j + 1 == steps {
            break;
        }
        let beta = norm2(&work);
        let prev_beta = if j > 0 { betas[j - 1] } else { 0.0 };
        norm_est = norm_est.max(alpha.abs() + beta + prev_beta);
        if beta <= BREAKDOWN_RELTOL * norm_est.max(f64::MIN_POSITIVE) {
            breakdown = true;
            break;
        }
        betas.push(beta);
        let mut next = work.clone();
        scale(1.0 / beta, &mut next);
        basis.push(next);
    }

    let k = alphas.len();
    let (_, y) = tridiag_top_pair(&alphas, &betas).expect("implicit QL on a Ritz tridiagonal");

    let mut u = vec![0.0; n];
    for (j, q) in basis.iter().enumerate().take(k) {
        axpy(y[j], q, &mut u);
    }
    let un = norm2(&u);
    if un > 0.0 {
        scale(1.0 / un, &mut u);
    } else {
        // Degenerate fallback: keep the start direction.
        u.copy_from_slice(&basis[0]);
    }

    op.apply(&u, &mut work);
    let lambda = dot(&u, &work);
    EigResult {
        lambda,
        vector: u,
        iters: k,
        breakdown,
    }
}

/// Exact largest eigenpair of a dense symmetric matrix via Householder
/// tridiagonalization and implicit-shift QL. The eigenvector is normalized
/// and sign-fixed so its largest-magnitude entry is positive.
pub fn dense_max_eig(a: &SymDense, cap: usize) -> Result<EigResult> {
    let n = a.n();
    if n == 0 {
        return Err(Error::Config("empty matrix".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if n == 1 {
        return Ok(EigResult {
            lambda: a.get(0, 0),
            vector: vec![1.0],
            iters: 0,
            breakdown: false,
        });
    }

    let (d, e, q) = householder_tridiag(a);
    let off: Vec<f64> = e[1..].to_vec();
    let (_, y) = tridiag_top_pair(&d, &off)?;

    let mut u = vec![0.0; n];
    for r in 0..n {
        u[r] = dot(&q[r * n..(r + 1) * n], &y);
    }
    normalize_with_sign(&mut u);

    let anorm = a.max_abs().max(1e-300) * n as f64;
    let mut work = vec![0.0; n];
    a.apply(&u, &mut work);
    let mut lambda = dot(&u, &work);
    let resid = residual_norm(&work, lambda, &u);
    if resid > 1e-10 * anorm {
        // Rare clustered-spectrum path: accumulate all eigenvectors.
        let mut d2 = d.clone();
        let mut e2 = e.clone();
        let mut z = q.clone();
        tql(&mut d2, &mut e2, Some(&mut z), n)?;
        let best = (0..n)
            .max_by(|&i, &j| d2[i].partial_cmp(&d2[j]).unwrap())
            .unwrap();
        for r in 0..n {
            u[r] = z[r * n + best];
        }
        normalize_with_sign(&mut u);
        a.apply(&u, &mut work);
        lambda = dot(&u, &work);
    }

    Ok(EigResult {
        lambda,
        vector: u,
        iters: 0,
        breakdown: false,
    })
}

/// All eigenvalues of a dense symmetric matrix (unordered).
pub fn sym_eigenvalues(a: &SymDense) -> Result<Vec<f64>> {
    let n = a.n();
    if n == 1 {
        return Ok(vec![a.get(0, 0)]);
    }
    let (mut d, mut e, _) = householder_tridiag(a);
    tql(&mut d, &mut e, None, n)?;
    Ok(d)
}

fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let nrm = norm2(&v);
        if nrm > 1e-150 {
            let mut v = v;
            scale(1.0 / nrm, &mut v);
            return v;
        }
    }
}

fn normalize_with_sign(u: &mut [f64]) {
    let nrm = norm2(u);
    if nrm > 0.0 {
        scale(1.0 / nrm, u);
    }
    let mut best = 0usize;
    for i in 1..u.len() {
        if u[i].abs() > u[best].abs() {
            best = i;
        }
    }
    if u[best] < 0.0 {
        scale(-1.0, u);
    }
}

fn residual_norm(av: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..v.len() {
        let r = av[i] - lambda * v[i];
        s += r * r;
    }
    s.sqrt()
}

/// Householder reduction of a real symmetric matrix to tridiagonal form with
/// accumulation of the orthogonal factor.
///
/// Returns `(d, e, q)` with `d` the diagonal of `T`, `e[0] = 0` and `e[i]`
/// the subdiagonal entry `T[i][i-1]`, and `q` a row-major `n x n` orthogonal
/// matrix such that `A = Q T Q^T`. Ported from the EISPACK/Jama `tred2`
/// routine.
fn householder_tridiag(a: &SymDense) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = a.n();
    let mut v = a.a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }

    for i in (1..n).rev() {
        // Scale to avoid under/overflow.
        let mut scale_acc = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale_acc += item.abs();
        }
        if scale_acc == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            // Generate the Householder vector.
            for item in d.iter_mut().take(i) {
                *item /= scale_acc;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale_acc * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            // Apply the similarity transformation to the remaining columns.
            for j in 0..i {
                let f = d[j];
                v[j * n + i] = f;
                let mut g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    for i in 0..(n - 1) {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + (n - 1)] = 1.0;
    e[0] = 0.0;

    (d, e, v)
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e` the subdiagonal in the shifted convention
/// `e[i] = T[i][i-1]` with `e[0]` ignored. On return `d` holds eigenvalues
/// (unordered). When `z` is given (row-major `n x n`), its columns are
/// rotated along, so priming it with the identity (or an accumulated
/// orthogonal factor) yields eigenvectors. Ported from EISPACK/Jama `tql2`.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = 2.0f64.powi(-52);
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_ITERS {
                    return Err(Error::EigNonconvergence);
                }

                // Implicit shift from the leading 2x2 block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                // One QL sweep of Givens rotations.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(zm) = z.as_deref_mut() {
                        for k in 0..n {
                            let h = zm[k * n + i + 1];
                            zm[k * n + i + 1] = s * zm[k * n + i] + c * h;
                            zm[k * n + i] = c * zm[k * n + i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Largest eigenpair of a symmetric tridiagonal matrix given as
/// `(diag, off)` with `off[i] = T[i+1][i]`.
fn tridiag_top_pair(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = diag.len();
    debug_assert_eq!(off.len(), k.saturating_sub(1));
    if k == 1 {
        return Ok((diag[0], vec![1.0]));
    }

    let mut d = diag.to_vec();
    let mut e = jama_offdiag(off, k);
    tql(&mut d, &mut e, None, k)?;
    let lambda = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut tnorm = 0.0f64;
    for i in 0..k {
        let lo = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let hi = if i + 1 < k { off[i].abs() } else { 0.0 };
        tnorm = tnorm.max(diag[i].abs() + lo + hi);
    }

    for attempt in 0..2 {
        if let Some(y) = tridiag_inverse_iteration(diag, off, lambda, tnorm, attempt) {
            return Ok((lambda, y));
        }
    }

    // Clustered top eigenvalue: fall back to accumulating all eigenvectors.
    let mut d2 = diag.to_vec();
    let mut e2 = jama_offdiag(off, k);
    let mut z = vec![0.0; k * k];
    for i in 0..k {
        z[i * k + i] = 1.0;
    }
    tql(&mut d2, &mut e2, Some(&mut z), k)?;
    let best = (0..k)
        .max_by(|&i, &j| d2[i].partial_cmp(&d2[j]).unwrap())
        .unwrap();
    let y: Vec<f64> = (0..k).map(|r| z[r * k + best]).collect();
    Ok((d2[best], y))
}

fn jama_offdiag(off: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k];
    e[1..k].copy_from_slice(&off[..(k - 1)]);
    e
}

/// LU factorization of `T - shift I` with partial pivoting (LAPACK dgttrf
/// layout), kept around to run repeated inverse-iteration solves.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|&x| x - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                swapped[i] = true;
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                du[i] = temp;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }

        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if !self.swapped[i] {
                b[i + 1] -= self.dl[i] * b[i];
            } else {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn tridiag_inverse_iteration(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    tnorm: f64,
    attempt: usize,
) -> Option<Vec<f64>> {
    let k = diag.len();
    let pert = tnorm.max(lambda.abs()).max(1e-300) * 1e-12 * (attempt + 1) as f64;
    let shift = lambda + pert;
    let tiny = tnorm.max(1e-300) * f64::EPSILON * f64::EPSILON;
    let lu = TridiagLu::factor(diag, off, shift, tiny);

    let mut y = vec![0.0; k];
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = if attempt == 0 {
            1.0
        } else if i % 2 == 0 {
            1.0
        } else {
            -1.0
        };
    }
    scale(1.0 / norm2(&y), &mut y);

    for _ in 0..4 {
        lu.solve(&mut y);
        let nrm = norm2(&y);
        if !nrm.is_finite() || nrm == 0.0 {
            return None;
        }
        scale(1.0 / nrm, &mut y);
    }

    // Accept only if the Ritz residual is at the roundoff level.
    let mut ty = vec![0.0; k];
    for i in 0..k {
        let mut s = diag[i] * y[i];
        if i > 0 {
            s += off[i - 1] * y[i - 1];
        }
        if i + 1 < k {
            s += off[i] * y[i + 1];
        }
        ty[i] = s;
    }
    let ray = dot(&y, &ty);
    let resid = residual_norm(&ty, ray, &y);
    if resid <= 1e-11 * tnorm.max(1e-300) && (ray - lambda).abs() <= 1e-8 * tnorm.max(1e-300) {
        Some(y)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_psd(n: usize, seed: u64) -> SymDense {
        // B^T B is PSD by construction.
        let mut r = rng(seed);
        let b: Vec<f64> = (0..n * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut a = SymDense::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in 0..n {
                    s += b[k * n + i] * b[k * n + j];
                }
                a.set_sym(i, j, s);
            }
        }
        a
    }

    /// Independent oracle: cyclic Jacobi eigenvalue iteration.
    fn jacobi_eigenvalues(a: &SymDense) -> Vec<f64> {
        let n = a.n();
        let mut m = a.a.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += m[i * n + j] * m[i * n + j];
                }
            }
            if off.sqrt() < 1e-14 * (1.0 + norm2(&m)) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = m[k * n + p];
                        let akq = m[k * n + q];
                        m[k * n + p] = c * akp - s * akq;
                        m[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = m[p * n + k];
                        let aqk = m[q * n + k];
                        m[p * n + k] = c * apk - s * aqk;
                        m[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| m[i * n + i]).collect()
    }

    #[test]
    fn iters_for_matches_closed_form() {
        // ceil(0.5 + ln 4) = 2 at rho = 1, n = 1, p = 1.
        assert_eq!(lanczos_iters_for(1.0, 1, 1.0), 2);
        // The scheduled-strategy setting: delta = 0.025, c = 4, theta = 50.
        assert_eq!(lanczos_iters_for(0.001, 500, 0.1), 387);
    }

    #[test]
    fn iters_for_increases_as_p_shrinks() {
        let mut prev = 0;
        for k in 1..6 {
            let p = 0.5f64.powi(k);
            let n = lanczos_iters_for(0.01, 100, p);
            assert!(n > prev, "expected strict growth, got {n} after {prev}");
            prev = n;
        }
    }

    #[test]
    #[should_panic(expected = "rho")]
    fn iters_for_rejects_rho_above_one() {
        lanczos_iters_for(1.5, 10, 0.5);
    }

    #[test]
    fn dense_diagonal_matrix() {
        let a = SymDense::from_diag(&[1.0, 2.0, 3.0]);
        let r = dense_max_eig(&a, DEFAULT_DENSE_CAP).unwrap();
        assert!((r.lambda - 3.0).abs() < 1e-12);
        assert!((r.vector[2].abs() - 1.0).abs() < 1e-12);
        assert!(r.vector[2] > 0.0, "sign convention");
    }

    #[test]
    fn dense_two_by_two() {
        let mut a = SymDense::zeros(2);
        a.set_sym(0, 0, 2.0);
        a.set_sym(1, 1, 2.0);
        a.set_sym(0, 1, 1.0);
        let r = dense_max_eig(&a, DEFAULT_DENSE_CAP).unwrap();
        assert!((r.lambda - 3.0).abs() < 1e-12);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!((r.vector[0] - inv_sqrt2).abs() < 1e-10);
        assert!((r.vector[1] - inv_sqrt2).abs() < 1e-10);
    }

    #[test]
    fn dense_residual_on_random_psd() {
        for seed in 0..5 {
            let a = random_psd(20, seed);
            let r = dense_max_eig(&a, DEFAULT_DENSE_CAP).unwrap();
            let mut av = vec![0.0; 20];
            a.apply(&r.vector, &mut av);
            let resid = {
                let mut s = 0.0;
                for i in 0..20 {
                    let d = av[i] - r.lambda * r.vector[i];
                    s += d * d;
                }
                s.sqrt()
            };
            let norm = jacobi_eigenvalues(&a)
                .iter()
                .fold(0.0f64, |m, &x| m.max(x.abs()));
            assert!(
                resid <= 1e-10 * norm,
                "seed {seed}: residual {resid:.3e} vs norm {norm:.3e}"
            );
        }
    }

    #[test]
    fn dense_matches_jacobi_oracle() {
        for seed in 10..14 {
            let a = random_psd(15, seed);
            let r = dense_max_eig(&a, DEFAULT_DENSE_CAP).unwrap();
            let jmax = jacobi_eigenvalues(&a)
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (r.lambda - jmax).abs() <= 1e-9 * jmax.abs().max(1.0),
                "seed {seed}: QL {} vs Jacobi {}",
                r.lambda,
                jmax
            );
        }
    }

    #[test]
    fn eigenvalues_match_jacobi_oracle() {
        let a = random_psd(12, 99);
        let mut ours = sym_eigenvalues(&a).unwrap();
        let mut theirs = jacobi_eigenvalues(&a);
        ours.sort_by(|x, y| x.partial_cmp(y).unwrap());
        theirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (o, t) in ours.iter().zip(theirs.iter()) {
            assert!((o - t).abs() < 1e-9 * (1.0 + t.abs()), "{o} vs {t}");
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let a = SymDense::from_diag(&[1.0; 8]);
        assert!(matches!(
            dense_max_eig(&a, 4),
            Err(Error::CapExceeded { n: 8, cap: 4 })
        ));
    }

    #[test]
    fn from_full_rejects_asymmetry() {
        let buf = vec![1.0, 2.0, 0.0, 1.0];
        assert!(SymDense::from_full(2, buf).is_err());
    }

    #[test]
    fn lanczos_identity_converges_in_one_step() {
        let a = SymDense::from_diag(&[1.0; 6]);
        let r = lanczos_max_eig(&a, 1, &mut rng(3));
        assert!((r.lambda - 1.0).abs() < 1e-12);
        assert_eq!(r.iters, 1);
    }

    #[test]
    fn lanczos_full_krylov_recovers_top_eigenvalue() {
        let diag: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let a = SymDense::from_diag(&diag);
        let r = lanczos_max_eig(&a, 10, &mut rng(7));
        assert!(
            (r.lambda - 10.0).abs() < 1e-8,
            "full-space Ritz value {} should be exact",
            r.lambda
        );
    }

    #[test]
    fn lanczos_matches_dense_on_random_psd() {
        for seed in 0..4 {
            let n = 30 + 5 * seed as usize;
            let a = random_psd(n, 40 + seed);
            let dense = dense_max_eig(&a, DEFAULT_DENSE_CAP).unwrap();
            let lz = lanczos_max_eig(&a, n, &mut rng(seed));
            assert!(
                (lz.lambda - dense.lambda).abs() <= 1e-8 * dense.lambda.abs().max(1.0),
                "n {n}: lanczos {} vs dense {}",
                lz.lambda,
                dense.lambda
            );
        }
    }

    #[test]
    fn lanczos_ritz_value_monotone_in_depth() {
        let a = random_psd(40, 123);
        let mut prev = f64::NEG_INFINITY;
        for iters in [1usize, 2, 4, 8, 16, 32, 40] {
            // Same seed, so every run extends the same Krylov space.
            let r = lanczos_max_eig(&a, iters, &mut rng(9));
            assert!(
                r.lambda >= prev - 1e-10,
                "Ritz value dropped from {prev} to {} at depth {iters}",
                r.lambda
            );
            prev = r.lambda;
        }
    }

    #[test]
    fn lanczos_breakdown_on_low_rank_operator() {
        // Rank-2 operator in dimension 12: the Krylov space exhausts early.
        let mut a = SymDense::zeros(12);
        a.set_sym(0, 0, 5.0);
        a.set_sym(1, 1, 2.0);
        let r = lanczos_max_eig(&a, 12, &mut rng(11));
        assert!(r.breakdown, "expected early exhaustion");
        assert!((r.lambda - 5.0).abs() < 1e-9);
    }

    #[test]
    fn lanczos_probabilistic_guarantee_on_gapped_matrix() {
        // 100x100 PSD with a spectral gap; count violations of the
        // relative-accuracy guarantee across seeds.
        let mut diag = vec![0.0; 100];
        for (i, x) in diag.iter_mut().enumerate() {
            *x = if i == 0 { 10.0 } else { 5.0 * i as f64 / 100.0 };
        }
        let a = SymDense::from_diag(&diag);
        let rho = 0.25;
        let p = 0.05;
        let iters = lanczos_iters_for(rho, 100, p);
        assert!(iters < 100, "test only meaningful below full depth");
        let mut violations = 0;
        let total = 200;
        for seed in 0..total {
            let r = lanczos_max_eig(&a, iters, &mut rng(1000 + seed));
            if r.lambda < (1.0 - rho / 8.0) * 10.0 {
                violations += 1;
            }
        }
        let frac = violations as f64 / total as f64;
        assert!(frac <= p + 0.05, "violation fraction {frac}");
    }

    #[test]
    fn lanczos_recovers_diag_instance_top_eigenvalue() {
        // Gradient operator of the diagonal family at X0 = I/n has
        // lambda_max = n; with the certified budget at rho = 0.01, p = 0.1
        // the relative error stays below 1e-6 in >= 180 of 200 seeded runs.
        use crate::instances::gen_diag;
        use crate::linmap::GradientOperator;
        let n = 500;
        let inst = gen_diag(n, 50).unwrap();
        let v0: Vec<f64> = inst.traces().iter().map(|t| t / n as f64).collect();
        let op = GradientOperator::new(&inst, &v0).unwrap();
        let budget = lanczos_iters_for(0.01, n, 0.1);
        assert_eq!(budget, 123);
        let dense_lambda = n as f64; // max_i (i / (i/n)) = n
        let successes: usize = (0..200u64)
            .map(|seed| {
                let r = lanczos_max_eig(&op, budget, &mut rng(9_000 + seed));
                usize::from((r.lambda - dense_lambda).abs() / dense_lambda <= 1e-6)
            })
            .sum();
        assert!(successes >= 180, "only {successes}/200 runs within 1e-6");
    }

    #[test]
    fn tridiag_lu_solves_shifted_system() {
        let diag = [4.0, 3.0, 5.0, 1.0, 2.0];
        let off = [1.0, -2.0, 0.5, 1.5];
        let lu = TridiagLu::factor(&diag, &off, 0.7, 1e-300);
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut b = vec![0.0; 5];
        for i in 0..5 {
            let mut s = (diag[i] - 0.7) * x_true[i];
            if i > 0 {
                s += off[i - 1] * x_true[i - 1];
            }
            if i + 1 < 5 {
                s += off[i] * x_true[i + 1];
            }
            b[i] = s;
        }
        lu.solve(&mut b);
        for i in 0..5 {
            assert!((b[i] - x_true[i]).abs() < 1e-12, "x[{i}] = {}", b[i]);
        }
    }
}
