//! Matrix-free representation of the linear map `B(X) = (<A_i, X>)_i`, its
//! rank-one specialization, and the gradient operator
//! `J = -B*(grad f(B(X))) = sum_i A_i / v_i`, all accessed through
//! matrix-vector products.
//!
//! Three storage kinds back the same contract: diagonal vectors, dense
//! symmetric matrices in packed lower-triangle form, and factor lists for
//! `A_i = sum_j u_j u_j^T`. Factor matrices may additionally carry a packed
//! dense cache so that repeated quadratic forms and gradient assemblies cost
//! `O(n^2)` instead of `O(m_i n)` per factor.

use std::sync::OnceLock;

use crate::eigen::{sym_eigenvalues, MatVec, SymDense};
use crate::error::{Error, Result};
use crate::vecops::{dot, CompensatedSum};

/// Above this many accumulated terms, Frobenius inner products switch to
/// compensated summation: the results feed logs and reciprocals, so relative
/// accuracy matters near the boundary.
const COMPENSATE_THRESHOLD: usize = 1_000_000;

/// Dense caching of factor matrices is worthwhile only below these sizes.
const QUAD_CACHE_MAX_N: usize = 2000;
const QUAD_CACHE_MAX_TOTAL: usize = 200_000_000;

/// Symmetric matrix in packed lower-triangle storage (row-major).
#[derive(Clone, Debug)]
pub struct PackedSym {
    n: usize,
    a: Vec<f64>,
}

impl PackedSym {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * (n + 1) / 2],
        }
    }

    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        i * (i + 1) / 2 + j
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.a[Self::idx(i, j)]
        } else {
            self.a[Self::idx(j, i)]
        }
    }

    /// Sets the (i, j) entry, `j <= i`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, val: f64) {
        self.a[Self::idx(i, j)] = val;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, val: f64) {
        self.a[Self::idx(i, j)] += val;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[Self::idx(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                let x = self.a[Self::idx(i, j)];
                s += if i == j { x * x } else { 2.0 * x * x };
            }
        }
        s.sqrt()
    }

    /// `y += coeff * A x`.
    pub fn matvec_acc(&self, x: &[f64], coeff: f64, y: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.a[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            let mut s = row[i] * x[i];
            for j in 0..i {
                let aij = row[j];
                s += aij * x[j];
                y[j] += coeff * aij * x[i];
            }
            y[i] += coeff * s;
        }
    }

    pub fn quad_form(&self, u: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            let row = &self.a[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            let mut t = 0.0;
            for j in 0..i {
                t += row[j] * u[j];
            }
            s += (2.0 * t + row[i] * u[i]) * u[i];
        }
        s
    }

    /// Frobenius inner product with a full symmetric matrix `x` (row-major).
    fn inner_full(&self, x: &[f64], compensate: bool) -> f64 {
        let n = self.n;
        if compensate {
            let mut acc = CompensatedSum::default();
            for i in 0..n {
                for j in 0..=i {
                    let a = self.a[Self::idx(i, j)];
                    let w = if i == j { 1.0 } else { 2.0 };
                    acc.add(w * a * x[i * n + j]);
                }
            }
            acc.value()
        } else {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..=i {
                    let a = self.a[Self::idx(i, j)];
                    let w = if i == j { 1.0 } else { 2.0 };
                    s += w * a * x[i * n + j];
                }
            }
            s
        }
    }

    fn to_dense(&self) -> SymDense {
        let mut m = SymDense::zeros(self.n);
        for i in 0..self.n {
            for j in 0..=i {
                m.set_sym(i, j, self.a[Self::idx(i, j)]);
            }
        }
        m
    }
}

/// One data matrix `A_i`.
#[derive(Clone, Debug)]
pub enum MatrixData {
    /// Diagonal matrix stored as its length-n diagonal.
    Diagonal(Vec<f64>),
    /// Dense symmetric matrix, packed lower triangle.
    DenseSym(PackedSym),
    /// Low-rank-style factor list: `A = sum_j u_j u_j^T`.
    Factors(Vec<Vec<f64>>),
}

impl MatrixData {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MatrixData::Diagonal(_) => "diag",
            MatrixData::DenseSym(_) => "dense",
            MatrixData::Factors(_) => "factors",
        }
    }

    fn check_dims(&self, n: usize) -> bool {
        match self {
            MatrixData::Diagonal(d) => d.len() == n,
            MatrixData::DenseSym(p) => p.n == n,
            MatrixData::Factors(fs) => fs.iter().all(|f| f.len() == n),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            MatrixData::Diagonal(d) => d.iter().sum(),
            MatrixData::DenseSym(p) => p.trace(),
            MatrixData::Factors(fs) => fs.iter().map(|f| dot(f, f)).sum(),
        }
    }

}

/// The problem data `{A_i}` with precomputed traces.
///
/// Immutable after construction and safe to share across threads. The packed
/// dense cache for factor matrices is built at most once (write-once cell) so
/// its presence never changes mid-solve.
#[derive(Debug)]
pub struct Instance {
    n: usize,
    matrices: Vec<MatrixData>,
    traces: Vec<f64>,
    quad_cache: OnceLock<Option<Vec<Option<PackedSym>>>>,
}

impl Instance {
    pub fn new(n: usize, matrices: Vec<MatrixData>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if matrices.is_empty() {
            return Err(Error::Config("at least one data matrix is required".into()));
        }
        for (i, m) in matrices.iter().enumerate() {
            if !m.check_dims(n) {
                return Err(Error::DimensionMismatch {
                    what: "data matrix",
                    expected: n,
                    got: match m {
                        MatrixData::Diagonal(d) => d.len(),
                        MatrixData::DenseSym(p) => p.n,
                        MatrixData::Factors(fs) => {
                            fs.iter().map(|f| f.len()).find(|&l| l != n).unwrap_or(n)
                        }
                    },
                });
            }
            check_psd(i, m)?;
        }
        let traces: Vec<f64> = matrices.iter().map(|m| m.trace()).collect();
        for (i, &t) in traces.iter().enumerate() {
            if !(t > 0.0) {
                return Err(Error::NonpositiveTrace { index: i });
            }
        }
        Ok(Self {
            n,
            matrices,
            traces,
            quad_cache: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn traces(&self) -> &[f64] {
        &self.traces
    }

    pub fn matrices(&self) -> &[MatrixData] {
        &self.matrices
    }

    /// `v_i = <A_i, X>` for a full symmetric `x` (row-major, length n^2).
    pub fn apply_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n * self.n {
            return Err(Error::DimensionMismatch {
                what: "apply_map input",
                expected: self.n * self.n,
                got: x.len(),
            });
        }
        let n = self.n;
        let compensate = self.d() * n * n > COMPENSATE_THRESHOLD;
        let mut out = Vec::with_capacity(self.d());
        let mut scratch = vec![0.0; n];
        for m in &self.matrices {
            let vi = match m {
                MatrixData::Diagonal(diag) => {
                    if compensate {
                        let mut acc = CompensatedSum::default();
                        for j in 0..n {
                            acc.add(diag[j] * x[j * n + j]);
                        }
                        acc.value()
                    } else {
                        (0..n).map(|j| diag[j] * x[j * n + j]).sum()
                    }
                }
                MatrixData::DenseSym(p) => p.inner_full(x, compensate),
                MatrixData::Factors(fs) => {
                    // <sum u u^T, X> = sum u^T X u
                    if compensate {
                        let mut acc = CompensatedSum::default();
                        for f in fs {
                            acc.add(quad_full(x, n, f, &mut scratch));
                        }
                        acc.value()
                    } else {
                        fs.iter().map(|f| quad_full(x, n, f, &mut scratch)).sum()
                    }
                }
            };
            out.push(vi);
        }
        Ok(out)
    }

    /// `w_i = u^T A_i u` for a unit vector `u` (the rank-one image `B(u u^T)`).
    pub fn apply_map_rank1(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "apply_map_rank1 input",
                expected: self.n,
                got: u.len(),
            });
        }
        debug_assert!((dot(u, u).sqrt() - 1.0).abs() <= 1e-12, "u must be unit norm");
        let cache = self.quad_cache.get().and_then(|c| c.as_ref());
        let mut out = Vec::with_capacity(self.d());
        for (i, m) in self.matrices.iter().enumerate() {
            let wi = match m {
                MatrixData::Diagonal(diag) => (0..self.n).map(|j| diag[j] * u[j] * u[j]).sum(),
                MatrixData::DenseSym(p) => p.quad_form(u),
                MatrixData::Factors(fs) => {
                    if let Some(p) = cache.and_then(|c| c[i].as_ref()) {
                        p.quad_form(u)
                    } else {
                        fs.iter()
                            .map(|f| {
                                let t = dot(f, u);
                                t * t
                            })
                            .sum()
                    }
                }
            };
            out.push(wi);
        }
        Ok(out)
    }

    /// Builds the packed dense cache for factor matrices when the size policy
    /// allows it. Idempotent; called once at the start of a solve so every
    /// later quadratic form takes the same arithmetic path.
    pub fn build_quad_cache(&self) {
        self.quad_cache.get_or_init(|| {
            let has_factors = self
                .matrices
                .iter()
                .any(|m| matches!(m, MatrixData::Factors(_)));
            let total = self.d() * self.n * self.n;
            if !has_factors || self.n > QUAD_CACHE_MAX_N || total > QUAD_CACHE_MAX_TOTAL {
                return None;
            }
            let cache = self
                .matrices
                .iter()
                .map(|m| match m {
                    MatrixData::Factors(fs) => {
                        let mut p = PackedSym::zeros(self.n);
                        for f in fs {
                            for i in 0..self.n {
                                if f[i] == 0.0 {
                                    continue;
                                }
                                for j in 0..=i {
                                    p.add(i, j, f[i] * f[j]);
                                }
                            }
                        }
                        Some(p)
                    }
                    _ => None,
                })
                .collect();
            Some(cache)
        });
    }

    fn quad_cache_entry(&self, i: usize) -> Option<&PackedSym> {
        self.quad_cache
            .get()
            .and_then(|c| c.as_ref())
            .and_then(|c| c[i].as_ref())
    }
}

fn quad_full(x: &[f64], n: usize, f: &[f64], scratch: &mut [f64]) -> f64 {
    for i in 0..n {
        scratch[i] = dot(&x[i * n..(i + 1) * n], f);
    }
    dot(f, &scratch[..n])
}

fn check_psd(index: usize, m: &MatrixData) -> Result<()> {
    match m {
        MatrixData::Diagonal(d) => {
            let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < 0.0 {
                return Err(Error::NotPsd {
                    index,
                    lambda_min: min,
                });
            }
        }
        MatrixData::DenseSym(p) => {
            // Smallest-eigenvalue probe with a relative floor, cheaper to
            // reason about than a full factorization pass.
            let dense = p.to_dense();
            let eigs = sym_eigenvalues(&dense)?;
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            let floor = -1e-8 * p.frob_norm();
            if min < floor {
                return Err(Error::NotPsd {
                    index,
                    lambda_min: min,
                });
            }
        }
        MatrixData::Factors(_) => {
            // PSD by construction.
        }
    }
    Ok(())
}

/// The gradient operator `J = sum_i A_i / v_i` at barrier coordinates `v`,
/// applied without ever materializing `J`.
#[derive(Debug)]
pub struct GradientOperator<'a> {
    instance: &'a Instance,
    v: Vec<f64>,
    /// When every `A_i` is diagonal, `J` is the diagonal matrix with these
    /// entries.
    diag: Option<Vec<f64>>,
}

impl<'a> GradientOperator<'a> {
    pub fn new(instance: &'a Instance, v: &[f64]) -> Result<Self> {
        if v.len() != instance.d() {
            return Err(Error::DimensionMismatch {
                what: "barrier coordinates",
                expected: instance.d(),
                got: v.len(),
            });
        }
        if let Some((i, &vi)) = v.iter().enumerate().find(|(_, &vi)| !(vi > 0.0)) {
            return Err(Error::DomainViolation(format!(
                "barrier coordinate v[{i}] = {vi} is not positive"
            )));
        }
        let all_diag = instance
            .matrices
            .iter()
            .all(|m| matches!(m, MatrixData::Diagonal(_)));
        let diag = if all_diag {
            let mut jd = vec![0.0; instance.n()];
            for (m, &vi) in instance.matrices.iter().zip(v.iter()) {
                if let MatrixData::Diagonal(d) = m {
                    for (out, &x) in jd.iter_mut().zip(d.iter()) {
                        *out += x / vi;
                    }
                }
            }
            Some(jd)
        } else {
            None
        };
        Ok(Self {
            instance,
            v: v.to_vec(),
            diag,
        })
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// The diagonal of `J` when the whole instance is diagonal.
    pub fn diag_form(&self) -> Option<&[f64]> {
        self.diag.as_deref()
    }

    /// `J y`, one matvec per data matrix.
    pub fn matvec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.instance.n()];
        self.apply(y, &mut out);
        out
    }

    /// Explicit `sum_i A_i / v_i` for small n; serves as the test oracle and
    /// as the backing matrix for dense-accelerated eigenvalue solves.
    pub fn assemble_dense(&self, cap: usize) -> Result<SymDense> {
        let n = self.instance.n();
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        let mut j = SymDense::zeros(n);
        for (i, (m, &vi)) in self
            .instance
            .matrices
            .iter()
            .zip(self.v.iter())
            .enumerate()
        {
            let coeff = 1.0 / vi;
            match m {
                MatrixData::Diagonal(d) => {
                    for (r, &x) in d.iter().enumerate() {
                        j.add_sym(r, r, coeff * x);
                    }
                }
                MatrixData::DenseSym(p) => {
                    for r in 0..n {
                        for c in 0..=r {
                            let x = p.get(r, c);
                            if x != 0.0 {
                                j.add_sym(r, c, coeff * x);
                            }
                        }
                    }
                }
                MatrixData::Factors(fs) => {
                    if let Some(p) = self.instance.quad_cache_entry(i) {
                        for r in 0..n {
                            for c in 0..=r {
                                let x = p.get(r, c);
                                if x != 0.0 {
                                    j.add_sym(r, c, coeff * x);
                                }
                            }
                        }
                    } else {
                        for f in fs {
                            for r in 0..n {
                                if f[r] == 0.0 {
                                    continue;
                                }
                                for c in 0..=r {
                                    j.add_sym(r, c, coeff * f[r] * f[c]);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(j)
    }

    /// Rough flop count of one streamed `J y`, used to decide whether a
    /// dense-assembled operator is cheaper for repeated products.
    pub fn stream_matvec_flops(&self) -> usize {
        let n = self.instance.n();
        self.instance
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| match m {
                MatrixData::Diagonal(_) => 2 * n,
                MatrixData::DenseSym(_) => 2 * n * n,
                MatrixData::Factors(fs) => {
                    if self.instance.quad_cache_entry(i).is_some() {
                        2 * n * n
                    } else {
                        4 * n * fs.len()
                    }
                }
            })
            .sum()
    }
}

impl MatVec for GradientOperator<'_> {
    fn dim(&self) -> usize {
        self.instance.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.instance.n();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        if let Some(jd) = &self.diag {
            for i in 0..n {
                y[i] = jd[i] * x[i];
            }
            return;
        }
        y.iter_mut().for_each(|t| *t = 0.0);
        for (i, (m, &vi)) in self
            .instance
            .matrices
            .iter()
            .zip(self.v.iter())
            .enumerate()
        {
            let coeff = 1.0 / vi;
            match m {
                MatrixData::Diagonal(d) => {
                    for r in 0..n {
                        y[r] += coeff * d[r] * x[r];
                    }
                }
                MatrixData::DenseSym(p) => p.matvec_acc(x, coeff, y),
                MatrixData::Factors(fs) => {
                    if let Some(p) = self.instance.quad_cache_entry(i) {
                        p.matvec_acc(x, coeff, y);
                    } else {
                        for f in fs {
                            let t = coeff * dot(f, x);
                            for r in 0..n {
                                y[r] += t * f[r];
                            }
                        }
                    }
                }
            }
        }
    }
}
