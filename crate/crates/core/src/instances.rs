//! Problem-instance generators, ground truth and file I/O.
//!
//! Two experiment families plus a loader for user-supplied data:
//!
//! * Diag — `A_i` diagonal with `[A_i]_{ii} = i`, whose optimum is known in
//!   closed form (a `d x d` scaled identity block `I/d`).
//! * Rnd — `A_i = sum_{j=1}^n u_j u_j^T` with standard normal factors.
//!
//! The text format is line-oriented: a version-tagged header, a size line
//! `n d kind`, then the matrix payload per kind. Reals are written in
//! shortest round-trip decimal form, so diag and factor instances survive a
//! save/load cycle bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linmap::{Instance, MatrixData, PackedSym};

const FORMAT_TAG: &str = "scfw-instance v1";

/// Diagonal family: `[A_i]_{ii} = i` for `i = 1..=d`, all other entries zero.
pub fn gen_diag(n: usize, d: usize) -> Result<Instance> {
    if d > n {
        return Err(Error::Config(format!(
            "diag family requires d <= n, got d = {d}, n = {n}"
        )));
    }
    let mats = (0..d)
        .map(|i| {
            let mut diag = vec![0.0; n];
            diag[i] = (i + 1) as f64;
            MatrixData::Diagonal(diag)
        })
        .collect();
    Instance::new(n, mats)
}

/// Closed-form optimum of the Diag family.
#[derive(Clone, Debug)]
pub struct DiagOptimum {
    /// `F* = -sum_{i=1}^d log(i/d)`.
    pub f_star: f64,
    /// Symbolic description of the optimal matrix.
    pub x_star: String,
}

/// Optimal value of the Diag instance: the optimum places the scaled
/// identity `I/d` on the first `d` diagonal entries, so `v*_i = i/d`.
///
/// Debug builds verify stationarity (zero duality gap) at `v*` instead of
/// trusting the formula.
pub fn diag_optimum(n: usize, d: usize) -> DiagOptimum {
    assert!(d >= 1 && d <= n, "requires 1 <= d <= n");
    let d_f = d as f64;
    let f_star = -(1..=d).map(|i| (i as f64 / d_f).ln()).sum::<f64>();
    #[cfg(debug_assertions)]
    {
        let inst = gen_diag(n, d).expect("diag generator");
        let vstar: Vec<f64> = (1..=d).map(|i| i as f64 / d_f).collect();
        let out = crate::oracle::exact_lmo(&inst, &vstar, n.max(2000))
            .expect("exact LMO at the diag optimum");
        debug_assert!(
            out.g_approx.abs() <= 1e-9,
            "diag optimum is not stationary: gap {}",
            out.g_approx
        );
    }
    DiagOptimum {
        f_star,
        x_star: format!("diag(I/{d} on the first {d} entries, 0 elsewhere)"),
    }
}

/// Random Wishart-style family: each `A_i = sum_{j=1}^n u_j u_j^T` with
/// `u_j ~ N(0, I)`, stored as factors.
pub fn gen_rnd(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Instance> {
    if n == 0 || d == 0 {
        return Err(Error::Config("n and d must be at least 1".into()));
    }
    let mats = (0..d)
        .map(|_| {
            let factors = (0..n)
                .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
                .collect();
            MatrixData::Factors(factors)
        })
        .collect();
    Instance::new(n, mats)
}

/// Recognizes the canonical Diag family and returns its closed-form optimal
/// value.
pub fn canonical_diag_fstar(instance: &Instance) -> Option<f64> {
    let n = instance.n();
    let d = instance.d();
    if d > n {
        return None;
    }
    for (i, m) in instance.matrices().iter().enumerate() {
        let MatrixData::Diagonal(diag) = m else {
            return None;
        };
        for (j, &x) in diag.iter().enumerate() {
            let expect = if j == i { (i + 1) as f64 } else { 0.0 };
            if x != expect {
                return None;
            }
        }
    }
    Some(diag_optimum(n, d).f_star)
}

/// Writes an instance in the versioned text format. All matrices must share
/// one storage kind.
pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    let kind = instance.matrices()[0].kind_name();
    if instance
        .matrices()
        .iter()
        .any(|m| m.kind_name() != kind)
    {
        return Err(Error::Config(
            "instance file format requires a single storage kind".into(),
        ));
    }
    let n = instance.n();
    let mut out = String::new();
    writeln!(out, "{FORMAT_TAG}").unwrap();
    writeln!(out, "{} {} {}", n, instance.d(), kind).unwrap();
    for m in instance.matrices() {
        match m {
            MatrixData::Diagonal(diag) => {
                writeln!(out, "{}", join_floats(diag)).unwrap();
            }
            MatrixData::DenseSym(p) => {
                for i in 0..n {
                    let row: Vec<f64> = (0..n).map(|j| p.get(i, j)).collect();
                    writeln!(out, "{}", join_floats(&row)).unwrap();
                }
            }
            MatrixData::Factors(fs) => {
                writeln!(out, "{}", fs.len()).unwrap();
                for f in fs {
                    writeln!(out, "{}", join_floats(f)).unwrap();
                }
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Reads an instance file, validating the header, dimensions and PSD
/// invariants.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_instance(&text)
}

fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: format!("empty file; expected header `{FORMAT_TAG}`"),
    })?;
    if header.trim() != FORMAT_TAG {
        return Err(Error::Parse {
            line: 1,
            msg: format!("bad version tag `{}`; expected `{FORMAT_TAG}`", header.trim()),
        });
    }

    let (idx, size_line) = lines.next().ok_or(Error::Parse {
        line: 2,
        msg: "missing size line `n d kind`".into(),
    })?;
    let mut parts = size_line.split_whitespace();
    let n: usize = parse_field(parts.next(), idx + 1, "n")?;
    let d: usize = parse_field(parts.next(), idx + 1, "d")?;
    let kind = parts.next().ok_or(Error::Parse {
        line: idx + 1,
        msg: "missing kind field".into(),
    })?;
    if parts.next().is_some() {
        return Err(Error::Parse {
            line: idx + 1,
            msg: "trailing tokens after `n d kind`".into(),
        });
    }

    let mut matrices = Vec::with_capacity(d);
    match kind {
        "diag" => {
            for _ in 0..d {
                let (lineno, line) = next_content_line(&mut lines, n, d)?;
                matrices.push(MatrixData::Diagonal(parse_floats(line, lineno, n)?));
            }
        }
        "dense" => {
            for _ in 0..d {
                let mut full = Vec::with_capacity(n * n);
                for _ in 0..n {
                    let (lineno, line) = next_content_line(&mut lines, n, d)?;
                    full.extend(parse_floats(line, lineno, n)?);
                }
                matrices.push(MatrixData::DenseSym(packed_from_full(
                    n,
                    &full,
                    matrices.len(),
                )?));
            }
        }
        "factors" => {
            for _ in 0..d {
                let (lineno, line) = next_content_line(&mut lines, n, d)?;
                let m_i: usize = line.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad factor count `{}`", line.trim()),
                })?;
                let mut fs = Vec::with_capacity(m_i);
                for _ in 0..m_i {
                    let (lineno, line) = next_content_line(&mut lines, n, d)?;
                    fs.push(parse_floats(line, lineno, n)?);
                }
                matrices.push(MatrixData::Factors(fs));
            }
        }
        other => {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("unknown kind `{other}`; expected diag, dense or factors"),
            });
        }
    }

    Instance::new(n, matrices)
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    name: &str,
) -> Result<T> {
    let raw = field.ok_or(Error::Parse {
        line,
        msg: format!("missing field `{name}`"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value `{raw}` for field `{name}`"),
    })
}

fn next_content_line<'a, I: Iterator<Item = (usize, &'a str)>>(
    lines: &mut I,
    n: usize,
    d: usize,
) -> Result<(usize, &'a str)> {
    for (idx, line) in lines.by_ref() {
        if !line.trim().is_empty() {
            return Ok((idx + 1, line));
        }
    }
    Err(Error::Parse {
        line: 0,
        msg: format!("file truncated: expected more data for n = {n}, d = {d}"),
    })
}

fn parse_floats(line: &str, lineno: usize, expect: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(expect);
    for tok in line.split_whitespace() {
        let x: f64 = tok.parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad real `{tok}`"),
        })?;
        out.push(x);
    }
    if out.len() != expect {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {expect} values, found {}", out.len()),
        });
    }
    Ok(out)
}

fn packed_from_full(n: usize, full: &[f64], index: usize) -> Result<PackedSym> {
    let amax = full.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let tol = 1e-12 * amax.max(1e-300);
    let mut p = PackedSym::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let a = full[i * n + j];
            let b = full[j * n + i];
            if (a - b).abs() > tol {
                return Err(Error::NotSymmetric { index });
            }
            p.set(i, j, a);
        }
    }
    Ok(p)
}

fn join_floats(xs: &[f64]) -> String {
    let strs: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    strs.join(" ")
}
