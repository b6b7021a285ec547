//! Dense Hermitian matrices and their spectral calculus.
//!
//! Everything the bound evaluators need: validated construction (hermiticity
//! within 1e-12 relative), addition/scaling, eigendecomposition, spectral
//! functions f(A), the PSD partial order, and the intrinsic dimension
//! r(S) = tr S / ||S||.
//!
//! The eigensolver is a cyclic Jacobi sweep over the 2d x 2d real symmetric
//! embedding [[Re A, -Im A], [Im A, Re A]]. Each eigenvalue of A appears
//! twice in the embedding; complex eigenvectors are recovered from the real
//! ones by pivoted Gram-Schmidt inside each eigenvalue cluster, so degenerate
//! spectra (and the systematic two-fold degeneracy of the embedding) are
//! handled without special cases. Vectors are normalized so the largest
//! component is real positive, which pins the output bit-for-bit.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    /// Row-major, length dim*dim.
    entries: Vec<Complex64>,
}

/// Interchange format: {"d": 2, "re": [[..],[..]], "im": [[..],[..]]};
/// "im" omitted means a real symmetric matrix.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    d: usize,
    re: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

const HERMITICITY_REL: f64 = 1e-12;

impl HermitianMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("matrix dimension must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Invalid(format!(
                "matrix entry count {} does not match dimension {dim}",
                entries.len()
            )));
        }
        let m = HermitianMatrix { dim, entries };
        m.check_hermitian()?;
        Ok(m)
    }

    /// Construction for internal arithmetic whose output is Hermitian by
    /// algebra (real combinations, symmetrized products); skips the O(d^2)
    /// revalidation.
    fn new_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        HermitianMatrix { dim, entries }
    }

    fn check_hermitian(&self) -> Result<()> {
        let mut max_abs = 0.0f64;
        for e in &self.entries {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::Invalid("matrix entries must be finite".into()));
            }
            max_abs = max_abs.max(e.norm());
        }
        let budget = HERMITICITY_REL * (1.0 + max_abs);
        for j in 0..self.dim {
            for k in j..self.dim {
                let delta = (self.get(j, k) - self.get(k, j).conj()).norm();
                if delta > budget {
                    return Err(Error::Invalid(format!(
                        "matrix is not Hermitian: |A[{j}][{k}] - conj(A[{k}][{j}])| = {delta:e} exceeds {budget:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix::new_unchecked(dim, vec![Complex64::new(0.0, 0.0); dim * dim])
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = HermitianMatrix::zeros(dim);
        for j in 0..dim {
            m.entries[j * dim + j] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("diag needs at least one value".into()));
        }
        let dim = values.len();
        let mut m = HermitianMatrix::zeros(dim);
        for (j, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Invalid("diag entries must be finite".into()));
            }
            m.entries[j * dim + j] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    pub fn from_rows(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let dim = re.len();
        if dim == 0 {
            return Err(Error::Invalid("matrix dimension must be >= 1".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            if re[j].len() != dim {
                return Err(Error::Invalid(format!("row {j} has length {} in a {dim}-dim matrix", re[j].len())));
            }
            for k in 0..dim {
                let imjk = match im {
                    Some(rows) => {
                        if rows.len() != dim || rows[j].len() != dim {
                            return Err(Error::Invalid("imaginary part has wrong shape".into()));
                        }
                        rows[j][k]
                    }
                    None => 0.0,
                };
                entries.push(Complex64::new(re[j][k], imjk));
            }
        }
        HermitianMatrix::new(dim, entries)
    }

    /// Rank-one c * v v^T for a real direction v.
    pub fn rank_one(v: &[f64], c: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Invalid("rank_one needs a nonempty vector".into()));
        }
        let dim = v.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                entries.push(Complex64::new(c * v[j] * v[k], 0.0));
            }
        }
        Ok(HermitianMatrix::new_unchecked(dim, entries))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.dim + k]
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Ok(HermitianMatrix::new_unchecked(self.dim, entries))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect();
        Ok(HermitianMatrix::new_unchecked(self.dim, entries))
    }

    pub fn scale(&self, c: f64) -> Self {
        let entries = self.entries.iter().map(|a| a * c).collect();
        HermitianMatrix::new_unchecked(self.dim, entries)
    }

    /// In-place self += c * rhs; the hot path of the simulation harness.
    pub fn add_scaled(&mut self, rhs: &Self, c: f64) -> Result<()> {
        self.same_dim(rhs)?;
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b * c;
        }
        Ok(())
    }

    /// A*A, with hermiticity restored exactly by averaging the off-diagonal
    /// pair (floating-point products are not exactly symmetric).
    pub fn square(&self) -> Self {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for j in 0..d {
            for k in j..d {
                let mut s = Complex64::new(0.0, 0.0);
                for l in 0..d {
                    s += self.get(j, l) * self.get(l, k);
                }
                out[j * d + k] = s;
            }
        }
        for j in 0..d {
            out[j * d + j].im = 0.0;
            for k in (j + 1)..d {
                let v = out[j * d + k];
                out[k * d + j] = v.conj();
            }
        }
        HermitianMatrix::new_unchecked(d, out)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|j| self.get(j, j).re).sum()
    }

    fn same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::Invalid(format!("dimension mismatch: {} vs {}", self.dim, rhs.dim)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let d = self.dim;
        let re: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|k| self.get(j, k).re).collect()).collect();
        let any_im = self.entries.iter().any(|e| e.im != 0.0);
        let im = if any_im {
            Some((0..d).map(|j| (0..d).map(|k| self.get(j, k).im).collect()).collect())
        } else {
            None
        };
        serde_json::to_string(&MatrixJson { d, re, im }).expect("matrix serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: MatrixJson =
            serde_json::from_str(s).map_err(|e| Error::Invalid(format!("matrix JSON: {e}")))?;
        Self::from_json_value(raw)
    }

    fn from_json_value(raw: MatrixJson) -> Result<Self> {
        if raw.re.len() != raw.d {
            return Err(Error::Invalid(format!(
                "matrix JSON: 're' has {} rows, 'd' says {}",
                raw.re.len(),
                raw.d
            )));
        }
        HermitianMatrix::from_rows(&raw.re, raw.im.as_deref())
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim;
        let re: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|k| self.get(j, k).re).collect()).collect();
        let any_im = self.entries.iter().any(|e| e.im != 0.0);
        let im = if any_im {
            Some((0..d).map(|j| (0..d).map(|k| self.get(j, k).im).collect()).collect())
        } else {
            None
        };
        MatrixJson { d, re, im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        HermitianMatrix::from_json_value(raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column-major d x d; column j is the eigenvector of eigenvalues[j].
    vectors: Vec<Complex64>,
}

impl Spectrum {
    pub fn vector(&self, j: usize) -> &[Complex64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn off_diagonal_frobenius(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p * n + q] * a[p * n + q];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi with eigenvector accumulation. `a` is destroyed; on success
/// its diagonal holds the eigenvalues and `v` (column-major) the vectors.
fn jacobi_with_vectors(a: &mut [f64], v: &mut [f64], n: usize, off_target: f64) -> Result<()> {
    const MAX_SWEEPS: usize = 30;
    for p in 0..n {
        for q in 0..n {
            v[q * n + p] = if p == q { 1.0 } else { 0.0 };
        }
    }
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_frobenius(a, n) <= off_target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // tangent of the rotation angle, smaller root for stability
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rows/columns p and q of A
                for l in 0..n {
                    let alp = a[l * n + p];
                    let alq = a[l * n + q];
                    a[l * n + p] = c * alp - s * alq;
                    a[l * n + q] = s * alp + c * alq;
                }
                for l in 0..n {
                    let apl = a[p * n + l];
                    let aql = a[q * n + l];
                    a[p * n + l] = c * apl - s * aql;
                    a[q * n + l] = s * apl + c * aql;
                }
                // columns p, q of the accumulated rotation (column-major)
                for l in 0..n {
                    let vlp = v[p * n + l];
                    let vlq = v[q * n + l];
                    v[p * n + l] = c * vlp - s * vlq;
                    v[q * n + l] = s * vlp + c * vlq;
                }
            }
        }
    }
    if off_diagonal_frobenius(a, n) <= off_target {
        return Ok(());
    }
    Err(Error::Iteration(format!(
        "jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (n = {n})"
    )))
}

pub fn eig(a: &HermitianMatrix) -> Result<Spectrum> {
    let d = a.dim;
    let n = 2 * d;
    let fro = a.frobenius();
    // real symmetric embedding [[P, -Q], [Q, P]] with A = P + iQ
    let mut c = vec![0.0f64; n * n];
    for j in 0..d {
        for k in 0..d {
            let e = a.get(j, k);
            c[j * n + k] = e.re;
            c[j * n + (k + d)] = -e.im;
            c[(j + d) * n + k] = e.im;
            c[(j + d) * n + (k + d)] = e.re;
        }
    }
    let mut v = vec![0.0f64; n * n];
    jacobi_with_vectors(&mut c, &mut v, n, 1e-13 * fro)?;

    // sort the 2d real eigenpairs ascending (stable on ties)
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| c[i * n + i].total_cmp(&c[j * n + j]).then(i.cmp(&j)));
    let w: Vec<f64> = order.iter().map(|&i| c[i * n + i]).collect();

    // cluster nearly-equal eigenvalues; every cluster has even size because
    // the embedding duplicates each eigenvalue of A
    let cluster_eps = 1e-9 * (1.0 + fro);
    let mut eigenvalues = Vec::with_capacity(d);
    let mut vectors = vec![Complex64::new(0.0, 0.0); d * d];
    let mut out_col = 0usize;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && w[end] - w[end - 1] <= cluster_eps {
            end += 1;
        }
        let size = end - start;
        if size % 2 != 0 {
            return Err(Error::Iteration(
                "eigenvalue pairing of the real embedding broke down (odd cluster)".into(),
            ));
        }
        let m = size / 2;
        // candidate complex vectors from the real ones: (p; q) -> p + i q
        let mut cand: Vec<Vec<Complex64>> = Vec::with_capacity(size);
        for &oi in &order[start..end] {
            let col = &v[oi * n..(oi + 1) * n];
            cand.push((0..d).map(|r| Complex64::new(col[r], col[r + d])).collect());
        }
        // pivoted Gram-Schmidt: m picks with the largest residual each time
        let mut picked: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        for _ in 0..m {
            let (mut best, mut best_norm) = (usize::MAX, -1.0);
            for (idx, vc) in cand.iter().enumerate() {
                let norm = vc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > best_norm + 1e-15 {
                    best = idx;
                    best_norm = norm;
                }
            }
            let mut chosen = cand.swap_remove(best);
            // swap_remove breaks ordering determinism only within equal
            // residuals, which the 1e-15 margin already made a strict pick
            let inv = 1.0 / best_norm;
            for z in &mut chosen {
                *z *= inv;
            }
            // re-orthogonalize once against earlier picks (twice total below)
            for _ in 0..2 {
                for u in &picked {
                    let dot: Complex64 =
                        u.iter().zip(&chosen).map(|(a, b)| a.conj() * b).sum();
                    for (zc, zu) in chosen.iter_mut().zip(u) {
                        *zc -= dot * zu;
                    }
                }
                let nrm = chosen.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if nrm == 0.0 {
                    return Err(Error::Iteration("eigenvector extraction collapsed".into()));
                }
                for z in &mut chosen {
                    *z /= nrm;
                }
            }
            // deflate the remaining candidates
            for vc in &mut cand {
                let dot: Complex64 = chosen.iter().zip(vc.iter()).map(|(a, b)| a.conj() * b).sum();
                for (zc, zu) in vc.iter_mut().zip(&chosen) {
                    *zc -= dot * zu;
                }
            }
            picked.push(chosen);
        }
        // eigenvalues: pair means, ascending within the cluster
        for j in 0..m {
            eigenvalues.push(0.5 * (w[start + 2 * j] + w[start + 2 * j + 1]));
        }
        for mut p in picked {
            // phase convention: largest-|component| made real positive
            let (mut kmax, mut amax) = (0usize, -1.0f64);
            for (k, z) in p.iter().enumerate() {
                let a = z.norm();
                if a > amax {
                    amax = a;
                    kmax = k;
                }
            }
            if amax > 0.0 {
                let phase = p[kmax].conj() / amax;
                for z in &mut p {
                    *z *= phase;
                }
            }
            vectors[out_col * d..(out_col + 1) * d].copy_from_slice(&p);
            out_col += 1;
        }
        start = end;
    }
    debug_assert_eq!(out_col, d);
    Ok(Spectrum { dim: d, eigenvalues, vectors })
}

pub fn lambda_max(a: &HermitianMatrix) -> Result<f64> {
    let s = eig(a)?;
    Ok(*s.eigenvalues.last().expect("nonempty spectrum"))
}

pub fn lambda_min(a: &HermitianMatrix) -> Result<f64> {
    let s = eig(a)?;
    Ok(s.eigenvalues[0])
}

pub fn op_norm(a: &HermitianMatrix) -> Result<f64> {
    let s = eig(a)?;
    Ok(s.eigenvalues[0].abs().max(s.eigenvalues.last().unwrap().abs()))
}

/// Spectral function f(A) = V f(Lambda) V^*.
pub fn matrix_fn(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let s = eig(a)?;
    let d = a.dim;
    let fvals: Vec<f64> = s.eigenvalues.iter().map(|&l| f(l)).collect();
    for (l, fv) in s.eigenvalues.iter().zip(&fvals) {
        if !fv.is_finite() {
            return Err(Error::Domain(format!("matrix_fn: f({l}) is not finite")));
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        for k in j..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..d {
                let col = s.vector(l);
                acc += col[j] * col[k].conj() * fvals[l];
            }
            out[j * d + k] = acc;
        }
    }
    for j in 0..d {
        out[j * d + j].im = 0.0;
        for k in (j + 1)..d {
            out[k * d + j] = out[j * d + k].conj();
        }
    }
    Ok(HermitianMatrix::new_unchecked(d, out))
}

/// A <= B in the PSD order, up to `slack`: lambda_min(B - A) >= -slack.
pub fn psd_leq(a: &HermitianMatrix, b: &HermitianMatrix, slack: f64) -> Result<bool> {
    if !(slack >= 0.0) {
        return Err(Error::Invalid(format!("psd_leq: slack must be >= 0, got {slack}")));
    }
    let diff = b.sub(a)?;
    Ok(lambda_min(&diff)? >= -slack)
}

/// Intrinsic dimension r(S) = tr S / ||S|| for a nonzero PSD matrix.
pub fn intrinsic_dim(s: &HermitianMatrix) -> Result<f64> {
    if !psd_leq(&HermitianMatrix::zeros(s.dim), s, 1e-10)? {
        return Err(Error::Precondition("intrinsic_dim: matrix must be PSD".into()));
    }
    let norm = op_norm(s)?;
    if norm <= 0.0 {
        return Err(Error::Precondition("intrinsic_dim: matrix must be nonzero".into()));
    }
    let r = s.trace() / norm;
    Ok(r.clamp(1.0, s.dim as f64))
}
