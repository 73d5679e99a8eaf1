//! Dense complex tensors and the small set of decompositions the rest of the
//! crate is built on.

use std::ops::Range;
use std::sync::OnceLock;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default ceiling on the number of complex values in any dense object.
pub const DEFAULT_DENSE_CAP: usize = 1 << 24;
/// Environment variable overriding [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "MPREP_DENSE_CAP";
/// Relative singular-value cutoff for pseudo-inverses and ranks.
pub const SV_CUTOFF: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate block.
pub const DEGENERACY_GAP: f64 = 1e-9;

pub fn dense_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(DENSE_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_DENSE_CAP)
    })
}

pub fn check_cap(needed: u128, what: &str) -> Result<()> {
    let cap = dense_cap() as u128;
    if needed > cap {
        return Err(Error::Resource {
            what: what.to_string(),
            needed,
            cap,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl CTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::Shape(format!("zero extent in shape {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} holds {n} values, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("non-finite tensor entry".into()));
        }
        Ok(Self { shape, data })
    }

    /// Constructor for internally generated data whose shape is known to match.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<C64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self::from_parts(shape.to_vec(), vec![ZERO; n])
    }

    pub fn eye(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = ONE;
        }
        t
    }

    pub fn vector(data: Vec<C64>) -> Self {
        Self::from_parts(vec![data.len()], data)
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(vec![rows, cols], data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut t = Self::zeros(&[n, n]);
        for (i, v) in values.iter().enumerate() {
            t.data[i * n + i] = *v;
        }
        t
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let n: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self::from_parts(shape.to_vec(), data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn require_matrix(&self, op: &str) -> Result<(usize, usize)> {
        if self.rank() != 2 {
            return Err(Error::Shape(format!(
                "{op} needs a rank-2 tensor, got shape {:?}",
                self.shape
            )));
        }
        Ok((self.shape[0], self.shape[1]))
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    fn offset(&self, idx: &[usize]) -> usize {
        let mut off = 0;
        for (i, &e) in idx.iter().zip(&self.shape) {
            off = off * e + i;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: C64) {
        let off = self.offset(idx);
        self.data[off] = v;
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.shape[1] + j]
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(Self::from_parts(shape.to_vec(), self.data.clone()))
    }

    pub fn into_shape(self, shape: &[usize]) -> Result<Self> {
        if shape.iter().product::<usize>() != self.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(Self::from_parts(shape.to_vec(), self.data))
    }

    /// Axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Shape(format!("invalid permutation {perm:?} for rank {r}")));
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let mut strides = vec![1usize; r];
        for ax in (0..r.saturating_sub(1)).rev() {
            strides[ax] = strides[ax + 1] * self.shape[ax + 1];
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let new_strides: Vec<usize> = perm.iter().map(|&p| strides[p]).collect();
        let n = self.len();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; r];
        let mut off = 0usize;
        for _ in 0..n {
            data.push(self.data[off]);
            for ax in (0..r).rev() {
                idx[ax] += 1;
                off += new_strides[ax];
                if idx[ax] < new_shape[ax] {
                    break;
                }
                off -= new_strides[ax] * new_shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Self::from_parts(new_shape, data))
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_parts(self.shape.clone(), self.data.iter().map(|z| z * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn conj(&self) -> Self {
        Self::from_parts(self.shape.clone(), self.data.iter().map(|z| z.conj()).collect())
    }

    fn zip_with(&self, other: &Self, op: &str, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "{op}: shapes {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        Ok(Self::from_parts(
            self.shape.clone(),
            self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn add_scaled(&mut self, other: &Self, c: C64) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "add_scaled: shapes {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scale_real(1.0 / n)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Σ conj(self)·other over all entries.
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn transpose(&self) -> Self {
        let (r, c) = (self.shape[0], self.shape[1]);
        Self::from_fn(&[c, r], |ix| self.data[ix[1] * c + ix[0]])
    }

    pub fn dagger(&self) -> Self {
        let (r, c) = (self.shape[0], self.shape[1]);
        Self::from_fn(&[c, r], |ix| self.data[ix[1] * c + ix[0]].conj())
    }

    pub fn trace(&self) -> C64 {
        let n = self.shape[0].min(self.shape[1]);
        (0..n).map(|i| self.at(i, i)).sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let (r, k) = self.require_matrix("matmul")?;
        let (k2, c) = other.require_matrix("matmul")?;
        if k != k2 {
            return Err(Error::Dimension(format!(
                "matmul: {r}x{k} times {k2}x{c}"
            )));
        }
        Ok(Self::from_parts(vec![r, c], gemm(&self.data, &other.data, r, k, c)))
    }

    /// Matrix-vector product for a rank-2 `self` and rank-1 `v`.
    pub fn matvec(&self, v: &Self) -> Result<Self> {
        let (r, c) = self.require_matrix("matvec")?;
        if v.len() != c {
            return Err(Error::Dimension(format!("matvec: {r}x{c} times {}", v.len())));
        }
        Ok(Self::vector(gemm(&self.data, &v.data, r, c, 1)))
    }

    /// Replaces axis `axis` by `m` acting on it: out[.., j, ..] = Σ_i m[j, i] self[.., i, ..].
    pub fn apply_on_axis(&self, axis: usize, m: &Self) -> Result<Self> {
        let (mr, mc) = m.require_matrix("apply_on_axis")?;
        if axis >= self.rank() || self.shape[axis] != mc {
            return Err(Error::Dimension(format!(
                "apply_on_axis: axis {axis} of {:?} vs operator {mr}x{mc}",
                self.shape
            )));
        }
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut out = vec![ZERO; outer * mr * inner];
        for o in 0..outer {
            for j in 0..mr {
                let dst = &mut out[(o * mr + j) * inner..(o * mr + j + 1) * inner];
                for i in 0..mc {
                    let c = m.data[j * mc + i];
                    if c == ZERO {
                        continue;
                    }
                    let src = &self.data[(o * mc + i) * inner..(o * mc + i + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += c * s;
                    }
                }
            }
        }
        let mut shape = self.shape.clone();
        shape[axis] = mr;
        Ok(Self::from_parts(shape, out))
    }

    pub fn unitarity_residual(&self) -> f64 {
        match self.dagger().matmul(self) {
            Ok(p) => p.distance(&Self::eye(p.rows())),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        if self.rank() != 2 || self.shape[0] != self.shape[1] {
            return f64::INFINITY;
        }
        self.distance(&self.dagger())
    }

    pub fn to_faer(&self) -> Mat<C64> {
        static SEQUENTIAL: std::sync::Once = std::sync::Once::new();
        SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
        let (r, c) = (self.shape[0], self.shape[1]);
        Mat::from_fn(r, c, |i, j| self.data[i * c + j])
    }

    pub fn from_faer(m: MatRef<'_, C64>) -> Self {
        Self::from_fn(&[m.nrows(), m.ncols()], |ix| m[(ix[0], ix[1])])
    }

    /// Determinant of a square matrix.
    pub fn determinant(&self) -> C64 {
        self.to_faer().determinant()
    }

    /// Column `j` of a matrix as a vector.
    pub fn column(&self, j: usize) -> Self {
        let (r, c) = (self.shape[0], self.shape[1]);
        Self::vector((0..r).map(|i| self.data[i * c + j]).collect())
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns(cols: &[Self]) -> Result<Self> {
        let Some(first) = cols.first() else {
            return Err(Error::Shape("from_columns: no columns".into()));
        };
        let r = first.len();
        if cols.iter().any(|c| c.len() != r) {
            return Err(Error::Dimension("from_columns: ragged columns".into()));
        }
        let c = cols.len();
        Ok(Self::from_fn(&[r, c], |ix| cols[ix[1]].data[ix[0]]))
    }
}

fn gemm(a: &[C64], b: &[C64], r: usize, k: usize, c: usize) -> Vec<C64> {
    let mut out = vec![ZERO; r * c];
    for i in 0..r {
        let row = &mut out[i * c..(i + 1) * c];
        for l in 0..k {
            let x = a[i * k + l];
            if x == ZERO {
                continue;
            }
            let brow = &b[l * c..(l + 1) * c];
            for (o, y) in row.iter_mut().zip(brow) {
                *o += x * y;
            }
        }
    }
    out
}

/// Contracts the listed axis pairs. Remaining axes keep their order, those of `a` first.
pub fn contract(a: &CTensor, b: &CTensor, pairs: &[(usize, usize)]) -> Result<CTensor> {
    let (ra, rb) = (a.rank(), b.rank());
    let mut used_a = vec![false; ra];
    let mut used_b = vec![false; rb];
    for &(i, j) in pairs {
        if i >= ra || j >= rb {
            return Err(Error::Dimension(format!(
                "contract: axis pair ({i}, {j}) out of range for ranks {ra}, {rb}"
            )));
        }
        if a.shape[i] != b.shape[j] {
            return Err(Error::Dimension(format!(
                "contract: axis {i} of {:?} (extent {}) vs axis {j} of {:?} (extent {})",
                a.shape, a.shape[i], b.shape, b.shape[j]
            )));
        }
        if used_a[i] || used_b[j] {
            return Err(Error::Dimension(format!("contract: axis reused in pair ({i}, {j})")));
        }
        used_a[i] = true;
        used_b[j] = true;
    }
    let free_a: Vec<usize> = (0..ra).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..rb).filter(|&j| !used_b[j]).collect();
    let perm_a: Vec<usize> = free_a.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();
    let k: usize = pairs.iter().map(|p| a.shape[p.0]).product();
    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let n: usize = free_b.iter().map(|&j| b.shape[j]).product();
    let mut shape: Vec<usize> = free_a.iter().map(|&i| a.shape[i]).collect();
    shape.extend(free_b.iter().map(|&j| b.shape[j]));
    check_cap((m as u128) * (n as u128), "contraction result")?;
    let ap = a.permute(&perm_a)?;
    let bp = b.permute(&perm_b)?;
    let data = gemm(&ap.data, &bp.data, m, k, n);
    if shape.is_empty() {
        shape.push(1);
    }
    Ok(CTensor::from_parts(shape, data))
}

#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CTensor,
    pub s: Vec<f64>,
    pub vh: CTensor,
}

/// Thin SVD, singular values descending.
pub fn svd(m: &CTensor) -> Result<Svd> {
    m.require_matrix("svd")?;
    let dec = m
        .to_faer()
        .thin_svd()
        .map_err(|e| Error::Precondition(format!("svd did not converge: {e:?}")))?;
    Ok(Svd {
        u: CTensor::from_faer(dec.U()),
        s: dec.S().column_vector().iter().map(|x| x.re).collect(),
        vh: CTensor::from_faer(dec.V()).dagger(),
    })
}

pub fn pinv(m: &CTensor) -> Result<CTensor> {
    let (r, c) = m.require_matrix("pinv")?;
    let Svd { u, s, vh } = svd(m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let cut = SV_CUTOFF * smax;
    let k = s.len();
    // m⁺ = V·diag(1/s)·U†
    let mut out = vec![ZERO; c * r];
    for (l, &sv) in s.iter().enumerate() {
        if sv <= cut || sv == 0.0 {
            continue;
        }
        let inv = 1.0 / sv;
        for i in 0..c {
            let v = vh.data[l * c + i].conj() * inv;
            for j in 0..r {
                out[i * r + j] += v * u.data[j * k + l].conj();
            }
        }
    }
    Ok(CTensor::from_parts(vec![c, r], out))
}

/// Numerical rank with the relative singular-value cutoff.
pub fn matrix_rank(m: &CTensor) -> Result<usize> {
    let s = svd(m)?.s;
    let smax = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&x| x > SV_CUTOFF * smax && x > 0.0).count())
}

/// Eigen-decomposition of a Hermitian matrix: values ascending, eigenvectors as columns.
pub fn eig_hermitian(m: &CTensor) -> Result<(Vec<f64>, CTensor)> {
    let (r, c) = m.require_matrix("eig_hermitian")?;
    if r != c {
        return Err(Error::Shape(format!("eig_hermitian: {r}x{c} is not square")));
    }
    let res = m.hermiticity_residual();
    if res >= 1e-10 * m.norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "eig_hermitian: Hermiticity residual {res:e}"
        )));
    }
    let sym = m.add(&m.dagger())?.scale_real(0.5);
    let dec = sym
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Precondition(format!("eigensolver did not converge: {e:?}")))?;
    let values = dec.S().column_vector().iter().map(|x| x.re).collect();
    let vectors = CTensor::from_faer(dec.U());
    Ok((values, vectors))
}

/// Eigenvalues of a general square matrix, sorted by decreasing modulus.
pub fn eigvals(m: &CTensor) -> Result<Vec<C64>> {
    let (r, c) = m.require_matrix("eigvals")?;
    if r != c {
        return Err(Error::Shape(format!("eigvals: {r}x{c} is not square")));
    }
    let mut vals = m
        .to_faer()
        .eigenvalues()
        .map_err(|e| Error::Precondition(format!("eigensolver did not converge: {e:?}")))?;
    vals.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
    Ok(vals)
}

/// Index ranges of ascending `values` whose consecutive gaps are below `gap`.
pub fn degenerate_blocks(values: &[f64], gap: f64) -> Vec<Range<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i] - values[i - 1]).abs() >= gap {
            if i > start {
                blocks.push(start..i);
            }
            start = i;
        }
    }
    blocks
}

pub fn kron(a: &CTensor, b: &CTensor) -> Result<CTensor> {
    let (ar, ac) = a.require_matrix("kron")?;
    let (br, bc) = b.require_matrix("kron")?;
    check_cap((ar * br * ac * bc) as u128, "kron")?;
    Ok(CTensor::from_fn(&[ar * br, ac * bc], |ix| {
        let (i, j) = (ix[0], ix[1]);
        a.data[(i / br) * ac + j / bc] * b.data[(i % br) * bc + j % bc]
    }))
}

/// Orthonormal basis vectors of the null space of `m`.
pub fn nullspace(m: &CTensor, tol: f64) -> Result<Vec<CTensor>> {
    m.require_matrix("nullspace")?;
    // Null space of m = eigenvectors of m†m with (near) zero eigenvalue.
    let g = m.dagger().matmul(m)?;
    let (vals, vecs) = eig_hermitian(&g)?;
    let scale = vals.last().copied().unwrap_or(0.0).max(1.0);
    Ok(vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() <= tol * tol * scale)
        .map(|(k, _)| vecs.column(k))
        .collect())
}

/// exp(i·h) for Hermitian h.
pub fn expi_hermitian(h: &CTensor) -> Result<CTensor> {
    let (vals, vecs) = eig_hermitian(h)?;
    let phases: Vec<C64> = vals.iter().map(|&v| C64::from_polar(1.0, v)).collect();
    vecs.matmul(&CTensor::diag(&phases))?.matmul(&vecs.dagger())
}

/// Closest unitary in Frobenius norm (polar factor).
pub fn polar_unitary(m: &CTensor) -> Result<CTensor> {
    let Svd { u, vh, .. } = svd(m)?;
    u.matmul(&vh)
}

/// Multiplies `m` by the phase that makes det(m) real positive (for unitary m).
pub fn fix_det_phase(m: &CTensor) -> Result<CTensor> {
    let (r, c) = m.require_matrix("fix_det_phase")?;
    if r != c {
        return Err(Error::Shape("fix_det_phase: not square".into()));
    }
    let det = m.determinant();
    if det.norm().is_nan() || det.norm() == 0.0 {
        return Ok(m.clone());
    }
    Ok(m.scale(C64::from_polar(1.0, -det.arg() / r as f64)))
}

/// Phase-insensitive overlap |⟨a|b⟩|² / (‖a‖²‖b‖²).
pub fn fidelity(a: &CTensor, b: &CTensor) -> f64 {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 || a.len() != b.len() {
        return 0.0;
    }
    a.inner(b).norm_sqr() / (na * nb)
}

/// ‖b − e^{iφ}a‖ after choosing the phase φ that best aligns `a` with `b`.
pub fn phase_aligned_distance(a: &CTensor, b: &CTensor) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let ov = a.inner(b);
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    a.scale(ph).distance(b)
}

pub fn pauli_i() -> CTensor {
    CTensor::eye(2)
}

pub fn pauli_x() -> CTensor {
    CTensor::from_parts(vec![2, 2], vec![ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CTensor {
    CTensor::from_parts(vec![2, 2], vec![ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CTensor {
    CTensor::from_parts(vec![2, 2], vec![ONE, ZERO, ZERO, -ONE])
}

/// Hadamard gate.
pub fn hadamard() -> CTensor {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CTensor::from_real(2, 2, &[h, h, h, -h]).expect("static shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CTensor {
        CTensor::from_fn(&[r, c], |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn naive_matmul(a: &CTensor, b: &CTensor) -> CTensor {
        let (r, k, c) = (a.rows(), a.cols(), b.cols());
        CTensor::from_fn(&[r, c], |ix| {
            let mut s = ZERO;
            for l in 0..k {
                s += a.get(&[ix[0], l]) * b.get(&[l, ix[1]]);
            }
            s
        })
    }

    #[test]
    fn contract_identity_with_vector() {
        let v = CTensor::vector(vec![ONE, ZERO]);
        let out = contract(&CTensor::eye(2), &v, &[(1, 0)]).unwrap();
        assert_eq!(out.data(), &[ONE, ZERO]);
    }

    #[test]
    fn contract_trace_form() {
        let x = pauli_x();
        let out = contract(&x, &x, &[(0, 1), (1, 0)]).unwrap();
        assert!((out.data()[0] - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn contract_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rand_matrix(&mut rng, 2, 3);
        let b = rand_matrix(&mut rng, 3, 4);
        let out = contract(&a, &b, &[(1, 0)]).unwrap();
        assert!(out.distance(&naive_matmul(&a, &b)) < 1e-14);
    }

    #[test]
    fn contract_rejects_extent_mismatch() {
        let a = CTensor::zeros(&[2, 3]);
        let b = CTensor::zeros(&[2, 3]);
        assert!(matches!(contract(&a, &b, &[(1, 0)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn contract_keeps_free_axis_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = CTensor::from_fn(&[2, 3, 4], |_| C64::new(rng.gen(), rng.gen()));
        let b = CTensor::from_fn(&[5, 3], |_| C64::new(rng.gen(), rng.gen()));
        let out = contract(&a, &b, &[(1, 1)]).unwrap();
        assert_eq!(out.shape(), &[2, 4, 5]);
        let mut want = ZERO;
        for j in 0..3 {
            want += a.get(&[1, j, 2]) * b.get(&[4, j]);
        }
        assert!((out.get(&[1, 2, 4]) - want).norm() < 1e-14);
    }

    #[test]
    fn permute_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = CTensor::from_fn(&[2, 3, 4], |_| C64::new(rng.gen(), 0.0));
        let p = a.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        assert_eq!(p.get(&[3, 1, 2]), a.get(&[1, 2, 3]));
        let back = p.permute(&[1, 2, 0]).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn svd_diag_and_zero() {
        let d = CTensor::from_real(2, 2, &[3.0, 0.0, 0.0, 1.0]).unwrap();
        let s = svd(&d).unwrap().s;
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
        let z = CTensor::zeros(&[2, 2]);
        let dec = svd(&z).unwrap();
        assert_eq!(dec.s, vec![0.0, 0.0]);
        let rec = dec.u.matmul(&CTensor::diag(&[ZERO, ZERO])).unwrap().matmul(&dec.vh).unwrap();
        assert_eq!(rec.max_abs(), 0.0);
    }

    #[test]
    fn svd_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = rand_matrix(&mut rng, 4, 4);
        let dec = svd(&m).unwrap();
        let sd: Vec<C64> = dec.s.iter().map(|&x| C64::new(x, 0.0)).collect();
        let rec = dec.u.matmul(&CTensor::diag(&sd)).unwrap().matmul(&dec.vh).unwrap();
        assert!(rec.distance(&m) < 1e-12);
        let (vals, _) = eig_hermitian(&m.dagger().matmul(&m).unwrap()).unwrap();
        for (k, v) in vals.iter().rev().enumerate() {
            assert!((v.max(0.0).sqrt() - dec.s[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn svd_rejects_rank3() {
        assert!(matches!(svd(&CTensor::zeros(&[2, 2, 2])), Err(Error::Shape(_))));
    }

    #[test]
    fn pinv_examples() {
        let d = CTensor::from_real(2, 2, &[2.0, 0.0, 0.0, 0.0]).unwrap();
        let p = pinv(&d).unwrap();
        assert!(p.distance(&CTensor::from_real(2, 2, &[0.5, 0.0, 0.0, 0.0]).unwrap()) < 1e-15);
        assert!(pinv(&CTensor::eye(3)).unwrap().distance(&CTensor::eye(3)) < 1e-14);
    }

    #[test]
    fn pinv_rank_one_penrose() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = rand_matrix(&mut rng, 3, 1);
        let v = rand_matrix(&mut rng, 1, 3);
        let m = u.matmul(&v).unwrap();
        let p = pinv(&m).unwrap();
        let mpm = m.matmul(&p).unwrap().matmul(&m).unwrap();
        let pmp = p.matmul(&m).unwrap().matmul(&p).unwrap();
        let mp = m.matmul(&p).unwrap();
        let pm = p.matmul(&m).unwrap();
        assert!(mpm.distance(&m) < 1e-10);
        assert!(pmp.distance(&p) < 1e-10);
        assert!(mp.hermiticity_residual() < 1e-10);
        assert!(pm.hermiticity_residual() < 1e-10);
        assert_eq!(matrix_rank(&m).unwrap(), 1);
    }

    #[test]
    fn eig_hermitian_examples() {
        let (vals, _) = eig_hermitian(&pauli_z()).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = rand_matrix(&mut rng, 4, 4);
        let h = a.add(&a.dagger()).unwrap();
        let (vals, vecs) = eig_hermitian(&h).unwrap();
        let d: Vec<C64> = vals.iter().map(|&x| C64::new(x, 0.0)).collect();
        let rec = vecs.matmul(&CTensor::diag(&d)).unwrap().matmul(&vecs.dagger()).unwrap();
        assert!(rec.distance(&h) < 1e-10);
        assert!(vecs.unitarity_residual() < 1e-10);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_hermitian_rejects_non_hermitian() {
        let m = CTensor::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn kron_examples() {
        assert!(kron(&CTensor::eye(2), &CTensor::eye(2)).unwrap().distance(&CTensor::eye(4)) < 1e-15);
        let xx = kron(&pauli_x(), &pauli_x().conj()).unwrap();
        let swap = CTensor::from_real(
            4,
            4,
            &[0., 0., 0., 1., 0., 0., 1., 0., 0., 1., 0., 0., 1., 0., 0., 0.],
        )
        .unwrap();
        assert_eq!(xx, swap);
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, b, c, d) = (
            rand_matrix(&mut rng, 2, 2),
            rand_matrix(&mut rng, 2, 2),
            rand_matrix(&mut rng, 2, 2),
            rand_matrix(&mut rng, 2, 2),
        );
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = CTensor::from_real(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]).unwrap();
        let ns = nullspace(&m, 1e-9).unwrap();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(m.matvec(v).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_grouping() {
        let b = degenerate_blocks(&[0.0, 1.0, 1.0 + 1e-12, 2.0], DEGENERACY_GAP);
        assert_eq!(b, vec![0..1, 1..3, 3..4]);
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(CTensor::new(vec![2, 2], vec![ZERO; 3]).is_err());
        assert!(CTensor::new(vec![1], vec![C64::new(f64::NAN, 0.0)]).is_err());
    }
}
