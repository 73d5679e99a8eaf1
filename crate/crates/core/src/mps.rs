//! Matrix product state tensors, the preparable families, transfer matrices and
//! the dense-state oracle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bases::{clock_element, pauli_basis, root_of_unity, UnitaryErrorBasis};
use crate::error::{Error, Result};
use crate::linalg::{
    check_cap, eig_hermitian, kron, pauli_x, pauli_y, pauli_z, svd, CTensor, C64, ONE, ZERO,
};

/// Local tensor A[p][l][r].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MPSTensor {
    pub d: usize,
    pub chi_left: usize,
    pub chi_right: usize,
    data: Vec<C64>,
}

impl MPSTensor {
    pub fn new(d: usize, chi_left: usize, chi_right: usize, data: Vec<C64>) -> Result<Self> {
        if d == 0 || chi_left == 0 || chi_right == 0 {
            return Err(Error::Shape("MPS tensor extents must be positive".into()));
        }
        if data.len() != d * chi_left * chi_right {
            return Err(Error::Shape(format!(
                "MPS tensor {d}x{chi_left}x{chi_right} needs {} entries, got {}",
                d * chi_left * chi_right,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("non-finite MPS tensor entry".into()));
        }
        Ok(Self {
            d,
            chi_left,
            chi_right,
            data,
        })
    }

    pub fn from_matrices(mats: &[CTensor]) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Shape("no physical components".into()));
        };
        let (l, r) = (first.rows(), first.cols());
        if mats.iter().any(|m| m.shape() != [l, r]) {
            return Err(Error::Dimension("physical components differ in shape".into()));
        }
        Self::new(
            mats.len(),
            l,
            r,
            mats.iter().flat_map(|m| m.data().iter().copied()).collect(),
        )
    }

    pub fn from_tensor(t: &CTensor) -> Result<Self> {
        match t.shape() {
            [d, l, r] => Self::new(*d, *l, *r, t.data().to_vec()),
            s => Err(Error::Shape(format!("MPS tensor must be rank 3, got {s:?}"))),
        }
    }

    pub fn as_tensor(&self) -> CTensor {
        CTensor::from_parts(vec![self.d, self.chi_left, self.chi_right], self.data.clone())
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, p: usize, l: usize, r: usize) -> C64 {
        self.data[(p * self.chi_left + l) * self.chi_right + r]
    }

    /// The χ_l×χ_r matrix A^p.
    pub fn matrix(&self, p: usize) -> CTensor {
        let n = self.chi_left * self.chi_right;
        CTensor::from_parts(
            vec![self.chi_left, self.chi_right],
            self.data[p * n..(p + 1) * n].to_vec(),
        )
    }

    pub fn matrices(&self) -> Vec<CTensor> {
        (0..self.d).map(|p| self.matrix(p)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_square(&self) -> bool {
        self.chi_left == self.chi_right
    }

    pub fn chi(&self) -> usize {
        self.chi_left
    }

    /// The d×(χ_l·χ_r) matrix M[p, (l, r)] = A^p_{lr}.
    pub fn physical_map(&self) -> CTensor {
        CTensor::from_parts(vec![self.d, self.chi_left * self.chi_right], self.data.clone())
    }

    /// A'^p = Σ_q u[p, q] A^q.
    pub fn apply_physical(&self, u: &CTensor) -> Result<Self> {
        if u.shape()[1] != self.d {
            return Err(Error::Dimension(format!(
                "physical operator {:?} on d = {}",
                u.shape(),
                self.d
            )));
        }
        let m = u.matmul(&self.physical_map())?;
        Self::new(u.rows(), self.chi_left, self.chi_right, m.into_data())
    }

    /// A'^p = vl · A^p · vr.
    pub fn apply_virtual(&self, vl: &CTensor, vr: &CTensor) -> Result<Self> {
        let mats: Result<Vec<CTensor>> = self
            .matrices()
            .iter()
            .map(|a| vl.matmul(a)?.matmul(vr))
            .collect();
        Self::from_matrices(&mats?)
    }

    /// Physical dimension after blocking `k` sites: A^{p1..pk} = A^{p1}···A^{pk}.
    pub fn blocked(&self, k: usize) -> Result<Self> {
        if k == 0 || !self.is_square() {
            return Err(Error::Precondition("blocking needs k >= 1 and square bonds".into()));
        }
        let d = self.d.checked_pow(k as u32).ok_or_else(|| Error::Resource {
            what: "blocked physical dimension".into(),
            needed: u128::MAX,
            cap: crate::linalg::dense_cap() as u128,
        })?;
        check_cap((d * self.chi_left * self.chi_right) as u128, "blocked tensor")?;
        let mut mats = self.matrices();
        for _ in 1..k {
            let mut next = Vec::with_capacity(mats.len() * self.d);
            for m in &mats {
                for p in 0..self.d {
                    next.push(m.matmul(&self.matrix(p))?);
                }
            }
            mats = next;
        }
        Self::from_matrices(&mats)
    }

    pub fn random<R: Rng>(d: usize, chi: usize, rng: &mut R) -> Self {
        let data = (0..d * chi * chi)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Self::new(d, chi, chi, data).expect("consistent shape")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Periodic,
    Dangling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformMPS {
    pub tensor: MPSTensor,
    pub sites: usize,
    pub boundary: Boundary,
}

impl UniformMPS {
    pub fn new(tensor: MPSTensor, sites: usize, boundary: Boundary) -> Result<Self> {
        if sites == 0 {
            return Err(Error::Domain("chain needs at least one site".into()));
        }
        if !tensor.is_square() {
            return Err(Error::Shape("uniform chain needs chi_left = chi_right".into()));
        }
        Ok(Self {
            tensor,
            sites,
            boundary,
        })
    }

    /// Dimension of the dense vector.
    pub fn dense_dim(&self) -> u128 {
        let chi = self.tensor.chi() as u128;
        let phys = (self.tensor.d as u128).saturating_pow(self.sites as u32);
        match self.boundary {
            Boundary::Periodic => phys,
            Boundary::Dangling => chi * phys * chi,
        }
    }
}

/// Running contraction state: rows index the open legs already fixed, columns the open bond.
pub(crate) fn absorb_site(psi: &CTensor, a: &MPSTensor) -> Result<CTensor> {
    let (rows, bond) = (psi.rows(), psi.cols());
    if bond != a.chi_left {
        return Err(Error::Dimension(format!(
            "bond {bond} meets tensor with chi_left {}",
            a.chi_left
        )));
    }
    check_cap((rows * a.d * bond.max(a.chi_right)) as u128, "chain contraction")?;
    let (d, cr) = (a.d, a.chi_right);
    let mut out = vec![ZERO; rows * d * cr];
    let pd = psi.data();
    let ad = a.data();
    for row in 0..rows {
        for b in 0..bond {
            let x = pd[row * bond + b];
            if x == ZERO {
                continue;
            }
            for p in 0..d {
                let dst = &mut out[(row * d + p) * cr..(row * d + p + 1) * cr];
                let src = &ad[(p * bond + b) * cr..(p * bond + b + 1) * cr];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += x * s;
                }
            }
        }
    }
    Ok(CTensor::from_parts(vec![rows * d, cr], out))
}

#[derive(Clone, Debug)]
pub struct DenseState {
    /// Unit-norm state vector.
    pub vector: CTensor,
    /// Norm before normalization.
    pub norm: f64,
}

/// Exact contraction of the chain. Dangling exposes the edge bonds as the first and last factors.
pub fn dense_state(s: &UniformMPS) -> Result<DenseState> {
    check_cap(s.dense_dim(), "dense state")?;
    let chi = s.tensor.chi();
    let mut psi = CTensor::eye(chi);
    for _ in 0..s.sites {
        psi = absorb_site(&psi, &s.tensor)?;
    }
    let raw = match s.boundary {
        Boundary::Dangling => psi.into_shape(&[psi_len(chi, s)])?,
        Boundary::Periodic => {
            let rows = psi.rows();
            let phys = rows / chi;
            let mut v = vec![ZERO; phys];
            for l in 0..chi {
                for (k, x) in v.iter_mut().enumerate() {
                    *x += psi.at(l * phys + k, l);
                }
            }
            CTensor::vector(v)
        }
    };
    let norm = raw.norm();
    Ok(DenseState {
        vector: if norm > 0.0 { raw.scale_real(1.0 / norm) } else { raw },
        norm,
    })
}

fn psi_len(chi: usize, s: &UniformMPS) -> usize {
    chi * s.tensor.d.pow(s.sites as u32) * chi
}

/// Non-negative weights λ[a][b] summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexWeights {
    pub chi: usize,
    pub lambda: Vec<Vec<f64>>,
}

pub const WEIGHT_TOL: f64 = 1e-12;

/// Grid coordinates of the Pauli labels (𝟙, X, Y, Z).
pub const PAULI_GRID: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

impl SimplexWeights {
    pub fn new(chi: usize, lambda: Vec<Vec<f64>>) -> Result<Self> {
        if chi < 2 {
            return Err(Error::Domain(format!("weights need chi >= 2, got {chi}")));
        }
        if lambda.len() != chi || lambda.iter().any(|r| r.len() != chi) {
            return Err(Error::Shape(format!("weights must form a {chi}x{chi} grid")));
        }
        for (a, row) in lambda.iter().enumerate() {
            for (b, &x) in row.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::Domain(format!("weight ({a},{b}) = {x} is negative or non-finite")));
                }
            }
        }
        let s: f64 = lambda.iter().flatten().sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Domain(format!("weights sum to {s}, not 1")));
        }
        Ok(Self { chi, lambda })
    }

    /// Row-major weights λ_{(a,b)} at index a·χ + b.
    pub fn from_flat(chi: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != chi * chi {
            return Err(Error::Shape(format!("expected {} weights, got {}", chi * chi, flat.len())));
        }
        Self::new(chi, flat.chunks(chi).map(|c| c.to_vec()).collect())
    }

    pub fn flat(&self) -> Vec<f64> {
        self.lambda.iter().flatten().copied().collect()
    }

    /// χ=2 weights given in the label order (𝟙, X, Y, Z).
    pub fn from_pauli(w: [f64; 4]) -> Result<Self> {
        let mut grid = vec![vec![0.0; 2]; 2];
        for (k, &(a, b)) in PAULI_GRID.iter().enumerate() {
            grid[a][b] = w[k];
        }
        Self::new(2, grid)
    }

    /// χ=2 weights in the label order (𝟙, X, Y, Z).
    pub fn pauli(&self) -> Result<[f64; 4]> {
        if self.chi != 2 {
            return Err(Error::Domain("Pauli labels need chi = 2".into()));
        }
        Ok(PAULI_GRID.map(|(a, b)| self.lambda[a][b]))
    }

    pub fn uniform(chi: usize) -> Result<Self> {
        let w = 1.0 / (chi * chi) as f64;
        Self::new(chi, vec![vec![w; chi]; chi])
    }

    /// Uniformly distributed point of the simplex.
    pub fn random<R: Rng>(chi: usize, rng: &mut R) -> Self {
        let e: Vec<f64> = (0..chi * chi).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = e.iter().sum();
        let flat: Vec<f64> = e.iter().map(|x| x / s).collect();
        Self::from_flat(chi, &flat).expect("normalized by construction")
    }

    /// Pauli weights reordered so that λ_x ≥ λ_y ≥ λ_z (a physical relabeling gauge).
    pub fn canonicalize_pauli(&self) -> Result<Self> {
        let w = self.pauli()?;
        let mut rest = [w[1], w[2], w[3]];
        rest.sort_by(|a, b| b.total_cmp(a));
        Self::from_pauli([w[0], rest[0], rest[1], rest[2]])
    }
}

/// 𝔼 = Σ_p A^p ⊗ Ā^p with rows (l, l̄) and columns (r, r̄).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub chi: usize,
    pub entries: CTensor,
}

pub fn transfer_matrix(a: &MPSTensor) -> Result<TransferMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "transfer matrix needs equal bonds, got {}x{}",
            a.chi_left, a.chi_right
        )));
    }
    let chi = a.chi();
    let mut e = CTensor::zeros(&[chi * chi, chi * chi]);
    for m in a.matrices() {
        e.add_scaled(&kron(&m, &m.conj())?, ONE)?;
    }
    Ok(TransferMatrix { chi, entries: e })
}

impl TransferMatrix {
    /// ‖(vL⊗v̄L) 𝔼 (vR⊗v̄R) − 𝔼‖.
    pub fn invariance_residual(&self, vl: &CTensor, vr: &CTensor) -> Result<f64> {
        let left = kron(vl, &vl.conj())?;
        let right = kron(vr, &vr.conj())?;
        let conj = left.matmul(&self.entries)?.matmul(&right)?;
        Ok(conj.distance(&self.entries))
    }

    /// Eigenvalues sorted by decreasing modulus.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        crate::linalg::eigvals(&self.entries)
    }

    /// Applies 𝔼 to an operator: O ↦ Σ_p A^p O A^p†.
    pub fn apply(&self, o: &CTensor) -> Result<CTensor> {
        let chi = self.chi;
        let v = o.reshape(&[chi * chi])?;
        self.entries.matvec(&v)?.into_shape(&[chi, chi])
    }

    pub fn power_trace(&self, n: usize) -> Result<C64> {
        let mut m = CTensor::eye(self.chi * self.chi);
        for _ in 0..n {
            m = m.matmul(&self.entries)?;
        }
        Ok(m.trace())
    }
}

fn require_chi2(w: &SimplexWeights) -> Result<()> {
    if w.chi != 2 {
        return Err(Error::Domain(format!("tetrahedron family needs chi = 2, got {}", w.chi)));
    }
    Ok(())
}

/// A^i = √λ_i σ^i with physical labels (𝟙, X, Y, Z).
pub fn tetrahedron_tensor(w: &SimplexWeights) -> Result<MPSTensor> {
    require_chi2(w)?;
    let lam = w.pauli()?;
    let paulis = [CTensor::eye(2), pauli_x(), pauli_y(), pauli_z()];
    let mats: Vec<CTensor> = paulis
        .iter()
        .zip(lam)
        .map(|(s, l)| s.scale_real(l.sqrt()))
        .collect();
    MPSTensor::from_matrices(&mats)
}

/// A^{(a,b)} = √λ_{a,b} 𝒳^a𝒵^b with physical index a·χ + b.
pub fn clock_tensor(w: &SimplexWeights) -> Result<MPSTensor> {
    let chi = w.chi;
    let mut mats = Vec::with_capacity(chi * chi);
    for a in 0..chi {
        for b in 0..chi {
            mats.push(clock_element(chi, a, b).scale_real(w.lambda[a][b].sqrt()));
        }
    }
    MPSTensor::from_matrices(&mats)
}

/// A^g = √(λ_𝒞(g)/|𝒞(g)|) V_g, with class weights listed in the order of
/// [`crate::bases::GroupData::conjugacy_classes`].
pub fn nice_basis_tensor(basis: &UnitaryErrorBasis, class_weights: &[f64]) -> Result<MPSTensor> {
    let group = basis
        .group
        .as_ref()
        .ok_or_else(|| Error::Precondition("basis carries no group metadata".into()))?;
    let classes = group.conjugacy_classes();
    if class_weights.len() != classes.len() {
        return Err(Error::Shape(format!(
            "{} class weights for {} conjugacy classes",
            class_weights.len(),
            classes.len()
        )));
    }
    if class_weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::Domain("class weights must be non-negative".into()));
    }
    let s: f64 = class_weights.iter().sum();
    if (s - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Domain(format!("class weights sum to {s}, not 1")));
    }
    let mut mats = vec![CTensor::zeros(&[basis.dim, basis.dim]); basis.len()];
    for (cls, &w) in classes.iter().zip(class_weights) {
        let amp = (w / cls.len() as f64).sqrt();
        for &g in cls {
            mats[g] = basis.elements[g].scale_real(amp);
        }
    }
    MPSTensor::from_matrices(&mats)
}

/// λ_{c,d} = (1/χ²) Σ_{a,b} μ_{a,b} ω^{ad−bc}; μ given row-major with μ_{0,0} = 1.
pub fn spectrum_to_weights(mu: &[C64], chi: usize) -> Result<SimplexWeights> {
    if chi < 2 || mu.len() != chi * chi {
        return Err(Error::Shape(format!("need {} spectrum values for chi = {chi}", chi * chi)));
    }
    if (mu[0] - ONE).norm() > 1e-10 {
        return Err(Error::Precondition(format!("leading eigenvalue must be 1, got {}", mu[0])));
    }
    let mut grid = vec![vec![0.0; chi]; chi];
    for c in 0..chi {
        for d in 0..chi {
            let mut s = ZERO;
            for a in 0..chi {
                for b in 0..chi {
                    s += mu[a * chi + b] * root_of_unity(chi, (a * d) as i64 - (b * c) as i64);
                }
            }
            let l = s / (chi * chi) as f64;
            let label = format!("({c},{d})");
            if l.im.abs() > 1e-10 {
                return Err(Error::InfeasibleSpectrum {
                    label,
                    value: l.im,
                    reason: "imaginary weight".into(),
                });
            }
            if l.re < -1e-10 {
                return Err(Error::InfeasibleSpectrum {
                    label,
                    value: l.re,
                    reason: "negative weight".into(),
                });
            }
            grid[c][d] = l.re.max(0.0);
        }
    }
    let s: f64 = grid.iter().flatten().sum();
    for row in grid.iter_mut() {
        for x in row.iter_mut() {
            *x /= s;
        }
    }
    SimplexWeights::new(chi, grid)
}

/// μ_{a,b}: the eigenvalue of 𝔼 acting on the eigenoperator 𝒳^a𝒵^b (row-major).
pub fn weights_to_spectrum(w: &SimplexWeights) -> Vec<C64> {
    let chi = w.chi;
    let mut mu = vec![ZERO; chi * chi];
    for a in 0..chi {
        for b in 0..chi {
            let mut s = ZERO;
            for c in 0..chi {
                for d in 0..chi {
                    s += root_of_unity(chi, (b * c) as i64 - (a * d) as i64) * w.lambda[c][d];
                }
            }
            mu[a * chi + b] = s;
        }
    }
    mu
}

/// Reorders a χ=2 row-major spectrum into Pauli label order (𝟙, X, Y, Z), and back.
pub fn grid_to_pauli<T: Copy>(v: &[T]) -> [T; 4] {
    PAULI_GRID.map(|(a, b)| v[a * 2 + b])
}

pub fn pauli_to_grid<T: Copy + Default>(v: [T; 4]) -> Vec<T> {
    let mut out = vec![T::default(); 4];
    for (k, &(a, b)) in PAULI_GRID.iter().enumerate() {
        out[a * 2 + b] = v[k];
    }
    out
}

/// Measured eigenvalue of 𝔼 on each clock eigenoperator, with the eigen-equation residual.
pub fn measured_clock_spectrum(a: &MPSTensor) -> Result<Vec<(C64, f64)>> {
    let e = transfer_matrix(a)?;
    let chi = e.chi;
    let mut out = Vec::with_capacity(chi * chi);
    for x in 0..chi {
        for z in 0..chi {
            let o = clock_element(chi, x, z);
            let eo = e.apply(&o)?;
            let mu = o.inner(&eo) / chi as f64;
            out.push((mu, eo.distance(&o.scale(mu))));
        }
    }
    Ok(out)
}

/// ξ = 1/|ln|μ|| for each value; 0 for μ = 0 and +∞ for |μ| = 1.
pub fn correlation_lengths(mu: &[C64]) -> Result<Vec<f64>> {
    mu.iter()
        .map(|m| {
            let r = m.norm();
            if r > 1.0 + 1e-10 {
                Err(Error::Domain(format!("|mu| = {r} exceeds 1")))
            } else if r < 1e-300 {
                Ok(0.0)
            } else if (r - 1.0).abs() <= 1e-12 {
                Ok(f64::INFINITY)
            } else {
                Ok(1.0 / r.ln().abs())
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cut {
    /// Bipartition after the first `k` sites (the left edge ancilla belongs to the left part).
    Bond(usize),
    /// One-site reduced density matrix.
    Site(usize),
}

/// Schmidt spectrum (bond cut) or one-site density-matrix spectrum, descending.
pub fn entanglement_data(s: &UniformMPS, cut: Cut) -> Result<Vec<f64>> {
    let v = dense_state(s)?.vector;
    let chi = s.tensor.chi();
    let d = s.tensor.d;
    let n = s.sites;
    let (lead, trail) = match s.boundary {
        Boundary::Dangling => (chi, chi),
        Boundary::Periodic => (1, 1),
    };
    match cut {
        Cut::Bond(k) => {
            if k == 0 || k >= n {
                return Err(Error::Domain(format!("bond cut {k} outside 1..{n}")));
            }
            let left = lead * d.pow(k as u32);
            let right = d.pow((n - k) as u32) * trail;
            let m = v.into_shape(&[left, right])?;
            let sv = svd(&m)?.s;
            Ok(sv.iter().map(|x| x * x).collect())
        }
        Cut::Site(k) => {
            if k >= n {
                return Err(Error::Domain(format!("site {k} outside 0..{n}")));
            }
            let outer = lead * d.pow(k as u32);
            let inner = d.pow((n - k - 1) as u32) * trail;
            let mut rho = CTensor::zeros(&[d, d]);
            let vd = v.data();
            for o in 0..outer {
                for p in 0..d {
                    for q in 0..d {
                        let mut acc = ZERO;
                        for i in 0..inner {
                            acc += vd[(o * d + p) * inner + i] * vd[(o * d + q) * inner + i].conj();
                        }
                        let cur = rho.at(p, q);
                        rho.set(&[p, q], cur + acc);
                    }
                }
            }
            let (vals, _) = eig_hermitian(&rho)?;
            Ok(vals.into_iter().rev().collect())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedPoint {
    Trivial,
    Cluster,
    Aklt,
    Ghz,
    Neel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trajectory {
    DeformedCluster,
    ClusterToGhz,
    DeformedAklt,
}

impl NamedPoint {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trivial" | "product" => Ok(Self::Trivial),
            "cluster" => Ok(Self::Cluster),
            "aklt" => Ok(Self::Aklt),
            "ghz" => Ok(Self::Ghz),
            "neel" => Ok(Self::Neel),
            _ => Err(Error::Domain(format!("unknown phase-diagram point '{s}'"))),
        }
    }

    pub fn weights(self) -> SimplexWeights {
        let w = match self {
            Self::Trivial => [1.0, 0.0, 0.0, 0.0],
            Self::Cluster => [0.25; 4],
            Self::Aklt => [0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            Self::Ghz => [0.5, 0.0, 0.0, 0.5],
            Self::Neel => [0.0, 0.5, 0.5, 0.0],
        };
        SimplexWeights::from_pauli(w).expect("static point")
    }
}

impl Trajectory {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "deformedcluster" => Ok(Self::DeformedCluster),
            "clustertoghz" => Ok(Self::ClusterToGhz),
            "deformedaklt" => Ok(Self::DeformedAklt),
            _ => Err(Error::Domain(format!("unknown trajectory '{s}'"))),
        }
    }

    pub fn weights(self, beta: f64) -> Result<SimplexWeights> {
        if !beta.is_finite() {
            return Err(Error::Domain(format!("beta = {beta} is not finite")));
        }
        // Exponents of the unnormalized weights in (𝟙, X, Y, Z) order; None marks a zero weight.
        let ex: [Option<f64>; 4] = match self {
            Self::DeformedCluster => [Some(4.0 * beta), Some(0.0), Some(0.0), Some(-4.0 * beta)],
            Self::ClusterToGhz => [
                Some(2.0 * beta),
                Some(-2.0 * beta),
                Some(2.0 * beta),
                Some(-2.0 * beta),
            ],
            Self::DeformedAklt => [None, Some(2.0 * beta), Some(2.0 * beta), Some(0.0)],
        };
        let top = ex.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let raw = ex.map(|e| e.map_or(0.0, |e| (e - top).exp()));
        let s: f64 = raw.iter().sum();
        SimplexWeights::from_pauli(raw.map(|x| x / s))
    }
}

/// Named point or trajectory (with β) by name.
pub fn phase_diagram_point(name: &str, beta: f64) -> Result<SimplexWeights> {
    if let Ok(p) = NamedPoint::parse(name) {
        return Ok(p.weights());
    }
    Trajectory::parse(name)?.weights(beta)
}

/// The deformed AKLT tensor A'^p = Σ_j m[p][j] σ^j/√3 (d = 3, Cartesian labels x, y, z) and the
/// error basis read off from the right singular frame of m.
#[derive(Clone, Debug)]
pub struct AkltDeformed {
    pub tensor: MPSTensor,
    pub basis: UnitaryErrorBasis,
    /// ‖Im(M†M)‖/‖M†M‖. The basis pushes through exactly when this vanishes.
    pub frame_imaginary_residual: f64,
}

pub fn aklt_deformed_tensor(m: &CTensor) -> Result<AkltDeformed> {
    if m.shape() != [3, 3] {
        return Err(Error::Shape(format!("deformation must be 3x3, got {:?}", m.shape())));
    }
    let det = m.determinant();
    if det.norm().is_nan() || det.norm() <= 1e-12 {
        return Err(Error::Domain(format!("deformation is singular (|det| = {:e})", det.norm())));
    }
    let sigma = [pauli_x(), pauli_y(), pauli_z()];
    let s3 = 1.0 / 3f64.sqrt();
    let mut mats = Vec::with_capacity(3);
    for p in 0..3 {
        let mut a = CTensor::zeros(&[2, 2]);
        for (j, s) in sigma.iter().enumerate() {
            a.add_scaled(s, m.at(p, j) * s3)?;
        }
        mats.push(a);
    }
    let tensor = MPSTensor::from_matrices(&mats)?;

    // The virtual partner of the physical rotation is n_α·σ for a real eigenframe {n_α} of
    // G = m†m, which exists exactly when Im G = 0.
    let g = m.dagger().matmul(m)?;
    let imag = g.data().iter().map(|z| z.im * z.im).sum::<f64>().sqrt() / g.norm();
    let re = faer::Mat::<f64>::from_fn(3, 3, |i, j| 0.5 * (g.at(i, j).re + g.at(j, i).re));
    let dec = re
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Precondition(format!("eigensolver did not converge: {e:?}")))?;
    let u = dec.U();
    let frame: Vec<[f64; 3]> = (0..3).map(|c| [u[(0, c)], u[(1, c)], u[(2, c)]]).collect();
    let frame = gram_schmidt3(frame);
    let mut elements = vec![CTensor::eye(2)];
    for n in &frame {
        let mut op = CTensor::zeros(&[2, 2]);
        for (j, s) in sigma.iter().enumerate() {
            op.add_scaled(s, C64::new(n[j], 0.0))?;
        }
        elements.push(op);
    }
    let basis = UnitaryErrorBasis::from_elements(elements)?;
    Ok(AkltDeformed {
        tensor,
        basis,
        frame_imaginary_residual: imag,
    })
}

fn gram_schmidt3(mut v: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    for i in 0..v.len() {
        for j in 0..i {
            let p = dot(&v[i], &v[j]);
            let vj = v[j];
            for k in 0..3 {
                v[i][k] -= p * vj[k];
            }
        }
        let n = dot(&v[i], &v[i]).sqrt();
        for k in 0..3 {
            v[i][k] /= n;
        }
    }
    v
}

/// Embeds the d=3 Cartesian AKLT physical space into the d=4 tetrahedron labels (X, Y, Z slots).
pub fn embed_spin1_in_tetrahedron(a: &MPSTensor) -> Result<MPSTensor> {
    if a.d != 3 {
        return Err(Error::Dimension(format!("expected d = 3, got {}", a.d)));
    }
    let mut mats = vec![CTensor::zeros(&[a.chi_left, a.chi_right])];
    mats.extend(a.matrices());
    MPSTensor::from_matrices(&mats)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementCheck {
    pub index: usize,
    pub invariance_residual: f64,
    pub unitary: Option<CTensor>,
    pub push_residual: Option<f64>,
    pub unitarity_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionReport {
    pub elements: Vec<ElementCheck>,
}

impl ConditionReport {
    pub fn max_invariance_residual(&self) -> f64 {
        self.elements.iter().map(|e| e.invariance_residual).fold(0.0, f64::max)
    }

    pub fn all_pass(&self, tol: f64) -> bool {
        self.elements.iter().all(|e| {
            e.invariance_residual < tol
                && e.push_residual.is_some_and(|r| r < 1e-10)
                && e.unitarity_residual.is_some_and(|r| r < 1e-10)
        })
    }
}

/// Transfer invariance and push-through data for every basis element (V on the left, V† on the right).
pub fn check_conditions(a: &MPSTensor, basis: &UnitaryErrorBasis) -> Result<ConditionReport> {
    if !a.is_square() || basis.dim != a.chi() {
        return Err(Error::Dimension(format!(
            "basis dimension {} vs bond dimension {}x{}",
            basis.dim, a.chi_left, a.chi_right
        )));
    }
    let e = transfer_matrix(a)?;
    let mut elements = Vec::with_capacity(basis.len());
    for (index, v) in basis.elements.iter().enumerate() {
        let vd = v.dagger();
        let invariance_residual = e.invariance_residual(v, &vd)?;
        let mut check = ElementCheck {
            index,
            invariance_residual,
            unitary: None,
            push_residual: None,
            unitarity_residual: None,
        };
        if invariance_residual < 1e-10 {
            if let Ok(u) = crate::protocol::construct_correction_unitary(a, v, &vd) {
                check.push_residual = Some(crate::protocol::push_through_residual(a, &u, v, &vd)?);
                check.unitarity_residual = Some(u.unitarity_residual());
                check.unitary = Some(u);
            }
        }
        elements.push(check);
    }
    Ok(ConditionReport { elements })
}

/// Pauli basis convenience for χ=2 families.
pub fn default_basis(chi: usize) -> Result<UnitaryErrorBasis> {
    if chi == 2 {
        Ok(pauli_basis())
    } else {
        crate::bases::clock_basis(chi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{clock_basis, quaternion_transversal, from_projective_rep};
    use crate::linalg::fidelity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tetrahedron_named_points() {
        let a = tetrahedron_tensor(&NamedPoint::Cluster.weights()).unwrap();
        assert_eq!(a.d, 4);
        assert!((a.norm_sqr() - 2.0).abs() < 1e-14);
        let p = tetrahedron_tensor(&NamedPoint::Trivial.weights()).unwrap();
        let s = UniformMPS::new(p, 3, Boundary::Periodic).unwrap();
        let ds = dense_state(&s).unwrap();
        assert!((ds.norm - 2.0).abs() < 1e-14);
        assert!((ds.vector.get(&[0]).norm() - 1.0).abs() < 1e-14);
        assert!(tetrahedron_tensor(&SimplexWeights::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn cluster_transfer_is_half_swap() {
        let e = transfer_matrix(&tetrahedron_tensor(&NamedPoint::Cluster.weights()).unwrap()).unwrap();
        let mut swap = CTensor::zeros(&[4, 4]);
        for i in 0..2 {
            for j in 0..2 {
                // ½|Ω⟩⟨Ω| in the (l, l̄)×(r, r̄) grouping, which is SWAP/2 after regrouping to (l, r)×(l̄, r̄).
                swap.set(&[i * 2 + i, j * 2 + j], C64::new(0.5, 0.0));
            }
        }
        assert!(e.entries.distance(&swap) < 1e-14);
        let prod = transfer_matrix(&tetrahedron_tensor(&NamedPoint::Trivial.weights()).unwrap()).unwrap();
        assert!(prod.entries.distance(&CTensor::eye(4)) < 1e-15);
    }

    #[test]
    fn aklt_transfer_eigenvalues() {
        let e = transfer_matrix(&tetrahedron_tensor(&NamedPoint::Aklt.weights()).unwrap()).unwrap();
        let (vals, _) = eig_hermitian(&e.entries).unwrap();
        let want = [-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 1.0];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_weight_examples() {
        let w = spectrum_to_weights(&[ONE; 4], 2).unwrap();
        assert_eq!(w.pauli().unwrap(), [1.0, 0.0, 0.0, 0.0]);
        let t = C64::new(-1.0 / 3.0, 0.0);
        let w = spectrum_to_weights(&[ONE, t, t, t], 2).unwrap();
        let p = w.pauli().unwrap();
        assert!(p[0].abs() < 1e-15 && p[1..].iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        // (1, 0.9, 0.9, 0.9) is feasible: λ = (0.925, 0.025, 0.025, 0.025).
        let n = C64::new(0.9, 0.0);
        let p = spectrum_to_weights(&[ONE, n, n, n], 2).unwrap().pauli().unwrap();
        assert!((p[0] - 0.925).abs() < 1e-14 && (p[3] - 0.025).abs() < 1e-14);
        // Pauli order (1, 0.9, 0.9, −0.9) forces λ_z = (1 − 2.7)/4 < 0.
        let mu = pauli_to_grid([ONE, n, n, -n]);
        match spectrum_to_weights(&mu, 2) {
            Err(Error::InfeasibleSpectrum { value, .. }) => assert!((value + 0.425).abs() < 1e-14),
            other => panic!("expected infeasible, got {other:?}"),
        }
        let cplx = [ONE, C64::new(0.1, 0.2), ZERO, ZERO];
        assert!(matches!(spectrum_to_weights(&cplx, 2), Err(Error::InfeasibleSpectrum { .. })));
    }

    #[test]
    fn weights_spectrum_examples() {
        let mu = weights_to_spectrum(&NamedPoint::Cluster.weights());
        assert!((mu[0] - ONE).norm() < 1e-15 && mu[1..].iter().all(|m| m.norm() < 1e-15));
        let mu = grid_to_pauli(&weights_to_spectrum(&NamedPoint::Aklt.weights()));
        assert!(mu[1..].iter().all(|m| (m - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-15));
        let xi = correlation_lengths(&mu[1..]).unwrap();
        assert!((xi[0] - 1.0 / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn clock_uniform_chi3_flat_spectrum() {
        let mu = weights_to_spectrum(&SimplexWeights::uniform(3).unwrap());
        assert!((mu[0] - ONE).norm() < 1e-14);
        assert!(mu[1..].iter().all(|m| m.norm() < 1e-14));
    }

    #[test]
    fn clock_measured_spectrum_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for chi in 2..=4 {
            let w = SimplexWeights::random(chi, &mut rng);
            let a = clock_tensor(&w).unwrap();
            let mu = weights_to_spectrum(&w);
            for ((m, res), want) in measured_clock_spectrum(&a).unwrap().iter().zip(&mu) {
                assert!(*res < 1e-12);
                assert!((m - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn correlation_length_cases() {
        let xi = correlation_lengths(&[C64::new(-1.0 / 3.0, 0.0), ZERO, ONE]).unwrap();
        assert!((xi[0] - 0.9102392266268373).abs() < 1e-12);
        assert_eq!(xi[1], 0.0);
        assert!(xi[2].is_infinite());
        assert!(correlation_lengths(&[C64::new(1.1, 0.0)]).is_err());
    }

    #[test]
    fn clock_chi2_matches_tetrahedron_up_to_phase() {
        let w = NamedPoint::Cluster.weights();
        let c = clock_tensor(&w).unwrap();
        let t = tetrahedron_tensor(&w).unwrap();
        // clock index a·2+b: (0,0)=𝟙, (0,1)=Z, (1,0)=X, (1,1)=−iY; tetrahedron order 𝟙, X, Y, Z.
        let perm = [0, 3, 1, 2];
        let mut u = CTensor::zeros(&[4, 4]);
        for (clock_idx, &tet_idx) in perm.iter().enumerate() {
            let ph = if clock_idx == 3 { C64::new(0.0, -1.0) } else { ONE };
            u.set(&[clock_idx, tet_idx], ph);
        }
        let mapped = t.apply_physical(&u).unwrap();
        let sc = dense_state(&UniformMPS::new(c.clone(), 4, Boundary::Periodic).unwrap()).unwrap();
        let sm = dense_state(&UniformMPS::new(mapped, 4, Boundary::Periodic).unwrap()).unwrap();
        assert!(fidelity(&sc.vector, &sm.vector) > 1.0 - 1e-12);
        assert!(c.data().iter().zip(t.apply_physical(&u).unwrap().data()).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn chi3_concentrated_is_product() {
        let mut g = vec![vec![0.0; 3]; 3];
        g[0][0] = 1.0;
        let a = clock_tensor(&SimplexWeights::new(3, g).unwrap()).unwrap();
        let e = entanglement_data(&UniformMPS::new(a, 4, Boundary::Periodic).unwrap(), Cut::Bond(2)).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nice_basis_examples() {
        let p = pauli_basis();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = SimplexWeights::random(2, &mut rng);
        let a = nice_basis_tensor(&p, &w.pauli().unwrap()).unwrap();
        assert_eq!(a, tetrahedron_tensor(&w).unwrap());
        let id = nice_basis_tensor(&p, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(id, tetrahedron_tensor(&NamedPoint::Trivial.weights()).unwrap());
        let (table, rep) = quaternion_transversal();
        let q = from_projective_rep(&table, &rep).unwrap();
        let aq = nice_basis_tensor(&q, &[0.25; 4]).unwrap();
        let e = transfer_matrix(&aq).unwrap();
        for v in &q.elements {
            assert!(e.invariance_residual(v, &v.dagger()).unwrap() < 1e-12);
        }
        let raw = UnitaryErrorBasis::from_elements(p.elements.clone()).unwrap();
        assert!(matches!(nice_basis_tensor(&raw, &[0.25; 4]), Err(Error::Precondition(_))));
    }

    #[test]
    fn dense_state_examples() {
        let ghz = tetrahedron_tensor(&NamedPoint::Ghz.weights()).unwrap();
        let ds = dense_state(&UniformMPS::new(ghz, 4, Boundary::Periodic).unwrap()).unwrap();
        // Two-branch cat (|++++⟩ + |−−−−⟩)/√2 with |±⟩ = (|𝟙⟩ ± |Z⟩)/√2.
        let cat = cat_state(4, 4, 0, 3);
        assert!(fidelity(&ds.vector, &cat) > 1.0 - 1e-12);

        let aklt = tetrahedron_tensor(&NamedPoint::Aklt.weights()).unwrap();
        let e = transfer_matrix(&aklt).unwrap();
        let ds = dense_state(&UniformMPS::new(aklt, 2, Boundary::Periodic).unwrap()).unwrap();
        let tr = e.power_trace(2).unwrap();
        assert!((ds.norm * ds.norm - (1.0 + 3.0 / 9.0)).abs() < 1e-12);
        assert!((tr.re - (1.0 + 3.0 / 9.0)).abs() < 1e-12);
    }

    pub(crate) fn cat_state(n: usize, d: usize, a: usize, b: usize) -> CTensor {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus: Vec<C64> = (0..d).map(|k| if k == a || k == b { C64::new(h, 0.0) } else { ZERO }).collect();
        let minus: Vec<C64> = (0..d)
            .map(|k| if k == a { C64::new(h, 0.0) } else if k == b { C64::new(-h, 0.0) } else { ZERO })
            .collect();
        let prod = |v: &[C64]| {
            let mut s = CTensor::vector(vec![ONE]);
            for _ in 0..n {
                s = kron(&s.reshape(&[s.len(), 1]).unwrap(), &CTensor::vector(v.to_vec()).reshape(&[d, 1]).unwrap())
                    .unwrap()
                    .into_shape(&[s.len() * d])
                    .unwrap();
            }
            s
        };
        prod(&plus).add(&prod(&minus)).unwrap().normalized()
    }

    #[test]
    fn periodic_norm_is_transfer_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 1..=4 {
            let w = SimplexWeights::random(2, &mut rng);
            let a = tetrahedron_tensor(&w).unwrap();
            let tr = transfer_matrix(&a).unwrap().power_trace(n).unwrap();
            let ds = dense_state(&UniformMPS::new(a, n, Boundary::Periodic).unwrap()).unwrap();
            assert!((ds.norm * ds.norm - tr.re).abs() < 1e-10);
        }
    }

    #[test]
    fn bond_spectrum_is_half_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in [4, 6, 8] {
            let w = SimplexWeights::random(2, &mut rng);
            let s = UniformMPS::new(tetrahedron_tensor(&w).unwrap(), n, Boundary::Dangling).unwrap();
            let e = entanglement_data(&s, Cut::Bond(n / 2)).unwrap();
            assert!((e[0] - 0.5).abs() < 1e-10 && (e[1] - 0.5).abs() < 1e-10);
            assert!(e[2..].iter().all(|x| x.abs() < 1e-10));
        }
        let prod = UniformMPS::new(tetrahedron_tensor(&NamedPoint::Trivial.weights()).unwrap(), 6, Boundary::Periodic).unwrap();
        let e = entanglement_data(&prod, Cut::Bond(3)).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12 && e[1].abs() < 1e-12);
    }

    #[test]
    fn site_spectrum_is_weights() {
        let s = UniformMPS::new(clock_tensor(&SimplexWeights::uniform(3).unwrap()).unwrap(), 3, Boundary::Dangling).unwrap();
        let e = entanglement_data(&s, Cut::Site(1)).unwrap();
        assert_eq!(e.len(), 9);
        assert!(e.iter().all(|x| (x - 1.0 / 9.0).abs() < 1e-12));
    }

    #[test]
    fn trajectory_values() {
        let c = NamedPoint::Cluster.weights();
        for t in [Trajectory::DeformedCluster, Trajectory::ClusterToGhz] {
            let w = t.weights(0.0).unwrap();
            assert!(w.flat().iter().zip(c.flat()).all(|(a, b)| (a - b).abs() < 1e-15));
        }
        let a = Trajectory::DeformedAklt.weights(0.0).unwrap().pauli().unwrap();
        assert!(a[0] == 0.0 && a[1..].iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let far = Trajectory::DeformedCluster.weights(200.0).unwrap().pauli().unwrap();
        assert!((far[0] - 1.0).abs() < 1e-15);
        let b = 0.7f64;
        let l1 = Trajectory::DeformedCluster.weights(b).unwrap().pauli().unwrap();
        let den = 2.0 * (1.0 + (4.0 * b).cosh());
        assert!((l1[0] - (4.0 * b).exp() / den).abs() < 1e-15);
        let l2 = Trajectory::ClusterToGhz.weights(b).unwrap().pauli().unwrap();
        assert!((l2[1] - (-2.0 * b).exp() / (4.0 * (2.0 * b).cosh())).abs() < 1e-15);
        assert!(phase_diagram_point("nope", 0.0).is_err());
    }

    #[test]
    fn check_conditions_tetrahedron_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let w = SimplexWeights::random(2, &mut rng);
        let rep = check_conditions(&tetrahedron_tensor(&w).unwrap(), &pauli_basis()).unwrap();
        assert!(rep.all_pass(1e-12));
        // Sign of σ_j σ_i σ_j† for physical label i.
        let sign = |i: usize, j: usize| if i == 0 || j == 0 || i == j { 1.0 } else { -1.0 };
        for (j, el) in rep.elements.iter().enumerate() {
            let u = el.unitary.as_ref().unwrap();
            let want = CTensor::diag(&(0..4).map(|i| C64::new(sign(i, j), 0.0)).collect::<Vec<_>>());
            assert!(u.distance(&want) < 1e-12, "element {j}");
        }
        let r = MPSTensor::random(4, 2, &mut rng);
        let rep = check_conditions(&r, &pauli_basis()).unwrap();
        assert!(rep.elements[1..].iter().all(|e| e.invariance_residual > 1e-3));
        let w3 = SimplexWeights::random(3, &mut rng);
        let rep = check_conditions(&clock_tensor(&w3).unwrap(), &clock_basis(3).unwrap()).unwrap();
        assert!(rep.all_pass(1e-10));
    }

    #[test]
    fn aklt_deformed_identity_and_real() {
        // Degenerate singular values leave the frame free; any real frame pushes through.
        let d = aklt_deformed_tensor(&CTensor::eye(3)).unwrap();
        let e = transfer_matrix(&d.tensor).unwrap();
        for v in &d.basis.elements {
            assert!(e.invariance_residual(v, &v.dagger()).unwrap() < 1e-12);
        }
        assert!(d.frame_imaginary_residual < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let m = CTensor::from_fn(&[3, 3], |_| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let d = aklt_deformed_tensor(&m).unwrap();
        assert!(d.frame_imaginary_residual < 1e-12);
        let e = transfer_matrix(&d.tensor).unwrap();
        for v in &d.basis.elements {
            assert!(e.invariance_residual(v, &v.dagger()).unwrap() < 1e-10);
        }
        assert!(aklt_deformed_tensor(&CTensor::zeros(&[3, 3])).is_err());
    }

    #[test]
    fn aklt_diag_deformation_is_trajectory() {
        for beta in [0.0f64, 0.5, 1.0] {
            let m = CTensor::diag(&[C64::new(beta.exp(), 0.0), C64::new(beta.exp(), 0.0), ONE]);
            let d = aklt_deformed_tensor(&m).unwrap();
            let emb = embed_spin1_in_tetrahedron(&d.tensor).unwrap();
            let t = tetrahedron_tensor(&Trajectory::DeformedAklt.weights(beta).unwrap()).unwrap();
            let a = dense_state(&UniformMPS::new(emb, 4, Boundary::Periodic).unwrap()).unwrap();
            let b = dense_state(&UniformMPS::new(t, 4, Boundary::Periodic).unwrap()).unwrap();
            assert!(fidelity(&a.vector, &b.vector) > 1.0 - 1e-12);
        }
    }
}
