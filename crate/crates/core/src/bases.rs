//! Unitary error bases, nice error bases, and their Choi (Bell) vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, CTensor, C64, ONE, ZERO};

pub const BASIS_TOL: f64 = 1e-10;

/// Finite index group with the cocycle of a projective representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupData {
    pub labels: Vec<String>,
    /// `table[g][h]` is the index of g·h.
    pub table: Vec<Vec<usize>>,
    /// `cocycle[g][h]` is ω(g, h) with V_g V_h = ω(g, h) V_{gh}.
    pub cocycle: Vec<Vec<C64>>,
}

impl GroupData {
    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn inverse(&self, g: usize) -> usize {
        (0..self.order()).find(|&h| self.table[g][h] == 0).unwrap_or(0)
    }

    /// Conjugacy classes, each sorted, ordered by their smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut class_of = vec![usize::MAX; n];
        let mut classes = Vec::new();
        for g in 0..n {
            if class_of[g] != usize::MAX {
                continue;
            }
            let mut members: Vec<usize> = (0..n)
                .map(|h| self.table[self.table[h][g]][self.inverse(h)])
                .collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                class_of[m] = classes.len();
            }
            classes.push(members);
        }
        classes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryErrorBasis {
    pub dim: usize,
    pub elements: Vec<CTensor>,
    pub group: Option<GroupData>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiBasis {
    pub dim: usize,
    pub vectors: Vec<CTensor>,
}

fn validation(what: impl Into<String>, pair: (usize, usize)) -> Error {
    Error::Validation {
        what: what.into(),
        pair,
    }
}

impl UnitaryErrorBasis {
    /// Accepts a raw list of unitaries without group structure.
    pub fn from_elements(elements: Vec<CTensor>) -> Result<Self> {
        let dim = elements.first().map(|e| e.rows()).unwrap_or(0);
        let b = Self {
            dim,
            elements,
            group: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let chi = self.dim;
        if chi == 0 || self.elements.len() != chi * chi {
            return Err(validation(
                format!("need {} elements of size {chi}, got {}", chi * chi, self.elements.len()),
                (0, 0),
            ));
        }
        for (k, v) in self.elements.iter().enumerate() {
            if v.shape() != [chi, chi] {
                return Err(validation(format!("element shape {:?}", v.shape()), (k, k)));
            }
            let r = v.unitarity_residual();
            if r >= BASIS_TOL {
                return Err(validation(format!("element not unitary (residual {r:e})"), (k, k)));
            }
        }
        let id_res = self.elements[0].distance(&CTensor::eye(chi));
        if id_res >= BASIS_TOL {
            return Err(validation(format!("first element is not the identity ({id_res:e})"), (0, 0)));
        }
        for a in 0..self.elements.len() {
            for b in a + 1..self.elements.len() {
                let t = self.elements[a].inner(&self.elements[b]).norm();
                if t >= BASIS_TOL {
                    return Err(validation(format!("not trace-orthogonal (|Tr V†W| = {t:e})"), (a, b)));
                }
            }
        }
        if let Some(g) = &self.group {
            let n = self.elements.len();
            if g.table.len() != n || g.table.iter().any(|row| row.len() != n) {
                return Err(validation("multiplication table size", (0, 0)));
            }
            for a in 0..n {
                for b in 0..n {
                    let w = g.cocycle[a][b];
                    if (w.norm() - 1.0).abs() >= BASIS_TOL {
                        return Err(validation(format!("cocycle modulus {}", w.norm()), (a, b)));
                    }
                    let lhs = self.elements[a].matmul(&self.elements[b])?;
                    let rhs = self.elements[g.table[a][b]].scale(w);
                    let r = lhs.distance(&rhs);
                    if r >= BASIS_TOL {
                        return Err(validation(format!("group-like property fails ({r:e})"), (a, b)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Index of the element equal to `m` up to a phase, with the aligned residual.
    pub fn find_up_to_phase(&self, m: &CTensor) -> Option<(usize, f64)> {
        self.elements
            .iter()
            .enumerate()
            .map(|(k, v)| (k, crate::linalg::phase_aligned_distance(v, m)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Matrix whose columns are vec(V_α)/√χ; unitary exactly when the basis is trace-orthogonal.
    pub fn column_matrix(&self) -> CTensor {
        let chi = self.dim;
        let s = 1.0 / (chi as f64).sqrt();
        let n = chi * chi;
        CTensor::from_fn(&[n, n], |ix| self.elements[ix[1]].data()[ix[0]] * s)
    }
}

pub fn pauli_basis() -> UnitaryErrorBasis {
    // Labels in (x, z) bit form: 𝟙=(0,0), X=(1,0), Y=(1,1), Z=(0,1).
    let bits = [(0u8, 0u8), (1, 0), (1, 1), (0, 1)];
    let index = |b: (u8, u8)| bits.iter().position(|&x| x == b).expect("closed");
    let table: Vec<Vec<usize>> = bits
        .iter()
        .map(|g| bits.iter().map(|h| index((g.0 ^ h.0, g.1 ^ h.1))).collect())
        .collect();
    let elements = vec![CTensor::eye(2), pauli_x(), pauli_y(), pauli_z()];
    let labels = ["e", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
    with_group(elements, labels, table).expect("Pauli basis is a nice error basis")
}

/// Cyclic shift 𝒳|j⟩ = |j−1 mod χ⟩.
pub fn shift_matrix(chi: usize) -> CTensor {
    CTensor::from_fn(&[chi, chi], |ix| if (ix[0] + 1) % chi == ix[1] { ONE } else { ZERO })
}

/// 𝒵 = diag(1, ω, …, ω^{χ−1}).
pub fn clock_z(chi: usize) -> CTensor {
    let phases: Vec<C64> = (0..chi).map(|j| root_of_unity(chi, j as i64)).collect();
    CTensor::diag(&phases)
}

/// ω^k with ω = e^{2πi/χ}.
pub fn root_of_unity(chi: usize, k: i64) -> C64 {
    let k = k.rem_euclid(chi as i64);
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / chi as f64)
}

/// 𝒳^a 𝒵^b.
pub fn clock_element(chi: usize, a: usize, b: usize) -> CTensor {
    let w = root_of_unity;
    CTensor::from_fn(&[chi, chi], |ix| {
        // 𝒳^a maps |j⟩ to |j−a⟩, so row i picks column i+a with the 𝒵^b phase of that column.
        let j = (ix[0] + a) % chi;
        if ix[1] == j {
            w(chi, (b * j) as i64)
        } else {
            ZERO
        }
    })
}

pub fn clock_basis(chi: usize) -> Result<UnitaryErrorBasis> {
    if chi < 2 {
        return Err(Error::Domain(format!("clock basis needs chi >= 2, got {chi}")));
    }
    let mut elements = Vec::with_capacity(chi * chi);
    let mut labels = Vec::with_capacity(chi * chi);
    for a in 0..chi {
        for b in 0..chi {
            elements.push(clock_element(chi, a, b));
            labels.push(format!("({a},{b})"));
        }
    }
    let table = (0..chi * chi)
        .map(|g| {
            (0..chi * chi)
                .map(|h| ((g / chi + h / chi) % chi) * chi + (g % chi + h % chi) % chi)
                .collect()
        })
        .collect();
    with_group(elements, labels, table)
}

fn with_group(elements: Vec<CTensor>, labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<UnitaryErrorBasis> {
    let chi = elements.first().map(|e| e.rows()).unwrap_or(0);
    let n = elements.len();
    let mut cocycle = vec![vec![ONE; n]; n];
    for g in 0..n {
        for h in 0..n {
            let gh = table[g][h];
            let prod = elements[g].matmul(&elements[h])?;
            cocycle[g][h] = elements[gh].inner(&prod) / chi as f64;
        }
    }
    let b = UnitaryErrorBasis {
        dim: chi,
        elements,
        group: Some(GroupData {
            labels,
            table,
            cocycle,
        }),
    };
    b.validate()?;
    Ok(b)
}

/// Builds a nice error basis from a projective representation of a finite group.
/// Element 0 of the table must be the group identity; its image may carry a global phase,
/// which is removed.
pub fn from_projective_rep(table: &[Vec<usize>], rep: &[CTensor]) -> Result<UnitaryErrorBasis> {
    let n = table.len();
    if rep.len() != n || n == 0 {
        return Err(validation(format!("{} representatives for a group of order {n}", rep.len()), (0, 0)));
    }
    let chi = rep[0].rows();
    if chi * chi != n {
        return Err(validation(format!("group order {n} is not chi^2 for chi = {chi}"), (0, 0)));
    }
    for (g, row) in table.iter().enumerate() {
        if row.len() != n || row.iter().any(|&x| x >= n) {
            return Err(validation("malformed multiplication table", (g, g)));
        }
        if table[0][g] != g || table[g][0] != g {
            return Err(validation("element 0 is not the identity of the table", (0, g)));
        }
    }
    for (g, v) in rep.iter().enumerate() {
        if v.shape() != [chi, chi] {
            return Err(validation(format!("representative shape {:?}", v.shape()), (g, g)));
        }
        let r = v.unitarity_residual();
        if r >= BASIS_TOL {
            return Err(validation(format!("representative not unitary ({r:e})"), (g, g)));
        }
    }
    let e_phase = rep[0].trace() / chi as f64;
    if (e_phase.norm() - 1.0).abs() >= BASIS_TOL || rep[0].distance(&CTensor::eye(chi).scale(e_phase)) >= BASIS_TOL {
        return Err(validation("identity is not represented by a multiple of the identity", (0, 0)));
    }
    let elements: Vec<CTensor> = rep.iter().map(|v| v.scale(e_phase.conj())).collect();
    for a in 0..n {
        for b in a + 1..n {
            let t = elements[a].inner(&elements[b]).norm();
            if t >= BASIS_TOL {
                return Err(validation(format!("not trace-orthogonal (|Tr V†W| = {t:e})"), (a, b)));
            }
        }
    }
    let labels = (0..n).map(|g| g.to_string()).collect();
    with_group(elements, labels, table.to_vec())
}

/// The 2-dimensional irrep of the quaternion group restricted to the transversal {1, i, j, k}
/// of its center, with the multiplication table of the quotient ℤ₂×ℤ₂.
pub fn quaternion_transversal() -> (Vec<Vec<usize>>, Vec<CTensor>) {
    let mi = C64::new(0.0, -1.0);
    let rep = vec![CTensor::eye(2), pauli_x().scale(mi), pauli_y().scale(mi), pauli_z().scale(mi)];
    // In the quotient: i·j = k, j·k = i, k·i = j, squares trivial.
    let table = vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]];
    (table, rep)
}

/// |V_α⟩ = (1/√χ) Σ (V_α)_{ab} |a⟩|b⟩.
pub fn choi_vectors(basis: &UnitaryErrorBasis) -> ChoiBasis {
    let s = 1.0 / (basis.dim as f64).sqrt();
    ChoiBasis {
        dim: basis.dim,
        vectors: basis
            .elements
            .iter()
            .map(|v| CTensor::vector(v.data().iter().map(|z| z * s).collect()))
            .collect(),
    }
}

impl ChoiBasis {
    /// Reads vector α back as the χ×χ operator it encodes.
    pub fn operator(&self, alpha: usize) -> CTensor {
        let s = (self.dim as f64).sqrt();
        CTensor::from_parts(
            vec![self.dim, self.dim],
            self.vectors[alpha].data().iter().map(|z| z * s).collect(),
        )
    }

    pub fn gram(&self) -> CTensor {
        let n = self.vectors.len();
        CTensor::from_fn(&[n, n], |ix| self.vectors[ix[0]].inner(&self.vectors[ix[1]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{svd, I};

    fn max_entangled(v: &CTensor, chi: usize) -> bool {
        let m = v.reshape(&[chi, chi]).unwrap();
        let s = svd(&m).unwrap().s;
        s.iter().all(|x| (x - 1.0 / (chi as f64).sqrt()).abs() < 1e-12)
    }

    #[test]
    fn pauli_examples() {
        let b = pauli_basis();
        assert!(b.elements[1].inner(&b.elements[2]).norm() < 1e-15);
        let g = b.group.as_ref().unwrap();
        assert_eq!(g.table[1][2], 3);
        assert!((g.cocycle[1][2] - I).norm() < 1e-15);
        b.validate().unwrap();
    }

    #[test]
    fn clock_chi2_matches_pauli_up_to_phase() {
        let c = clock_basis(2).unwrap();
        let p = pauli_basis();
        for v in &c.elements {
            let (_, r) = p.find_up_to_phase(v).unwrap();
            assert!(r < 1e-14);
        }
        // 𝒳𝒵 = −iY
        let xz = clock_element(2, 1, 1);
        assert!(xz.distance(&pauli_y().scale(C64::new(0.0, -1.0))) < 1e-15);
    }

    #[test]
    fn clock_chi3_commutation() {
        let x = shift_matrix(3);
        let z = clock_z(3);
        let w = root_of_unity(3, 1);
        let xz = x.matmul(&z).unwrap();
        let zx = z.matmul(&x).unwrap().scale(w);
        assert!(xz.distance(&zx) < 1e-12);
        assert!(clock_element(3, 1, 1).distance(&xz) < 1e-15);
    }

    #[test]
    fn clock_chi4_trace_table() {
        let b = clock_basis(4).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let t = b.elements[i].inner(&b.elements[j]);
                let want = if i == j { 4.0 } else { 0.0 };
                assert!((t - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn clock_rejects_chi1() {
        assert!(matches!(clock_basis(1), Err(Error::Domain(_))));
    }

    #[test]
    fn projective_rep_pauli_and_degenerate() {
        let p = pauli_basis();
        let g = p.group.clone().unwrap();
        let b = from_projective_rep(&g.table, &p.elements).unwrap();
        let allowed = [ONE, -ONE, I, -I];
        for row in &b.group.unwrap().cocycle {
            for w in row {
                assert!(allowed.iter().any(|a| (a - w).norm() < 1e-12));
            }
        }
        let trivial = vec![CTensor::eye(2); 4];
        match from_projective_rep(&g.table, &trivial) {
            Err(Error::Validation { what, pair }) => {
                assert!(what.contains("trace-orthogonal"));
                assert_eq!(pair, (0, 1));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn quaternion_matches_pauli() {
        let (table, rep) = quaternion_transversal();
        let b = from_projective_rep(&table, &rep).unwrap();
        let p = pauli_basis();
        for (k, v) in b.elements.iter().enumerate() {
            let (idx, r) = p.find_up_to_phase(v).unwrap();
            assert_eq!(idx, k);
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn choi_examples() {
        let p = pauli_basis();
        let c = choi_vectors(&p);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CTensor::vector(vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)]);
        assert!(c.vectors[0].distance(&bell) < 1e-15);
        for v in &c.vectors {
            assert!(max_entangled(v, 2));
        }
        let c3 = choi_vectors(&clock_basis(3).unwrap());
        assert!(c3.gram().distance(&CTensor::eye(9)) < 1e-12);
        for v in &c3.vectors {
            assert!(max_entangled(v, 3));
        }
        for (k, v) in clock_basis(3).unwrap().elements.iter().enumerate() {
            assert!(c3.operator(k).distance(v) < 1e-15);
        }
    }

    #[test]
    fn conjugacy_classes_abelian() {
        let g = clock_basis(3).unwrap().group.unwrap();
        let cl = g.conjugacy_classes();
        assert_eq!(cl.len(), 9);
        assert!(cl.iter().all(|c| c.len() == 1));
    }
}
