//! Applying an operator stored in a resource state: one sublattice of the resource is
//! Bell-measured against the input qubits and the outcome is undone by a Pauli string.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{pauli_basis, UnitaryErrorBasis};
use crate::error::{Error, Result};
use crate::linalg::{check_cap, contract, fidelity, pinv, CTensor, C64, ONE, ZERO};
use crate::mps::{dense_state, UniformMPS};
use crate::seeds::trial_rng;

const PAULI_TOL: f64 = 1e-10;

/// A resource over 2N qubits ordered (a_1, b_1, …, a_N, b_N) read as the operator
/// O[b, a] = R(a, b) from the a-sublattice to the b-sublattice.
#[derive(Clone, Debug)]
pub struct StoredProgram {
    pub qubits: usize,
    pub resource: CTensor,
}

impl StoredProgram {
    /// Open-chain cluster state Π CZ |+⟩^{⊗2N}.
    pub fn cluster(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("program needs at least one qubit".into()));
        }
        check_cap(1u128 << (2 * n), "cluster resource")?;
        let m = 2 * n;
        let amp = 1.0 / ((1u64 << m) as f64).sqrt();
        let resource = CTensor::from_fn(&[1 << m], |ix| {
            let s = ix[0];
            let bit = |k: usize| (s >> (m - 1 - k)) & 1;
            let parity: usize = (0..m - 1).map(|k| bit(k) & bit(k + 1)).sum();
            C64::new(if parity.is_multiple_of(2) { amp } else { -amp }, 0.0)
        });
        Ok(Self { qubits: n, resource })
    }

    /// N Bell pairs (a_k, b_k): the identity program.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("program needs at least one qubit".into()));
        }
        check_cap(1u128 << (2 * n), "identity resource")?;
        let amp = 1.0 / ((1u64 << n) as f64).sqrt();
        let resource = CTensor::from_fn(&[1 << (2 * n)], |ix| {
            let s = ix[0];
            let same = (0..n).all(|k| (s >> (2 * n - 1 - 2 * k)) & 1 == (s >> (2 * n - 2 - 2 * k)) & 1);
            if same {
                C64::new(amp, 0.0)
            } else {
                ZERO
            }
        });
        Ok(Self { qubits: n, resource })
    }

    /// The stored operator as a 2^N × 2^N matrix.
    pub fn operator(&self) -> Result<CTensor> {
        let n = self.qubits;
        let mut perm: Vec<usize> = (0..n).map(|k| 2 * k + 1).collect();
        perm.extend((0..n).map(|k| 2 * k));
        self.resource
            .reshape(&vec![2; 2 * n])?
            .permute(&perm)?
            .into_shape(&[1 << n, 1 << n])
    }
}

/// A Pauli string X^x Z^z with a phase, bits indexed from the most significant qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
    pub phase: C64,
}

impl PauliString {
    pub fn matrix(&self) -> CTensor {
        let n = self.x.len();
        let mask = |bits: &[bool]| bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        let (xm, zm) = (mask(&self.x), mask(&self.z));
        CTensor::from_fn(&[1 << n, 1 << n], |ix| {
            let (i, j) = (ix[0], ix[1]);
            if i != j ^ xm {
                return ZERO;
            }
            if (j & zm).count_ones() % 2 == 0 {
                self.phase
            } else {
                -self.phase
            }
        })
    }

    /// Reads a matrix as a phased Pauli string; fails unless it is one within tolerance.
    pub fn identify(m: &CTensor, n: usize) -> Result<Self> {
        let dim = 1usize << n;
        if m.shape() != [dim, dim] {
            return Err(Error::Dimension(format!("expected {dim}x{dim}, got {:?}", m.shape())));
        }
        let xm = (0..dim)
            .max_by(|&a, &b| m.at(a, 0).norm().total_cmp(&m.at(b, 0).norm()))
            .unwrap_or(0);
        let phase = m.at(xm, 0);
        let zm = (0..n)
            .map(|k| 1usize << (n - 1 - k))
            .filter(|&bit| (m.at(bit ^ xm, bit) / phase).re < 0.0)
            .fold(0usize, |a, b| a | b);
        let bits = |v: usize| (0..n).map(|k| (v >> (n - 1 - k)) & 1 == 1).collect::<Vec<_>>();
        let p = Self {
            x: bits(xm),
            z: bits(zm),
            phase,
        };
        let r = p.matrix().distance(m);
        if r > PAULI_TOL {
            return Err(Error::not_correctable(None, r, "conjugated outcome is not a Pauli string"));
        }
        Ok(p)
    }

    /// Single-qubit factors in the Pauli basis order (𝟙, X, Y, Z), phase dropped.
    pub fn labels(&self) -> Vec<usize> {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| match (x, z) {
                (false, false) => 0,
                (true, false) => 1,
                (true, true) => 2,
                (false, true) => 3,
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpoTrial {
    pub outcomes: Vec<usize>,
    pub correction: Vec<usize>,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpoReport {
    pub qubits: usize,
    pub trials: usize,
    pub seed: u64,
    pub fidelities: Vec<f64>,
    pub min_fidelity: f64,
    pub records: Vec<MpoTrial>,
}

/// One trial: Bell measurements between each (a_k, input_k) pair, then the Pauli correction
/// on the b-sublattice. Projecting a pair onto Choi(V̄) inserts V on the input qubit.
pub fn mpo_trial<R: Rng>(
    program: &StoredProgram,
    input: &CTensor,
    op: &CTensor,
    op_inv: &CTensor,
    basis: &UnitaryErrorBasis,
    rng: &mut R,
) -> Result<MpoTrial> {
    let n = program.qubits;
    // Axes: resource (a_1, b_1, …, a_N, b_N) then input (i_1, …, i_N).
    let joint = crate::linalg::kron(
        &program.resource.reshape(&[program.resource.len(), 1])?,
        &input.reshape(&[input.len(), 1])?,
    )?;
    let mut state = joint.into_shape(&vec![2; 3 * n])?;
    let mut labels: Vec<(char, usize)> = (0..n).flat_map(|k| [('a', k), ('b', k)]).collect();
    labels.extend((0..n).map(|k| ('i', k)));
    let mut outcomes = Vec::with_capacity(n);
    for k in 0..n {
        let pa = labels.iter().position(|&l| l == ('a', k)).expect("axis present");
        let pi = labels.iter().position(|&l| l == ('i', k)).expect("axis present");
        let cands: Vec<CTensor> = basis
            .elements
            .iter()
            .map(|v| {
                let bra = v.scale_real(1.0 / 2f64.sqrt());
                contract(&state, &bra, &[(pa, 0), (pi, 1)])
            })
            .collect::<Result<_>>()?;
        let w: Vec<f64> = cands.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        let x = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = w.len() - 1;
        for (j, wj) in w.iter().enumerate() {
            acc += wj;
            if x < acc && *wj > 0.0 {
                pick = j;
                break;
            }
        }
        outcomes.push(pick);
        state = cands[pick].scale_real(1.0 / w[pick].sqrt());
        labels.retain(|&l| l != ('a', k) && l != ('i', k));
    }
    let out = state.into_shape(&[1 << n])?;
    let mut inserted = CTensor::matrix(1, 1, vec![ONE])?;
    for &o in &outcomes {
        inserted = crate::linalg::kron(&inserted, &basis.elements[o])?;
    }
    let inserted_inv = inserted.dagger();
    let q = op.matmul(&inserted_inv)?.matmul(op_inv)?;
    let pauli = PauliString::identify(&q, n)?;
    let corrected = pauli.matrix().matvec(&out)?;
    let target = op.matvec(input)?;
    Ok(MpoTrial {
        outcomes,
        correction: pauli.labels(),
        fidelity: fidelity(&target, &corrected),
    })
}

/// Applies the stored operator to a dense input vector of N qubits, `trials` times.
pub fn mpo_apply_vector(program: &StoredProgram, input: &CTensor, trials: usize, seed: u64) -> Result<MpoReport> {
    let n = program.qubits;
    if input.len() != 1 << n {
        return Err(Error::Dimension(format!(
            "input has {} amplitudes, program expects {} qubits",
            input.len(),
            n
        )));
    }
    check_cap(1u128 << (3 * n), "resource and input register")?;
    let input = input.normalized();
    let op = program.operator()?;
    let op_inv = pinv(&op)?;
    if op.matmul(&op_inv)?.distance(&CTensor::eye(1 << n)) > 1e-10 {
        return Err(Error::not_correctable(None, f64::NAN, "stored operator is not invertible"));
    }
    let basis = pauli_basis();
    let records: Vec<MpoTrial> = (0..trials)
        .into_par_iter()
        .map(|t| mpo_trial(program, &input, &op, &op_inv, &basis, &mut trial_rng(seed, t as u64)))
        .collect::<Result<_>>()?;
    let fidelities: Vec<f64> = records.iter().map(|r| r.fidelity).collect();
    Ok(MpoReport {
        qubits: n,
        trials,
        seed,
        min_fidelity: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
        fidelities,
        records,
    })
}

/// Applies the cluster program to the dense contraction of a qubit MPS.
pub fn mpo_apply(input: &UniformMPS, trials: usize, seed: u64) -> Result<MpoReport> {
    if input.tensor.d != 2 {
        return Err(Error::Dimension(format!("input must be a qubit chain, got d = {}", input.tensor.d)));
    }
    let phi = dense_state(input)?.vector;
    let n = phi.len().trailing_zeros() as usize;
    mpo_apply_vector(&StoredProgram::cluster(n)?, &phi, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, kron};
    use crate::mps::{Boundary, MPSTensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus(n: usize) -> CTensor {
        CTensor::from_fn(&[1 << n], |_| C64::new(1.0, 0.0)).normalized()
    }

    #[test]
    fn single_pair_cluster_is_hadamard() {
        let o = StoredProgram::cluster(1).unwrap().operator().unwrap();
        assert!(o.scale_real(2f64.sqrt()).distance(&hadamard()) < 1e-14);
    }

    #[test]
    fn cluster_operator_is_scaled_unitary() {
        let o = StoredProgram::cluster(4).unwrap().operator().unwrap().scale_real(4.0);
        assert!(o.unitarity_residual() < 1e-12);
    }

    #[test]
    fn pauli_identify_roundtrip() {
        let p = PauliString {
            x: vec![true, false, true],
            z: vec![true, true, false],
            phase: C64::new(0.0, -1.0),
        };
        let q = PauliString::identify(&p.matrix(), 3).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.labels(), vec![2, 3, 1]);
        assert!(PauliString::identify(&kron(&hadamard(), &CTensor::eye(2)).unwrap(), 2).is_err());
    }

    #[test]
    fn identity_program_teleports() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let phi = CTensor::from_fn(&[2], |_| C64::new(rand::Rng::gen::<f64>(&mut rng) - 0.5, rand::Rng::gen::<f64>(&mut rng)));
        let rep = mpo_apply_vector(&StoredProgram::identity(1).unwrap(), &phi, 20, 2).unwrap();
        assert!(rep.min_fidelity > 1.0 - 1e-12);
    }

    #[test]
    fn plus_input_matches_direct_contraction() {
        let rep = mpo_apply_vector(&StoredProgram::cluster(6).unwrap(), &plus(6), 8, 5).unwrap();
        assert!(rep.min_fidelity > 1.0 - 1e-9);
        let seen: std::collections::HashSet<Vec<usize>> = rep.records.iter().map(|r| r.outcomes.clone()).collect();
        assert!(seen.len() > 1);
    }

    #[test]
    fn random_mps_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let t = MPSTensor::random(2, 2, &mut rng);
        let s = UniformMPS::new(t, 4, Boundary::Periodic).unwrap();
        let rep = mpo_apply(&s, 10, 9).unwrap();
        assert!(rep.min_fidelity > 1.0 - 1e-9);
    }
}
