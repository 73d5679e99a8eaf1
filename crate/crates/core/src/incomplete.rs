//! Preparation with an incomplete measurement: clusters of the form junction-B-junction are
//! glued by a CNOT between neighbouring virtual qubits and a Z measurement of the target only.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_cap, fidelity, pauli_x, CTensor, C64, ZERO};
use crate::mps::{absorb_site, MPSTensor};
use crate::protocol::construct_correction_unitary;
use crate::seeds::trial_rng;

/// Largest accepted value of tanh α.
pub const TANH_CAP: f64 = 1.0 - 1e-12;

/// α = arctanh(e^{−2β}), rejecting β ≤ 0 and capping tanh α at [`TANH_CAP`].
pub fn ising_alpha(beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::Domain(format!("beta must be finite and positive, got {beta}")));
    }
    Ok((-2.0 * beta).exp().min(TANH_CAP).atanh())
}

/// The bond tensor B = e^{αX}.
pub fn ising_bond(beta: f64) -> Result<CTensor> {
    let alpha = ising_alpha(beta)?;
    let (c, s) = (alpha.cosh(), alpha.sinh());
    CTensor::from_real(2, 2, &[c, s, s, c])
}

/// Site tensor with physical legs (copy, p): A^{(c,p)}_{l r} = δ_{lc} δ_{cp} B_{pr}.
pub fn junction_tensor(b: &CTensor) -> Result<MPSTensor> {
    if b.shape() != [2, 2] {
        return Err(Error::Dimension(format!("bond tensor must be 2x2, got {:?}", b.shape())));
    }
    let t = CTensor::from_fn(&[4, 2, 2], |ix| {
        let (c, p, l, r) = (ix[0] / 2, ix[0] % 2, ix[1], ix[2]);
        if l == c && c == p {
            b.at(p, r)
        } else {
            ZERO
        }
    });
    MPSTensor::from_tensor(&t)
}

/// One cluster as a state over (left ancilla, physical, right ancilla): δ_{lp} B_{pr}.
fn cluster_state(b: &CTensor) -> CTensor {
    CTensor::from_fn(&[2, 2, 2], |ix| if ix[0] == ix[1] { b.at(ix[1], ix[2]) } else { ZERO })
}

/// Target chain: the all-zero record, layout (c_0, p_0, …, c_{n−1}, p_{n−1}, r) with the
/// leftmost copy leg left open.
pub fn incomplete_target(b: &CTensor, n: usize) -> Result<CTensor> {
    let a = junction_tensor(b)?;
    let mut psi = CTensor::from_real(1, 2, &[1.0, 1.0])?;
    for _ in 0..n {
        psi = absorb_site(&psi, &a)?;
    }
    let len = psi.len();
    psi.into_shape(&[len])
}

/// Glues one new cluster to the running chain: CNOT with control on the new left ancilla and
/// target on the open right ancilla, then projects the target onto |m⟩.
/// `psi` is (rows × 2); the result is (rows·4 × 2) with the new rows (l, p).
pub fn glue_cluster(psi: &CTensor, cluster: &CTensor, m: usize) -> Result<CTensor> {
    let rows = psi.rows();
    let out = CTensor::from_fn(&[rows, 2, 2, 2], |ix| {
        let (row, l, p, r) = (ix[0], ix[1], ix[2], ix[3]);
        psi.at(row, l ^ m) * cluster.get(&[l, p, r])
    });
    out.into_shape(&[rows * 4, 2])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IncompleteTrial {
    pub outcomes: Vec<usize>,
    pub probability: f64,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IncompleteReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub fidelities: Vec<f64>,
    pub min_fidelity: f64,
    pub outcome_histogram: [usize; 2],
    pub records: Vec<Vec<usize>>,
}

/// Physical unitary pushing an X on both bonds of a junction site through to its legs.
pub fn partial_push_unitary(b: &CTensor) -> Result<CTensor> {
    let a = junction_tensor(b)?;
    construct_correction_unitary(&a, &pauli_x(), &pauli_x())
}

pub fn incomplete_trial<R: Rng>(b: &CTensor, n: usize, push: &CTensor, target: &CTensor, rng: &mut R) -> Result<IncompleteTrial> {
    let cluster = cluster_state(b);
    let mut psi = cluster.reshape(&[4, 2])?;
    let mut outcomes = Vec::with_capacity(n - 1);
    let mut prob = 1.0;
    for _ in 1..n {
        let cands = [glue_cluster(&psi, &cluster, 0)?, glue_cluster(&psi, &cluster, 1)?];
        let w = [cands[0].norm_sqr(), cands[1].norm_sqr()];
        let total = w[0] + w[1];
        let m = usize::from(rng.gen::<f64>() * total >= w[0]);
        prob *= w[m] / total;
        outcomes.push(m);
        psi = cands[m].scale_real(1.0 / cands[m].norm());
    }
    let mut shape = vec![4; n];
    shape.push(2);
    let mut state = psi.into_shape(&shape)?;
    let fix = push.dagger();
    let mut carry = 0usize;
    for (k, &m) in outcomes.iter().enumerate() {
        carry ^= m;
        if carry == 1 {
            state = state.apply_on_axis(k + 1, &fix)?;
        }
    }
    if carry == 1 {
        state = state.apply_on_axis(n, &pauli_x())?;
    }
    let len = state.len();
    let state = state.into_shape(&[len])?;
    Ok(IncompleteTrial {
        outcomes,
        probability: prob,
        fidelity: fidelity(target, &state),
    })
}

pub fn incomplete_protocol(b: &CTensor, n: usize, trials: usize, seed: u64) -> Result<IncompleteReport> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 sites, got {n}")));
    }
    check_cap(2u128 * 4u128.saturating_pow(n as u32), "incomplete-protocol chain")?;
    let push = partial_push_unitary(b)?;
    let target = incomplete_target(b, n)?;
    let results: Vec<IncompleteTrial> = (0..trials)
        .into_par_iter()
        .map(|t| incomplete_trial(b, n, &push, &target, &mut trial_rng(seed, t as u64)))
        .collect::<Result<_>>()?;
    let mut histogram = [0usize; 2];
    for r in &results {
        for &m in &r.outcomes {
            histogram[m] += 1;
        }
    }
    let fidelities: Vec<f64> = results.iter().map(|r| r.fidelity).collect();
    Ok(IncompleteReport {
        n,
        trials,
        seed,
        min_fidelity: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
        fidelities,
        outcome_histogram: histogram,
        records: results.into_iter().map(|r| r.outcomes).collect(),
    })
}

/// Amplitudes of e^{βΣ Z_k Z_{k+1}}|+⟩^{⊗n} over n spins (open chain), unnormalized.
pub fn ising_amplitudes(beta: f64, n: usize) -> CTensor {
    CTensor::from_fn(&[1 << n], |ix| {
        let s = ix[0];
        let e: f64 = (0..n.saturating_sub(1))
            .map(|k| if ((s >> (n - 1 - k)) ^ (s >> (n - 2 - k))) & 1 == 0 { 1.0 } else { -1.0 })
            .sum();
        C64::new((beta * e).exp(), 0.0)
    })
}
