//! The single-round measurement protocol on chains: cluster initialization, Bell outcomes,
//! the virtual-to-physical correction unitary and end-to-end fidelity checks.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::UnitaryErrorBasis;
use crate::error::{Error, Result};
use crate::linalg::{check_cap, fidelity, kron, pinv, CTensor, ONE, ZERO};
use crate::mps::{absorb_site, dense_state, transfer_matrix, Boundary, MPSTensor, UniformMPS};
use crate::seeds::trial_rng;

/// Transfer-invariance residual below which a virtual pair is accepted as correctable.
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Post-condition tolerance on the returned unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest number of records enumerated by [`outcome_distribution`].
pub const RECORD_BUDGET: u128 = 1 << 22;

/// The physical unitary U with Σ_q U_pq A^q = vl·A^p·vr, built as U = M'·M⁺ + (𝟙 − M·M⁺)
/// where M[p, (l, r)] = A^p_{lr} and M' is the same map for vl·A·vr.
pub fn construct_correction_unitary(a: &MPSTensor, vl: &CTensor, vr: &CTensor) -> Result<CTensor> {
    if vl.shape() != [a.chi_left, a.chi_left] || vr.shape() != [a.chi_right, a.chi_right] {
        return Err(Error::Dimension(format!(
            "virtual operators {:?}, {:?} on bonds {}x{}",
            vl.shape(),
            vr.shape(),
            a.chi_left,
            a.chi_right
        )));
    }
    let residual = pair_invariance_residual(a, vl, vr)?;
    if residual >= INVARIANCE_TOL {
        return Err(Error::not_correctable(
            None,
            residual,
            "virtual pair does not leave the transfer operator invariant",
        ));
    }
    let m = a.physical_map();
    let mp = a.apply_virtual(vl, vr)?.physical_map();
    let m_pinv = pinv(&m)?;
    let proj = m.matmul(&m_pinv)?;
    let u = mp
        .matmul(&m_pinv)?
        .add(&CTensor::eye(a.d).sub(&proj)?)?;
    let ures = u.unitarity_residual();
    let pres = push_through_residual(a, &u, vl, vr)?;
    if ures >= UNITARY_TOL || pres >= UNITARY_TOL {
        return Err(Error::not_correctable(
            None,
            ures.max(pres),
            "constructed unitary misses the unitarity or push-through tolerance",
        ));
    }
    Ok(u)
}

/// ‖(vL⊗v̄L) 𝔼 (vR⊗v̄R) − 𝔼‖ for general bond dimensions.
pub fn pair_invariance_residual(a: &MPSTensor, vl: &CTensor, vr: &CTensor) -> Result<f64> {
    if a.is_square() {
        return transfer_matrix(a)?.invariance_residual(vl, vr);
    }
    let mut e = CTensor::zeros(&[a.chi_left * a.chi_left, a.chi_right * a.chi_right]);
    for m in a.matrices() {
        e.add_scaled(&kron(&m, &m.conj())?, ONE)?;
    }
    let conj = kron(vl, &vl.conj())?.matmul(&e)?.matmul(&kron(vr, &vr.conj())?)?;
    Ok(conj.distance(&e))
}

/// ‖Σ_q U_pq A^q − vl·A^p·vr‖.
pub fn push_through_residual(a: &MPSTensor, u: &CTensor, vl: &CTensor, vr: &CTensor) -> Result<f64> {
    let lhs = a.apply_physical(u)?;
    let rhs = a.apply_virtual(vl, vr)?;
    Ok(lhs.as_tensor().distance(&rhs.as_tensor()))
}

/// N unit-normalized copies of the flattened tensor over (left ancilla, physical, right ancilla).
#[derive(Clone, Debug)]
pub struct ClusterRegister {
    pub site_state: CTensor,
    pub sites: usize,
    /// Extents of one factor: (χ_left, d, χ_right).
    pub layout: [usize; 3],
}

pub fn init_clusters(a: &MPSTensor, n: usize) -> Result<ClusterRegister> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 sites, got {n}")));
    }
    let per = (a.chi_left * a.d * a.chi_right) as u128;
    check_cap(per.saturating_pow(n as u32), "cluster register")?;
    let t = a.as_tensor().permute(&[1, 0, 2])?;
    let norm = t.norm();
    if norm == 0.0 {
        return Err(Error::Domain("zero tensor".into()));
    }
    Ok(ClusterRegister {
        site_state: t.scale_real(1.0 / norm).into_shape(&[per as usize])?,
        sites: n,
        layout: [a.chi_left, a.d, a.chi_right],
    })
}

impl ClusterRegister {
    pub fn global_vector(&self) -> Result<CTensor> {
        let col = self.site_state.reshape(&[self.site_state.len(), 1])?;
        let mut v = CTensor::matrix(1, 1, vec![ONE])?;
        for _ in 0..self.sites {
            v = kron(&v, &col)?;
        }
        let n = v.len();
        v.into_shape(&[n])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    /// Basis index measured on bond k (between sites k and k+1), for k = 0..n−2.
    pub outcomes: Vec<usize>,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrectionPlan {
    /// One d×d unitary per site.
    pub site_unitaries: Vec<CTensor>,
    pub left_boundary: CTensor,
    pub right_boundary: CTensor,
}

impl CorrectionPlan {
    pub fn identity(n: usize, d: usize, chi: usize) -> Self {
        Self {
            site_unitaries: vec![CTensor::eye(d); n],
            left_boundary: CTensor::eye(chi),
            right_boundary: CTensor::eye(chi),
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let near_id = |u: &CTensor| u.distance(&CTensor::eye(u.rows())) < tol;
        self.site_unitaries.iter().all(near_id) && near_id(&self.left_boundary) && near_id(&self.right_boundary)
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        self.site_unitaries
            .iter()
            .chain([&self.left_boundary, &self.right_boundary])
            .map(|u| u.unitarity_residual())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepDirection {
    LeftToRight,
    RightToLeft,
}

fn require_chain(a: &MPSTensor, basis: &UnitaryErrorBasis, n: usize) -> Result<()> {
    if !a.is_square() || a.chi() != basis.dim {
        return Err(Error::Dimension(format!(
            "basis dimension {} vs bonds {}x{}",
            basis.dim, a.chi_left, a.chi_right
        )));
    }
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 sites, got {n}")));
    }
    Ok(())
}

/// Exact probabilities of every record on an open chain, lexicographic in the outcomes.
pub fn outcome_distribution(a: &MPSTensor, n: usize, basis: &UnitaryErrorBasis) -> Result<Vec<OutcomeRecord>> {
    require_chain(a, basis, n)?;
    let chi = a.chi();
    let k = basis.len() as u128;
    let count = k.saturating_pow((n - 1) as u32);
    if count > RECORD_BUDGET {
        return Err(Error::Resource {
            what: "outcome records".into(),
            needed: count,
            cap: RECORD_BUDGET,
        });
    }
    let e = transfer_matrix(a)?.entries;
    let doubled: Vec<CTensor> = basis
        .elements
        .iter()
        .map(|v| kron(v, &v.conj()))
        .collect::<Result<_>>()?;
    let omega = CTensor::from_fn(&[1, chi * chi], |ix| if ix[1] / chi == ix[1] % chi { ONE } else { ZERO });
    let norm = a.norm_sqr().powi(n as i32) * (chi as f64).powi((n - 1) as i32);
    let start = omega.matmul(&e)?;
    let mut out = Vec::with_capacity(count as usize);
    let mut prefix = vec![0usize; n - 1];
    enumerate(&start, 0, &mut prefix, &e, &doubled, &omega, norm, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    row: &CTensor,
    depth: usize,
    prefix: &mut Vec<usize>,
    e: &CTensor,
    doubled: &[CTensor],
    omega: &CTensor,
    norm: f64,
    out: &mut Vec<OutcomeRecord>,
) -> Result<()> {
    if depth == prefix.len() {
        let p = row.inner(&omega.conj()).conj().re / norm;
        out.push(OutcomeRecord {
            outcomes: prefix.clone(),
            probability: p,
        });
        return Ok(());
    }
    for (alpha, b) in doubled.iter().enumerate() {
        prefix[depth] = alpha;
        let next = row.matmul(b)?.matmul(e)?;
        enumerate(&next, depth + 1, prefix, e, doubled, omega, norm, out)?;
    }
    Ok(())
}

/// Born-rule sample of a full record, drawn bond by bond from the exact conditionals.
pub fn sample_outcomes(a: &MPSTensor, n: usize, basis: &UnitaryErrorBasis, seed: u64) -> Result<OutcomeRecord> {
    let mut rng = trial_rng(seed, 0);
    sample_with(a, n, basis, &mut rng).map(|(r, _)| r)
}

/// Samples a record and returns it with the unnormalized post-measurement chain (rows (l0, p…), column r).
fn sample_with<R: Rng>(
    a: &MPSTensor,
    n: usize,
    basis: &UnitaryErrorBasis,
    rng: &mut R,
) -> Result<(OutcomeRecord, CTensor)> {
    require_chain(a, basis, n)?;
    check_cap(
        (a.chi() as u128) * (a.d as u128).saturating_pow(n as u32) * (a.chi() as u128),
        "post-measurement chain",
    )?;
    let mut psi = absorb_site(&CTensor::eye(a.chi()), a)?;
    let mut outcomes = Vec::with_capacity(n - 1);
    let mut prob = 1.0;
    for _ in 1..n {
        let cands: Vec<CTensor> = basis
            .elements
            .iter()
            .map(|v| absorb_site(&psi.matmul(v)?, a))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = cands.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("chain state vanished during sampling".into()));
        }
        let x = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if x < acc && *w > 0.0 {
                pick = k;
                break;
            }
        }
        while weights[pick] == 0.0 {
            pick -= 1;
        }
        prob *= weights[pick] / total;
        outcomes.push(pick);
        let c = &cands[pick];
        psi = c.scale_real(1.0 / c.norm());
    }
    Ok((
        OutcomeRecord {
            outcomes,
            probability: prob,
        },
        psi,
    ))
}

/// Unnormalized Dangling-chain state with V_α inserted on each bond, layout (l0, p_0..p_{n−1}, r).
pub fn post_measurement_state(a: &MPSTensor, basis: &UnitaryErrorBasis, record: &OutcomeRecord) -> Result<CTensor> {
    let n = record.outcomes.len() + 1;
    require_chain(a, basis, n)?;
    let mut psi = absorb_site(&CTensor::eye(a.chi()), a)?;
    for &alpha in &record.outcomes {
        let v = basis
            .elements
            .get(alpha)
            .ok_or_else(|| Error::Domain(format!("outcome {alpha} outside the basis")))?;
        psi = absorb_site(&psi.matmul(v)?, a)?;
    }
    let len = psi.len();
    psi.into_shape(&[len])
}

pub fn derive_corrections(
    a: &MPSTensor,
    basis: &UnitaryErrorBasis,
    record: &OutcomeRecord,
    direction: SweepDirection,
) -> Result<CorrectionPlan> {
    let n = record.outcomes.len() + 1;
    require_chain(a, basis, n)?;
    let chi = a.chi();
    let mut plan = CorrectionPlan::identity(n, a.d, chi);
    let element = |alpha: usize| {
        basis
            .elements
            .get(alpha)
            .ok_or_else(|| Error::Domain(format!("outcome {alpha} outside the basis")))
    };
    let site_fix = |site: usize, vl: &CTensor, vr: &CTensor| -> Result<CTensor> {
        construct_correction_unitary(a, vl, vr)
            .map(|u| u.dagger())
            .map_err(|e| match e {
                Error::NotCorrectable { residual, detail, .. } => Error::NotCorrectable {
                    location: Some(format!("site {site}")),
                    residual,
                    detail,
                },
                other => other,
            })
    };
    let mut w = CTensor::eye(chi);
    match direction {
        SweepDirection::LeftToRight => {
            for site in 1..n {
                w = w.matmul(element(record.outcomes[site - 1])?)?;
                if !is_identity(&w) {
                    plan.site_unitaries[site] = site_fix(site, &w, &w.dagger())?;
                }
            }
            // The right ancilla carries Wᵀ; undo it with its inverse W̄.
            plan.right_boundary = w.conj();
        }
        SweepDirection::RightToLeft => {
            for site in (0..n - 1).rev() {
                w = element(record.outcomes[site])?.matmul(&w)?;
                if !is_identity(&w) {
                    plan.site_unitaries[site] = site_fix(site, &w.dagger(), &w)?;
                }
            }
            plan.left_boundary = w.dagger();
        }
    }
    Ok(plan)
}

fn is_identity(w: &CTensor) -> bool {
    w.distance(&CTensor::eye(w.rows())) < 1e-14
}

/// Applies a plan to a Dangling-layout state vector.
pub fn apply_plan(state: &CTensor, plan: &CorrectionPlan) -> Result<CTensor> {
    let n = plan.site_unitaries.len();
    let chi = plan.left_boundary.rows();
    let d = plan.site_unitaries.first().map(|u| u.rows()).unwrap_or(1);
    let mut shape = vec![chi];
    shape.extend(std::iter::repeat_n(d, n));
    shape.push(chi);
    let mut t = state.reshape(&shape)?;
    let ops = std::iter::once(&plan.left_boundary)
        .chain(plan.site_unitaries.iter())
        .chain(std::iter::once(&plan.right_boundary));
    for (axis, u) in ops.enumerate() {
        if !is_identity(u) {
            t = t.apply_on_axis(axis, u)?;
        }
    }
    let len = t.len();
    t.into_shape(&[len])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub fidelities: Vec<f64>,
    pub min_fidelity: f64,
    /// Occurrences of each basis index over all bonds of all trials.
    pub outcome_histogram: Vec<usize>,
    pub records: Vec<OutcomeRecord>,
}

/// One trial: sample, correct, and compare with the target chain.
pub fn run_trial(
    a: &MPSTensor,
    n: usize,
    basis: &UnitaryErrorBasis,
    target: &CTensor,
    master_seed: u64,
    trial: usize,
    direction: SweepDirection,
) -> Result<(OutcomeRecord, f64)> {
    let mut rng = trial_rng(master_seed, trial as u64);
    let (record, _) = sample_with(a, n, basis, &mut rng)?;
    let post = post_measurement_state(a, basis, &record)?;
    let plan = derive_corrections(a, basis, &record, direction)?;
    let corrected = apply_plan(&post, &plan)?;
    Ok((record, fidelity(target, &corrected)))
}

pub fn run_protocol(a: &MPSTensor, n: usize, basis: &UnitaryErrorBasis, trials: usize, seed: u64) -> Result<ProtocolReport> {
    require_chain(a, basis, n)?;
    let target = dense_state(&UniformMPS::new(a.clone(), n, Boundary::Dangling)?)?.vector;
    let results: Vec<(OutcomeRecord, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(a, n, basis, &target, seed, t, SweepDirection::LeftToRight))
        .collect::<Result<_>>()?;
    let mut histogram = vec![0usize; basis.len()];
    for (r, _) in &results {
        for &o in &r.outcomes {
            histogram[o] += 1;
        }
    }
    let fidelities: Vec<f64> = results.iter().map(|r| r.1).collect();
    let min_fidelity = fidelities.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ProtocolReport {
        n,
        trials,
        seed,
        min_fidelity: if trials == 0 { f64::NAN } else { min_fidelity },
        fidelities,
        outcome_histogram: histogram,
        records: results.into_iter().map(|r| r.0).collect(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodicAnalysis {
    pub n: usize,
    /// Probability that the operator left on the closing bond is basis element k.
    pub residual_class_probability: Vec<f64>,
    /// Probability mass whose residual matched no basis element up to phase.
    pub unclassified: f64,
    pub total_probability: f64,
}

/// Exhaustive analysis of a ring: all n bonds measured, all operators pushed once around,
/// reporting which basis element survives on the closing bond.
pub fn periodic_residual_distribution(a: &MPSTensor, n: usize, basis: &UnitaryErrorBasis) -> Result<PeriodicAnalysis> {
    require_chain(a, basis, n)?;
    let chi = a.chi();
    let count = (basis.len() as u128).saturating_pow(n as u32);
    if count > RECORD_BUDGET {
        return Err(Error::Resource {
            what: "ring outcome records".into(),
            needed: count,
            cap: RECORD_BUDGET,
        });
    }
    let e = transfer_matrix(a)?.entries;
    let doubled: Vec<CTensor> = basis
        .elements
        .iter()
        .map(|v| kron(v, &v.conj()).map(|k| k.scale_real(1.0 / chi as f64)))
        .collect::<Result<_>>()?;
    let norm = a.norm_sqr().powi(n as i32);
    let mut probs = vec![0.0; basis.len()];
    let mut unclassified = 0.0;
    let mut total = 0.0;
    let mut rec = vec![0usize; n];
    for _ in 0..count {
        let mut m = CTensor::eye(chi * chi);
        let mut w = CTensor::eye(chi);
        for &alpha in &rec {
            m = m.matmul(&e)?.matmul(&doubled[alpha])?;
            w = w.matmul(&basis.elements[alpha])?;
        }
        let p = m.trace().re / norm;
        total += p;
        match basis.find_up_to_phase(&w) {
            Some((k, r)) if r < 1e-9 => probs[k] += p,
            _ => unclassified += p,
        }
        for slot in rec.iter_mut() {
            *slot += 1;
            if *slot < basis.len() {
                break;
            }
            *slot = 0;
        }
    }
    Ok(PeriodicAnalysis {
        n,
        residual_class_probability: probs,
        unclassified,
        total_probability: total,
    })
}

/// Record probability from its definition: ‖post-measurement chain‖² / (N_A^n χ^{n−1}).
pub fn record_probability(a: &MPSTensor, basis: &UnitaryErrorBasis, record: &OutcomeRecord) -> Result<f64> {
    let n = record.outcomes.len() + 1;
    let post = post_measurement_state(a, basis, record)?;
    Ok(post.norm_sqr() / (a.norm_sqr().powi(n as i32) * (a.chi() as f64).powi((n - 1) as i32)))
}

/// Projects a pair of ancilla axes of `state` onto the Choi vector of `v`: ⟨Choi(v)| on axes (i, j).
pub fn project_pair(state: &CTensor, i: usize, j: usize, v: &CTensor) -> Result<CTensor> {
    let chi = v.rows();
    let bra = v.conj().scale_real(1.0 / (chi as f64).sqrt());
    crate::linalg::contract(state, &bra, &[(i, 0), (j, 1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{choi_vectors, clock_basis, pauli_basis};
    use crate::linalg::{pauli_x, phase_aligned_distance};
    use crate::mps::{clock_tensor, tetrahedron_tensor, NamedPoint, SimplexWeights};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tet(w: [f64; 4]) -> MPSTensor {
        tetrahedron_tensor(&SimplexWeights::from_pauli(w).unwrap()).unwrap()
    }

    #[test]
    fn identity_pair_gives_identity() {
        let a = tet([0.4, 0.3, 0.2, 0.1]);
        let u = construct_correction_unitary(&a, &CTensor::eye(2), &CTensor::eye(2)).unwrap();
        assert!(u.distance(&CTensor::eye(4)) < 1e-12);
    }

    #[test]
    fn x_pair_sign_table() {
        let a = tet([0.4, 0.3, 0.2, 0.1]);
        let u = construct_correction_unitary(&a, &pauli_x(), &pauli_x()).unwrap();
        let want = CTensor::diag(&[ONE, ONE, -ONE, -ONE]);
        assert!(u.distance(&want) < 1e-12);
    }

    #[test]
    fn generic_tensor_not_correctable() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = MPSTensor::random(4, 2, &mut rng);
        assert!(matches!(
            construct_correction_unitary(&a, &pauli_x(), &pauli_x()),
            Err(Error::NotCorrectable { .. })
        ));
    }

    #[test]
    fn register_layout() {
        let a = tet([1.0, 0.0, 0.0, 0.0]);
        let reg = init_clusters(&a, 2).unwrap();
        assert!((reg.site_state.norm() - 1.0).abs() < 1e-14);
        assert!((reg.global_vector().unwrap().norm() - 1.0).abs() < 1e-14);
        let c = tet([0.25; 4]);
        let reg = init_clusters(&c, 2).unwrap();
        // Cluster site state: ancilla pair maximally entangled.
        let m = reg.site_state.reshape(&[2, 8]).unwrap();
        let s = crate::linalg::svd(&m).unwrap().s;
        assert!((s[0] * s[0] - 0.5).abs() < 1e-12 && (s[1] * s[1] - 0.5).abs() < 1e-12);
        assert!(init_clusters(&c, 1).is_err());
    }

    #[test]
    fn cluster_distribution_uniform() {
        let d = outcome_distribution(&tet([0.25; 4]), 3, &pauli_basis()).unwrap();
        assert_eq!(d.len(), 16);
        for r in &d {
            assert!((r.probability - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_matches_definition_and_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let w = SimplexWeights::random(2, &mut rng);
        let a = tetrahedron_tensor(&w).unwrap();
        let p = pauli_basis();
        let d = outcome_distribution(&a, 4, &p).unwrap();
        let total: f64 = d.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        for r in d.iter().step_by(7) {
            assert!((record_probability(&a, &p, r).unwrap() - r.probability).abs() < 1e-12);
        }
        let ghz = outcome_distribution(&tet([0.5, 0.0, 0.0, 0.5]), 3, &p).unwrap();
        assert!(ghz.iter().all(|r| r.probability > 0.0));
    }

    #[test]
    fn sampling_is_reproducible_and_positive() {
        let a = tet([0.4, 0.3, 0.2, 0.1]);
        let p = pauli_basis();
        let r1 = sample_outcomes(&a, 5, &p, 99).unwrap();
        let r2 = sample_outcomes(&a, 5, &p, 99).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.probability > 0.0);
        assert!((record_probability(&a, &p, &r1).unwrap() - r1.probability).abs() < 1e-12);
    }

    #[test]
    fn ideal_record_needs_no_correction() {
        let a = tet([0.4, 0.3, 0.2, 0.1]);
        let p = pauli_basis();
        let rec = OutcomeRecord {
            outcomes: vec![0; 4],
            probability: 1.0,
        };
        let plan = derive_corrections(&a, &p, &rec, SweepDirection::LeftToRight).unwrap();
        assert!(plan.is_identity(1e-14));
        let post = post_measurement_state(&a, &p, &rec).unwrap();
        let target = dense_state(&UniformMPS::new(a, 5, Boundary::Dangling).unwrap()).unwrap().vector;
        assert!(fidelity(&post, &target) > 1.0 - 1e-12);
    }

    #[test]
    fn single_x_outcome_plan() {
        let a = tet([0.4, 0.3, 0.2, 0.1]);
        let p = pauli_basis();
        let rec = OutcomeRecord {
            outcomes: vec![0, 1, 0],
            probability: 1.0,
        };
        let plan = derive_corrections(&a, &p, &rec, SweepDirection::LeftToRight).unwrap();
        let sign = CTensor::diag(&[ONE, ONE, -ONE, -ONE]);
        assert!(plan.site_unitaries[1].distance(&CTensor::eye(4)) < 1e-14);
        for s in 2..4 {
            assert!(plan.site_unitaries[s].distance(&sign) < 1e-12);
        }
        assert!(phase_aligned_distance(&plan.right_boundary, &pauli_x().dagger()) < 1e-14);
    }

    #[test]
    fn protocol_fidelity_both_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = pauli_basis();
        let a = tetrahedron_tensor(&SimplexWeights::random(2, &mut rng)).unwrap();
        let target = dense_state(&UniformMPS::new(a.clone(), 5, Boundary::Dangling).unwrap()).unwrap().vector;
        for t in 0..20 {
            let (_, f1) = run_trial(&a, 5, &p, &target, 5, t, SweepDirection::LeftToRight).unwrap();
            let (_, f2) = run_trial(&a, 5, &p, &target, 5, t, SweepDirection::RightToLeft).unwrap();
            assert!(f1 > 1.0 - 1e-10 && f2 > 1.0 - 1e-10);
        }
        let aklt = tetrahedron_tensor(&NamedPoint::Aklt.weights()).unwrap();
        let rep = run_protocol(&aklt, 5, &p, 20, 3).unwrap();
        assert!(rep.min_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn clock_chi3_protocol() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let a = clock_tensor(&SimplexWeights::random(3, &mut rng)).unwrap();
        let rep = run_protocol(&a, 4, &clock_basis(3).unwrap(), 20, 8).unwrap();
        assert!(rep.min_fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn periodic_analysis_conserves_probability() {
        let a = tet([0.4, 0.3, 0.2, 0.1]);
        let res = periodic_residual_distribution(&a, 3, &pauli_basis()).unwrap();
        assert!((res.total_probability - 1.0).abs() < 1e-10);
        assert!(res.unclassified < 1e-12);
        assert!(res.residual_class_probability[1..].iter().sum::<f64>() > 1e-3);
    }

    #[test]
    fn choi_projection_inserts_conjugate() {
        // ⟨Choi(V̄)| on the ancilla pair inserts V (up to 1/√χ).
        let a = tet([0.4, 0.3, 0.2, 0.1]);
        let p = pauli_basis();
        let pair = kron(
            &a.as_tensor().permute(&[1, 0, 2]).unwrap().reshape(&[16, 1]).unwrap(),
            &a.as_tensor().permute(&[1, 0, 2]).unwrap().reshape(&[16, 1]).unwrap(),
        )
        .unwrap()
        .into_shape(&[2, 4, 2, 2, 4, 2])
        .unwrap();
        let choi = choi_vectors(&p);
        for alpha in 0..4 {
            let v = &p.elements[alpha];
            let proj = project_pair(&pair, 2, 3, &choi.operator(alpha).conj()).unwrap();
            let rec = OutcomeRecord {
                outcomes: vec![alpha],
                probability: 1.0,
            };
            let want = post_measurement_state(&a, &p, &rec).unwrap();
            assert!(fidelity(&proj.reshape(&[want.len()]).unwrap(), &want) > 1.0 - 1e-12, "{v:?}");
        }
    }
}
