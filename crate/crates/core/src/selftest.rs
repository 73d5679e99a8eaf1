//! Executable acceptance suite: one check per criterion with pinned tolerances.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bases::{clock_basis, pauli_basis};
use crate::diagnostics::{certify_preparable, match_basis_up_to_phase, recheck_certificate, CertifyOptions, Verdict};
use crate::error::{Error, Result};
use crate::incomplete::{incomplete_protocol, ising_bond};
use crate::linalg::{eig_hermitian, fidelity, polar_unitary, CTensor, C64, I, ONE, ZERO};
use crate::mpo::{mpo_apply, StoredProgram};
use crate::mps::{
    aklt_deformed_tensor, clock_tensor, correlation_lengths, dense_state, entanglement_data,
    measured_clock_spectrum, spectrum_to_weights, tetrahedron_tensor, transfer_matrix, weights_to_spectrum,
    Boundary, Cut, MPSTensor, NamedPoint, SimplexWeights, Trajectory, UniformMPS,
};
use crate::peps::{parity_statistics, simulate_peps_protocol, toric_oracle, toric_stabilizers, Lattice, PepsNetwork, Topology};
use crate::protocol::{construct_correction_unitary, push_through_residual, run_protocol};

pub const DETERMINISM_TOL: f64 = 1e-9;
pub const DETERMINISM_BUDGET_SECS: f64 = 120.0;
pub const AKLT_SPECTRUM_TOL: f64 = 1e-12;
pub const AKLT_ENTANGLEMENT_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-13;
pub const MEASURED_SPECTRUM_TOL: f64 = 1e-10;
pub const ENDPOINT_FIDELITY: f64 = 0.999;
pub const ORACLE_TOL: f64 = 1e-9;
pub const SMA_TOL: f64 = 1e-10;
pub const SMB_TOL: f64 = 1e-9;
pub const PEPS_STATE_TOL: f64 = 1e-9;
pub const PEPS_FIDELITY_TOL: f64 = 1e-8;
pub const STABILIZER_FLOOR: f64 = 0.99;
pub const FORBIDDEN_AMPLITUDE: f64 = 1e-12;
pub const MATCH_TOL: f64 = 1e-6;
pub const INCOMPLETE_TOL: f64 = 1e-9;
pub const MPO_TOL: f64 = 1e-9;
pub const SUITE_BUDGET_SECS: f64 = 600.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub total_seconds: f64,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    /// One `PASS`/`FAIL` line per criterion.
    pub fn lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                format!(
                    "{} criterion {:>2} ({}): {} [{:.1}s]",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.title,
                    c.detail,
                    c.seconds
                )
            })
            .collect()
    }
}

pub const TITLES: [&str; 12] = [
    "tetrahedron determinism",
    "AKLT analytics",
    "spectrum round trip",
    "trajectory endpoints and oracle",
    "correction unitary theorem",
    "arbitrary deformed AKLT",
    "toric PEPS",
    "GHZ parity law",
    "diagnostics",
    "incomplete measurement",
    "MPO application",
    "suite runtime",
];

type Check = (bool, String);

fn rng_for(seed: u64, id: u64) -> ChaCha8Rng {
    crate::seeds::trial_rng(seed, id)
}

fn fmt(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn criterion_1(seed: u64) -> Result<Check> {
    let start = Instant::now();
    let mut rng = rng_for(seed, 1);
    let basis = pauli_basis();
    let mut worst = f64::INFINITY;
    for k in 0..50 {
        let a = tetrahedron_tensor(&SimplexWeights::random(2, &mut rng))?;
        let rep = run_protocol(&a, 6, &basis, 100, rng.gen::<u64>() ^ k)?;
        worst = worst.min(rep.min_fidelity);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst >= 1.0 - DETERMINISM_TOL && secs < DETERMINISM_BUDGET_SECS,
        format!("min fidelity 1-{} over 50x100 trials in {secs:.1}s", fmt((1.0 - worst).max(0.0))),
    ))
}

pub fn criterion_2() -> Result<Check> {
    let a = tetrahedron_tensor(&NamedPoint::Aklt.weights())?;
    let mut ev = transfer_matrix(&a)?.eigenvalues()?;
    ev.sort_by(|x, y| x.re.total_cmp(&y.re));
    let want = [-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 1.0];
    let spec_err = ev.iter().zip(want).map(|(e, w)| (e - C64::new(w, 0.0)).norm()).fold(0.0, f64::max);
    let xi = correlation_lengths(&ev[..3])?.into_iter().fold(0.0, f64::max);
    let xi_err = (xi - 1.0 / 3f64.ln()).abs();
    let s = UniformMPS::new(a, 6, Boundary::Dangling)?;
    let e = entanglement_data(&s, Cut::Bond(3))?;
    let ent_err = e
        .iter()
        .enumerate()
        .map(|(k, x)| if k < 2 { (x - 0.5).abs() } else { x.abs() })
        .fold(0.0, f64::max);
    Ok((
        spec_err < AKLT_SPECTRUM_TOL && xi_err < AKLT_SPECTRUM_TOL && ent_err < AKLT_ENTANGLEMENT_TOL,
        format!("spectrum err {}, xi err {}, bond spectrum err {}", fmt(spec_err), fmt(xi_err), fmt(ent_err)),
    ))
}

pub fn criterion_3(seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 3);
    let (mut trip, mut measured) = (0.0f64, 0.0f64);
    let mut rejected = 0usize;
    let mut infeasible = 0usize;
    for chi in [2usize, 3, 4] {
        for _ in 0..100 {
            let w = SimplexWeights::random(chi, &mut rng);
            let mu = weights_to_spectrum(&w);
            let back = weights_to_spectrum(&spectrum_to_weights(&mu, chi)?);
            trip = trip.max(mu.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
            let got = measured_clock_spectrum(&clock_tensor(&spectrum_to_weights(&mu, chi)?)?)?;
            measured = measured.max(mu.iter().zip(&got).map(|(a, b)| (a - b.0).norm()).fold(0.0, f64::max));
        }
        for _ in 0..20 {
            // A grid with one negative entry still sums to one; its spectrum is infeasible.
            let mut bad = SimplexWeights::random(chi, &mut rng);
            let (a, b) = (rng.gen_range(0..chi), rng.gen_range(0..chi));
            bad.lambda[a][b] = -0.05 - bad.lambda[a][b];
            let total: f64 = bad.lambda.iter().flatten().sum();
            bad.lambda.iter_mut().flatten().for_each(|x| *x /= total);
            infeasible += 1;
            if let Err(e @ Error::InfeasibleSpectrum { .. }) = spectrum_to_weights(&weights_to_spectrum(&bad), chi) {
                if e.exit_code() == 2 {
                    rejected += 1;
                }
            }
        }
    }
    Ok((
        trip < ROUND_TRIP_TOL && measured < MEASURED_SPECTRUM_TOL && rejected == infeasible,
        format!(
            "round trip {}, measured {}, infeasible rejected {rejected}/{infeasible} with exit 2",
            fmt(trip),
            fmt(measured)
        ),
    ))
}

fn xi_max(w: &SimplexWeights) -> Result<f64> {
    let mu = weights_to_spectrum(w);
    Ok(correlation_lengths(&mu[1..])?.into_iter().fold(0.0, f64::max))
}

/// Product of a two-label cat over `n` sites of dimension `d`: (|a+b⟩^n + |a−b⟩^n)/norm.
pub fn two_label_cat(n: usize, d: usize, a: usize, b: usize) -> CTensor {
    let len = d.pow(n as u32);
    CTensor::from_fn(&[len], |ix| {
        let mut k = ix[0];
        let (mut plus, mut minus) = (1.0, 1.0);
        for _ in 0..n {
            let p = k % d;
            k /= d;
            if p == a {
            } else if p == b {
                minus = -minus;
            } else {
                plus = 0.0;
                minus = 0.0;
            }
        }
        C64::new(plus + minus, 0.0)
    })
    .normalized()
}

/// Spin-1 matrices in the Cartesian basis: (S^a)_{bc} = −i ε_{abc}.
fn cartesian_spin() -> [CTensor; 3] {
    let eps = |a: usize, b: usize, c: usize| -> f64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    [0, 1, 2].map(|a| CTensor::from_fn(&[3, 3], |ix| -I * eps(a, ix[0], ix[1])))
}

/// Ground state of the periodic AKLT Hamiltonian Σ S·S + (S·S)²/3 by exact diagonalization,
/// in the Cartesian spin-1 basis, with the spectral gap above it.
pub fn aklt_ground_state(n: usize) -> Result<(CTensor, f64)> {
    let s = cartesian_spin();
    let mut ss = CTensor::zeros(&[9, 9]);
    for m in &s {
        ss.add_scaled(&crate::linalg::kron(m, m)?, ONE)?;
    }
    let h2 = ss.add(&ss.matmul(&ss)?.scale_real(1.0 / 3.0))?;
    let dim = 3usize.pow(n as u32);
    let digit = |x: usize, k: usize| (x / 3usize.pow((n - 1 - k) as u32)) % 3;
    let mut h = CTensor::zeros(&[dim, dim]);
    for i in 0..n {
        let j = (i + 1) % n;
        for col in 0..dim {
            let (ci, cj) = (digit(col, i), digit(col, j));
            for pi in 0..3 {
                for pj in 0..3 {
                    let v = h2.at(pi * 3 + pj, ci * 3 + cj);
                    if v == ZERO {
                        continue;
                    }
                    let row = col + pi * 3usize.pow((n - 1 - i) as u32) + pj * 3usize.pow((n - 1 - j) as u32)
                        - ci * 3usize.pow((n - 1 - i) as u32)
                        - cj * 3usize.pow((n - 1 - j) as u32);
                    let cur = h.at(row, col);
                    h.set(&[row, col], cur + v);
                }
            }
        }
    }
    let (vals, vecs) = eig_hermitian(&h)?;
    Ok((vecs.column(0), vals[1] - vals[0]))
}

pub fn criterion_4() -> Result<Check> {
    let n = 6;
    let l1 = tetrahedron_tensor(&Trajectory::DeformedCluster.weights(3.0)?)?;
    let psi = dense_state(&UniformMPS::new(l1, n, Boundary::Periodic)?)?.vector;
    let f1 = psi.data()[0].norm_sqr();

    let l2 = tetrahedron_tensor(&Trajectory::ClusterToGhz.weights(10.0)?)?;
    let psi = dense_state(&UniformMPS::new(l2, n, Boundary::Periodic)?)?.vector;
    let f2 = fidelity(&psi, &two_label_cat(n, 4, 0, 2));

    let (ground, gap) = aklt_ground_state(4)?;
    let mut f3 = 1.0f64;
    for beta in [0.0f64, 0.5, 1.0] {
        let boost = [beta.exp(), beta.exp(), 1.0];
        let oracle = CTensor::from_fn(&[81], |ix| {
            let mut k = ix[0];
            let mut w = 1.0;
            for _ in 0..4 {
                w *= boost[k % 3];
                k /= 3;
            }
            ground.data()[ix[0]] * w
        });
        let t = tetrahedron_tensor(&Trajectory::DeformedAklt.weights(beta)?)?;
        let full = dense_state(&UniformMPS::new(t, 4, Boundary::Periodic)?)?.vector;
        // Keep the configurations without the empty 𝟙 label, relabeled X, Y, Z → x, y, z.
        let restricted = CTensor::from_fn(&[81], |ix| {
            let mut k = ix[0];
            let mut idx = 0;
            let mut place = 1;
            for _ in 0..4 {
                idx += (k % 3 + 1) * place;
                k /= 3;
                place *= 4;
            }
            full.data()[idx]
        });
        f3 = f3.min(fidelity(&oracle, &restricted));
    }

    let xis: Vec<f64> = (0..=12)
        .map(|k| Trajectory::DeformedAklt.weights(0.25 * k as f64).and_then(|w| xi_max(&w)))
        .collect::<Result<_>>()?;
    let increasing = xis.windows(2).all(|w| w[1] > w[0]);
    Ok((
        f1 >= ENDPOINT_FIDELITY && f2 >= ENDPOINT_FIDELITY && f3 >= 1.0 - ORACLE_TOL && increasing && gap > 1e-6,
        format!(
            "product fidelity {f1:.6}, cat fidelity {f2:.6}, AKLT oracle 1-{} (gap {gap:.3}), xi increasing: {increasing}",
            fmt((1.0 - f3).max(0.0))
        ),
    ))
}

fn random_unitary<R: Rng>(chi: usize, rng: &mut R) -> Result<CTensor> {
    polar_unitary(&CTensor::from_fn(&[chi, chi], |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

/// A tensor symmetric under conjugation by a finite-order unitary V: A^{(p,j)} = V^j B^p V^{−j}.
pub fn orbit_pair<R: Rng>(chi: usize, order: usize, rng: &mut R) -> Result<(MPSTensor, CTensor)> {
    let w = random_unitary(chi, rng)?;
    let phases: Vec<C64> = (0..chi)
        .map(|_| C64::from_polar(1.0, std::f64::consts::TAU * rng.gen_range(0..order) as f64 / order as f64))
        .collect();
    let v = w.matmul(&CTensor::diag(&phases))?.matmul(&w.dagger())?;
    let b = MPSTensor::random(2, chi, rng).matrices();
    let mut mats = Vec::with_capacity(2 * order);
    for p in &b {
        let mut m = p.clone();
        for _ in 0..order {
            mats.push(m.clone());
            m = v.matmul(&m)?.matmul(&v.dagger())?;
        }
    }
    Ok((MPSTensor::from_matrices(&mats)?, v))
}

pub fn criterion_5(seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 5);
    let (mut ures, mut pres) = (0.0f64, 0.0f64);
    let mut built = 0;
    for k in 0..100 {
        let (a, v) = orbit_pair(2 + k % 2, 2 + k % 3, &mut rng)?;
        let vd = v.dagger();
        let u = construct_correction_unitary(&a, &v, &vd)?;
        ures = ures.max(u.unitarity_residual());
        pres = pres.max(push_through_residual(&a, &u, &v, &vd)?);
        built += 1;
    }
    let mut raised = 0;
    for k in 0..100 {
        let chi = 2 + k % 2;
        let a = MPSTensor::random(4, chi, &mut rng);
        let v = random_unitary(chi, &mut rng)?;
        if matches!(construct_correction_unitary(&a, &v, &v.dagger()), Err(Error::NotCorrectable { .. })) {
            raised += 1;
        }
    }
    Ok((
        ures < SMA_TOL && pres < SMA_TOL && built == 100 && raised == 100,
        format!("unitarity {}, push-through {}, NotCorrectable {raised}/100", fmt(ures), fmt(pres)),
    ))
}

pub fn criterion_6(seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 6);
    let mut certified = 0;
    let mut protocol_ok = 0;
    let mut imag = 0.0f64;
    let mut min_fid = f64::INFINITY;
    for _ in 0..20 {
        let m = CTensor::from_fn(&[3, 3], |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let d = aklt_deformed_tensor(&m)?;
        imag = imag.max(d.frame_imaginary_residual);
        let cert = certify_preparable(&d.tensor, &CertifyOptions::default())?;
        if cert.verdict == Verdict::Certified {
            certified += 1;
            if let Some(b) = &cert.basis {
                let rep = run_protocol(&d.tensor, 5, b, 20, rng.gen())?;
                min_fid = min_fid.min(rep.min_fidelity);
                if rep.min_fidelity >= 1.0 - SMB_TOL {
                    protocol_ok += 1;
                }
            }
        } else if let Ok(rep) = run_protocol(&d.tensor, 5, &d.basis, 20, rng.gen()) {
            min_fid = min_fid.min(rep.min_fidelity);
        }
    }
    // Control: real deformations.
    let mut real_certified = 0;
    for _ in 0..5 {
        let m = CTensor::from_fn(&[3, 3], |_| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let d = aklt_deformed_tensor(&m)?;
        if certify_preparable(&d.tensor, &CertifyOptions::default())?.verdict == Verdict::Certified {
            real_certified += 1;
        }
    }
    let fid = if min_fid.is_finite() { format!("{min_fid:.6}") } else { "n/a".into() };
    Ok((
        certified == 20 && protocol_ok == 20,
        format!(
            "complex M certified {certified}/20, protocol {protocol_ok}/20 (min fidelity {fid}), max Im(M†M) ratio {imag:.3}; real-M control certified {real_certified}/5"
        ),
    ))
}

pub fn criterion_7(seed: u64) -> Result<Check> {
    let lattice = Lattice::new(2, 2, Topology::Torus)?;
    let (mut state_err, mut worst, mut worst_inc) = (0.0f64, f64::INFINITY, f64::INFINITY);
    for (k, beta) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let plain = PepsNetwork::toric(lattice, beta, false)?;
        state_err = state_err.max(1.0 - fidelity(&plain.dense_state()?, &toric_oracle(lattice, beta)));
        let net = PepsNetwork::toric(lattice, beta, true)?;
        worst = worst.min(simulate_peps_protocol(&net, 200, seed ^ k as u64, false)?.min_fidelity);
        worst_inc = worst_inc.min(simulate_peps_protocol(&net, 200, seed ^ (k as u64 + 8), true)?.min_fidelity);
    }
    let cold = PepsNetwork::toric(lattice, 3.0, false)?;
    let stab = toric_stabilizers(&cold.dense_state()?, lattice, cold.qubits)?;
    let floor = stab.star.iter().chain(&stab.plaquette).copied().fold(f64::INFINITY, f64::min);
    Ok((
        state_err < PEPS_STATE_TOL
            && worst >= 1.0 - PEPS_FIDELITY_TOL
            && worst_inc >= 1.0 - PEPS_FIDELITY_TOL
            && floor >= STABILIZER_FLOOR,
        format!(
            "state 1-F {}, protocol 1-{}, ZZ-only 1-{}, min stabilizer {floor:.4}",
            fmt(state_err),
            fmt((1.0 - worst).max(0.0)),
            fmt((1.0 - worst_inc).max(0.0))
        ),
    ))
}

pub fn criterion_8(seed: u64) -> Result<Check> {
    let net = PepsNetwork::ghz(Lattice::new(2, 2, Topology::Open)?, 0.5, true)?;
    let rep = parity_statistics(&net, 10_000, seed)?;
    let odd: usize = rep.violations.iter().sum();
    let amp = rep.max_forbidden_probability.map(f64::sqrt);
    Ok((
        odd == 0 && amp.is_some_and(|a| a < FORBIDDEN_AMPLITUDE),
        format!(
            "odd plaquettes in 10^4 samples: {odd}, max forbidden amplitude {}",
            amp.map_or("not enumerated".into(), fmt)
        ),
    ))
}

pub fn criterion_9(seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 9);
    let opts = CertifyOptions::default();
    let mut matched = 0;
    let mut worst_match = 0.0f64;
    for k in 0..20 {
        let (a, reference) = if k < 10 {
            (tetrahedron_tensor(&SimplexWeights::random(2, &mut rng))?, pauli_basis())
        } else {
            (clock_tensor(&SimplexWeights::random(3, &mut rng))?, clock_basis(3)?)
        };
        let cert = certify_preparable(&a, &opts)?;
        if cert.verdict != Verdict::Certified || !recheck_certificate(&a, &cert)? {
            continue;
        }
        if let Some(r) = cert.basis.as_ref().and_then(|b| match_basis_up_to_phase(b, &reference)) {
            worst_match = worst_match.max(r);
            if r < MATCH_TOL {
                matched += 1;
            }
        }
    }
    let mut unknown = 0;
    let mut unsound = 0;
    for _ in 0..20 {
        let a = MPSTensor::random(4, 2, &mut rng);
        let cert = certify_preparable(&a, &opts)?;
        match cert.verdict {
            Verdict::Unknown => unknown += 1,
            Verdict::Certified => {
                if !recheck_certificate(&a, &cert)? {
                    unsound += 1;
                }
            }
        }
    }
    Ok((
        matched == 20 && unknown == 20 && unsound == 0,
        format!(
            "families certified and matched {matched}/20 (worst {}), random Unknown {unknown}/20, unsound {unsound}",
            fmt(worst_match)
        ),
    ))
}

pub fn criterion_10(seed: u64) -> Result<Check> {
    let mut worst = f64::INFINITY;
    for (k, beta) in [0.2, 1.0].into_iter().enumerate() {
        let rep = incomplete_protocol(&ising_bond(beta)?, 8, 50, seed ^ (k as u64 + 100))?;
        worst = worst.min(rep.min_fidelity);
    }
    Ok((worst >= 1.0 - INCOMPLETE_TOL, format!("min fidelity 1-{}", fmt((1.0 - worst).max(0.0)))))
}

/// Dense contraction of the cluster MPO W[b,a]_{l r} = (−1)^{l·a + a·b} δ_{r b}/2.
pub fn cluster_mpo_dense(n: usize) -> CTensor {
    let dim = 1usize << n;
    CTensor::from_fn(&[dim, dim], |ix| {
        let (bits_b, bits_a) = (ix[0], ix[1]);
        let bit = |s: usize, k: usize| (s >> (n - 1 - k)) & 1;
        let mut sign = 0;
        let mut left = 0;
        for k in 0..n {
            let (a, b) = (bit(bits_a, k), bit(bits_b, k));
            sign += left * a + a * b;
            left = b;
        }
        let amp = 0.5f64.powi(n as i32);
        C64::new(if sign % 2 == 0 { amp } else { -amp }, 0.0)
    })
}

pub fn criterion_11(seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 11);
    let n = 6;
    let op_err = StoredProgram::cluster(n)?.operator()?.distance(&cluster_mpo_dense(n));
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let t = MPSTensor::random(2, 2, &mut rng);
        let rep = mpo_apply(&UniformMPS::new(t, n, Boundary::Periodic)?, 10, rng.gen())?;
        worst = worst.min(rep.min_fidelity);
    }
    Ok((
        worst >= 1.0 - MPO_TOL && op_err < 1e-12,
        format!("min fidelity 1-{}, stored vs contracted MPO {}", fmt((1.0 - worst).max(0.0)), fmt(op_err)),
    ))
}

fn timed(id: usize, f: impl FnOnce() -> Result<Check>) -> CriterionOutcome {
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(c) => c,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome {
        id,
        title: TITLES[id - 1].into(),
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs one criterion (1–11). Criterion 12 is the runtime of the whole suite.
pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionOutcome> {
    Ok(match id {
        1 => timed(1, || criterion_1(seed)),
        2 => timed(2, criterion_2),
        3 => timed(3, || criterion_3(seed)),
        4 => timed(4, criterion_4),
        5 => timed(5, || criterion_5(seed)),
        6 => timed(6, || criterion_6(seed)),
        7 => timed(7, || criterion_7(seed)),
        8 => timed(8, || criterion_8(seed)),
        9 => timed(9, || criterion_9(seed)),
        10 => timed(10, || criterion_10(seed)),
        11 => timed(11, || criterion_11(seed)),
        _ => return Err(Error::Domain(format!("no criterion {id}; expected 1..=11"))),
    })
}

/// Runs criteria 1–11 and appends the runtime check as criterion 12.
pub fn run_all(seed: u64, mut progress: impl FnMut(&CriterionOutcome)) -> SelftestReport {
    let start = Instant::now();
    let mut criteria = Vec::with_capacity(12);
    for id in 1..=11 {
        let c = run_criterion(id, seed).expect("id in range");
        progress(&c);
        criteria.push(c);
    }
    let total = start.elapsed().as_secs_f64();
    let last = CriterionOutcome {
        id: 12,
        title: TITLES[11].into(),
        pass: total < SUITE_BUDGET_SECS,
        detail: format!("criteria 1-11 took {total:.1}s (budget {SUITE_BUDGET_SECS:.0}s)"),
        seconds: total,
    };
    progress(&last);
    criteria.push(last);
    SelftestReport {
        seed,
        criteria,
        total_seconds: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn cat_helper_is_normalized_two_branch() {
        let c = two_label_cat(2, 4, 0, 3);
        assert!((c.norm() - 1.0).abs() < 1e-15);
        assert!((c.data()[0].re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(c.data()[1].norm() < 1e-15 && (c.data()[15].re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn aklt_ground_state_energy() {
        // The projector form gives E₀ = −2n/3 for Σ S·S + (S·S)²/3.
        let (g, gap) = aklt_ground_state(4).unwrap();
        assert!(gap > 0.1);
        assert!((g.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orbit_pairs_are_exactly_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (a, v) = orbit_pair(3, 3, &mut rng).unwrap();
        let r = crate::protocol::pair_invariance_residual(&a, &v, &v.dagger()).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn mpo_oracle_single_qubit_is_hadamard() {
        let h = cluster_mpo_dense(1).scale_real(2f64.sqrt());
        assert!(h.distance(&crate::linalg::hadamard()) < 1e-15);
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [2, 3, 4, 5, 8, 10, 11] {
            let c = run_criterion(id, 1).unwrap();
            assert!(c.pass, "criterion {id}: {}", c.detail);
        }
    }
}
