//! Invariance solution spaces of 𝔼, the search for product solutions inside them, and
//! preparability certificates assembled from those solutions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{clock_basis, pauli_basis, UnitaryErrorBasis};
use crate::error::{Error, Result};
use crate::linalg::{
    degenerate_blocks, eig_hermitian, expi_hermitian, fix_det_phase, kron, nullspace,
    phase_aligned_distance, polar_unitary, svd, CTensor, C64, I,
};
use crate::mps::{check_conditions, MPSTensor};
use crate::protocol::run_protocol;
use crate::seeds::trial_rng;

/// Acceptance tolerance on invariance residuals and on 1 − (top Schmidt weight).
pub const SOLUTION_TOL: f64 = 1e-8;
pub const DEFAULT_RESTARTS: usize = 64;
/// Relative eigenvalue gap below which eigenvalues of the vertical form are treated as equal.
const DEGENERACY_GAP: f64 = 1e-9;
/// Distance (after phase alignment) below which two candidate operators are the same.
const SAME_TOL: f64 = 1e-6;
const GRID: usize = 16;
const GOLDEN_STEPS: usize = 24;
const MAX_SWEEPS: usize = 12;
const POLISH_STEPS: usize = 2000;
const SOUNDNESS_SITES: usize = 4;
const SOUNDNESS_TRIALS: usize = 16;

/// Q[(l,r),(l',r')] = Σ_p A^p_{lr} conj(A^p_{l'r'}), the reshuffle of 𝔼 into a PSD matrix.
pub fn vertical_form(a: &MPSTensor) -> Result<CTensor> {
    if !a.is_square() {
        return Err(Error::Precondition(format!(
            "solution space needs equal bonds, got {}x{}",
            a.chi_left, a.chi_right
        )));
    }
    let m = a.physical_map();
    m.transpose().matmul(&m.conj())
}

/// Real-linear span of Hermitian generators whose exponentials commute with the vertical form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionSpace {
    pub chi: usize,
    pub ambient_dim: usize,
    pub vertical: CTensor,
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub eigenvectors: CTensor,
    /// Frobenius-orthonormal complex basis of the commutant algebra.
    pub algebra: Vec<CTensor>,
    pub generators: Vec<CTensor>,
    /// Unitary elements exp(iπ/2·h) for each generator h; they span the commutant.
    pub basis: Vec<CTensor>,
    diagonal: bool,
}

fn blocks_of(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    degenerate_blocks(values, DEGENERACY_GAP * scale)
}

fn outer(u: &CTensor, v: &CTensor) -> CTensor {
    let n = u.len();
    CTensor::from_fn(&[n, n], |ix| u.data()[ix[0]] * v.data()[ix[1]].conj())
}

fn unitary_basis(generators: &[CTensor]) -> Result<Vec<CTensor>> {
    generators
        .iter()
        .map(|h| expi_hermitian(&h.scale_real(std::f64::consts::FRAC_PI_2)))
        .collect()
}

pub fn solution_space(a: &MPSTensor) -> Result<SolutionSpace> {
    let q = vertical_form(a)?;
    let (values, vectors) = eig_hermitian(&q)?;
    let n = values.len();
    let cols: Vec<CTensor> = (0..n).map(|k| vectors.column(k)).collect();
    let blocks = blocks_of(&values);
    let mut algebra = Vec::new();
    let mut generators = Vec::new();
    for b in &blocks {
        for i in b.clone() {
            for j in b.clone() {
                algebra.push(outer(&cols[i], &cols[j]));
            }
        }
        for i in b.clone() {
            generators.push(outer(&cols[i], &cols[i]));
            for j in i + 1..b.end {
                let eij = outer(&cols[i], &cols[j]);
                let eji = eij.dagger();
                generators.push(eij.add(&eji)?);
                generators.push(eij.sub(&eji)?.scale(I));
            }
        }
    }
    Ok(SolutionSpace {
        chi: a.chi(),
        ambient_dim: n,
        vertical: q,
        multiplicities: blocks.iter().map(|b| b.len()).collect(),
        eigenvalues: values,
        eigenvectors: vectors,
        basis: unitary_basis(&generators)?,
        diagonal: blocks.iter().all(|b| b.len() == 1),
        algebra,
        generators,
    })
}

/// Superoperator X ↦ QX − XQ on row-major vectorized X.
fn commutator_superop(q: &CTensor) -> Result<CTensor> {
    let n = q.rows();
    let id = CTensor::eye(n);
    kron(q, &id)?.sub(&kron(&id, &q.transpose())?)
}

/// Solution space of the k-site blocked tensor intersected with the single-site space.
pub fn blocked_intersection(a: &MPSTensor, k: usize) -> Result<SolutionSpace> {
    if k == 0 {
        return Err(Error::Precondition("block size must be at least 1".into()));
    }
    let q1 = vertical_form(a)?;
    let qk = vertical_form(&a.blocked(k)?)?;
    let n = q1.rows();
    crate::linalg::check_cap((2 * n * n * n * n) as u128, "commutant system")?;
    let s1 = commutator_superop(&q1.scale_real(1.0 / q1.norm().max(f64::MIN_POSITIVE)))?;
    let sk = commutator_superop(&qk.scale_real(1.0 / qk.norm().max(f64::MIN_POSITIVE)))?;
    let rows = n * n;
    let mut stacked = s1.data().to_vec();
    stacked.extend_from_slice(sk.data());
    let system = CTensor::new(vec![2 * rows, rows], stacked)?;
    let algebra: Vec<CTensor> = nullspace(&system, 1e-7)?
        .into_iter()
        .map(|v| v.into_shape(&[n, n]))
        .collect::<Result<_>>()?;
    // Hermitian parts of a *-closed algebra span it over the reals.
    let mut generators: Vec<CTensor> = Vec::new();
    for m in &algebra {
        let md = m.dagger();
        for cand in [m.add(&md)?.scale_real(0.5), m.sub(&md)?.scale(C64::new(0.0, -0.5))] {
            let mut h = cand;
            for g in &generators {
                let c = g.inner(&h).re;
                h.add_scaled(g, C64::new(-c, 0.0))?;
            }
            let norm = h.norm();
            if norm > 1e-8 {
                generators.push(h.scale_real(1.0 / norm));
            }
        }
    }
    let (values, vectors) = eig_hermitian(&q1)?;
    Ok(SolutionSpace {
        chi: a.chi(),
        ambient_dim: n,
        vertical: q1,
        multiplicities: blocks_of(&values).iter().map(|b| b.len()).collect(),
        eigenvalues: values,
        eigenvectors: vectors,
        basis: unitary_basis(&generators)?,
        diagonal: false,
        algebra,
        generators,
    })
}

impl SolutionSpace {
    pub fn real_dimension(&self) -> usize {
        self.generators.len()
    }

    /// exp(i Σ_j t_j h_j).
    pub fn element(&self, t: &[f64]) -> Result<CTensor> {
        if t.len() != self.generators.len() {
            return Err(Error::Dimension(format!(
                "{} parameters for a {}-dimensional family",
                t.len(),
                self.generators.len()
            )));
        }
        if self.diagonal {
            let phases: Vec<C64> = t.iter().map(|&x| C64::from_polar(1.0, x)).collect();
            return self
                .eigenvectors
                .matmul(&CTensor::diag(&phases))?
                .matmul(&self.eigenvectors.dagger());
        }
        let n = self.ambient_dim;
        let mut h = CTensor::zeros(&[n, n]);
        for (g, &x) in self.generators.iter().zip(t) {
            h.add_scaled(g, C64::new(x, 0.0))?;
        }
        expi_hermitian(&h)
    }

    /// ‖𝕍 Q 𝕍† − Q‖.
    pub fn invariance_residual(&self, v: &CTensor) -> Result<f64> {
        Ok(v.matmul(&self.vertical)?.matmul(&v.dagger())?.distance(&self.vertical))
    }

    /// Orthogonal projection onto the commutant algebra.
    pub fn project(&self, x: &CTensor) -> Result<CTensor> {
        let mut out = CTensor::zeros(x.shape());
        for m in &self.algebra {
            out.add_scaled(m, m.inner(x))?;
        }
        Ok(out)
    }

    /// 𝕍 = vL ⊗ vRᵀ, the joined-leg operator of a factor pair.
    pub fn joined(vl: &CTensor, vr: &CTensor) -> Result<CTensor> {
        kron(vl, &vr.transpose())
    }
}

/// R[(l,l'),(r,r')] = 𝕍[(l,r),(l',r')].
fn reshuffle(v: &CTensor, chi: usize) -> Result<CTensor> {
    v.reshape(&[chi, chi, chi, chi])?
        .permute(&[0, 2, 1, 3])?
        .into_shape(&[chi * chi, chi * chi])
}

/// Top operator-Schmidt weight s₁²/Σs² across the left/right virtual split.
pub fn top_schmidt_weight(v: &CTensor, chi: usize) -> Result<f64> {
    let s = svd(&reshuffle(v, chi)?)?.s;
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(s[0] * s[0] / total)
}

/// Unitary factors (vL, vR) of the nearest product operator, det-phase fixed.
pub fn product_factors(v: &CTensor, chi: usize) -> Result<(CTensor, CTensor)> {
    let dec = svd(&reshuffle(v, chi)?)?;
    let n = chi * chi;
    let left = CTensor::from_fn(&[chi, chi], |ix| dec.u.data()[(ix[0] * chi + ix[1]) * n]);
    let right_t = CTensor::from_fn(&[chi, chi], |ix| dec.vh.data()[ix[0] * chi + ix[1]]);
    let vl = fix_det_phase(&polar_unitary(&left)?)?;
    let vr = fix_det_phase(&polar_unitary(&right_t.transpose())?)?;
    Ok((vl, vr))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionSource {
    ColumnReading,
    Library,
    Optimization,
    Closure,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductSolution {
    pub vl: CTensor,
    pub vr: CTensor,
    pub schmidt_weight: f64,
    pub invariance_residual: f64,
    pub source: SolutionSource,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RestartStats {
    pub restarts: usize,
    pub accepted: usize,
    pub best_weight: f64,
    pub fast_path: Option<SolutionSource>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductSearch {
    pub solutions: Vec<ProductSolution>,
    pub stats: RestartStats,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    pub fast_paths: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            tol: SOLUTION_TOL,
            seed: 0,
            fast_paths: true,
        }
    }
}

fn accept_pair(space: &SolutionSpace, vl: CTensor, vr: CTensor, tol: f64, source: SolutionSource) -> Result<Option<ProductSolution>> {
    let joined = SolutionSpace::joined(&vl, &vr)?;
    let res = space.invariance_residual(&joined)?;
    let scale = space.vertical.norm().max(1.0);
    if res >= tol * scale {
        return Ok(None);
    }
    Ok(Some(ProductSolution {
        vl,
        vr,
        schmidt_weight: 1.0,
        invariance_residual: res,
        source,
    }))
}

fn contains(found: &[ProductSolution], cand: &ProductSolution) -> Result<bool> {
    let j = SolutionSpace::joined(&cand.vl, &cand.vr)?;
    for f in found {
        if phase_aligned_distance(&SolutionSpace::joined(&f.vl, &f.vr)?, &j) < SAME_TOL {
            return Ok(true);
        }
    }
    Ok(false)
}

fn push_unique(found: &mut Vec<ProductSolution>, cand: ProductSolution) -> Result<()> {
    if !contains(found, &cand)? {
        found.push(cand);
    }
    Ok(())
}

/// Reads √χ·(eigenvector) as a matrix; accepted when every column gives a unitary solution.
fn column_reading(space: &SolutionSpace, tol: f64) -> Result<Vec<ProductSolution>> {
    let chi = space.chi;
    let mut out = Vec::new();
    for k in 0..space.ambient_dim {
        let w = space
            .eigenvectors
            .column(k)
            .into_shape(&[chi, chi])?
            .scale_real((chi as f64).sqrt());
        if w.unitarity_residual() >= tol {
            return Ok(Vec::new());
        }
        let w = fix_det_phase(&polar_unitary(&w)?)?;
        let wd = w.dagger();
        match accept_pair(space, w, wd, tol, SolutionSource::ColumnReading)? {
            Some(s) => push_unique(&mut out, s)?,
            None => return Ok(Vec::new()),
        }
    }
    Ok(out)
}

fn library_candidates(chi: usize) -> Result<Vec<CTensor>> {
    let mut c = clock_basis(chi)?.elements;
    if chi == 2 {
        c.extend(pauli_basis().elements);
    }
    Ok(c)
}

fn library(space: &SolutionSpace, tol: f64) -> Result<Vec<ProductSolution>> {
    let mut out = Vec::new();
    for v in library_candidates(space.chi)? {
        let v = fix_det_phase(&v)?;
        let vd = v.dagger();
        if let Some(s) = accept_pair(space, v, vd, tol, SolutionSource::Library)? {
            push_unique(&mut out, s)?;
        }
    }
    Ok(out)
}

fn weight_at(space: &SolutionSpace, t: &[f64]) -> f64 {
    space
        .element(t)
        .and_then(|v| top_schmidt_weight(&v, space.chi))
        .unwrap_or(0.0)
}

/// Coordinate ascent on the top Schmidt weight: grid scan then golden-section refinement.
fn coordinate_ascent(space: &SolutionSpace, t: &mut [f64]) -> f64 {
    let tau = std::f64::consts::TAU;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = weight_at(space, t);
    for _ in 0..MAX_SWEEPS {
        let before = best;
        for j in 0..t.len() {
            let origin = t[j];
            let mut arg = origin;
            for g in 1..GRID {
                t[j] = origin + tau * g as f64 / GRID as f64;
                let w = weight_at(space, t);
                if w > best {
                    best = w;
                    arg = t[j];
                }
            }
            let h = tau / GRID as f64;
            let (mut lo, mut hi) = (arg - h, arg + h);
            for _ in 0..GOLDEN_STEPS {
                let x1 = hi - phi * (hi - lo);
                let x2 = lo + phi * (hi - lo);
                t[j] = x1;
                let w1 = weight_at(space, t);
                t[j] = x2;
                let w2 = weight_at(space, t);
                if w1 > w2 {
                    hi = x2;
                } else {
                    lo = x1;
                }
            }
            t[j] = 0.5 * (lo + hi);
            let w = weight_at(space, t);
            if w > best {
                best = w;
            } else {
                t[j] = arg;
            }
        }
        if best - before < 1e-13 || best > 1.0 - 1e-14 {
            break;
        }
    }
    best
}

/// Alternates between the nearest product unitary and the nearest commutant unitary.
fn polish(space: &SolutionSpace, start: CTensor) -> Result<(CTensor, CTensor, f64)> {
    let chi = space.chi;
    let mut c = start;
    let mut gap = f64::INFINITY;
    for _ in 0..POLISH_STEPS {
        let (vl, vr) = product_factors(&c, chi)?;
        let p = SolutionSpace::joined(&vl, &vr)?;
        let next = polar_unitary(&space.project(&p)?)?;
        gap = phase_aligned_distance(&p, &next);
        c = next;
        if gap < 1e-14 {
            break;
        }
    }
    let (vl, vr) = product_factors(&c, chi)?;
    Ok((vl, vr, gap))
}

fn restart(space: &SolutionSpace, tol: f64, seed: u64, index: usize) -> Result<(f64, Option<ProductSolution>)> {
    let mut rng = trial_rng(seed, index as u64);
    let tau = std::f64::consts::TAU;
    let mut t: Vec<f64> = (0..space.real_dimension()).map(|_| rng.gen_range(0.0..tau)).collect();
    let best = coordinate_ascent(space, &mut t);
    if best < 0.9 {
        return Ok((best, None));
    }
    let (vl, vr, _) = polish(space, space.element(&t)?)?;
    let joined = SolutionSpace::joined(&vl, &vr)?;
    let weight = top_schmidt_weight(&space.polar_projection(&joined)?, space.chi)?;
    if weight < 1.0 - tol {
        return Ok((best.max(weight), None));
    }
    let sol = accept_pair(space, vl, vr, tol, SolutionSource::Optimization)?.map(|mut s| {
        s.schmidt_weight = weight;
        s
    });
    Ok((best.max(weight), sol))
}

impl SolutionSpace {
    fn polar_projection(&self, x: &CTensor) -> Result<CTensor> {
        polar_unitary(&self.project(x)?)
    }
}

/// Product (vL, vR) pairs inside the solution space, deduplicated up to phase.
pub fn find_product_solutions(space: &SolutionSpace, opts: &SearchOptions) -> Result<ProductSearch> {
    let mut found = Vec::new();
    let mut stats = RestartStats::default();
    if opts.fast_paths {
        for s in library(space, opts.tol)? {
            push_unique(&mut found, s)?;
            stats.fast_path.get_or_insert(SolutionSource::Library);
        }
        for s in column_reading(space, opts.tol)? {
            if !contains(&found, &s)? {
                stats.fast_path.get_or_insert(SolutionSource::ColumnReading);
                found.push(s);
            }
        }
    }
    let results: Vec<(f64, Option<ProductSolution>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| restart(space, opts.tol, opts.seed, k))
        .collect::<Result<_>>()?;
    stats.restarts = opts.restarts;
    for (w, s) in results {
        stats.best_weight = stats.best_weight.max(w);
        if let Some(s) = s {
            stats.accepted += 1;
            push_unique(&mut found, s)?;
        }
    }
    Ok(ProductSearch { solutions: found, stats })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Unknown,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementResidual {
    pub index: usize,
    pub invariance_residual: f64,
    pub push_residual: Option<f64>,
    pub unitarity_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PreparabilityCertificate {
    pub verdict: Verdict,
    pub chi: usize,
    pub d: usize,
    pub basis: Option<UnitaryErrorBasis>,
    pub residuals: Vec<ElementResidual>,
    pub stats: RestartStats,
    pub solutions_found: usize,
    pub protocol_min_fidelity: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[derive(Default)]
pub struct CertifyOptions {
    pub search: SearchOptions,
    /// Search the intersection with the k-site blocked space instead of the single-site space.
    pub block: Option<usize>,
}


/// Closure under products followed by greedy trace-orthogonal selection; identity first.
pub fn assemble_basis(chi: usize, candidates: &[CTensor]) -> Result<Option<Vec<CTensor>>> {
    let want = chi * chi;
    let cap = 4 * want * want;
    let mut set: Vec<CTensor> = vec![CTensor::eye(chi)];
    let known = |set: &[CTensor], m: &CTensor| set.iter().any(|s| phase_aligned_distance(s, m) < SAME_TOL);
    for c in candidates {
        let c = fix_det_phase(&polar_unitary(c)?)?;
        if !known(&set, &c) {
            set.push(c);
        }
    }
    let mut grew = true;
    while grew && set.len() < cap {
        grew = false;
        let snapshot = set.clone();
        'outer: for a in &snapshot {
            for b in &snapshot {
                let p = fix_det_phase(&a.matmul(b)?)?;
                if !known(&set, &p) {
                    set.push(p);
                    grew = true;
                    if set.len() >= cap {
                        break 'outer;
                    }
                }
            }
        }
    }
    let mut chosen: Vec<CTensor> = Vec::with_capacity(want);
    for v in set {
        if chosen.iter().all(|w| w.inner(&v).norm() < SAME_TOL) {
            chosen.push(v);
            if chosen.len() == want {
                return refine_basis(chosen).map(Some);
            }
        }
    }
    Ok(None)
}

/// Alternates polar steps on the column matrix (orthogonality) and on each element (unitarity).
fn refine_basis(mut elems: Vec<CTensor>) -> Result<Vec<CTensor>> {
    let chi = elems[0].rows();
    let n = chi * chi;
    let s = (chi as f64).sqrt();
    for _ in 0..100 {
        let cols = CTensor::from_fn(&[n, n], |ix| elems[ix[1]].data()[ix[0]] / s);
        let fixed = polar_unitary(&cols)?;
        let mut change = 0.0f64;
        for (k, e) in elems.iter_mut().enumerate() {
            let m = fixed.column(k).into_shape(&[chi, chi])?.scale_real(s);
            let u = polar_unitary(&m)?;
            change = change.max(u.distance(e));
            *e = u;
        }
        if change < 1e-15 {
            break;
        }
    }
    let id = elems[0].clone();
    let ph = id.trace() / id.trace().norm();
    elems[0] = CTensor::eye(chi);
    for e in elems.iter_mut().skip(1) {
        *e = fix_det_phase(&e.scale(ph.conj()))?;
    }
    Ok(elems)
}

fn unknown(a: &MPSTensor, stats: RestartStats, found: usize, reason: String) -> PreparabilityCertificate {
    PreparabilityCertificate {
        verdict: Verdict::Unknown,
        chi: a.chi_left,
        d: a.d,
        basis: None,
        residuals: Vec::new(),
        stats,
        solutions_found: found,
        protocol_min_fidelity: None,
        reason: Some(reason),
    }
}

fn try_certify(a: &MPSTensor, search: &ProductSearch) -> Result<PreparabilityCertificate> {
    let chi = a.chi();
    let stats = search.stats.clone();
    let found = search.solutions.len();
    let mut elements = Vec::new();
    for s in &search.solutions {
        if phase_aligned_distance(&s.vr, &s.vl.dagger()) < SAME_TOL {
            elements.push(s.vl.clone());
        }
    }
    let Some(elements) = assemble_basis(chi, &elements)? else {
        return Ok(unknown(a, stats, found, format!("fewer than {} trace-orthogonal product solutions", chi * chi)));
    };
    let basis = match UnitaryErrorBasis::from_elements(elements) {
        Ok(b) => b,
        Err(e) => return Ok(unknown(a, stats, found, format!("basis validation failed: {e}"))),
    };
    let report = check_conditions(a, &basis)?;
    let residuals: Vec<ElementResidual> = report
        .elements
        .iter()
        .map(|e| ElementResidual {
            index: e.index,
            invariance_residual: e.invariance_residual,
            push_residual: e.push_residual,
            unitarity_residual: e.unitarity_residual,
        })
        .collect();
    let mut cert = PreparabilityCertificate {
        verdict: Verdict::Unknown,
        chi,
        d: a.d,
        basis: Some(basis.clone()),
        residuals,
        stats,
        solutions_found: found,
        protocol_min_fidelity: None,
        reason: None,
    };
    if !report.all_pass(SOLUTION_TOL) {
        cert.basis = None;
        cert.reason = Some("push-through checks failed".into());
        return Ok(cert);
    }
    let run = run_protocol(a, SOUNDNESS_SITES, &basis, SOUNDNESS_TRIALS, 0)?;
    cert.protocol_min_fidelity = Some(run.min_fidelity);
    if run.min_fidelity < 1.0 - SOLUTION_TOL {
        cert.basis = None;
        cert.reason = Some(format!("protocol cross-check fidelity {}", run.min_fidelity));
        return Ok(cert);
    }
    cert.verdict = Verdict::Certified;
    Ok(cert)
}

/// Runs the fast paths first and the restart search only when they do not certify.
pub fn certify_preparable(a: &MPSTensor, opts: &CertifyOptions) -> Result<PreparabilityCertificate> {
    if !a.is_square() {
        return Ok(unknown(a, RestartStats::default(), 0, "bond dimensions differ".into()));
    }
    let space = match opts.block {
        Some(k) => blocked_intersection(a, k)?,
        None => solution_space(a)?,
    };
    let search = opts.search;
    if search.fast_paths {
        let fast = find_product_solutions(&space, &SearchOptions { restarts: 0, ..search })?;
        let cert = try_certify(a, &fast)?;
        if cert.verdict == Verdict::Certified {
            return Ok(cert);
        }
    }
    let full = find_product_solutions(&space, &search)?;
    try_certify(a, &full)
}

/// Independent re-check of a certified basis: invariance and push-through from scratch.
pub fn recheck_certificate(a: &MPSTensor, cert: &PreparabilityCertificate) -> Result<bool> {
    let Some(basis) = &cert.basis else {
        return Ok(cert.verdict == Verdict::Unknown);
    };
    if basis.validate().is_err() {
        return Ok(false);
    }
    let e = crate::mps::transfer_matrix(a)?;
    for v in &basis.elements {
        let vd = v.dagger();
        if e.invariance_residual(v, &vd)? >= SOLUTION_TOL {
            return Ok(false);
        }
        let u = match crate::protocol::construct_correction_unitary(a, v, &vd) {
            Ok(u) => u,
            Err(_) => return Ok(false),
        };
        if crate::protocol::push_through_residual(a, &u, v, &vd)? >= 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Matches a basis against a reference up to phases; returns the worst aligned residual
/// when the match is a bijection.
pub fn match_basis_up_to_phase(found: &UnitaryErrorBasis, reference: &UnitaryErrorBasis) -> Option<f64> {
    if found.len() != reference.len() {
        return None;
    }
    let mut used = vec![false; reference.len()];
    let mut worst = 0.0f64;
    for v in &found.elements {
        let (k, r) = reference.find_up_to_phase(v)?;
        if used[k] {
            return None;
        }
        used[k] = true;
        worst = worst.max(r);
    }
    Some(worst)
}
