//! Two-dimensional examples: the deformed toric code on edge qubits and the deformed GHZ
//! state on vertex qubits, with Bell-measurement preparation on small lattices.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::pauli_basis;
use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Solution};
use crate::linalg::{contract, fidelity, hadamard, kron, pauli_x, pauli_z, phase_aligned_distance, CTensor, C64, ONE, ZERO};
use crate::network::{contract_network, Node};
use crate::seeds::trial_rng;

/// Largest number of physical qubits (escape ancilla included) handled densely.
pub const MAX_PEPS_QUBITS: usize = 16;
/// Largest number of records enumerated exhaustively.
pub const EXHAUSTIVE_BUDGET: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example {
    Toric,
    Ghz,
}

impl Example {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "toric" => Ok(Example::Toric),
            "ghz" => Ok(Example::Ghz),
            other => Err(Error::Parse(format!("unknown example '{other}' (expected toric or ghz)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Torus,
    Open,
}

impl Topology {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "torus" => Ok(Topology::Torus),
            "open" => Ok(Topology::Open),
            other => Err(Error::Parse(format!("unknown topology '{other}' (expected torus or open)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub lx: usize,
    pub ly: usize,
    pub topology: Topology,
}

impl Lattice {
    pub fn new(lx: usize, ly: usize, topology: Topology) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(Error::Domain(format!("lattice extents must be positive, got {lx}x{ly}")));
        }
        Ok(Self { lx, ly, topology })
    }

    pub fn vertices(&self) -> usize {
        self.lx * self.ly
    }

    pub fn vertex(&self, x: usize, y: usize) -> usize {
        y * self.lx + x
    }

    fn neighbour(&self, x: usize, y: usize, dir: usize) -> Option<(usize, usize)> {
        let wrap = self.topology == Topology::Torus;
        match dir {
            0 if y + 1 < self.ly => Some((x, y + 1)),
            0 if wrap => Some((x, 0)),
            1 if x + 1 < self.lx => Some((x + 1, y)),
            1 if wrap => Some((0, y)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    Physical(usize),
    Bond(usize),
}

/// A pair of ancilla legs; insertions act between `ends[0]` and `ends[1]` as Σ T0_i V_ij T1_j.
#[derive(Clone, Debug)]
pub struct Bond {
    pub ends: [(usize, usize); 2],
    /// Vertices whose junction the bond touches.
    pub vertices: Vec<usize>,
    /// Edge qubit whose junction the bond touches (toric only).
    pub edge: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhysPauli {
    X,
    Z,
}

/// One column of the mod-2 correction system: the insertion bits it flips and, when it is
/// not a free identity, the physical Pauli that realizes it.
#[derive(Clone, Debug)]
pub struct Move {
    pub flips: Vec<usize>,
    pub physical: Option<(usize, PhysPauli)>,
}

#[derive(Clone, Debug)]
pub struct PepsNetwork {
    pub example: Example,
    pub lattice: Lattice,
    pub beta: f64,
    pub tensors: Vec<CTensor>,
    pub legs: Vec<Vec<Leg>>,
    pub bonds: Vec<Bond>,
    pub qubits: usize,
    pub escape: Option<usize>,
    pub moves: Vec<Move>,
    /// Legs of each vertex (bond indices) in tensor order.
    pub vertex_bonds: Vec<Vec<usize>>,
}

/// Pauli bits (x, z) of basis element α in the order (𝟙, X, Y, Z).
pub fn pauli_bits(alpha: usize) -> (bool, bool) {
    (alpha == 1 || alpha == 2, alpha == 2 || alpha == 3)
}

fn delta(rank: usize) -> CTensor {
    CTensor::from_fn(&vec![2; rank], |ix| if ix.iter().all(|&i| i == ix[0]) { ONE } else { ZERO })
}

/// Vertex junction of the toric network: Σ_s c_s (H|s⟩)^{⊗k} with c = (e^α, e^{−α}),
/// tanh α = e^{−2β}.
pub fn toric_vertex_tensor(beta: f64, legs: usize) -> Result<CTensor> {
    let alpha = toric_alpha(beta)?;
    let h = hadamard();
    let c = [alpha.exp(), (-alpha).exp()];
    Ok(CTensor::from_fn(&vec![2; legs], |ix| {
        let mut acc = ZERO;
        for (s, cs) in c.iter().enumerate() {
            acc += ix.iter().fold(C64::new(*cs, 0.0), |p, &l| p * h.at(l, s));
        }
        acc
    }))
}

pub fn toric_alpha(beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::Domain(format!("beta must be finite and positive, got {beta}")));
    }
    Ok((-2.0 * beta).exp().atanh())
}

/// Edge junction δ(z, m, m'), axes (physical, first bond, second bond).
pub fn toric_edge_tensor() -> CTensor {
    delta(3)
}

/// Vertex tensor of the GHZ network: δ over the virtual legs and a pre-physical leg,
/// followed by e^{βX}; axes (virtual…, physical, extra…).
pub fn ghz_vertex_tensor(beta: f64, virtual_legs: usize, extra_legs: usize) -> Result<CTensor> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Domain(format!("beta must be finite and non-negative, got {beta}")));
    }
    let (c, s) = (beta.cosh(), beta.sinh());
    let rank = virtual_legs + 1 + extra_legs;
    Ok(CTensor::from_fn(&vec![2; rank], |ix| {
        let mut acc = ZERO;
        for v in 0..2 {
            let copies = ix[..virtual_legs].iter().chain(&ix[virtual_legs + 1..]).all(|&i| i == v);
            if copies {
                acc += C64::new(if ix[virtual_legs] == v { c } else { s }, 0.0);
            }
        }
        acc
    }))
}

impl PepsNetwork {
    pub fn toric(lattice: Lattice, beta: f64, escape: bool) -> Result<Self> {
        if lattice.topology != Topology::Torus {
            return Err(Error::Domain("the toric example is defined on a torus".into()));
        }
        let (lx, ly) = (lattice.lx, lattice.ly);
        let nv = lattice.vertices();
        let ne = 2 * nv;
        let qubits = ne + usize::from(escape);
        check_qubits(qubits)?;
        let h_edge = |x: usize, y: usize| y * lx + x;
        let v_edge = |x: usize, y: usize| nv + y * lx + x;
        // Edge e joins its lower vertex (bond 2e) and its upper vertex (bond 2e+1).
        let edge_ends = |e: usize| -> (usize, usize) {
            if e < nv {
                let (x, y) = (e % lx, e / lx);
                (lattice.vertex(x, y), lattice.vertex((x + 1) % lx, y))
            } else {
                let (x, y) = ((e - nv) % lx, (e - nv) / lx);
                (lattice.vertex(x, y), lattice.vertex(x, (y + 1) % ly))
            }
        };
        let mut tensors = Vec::new();
        let mut legs = Vec::new();
        let mut vertex_bonds = vec![Vec::new(); nv];
        for y in 0..ly {
            for x in 0..lx {
                let v = lattice.vertex(x, y);
                let vb = vec![
                    2 * v_edge(x, y),
                    2 * h_edge(x, y),
                    2 * v_edge(x, (y + ly - 1) % ly) + 1,
                    2 * h_edge((x + lx - 1) % lx, y) + 1,
                ];
                let mut l: Vec<Leg> = vb.iter().map(|&b| Leg::Bond(b)).collect();
                if escape && v == 0 {
                    l.push(Leg::Physical(ne));
                }
                tensors.push(toric_vertex_tensor(beta, l.len())?);
                legs.push(l);
                vertex_bonds[v] = vb;
            }
        }
        for e in 0..ne {
            tensors.push(toric_edge_tensor());
            legs.push(vec![Leg::Physical(e), Leg::Bond(2 * e), Leg::Bond(2 * e + 1)]);
        }
        let mut bonds = Vec::with_capacity(2 * ne);
        for e in 0..ne {
            let (va, vb) = edge_ends(e);
            for (side, v) in [(0usize, va), (1, vb)] {
                let b = 2 * e + side;
                let axis = vertex_bonds[v].iter().position(|&k| k == b).expect("bond on vertex");
                bonds.push(Bond {
                    ends: [(v, axis), (nv + e, 1 + side)],
                    vertices: vec![v],
                    edge: Some(e),
                });
            }
        }
        let mut net = Self {
            example: Example::Toric,
            lattice,
            beta,
            tensors,
            legs,
            bonds,
            qubits,
            escape: escape.then_some(ne),
            moves: Vec::new(),
            vertex_bonds,
        };
        net.moves = net.toric_moves();
        Ok(net)
    }

    pub fn ghz(lattice: Lattice, beta: f64, escape: bool) -> Result<Self> {
        let nv = lattice.vertices();
        let qubits = nv + usize::from(escape);
        check_qubits(qubits)?;
        let mut bonds = Vec::new();
        let mut vertex_legs: Vec<[Option<usize>; 4]> = vec![[None; 4]; nv];
        for y in 0..lattice.ly {
            for x in 0..lattice.lx {
                let v = lattice.vertex(x, y);
                // Directions: 0 up, 1 right, 2 down, 3 left.
                for dir in [0usize, 1] {
                    if let Some((nx, ny)) = lattice.neighbour(x, y, dir) {
                        let w = lattice.vertex(nx, ny);
                        if w == v {
                            continue;
                        }
                        vertex_legs[v][dir] = Some(bonds.len());
                        vertex_legs[w][dir + 2] = Some(bonds.len());
                        bonds.push(Bond {
                            ends: [(v, dir), (w, dir + 2)],
                            vertices: vec![v, w],
                            edge: None,
                        });
                    }
                }
            }
        }
        let mut tensors = Vec::new();
        let mut legs = Vec::new();
        let mut vertex_bonds = Vec::new();
        for (v, vl) in vertex_legs.iter().enumerate() {
            let present: Vec<usize> = vl.iter().flatten().copied().collect();
            let mut l: Vec<Leg> = present.iter().map(|&b| Leg::Bond(b)).collect();
            l.push(Leg::Physical(v));
            let extra = usize::from(escape && v == 0);
            if extra == 1 {
                l.push(Leg::Physical(nv));
            }
            tensors.push(ghz_vertex_tensor(beta, present.len(), extra)?);
            legs.push(l);
            vertex_bonds.push(present);
        }
        for b in bonds.iter_mut() {
            for end in b.ends.iter_mut() {
                let (v, dir) = *end;
                let bond_id = vertex_legs[v][dir].expect("leg present");
                end.1 = vertex_bonds[v].iter().position(|&k| k == bond_id).expect("leg present");
            }
        }
        let mut net = Self {
            example: Example::Ghz,
            lattice,
            beta,
            tensors,
            legs,
            bonds,
            qubits,
            escape: escape.then_some(nv),
            moves: Vec::new(),
            vertex_bonds,
        };
        net.moves = net.ghz_moves();
        Ok(net)
    }

    pub fn build(example: Example, lattice: Lattice, beta: f64, escape: bool) -> Result<Self> {
        match example {
            Example::Toric => Self::toric(lattice, beta, escape),
            Example::Ghz => Self::ghz(lattice, beta, escape),
        }
    }

    /// Row of the insertion-bit vector: bond b owns rows 2b (x) and 2b+1 (z); the escape leg
    /// owns the two rows after all bonds.
    pub fn bit_rows(&self) -> usize {
        2 * self.bonds.len() + 2
    }

    fn escape_slot(&self) -> usize {
        self.bonds.len()
    }

    /// Leg slots (bond indices, escape slot) of a vertex.
    fn vertex_slots(&self, v: usize) -> Vec<usize> {
        let mut s = self.vertex_bonds[v].clone();
        if self.escape.is_some() && v == 0 {
            s.push(self.escape_slot());
        }
        s
    }

    fn toric_moves(&self) -> Vec<Move> {
        let mut moves = Vec::new();
        let ne = 2 * self.lattice.vertices();
        for e in 0..ne {
            let (b0, b1) = (2 * e, 2 * e + 1);
            moves.push(Move {
                flips: vec![2 * b0 + 1, 2 * b1 + 1],
                physical: None,
            });
            moves.push(Move {
                flips: vec![2 * b0 + 1],
                physical: Some((e, PhysPauli::Z)),
            });
            moves.push(Move {
                flips: vec![2 * b0, 2 * b1],
                physical: Some((e, PhysPauli::X)),
            });
        }
        for v in 0..self.lattice.vertices() {
            let slots = self.vertex_slots(v);
            for &s in &slots[1..] {
                moves.push(Move {
                    flips: vec![2 * slots[0], 2 * s],
                    physical: None,
                });
            }
        }
        if let Some(q) = self.escape {
            moves.push(Move {
                flips: vec![2 * self.escape_slot()],
                physical: Some((q, PhysPauli::X)),
            });
        }
        moves
    }

    fn ghz_moves(&self) -> Vec<Move> {
        let mut moves = Vec::new();
        for v in 0..self.lattice.vertices() {
            let slots = self.vertex_slots(v);
            for &s in slots.iter().skip(1) {
                moves.push(Move {
                    flips: vec![2 * slots[0] + 1, 2 * s + 1],
                    physical: None,
                });
            }
            moves.push(Move {
                flips: slots.iter().map(|&s| 2 * s).collect(),
                physical: Some((v, PhysPauli::X)),
            });
        }
        if let Some(q) = self.escape {
            let e = self.escape_slot();
            moves.push(Move {
                flips: vec![2 * e + 1],
                physical: Some((q, PhysPauli::Z)),
            });
            moves.push(Move {
                flips: vec![2 * e],
                physical: Some((q, PhysPauli::X)),
            });
        }
        moves
    }

    fn label_phys(&self, q: usize) -> usize {
        self.bonds.len() + q
    }

    fn ket_nodes(&self, insert: &[Option<CTensor>]) -> Result<Vec<Node>> {
        let mut tensors = self.tensors.clone();
        for (b, op) in insert.iter().enumerate() {
            if let Some(v) = op {
                let (node, axis) = self.bonds[b].ends[0];
                tensors[node] = tensors[node].apply_on_axis(axis, &v.transpose())?;
            }
        }
        tensors
            .into_iter()
            .zip(&self.legs)
            .map(|(t, l)| {
                let labels = l
                    .iter()
                    .map(|leg| match *leg {
                        Leg::Bond(b) => b,
                        Leg::Physical(q) => self.label_phys(q),
                    })
                    .collect();
                Node::new(t, labels)
            })
            .collect()
    }

    /// Dense physical state with the given operator inserted on each bond (unnormalized).
    pub fn dense_state_with(&self, insert: &[Option<CTensor>]) -> Result<CTensor> {
        if insert.len() != self.bonds.len() {
            return Err(Error::Dimension(format!(
                "{} insertions for {} bonds",
                insert.len(),
                self.bonds.len()
            )));
        }
        let open: Vec<usize> = (0..self.qubits).map(|q| self.label_phys(q)).collect();
        let t = contract_network(self.ket_nodes(insert)?, &open)?;
        let len = t.len();
        t.into_shape(&[len])
    }

    pub fn dense_state(&self) -> Result<CTensor> {
        self.dense_state_with(&vec![None; self.bonds.len()])
    }

    /// Post-measurement state for a record of Pauli labels (𝟙, X, Y, Z) per bond.
    pub fn record_state(&self, record: &[usize]) -> Result<CTensor> {
        let basis = pauli_basis();
        let insert: Vec<Option<CTensor>> = record
            .iter()
            .map(|&a| (a != 0).then(|| basis.elements[a].clone()))
            .collect();
        self.dense_state_with(&insert)
    }

    /// Insertion bits of a record (escape rows zero).
    pub fn record_bits(&self, record: &[usize]) -> Vec<bool> {
        let mut bits = vec![false; self.bit_rows()];
        for (b, &a) in record.iter().enumerate() {
            let (x, z) = pauli_bits(a);
            bits[2 * b] = x;
            bits[2 * b + 1] = z;
        }
        bits
    }

    /// Physical Paulis that undo a record, or NotCorrectable carrying the violated constraint.
    pub fn solve_corrections(&self, record: &[usize]) -> Result<Vec<(usize, PhysPauli)>> {
        let columns: Vec<Vec<usize>> = self.moves.iter().map(|m| m.flips.clone()).collect();
        let bits = self.record_bits(record);
        match gf2::solve(self.bit_rows(), &columns, &bits) {
            Gf2Solution::Solved(c) => Ok(self
                .moves
                .iter()
                .zip(c)
                .filter_map(|(m, on)| if on { m.physical } else { None })
                .collect()),
            Gf2Solution::Infeasible { certificate } => {
                let rows: Vec<String> = certificate
                    .iter()
                    .enumerate()
                    .filter(|(_, &on)| on)
                    .map(|(r, _)| self.row_name(r))
                    .collect();
                Err(Error::not_correctable(
                    Some(format!("parity over {}", rows.join(", "))),
                    1.0,
                    "insertion pattern has odd parity on a constraint no move can change",
                ))
            }
        }
    }

    fn row_name(&self, r: usize) -> String {
        let slot = r / 2;
        let kind = if r.is_multiple_of(2) { 'x' } else { 'z' };
        if slot == self.bonds.len() {
            format!("{kind}(escape)")
        } else {
            format!("{kind}(bond {slot})")
        }
    }

    /// Constraints an insertion pattern must satisfy to be removable without the escape leg:
    /// GHZ plaquettes, or the total X parity for the toric network.
    pub fn parity_constraints(&self) -> Vec<(String, Vec<usize>)> {
        match self.example {
            Example::Toric => vec![("total X parity".into(), (0..self.bonds.len()).collect())],
            Example::Ghz => {
                let l = self.lattice;
                let find = |v: usize, w: usize| {
                    self.bonds
                        .iter()
                        .position(|b| b.vertices == vec![v, w])
                };
                let mut out = Vec::new();
                for y in 0..l.ly {
                    for x in 0..l.lx {
                        let (Some((x1, _)), Some((_, y1))) = (l.neighbour(x, y, 1), l.neighbour(x, y, 0)) else {
                            continue;
                        };
                        let corners = [l.vertex(x, y), l.vertex(x1, y), l.vertex(x, y1), l.vertex(x1, y1)];
                        let distinct: std::collections::HashSet<_> = corners.iter().collect();
                        let sides = [
                            find(corners[0], corners[1]),
                            find(corners[2], corners[3]),
                            find(corners[0], corners[2]),
                            find(corners[1], corners[3]),
                        ];
                        if distinct.len() == 4 && sides.iter().all(Option::is_some) {
                            out.push((format!("plaquette ({x}, {y})"), sides.iter().flatten().copied().collect()));
                        }
                    }
                }
                out
            }
        }
    }

    pub fn violated_constraints(&self, record: &[usize]) -> Vec<usize> {
        self.parity_constraints()
            .iter()
            .enumerate()
            .filter(|(_, (_, bonds))| bonds.iter().filter(|&&b| pauli_bits(record[b]).0).count() % 2 == 1)
            .map(|(k, _)| k)
            .collect()
    }
}

fn check_qubits(q: usize) -> Result<()> {
    if q > MAX_PEPS_QUBITS {
        return Err(Error::Resource {
            what: "physical qubits of a dense lattice".into(),
            needed: q as u128,
            cap: MAX_PEPS_QUBITS as u128,
        });
    }
    Ok(())
}

/// Applies a single-qubit operator to qubit `q` of an n-qubit vector (qubit 0 most significant).
pub fn apply_single(state: &CTensor, n: usize, q: usize, op: &CTensor) -> Result<CTensor> {
    let t = state.reshape(&vec![2; n])?.apply_on_axis(q, op)?;
    t.into_shape(&[1 << n])
}

pub fn apply_corrections(state: &CTensor, n: usize, ops: &[(usize, PhysPauli)]) -> Result<CTensor> {
    let mut s = state.clone();
    for &(q, p) in ops {
        let m = match p {
            PhysPauli::X => pauli_x(),
            PhysPauli::Z => pauli_z(),
        };
        s = apply_single(&s, n, q, &m)?;
    }
    Ok(s)
}

/// ⟨ψ|X^{xs} Z^{zs}|ψ⟩ / ⟨ψ|ψ⟩ for Pauli supports on distinct or overlapping qubits.
pub fn pauli_expectation(state: &CTensor, n: usize, xs: &[usize], zs: &[usize]) -> Result<C64> {
    let mut s = state.clone();
    for &q in zs {
        s = apply_single(&s, n, q, &pauli_z())?;
    }
    for &q in xs {
        s = apply_single(&s, n, q, &pauli_x())?;
    }
    Ok(state.inner(&s) / state.norm_sqr())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizerReport {
    pub star: Vec<f64>,
    pub plaquette: Vec<f64>,
}

/// ⟨A_v⟩ and ⟨B_p⟩ of a toric edge-qubit state (extra qubits past the edges are ignored).
pub fn toric_stabilizers(state: &CTensor, lattice: Lattice, n: usize) -> Result<StabilizerReport> {
    let (lx, ly) = (lattice.lx, lattice.ly);
    let nv = lattice.vertices();
    let h = |x: usize, y: usize| (y % ly) * lx + (x % lx);
    let v = |x: usize, y: usize| nv + (y % ly) * lx + (x % lx);
    let mut star = Vec::new();
    let mut plaquette = Vec::new();
    for y in 0..ly {
        for x in 0..lx {
            let a = [h(x, y), h(x + lx - 1, y), v(x, y), v(x, y + ly - 1)];
            star.push(pauli_expectation(state, n, &[], &a)?.re);
            let p = [h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)];
            plaquette.push(pauli_expectation(state, n, &p, &[])?.re);
        }
    }
    Ok(StabilizerReport { star, plaquette })
}

/// e^{βΣ_v A_v}|+⟩^{⊗N} on the edges of a torus, unnormalized.
pub fn toric_oracle(lattice: Lattice, beta: f64) -> CTensor {
    let (lx, ly) = (lattice.lx, lattice.ly);
    let nv = lattice.vertices();
    let n = 2 * nv;
    CTensor::from_fn(&[1 << n], |ix| {
        let bit = |q: usize| (ix[0] >> (n - 1 - q)) & 1;
        let mut e = 0.0;
        for y in 0..ly {
            for x in 0..lx {
                let edges = [
                    y * lx + x,
                    y * lx + (x + lx - 1) % lx,
                    nv + y * lx + x,
                    nv + ((y + ly - 1) % ly) * lx + x,
                ];
                let parity: usize = edges.iter().map(|&q| bit(q)).sum();
                e += if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
            }
        }
        C64::new((beta * e).exp(), 0.0)
    })
}

/// e^{βΣ_v X_v}(|0…0⟩ + |1…1⟩), unnormalized.
pub fn ghz_oracle(n: usize, beta: f64) -> CTensor {
    let (c, s) = (beta.cosh(), beta.sinh());
    CTensor::from_fn(&[1 << n], |ix| {
        let ones = ix[0].count_ones() as i32;
        let zeros = n as i32 - ones;
        C64::new(c.powi(zeros) * s.powi(ones) + s.powi(zeros) * c.powi(ones), 0.0)
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PushRuleReport {
    pub example: Example,
    pub rules: Vec<(String, f64)>,
}

impl PushRuleReport {
    pub fn max_residual(&self) -> f64 {
        self.rules.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

fn with_ops(t: &CTensor, ops: &[(usize, &CTensor)]) -> Result<CTensor> {
    let mut out = t.clone();
    for (axis, m) in ops {
        out = out.apply_on_axis(*axis, m)?;
    }
    Ok(out)
}

/// Checks the local push-through identities of an example as tensor equations.
pub fn verify_push_rules(example: Example, beta: f64) -> Result<PushRuleReport> {
    let (x, z) = (pauli_x(), pauli_z());
    let mut rules = Vec::new();
    match example {
        Example::Toric => {
            let e = toric_edge_tensor();
            for leg in [1usize, 2] {
                let lhs = with_ops(&e, &[(leg, &z)])?;
                rules.push((format!("Z on edge leg {leg} exits as physical Z"), lhs.distance(&with_ops(&e, &[(0, &z)])?)));
                let other = 3 - leg;
                let rhs = with_ops(&e, &[(other, &x), (0, &x)])?;
                rules.push((format!("X on edge leg {leg} passes to leg {other} with physical X"), with_ops(&e, &[(leg, &x)])?.distance(&rhs)));
            }
            let v = toric_vertex_tensor(beta, 4)?;
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        let r = with_ops(&v, &[(i, &x)])?.distance(&with_ops(&v, &[(j, &x)])?);
                        rules.push((format!("X turns at vertex from leg {i} to leg {j}"), r));
                    }
                }
            }
        }
        Example::Ghz => {
            let v = ghz_vertex_tensor(beta, 4, 0)?;
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        let r = with_ops(&v, &[(i, &z)])?.distance(&with_ops(&v, &[(j, &z)])?);
                        rules.push((format!("Z turns at vertex from leg {i} to leg {j}"), r));
                    }
                }
                let spawn: Vec<(usize, &CTensor)> = (0..4).filter(|&k| k != i).map(|k| (k, &x)).chain([(4usize, &x)]).collect();
                let r = with_ops(&v, &[(i, &x)])?.distance(&with_ops(&v, &spawn)?);
                rules.push((format!("X on leg {i} spawns X on the other legs and the physical leg"), r));
            }
        }
    }
    Ok(PushRuleReport { example, rules })
}

/// Exact sequential sampler over bond outcomes using the doubled network.
pub struct RecordSampler<'a> {
    net: &'a PepsNetwork,
    doubled: Vec<CTensor>,
    /// Position of each bond end among its node's doubled axes.
    end_axis: Vec<[usize; 2]>,
}

impl<'a> RecordSampler<'a> {
    pub fn new(net: &'a PepsNetwork) -> Result<Self> {
        let mut doubled = Vec::with_capacity(net.tensors.len());
        for (t, legs) in net.tensors.iter().zip(&net.legs) {
            let phys: Vec<usize> = (0..legs.len()).filter(|&k| matches!(legs[k], Leg::Physical(_))).collect();
            let virt = legs.len() - phys.len();
            let pairs: Vec<(usize, usize)> = phys.iter().map(|&k| (k, k)).collect();
            let d = contract(t, &t.conj(), &pairs)?;
            if virt == 0 {
                doubled.push(d);
                continue;
            }
            let perm: Vec<usize> = (0..virt).flat_map(|k| [k, virt + k]).collect();
            doubled.push(d.permute(&perm)?.into_shape(&vec![4; virt])?);
        }
        let end_axis = net
            .bonds
            .iter()
            .map(|b| {
                b.ends.map(|(node, axis)| {
                    net.legs[node][..axis].iter().filter(|l| matches!(l, Leg::Bond(_))).count()
                })
            })
            .collect();
        Ok(Self { net, doubled, end_axis })
    }

    /// Σ_{α∈class} kron(V_α, V̄_α) / χ.
    pub fn class_operator(class: &[usize]) -> Result<CTensor> {
        let basis = pauli_basis();
        let mut op = CTensor::zeros(&[4, 4]);
        for &a in class {
            let v = &basis.elements[a];
            op.add_scaled(&kron(v, &v.conj())?, C64::new(0.5, 0.0))?;
        }
        Ok(op)
    }

    /// Contraction of the doubled network with one operator per bond.
    pub fn weight(&self, ops: &[CTensor]) -> Result<f64> {
        let mut tensors = self.doubled.clone();
        for (b, op) in ops.iter().enumerate() {
            let node = self.net.bonds[b].ends[0].0;
            tensors[node] = tensors[node].apply_on_axis(self.end_axis[b][0], &op.transpose())?;
        }
        let nodes = tensors
            .into_iter()
            .zip(&self.net.legs)
            .map(|(t, legs)| {
                let labels: Vec<usize> = legs
                    .iter()
                    .filter_map(|l| match l {
                        Leg::Bond(b) => Some(*b),
                        Leg::Physical(_) => None,
                    })
                    .collect();
                Node::new(t, labels)
            })
            .collect::<Result<Vec<_>>>()?;
        let s = contract_network(nodes, &[])?;
        Ok(s.data()[0].re)
    }

    /// Samples one class per bond; returns the class indices and the record probability.
    pub fn sample<R: Rng>(&self, classes: &[Vec<usize>], rng: &mut R) -> Result<(Vec<usize>, f64)> {
        let class_ops: Vec<CTensor> = classes.iter().map(|c| Self::class_operator(c)).collect::<Result<_>>()?;
        let all: Vec<usize> = classes.iter().flatten().copied().collect();
        let unmeasured = Self::class_operator(&all)?;
        let nb = self.net.bonds.len();
        let mut ops = vec![unmeasured; nb];
        let mut picks = Vec::with_capacity(nb);
        let mut prob = 1.0;
        for b in 0..nb {
            let mut w = Vec::with_capacity(classes.len());
            for op in &class_ops {
                ops[b] = op.clone();
                w.push(self.weight(&ops)?.max(0.0));
            }
            let total: f64 = w.iter().sum();
            if total <= 0.0 {
                return Err(Error::Domain("doubled network vanished while sampling".into()));
            }
            let x = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = w.len() - 1;
            for (k, wk) in w.iter().enumerate() {
                acc += wk;
                if x < acc && *wk > 0.0 {
                    pick = k;
                    break;
                }
            }
            ops[b] = class_ops[pick].clone();
            prob *= w[pick] / total;
            picks.push(pick);
        }
        Ok((picks, prob))
    }
}

/// Every Pauli record with its probability, from the squared norms of the record states.
pub fn exhaustive_distribution(net: &PepsNetwork) -> Result<Vec<(Vec<usize>, f64)>> {
    let nb = net.bonds.len();
    let count = 4usize.checked_pow(nb as u32).filter(|&c| c <= EXHAUSTIVE_BUDGET).ok_or(Error::Resource {
        what: "lattice outcome records".into(),
        needed: 4u128.saturating_pow(nb as u32),
        cap: EXHAUSTIVE_BUDGET as u128,
    })?;
    let mut out = Vec::with_capacity(count);
    let mut total = 0.0;
    for idx in 0..count {
        let rec: Vec<usize> = (0..nb).map(|b| (idx >> (2 * (nb - 1 - b))) & 3).collect();
        let w = net.record_state(&rec)?.norm_sqr();
        total += w;
        out.push((rec, w));
    }
    for r in out.iter_mut() {
        r.1 /= total;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PepsTrial {
    pub record: Vec<usize>,
    pub probability: f64,
    pub corrections: Vec<(usize, PhysPauli)>,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PepsReport {
    pub example: Example,
    pub lattice: Lattice,
    pub beta: f64,
    pub incomplete: bool,
    pub trials: usize,
    pub seed: u64,
    pub fidelities: Vec<f64>,
    pub min_fidelity: f64,
    /// Largest residual of the local feedback identity used by the incomplete variant.
    pub branch_residual: f64,
    pub records: Vec<PepsTrial>,
}

const FULL_CLASSES: [&[usize]; 4] = [&[0], &[1], &[2], &[3]];
/// ZZ = +1 spans the Choi vectors of 𝟙 and Z; ZZ = −1 those of X and Y.
const ZZ_CLASSES: [&[usize]; 2] = [&[0, 3], &[1, 2]];

/// Residual of the identity behind ZZ-only measurement: within a class, feeding the Z part of
/// the outcome forward as a physical Z on the edge leaves the class representative.
pub fn zz_branch_residual(net: &PepsNetwork) -> Result<f64> {
    if net.example != Example::Toric {
        return Err(Error::Domain("the ZZ-only variant applies to the toric example".into()));
    }
    let e = toric_edge_tensor();
    let basis = pauli_basis();
    let mut worst = 0.0f64;
    for leg in [1usize, 2] {
        for class in ZZ_CLASSES {
            let rep = e.apply_on_axis(leg, &basis.elements[class[0]])?;
            for &a in class {
                let mut t = e.apply_on_axis(leg, &basis.elements[a])?;
                if pauli_bits(a).1 {
                    t = t.apply_on_axis(0, &pauli_z())?;
                }
                worst = worst.max(phase_aligned_distance(&t, &rep));
            }
        }
    }
    Ok(worst)
}

pub fn peps_trial<R: Rng>(
    net: &PepsNetwork,
    sampler: &RecordSampler,
    target: &CTensor,
    incomplete: bool,
    rng: &mut R,
) -> Result<PepsTrial> {
    let classes: Vec<Vec<usize>> = if incomplete {
        ZZ_CLASSES.iter().map(|c| c.to_vec()).collect()
    } else {
        FULL_CLASSES.iter().map(|c| c.to_vec()).collect()
    };
    let (picks, probability) = sampler.sample(&classes, rng)?;
    // With ZZ-only outcomes the Z part is fed forward per bond; what remains is the representative.
    let record: Vec<usize> = picks.iter().map(|&k| classes[k][0]).collect();
    let post = net.record_state(&record)?;
    let corrections = net.solve_corrections(&record)?;
    let corrected = apply_corrections(&post, net.qubits, &corrections)?;
    Ok(PepsTrial {
        record: if incomplete { picks } else { record },
        probability,
        corrections,
        fidelity: fidelity(target, &corrected),
    })
}

pub fn simulate_peps_protocol(net: &PepsNetwork, trials: usize, seed: u64, incomplete: bool) -> Result<PepsReport> {
    let branch_residual = if incomplete { zz_branch_residual(net)? } else { 0.0 };
    if branch_residual > 1e-12 {
        return Err(Error::not_correctable(None, branch_residual, "Z feedback does not absorb the ZZ-class ambiguity"));
    }
    let sampler = RecordSampler::new(net)?;
    let target = net.dense_state()?;
    let records: Vec<PepsTrial> = (0..trials)
        .into_par_iter()
        .map(|t| peps_trial(net, &sampler, &target, incomplete, &mut trial_rng(seed, t as u64)))
        .collect::<Result<_>>()?;
    let fidelities: Vec<f64> = records.iter().map(|r| r.fidelity).collect();
    Ok(PepsReport {
        example: net.example,
        lattice: net.lattice,
        beta: net.beta,
        incomplete,
        trials,
        seed,
        min_fidelity: fidelities.iter().copied().fold(f64::INFINITY, f64::min),
        fidelities,
        branch_residual,
        records,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParityReport {
    pub example: Example,
    pub samples: usize,
    pub constraints: Vec<String>,
    /// Samples violating each constraint.
    pub violations: Vec<usize>,
    /// Largest probability of any enumerated record violating a constraint, when enumerable.
    pub max_forbidden_probability: Option<f64>,
}

pub fn parity_statistics(net: &PepsNetwork, samples: usize, seed: u64) -> Result<ParityReport> {
    let constraints = net.parity_constraints();
    let exhaustive = exhaustive_distribution(net).ok();
    let records: Vec<Vec<usize>> = match &exhaustive {
        Some(dist) => {
            let cdf: Vec<f64> = dist
                .iter()
                .scan(0.0, |acc, r| {
                    *acc += r.1;
                    Some(*acc)
                })
                .collect();
            (0..samples)
                .into_par_iter()
                .map(|t| {
                    let x = trial_rng(seed, t as u64).gen::<f64>() * cdf[cdf.len() - 1];
                    let k = cdf.partition_point(|&c| c <= x).min(dist.len() - 1);
                    dist[k].0.clone()
                })
                .collect()
        }
        None => {
            let sampler = RecordSampler::new(net)?;
            let classes: Vec<Vec<usize>> = FULL_CLASSES.iter().map(|c| c.to_vec()).collect();
            (0..samples)
                .into_par_iter()
                .map(|t| sampler.sample(&classes, &mut trial_rng(seed, t as u64)).map(|r| r.0))
                .collect::<Result<_>>()?
        }
    };
    let mut violations = vec![0usize; constraints.len()];
    for r in &records {
        for k in net.violated_constraints(r) {
            violations[k] += 1;
        }
    }
    let max_forbidden_probability = exhaustive.map(|dist| {
        dist.iter()
            .filter(|(r, _)| !net.violated_constraints(r).is_empty())
            .map(|(_, p)| *p)
            .fold(0.0, f64::max)
    });
    Ok(ParityReport {
        example: net.example,
        samples,
        constraints: constraints.into_iter().map(|c| c.0).collect(),
        violations,
        max_forbidden_probability,
    })
}
