//! Rotated and folded rotated surface-code patches, their check circuits, and loop embeddings.
//!
//! Coordinates are doubled: data qubit (r, c) sits at (2r, 2c) and the ancilla of
//! plaquette (r, c), r, c in -1..d-1, sits at (2r+1, 2c+1). Plaquette (r, c) is X-type
//! when r + c is even. Two-body plaquettes survive as X-type on the top and bottom
//! edges and as Z-type on the left and right edges. Logical Z is Z on data row 0,
//! logical X is X on data column 0. Qubit indices: data row-major, then ancillas in
//! plaquette order.

use crate::circuit::{Basis, Gate, ScheduledCircuit};
use crate::error::{Error, Result};
use crate::logical::CodeSpec;
use crate::params::TimingParams;
use crate::pauli::{Pauli, PauliString, StabilizerGroup};
use crate::rational::Q;
use crate::tableau::StabilizerState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    Rotated,
    Folded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CheckType {
    X,
    Z,
}

impl CheckType {
    pub fn pauli(self) -> Pauli {
        match self {
            CheckType::X => Pauli::X,
            CheckType::Z => Pauli::Z,
        }
    }
}

/// Corner slots of a plaquette.
pub const TL: usize = 0;
pub const TR: usize = 1;
pub const BL: usize = 2;
pub const BR: usize = 3;

/// CNOT layer order per check type.
pub const X_ORDER: [usize; 4] = [TL, TR, BL, BR];
pub const Z_ORDER: [usize; 4] = [TL, BL, TR, BR];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stabilizer {
    pub kind: CheckType,
    /// Plaquette index (r, c).
    pub plaquette: (i32, i32),
    pub ancilla: usize,
    /// Data qubit at each corner slot, if inside the patch.
    pub corners: [Option<usize>; 4],
}

impl Stabilizer {
    pub fn support(&self) -> Vec<usize> {
        self.corners.iter().flatten().copied().collect()
    }

    pub fn weight(&self) -> usize {
        self.corners.iter().flatten().count()
    }

    /// Two-body boundary check.
    pub fn is_boundary(&self) -> bool {
        self.weight() == 2
    }

    pub fn layer_order(&self) -> [usize; 4] {
        match self.kind {
            CheckType::X => X_ORDER,
            CheckType::Z => Z_ORDER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatchSpec {
    pub distance: usize,
    pub kind: PatchKind,
    /// Physical sites: all d² for rotated, the row ≤ col triangle for folded.
    pub data_sites: Vec<(usize, usize)>,
    pub stabilizers: Vec<Stabilizer>,
    pub logical_x: Vec<usize>,
    pub logical_z: Vec<usize>,
    /// Doubled coordinates of every qubit, data first.
    pub coords: Vec<(i32, i32)>,
    /// Transposition of data qubits across the crease (folded only).
    pub fold_map: Option<Vec<usize>>,
}

pub fn build_patch(d: usize, kind: PatchKind) -> Result<PatchSpec> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidDistance(d));
    }
    let di = d as i32;
    let mut coords: Vec<(i32, i32)> = (0..di).flat_map(|r| (0..di).map(move |c| (2 * r, 2 * c))).collect();
    let data_index = |r: i32, c: i32| -> Option<usize> {
        (0..di).contains(&r).then_some(())?;
        (0..di).contains(&c).then_some(())?;
        Some((r * di + c) as usize)
    };
    let mut stabilizers = Vec::new();
    for r in -1..di {
        for c in -1..di {
            let kind = if (r + c) % 2 == 0 { CheckType::X } else { CheckType::Z };
            let corners = [data_index(r, c), data_index(r, c + 1), data_index(r + 1, c), data_index(r + 1, c + 1)];
            let w = corners.iter().flatten().count();
            let keep = match w {
                4 => true,
                2 => {
                    let horiz = r == -1 || r == di - 1;
                    let vert = c == -1 || c == di - 1;
                    (horiz && kind == CheckType::X) || (vert && kind == CheckType::Z)
                }
                _ => false,
            };
            if keep {
                let ancilla = coords.len();
                coords.push((2 * r + 1, 2 * c + 1));
                stabilizers.push(Stabilizer { kind, plaquette: (r, c), ancilla, corners });
            }
        }
    }
    let logical_z = (0..d).collect();
    let logical_x = (0..d).map(|r| r * d).collect();
    let (data_sites, fold_map) = match kind {
        PatchKind::Rotated => ((0..d).flat_map(|r| (0..d).map(move |c| (r, c))).collect(), None),
        PatchKind::Folded => {
            let sites = (0..d).flat_map(|r| (r..d).map(move |c| (r, c))).collect();
            let map = (0..d).flat_map(|r| (0..d).map(move |c| c * d + r)).collect();
            (sites, Some(map))
        }
    };
    Ok(PatchSpec { distance: d, kind, data_sites, stabilizers, logical_x, logical_z, coords, fold_map })
}

impl PatchSpec {
    pub fn num_data(&self) -> usize {
        self.distance * self.distance
    }

    pub fn num_qubits(&self) -> usize {
        self.coords.len()
    }

    pub fn ancillas(&self) -> impl Iterator<Item = usize> + '_ {
        self.stabilizers.iter().map(|s| s.ancilla)
    }

    pub fn stabilizer_paulis(&self, n: usize) -> Vec<PauliString> {
        self.stabilizers.iter().map(|s| PauliString::uniform(n, &s.support(), s.kind.pauli())).collect()
    }

    pub fn logical_x_pauli(&self, n: usize) -> PauliString {
        PauliString::uniform(n, &self.logical_x, Pauli::X)
    }

    pub fn logical_z_pauli(&self, n: usize) -> PauliString {
        PauliString::uniform(n, &self.logical_z, Pauli::Z)
    }

    /// The code on the data qubits alone.
    pub fn code(&self) -> CodeSpec {
        let n = self.num_data();
        CodeSpec {
            num_qubits: n,
            stabilizers: self.stabilizer_paulis(n),
            logical_x: vec![self.logical_x_pauli(n)],
            logical_z: vec![self.logical_z_pauli(n)],
        }
    }

    pub fn is_diagonal(&self, q: usize) -> bool {
        let (a, b) = self.coords[q];
        a == b
    }

    /// Bulk ancillas are weight-4 checks; they are absorbed into the mid-cycle code.
    pub fn is_bulk_ancilla(&self, q: usize) -> bool {
        self.stabilizers.iter().any(|s| s.ancilla == q && !s.is_boundary())
    }

    /// Qubits on the crease in diagonal order: (0,0), ancilla (1,1), (2,2), ...
    pub fn diagonal(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.num_qubits()).filter(|&q| self.is_diagonal(q)).collect();
        v.sort_by_key(|&q| self.coords[q].0);
        v
    }

    /// Off-diagonal fold pairs (a, b) with a in the upper triangle, over data and bulk ancillas.
    pub fn fold_pairs(&self) -> Vec<(usize, usize)> {
        if self.fold_map.is_none() {
            return Vec::new();
        }
        let lookup: std::collections::HashMap<(i32, i32), usize> =
            self.coords.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        (0..self.num_qubits())
            .filter(|&q| {
                let (a, b) = self.coords[q];
                a < b && (q < self.num_data() || self.is_bulk_ancilla(q))
            })
            .map(|q| {
                let (a, b) = self.coords[q];
                (q, lookup[&(b, a)])
            })
            .collect()
    }

    pub fn fold_fixed_points(&self) -> Vec<usize> {
        match &self.fold_map {
            Some(m) => (0..self.num_data()).filter(|&q| m[q] == q).collect(),
            None => Vec::new(),
        }
    }
}

/// The 4 CNOT layers of one round, as (control, target) pairs.
pub fn cnot_layers(p: &PatchSpec) -> [Vec<(usize, usize)>; 4] {
    let mut layers: [Vec<(usize, usize)>; 4] = Default::default();
    for s in &p.stabilizers {
        for (layer, &slot) in s.layer_order().iter().enumerate() {
            if let Some(dq) = s.corners[slot] {
                let pair = match s.kind {
                    CheckType::X => (s.ancilla, dq),
                    CheckType::Z => (dq, s.ancilla),
                };
                layers[layer].push(pair);
            }
        }
    }
    layers
}

/// Builder pieces shared with the transversal protocols. Times: 0 reset, 1 H, 2..=3 first half.
pub(crate) fn first_half(p: &PatchSpec, c: &mut ScheduledCircuit) {
    let layers = cnot_layers(p);
    for a in p.ancillas() {
        c.reset(0, a);
    }
    for s in p.stabilizers.iter().filter(|s| s.kind == CheckType::X) {
        c.gate(1, Gate::H, &[s.ancilla]);
    }
    for (t, layer) in layers[..2].iter().enumerate() {
        for &(a, b) in layer {
            c.gate(2 + t as u32, Gate::CX, &[a, b]);
        }
    }
}

/// Layers 3-4, basis change and measurement, starting at time `t0`.
pub(crate) fn second_half(p: &PatchSpec, c: &mut ScheduledCircuit, t0: u32) {
    let layers = cnot_layers(p);
    for (t, layer) in layers[2..].iter().enumerate() {
        for &(a, b) in layer {
            c.gate(t0 + t as u32, Gate::CX, &[a, b]);
        }
    }
    for s in p.stabilizers.iter().filter(|s| s.kind == CheckType::X) {
        c.gate(t0 + 2, Gate::H, &[s.ancilla]);
    }
    for s in &p.stabilizers {
        let r = c.measure(t0 + 3, Basis::Z, s.ancilla);
        c.checks.push(r);
    }
}

/// One round of stabilizer measurement.
pub fn check_circuit(p: &PatchSpec) -> ScheduledCircuit {
    let mut c = ScheduledCircuit::new(p.num_qubits());
    first_half(p, &mut c);
    second_half(p, &mut c, 4);
    c
}

/// Stabilizer state of a codespace input with fresh ancillas; logical state fixed by a
/// forced logical Z measurement.
pub fn encoded_state(p: &PatchSpec, seed: u64) -> Result<StabilizerState> {
    let n = p.num_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = StabilizerState::new(n);
    for s in p.stabilizer_paulis(n) {
        st.measure_pauli(&s, Some(false), &mut rng)?;
    }
    Ok(st)
}

/// Mid-cycle stabilizer group and its independent reference.
#[derive(Clone, Debug)]
pub struct MidCycle {
    pub group: StabilizerGroup,
    /// Generators of the unrotated code on data plus bulk ancillas.
    pub unrotated: Vec<PauliString>,
    /// Single-qubit stabilizers of the decoupled two-body ancillas.
    pub decoupled: Vec<PauliString>,
    pub active_qubits: Vec<usize>,
    /// Rank of the subgroup supported on active qubits only.
    pub active_rank: usize,
}

impl MidCycle {
    pub fn matches_reference(&self) -> bool {
        let n = self.group.num_qubits();
        let reference = StabilizerGroup::from_generators(n, self.unrotated.iter().chain(&self.decoupled));
        reference.equals(&self.group)
    }

    /// Weight histogram of the unrotated generators: (weight, count).
    pub fn weight_profile(&self) -> Vec<(usize, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for g in &self.unrotated {
            *h.entry(g.weight()).or_insert(0) += 1;
        }
        h.into_iter().collect()
    }
}

/// Instantaneous stabilizer group after the first two CNOT layers.
pub fn midcycle_group(p: &PatchSpec) -> Result<MidCycle> {
    let n = p.num_qubits();
    let mut c = ScheduledCircuit::new(n);
    first_half(p, &mut c);
    let gens: Vec<PauliString> = p
        .stabilizer_paulis(n)
        .into_iter()
        .chain(p.ancillas().map(|a| PauliString::from_ops(n, &[(a, Pauli::Z)])))
        .map(|g| conjugate_gates(g, &c))
        .collect::<Result<_>>()?;
    let group = StabilizerGroup::from_generators(n, &gens);

    let lookup: std::collections::HashMap<(i32, i32), usize> =
        p.coords.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let active = |q: usize| q < p.num_data() || p.is_bulk_ancilla(q);
    let active_qubits: Vec<usize> = (0..n).filter(|&q| active(q)).collect();
    let top = 2 * p.distance as i32 - 2;
    let mut unrotated = Vec::new();
    for r in 0..=top {
        for cc in 0..=top {
            if (r + cc) % 2 == 0 {
                continue;
            }
            let pl = if r % 2 == 0 { Pauli::X } else { Pauli::Z };
            let sup: Vec<usize> = [(r - 1, cc), (r + 1, cc), (r, cc - 1), (r, cc + 1)]
                .iter()
                .filter_map(|x| lookup.get(x).copied())
                .filter(|&q| active(q))
                .collect();
            unrotated.push(PauliString::uniform(n, &sup, pl));
        }
    }
    let decoupled = p
        .stabilizers
        .iter()
        .filter(|s| s.is_boundary())
        .map(|s| PauliString::from_ops(n, &[(s.ancilla, s.kind.pauli())]))
        .collect();
    let inactive: Vec<usize> = (0..n).filter(|&q| !active(q)).collect();
    let active_rank = subgroup_rank_avoiding(&group, &inactive);
    Ok(MidCycle { group, unrotated, decoupled, active_qubits, active_rank })
}

/// Conjugating the starting group (stabilizers plus fresh ancilla Z) through all
/// four CNOT layers and both basis changes gives back the same group.
pub fn round_trip_restores(p: &PatchSpec) -> Result<bool> {
    let n = p.num_qubits();
    let mut c = check_circuit(p);
    c.ops.retain(|o| !matches!(o.op, crate::circuit::Op::Measure { .. }));
    let start: Vec<PauliString> = p
        .stabilizer_paulis(n)
        .into_iter()
        .chain(p.ancillas().map(|a| PauliString::from_ops(n, &[(a, Pauli::Z)])))
        .collect();
    let end: Vec<PauliString> = start.iter().map(|g| conjugate_gates(g.clone(), &c)).collect::<Result<_>>()?;
    Ok(StabilizerGroup::from_generators(n, &end).equals(&StabilizerGroup::from_generators(n, &start)))
}

/// Heisenberg image of `g` under the unitary ops of `c`. Resets are skipped: callers
/// supply the post-reset Z generators themselves.
pub fn conjugate_gates(mut g: PauliString, c: &ScheduledCircuit) -> Result<PauliString> {
    for o in &c.ops {
        match &o.op {
            crate::circuit::Op::Gate { gate, qubits } => crate::logical::conjugate(&mut g, *gate, qubits)?,
            crate::circuit::Op::Reset { .. } => {}
            _ => return Err(Error::Precondition("measurement inside a conjugated block".into())),
        }
    }
    Ok(g)
}

/// Rank of the subgroup acting as identity on `avoid`.
fn subgroup_rank_avoiding(g: &StabilizerGroup, avoid: &[usize]) -> usize {
    let n = g.num_qubits();
    let mut rows: Vec<PauliString> = g.generators().cloned().collect();
    let cols: Vec<usize> = avoid.iter().copied().chain(avoid.iter().map(|&q| n + q)).collect();
    for col in cols {
        if let Some(pi) = rows.iter().position(|r| r.bit(col)) {
            let pr = rows.remove(pi);
            for r in rows.iter_mut() {
                if r.bit(col) {
                    r.mul_assign_right(&pr);
                }
            }
        }
    }
    StabilizerGroup::from_generators(n, &rows).rank()
}

/// Independent reference for the mid-cycle test: the unrotated code's stabilizer count.
pub fn unrotated_counts(d: usize) -> (usize, usize) {
    (d * d + (d - 1) * (d - 1), 2 * d * (d - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopRole {
    Data,
    Ancilla,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedClass {
    Normal,
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub patch: usize,
    /// 0 = upper triangle (row ≤ col), 1 = mirrored half.
    pub layer: u8,
    /// Qubit index inside the patch.
    pub qubit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopRecord {
    /// Doubled coordinate of the site hosting the loop.
    pub site: (i32, i32),
    pub role: LoopRole,
    pub speed_class: SpeedClass,
    pub lap: Q,
    pub slots: Vec<Slot>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopEmbedding {
    pub distance: usize,
    pub kind: PatchKind,
    pub num_patches: usize,
    pub loops: Vec<LoopRecord>,
    /// Occupancy of the off-diagonal (or, for rotated stacks, every) loop.
    pub qubits_per_loop: usize,
}

impl LoopEmbedding {
    pub fn max_occupancy(&self) -> usize {
        self.loops.iter().map(|l| l.slots.len()).max().unwrap_or(0)
    }

    pub fn diagonal_occupancy(&self) -> Option<usize> {
        self.loops.iter().find(|l| l.speed_class == SpeedClass::Double).map(|l| l.slots.len())
    }

    /// Loops whose occupants are data qubits.
    pub fn data_loops(&self) -> impl Iterator<Item = &LoopRecord> {
        self.loops.iter().filter(|l| l.role == LoopRole::Data)
    }
}

pub fn embed_stack(patches: &[PatchSpec], params: &TimingParams) -> Result<LoopEmbedding> {
    let first = patches.first().ok_or_else(|| Error::Precondition("empty stack".into()))?;
    if patches.iter().any(|p| p.distance != first.distance || p.kind != first.kind) {
        return Err(Error::MixedStack);
    }
    let mut loops: Vec<LoopRecord> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (pid, p) in patches.iter().enumerate() {
        for (q, &(a, b)) in p.coords.iter().enumerate() {
            let (site, layer, double) = match p.kind {
                PatchKind::Rotated => ((a, b), 0u8, false),
                PatchKind::Folded if a <= b => ((a, b), 0, a == b),
                PatchKind::Folded => ((b, a), 1, false),
            };
            let li = *index.entry(site).or_insert_with(|| {
                loops.push(LoopRecord {
                    site,
                    role: if q < p.num_data() { LoopRole::Data } else { LoopRole::Ancilla },
                    speed_class: if double { SpeedClass::Double } else { SpeedClass::Normal },
                    lap: params.lap(double),
                    slots: Vec::new(),
                });
                loops.len() - 1
            });
            loops[li].slots.push(Slot { patch: pid, layer, qubit: q });
        }
    }
    loops.sort_by_key(|l| l.site);
    let qubits_per_loop = loops
        .iter()
        .filter(|l| l.speed_class == SpeedClass::Normal)
        .map(|l| l.slots.len())
        .max()
        .unwrap_or(0);
    Ok(LoopEmbedding { distance: first.distance, kind: first.kind, num_patches: patches.len(), loops, qubits_per_loop })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d3_counts() {
        let p = build_patch(3, PatchKind::Rotated).unwrap();
        assert_eq!(p.data_sites.len(), 9);
        assert_eq!(p.stabilizers.len(), 8);
        let nx = p.stabilizers.iter().filter(|s| s.kind == CheckType::X).count();
        assert_eq!(nx, 4);
        let c = check_circuit(&p);
        assert_eq!(c.count_gate(Gate::CX), 24);
        assert!(c.layers_disjoint());
    }

    #[test]
    fn rejects_bad_distance() {
        assert_eq!(build_patch(4, PatchKind::Rotated), Err(Error::InvalidDistance(4)));
        assert_eq!(build_patch(1, PatchKind::Folded), Err(Error::InvalidDistance(1)));
    }

    #[test]
    fn fold_map_is_involution() {
        for d in [3, 5, 7] {
            let p = build_patch(d, PatchKind::Folded).unwrap();
            let m = p.fold_map.as_ref().unwrap();
            assert!((0..m.len()).all(|q| m[m[q]] == q));
            assert_eq!(p.fold_fixed_points().len(), d);
            assert_eq!(p.data_sites.len(), d * (d + 1) / 2);
        }
        let p = build_patch(3, PatchKind::Folded).unwrap();
        let off = p.fold_pairs().iter().filter(|(a, _)| *a < 9).count();
        assert_eq!(off, 3);
    }

    #[test]
    fn orders_differ_between_types() {
        assert_eq!(X_ORDER, [TL, TR, BL, BR]);
        assert_eq!(Z_ORDER, [TL, BL, TR, BR]);
        assert_ne!(X_ORDER, Z_ORDER);
    }

    #[test]
    fn midcycle_d3() {
        let p = build_patch(3, PatchKind::Rotated).unwrap();
        let m = midcycle_group(&p).unwrap();
        assert_eq!(m.active_qubits.len(), 13);
        assert_eq!(m.unrotated.len(), 12);
        assert_eq!(m.active_rank, 12);
        assert!(m.matches_reference());
    }

    #[test]
    fn round_trip() {
        for d in [3, 5] {
            for k in [PatchKind::Rotated, PatchKind::Folded] {
                assert!(round_trip_restores(&build_patch(d, k).unwrap()).unwrap(), "d = {d}, {k:?}");
            }
        }
    }

    #[test]
    fn embedding_occupancy() {
        let tp = TimingParams::silicon();
        let one = embed_stack(&[build_patch(3, PatchKind::Folded).unwrap()], &tp).unwrap();
        assert_eq!(one.qubits_per_loop, 2);
        assert_eq!(one.diagonal_occupancy(), Some(1));
        let rot: Vec<_> = (0..3).map(|_| build_patch(3, PatchKind::Rotated).unwrap()).collect();
        assert_eq!(embed_stack(&rot, &tp).unwrap().qubits_per_loop, 3);
        let mixed = [build_patch(3, PatchKind::Rotated).unwrap(), build_patch(5, PatchKind::Rotated).unwrap()];
        assert_eq!(embed_stack(&mixed, &tp), Err(Error::MixedStack));
    }
}
