//! Virtual-stack layer layouts and simultaneous lattice-surgery routability.
//!
//! Every patch occupies one grid cell. A merge path is a chain of free cells on the
//! 4-neighbour grid of one layer; its first cell touches patch a on a side exposing
//! the requested operator and its last cell touches patch b likewise. Paths of one
//! request set must be vertex-disjoint. Vertical transversal SWAPs move a patch into
//! the free cell directly above or below it.

use crate::error::{Error, Result};
use crate::parallel::{map_range, Exec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

/// Largest grid side the exhaustive router accepts.
pub const MAX_SIDE: usize = 8;
/// Most simultaneous requests per layer the router accepts.
pub const MAX_REQUESTS_PER_LAYER: usize = 4;
/// Swap budget ceiling for the breadth-first planner.
pub const MAX_SWAP_BUDGET: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliOp {
    X,
    Z,
}

impl PauliOp {
    fn parse(c: char) -> Option<Self> {
        match c {
            'X' | 'x' => Some(PauliOp::X),
            'Z' | 'z' => Some(PauliOp::Z),
            _ => None,
        }
    }
}

/// Operator exposed on the north, east, south and west sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Orientation(pub [PauliOp; 4]);

impl Orientation {
    /// X on north/south, Z on east/west.
    pub const X_VERTICAL: Orientation = Orientation([PauliOp::X, PauliOp::Z, PauliOp::X, PauliOp::Z]);
    pub const Z_VERTICAL: Orientation = Orientation([PauliOp::Z, PauliOp::X, PauliOp::Z, PauliOp::X]);

    pub fn parse(s: &str) -> Result<Self> {
        let ops: Vec<PauliOp> = s.chars().filter_map(PauliOp::parse).collect();
        if ops.len() != 4 || s.chars().count() != 4 {
            return Err(Error::Fixture(format!("orientation {s:?} must be four of X/Z (N E S W)")));
        }
        Ok(Orientation([ops[0], ops[1], ops[2], ops[3]]))
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in self.0 {
            write!(f, "{op:?}")?;
        }
        Ok(())
    }
}

impl Serialize for Orientation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Patch {
    pub id: u32,
    pub orientation: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    Memory,
    ShortRange,
    MidRange,
    LongRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Hallway,
    Checkerboard,
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
    pub num_layers: usize,
}

/// (row, col) on a layer.
pub type Cell = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerStackLayout {
    pub width: usize,
    pub height: usize,
    pub roles: Vec<LayerRole>,
    cells: Vec<Option<Patch>>,
}

impl LayerStackLayout {
    pub fn empty(dims: Dims, role: LayerRole) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 || dims.num_layers == 0 {
            return Err(Error::Overflow(format!("degenerate dims {dims:?}")));
        }
        Ok(LayerStackLayout {
            width: dims.width,
            height: dims.height,
            roles: vec![role; dims.num_layers],
            cells: vec![None; dims.width * dims.height * dims.num_layers],
        })
    }

    pub fn dims(&self) -> Dims {
        Dims { width: self.width, height: self.height, num_layers: self.roles.len() }
    }

    pub fn num_layers(&self) -> usize {
        self.roles.len()
    }

    fn idx(&self, layer: usize, (r, c): Cell) -> usize {
        (layer * self.height + r) * self.width + c
    }

    pub fn get(&self, layer: usize, cell: Cell) -> Option<Patch> {
        self.cells[self.idx(layer, cell)]
    }

    /// Place a patch; ids are unique across the whole stack.
    pub fn set(&mut self, layer: usize, cell: Cell, patch: Option<Patch>) -> Result<()> {
        if layer >= self.num_layers() || cell.0 >= self.height || cell.1 >= self.width {
            return Err(Error::Overflow(format!("cell {cell:?} on layer {layer} is outside the grid")));
        }
        if let Some(p) = patch {
            if let Some((l, c)) = self.locate(p.id) {
                if (l, c) != (layer, cell) {
                    return Err(Error::Fixture(format!("patch id {} appears twice", p.id)));
                }
            }
        }
        let i = self.idx(layer, cell);
        self.cells[i] = patch;
        Ok(())
    }

    pub fn locate(&self, id: u32) -> Option<(usize, Cell)> {
        let per = self.width * self.height;
        self.cells
            .iter()
            .position(|p| p.is_some_and(|p| p.id == id))
            .map(|i| (i / per, ((i % per) / self.width, i % self.width)))
    }

    pub fn patches(&self) -> Vec<(usize, Cell, Patch)> {
        let per = self.width * self.height;
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i / per, ((i % per) / self.width, i % self.width), p)))
            .collect()
    }

    pub fn is_free(&self, layer: usize, cell: Cell) -> bool {
        self.get(layer, cell).is_none()
    }

    pub fn free_cells(&self, layer: usize) -> usize {
        (0..self.height).flat_map(|r| (0..self.width).map(move |c| (r, c))).filter(|&c| self.is_free(layer, c)).count()
    }

    /// Remove a patch, freeing its cell.
    pub fn remove(&mut self, id: u32) -> Result<Patch> {
        let (l, c) = self.locate(id).ok_or(Error::UnknownPatch(id))?;
        let i = self.idx(l, c);
        Ok(self.cells[i].take().expect("located"))
    }

    /// Vertical transversal SWAP of a patch with the free cell in an adjacent layer.
    pub fn apply_swap(&mut self, s: &Swap) -> Result<()> {
        let (l, c) = self.locate(s.patch).ok_or(Error::UnknownPatch(s.patch))?;
        if l != s.from_layer || c != s.cell || s.to_layer >= self.num_layers() || l.abs_diff(s.to_layer) != 1 {
            return Err(Error::Precondition(format!("swap {s:?} does not match the layout")));
        }
        if !self.is_free(s.to_layer, c) {
            return Err(Error::Precondition(format!("destination of {s:?} is occupied")));
        }
        let p = self.remove(s.patch)?;
        self.set(s.to_layer, c, Some(p))
    }

    /// Cell table: `.` for free, `id:NESW` for a patch.
    pub fn render_layer(&self, layer: usize) -> Vec<String> {
        (0..self.height)
            .map(|r| {
                (0..self.width)
                    .map(|c| match self.get(layer, (r, c)) {
                        None => ".".to_string(),
                        Some(p) => format!("{}:{}", p.id, p.orientation),
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }
}

/// Build a hallway, checkerboard or empty stack. Patches fill layers in order.
///
/// Hallway stacks sit on even (row, col) sites so odd rows and columns form the
/// corridors; checkerboard layer l uses cells with (row + col + l) even.
pub fn generate_layout(kind: LayoutKind, patches: &[Patch], dims: Dims) -> Result<LayerStackLayout> {
    let role = match kind {
        LayoutKind::Hallway => LayerRole::MidRange,
        LayoutKind::Checkerboard => LayerRole::ShortRange,
        LayoutKind::Empty => LayerRole::LongRange,
    };
    let mut out = LayerStackLayout::empty(dims, role)?;
    let sites = |l: usize| -> Vec<Cell> {
        let all = (0..dims.height).flat_map(|r| (0..dims.width).map(move |c| (r, c)));
        match kind {
            LayoutKind::Hallway => all.filter(|&(r, c)| r % 2 == 0 && c % 2 == 0).collect(),
            LayoutKind::Checkerboard => all.filter(|&(r, c)| (r + c + l).is_multiple_of(2)).collect(),
            LayoutKind::Empty => Vec::new(),
        }
    };
    let mut rest = patches.iter();
    let mut placed = 0;
    for l in 0..dims.num_layers {
        let mut used = false;
        for cell in sites(l) {
            let Some(p) = rest.next() else { break };
            out.set(l, cell, Some(*p))?;
            placed += 1;
            used = true;
        }
        if !used {
            out.roles[l] = LayerRole::LongRange;
        }
    }
    if placed < patches.len() {
        return Err(Error::Overflow(format!("{} patches do not fit a {kind:?} layout of {dims:?}", patches.len())));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MergeRequest {
    pub a: u32,
    pub op_a: PauliOp,
    pub b: u32,
    pub op_b: PauliOp,
    /// Required layer; `None` accepts whichever layer holds both patches.
    #[serde(default)]
    pub layer: Option<usize>,
}

impl MergeRequest {
    pub fn new(a: u32, op_a: PauliOp, b: u32, op_b: PauliOp) -> Self {
        MergeRequest { a, op_a, b, op_b, layer: None }
    }
}

impl fmt::Display for MergeRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}{:?}{}", self.op_a, self.a, self.op_b, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoutedPath {
    pub request: usize,
    pub layer: usize,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Exhaustion {
    /// Requests whose patches do not share a layer (or the required one).
    pub split: Vec<usize>,
    /// Requests with no path even when routed alone.
    pub isolated: Vec<usize>,
    /// Layers whose request subsets were refuted by full search.
    pub refuted_layers: Vec<usize>,
    /// Search nodes visited.
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Routing {
    Feasible { paths: Vec<RoutedPath>, nodes: u64 },
    Infeasible { certificate: Exhaustion },
}

impl Routing {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Routing::Feasible { .. })
    }

    pub fn paths(&self) -> &[RoutedPath] {
        match self {
            Routing::Feasible { paths, .. } => paths,
            Routing::Infeasible { .. } => &[],
        }
    }
}

const DIRS: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

/// One layer flattened to bit masks over at most 64 cells.
struct Grid {
    w: usize,
    h: usize,
    free: u64,
    nbr: Vec<u64>,
}

impl Grid {
    fn new(layout: &LayerStackLayout, layer: usize) -> Self {
        let (w, h) = (layout.width, layout.height);
        let mut free = 0u64;
        let mut nbr = vec![0u64; w * h];
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if layout.is_free(layer, (r, c)) {
                    free |= 1 << i;
                }
                for (dr, dc) in DIRS {
                    if let Some((r2, c2)) = step((r, c), dr, dc, w, h) {
                        nbr[i] |= 1 << (r2 * w + c2);
                    }
                }
            }
        }
        Grid { w, h, free, nbr }
    }

    fn cell(&self, i: usize) -> Cell {
        (i / self.w, i % self.w)
    }

    /// Free cells touching `cell` through a side that exposes `op`.
    fn endpoints(&self, cell: Cell, orient: Orientation, op: PauliOp) -> u64 {
        let mut m = 0;
        for (side, (dr, dc)) in DIRS.iter().enumerate() {
            if orient.0[side] != op {
                continue;
            }
            if let Some((r, c)) = step(cell, *dr, *dc, self.w, self.h) {
                m |= 1 << (r * self.w + c);
            }
        }
        m & self.free
    }

    fn reach(&self, src: u64, dst: u64, avail: u64) -> bool {
        let mut seen = src & avail;
        let mut frontier = seen;
        while frontier != 0 {
            if frontier & dst != 0 {
                return true;
            }
            let mut next = 0;
            for i in bits(frontier) {
                next |= self.nbr[i];
            }
            frontier = next & avail & !seen;
            seen |= frontier;
        }
        false
    }

    fn shortest(&self, src: u64, dst: u64, avail: u64) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.w * self.h];
        let mut q: VecDeque<usize> = bits(src & avail).collect();
        let mut seen = src & avail;
        while let Some(x) = q.pop_front() {
            if dst >> x & 1 == 1 {
                let mut path = vec![x];
                while prev[*path.last().unwrap()] != usize::MAX {
                    path.push(prev[*path.last().unwrap()]);
                }
                path.reverse();
                return Some(path);
            }
            for y in bits(self.nbr[x] & avail & !seen) {
                seen |= 1 << y;
                prev[y] = x;
                q.push_back(y);
            }
        }
        None
    }
}

fn step((r, c): Cell, dr: isize, dc: isize, w: usize, h: usize) -> Option<Cell> {
    let r2 = r.checked_add_signed(dr)?;
    let c2 = c.checked_add_signed(dc)?;
    (r2 < h && c2 < w).then_some((r2, c2))
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

struct LayerSearch<'a> {
    grid: &'a Grid,
    ends: Vec<(u64, u64)>,
    nodes: u64,
}

impl LayerSearch<'_> {
    /// Route requests i.. within `avail`. Only chordless paths that touch their
    /// endpoint sets once are enumerated: any other path contains one of these on a
    /// subset of its cells, which leaves strictly more room for the rest.
    fn solve(&mut self, i: usize, avail: u64) -> Option<Vec<Vec<usize>>> {
        self.nodes += 1;
        if i == self.ends.len() {
            return Some(Vec::new());
        }
        for &(a, b) in &self.ends[i..] {
            if !self.grid.reach(a, b, avail) {
                return None;
            }
        }
        let (a, b) = self.ends[i];
        if i + 1 == self.ends.len() {
            return self.grid.shortest(a, b, avail).map(|p| vec![p]);
        }
        for s in bits(a & avail) {
            let mut path = vec![s];
            if let Some(rest) = self.extend(i, avail, a, b, &mut path, 1 << s) {
                return Some(rest);
            }
        }
        None
    }

    fn extend(&mut self, i: usize, avail: u64, a: u64, b: u64, path: &mut Vec<usize>, mask: u64) -> Option<Vec<Vec<usize>>> {
        let x = *path.last().unwrap();
        if b >> x & 1 == 1 {
            let mut rest = self.solve(i + 1, avail & !mask)?;
            rest.insert(0, path.clone());
            return Some(rest);
        }
        for y in bits(self.grid.nbr[x] & avail & !mask & !a) {
            if self.grid.nbr[y] & mask != 1 << x {
                continue;
            }
            path.push(y);
            if let Some(r) = self.extend(i, avail, a, b, path, mask | 1 << y) {
                return Some(r);
            }
            path.pop();
        }
        None
    }
}

fn check_limits(layout: &LayerStackLayout) -> Result<()> {
    if layout.width > MAX_SIDE || layout.height > MAX_SIDE {
        return Err(Error::Precondition(format!(
            "grid {}x{} exceeds the exhaustive limit {MAX_SIDE}x{MAX_SIDE}",
            layout.height, layout.width
        )));
    }
    Ok(())
}

/// Decide whether all requests can be merged at once; returns witness paths or an
/// exhaustion certificate.
pub fn routable(layout: &LayerStackLayout, requests: &[MergeRequest]) -> Result<Routing> {
    check_limits(layout)?;
    let mut split = Vec::new();
    let mut by_layer: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut located = Vec::with_capacity(requests.len());
    for (k, r) in requests.iter().enumerate() {
        let (la, ca) = layout.locate(r.a).ok_or(Error::UnknownPatch(r.a))?;
        let (lb, cb) = layout.locate(r.b).ok_or(Error::UnknownPatch(r.b))?;
        if r.a == r.b {
            return Err(Error::Precondition(format!("request {r} merges a patch with itself")));
        }
        located.push((ca, cb));
        if la != lb || r.layer.is_some_and(|l| l != la) {
            split.push(k);
        } else {
            by_layer.entry(la).or_default().push(k);
        }
    }
    for (l, ks) in &by_layer {
        if ks.len() > MAX_REQUESTS_PER_LAYER {
            return Err(Error::Precondition(format!("{} requests on layer {l}, limit {MAX_REQUESTS_PER_LAYER}", ks.len())));
        }
    }
    let mut paths = Vec::new();
    let mut isolated = Vec::new();
    let mut refuted = Vec::new();
    let mut nodes = 0;
    for (&l, ks) in &by_layer {
        let grid = Grid::new(layout, l);
        let ends: Vec<(u64, u64)> = ks
            .iter()
            .map(|&k| {
                let r = &requests[k];
                let (ca, cb) = located[k];
                let pa = layout.get(l, ca).expect("located");
                let pb = layout.get(l, cb).expect("located");
                (grid.endpoints(ca, pa.orientation, r.op_a), grid.endpoints(cb, pb.orientation, r.op_b))
            })
            .collect();
        for (j, &(a, b)) in ends.iter().enumerate() {
            if !grid.reach(a, b, grid.free) {
                isolated.push(ks[j]);
            }
        }
        let mut search = LayerSearch { grid: &grid, ends, nodes: 0 };
        let found = search.solve(0, grid.free);
        nodes += search.nodes;
        match found {
            Some(ps) => {
                for (j, p) in ps.into_iter().enumerate() {
                    paths.push(RoutedPath { request: ks[j], layer: l, cells: p.into_iter().map(|i| grid.cell(i)).collect() });
                }
            }
            None => refuted.push(l),
        }
    }
    if split.is_empty() && refuted.is_empty() {
        paths.sort_by_key(|p| p.request);
        return Ok(Routing::Feasible { paths, nodes });
    }
    isolated.sort();
    Ok(Routing::Infeasible { certificate: Exhaustion { split, isolated, refuted_layers: refuted, nodes } })
}

/// Re-check witness paths from scratch: free cells, 4-connected, endpoint sides
/// expose the requested operators, and no cell shared between paths.
pub fn verify_paths(layout: &LayerStackLayout, requests: &[MergeRequest], paths: &[RoutedPath]) -> Result<()> {
    let bad = |m: String| Err(Error::Precondition(m));
    let mut seen: HashSet<(usize, Cell)> = HashSet::new();
    let mut covered = vec![false; requests.len()];
    for p in paths {
        let Some(r) = requests.get(p.request) else { return bad(format!("path for unknown request {}", p.request)) };
        if std::mem::replace(&mut covered[p.request], true) {
            return bad(format!("request {} routed twice", p.request));
        }
        if p.cells.is_empty() {
            return bad(format!("empty path for {r}"));
        }
        for (i, &c) in p.cells.iter().enumerate() {
            if c.0 >= layout.height || c.1 >= layout.width || !layout.is_free(p.layer, c) {
                return bad(format!("path for {r} uses non-free cell {c:?}"));
            }
            if !seen.insert((p.layer, c)) {
                return bad(format!("cell {c:?} on layer {} used twice", p.layer));
            }
            if i > 0 {
                let prev = p.cells[i - 1];
                if prev.0.abs_diff(c.0) + prev.1.abs_diff(c.1) != 1 {
                    return bad(format!("path for {r} jumps from {prev:?} to {c:?}"));
                }
            }
        }
        let exposes = |id: u32, op: PauliOp, c: Cell| -> bool {
            let Some((l, pc)) = layout.locate(id) else { return false };
            if l != p.layer {
                return false;
            }
            let o = layout.get(l, pc).expect("located").orientation;
            DIRS.iter().enumerate().any(|(side, &(dr, dc))| o.0[side] == op && step(pc, dr, dc, layout.width, layout.height) == Some(c))
        };
        if !exposes(r.a, r.op_a, p.cells[0]) || !exposes(r.b, r.op_b, *p.cells.last().unwrap()) {
            return bad(format!("path for {r} does not end on the requested boundaries"));
        }
    }
    if let Some(k) = covered.iter().position(|c| !c) {
        return bad(format!("request {k} has no path"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Swap {
    pub patch: u32,
    pub cell: Cell,
    pub from_layer: usize,
    pub to_layer: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Plan {
    Found { swaps: Vec<Swap>, paths: Vec<RoutedPath>, states: usize },
    /// No plan within the budget. `exhausted` means every reachable arrangement was
    /// examined, so no budget suffices.
    Infeasible { budget: usize, states: usize, exhausted: bool },
}

impl Plan {
    pub fn num_swaps(&self) -> Option<usize> {
        match self {
            Plan::Found { swaps, .. } => Some(swaps.len()),
            Plan::Infeasible { .. } => None,
        }
    }
}

/// Breadth-first search over vertical-SWAP sequences for a minimal plan that makes
/// every request routable at once.
pub fn plan_with_swaps(layout: &LayerStackLayout, requests: &[MergeRequest], max_swaps: usize) -> Result<Plan> {
    if max_swaps > MAX_SWAP_BUDGET {
        return Err(Error::Precondition(format!("swap budget {max_swaps} exceeds {MAX_SWAP_BUDGET}")));
    }
    check_limits(layout)?;
    for r in requests {
        for id in [r.a, r.b] {
            layout.locate(id).ok_or(Error::UnknownPatch(id))?;
        }
    }
    let key = |l: &LayerStackLayout| -> Vec<(u32, usize)> {
        let mut k: Vec<(u32, usize)> = l.patches().into_iter().map(|(layer, _, p)| (p.id, layer)).collect();
        k.sort();
        k
    };
    let mut seen = HashSet::new();
    seen.insert(key(layout));
    let mut queue = VecDeque::from([(layout.clone(), Vec::<Swap>::new())]);
    let mut truncated = false;
    while let Some((st, swaps)) = queue.pop_front() {
        if let Routing::Feasible { paths, .. } = routable(&st, requests)? {
            return Ok(Plan::Found { swaps, paths, states: seen.len() });
        }
        let at_budget = swaps.len() == max_swaps;
        for (l, cell, p) in st.patches() {
            for to in [l.wrapping_sub(1), l + 1] {
                if to >= st.num_layers() || !st.is_free(to, cell) {
                    continue;
                }
                let s = Swap { patch: p.id, cell, from_layer: l, to_layer: to };
                let mut next = st.clone();
                next.apply_swap(&s)?;
                if at_budget {
                    truncated |= !seen.contains(&key(&next));
                } else if seen.insert(key(&next)) {
                    let mut sw = swaps.clone();
                    sw.push(s);
                    queue.push_back((next, sw));
                }
            }
        }
    }
    Ok(Plan::Infeasible { budget: max_swaps, states: seen.len(), exhausted: !truncated })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContainmentReport {
    /// Request sets the reference layout routes without swaps.
    pub routed_by_reference: usize,
    /// Of those, sets the candidate cannot serve within the budget.
    pub unserved: Vec<Vec<MergeRequest>>,
    pub budget: usize,
}

/// Compare connectivity: every one- and two-request set over patch pairs that share
/// a layer in `reference` and that `reference` routes directly, checked against
/// swap plans on `candidate`.
pub fn containment(exec: Exec, reference: &LayerStackLayout, candidate: &LayerStackLayout, budget: usize) -> Result<ContainmentReport> {
    let pats = reference.patches();
    let mut singles = Vec::new();
    for (i, &(la, _, pa)) in pats.iter().enumerate() {
        for &(lb, _, pb) in &pats[i + 1..] {
            if la != lb {
                continue;
            }
            for oa in [PauliOp::X, PauliOp::Z] {
                for ob in [PauliOp::X, PauliOp::Z] {
                    singles.push(MergeRequest::new(pa.id.min(pb.id), oa, pa.id.max(pb.id), ob));
                }
            }
        }
    }
    singles.sort_by_key(|r| (r.a, r.b, r.op_a as u8, r.op_b as u8));
    let mut sets: Vec<Vec<MergeRequest>> = singles.iter().map(|r| vec![*r]).collect();
    for (i, r) in singles.iter().enumerate() {
        for s in &singles[i + 1..] {
            if [s.a, s.b].iter().all(|x| *x != r.a && *x != r.b) {
                sets.push(vec![*r, *s]);
            }
        }
    }
    let verdicts = map_range(exec, sets.len(), |k| -> Result<Option<bool>> {
        if !routable(reference, &sets[k])?.is_feasible() {
            return Ok(None);
        }
        Ok(Some(plan_with_swaps(candidate, &sets[k], budget)?.num_swaps().is_some()))
    });
    let mut routed = 0;
    let mut unserved = Vec::new();
    for (k, v) in verdicts.into_iter().enumerate() {
        match v? {
            None => {}
            Some(ok) => {
                routed += 1;
                if !ok {
                    unserved.push(sets[k].clone());
                }
            }
        }
    }
    Ok(ContainmentReport { routed_by_reference: routed, unserved, budget })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotonicityReport {
    pub trials: usize,
    /// Trials whose base instance was feasible.
    pub feasible_before: usize,
    /// Trials whose base instance was infeasible but became feasible.
    pub gained: usize,
    pub violations: Vec<u64>,
}

/// Random single-layer instance with a bystander patch whose removal only adds a
/// free cell. Trial seeds are derived from `seed` so any violation can be replayed.
pub fn random_instance(seed: u64) -> (LayerStackLayout, Vec<MergeRequest>, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let w = rng.gen_range(3..=6);
        let h = rng.gen_range(3..=6);
        let mut lay = LayerStackLayout::empty(Dims { width: w, height: h, num_layers: 1 }, LayerRole::ShortRange).expect("dims");
        let mut id = 0;
        for r in 0..h {
            for c in 0..w {
                if rng.gen_bool(0.4) {
                    id += 1;
                    let o = if rng.gen_bool(0.5) { Orientation::X_VERTICAL } else { Orientation::Z_VERTICAL };
                    lay.set(0, (r, c), Some(Patch { id, orientation: o })).expect("in grid");
                }
            }
        }
        let k = rng.gen_range(1..=3usize);
        if id < 2 * k as u32 + 1 {
            continue;
        }
        let mut ids: Vec<u32> = (1..=id).collect();
        ids.shuffle(&mut rng);
        let op = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { PauliOp::X } else { PauliOp::Z };
        let reqs = (0..k).map(|j| MergeRequest::new(ids[2 * j], op(&mut rng), ids[2 * j + 1], op(&mut rng))).collect();
        return (lay, reqs, ids[2 * k]);
    }
}

/// Freeing a cell never turns a feasible request set infeasible.
pub fn monotonicity_trials(exec: Exec, trials: usize, seed: u64) -> Result<MonotonicityReport> {
    let results = map_range(exec, trials, |t| -> Result<(bool, bool)> {
        let s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64);
        let (mut lay, reqs, bystander) = random_instance(s);
        let before = routable(&lay, &reqs)?;
        if let Routing::Feasible { paths, .. } = &before {
            verify_paths(&lay, &reqs, paths)?;
        }
        lay.remove(bystander)?;
        let after = routable(&lay, &reqs)?;
        if let Routing::Feasible { paths, .. } = &after {
            verify_paths(&lay, &reqs, paths)?;
        }
        Ok((before.is_feasible(), after.is_feasible()))
    });
    let mut rep = MonotonicityReport { trials, feasible_before: 0, gained: 0, violations: Vec::new() };
    for (t, r) in results.into_iter().enumerate() {
        let (b, a) = r?;
        rep.feasible_before += b as usize;
        rep.gained += (!b && a) as usize;
        if b && !a {
            rep.violations.push(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64));
        }
    }
    Ok(rep)
}

// ---- fixtures ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    name: String,
    width: usize,
    height: usize,
    layers: Vec<FixtureLayer>,
    #[serde(default)]
    requests: Vec<FixtureRequest>,
    #[serde(default)]
    expect: Expectation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureLayer {
    role: LayerRole,
    cells: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureRequest {
    a: u32,
    op_a: PauliOp,
    b: u32,
    op_b: PauliOp,
    layer: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub routable: Option<bool>,
    pub plannable: Option<bool>,
    pub min_swaps: Option<usize>,
    pub swap_budget: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub layout: LayerStackLayout,
    pub requests: Vec<MergeRequest>,
    pub expect: Expectation,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self> {
        let f: FixtureFile = toml::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
        let dims = Dims { width: f.width, height: f.height, num_layers: f.layers.len() };
        let mut layout = LayerStackLayout::empty(dims, LayerRole::Memory).map_err(|e| Error::Fixture(e.to_string()))?;
        for (l, fl) in f.layers.iter().enumerate() {
            layout.roles[l] = fl.role;
            if fl.cells.len() != f.height {
                return Err(Error::Fixture(format!("layer {l} has {} rows, expected {}", fl.cells.len(), f.height)));
            }
            for (r, row) in fl.cells.iter().enumerate() {
                let toks: Vec<&str> = row.split_whitespace().collect();
                if toks.len() != f.width {
                    return Err(Error::Fixture(format!("layer {l} row {r} has {} cells, expected {}", toks.len(), f.width)));
                }
                for (c, tok) in toks.into_iter().enumerate() {
                    if tok == "." {
                        continue;
                    }
                    let (id, o) = tok.split_once(':').ok_or_else(|| Error::Fixture(format!("bad cell {tok:?}")))?;
                    let id: u32 = id.parse().map_err(|_| Error::Fixture(format!("bad patch id in {tok:?}")))?;
                    let patch = Patch { id, orientation: Orientation::parse(o)? };
                    layout.set(l, (r, c), Some(patch)).map_err(|e| Error::Fixture(e.to_string()))?;
                }
            }
        }
        let requests = f
            .requests
            .into_iter()
            .map(|r| MergeRequest { a: r.a, op_a: r.op_a, b: r.b, op_b: r.op_b, layer: r.layer })
            .collect();
        Ok(Fixture { name: f.name, layout, requests, expect: f.expect })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Hallway reading of the two-layer, four-stack example.
pub const HALLWAY_FIXTURE: &str = include_str!("../fixtures/hallway.toml");
/// Checkerboard plus empty long-range layer over the same eight patches.
pub const CHECKERBOARD_FIXTURE: &str = include_str!("../fixtures/checkerboard.toml");

#[cfg(test)]
mod tests {
    use super::*;
    use PauliOp::{X, Z};

    fn p(id: u32) -> Patch {
        Patch { id, orientation: Orientation::X_VERTICAL }
    }

    #[test]
    fn empty_layout_routes_nothing() {
        let l = generate_layout(LayoutKind::Empty, &[], Dims { width: 3, height: 3, num_layers: 1 }).unwrap();
        assert!(l.patches().is_empty());
        assert_eq!(l.roles, vec![LayerRole::LongRange]);
        assert!(routable(&l, &[]).unwrap().is_feasible());
    }

    #[test]
    fn overflow_is_reported() {
        let ps: Vec<Patch> = (1..=5).map(p).collect();
        let r = generate_layout(LayoutKind::Hallway, &ps, Dims { width: 3, height: 3, num_layers: 1 });
        assert!(matches!(r, Err(Error::Overflow(_))));
    }

    #[test]
    fn single_request_gets_shortest_path() {
        // 1 . . 2 on one row: Z boundaries face east/west.
        let mut l = LayerStackLayout::empty(Dims { width: 4, height: 2, num_layers: 1 }, LayerRole::MidRange).unwrap();
        l.set(0, (0, 0), Some(p(1))).unwrap();
        l.set(0, (0, 3), Some(p(2))).unwrap();
        let reqs = [MergeRequest::new(1, Z, 2, Z)];
        let r = routable(&l, &reqs).unwrap();
        assert_eq!(r.paths()[0].cells, vec![(0, 1), (0, 2)]);
        verify_paths(&l, &reqs, r.paths()).unwrap();
        // X boundaries face north/south, so the path must drop a row.
        let r = routable(&l, &[MergeRequest::new(1, X, 2, X)]).unwrap();
        assert_eq!(r.paths()[0].cells.len(), 4);
    }

    #[test]
    fn unknown_patch() {
        let l = LayerStackLayout::empty(Dims { width: 2, height: 2, num_layers: 1 }, LayerRole::Memory).unwrap();
        assert_eq!(routable(&l, &[MergeRequest::new(1, X, 2, X)]), Err(Error::UnknownPatch(1)));
    }

    #[test]
    fn crossing_requests_conflict() {
        // Two pairs that must cross through the single centre cell.
        let mut l = LayerStackLayout::empty(Dims { width: 3, height: 3, num_layers: 1 }, LayerRole::MidRange).unwrap();
        for (id, cell) in [(1, (0, 1)), (2, (2, 1)), (3, (1, 0)), (4, (1, 2))] {
            l.set(0, cell, Some(p(id))).unwrap();
        }
        for (k, c) in [(0, 0), (0, 2), (2, 0), (2, 2)].into_iter().enumerate() {
            l.set(0, c, Some(p(10 + k as u32))).unwrap();
        }
        let a = MergeRequest::new(1, X, 2, X);
        let b = MergeRequest::new(3, Z, 4, Z);
        assert!(routable(&l, &[a]).unwrap().is_feasible());
        assert!(routable(&l, &[b]).unwrap().is_feasible());
        let r = routable(&l, &[a, b]).unwrap();
        let Routing::Infeasible { certificate } = r else { panic!("must conflict") };
        assert_eq!(certificate.refuted_layers, vec![0]);
        assert!(certificate.isolated.is_empty());
    }

    #[test]
    fn swaps_follow_free_cells() {
        let mut l = LayerStackLayout::empty(Dims { width: 1, height: 1, num_layers: 3 }, LayerRole::Memory).unwrap();
        l.set(0, (0, 0), Some(p(1))).unwrap();
        let s = Swap { patch: 1, cell: (0, 0), from_layer: 0, to_layer: 2 };
        assert!(l.apply_swap(&s).is_err());
        l.apply_swap(&Swap { to_layer: 1, ..s }).unwrap();
        assert_eq!(l.locate(1), Some((1, (0, 0))));
    }

    #[test]
    fn already_routable_needs_no_swaps() {
        let mut l = LayerStackLayout::empty(Dims { width: 4, height: 1, num_layers: 2 }, LayerRole::MidRange).unwrap();
        l.set(0, (0, 0), Some(p(1))).unwrap();
        l.set(0, (0, 3), Some(p(2))).unwrap();
        let plan = plan_with_swaps(&l, &[MergeRequest::new(1, Z, 2, Z)], 8).unwrap();
        assert_eq!(plan.num_swaps(), Some(0));
        assert!(plan_with_swaps(&l, &[], 9).is_err());
    }

    #[test]
    fn fixtures_round_trip_generator() {
        let a = Fixture::parse(HALLWAY_FIXTURE).unwrap();
        let ps: Vec<Patch> = (1..=8).map(p).collect();
        let g = generate_layout(LayoutKind::Hallway, &ps, a.layout.dims()).unwrap();
        assert_eq!(g, a.layout);
        let b = Fixture::parse(CHECKERBOARD_FIXTURE).unwrap();
        let order = [1, 2, 3, 4, 5, 6, 8, 7];
        let ps: Vec<Patch> = order.into_iter().map(p).collect();
        let g = generate_layout(LayoutKind::Checkerboard, &ps, b.layout.dims()).unwrap();
        assert_eq!(g, b.layout);
        assert_eq!(b.layout.roles, vec![LayerRole::ShortRange, LayerRole::ShortRange, LayerRole::LongRange]);
    }

    #[test]
    fn equal_average_density() {
        for f in [HALLWAY_FIXTURE, CHECKERBOARD_FIXTURE] {
            let l = Fixture::parse(f).unwrap().layout;
            let cells = l.width * l.height * l.num_layers();
            assert_eq!(l.patches().len() * 3, cells, "{}", Fixture::parse(f).unwrap().name);
        }
    }

    #[test]
    fn hallway_example_is_infeasible() {
        let f = Fixture::parse(HALLWAY_FIXTURE).unwrap();
        // Each request alone is routable; together they are not, on either layer.
        for r in &f.requests {
            assert!(routable(&f.layout, std::slice::from_ref(r)).unwrap().is_feasible(), "{r}");
        }
        let Routing::Infeasible { certificate } = routable(&f.layout, &f.requests).unwrap() else { panic!() };
        assert_eq!(certificate.refuted_layers, vec![0, 1]);
        assert!(certificate.isolated.is_empty() && certificate.split.is_empty());
        // Full stacks leave no free cell to swap into.
        for budget in 0..=8 {
            assert_eq!(
                plan_with_swaps(&f.layout, &f.requests, budget).unwrap(),
                Plan::Infeasible { budget, states: 1, exhausted: true }
            );
        }
    }

    #[test]
    fn checkerboard_example_needs_four_swaps() {
        let f = Fixture::parse(CHECKERBOARD_FIXTURE).unwrap();
        assert!(!routable(&f.layout, &f.requests).unwrap().is_feasible());
        assert_eq!(plan_with_swaps(&f.layout, &f.requests, 3).unwrap().num_swaps(), None);
        let plan = plan_with_swaps(&f.layout, &f.requests, 8).unwrap();
        let Plan::Found { swaps, paths, .. } = plan else { panic!() };
        assert_eq!(swaps.len(), 4);
        let mut l = f.layout.clone();
        for s in &swaps {
            l.apply_swap(s).unwrap();
        }
        assert_eq!(paths.len(), 4);
        verify_paths(&l, &f.requests, &paths).unwrap();
    }

    /// Unpruned oracle: every simple path of every request, in order.
    fn brute(layout: &LayerStackLayout, reqs: &[MergeRequest]) -> bool {
        fn go(l: &LayerStackLayout, reqs: &[MergeRequest], used: &mut HashSet<Cell>) -> bool {
            let Some(r) = reqs.first() else { return true };
            let (la, ca) = l.locate(r.a).unwrap();
            let (_, cb) = l.locate(r.b).unwrap();
            let touches = |pc: Cell, op: PauliOp, orient: Orientation, c: Cell| {
                DIRS.iter().enumerate().any(|(s, &(dr, dc))| orient.0[s] == op && step(pc, dr, dc, l.width, l.height) == Some(c))
            };
            let oa = l.get(la, ca).unwrap().orientation;
            let ob = l.get(la, cb).unwrap().orientation;
            let ok = |c: Cell, used: &HashSet<Cell>| l.is_free(la, c) && !used.contains(&c);
            fn dfs(
                l: &LayerStackLayout,
                x: Cell,
                path: &mut Vec<Cell>,
                used: &mut HashSet<Cell>,
                end: &dyn Fn(Cell) -> bool,
                ok: &dyn Fn(Cell, &HashSet<Cell>) -> bool,
                rest: &[MergeRequest],
            ) -> bool {
                if end(x) && go(l, rest, used) {
                    return true;
                }
                for (dr, dc) in DIRS {
                    if let Some(y) = step(x, dr, dc, l.width, l.height) {
                        if ok(y, used) {
                            used.insert(y);
                            path.push(y);
                            if dfs(l, y, path, used, end, ok, rest) {
                                return true;
                            }
                            path.pop();
                            used.remove(&y);
                        }
                    }
                }
                false
            }
            let end = |c: Cell| touches(cb, r.op_b, ob, c);
            for r0 in 0..l.height {
                for c0 in 0..l.width {
                    let s = (r0, c0);
                    if ok(s, used) && touches(ca, r.op_a, oa, s) {
                        used.insert(s);
                        if dfs(l, s, &mut vec![s], used, &end, &ok, &reqs[1..]) {
                            return true;
                        }
                        used.remove(&s);
                    }
                }
            }
            false
        }
        go(layout, reqs, &mut HashSet::new())
    }

    #[test]
    fn pruned_search_matches_brute_force() {
        let mut agree = [0usize; 2];
        for seed in 0..400u64 {
            let (lay, reqs, _) = random_instance(seed);
            if lay.width * lay.height > 20 {
                continue;
            }
            let r = routable(&lay, &reqs).unwrap();
            assert_eq!(r.is_feasible(), brute(&lay, &reqs), "seed {seed}");
            if let Routing::Feasible { paths, .. } = &r {
                verify_paths(&lay, &reqs, paths).unwrap();
            }
            agree[r.is_feasible() as usize] += 1;
        }
        assert!(agree[0] > 20 && agree[1] > 20, "{agree:?}");
    }

    #[test]
    fn verifier_rejects_bad_witnesses() {
        let f = Fixture::parse(HALLWAY_FIXTURE).unwrap();
        let reqs = &f.requests[..1];
        let Routing::Feasible { paths, .. } = routable(&f.layout, reqs).unwrap() else { panic!() };
        verify_paths(&f.layout, reqs, &paths).unwrap();
        let mut broken = paths.clone();
        broken[0].cells.pop();
        assert!(verify_paths(&f.layout, reqs, &broken).is_err());
        let mut jumped = paths.clone();
        jumped[0].cells.insert(1, (2, 3));
        assert!(verify_paths(&f.layout, reqs, &jumped).is_err());
        assert!(verify_paths(&f.layout, reqs, &[]).is_err());
    }

    #[test]
    fn containment_counts() {
        // Counts frozen from an independent script that enumerates the same request
        // sets and searches arrangements by plain breadth-first search.
        let a = Fixture::parse(HALLWAY_FIXTURE).unwrap().layout;
        let b = Fixture::parse(CHECKERBOARD_FIXTURE).unwrap().layout;
        let r = containment(Exec::Parallel, &a, &b, 8).unwrap();
        assert_eq!(r.routed_by_reference, 670);
        assert_eq!(r.unserved.len(), 152);
        assert_eq!(r, containment(Exec::Sequential, &a, &b, 8).unwrap());
    }

    #[test]
    fn monotone_under_freed_cells() {
        let r = monotonicity_trials(Exec::Parallel, 1000, 7).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.feasible_before > 100 && r.feasible_before < 900, "{r:?}");
        assert!(r.gained > 0, "{r:?}");
    }

    #[test]
    fn bad_fixture() {
        assert!(matches!(Fixture::parse("name = 1"), Err(Error::Fixture(_))));
        let t = "name='x'\nwidth=2\nheight=1\n[[layers]]\nrole='memory'\ncells=['1:XZXQ .']\n";
        assert!(matches!(Fixture::parse(t), Err(Error::Fixture(_))));
    }
}
