//! Triangular lattice geometry and marked lattice domains.
//!
//! Vertices use integer axial coordinates `(a, b)` embedded as `a + b·ω` with
//! `ω = e^{iπ/3}`. All combinatorial work (adjacency, point location, domain
//! construction) is done in exact integer arithmetic; floating point appears
//! only when a caller asks for an embedded position.
//!
//! A [`LatticeDomain`] is the closure of a simply connected region bounded by
//! a simple closed lattice cycle, together with two marked boundary edges:
//! the start edge (whose midpoint is the starting point of the exploration)
//! and the end edge. The counterclockwise boundary arc from the start to the
//! end carries the value 1, the other arc carries 0.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use thiserror::Error;

/// Axial offsets of the six lattice neighbours, in counterclockwise order
/// starting from the positive real direction.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("vertices {0} and {1} are not lattice neighbours")]
    NotAdjacent(LatticeVertex, LatticeVertex),
    #[error("triangle {triangle:?} does not border edge {edge}")]
    TriangleMismatch { triangle: Triangle, edge: EdgeMidpoint },
    #[error("edge {0} does not border the domain interior")]
    OuterEdge(EdgeMidpoint),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("degenerate dimensions: {0}")]
    Degenerate(String),
    #[error("domain file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A vertex of the triangular grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct LatticeVertex {
    pub a: i32,
    pub b: i32,
}

impl LatticeVertex {
    pub const fn new(a: i32, b: i32) -> Self {
        Self { a, b }
    }

    /// Embedded position `a + b·e^{iπ/3}`.
    pub fn embed(self) -> Complex64 {
        Complex64::new(self.a as f64 + 0.5 * self.b as f64, SQRT3_2 * self.b as f64)
    }

    pub fn offset(self, dir: usize) -> Self {
        let (da, db) = NEIGHBOR_OFFSETS[dir % 6];
        Self::new(self.a + da, self.b + db)
    }

    pub fn neighbors(self) -> [LatticeVertex; 6] {
        std::array::from_fn(|k| self.offset(k))
    }

    /// Index into [`NEIGHBOR_OFFSETS`] of the step from `self` to `other`.
    pub fn direction_to(self, other: LatticeVertex) -> Option<usize> {
        let d = (other.a - self.a, other.b - self.b);
        NEIGHBOR_OFFSETS.iter().position(|&o| o == d)
    }

    pub fn is_adjacent(self, other: LatticeVertex) -> bool {
        self.direction_to(other).is_some()
    }

    /// Row-major ordering key (row first, then position along the row).
    pub(crate) fn row_major(self) -> (i32, i32) {
        (self.b, self.a)
    }
}

impl fmt::Display for LatticeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// An oriented lattice edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedEdge {
    pub tail: LatticeVertex,
    pub head: LatticeVertex,
}

impl DirectedEdge {
    pub fn new(tail: LatticeVertex, head: LatticeVertex) -> Result<Self, LatticeError> {
        if !tail.is_adjacent(head) {
            return Err(LatticeError::NotAdjacent(tail, head));
        }
        Ok(Self { tail, head })
    }

    pub fn rev(self) -> Self {
        Self { tail: self.head, head: self.tail }
    }

    pub fn midpoint(self) -> EdgeMidpoint {
        EdgeMidpoint::from_ordered(self.tail, self.head)
    }
}

/// The midpoint of an (unoriented) lattice edge. Endpoints are stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeMidpoint {
    u: LatticeVertex,
    v: LatticeVertex,
}

impl EdgeMidpoint {
    pub fn new(u: LatticeVertex, v: LatticeVertex) -> Result<Self, LatticeError> {
        if !u.is_adjacent(v) {
            return Err(LatticeError::NotAdjacent(u, v));
        }
        Ok(Self::from_ordered(u, v))
    }

    fn from_ordered(u: LatticeVertex, v: LatticeVertex) -> Self {
        if u <= v {
            Self { u, v }
        } else {
            Self { u: v, v: u }
        }
    }

    pub fn endpoints(self) -> (LatticeVertex, LatticeVertex) {
        (self.u, self.v)
    }

    pub fn has_endpoint(self, x: LatticeVertex) -> bool {
        self.u == x || self.v == x
    }

    pub fn position(self) -> Complex64 {
        (self.u.embed() + self.v.embed()) * 0.5
    }
}

impl fmt::Display for EdgeMidpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}]", self.u, self.v)
    }
}

/// A face of the grid: either the "up" triangle `{p, p+(1,0), p+(0,1)}` or
/// the "down" triangle `{p, p+(1,-1), p+(1,0)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle {
    pub base: LatticeVertex,
    pub up: bool,
}

impl Triangle {
    /// Vertices in counterclockwise order.
    pub fn vertices(self) -> [LatticeVertex; 3] {
        let p = self.base;
        if self.up {
            [p, LatticeVertex::new(p.a + 1, p.b), LatticeVertex::new(p.a, p.b + 1)]
        } else {
            [p, LatticeVertex::new(p.a + 1, p.b - 1), LatticeVertex::new(p.a + 1, p.b)]
        }
    }

    pub fn from_vertices(vs: [LatticeVertex; 3]) -> Option<Self> {
        for &p in &vs {
            for up in [true, false] {
                let t = Triangle { base: p, up };
                let mut tv = t.vertices();
                let mut given = vs;
                tv.sort();
                given.sort();
                if tv == given {
                    return Some(t);
                }
            }
        }
        None
    }

    pub fn contains_vertex(self, x: LatticeVertex) -> bool {
        self.vertices().contains(&x)
    }

    pub fn has_edge(self, m: EdgeMidpoint) -> bool {
        let (u, v) = m.endpoints();
        self.contains_vertex(u) && self.contains_vertex(v)
    }

    /// The vertex not on edge `m`.
    pub fn opposite(self, m: EdgeMidpoint) -> Option<LatticeVertex> {
        if !self.has_edge(m) {
            return None;
        }
        self.vertices().into_iter().find(|&x| !m.has_endpoint(x))
    }

    pub fn centroid(self) -> Complex64 {
        let [p, q, r] = self.vertices();
        (p.embed() + q.embed() + r.embed()) / 3.0
    }

    pub fn midpoints(self) -> [EdgeMidpoint; 3] {
        let [p, q, r] = self.vertices();
        [
            EdgeMidpoint::from_ordered(p, q),
            EdgeMidpoint::from_ordered(q, r),
            EdgeMidpoint::from_ordered(r, p),
        ]
    }

    /// The two triangles bordering an edge.
    pub fn bordering(m: EdgeMidpoint) -> [Triangle; 2] {
        let (u, v) = m.endpoints();
        let k = u.direction_to(v).expect("midpoint endpoints are adjacent");
        let w1 = u.offset(k + 1);
        let w2 = u.offset(k + 5);
        [
            Triangle::from_vertices([u, v, w1]).expect("lattice triangle"),
            Triangle::from_vertices([u, v, w2]).expect("lattice triangle"),
        ]
    }

    /// The triangle on the other side of `m` from `previous`.
    pub fn across(m: EdgeMidpoint, previous: Triangle) -> Result<Triangle, LatticeError> {
        let [t1, t2] = Self::bordering(m);
        if previous == t1 {
            Ok(t2)
        } else if previous == t2 {
            Ok(t1)
        } else {
            Err(LatticeError::TriangleMismatch { triangle: previous, edge: m })
        }
    }
}

/// Where an edge lies relative to a domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// The open edge lies in the open domain.
    Inside,
    /// The edge is part of the boundary cycle.
    OnBoundary,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Interior,
    Boundary,
}

/// Dense lookup from lattice coordinates to a domain vertex index.
#[derive(Clone, Debug)]
struct VertexIndex {
    amin: i32,
    bmin: i32,
    na: usize,
    nb: usize,
    slots: Vec<u32>,
}

impl VertexIndex {
    const EMPTY: u32 = u32::MAX;

    fn new(vertices: &[LatticeVertex]) -> Self {
        let amin = vertices.iter().map(|v| v.a).min().unwrap_or(0);
        let amax = vertices.iter().map(|v| v.a).max().unwrap_or(0);
        let bmin = vertices.iter().map(|v| v.b).min().unwrap_or(0);
        let bmax = vertices.iter().map(|v| v.b).max().unwrap_or(0);
        let na = (amax - amin + 1) as usize;
        let nb = (bmax - bmin + 1) as usize;
        let mut slots = vec![Self::EMPTY; na * nb];
        for (i, v) in vertices.iter().enumerate() {
            slots[(v.a - amin) as usize + (v.b - bmin) as usize * na] = i as u32;
        }
        Self { amin, bmin, na, nb, slots }
    }

    fn get(&self, v: LatticeVertex) -> Option<usize> {
        let da = v.a - self.amin;
        let db = v.b - self.bmin;
        if da < 0 || db < 0 || da as usize >= self.na || db as usize >= self.nb {
            return None;
        }
        match self.slots[da as usize + db as usize * self.na] {
            Self::EMPTY => None,
            i => Some(i as usize),
        }
    }
}

/// A simply connected lattice domain with marked start and end edges.
///
/// Vertex indices: `0..n_interior()` are interior vertices in row-major order,
/// followed by the boundary cycle in counterclockwise order. The cycle starts
/// at the counterclockwise endpoint of the start edge, so the start edge is
/// `(boundary[n-1], boundary[0])`.
#[derive(Clone, Debug)]
pub struct LatticeDomain {
    boundary: Vec<LatticeVertex>,
    interior: Vec<LatticeVertex>,
    v_start: EdgeMidpoint,
    v_end: EdgeMidpoint,
    /// The end edge is `(boundary[end_pos], boundary[end_pos + 1])`.
    end_pos: usize,
    index: VertexIndex,
    interior_neighbors: Vec<[u32; 6]>,
    triangle_count: usize,
}

impl LatticeDomain {
    /// Builds a domain from a boundary cycle (either orientation) and the two
    /// marked boundary edges.
    pub fn new(
        cycle: Vec<LatticeVertex>,
        v_start: EdgeMidpoint,
        v_end: EdgeMidpoint,
    ) -> Result<Self, LatticeError> {
        let n = cycle.len();
        if n < 3 {
            return Err(LatticeError::InvalidDomain("boundary cycle needs at least 3 vertices".into()));
        }
        let mut seen = HashSet::with_capacity(n);
        for &v in &cycle {
            if !seen.insert(v) {
                return Err(LatticeError::InvalidDomain(format!("boundary visits {v} twice")));
            }
        }
        for i in 0..n {
            let (p, q) = (cycle[i], cycle[(i + 1) % n]);
            if !p.is_adjacent(q) {
                return Err(LatticeError::InvalidDomain(format!(
                    "consecutive boundary vertices {p} and {q} are not adjacent"
                )));
            }
        }
        if v_start == v_end {
            return Err(LatticeError::InvalidDomain("start and end edges coincide".into()));
        }

        let mut cycle = cycle;
        if signed_area2(&cycle) < 0 {
            cycle.reverse();
        }
        let edge_pos = |cycle: &[LatticeVertex], m: EdgeMidpoint| {
            (0..n).find(|&i| EdgeMidpoint::from_ordered(cycle[i], cycle[(i + 1) % n]) == m)
        };
        let start_pos = edge_pos(&cycle, v_start).ok_or_else(|| {
            LatticeError::InvalidDomain(format!("start edge {v_start} is not a boundary edge"))
        })?;
        edge_pos(&cycle, v_end).ok_or_else(|| {
            LatticeError::InvalidDomain(format!("end edge {v_end} is not a boundary edge"))
        })?;
        cycle.rotate_left((start_pos + 1) % n);
        let end_pos = edge_pos(&cycle, v_end).expect("end edge survives rotation");
        debug_assert_eq!(EdgeMidpoint::from_ordered(cycle[n - 1], cycle[0]), v_start);

        let interior = scan_interior(&cycle);
        if interior.is_empty() {
            return Err(LatticeError::InvalidDomain("domain has no interior vertices".into()));
        }
        let mut all = interior.clone();
        all.extend_from_slice(&cycle);
        let index = VertexIndex::new(&all);

        // Connectivity of the interior.
        let ni = interior.len();
        let mut reached = vec![false; ni];
        let mut queue = VecDeque::from([0usize]);
        reached[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for w in interior[i].neighbors() {
                if let Some(j) = index.get(w) {
                    if j < ni && !reached[j] {
                        reached[j] = true;
                        count += 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        if count != ni {
            return Err(LatticeError::InvalidDomain("interior is not connected".into()));
        }

        let mut interior_neighbors = Vec::with_capacity(ni);
        for v in &interior {
            let mut nb = [0u32; 6];
            for (k, w) in v.neighbors().into_iter().enumerate() {
                let j = index.get(w).ok_or_else(|| {
                    LatticeError::InvalidDomain(format!("interior vertex {v} has neighbour {w} outside the domain"))
                })?;
                nb[k] = j as u32;
            }
            interior_neighbors.push(nb);
        }

        let mut domain = Self {
            boundary: cycle,
            interior,
            v_start,
            v_end,
            end_pos,
            index,
            interior_neighbors,
            triangle_count: 0,
        };
        domain.triangle_count = domain.triangles().len();
        Ok(domain)
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn interior(&self) -> &[LatticeVertex] {
        &self.interior
    }

    /// Boundary cycle, counterclockwise, starting right after the start edge.
    pub fn boundary_cycle(&self) -> &[LatticeVertex] {
        &self.boundary
    }

    pub fn v_start(&self) -> EdgeMidpoint {
        self.v_start
    }

    pub fn v_end(&self) -> EdgeMidpoint {
        self.v_end
    }

    pub fn vertex(&self, idx: usize) -> LatticeVertex {
        if idx < self.interior.len() {
            self.interior[idx]
        } else {
            self.boundary[idx - self.interior.len()]
        }
    }

    pub fn index_of(&self, v: LatticeVertex) -> Option<usize> {
        self.index.get(v)
    }

    pub fn kind(&self, idx: usize) -> VertexKind {
        if idx < self.interior.len() {
            VertexKind::Interior
        } else {
            VertexKind::Boundary
        }
    }

    pub fn is_interior_index(&self, idx: usize) -> bool {
        idx < self.interior.len()
    }

    /// Neighbour indices of an interior vertex (all six lie in the closed domain).
    pub fn interior_neighbors(&self, idx: usize) -> &[u32; 6] {
        &self.interior_neighbors[idx]
    }

    /// Boundary value `h0` of a boundary vertex index, `None` for interior vertices.
    pub fn h0_at(&self, idx: usize) -> Option<u8> {
        let ni = self.interior.len();
        if idx < ni {
            None
        } else {
            Some(u8::from(idx - ni <= self.end_pos))
        }
    }

    pub fn h0(&self, v: LatticeVertex) -> Option<u8> {
        self.index_of(v).and_then(|i| self.h0_at(i))
    }

    /// The positively oriented arc, as a vertex path from the start edge to
    /// the end edge (both split edges included).
    pub fn arc_plus(&self) -> Vec<LatticeVertex> {
        let n = self.boundary.len();
        let mut arc = vec![self.boundary[n - 1]];
        arc.extend_from_slice(&self.boundary[..=self.end_pos + 1]);
        arc
    }

    /// The negatively oriented arc, as a vertex path from the end edge around
    /// to the start edge (both split edges included).
    pub fn arc_minus(&self) -> Vec<LatticeVertex> {
        let mut arc = self.boundary[self.end_pos..].to_vec();
        arc.push(self.boundary[0]);
        arc
    }

    /// Embedded boundary polygon.
    pub fn polygon(&self) -> Vec<Complex64> {
        self.boundary.iter().map(|v| v.embed()).collect()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    /// Position of a boundary vertex along the cycle.
    pub fn boundary_position(&self, v: LatticeVertex) -> Option<usize> {
        self.index_of(v).filter(|&i| i >= self.interior.len()).map(|i| i - self.interior.len())
    }

    pub fn edge_kind(&self, u: LatticeVertex, v: LatticeVertex) -> EdgeKind {
        if !u.is_adjacent(v) {
            return EdgeKind::Outside;
        }
        let (Some(iu), Some(iv)) = (self.index_of(u), self.index_of(v)) else {
            return EdgeKind::Outside;
        };
        let ni = self.interior.len();
        if iu < ni || iv < ni {
            return EdgeKind::Inside;
        }
        let n = self.boundary.len();
        let (pu, pv) = (iu - ni, iv - ni);
        if (pu + 1) % n == pv || (pv + 1) % n == pu {
            return EdgeKind::OnBoundary;
        }
        // A chord between two boundary vertices: locate its midpoint.
        let pa = (u.a + v.a) as i64;
        let pb = (u.b + v.b) as i64;
        if inside_scaled(&self.boundary, pa, pb, 2) {
            EdgeKind::Inside
        } else {
            EdgeKind::Outside
        }
    }

    /// Whether a triangle's interior lies in the domain.
    pub fn contains_triangle(&self, t: Triangle) -> bool {
        let vs = t.vertices();
        let mut idx = [0usize; 3];
        for (k, v) in vs.iter().enumerate() {
            match self.index_of(*v) {
                Some(i) => idx[k] = i,
                None => return false,
            }
        }
        if idx.iter().any(|&i| i < self.interior.len()) {
            return true;
        }
        let pa: i64 = vs.iter().map(|v| v.a as i64).sum();
        let pb: i64 = vs.iter().map(|v| v.b as i64).sum();
        inside_scaled(&self.boundary, pa, pb, 3)
    }

    /// All triangles of the grid contained in the domain.
    pub fn triangles(&self) -> Vec<Triangle> {
        let mut out = Vec::new();
        for i in 0..self.n_vertices() {
            let p = self.vertex(i);
            for up in [true, false] {
                let t = Triangle { base: p, up };
                if self.contains_triangle(t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// The triangle across `m` from `previous`; with no previous triangle,
    /// the unique triangle inside the domain bordering the boundary edge `m`.
    pub fn triangle_across(&self, m: EdgeMidpoint, previous: Option<Triangle>) -> Result<Triangle, LatticeError> {
        match previous {
            Some(prev) => Triangle::across(m, prev),
            None => {
                let inside: Vec<Triangle> =
                    Triangle::bordering(m).into_iter().filter(|&t| self.contains_triangle(t)).collect();
                match inside.as_slice() {
                    [t] => Ok(*t),
                    [] => Err(LatticeError::OuterEdge(m)),
                    _ => Err(LatticeError::InvalidDomain(format!(
                        "edge {m} is not a boundary edge; a previous triangle is required"
                    ))),
                }
            }
        }
    }

    /// Whether `z` lies in the open domain.
    pub fn contains_point(&self, z: Complex64) -> bool {
        let poly = self.polygon();
        if distance_to_polygon(&poly, z) <= 1e-12 {
            return false;
        }
        point_in_polygon(&poly, z)
    }

    /// Distance from `z` to the complement of the open domain.
    pub fn inradius(&self, z: Complex64) -> f64 {
        let poly = self.polygon();
        if !point_in_polygon(&poly, z) {
            return 0.0;
        }
        distance_to_polygon(&poly, z)
    }

    /// Mirror-symmetric box-like domain: `width` vertices in even rows,
    /// `height` row steps. The start edge is the bottom-row edge whose left
    /// endpoint is the `split_offset`-th vertex of the row; the end edge is the
    /// top-row edge closest to directly above it.
    pub fn build_box(width: usize, height: usize, split_offset: usize) -> Result<Self, LatticeError> {
        if width < 4 || height < 2 {
            return Err(LatticeError::Degenerate(format!("box {width}x{height} (need width >= 4, height >= 2)")));
        }
        if split_offset + 1 >= width {
            return Err(LatticeError::Degenerate(format!(
                "split offset {split_offset} outside bottom row of width {width}"
            )));
        }
        let w = width as i32;
        let h = height as i32;
        // Row r holds the points with doubled abscissa X = 2a + r in
        // {0, 2, .., 2w-2} for even r and {-1, 1, .., 2w-1} for odd r.
        let row = |r: i32| -> Vec<LatticeVertex> {
            let (lo, hi) = if r % 2 == 0 { (0, 2 * w - 2) } else { (-1, 2 * w - 1) };
            (lo..=hi).step_by(2).map(|x| LatticeVertex::new((x - r).div_euclid(2), r)).collect()
        };
        let mut cycle = row(0);
        for r in 1..h {
            cycle.push(*row(r).last().unwrap());
        }
        let mut top = row(h);
        top.reverse();
        cycle.extend(top);
        for r in (1..h).rev() {
            cycle.push(row(r)[0]);
        }

        let bottom = row(0);
        let v_start = EdgeMidpoint::new(bottom[split_offset], bottom[split_offset + 1])?;
        let axis2 = 2 * bottom[split_offset].a + 1; // doubled abscissa of the start midpoint
        let top_row = row(h);
        let end_left = top_row
            .windows(2)
            .min_by_key(|pair| {
                let x2 = pair[0].a * 2 + h + 1;
                ((x2 - axis2).abs(), -(x2))
            })
            .map(|pair| (pair[0], pair[1]))
            .expect("top row has at least two vertices");
        let v_end = EdgeMidpoint::new(end_left.0, end_left.1)?;
        Self::new(cycle, v_start, v_end)
    }

    /// Split offset that puts the start edge on the vertical symmetry axis
    /// (exact for even widths).
    pub fn centered_split(width: usize) -> usize {
        width / 2 - 1
    }

    /// Regular lattice hexagon of the given radius centred at the origin; the
    /// start edge is the middle edge of the bottom side and the end edge its
    /// point reflection on the top side.
    pub fn build_hexagon(radius: usize) -> Result<Self, LatticeError> {
        if radius < 2 {
            return Err(LatticeError::Degenerate(format!("hexagon radius {radius} (need >= 2)")));
        }
        let r = radius as i32;
        // Walk the ring at hex distance r starting at the bottom-left corner (0, -r).
        let mut cycle = Vec::with_capacity(6 * radius);
        let mut p = LatticeVertex::new(0, -r);
        for dir in 0..6 {
            for _ in 0..r {
                cycle.push(p);
                p = p.offset(dir);
            }
        }
        let k = (r - 1) / 2;
        let v_start = EdgeMidpoint::new(LatticeVertex::new(k, -r), LatticeVertex::new(k + 1, -r))?;
        let v_end = EdgeMidpoint::new(LatticeVertex::new(-k - 1, r), LatticeVertex::new(-k, r))?;
        Self::new(cycle, v_start, v_end)
    }

    /// Reads a `HEDOM 1` domain description.
    pub fn read_hedom<R: BufRead>(reader: R) -> Result<Self, LatticeError> {
        let mut header_seen = false;
        let mut cycle = Vec::new();
        let mut values = Vec::new();
        let mut v_start = None;
        let mut v_end = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            let perr = |msg: &str| LatticeError::Parse { line: lineno, msg: msg.to_string() };
            if !header_seen {
                if fields != ["HEDOM", "1"] {
                    return Err(perr("expected header `HEDOM 1`"));
                }
                header_seen = true;
                continue;
            }
            let ints = |slice: &[&str]| -> Result<Vec<i32>, LatticeError> {
                slice.iter().map(|s| s.parse::<i32>().map_err(|_| perr(&format!("bad integer `{s}`")))).collect()
            };
            match fields[0] {
                "VSTART" | "VEND" => {
                    if fields.len() != 5 {
                        return Err(perr("edge line needs four integers"));
                    }
                    let c = ints(&fields[1..])?;
                    let m = EdgeMidpoint::new(LatticeVertex::new(c[0], c[1]), LatticeVertex::new(c[2], c[3]))
                        .map_err(|e| perr(&e.to_string()))?;
                    if fields[0] == "VSTART" {
                        v_start = Some(m);
                    } else {
                        v_end = Some(m);
                    }
                }
                _ => {
                    if fields.len() != 3 {
                        return Err(perr("vertex line needs `a b h0`"));
                    }
                    let c = ints(&fields)?;
                    if c[2] != 0 && c[2] != 1 {
                        return Err(perr("h0 must be 0 or 1"));
                    }
                    cycle.push(LatticeVertex::new(c[0], c[1]));
                    values.push(c[2] as u8);
                }
            }
        }
        if !header_seen {
            return Err(LatticeError::Parse { line: 0, msg: "empty domain file".into() });
        }
        let v_start = v_start.ok_or(LatticeError::Parse { line: 0, msg: "missing VSTART".into() })?;
        let v_end = v_end.ok_or(LatticeError::Parse { line: 0, msg: "missing VEND".into() })?;
        let domain = Self::new(cycle.clone(), v_start, v_end)?;
        for (v, h) in cycle.iter().zip(values) {
            if domain.h0(*v) != Some(h) {
                return Err(LatticeError::InvalidDomain(format!("h0 at {v} disagrees with its boundary arc")));
            }
        }
        Ok(domain)
    }

    /// Writes the `HEDOM 1` description (canonical cycle order).
    pub fn write_hedom<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "HEDOM 1")?;
        let (s1, s2) = self.v_start.endpoints();
        let (e1, e2) = self.v_end.endpoints();
        writeln!(out, "VSTART {} {} {} {}", s1.a, s1.b, s2.a, s2.b)?;
        writeln!(out, "VEND {} {} {} {}", e1.a, e1.b, e2.a, e2.b)?;
        for (i, v) in self.boundary.iter().enumerate() {
            let h = u8::from(i <= self.end_pos);
            writeln!(out, "{} {} {}", v.a, v.b, h)?;
        }
        Ok(())
    }
}

/// Twice the signed area of a lattice polygon in axial coordinates (the
/// embedding has positive determinant, so the sign matches the embedded one).
fn signed_area2(cycle: &[LatticeVertex]) -> i64 {
    let n = cycle.len();
    (0..n)
        .map(|i| {
            let p = cycle[i];
            let q = cycle[(i + 1) % n];
            p.a as i64 * q.b as i64 - q.a as i64 * p.b as i64
        })
        .sum()
}

/// Crossing-number test for the point `(pa/s, pb/s)` in axial coordinates.
/// The point must not lie on the polygon.
fn inside_scaled(cycle: &[LatticeVertex], pa: i64, pb: i64, s: i64) -> bool {
    let n = cycle.len();
    let mut inside = false;
    for i in 0..n {
        let (p, q) = (cycle[i], cycle[(i + 1) % n]);
        let (a1, b1) = (p.a as i64 * s, p.b as i64 * s);
        let (a2, b2) = (q.a as i64 * s, q.b as i64 * s);
        if (b1 > pb) != (b2 > pb) {
            // pa < a1 + (pb - b1) (a2 - a1) / (b2 - b1)
            let lhs = (pa - a1) * (b2 - b1);
            let rhs = (pb - b1) * (a2 - a1);
            let crosses = if b2 > b1 { lhs < rhs } else { lhs > rhs };
            if crosses {
                inside = !inside;
            }
        }
    }
    inside
}

/// Lattice points strictly inside a cycle, in row-major order.
fn scan_interior(cycle: &[LatticeVertex]) -> Vec<LatticeVertex> {
    let n = cycle.len();
    let on_cycle: HashSet<LatticeVertex> = cycle.iter().copied().collect();
    let bmin = cycle.iter().map(|v| v.b).min().unwrap();
    let bmax = cycle.iter().map(|v| v.b).max().unwrap();
    let mut out = Vec::new();
    for b in bmin..=bmax {
        // Edges leaving row b upward cross the ray y = b + 0 at their row-b end.
        let mut crossings: Vec<i32> = Vec::new();
        for i in 0..n {
            let (p, q) = (cycle[i], cycle[(i + 1) % n]);
            if (p.b > b) != (q.b > b) {
                crossings.push(if p.b == b { p.a } else { q.a });
            }
        }
        crossings.sort_unstable();
        for pair in crossings.chunks(2) {
            if let [lo, hi] = pair {
                for a in *lo..=*hi {
                    let v = LatticeVertex::new(a, b);
                    if !on_cycle.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
    }
    out.sort_by_key(|v| v.row_major());
    out.dedup();
    out
}

pub(crate) fn point_in_polygon(poly: &[Complex64], z: Complex64) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        if (p.im > z.im) != (q.im > z.im) {
            let x = p.re + (z.im - p.im) * (q.re - p.re) / (q.im - p.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn segment_distance(z: Complex64, p: Complex64, q: Complex64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - p).norm();
    }
    let t = ((z - p).re * d.re + (z - p).im * d.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (p + d * t)).norm()
}

fn distance_to_polygon(poly: &[Complex64], z: Complex64) -> f64 {
    let n = poly.len();
    (0..n).map(|i| segment_distance(z, poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}
