//! Hexagonal aperture geometry on a triangular (honeycomb) lattice.
//!
//! A regular hexagonal aperture with `rings` unit triangles per side is
//! subdivided into `N = 6 * rings^2` equilateral triangles. The module builds
//! the full vertex/edge graph, the canonical edge orientations, the
//! tiling-independent boundary height values, and one radiating-element
//! position per triangle (its centroid).
//!
//! Conventions baked into the geometry:
//!
//! * the hexagon has flat top and bottom sides, centered on the origin;
//! * lengths are stored in wavelengths, so the wavenumber is `2 * PI`;
//! * vertices live on the integer lattice `(ix, iy)` with position
//!   `(ix * cell_side / 2, iy * cell_side * sqrt(3) / 2)`;
//! * every lattice edge is oriented so that point-up triangles are traversed
//!   counterclockwise (equivalently point-down triangles clockwise), which
//!   pins each edge direction to 0, 120 or 240 degrees.

use std::collections::HashMap;

use thiserror::Error;

/// Errors from aperture construction.
#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("rings must be at least 1")]
    ZeroRings,
    #[error("cell side must be positive, got {0}")]
    NonPositiveCellSide(f64),
    #[error("boundary height walk did not close (lattice orientation bug)")]
    OpenBoundaryWalk,
}

/// Whether a triangle points up (white) or down (black).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pointing {
    Up,
    Down,
}

/// Vertex classification within the aperture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    /// Interior vertex with its raster rank (bottom-left to top-right).
    Internal(usize),
    /// Boundary vertex with its rank along the clockwise walk from the
    /// bottom-left corner.
    External(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct Vertex {
    /// Integer lattice coordinates (half cell sides in x, triangle heights in y).
    pub ix: i32,
    pub iy: i32,
    pub kind: VertexKind,
}

/// One unit triangle of the aperture.
#[derive(Debug, Clone)]
pub struct Triangle {
    /// Canonical raster index.
    pub index: usize,
    /// Row `s` in `-rings..=-1, 1..=rings` (bottom to top, no row 0).
    pub row: i32,
    /// Centered in-row index `r` in `-(N_s - 1)/2 ..= (N_s - 1)/2`.
    pub col: i32,
    pub pointing: Pointing,
    /// Vertex ids; base pair first (left, right), apex last.
    pub vertices: [usize; 3],
    /// Edge ids opposite nothing in particular; `edges[k]` joins
    /// `vertices[k]` and `vertices[(k + 1) % 3]`.
    pub edges: [usize; 3],
    /// Neighbor across `edges[k]`, if that edge is interior.
    pub neighbors: [Option<usize>; 3],
    /// Element position in wavelengths.
    pub centroid: (f64, f64),
}

/// Lattice edge with its canonical orientation.
#[derive(Debug, Clone, Copy)]
pub struct OrientedEdge {
    pub tail: usize,
    pub head: usize,
    /// Incident triangles; interior edges have two.
    pub triangles: (usize, Option<usize>),
    /// True when the edge lies on the aperture boundary.
    pub on_boundary: bool,
}

impl OrientedEdge {
    pub fn is_interior(&self) -> bool {
        self.triangles.1.is_some()
    }

    pub fn other_end(&self, v: usize) -> usize {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }
}

/// Tiling-independent height values of the boundary vertices, in clockwise
/// walk order starting from the bottom-left corner. The first value is zero
/// and consecutive values differ by exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryHeights {
    values: Vec<i64>,
}

impl BoundaryHeights {
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn get(&self, external_rank: usize) -> i64 {
        self.values[external_rank]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Immutable hexagonal aperture: lattice graph, triangles, element positions,
/// boundary heights and vertex depths. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct HexAperture {
    rings: u32,
    cell_side: f64,
    vertices: Vec<Vertex>,
    /// Vertex ids of internal vertices in raster order.
    internal: Vec<usize>,
    /// Vertex ids of external vertices in clockwise walk order.
    external: Vec<usize>,
    triangles: Vec<Triangle>,
    edges: Vec<OrientedEdge>,
    /// Incident edge ids per vertex.
    edges_at: Vec<Vec<usize>>,
    boundary: BoundaryHeights,
    /// Graph distance from each internal vertex (by rank) to the boundary.
    depths: Vec<u32>,
}

impl HexAperture {
    /// Builds the aperture for the given number of rings (triangles per
    /// hexagon side) and unit cell side in wavelengths.
    pub fn new(rings: u32, cell_side: f64) -> Result<Self, LatticeError> {
        if rings == 0 {
            return Err(LatticeError::ZeroRings);
        }
        if !cell_side.is_finite() || cell_side <= 0.0 {
            return Err(LatticeError::NonPositiveCellSide(cell_side));
        }
        let n = rings as i32;

        // Vertex lattice, raster order (iy then ix) so internal ranks come
        // out bottom-left to top-right for free.
        let mut vertices = Vec::new();
        let mut by_coord = HashMap::new();
        let mut internal = Vec::new();
        for iy in -n..=n {
            let half_width = 2 * n - iy.abs();
            let mut ix = -half_width;
            while ix <= half_width {
                let on_boundary = iy.abs() == n || ix.abs() == half_width;
                let id = vertices.len();
                let kind = if on_boundary {
                    VertexKind::External(usize::MAX) // rank patched below
                } else {
                    let rank = internal.len();
                    internal.push(id);
                    VertexKind::Internal(rank)
                };
                vertices.push(Vertex { ix, iy, kind });
                by_coord.insert((ix, iy), id);
                ix += 2;
            }
        }

        // Clockwise boundary walk from the bottom-left corner: up the two
        // left sides, across the top, down the two right sides, back along
        // the bottom.
        let mut external = Vec::new();
        let mut cursor = (-n, -n);
        for (dx, dy) in [(-1, 1), (1, 1), (2, 0), (1, -1), (-1, -1), (-2, 0)] {
            for _ in 0..n {
                let id = by_coord[&cursor];
                let rank = external.len();
                vertices[id].kind = VertexKind::External(rank);
                external.push(id);
                cursor = (cursor.0 + dx, cursor.1 + dy);
            }
        }
        debug_assert_eq!(cursor, (-n, -n));

        // Triangles row by row. Rows above the axis have the long edge of the
        // strip at the bottom; mirrored below.
        let mut triangles = Vec::new();
        let mut edges: Vec<OrientedEdge> = Vec::new();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let rows: Vec<i32> = (-n..=n).filter(|s| *s != 0).collect();
        for &s in &rows {
            let b = 2 * n - s.abs() + 1;
            let count = 2 * b - 1;
            for i in 0..count {
                let (pointing, verts) = if s > 0 {
                    let (y0, y1) = (s - 1, s);
                    if i % 2 == 0 {
                        (Pointing::Up, [(-b + i, y0), (-b + i + 2, y0), (-b + i + 1, y1)])
                    } else {
                        (Pointing::Down, [(-b + i, y1), (-b + i + 2, y1), (-b + i + 1, y0)])
                    }
                } else {
                    let (y0, y1) = (s, s + 1);
                    if i % 2 == 0 {
                        (Pointing::Down, [(-b + i, y1), (-b + i + 2, y1), (-b + i + 1, y0)])
                    } else {
                        (Pointing::Up, [(-b + i, y0), (-b + i + 2, y0), (-b + i + 1, y1)])
                    }
                };
                let index = triangles.len();
                let vids = verts.map(|c| by_coord[&c]);
                let cx: i32 = verts.iter().map(|c| c.0).sum();
                let cy: i32 = verts.iter().map(|c| c.1).sum();
                let centroid = (
                    cx as f64 / 3.0 * cell_side / 2.0,
                    cy as f64 / 3.0 * cell_side * 3f64.sqrt() / 2.0,
                );
                let mut tri_edges = [usize::MAX; 3];
                for k in 0..3 {
                    let (a, bb) = (vids[k], vids[(k + 1) % 3]);
                    let key = (a.min(bb), a.max(bb));
                    let eid = *edge_ids.entry(key).or_insert_with(|| {
                        let (tail, head) = orient(&vertices[a], &vertices[bb], a, bb);
                        edges.push(OrientedEdge {
                            tail,
                            head,
                            triangles: (index, None),
                            on_boundary: false,
                        });
                        edges.len() - 1
                    });
                    if edges[eid].triangles.0 != index {
                        edges[eid].triangles.1 = Some(index);
                    }
                    tri_edges[k] = eid;
                }
                triangles.push(Triangle {
                    index,
                    row: s,
                    col: i - (count - 1) / 2,
                    pointing,
                    vertices: vids,
                    edges: tri_edges,
                    neighbors: [None; 3],
                    centroid,
                });
            }
        }

        for e in &mut edges {
            e.on_boundary = e.triangles.1.is_none();
        }
        for t in 0..triangles.len() {
            for k in 0..3 {
                let e = &edges[triangles[t].edges[k]];
                triangles[t].neighbors[k] = match e.triangles {
                    (a, Some(b)) if a == t => Some(b),
                    (a, Some(_)) if a != t => Some(e.triangles.0),
                    _ => None,
                };
            }
        }

        let mut edges_at = vec![Vec::new(); vertices.len()];
        for (eid, e) in edges.iter().enumerate() {
            edges_at[e.tail].push(eid);
            edges_at[e.head].push(eid);
        }

        let boundary = walk_boundary(&vertices, &external, &edges, &edges_at)?;
        let depths = boundary_distances(&vertices, &internal, &external, &edges, &edges_at);

        Ok(Self {
            rings,
            cell_side,
            vertices,
            internal,
            external,
            triangles,
            edges,
            edges_at,
            boundary,
            depths,
        })
    }

    pub fn rings(&self) -> u32 {
        self.rings
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    /// Number of triangles `N = 6 * rings^2`.
    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Number of internal vertices `L = 3 * rings^2 - 3 * rings + 1`.
    pub fn internal_count(&self) -> usize {
        self.internal.len()
    }

    /// Number of boundary vertices `M = 6 * rings`.
    pub fn external_count(&self) -> usize {
        self.external.len()
    }

    /// Number of diamond tiles in a complete tiling, `Q = N / 2`.
    pub fn tile_count(&self) -> usize {
        self.triangles.len() / 2
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle(&self, index: usize) -> &Triangle {
        &self.triangles[index]
    }

    pub fn edges(&self) -> &[OrientedEdge] {
        &self.edges
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Vertex ids of internal vertices, raster order.
    pub fn internal_vertices(&self) -> &[usize] {
        &self.internal
    }

    /// Vertex ids of external vertices, clockwise from the bottom-left corner.
    pub fn external_vertices(&self) -> &[usize] {
        &self.external
    }

    /// Edge ids incident to a vertex.
    pub fn edges_at(&self, vertex: usize) -> &[usize] {
        &self.edges_at[vertex]
    }

    pub fn vertex_position(&self, vertex: usize) -> (f64, f64) {
        let v = &self.vertices[vertex];
        (
            v.ix as f64 * self.cell_side / 2.0,
            v.iy as f64 * self.cell_side * 3f64.sqrt() / 2.0,
        )
    }

    /// One element position per triangle, in canonical triangle order.
    pub fn element_positions(&self) -> Vec<(f64, f64)> {
        self.triangles.iter().map(|t| t.centroid).collect()
    }

    /// Tiling-independent boundary heights.
    pub fn boundary_heights(&self) -> &BoundaryHeights {
        &self.boundary
    }

    /// Minimum number of lattice edges from the internal vertex with the
    /// given raster rank to any boundary vertex.
    pub fn vertex_depth(&self, internal_rank: usize) -> u32 {
        self.depths[internal_rank]
    }

    pub fn depths(&self) -> &[u32] {
        &self.depths
    }

    /// Triangles in row `s`: `N_s = 4 * rings - 2 * |s| + 1`.
    pub fn row_triangle_count(&self, s: i32) -> usize {
        debug_assert!(s != 0 && s.abs() <= self.rings as i32);
        (4 * self.rings as i32 - 2 * s.abs() + 1) as usize
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges_at[a]
            .iter()
            .copied()
            .find(|&eid| self.edges[eid].other_end(a) == b)
    }
}

/// Canonical orientation of the edge joining two adjacent lattice vertices:
/// the allowed directions are 0, 120 and 240 degrees.
fn orient(va: &Vertex, vb: &Vertex, a: usize, b: usize) -> (usize, usize) {
    let dx = vb.ix - va.ix;
    let dy = vb.iy - va.iy;
    match (dx, dy) {
        (2, 0) | (-1, 1) => (a, b),
        (-2, 0) | (1, -1) => (b, a),
        // 60-degree family points down-left.
        (1, 1) => (b, a),
        (-1, -1) => (a, b),
        _ => unreachable!("non-adjacent vertices"),
    }
}

/// Walks the boundary clockwise and accumulates heights: +1 when the walk
/// follows the edge orientation, -1 against it. The walk must close at zero.
fn walk_boundary(
    vertices: &[Vertex],
    external: &[usize],
    edges: &[OrientedEdge],
    edges_at: &[Vec<usize>],
) -> Result<BoundaryHeights, LatticeError> {
    let m = external.len();
    let mut values = vec![0i64; m];
    for i in 0..m {
        let here = external[i];
        let next = external[(i + 1) % m];
        let eid = edges_at[here]
            .iter()
            .copied()
            .find(|&e| edges[e].other_end(here) == next)
            .expect("consecutive boundary vertices are adjacent");
        let step = if edges[eid].tail == here { 1 } else { -1 };
        if i + 1 < m {
            values[i + 1] = values[i] + step;
        } else if values[i] + step != values[0] {
            return Err(LatticeError::OpenBoundaryWalk);
        }
    }
    let _ = vertices;
    Ok(BoundaryHeights { values })
}

/// Multi-source BFS over unoriented edges from all boundary vertices.
fn boundary_distances(
    vertices: &[Vertex],
    internal: &[usize],
    external: &[usize],
    edges: &[OrientedEdge],
    edges_at: &[Vec<usize>],
) -> Vec<u32> {
    let mut dist = vec![u32::MAX; vertices.len()];
    let mut queue = std::collections::VecDeque::new();
    for &v in external {
        dist[v] = 0;
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        for &eid in &edges_at[v] {
            let w = edges[eid].other_end(v);
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    internal.iter().map(|&v| dist[v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(rings: u32) -> (usize, usize, usize) {
        let r = rings as usize;
        (6 * r * r, 3 * r * r - 3 * r + 1, 6 * r)
    }

    #[test]
    fn formulas_hold_for_small_apertures() {
        for rings in 1..=12 {
            let ap = HexAperture::new(rings, 0.5).unwrap();
            let (n, l, m) = counts(rings);
            assert_eq!(ap.triangle_count(), n);
            assert_eq!(ap.internal_count(), l);
            assert_eq!(ap.external_count(), m);
            assert_eq!(ap.tile_count(), n / 2);
        }
    }

    #[test]
    fn fig1_scale_aperture() {
        let ap = HexAperture::new(2, 3f64.sqrt() / 4.0).unwrap();
        assert_eq!(ap.triangle_count(), 24);
        assert_eq!(ap.internal_count(), 7);
        assert_eq!(ap.external_count(), 12);
    }

    #[test]
    fn trivial_aperture() {
        let ap = HexAperture::new(1, 0.5).unwrap();
        assert_eq!(ap.triangle_count(), 6);
        assert_eq!(ap.internal_count(), 1);
        assert_eq!(ap.external_count(), 6);
    }

    #[test]
    fn row_widths_sum_to_triangle_count() {
        let ap = HexAperture::new(10, 0.6).unwrap();
        assert_eq!(ap.row_triangle_count(1), 39);
        assert_eq!(ap.row_triangle_count(-1), 39);
        assert_eq!(ap.row_triangle_count(10), 21);
        let total: usize = (-10..=10)
            .filter(|s| *s != 0)
            .map(|s| ap.row_triangle_count(s))
            .sum();
        assert_eq!(total, 600);
        // Per-row triangle lists agree with the closed form.
        for s in (-10..=10).filter(|s| *s != 0) {
            let in_row = ap.triangles().iter().filter(|t| t.row == s).count();
            assert_eq!(in_row, ap.row_triangle_count(s));
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(matches!(
            HexAperture::new(0, 0.5),
            Err(LatticeError::ZeroRings)
        ));
        assert!(matches!(
            HexAperture::new(2, 0.0),
            Err(LatticeError::NonPositiveCellSide(_))
        ));
        assert!(matches!(
            HexAperture::new(2, -1.0),
            Err(LatticeError::NonPositiveCellSide(_))
        ));
    }

    #[test]
    fn dual_graph_is_bipartite_with_equal_classes() {
        for rings in 1..=6 {
            let ap = HexAperture::new(rings, 0.5).unwrap();
            let up = ap
                .triangles()
                .iter()
                .filter(|t| t.pointing == Pointing::Up)
                .count();
            assert_eq!(up * 2, ap.triangle_count());
            for t in ap.triangles() {
                let mut neighbor_count = 0;
                for nb in t.neighbors.iter().flatten() {
                    neighbor_count += 1;
                    assert_ne!(ap.triangle(*nb).pointing, t.pointing);
                }
                assert!(neighbor_count >= 2 && neighbor_count <= 3);
                let on_boundary = t.edges.iter().any(|&e| ap.edges()[e].on_boundary);
                if on_boundary {
                    assert_eq!(neighbor_count, 2);
                }
            }
        }
    }

    #[test]
    fn boundary_walk_closes_for_all_sizes() {
        for rings in 1..=12 {
            let ap = HexAperture::new(rings, 0.5).unwrap();
            let h = ap.boundary_heights().values();
            assert_eq!(h[0], 0);
            for i in 0..h.len() {
                let next = h[(i + 1) % h.len()];
                assert_eq!((next - h[i]).abs(), 1);
            }
        }
    }

    #[test]
    fn boundary_heights_small_apertures() {
        let ap1 = HexAperture::new(1, 0.5).unwrap();
        assert_eq!(ap1.boundary_heights().values(), &[0, 1, 0, 1, 0, 1]);
        // Hand-walked around the twelve boundary vertices of the two-ring
        // aperture; peaks sit on alternating corners.
        let ap2 = HexAperture::new(2, 0.5).unwrap();
        assert_eq!(
            ap2.boundary_heights().values(),
            &[0, 1, 2, 1, 0, 1, 2, 1, 0, 1, 2, 1]
        );
    }

    #[test]
    fn vertex_depths() {
        let ap1 = HexAperture::new(1, 0.5).unwrap();
        assert_eq!(ap1.depths(), &[1]);
        let ap2 = HexAperture::new(2, 0.5).unwrap();
        assert_eq!(ap2.depths(), &[1, 1, 1, 2, 1, 1, 1]);
        // Depth grows one ring at a time toward the center.
        let ap5 = HexAperture::new(5, 0.5).unwrap();
        let max_depth = *ap5.depths().iter().max().unwrap();
        assert_eq!(max_depth, 5);
        assert_eq!(ap5.depths().iter().filter(|&&d| d == 5).count(), 1);
    }

    #[test]
    fn element_positions_centered_and_hexagonal() {
        let ap = HexAperture::new(1, 0.5).unwrap();
        let pos = ap.element_positions();
        assert_eq!(pos.len(), 6);
        let r0 = (pos[0].0.powi(2) + pos[0].1.powi(2)).sqrt();
        for p in &pos {
            let r = (p.0.powi(2) + p.1.powi(2)).sqrt();
            assert!((r - r0).abs() < 1e-12);
        }
        for rings in [1, 2, 4] {
            let ap = HexAperture::new(rings, 0.5).unwrap();
            let pos = ap.element_positions();
            let sx: f64 = pos.iter().map(|p| p.0).sum();
            let sy: f64 = pos.iter().map(|p| p.1).sum();
            assert!(sx.abs() < 1e-12 && sy.abs() < 1e-12);
        }
    }

    #[test]
    fn nearest_neighbor_spacing() {
        let rho = 0.5;
        let ap = HexAperture::new(2, rho).unwrap();
        let pos = ap.element_positions();
        let mut best = f64::INFINITY;
        for i in 0..pos.len() {
            for j in 0..i {
                let d = ((pos[i].0 - pos[j].0).powi(2) + (pos[i].1 - pos[j].1).powi(2)).sqrt();
                best = best.min(d);
            }
        }
        assert!((best - rho / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn element_positions_sixfold_symmetric() {
        let ap = HexAperture::new(3, 0.5).unwrap();
        let pos = ap.element_positions();
        let (c, s) = (0.5, 3f64.sqrt() / 2.0);
        for p in &pos {
            let rotated = (p.0 * c - p.1 * s, p.0 * s + p.1 * c);
            let hit = pos
                .iter()
                .any(|q| (q.0 - rotated.0).abs() < 1e-12 && (q.1 - rotated.1).abs() < 1e-12);
            assert!(hit, "rotated element {rotated:?} missing");
        }
    }

    #[test]
    fn edge_orientations_point_at_0_120_or_240_degrees() {
        let ap = HexAperture::new(3, 0.5).unwrap();
        for e in ap.edges() {
            let t = &ap.vertices()[e.tail];
            let h = &ap.vertices()[e.head];
            let d = (h.ix - t.ix, h.iy - t.iy);
            assert!(matches!(d, (2, 0) | (-1, 1) | (-1, -1)));
        }
    }

    #[test]
    fn internal_vertices_are_raster_ordered() {
        let ap = HexAperture::new(3, 0.5).unwrap();
        let vs = ap.vertices();
        for pair in ap.internal_vertices().windows(2) {
            let (a, b) = (&vs[pair[0]], &vs[pair[1]]);
            assert!((a.iy, a.ix) < (b.iy, b.ix));
        }
    }
}
