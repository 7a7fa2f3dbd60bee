//! Structured triangulations of rectangles and labelled multi-rectangle domains.
//!
//! Every generated mesh lives on a uniform grid: each grid cell is split along
//! the diagonal running from its lower-left to its upper-right corner, so all
//! elements of a mesh are congruent right triangles. Uniform red refinement
//! preserves that structure and halves the mesh size exactly.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Label used for single-rectangle domains.
pub const WHOLE_DOMAIN_LABEL: &str = "Omega";

/// Axis-aligned box carrying a subdomain label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledRect {
    pub label: String,
    pub min: Point,
    pub max: Point,
}

impl LabeledRect {
    pub fn new(label: impl Into<String>, min: Point, max: Point) -> Self {
        Self {
            label: label.into(),
            min,
            max,
        }
    }

    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }

    fn contains(&self, p: Point) -> bool {
        p[0] > self.min[0] && p[0] < self.max[0] && p[1] > self.min[1] && p[1] < self.max[1]
    }

    fn overlap_len(a: (f64, f64), b: (f64, f64)) -> f64 {
        (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
    }

    fn interior_overlap(&self, other: &Self) -> f64 {
        Self::overlap_len((self.min[0], self.max[0]), (other.min[0], other.max[0]))
            * Self::overlap_len((self.min[1], self.max[1]), (other.min[1], other.max[1]))
    }

    /// Two boxes are adjacent when they share a boundary segment of positive length.
    fn adjacent(&self, other: &Self) -> bool {
        let touch = |a: f64, b: f64| (a - b).abs() < 1e-12;
        let x_overlap = Self::overlap_len((self.min[0], self.max[0]), (other.min[0], other.max[0]));
        let y_overlap = Self::overlap_len((self.min[1], self.max[1]), (other.min[1], other.max[1]));
        let share_vertical = (touch(self.max[0], other.min[0]) || touch(other.max[0], self.min[0]))
            && y_overlap > 1e-12;
        let share_horizontal = (touch(self.max[1], other.min[1]) || touch(other.max[1], self.min[1]))
            && x_overlap > 1e-12;
        share_vertical || share_horizontal
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    UnitSquare,
    Rectangle { width: f64, height: f64 },
    MultiDomain(Vec<LabeledRect>),
}

/// Geometry plus resolution `n` (grid segments per unit length).
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub resolution: usize,
}

impl DomainSpec {
    pub fn unit_square(n: usize) -> Self {
        Self {
            kind: DomainKind::UnitSquare,
            resolution: n,
        }
    }

    pub fn rectangle(width: f64, height: f64, n: usize) -> Self {
        Self {
            kind: DomainKind::Rectangle { width, height },
            resolution: n,
        }
    }

    pub fn multi_domain(rects: Vec<LabeledRect>, n: usize) -> Self {
        Self {
            kind: DomainKind::MultiDomain(rects),
            resolution: n,
        }
    }

    /// Default five-box layout: `Omega1` above `Omega2` on the left, `O1` above
    /// `O2` on the right, joined by the 2 x 0.25 channel `Omega_c` centred on y = 1.
    pub fn five_box_layout() -> Vec<LabeledRect> {
        vec![
            LabeledRect::new("Omega1", [0.0, 1.0], [1.0, 2.0]),
            LabeledRect::new("Omega2", [0.0, 0.0], [1.0, 1.0]),
            LabeledRect::new("O1", [3.0, 1.0], [4.0, 2.0]),
            LabeledRect::new("O2", [3.0, 0.0], [4.0, 1.0]),
            LabeledRect::new("Omega_c", [1.0, 0.875], [3.0, 1.125]),
        ]
    }

    pub fn five_box(n: usize) -> Self {
        Self::multi_domain(Self::five_box_layout(), n)
    }

    pub fn area(&self) -> f64 {
        match &self.kind {
            DomainKind::UnitSquare => 1.0,
            DomainKind::Rectangle { width, height } => width * height,
            DomainKind::MultiDomain(rects) => rects.iter().map(LabeledRect::area).sum(),
        }
    }
}

/// Conforming triangulation with per-vertex boundary flags and per-triangle
/// subdomain labels. Immutable after construction.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    labels: Vec<usize>,
    label_names: Vec<String>,
    boundary_vertex: Vec<bool>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    boundary_edge: Vec<bool>,
}

/// Local edge `k` of a triangle joins local vertices `EDGE_VERTS[k]`.
pub const EDGE_VERTS: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

impl TriMesh {
    /// Builds a mesh and checks the invariants: positive orientation, each edge
    /// shared by at most two triangles, labels in range.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        labels: Vec<usize>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != triangles.len() {
            return Err(Error::InvalidMesh(format!(
                "{} labels for {} triangles",
                labels.len(),
                triangles.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= label_names.len()) {
            return Err(Error::InvalidMesh(format!("label index {l} out of range")));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            if signed_area(&tri.map(|v| vertices[v])) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {t} is not counter-clockwise")));
            }
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_count: Vec<usize> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut te = [0; 3];
            for (k, [a, b]) in EDGE_VERTS.iter().enumerate() {
                let key = sorted_pair(tri[*a], tri[*b]);
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_count.push(0);
                    edges.len() - 1
                });
                edge_count[id] += 1;
                te[k] = id;
            }
            triangle_edges.push(te);
        }
        if let Some(e) = edge_count.iter().position(|&c| c > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge {:?} is shared by {} triangles",
                edges[e], edge_count[e]
            )));
        }
        let boundary_edge: Vec<bool> = edge_count.iter().map(|&c| c == 1).collect();
        let mut boundary_vertex = vec![false; vertices.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if boundary_edge[e] {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }

        Ok(Self {
            vertices,
            triangles,
            labels,
            label_names,
            boundary_vertex,
            edges,
            triangle_edges,
            boundary_edge,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge ids of each triangle, ordered as [`EDGE_VERTS`].
    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn boundary_edge_flags(&self) -> &[bool] {
        &self.boundary_edge
    }

    pub fn subdomain_labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn label_id(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|l| l == name)
    }

    pub fn label_of(&self, t: usize) -> &str {
        &self.label_names[self.labels[t]]
    }

    /// Triangles whose label is one of `names`.
    pub fn triangles_with_labels(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut ids = Vec::with_capacity(names.len());
        for name in names {
            ids.push(
                self.label_id(name)
                    .ok_or_else(|| Error::InvalidArgument(format!("mesh has no subdomain labelled {name:?}")))?,
            );
        }
        Ok((0..self.n_triangles())
            .filter(|&t| ids.contains(&self.labels[t]))
            .collect())
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.corners(t))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.corners(t);
        EDGE_VERTS
            .iter()
            .map(|[a, b]| dist(p[*a], p[*b]))
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let p = self.corners(t);
        [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ]
    }

    /// `(h, h_min)`: largest and smallest element diameter.
    pub fn mesh_size(&self) -> (f64, f64) {
        (0..self.n_triangles())
            .map(|t| self.diameter(t))
            .fold((0.0, f64::INFINITY), |(hi, lo), d| (hi.max(d), lo.min(d)))
    }

    /// Exhaustive conformity audit: every edge is used by one (boundary) or two
    /// (interior) triangles and both endpoints of a boundary edge are flagged.
    pub fn check_conformity(&self) -> Result<()> {
        let mut count: HashMap<[usize; 2], usize> = HashMap::new();
        for tri in &self.triangles {
            for [a, b] in EDGE_VERTS {
                *count.entry(sorted_pair(tri[a], tri[b])).or_default() += 1;
            }
        }
        for (edge, c) in count {
            match c {
                1 => {
                    if !(self.boundary_vertex[edge[0]] && self.boundary_vertex[edge[1]]) {
                        return Err(Error::InvalidMesh(format!("boundary edge {edge:?} has unflagged vertex")));
                    }
                }
                2 => {}
                _ => return Err(Error::InvalidMesh(format!("edge {edge:?} used {c} times"))),
            }
        }
        Ok(())
    }

    /// Plain-text node/element export.
    ///
    /// ```text
    /// <n_vertices> <n_triangles> <n_labels>
    /// <label_0> <label_1> ...
    /// <x> <y> <boundary 0|1>          (n_vertices lines)
    /// <v0> <v1> <v2> <label index>    (n_triangles lines, counter-clockwise)
    /// ```
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{} {} {}",
            self.n_vertices(),
            self.n_triangles(),
            self.label_names.len()
        )?;
        writeln!(out, "{}", self.label_names.join(" "))?;
        for (p, b) in self.vertices.iter().zip(&self.boundary_vertex) {
            writeln!(out, "{:?} {:?} {}", p[0], p[1], u8::from(*b))?;
        }
        for (tri, l) in self.triangles.iter().zip(&self.labels) {
            writeln!(out, "{} {} {} {}", tri[0], tri[1], tri[2], l)?;
        }
        Ok(())
    }
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn signed_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

/// Triangulates the domain on a uniform grid.
pub fn generate(spec: &DomainSpec) -> Result<TriMesh> {
    let n = spec.resolution;
    if n == 0 {
        return Err(Error::InvalidDomain("resolution must be at least 1".into()));
    }
    match &spec.kind {
        DomainKind::UnitSquare => grid_mesh(
            &[LabeledRect::new(WHOLE_DOMAIN_LABEL, [0.0, 0.0], [1.0, 1.0])],
            [0.0, 0.0],
            [1.0 / n as f64, 1.0 / n as f64],
            [n, n],
        ),
        DomainKind::Rectangle { width, height } => {
            if !(*width > 0.0 && *height > 0.0) {
                return Err(Error::InvalidDomain(format!(
                    "rectangle needs positive sides, got {width} x {height}"
                )));
            }
            let nx = ((width * n as f64) - 1e-9).ceil().max(1.0) as usize;
            let ny = ((height * n as f64) - 1e-9).ceil().max(1.0) as usize;
            grid_mesh(
                &[LabeledRect::new(WHOLE_DOMAIN_LABEL, [0.0, 0.0], [*width, *height])],
                [0.0, 0.0],
                [width / nx as f64, height / ny as f64],
                [nx, ny],
            )
        }
        DomainKind::MultiDomain(rects) => {
            validate_rects(rects, n)?;
            let lo = [
                rects.iter().map(|r| r.min[0]).fold(f64::INFINITY, f64::min),
                rects.iter().map(|r| r.min[1]).fold(f64::INFINITY, f64::min),
            ];
            let hi = [
                rects.iter().map(|r| r.max[0]).fold(f64::NEG_INFINITY, f64::max),
                rects.iter().map(|r| r.max[1]).fold(f64::NEG_INFINITY, f64::max),
            ];
            let h = 1.0 / n as f64;
            let cells = [
                ((hi[0] - lo[0]) * n as f64).round() as usize,
                ((hi[1] - lo[1]) * n as f64).round() as usize,
            ];
            grid_mesh(rects, lo, [h, h], cells)
        }
    }
}

fn validate_rects(rects: &[LabeledRect], n: usize) -> Result<()> {
    if rects.is_empty() {
        return Err(Error::InvalidDomain("multi-domain needs at least one rectangle".into()));
    }
    for r in rects {
        if !(r.max[0] > r.min[0] && r.max[1] > r.min[1]) {
            return Err(Error::InvalidDomain(format!("rectangle {:?} is degenerate", r.label)));
        }
        for c in [r.min[0], r.min[1], r.max[0], r.max[1]] {
            let scaled = c * n as f64;
            if (scaled - scaled.round()).abs() > 1e-9 {
                return Err(Error::InvalidDomain(format!(
                    "rectangle {:?} coordinate {c} is not on the grid of spacing 1/{n}",
                    r.label
                )));
            }
        }
    }
    for (i, a) in rects.iter().enumerate() {
        if rects[..i].iter().any(|b| b.label == a.label) {
            return Err(Error::InvalidDomain(format!("duplicate label {:?}", a.label)));
        }
        for b in &rects[i + 1..] {
            if a.interior_overlap(b) > 1e-12 {
                return Err(Error::InvalidDomain(format!(
                    "rectangles {:?} and {:?} overlap",
                    a.label, b.label
                )));
            }
        }
    }
    let mut seen = vec![false; rects.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..rects.len() {
            if !seen[j] && rects[i].adjacent(&rects[j]) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if let Some(j) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidDomain(format!(
            "rectangle {:?} is not connected to {:?}",
            rects[j].label, rects[0].label
        )));
    }
    Ok(())
}

/// Splits every grid cell whose centre lies in one of `rects` into two triangles
/// sharing the lower-left/upper-right diagonal.
fn grid_mesh(rects: &[LabeledRect], origin: Point, spacing: [f64; 2], cells: [usize; 2]) -> Result<TriMesh> {
    let mut vertex_id: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut labels = Vec::new();
    let mut vertex = |i: usize, j: usize, vertices: &mut Vec<Point>| {
        *vertex_id.entry((i, j)).or_insert_with(|| {
            vertices.push([
                origin[0] + i as f64 * spacing[0],
                origin[1] + j as f64 * spacing[1],
            ]);
            vertices.len() - 1
        })
    };
    for j in 0..cells[1] {
        for i in 0..cells[0] {
            let centre = [
                origin[0] + (i as f64 + 0.5) * spacing[0],
                origin[1] + (j as f64 + 0.5) * spacing[1],
            ];
            let Some(label) = rects.iter().position(|r| r.contains(centre)) else {
                continue;
            };
            let v00 = vertex(i, j, &mut vertices);
            let v10 = vertex(i + 1, j, &mut vertices);
            let v11 = vertex(i + 1, j + 1, &mut vertices);
            let v01 = vertex(i, j + 1, &mut vertices);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
            labels.extend([label, label]);
        }
    }
    let names = rects.iter().map(|r| r.label.clone()).collect();
    TriMesh::new(vertices, triangles, labels, names)
}

/// Uniform red refinement: every triangle splits into four similar children.
/// Existing vertex indices are kept; edge midpoints are appended in edge order.
pub fn refine(mesh: &TriMesh) -> Result<TriMesh> {
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.extend(mesh.edges.iter().map(|&[a, b]| {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }));
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    let mut labels = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [e01, e12, e20] = mesh.triangle_edges[t].map(|e| nv + e);
        let [a, b, c] = *tri;
        triangles.extend([[a, e01, e20], [e01, b, e12], [e20, e12, c], [e01, e12, e20]]);
        labels.extend([mesh.labels[t]; 4]);
    }
    TriMesh::new(vertices, triangles, labels, mesh.label_names.clone())
}
