//! Conforming triangulation of the periodic unit cell `Q = [0,1]²` around a
//! star-shaped inclusion `P`.
//!
//! The mesh is mapped rather than snapped: the interface carries `n` nodes
//! on rays from the inclusion centre through `n` uniformly spaced nodes of the
//! square perimeter. The matrix region `P^c` is filled by straight layers
//! between the two polylines and the inclusion by concentric rings. Interface
//! nodes therefore lie exactly on `∂P`, every triangle lies in one region,
//! and opposite cell edges carry matching nodes for the periodic map.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the inclusion `P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inclusion {
    Disk { radius: f64, center: [f64; 2] },
    /// Star-shaped about the vertex average; either orientation is accepted.
    Polygon { vertices: Vec<[f64; 2]> },
}

/// Region of the cell a quantity lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    P,
    Pc,
    Q,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::P => "P",
            Region::Pc => "Pc",
            Region::Q => "Q",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeTag {
    InteriorP,
    Interface,
    InteriorPc,
    CellEdge,
}

impl NodeTag {
    pub fn label(self) -> &'static str {
        match self {
            NodeTag::InteriorP => "interior_P",
            NodeTag::Interface => "interface",
            NodeTag::InteriorPc => "interior_Pc",
            NodeTag::CellEdge => "cell_edge",
        }
    }
}

/// Smallest admissible number of interface nodes.
pub const MIN_INTERFACE_NODES: usize = 16;

impl Inclusion {
    pub fn disk(radius: f64) -> Self {
        Inclusion::Disk {
            radius,
            center: [0.5, 0.5],
        }
    }

    pub fn center(&self) -> [f64; 2] {
        match self {
            Inclusion::Disk { center, .. } => *center,
            Inclusion::Polygon { vertices } => {
                let n = vertices.len() as f64;
                let sx: f64 = vertices.iter().map(|v| v[0]).sum();
                let sy: f64 = vertices.iter().map(|v| v[1]).sum();
                [sx / n, sy / n]
            }
        }
    }

    /// Analytic area of `P`.
    pub fn area(&self) -> f64 {
        match self {
            Inclusion::Disk { radius, .. } => PI * radius * radius,
            Inclusion::Polygon { vertices } => {
                let n = vertices.len();
                let mut twice = 0.0;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    twice += a[0] * b[1] - a[1] * b[0];
                }
                0.5 * twice.abs()
            }
        }
    }

    fn is_centered_disk(&self) -> bool {
        matches!(self, Inclusion::Disk { center, .. } if center[0] == 0.5 && center[1] == 0.5)
    }

    /// Checks that the closure of `P` lies strictly inside `Q`.
    pub fn validate(&self) -> Result<()> {
        match self {
            Inclusion::Disk { radius, center } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Geometry(format!("radius {radius} must be positive")));
                }
                let off = (center[0] - 0.5).abs().max((center[1] - 0.5).abs());
                if radius + off >= 0.5 {
                    return Err(Error::Geometry(
                        "inclusion not strictly interior".to_string(),
                    ));
                }
                Ok(())
            }
            Inclusion::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::Geometry("polygon needs at least 3 vertices".into()));
                }
                for v in vertices {
                    if !(v[0] > 0.0 && v[0] < 1.0 && v[1] > 0.0 && v[1] < 1.0) {
                        return Err(Error::Geometry(
                            "inclusion not strictly interior".to_string(),
                        ));
                    }
                }
                let c = self.center();
                let angles: Vec<f64> = vertices
                    .iter()
                    .map(|v| (v[1] - c[1]).atan2(v[0] - c[0]))
                    .collect();
                let n = angles.len();
                let mut turn = 0.0;
                for i in 0..n {
                    let mut d = angles[(i + 1) % n] - angles[i];
                    while d <= -PI {
                        d += 2.0 * PI;
                    }
                    while d > PI {
                        d -= 2.0 * PI;
                    }
                    if d == 0.0 {
                        return Err(Error::Geometry("polygon has repeated vertex angles".into()));
                    }
                    turn += d;
                }
                let sign = turn.signum();
                if (turn.abs() - 2.0 * PI).abs() > 1e-9 {
                    return Err(Error::Geometry(
                        "polygon must be star-shaped about its vertex average".into(),
                    ));
                }
                for i in 0..n {
                    let mut d = angles[(i + 1) % n] - angles[i];
                    while d <= -PI {
                        d += 2.0 * PI;
                    }
                    while d > PI {
                        d -= 2.0 * PI;
                    }
                    if d * sign <= 0.0 {
                        return Err(Error::Geometry(
                            "polygon must be star-shaped about its vertex average".into(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Counterclockwise vertex list.
    fn ccw_vertices(&self) -> Vec<[f64; 2]> {
        match self {
            Inclusion::Polygon { vertices } => {
                let mut twice = 0.0;
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    twice += a[0] * b[1] - a[1] * b[0];
                }
                let mut v = vertices.clone();
                if twice < 0.0 {
                    v.reverse();
                }
                v
            }
            Inclusion::Disk { .. } => Vec::new(),
        }
    }

    /// Distance from the centre to `∂P` along direction `theta`.
    fn radial_extent(&self, theta: f64) -> f64 {
        match self {
            Inclusion::Disk { radius, .. } => *radius,
            Inclusion::Polygon { vertices } => {
                let c = self.center();
                let d = [theta.cos(), theta.sin()];
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = [vertices[i][0] - c[0], vertices[i][1] - c[1]];
                    let b = [
                        vertices[(i + 1) % n][0] - c[0],
                        vertices[(i + 1) % n][1] - c[1],
                    ];
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let den = d[0] * e[1] - d[1] * e[0];
                    if den.abs() < 1e-300 {
                        continue;
                    }
                    let t = (a[0] * e[1] - a[1] * e[0]) / den;
                    let s = (a[0] * d[1] - a[1] * d[0]) / den;
                    if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                        best = best.min(t);
                    }
                }
                best
            }
        }
    }

    fn perimeter(&self) -> f64 {
        match self {
            Inclusion::Disk { radius, .. } => 2.0 * PI * radius,
            Inclusion::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
                    })
                    .sum()
            }
        }
    }
}

/// Triangulated unit cell with periodic identification.
///
/// Degrees of freedom live on master nodes: every node on `x = 1` or `y = 1`
/// is identified with its partner on the opposite edge, and all four corners
/// share one master.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub inclusion: Inclusion,
    pub h: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    pub tags: Vec<NodeTag>,
    pub periodic_map: Vec<usize>,
    dof_of_node: Vec<usize>,
    node_of_dof: Vec<usize>,
}

impl CellGeometry {
    /// Builds the mesh for `inclusion` with target edge length `h`.
    pub fn build(inclusion: Inclusion, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Geometry(format!("mesh size {h} must be positive")));
        }
        inclusion.validate()?;
        let mut nb = 8 * ((4.0 / h).max(inclusion.perimeter() / h) / 8.0).ceil() as usize;
        nb = nb.max(8);
        if nb < MIN_INTERFACE_NODES {
            return Err(Error::Resolution {
                interface_nodes: nb,
                required: MIN_INTERFACE_NODES,
            });
        }
        let c = inclusion.center();
        let q = nb / 4;

        // Square perimeter nodes, counterclockwise from the origin.
        let square: Vec<[f64; 2]> = (0..nb)
            .map(|k| {
                let t = (k % q) as f64 / q as f64;
                match k / q {
                    0 => [t, 0.0],
                    1 => [1.0, t],
                    2 => [1.0 - t, 1.0],
                    _ => [0.0, 1.0 - t],
                }
            })
            .collect();

        let mut theta: Vec<f64> = square
            .iter()
            .map(|p| (p[1] - c[1]).atan2(p[0] - c[0]))
            .collect();
        if let Inclusion::Polygon { .. } = inclusion {
            snap_to_vertices(&inclusion, &mut theta)?;
        }
        let boundary: Vec<[f64; 2]> = theta
            .iter()
            .map(|&t| {
                let r = inclusion.radial_extent(t);
                [c[0] + r * t.cos(), c[1] + r * t.sin()]
            })
            .collect();

        let mut nodes: Vec<[f64; 2]> = Vec::new();
        let mut tags: Vec<NodeTag> = Vec::new();
        let mut triangles: Vec<[usize; 3]> = Vec::new();
        let mut regions: Vec<Region> = Vec::new();

        // Inclusion: centre node, rings k = 1..K-1, interface ring K.
        let seg = inclusion.perimeter() / nb as f64;
        let rho_max = theta
            .iter()
            .map(|&t| inclusion.radial_extent(t))
            .fold(0.0, f64::max);
        let rings = ((rho_max / seg).ceil() as usize).max(2);
        nodes.push(c);
        tags.push(NodeTag::InteriorP);
        let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
        let mut ring_angles: Vec<Vec<f64>> = vec![vec![0.0]];
        for k in 1..rings {
            let count = (4 * ((nb * k) as f64 / (4 * rings) as f64).round() as usize).clamp(8, nb);
            let t = k as f64 / rings as f64;
            let mut ids = Vec::with_capacity(count);
            let mut angles = Vec::with_capacity(count);
            for i in 0..count {
                let a = 2.0 * PI * i as f64 / count as f64;
                let r = t * inclusion.radial_extent(a);
                ids.push(nodes.len());
                nodes.push([c[0] + r * a.cos(), c[1] + r * a.sin()]);
                tags.push(NodeTag::InteriorP);
                angles.push(a);
            }
            ring_ids.push(ids);
            ring_angles.push(angles);
        }
        let first_interface = nodes.len();
        let interface_ids: Vec<usize> = (0..nb).map(|j| first_interface + j).collect();
        for p in &boundary {
            nodes.push(*p);
            tags.push(NodeTag::Interface);
        }
        // Offset the interface ring so index 0 is the ray at angle 0 (exists
        // for the centred disk, which enables exact quarter-turn symmetry).
        let interface_start = (0..nb)
            .min_by(|&a, &b| wrap(theta[a]).total_cmp(&wrap(theta[b])))
            .unwrap();
        let iface_ring: Vec<usize> = (0..nb)
            .map(|i| interface_ids[(interface_start + i) % nb])
            .collect();
        let iface_angles: Vec<f64> = (0..nb)
            .map(|i| theta[(interface_start + i) % nb])
            .collect();
        ring_ids.push(iface_ring);
        ring_angles.push(iface_angles);

        let symmetric = inclusion.is_centered_disk() && theta[interface_start] == 0.0;
        let mut p_tris = Vec::new();
        let r1 = &ring_ids[1];
        for i in 0..r1.len() {
            p_tris.push([0, r1[i], r1[(i + 1) % r1.len()]]);
        }
        for k in 1..rings {
            let (a, b) = (&ring_ids[k], &ring_angles[k]);
            let (c2, d) = (&ring_ids[k + 1], &ring_angles[k + 1]);
            if symmetric {
                let qa = a.len() / 4;
                let qb = c2.len() / 4;
                let chain_a: Vec<(usize, f64)> = (0..=qa).map(|i| (i, unwrap(b, i))).collect();
                let chain_b: Vec<(usize, f64)> = (0..=qb).map(|i| (i, unwrap(d, i))).collect();
                let local = zip_chains(&chain_a, &chain_b);
                for quarter in 0..4 {
                    for t in &local {
                        let map = |v: (bool, usize)| -> usize {
                            if v.0 {
                                a[(v.1 + quarter * qa) % a.len()]
                            } else {
                                c2[(v.1 + quarter * qb) % c2.len()]
                            }
                        };
                        p_tris.push([map(t[0]), map(t[1]), map(t[2])]);
                    }
                }
            } else {
                let chain_a = closed_chain(b);
                let chain_b = closed_chain(d);
                for t in zip_chains(&chain_a, &chain_b) {
                    let map = |v: (bool, usize)| -> usize {
                        if v.0 {
                            a[v.1 % a.len()]
                        } else {
                            c2[v.1 % c2.len()]
                        }
                    };
                    p_tris.push([map(t[0]), map(t[1]), map(t[2])]);
                }
            }
        }
        for t in p_tris {
            triangles.push(t);
            regions.push(Region::P);
        }

        // Matrix region: straight layers between interface and perimeter.
        let gap = (0..nb)
            .map(|j| dist(boundary[j], square[j]))
            .fold(0.0, f64::max);
        let layers = ((gap / h).ceil() as usize).max(1);
        let mut layer_ids = vec![interface_ids.clone()];
        for l in 1..=layers {
            let s = l as f64 / layers as f64;
            let mut ids = Vec::with_capacity(nb);
            for j in 0..nb {
                ids.push(nodes.len());
                let p = if l == layers {
                    square[j]
                } else {
                    [
                        boundary[j][0] + s * (square[j][0] - boundary[j][0]),
                        boundary[j][1] + s * (square[j][1] - boundary[j][1]),
                    ]
                };
                nodes.push(p);
                tags.push(if l == layers {
                    NodeTag::CellEdge
                } else {
                    NodeTag::InteriorPc
                });
            }
            layer_ids.push(ids);
        }
        for l in 0..layers {
            for j in 0..nb {
                let jn = (j + 1) % nb;
                let v00 = layer_ids[l][j];
                let v10 = layer_ids[l][jn];
                let v01 = layer_ids[l + 1][j];
                let v11 = layer_ids[l + 1][jn];
                let d1 = dist(nodes[v00], nodes[v11]);
                let d2 = dist(nodes[v10], nodes[v01]);
                if d2 < d1 * (1.0 - 1e-9) {
                    triangles.push([v00, v10, v01]);
                    triangles.push([v10, v11, v01]);
                } else {
                    triangles.push([v00, v10, v11]);
                    triangles.push([v00, v11, v01]);
                }
                regions.push(Region::Pc);
                regions.push(Region::Pc);
            }
        }

        for t in triangles.iter_mut() {
            let a = signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            if a < 0.0 {
                t.swap(1, 2);
            } else if a == 0.0 {
                return Err(Error::Geometry("degenerate triangle in mesh".into()));
            }
        }

        // Periodic identification of the perimeter layer.
        let perimeter = &layer_ids[layers];
        let mut periodic_map: Vec<usize> = (0..nodes.len()).collect();
        for k in 0..nb {
            let (side, off) = (k / q, k % q);
            let partner = match (side, off) {
                (0, _) => k,
                (3, 0) => 0,
                (3, _) => k,
                (1, 0) | (2, 0) => 0,
                (1, _) => 4 * q - off,
                (2, _) => q - off,
                _ => unreachable!(),
            };
            periodic_map[perimeter[k]] = perimeter[partner];
        }

        let mut dof_of_node = vec![usize::MAX; nodes.len()];
        let mut node_of_dof = Vec::new();
        for n in 0..nodes.len() {
            if periodic_map[n] == n {
                dof_of_node[n] = node_of_dof.len();
                node_of_dof.push(n);
            }
        }
        for n in 0..nodes.len() {
            dof_of_node[n] = dof_of_node[periodic_map[n]];
        }

        Ok(CellGeometry {
            inclusion,
            h,
            nodes,
            triangles,
            regions,
            tags,
            periodic_map,
            dof_of_node,
            node_of_dof,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn dof(&self, node: usize) -> usize {
        self.dof_of_node[node]
    }

    /// Master node carrying degree of freedom `dof`.
    pub fn master_node(&self, dof: usize) -> usize {
        self.node_of_dof[dof]
    }

    pub fn dof_tag(&self, dof: usize) -> NodeTag {
        self.tags[self.node_of_dof[dof]]
    }

    pub fn dof_point(&self, dof: usize) -> [f64; 2] {
        self.nodes[self.node_of_dof[dof]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn in_region(&self, t: usize, region: Region) -> bool {
        region == Region::Q || self.regions[t] == region
    }

    /// Discrete area of `region`.
    pub fn area(&self, region: Region) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.in_region(t, region))
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Degrees of freedom with the given tag, ascending.
    pub fn dofs_tagged(&self, tag: NodeTag) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| self.dof_tag(d) == tag).collect()
    }

    /// Degrees of freedom touched by triangles of `region`, ascending.
    pub fn closure_dofs(&self, region: Region) -> Vec<usize> {
        let mut mark = vec![false; self.n_dofs()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.in_region(t, region) {
                for &v in tri {
                    mark[self.dof(v)] = true;
                }
            }
        }
        (0..self.n_dofs()).filter(|&d| mark[d]).collect()
    }

    /// Edge-midpoint rule (exact for quadratics on each triangle).
    pub fn quadrature_points(&self, region: Region) -> Vec<([f64; 2], f64)> {
        let mut out = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if !self.in_region(t, region) {
                continue;
            }
            let w = self.triangle_area(t) / 3.0;
            for e in 0..3 {
                let a = self.nodes[tri[e]];
                let b = self.nodes[tri[(e + 1) % 3]];
                out.push(([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], w));
            }
        }
        out
    }

    /// Longest triangle edge.
    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for tri in &self.triangles {
            for e in 0..3 {
                m = m.max(dist(self.nodes[tri[e]], self.nodes[tri[(e + 1) % 3]]));
            }
        }
        m
    }

    /// Plain-text export: header, node lines `x y tag`, triangle lines `i j k region`.
    pub fn export_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {} triangles {}", self.nodes.len(), self.triangles.len());
        for (p, tag) in self.nodes.iter().zip(&self.tags) {
            let _ = writeln!(s, "{} {} {}", p[0], p[1], tag.label());
        }
        for (t, r) in self.triangles.iter().zip(&self.regions) {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], r.label());
        }
        s
    }
}

/// Moves the ray nearest each polygon vertex onto that vertex.
fn snap_to_vertices(inclusion: &Inclusion, theta: &mut [f64]) -> Result<()> {
    let c = inclusion.center();
    let mut used = vec![false; theta.len()];
    for v in inclusion.ccw_vertices() {
        let a = (v[1] - c[1]).atan2(v[0] - c[0]);
        let k = (0..theta.len())
            .min_by(|&i, &j| angle_gap(theta[i], a).total_cmp(&angle_gap(theta[j], a)))
            .unwrap();
        if used[k] {
            return Err(Error::Resolution {
                interface_nodes: theta.len(),
                required: 2 * theta.len(),
            });
        }
        used[k] = true;
        theta[k] = a;
    }
    Ok(())
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

/// Angle of ring entry `i`, unwrapped to be increasing from entry 0.
fn unwrap(angles: &[f64], i: usize) -> f64 {
    let base = wrap(angles[0]);
    let mut a = wrap(angles[i % angles.len()]);
    if i > 0 && a <= base {
        a += 2.0 * PI;
    }
    if i >= angles.len() {
        a = base + 2.0 * PI;
    }
    a
}

/// Closed ring as an open chain starting at its smallest angle.
fn closed_chain(angles: &[f64]) -> Vec<(usize, f64)> {
    let n = angles.len();
    let start = (0..n)
        .min_by(|&a, &b| wrap(angles[a]).total_cmp(&wrap(angles[b])))
        .unwrap();
    let base = wrap(angles[start]);
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let idx = start + i;
        let mut a = wrap(angles[idx % n]);
        if i > 0 && a <= base {
            a += 2.0 * PI;
        }
        if i == n {
            a = base + 2.0 * PI;
        }
        out.push((idx, a));
    }
    out
}

/// Triangulates the strip between two angle-sorted chains sharing their
/// first and last rays. Vertices are tagged `(true, i)` for chain `a`.
fn zip_chains(a: &[(usize, f64)], b: &[(usize, f64)]) -> Vec<[(bool, usize); 3]> {
    let (na, nb) = (a.len() - 1, b.len() - 1);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(na + nb);
    while i < na || j < nb {
        let advance_a = j == nb || (i < na && a[i + 1].1 <= b[j + 1].1);
        if advance_a {
            out.push([(true, a[i].0), (true, a[i + 1].0), (false, b[j].0)]);
            i += 1;
        } else {
            out.push([(true, a[i].0), (false, b[j + 1].0), (false, b[j].0)]);
            j += 1;
        }
    }
    out
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(h: f64) -> CellGeometry {
        CellGeometry::build(Inclusion::disk(0.375), h).unwrap()
    }

    #[test]
    fn disk_area_matches_formula() {
        let g = disk(1.0 / 32.0);
        let exact = PI * 0.375 * 0.375;
        assert!((g.area(Region::P) - exact).abs() / exact < 0.01);
        assert!((g.area(Region::Q) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn touching_disk_is_rejected() {
        assert!(matches!(
            CellGeometry::build(Inclusion::disk(0.51), 1.0 / 32.0),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn coarse_mesh_is_rejected() {
        assert!(matches!(
            CellGeometry::build(Inclusion::disk(0.3), 0.6),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn all_triangles_positive_and_edges_bounded() {
        let g = disk(1.0 / 16.0);
        for t in 0..g.triangles.len() {
            assert!(g.triangle_area(t) > 0.0);
        }
        assert!(g.max_edge() <= 1.5 / 16.0);
    }

    #[test]
    fn interface_nodes_on_circle() {
        let g = disk(1.0 / 32.0);
        let h = g.h;
        for (p, t) in g.nodes.iter().zip(&g.tags) {
            if *t == NodeTag::Interface {
                let r = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
                assert!((r - 0.375).abs() <= h * h);
            }
        }
        let count = g.tags.iter().filter(|t| **t == NodeTag::Interface).count();
        assert!(count >= MIN_INTERFACE_NODES);
    }

    #[test]
    fn periodic_map_is_idempotent_and_matches_partners() {
        let g = disk(1.0 / 16.0);
        for n in 0..g.nodes.len() {
            let m = g.periodic_map[n];
            assert_eq!(g.periodic_map[m], m);
            let (p, pm) = (g.nodes[n], g.nodes[m]);
            if m != n {
                let corner = |p: [f64; 2]| (p[0] == 0.0 || p[0] == 1.0) && (p[1] == 0.0 || p[1] == 1.0);
                if corner(p) {
                    assert_eq!(pm, [0.0, 0.0]);
                } else if p[0] == 1.0 {
                    assert_eq!(pm[0], 0.0);
                    assert!((pm[1] - p[1]).abs() < 1e-14);
                } else {
                    assert_eq!(p[1], 1.0);
                    assert_eq!(pm[1], 0.0);
                    assert!((pm[0] - p[0]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn quadrature_weights_sum_to_areas() {
        let g = disk(1.0 / 32.0);
        let q: f64 = g.quadrature_points(Region::Q).iter().map(|p| p.1).sum();
        assert!((q - 1.0).abs() < 1e-10);
        let pc: f64 = g.quadrature_points(Region::Pc).iter().map(|p| p.1).sum();
        assert!((pc - g.area(Region::Pc)).abs() < 1e-12);
        let affine: f64 = g
            .quadrature_points(Region::Q)
            .iter()
            .map(|(p, w)| w * (2.0 * p[0] - p[1] + 3.0))
            .sum();
        assert!((affine - 3.5).abs() < 1e-10);
    }

    #[test]
    fn polygon_inclusion_meshes() {
        let sq = Inclusion::Polygon {
            vertices: vec![[0.3, 0.3], [0.7, 0.3], [0.7, 0.7], [0.3, 0.7]],
        };
        let g = CellGeometry::build(sq, 1.0 / 32.0).unwrap();
        assert!((g.area(Region::P) - 0.16).abs() < 1e-12);
        assert!((g.area(Region::Q) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn export_header() {
        let g = disk(1.0 / 8.0);
        let text = g.export_text();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            format!("nodes {} triangles {}", g.nodes.len(), g.triangles.len())
        );
        assert_eq!(text.lines().count(), 1 + g.nodes.len() + g.triangles.len());
    }
}
