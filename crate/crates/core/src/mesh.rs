//! Uniform triangulations of the unit square.
//!
//! Level 0 is the square cut by the diagonal from `(0,0)` to `(1,1)`; every
//! further level is one red refinement (each triangle split into four
//! congruent children through its edge midpoints). The result is the
//! structured mesh in which every grid cell carries the same south-west to
//! north-east diagonal, so nodes are numbered lexicographically,
//! `index = k * (2^l + 1) + i` for the node at `(i, k) * 2^-l`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::MeshError;

/// Largest refinement level accepted by [`build_mesh`].
pub const MAX_LEVEL: u32 = 12;

#[derive(Debug, Clone)]
pub struct Triangulation {
    level: u32,
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    boundary_nodes: Vec<usize>,
    boundary_mask: Vec<bool>,
    areas: Vec<f64>,
    /// Gradients of the three barycentric basis functions on each element.
    basis_grads: Vec<[[f64; 2]; 3]>,
    h: f64,
    h_min: f64,
}

pub fn build_mesh(level: u32) -> Result<Triangulation, MeshError> {
    if level > MAX_LEVEL {
        return Err(MeshError::LevelOutOfRange { level, max: MAX_LEVEL });
    }
    let cells = 1usize << level;
    let side = cells + 1;
    let spacing = 1.0 / cells as f64;
    let id = |i: usize, k: usize| k * side + i;

    let mut nodes = Vec::with_capacity(side * side);
    for k in 0..side {
        for i in 0..side {
            nodes.push([i as f64 * spacing, k as f64 * spacing]);
        }
    }
    let mut elements = Vec::with_capacity(2 * cells * cells);
    for k in 0..cells {
        for i in 0..cells {
            elements.push([id(i, k), id(i + 1, k), id(i + 1, k + 1)]);
            elements.push([id(i, k), id(i + 1, k + 1), id(i, k + 1)]);
        }
    }
    let boundary_mask: Vec<bool> = (0..side * side)
        .map(|n| {
            let (i, k) = (n % side, n / side);
            i == 0 || k == 0 || i == cells || k == cells
        })
        .collect();
    Ok(Triangulation::from_parts(level, nodes, elements, boundary_mask))
}

impl Triangulation {
    fn from_parts(level: u32, nodes: Vec<[f64; 2]>, elements: Vec<[usize; 3]>, boundary_mask: Vec<bool>) -> Self {
        let mut areas = Vec::with_capacity(elements.len());
        let mut basis_grads = Vec::with_capacity(elements.len());
        let mut h: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        for tri in &elements {
            let [a, b, c] = tri.map(|v| nodes[v]);
            let e1 = [b[0] - a[0], b[1] - a[1]];
            let e2 = [c[0] - a[0], c[1] - a[1]];
            let det = e1[0] * e2[1] - e1[1] * e2[0];
            areas.push(0.5 * det);
            // rows of the inverse Jacobian give grad(lambda_b), grad(lambda_c)
            let gb = [e2[1] / det, -e2[0] / det];
            let gc = [-e1[1] / det, e1[0] / det];
            let ga = [-gb[0] - gc[0], -gb[1] - gc[1]];
            basis_grads.push([ga, gb, gc]);
            let dist = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            let diam = dist(a, b).max(dist(b, c)).max(dist(a, c));
            h = h.max(diam);
            h_min = h_min.min(diam);
        }
        let boundary_nodes = boundary_mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect();
        Self {
            level,
            nodes,
            elements,
            boundary_nodes,
            boundary_mask,
            areas,
            basis_grads,
            h,
            h_min,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_mask[node]
    }

    /// Signed element areas (all positive for this mesh family).
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn basis_gradients(&self, element: usize) -> &[[f64; 2]; 3] {
        &self.basis_grads[element]
    }

    /// Maximal element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    /// Number of nodes per side, `2^l + 1`.
    pub fn side(&self) -> usize {
        (1usize << self.level) + 1
    }

    /// Plain text dump: one `x y` line per node, then one `i j k` line per
    /// element (0-based).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for [x, y] in &self.nodes {
            let _ = writeln!(out, "{x} {y}");
        }
        for [i, j, k] in &self.elements {
            let _ = writeln!(out, "{i} {j} {k}");
        }
        out
    }
}

/// One red refinement of an arbitrary triangle list, returning the new node
/// coordinates and elements. Children of `[a, b, c]` with midpoints
/// `ab, bc, ca` are `[a, ab, ca]`, `[ab, b, bc]`, `[ca, bc, c]`, `[ab, bc, ca]`.
pub fn red_refine(nodes: &[[f64; 2]], elements: &[[usize; 3]]) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut new_nodes = nodes.to_vec();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, new_nodes: &mut Vec<[f64; 2]>| {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let (p, q) = (nodes[a], nodes[b]);
            new_nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            new_nodes.len() - 1
        })
    };
    let mut new_elements = Vec::with_capacity(4 * elements.len());
    for &[a, b, c] in elements {
        let ab = midpoint(a, b, &mut new_nodes);
        let bc = midpoint(b, c, &mut new_nodes);
        let ca = midpoint(c, a, &mut new_nodes);
        new_elements.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    (new_nodes, new_elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn geometric_triangles(nodes: &[[f64; 2]], elements: &[[usize; 3]], level: u32) -> BTreeSet<[(u64, u64); 3]> {
        let scale = (1u64 << level) as f64;
        elements
            .iter()
            .map(|t| {
                let mut v = t.map(|n| ((nodes[n][0] * scale) as u64, (nodes[n][1] * scale) as u64));
                v.sort();
                v
            })
            .collect()
    }

    #[test]
    fn coarse_mesh() {
        let m = build_mesh(0).unwrap();
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(m.n_elements(), 2);
        assert!((m.h() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.boundary_nodes().len(), 4);
    }

    #[test]
    fn level_three_counts() {
        let m = build_mesh(3).unwrap();
        assert_eq!(m.n_nodes(), 81);
        assert_eq!(m.n_elements(), 128);
        assert!((m.h() - 2f64.sqrt() / 8.0).abs() < 1e-15);
        assert!((m.h_min() - m.h()).abs() < 1e-15);
    }

    #[test]
    fn level_one_boundary() {
        assert_eq!(build_mesh(1).unwrap().boundary_nodes().len(), 8);
    }

    #[test]
    fn level_out_of_range() {
        assert!(matches!(build_mesh(13), Err(MeshError::LevelOutOfRange { .. })));
    }

    #[test]
    fn counts_and_orientation_per_level() {
        for l in 0..=6 {
            let m = build_mesh(l).unwrap();
            assert_eq!(m.n_nodes(), ((1usize << l) + 1).pow(2));
            assert_eq!(m.n_elements(), 2 * 4usize.pow(l));
            assert!(m.areas().iter().all(|&a| a > 0.0));
            assert_eq!(m.h(), 2f64.sqrt() * 0.5f64.powi(l as i32));
        }
    }

    #[test]
    fn grid_equals_repeated_red_refinement() {
        let mut fine = build_mesh(0).unwrap();
        let (mut nodes, mut elements) = (fine.nodes().to_vec(), fine.elements().to_vec());
        for l in 1..=4 {
            (nodes, elements) = red_refine(&nodes, &elements);
            fine = build_mesh(l).unwrap();
            assert_eq!(nodes.len(), fine.n_nodes());
            assert_eq!(
                geometric_triangles(&nodes, &elements, l),
                geometric_triangles(fine.nodes(), fine.elements(), l)
            );
        }
    }

    #[test]
    fn basis_gradients_sum_to_zero() {
        let m = build_mesh(2).unwrap();
        for t in 0..m.n_elements() {
            let g = m.basis_gradients(t);
            assert_eq!(g[0][0] + g[1][0] + g[2][0], 0.0);
            assert_eq!(g[0][1] + g[1][1] + g[2][1], 0.0);
        }
    }

    #[test]
    fn dump_format() {
        let text = build_mesh(0).unwrap().dump();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "0 0");
        assert_eq!(lines[3], "1 1");
        assert_eq!(lines[4], "0 1 3");
        assert_eq!(lines[5], "0 3 2");
    }
}
