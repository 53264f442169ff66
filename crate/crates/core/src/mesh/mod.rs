//! Quadrilateral surface meshes in 3D: reference configuration, current
//! configuration, iso-parametric geometry queries, refinement forest with
//! hanging nodes, and the scalar DOF handler with edge double nodes.

pub mod dof;
pub mod io;
pub mod shape;

use crate::error::{Error, Result};
use crate::scalar::{real, Float};
use nalgebra::Vector3;
use std::collections::BTreeMap;

pub use dof::{duplicate_edge_nodes, DofHandler};
pub use shape::{shape_gradients, shape_values, EDGE_CORNERS, N_LOCAL};

/// Boundary region a panel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    FreeSurface,
    Hull,
    Bottom,
    FarField,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::FreeSurface,
        Region::Hull,
        Region::Bottom,
        Region::FarField,
    ];

    pub fn tag(self) -> u32 {
        match self {
            Region::FreeSurface => 0,
            Region::Hull => 1,
            Region::Bottom => 2,
            Region::FarField => 3,
        }
    }

    pub fn from_tag(tag: u32) -> Result<Self> {
        Ok(match tag {
            0 => Region::FreeSurface,
            1 => Region::Hull,
            2 => Region::Bottom,
            3 => Region::FarField,
            other => return Err(Error::Invalid(format!("unknown region tag {other}"))),
        })
    }
}

/// A quadrilateral panel in the refinement forest. Corner order follows the
/// reference-square convention `(0,0), (1,0), (0,1), (1,1)`.
#[derive(Debug, Clone)]
pub struct Panel {
    pub corners: [usize; N_LOCAL],
    pub region: Region,
    pub level: u8,
    pub parent: Option<usize>,
    pub children: Option<[usize; 4]>,
    pub dead: bool,
}

impl Panel {
    pub fn is_active(&self) -> bool {
        !self.dead && self.children.is_none()
    }
}

/// Undirected edge key: point pair with the smaller id first.
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// What lies across a panel edge in the active mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeNeighbor {
    /// Conforming neighbor panel at the same refinement level of the edge.
    Conforming(usize),
    /// The edge is half of a coarser neighbor's edge.
    Coarser(usize),
    /// The edge is split; the two active panels across its halves.
    Finer([usize; 2]),
    /// No panel across (open patch boundary).
    Boundary,
}

/// The reference triangulation: points, panel forest, region tags, and the
/// hanging-node interpolation map derived from nonconforming refinement.
#[derive(Debug, Clone)]
pub struct ReferenceMesh<T> {
    points: Vec<Vector3<T>>,
    panels: Vec<Panel>,
    /// Registered midpoints of split edges, shared between neighbors.
    edge_midpoint: BTreeMap<(usize, usize), usize>,
    /// Inverse of `edge_midpoint`.
    midpoint_edge: BTreeMap<usize, (usize, usize)>,
    /// Hanging point -> (master points, interpolation weights).
    hanging: BTreeMap<usize, Vec<(usize, T)>>,
}

/// Current node positions of a mesh, one entry per mesh point.
#[derive(Debug, Clone)]
pub struct CurrentConfiguration<T> {
    positions: Vec<Vector3<T>>,
}

impl<T: Float> CurrentConfiguration<T> {
    pub fn new(positions: Vec<Vector3<T>>) -> Self {
        Self { positions }
    }

    pub fn positions(&self) -> &[Vector3<T>] {
        &self.positions
    }

    pub fn positions_mut(&mut self) -> &mut [Vector3<T>] {
        &mut self.positions
    }

    pub fn point(&self, p: usize) -> Vector3<T> {
        self.positions[p]
    }

    pub fn push(&mut self, p: Vector3<T>) -> usize {
        self.positions.push(p);
        self.positions.len() - 1
    }
}

/// First-order differential geometry of a panel at a reference point.
#[derive(Debug, Clone)]
pub struct PanelGeometry<T> {
    pub point: Vector3<T>,
    pub t_u: Vector3<T>,
    pub t_v: Vector3<T>,
    pub normal: Vector3<T>,
    pub jacobian: T,
}

impl<T: Float> ReferenceMesh<T> {
    pub fn new(points: Vec<Vector3<T>>, panels: Vec<(Region, [usize; 4])>) -> Self {
        let panels = panels
            .into_iter()
            .map(|(region, corners)| Panel {
                corners,
                region,
                level: 0,
                parent: None,
                children: None,
                dead: false,
            })
            .collect();
        Self {
            points,
            panels,
            edge_midpoint: BTreeMap::new(),
            midpoint_edge: BTreeMap::new(),
            hanging: BTreeMap::new(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vector3<T>] {
        &self.points
    }

    pub fn point(&self, p: usize) -> Vector3<T> {
        self.points[p]
    }

    pub fn panel(&self, k: usize) -> &Panel {
        &self.panels[k]
    }

    pub fn n_panels(&self) -> usize {
        self.panels.len()
    }

    /// Ids of active (leaf) panels, ascending.
    pub fn active_panels(&self) -> Vec<usize> {
        (0..self.panels.len())
            .filter(|&k| self.panels[k].is_active())
            .collect()
    }

    /// Hanging point -> masters map.
    pub fn hanging(&self) -> &BTreeMap<usize, Vec<(usize, T)>> {
        &self.hanging
    }

    pub fn is_hanging(&self, p: usize) -> bool {
        self.hanging.contains_key(&p)
    }

    /// Reference configuration as a [`CurrentConfiguration`].
    pub fn reference_configuration(&self) -> CurrentConfiguration<T> {
        CurrentConfiguration::new(self.points.clone())
    }

    /// Points referenced by at least one active panel, ascending.
    pub fn active_points(&self) -> Vec<usize> {
        let mut used = vec![false; self.points.len()];
        for k in self.active_panels() {
            for &c in &self.panels[k].corners {
                used[c] = true;
            }
        }
        (0..self.points.len()).filter(|&p| used[p]).collect()
    }

    /// Map from each edge of the active mesh to the (panel, local edge)
    /// pairs using it.
    pub fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<(usize, usize)>> {
        let mut map: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for k in self.active_panels() {
            let c = self.panels[k].corners;
            for (e, &(i, j)) in EDGE_CORNERS.iter().enumerate() {
                map.entry(edge_key(c[i], c[j])).or_default().push((k, e));
            }
        }
        map
    }

    /// Endpoint ids of a panel's local edge.
    pub fn panel_edge_points(&self, panel: usize, edge: usize) -> (usize, usize) {
        let c = self.panels[panel].corners;
        let (i, j) = EDGE_CORNERS[edge];
        (c[i], c[j])
    }

    /// Resolves what lies across the given panel edge, following the
    /// refinement forest for nonconforming edges.
    pub fn edge_neighbor(
        &self,
        em: &BTreeMap<(usize, usize), Vec<(usize, usize)>>,
        panel: usize,
        edge: usize,
    ) -> EdgeNeighbor {
        let (p, q) = self.panel_edge_points(panel, edge);
        let key = edge_key(p, q);
        if let Some(list) = em.get(&key) {
            for &(k, _) in list {
                if k != panel {
                    return EdgeNeighbor::Conforming(k);
                }
            }
        }
        // finer side: this edge has a registered midpoint in active use
        if let Some(&m) = self.edge_midpoint.get(&key) {
            let half_a = em.get(&edge_key(p, m)).map(|l| l.first().copied());
            let half_b = em.get(&edge_key(m, q)).map(|l| l.first().copied());
            if let (Some(Some((ka, _))), Some(Some((kb, _)))) = (half_a, half_b) {
                return EdgeNeighbor::Finer([ka, kb]);
            }
        }
        // coarser side: one endpoint is the midpoint of a longer edge
        for (mid, other) in [(p, q), (q, p)] {
            if let Some(&(a, b)) = self.midpoint_edge.get(&mid) {
                if other == a || other == b {
                    if let Some(list) = em.get(&edge_key(a, b)) {
                        if let Some(&(k, _)) = list.iter().find(|&&(k, _)| k != panel) {
                            return EdgeNeighbor::Coarser(k);
                        }
                    }
                }
            }
        }
        EdgeNeighbor::Boundary
    }

    /// Longest distance between two corners of the panel (its diameter).
    pub fn panel_diameter(&self, panel: usize, config: &CurrentConfiguration<T>) -> T {
        let c = self.panels[panel].corners;
        let mut d = T::ZERO;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let dist = (config.point(c[i]) - config.point(c[j])).norm();
                if dist > d {
                    d = dist;
                }
            }
        }
        d
    }

    /// Degeneracy tolerance for the area Jacobian: `1e-12 * diameter^2`.
    pub fn jacobian_tolerance(&self, panel: usize, config: &CurrentConfiguration<T>) -> T {
        let d = self.panel_diameter(panel, config);
        real::<T>(1e-12) * d * d
    }

    /// Point map, tangents, unit normal, and area Jacobian of `panel` at the
    /// reference coordinates `(u, v)` in the given configuration.
    pub fn panel_geometry(
        &self,
        panel: usize,
        u: T,
        v: T,
        config: &CurrentConfiguration<T>,
    ) -> Result<PanelGeometry<T>> {
        let n = shape::shape_values(u, v)?;
        let g = shape::shape_gradients_unchecked(u, v);
        let c = self.panels[panel].corners;
        let mut point = Vector3::zeros();
        let mut t_u = Vector3::zeros();
        let mut t_v = Vector3::zeros();
        for l in 0..N_LOCAL {
            let x = config.point(c[l]);
            point += x * n[l];
            t_u += x * g[l][0];
            t_v += x * g[l][1];
        }
        let cross = t_u.cross(&t_v);
        let jacobian = cross.norm();
        let tol = self.jacobian_tolerance(panel, config);
        if jacobian <= tol {
            return Err(Error::DegeneratePanel {
                panel,
                jacobian: jacobian.to_f64().unwrap_or(0.0),
                tolerance: tol.to_f64().unwrap_or(0.0),
            });
        }
        Ok(PanelGeometry {
            point,
            t_u,
            t_v,
            normal: cross / jacobian,
            jacobian,
        })
    }

    /// Surface gradients of the four local basis functions at `(u, v)`:
    /// `D (G)^-1 grad_uv N_l`, each tangent to the panel.
    pub fn surface_gradient_basis(
        &self,
        panel: usize,
        u: T,
        v: T,
        config: &CurrentConfiguration<T>,
    ) -> Result<[Vector3<T>; N_LOCAL]> {
        let geo = self.panel_geometry(panel, u, v, config)?;
        surface_gradient_basis_from_tangents(panel, u, v, &geo.t_u, &geo.t_v)
    }

    /// Surface gradient of a nodal field given its four corner values.
    pub fn surface_gradient(
        &self,
        panel: usize,
        u: T,
        v: T,
        config: &CurrentConfiguration<T>,
        corner_values: &[T; N_LOCAL],
    ) -> Result<Vector3<T>> {
        let basis = self.surface_gradient_basis(panel, u, v, config)?;
        let mut grad = Vector3::zeros();
        for l in 0..N_LOCAL {
            grad += basis[l] * corner_values[l];
        }
        Ok(grad)
    }

    /// Total surface area of the active panels with an `order`-point tensor
    /// Gauss rule per direction.
    pub fn total_area(&self, config: &CurrentConfiguration<T>, order: usize) -> Result<T> {
        let rule = crate::bem::quadrature::GaussRule::<T>::tensor(order);
        let mut area = T::ZERO;
        for k in self.active_panels() {
            for qp in rule.points() {
                let geo = self.panel_geometry(k, qp.u, qp.v, config)?;
                area += geo.jacobian * qp.weight;
            }
        }
        Ok(area)
    }

    /// Checks Jacobian positivity at all quadrature points of every active
    /// panel.
    pub fn validate_jacobians(
        &self,
        config: &CurrentConfiguration<T>,
        order: usize,
    ) -> Result<()> {
        let rule = crate::bem::quadrature::GaussRule::<T>::tensor(order);
        for k in self.active_panels() {
            for qp in rule.points() {
                self.panel_geometry(k, qp.u, qp.v, config)?;
            }
        }
        Ok(())
    }

    /// Splits one active panel into four children. New point coordinates are
    /// produced by `place`, which receives the bilinear interpolation of the
    /// existing reference points and the panel region, and may project it
    /// onto an exact geometry. Returns the child panel ids.
    ///
    /// The caller is responsible for rebuilding the hanging map (see
    /// [`ReferenceMesh::rebuild_hanging`]) once a full refinement pass is
    /// done.
    pub fn split_panel<F>(&mut self, panel: usize, place: &mut F) -> Result<[usize; 4]>
    where
        F: FnMut(Region, NewPointKind, Vector3<T>) -> Vector3<T>,
    {
        if !self.panels[panel].is_active() {
            return Err(Error::Invalid(format!(
                "panel {panel} is not active and cannot be split"
            )));
        }
        let Panel {
            corners: [a, b, c, d],
            region,
            level,
            ..
        } = self.panels[panel];

        let mut midpoint = |mesh: &mut Self, p: usize, q: usize| -> usize {
            let key = edge_key(p, q);
            if let Some(&m) = mesh.edge_midpoint.get(&key) {
                return m;
            }
            let interp = (mesh.points[p] + mesh.points[q]) * T::HALF;
            let pos = place(region, NewPointKind::EdgeMidpoint(p, q), interp);
            mesh.points.push(pos);
            let m = mesh.points.len() - 1;
            mesh.edge_midpoint.insert(key, m);
            mesh.midpoint_edge.insert(m, key);
            m
        };

        let m_ab = midpoint(self, a, b);
        let m_bd = midpoint(self, b, d);
        let m_cd = midpoint(self, c, d);
        let m_ac = midpoint(self, a, c);
        let center_interp =
            (self.points[a] + self.points[b] + self.points[c] + self.points[d]) * real::<T>(0.25);
        let center_pos = place(region, NewPointKind::Center(panel), center_interp);
        self.points.push(center_pos);
        let m0 = self.points.len() - 1;

        let child_corners = [
            [a, m_ab, m_ac, m0],
            [m_ab, b, m0, m_bd],
            [m_ac, m0, c, m_cd],
            [m0, m_bd, m_cd, d],
        ];
        let mut ids = [0usize; 4];
        for (i, corners) in child_corners.into_iter().enumerate() {
            self.panels.push(Panel {
                corners,
                region,
                level: level + 1,
                parent: Some(panel),
                children: None,
                dead: false,
            });
            ids[i] = self.panels.len() - 1;
        }
        self.panels[panel].children = Some(ids);
        Ok(ids)
    }

    /// Undoes the refinement of `panel`: its four children become dead and
    /// the panel active again. Fails if any child is itself refined.
    pub fn coarsen_panel(&mut self, panel: usize) -> Result<()> {
        let children = self.panels[panel]
            .children
            .ok_or_else(|| Error::Invalid(format!("panel {panel} has no children")))?;
        for ch in children {
            if self.panels[ch].children.is_some() {
                return Err(Error::Invalid(format!(
                    "cannot coarsen panel {panel}: child {ch} is refined"
                )));
            }
        }
        for ch in children {
            self.panels[ch].dead = true;
        }
        self.panels[panel].children = None;
        Ok(())
    }

    /// Recomputes the hanging-point map from the active mesh: a registered
    /// edge midpoint hangs when the full edge is still in active use on one
    /// side while its halves are in use on the other.
    pub fn rebuild_hanging(&mut self) {
        let em = self.edge_map();
        let mut hanging = BTreeMap::new();
        for (&(p, q), &m) in &self.edge_midpoint {
            let full_in_use = em.contains_key(&(p, q));
            let halves_in_use =
                em.contains_key(&edge_key(p, m)) && em.contains_key(&edge_key(m, q));
            if full_in_use && halves_in_use {
                hanging.insert(m, vec![(p, T::HALF), (q, T::HALF)]);
            }
        }
        self.hanging = hanging;
    }

    /// Curve point sets on boundaries between distinct regions, keyed by the
    /// (sorted) region pair. Points on a hanging half-edge are included.
    pub fn region_boundary_points(&self) -> BTreeMap<(Region, Region), Vec<usize>> {
        let em = self.edge_map();
        let mut curves: BTreeMap<(Region, Region), std::collections::BTreeSet<usize>> =
            BTreeMap::new();
        for k in self.active_panels() {
            for e in 0..4 {
                let my_region = self.panels[k].region;
                let mark = |other: usize,
                                curves: &mut BTreeMap<
                    (Region, Region),
                    std::collections::BTreeSet<usize>,
                >| {
                    let or = self.panels[other].region;
                    if or != my_region {
                        let key = if my_region < or {
                            (my_region, or)
                        } else {
                            (or, my_region)
                        };
                        let (p, q) = self.panel_edge_points(k, e);
                        let set = curves.entry(key).or_default();
                        set.insert(p);
                        set.insert(q);
                    }
                };
                match self.edge_neighbor(&em, k, e) {
                    EdgeNeighbor::Conforming(other) | EdgeNeighbor::Coarser(other) => {
                        mark(other, &mut curves)
                    }
                    EdgeNeighbor::Finer([a, b]) => {
                        mark(a, &mut curves);
                        mark(b, &mut curves);
                    }
                    EdgeNeighbor::Boundary => {}
                }
            }
        }
        curves
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect()
    }

    /// Checks that active neighbors differ by at most one refinement level.
    pub fn one_level_rule_holds(&self) -> bool {
        let em = self.edge_map();
        for k in self.active_panels() {
            for e in 0..4 {
                match self.edge_neighbor(&em, k, e) {
                    EdgeNeighbor::Conforming(o) | EdgeNeighbor::Coarser(o) => {
                        let dl = (self.panels[k].level as i32 - self.panels[o].level as i32).abs();
                        if dl > 1 {
                            return false;
                        }
                    }
                    EdgeNeighbor::Finer([a, b]) => {
                        for o in [a, b] {
                            let dl =
                                (self.panels[k].level as i32 - self.panels[o].level as i32).abs();
                            if dl > 1 {
                                return false;
                            }
                        }
                    }
                    EdgeNeighbor::Boundary => {}
                }
            }
        }
        true
    }
}

/// Classification of points created by a panel split.
#[derive(Debug, Clone, Copy)]
pub enum NewPointKind {
    /// Midpoint of the edge between the two given points.
    EdgeMidpoint(usize, usize),
    /// Center of the given parent panel.
    Center(usize),
}

/// Shared computation of the per-basis surface gradients from the tangents.
fn surface_gradient_basis_from_tangents<T: Float>(
    panel: usize,
    u: T,
    v: T,
    t_u: &Vector3<T>,
    t_v: &Vector3<T>,
) -> Result<[Vector3<T>; N_LOCAL]> {
    // first fundamental form G = D^T D
    let g11 = t_u.dot(t_u);
    let g12 = t_u.dot(t_v);
    let g22 = t_v.dot(t_v);
    let det = g11 * g22 - g12 * g12;
    let scale = (g11 + g22) * (g11 + g22);
    if det.abs() <= T::eps() * scale {
        return Err(Error::SingularMetric {
            panel,
            u: u.to_f64().unwrap_or(f64::NAN),
            v: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    let grads = shape::shape_gradients_unchecked(u, v);
    let mut out = [Vector3::zeros(); N_LOCAL];
    for l in 0..N_LOCAL {
        let [du, dv] = grads[l];
        // solve G a = (du, dv)
        let a0 = (g22 * du - g12 * dv) / det;
        let a1 = (g11 * dv - g12 * du) / det;
        out[l] = *t_u * a0 + *t_v * a1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type Mesh = ReferenceMesh<f64>;

    fn unit_square_panel() -> (Mesh, CurrentConfiguration<f64>) {
        let points = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
        ];
        let mesh = Mesh::new(points.clone(), vec![(Region::FreeSurface, [0, 1, 2, 3])]);
        let config = CurrentConfiguration::new(points);
        (mesh, config)
    }

    #[test]
    fn flat_unit_panel_geometry() {
        let (mesh, config) = unit_square_panel();
        for &(u, v) in &[(0.0, 0.0), (0.5, 0.5), (0.3, 0.9)] {
            let geo = mesh.panel_geometry(0, u, v, &config).unwrap();
            assert_relative_eq!(geo.jacobian, 1.0, epsilon = 1e-14);
            assert_relative_eq!(geo.normal.z.abs(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn scaled_panel_jacobian() {
        let (mesh, mut config) = unit_square_panel();
        for p in config.positions_mut() {
            *p *= 2.0;
        }
        let geo = mesh.panel_geometry(0, 0.25, 0.75, &config).unwrap();
        assert_relative_eq!(geo.jacobian, 4.0, epsilon = 1e-13);
    }

    #[test]
    fn curved_panel_jacobian_matches_finite_differences() {
        // panel inscribed in a quarter cylinder
        let points = vec![
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(1.0, 0.0, 1.0),
            Vector3::new(0.0, 1.0, 1.0),
        ];
        let mesh = Mesh::new(points.clone(), vec![(Region::Hull, [0, 1, 2, 3])]);
        let config = CurrentConfiguration::new(points);
        let (u, v) = (0.5, 0.5);
        let h = 1e-6;
        let p = |u: f64, v: f64| mesh.panel_geometry(0, u, v, &config).unwrap().point;
        let tu = (p(u + h, v) - p(u - h, v)) / (2.0 * h);
        let tv = (p(u, v + h) - p(u, v - h)) / (2.0 * h);
        let j_fd = tu.cross(&tv).norm();
        let geo = mesh.panel_geometry(0, u, v, &config).unwrap();
        assert_relative_eq!(geo.jacobian, j_fd, epsilon = 1e-8);
    }

    #[test]
    fn degenerate_panel_reported() {
        let points = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
        ];
        let mesh = Mesh::new(points.clone(), vec![(Region::Bottom, [0, 1, 2, 3])]);
        let config = CurrentConfiguration::new(points);
        let err = mesh.panel_geometry(0, 0.5, 0.5, &config).unwrap_err();
        match err {
            Error::DegeneratePanel { panel, .. } => assert_eq!(panel, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn surface_gradient_linear_field() {
        let (mesh, config) = unit_square_panel();
        // f = x at the corners
        let f = [0.0, 1.0, 0.0, 1.0];
        let grad = mesh.surface_gradient(0, 0.3, 0.7, &config, &f).unwrap();
        assert_relative_eq!((grad - Vector3::new(1.0, 0.0, 0.0)).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn surface_gradient_constant_field() {
        let (mesh, config) = unit_square_panel();
        let f = [3.5; 4];
        let grad = mesh.surface_gradient(0, 0.2, 0.4, &config, &f).unwrap();
        assert_relative_eq!(grad.norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn surface_gradient_tilted_panel_projects_tangentially() {
        // tilted planar panel, f = a . x at corners: surface gradient must be
        // a - (a.n) n
        let points = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.5),
            Vector3::new(0.0, 1.0, 0.2),
            Vector3::new(1.0, 1.0, 0.7),
        ];
        let mesh = Mesh::new(points.clone(), vec![(Region::Hull, [0, 1, 2, 3])]);
        let config = CurrentConfiguration::new(points.clone());
        let a = Vector3::new(0.3, -1.1, 0.8);
        let f = [
            a.dot(&points[0]),
            a.dot(&points[1]),
            a.dot(&points[2]),
            a.dot(&points[3]),
        ];
        let (u, v) = (0.45, 0.15);
        let geo = mesh.panel_geometry(0, u, v, &config).unwrap();
        let grad = mesh.surface_gradient(0, u, v, &config, &f).unwrap();
        let expected = a - geo.normal * a.dot(&geo.normal);
        assert_relative_eq!((grad - expected).norm(), 0.0, epsilon = 1e-12);
        // tangency of every basis gradient
        let basis = mesh.surface_gradient_basis(0, u, v, &config).unwrap();
        for b in basis {
            assert!(b.dot(&geo.normal).abs() <= 1e-12 * b.norm().max(1.0));
        }
    }

    fn two_by_two_patch() -> Mesh {
        // 3x3 points, 4 panels on the unit square
        let mut points = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                points.push(Vector3::new(i as f64 * 0.5, j as f64 * 0.5, 0.0));
            }
        }
        let id = |i: usize, j: usize| j * 3 + i;
        let mut panels = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                panels.push((
                    Region::FreeSurface,
                    [id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)],
                ));
            }
        }
        Mesh::new(points, panels)
    }

    #[test]
    fn split_creates_hanging_nodes() {
        let mut mesh = two_by_two_patch();
        let mut place = |_r: Region, _k: NewPointKind, x: Vector3<f64>| x;
        mesh.split_panel(0, &mut place).unwrap();
        mesh.rebuild_hanging();
        // panel 0 shares one edge with panel 1 and one with panel 2
        assert_eq!(mesh.hanging().len(), 2);
        for masters in mesh.hanging().values() {
            let w: f64 = masters.iter().map(|&(_, w)| w).sum();
            assert_relative_eq!(w, 1.0, epsilon = 1e-15);
        }
        assert_eq!(mesh.active_panels().len(), 7);
        assert!(mesh.one_level_rule_holds());
    }

    #[test]
    fn coarsen_restores_active_panel() {
        let mut mesh = two_by_two_patch();
        let mut place = |_r: Region, _k: NewPointKind, x: Vector3<f64>| x;
        mesh.split_panel(3, &mut place).unwrap();
        mesh.rebuild_hanging();
        assert_eq!(mesh.active_panels().len(), 7);
        mesh.coarsen_panel(3).unwrap();
        mesh.rebuild_hanging();
        assert_eq!(mesh.active_panels().len(), 4);
        assert!(mesh.hanging().is_empty());
    }

    #[test]
    fn edge_neighbors_across_refinement() {
        let mut mesh = two_by_two_patch();
        let mut place = |_r: Region, _k: NewPointKind, x: Vector3<f64>| x;
        let children = mesh.split_panel(0, &mut place).unwrap();
        mesh.rebuild_hanging();
        let em = mesh.edge_map();
        // panel 1 (right of panel 0): its left edge sees two finer panels
        let mut found_finer = false;
        for e in 0..4 {
            if let EdgeNeighbor::Finer(pair) = mesh.edge_neighbor(&em, 1, e) {
                for k in pair {
                    assert!(children.contains(&k));
                }
                found_finer = true;
            }
        }
        assert!(found_finer);
        // child 1 of panel 0 must see panel 1 as coarser neighbor
        let mut found_coarser = false;
        for e in 0..4 {
            if let EdgeNeighbor::Coarser(k) = mesh.edge_neighbor(&em, children[1], e) {
                assert_eq!(k, 1);
                found_coarser = true;
            }
        }
        assert!(found_coarser);
    }

    #[test]
    fn refine_all_preserves_area() {
        let mut mesh = two_by_two_patch();
        let mut place = |_r: Region, _k: NewPointKind, x: Vector3<f64>| x;
        for k in mesh.active_panels() {
            mesh.split_panel(k, &mut place).unwrap();
        }
        mesh.rebuild_hanging();
        assert!(mesh.hanging().is_empty());
        let config = mesh.reference_configuration();
        let area = mesh.total_area(&config, 3).unwrap();
        assert_relative_eq!(area, 1.0, epsilon = 1e-13);
    }
}
