//! Scalar DOF management: one DOF per (point, region) pair so that nodes on
//! edges between boundary-condition zones carry one degree of freedom per
//! adjacent region, plus hanging-node constraints and their condensation.

use super::{CurrentConfiguration, Region, ReferenceMesh, N_LOCAL};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::scalar::Float;
use nalgebra::{DMatrix, DVector, Vector3};
use std::collections::BTreeMap;

/// A scalar degree of freedom: a mesh point seen from one region side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dof {
    pub point: usize,
    pub region: Region,
}

/// Global DOF numbering with duplicated edge nodes and hanging constraints.
#[derive(Debug, Clone)]
pub struct DofHandler {
    dofs: Vec<Dof>,
    dof_index: BTreeMap<(usize, Region), usize>,
    /// point -> its duplicate family (ascending dof ids)
    point_dofs: BTreeMap<usize, Vec<usize>>,
    /// active panel -> global dof of each corner
    panel_dofs: BTreeMap<usize, [usize; N_LOCAL]>,
    /// constrained dof -> (free master dof, weight), fully resolved
    constraints: BTreeMap<usize, Vec<(usize, f64)>>,
    free: Vec<usize>,
    free_index: Vec<Option<usize>>,
}

/// Builds the DOF numbering for the active panels of `mesh`, duplicating
/// every node that touches more than one region.
pub fn duplicate_edge_nodes<T: Float>(mesh: &ReferenceMesh<T>) -> Result<DofHandler> {
    // regions adjacent to each point
    let mut point_regions: BTreeMap<usize, Vec<Region>> = BTreeMap::new();
    for k in mesh.active_panels() {
        let region = mesh.panel(k).region;
        for &p in &mesh.panel(k).corners {
            let regions = point_regions.entry(p).or_default();
            if !regions.contains(&region) {
                regions.push(region);
            }
        }
    }

    let mut dofs = Vec::new();
    let mut dof_index = BTreeMap::new();
    let mut point_dofs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&p, regions) in &mut point_regions {
        regions.sort();
        if regions.len() > 3 {
            return Err(Error::TooManyRegions {
                node: p,
                count: regions.len(),
            });
        }
        for &r in regions.iter() {
            let id = dofs.len();
            dofs.push(Dof { point: p, region: r });
            dof_index.insert((p, r), id);
            point_dofs.entry(p).or_default().push(id);
        }
    }

    let mut panel_dofs = BTreeMap::new();
    for k in mesh.active_panels() {
        let region = mesh.panel(k).region;
        let mut local = [0usize; N_LOCAL];
        for (l, &p) in mesh.panel(k).corners.iter().enumerate() {
            local[l] = dof_index[&(p, region)];
        }
        panel_dofs.insert(k, local);
    }

    // hanging constraints, per duplicate family of the hanging point
    let mut raw: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (&m, masters) in mesh.hanging() {
        for &r in &point_regions[&m] {
            let dof_m = dof_index[&(m, r)];
            let mut entry = Vec::with_capacity(masters.len());
            for &(master_point, w) in masters {
                let dof_master = *dof_index.get(&(master_point, r)).ok_or_else(|| {
                    Error::Invalid(format!(
                        "hanging point {m}: master {master_point} carries no dof in region {r:?}"
                    ))
                })?;
                entry.push((dof_master, w.to_f64().unwrap()));
            }
            raw.insert(dof_m, entry);
        }
    }

    // resolve chains so that masters are always free dofs
    let mut constraints: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &c in raw.keys() {
        let mut resolved: BTreeMap<usize, f64> = BTreeMap::new();
        let mut stack = vec![(c, 1.0)];
        let mut depth = 0usize;
        while let Some((d, w)) = stack.pop() {
            depth += 1;
            if depth > 64 {
                return Err(Error::CyclicConstraint { dof: c });
            }
            match raw.get(&d) {
                Some(masters) if d != c || depth == 1 => {
                    for &(md, mw) in masters {
                        if md == c {
                            return Err(Error::CyclicConstraint { dof: c });
                        }
                        stack.push((md, w * mw));
                    }
                }
                _ => {
                    *resolved.entry(d).or_insert(0.0) += w;
                }
            }
        }
        constraints.insert(c, resolved.into_iter().collect());
    }

    let free: Vec<usize> = (0..dofs.len())
        .filter(|d| !constraints.contains_key(d))
        .collect();
    let mut free_index = vec![None; dofs.len()];
    for (fi, &d) in free.iter().enumerate() {
        free_index[d] = Some(fi);
    }

    Ok(DofHandler {
        dofs,
        dof_index,
        point_dofs,
        panel_dofs,
        constraints,
        free,
        free_index,
    })
}

impl DofHandler {
    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn dof(&self, d: usize) -> Dof {
        self.dofs[d]
    }

    pub fn dof_at(&self, point: usize, region: Region) -> Option<usize> {
        self.dof_index.get(&(point, region)).copied()
    }

    /// Duplicate family of a point, ascending dof ids.
    pub fn dofs_of_point(&self, point: usize) -> &[usize] {
        self.point_dofs
            .get(&point)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// Points carrying at least one dof, ascending.
    pub fn points(&self) -> Vec<usize> {
        self.point_dofs.keys().copied().collect()
    }

    pub fn panel_dofs(&self, panel: usize) -> [usize; N_LOCAL] {
        self.panel_dofs[&panel]
    }

    pub fn panels(&self) -> impl Iterator<Item = (usize, [usize; N_LOCAL])> + '_ {
        self.panel_dofs.iter().map(|(&k, &d)| (k, d))
    }

    pub fn is_constrained(&self, d: usize) -> bool {
        self.constraints.contains_key(&d)
    }

    pub fn constraint(&self, d: usize) -> Option<&[(usize, f64)]> {
        self.constraints.get(&d).map(|v| v.as_slice())
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, d: usize) -> Option<usize> {
        self.free_index[d]
    }

    /// All dofs belonging to a region, ascending.
    pub fn dofs_in_region(&self, region: Region) -> Vec<usize> {
        (0..self.dofs.len())
            .filter(|&d| self.dofs[d].region == region)
            .collect()
    }

    /// Overwrites constrained entries with the interpolation of their
    /// masters, leaving free entries untouched.
    pub fn distribute<T: Float>(&self, values: &mut DVector<T>) {
        for (&c, masters) in &self.constraints {
            let mut v = T::ZERO;
            for &(m, w) in masters {
                v += values[m] * crate::scalar::real::<T>(w);
            }
            values[c] = v;
        }
    }

    /// Expands a free-dof vector to a full-dof vector, applying constraints.
    pub fn expand<T: Float>(&self, free_values: &DVector<T>) -> DVector<T> {
        let mut full = DVector::zeros(self.n_dofs());
        for (fi, &d) in self.free.iter().enumerate() {
            full[d] = free_values[fi];
        }
        self.distribute(&mut full);
        full
    }

    /// Restricts a full-dof vector to its free entries (no accumulation).
    pub fn restrict<T: Float>(&self, full: &DVector<T>) -> DVector<T> {
        DVector::from_fn(self.free.len(), |fi, _| full[self.free[fi]])
    }

    /// Galerkin condensation `C^T A C` of a matrix assembled on all dofs.
    pub fn condense_galerkin<T: Float>(&self, a: &CsrMatrix<T>) -> CsrMatrix<T> {
        let mut triplets = Vec::with_capacity(a.nnz() * 2);
        for r in 0..a.nrows() {
            let (cols, vals) = a.row(r);
            for (c, v) in cols.iter().zip(vals.iter()) {
                for (fr, wr) in self.expand_dof(r) {
                    for (fc, wc) in self.expand_dof(*c) {
                        triplets.push((
                            self.free_index[fr].unwrap(),
                            self.free_index[fc].unwrap(),
                            *v * crate::scalar::real::<T>(wr * wc),
                        ));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.free.len(), self.free.len(), triplets)
    }

    /// Galerkin condensation `C^T b` of a vector assembled on all dofs.
    pub fn condense_vector<T: Float>(&self, b: &DVector<T>) -> DVector<T> {
        let mut out = DVector::zeros(self.free.len());
        for d in 0..self.n_dofs() {
            for (fd, w) in self.expand_dof(d) {
                out[self.free_index[fd].unwrap()] += b[d] * crate::scalar::real::<T>(w);
            }
        }
        out
    }

    /// Collocation condensation: keeps free rows and folds constrained
    /// columns into their masters (`A[free rows] * C`).
    pub fn condense_collocation<T: Float>(&self, a: &DMatrix<T>) -> DMatrix<T> {
        let nf = self.free.len();
        let mut out = DMatrix::zeros(nf, nf);
        for (fi, &r) in self.free.iter().enumerate() {
            for c in 0..self.n_dofs() {
                let v = a[(r, c)];
                if v == T::ZERO {
                    continue;
                }
                for (fc, w) in self.expand_dof(c) {
                    out[(fi, self.free_index[fc].unwrap())] += v * crate::scalar::real::<T>(w);
                }
            }
        }
        out
    }

    /// The free dofs (with weights) a dof expands to: itself when free, its
    /// masters when constrained.
    fn expand_dof(&self, d: usize) -> Vec<(usize, f64)> {
        match self.constraints.get(&d) {
            Some(masters) => masters.clone(),
            None => vec![(d, 1.0)],
        }
    }

    /// Outward unit normal per dof in the given configuration, averaged over
    /// the panels of the dof's own region side with corner-Jacobian weights.
    pub fn dof_normals<T: Float>(
        &self,
        mesh: &ReferenceMesh<T>,
        config: &CurrentConfiguration<T>,
    ) -> Result<Vec<Vector3<T>>> {
        let mut normals = vec![Vector3::<T>::zeros(); self.n_dofs()];
        for (k, dofs) in self.panels() {
            for (l, &d) in dofs.iter().enumerate() {
                let (cu, cv) = super::shape::CORNER_UV[l];
                let geo = mesh.panel_geometry(
                    k,
                    crate::scalar::real(cu),
                    crate::scalar::real(cv),
                    config,
                )?;
                normals[d] += geo.normal * geo.jacobian;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > T::ZERO {
                *n /= len;
            }
        }
        Ok(normals)
    }
}

/// Applies hanging-node constraints to a nodal vector: every constrained
/// entry is replaced by the interpolation of its masters.
pub fn constrain_hanging<T: Float>(field: &DVector<T>, dofs: &DofHandler) -> DVector<T> {
    let mut out = field.clone();
    dofs.distribute(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::NewPointKind;
    use approx::assert_relative_eq;

    /// Closed unit cube mesh with one region per face, n x n panels each.
    pub fn cube_mesh(n: usize, regions: [Region; 6]) -> ReferenceMesh<f64> {
        crate::mesh::io::structured_cube(n, regions)
    }

    #[test]
    fn cube_duplicates_by_adjacency() {
        let mesh = cube_mesh(
            2,
            [
                Region::Bottom,
                Region::FreeSurface,
                Region::Hull,
                Region::FarField,
                Region::Bottom,
                Region::FarField,
            ],
        );
        let dofs = duplicate_edge_nodes(&mesh).unwrap();
        //ptwise duplicate counts: interior of a face -> 1
        let mut ones = 0;
        let mut twos = 0;
        let mut threes = 0;
        for p in dofs.points() {
            match dofs.dofs_of_point(p).len() {
                1 => ones += 1,
                2 => twos += 1,
                3 => threes += 1,
                other => panic!("unexpected family size {other}"),
            }
        }
        // 2x2 faces: 1 interior point each, plus the mid-edge points of the
        // two same-region edges (bottom/bottom and far-field/far-field)
        assert_eq!(ones, 8);
        assert!(twos > 0);
        assert!(threes > 0);
    }

    #[test]
    fn cube_face_edge_corner_dof_counts() {
        // all six faces distinct region tags is impossible with 4 tags, so
        // use a 1x1 cube with tags that make every corner a 3-family
        let mesh = cube_mesh(
            1,
            [
                Region::Bottom,
                Region::FreeSurface,
                Region::Hull,
                Region::FarField,
                Region::Bottom,
                Region::FreeSurface,
            ],
        );
        let dofs = duplicate_edge_nodes(&mesh).unwrap();
        for p in dofs.points() {
            let fam = dofs.dofs_of_point(p).len();
            assert!(fam == 2 || fam == 3, "cube corner families are 2 or 3, got {fam}");
        }
    }

    #[test]
    fn cube_edge_duplicates_have_perpendicular_normals() {
        let mesh = cube_mesh(
            2,
            [
                Region::Bottom,
                Region::FreeSurface,
                Region::Hull,
                Region::FarField,
                Region::Bottom,
                Region::FarField,
            ],
        );
        let dofs = duplicate_edge_nodes(&mesh).unwrap();
        let config = mesh.reference_configuration();
        let normals = dofs.dof_normals(&mesh, &config).unwrap();
        let mut checked = 0;
        for p in dofs.points() {
            let fam = dofs.dofs_of_point(p);
            if fam.len() == 2 {
                let d = normals[fam[0]].dot(&normals[fam[1]]);
                assert_relative_eq!(d, 0.0, epsilon = 1e-12);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn hanging_constraint_midpoint_average() {
        let mut points = Vec::new();
        for j in 0..2 {
            for i in 0..3 {
                points.push(Vector3::new(i as f64, j as f64, 0.0));
            }
        }
        let mut mesh = ReferenceMesh::new(
            points,
            vec![
                (Region::FreeSurface, [0, 1, 3, 4]),
                (Region::FreeSurface, [1, 2, 4, 5]),
            ],
        );
        let mut place = |_r: Region, _k: NewPointKind, x: Vector3<f64>| x;
        mesh.split_panel(0, &mut place).unwrap();
        mesh.rebuild_hanging();
        let dofs = duplicate_edge_nodes(&mesh).unwrap();
        assert!(dofs.n_free() < dofs.n_dofs());

        // field with masters 2.0 and 4.0 on the hanging edge
        let mut field = DVector::zeros(dofs.n_dofs());
        for d in 0..dofs.n_dofs() {
            let p = dofs.dof(d).point;
            field[d] = mesh.point(p).y * 2.0 + 2.0; // 2 at y=0, 4 at y=1
        }
        let constrained = constrain_hanging(&field, &dofs);
        for (&c, masters) in mesh.hanging() {
            let d = dofs.dofs_of_point(c)[0];
            let expected: f64 = masters
                .iter()
                .map(|&(m, w)| (mesh.point(m).y * 2.0 + 2.0) * w)
                .sum();
            assert_relative_eq!(constrained[d], expected, epsilon = 1e-14);
            assert_relative_eq!(expected, 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_field_unchanged_by_constraints() {
        let mut mesh = cube_mesh(
            2,
            [
                Region::Bottom,
                Region::FreeSurface,
                Region::Hull,
                Region::FarField,
                Region::Bottom,
                Region::FarField,
            ],
        );
        let mut place = |_r: Region, _k: NewPointKind, x: Vector3<f64>| x;
        let first = mesh.active_panels()[0];
        mesh.split_panel(first, &mut place).unwrap();
        mesh.rebuild_hanging();
        let dofs = duplicate_edge_nodes(&mesh).unwrap();
        let field = DVector::from_element(dofs.n_dofs(), 7.25);
        let constrained = constrain_hanging(&field, &dofs);
        assert_relative_eq!((constrained - field).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn hanging_field_continuous_across_edge() {
        // 2-cell patch, one cell refined: evaluate the constrained field from
        // both sides of the hanging edge at sample points
        let mut points = Vec::new();
        for j in 0..2 {
            for i in 0..3 {
                points.push(Vector3::new(i as f64, j as f64, 0.0));
            }
        }
        let mut mesh = ReferenceMesh::new(
            points,
            vec![
                (Region::FreeSurface, [0, 1, 3, 4]),
                (Region::FreeSurface, [1, 2, 4, 5]),
            ],
        );
        let mut place = |_r: Region, _k: NewPointKind, x: Vector3<f64>| x;
        let children = mesh.split_panel(0, &mut place).unwrap();
        mesh.rebuild_hanging();
        let dofs = duplicate_edge_nodes(&mesh).unwrap();

        // random-ish free field, constrained afterwards
        let mut field = DVector::zeros(dofs.n_dofs());
        for d in 0..dofs.n_dofs() {
            field[d] = ((d * 2654435761) % 1000) as f64 / 1000.0;
        }
        let field = constrain_hanging(&field, &dofs);

        let config = mesh.reference_configuration();
        // the shared edge is x = 1: children[1] and [3] touch it, panel 1 too
        let eval = |panel: usize, u: f64, v: f64| -> (Vector3<f64>, f64) {
            let geo = mesh.panel_geometry(panel, u, v, &config).unwrap();
            let n = crate::mesh::shape::shape_values(u, v).unwrap();
            let pd = dofs.panel_dofs(panel);
            let mut val = 0.0;
            for l in 0..4 {
                val += n[l] * field[pd[l]];
            }
            (geo.point, val)
        };
        for s in 0..=20 {
            let y = s as f64 / 20.0;
            // coarse side: panel 1, left edge is u = 0
            let (pc, vc) = eval(1, 0.0, y);
            // fine side: lower child (children[1]) covers y in [0, 0.5]
            let (pf, vf) = if y <= 0.5 {
                eval(children[1], 1.0, y * 2.0)
            } else {
                eval(children[3], 1.0, (y - 0.5) * 2.0)
            };
            assert_relative_eq!((pc - pf).norm(), 0.0, epsilon = 1e-13);
            assert_relative_eq!(vc, vf, epsilon = 1e-13);
        }
    }
}
