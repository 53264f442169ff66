//! Collocated assembly of the Dirichlet and Neumann boundary-operator
//! matrices, with the diagonal solid-angle fractions recovered by the rigid
//! mode technique.

use super::kernel::{green_function_unchecked, green_normal_gradient_unchecked};
use super::quadrature::QuadratureRule;
use crate::error::Result;
use crate::mesh::{CurrentConfiguration, DofHandler, ReferenceMesh, N_LOCAL};
use crate::scalar::Float;
use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

/// Dense collocation BEM system: solid-angle diagonal and the Neumann /
/// Dirichlet matrices over all scalar DOFs. Rows of constrained (hanging)
/// DOFs are zero; they do not collocate.
#[derive(Debug, Clone)]
pub struct BemSystem<T> {
    pub alpha: DVector<T>,
    pub neumann: DMatrix<T>,
    pub dirichlet: DMatrix<T>,
}

impl<T: Float> BemSystem<T> {
    pub fn n_dofs(&self) -> usize {
        self.alpha.len()
    }
}

struct CachedQuadraturePoint<T> {
    position: Vector3<T>,
    normal: Vector3<T>,
    jw: T,
    shape: [T; N_LOCAL],
}

struct PanelCache<T> {
    panel: usize,
    dofs: [usize; N_LOCAL],
    corners: [usize; N_LOCAL],
    centroid: Vector3<T>,
    diameter: T,
    regular: Vec<CachedQuadraturePoint<T>>,
    near: Vec<CachedQuadraturePoint<T>>,
}

fn cache_rule_points<T: Float>(
    mesh: &ReferenceMesh<T>,
    config: &CurrentConfiguration<T>,
    panel: usize,
    rule: &[super::quadrature::QuadPoint<T>],
) -> Result<Vec<CachedQuadraturePoint<T>>> {
    rule.iter()
        .map(|qp| {
            let geo = mesh.panel_geometry(panel, qp.u, qp.v, config)?;
            Ok(CachedQuadraturePoint {
                position: geo.point,
                normal: geo.normal,
                jw: geo.jacobian * qp.weight,
                shape: crate::mesh::shape::shape_values_unchecked(qp.u, qp.v),
            })
        })
        .collect()
}

/// Assembles the dense Neumann and Dirichlet matrices for the current
/// configuration. Regular Gauss quadrature is used for well-separated
/// panels, an escalated rule within two panel diameters of the collocation
/// point, and the degenerate triangle-fan rule when the collocation point is
/// a vertex of the integration panel. The solid-angle diagonal comes from
/// the rigid-mode row sums.
pub fn assemble_system<T: Float>(
    mesh: &ReferenceMesh<T>,
    config: &CurrentConfiguration<T>,
    dofs: &DofHandler,
    quad: &QuadratureRule<T>,
) -> Result<BemSystem<T>> {
    let n = dofs.n_dofs();
    let caches: Vec<PanelCache<T>> = dofs
        .panels()
        .map(|(k, panel_dofs)| {
            let corners = mesh.panel(k).corners;
            let centroid = corners
                .iter()
                .fold(Vector3::zeros(), |acc, &c| acc + config.point(c))
                * crate::scalar::real::<T>(0.25);
            Ok(PanelCache {
                panel: k,
                dofs: panel_dofs,
                corners,
                centroid,
                diameter: mesh.panel_diameter(k, config),
                regular: cache_rule_points(mesh, config, k, quad.regular())?,
                near: cache_rule_points(mesh, config, k, quad.near())?,
            })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<(usize, Vec<T>, Vec<T>)> = crate::threads::pool().install(|| {
        dofs.free_dofs()
            .par_iter()
            .map(|&i| {
                let collocation = config.point(dofs.dof(i).point);
                let point_id = dofs.dof(i).point;
                let mut row_n = vec![T::ZERO; n];
                let mut row_d = vec![T::ZERO; n];
                for cache in &caches {
                    if let Some(corner) = cache.corners.iter().position(|&c| c == point_id) {
                        // singular integration, collocation point on a vertex
                        for qp in quad.singular_at_corner(corner) {
                            let geo = mesh
                                .panel_geometry(cache.panel, qp.u, qp.v, config)
                                .expect("validated panel");
                            let shape = crate::mesh::shape::shape_values_unchecked(qp.u, qp.v);
                            let r = geo.point - collocation;
                            let dist = r.norm();
                            let jw = geo.jacobian * qp.weight;
                            let g = green_function_unchecked(dist) * jw;
                            let dg = green_normal_gradient_unchecked(&r, &geo.normal, dist) * jw;
                            for l in 0..N_LOCAL {
                                row_d[cache.dofs[l]] += g * shape[l];
                                row_n[cache.dofs[l]] += dg * shape[l];
                            }
                        }
                    } else {
                        let near = (cache.centroid - collocation).norm()
                            < quad.near_radius_diameters * cache.diameter;
                        let points = if near { &cache.near } else { &cache.regular };
                        for qp in points {
                            let r = qp.position - collocation;
                            let dist = r.norm();
                            let g = green_function_unchecked(dist) * qp.jw;
                            let dg = green_normal_gradient_unchecked(&r, &qp.normal, dist) * qp.jw;
                            for l in 0..N_LOCAL {
                                row_d[cache.dofs[l]] += g * qp.shape[l];
                                row_n[cache.dofs[l]] += dg * qp.shape[l];
                            }
                        }
                    }
                }
                (i, row_n, row_d)
            })
            .collect()
    });

    let mut neumann = DMatrix::zeros(n, n);
    let mut dirichlet = DMatrix::zeros(n, n);
    for (i, row_n, row_d) in rows {
        for j in 0..n {
            neumann[(i, j)] = row_n[j];
            dirichlet[(i, j)] = row_d[j];
        }
    }
    let alpha = compute_alpha_rbm(&neumann);
    Ok(BemSystem {
        alpha,
        neumann,
        dirichlet,
    })
}

/// Rigid mode technique: the solid-angle diagonal is the negated row sum of
/// the Neumann matrix, so constants lie exactly in the kernel of
/// `alpha + N`.
pub fn compute_alpha_rbm<T: Float>(neumann: &DMatrix<T>) -> DVector<T> {
    DVector::from_fn(neumann.nrows(), |i, _| {
        let mut sum = T::ZERO;
        for j in 0..neumann.ncols() {
            sum += neumann[(i, j)];
        }
        -sum
    })
}
