//! Mixed boundary-value solve on an assembled BEM system, duplicate-node
//! resolution, interior potential evaluation, and debugging output.

use super::assembly::BemSystem;
use crate::error::{Error, Result};
use crate::linalg::{gmres, jacobi_precond, GmresParams};
use crate::mesh::{CurrentConfiguration, DofHandler, ReferenceMesh, N_LOCAL};
use crate::scalar::Float;
use nalgebra::{DMatrix, DVector};
use std::io::Write;

/// Boundary condition kind of a scalar DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// potential given (free surface); the normal derivative is unknown
    Dirichlet,
    /// normal derivative given (hull, bottom, far field); potential unknown
    Neumann,
}

/// Per-DOF boundary condition assignment with the given data values.
/// Constrained (hanging) entries of `given` are ignored and re-derived from
/// their masters.
#[derive(Debug, Clone)]
pub struct MixedBcAssignment<T> {
    pub kinds: Vec<BcKind>,
    pub given: DVector<T>,
}

impl<T: Float> MixedBcAssignment<T> {
    /// Assigns kinds by region: free-surface DOFs are Dirichlet, everything
    /// else Neumann.
    pub fn by_region<F>(dofs: &DofHandler, is_dirichlet: F, given: DVector<T>) -> Self
    where
        F: Fn(crate::mesh::Region) -> bool,
    {
        let kinds = (0..dofs.n_dofs())
            .map(|d| {
                if is_dirichlet(dofs.dof(d).region) {
                    BcKind::Dirichlet
                } else {
                    BcKind::Neumann
                }
            })
            .collect();
        Self { kinds, given }
    }
}

/// Duplicate-family resolution: each DOF points to the representative of its
/// point family. The representative carries the boundary integral equation;
/// the other duplicates carry potential-continuity rows.
#[derive(Debug, Clone)]
pub struct DuplicateResolution {
    rep: Vec<usize>,
}

impl DuplicateResolution {
    pub fn representative(&self, dof: usize) -> usize {
        self.rep[dof]
    }

    pub fn is_representative(&self, dof: usize) -> bool {
        self.rep[dof] == dof
    }
}

/// Chooses the collocation representative of every duplicate family: the
/// Dirichlet side when there is exactly one, otherwise the lowest DOF id.
/// More than one Dirichlet duplicate in a family is rejected.
pub fn resolve_duplicates<T: Float>(
    dofs: &DofHandler,
    bc: &MixedBcAssignment<T>,
) -> Result<DuplicateResolution> {
    let mut rep = (0..dofs.n_dofs()).collect::<Vec<_>>();
    for p in dofs.points() {
        let family = dofs.dofs_of_point(p);
        if family.len() <= 1 {
            continue;
        }
        let dirichlet: Vec<usize> = family
            .iter()
            .copied()
            .filter(|&d| bc.kinds[d] == BcKind::Dirichlet)
            .collect();
        let r = match dirichlet.len() {
            0 => family[0],
            1 => dirichlet[0],
            count => {
                return Err(Error::MultipleDirichletDuplicates { node: p, count });
            }
        };
        for &d in family {
            rep[d] = r;
        }
    }
    Ok(DuplicateResolution { rep })
}

/// Residual of the collocation system over free DOFs for full-length nodal
/// vectors (constrained entries must already be distributed):
/// representative rows evaluate `alpha phi + N phi - D phin`, the remaining
/// duplicates evaluate potential continuity against their representative.
pub fn bie_residual<T: Float>(
    sys: &BemSystem<T>,
    dofs: &DofHandler,
    resolution: &DuplicateResolution,
    phi: &DVector<T>,
    phin: &DVector<T>,
) -> DVector<T> {
    let mut out = DVector::zeros(dofs.n_free());
    for (fi, &i) in dofs.free_dofs().iter().enumerate() {
        if resolution.is_representative(i) {
            let mut acc = sys.alpha[i] * phi[i];
            for j in 0..dofs.n_dofs() {
                acc += sys.neumann[(i, j)] * phi[j] - sys.dirichlet[(i, j)] * phin[j];
            }
            out[fi] = acc;
        } else {
            out[fi] = phi[i] - phi[resolution.representative(i)];
        }
    }
    out
}

/// Result of a mixed boundary-value solve.
#[derive(Debug, Clone)]
pub struct MixedSolve<T> {
    pub phi: DVector<T>,
    pub phin: DVector<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Solves the mixed Laplace problem `(alpha + N) phi = D phin` with the
/// given per-DOF data: the unknowns are `phin` on Dirichlet DOFs and `phi`
/// on Neumann DOFs. Returns full nodal vectors with constraints applied.
pub fn solve_mixed_bvp<T: Float>(
    sys: &BemSystem<T>,
    bc: &MixedBcAssignment<T>,
    dofs: &DofHandler,
    params: &GmresParams<T>,
) -> Result<MixedSolve<T>> {
    let n = dofs.n_dofs();
    assert_eq!(sys.alpha.len(), n, "system and dof handler disagree");
    if !bc.kinds.iter().any(|&k| k == BcKind::Dirichlet) {
        return Err(Error::SingularSystem(
            "all-Neumann closed boundary: potential determined only up to a constant".into(),
        ));
    }
    for (i, &a) in sys.alpha.iter().enumerate() {
        if dofs.free_index(i).is_some() && !(a > T::ZERO && a < T::ONE) {
            return Err(Error::SingularSystem(format!(
                "solid angle fraction alpha[{i}] = {} outside (0, 1); boundary not closed?",
                a.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    let resolution = resolve_duplicates(dofs, bc)?;

    // condensed operators over free dofs
    let mut a_full = sys.neumann.clone();
    for i in 0..n {
        a_full[(i, i)] += sys.alpha[i];
    }
    let a = dofs.condense_collocation(&a_full);
    let d = dofs.condense_collocation(&sys.dirichlet);

    // distributed given data
    let mut given = bc.given.clone();
    dofs.distribute(&mut given);

    let nf = dofs.n_free();
    let mut matrix = DMatrix::<T>::zeros(nf, nf);
    let mut rhs = DVector::<T>::zeros(nf);
    for (fi, &i) in dofs.free_dofs().iter().enumerate() {
        if resolution.is_representative(i) {
            for (fj, &j) in dofs.free_dofs().iter().enumerate() {
                match bc.kinds[j] {
                    BcKind::Neumann => {
                        matrix[(fi, fj)] += a[(fi, fj)];
                        rhs[fi] += d[(fi, fj)] * given[j];
                    }
                    BcKind::Dirichlet => {
                        matrix[(fi, fj)] -= d[(fi, fj)];
                        rhs[fi] -= a[(fi, fj)] * given[j];
                    }
                }
            }
        } else {
            // potential continuity with the representative
            let r = resolution.representative(i);
            debug_assert_eq!(bc.kinds[i], BcKind::Neumann);
            matrix[(fi, fi)] = T::ONE;
            match bc.kinds[r] {
                BcKind::Dirichlet => rhs[fi] = given[r],
                BcKind::Neumann => {
                    let fr = dofs.free_index(r).expect("representative must be free");
                    matrix[(fi, fr)] = -T::ONE;
                }
            }
        }
    }

    let mut diag = matrix.diagonal();
    for v in diag.iter_mut() {
        if *v == T::ZERO {
            *v = T::ONE;
        }
    }
    let solve = gmres(
        |x| &matrix * x,
        jacobi_precond(&diag),
        &rhs,
        None,
        params,
        "mixed BVP",
    )?;

    let mut phi = DVector::zeros(n);
    let mut phin = DVector::zeros(n);
    for (fi, &i) in dofs.free_dofs().iter().enumerate() {
        match bc.kinds[i] {
            BcKind::Dirichlet => {
                phi[i] = given[i];
                phin[i] = solve.solution[fi];
            }
            BcKind::Neumann => {
                phi[i] = solve.solution[fi];
                phin[i] = given[i];
            }
        }
    }
    dofs.distribute(&mut phi);
    dofs.distribute(&mut phin);
    Ok(MixedSolve {
        phi,
        phin,
        iterations: solve.iterations,
        residual: solve.residual,
    })
}

/// Interior potential reconstructed from boundary data by the representation
/// formula; `reliable` is false when the point is within one panel diameter
/// of the boundary.
#[derive(Debug, Clone)]
pub struct InteriorEvaluation<T> {
    pub value: T,
    pub min_panel_distance: T,
    pub reliable: bool,
}

/// Evaluates `phi(x0) = int (phin G - dG/dn phi) dGamma` at a point strictly
/// inside the domain using the regular quadrature rule.
pub fn evaluate_interior_potential<T: Float>(
    mesh: &ReferenceMesh<T>,
    config: &CurrentConfiguration<T>,
    dofs: &DofHandler,
    phi: &DVector<T>,
    phin: &DVector<T>,
    point: nalgebra::Vector3<T>,
    quad: &super::quadrature::QuadratureRule<T>,
) -> Result<InteriorEvaluation<T>> {
    let mut value = T::ZERO;
    let mut min_distance = T::from_f64(f64::INFINITY).unwrap();
    let mut reliable = true;
    for (k, panel_dofs) in dofs.panels() {
        let diameter = mesh.panel_diameter(k, config);
        for qp in quad.regular() {
            let geo = mesh.panel_geometry(k, qp.u, qp.v, config)?;
            let shape = crate::mesh::shape::shape_values_unchecked(qp.u, qp.v);
            let r = geo.point - point;
            let dist = r.norm();
            if dist == T::ZERO {
                return Err(Error::ZeroSeparation);
            }
            if dist < min_distance {
                min_distance = dist;
            }
            if dist < diameter {
                reliable = false;
            }
            let mut phi_q = T::ZERO;
            let mut phin_q = T::ZERO;
            for l in 0..N_LOCAL {
                phi_q += phi[panel_dofs[l]] * shape[l];
                phin_q += phin[panel_dofs[l]] * shape[l];
            }
            let jw = geo.jacobian * qp.weight;
            let g = super::kernel::green_function_unchecked(dist);
            let dg = super::kernel::green_normal_gradient_unchecked(&r, &geo.normal, dist);
            value += (phin_q * g - dg * phi_q) * jw;
        }
    }
    Ok(InteriorEvaluation {
        value,
        min_panel_distance: min_distance,
        reliable,
    })
}

/// Dumps a dense matrix in Matrix Market coordinate format.
pub fn write_matrix_market<T: Float, W: Write>(
    out: &mut W,
    matrix: &DMatrix<T>,
    comment: &str,
) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "% {comment}")?;
    let nnz = matrix.iter().filter(|&&v| v != T::ZERO).count();
    writeln!(out, "{} {} {}", matrix.nrows(), matrix.ncols(), nnz)?;
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            let v = matrix[(i, j)];
            if v != T::ZERO {
                writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v.to_f64().unwrap())?;
            }
        }
    }
    Ok(())
}
