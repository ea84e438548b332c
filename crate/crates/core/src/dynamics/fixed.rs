//! The conditional expectation `E` onto the fixed-point algebra.
//!
//! Two independent constructions are provided. [`fixed_projector`] stacks
//! the constraints `(M_g − I) x = 0` for the generator action matrices on
//! Hermitian coordinates and orthonormalizes the kernel. [`cesaro_projector`]
//! instead accumulates ergodic averages until they stop moving. For `Z`,
//! `Z^d` and finite groups, being fixed by the generators is the same as
//! being fixed by the group, so the two must agree.

use nalgebra::DVector;

use super::group::{GroupAction, GroupSpec};
use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, RMat, C64};

/// Relative singular-value cutoff for the constraint kernel.
pub const KERNEL_TOL: f64 = 1e-8;

/// Orthogonal projection onto the joint fixed space, in the inner product
/// `Re Σ_i tr(x_i† y_i)` on Hermitian coordinates.
///
/// The fixed space is closed under adjoints, so the complex projection is
/// `E(x) = E(Re x) + i E(Im x)`.
#[derive(Debug, Clone)]
pub struct FixedProjector {
    algebra: Algebra,
    basis: RMat,
    matrix: RMat,
}

impl FixedProjector {
    pub fn from_basis(algebra: &Algebra, basis: RMat) -> Self {
        let matrix = &basis * basis.transpose();
        Self {
            algebra: algebra.clone(),
            basis,
            matrix,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    /// Complex dimension of the fixed subspace.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormal basis of the Hermitian fixed space, as columns.
    pub fn basis(&self) -> &RMat {
        &self.basis
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    /// The basis columns as self-adjoint elements.
    pub fn basis_elements(&self) -> Vec<Element> {
        (0..self.dim())
            .map(|j| {
                let col: Vec<f64> = self.basis.column(j).iter().copied().collect();
                Element::from_hermitian_coords(&self.algebra, &col).expect("dimension matches")
            })
            .collect()
    }

    pub fn apply_coords(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * coords)
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        self.algebra.check_same(x.algebra())?;
        let re = self.apply_coords(&x.real_part().hermitian_coords());
        let re = Element::from_hermitian_coords(&self.algebra, re.as_slice())?;
        if x.self_adjoint_deviation() == 0.0 {
            return Ok(re);
        }
        let im = self.apply_coords(&x.imag_part().hermitian_coords());
        let im = Element::from_hermitian_coords(&self.algebra, im.as_slice())?;
        re.add(&im.scale(C64::new(0.0, 1.0)))
    }

    /// Largest commutator norm among pairs of basis elements; zero iff the
    /// fixed algebra is abelian.
    pub fn commutator_residual(&self) -> f64 {
        let b = self.basis_elements();
        let mut worst: f64 = 0.0;
        for i in 0..b.len() {
            for j in (i + 1)..b.len() {
                let c = b[i].commutator(&b[j]).expect("same algebra");
                worst = worst.max(c.operator_norm());
            }
        }
        worst
    }
}

fn require_projector_group(action: &GroupAction) -> Result<()> {
    if action.group().has_fixed_projector() {
        Ok(())
    } else {
        Err(Error::UnsupportedGroup(
            "fixed-point projector needs Z, Z^d or a finite group".into(),
        ))
    }
}

/// `E` from the kernel of the stacked generator constraints.
pub fn fixed_projector(action: &GroupAction) -> Result<FixedProjector> {
    require_projector_group(action)?;
    let d = action.algebra().hermitian_dim();
    let mats = action.generator_matrices();
    let mut stacked = RMat::zeros(d * mats.len(), d);
    for (g, m) in mats.iter().enumerate() {
        let block = m - RMat::identity(d, d);
        stacked.view_mut((g * d, 0), (d, d)).copy_from(&block);
    }
    let basis = linalg::real_nullspace(&stacked, KERNEL_TOL);
    if basis.ncols() == 0 {
        return Err(Error::Numerical("fixed space lost the unit".into()));
    }
    Ok(FixedProjector::from_basis(action.algebra(), basis))
}

/// Complex dimension of the joint fixed subspace.
pub fn fixed_dim(action: &GroupAction) -> Result<usize> {
    Ok(fixed_projector(action)?.dim())
}

/// Outcome of the Cesàro construction of `E`.
#[derive(Debug, Clone)]
pub struct CesaroProjector {
    pub matrix: RMat,
    /// Averaging length `N` reached per generator (finite groups: `|G|`).
    pub lengths: Vec<u64>,
    /// Squarings of the Cesàro mean after the doubling stage.
    pub squarings: Vec<u32>,
    /// Last Cauchy increment per generator.
    pub increments: Vec<f64>,
}

/// Stopping increment for both stages of the iteration.
pub const CESARO_CAUCHY_TOL: f64 = 1e-10;
/// Maximal number of doublings, so `N ≤ 2^CESARO_MAX_DOUBLINGS`.
pub const CESARO_MAX_DOUBLINGS: u32 = 20;
/// Maximal number of squarings of the Cesàro mean.
pub const CESARO_MAX_SQUARINGS: u32 = 40;

/// `lim_N (1/N) Σ_{j<N} M^j` in two stages.
///
/// Doubling `A_{2N} = A_N (I + M^N)/2` with `M^N` re-orthogonalized after
/// every squaring; its rounding floor grows like `N·ε`, so it is capped at
/// `2^CESARO_MAX_DOUBLINGS`. The mean `A_N` is normal with eigenvalue 1
/// exactly on fixed vectors and modulus below 1 elsewhere, so its powers
/// then converge geometrically to the same limit. Doubling stops after two
/// consecutive increments below [`CESARO_CAUCHY_TOL`], squaring after one.
fn cesaro_limit(m: &RMat) -> (RMat, u64, u32, f64) {
    let d = m.nrows();
    let id = RMat::identity(d, d);
    let mut avg = id.clone();
    let mut power = m.clone();
    let mut n: u64 = 1;
    let mut quiet = 0;
    for _ in 0..CESARO_MAX_DOUBLINGS {
        let next = &avg * (&id + &power) * 0.5;
        let inc = linalg::real_spectral_norm(&(&next - &avg));
        avg = next;
        n *= 2;
        power = linalg::reorthogonalize(&(&power * &power));
        if inc < CESARO_CAUCHY_TOL {
            quiet += 1;
            if quiet == 2 {
                return (avg, n, 0, inc);
            }
        } else {
            quiet = 0;
        }
    }
    // Rounding on the fixed vectors doubles with every squaring, so stop at
    // the first small increment, or step back once the increments grow.
    let mut squarings = 0;
    let mut last = f64::INFINITY;
    while squarings < CESARO_MAX_SQUARINGS {
        let next = &avg * &avg;
        let inc = linalg::real_spectral_norm(&(&next - &avg));
        if inc > last {
            break;
        }
        avg = next;
        last = inc;
        squarings += 1;
        if last < CESARO_CAUCHY_TOL {
            break;
        }
    }
    (avg, n, squarings, last)
}

/// `E` as the limit of ergodic averages of the action matrices.
///
/// For `Z` this is the Cesàro limit of the generator; for `Z^d` it is the
/// product of the per-generator limits, which commute; for finite groups it
/// is the exact average over the group.
pub fn cesaro_projector(action: &GroupAction) -> Result<CesaroProjector> {
    require_projector_group(action)?;
    let d = action.algebra().hermitian_dim();
    match action.group() {
        GroupSpec::Finite(g) => {
            let els = action
                .element_automorphisms()
                .ok_or_else(|| Error::Numerical("finite action without element table".into()))?;
            let mut sum = RMat::zeros(d, d);
            for t in els {
                sum += t.action_matrix();
            }
            Ok(CesaroProjector {
                matrix: sum / g.order() as f64,
                lengths: vec![g.order() as u64],
                squarings: vec![0],
                increments: vec![0.0],
            })
        }
        _ => {
            let mut matrix = RMat::identity(d, d);
            let mut lengths = Vec::new();
            let mut squarings = Vec::new();
            let mut increments = Vec::new();
            for m in action.generator_matrices() {
                let (limit, n, q, inc) = cesaro_limit(&m);
                matrix = limit * matrix;
                lengths.push(n);
                squarings.push(q);
                increments.push(inc);
            }
            Ok(CesaroProjector {
                matrix,
                lengths,
                squarings,
                increments,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::automorphism::Automorphism;
    use crate::dynamics::group::FiniteGroup;
    use crate::linalg::{CMat, I, ONE, ZERO};

    fn pauli() -> GroupAction {
        let a = Algebra::new(vec![2]).unwrap();
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        GroupAction::finite(
            FiniteGroup::abelian(&[2, 2]).unwrap(),
            vec![
                Automorphism::inner(&a, vec![x]).unwrap(),
                Automorphism::inner(&a, vec![z]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_action_fixes_everything() {
        let a = Algebra::new(vec![2, 1]).unwrap();
        let e = fixed_projector(&GroupAction::identity(&a)).unwrap();
        assert_eq!(e.dim(), 5);
        assert!((e.matrix() - RMat::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn cyclic_shift_averages_coordinates() {
        let act = GroupAction::integers(Automorphism::cyclic_shift(3).unwrap()).unwrap();
        let e = fixed_projector(&act).unwrap();
        assert_eq!(e.dim(), 1);
        let x = Element::diag(act.algebra(), &[3.0, 1.0, 2.0]).unwrap();
        let ex = e.apply(&x).unwrap();
        assert!(ex.distance(&Element::unit(act.algebra()).scale_real(2.0)).unwrap() < 1e-12);
    }

    #[test]
    fn diagonal_unitary_has_diagonal_commutant() {
        let a = Algebra::new(vec![2]).unwrap();
        let u = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I]);
        let act = GroupAction::integers(Automorphism::inner(&a, vec![u]).unwrap()).unwrap();
        let e = fixed_projector(&act).unwrap();
        assert_eq!(e.dim(), 2);
        let x = Element::from_blocks(
            &a,
            vec![CMat::from_row_slice(
                2,
                2,
                &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.1, 0.0), C64::new(0.7, 0.0)],
            )],
        )
        .unwrap();
        let ex = e.apply(&x).unwrap();
        assert!(ex.distance(&Element::diag(&a, &[0.5, 0.7]).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn pauli_commutant_is_scalar() {
        assert_eq!(fixed_dim(&pauli()).unwrap(), 1);
    }

    #[test]
    fn cesaro_agrees_with_kernel() {
        for act in [
            pauli(),
            GroupAction::integers(Automorphism::cyclic_shift(4).unwrap()).unwrap(),
        ] {
            let k = fixed_projector(&act).unwrap();
            let c = cesaro_projector(&act).unwrap();
            assert!(linalg::real_spectral_norm(&(k.matrix() - &c.matrix)) < 1e-9);
        }
    }

    #[test]
    fn non_hermitian_input_splits() {
        let a = Algebra::new(vec![2]).unwrap();
        let u = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I]);
        let act = GroupAction::integers(Automorphism::inner(&a, vec![u]).unwrap()).unwrap();
        let e = fixed_projector(&act).unwrap();
        let x = Element::from_blocks(&a, vec![CMat::from_row_slice(2, 2, &[I, ONE, ZERO, ZERO])])
            .unwrap();
        let ex = e.apply(&x).unwrap();
        assert!((ex.block(0)[(0, 0)] - I).norm() < 1e-12);
        assert!(ex.block(0)[(0, 1)].norm() < 1e-12);
    }
}
