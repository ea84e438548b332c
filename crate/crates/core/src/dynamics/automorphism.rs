use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat, C64};
use crate::serde_matrix;

/// Unitarity tolerance `‖u†u − I‖` for automorphism data.
pub const UNITARY_TOL: f64 = 1e-10;

/// A *-automorphism in normal form `Θ(x)_i = u_i x_{σ(i)} u_i†`.
///
/// Every *-automorphism of `⊕ M_{n_i}` has this form: it permutes blocks
/// of equal size and conjugates each block by a unitary. Composition is
/// `(σ₁, u) ∘ (σ₂, v) = (σ₂ ∘ σ₁, u_i v_{σ₁(i)})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AutomorphismRepr", into = "AutomorphismRepr")]
pub struct Automorphism {
    algebra: Algebra,
    perm: Vec<usize>,
    unitaries: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
struct AutomorphismRepr {
    perm: Vec<usize>,
    #[serde(with = "serde_matrix::vec")]
    unitaries: Vec<CMat>,
}

impl TryFrom<AutomorphismRepr> for Automorphism {
    type Error = Error;
    fn try_from(r: AutomorphismRepr) -> Result<Self> {
        let dims = r.unitaries.iter().map(|u| u.nrows()).collect();
        Automorphism::new(&Algebra::new(dims)?, r.perm, r.unitaries)
    }
}

impl From<Automorphism> for AutomorphismRepr {
    fn from(a: Automorphism) -> Self {
        AutomorphismRepr {
            perm: a.perm,
            unitaries: a.unitaries,
        }
    }
}

impl Automorphism {
    pub fn new(algebra: &Algebra, perm: Vec<usize>, unitaries: Vec<CMat>) -> Result<Self> {
        let m = algebra.num_blocks();
        if perm.len() != m {
            return Err(Error::InvalidPermutation(format!(
                "permutation has length {}, algebra has {m} blocks",
                perm.len()
            )));
        }
        let mut seen = vec![false; m];
        for &p in &perm {
            if p >= m || seen[p] {
                return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection")));
            }
            seen[p] = true;
        }
        let dims = algebra.block_dims();
        for (i, &p) in perm.iter().enumerate() {
            if dims[p] != dims[i] {
                return Err(Error::InvalidPermutation(format!(
                    "block {i} (dim {}) cannot receive block {p} (dim {})",
                    dims[i], dims[p]
                )));
            }
        }
        if unitaries.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "expected {m} unitaries, got {}",
                unitaries.len()
            )));
        }
        for (i, (u, &n)) in unitaries.iter().zip(dims).enumerate() {
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "unitary {i} is {}x{}, expected {n}x{n}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let deviation = linalg::unitary_deviation(u);
            if deviation > UNITARY_TOL {
                return Err(Error::NotUnitary { block: i, deviation });
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            perm,
            unitaries,
        })
    }

    pub(crate) fn from_parts_unchecked(algebra: &Algebra, perm: Vec<usize>, unitaries: Vec<CMat>) -> Self {
        Self {
            algebra: algebra.clone(),
            perm,
            unitaries,
        }
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self {
            algebra: algebra.clone(),
            perm: (0..algebra.num_blocks()).collect(),
            unitaries: algebra
                .block_dims()
                .iter()
                .map(|&n| CMat::identity(n, n))
                .collect(),
        }
    }

    /// Blockwise `Ad_u` without permuting blocks.
    pub fn inner(algebra: &Algebra, unitaries: Vec<CMat>) -> Result<Self> {
        Self::new(algebra, (0..algebra.num_blocks()).collect(), unitaries)
    }

    /// Pure block permutation with identity unitaries.
    pub fn permutation(algebra: &Algebra, perm: Vec<usize>) -> Result<Self> {
        let unitaries = algebra
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        Self::new(algebra, perm, unitaries)
    }

    /// The rotation `Θ(x)_i = x_{i+1 mod n}` of the diagonal algebra `C^n`.
    pub fn cyclic_shift(n: usize) -> Result<Self> {
        let algebra = Algebra::diagonal(n)?;
        Self::permutation(&algebra, (0..n).map(|i| (i + 1) % n).collect())
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn unitaries(&self) -> &[CMat] {
        &self.unitaries
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        self.algebra.check_same(x.algebra())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Element) -> Element {
        let blocks = self
            .perm
            .iter()
            .zip(&self.unitaries)
            .map(|(&p, u)| {
                let b = x.block(p);
                if u.nrows() == 1 {
                    // u is a phase; conjugation is trivial.
                    b.clone()
                } else {
                    u * b * u.adjoint()
                }
            })
            .collect();
        Element::from_blocks_unchecked(&self.algebra, blocks)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism> {
        self.algebra.check_same(&other.algebra)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Automorphism) -> Automorphism {
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let unitaries = self
            .unitaries
            .iter()
            .zip(&self.perm)
            .map(|(u, &p)| u * &other.unitaries[p])
            .collect();
        Automorphism {
            algebra: self.algebra.clone(),
            perm,
            unitaries,
        }
    }

    /// `(σ⁻¹, w)` with `w_j = u_{σ⁻¹(j)}†`.
    pub fn inverse(&self) -> Automorphism {
        let m = self.perm.len();
        let mut inv = vec![0; m];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        let unitaries = inv.iter().map(|&i| self.unitaries[i].adjoint()).collect();
        Automorphism {
            algebra: self.algebra.clone(),
            perm: inv,
            unitaries,
        }
    }

    /// `Θ^n` by repeated squaring; negative powers go through the inverse.
    pub fn pow(&self, n: i64) -> Automorphism {
        let mut base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Automorphism::identity(&self.algebra);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.compose_unchecked(&base);
            }
        }
        acc
    }

    /// The real orthogonal matrix of `Θ` on Hermitian coordinates.
    pub fn action_matrix(&self) -> RMat {
        let d = self.algebra.hermitian_dim();
        let mut m = RMat::zeros(d, d);
        for (i, (&p, u)) in self.perm.iter().zip(&self.unitaries).enumerate() {
            let n = u.nrows();
            let n2 = n * n;
            let row0 = self.algebra.coord_offset(i);
            let col0 = self.algebra.coord_offset(p);
            let mut coords = vec![0.0; n2];
            let mut out = vec![0.0; n2];
            for j in 0..n2 {
                coords[j] = 1.0;
                let e = linalg::hermitian_from_coords(n, &coords);
                coords[j] = 0.0;
                linalg::write_hermitian_coords(&(u * e * u.adjoint()), &mut out);
                for (r, &v) in out.iter().enumerate() {
                    m[(row0 + r, col0 + j)] = v;
                }
            }
        }
        m
    }

    /// Operator-norm distance between the two automorphisms on the
    /// canonical Hermitian basis (a spanning set).
    pub fn distance(&self, other: &Automorphism) -> Result<f64> {
        self.algebra.check_same(&other.algebra)?;
        Ok(linalg::real_spectral_norm(
            &(self.action_matrix() - other.action_matrix()),
        ))
    }

    /// Multiplies every unitary by a phase; the automorphism is unchanged.
    pub fn with_phase(&self, phase: C64) -> Automorphism {
        Automorphism {
            algebra: self.algebra.clone(),
            perm: self.perm.clone(),
            unitaries: self.unitaries.iter().map(|u| u * phase).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{I, ONE, ZERO};

    #[test]
    fn cyclic_shift_rotates_coordinates() {
        let t = Automorphism::cyclic_shift(3).unwrap();
        let a = t.algebra().clone();
        let x = Element::diag(&a, &[3.0, 1.0, 2.0]).unwrap();
        let y = t.apply(&x).unwrap();
        assert_eq!(y, Element::diag(&a, &[1.0, 2.0, 3.0]).unwrap());
    }

    #[test]
    fn ad_diag_one_i() {
        let a = Algebra::new(vec![2]).unwrap();
        let u = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I]);
        let t = Automorphism::inner(&a, vec![u]).unwrap();
        let x = Element::from_blocks(&a, vec![CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])])
            .unwrap();
        let y = t.apply(&x).unwrap();
        assert!((y.block(0)[(0, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(y.block(0)[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_data() {
        let a = Algebra::new(vec![1, 2]).unwrap();
        assert!(matches!(
            Automorphism::permutation(&a, vec![1, 0]),
            Err(Error::InvalidPermutation(_))
        ));
        assert!(matches!(
            Automorphism::permutation(&a, vec![0, 0]),
            Err(Error::InvalidPermutation(_))
        ));
        let bad = vec![CMat::identity(1, 1), CMat::identity(2, 2) * C64::new(1.1, 0.0)];
        assert!(matches!(
            Automorphism::inner(&a, bad),
            Err(Error::NotUnitary { block: 1, .. })
        ));
    }

    #[test]
    fn compose_inverse_and_pow() {
        let t = Automorphism::cyclic_shift(5).unwrap();
        let id = Automorphism::identity(t.algebra());
        assert!(t.compose(&t.inverse()).unwrap().distance(&id).unwrap() < 1e-14);
        assert!(t.pow(5).distance(&id).unwrap() < 1e-14);
        assert!(t.pow(-2).distance(&t.pow(3)).unwrap() < 1e-14);
        let x = Element::diag(t.algebra(), &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let two = t.compose(&t).unwrap().apply(&x).unwrap();
        assert_eq!(two, t.apply(&t.apply(&x).unwrap()).unwrap());
    }

    #[test]
    fn action_matrix_matches_apply() {
        let a = Algebra::new(vec![2, 2]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMat::from_row_slice(
            2,
            2,
            &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
        );
        let u = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I]);
        let t = Automorphism::new(&a, vec![1, 0], vec![h, u]).unwrap();
        let x = Element::from_hermitian_coords(&a, &[0.3, -0.2, 0.7, 0.1, 0.5, 0.4, 0.9, -0.6])
            .unwrap();
        let lhs = t.action_matrix() * x.hermitian_coords();
        let rhs = t.apply(&x).unwrap().hermitian_coords();
        assert!((lhs - rhs).norm() < 1e-14);
        let m = t.action_matrix();
        let d = m.nrows();
        assert!((m.transpose() * &m - RMat::identity(d, d)).norm() < 1e-13);
    }
}
