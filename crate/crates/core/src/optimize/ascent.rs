//! Linear optimization over an affine slice of the positive cone.
//!
//! Densities of invariant states are the positive unit-trace elements of the
//! Hermitian fixed space. Homogeneous linear side conditions (vanishing on a
//! set, traciality, zero blocks) cut this space down to a subspace with
//! orthonormal coordinate matrix `G`, so candidate densities are `h = G z`
//! with `tᵀz = 1`, `t = Gᵀ·coords(1)`. Projection onto the slice is exact;
//! projection onto slice ∩ cone uses Dykstra's alternating scheme.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat, C64};

/// Minimum eigenvalue accepted as positive semidefinite.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const DYKSTRA_ITERS: usize = 400;
const DYKSTRA_STOP: f64 = 1e-13;
const SOFTMIN_ITERS: usize = 400;
const ASCENT_ITERS: usize = 300;

#[derive(Debug, Clone)]
pub(crate) struct AffineSlice {
    algebra: Algebra,
    g: RMat,
    t: DVector<f64>,
    t_norm2: f64,
}

/// Outcome of the feasibility search.
#[derive(Debug, Clone)]
pub(crate) struct FeasiblePoint {
    pub z: DVector<f64>,
    pub min_eigenvalue: f64,
}

impl AffineSlice {
    /// `basis`: orthonormal Hermitian coordinates of the fixed space (columns);
    /// `constraints`: rows `r` imposing `r·coords(h) = 0`.
    pub fn new(algebra: &Algebra, basis: &RMat, constraints: &[DVector<f64>]) -> Result<Self> {
        let r = basis.ncols();
        let g = if constraints.is_empty() {
            basis.clone()
        } else {
            let mut c = RMat::zeros(constraints.len(), r);
            for (i, row) in constraints.iter().enumerate() {
                let reduced = basis.transpose() * row;
                c.set_row(i, &reduced.transpose());
            }
            basis * linalg::real_nullspace(&c, 1e-10)
        };
        let unit = Element::unit(algebra).hermitian_coords();
        let t = g.transpose() * unit;
        let t_norm2 = t.norm_squared();
        if g.ncols() == 0 || t_norm2 < 1e-16 {
            return Err(Error::Infeasible(
                "the constraints force every admissible density to have zero trace".into(),
            ));
        }
        Ok(Self {
            algebra: algebra.clone(),
            g,
            t,
            t_norm2,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.ncols()
    }

    pub fn coords(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.g * z
    }

    pub fn density(&self, z: &DVector<f64>) -> Element {
        Element::from_hermitian_coords(&self.algebra, self.coords(z).as_slice())
            .expect("dimension matches")
    }

    /// Minimal-norm point of the slice: the projection of `1/‖t‖²·t`.
    pub fn center(&self) -> DVector<f64> {
        &self.t / self.t_norm2
    }

    /// Restricts a Hermitian-coordinate vector to the slice's tangent space.
    pub fn tangent(&self, coords: &DVector<f64>) -> DVector<f64> {
        let z = self.g.transpose() * coords;
        let s = self.t.dot(&z) / self.t_norm2;
        z - &self.t * s
    }

    fn project_affine_coords(&self, coords: &DVector<f64>) -> DVector<f64> {
        let mut z = self.g.transpose() * coords;
        let s = (1.0 - self.t.dot(&z)) / self.t_norm2;
        z += &self.t * s;
        z
    }

    fn eigen_blocks(&self, coords: &DVector<f64>) -> Vec<linalg::Eigh> {
        let mut off = 0;
        self.algebra
            .block_dims()
            .iter()
            .map(|&n| {
                let b = linalg::hermitian_from_coords(n, &coords.as_slice()[off..off + n * n]);
                off += n * n;
                linalg::eigh(&b)
            })
            .collect()
    }

    fn min_eigenvalue_coords(&self, coords: &DVector<f64>) -> f64 {
        self.eigen_blocks(coords)
            .iter()
            .map(|e| *e.values.last().expect("nonempty"))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_eigenvalue(&self, z: &DVector<f64>) -> f64 {
        self.min_eigenvalue_coords(&self.coords(z))
    }

    fn clip_psd(&self, coords: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(coords.len());
        let mut off = 0;
        for e in self.eigen_blocks(coords) {
            let n = e.vectors.nrows();
            let mut b = CMat::zeros(n, n);
            for (j, &v) in e.values.iter().enumerate() {
                if v > 0.0 {
                    let col = e.vectors.column(j);
                    b += (&col * col.adjoint()) * C64::new(v, 0.0);
                }
            }
            linalg::write_hermitian_coords(&b, &mut out.as_mut_slice()[off..off + n * n]);
            off += n * n;
        }
        out
    }

    /// Gradient of the soft minimum `−μ log Σ exp(−λ_i/μ)` in Hermitian
    /// coordinates, together with its value.
    fn softmin(&self, coords: &DVector<f64>, mu: f64) -> (f64, DVector<f64>) {
        let eigs = self.eigen_blocks(coords);
        let lmin = eigs
            .iter()
            .map(|e| *e.values.last().expect("nonempty"))
            .fold(f64::INFINITY, f64::min);
        let mut z = 0.0;
        for e in &eigs {
            for &v in &e.values {
                z += (-(v - lmin) / mu).exp();
            }
        }
        let value = lmin - mu * z.ln();
        let mut grad = DVector::zeros(coords.len());
        let mut off = 0;
        for e in &eigs {
            let n = e.vectors.nrows();
            let mut b = CMat::zeros(n, n);
            for (j, &v) in e.values.iter().enumerate() {
                let w = (-(v - lmin) / mu).exp() / z;
                if w > 1e-16 {
                    let col = e.vectors.column(j);
                    b += (&col * col.adjoint()) * C64::new(w, 0.0);
                }
            }
            linalg::write_hermitian_coords(&b, &mut grad.as_mut_slice()[off..off + n * n]);
            off += n * n;
        }
        (value, grad)
    }

    /// Dykstra projection of `z0` onto slice ∩ cone. The returned point lies
    /// exactly on the slice; its positivity defect is reported separately.
    pub fn project(&self, z0: &DVector<f64>) -> DVector<f64> {
        let start = self.coords(z0);
        let mut q = DVector::zeros(start.len());
        let mut z = self.project_affine_coords(&start);
        for _ in 0..DYKSTRA_ITERS {
            let y = self.coords(&z);
            let clipped = self.clip_psd(&(&y + &q));
            q = &y + &q - &clipped;
            let z_next = self.project_affine_coords(&clipped);
            let step = (&z_next - &z).norm();
            z = z_next;
            if step < DYKSTRA_STOP {
                break;
            }
        }
        z
    }

    /// Soft-min ascent of `λ_min` along the slice from `z`.
    fn softmin_ascent(&self, mut z: DVector<f64>) -> DVector<f64> {
        if self.min_eigenvalue(&z) >= 0.0 {
            return z;
        }
        let scale = 1.0 / self.algebra.total_dim() as f64;
        let mut mu = 0.1 * scale;
        let mut step = scale;
        for _ in 0..SOFTMIN_ITERS {
            let (val, grad) = self.softmin(&self.coords(&z), mu);
            let dir = self.tangent(&grad);
            let norm = dir.norm();
            if norm < 1e-14 {
                break;
            }
            let cand = &z + &dir * (step / norm);
            let (cand_val, _) = self.softmin(&self.coords(&cand), mu);
            if cand_val > val {
                z = cand;
                step *= 1.2;
                if self.min_eigenvalue(&z) >= 0.0 {
                    break;
                }
            } else {
                step *= 0.5;
                if step < 1e-10 * scale {
                    mu *= 0.5;
                    step = scale * 1e-3;
                    if mu < 1e-9 * scale {
                        break;
                    }
                }
            }
        }
        z
    }

    /// Rows forcing `P h P = 0` for the spectral projector `P` of `h = G z`
    /// onto eigenvalues `≤ delta`.
    fn near_kernel_rows(&self, z: &DVector<f64>, delta: f64) -> Vec<DVector<f64>> {
        let coords = self.coords(z);
        let d = coords.len();
        let mut rows = Vec::new();
        for (b, e) in self.eigen_blocks(&coords).iter().enumerate() {
            let n = e.vectors.nrows();
            let cols: Vec<usize> = (0..n).filter(|&j| e.values[j] <= delta).collect();
            if cols.is_empty() {
                continue;
            }
            let p = linalg::projector_from_columns(&e.vectors, &cols);
            let off = self.algebra.coord_offset(b);
            let mut unit = vec![0.0; n * n];
            for k in 0..n * n {
                unit[k] = 1.0;
                let basis = linalg::hermitian_from_coords(n, &unit);
                unit[k] = 0.0;
                let mut row = DVector::zeros(d);
                linalg::write_hermitian_coords(&(&p * basis * &p), &mut row.as_mut_slice()[off..off + n * n]);
                rows.push(row);
            }
        }
        rows
    }

    /// Searches for a positive density on the slice.
    ///
    /// Soft-min ascent of `λ_min` comes first. When the admissible densities
    /// all lie in a proper face of the cone the ascent stalls just below zero;
    /// the face is then identified from the near-kernel of the best point, its
    /// complement pinned to zero, and the search repeated on the smaller
    /// slice. Returns the slice on which the point was found (a subset of
    /// `self`, so any point of it is admissible here too).
    pub fn feasible_point(&self) -> (AffineSlice, FeasiblePoint) {
        let scale = 1.0 / self.algebra.total_dim() as f64;
        let mut slice = self.clone();
        let mut z = slice.softmin_ascent(slice.center());
        let mut m = slice.min_eigenvalue(&z);
        let mut best = (slice.clone(), z.clone(), m);
        for _ in 0..4 {
            if m >= -FEASIBILITY_TOL {
                break;
            }
            let rows = slice.near_kernel_rows(&z, 1e-3 * scale);
            let Ok(reduced) = AffineSlice::new(&self.algebra, &slice.g, &rows) else {
                break;
            };
            if reduced.dim() >= slice.dim() {
                break;
            }
            slice = reduced;
            z = slice.softmin_ascent(slice.center());
            m = slice.min_eigenvalue(&z);
            if m > best.2 {
                best = (slice.clone(), z.clone(), m);
            }
        }
        let (slice, mut z, mut m) = best;
        if m < 0.0 {
            let polished = slice.project(&z);
            let pm = slice.min_eigenvalue(&polished);
            if pm > m {
                z = polished;
                m = pm;
            }
        }
        (
            slice,
            FeasiblePoint {
                z,
                min_eigenvalue: m,
            },
        )
    }

    /// Projected gradient ascent of `cᵀ·coords(h)` from `starts`; returns
    /// the best end point (lowest start index on ties) and its value.
    pub fn maximize(&self, objective: &DVector<f64>, starts: &[DVector<f64>]) -> (DVector<f64>, f64) {
        let dir = self.tangent(objective);
        let dnorm = dir.norm();
        let value = |z: &DVector<f64>| objective.dot(&self.coords(z));
        let mut best: Option<(DVector<f64>, f64)> = None;
        for start in starts {
            let mut z = start.clone();
            let mut v = value(&z);
            if dnorm > 1e-14 {
                let mut step = 1.0 / self.algebra.total_dim() as f64;
                for _ in 0..ASCENT_ITERS {
                    let cand = self.project(&(&z + &dir * (step / dnorm)));
                    let cv = value(&cand);
                    if cv > v + 1e-15 && self.min_eigenvalue(&cand) >= -FEASIBILITY_TOL {
                        z = cand;
                        v = cv;
                        step *= 1.5;
                    } else {
                        step *= 0.5;
                        if step < 1e-12 {
                            break;
                        }
                    }
                }
            }
            if best.as_ref().map_or(true, |(_, bv)| v > *bv + 1e-12) {
                best = Some((z, v));
            }
        }
        best.expect("at least one start")
    }

    /// `count` feasible starts: `base` followed by projected random
    /// perturbations of it.
    pub fn random_starts(&self, base: &DVector<f64>, count: usize, seed: u64) -> Vec<DVector<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / self.algebra.total_dim() as f64;
        let mut out = vec![base.clone()];
        while out.len() < count {
            let noise = DVector::from_fn(self.g.nrows(), |_, _| rng.random_range(-1.0..1.0));
            let tangent = self.tangent(&noise);
            let n = tangent.norm().max(1e-300);
            let z = self.project(&(base + tangent * (scale / n)));
            out.push(z);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_annihilator_is_infeasible() {
        let a = Algebra::diagonal(3).unwrap();
        let basis = RMat::identity(3, 3);
        let unit = Element::unit(&a).hermitian_coords();
        assert!(matches!(
            AffineSlice::new(&a, &basis, &[unit]),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn center_of_simplex_is_uniform() {
        let a = Algebra::diagonal(4).unwrap();
        let s = AffineSlice::new(&a, &RMat::identity(4, 4), &[]).unwrap();
        let h = s.density(&s.center());
        assert!(h.distance(&Element::unit(&a).scale_real(0.25)).unwrap() < 1e-15);
    }

    #[test]
    fn ascent_reaches_a_vertex() {
        let a = Algebra::diagonal(3).unwrap();
        // States on C^3 with h_0 = h_1; maximize h_2 - h_0.
        let c = Element::diag(&a, &[1.0, -1.0, 0.0]).unwrap().hermitian_coords();
        let s = AffineSlice::new(&a, &RMat::identity(3, 3), &[c]).unwrap();
        let (s, start) = s.feasible_point();
        assert!(start.min_eigenvalue >= 0.0);
        let obj = Element::diag(&a, &[-1.0, 0.0, 1.0]).unwrap().hermitian_coords();
        let (z, v) = s.maximize(&obj, &s.random_starts(&start.z, 8, 7));
        assert!((v - 1.0).abs() < 1e-6, "{v}");
        assert!(s.min_eigenvalue(&z) > -1e-8);
    }

    #[test]
    fn softmin_lifts_an_infeasible_center() {
        // On C^3 with h_0 + 0.1 h_1 = 0 the slice center has a negative
        // entry; the only state is the point mass at 2.
        let a = Algebra::diagonal(3).unwrap();
        let c = Element::diag(&a, &[1.0, 0.1, 0.0]).unwrap().hermitian_coords();
        let s = AffineSlice::new(&a, &RMat::identity(3, 3), &[c]).unwrap();
        assert!(s.min_eigenvalue(&s.center()) < -0.01);
        let (s, p) = s.feasible_point();
        assert!(p.min_eigenvalue >= -FEASIBILITY_TOL, "{}", p.min_eigenvalue);
        let h = s.density(&p.z);
        assert!(h.distance(&Element::diag(&a, &[0.0, 0.0, 1.0]).unwrap()).unwrap() < 1e-6);
    }
}
