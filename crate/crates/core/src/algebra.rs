//! Finite-dimensional C*-algebras `M_{n_1} ⊕ ... ⊕ M_{n_m}`, their elements,
//! and Hermitian functionals realized by trace-pairing densities.
//!
//! A functional `φ` is stored through its density `h = (h_1, ..., h_m)` with
//! `φ(x) = Σ_i tr(h_i x_i)`. Under this pairing the dual norm of the operator
//! norm is the trace norm of `h`, positivity of `φ` is positivity of `h`, and
//! the Jordan decomposition is the spectral split of each `h_i` into its
//! positive and negative parts.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Eigh, C64, ZERO};
use crate::serde_matrix;

/// Default tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-10;

/// A direct sum of full matrix algebras, described by its block sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlgebraRepr", into = "AlgebraRepr")]
pub struct Algebra {
    block_dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraRepr {
    blocks: Vec<usize>,
}

impl TryFrom<AlgebraRepr> for Algebra {
    type Error = Error;
    fn try_from(r: AlgebraRepr) -> Result<Self> {
        Algebra::new(r.blocks)
    }
}

impl From<Algebra> for AlgebraRepr {
    fn from(a: Algebra) -> Self {
        AlgebraRepr {
            blocks: a.block_dims,
        }
    }
}

impl Algebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidAlgebra("at least one block is required".into()));
        }
        if let Some(pos) = block_dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidAlgebra(format!("block {pos} has dimension 0")));
        }
        Ok(Self { block_dims })
    }

    /// The commutative algebra `C^n` as `n` one-dimensional blocks.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// `Σ n_i`, the size of the defining representation.
    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// `Σ n_i²`: complex dimension of the algebra, and real dimension of its
    /// Hermitian part.
    pub fn hermitian_dim(&self) -> usize {
        self.block_dims.iter().map(|&n| n * n).sum()
    }

    /// Offset of block `i` in the Hermitian coordinate vector.
    pub fn coord_offset(&self, block: usize) -> usize {
        self.block_dims[..block].iter().map(|&n| n * n).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub(crate) fn check_same(&self, other: &Algebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch {
                left: self.block_dims.clone(),
                right: other.block_dims.clone(),
            })
        }
    }
}

/// An element of an [`Algebra`], stored block by block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElementRepr", into = "ElementRepr")]
pub struct Element {
    algebra: Algebra,
    blocks: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
struct ElementRepr {
    #[serde(with = "serde_matrix::vec")]
    blocks: Vec<CMat>,
}

impl TryFrom<ElementRepr> for Element {
    type Error = Error;
    fn try_from(r: ElementRepr) -> Result<Self> {
        let dims = r
            .blocks
            .iter()
            .map(|b| {
                if b.nrows() == b.ncols() {
                    Ok(b.nrows())
                } else {
                    Err(Error::ShapeMismatch(format!(
                        "block is {}x{}, expected square",
                        b.nrows(),
                        b.ncols()
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Element::from_blocks(&Algebra::new(dims)?, r.blocks)
    }
}

impl From<Element> for ElementRepr {
    fn from(e: Element) -> Self {
        ElementRepr { blocks: e.blocks }
    }
}

/// Tags accepted by [`element_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithOp {
    Add,
    Sub,
    Scale,
    Mul,
    Adjoint,
    Unit,
    Zero,
}

/// Second operand for [`element_arith`].
#[derive(Debug, Clone)]
pub enum Operand<'a> {
    None,
    Element(&'a Element),
    Scalar(C64),
}

/// Tag-dispatched blockwise arithmetic.
pub fn element_arith(op: ArithOp, x: &Element, y: Operand<'_>) -> Result<Element> {
    match (op, y) {
        (ArithOp::Add, Operand::Element(y)) => x.add(y),
        (ArithOp::Sub, Operand::Element(y)) => x.sub(y),
        (ArithOp::Mul, Operand::Element(y)) => x.mul(y),
        (ArithOp::Scale, Operand::Scalar(c)) => Ok(x.scale(c)),
        (ArithOp::Adjoint, _) => Ok(x.adjoint()),
        (ArithOp::Unit, _) => Ok(Element::unit(x.algebra())),
        (ArithOp::Zero, _) => Ok(Element::zero(x.algebra())),
        (op, _) => Err(Error::ShapeMismatch(format!(
            "operation {op:?} called with the wrong kind of operand"
        ))),
    }
}

impl Element {
    pub fn from_blocks(algebra: &Algebra, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (b, &n)) in blocks.iter().zip(algebra.block_dims()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "block {i} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    pub(crate) fn from_blocks_unchecked(algebra: &Algebra, blocks: Vec<CMat>) -> Self {
        Self {
            algebra: algebra.clone(),
            blocks,
        }
    }

    pub fn zero(algebra: &Algebra) -> Self {
        let blocks = algebra.block_dims().iter().map(|&n| CMat::zeros(n, n)).collect();
        Self::from_blocks_unchecked(algebra, blocks)
    }

    pub fn unit(algebra: &Algebra) -> Self {
        let blocks = algebra
            .block_dims()
            .iter()
            .map(|&n| CMat::identity(n, n))
            .collect();
        Self::from_blocks_unchecked(algebra, blocks)
    }

    /// Real diagonal element; `values` runs through the block diagonals in
    /// order and must have length `Σ n_i`.
    pub fn diag(algebra: &Algebra, values: &[f64]) -> Result<Self> {
        if values.len() != algebra.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "diagonal needs {} entries, got {}",
                algebra.total_dim(),
                values.len()
            )));
        }
        let mut it = values.iter();
        let blocks = algebra
            .block_dims()
            .iter()
            .map(|&n| {
                let mut b = CMat::zeros(n, n);
                for j in 0..n {
                    b[(j, j)] = C64::new(*it.next().expect("length checked"), 0.0);
                }
                b
            })
            .collect();
        Ok(Self::from_blocks_unchecked(algebra, blocks))
    }

    /// Central element `Σ_i c_i 1_i`.
    pub fn central(algebra: &Algebra, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} central coefficients, got {}",
                algebra.num_blocks(),
                coefficients.len()
            )));
        }
        let blocks = algebra
            .block_dims()
            .iter()
            .zip(coefficients)
            .map(|(&n, &c)| CMat::identity(n, n).scale(c).map(|v| v))
            .collect();
        Ok(Self::from_blocks_unchecked(algebra, blocks))
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    fn zip_with(&self, other: &Element, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Element> {
        self.algebra.check_same(&other.algebra)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(Self::from_blocks_unchecked(&self.algebra, blocks))
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Element {
        let blocks = self.blocks.iter().map(|b| b * c).collect();
        Self::from_blocks_unchecked(&self.algebra, blocks)
    }

    pub fn scale_real(&self, c: f64) -> Element {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Element {
        let blocks = self.blocks.iter().map(|b| b.adjoint()).collect();
        Self::from_blocks_unchecked(&self.algebra, blocks)
    }

    pub(crate) fn add_assign(&mut self, other: &Element) {
        debug_assert_eq!(self.algebra, other.algebra);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b;
        }
    }

    /// `self + c·1`.
    pub fn shift(&self, c: f64) -> Element {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let n = b.nrows();
                b + CMat::identity(n, n).scale(c).map(|v| v)
            })
            .collect();
        Self::from_blocks_unchecked(&self.algebra, blocks)
    }

    /// `xy − yx`.
    pub fn commutator(&self, other: &Element) -> Result<Element> {
        self.zip_with(other, |a, b| a * b - b * a)
    }

    /// `Σ_i tr(x_i)`.
    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// Maximum over blocks of the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// `max_i ‖x_i − x_i†‖`.
    pub fn self_adjoint_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::hermitian_deviation)
            .fold(0.0, f64::max)
    }

    /// Self-adjointness with the relative bound `tol·(1 + ‖x‖)`.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_deviation() <= tol * (1.0 + self.operator_norm())
    }

    /// `(x + x†)/2`.
    pub fn real_part(&self) -> Element {
        let blocks = self.blocks.iter().map(linalg::hermitian_part).collect();
        Self::from_blocks_unchecked(&self.algebra, blocks)
    }

    /// `(x − x†)/(2i)`, so that `x = re + i·im`.
    pub fn imag_part(&self) -> Element {
        let blocks = self
            .blocks
            .iter()
            .map(|b| (b - b.adjoint()) * C64::new(0.0, -0.5))
            .collect();
        Self::from_blocks_unchecked(&self.algebra, blocks)
    }

    pub fn distance(&self, other: &Element) -> Result<f64> {
        Ok(self.sub(other)?.operator_norm())
    }

    /// Real Hermitian coordinates of the Hermitian part, in the orthonormal
    /// basis for the inner product `Re Σ_i tr(x_i† y_i)`.
    pub fn hermitian_coords(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.algebra.hermitian_dim());
        let mut offset = 0;
        for b in &self.blocks {
            let n2 = b.nrows() * b.nrows();
            linalg::write_hermitian_coords(b, &mut out.as_mut_slice()[offset..offset + n2]);
            offset += n2;
        }
        out
    }

    pub fn from_hermitian_coords(algebra: &Algebra, coords: &[f64]) -> Result<Element> {
        if coords.len() != algebra.hermitian_dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} Hermitian coordinates, got {}",
                algebra.hermitian_dim(),
                coords.len()
            )));
        }
        let mut offset = 0;
        let blocks = algebra
            .block_dims()
            .iter()
            .map(|&n| {
                let b = linalg::hermitian_from_coords(n, &coords[offset..offset + n * n]);
                offset += n * n;
                b
            })
            .collect();
        Ok(Self::from_blocks_unchecked(algebra, blocks))
    }

    /// The canonical orthonormal Hermitian basis (dual to
    /// [`Element::hermitian_coords`]).
    pub fn hermitian_basis(algebra: &Algebra) -> Vec<Element> {
        let d = algebra.hermitian_dim();
        let mut coords = vec![0.0; d];
        (0..d)
            .map(|j| {
                coords[j] = 1.0;
                let e = Element::from_hermitian_coords(algebra, &coords).expect("length matches");
                coords[j] = 0.0;
                e
            })
            .collect()
    }

    /// Per-block spectra of a self-adjoint element.
    pub fn spectrum(&self, tol: f64) -> Result<Vec<Eigh>> {
        if !self.is_self_adjoint(tol) {
            return Err(Error::NotSelfAdjoint(self.self_adjoint_deviation()));
        }
        Ok(self.blocks.iter().map(linalg::eigh).collect())
    }

    /// Extreme eigenvalues `(min, max)` of the Hermitian part.
    pub fn eigen_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for b in &self.blocks {
            let e = linalg::eigh(b);
            lo = lo.min(*e.values.last().expect("nonempty block"));
            hi = hi.max(e.values[0]);
        }
        (lo, hi)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigen_range().1
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen_range().0
    }

    /// Self-adjoint within `tol` and every eigenvalue `≥ −tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.self_adjoint_deviation() <= tol && self.min_eigenvalue() >= -tol
    }

    /// Spectral projectors of the Hermitian part grouped into eigenvalue
    /// clusters across all blocks, highest cluster first. Eigenvalues within
    /// `rel_tol·max(1, |λ_max|)` of a cluster's leading value join it.
    pub fn spectral_clusters(&self, rel_tol: f64) -> Vec<SpectralCluster> {
        let spectra: Vec<Eigh> = self.blocks.iter().map(linalg::eigh).collect();
        let mut all: Vec<(f64, usize, usize)> = spectra
            .iter()
            .enumerate()
            .flat_map(|(b, e)| e.values.iter().enumerate().map(move |(j, &v)| (v, b, j)))
            .collect();
        all.sort_by(|a, b| b.0.total_cmp(&a.0));
        let scale = all
            .iter()
            .map(|t| t.0.abs())
            .fold(1.0_f64, f64::max);
        let width = rel_tol * scale;
        let mut clusters = Vec::new();
        let mut start = 0;
        while start < all.len() {
            let lead = all[start].0;
            let mut end = start + 1;
            while end < all.len() && lead - all[end].0 <= width {
                end += 1;
            }
            let members = &all[start..end];
            let blocks = self
                .algebra
                .block_dims()
                .iter()
                .enumerate()
                .map(|(b, _)| {
                    let cols: Vec<usize> =
                        members.iter().filter(|t| t.1 == b).map(|t| t.2).collect();
                    linalg::projector_from_columns(&spectra[b].vectors, &cols)
                })
                .collect();
            let mean = members.iter().map(|t| t.0).sum::<f64>() / members.len() as f64;
            clusters.push(SpectralCluster {
                value: mean,
                top: lead,
                rank: members.len(),
                projector: Element::from_blocks_unchecked(&self.algebra, blocks),
            });
            start = end;
        }
        clusters
    }
}

/// One eigenvalue cluster of a self-adjoint element.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    /// Mean of the clustered eigenvalues.
    pub value: f64,
    /// Largest eigenvalue of the cluster.
    pub top: f64,
    pub rank: usize,
    pub projector: Element,
}

/// Per-block spectra of a self-adjoint element (eigenvalues descending).
pub fn herm_spectrum(x: &Element) -> Result<Vec<Eigh>> {
    x.spectrum(DEFAULT_TOL)
}

pub fn operator_norm(x: &Element) -> f64 {
    x.operator_norm()
}

pub fn is_positive(x: &Element, tol: f64) -> bool {
    x.is_positive(tol)
}

/// A self-adjoint functional `φ(x) = Σ_i tr(h_i x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalRepr", into = "FunctionalRepr")]
pub struct HermitianFunctional {
    density: Element,
}

#[derive(Serialize, Deserialize)]
struct FunctionalRepr {
    density: Element,
}

impl TryFrom<FunctionalRepr> for HermitianFunctional {
    type Error = Error;
    fn try_from(r: FunctionalRepr) -> Result<Self> {
        HermitianFunctional::new(r.density)
    }
}

impl From<HermitianFunctional> for FunctionalRepr {
    fn from(f: HermitianFunctional) -> Self {
        FunctionalRepr { density: f.density }
    }
}

/// Hermiticity tolerance for densities, relative to `1 + ‖h‖`.
const DENSITY_HERMITIAN_TOL: f64 = 1e-12;

impl HermitianFunctional {
    /// Validates that each density block is Hermitian, then stores its
    /// Hermitian part.
    pub fn new(density: Element) -> Result<Self> {
        let dev = density.self_adjoint_deviation();
        if dev > DENSITY_HERMITIAN_TOL * (1.0 + density.operator_norm()) {
            return Err(Error::NotSelfAdjoint(dev));
        }
        Ok(Self::from_hermitian_part(&density))
    }

    /// Takes the Hermitian part of `density` without validation.
    pub fn from_hermitian_part(density: &Element) -> Self {
        Self {
            density: density.real_part(),
        }
    }

    pub fn zero(algebra: &Algebra) -> Self {
        Self {
            density: Element::zero(algebra),
        }
    }

    pub fn density(&self) -> &Element {
        &self.density
    }

    pub fn algebra(&self) -> &Algebra {
        self.density.algebra()
    }

    pub fn pair(&self, x: &Element) -> Result<C64> {
        pair(self, x)
    }

    /// Trace norm of the density.
    pub fn norm(&self) -> f64 {
        functional_norm(self)
    }

    pub fn add(&self, other: &HermitianFunctional) -> Result<HermitianFunctional> {
        Ok(Self {
            density: self.density.add(&other.density)?,
        })
    }

    pub fn sub(&self, other: &HermitianFunctional) -> Result<HermitianFunctional> {
        Ok(Self {
            density: self.density.sub(&other.density)?,
        })
    }

    pub fn scale(&self, c: f64) -> HermitianFunctional {
        Self {
            density: self.density.scale_real(c),
        }
    }

    /// Operator-norm distance between densities.
    pub fn density_distance(&self, other: &HermitianFunctional) -> Result<f64> {
        self.density.distance(&other.density)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.density.min_eigenvalue() >= -tol
    }

    pub fn is_tracial(&self, tol: f64) -> bool {
        is_tracial(self, tol)
    }
}

/// `Σ_i tr(h_i x_i)`.
pub fn pair(phi: &HermitianFunctional, x: &Element) -> Result<C64> {
    phi.algebra().check_same(x.algebra())?;
    let mut acc = ZERO;
    for (h, b) in phi.density.blocks.iter().zip(&x.blocks) {
        // tr(h b) = Σ_jk h_jk b_kj
        for j in 0..h.nrows() {
            for k in 0..h.ncols() {
                acc += h[(j, k)] * b[(k, j)];
            }
        }
    }
    Ok(acc)
}

/// Trace norm of the density: the dual norm of the operator norm.
pub fn functional_norm(phi: &HermitianFunctional) -> f64 {
    phi.density
        .blocks
        .iter()
        .map(|h| linalg::eigh(h).values.iter().map(|v| v.abs()).sum::<f64>())
        .sum()
}

/// Jordan decomposition `φ = φ⁺ − φ⁻` with `φ⁺ ⊥ φ⁻`.
///
/// Each density block is split spectrally into its positive and negative
/// parts, so the supports are orthogonal and the trace norms add.
pub fn jordan_decompose(
    phi: &HermitianFunctional,
) -> Result<(HermitianFunctional, HermitianFunctional)> {
    let dev = phi.density.self_adjoint_deviation();
    if dev > DENSITY_HERMITIAN_TOL * (1.0 + phi.density.operator_norm()) {
        return Err(Error::NotSelfAdjoint(dev));
    }
    let algebra = phi.algebra();
    let mut plus = Vec::with_capacity(algebra.num_blocks());
    let mut minus = Vec::with_capacity(algebra.num_blocks());
    for h in &phi.density.blocks {
        let e = linalg::eigh(h);
        let n = h.nrows();
        let mut p = CMat::zeros(n, n);
        let mut m = CMat::zeros(n, n);
        for (j, &v) in e.values.iter().enumerate() {
            let col = e.vectors.column(j);
            let proj = &col * col.adjoint();
            if v > 0.0 {
                p += proj * C64::new(v, 0.0);
            } else if v < 0.0 {
                m += proj * C64::new(-v, 0.0);
            }
        }
        plus.push(linalg::hermitian_part(&p));
        minus.push(linalg::hermitian_part(&m));
    }
    Ok((
        HermitianFunctional {
            density: Element::from_blocks_unchecked(algebra, plus),
        },
        HermitianFunctional {
            density: Element::from_blocks_unchecked(algebra, minus),
        },
    ))
}

/// Every density block within `tol` (operator norm) of `(tr h_i / n_i)·I`.
pub fn is_tracial(phi: &HermitianFunctional, tol: f64) -> bool {
    phi.density.blocks.iter().all(|h| {
        let n = h.nrows();
        let c = h.trace() / C64::new(n as f64, 0.0);
        let central = CMat::identity(n, n) * c;
        linalg::spectral_norm(&(h - central)) <= tol
    })
}

/// A positive, unit-trace Hermitian functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct State {
    functional: HermitianFunctional,
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = HermitianFunctional::deserialize(d)?;
        State::new(f).map_err(serde::de::Error::custom)
    }
}

/// Positivity tolerance for states (one-sided).
pub const STATE_POSITIVITY_TOL: f64 = 1e-10;
/// Normalization tolerance for states.
pub const STATE_TRACE_TOL: f64 = 1e-10;

impl State {
    pub fn new(functional: HermitianFunctional) -> Result<Self> {
        let min = functional.density.min_eigenvalue();
        if min < -STATE_POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "density has eigenvalue {min:e} < 0"
            )));
        }
        let tr = functional.density.trace();
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("density trace {} != 1", tr.re)));
        }
        Ok(Self { functional })
    }

    pub fn from_density(density: Element) -> Result<Self> {
        Self::new(HermitianFunctional::new(density)?)
    }

    /// Normalizes a positive element to unit trace.
    pub fn normalized(density: &Element) -> Result<Self> {
        let tr = density.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!(
                "cannot normalize a density of trace {tr:e}"
            )));
        }
        Self::new(HermitianFunctional::from_hermitian_part(
            &density.scale_real(1.0 / tr),
        ))
    }

    /// Positive-part clipping followed by normalization; used to turn a
    /// numerically near-feasible density into an exact state.
    pub fn from_clipped(density: &Element) -> Result<Self> {
        let (plus, _) = jordan_decompose(&HermitianFunctional::from_hermitian_part(density))?;
        Self::normalized(plus.density())
    }

    /// The state with density `1/(Σ n_i)`: the unique tracial state that is
    /// proportional to the canonical trace.
    pub fn normalized_trace(algebra: &Algebra) -> Self {
        let n = algebra.total_dim() as f64;
        Self {
            functional: HermitianFunctional {
                density: Element::unit(algebra).scale_real(1.0 / n),
            },
        }
    }

    pub fn point_mass(algebra: &Algebra, coordinate: usize) -> Result<Self> {
        let mut v = vec![0.0; algebra.total_dim()];
        if coordinate >= v.len() {
            return Err(Error::ShapeMismatch(format!(
                "coordinate {coordinate} out of range"
            )));
        }
        v[coordinate] = 1.0;
        Self::from_density(Element::diag(algebra, &v)?)
    }

    pub fn functional(&self) -> &HermitianFunctional {
        &self.functional
    }

    pub fn density(&self) -> &Element {
        &self.functional.density
    }

    pub fn algebra(&self) -> &Algebra {
        self.functional.algebra()
    }

    /// `φ(x)`; real when `x` is self-adjoint.
    pub fn expect(&self, x: &Element) -> Result<C64> {
        pair(&self.functional, x)
    }

    /// Real part of `φ(x)`.
    pub fn value(&self, x: &Element) -> Result<f64> {
        Ok(self.expect(x)?.re)
    }

    pub fn is_tracial(&self, tol: f64) -> bool {
        is_tracial(&self.functional, tol)
    }

    /// Minimum eigenvalue of the density exceeds `tol`.
    pub fn is_faithful(&self, tol: f64) -> bool {
        self.density().min_eigenvalue() > tol
    }

    pub fn into_functional(self) -> HermitianFunctional {
        self.functional
    }
}

impl From<State> for HermitianFunctional {
    fn from(s: State) -> Self {
        s.functional
    }
}
