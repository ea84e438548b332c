use serde::{Deserialize, Serialize};

use super::{gauge, GaugeOptions};
use crate::algebra::{Algebra, Element, State};
use crate::dynamics::{fixed_projector, FolnerSchedule, GroupAction};
use crate::error::{Error, Result};
use crate::linalg::{unitary_deviation, CMat, ZERO};
use crate::optimize::{
    exposing_observable, extreme_invariant_states, invariance_residual, m_max, ConvexBodySpec,
    OptimizeOptions,
};

const EQUIVARIANCE_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-10;

/// Ambient block `W diag(x_{s_1}, …, x_{s_r}) W†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPlacement {
    pub sources: Vec<usize>,
    #[serde(default, with = "crate::serde_matrix::option", skip_serializing_if = "Option::is_none")]
    pub unitary: Option<CMat>,
}

/// A unital *-homomorphism between block algebras given by block
/// multiplicities and a unitary frame per ambient block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmbeddingRaw")]
pub struct Embedding {
    domain: Algebra,
    ambient: Algebra,
    placements: Vec<BlockPlacement>,
}

#[derive(Deserialize)]
struct EmbeddingRaw {
    domain: Algebra,
    ambient: Algebra,
    placements: Vec<BlockPlacement>,
}

impl TryFrom<EmbeddingRaw> for Embedding {
    type Error = Error;
    fn try_from(r: EmbeddingRaw) -> Result<Self> {
        Embedding::new(&r.domain, &r.ambient, r.placements)
    }
}

impl Embedding {
    pub fn new(domain: &Algebra, ambient: &Algebra, placements: Vec<BlockPlacement>) -> Result<Self> {
        if placements.len() != ambient.num_blocks() {
            return Err(Error::InvalidEmbedding(format!(
                "{} placements for {} ambient blocks",
                placements.len(),
                ambient.num_blocks()
            )));
        }
        for (j, p) in placements.iter().enumerate() {
            let m = ambient.block_dims()[j];
            let mut total = 0;
            for &s in &p.sources {
                let n = *domain.block_dims().get(s).ok_or_else(|| {
                    Error::InvalidEmbedding(format!("ambient block {j}: no domain block {s}"))
                })?;
                total += n;
            }
            if total != m {
                return Err(Error::InvalidEmbedding(format!(
                    "ambient block {j} has size {m} but its sources fill {total}"
                )));
            }
            if let Some(w) = &p.unitary {
                if w.nrows() != m || w.ncols() != m {
                    return Err(Error::InvalidEmbedding(format!("ambient block {j}: frame is not {m}x{m}")));
                }
                let dev = unitary_deviation(w);
                if dev > 1e-10 {
                    return Err(Error::NotUnitary { block: j, deviation: dev });
                }
            }
        }
        Ok(Self {
            domain: domain.clone(),
            ambient: ambient.clone(),
            placements,
        })
    }

    /// `x ↦ x` on identical algebras.
    pub fn identity(algebra: &Algebra) -> Self {
        let placements = (0..algebra.num_blocks())
            .map(|i| BlockPlacement {
                sources: vec![i],
                unitary: None,
            })
            .collect();
        Self {
            domain: algebra.clone(),
            ambient: algebra.clone(),
            placements,
        }
    }

    pub fn domain(&self) -> &Algebra {
        &self.domain
    }

    pub fn ambient(&self) -> &Algebra {
        &self.ambient
    }

    pub fn placements(&self) -> &[BlockPlacement] {
        &self.placements
    }

    /// Domain blocks that no ambient block receives.
    pub fn kernel(&self) -> Vec<usize> {
        (0..self.domain.num_blocks())
            .filter(|i| !self.placements.iter().any(|p| p.sources.contains(i)))
            .collect()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().is_empty()
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        self.domain.check_same(x.algebra())?;
        let blocks = self
            .placements
            .iter()
            .zip(self.ambient.block_dims())
            .map(|(p, &m)| {
                let mut b = CMat::from_element(m, m, ZERO);
                let mut off = 0;
                for &s in &p.sources {
                    let xs = x.block(s);
                    let n = xs.nrows();
                    b.view_mut((off, off), (n, n)).copy_from(xs);
                    off += n;
                }
                match &p.unitary {
                    Some(w) => w * b * w.adjoint(),
                    None => b,
                }
            })
            .collect();
        Ok(Element::from_blocks_unchecked(&self.ambient, blocks))
    }
}

/// An equivariant embedding `ι: (A, Θ) → (B, Ξ)` with an invariant state
/// `ρ` on `B`.
#[derive(Debug, Clone)]
pub struct CStarModel {
    domain: GroupAction,
    ambient: GroupAction,
    embedding: Embedding,
    rho: State,
    equivariance_residual: f64,
}

impl CStarModel {
    /// # Errors
    /// `EquivarianceViolation` when `ι∘Θ_g ≠ Ξ_g∘ι` on the Hermitian basis,
    /// `NotInvariant` when `ρ∘Ξ_g ≠ ρ`.
    pub fn new(domain: GroupAction, ambient: GroupAction, embedding: Embedding, rho: State) -> Result<Self> {
        domain.algebra().check_same(embedding.domain())?;
        ambient.algebra().check_same(embedding.ambient())?;
        ambient.algebra().check_same(rho.algebra())?;
        if domain.group() != ambient.group() {
            return Err(Error::InvalidEmbedding(format!(
                "acting groups differ: {} and {}",
                domain.group().name(),
                ambient.group().name()
            )));
        }
        let mut worst: f64 = 0.0;
        for x in Element::hermitian_basis(domain.algebra()) {
            let ix = embedding.apply(&x)?;
            for (t, s) in domain.generators().iter().zip(ambient.generators()) {
                let lhs = embedding.apply(&t.apply_unchecked(&x))?;
                let rhs = s.apply_unchecked(&ix);
                worst = worst.max(lhs.distance(&rhs)?);
            }
        }
        if worst > EQUIVARIANCE_TOL {
            return Err(Error::EquivarianceViolation(worst));
        }
        let inv = invariance_residual(&ambient, rho.functional())?;
        if inv > INVARIANCE_TOL {
            return Err(Error::NotInvariant(inv));
        }
        Ok(Self {
            domain,
            ambient,
            embedding,
            rho,
            equivariance_residual: worst,
        })
    }

    pub fn domain(&self) -> &GroupAction {
        &self.domain
    }

    pub fn ambient(&self) -> &GroupAction {
        &self.ambient
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn rho(&self) -> &State {
        &self.rho
    }

    pub fn equivariance_residual(&self) -> f64 {
        self.equivariance_residual
    }

    /// `ι` injective on blocks.
    pub fn is_faithful(&self) -> bool {
        self.embedding.is_injective()
    }

    /// The invariant state `ρ∘ι` on the domain.
    pub fn pullback(&self) -> Result<State> {
        let alg = self.domain.algebra();
        let coords = Element::hermitian_basis(alg)
            .iter()
            .map(|x| self.rho.value(&self.embedding.apply(x)?))
            .collect::<Result<Vec<f64>>>()?;
        State::from_clipped(&Element::from_hermitian_coords(alg, &coords)?)
    }
}

/// `x + ‖x‖` and `−x + ‖x‖` over the Hermitian basis, and the unit.
pub fn positive_spanning_set(algebra: &Algebra) -> Vec<Element> {
    let mut out = vec![Element::unit(algebra)];
    for x in Element::hermitian_basis(algebra) {
        let r = x.operator_norm();
        out.push(x.shift(r));
        out.push(x.scale_real(-1.0).shift(r));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckOptions {
    pub gauge: GaugeOptions,
    /// Tolerance for the equalities being tested.
    pub tol: f64,
}

impl Default for ModelCheckOptions {
    fn default() -> Self {
        Self {
            gauge: GaugeOptions {
                k_max: 10_000,
                tol: 1e-4,
            },
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelElementReport {
    /// Følner estimate of `Γ(ι a)` in the ambient system.
    pub gamma: f64,
    pub gamma_oracle: Option<f64>,
    pub gauge_converged: bool,
    /// `ρ(ι a)`.
    pub rho_value: f64,
    /// `m(a | invariant states vanishing on ker ι)`.
    pub ann_value: f64,
    /// `Γ(ι a) − ρ(ι a)`.
    pub gap_iii: f64,
    /// `|Γ(ι a) − m(a | Ann ker ι)|`.
    pub gap_kernel: f64,
}

/// A positive element separating `Γ∘ι` from `ρ∘ι`.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub element: Element,
    /// The extreme invariant state it exposes.
    pub exposed: State,
    pub gamma: f64,
    pub rho_value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelVerdict {
    pub elements: Vec<ModelElementReport>,
    pub kernel: Vec<usize>,
    /// `Γ(ι a) = ρ(ι a)` on every tested element.
    pub condition_iii: bool,
    /// The domain fixed algebra is abelian, so invariant states form a simplex.
    pub simplex_proxy: bool,
    pub unique_ergodic: bool,
    pub pullback_faithful: bool,
    /// True when the tested set spans and `ρ∘ι` is faithful, so that
    /// `condition_iii` forces unique ergodicity.
    pub implication_checked: bool,
    pub kernel_max_gap: f64,
    /// `Γ∘ι = m(·|Ann ker ι)` on every tested element.
    pub kernel_formula_holds: bool,
    pub witness: Option<Witness>,
}

/// Tests `Γ(ι a) = ρ(ι a)` and `Γ(ι a) = m(a|Ann ker ι)` on positive test
/// elements, defaulting to [`positive_spanning_set`].
///
/// # Errors
/// `Falsified` when the spanning-set test passes with a faithful `ρ∘ι` but
/// the domain is not uniquely ergodic.
pub fn model_check(model: &CStarModel, elements: Option<&[Element]>, opts: &ModelCheckOptions) -> Result<ModelVerdict> {
    let domain = model.domain();
    let ambient = model.ambient();
    let schedule = FolnerSchedule::default_for(ambient.group()).ok_or_else(|| {
        Error::UnsupportedGroup(format!("{} has no default Følner schedule", ambient.group().name()))
    })?;
    let spanning;
    let (tested, spans) = match elements {
        Some(e) => (e, false),
        None => {
            spanning = positive_spanning_set(domain.algebra());
            (&spanning[..], true)
        }
    };
    let kernel = model.embedding().kernel();
    let body = ConvexBodySpec::AnnIdeal { blocks: kernel.clone() };
    let oo = OptimizeOptions::default();
    let gamma_of = |a: &Element| gauge(ambient, &schedule, &model.embedding().apply(a)?, &opts.gauge);

    let mut reports = Vec::with_capacity(tested.len());
    for a in tested {
        domain.algebra().check_same(a.algebra())?;
        if !a.is_positive(1e-10) {
            return Err(Error::NotPositive(a.min_eigenvalue()));
        }
        let g = gamma_of(a)?;
        let rho_value = model.rho().value(&model.embedding().apply(a)?)?;
        let ann_value = m_max(domain, a, &body, &oo)?.value;
        reports.push(ModelElementReport {
            gamma: g.estimate,
            gamma_oracle: g.oracle_value,
            gauge_converged: g.converged,
            rho_value,
            ann_value,
            gap_iii: g.estimate - rho_value,
            gap_kernel: (g.estimate - ann_value).abs(),
        });
    }
    let condition_iii = reports.iter().all(|r| r.gap_iii.abs() <= opts.tol);
    let kernel_max_gap = reports.iter().map(|r| r.gap_kernel).fold(0.0, f64::max);
    let e = fixed_projector(domain)?;
    let simplex_proxy = e.commutator_residual() <= 1e-8;
    let unique_ergodic = e.dim() == 1;
    let pullback = model.pullback()?;
    let pullback_faithful = pullback.is_faithful(1e-10);
    let implication_checked = spans && pullback_faithful;
    if implication_checked && condition_iii && !unique_ergodic {
        return Err(Error::Falsified(format!(
            "Γ∘ι = ρ∘ι on a spanning set with faithful ρ∘ι, yet dim Fix = {}",
            e.dim()
        )));
    }

    let mut witness: Option<Witness> = None;
    if !unique_ergodic && simplex_proxy {
        for phi in extreme_invariant_states(domain)? {
            if phi.density().distance(pullback.density())? <= 1e-8 {
                continue;
            }
            let x = exposing_observable(domain, &phi)?;
            let a = x.shift(x.operator_norm());
            let gamma = gamma_of(&a)?.estimate;
            let rho_value = model.rho().value(&model.embedding().apply(&a)?)?;
            let gap = gamma - rho_value;
            if witness.as_ref().is_none_or(|w| gap > w.gap) {
                witness = Some(Witness {
                    element: a,
                    exposed: phi,
                    gamma,
                    rho_value,
                    gap,
                });
            }
        }
    }

    Ok(ModelVerdict {
        elements: reports,
        kernel,
        condition_iii,
        simplex_proxy,
        unique_ergodic,
        pullback_faithful,
        implication_checked,
        kernel_max_gap,
        kernel_formula_holds: kernel_max_gap <= opts.tol,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Automorphism, FiniteGroup};
    use crate::linalg::{CMat, ONE, ZERO};

    fn pauli(alg: &Algebra) -> GroupAction {
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        GroupAction::finite(
            FiniteGroup::abelian(&[2, 2]).unwrap(),
            vec![
                Automorphism::inner(alg, vec![x]).unwrap(),
                Automorphism::inner(alg, vec![z]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn embedding_doubles_blocks() {
        let a = Algebra::new(vec![1]).unwrap();
        let b = Algebra::new(vec![2]).unwrap();
        let e = Embedding::new(&a, &b, vec![BlockPlacement { sources: vec![0, 0], unitary: None }]).unwrap();
        let x = Element::diag(&a, &[3.0]).unwrap();
        assert_eq!(e.apply(&x).unwrap(), Element::diag(&b, &[3.0, 3.0]).unwrap());
        assert!(e.is_injective());
        assert!(Embedding::new(&a, &b, vec![BlockPlacement { sources: vec![0], unitary: None }]).is_err());
    }

    #[test]
    fn pauli_model_satisfies_condition_iii() {
        let m2 = Algebra::new(vec![2]).unwrap();
        let act = pauli(&m2);
        let model = CStarModel::new(act.clone(), act, Embedding::identity(&m2), State::normalized_trace(&m2)).unwrap();
        let v = model_check(&model, None, &ModelCheckOptions::default()).unwrap();
        assert!(v.condition_iii && v.unique_ergodic && v.implication_checked);
        assert!(v.elements.iter().all(|r| r.gap_iii.abs() <= 1e-9));
        assert!(v.kernel_max_gap <= 1e-9);
        assert!(v.witness.is_none());
    }

    #[test]
    fn two_orbits_produce_a_witness() {
        let c4 = Algebra::diagonal(4).unwrap();
        let act = GroupAction::integers(Automorphism::permutation(&c4, vec![1, 0, 3, 2]).unwrap()).unwrap();
        let model = CStarModel::new(act.clone(), act, Embedding::identity(&c4), State::normalized_trace(&c4)).unwrap();
        let v = model_check(&model, None, &ModelCheckOptions::default()).unwrap();
        assert!(!v.condition_iii && !v.unique_ergodic);
        let w = v.witness.unwrap();
        assert!((w.gap - 0.5).abs() < 1e-9);
        assert!((w.gamma - 2.0).abs() < 1e-9 && (w.rho_value - 1.5).abs() < 1e-9);
    }

    #[test]
    fn non_equivariant_embedding_is_rejected() {
        let c2 = Algebra::diagonal(2).unwrap();
        let shift = GroupAction::integers(Automorphism::cyclic_shift(2).unwrap()).unwrap();
        let id = GroupAction::integers(Automorphism::identity(&c2)).unwrap();
        assert!(matches!(
            CStarModel::new(shift, id, Embedding::identity(&c2), State::normalized_trace(&c2)),
            Err(Error::EquivarianceViolation(_))
        ));
    }
}
