//! Ergodic optimization: `m(a|K) = sup_{φ∈K} φ(a)` over compact convex sets
//! of invariant states.
//!
//! Invariant states are exactly the states whose density lies in the fixed
//! space `F`, and for such states `φ(a) = φ(E a)`. Hence
//! `m(a|S^G) = λ_max(E a)`, attained at the normalized spectral projector of
//! the top eigenvalue cluster of `E a`, which lies in `F`. Other bodies are
//! reduced to this case when a closed form exists and otherwise handled by
//! ascent over an affine slice of the positive cone.

mod ascent;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use ascent::FEASIBILITY_TOL;
use ascent::AffineSlice;

use crate::algebra::{functional_norm, Algebra, Element, HermitianFunctional, State};
use crate::dynamics::{
    fixed_projector, FixedProjector, FolnerSchedule, GroupAction, GroupWord, ScheduleKind, Side,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat};

/// A compact convex set of invariant states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexBodySpec {
    /// All invariant states.
    #[serde(rename = "sg")]
    SG,
    /// Invariant tracial states.
    #[serde(rename = "tg")]
    TG,
    /// Invariant states vanishing on the ideal supported on `blocks`.
    AnnIdeal { blocks: Vec<usize> },
    /// Invariant states vanishing on every listed element.
    AnnSet { elements: Vec<Element> },
    Intersection { parts: Vec<ConvexBodySpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `λ_max(E a)`.
    Spectral,
    /// Block-orbit formula for tracial states.
    TracialOrbit,
    /// Spectral or tracial method on a quotient system.
    Quotient,
    /// Projected-gradient lower bound with a spectral upper bound.
    AffineSliceAscent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Relative width of eigenvalue clusters.
    pub cluster_tol: f64,
    /// Random restarts of the ascent (at least 8 are used).
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-8,
            restarts: 8,
            seed: 0x5eed,
        }
    }
}

/// The face `K_max(a)` of a spectral optimization.
#[derive(Debug, Clone, Serialize)]
pub struct Face {
    /// Top spectral projector `P` of `E a`; the face is the set of invariant
    /// states supported under `P`.
    pub projector: Element,
    /// `dim_C(P F P) − 1`.
    pub affine_dim: usize,
}

/// Constraint residuals of a maximizer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    /// `max_g ‖φ∘Θ_g − φ‖`.
    pub invariance: f64,
    /// Largest violation of the body's linear side conditions.
    pub constraint: f64,
    /// `max(0, −λ_min(h))`.
    pub positivity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub value: f64,
    pub maximizer: State,
    pub method: Method,
    pub face: Option<Face>,
    pub feasible: bool,
    pub residuals: Residuals,
    /// Spectral upper bound when the value is a heuristic lower bound.
    pub upper_bound: Option<f64>,
}

/// `max_g ‖φ∘Θ_g − φ‖` over generators.
pub fn invariance_residual(action: &GroupAction, phi: &HermitianFunctional) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in 0..action.group().num_generators() {
        let moved = action.dual_apply(&GroupWord::generator(g), phi)?;
        worst = worst.max(functional_norm(&moved.sub(phi)?));
    }
    Ok(worst)
}

fn require_self_adjoint(a: &Element) -> Result<()> {
    if a.is_self_adjoint(1e-10) {
        Ok(())
    } else {
        Err(Error::NotSelfAdjoint(a.self_adjoint_deviation()))
    }
}

/// Real dimension of the Hermitian part of `P F P`.
fn compressed_dim(e: &FixedProjector, p: &Element) -> Result<usize> {
    let basis = e.basis_elements();
    let d = e.algebra().hermitian_dim();
    let mut cols = RMat::zeros(d, basis.len());
    for (j, b) in basis.iter().enumerate() {
        cols.set_column(j, &p.mul(b)?.mul(p)?.hermitian_coords());
    }
    let svd = linalg::real_svd(&cols, false, false);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    Ok(svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-8 * smax.max(1.0))
        .count())
}

fn spectral(
    action: &GroupAction,
    e: &FixedProjector,
    a: &Element,
    opts: &OptimizeOptions,
) -> Result<OptimizationResult> {
    let ea = e.apply(a)?;
    let top = ea
        .spectral_clusters(opts.cluster_tol)
        .into_iter()
        .next()
        .expect("nonempty spectrum");
    let maximizer = State::normalized(&top.projector)?;
    let affine_dim = compressed_dim(e, &top.projector)?.saturating_sub(1);
    let residuals = Residuals {
        invariance: invariance_residual(action, maximizer.functional())?,
        constraint: 0.0,
        positivity: (-maximizer.density().min_eigenvalue()).max(0.0),
    };
    Ok(OptimizationResult {
        value: top.top,
        maximizer,
        method: Method::Spectral,
        face: Some(Face {
            projector: top.projector,
            affine_dim,
        }),
        feasible: true,
        residuals,
        upper_bound: None,
    })
}

/// Tracial invariant densities are blockwise scalar and constant on block
/// orbits, so `m(a|T^G)` is the largest block scalar of `E(Z a)` where
/// `Z a = Σ_i (tr a_i / n_i) 1_i` is the central part of `a`.
fn tracial(
    action: &GroupAction,
    e: &FixedProjector,
    a: &Element,
    opts: &OptimizeOptions,
) -> Result<OptimizationResult> {
    let algebra = a.algebra();
    let dims = algebra.block_dims();
    let central: Vec<f64> = (0..dims.len())
        .map(|i| a.block(i).trace().re / dims[i] as f64)
        .collect();
    let ez = e.apply(&Element::central(algebra, &central)?)?;
    let scalars: Vec<f64> = (0..dims.len())
        .map(|i| ez.block(i).trace().re / dims[i] as f64)
        .collect();
    let top = scalars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = opts.cluster_tol * scalars.iter().fold(1.0_f64, |m, s| m.max(s.abs()));
    let tied: Vec<f64> = scalars
        .iter()
        .map(|&s| if top - s <= width { 1.0 } else { 0.0 })
        .collect();
    let support = Element::central(algebra, &tied)?;
    let maximizer = State::normalized(&support)?;
    let value = maximizer.value(a)?;
    let residuals = Residuals {
        invariance: invariance_residual(action, maximizer.functional())?,
        constraint: 0.0,
        positivity: 0.0,
    };
    Ok(OptimizationResult {
        value,
        maximizer,
        method: Method::TracialOrbit,
        face: None,
        feasible: true,
        residuals,
        upper_bound: None,
    })
}

/// Embeds a quotient density back into the full algebra, zero on `killed`.
fn lift(x: &Element, full: &Algebra, killed: &[usize]) -> Result<Element> {
    let mut it = x.blocks().iter();
    let blocks = full
        .block_dims()
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            if killed.contains(&i) {
                CMat::zeros(n, n)
            } else {
                it.next().expect("one block per kept index").clone()
            }
        })
        .collect();
    Element::from_blocks(full, blocks)
}

/// Flattened side conditions of a body.
#[derive(Debug, Default)]
struct Constraints {
    annihilate: Vec<Element>,
    tracial: bool,
    killed: Vec<usize>,
}

fn flatten(spec: &ConvexBodySpec, action: &GroupAction, out: &mut Constraints) -> Result<()> {
    match spec {
        ConvexBodySpec::SG => {}
        ConvexBodySpec::TG => out.tracial = true,
        ConvexBodySpec::AnnIdeal { blocks } => {
            let m = action.algebra().num_blocks();
            if let Some(&b) = blocks.iter().find(|&&b| b >= m) {
                return Err(Error::MalformedBody(format!("block {b} out of range")));
            }
            if !action.is_block_set_invariant(blocks) {
                let mut b = blocks.clone();
                b.sort_unstable();
                b.dedup();
                return Err(Error::BlockSetNotInvariant(b));
            }
            out.killed.extend_from_slice(blocks);
        }
        ConvexBodySpec::AnnSet { elements } => {
            for x in elements {
                action.algebra().check_same(x.algebra())?;
            }
            out.annihilate.extend(elements.iter().cloned());
        }
        ConvexBodySpec::Intersection { parts } => {
            if parts.is_empty() {
                return Err(Error::MalformedBody("empty intersection".into()));
            }
            for p in parts {
                flatten(p, action, out)?;
            }
        }
    }
    out.killed.sort_unstable();
    out.killed.dedup();
    Ok(())
}

fn require_spectral_group(action: &GroupAction) -> Result<()> {
    if action.group().has_fixed_projector() {
        Ok(())
    } else {
        Err(Error::UnsupportedGroup("no spectral oracle for free groups".into()))
    }
}

/// Closed form for bodies without `AnnSet` parts.
fn closed_form(
    action: &GroupAction,
    a: &Element,
    tracial_body: bool,
    killed: &[usize],
    opts: &OptimizeOptions,
) -> Result<OptimizationResult> {
    if killed.len() == action.algebra().num_blocks() {
        return Err(Error::Infeasible("the ideal is the whole algebra".into()));
    }
    if killed.is_empty() {
        let e = fixed_projector(action)?;
        return if tracial_body {
            tracial(action, &e, a, opts)
        } else {
            spectral(action, &e, a, opts)
        };
    }
    let q = action.quotient(killed)?;
    let qa = GroupAction::quotient_map(a, killed)?;
    let e = fixed_projector(&q)?;
    let inner = if tracial_body {
        tracial(&q, &e, &qa, opts)?
    } else {
        spectral(&q, &e, &qa, opts)?
    };
    let full = action.algebra();
    let maximizer = State::new(HermitianFunctional::from_hermitian_part(&lift(
        inner.maximizer.density(),
        full,
        killed,
    )?))?;
    let face = match inner.face {
        Some(f) => Some(Face {
            projector: lift(&f.projector, full, killed)?,
            affine_dim: f.affine_dim,
        }),
        None => None,
    };
    let residuals = Residuals {
        invariance: invariance_residual(action, maximizer.functional())?,
        ..inner.residuals
    };
    Ok(OptimizationResult {
        value: inner.value,
        maximizer,
        method: Method::Quotient,
        face,
        feasible: true,
        residuals,
        upper_bound: None,
    })
}

/// Homogeneous constraint rows in Hermitian coordinates.
fn constraint_rows(algebra: &Algebra, c: &Constraints) -> Vec<DVector<f64>> {
    let d = algebra.hermitian_dim();
    let mut rows = Vec::new();
    for x in &c.annihilate {
        // tr(h x) = <h, Re x> + i <h, Im x> for Hermitian h.
        rows.push(x.real_part().hermitian_coords());
        let im = x.imag_part();
        if im.operator_norm() > 0.0 {
            rows.push(im.hermitian_coords());
        }
    }
    for (i, &n) in algebra.block_dims().iter().enumerate() {
        let off = algebra.coord_offset(i);
        if c.killed.contains(&i) {
            for j in 0..n * n {
                let mut r = DVector::zeros(d);
                r[off + j] = 1.0;
                rows.push(r);
            }
        } else if c.tracial {
            // Off-diagonal coordinates vanish and the diagonal is constant.
            for j in n..n * n {
                let mut r = DVector::zeros(d);
                r[off + j] = 1.0;
                rows.push(r);
            }
            for j in 1..n {
                let mut r = DVector::zeros(d);
                r[off] = 1.0;
                r[off + j] = -1.0;
                rows.push(r);
            }
        }
    }
    rows
}

fn constraint_violation(h: &HermitianFunctional, c: &Constraints) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in &c.annihilate {
        worst = worst.max(h.pair(x)?.norm());
    }
    let density = h.density();
    for (i, &n) in density.algebra().block_dims().iter().enumerate() {
        let b = density.block(i);
        if c.killed.contains(&i) {
            worst = worst.max(linalg::spectral_norm(b));
        } else if c.tracial {
            let s = b.trace() / crate::linalg::C64::new(n as f64, 0.0);
            worst = worst.max(linalg::spectral_norm(&(b - CMat::identity(n, n) * s)));
        }
    }
    Ok(worst)
}

fn state_from_slice(slice: &AffineSlice, z: &DVector<f64>) -> Result<State> {
    let h = slice.density(z);
    match State::new(HermitianFunctional::from_hermitian_part(&h)) {
        Ok(s) => Ok(s),
        Err(_) => State::from_clipped(&h),
    }
}

fn ascent(
    action: &GroupAction,
    a: &Element,
    c: &Constraints,
    opts: &OptimizeOptions,
) -> Result<OptimizationResult> {
    let algebra = action.algebra();
    let e = fixed_projector(action)?;
    let slice = AffineSlice::new(algebra, e.basis(), &constraint_rows(algebra, c))?;
    let (slice, start) = slice.feasible_point();
    if start.min_eigenvalue < -FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!(
            "no positive density satisfies the constraints (best minimum eigenvalue {:e})",
            start.min_eigenvalue
        )));
    }
    let relaxed = closed_form(action, a, c.tracial, &c.killed, opts)?;
    let upper = relaxed.value;
    let objective = a.real_part().hermitian_coords();

    // The relaxation's maximizer is optimal whenever it is admissible.
    let candidate = relaxed.maximizer.density().hermitian_coords();
    let z_relaxed = slice.tangent(&candidate) + slice.center();
    let relaxed_ok = constraint_violation(relaxed.maximizer.functional(), c)? <= 1e-10;
    let mut starts = slice.random_starts(&start.z, opts.restarts.max(8), opts.seed);
    if relaxed_ok {
        starts.insert(0, z_relaxed);
    }
    let (z, _) = slice.maximize(&objective, &starts);
    let maximizer = state_from_slice(&slice, &z)?;
    let value = maximizer.value(a)?;
    let residuals = Residuals {
        invariance: invariance_residual(action, maximizer.functional())?,
        constraint: constraint_violation(maximizer.functional(), c)?,
        positivity: (-slice.min_eigenvalue(&z)).max(0.0),
    };
    Ok(OptimizationResult {
        value,
        maximizer,
        method: Method::AffineSliceAscent,
        face: None,
        feasible: true,
        residuals,
        upper_bound: Some(upper),
    })
}

/// `m(a|K)` with a maximizer.
pub fn m_max(
    action: &GroupAction,
    a: &Element,
    body: &ConvexBodySpec,
    opts: &OptimizeOptions,
) -> Result<OptimizationResult> {
    require_spectral_group(action)?;
    action.algebra().check_same(a.algebra())?;
    require_self_adjoint(a)?;
    let a = a.real_part();
    let mut c = Constraints::default();
    flatten(body, action, &mut c)?;
    match body {
        ConvexBodySpec::SG => closed_form(action, &a, false, &[], opts),
        ConvexBodySpec::TG => closed_form(action, &a, true, &[], opts),
        _ if c.annihilate.is_empty() => closed_form(action, &a, c.tracial, &c.killed, opts),
        _ => ascent(action, &a, &c, opts),
    }
}

/// `K_max(a)` for `K = S^G`.
pub fn maximizing_face(
    action: &GroupAction,
    a: &Element,
    cluster_tol: f64,
) -> Result<(f64, Face, State)> {
    let opts = OptimizeOptions {
        cluster_tol,
        ..OptimizeOptions::default()
    };
    let r = m_max(action, a, &ConvexBodySpec::SG, &opts)?;
    let face = r.face.expect("spectral method reports a face");
    Ok((r.value, face, r.maximizer))
}

/// Minimal projections of an abelian fixed algebra, ordered by the first
/// diagonal position they cover.
pub fn minimal_fixed_projections(action: &GroupAction) -> Result<Vec<Element>> {
    require_spectral_group(action)?;
    let e = fixed_projector(action)?;
    let residual = e.commutator_residual();
    if residual > 1e-8 {
        return Err(Error::NonAbelianFixedAlgebra(residual));
    }
    let basis = e.basis_elements();
    let r = basis.len();
    // A generic combination separates the atoms of an abelian algebra.
    for attempt in 0..8u32 {
        let mut x = Element::zero(action.algebra());
        for (j, b) in basis.iter().enumerate() {
            let c = ((j as f64 + 1.0) * (2.0f64 + attempt as f64).sqrt() * 1.618_033_988_75).fract() + 0.1;
            x.add_assign(&b.scale_real(c));
        }
        let clusters = x.spectral_clusters(1e-6);
        if clusters.len() != r {
            continue;
        }
        let mut projections: Vec<Element> = clusters.into_iter().map(|c| c.projector).collect();
        let mut ok = true;
        for p in &projections {
            if e.apply(p)?.distance(p)? > 1e-8 {
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        projections.sort_by_key(first_support_index);
        return Ok(projections);
    }
    Err(Error::Numerical("could not separate the minimal fixed projections".into()))
}

fn first_support_index(p: &Element) -> usize {
    let mut idx = 0;
    for b in p.blocks() {
        for j in 0..b.nrows() {
            if b[(j, j)].re > 1e-6 {
                return idx;
            }
            idx += 1;
        }
    }
    idx
}

/// The extreme points of `S^G` when the fixed algebra is abelian: the
/// normalized minimal fixed projections.
pub fn extreme_invariant_states(action: &GroupAction) -> Result<Vec<State>> {
    minimal_fixed_projections(action)?
        .iter()
        .map(State::normalized)
        .collect()
}

/// The minimal fixed projection `p` supporting the extreme invariant state
/// `φ`; `φ` is then the unique maximizer of `p` over `S^G`.
pub fn exposing_observable(action: &GroupAction, phi: &State) -> Result<Element> {
    action.algebra().check_same(phi.algebra())?;
    let projections = minimal_fixed_projections(action)?;
    let mut closest = f64::INFINITY;
    for p in projections {
        let s = State::normalized(&p)?;
        let d = s.density().distance(phi.density())?;
        if d <= 1e-8 {
            return Ok(p);
        }
        closest = closest.min(d);
    }
    Err(Error::NotExtreme(closest))
}

/// Output of the Krylov–Bogolyubov averaging.
#[derive(Debug, Clone, Serialize)]
pub struct KrylovBogolyubov {
    pub state: State,
    /// `max_g ‖ψ_k − ψ_k∘Θ_g‖` over generators.
    pub defect: f64,
    /// Largest generator defect `|g F Δ F|/|F|`.
    pub left_folner_defect: f64,
    /// Largest generator defect `|F g Δ F|/|F|`, which governs `defect`
    /// since `ψ_k∘Θ_g` averages `φ∘Θ_{fg}` over `f ∈ F`.
    pub right_folner_defect: f64,
    pub k: usize,
    pub set_size: usize,
}

impl KrylovBogolyubov {
    /// Upper bound `2·max_g |F g Δ F|/|F|` for `defect`.
    pub fn bound(&self) -> f64 {
        2.0 * self.right_folner_defect
    }
}

/// `ψ_k = (1/|F_k|) Σ_{g∈F_k} φ∘Θ_g` for a left schedule.
pub fn krylov_bogolyubov(
    action: &GroupAction,
    seed: &State,
    schedule: &FolnerSchedule,
    k: usize,
) -> Result<KrylovBogolyubov> {
    action.algebra().check_same(seed.algebra())?;
    let group = action.group();
    // Built-in schedules are two-sided; explicit ones report both defects.
    schedule.check_compatible(group)?;
    if k == 0 {
        return Err(Error::EmptyFolnerSet);
    }
    let algebra = action.algebra();
    let (density, set_size) = match (&schedule.kind, group) {
        (ScheduleKind::Interval, _) => {
            // Densities of φ∘Θ^j are Θ^{-j}(h).
            let back = action.generators()[0].inverse();
            let mut cur = seed.density().clone();
            let mut acc = Element::zero(algebra);
            for _ in 0..k {
                acc.add_assign(&cur);
                cur = back.apply_unchecked(&cur);
            }
            (acc, k)
        }
        _ => {
            let words = crate::dynamics::folner_sets(schedule, group, k)?;
            let elements: std::collections::BTreeSet<_> =
                words.iter().map(|w| group.reduce(w)).collect::<Result<_>>()?;
            let mut acc = Element::zero(algebra);
            for el in &elements {
                let t = action.element_automorphism(el)?.inverse();
                acc.add_assign(&t.apply_unchecked(seed.density()));
            }
            (acc, elements.len())
        }
    };
    let psi = State::new(HermitianFunctional::from_hermitian_part(
        &density.scale_real(1.0 / set_size as f64),
    ))?;
    let defect = invariance_residual(action, psi.functional())?;
    let left = FolnerSchedule::new(Side::Left, schedule.kind.clone());
    let right = FolnerSchedule::new(Side::Right, schedule.kind.clone());
    let max = |v: Vec<f64>| v.into_iter().fold(0.0_f64, f64::max);
    Ok(KrylovBogolyubov {
        state: psi,
        defect,
        left_folner_defect: max(left.generator_defects(group, k)?),
        right_folner_defect: max(right.generator_defects(group, k)?),
        k,
        set_size,
    })
}

/// Feasibility verdict for an annihilator body.
#[derive(Debug, Clone, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<State>,
    /// Largest minimum eigenvalue found over admissible unit-trace densities.
    pub best_min_eigenvalue: f64,
}

/// Decides whether an annihilator body contains an invariant state.
pub fn ann_feasibility(action: &GroupAction, body: &ConvexBodySpec) -> Result<Feasibility> {
    require_spectral_group(action)?;
    let mut c = Constraints::default();
    flatten(body, action, &mut c)?;
    let algebra = action.algebra();
    if c.killed.len() == algebra.num_blocks() {
        return Ok(Feasibility {
            feasible: false,
            witness: None,
            best_min_eigenvalue: f64::NEG_INFINITY,
        });
    }
    if c.annihilate.is_empty() && !c.tracial {
        // The normalized trace of the quotient is invariant.
        let q_alg = Algebra::new(
            (0..algebra.num_blocks())
                .filter(|i| !c.killed.contains(i))
                .map(|i| algebra.block_dims()[i])
                .collect(),
        )?;
        let tau = State::normalized_trace(&q_alg);
        let witness = State::new(HermitianFunctional::from_hermitian_part(&lift(
            tau.density(),
            algebra,
            &c.killed,
        )?))?;
        let best = witness.density().min_eigenvalue();
        return Ok(Feasibility {
            feasible: true,
            witness: Some(witness),
            best_min_eigenvalue: best,
        });
    }
    let e = fixed_projector(action)?;
    let slice = match AffineSlice::new(algebra, e.basis(), &constraint_rows(algebra, &c)) {
        Ok(s) => s,
        Err(Error::Infeasible(_)) => {
            return Ok(Feasibility {
                feasible: false,
                witness: None,
                best_min_eigenvalue: f64::NEG_INFINITY,
            })
        }
        Err(err) => return Err(err),
    };
    let (slice, p) = slice.feasible_point();
    let feasible = p.min_eigenvalue >= -FEASIBILITY_TOL;
    Ok(Feasibility {
        feasible,
        witness: if feasible {
            Some(state_from_slice(&slice, &p.z)?)
        } else {
            None
        },
        best_min_eigenvalue: p.min_eigenvalue,
    })
}

/// Both sides of `m(π(a)|S̃^G) = m(a|Ann(ker π))`.
#[derive(Debug, Clone, Serialize)]
pub struct QuotientReport {
    pub kernel: Vec<usize>,
    /// Spectral value on the quotient system.
    pub quotient_value: f64,
    /// `λ_max` of `E(a)` compressed to the blocks outside the kernel.
    pub annihilator_value: f64,
    pub difference: f64,
}

/// Computes the quotient side on the induced action and the annihilator side
/// from the full system's projector, independently of each other.
pub fn quotient_correspondence_check(
    action: &GroupAction,
    kernel: &[usize],
    a: &Element,
) -> Result<QuotientReport> {
    require_spectral_group(action)?;
    action.algebra().check_same(a.algebra())?;
    require_self_adjoint(a)?;
    let m = action.algebra().num_blocks();
    if let Some(&b) = kernel.iter().find(|&&b| b >= m) {
        return Err(Error::MalformedBody(format!("block {b} out of range")));
    }
    let mut kernel = kernel.to_vec();
    kernel.sort_unstable();
    kernel.dedup();
    if kernel.len() == m {
        return Err(Error::Infeasible("the kernel is the whole algebra".into()));
    }
    if !action.is_block_set_invariant(&kernel) {
        return Err(Error::BlockSetNotInvariant(kernel));
    }
    let q = action.quotient(&kernel)?;
    let qa = GroupAction::quotient_map(&a.real_part(), &kernel)?;
    let quotient_value = spectral(&q, &fixed_projector(&q)?, &qa, &OptimizeOptions::default())?.value;

    let ea = fixed_projector(action)?.apply(&a.real_part())?;
    let annihilator_value = (0..m)
        .filter(|i| !kernel.contains(i))
        .map(|i| linalg::eigh(ea.block(i)).values[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(QuotientReport {
        kernel,
        quotient_value,
        annihilator_value,
        difference: (quotient_value - annihilator_value).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Automorphism, FiniteGroup};
    use crate::linalg::{C64, I, ONE, ZERO};

    fn shift3() -> GroupAction {
        GroupAction::integers(Automorphism::cyclic_shift(3).unwrap()).unwrap()
    }

    fn two_orbits() -> GroupAction {
        let a = Algebra::diagonal(4).unwrap();
        GroupAction::integers(Automorphism::permutation(&a, vec![1, 0, 3, 2]).unwrap()).unwrap()
    }

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

    fn sg() -> ConvexBodySpec {
        ConvexBodySpec::SG
    }

    fn opts() -> OptimizeOptions {
        OptimizeOptions::default()
    }

    #[test]
    fn sg_examples() {
        let act = shift3();
        let a = Element::diag(act.algebra(), &[3.0, 1.0, 2.0]).unwrap();
        let r = m_max(&act, &a, &sg(), &opts()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r
            .maximizer
            .density()
            .distance(&Element::unit(act.algebra()).scale_real(1.0 / 3.0))
            .unwrap()
            < 1e-12);

        let alg = Algebra::diagonal(2).unwrap();
        let id = GroupAction::identity(&alg);
        let r = m_max(&id, &Element::diag(&alg, &[0.3, 0.9]).unwrap(), &sg(), &opts()).unwrap();
        assert!((r.value - 0.9).abs() < 1e-12);
        assert!((r.maximizer.density().block(1)[(0, 0)].re - 1.0).abs() < 1e-12);

        let act = two_orbits();
        let a = Element::diag(act.algebra(), &[1.0, 0.0, 0.2, 0.4]).unwrap();
        assert!((m_max(&act, &a, &sg(), &opts()).unwrap().value - 0.5).abs() < 1e-12);

        let m2 = Algebra::new(vec![2]).unwrap();
        let u = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I]);
        let act = GroupAction::integers(Automorphism::inner(&m2, vec![u]).unwrap()).unwrap();
        let a = Element::from_blocks(
            &m2,
            vec![CMat::from_row_slice(
                2,
                2,
                &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.1, 0.0), C64::new(0.7, 0.0)],
            )],
        )
        .unwrap();
        assert!((m_max(&act, &a, &sg(), &opts()).unwrap().value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tg_block_swap() {
        let alg = Algebra::new(vec![2, 2]).unwrap();
        let act = GroupAction::integers(Automorphism::permutation(&alg, vec![1, 0]).unwrap()).unwrap();
        let a = Element::diag(&alg, &[1.0, 1.0, 1.0, 3.0]).unwrap();
        let r = m_max(&act, &a, &ConvexBodySpec::TG, &opts()).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert!(r.maximizer.is_tracial(1e-10));
    }

    #[test]
    fn face_dimensions() {
        let act = shift3();
        let (_, f, _) =
            maximizing_face(&act, &Element::diag(act.algebra(), &[3.0, 1.0, 2.0]).unwrap(), 1e-8)
                .unwrap();
        assert_eq!(f.affine_dim, 0);
        let alg = Algebra::diagonal(2).unwrap();
        let id = GroupAction::identity(&alg);
        let (_, f, _) = maximizing_face(&id, &Element::diag(&alg, &[0.5, 0.5]).unwrap(), 1e-8).unwrap();
        assert_eq!(f.affine_dim, 1);
        let (_, f, _) = maximizing_face(&id, &Element::diag(&alg, &[0.3, 0.9]).unwrap(), 1e-8).unwrap();
        assert_eq!(f.affine_dim, 0);
    }

    #[test]
    fn extreme_states_and_exposure() {
        let alg = Algebra::diagonal(3).unwrap();
        assert_eq!(extreme_invariant_states(&GroupAction::identity(&alg)).unwrap().len(), 3);

        let act = two_orbits();
        let ext = extreme_invariant_states(&act).unwrap();
        assert_eq!(ext.len(), 2);
        let x = exposing_observable(&act, &ext[0]).unwrap();
        assert!(x.distance(&Element::diag(act.algebra(), &[1.0, 1.0, 0.0, 0.0]).unwrap()).unwrap() < 1e-10);
        assert!(ext[1].value(&x).unwrap().abs() < 1e-12);

        let p = pauli();
        let ext = extreme_invariant_states(&p).unwrap();
        assert_eq!(ext.len(), 1);
        assert!(ext[0].density().distance(&Element::unit(p.algebra()).scale_real(0.5)).unwrap() < 1e-12);
        let not_extreme = State::from_density(Element::diag(act.algebra(), &[0.25; 4]).unwrap()).unwrap();
        assert!(matches!(exposing_observable(&act, &not_extreme), Err(Error::NotExtreme(_))));
    }

    #[test]
    fn kb_examples() {
        let act = shift3();
        let seed = State::point_mass(act.algebra(), 0).unwrap();
        let r = krylov_bogolyubov(&act, &seed, &FolnerSchedule::interval().with_side(Side::Left), 3).unwrap();
        assert!(r.defect < 1e-15);
        let r = krylov_bogolyubov(&act, &seed, &FolnerSchedule::interval().with_side(Side::Left), 10).unwrap();
        assert!((r.left_folner_defect - 0.2).abs() < 1e-15);
        assert!(r.defect <= 0.4 + 1e-12);
    }

    #[test]
    fn ann_examples() {
        let act = two_orbits();
        let unit = Element::unit(act.algebra());
        let f = ann_feasibility(&act, &ConvexBodySpec::AnnSet { elements: vec![unit] }).unwrap();
        assert!(!f.feasible);

        let p0 = Element::diag(act.algebra(), &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let f = ann_feasibility(&act, &ConvexBodySpec::AnnSet { elements: vec![p0] }).unwrap();
        assert!(f.feasible);
        let w = f.witness.unwrap();
        assert!(w.density().distance(&Element::diag(act.algebra(), &[0.0, 0.0, 0.5, 0.5]).unwrap()).unwrap() < 1e-9);

        let f = ann_feasibility(&act, &ConvexBodySpec::AnnIdeal { blocks: vec![2, 3] }).unwrap();
        assert!(f.feasible);
    }

    #[test]
    fn quotient_examples() {
        let act = two_orbits();
        let a = Element::diag(act.algebra(), &[1.0, 0.0, 0.2, 0.4]).unwrap();
        let r = quotient_correspondence_check(&act, &[2, 3], &a).unwrap();
        assert!((r.quotient_value - 0.5).abs() < 1e-12 && r.difference < 1e-12);
        let r = quotient_correspondence_check(&act, &[], &a).unwrap();
        assert!((r.quotient_value - 0.5).abs() < 1e-12);

        let alg = Algebra::new(vec![2, 2]).unwrap();
        let swap = GroupAction::integers(Automorphism::permutation(&alg, vec![1, 0]).unwrap()).unwrap();
        let b = Element::unit(&alg);
        assert!(matches!(
            quotient_correspondence_check(&swap, &[0], &b),
            Err(Error::BlockSetNotInvariant(_))
        ));
    }

    #[test]
    fn ann_set_ascent_matches_hand_solution() {
        let act = two_orbits();
        let a = Element::diag(act.algebra(), &[1.0, 0.0, 0.2, 0.4]).unwrap();
        let body = ConvexBodySpec::AnnSet {
            elements: vec![Element::diag(act.algebra(), &[1.0, 0.0, 0.0, 0.0]).unwrap()],
        };
        let r = m_max(&act, &a, &body, &opts()).unwrap();
        assert!((r.value - 0.3).abs() < 1e-8, "{}", r.value);
        assert!(r.upper_bound.unwrap() >= r.value - 1e-8);
        assert!(r.residuals.constraint < 1e-8);
    }
}
