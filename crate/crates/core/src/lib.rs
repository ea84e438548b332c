//! Ergodic optimization on finite-dimensional C*-dynamical systems.
//!
//! The algebra is a finite direct sum `M_{n_1} ⊕ ... ⊕ M_{n_m}`, the phase
//! group is `Z`, `Z^d`, a finite group, or a free presentation, and it acts
//! by *-automorphisms in block-permutation-plus-unitary normal form. On top
//! of that the crate computes:
//!
//! * the mean-ergodic conditional expectation `E` onto the fixed-point
//!   algebra, by a kernel computation and independently by Cesàro averaging;
//! * ergodic optimization values `m(a|K)` over invariant states, invariant
//!   tracial states, and annihilator sets, with maximizing faces and
//!   exposing observables;
//! * the gauge `Γ(a)`, the limit of operator norms of Følner averages, and
//!   its agreement with `m(a|S^G)`;
//! * unique- and strict-ergodicity verdicts and C*-model checks.
//!
//! In finite dimensions the norm, weak and weak* topologies on states
//! coincide, so every limit in the theory is an ordinary limit of matrices.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod linalg;
pub mod optimize;
pub mod random;
pub mod serde_matrix;

pub use algebra::{
    element_arith, functional_norm, herm_spectrum, is_positive, is_tracial, jordan_decompose,
    operator_norm, pair, Algebra, ArithOp, Element, HermitianFunctional, Operand, State,
};
pub use dynamics::{
    apply, commutator_decay, dual_apply, fixed_dim, fixed_projector, folner_average,
    folner_defect, folner_sets, cesaro_projector, Automorphism, FiniteGroup, FixedProjector,
    FolnerSchedule, GroupAction, GroupElement, GroupSpec, GroupWord, ScheduleKind, Side,
};
pub use error::{Error, Result};
pub use gauge::{
    gauge, model_check, strict_ergodicity, subadditivity_check, unique_ergodicity, BlockPlacement,
    CStarModel, Embedding, GaugeOptions, GaugeResult, ModelCheckOptions, ModelVerdict,
    UniqueErgodicityOptions, UniqueErgodicityReport,
};
pub use optimize::{
    ann_feasibility, exposing_observable, extreme_invariant_states, krylov_bogolyubov, m_max,
    maximizing_face, minimal_fixed_projections, quotient_correspondence_check, ConvexBodySpec,
    Face, KrylovBogolyubov, Method, OptimizationResult, OptimizeOptions,
};
