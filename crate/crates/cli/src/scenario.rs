//! Scenario files: one system, one schedule, many tasks.
//!
//! Parsing validates the whole file before anything runs: the algebra, every
//! generator, the group relations, the schedule, the shape of every element
//! in every task, and any inline C*-model. Errors carry the path of the
//! offending field.

use ncerg::linalg::{CMat, C64};
use ncerg::random::{random_hermitian, random_positive, random_state};
use ncerg::{
    serde_matrix, Algebra, Automorphism, BlockPlacement, CStarModel, ConvexBodySpec, Element,
    Embedding, FiniteGroup, FolnerSchedule, GroupAction, GroupSpec, GroupWord, ScheduleKind, Side,
    State,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::builtin::builtin_system;

/// Seed used when a scenario does not name one.
pub const DEFAULT_SEED: u64 = 0x6e63_7831;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: ncerg::Error,
    },
}

impl ScenarioError {
    pub fn path(&self) -> &str {
        match self {
            ScenarioError::Schema { path, .. } | ScenarioError::Invalid { path, .. } => path,
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn invalid(path: impl Into<String>, source: ncerg::Error) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        source,
    }
}

type Matrix = Vec<Vec<[f64; 2]>>;

/// Tolerances and budgets shared by all tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest Følner index used by gauge, ergodicity and model checks.
    pub k_max: usize,
    /// Pass tolerance for quantities that only converge as `k → ∞`.
    pub tol: f64,
    /// Pass tolerance for identities that hold exactly.
    pub exact_tol: f64,
    /// Cauchy tolerance of the gauge convergence flag.
    pub cauchy: f64,
    /// Relative width of top eigenvalue clusters.
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            k_max: 10_000,
            tol: 1e-3,
            exact_tol: 1e-8,
            cauchy: 1e-4,
            cluster: 1e-8,
        }
    }
}

/// An element of the system's algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    /// Complex blocks as rows of `[re, im]` pairs.
    Blocks(Vec<Matrix>),
    /// Real blocks as rows of numbers.
    RealBlocks(Vec<Vec<Vec<f64>>>),
    /// Diagonal entries, block by block.
    Diag(Vec<f64>),
    /// One scalar per block.
    Central(Vec<f64>),
    /// A multiple of the unit.
    Unit(f64),
    /// Drawn from the scenario seed.
    Random(RandomKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomKind {
    /// Norm-one Hermitian.
    Hermitian,
    /// Positive with spectrum in `[0, 1]`.
    Positive,
}

impl ElementSpec {
    pub fn resolve(&self, alg: &Algebra, rng: &mut ChaCha8Rng, path: &str) -> Result<Element, ScenarioError> {
        let blocks = |ms: Vec<CMat>| Element::from_blocks(alg, ms).map_err(|e| invalid(path, e));
        match self {
            ElementSpec::Blocks(bs) => {
                let ms = bs
                    .iter()
                    .enumerate()
                    .map(|(i, rows)| {
                        serde_matrix::from_rows(rows).map_err(|m| schema(format!("{path}.blocks[{i}]"), m))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                blocks(ms)
            }
            ElementSpec::RealBlocks(bs) => {
                let ms = bs
                    .iter()
                    .enumerate()
                    .map(|(i, rows)| {
                        let n = rows.len();
                        if rows.iter().any(|r| r.len() != n) {
                            return Err(schema(format!("{path}.real_blocks[{i}]"), "block is not square"));
                        }
                        Ok(CMat::from_fn(n, n, |r, c| C64::new(rows[r][c], 0.0)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                blocks(ms)
            }
            ElementSpec::Diag(v) => Element::diag(alg, v).map_err(|e| invalid(format!("{path}.diag"), e)),
            ElementSpec::Central(v) => Element::central(alg, v).map_err(|e| invalid(format!("{path}.central"), e)),
            ElementSpec::Unit(c) => Ok(Element::unit(alg).scale_real(*c)),
            ElementSpec::Random(RandomKind::Hermitian) => Ok(random_hermitian(alg, rng)),
            ElementSpec::Random(RandomKind::Positive) => Ok(random_positive(alg, rng)),
        }
    }
}

/// A state of the system's algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    NormalizedTrace,
    /// A positive element, normalized to unit trace.
    Density(ElementSpec),
    /// The vector state of the `i`-th diagonal coordinate.
    PointMass(usize),
    /// Drawn from the scenario seed.
    Random,
    /// A random tracial state, drawn from the scenario seed.
    RandomTracial,
}

impl StateSpec {
    pub fn resolve(&self, alg: &Algebra, rng: &mut ChaCha8Rng, path: &str) -> Result<State, ScenarioError> {
        match self {
            StateSpec::NormalizedTrace => Ok(State::normalized_trace(alg)),
            StateSpec::Density(e) => {
                let dpath = format!("{path}.density");
                let d = e.resolve(alg, rng, &dpath)?;
                State::normalized(&d).map_err(|err| invalid(dpath, err))
            }
            StateSpec::PointMass(i) => {
                State::point_mass(alg, *i).map_err(|e| invalid(format!("{path}.point_mass"), e))
            }
            StateSpec::Random => Ok(random_state(alg, rng)),
            StateSpec::RandomTracial => {
                let weights: Vec<f64> = (0..alg.num_blocks())
                    .map(|_| rand::Rng::random_range(rng, 0.05..1.0))
                    .collect();
                let d = Element::central(alg, &weights).map_err(|e| invalid(path, e))?;
                State::normalized(&d).map_err(|e| invalid(path, e))
            }
        }
    }
}

/// A convex body whose elements are given as [`ElementSpec`]s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    #[default]
    Sg,
    Tg,
    AnnIdeal {
        blocks: Vec<usize>,
    },
    AnnSet {
        elements: Vec<ElementSpec>,
    },
    Intersection {
        parts: Vec<BodySpec>,
    },
}

impl BodySpec {
    pub fn resolve(&self, alg: &Algebra, rng: &mut ChaCha8Rng, path: &str) -> Result<ConvexBodySpec, ScenarioError> {
        Ok(match self {
            BodySpec::Sg => ConvexBodySpec::SG,
            BodySpec::Tg => ConvexBodySpec::TG,
            BodySpec::AnnIdeal { blocks } => ConvexBodySpec::AnnIdeal { blocks: blocks.clone() },
            BodySpec::AnnSet { elements } => ConvexBodySpec::AnnSet {
                elements: elements
                    .iter()
                    .enumerate()
                    .map(|(i, e)| e.resolve(alg, rng, &format!("{path}.elements[{i}]")))
                    .collect::<Result<_, _>>()?,
            },
            BodySpec::Intersection { parts } => ConvexBodySpec::Intersection {
                parts: parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.resolve(alg, rng, &format!("{path}.parts[{i}]")))
                    .collect::<Result<_, _>>()?,
            },
        })
    }
}

/// Where a domain block lands in one ambient block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSpec {
    pub sources: Vec<usize>,
    #[serde(default)]
    pub unitary: Option<Matrix>,
}

/// An inline system: algebra plus action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default)]
    pub algebra: Option<AlgebraSpec>,
    pub action: ActionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub blocks: Vec<usize>,
}

/// Either explicit generators of a group or a named builtin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    #[serde(default)]
    pub group: Option<GroupSpecRaw>,
    #[serde(default)]
    pub generators: Option<Vec<GeneratorSpec>>,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params")]
pub enum GroupSpecRaw {
    #[serde(rename = "Z")]
    Integers,
    #[serde(rename = "Z^d")]
    Lattice { rank: usize },
    #[serde(rename = "finite")]
    Finite(FiniteGroupRaw),
    #[serde(rename = "free")]
    Free { labels: Vec<String> },
}

/// Exactly one of `abelian`, `cyclic`, `permutations` or `table`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiniteGroupRaw {
    /// Orders of cyclic factors; generator `i` generates factor `i`.
    pub abelian: Option<Vec<usize>>,
    pub cyclic: Option<usize>,
    /// Generating permutations.
    pub permutations: Option<Vec<Vec<usize>>>,
    /// Multiplication table `table[a][b] = ab`, with `generators`.
    pub table: Option<Vec<Vec<usize>>>,
    pub generators: Option<Vec<usize>>,
    pub labels: Option<Vec<String>>,
}

impl FiniteGroupRaw {
    fn build(&self, path: &str) -> Result<FiniteGroup, ScenarioError> {
        let given = [
            self.abelian.is_some(),
            self.cyclic.is_some(),
            self.permutations.is_some(),
            self.table.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(schema(path, "give exactly one of abelian, cyclic, permutations, table"));
        }
        let wrap = |r: ncerg::Result<FiniteGroup>| r.map_err(|e| invalid(path, e));
        if let Some(orders) = &self.abelian {
            return wrap(FiniteGroup::abelian(orders));
        }
        if let Some(n) = self.cyclic {
            return wrap(FiniteGroup::cyclic(n));
        }
        if let Some(perms) = &self.permutations {
            return wrap(FiniteGroup::from_permutations(perms));
        }
        let table = self.table.clone().expect("one variant is present");
        let generators = self
            .generators
            .clone()
            .ok_or_else(|| schema(format!("{path}.generators"), "a table needs generators"))?;
        let labels = self
            .labels
            .clone()
            .unwrap_or_else(|| (0..table.len()).map(|i| format!("g{i}")).collect());
        wrap(FiniteGroup::new(labels, table, generators))
    }
}

/// `Θ(x)_i = u_i x_{perm(i)} u_i*`; missing parts default to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default)]
    pub perm: Option<Vec<usize>>,
    #[serde(default)]
    pub unitaries: Option<Vec<Matrix>>,
}

impl SystemSpec {
    /// Builds and validates the action; `path` locates this system.
    pub fn build(&self, path: &str) -> Result<(String, GroupAction), ScenarioError> {
        let join = |field: &str| {
            if path.is_empty() {
                field.to_string()
            } else {
                format!("{path}.{field}")
            }
        };
        let action_path = join("action");
        let algebra = match &self.algebra {
            Some(a) => Some(Algebra::new(a.blocks.clone()).map_err(|e| invalid(join("algebra.blocks"), e))?),
            None => None,
        };
        let a = &self.action;
        match (&a.builtin, &a.group, &a.generators) {
            (Some(name), None, None) => {
                let act = builtin_system(name, &a.params, &format!("{action_path}.params"))?;
                if let Some(alg) = &algebra {
                    if alg != act.algebra() {
                        return Err(schema(
                            join("algebra"),
                            format!(
                                "builtin `{name}` acts on blocks {:?}, not {:?}",
                                act.algebra().block_dims(),
                                alg.block_dims()
                            ),
                        ));
                    }
                }
                Ok((name.clone(), act))
            }
            (None, Some(group), Some(gens)) => {
                if !a.params.is_null() {
                    return Err(schema(format!("{action_path}.params"), "params belong to builtin actions"));
                }
                let alg = algebra.ok_or_else(|| schema(join("algebra"), "explicit generators need an algebra"))?;
                let gpath = format!("{action_path}.group");
                let group = match group {
                    GroupSpecRaw::Integers => GroupSpec::Integers,
                    GroupSpecRaw::Lattice { rank } => GroupSpec::Lattice { rank: *rank },
                    GroupSpecRaw::Finite(f) => GroupSpec::Finite(f.build(&format!("{gpath}.params"))?),
                    GroupSpecRaw::Free { labels } => GroupSpec::FreeWords { labels: labels.clone() },
                };
                let mut automorphisms = Vec::with_capacity(gens.len());
                for (i, g) in gens.iter().enumerate() {
                    let p = format!("{action_path}.generators[{i}]");
                    automorphisms.push(build_generator(&alg, g, &p)?);
                }
                let name = format!("explicit {}", group.name());
                let act = GroupAction::new(group, automorphisms).map_err(|e| invalid(format!("{action_path}.generators"), e))?;
                Ok((name, act))
            }
            _ => Err(schema(
                action_path,
                "give either `builtin` (with optional `params`) or both `group` and `generators`",
            )),
        }
    }
}

fn build_generator(alg: &Algebra, g: &GeneratorSpec, path: &str) -> Result<Automorphism, ScenarioError> {
    let perm = g.perm.clone().unwrap_or_else(|| (0..alg.num_blocks()).collect());
    let unitaries = match &g.unitaries {
        Some(us) => us
            .iter()
            .enumerate()
            .map(|(b, rows)| serde_matrix::from_rows(rows).map_err(|m| schema(format!("{path}.unitaries[{b}]"), m)))
            .collect::<Result<Vec<_>, _>>()?,
        None => alg.block_dims().iter().map(|&n| CMat::identity(n, n)).collect(),
    };
    Automorphism::new(alg, perm, unitaries).map_err(|e| invalid(path, e))
}

/// Følner schedule; the kind defaults to the group's natural schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default = "right")]
    pub side: Side,
    #[serde(default)]
    pub kind: Option<ScheduleKindSpec>,
    /// Word sets `F_1, F_2, …` of an explicit schedule.
    #[serde(default)]
    pub sets: Option<Vec<Vec<GroupWord>>>,
}

fn right() -> Side {
    Side::Right
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKindSpec {
    Interval,
    Box,
    Full,
    Explicit,
}

impl ScheduleSpec {
    fn build(&self, group: &GroupSpec, path: &str) -> Result<FolnerSchedule, ScenarioError> {
        let kind = match (self.kind, &self.sets) {
            (Some(ScheduleKindSpec::Explicit), Some(sets)) | (None, Some(sets)) => ScheduleKind::Explicit(sets.clone()),
            (Some(ScheduleKindSpec::Explicit), None) => {
                return Err(schema(format!("{path}.sets"), "explicit schedules need sets"))
            }
            (Some(_), Some(_)) => return Err(schema(format!("{path}.sets"), "sets are only used by explicit schedules")),
            (Some(ScheduleKindSpec::Interval), None) => ScheduleKind::Interval,
            (Some(ScheduleKindSpec::Box), None) => ScheduleKind::Box,
            (Some(ScheduleKindSpec::Full), None) => ScheduleKind::FullGroup,
            (None, None) => {
                FolnerSchedule::default_for(group)
                    .ok_or_else(|| schema(format!("{path}.kind"), format!("{} has no default schedule", group.name())))?
                    .kind
            }
        };
        let s = FolnerSchedule::new(self.side, kind);
        s.check_compatible(group).map_err(|e| invalid(path, e))?;
        Ok(s)
    }
}

/// One task; `type` selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Følner gauge of a positive element against `λ_max(E a)`.
    Gauge {
        a: ElementSpec,
        #[serde(default)]
        k_max: Option<usize>,
    },
    /// `m(a|K)`.
    MMax {
        a: ElementSpec,
        #[serde(default)]
        body: BodySpec,
    },
    MaximizingFace { a: ElementSpec },
    /// Jordan decomposition of the functional with this density.
    Jordan { functional: ElementSpec },
    /// Krylov–Bogolyubov average of a seed state over `F_k`.
    Kb {
        #[serde(default = "random_state_spec")]
        seed_state: StateSpec,
        k: usize,
    },
    UniqueErgodicity {
        #[serde(default)]
        k_max: Option<usize>,
    },
    StrictErgodicity {},
    /// Exposing observables of one extreme invariant state, or of all.
    ExposingObservable {
        #[serde(default)]
        state: Option<StateSpec>,
    },
    QuotientCheck { kernel: Vec<usize>, a: ElementSpec },
    /// C*-model check of this system inside an inline ambient system.
    ModelCheck {
        ambient: SystemSpec,
        embedding: Vec<PlacementSpec>,
        #[serde(default = "trace_state_spec")]
        rho: StateSpec,
        #[serde(default)]
        elements: Option<Vec<ElementSpec>>,
        #[serde(default)]
        k_max: Option<usize>,
    },
    /// `‖[Θ_g a, b]‖` along `words`, or along `g_0, g_0², …, g_0^n`.
    CommutatorDecay {
        a: ElementSpec,
        b: ElementSpec,
        #[serde(default)]
        words: Option<Vec<GroupWord>>,
        #[serde(default)]
        n: Option<usize>,
    },
    /// `S_{k+l} ≤ S_k + S_l` for the unnormalized interval sums.
    SubadditivityCheck {
        #[serde(default = "random_positive_spec")]
        a: ElementSpec,
        #[serde(default)]
        pairs: Option<Vec<(usize, usize)>>,
    },
    /// Left and right generator defects of `F_k`.
    FolnerDefect { k: usize },
}

fn random_state_spec() -> StateSpec {
    StateSpec::Random
}

fn trace_state_spec() -> StateSpec {
    StateSpec::NormalizedTrace
}

fn random_positive_spec() -> ElementSpec {
    ElementSpec::Random(RandomKind::Positive)
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Gauge { .. } => "gauge",
            TaskSpec::MMax { .. } => "m_max",
            TaskSpec::MaximizingFace { .. } => "maximizing_face",
            TaskSpec::Jordan { .. } => "jordan",
            TaskSpec::Kb { .. } => "kb",
            TaskSpec::UniqueErgodicity { .. } => "unique_ergodicity",
            TaskSpec::StrictErgodicity {} => "strict_ergodicity",
            TaskSpec::ExposingObservable { .. } => "exposing_observable",
            TaskSpec::QuotientCheck { .. } => "quotient_check",
            TaskSpec::ModelCheck { .. } => "model_check",
            TaskSpec::CommutatorDecay { .. } => "commutator_decay",
            TaskSpec::SubadditivityCheck { .. } => "subadditivity_check",
            TaskSpec::FolnerDefect { .. } => "folner_defect",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    algebra: Option<AlgebraSpec>,
    action: ActionSpec,
    #[serde(default)]
    schedule: Option<ScheduleSpec>,
    #[serde(default)]
    tasks: Vec<TaskSpec>,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    seed: Option<u64>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Builtin name, or a description of explicit generators.
    pub system: String,
    pub action: GroupAction,
    pub schedule: FolnerSchedule,
    pub tasks: Vec<TaskSpec>,
    /// Inline models of `model_check` tasks, by task index.
    pub models: Vec<Option<CStarModel>>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

/// Generator for the random inputs of task `index`, so that tasks draw the
/// same values whatever order they run in.
pub fn task_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path == "." { "(root)".into() } else { path }, e.into_inner().to_string())
    })?;
    let system = SystemSpec {
        algebra: raw.algebra,
        action: raw.action,
    };
    let (name, action) = system.build("")?;
    let schedule = match &raw.schedule {
        Some(s) => s.build(action.group(), "schedule")?,
        None => FolnerSchedule::default_for(action.group())
            .ok_or_else(|| schema("schedule", format!("{} needs an explicit schedule", action.group().name())))?,
    };
    let t = raw.tolerances;
    if t.k_max == 0 {
        return Err(schema("tolerances.k_max", "must be positive"));
    }
    for (field, v) in [("tol", t.tol), ("exact_tol", t.exact_tol), ("cauchy", t.cauchy), ("cluster", t.cluster)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(schema(format!("tolerances.{field}"), "must be positive and finite"));
        }
    }
    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let mut models = Vec::with_capacity(raw.tasks.len());
    for (i, task) in raw.tasks.iter().enumerate() {
        models.push(validate_task(&action, &schedule, task, seed, i)?);
    }
    Ok(Scenario {
        system: name,
        action,
        schedule,
        tasks: raw.tasks,
        models,
        tolerances: t,
        seed,
    })
}

/// Checks every field of a task against the system; returns the inline model
/// of a `model_check`.
fn validate_task(
    action: &GroupAction,
    schedule: &FolnerSchedule,
    task: &TaskSpec,
    seed: u64,
    index: usize,
) -> Result<Option<CStarModel>, ScenarioError> {
    let alg = action.algebra();
    let path = format!("tasks[{index}]");
    let field = |f: &str| format!("{path}.{f}");
    let rng = &mut task_rng(seed, index);
    match task {
        TaskSpec::Gauge { a, k_max } => {
            a.resolve(alg, rng, &field("a"))?;
            if *k_max == Some(0) {
                return Err(schema(field("k_max"), "must be positive"));
            }
        }
        TaskSpec::MMax { a, body } => {
            a.resolve(alg, rng, &field("a"))?;
            body.resolve(alg, rng, &field("body"))?;
        }
        TaskSpec::MaximizingFace { a } => {
            a.resolve(alg, rng, &field("a"))?;
        }
        TaskSpec::Jordan { functional } => {
            functional.resolve(alg, rng, &field("functional"))?;
        }
        TaskSpec::Kb { seed_state, k } => {
            seed_state.resolve(alg, rng, &field("seed_state"))?;
            if *k == 0 {
                return Err(schema(field("k"), "must be positive"));
            }
        }
        TaskSpec::UniqueErgodicity { k_max } => {
            if *k_max == Some(0) {
                return Err(schema(field("k_max"), "must be positive"));
            }
        }
        TaskSpec::StrictErgodicity {} => {}
        TaskSpec::ExposingObservable { state } => {
            if let Some(s) = state {
                s.resolve(alg, rng, &field("state"))?;
            }
        }
        TaskSpec::QuotientCheck { kernel, a } => {
            a.resolve(alg, rng, &field("a"))?;
            if let Some(&b) = kernel.iter().find(|&&b| b >= alg.num_blocks()) {
                return Err(schema(field("kernel"), format!("block {b} out of range")));
            }
        }
        TaskSpec::ModelCheck {
            ambient,
            embedding,
            rho,
            elements,
            k_max,
        } => {
            let (_, amb) = ambient.build(&field("ambient"))?;
            let placements = embedding
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let unitary = p
                        .unitary
                        .as_ref()
                        .map(|rows| {
                            serde_matrix::from_rows(rows)
                                .map_err(|m| schema(format!("{path}.embedding[{i}].unitary"), m))
                        })
                        .transpose()?;
                    Ok(BlockPlacement {
                        sources: p.sources.clone(),
                        unitary,
                    })
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            let emb = Embedding::new(alg, amb.algebra(), placements).map_err(|e| invalid(field("embedding"), e))?;
            let rho = rho.resolve(amb.algebra(), rng, &field("rho"))?;
            if let Some(es) = elements {
                for (i, e) in es.iter().enumerate() {
                    e.resolve(alg, rng, &format!("{path}.elements[{i}]"))?;
                }
            }
            if *k_max == Some(0) {
                return Err(schema(field("k_max"), "must be positive"));
            }
            let model = CStarModel::new(action.clone(), amb, emb, rho).map_err(|e| invalid(path.clone(), e))?;
            return Ok(Some(model));
        }
        TaskSpec::CommutatorDecay { a, b, words, n } => {
            a.resolve(alg, rng, &field("a"))?;
            b.resolve(alg, rng, &field("b"))?;
            match (words, n) {
                (Some(ws), None) => {
                    for (i, w) in ws.iter().enumerate() {
                        action
                            .group()
                            .check_word(w)
                            .map_err(|e| invalid(format!("{path}.words[{i}]"), e))?;
                    }
                }
                (None, Some(_)) => {}
                _ => return Err(schema(path, "give exactly one of `words` and `n`")),
            }
        }
        TaskSpec::SubadditivityCheck { a, pairs } => {
            a.resolve(alg, rng, &field("a"))?;
            if let Some(ps) = pairs {
                if let Some(i) = ps.iter().position(|&(k, l)| k == 0 || l == 0) {
                    return Err(schema(format!("{path}.pairs[{i}]"), "lengths must be positive"));
                }
            }
        }
        TaskSpec::FolnerDefect { k } => {
            if *k == 0 {
                return Err(schema(field("k"), "must be positive"));
            }
            if let Some(n) = schedule.len() {
                if *k > n {
                    return Err(schema(field("k"), format!("the explicit schedule has {n} sets")));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
        "tasks": [{"type": "gauge", "a": {"diag": [1, 2, 3]}}]
    }"#;

    #[test]
    fn minimal_file_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.action.algebra().block_dims(), &[1, 1, 1]);
        assert_eq!(s.tasks.len(), 1);
        assert_eq!(s.schedule, FolnerSchedule::interval());
        assert_eq!(s.seed, DEFAULT_SEED);
    }

    #[test]
    fn non_unitary_generator_names_its_index() {
        let text = r#"{
            "algebra": {"blocks": [2]},
            "action": {
                "group": {"type": "Z^d", "params": {"rank": 2}},
                "generators": [
                    {"unitaries": [[[[1,0],[0,0]],[[0,0],[1,0]]]]},
                    {"unitaries": [[[[2,0],[0,0]],[[0,0],[1,0]]]]}
                ]
            }
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.path(), "action.generators[1]");
        assert!(err.to_string().contains("not unitary"), "{err}");
    }

    #[test]
    fn non_commuting_lattice_cites_the_residual() {
        let text = r#"{
            "algebra": {"blocks": [1, 1, 1]},
            "action": {
                "group": {"type": "Z^d", "params": {"rank": 2}},
                "generators": [{"perm": [1, 0, 2]}, {"perm": [0, 2, 1]}]
            }
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.path(), "action.generators");
        assert!(err.to_string().contains("residual"), "{err}");
    }

    #[test]
    fn schema_errors_carry_the_field_path() {
        let text = r#"{
            "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
            "tasks": [{"type": "gauge", "a": {"diag": [1, 2, 3]}}, {"type": "kb", "k": "ten"}]
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(err.path().starts_with("tasks[1]"), "{err}");
    }

    #[test]
    fn element_shape_is_checked_at_parse_time() {
        let text = r#"{
            "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
            "tasks": [{"type": "gauge", "a": {"diag": [1, 2]}}]
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.path(), "tasks[0].a.diag");
    }

    #[test]
    fn builtin_must_match_declared_algebra() {
        let text = r#"{"algebra": {"blocks": [2]}, "action": {"builtin": "cyclic_shift", "params": {"n": 3}}}"#;
        assert_eq!(parse_scenario(text).unwrap_err().path(), "algebra");
    }

    #[test]
    fn finite_group_from_table() {
        let text = r#"{
            "algebra": {"blocks": [1, 1]},
            "action": {
                "group": {"type": "finite", "params": {"table": [[0, 1], [1, 0]], "generators": [1]}},
                "generators": [{"perm": [1, 0]}]
            },
            "tasks": [{"type": "strict_ergodicity"}]
        }"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.schedule, FolnerSchedule::full_group());
    }

    #[test]
    fn free_group_needs_a_schedule() {
        let text = r#"{
            "algebra": {"blocks": [1, 1]},
            "action": {"group": {"type": "free", "params": {"labels": ["a"]}}, "generators": [{"perm": [1, 0]}]}
        }"#;
        assert_eq!(parse_scenario(text).unwrap_err().path(), "schedule");
    }

    #[test]
    fn incompatible_schedule_is_rejected() {
        let text = r#"{
            "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
            "schedule": {"kind": "full"}
        }"#;
        assert_eq!(parse_scenario(text).unwrap_err().path(), "schedule");
    }

    #[test]
    fn non_equivariant_model_is_rejected() {
        let text = r#"{
            "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
            "tasks": [{
                "type": "model_check",
                "ambient": {"action": {"builtin": "identity", "params": {"n": 3}}},
                "embedding": [{"sources": [0]}, {"sources": [1]}, {"sources": [2]}]
            }]
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.path(), "tasks[0]");
    }

    #[test]
    fn unknown_task_field_is_rejected() {
        let text = r#"{
            "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
            "tasks": [{"type": "strict_ergodicity", "extra": 1}]
        }"#;
        assert!(parse_scenario(text).is_err());
    }

    #[test]
    fn task_rng_depends_only_on_seed_and_index() {
        use rand::Rng;
        let a: u64 = task_rng(7, 3).random();
        let b: u64 = task_rng(7, 3).random();
        let c: u64 = task_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
