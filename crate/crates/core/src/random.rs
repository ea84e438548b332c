//! Seeded random elements, functionals and dynamical systems for property
//! tests and acceptance suites.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{Algebra, Element, HermitianFunctional, State};
use crate::dynamics::{Automorphism, FiniteGroup, GroupAction, GroupSpec};
use crate::error::Result;
use crate::gauge::{BlockPlacement, Embedding};
use crate::linalg::{CMat, RMat, C64, ONE, ZERO};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    CMat::from_fn(n, n, |_, _| C64::new(normal(rng), normal(rng)))
}

/// Haar unitary via QR with the phases of `R` divided out.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = gaussian_matrix(n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn random_block_unitaries<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> Vec<CMat> {
    algebra.block_dims().iter().map(|&n| random_unitary(n, rng)).collect()
}

/// Self-adjoint with operator norm 1.
pub fn random_hermitian<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> Element {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| {
            let g = gaussian_matrix(n, rng);
            (&g + g.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    let x = Element::from_blocks_unchecked(algebra, blocks);
    let r = x.operator_norm();
    if r > 0.0 {
        x.scale_real(1.0 / r)
    } else {
        Element::unit(algebra)
    }
}

/// `U diag(λ) U†` with `λ` uniform in `[0, 1]`.
pub fn random_positive<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> Element {
    let blocks = algebra
        .block_dims()
        .iter()
        .map(|&n| {
            let u = random_unitary(n, rng);
            let d = CMat::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
                C64::new(rng.random::<f64>(), 0.0)
            }));
            &u * d * u.adjoint()
        })
        .collect();
    Element::from_blocks_unchecked(algebra, blocks)
}

pub fn random_state<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> State {
    let p = random_positive(algebra, rng).shift(1e-3);
    State::normalized(&p).expect("positive with positive trace")
}

pub fn random_functional<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> HermitianFunctional {
    HermitianFunctional::from_hermitian_part(&random_hermitian(algebra, rng))
}

/// A functional with central density, hence tracial.
pub fn random_tracial_functional<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> HermitianFunctional {
    let coeffs: Vec<f64> = (0..algebra.num_blocks()).map(|_| normal(rng)).collect();
    let z = Element::central(algebra, &coeffs).expect("one coefficient per block");
    HermitianFunctional::from_hermitian_part(&z)
}

/// Block dimensions with `Σ n² ≤ max_square_sum`, grouped in runs of equal
/// size so that block permutations exist.
pub fn random_algebra<R: Rng + ?Sized>(max_square_sum: usize, rng: &mut R) -> Algebra {
    loop {
        let mut dims = Vec::new();
        let mut budget = max_square_sum;
        for _ in 0..rng.random_range(1..=3) {
            let d = rng.random_range(1..=4usize);
            let count = rng.random_range(1..=4usize);
            for _ in 0..count {
                if d * d <= budget && dims.len() < 8 {
                    dims.push(d);
                    budget -= d * d;
                }
            }
        }
        if !dims.is_empty() {
            return Algebra::new(dims).expect("positive block sizes");
        }
    }
}

/// A permutation of blocks preserving block size.
fn random_block_permutation<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> Vec<usize> {
    let dims = algebra.block_dims();
    let mut by_dim: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &d) in dims.iter().enumerate() {
        by_dim.entry(d).or_default().push(i);
    }
    let mut perm: Vec<usize> = (0..dims.len()).collect();
    for class in by_dim.values() {
        let mut shuffled = class.clone();
        shuffled.shuffle(rng);
        for (&i, &j) in class.iter().zip(&shuffled) {
            perm[i] = j;
        }
    }
    perm
}

/// Phases that are rational multiples of `2π` half the time, so that fixed
/// spaces beyond the scalars occur.
fn random_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    const PALETTE: [f64; 4] = [0.0, 0.5, 1.0 / 3.0, 0.25];
    let rational = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            let t = if rational {
                PALETTE[rng.random_range(0..PALETTE.len())]
            } else {
                rng.random::<f64>()
            };
            std::f64::consts::TAU * t
        })
        .collect()
}

fn phase_matrix(phases: &[f64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        phases.len(),
        phases.iter().map(|&t| C64::from_polar(1.0, t)),
    ))
}

/// `min |1 − λ|` over eigenvalues `λ ≠ 1` of an orthogonal action matrix;
/// `2.0` when every eigenvalue is 1. The Cesàro error decays like
/// `2/(k · gap)`.
pub fn spectral_gap(m: &RMat) -> f64 {
    // `M` is orthogonal, so `2I − M − Mᵀ` has eigenvalues `|1 − λ|²`.
    let d = m.nrows();
    let s = RMat::identity(d, d) * 2.0 - m - m.transpose();
    s.symmetric_eigenvalues()
        .iter()
        .filter(|&&e| e > 1e-12)
        .map(|e| e.sqrt())
        .fold(2.0, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemOptions {
    pub max_square_sum: usize,
    /// Lower bound on the spectral gap of each generator, enforced by
    /// rejection; `0.0` disables it.
    pub min_gap: f64,
}

impl Default for SystemOptions {
    fn default() -> Self {
        Self {
            max_square_sum: 64,
            min_gap: 0.0,
        }
    }
}

fn conjugate(frame: &Automorphism, t: &Automorphism) -> Automorphism {
    frame.compose_unchecked(t).compose_unchecked(&frame.inverse())
}

/// `Ad(W) ∘ (σ, diag phases) ∘ Ad(W)⁻¹` with a random block frame `W`.
pub fn random_integer_action<R: Rng + ?Sized>(opts: &SystemOptions, rng: &mut R) -> GroupAction {
    loop {
        let alg = random_algebra(opts.max_square_sum, rng);
        let perm = random_block_permutation(&alg, rng);
        let phases = alg.block_dims().iter().map(|&n| phase_matrix(&random_phases(n, rng))).collect();
        let base = Automorphism::from_parts_unchecked(&alg, perm, phases);
        let frame = Automorphism::from_parts_unchecked(
            &alg,
            (0..alg.num_blocks()).collect(),
            random_block_unitaries(&alg, rng),
        );
        let t = conjugate(&frame, &base);
        if opts.min_gap > 0.0 && spectral_gap(&t.action_matrix()) < opts.min_gap {
            continue;
        }
        return GroupAction::integers(t).expect("valid automorphism");
    }
}

fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            c.push(i);
            i = perm[i];
        }
        out.push(c);
    }
    out
}

/// Commuting generators `(σ^{r_j}, D_j)` with phases constant along the
/// cycles of `σ`, conjugated by one random frame.
pub fn random_lattice_action<R: Rng + ?Sized>(rank: usize, opts: &SystemOptions, rng: &mut R) -> GroupAction {
    'retry: loop {
        let alg = random_algebra(opts.max_square_sum, rng);
        let sigma = random_block_permutation(&alg, rng);
        let frame = Automorphism::from_parts_unchecked(
            &alg,
            (0..alg.num_blocks()).collect(),
            random_block_unitaries(&alg, rng),
        );
        let mut gens = Vec::with_capacity(rank);
        for _ in 0..rank {
            let r = rng.random_range(0..=2u32);
            let mut perm: Vec<usize> = (0..sigma.len()).collect();
            for _ in 0..r {
                perm = perm.iter().map(|&i| sigma[i]).collect();
            }
            let mut unitaries = vec![CMat::zeros(0, 0); alg.num_blocks()];
            for c in cycles(&sigma) {
                let d = phase_matrix(&random_phases(alg.block_dims()[c[0]], rng));
                for &i in &c {
                    unitaries[i] = d.clone();
                }
            }
            let t = conjugate(&frame, &Automorphism::from_parts_unchecked(&alg, perm, unitaries));
            if opts.min_gap > 0.0 && spectral_gap(&t.action_matrix()) < opts.min_gap {
                continue 'retry;
            }
            gens.push(t);
        }
        return GroupAction::lattice(gens).expect("generators commute by construction");
    }
}

/// A finite group given by permutation generators on `points` points.
#[derive(Debug, Clone)]
pub struct PermutationGroup {
    pub name: &'static str,
    pub points: usize,
    pub generators: Vec<Vec<usize>>,
}

fn cycle_on(points: usize, cycle: &[usize]) -> Vec<usize> {
    let mut p: Vec<usize> = (0..points).collect();
    for w in 0..cycle.len() {
        p[cycle[w]] = cycle[(w + 1) % cycle.len()];
    }
    p
}

fn disjoint_cycles(orders: &[usize]) -> PermutationGroup {
    let points = orders.iter().sum();
    let mut off = 0;
    let mut generators = Vec::new();
    for &n in orders {
        generators.push(cycle_on(points, &(off..off + n).collect::<Vec<_>>()));
        off += n;
    }
    PermutationGroup {
        name: "abelian",
        points,
        generators,
    }
}

/// Groups of order at most 24 as permutation groups.
pub fn group_catalogue() -> Vec<PermutationGroup> {
    let mut out: Vec<PermutationGroup> = [2usize, 3, 4, 5, 6, 8, 12]
        .iter()
        .map(|&n| PermutationGroup {
            name: "cyclic",
            ..disjoint_cycles(&[n])
        })
        .collect();
    out.push(disjoint_cycles(&[2, 2]));
    out.push(disjoint_cycles(&[2, 4]));
    out.push(disjoint_cycles(&[3, 3]));
    out.push(disjoint_cycles(&[2, 2, 2]));
    out.push(PermutationGroup {
        name: "S3",
        points: 3,
        generators: vec![vec![1, 0, 2], vec![1, 2, 0]],
    });
    out.push(PermutationGroup {
        name: "D4",
        points: 4,
        generators: vec![vec![1, 2, 3, 0], vec![0, 3, 2, 1]],
    });
    out.push(PermutationGroup {
        name: "D6",
        points: 6,
        generators: vec![vec![1, 2, 3, 4, 5, 0], vec![0, 5, 4, 3, 2, 1]],
    });
    out.push(PermutationGroup {
        name: "A4",
        points: 4,
        generators: vec![vec![1, 2, 0, 3], vec![1, 0, 3, 2]],
    });
    out.push(PermutationGroup {
        name: "S4",
        points: 4,
        generators: vec![vec![1, 2, 3, 0], vec![1, 0, 2, 3]],
    });
    out
}

impl PermutationGroup {
    pub fn group(&self) -> FiniteGroup {
        FiniteGroup::from_permutations(&self.generators).expect("catalogue groups are valid")
    }
}

fn permutation_matrix(p: &[usize]) -> CMat {
    let n = p.len();
    let mut m = CMat::from_element(n, n, ZERO);
    for (i, &j) in p.iter().enumerate() {
        m[(j, i)] = ONE;
    }
    m
}

/// Orthonormal basis of the sum-zero vectors in `C^n`.
fn sum_zero_basis(n: usize) -> CMat {
    let mut v = CMat::from_element(n, n - 1, ZERO);
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            v[(i, k - 1)] = C64::new(1.0 / norm, 0.0);
        }
        v[(k, k - 1)] = C64::new(-(k as f64) / norm, 0.0);
    }
    v
}

/// One summand of a direct-sum action: per-generator local block
/// permutation and unitaries.
struct Summand {
    dims: Vec<usize>,
    gens: Vec<(Vec<usize>, Vec<CMat>)>,
}

fn inverse_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

fn assemble(summands: &[Summand], num_gens: usize) -> (Algebra, Vec<Automorphism>) {
    let dims: Vec<usize> = summands.iter().flat_map(|s| s.dims.iter().copied()).collect();
    let alg = Algebra::new(dims).expect("nonempty summands");
    let gens = (0..num_gens)
        .map(|g| {
            let mut perm = Vec::new();
            let mut unitaries = Vec::new();
            let mut off = 0;
            for s in summands {
                let (p, u) = &s.gens[g];
                perm.extend(p.iter().map(|&i| i + off));
                unitaries.extend(u.iter().cloned());
                off += s.dims.len();
            }
            Automorphism::from_parts_unchecked(&alg, perm, unitaries)
        })
        .collect();
    (alg, gens)
}

/// Random direct sum of block-permutation, permutation-matrix, standard and
/// trivial representations of a catalogue group, in a random frame.
pub fn random_finite_action<R: Rng + ?Sized>(opts: &SystemOptions, rng: &mut R) -> GroupAction {
    let catalogue = group_catalogue();
    let pg = &catalogue[rng.random_range(0..catalogue.len())];
    random_action_of(pg, opts, rng)
}

pub fn random_action_of<R: Rng + ?Sized>(pg: &PermutationGroup, opts: &SystemOptions, rng: &mut R) -> GroupAction {
    let m = pg.points;
    let ng = pg.generators.len();
    let mut summands: Vec<Summand> = Vec::new();
    let mut budget = opts.max_square_sum;
    for attempt in 0..4 {
        let kind = if attempt == 0 { rng.random_range(0..3) } else { rng.random_range(0..4) };
        let s = match kind {
            0 => {
                let d = rng.random_range(1..=2usize);
                Summand {
                    dims: vec![d; m],
                    gens: pg
                        .generators
                        .iter()
                        .map(|p| (inverse_perm(p), vec![CMat::identity(d, d); m]))
                        .collect(),
                }
            }
            1 => Summand {
                dims: vec![m],
                gens: pg
                    .generators
                    .iter()
                    .map(|p| (vec![0], vec![permutation_matrix(p)]))
                    .collect(),
            },
            2 => {
                let v = sum_zero_basis(m);
                Summand {
                    dims: vec![m - 1],
                    gens: pg
                        .generators
                        .iter()
                        .map(|p| (vec![0], vec![v.adjoint() * permutation_matrix(p) * &v]))
                        .collect(),
                }
            }
            _ => {
                let d = rng.random_range(1..=2usize);
                Summand {
                    dims: vec![d],
                    gens: vec![(vec![0], vec![CMat::identity(d, d)]); ng],
                }
            }
        };
        let cost: usize = s.dims.iter().map(|d| d * d).sum();
        if cost <= budget && !(kind == 2 && m < 2) {
            budget -= cost;
            summands.push(s);
        }
    }
    if summands.is_empty() {
        summands.push(Summand {
            dims: vec![1; m],
            gens: pg.generators.iter().map(|p| (inverse_perm(p), vec![CMat::identity(1, 1); m])).collect(),
        });
    }
    let (alg, gens) = assemble(&summands, ng);
    let frame = Automorphism::from_parts_unchecked(
        &alg,
        (0..alg.num_blocks()).collect(),
        random_block_unitaries(&alg, rng),
    );
    let gens = gens.iter().map(|t| conjugate(&frame, t)).collect();
    GroupAction::finite(pg.group(), gens).expect("representations are homomorphisms")
}

/// Clock and shift on `M_n` generating `Z_n × Z_n`.
pub fn weyl_heisenberg(n: usize) -> GroupAction {
    let alg = Algebra::new(vec![n]).expect("n ≥ 1");
    let shift = permutation_matrix(&(0..n).map(|i| (i + 1) % n).collect::<Vec<_>>());
    let clock = phase_matrix(&(0..n).map(|j| std::f64::consts::TAU * j as f64 / n as f64).collect::<Vec<_>>());
    GroupAction::finite(
        FiniteGroup::abelian(&[n, n]).expect("n ≥ 1"),
        vec![
            Automorphism::inner(&alg, vec![shift]).expect("unitary"),
            Automorphism::inner(&alg, vec![clock]).expect("unitary"),
        ],
    )
    .expect("clock and shift commute up to a phase")
}

/// `Ad σ_x`, `Ad σ_z` on `M_2`.
pub fn pauli_z2z2() -> GroupAction {
    weyl_heisenberg(2)
}

/// An irreducible projective representation acting by conjugation on one
/// block, in a random frame; its joint commutant is the scalars.
pub fn random_irreducible_inner_action<R: Rng + ?Sized>(rng: &mut R) -> GroupAction {
    let choice = rng.random_range(0..6);
    let (group, unitaries): (FiniteGroup, Vec<CMat>) = match choice {
        0..=2 => {
            let n = choice + 2;
            let wh = weyl_heisenberg(n);
            let us = wh.generators().iter().map(|t| t.unitaries()[0].clone()).collect();
            match wh.group() {
                GroupSpec::Finite(g) => (g.clone(), us),
                _ => unreachable!(),
            }
        }
        _ => {
            let name = ["S3", "A4", "S4"][choice - 3];
            let pg = group_catalogue().into_iter().find(|g| g.name == name).expect("in catalogue");
            let v = sum_zero_basis(pg.points);
            let us = pg
                .generators
                .iter()
                .map(|p| v.adjoint() * permutation_matrix(p) * &v)
                .collect();
            (pg.group(), us)
        }
    };
    let n = unitaries[0].nrows();
    let alg = Algebra::new(vec![n]).expect("n ≥ 1");
    let w = random_unitary(n, rng);
    let gens = unitaries
        .iter()
        .map(|u| Automorphism::inner(&alg, vec![&w * u * w.adjoint()]).expect("unitary"))
        .collect();
    GroupAction::finite(group, gens).expect("conjugated representation")
}

/// A random permutation of `C^n` as a Z-action.
pub fn random_permutation_action<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GroupAction {
    let alg = Algebra::diagonal(n).expect("n ≥ 1");
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    GroupAction::integers(Automorphism::permutation(&alg, perm).expect("a permutation")).expect("valid")
}

/// A union of block orbits, never all blocks.
pub fn random_invariant_block_set<R: Rng + ?Sized>(action: &GroupAction, rng: &mut R) -> Vec<usize> {
    let orbits = action.block_orbits();
    if orbits.len() < 2 {
        return Vec::new();
    }
    let keep = rng.random_range(0..orbits.len());
    let mut out: Vec<usize> = orbits
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != keep && rng.random_bool(0.5))
        .flat_map(|(_, o)| o.iter().copied())
        .collect();
    out.sort_unstable();
    out
}

/// A unital equivariant embedding of `domain` into a larger ambient system
/// that kills exactly the invariant block set `kernel`.
///
/// Ambient blocks carry tuples of domain blocks, closed under the generator
/// permutations; Z-actions may mix distinct domain blocks in one ambient
/// block, other groups only repeat a block, since their generator unitaries
/// satisfy the group relations only up to per-block phases.
pub fn random_embedding<R: Rng + ?Sized>(
    domain: &GroupAction,
    kernel: &[usize],
    rng: &mut R,
) -> Result<(Embedding, GroupAction)> {
    let alg = domain.algebra();
    let live: Vec<usize> = (0..alg.num_blocks()).filter(|i| !kernel.contains(i)).collect();
    let mixing = *domain.group() == GroupSpec::Integers;
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut covered = vec![false; alg.num_blocks()];
    for &i in &live {
        if covered[i] {
            continue;
        }
        let seed = if mixing && rng.random_bool(0.5) {
            vec![i, live[rng.random_range(0..live.len())]]
        } else {
            vec![i; rng.random_range(1..=2)]
        };
        let mut queue = vec![seed];
        while let Some(t) = queue.pop() {
            if index.contains_key(&t) {
                continue;
            }
            for &s in &t {
                covered[s] = true;
            }
            index.insert(t.clone(), tuples.len());
            tuples.push(t.clone());
            for g in domain.generators() {
                queue.push(t.iter().map(|&s| g.perm()[s]).collect());
            }
        }
    }
    let dims = alg.block_dims();
    let ambient_dims: Vec<usize> = tuples.iter().map(|t| t.iter().map(|&s| dims[s]).sum()).collect();
    let ambient = Algebra::new(ambient_dims.clone())?;
    let frames: Vec<CMat> = ambient_dims.iter().map(|&m| random_unitary(m, rng)).collect();
    let mut gens = Vec::new();
    for g in domain.generators() {
        let mut perm = Vec::with_capacity(tuples.len());
        let mut unitaries = Vec::with_capacity(tuples.len());
        for (j, t) in tuples.iter().enumerate() {
            let image: Vec<usize> = t.iter().map(|&s| g.perm()[s]).collect();
            let tj = index[&image];
            let m = ambient_dims[j];
            let mut d = CMat::from_element(m, m, ZERO);
            let mut off = 0;
            for &s in t {
                let n = dims[s];
                d.view_mut((off, off), (n, n)).copy_from(&g.unitaries()[s]);
                off += n;
            }
            perm.push(tj);
            unitaries.push(&frames[j] * d * frames[tj].adjoint());
        }
        gens.push(Automorphism::new(&ambient, perm, unitaries)?);
    }
    let placements = tuples
        .iter()
        .zip(frames)
        .map(|(t, w)| BlockPlacement {
            sources: t.clone(),
            unitary: Some(w),
        })
        .collect();
    let embedding = Embedding::new(alg, &ambient, placements)?;
    let action = GroupAction::new(domain.group().clone(), gens)?;
    Ok((embedding, action))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fixed_dim;
    use crate::linalg::unitary_deviation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            assert!(unitary_deviation(&random_unitary(n, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn generated_systems_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let opts = SystemOptions { min_gap: 0.05, ..SystemOptions::default() };
        for _ in 0..10 {
            let z = random_integer_action(&opts, &mut rng);
            assert!(spectral_gap(&z.generator_matrices()[0]) >= 0.05);
            random_lattice_action(2, &opts, &mut rng);
            random_finite_action(&SystemOptions::default(), &mut rng);
            let irr = random_irreducible_inner_action(&mut rng);
            assert_eq!(fixed_dim(&irr).unwrap(), 1);
        }
        for pg in group_catalogue() {
            assert!(pg.group().order() <= 24, "{}", pg.name);
        }
    }

    #[test]
    fn embeddings_are_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let dom = random_integer_action(&SystemOptions { max_square_sum: 24, min_gap: 0.0 }, &mut rng);
            let kernel = random_invariant_block_set(&dom, &mut rng);
            let (e, amb) = random_embedding(&dom, &kernel, &mut rng).unwrap();
            assert_eq!(e.kernel(), kernel);
            let x = random_hermitian(dom.algebra(), &mut rng);
            let lhs = e.apply(&dom.generators()[0].apply(&x).unwrap()).unwrap();
            let rhs = amb.generators()[0].apply(&e.apply(&x).unwrap()).unwrap();
            assert!(lhs.distance(&rhs).unwrap() < 1e-10);
        }
    }
}
