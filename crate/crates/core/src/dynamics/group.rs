use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::automorphism::Automorphism;
use crate::algebra::{Algebra, Element, HermitianFunctional};
use crate::error::{Error, Result};
use crate::linalg::{self, RMat};

/// Tolerance for relation checks on group actions.
pub const ACTION_TOL: f64 = 1e-10;

/// A word `g_{i_1}^{e_1} ⋯ g_{i_r}^{e_r}` in the generators, `e_j = ±1`.
///
/// The word acts as `Θ_{g_{i_1}}^{e_1} ∘ ⋯ ∘ Θ_{g_{i_r}}^{e_r}`: the rightmost
/// letter is applied first, so `Θ_{vw} = Θ_v ∘ Θ_w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, i8)>", into = "Vec<(usize, i8)>")]
pub struct GroupWord(Vec<(usize, i8)>);

impl TryFrom<Vec<(usize, i8)>> for GroupWord {
    type Error = Error;
    fn try_from(letters: Vec<(usize, i8)>) -> Result<Self> {
        GroupWord::new(letters)
    }
}

impl From<GroupWord> for Vec<(usize, i8)> {
    fn from(w: GroupWord) -> Self {
        w.0
    }
}

impl GroupWord {
    pub fn new(letters: Vec<(usize, i8)>) -> Result<Self> {
        if let Some(&(_, e)) = letters.iter().find(|(_, e)| *e != 1 && *e != -1) {
            return Err(Error::InvalidGroup(format!("word exponent {e} is not ±1")));
        }
        Ok(Self(letters))
    }

    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        Self(vec![(i, 1)])
    }

    /// `g_i^n`, spelled out letter by letter.
    pub fn power(i: usize, n: i64) -> Self {
        let e = if n < 0 { -1 } else { 1 };
        Self(vec![(i, e); n.unsigned_abs() as usize])
    }

    /// `g_1^{n_1} ⋯ g_d^{n_d}`.
    pub fn monomial(exponents: &[i64]) -> Self {
        let mut letters = Vec::new();
        for (i, &n) in exponents.iter().enumerate() {
            letters.extend(Self::power(i, n).0);
        }
        Self(letters)
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The product `self · other`.
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Self(letters)
    }

    pub fn inverse(&self) -> GroupWord {
        Self(self.0.iter().rev().map(|&(g, e)| (g, -e)).collect())
    }

    /// Cancels adjacent `g g⁻¹` pairs.
    pub fn free_reduce(&self) -> GroupWord {
        let mut out: Vec<(usize, i8)> = Vec::with_capacity(self.0.len());
        for &(g, e) in &self.0 {
            match out.last() {
                Some(&(h, f)) if h == g && f == -e => {
                    out.pop();
                }
                _ => out.push((g, e)),
            }
        }
        Self(out)
    }
}

/// A reduced group element, hashable for set arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Exponent vector in `Z^d` (`d = 1` for the integers).
    Lattice(Vec<i64>),
    /// Index into a finite group's table.
    Finite(usize),
    /// Freely reduced word.
    Free(GroupWord),
}

/// A finite group given by its multiplication table and generators.
///
/// `table[a][b]` is the index of `a·b`. The generators must generate the
/// whole group; every element carries a shortest word in them.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    generators: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
    words: Vec<GroupWord>,
}

impl FiniteGroup {
    pub fn new(labels: Vec<String>, table: Vec<Vec<usize>>, generators: Vec<usize>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty multiplication table".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidGroup(format!(
                "{} labels for {n} elements",
                labels.len()
            )));
        }
        if let Some(r) = table.iter().position(|row| row.len() != n || row.iter().any(|&c| c >= n)) {
            return Err(Error::InvalidGroup(format!("table row {r} is malformed")));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverses = vec![0; n];
        for a in 0..n {
            inverses[a] = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        if let Some(&g) = generators.iter().find(|&&g| g >= n) {
            return Err(Error::InvalidGroup(format!("generator {g} is not an element")));
        }
        // Breadth-first search gives each element a shortest word; g_i^{-1} is
        // reached through the inverse letter.
        let mut words: Vec<Option<GroupWord>> = vec![None; n];
        words[identity] = Some(GroupWord::identity());
        let mut queue = VecDeque::from([identity]);
        while let Some(a) = queue.pop_front() {
            for (i, &g) in generators.iter().enumerate() {
                for (next, e) in [(table[a][g], 1i8), (table[a][inverses[g]], -1i8)] {
                    if words[next].is_none() {
                        let w = words[a].as_ref().expect("visited").concat(&GroupWord(vec![(i, e)]));
                        words[next] = Some(w);
                        queue.push_back(next);
                    }
                }
            }
        }
        let words = words
            .into_iter()
            .enumerate()
            .map(|(a, w)| {
                w.ok_or_else(|| {
                    Error::InvalidGroup(format!("generators do not reach element {a}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            labels,
            table,
            generators,
            identity,
            inverses,
            words,
        })
    }

    /// The group generated by permutations of `{0, …, n−1}`, composed as
    /// functions (`(pq)(x) = p(q(x))`), with the given permutations as
    /// generators.
    pub fn from_permutations(generators: &[Vec<usize>]) -> Result<Self> {
        let n = generators.first().map_or(0, |p| p.len());
        for p in generators {
            let mut seen = vec![false; n];
            if p.len() != n || p.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
                return Err(Error::InvalidGroup(format!("{p:?} is not a permutation of {n} points")));
            }
        }
        let compose = |p: &[usize], q: &[usize]| q.iter().map(|&x| p[x]).collect::<Vec<_>>();
        let mut elements: Vec<Vec<usize>> = vec![(0..n).collect()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(elements[0].clone(), 0)]);
        let mut frontier = 0;
        while frontier < elements.len() {
            let a = elements[frontier].clone();
            for g in generators {
                let b = compose(&a, g);
                if !index.contains_key(&b) {
                    index.insert(b.clone(), elements.len());
                    elements.push(b);
                }
            }
            frontier += 1;
        }
        let table = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&compose(a, b)]).collect())
            .collect();
        let labels = elements.iter().map(|p| format!("{p:?}")).collect();
        let gens = generators.iter().map(|g| index[g]).collect();
        Self::new(labels, table, gens)
    }

    /// `Z_{n_1} × ⋯ × Z_{n_r}` with the unit vectors as generators.
    pub fn abelian(orders: &[usize]) -> Result<Self> {
        if orders.is_empty() || orders.contains(&0) {
            return Err(Error::InvalidGroup("orders must be positive".into()));
        }
        let size: usize = orders.iter().product();
        let decode = |mut k: usize| {
            orders
                .iter()
                .map(|&o| {
                    let d = k % o;
                    k /= o;
                    d
                })
                .collect::<Vec<_>>()
        };
        let encode = |v: &[usize]| {
            v.iter()
                .zip(orders)
                .rev()
                .fold(0, |acc, (&d, &o)| acc * o + d)
        };
        let table = (0..size)
            .map(|a| {
                let va = decode(a);
                (0..size)
                    .map(|b| {
                        let vb = decode(b);
                        let s: Vec<usize> = va
                            .iter()
                            .zip(&vb)
                            .zip(orders)
                            .map(|((x, y), o)| (x + y) % o)
                            .collect();
                        encode(&s)
                    })
                    .collect()
            })
            .collect();
        let labels = (0..size).map(|a| format!("{:?}", decode(a))).collect();
        let generators = (0..orders.len())
            .map(|i| {
                let mut v = vec![0; orders.len()];
                v[i] = 1 % orders[i];
                encode(&v)
            })
            .collect();
        Self::new(labels, table, generators)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::abelian(&[n])
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// A shortest word for element `a`.
    pub fn word(&self, a: usize) -> &GroupWord {
        &self.words[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }
}

/// The phase group.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupSpec {
    Integers,
    Lattice { rank: usize },
    Finite(FiniteGroup),
    /// Free group on the labels; no relations are checked.
    FreeWords { labels: Vec<String> },
}

impl GroupSpec {
    pub fn num_generators(&self) -> usize {
        match self {
            GroupSpec::Integers => 1,
            GroupSpec::Lattice { rank } => *rank,
            GroupSpec::Finite(g) => g.generators().len(),
            GroupSpec::FreeWords { labels } => labels.len(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GroupSpec::Integers => "Z".into(),
            GroupSpec::Lattice { rank } => format!("Z^{rank}"),
            GroupSpec::Finite(g) => format!("finite(order {})", g.order()),
            GroupSpec::FreeWords { labels } => format!("free({})", labels.len()),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::Integers | GroupSpec::Lattice { .. } => true,
            GroupSpec::Finite(g) => g.is_abelian(),
            GroupSpec::FreeWords { labels } => labels.len() <= 1,
        }
    }

    /// Whether a projector-backed spectral oracle exists.
    pub fn has_fixed_projector(&self) -> bool {
        !matches!(self, GroupSpec::FreeWords { .. })
    }

    pub fn check_word(&self, w: &GroupWord) -> Result<()> {
        let count = self.num_generators();
        match w.letters().iter().find(|(g, _)| *g >= count) {
            Some(&(index, _)) => Err(Error::UnknownGenerator { index, count }),
            None => Ok(()),
        }
    }

    pub fn reduce(&self, w: &GroupWord) -> Result<GroupElement> {
        self.check_word(w)?;
        Ok(match self {
            GroupSpec::Integers | GroupSpec::Lattice { .. } => {
                let mut v = vec![0i64; self.num_generators()];
                for &(g, e) in w.letters() {
                    v[g] += e as i64;
                }
                GroupElement::Lattice(v)
            }
            GroupSpec::Finite(g) => {
                let gens = g.generators();
                GroupElement::Finite(w.letters().iter().fold(g.identity(), |acc, &(i, e)| {
                    let s = if e > 0 { gens[i] } else { g.inverse(gens[i]) };
                    g.multiply(acc, s)
                }))
            }
            GroupSpec::FreeWords { .. } => GroupElement::Free(w.free_reduce()),
        })
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        match (self, a, b) {
            (GroupSpec::Integers | GroupSpec::Lattice { .. }, GroupElement::Lattice(x), GroupElement::Lattice(y)) => {
                Ok(GroupElement::Lattice(x.iter().zip(y).map(|(p, q)| p + q).collect()))
            }
            (GroupSpec::Finite(g), GroupElement::Finite(x), GroupElement::Finite(y)) => {
                Ok(GroupElement::Finite(g.multiply(*x, *y)))
            }
            (GroupSpec::FreeWords { .. }, GroupElement::Free(x), GroupElement::Free(y)) => {
                Ok(GroupElement::Free(x.concat(y).free_reduce()))
            }
            _ => Err(Error::InvalidGroup("element does not belong to this group".into())),
        }
    }

    /// A word representing `a`.
    pub fn word_of(&self, a: &GroupElement) -> Result<GroupWord> {
        match (self, a) {
            (GroupSpec::Integers | GroupSpec::Lattice { .. }, GroupElement::Lattice(v)) => {
                Ok(GroupWord::monomial(v))
            }
            (GroupSpec::Finite(g), GroupElement::Finite(x)) if *x < g.order() => Ok(g.word(*x).clone()),
            (GroupSpec::FreeWords { .. }, GroupElement::Free(w)) => Ok(w.clone()),
            _ => Err(Error::InvalidGroup("element does not belong to this group".into())),
        }
    }
}

/// A homomorphism `Θ : G → Aut(𝔄)` given on generators.
#[derive(Debug, Clone)]
pub struct GroupAction {
    algebra: Algebra,
    group: GroupSpec,
    generators: Vec<Automorphism>,
    /// Finite groups only: `Θ_a` for every element index `a`.
    elements: Option<Vec<Automorphism>>,
}

impl GroupAction {
    /// Validates the generator data against the group's relations:
    /// commutation for lattices, the multiplication table for finite groups.
    pub fn new(group: GroupSpec, generators: Vec<Automorphism>) -> Result<Self> {
        let count = group.num_generators();
        if count == 0 {
            return Err(Error::InvalidGroup("group has no generators".into()));
        }
        if generators.len() != count {
            return Err(Error::InvalidGroup(format!(
                "group has {count} generators, {} automorphisms supplied",
                generators.len()
            )));
        }
        let algebra = generators[0].algebra().clone();
        for g in &generators[1..] {
            algebra.check_same(g.algebra())?;
        }
        let mut elements = None;
        match &group {
            GroupSpec::Lattice { .. } => {
                let mats: Vec<RMat> = generators.iter().map(|g| g.action_matrix()).collect();
                for a in 0..count {
                    for b in (a + 1)..count {
                        let residual = linalg::real_spectral_norm(
                            &(&mats[a] * &mats[b] - &mats[b] * &mats[a]),
                        );
                        if residual > ACTION_TOL {
                            return Err(Error::NonCommuting {
                                first: a,
                                second: b,
                                residual,
                            });
                        }
                    }
                }
            }
            GroupSpec::Finite(g) => {
                let n = g.order();
                let mut autos: Vec<Option<Automorphism>> = vec![None; n];
                for a in 0..n {
                    autos[a] = Some(word_automorphism(&algebra, &generators, g.word(a)));
                }
                let autos: Vec<Automorphism> = autos.into_iter().map(|a| a.expect("all set")).collect();
                let mats: Vec<RMat> = autos.iter().map(|a| a.action_matrix()).collect();
                // Θ_{ag} = Θ_a Θ_g for every element a and generator g implies
                // the full table by induction on word length.
                let mut residual: f64 = 0.0;
                for a in 0..n {
                    for &s in g.generators() {
                        let ag = g.multiply(a, s);
                        residual = residual
                            .max(linalg::real_spectral_norm(&(&mats[ag] - &mats[a] * &mats[s])));
                    }
                }
                if residual > ACTION_TOL {
                    return Err(Error::TableViolation(residual));
                }
                elements = Some(autos);
            }
            GroupSpec::Integers | GroupSpec::FreeWords { .. } => {}
        }
        Ok(Self {
            algebra,
            group,
            generators,
            elements,
        })
    }

    pub fn integers(generator: Automorphism) -> Result<Self> {
        Self::new(GroupSpec::Integers, vec![generator])
    }

    pub fn lattice(generators: Vec<Automorphism>) -> Result<Self> {
        Self::new(
            GroupSpec::Lattice {
                rank: generators.len(),
            },
            generators,
        )
    }

    pub fn finite(group: FiniteGroup, generators: Vec<Automorphism>) -> Result<Self> {
        Self::new(GroupSpec::Finite(group), generators)
    }

    /// The trivial `Z`-action.
    pub fn identity(algebra: &Algebra) -> Self {
        Self {
            algebra: algebra.clone(),
            group: GroupSpec::Integers,
            generators: vec![Automorphism::identity(algebra)],
            elements: None,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn generators(&self) -> &[Automorphism] {
        &self.generators
    }

    /// `Θ_w`.
    pub fn automorphism(&self, w: &GroupWord) -> Result<Automorphism> {
        let e = self.group.reduce(w)?;
        self.element_automorphism(&e)
    }

    pub fn element_automorphism(&self, e: &GroupElement) -> Result<Automorphism> {
        match (&self.group, e) {
            (GroupSpec::Integers | GroupSpec::Lattice { .. }, GroupElement::Lattice(v)) => {
                if v.len() != self.generators.len() {
                    return Err(Error::InvalidGroup("exponent vector has wrong rank".into()));
                }
                Ok(v.iter()
                    .zip(&self.generators)
                    .fold(Automorphism::identity(&self.algebra), |acc, (&n, g)| {
                        acc.compose_unchecked(&g.pow(n))
                    }))
            }
            (GroupSpec::Finite(_), GroupElement::Finite(a)) => self
                .elements
                .as_ref()
                .and_then(|els| els.get(*a))
                .cloned()
                .ok_or_else(|| Error::InvalidGroup(format!("element {a} out of range"))),
            (GroupSpec::FreeWords { .. }, GroupElement::Free(w)) => {
                Ok(word_automorphism(&self.algebra, &self.generators, w))
            }
            _ => Err(Error::InvalidGroup("element does not belong to this group".into())),
        }
    }

    /// `Θ_a` for every element of a finite group, indexed by element.
    pub fn element_automorphisms(&self) -> Option<&[Automorphism]> {
        self.elements.as_deref()
    }

    pub fn apply(&self, w: &GroupWord, x: &Element) -> Result<Element> {
        self.algebra.check_same(x.algebra())?;
        Ok(self.automorphism(w)?.apply_unchecked(x))
    }

    /// `φ ∘ Θ_w`, whose density is `Θ_w⁻¹(h)` since `Θ_w` is
    /// trace-preserving and multiplicative.
    pub fn dual_apply(&self, w: &GroupWord, phi: &HermitianFunctional) -> Result<HermitianFunctional> {
        self.algebra.check_same(phi.algebra())?;
        let t = self.automorphism(w)?.inverse();
        Ok(HermitianFunctional::from_hermitian_part(
            &t.apply_unchecked(phi.density()),
        ))
    }

    /// Action matrices of the generators on Hermitian coordinates.
    pub fn generator_matrices(&self) -> Vec<RMat> {
        self.generators.iter().map(|g| g.action_matrix()).collect()
    }

    /// Orbits of block indices under the generators' block permutations,
    /// each sorted, ordered by smallest member.
    pub fn block_orbits(&self) -> Vec<Vec<usize>> {
        let m = self.algebra.num_blocks();
        let mut orbit_of = vec![usize::MAX; m];
        let mut orbits = Vec::new();
        for start in 0..m {
            if orbit_of[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members = vec![start];
            orbit_of[start] = id;
            let mut k = 0;
            while k < members.len() {
                let i = members[k];
                for g in &self.generators {
                    let j = g.perm()[i];
                    if orbit_of[j] == usize::MAX {
                        orbit_of[j] = id;
                        members.push(j);
                    }
                }
                k += 1;
            }
            members.sort_unstable();
            orbits.push(members);
        }
        orbits
    }

    /// Whether every generator permutation maps `blocks` onto itself.
    pub fn is_block_set_invariant(&self, blocks: &[usize]) -> bool {
        let m = self.algebra.num_blocks();
        let mut inside = vec![false; m];
        for &b in blocks {
            if b >= m {
                return false;
            }
            inside[b] = true;
        }
        self.generators
            .iter()
            .all(|g| (0..m).all(|i| inside[i] == inside[g.perm()[i]]))
    }

    /// The induced action on the quotient by the ideal supported on
    /// `killed`, realized on the remaining blocks in their original order.
    pub fn quotient(&self, killed: &[usize]) -> Result<GroupAction> {
        let m = self.algebra.num_blocks();
        if !self.is_block_set_invariant(killed) {
            let mut b = killed.to_vec();
            b.sort_unstable();
            b.dedup();
            return Err(Error::BlockSetNotInvariant(b));
        }
        let keep: Vec<usize> = (0..m).filter(|i| !killed.contains(i)).collect();
        if keep.is_empty() {
            return Err(Error::Infeasible("the ideal is the whole algebra".into()));
        }
        let mut new_index = vec![usize::MAX; m];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let dims = keep.iter().map(|&i| self.algebra.block_dims()[i]).collect();
        let algebra = Algebra::new(dims)?;
        let restrict = |t: &Automorphism| {
            Automorphism::from_parts_unchecked(
                &algebra,
                keep.iter().map(|&i| new_index[t.perm()[i]]).collect(),
                keep.iter().map(|&i| t.unitaries()[i].clone()).collect(),
            )
        };
        let generators: Vec<Automorphism> = self.generators.iter().map(restrict).collect();
        let elements = self
            .elements
            .as_ref()
            .map(|els| els.iter().map(restrict).collect());
        Ok(GroupAction {
            algebra,
            group: self.group.clone(),
            generators,
            elements,
        })
    }

    /// Restriction of an element to the blocks kept by [`GroupAction::quotient`].
    pub fn quotient_map(x: &Element, killed: &[usize]) -> Result<Element> {
        let m = x.algebra().num_blocks();
        let keep: Vec<usize> = (0..m).filter(|i| !killed.contains(i)).collect();
        let dims = keep.iter().map(|&i| x.algebra().block_dims()[i]).collect();
        let algebra = Algebra::new(dims)?;
        Element::from_blocks(&algebra, keep.iter().map(|&i| x.block(i).clone()).collect())
    }
}

fn word_automorphism(algebra: &Algebra, generators: &[Automorphism], w: &GroupWord) -> Automorphism {
    w.letters()
        .iter()
        .fold(Automorphism::identity(algebra), |acc, &(g, e)| {
            let t = if e > 0 {
                generators[g].clone()
            } else {
                generators[g].inverse()
            };
            acc.compose_unchecked(&t)
        })
}
