use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::group::{GroupAction, GroupElement, GroupSpec, GroupWord};
use crate::algebra::Element;
use crate::error::{Error, Result};

/// Largest word set that [`folner_sets`] will enumerate.
pub const MAX_ENUMERATED_SET: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `F_k = {0, …, k−1}` in `Z`.
    Interval,
    /// `F_k = {0, …, k−1}^d` in `Z^d`.
    Box,
    /// `F_k = G` for a finite group.
    FullGroup,
    /// User-supplied sets; `sets[k−1]` is `F_k`.
    Explicit(Vec<Vec<GroupWord>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolnerSchedule {
    pub side: Side,
    pub kind: ScheduleKind,
}

impl FolnerSchedule {
    pub fn new(side: Side, kind: ScheduleKind) -> Self {
        Self { side, kind }
    }

    pub fn interval() -> Self {
        Self::new(Side::Right, ScheduleKind::Interval)
    }

    pub fn boxes() -> Self {
        Self::new(Side::Right, ScheduleKind::Box)
    }

    pub fn full_group() -> Self {
        Self::new(Side::Right, ScheduleKind::FullGroup)
    }

    pub fn explicit(side: Side, sets: Vec<Vec<GroupWord>>) -> Self {
        Self::new(side, ScheduleKind::Explicit(sets))
    }

    /// The natural built-in schedule for a group, if any.
    pub fn default_for(group: &GroupSpec) -> Option<Self> {
        match group {
            GroupSpec::Integers => Some(Self::interval()),
            GroupSpec::Lattice { .. } => Some(Self::boxes()),
            GroupSpec::Finite(_) => Some(Self::full_group()),
            GroupSpec::FreeWords { .. } => None,
        }
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn check_compatible(&self, group: &GroupSpec) -> Result<()> {
        let ok = match (&self.kind, group) {
            (ScheduleKind::Interval, GroupSpec::Integers) => true,
            (ScheduleKind::Interval, GroupSpec::Lattice { rank: 1 }) => true,
            (ScheduleKind::Box, GroupSpec::Integers | GroupSpec::Lattice { .. }) => true,
            (ScheduleKind::FullGroup, GroupSpec::Finite(_)) => true,
            (ScheduleKind::Explicit(sets), _) => {
                for (k, set) in sets.iter().enumerate() {
                    if set.is_empty() {
                        return Err(Error::IncompatibleSchedule(format!(
                            "explicit set F_{} is empty",
                            k + 1
                        )));
                    }
                    for w in set {
                        group.check_word(w)?;
                    }
                }
                true
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleSchedule(format!(
                "{} schedule on group {}",
                self.kind_name(),
                group.name()
            )))
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ScheduleKind::Interval => "interval",
            ScheduleKind::Box => "box",
            ScheduleKind::FullGroup => "full",
            ScheduleKind::Explicit(_) => "explicit",
        }
    }

    /// Number of sets for explicit schedules; unbounded otherwise.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::Explicit(sets) => Some(sets.len()),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        let side = match self.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        match self.len() {
            Some(n) => format!("{side} {} ({n} sets)", self.kind_name()),
            None => format!("{side} {}", self.kind_name()),
        }
    }

    /// `|F_k|` without enumerating.
    pub fn set_size(&self, group: &GroupSpec, k: usize) -> Result<usize> {
        self.check_compatible(group)?;
        if k == 0 {
            return Err(Error::EmptyFolnerSet);
        }
        Ok(match (&self.kind, group) {
            (ScheduleKind::Interval, _) => k,
            (ScheduleKind::Box, g) => k.saturating_pow(g.num_generators() as u32),
            (ScheduleKind::FullGroup, GroupSpec::Finite(g)) => g.order(),
            (ScheduleKind::Explicit(_), g) => reduced_set(&folner_sets(self, g, k)?, g)?.len(),
            _ => unreachable!("compatibility checked"),
        })
    }

    /// Per-generator defects of `F_k` on the schedule's side; closed form for
    /// the built-in kinds, counted for explicit sets.
    pub fn generator_defects(&self, group: &GroupSpec, k: usize) -> Result<Vec<f64>> {
        self.check_compatible(group)?;
        if k == 0 {
            return Err(Error::EmptyFolnerSet);
        }
        let r = group.num_generators();
        match &self.kind {
            // Translating {0..k-1}^d by a unit vector moves one face of k^{d-1}
            // points out and one in.
            ScheduleKind::Interval | ScheduleKind::Box => Ok(vec![2.0 / k as f64; r]),
            ScheduleKind::FullGroup => Ok(vec![0.0; r]),
            ScheduleKind::Explicit(_) => {
                let f = folner_sets(self, group, k)?;
                (0..r)
                    .map(|g| folner_defect(&f, &GroupWord::generator(g), self.side, group))
                    .collect()
            }
        }
    }
}

/// `F_k` as words; built-in kinds are enumerated in lexicographic exponent
/// order (finite groups in element order).
pub fn folner_sets(schedule: &FolnerSchedule, group: &GroupSpec, k: usize) -> Result<Vec<GroupWord>> {
    if k == 0 {
        return Err(Error::EmptyFolnerSet);
    }
    match (&schedule.kind, group) {
        (ScheduleKind::Explicit(sets), _) => {
            let set = sets.get(k - 1).ok_or(Error::ScheduleExhausted {
                requested: k,
                available: sets.len(),
            })?;
            if set.is_empty() {
                return Err(Error::EmptyFolnerSet);
            }
            for w in set {
                group.check_word(w)?;
            }
            Ok(set.clone())
        }
        _ => {
            schedule.check_compatible(group)?;
            match (&schedule.kind, group) {
                (ScheduleKind::Interval, _) => {
                    Ok((0..k as i64).map(|j| GroupWord::power(0, j)).collect())
                }
                (ScheduleKind::Box, g) => {
                    let d = g.num_generators() as u32;
                    let size = k
                        .checked_pow(d)
                        .filter(|&s| s <= MAX_ENUMERATED_SET)
                        .ok_or_else(|| {
                            Error::Numerical(format!("box of side {k} in rank {d} is too large to list"))
                        })?;
                    Ok((0..size)
                        .map(|mut idx| {
                            let mut e = vec![0i64; d as usize];
                            for slot in e.iter_mut().rev() {
                                *slot = (idx % k) as i64;
                                idx /= k;
                            }
                            GroupWord::monomial(&e)
                        })
                        .collect())
                }
                (ScheduleKind::FullGroup, GroupSpec::Finite(g)) => {
                    Ok((0..g.order()).map(|a| g.word(a).clone()).collect())
                }
                _ => unreachable!("compatibility checked"),
            }
        }
    }
}

fn reduced_set(f: &[GroupWord], group: &GroupSpec) -> Result<BTreeSet<GroupElement>> {
    f.iter().map(|w| group.reduce(w)).collect()
}

/// `|gF Δ F|/|F|` (left) or `|Fg Δ F|/|F|` (right) on reduced elements.
pub fn folner_defect(f: &[GroupWord], g: &GroupWord, side: Side, group: &GroupSpec) -> Result<f64> {
    let set = reduced_set(f, group)?;
    if set.is_empty() {
        return Err(Error::EmptyFolnerSet);
    }
    let ge = group.reduce(g)?;
    let moved = set
        .iter()
        .map(|x| match side {
            Side::Left => group.multiply(&ge, x),
            Side::Right => group.multiply(x, &ge),
        })
        .collect::<Result<BTreeSet<_>>>()?;
    let sym = moved.symmetric_difference(&set).count();
    Ok(sym as f64 / set.len() as f64)
}

/// `(1/|F|) Σ_{g∈F} Θ_g x`, with `F` taken as a set of group elements.
pub fn folner_average(action: &GroupAction, f: &[GroupWord], x: &Element) -> Result<Element> {
    action.algebra().check_same(x.algebra())?;
    let set = reduced_set(f, action.group())?;
    if set.is_empty() {
        return Err(Error::EmptyFolnerSet);
    }
    let mut acc = Element::zero(x.algebra());
    for e in &set {
        acc.add_assign(&action.element_automorphism(e)?.apply_unchecked(x));
    }
    Ok(acc.scale_real(1.0 / set.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::group::FiniteGroup;

    #[test]
    fn interval_and_box_sets() {
        let z = GroupSpec::Integers;
        let f = folner_sets(&FolnerSchedule::interval(), &z, 3).unwrap();
        assert_eq!(
            f,
            vec![GroupWord::identity(), GroupWord::power(0, 1), GroupWord::power(0, 2)]
        );
        let z2 = GroupSpec::Lattice { rank: 2 };
        assert_eq!(folner_sets(&FolnerSchedule::boxes(), &z2, 2).unwrap().len(), 4);
        let s3 = FiniteGroup::from_permutations(&[vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        let g = GroupSpec::Finite(s3);
        assert_eq!(folner_sets(&FolnerSchedule::full_group(), &g, 1).unwrap().len(), 6);
    }

    #[test]
    fn defect_counts() {
        let z = GroupSpec::Integers;
        let f = folner_sets(&FolnerSchedule::interval(), &z, 10).unwrap();
        let d = folner_defect(&f, &GroupWord::generator(0), Side::Left, &z).unwrap();
        assert!((d - 0.2).abs() < 1e-15);

        let z2 = GroupSpec::Lattice { rank: 2 };
        let f = folner_sets(&FolnerSchedule::boxes(), &z2, 10).unwrap();
        let d = folner_defect(&f, &GroupWord::generator(1), Side::Left, &z2).unwrap();
        assert!((d - 0.2).abs() < 1e-15);

        let s3 = GroupSpec::Finite(FiniteGroup::from_permutations(&[vec![1, 0, 2], vec![1, 2, 0]]).unwrap());
        let f = folner_sets(&FolnerSchedule::full_group(), &s3, 1).unwrap();
        for g in 0..2 {
            for side in [Side::Left, Side::Right] {
                assert_eq!(folner_defect(&f, &GroupWord::generator(g), side, &s3).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn explicit_schedule_exhaustion() {
        let s = FolnerSchedule::explicit(Side::Left, vec![vec![GroupWord::identity()]]);
        assert!(folner_sets(&s, &GroupSpec::Integers, 1).is_ok());
        assert_eq!(
            folner_sets(&s, &GroupSpec::Integers, 2),
            Err(Error::ScheduleExhausted {
                requested: 2,
                available: 1
            })
        );
    }

    #[test]
    fn incompatible_schedule() {
        assert!(FolnerSchedule::full_group()
            .check_compatible(&GroupSpec::Integers)
            .is_err());
        assert!(FolnerSchedule::interval()
            .check_compatible(&GroupSpec::Lattice { rank: 2 })
            .is_err());
    }
}
