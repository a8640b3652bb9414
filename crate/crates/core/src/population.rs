//! Population container, binary tournament selection and restricted
//! tournament replacement.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result, RngStream, Solution};

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    members: Vec<Solution>,
    capacity: usize,
}

impl Population {
    pub fn new(members: Vec<Solution>, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("population capacity must be positive"));
        }
        if members.len() > capacity {
            return Err(Error::invalid(format!(
                "{} members exceed capacity {capacity}",
                members.len()
            )));
        }
        if let Some(first) = members.first() {
            if members.iter().any(|m| m.len() != first.len()) {
                return Err(Error::invalid("population members differ in length"));
            }
        }
        Ok(Self { members, capacity })
    }

    /// Full population from a list of solutions.
    pub fn from_members(members: Vec<Solution>) -> Result<Self> {
        let cap = members.len().max(1);
        Self::new(members, cap)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Solution> {
        self.members
    }

    pub fn best(&self) -> Option<&Solution> {
        self.members
            .iter()
            .filter(|m| m.is_evaluated())
            .max_by(|a, b| a.fit().total_cmp(&b.fit()))
    }

    /// True when every member carries the same bit string.
    pub fn is_collapsed(&self) -> bool {
        match self.members.split_first() {
            Some((first, rest)) => rest.iter().all(|m| m.bits() == first.bits()),
            None => true,
        }
    }
}

/// Binary tournament selection without replacement.
///
/// Members are shuffled into a pool and drawn in pairs; the fitter of each
/// pair wins, with a fair coin on ties. When fewer than two members remain
/// the pool is refilled and reshuffled.
pub fn binary_tournament_select(
    pop: &Population,
    count: usize,
    rng: &mut RngStream,
) -> Result<Vec<Solution>> {
    if pop.is_empty() {
        return Err(Error::InvalidState(
            "tournament selection on an empty population".into(),
        ));
    }
    let members = pop.members();
    if members.iter().any(|m| !m.is_evaluated()) {
        return Err(Error::InvalidState(
            "tournament selection needs evaluated members".into(),
        ));
    }
    if members.len() == 1 {
        return Ok(vec![members[0].clone(); count]);
    }
    let mut pool: Vec<usize> = Vec::with_capacity(members.len());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if pool.len() < 2 {
            pool.clear();
            pool.extend(0..members.len());
            pool.shuffle(rng);
        }
        let a = pool.pop().unwrap();
        let b = pool.pop().unwrap();
        let (fa, fb) = (members[a].fit(), members[b].fit());
        let winner = if fa > fb {
            a
        } else if fb > fa {
            b
        } else if rng.gen::<bool>() {
            a
        } else {
            b
        };
        out.push(members[winner].clone());
    }
    Ok(out)
}

/// Restricted tournament replacement.
///
/// Draws `window` distinct members, finds the one closest to `cand` in
/// Hamming distance (first drawn wins ties) and replaces it when `cand` is
/// strictly fitter. Returns whether a replacement happened.
pub fn rts_incorporate(
    pop: &mut Population,
    cand: Solution,
    window: usize,
    rng: &mut RngStream,
) -> Result<bool> {
    if window == 0 || window > pop.len() {
        return Err(Error::invalid(format!(
            "RTS window {window} outside 1..={}",
            pop.len()
        )));
    }
    let cf = cand
        .fitness()
        .ok_or_else(|| Error::invalid("RTS candidate is not evaluated"))?;
    let drawn = rand::seq::index::sample(rng, pop.len(), window);
    let mut nearest = None;
    let mut nearest_dist = usize::MAX;
    for idx in drawn.iter() {
        let d = pop.members[idx].hamming(&cand);
        if d < nearest_dist {
            nearest_dist = d;
            nearest = Some(idx);
        }
    }
    let idx = nearest.unwrap();
    if cf > pop.members[idx].fit() {
        pop.members[idx] = cand;
        Ok(true)
    } else {
        Ok(false)
    }
}
