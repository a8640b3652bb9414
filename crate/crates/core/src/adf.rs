//! Candidate solutions and additively decomposable objectives.

use crate::{Error, Result};

/// Fixed-length bit string with an optional cached fitness.
///
/// Fitness is always maximized. The length is fixed at construction; the only
/// mutators are [`Solution::flip`] and [`Solution::set`], which invalidate the
/// cached fitness.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    bits: Vec<u8>,
    fitness: Option<f64>,
}

impl Solution {
    pub fn new(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self { bits, fitness: None }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    pub fn from_str01(s: &str) -> Self {
        Self::new(s.bytes().map(|c| (c == b'1') as u8).collect())
    }

    pub fn with_fitness(bits: Vec<u8>, fitness: f64) -> Self {
        Self {
            bits,
            fitness: Some(fitness),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value as u8;
        self.fitness = None;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
        self.fitness = None;
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    /// Fitness of an evaluated solution; panics otherwise.
    pub fn fit(&self) -> f64 {
        self.fitness.expect("solution not evaluated")
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness.is_some()
    }

    pub fn set_fitness(&mut self, f: f64) {
        self.fitness = Some(f);
    }

    pub fn hamming(&self, other: &Solution) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn to_str01(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }
}

/// One additive term: a lookup table over the assignments of its variables.
///
/// Entry `t` of the table is the contribution for the assignment where
/// variable `vars[k]` takes bit `k` of `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Subfunction {
    vars: Vec<usize>,
    table: Vec<f64>,
}

pub const MAX_ARITY: usize = 16;

impl Subfunction {
    pub fn new(vars: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::invalid("subfunction with no variables"));
        }
        if vars.len() > MAX_ARITY {
            return Err(Error::invalid(format!(
                "subfunction arity {} exceeds {MAX_ARITY}",
                vars.len()
            )));
        }
        if table.len() != 1 << vars.len() {
            return Err(Error::invalid(format!(
                "table of length {} for {} variables",
                table.len(),
                vars.len()
            )));
        }
        Ok(Self { vars, table })
    }

    /// Builds the table by evaluating `f` on every assignment of `vars`.
    pub fn from_fn(vars: Vec<usize>, f: impl Fn(&[bool]) -> f64) -> Result<Self> {
        let k = vars.len();
        let mut assignment = vec![false; k];
        let table = (0..(1usize << k.min(MAX_ARITY + 1)))
            .map(|t| {
                for (b, a) in assignment.iter_mut().enumerate() {
                    *a = (t >> b) & 1 == 1;
                }
                f(&assignment)
            })
            .collect();
        Self::new(vars, table)
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    #[inline]
    fn index(&self, bits: &[u8]) -> usize {
        self.vars
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &v)| acc | ((bits[v] as usize) << k))
    }

    #[inline]
    pub fn eval(&self, bits: &[u8]) -> f64 {
        self.table[self.index(bits)]
    }

    /// Contribution change when variable `var` (which must be in this
    /// subfunction) is flipped.
    #[inline]
    fn flip_delta(&self, bits: &[u8], var: usize) -> f64 {
        let idx = self.index(bits);
        let k = self.vars.iter().position(|&v| v == var).unwrap();
        self.table[idx ^ (1 << k)] - self.table[idx]
    }
}

/// Additively decomposable function `f(x) = Σ_i f_i(x restricted to S_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdfSpec {
    n: usize,
    terms: Vec<Subfunction>,
    // variable -> indices of the terms that read it
    incidence: Vec<Vec<usize>>,
}

impl AdfSpec {
    pub fn new(n: usize, terms: Vec<Subfunction>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("ADF needs at least one subfunction"));
        }
        let mut incidence = vec![Vec::new(); n];
        for (t, term) in terms.iter().enumerate() {
            let mut seen = Vec::with_capacity(term.vars.len());
            for &v in &term.vars {
                if v >= n {
                    return Err(Error::invalid(format!(
                        "subfunction {t} references variable {v} >= n = {n}"
                    )));
                }
                if seen.contains(&v) {
                    return Err(Error::invalid(format!(
                        "subfunction {t} repeats variable {v}"
                    )));
                }
                seen.push(v);
                incidence[v].push(t);
            }
        }
        Ok(Self { n, terms, incidence })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of subfunctions `m`.
    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Subfunction] {
        &self.terms
    }

    pub fn subsets(&self) -> impl Iterator<Item = &[usize]> {
        self.terms.iter().map(|t| t.vars())
    }

    pub fn incident(&self, var: usize) -> &[usize] {
        &self.incidence[var]
    }

    /// Total fitness of a bit string, without touching any cache.
    pub fn value(&self, bits: &[u8]) -> f64 {
        self.terms.iter().map(|t| t.eval(bits)).sum()
    }

    /// Evaluates `s`, stores the fitness on it and returns it.
    pub fn evaluate(&self, s: &mut Solution) -> Result<f64> {
        if s.len() != self.n {
            return Err(Error::invalid(format!(
                "solution of length {} for ADF with n = {}",
                s.len(),
                self.n
            )));
        }
        let f = self.value(s.bits());
        s.set_fitness(f);
        Ok(f)
    }

    /// Fitness change from flipping `var`, touching only incident terms.
    /// Returns the delta and the number of terms evaluated.
    pub fn flip_delta(&self, bits: &[u8], var: usize) -> (f64, usize) {
        let inc = &self.incidence[var];
        let d = inc.iter().map(|&t| self.terms[t].flip_delta(bits, var)).sum();
        (d, inc.len())
    }
}

/// Free-function form of [`AdfSpec::evaluate`].
pub fn evaluate_adf(adf: &AdfSpec, s: &mut Solution) -> Result<f64> {
    adf.evaluate(s)
}
