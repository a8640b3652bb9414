//! Browser bindings: build an instance, look at its variable distances, run
//! hBOA on it and learn a pooled distance bias from sibling instances.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use hboa::bias::pool_across_sizes;
use hboa::bias::accumulate_stats;
use hboa::distance::compute_distance_matrix;
use hboa::engine::{self, Harvest};
use hboa::harness::Family;
use hboa::problems::brute_force_optimum;
use hboa::rng::derive_seed;
use hboa::{BiasTable, DistanceMatrix, HboaConfig, Problem, RngStream};

const SIBLING_LABEL: u64 = 0x0053_4942;

pub fn family(name: &str, n: usize) -> hboa::Result<Family> {
    let bad = |m: String| hboa::Error::Config(m);
    match name {
        "sg" => {
            let side = (n as f64).cbrt().round() as usize;
            if side * side * side != n || side < 3 {
                return Err(bad(format!("spin glass size {n} must be a cube of a side >= 3")));
            }
            Ok(Family::SpinGlass { side })
        }
        "mvc" => Ok(Family::VertexCover { n, c: 2.0 }),
        "maxsat" => Ok(Family::MaxSat { nv: n, p: 0.1 }),
        other => Err(bad(format!("unknown family '{other}'"))),
    }
}

/// An instance plus the bias table learned for it, if any.
pub struct Session {
    family: Family,
    problem: Problem,
    distances: DistanceMatrix,
    bias: Option<Arc<BiasTable>>,
}

impl Session {
    pub fn new(name: &str, n: usize, seed: u64) -> hboa::Result<Self> {
        let family = family(name, n)?;
        let mut problem = family.generate(&mut RngStream::new(seed))?;
        // Exact targets only; otherwise runs stop at the iteration cap.
        if problem.known_optimum().is_none() {
            if let Ok(opt) = brute_force_optimum(&problem) {
                problem.set_known_optimum(Some(opt));
            }
        }
        let distances = compute_distance_matrix(problem.adf());
        Ok(Self {
            family,
            problem,
            distances,
            bias: None,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Row-major n by n distances.
    pub fn distances(&self) -> Vec<u16> {
        let n = self.problem.n();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.distances.get(i, j)).collect()
    }

    /// Learns a pooled table from hBOA models of `siblings` fresh instances
    /// and returns `P_1(d)` for `d = 1..=n`.
    pub fn harvest(&mut self, siblings: usize, population: usize, seed: u64) -> hboa::Result<Vec<f64>> {
        let cfg = HboaConfig {
            population_size: population,
            harvest: Harvest::AllRebuilds,
            ..Default::default()
        };
        let mut rng = RngStream::new(derive_seed(seed, &[SIBLING_LABEL]));
        let mut corpus = Vec::new();
        for _ in 0..siblings {
            let mut p = self.family.generate(&mut rng)?;
            p.set_known_optimum(None);
            let result = engine::run(&p, &cfg, &mut rng)?;
            corpus.push((result.models, compute_distance_matrix(p.adf())));
        }
        let pairs: Vec<_> = corpus
            .iter()
            .flat_map(|(models, dm)| models.iter().map(move |m| (m, dm)))
            .collect();
        let table = pool_across_sizes(&accumulate_stats(&pairs, true)?, hboa::bias::DEFAULT_EPSILON)?;
        let n = self.problem.n();
        let curve = (1..=n).map(|d| table.probability(0, d as u16, 1)).collect();
        self.bias = Some(Arc::new(table));
        Ok(curve)
    }

    pub fn has_bias(&self) -> bool {
        self.bias.is_some()
    }

    /// One run; returns `[best, evaluations]` pairs starting with the initial
    /// population, followed by `[success, iterations]`.
    pub fn run(&self, population: usize, kappa: f64, sporadic: bool, seed: u64) -> hboa::Result<Vec<f64>> {
        let cfg = HboaConfig {
            population_size: population,
            sporadic,
            ..Default::default()
        }
        .with_bias(self.bias.clone(), if self.bias.is_some() { kappa } else { 0.0 });
        let r = engine::run(&self.problem, &cfg, &mut RngStream::new(seed))?;
        let mut out = vec![r.initial.0, r.initial.1];
        for row in &r.trace {
            out.push(row.best_fitness);
            out.push(row.evaluations);
        }
        out.push(f64::from(u8::from(r.success)));
        out.push(r.iterations as f64);
        Ok(out)
    }
}

fn js(e: hboa::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Bench {
    inner: Session,
}

#[wasm_bindgen]
impl Bench {
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, n: usize, seed: u32) -> Result<Bench, JsError> {
        Session::new(family, n, u64::from(seed)).map(|inner| Bench { inner }).map_err(js)
    }

    pub fn n(&self) -> usize {
        self.inner.problem().n()
    }

    #[wasm_bindgen(js_name = knownOptimum)]
    pub fn known_optimum(&self) -> Option<f64> {
        self.inner.problem().known_optimum()
    }

    pub fn distances(&self) -> Vec<u16> {
        self.inner.distances()
    }

    pub fn harvest(&mut self, siblings: usize, population: usize, seed: u32) -> Result<Vec<f64>, JsError> {
        self.inner.harvest(siblings, population, u64::from(seed)).map_err(js)
    }

    #[wasm_bindgen(js_name = hasBias)]
    pub fn has_bias(&self) -> bool {
        self.inner.has_bias()
    }

    pub fn run(&self, population: usize, kappa: f64, sporadic: bool, seed: u32) -> Result<Vec<f64>, JsError> {
        self.inner.run(population, kappa, sporadic, u64::from(seed)).map_err(js)
    }
}
