//! Benchmark problem families, local search and exact oracles.

mod io;
mod local_search;
mod maxsat;
mod mvc;
mod oracle;
mod spin_glass;

pub use io::{load_instance, save_instance, InstanceFormat};
pub use local_search::{hill_climb, HillClimbOutcome};
pub use maxsat::{gen_maxsat_morph, is_k_colorable, Literal, MaxSatInstance, COLORS};
pub use mvc::{gen_mvc, repair_cover, VertexCoverInstance};
pub use oracle::{brute_force_optimum, exhaustive_max, min_vertex_cover, EXHAUSTIVE_MAX_BITS};
pub use spin_glass::{gen_spin_glass, SpinGlass3D};

use crate::distance::{build_interaction_graph, InteractionGraph};
use crate::{AdfSpec, Result, RngStream, Solution};

/// Per-solution improvement applied before a solution enters the population.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalSearch {
    None,
    HillClimb,
    Repair,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    SpinGlass(SpinGlass3D),
    VertexCover(VertexCoverInstance),
    MaxSat(MaxSatInstance),
    Custom,
}

impl Instance {
    pub fn family(&self) -> &'static str {
        match self {
            Instance::SpinGlass(_) => "sg",
            Instance::VertexCover(_) => "mvc",
            Instance::MaxSat(_) => "maxsat",
            Instance::Custom => "adf",
        }
    }
}

/// An optimization problem as seen by the engine: the ADF objective, an
/// optional known optimum and the local-search policy.
#[derive(Clone, Debug)]
pub struct Problem {
    instance: Instance,
    adf: AdfSpec,
    graph: InteractionGraph,
    known_optimum: Option<f64>,
    local_search: LocalSearch,
}

impl Problem {
    pub fn custom(adf: AdfSpec, known_optimum: Option<f64>, local_search: LocalSearch) -> Self {
        Self::from_parts(Instance::Custom, adf, known_optimum, local_search)
    }

    fn from_parts(
        instance: Instance,
        adf: AdfSpec,
        known_optimum: Option<f64>,
        local_search: LocalSearch,
    ) -> Self {
        let graph = build_interaction_graph(&adf);
        Self {
            instance,
            adf,
            graph,
            known_optimum,
            local_search,
        }
    }

    pub fn spin_glass(sg: SpinGlass3D) -> Self {
        let adf = sg.to_adf();
        Self::from_parts(Instance::SpinGlass(sg), adf, None, LocalSearch::HillClimb)
    }

    pub fn vertex_cover(inst: VertexCoverInstance) -> Self {
        let adf = inst.to_adf();
        Self::from_parts(Instance::VertexCover(inst), adf, None, LocalSearch::Repair)
    }

    /// MAXSAT instance. When the underlying coloring graph is known to be
    /// colorable the optimum is the clause count.
    pub fn maxsat(inst: MaxSatInstance) -> Self {
        let adf = inst.to_adf();
        let opt = inst.satisfiable().then(|| inst.clauses().len() as f64);
        Self::from_parts(Instance::MaxSat(inst), adf, opt, LocalSearch::HillClimb)
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn adf(&self) -> &AdfSpec {
        &self.adf
    }

    pub fn n(&self) -> usize {
        self.adf.n()
    }

    pub fn interaction_graph(&self) -> &InteractionGraph {
        &self.graph
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn set_known_optimum(&mut self, opt: Option<f64>) {
        self.known_optimum = opt;
    }

    pub fn local_search(&self) -> LocalSearch {
        self.local_search
    }

    pub fn with_local_search(mut self, ls: LocalSearch) -> Self {
        self.local_search = ls;
        self
    }

    /// Fills in the optimum from the exact oracle when none is known.
    pub fn resolve_optimum(&mut self) -> Result<f64> {
        if let Some(opt) = self.known_optimum {
            return Ok(opt);
        }
        let opt = brute_force_optimum(self)?;
        self.known_optimum = Some(opt);
        Ok(opt)
    }

    pub fn is_optimal(&self, fitness: f64) -> bool {
        self.known_optimum
            .is_some_and(|opt| fitness >= opt - 1e-9)
    }

    /// Applies the local-search policy and evaluates `s`. Returns the number
    /// of fitness evaluations spent, in units of full ADF evaluations.
    pub fn improve(&self, s: &mut Solution, rng: &mut RngStream) -> Result<f64> {
        match self.local_search {
            LocalSearch::None => {
                self.adf.evaluate(s)?;
                Ok(1.0)
            }
            LocalSearch::HillClimb => {
                self.adf.evaluate(s)?;
                let out = hill_climb(self, std::mem::replace(s, Solution::zeros(0)));
                *s = out.solution;
                Ok(1.0 + out.evaluations)
            }
            LocalSearch::Repair => match &self.instance {
                Instance::VertexCover(inst) => {
                    let repaired = repair_cover(inst, s, rng)?;
                    *s = repaired;
                    Ok(1.0)
                }
                _ => Err(crate::Error::Config(
                    "repair is only defined for vertex cover".into(),
                )),
            },
        }
    }
}
