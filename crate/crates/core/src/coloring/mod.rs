//! Graph coloring over small planar graphs.

mod canon;
mod chromatic;
mod critique;
mod dimacs;
mod generate;
mod graph;
mod planarity;
mod suite;
mod verify;

pub use canon::{canonical_form, CanonicalForm};
pub use chromatic::{chromatic_number_exact, color_with, optimal_coloring};
pub use critique::{
    classify_claim, classify_critique, parse_llm_critique, ClaimKind, CritiqueClaim, CritiqueClassification,
    HallucinationClass,
};
pub use dimacs::{from_dimacs, graph_to_dimacs, to_dimacs, DimacsError};
pub use generate::{GenerateError, GeneratorConfig, InstanceGenerator};
pub use graph::{Graph, GraphError};
pub use planarity::is_planar;
pub use suite::{generate_coloring_suite, ColoringSuite, ColoringSuiteError};
pub use verify::{
    coloring_faults, parse_coloring_answer, verify_coloring, Coloring, ColoringFault, NoAssignments, VerifyOptions,
};

use alloc::format;
use alloc::string::String;

/// A graph together with its exact chromatic number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringInstance {
    pub graph: Graph,
    pub chromatic_number: usize,
}

impl ColoringInstance {
    /// Computes the chromatic number exactly; intended for small graphs.
    pub fn new(graph: Graph) -> Self {
        let chromatic_number = chromatic_number_exact(&graph);
        Self { graph, chromatic_number }
    }

    /// Text shown to the model: vertex count, color budget and edge list.
    pub fn describe(&self) -> String {
        let mut out = format!(
            "Graph with {} vertices (0 to {}). Color it using at most {} colors.\nEdges:\n",
            self.graph.n(),
            self.graph.n().saturating_sub(1),
            self.chromatic_number
        );
        for (u, v) in self.graph.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}
