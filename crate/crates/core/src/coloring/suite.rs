use alloc::vec::Vec;
use rand::Rng;

use super::{optimal_coloring, Coloring, ColoringInstance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ColoringSuiteError {
    #[error("no edge can be miscolored without creating a second conflict")]
    NoAblation,
    #[error("every vertex already has its own color; no non-optimal coloring exists")]
    NoNonOptimal,
}

/// Colorings of known ground truth for verifier evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringSuite {
    pub correct: Coloring,
    /// Exactly one violated edge.
    pub ablated: Coloring,
    /// Conflict-free but with more colors than the chromatic number.
    pub non_optimal: Coloring,
    /// Independent uniform colors from a palette of chromatic-number size.
    pub random: Coloring,
}

pub fn generate_coloring_suite<R: Rng + ?Sized>(
    instance: &ColoringInstance,
    rng: &mut R,
) -> Result<ColoringSuite, ColoringSuiteError> {
    let g = &instance.graph;
    let (_, colors) = optimal_coloring(g);
    let adj = g.adjacency();

    // Recolor one endpoint to its neighbor's color; keep only choices
    // where that edge is the single new conflict.
    let mut ablations = Vec::new();
    for (u, v) in g.edges() {
        for (moved, anchor) in [(u, v), (v, u)] {
            let new = colors[anchor];
            let clash = adj[moved].iter().filter(|&&w| colors[w] == new).count();
            if clash == 1 {
                ablations.push((moved, new));
            }
        }
    }
    if ablations.is_empty() {
        return Err(ColoringSuiteError::NoAblation);
    }
    let (moved, new) = ablations[rng.gen_range(0..ablations.len())];
    let mut ablated = colors.clone();
    ablated[moved] = new;

    if instance.chromatic_number >= g.n() {
        return Err(ColoringSuiteError::NoNonOptimal);
    }
    let non_optimal: Vec<usize> = (0..g.n()).collect();

    let palette = instance.chromatic_number.max(1);
    let random: Vec<usize> = (0..g.n()).map(|_| rng.gen_range(0..palette)).collect();

    Ok(ColoringSuite {
        correct: Coloring::from_indices(&colors),
        ablated: Coloring::from_indices(&ablated),
        non_optimal: Coloring::from_indices(&non_optimal),
        random: Coloring::from_indices(&random),
    })
}
