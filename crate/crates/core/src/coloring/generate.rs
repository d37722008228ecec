use alloc::collections::BTreeSet;
use rand::Rng;

use super::{canonical_form, is_planar, CanonicalForm, ColoringInstance, Graph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Independent inclusion probability of each vertex pair.
    pub p: f64,
    /// Rejected draws allowed per emitted instance.
    pub max_attempts: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_min: 4,
            n_max: 14,
            p: 0.4,
            max_attempts: 1_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("invalid generator config: {0}")]
    Config(&'static str),
    #[error("gave up after {0} rejected graphs")]
    RetryBudgetExceeded(usize),
}

/// Draws random planar graphs, discarding non-planar ones and isomorphic repeats.
pub struct InstanceGenerator<R> {
    config: GeneratorConfig,
    rng: R,
    seen: BTreeSet<CanonicalForm>,
    /// Total draws so far, accepted or not.
    pub attempts: usize,
}

impl<R: Rng> InstanceGenerator<R> {
    pub fn new(config: GeneratorConfig, rng: R) -> Result<Self, GenerateError> {
        if config.n_min < 3 || config.n_min > config.n_max {
            return Err(GenerateError::Config("need 3 <= n_min <= n_max"));
        }
        if !(config.p > 0.0 && config.p < 1.0) {
            return Err(GenerateError::Config("need 0 < p < 1"));
        }
        Ok(Self {
            config,
            rng,
            seen: BTreeSet::new(),
            attempts: 0,
        })
    }

    fn draw(&mut self) -> Graph {
        let n = self.rng.gen_range(self.config.n_min..=self.config.n_max);
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if self.rng.gen_bool(self.config.p) {
                    g.add_edge(u, v).expect("in range, distinct");
                }
            }
        }
        g
    }

    pub fn next_instance(&mut self) -> Result<ColoringInstance, GenerateError> {
        for _ in 0..self.config.max_attempts {
            self.attempts += 1;
            let g = self.draw();
            if !is_planar(&g) {
                continue;
            }
            if self.seen.insert(canonical_form(&g)) {
                return Ok(ColoringInstance::new(g));
            }
        }
        Err(GenerateError::RetryBudgetExceeded(self.config.max_attempts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_config() {
        let rng = ChaCha8Rng::seed_from_u64(0);
        let bad = GeneratorConfig { n_min: 2, ..Default::default() };
        assert!(InstanceGenerator::new(bad, rng.clone()).is_err());
        let bad = GeneratorConfig { p: 1.0, ..Default::default() };
        assert!(InstanceGenerator::new(bad, rng).is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // Only 4 non-isomorphic graphs exist on 3 vertices.
        let cfg = GeneratorConfig { n_min: 3, n_max: 3, p: 0.5, max_attempts: 200 };
        let mut gen = InstanceGenerator::new(cfg, ChaCha8Rng::seed_from_u64(1)).unwrap();
        for _ in 0..4 {
            gen.next_instance().unwrap();
        }
        assert_eq!(gen.next_instance(), Err(GenerateError::RetryBudgetExceeded(200)));
    }

    #[test]
    fn emitted_graphs_are_planar_distinct_and_bounded() {
        let mut gen = InstanceGenerator::new(GeneratorConfig::default(), ChaCha8Rng::seed_from_u64(7)).unwrap();
        let mut forms = BTreeSet::new();
        for _ in 0..30 {
            let inst = gen.next_instance().unwrap();
            let n = inst.graph.n();
            assert!(inst.graph.edge_count() <= 3 * n - 6);
            assert!(inst.chromatic_number <= 4);
            assert!(forms.insert(canonical_form(&inst.graph)));
        }
    }
}
