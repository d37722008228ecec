use alloc::vec::Vec;
use rand::Rng;

use super::{enumerate_expressions, Expr, G24Instance, NumberRange, Op, TARGET};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("seed expression is not a solution of the instance")]
    NotASolution,
    #[error("no {0} variant avoids the target value")]
    NoVariant(&'static str),
}

/// Proposed expressions of known ground truth for verifier evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressionSuite {
    pub correct: Expr,
    /// Exactly one operator differs from `correct`.
    pub ablated_op: Expr,
    /// Exactly one leaf differs from `correct`.
    pub ablated_number: Expr,
    /// Uniform over all shapes, orders and operators of the instance numbers.
    pub random: Expr,
}

fn with_op_at(expr: &Expr, target: usize, op: Op, counter: &mut usize) -> Expr {
    match expr {
        Expr::Num(n) => Expr::Num(*n),
        Expr::Bin(old, l, r) => {
            let here = *counter;
            *counter += 1;
            let l = with_op_at(l, target, op, counter);
            let r = with_op_at(r, target, op, counter);
            Expr::bin(if here == target { op } else { *old }, l, r)
        }
    }
}

fn with_leaf_at(expr: &Expr, target: usize, value: i64, counter: &mut usize) -> Expr {
    match expr {
        Expr::Num(n) => {
            let here = *counter;
            *counter += 1;
            Expr::Num(if here == target { value } else { *n })
        }
        Expr::Bin(op, l, r) => {
            let l = with_leaf_at(l, target, value, counter);
            let r = with_leaf_at(r, target, value, counter);
            Expr::bin(*op, l, r)
        }
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, mut options: Vec<Expr>, what: &'static str) -> Result<Expr, SuiteError> {
    if options.is_empty() {
        return Err(SuiteError::NoVariant(what));
    }
    let idx = rng.gen_range(0..options.len());
    Ok(options.swap_remove(idx))
}

/// Build the four synthetic expression kinds from a known solution.
///
/// Each ablation is drawn uniformly from the variants whose value is not 24,
/// which is the same distribution as resampling until the value misses.
pub fn generate_expression_suite<R: Rng + ?Sized>(
    instance: &G24Instance,
    solution: &Expr,
    range: NumberRange,
    rng: &mut R,
) -> Result<ExpressionSuite, SuiteError> {
    let mut leaves = solution.leaves();
    leaves.sort_unstable();
    if leaves.as_slice() != instance.numbers() || !solution.evaluate().is(TARGET) {
        return Err(SuiteError::NotASolution);
    }

    let misses = |e: &Expr| !e.evaluate().is(TARGET);

    let mut op_variants = Vec::new();
    let mut ops = Vec::new();
    collect_ops(solution, &mut ops);
    for (idx, old) in ops.iter().enumerate() {
        for op in Op::ALL {
            if op != *old {
                op_variants.push(with_op_at(solution, idx, op, &mut 0));
            }
        }
    }
    op_variants.retain(|e| misses(e));
    let ablated_op = pick(rng, op_variants, "ablated_op")?;

    let mut number_variants = Vec::new();
    for (idx, old) in solution.leaves().iter().enumerate() {
        for value in range.min..=range.max {
            if value != *old {
                number_variants.push(with_leaf_at(solution, idx, value, &mut 0));
            }
        }
    }
    number_variants.retain(|e| misses(e));
    let ablated_number = pick(rng, number_variants, "ablated_number")?;

    let mut random_pool = enumerate_expressions(instance.numbers());
    random_pool.retain(|e| misses(e));
    let random = pick(rng, random_pool, "random")?;

    Ok(ExpressionSuite {
        correct: solution.clone(),
        ablated_op,
        ablated_number,
        random,
    })
}

fn collect_ops(expr: &Expr, out: &mut Vec<Op>) {
    if let Expr::Bin(op, l, r) = expr {
        out.push(*op);
        collect_ops(l, out);
        collect_ops(r, out);
    }
}

#[cfg(test)]
mod tests {
    use super::super::{check_expression, solve_brute_force};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ops_of(e: &Expr) -> Vec<Op> {
        let mut v = Vec::new();
        collect_ops(e, &mut v);
        v
    }

    #[test]
    fn suite_contracts_hold_across_seeds() {
        let range = NumberRange::default();
        for nums in [[1, 3, 4, 6], [1, 1, 6, 6], [2, 3, 4, 5], [4, 4, 10, 10]] {
            let inst = G24Instance::new(&nums, range).unwrap();
            let sol = solve_brute_force(&inst).unwrap();
            for seed in 0..20 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = generate_expression_suite(&inst, &sol, range, &mut rng).unwrap();
                let text = |e: &Expr| e.canonical();
                assert!(check_expression(&inst, &text(&s.correct)).accepted());
                assert!(!check_expression(&inst, &text(&s.ablated_op)).accepted());
                assert!(!check_expression(&inst, &text(&s.ablated_number)).accepted());
                assert!(!check_expression(&inst, &text(&s.random)).accepted());

                let diff_ops = ops_of(&s.correct)
                    .iter()
                    .zip(ops_of(&s.ablated_op))
                    .filter(|(a, b)| **a != *b)
                    .count();
                assert_eq!(diff_ops, 1);
                assert_eq!(s.correct.leaves(), s.ablated_op.leaves());

                let diff_leaves = s
                    .correct
                    .leaves()
                    .iter()
                    .zip(s.ablated_number.leaves())
                    .filter(|(a, b)| **a != *b)
                    .count();
                assert_eq!(diff_leaves, 1);

                let mut leaves = s.random.leaves();
                leaves.sort_unstable();
                assert_eq!(leaves.as_slice(), inst.numbers());
            }
        }
    }

    #[test]
    fn rejects_non_solution_seed() {
        let inst = G24Instance::new(&[1, 1, 4, 6], NumberRange::default()).unwrap();
        let bad = super::super::parse_expression("1+1+4+6").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            generate_expression_suite(&inst, &bad, NumberRange::default(), &mut rng),
            Err(SuiteError::NotASolution)
        );
    }
}
