use backprompt_core::game24::{
    enumerate_expressions, generate_expression_suite, parse_infix, solve_brute_force, verify_expression,
    ExactValue, Expr, G24Instance, NumberRange,
};
use backprompt_core::FeedbackLevel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact fraction over i128, independent of the crate's rational type.
#[derive(Clone, Copy)]
struct Frac(i128, i128);

fn combine(a: Option<Frac>, b: Option<Frac>, op: char) -> Option<Frac> {
    let (Frac(an, ad), Frac(bn, bd)) = (a?, b?);
    match op {
        '+' => Some(Frac(an * bd + bn * ad, ad * bd)),
        '-' => Some(Frac(an * bd - bn * ad, ad * bd)),
        '*' => Some(Frac(an * bn, ad * bd)),
        _ if bn == 0 => None,
        _ => Some(if bn < 0 { Frac(-an * bd, ad * -bn) } else { Frac(an * bd, ad * bn) }),
    }
}

fn is_24(v: Option<Frac>) -> bool {
    v.is_some_and(|Frac(n, d)| n == 24 * d)
}

/// Every fully parenthesized expression over the four numbers in all
/// orders, as (text, value).
fn oracle_expressions(nums: [i64; 4]) -> Vec<(String, Option<Frac>)> {
    let mut out = Vec::new();
    let ops = ['+', '-', '*', '/'];
    let perms = permutations(nums);
    for p in perms {
        let leaf = |i: usize| (p[i].to_string(), Some(Frac(p[i] as i128, 1)));
        for &o1 in &ops {
            for &o2 in &ops {
                for &o3 in &ops {
                    let bin = |(ls, lv): (String, Option<Frac>), op: char, (rs, rv): (String, Option<Frac>)| {
                        (format!("({ls}{op}{rs})"), combine(lv, rv, op))
                    };
                    // ((a b) c) d, (a (b c)) d, (a b) (c d), a ((b c) d), a (b (c d))
                    out.push(bin(bin(bin(leaf(0), o1, leaf(1)), o2, leaf(2)), o3, leaf(3)));
                    out.push(bin(bin(leaf(0), o1, bin(leaf(1), o2, leaf(2))), o3, leaf(3)));
                    out.push(bin(bin(leaf(0), o1, leaf(1)), o2, bin(leaf(2), o3, leaf(3))));
                    out.push(bin(leaf(0), o1, bin(bin(leaf(1), o2, leaf(2)), o3, leaf(3))));
                    out.push(bin(leaf(0), o1, bin(leaf(1), o2, bin(leaf(2), o3, leaf(3)))));
                }
            }
        }
    }
    out
}

fn permutations(nums: [i64; 4]) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let idx = [a, b, c, d];
                    let mut seen = [false; 4];
                    if idx.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                        out.push([nums[a], nums[b], nums[c], nums[d]]);
                    }
                }
            }
        }
    }
    out
}

fn instance(nums: [i64; 4]) -> G24Instance {
    G24Instance::new(&nums, NumberRange::default()).unwrap()
}

#[test]
fn verifier_matches_independent_evaluator_on_every_expression() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..8 {
        let nums: [i64; 4] = std::array::from_fn(|_| rng.gen_range(1..=12));
        let inst = instance(nums);
        let exprs = oracle_expressions(nums);
        assert_eq!(exprs.len(), 7680);
        for (text, value) in exprs {
            let v = verify_expression(&inst, &text, FeedbackLevel::Binary).unwrap();
            assert_eq!(v.accepted, is_24(value), "{text} on {nums:?}");
        }
    }
}

#[test]
fn enumerator_covers_the_same_expression_space() {
    for nums in [[1, 3, 4, 6], [2, 2, 6, 12], [5, 5, 5, 1]] {
        let inst = instance(nums);
        let ours = enumerate_expressions(inst.numbers());
        assert_eq!(ours.len(), 7680);
        let ours_24 = ours.iter().filter(|e| e.evaluate().is(24)).count();
        let oracle_24 = oracle_expressions(*inst.numbers()).iter().filter(|(_, v)| is_24(*v)).count();
        assert_eq!(ours_24, oracle_24, "{nums:?}");
    }
}

#[test]
fn solvability_agrees_with_oracle() {
    for nums in [[1, 1, 1, 1], [1, 3, 4, 6], [6, 6, 6, 6], [1, 1, 1, 2], [3, 3, 8, 8], [1, 2, 3, 4]] {
        let oracle = oracle_expressions(nums).iter().any(|(_, v)| is_24(*v));
        let witness = solve_brute_force(&instance(nums));
        assert_eq!(witness.is_some(), oracle, "{nums:?}");
        if let Some(w) = witness {
            assert!(w.evaluate().is(24));
        }
    }
}

#[test]
fn expression_suite_is_judged_as_labelled() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 30 {
        let nums: [i64; 4] = std::array::from_fn(|_| rng.gen_range(1..=12));
        let inst = instance(nums);
        let Some(sol) = solve_brute_force(&inst) else { continue };
        let suite = generate_expression_suite(&inst, &sol, NumberRange::default(), &mut rng).unwrap();
        let judge = |e: &Expr| verify_expression(&inst, &e.to_string(), FeedbackLevel::Binary).unwrap().accepted;
        assert!(judge(&suite.correct));
        assert!(!judge(&suite.ablated_op));
        assert!(!judge(&suite.ablated_number));
        assert!(!judge(&suite.random));
        let mut leaves = suite.random.leaves();
        leaves.sort_unstable();
        assert_eq!(&leaves[..], inst.numbers());
        assert_eq!(suite.ablated_op.leaves(), sol.leaves());
        done += 1;
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = (1i64..=13).prop_map(Expr::Num);
    leaf.prop_recursive(4, 16, 2, |inner| {
        (inner.clone(), 0usize..4, inner).prop_map(|(l, op, r)| Expr::bin(backprompt_core::game24::Op::ALL[op], l, r))
    })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(e in arb_expr()) {
        let text = e.to_string();
        let back = parse_infix(&text).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn evaluation_is_exact(e in arb_expr()) {
        // Cross-check against the independent fraction evaluator on the rendered text.
        fn eval(e: &Expr) -> Option<Frac> {
            match e {
                Expr::Num(n) => Some(Frac(*n as i128, 1)),
                Expr::Bin(op, l, r) => combine(eval(l), eval(r), op.symbol()),
            }
        }
        match (e.evaluate(), eval(&e)) {
            (ExactValue::DivByZero, None) => {}
            (ExactValue::Value(r), Some(Frac(n, d))) => prop_assert_eq!(r.numer() as i128 * d, n * r.denom() as i128),
            (ours, theirs) => prop_assert!(false, "{} vs {:?}", ours, theirs.map(|f| (f.0, f.1))),
        }
    }
}

