//! Parser checks against an independent shunting-yard evaluator, plus
//! fuzzing and print/re-parse agreement.

use std::collections::HashMap;

use ncphase_core::expr::{evaluate, parse};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[path = "support/shunting_yard.rs"]
mod shunting_yard;

use shunting_yard::{oracle, random_env, random_expr};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn agrees_with_shunting_yard_on_1000_expressions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    for _ in 0..1000 {
        let src = random_expr(&mut rng, 5);
        let env = random_env(&mut rng);
        let ast = parse(&src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let want = oracle(&src, &env);
        match evaluate(&ast, &env) {
            Ok(got) => {
                assert!(rel_close(got, want, 1e-12), "{src}: parser {got}, oracle {want}");
                compared += 1;
            }
            Err(_) => assert!(!want.is_finite(), "{src}: parser failed but oracle gave {want}"),
        }
    }
    assert!(compared >= 950, "only {compared} expressions were finite");
}

#[test]
fn precedence_table_matches_oracle() {
    let env: HashMap<String, f64> = [("x1".to_string(), 3.0)].into_iter().collect();
    for src in ["2+3*4^2", "-x1^2", "2^3^2", "-2^-2", "8/4/2", "8-4-2", "2*-x1", "(1+2)*(3-4)/5"] {
        let got = evaluate(&parse(src).unwrap(), &env).unwrap();
        assert_eq!(got, oracle(src, &env), "{src}");
    }
}

// ---------------------------------------------------------------- properties

fn token_soup() -> impl Strategy<Value = String> {
    let tok = prop_oneof![
        Just("q1".to_string()),
        Just("p2".to_string()),
        Just("sin".to_string()),
        Just("foo".to_string()),
        Just("(".to_string()),
        Just(")".to_string()),
        Just("+".to_string()),
        Just("-".to_string()),
        Just("*".to_string()),
        Just("/".to_string()),
        Just("^".to_string()),
        Just(" ".to_string()),
        Just("1.5".to_string()),
        Just("2e".to_string()),
        Just("3e-2".to_string()),
        Just(".".to_string()),
        Just("$".to_string()),
        Just("é".to_string()),
        Just(",".to_string()),
    ];
    prop::collection::vec(tok, 0..40).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn random_token_streams_never_panic(src in token_soup()) {
        match parse(&src) {
            Ok(e) => {
                // whatever parsed must print to something that parses again
                prop_assert!(parse(&e.to_string()).is_ok());
            }
            Err(err) => prop_assert!(err.offset <= src.len(), "{} > {}", err.offset, src.len()),
        }
    }

    #[test]
    fn arbitrary_text_never_panics(src in "\\PC{0,60}") {
        if let Err(err) = parse(&src) {
            prop_assert!(err.offset <= src.len());
        }
    }
}

#[test]
fn print_then_reparse_evaluates_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let src = random_expr(&mut rng, 6);
        let ast = parse(&src).unwrap();
        let again = parse(&ast.to_string()).unwrap_or_else(|e| panic!("{}: {e}", ast));
        for _ in 0..100 {
            let env = random_env(&mut rng);
            match (evaluate(&ast, &env), evaluate(&again, &env)) {
                (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{src}"),
                (Err(_), Err(_)) => {}
                (a, b) => panic!("{src}: {a:?} vs {b:?}"),
            }
        }
    }
}
