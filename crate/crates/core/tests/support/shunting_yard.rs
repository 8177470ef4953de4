//! Independent reference evaluator for the expression grammar: a
//! shunting-yard pass to RPN, plus random expression generators.

use std::collections::HashMap;

use rand::Rng;

pub const VARS: [&str; 4] = ["q1", "p1", "theta", "m"];
pub const FUNCS: [&str; 7] = ["sin", "cos", "tan", "exp", "log", "sqrt", "abs"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(String),
    Func(String),
    Op(char),
    Neg,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if chars[i] == '+' || chars[i] == '-' {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push(Tok::Num(chars[start..i].iter().collect::<String>().parse().unwrap()));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if FUNCS.contains(&word.as_str()) {
                out.push(Tok::Func(word));
            } else {
                out.push(Tok::Var(word));
            }
        } else {
            let unary = matches!(out.last(), None | Some(Tok::Op(_)) | Some(Tok::Neg) | Some(Tok::LParen));
            out.push(match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '-' if unary => Tok::Neg,
                _ => Tok::Op(c),
            });
            i += 1;
        }
    }
    out
}

fn prec(t: &Tok) -> (u8, bool) {
    // (precedence, right associative)
    match t {
        Tok::Op('+') | Tok::Op('-') => (1, false),
        Tok::Op('*') | Tok::Op('/') => (2, false),
        Tok::Neg => (3, true),
        Tok::Op('^') => (4, true),
        _ => (0, false),
    }
}

fn to_rpn(tokens: Vec<Tok>) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut stack: Vec<Tok> = Vec::new();
    for t in tokens {
        match t {
            Tok::Num(_) | Tok::Var(_) => out.push(t),
            Tok::Func(_) | Tok::LParen | Tok::Neg => stack.push(t),
            Tok::Op(_) => {
                let (p, right) = prec(&t);
                while let Some(top) = stack.last() {
                    let (tp, _) = prec(top);
                    let is_op = matches!(top, Tok::Op(_) | Tok::Neg);
                    if is_op && (tp > p || (tp == p && !right)) {
                        out.push(stack.pop().unwrap());
                    } else {
                        break;
                    }
                }
                stack.push(t);
            }
            Tok::RParen => {
                while let Some(top) = stack.pop() {
                    if top == Tok::LParen {
                        break;
                    }
                    out.push(top);
                }
                if matches!(stack.last(), Some(Tok::Func(_))) {
                    out.push(stack.pop().unwrap());
                }
            }
        }
    }
    while let Some(t) = stack.pop() {
        out.push(t);
    }
    out
}

fn eval_rpn(rpn: &[Tok], env: &HashMap<String, f64>) -> f64 {
    let mut st: Vec<f64> = Vec::new();
    for t in rpn {
        match t {
            Tok::Num(v) => st.push(*v),
            Tok::Var(n) => st.push(env[n]),
            Tok::Neg => {
                let a = st.pop().unwrap();
                st.push(-a);
            }
            Tok::Func(f) => {
                let a = st.pop().unwrap();
                st.push(match f.as_str() {
                    "sin" => a.sin(),
                    "cos" => a.cos(),
                    "tan" => a.tan(),
                    "exp" => a.exp(),
                    "log" => a.ln(),
                    "sqrt" => a.sqrt(),
                    _ => a.abs(),
                });
            }
            Tok::Op(c) => {
                let b = st.pop().unwrap();
                let a = st.pop().unwrap();
                st.push(match c {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => a.powf(b),
                });
            }
            _ => unreachable!(),
        }
    }
    assert_eq!(st.len(), 1);
    st[0]
}

pub fn oracle(src: &str, env: &HashMap<String, f64>) -> f64 {
    eval_rpn(&to_rpn(tokenize(src)), env)
}

pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.5) {
            let v: f64 = rng.gen_range(0.0..5.0);
            match rng.gen_range(0..3) {
                0 => format!("{}", rng.gen_range(0..10)),
                1 => format!("{v:.3}"),
                _ => format!("{:.2}e-1", v),
            }
        } else {
            VARS[rng.gen_range(0..VARS.len())].to_string()
        };
    }
    match rng.gen_range(0..10) {
        0 => format!("-{}", random_expr(rng, depth - 1)),
        1 => format!("({})", random_expr(rng, depth - 1)),
        2 => {
            let f = ["sin", "cos", "exp", "abs", "sqrt", "log"][rng.gen_range(0..6)];
            let arg = random_expr(rng, depth - 1);
            match f {
                "sqrt" | "log" => format!("{f}(abs({arg}) + 0.5)"),
                "exp" => format!("exp(sin({arg}))"),
                _ => format!("{f}({arg})"),
            }
        }
        3 => format!("{}^{}", atom(rng), ["2", "3", "0.5", "-1", "-2"][rng.gen_range(0..5)]),
        _ => {
            let op = ["+", "-", "*", "/", " + ", " - "][rng.gen_range(0..6)];
            let lhs = random_expr(rng, depth - 1);
            let rhs = random_expr(rng, depth - 1);
            if op.trim() == "/" {
                format!("{lhs}/(abs({rhs}) + 1)")
            } else {
                format!("{lhs}{op}{rhs}")
            }
        }
    }
}

fn atom<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..3) {
        0 => VARS[rng.gen_range(0..VARS.len())].to_string(),
        1 => format!("{}", rng.gen_range(1..6)),
        _ => "(q1 + 2)".to_string(),
    }
}

pub fn random_env<R: Rng>(rng: &mut R) -> HashMap<String, f64> {
    VARS.iter().map(|v| (v.to_string(), rng.gen_range(0.2..2.0))).collect()
}
