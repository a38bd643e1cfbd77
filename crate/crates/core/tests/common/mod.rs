//! Independent reference implementations shared by the property and
//! acceptance targets.
#![allow(dead_code)]

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub};
use proptest::prelude::*;

/// Exhaustive between-class variance search, exact arithmetic, lowest
/// threshold on ties.
pub fn otsu_reference(hist: &[u64; 256]) -> Option<u8> {
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..255usize {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for (v, &c) in hist.iter().enumerate() {
            if v <= t {
                n0 += c as u128;
                s0 += v as u128 * c as u128;
            } else {
                n1 += c as u128;
                s1 += v as u128 * c as u128;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (s0 * n1).abs_diff(s1 * n0);
        let (num, den) = (d * d, n0 * n1);
        match best {
            Some((_, bn, bd)) if num * bd <= bn * den => {}
            _ => best = Some((t as u8, num, den)),
        }
    }
    best.map(|b| b.0)
}

/// Scalar RGB to HSV written from the piecewise definition.
pub fn hsv_reference(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let hi = r.max(g).max(b);
    let lo = r.min(g).min(b);
    let c = hi - lo;
    let s = if hi == 0.0 { 0.0 } else { c / hi };
    if c == 0.0 {
        return (0.0, s, hi);
    }
    let hp = if hi == r {
        let x = (g - b) / c;
        if x < 0.0 {
            x + 6.0
        } else {
            x
        }
    } else if hi == g {
        (b - r) / c + 2.0
    } else {
        (r - g) / c + 4.0
    };
    ((hp * 60.0) % 360.0, s, hi)
}

pub fn hue_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 360.0;
    d.min(360.0 - d)
}

pub type Q = Ratio<i64>;

/// Parenthesis-elimination evaluator over a token list: innermost groups
/// first, then unary minus, then ×/÷, then +/-, all left to right.
pub fn brute_eval(text: &str) -> Option<Q> {
    #[derive(Clone, Debug)]
    enum T {
        N(Q),
        Op(char),
        Open,
        Close,
    }
    let mut toks = Vec::new();
    let cs: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_ascii_digit() {
            let mut v: i64 = 0;
            while i < cs.len() && cs[i].is_ascii_digit() {
                v = v.checked_mul(10)?.checked_add(cs[i].to_digit(10)? as i64)?;
                i += 1;
            }
            toks.push(T::N(Q::from_integer(v)));
            continue;
        }
        toks.push(match c {
            '(' => T::Open,
            ')' => T::Close,
            '*' | '×' => T::Op('*'),
            '/' | '÷' => T::Op('/'),
            '+' | '-' => T::Op(c),
            _ => return None,
        });
        i += 1;
    }
    fn flat(mut t: Vec<T>) -> Option<Q> {
        // Unary minus: an operator token at the start or after another operator.
        let mut out: Vec<T> = Vec::new();
        let mut neg = false;
        for tok in t.drain(..) {
            let unary_pos = matches!(out.last(), None | Some(T::Op(_)));
            match tok {
                T::Op('-') if unary_pos => neg = !neg,
                T::N(v) => {
                    out.push(T::N(if neg { -v } else { v }));
                    neg = false;
                }
                other => out.push(other),
            }
        }
        let mut lvl1: Vec<T> = Vec::new();
        let mut it = out.into_iter();
        let mut acc = match it.next()? {
            T::N(v) => v,
            _ => return None,
        };
        while let Some(op) = it.next() {
            let T::N(rhs) = it.next()? else { return None };
            match op {
                T::Op('*') => acc = acc.checked_mul(&rhs)?,
                T::Op('/') => {
                    if rhs == Q::from_integer(0) {
                        return None;
                    }
                    acc = acc.checked_div(&rhs)?
                }
                T::Op(o) => {
                    lvl1.push(T::N(acc));
                    lvl1.push(T::Op(o));
                    acc = rhs;
                }
                _ => return None,
            }
        }
        lvl1.push(T::N(acc));
        let mut it = lvl1.into_iter();
        let T::N(mut acc) = it.next()? else { return None };
        while let Some(T::Op(o)) = it.next() {
            let T::N(rhs) = it.next()? else { return None };
            acc = if o == '+' { acc.checked_add(&rhs)? } else { acc.checked_sub(&rhs)? };
        }
        Some(acc)
    }
    loop {
        let close = toks.iter().position(|t| matches!(t, T::Close));
        let Some(close) = close else { break };
        let open = toks[..close].iter().rposition(|t| matches!(t, T::Open))?;
        let inner: Vec<T> = toks[open + 1..close].to_vec();
        let v = flat(inner)?;
        toks.splice(open..=close, [T::N(v)]);
    }
    if toks.iter().any(|t| matches!(t, T::Open)) {
        return None;
    }
    flat(toks)
}

pub fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = (0i64..60, prop::bool::weighted(0.1)).prop_map(|(n, neg)| if neg { format!("-{n}") } else { n.to_string() });
    leaf.prop_recursive(4, 24, 4, |inner| {
        (
            prop::collection::vec((inner.clone(), prop::sample::select(vec!['+', '-', '×', '÷', '*', '/'])), 1..4),
            inner,
            prop::bool::weighted(0.35),
        )
            .prop_map(|(pairs, last, paren)| {
                let mut s = String::new();
                for (e, op) in pairs {
                    s.push_str(&e);
                    s.push(op);
                }
                s.push_str(&last);
                if paren {
                    format!("({s})")
                } else {
                    s
                }
            })
    })
}


/// Pass@k by direct enumeration: first k non-error outcomes per row;
/// rows with fewer are incomplete. Returns (passed, scored, incomplete).
pub fn enumerate_pass_at_k(m: &[Vec<Option<bool>>], k: usize) -> (usize, usize, Vec<usize>) {
    let (mut passed, mut scored, mut incomplete) = (0, 0, Vec::new());
    for (i, row) in m.iter().enumerate() {
        let mut seen = 0;
        let mut hit = false;
        for p in row.iter().flatten() {
            if seen == k {
                break;
            }
            seen += 1;
            hit |= *p;
        }
        if seen < k {
            incomplete.push(i);
        } else {
            scored += 1;
            passed += usize::from(hit);
        }
    }
    (passed, scored, incomplete)
}
