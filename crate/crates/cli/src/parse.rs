//! Text grammars for elements, Fock states, and operator expressions.
//!
//! Element terms look like `3/2 * x1^2*t1` (even variables `x<i>`, odd
//! variables `t<i>`; multivector files use `d<i>` for the odd generators and
//! `^` doubles as the wedge separator, as in `x1^2 * d1^d2`). Fock words
//! look like `b(-2)c(-1)|0>`. Operators are sums of composition chains:
//! `dx1*dt1 + dx2*dt2`, `mul(x1)*dx1`, `b@1`, `boundary`, `iota(2)`.

use anyhow::{anyhow, bail, Context, Result};
use bvkernel::element::Element;
use bvkernel::lie::LieComplex;
use bvkernel::linop::{left_mult, LinOp};
use bvkernel::poly::{partial_even, partial_odd, GradedWord, PolyAlgebra};
use bvkernel::scalar::{self, Scalar};
use bvkernel::vosa::{FockState, FockWord, Gen, VosaBc};
use num_bigint::BigInt;
use std::str::FromStr;
use std::sync::Arc;

pub fn parse_rational(s: &str) -> Result<Scalar> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).with_context(|| format!("bad numerator in {s:?}"))?;
        let d = BigInt::from_str(d.trim()).with_context(|| format!("bad denominator in {s:?}"))?;
        if d == BigInt::from(0) {
            bail!("zero denominator in {s:?}");
        }
        Ok(Scalar::new(n, d))
    } else {
        let n = BigInt::from_str(s).with_context(|| format!("bad rational {s:?}"))?;
        Ok(Scalar::from_integer(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    At,
    Vacuum,
    Comma,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '@' => {
                out.push(Tok::At);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '|' => {
                // the vacuum symbol |0>
                if chars.get(i + 1) == Some(&'0') && chars.get(i + 2) == Some(&'>') {
                    out.push(Tok::Vacuum);
                    i += 3;
                } else {
                    bail!("unexpected '|' at byte {i} (expected |0>)");
                }
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(Tok::Num(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => bail!("unexpected character {other:?} at byte {i}"),
        }
    }
    Ok(out)
}

/// Element of a polynomial superalgebra (also the multivector grammar, with
/// odd generators named `d<i>`; `^` before an identifier acts as a wedge).
pub fn parse_poly_element(alg: &Arc<PolyAlgebra>, input: &str) -> Result<Element<GradedWord>> {
    let toks = tokenize(input)?;
    let mut i = 0usize;
    let mut out = Element::zero();
    let mut sign = scalar::one();
    let mut expect_term = true;
    while i < toks.len() {
        match &toks[i] {
            Tok::Plus => {
                sign = scalar::one();
                i += 1;
                expect_term = true;
            }
            Tok::Minus => {
                sign = -scalar::one();
                i += 1;
                expect_term = true;
            }
            _ if expect_term => {
                let (term, next) = parse_poly_term(alg, &toks, i)
                    .with_context(|| format!("in element {input:?}"))?;
                out = out.add(&term.scale(&sign));
                sign = scalar::one();
                i = next;
                expect_term = false;
            }
            other => bail!("unexpected token {other:?} in element {input:?}"),
        }
    }
    if expect_term && !toks.is_empty() {
        bail!("dangling sign in element {input:?}");
    }
    Ok(out)
}

fn parse_poly_term(
    alg: &Arc<PolyAlgebra>,
    toks: &[Tok],
    mut i: usize,
) -> Result<(Element<GradedWord>, usize)> {
    let mut coeff = scalar::one();
    let mut word = GradedWord::one(alg.n_even());
    let mut saw_factor = false;

    // optional leading rational
    if let Some(Tok::Num(n)) = toks.get(i) {
        let mut c = Scalar::from_integer(BigInt::from_str(n)?);
        i += 1;
        if toks.get(i) == Some(&Tok::Slash) {
            let Some(Tok::Num(d)) = toks.get(i + 1) else {
                bail!("expected denominator");
            };
            c = c / Scalar::from_integer(BigInt::from_str(d)?);
            i += 2;
        }
        coeff = c;
        saw_factor = true;
        if toks.get(i) == Some(&Tok::Star) {
            i += 1;
        }
    }

    loop {
        match toks.get(i) {
            Some(Tok::Ident(name)) => {
                let (kind, idx) = split_var(name)?;
                let mut exp: u16 = 1;
                if toks.get(i + 1) == Some(&Tok::Caret) {
                    if let Some(Tok::Num(n)) = toks.get(i + 2) {
                        exp = n.parse().context("exponent out of range")?;
                        i += 3;
                    } else {
                        // `^` followed by an identifier is a wedge separator
                        i += 1;
                    }
                } else {
                    i += 1;
                }
                apply_var(alg, &mut word, &mut coeff, kind, idx, exp)?;
                saw_factor = true;
                if toks.get(i) == Some(&Tok::Star) || toks.get(i) == Some(&Tok::Caret) {
                    if toks.get(i) == Some(&Tok::Caret) {
                        // wedge separator: require an identifier next
                        let Some(Tok::Ident(_)) = toks.get(i + 1) else {
                            bail!("dangling '^'");
                        };
                    }
                    i += 1;
                    continue;
                }
                // juxtaposition: continue if another identifier follows
                if matches!(toks.get(i), Some(Tok::Ident(_))) {
                    continue;
                }
                break;
            }
            _ => break,
        }
    }
    if !saw_factor {
        bail!("empty term");
    }
    Ok((Element::single(word, coeff), i))
}

fn split_var(name: &str) -> Result<(char, usize)> {
    let mut chars = name.chars();
    let kind = chars.next().ok_or_else(|| anyhow!("empty identifier"))?;
    let idx: usize = chars.as_str().parse().map_err(|_| {
        anyhow!("variable {name:?} must be x<i>, t<i> or d<i> with a 1-based index")
    })?;
    if idx == 0 {
        bail!("variable indices are 1-based");
    }
    Ok((kind, idx - 1))
}

fn apply_var(
    alg: &Arc<PolyAlgebra>,
    word: &mut GradedWord,
    coeff: &mut Scalar,
    kind: char,
    idx: usize,
    exp: u16,
) -> Result<()> {
    match kind {
        'x' => {
            if idx >= alg.n_even() {
                bail!("even variable x{} out of range", idx + 1);
            }
            word.evens[idx] += exp;
        }
        't' | 'd' | 'e' => {
            if idx >= alg.n_odd() {
                bail!("odd variable index {} out of range", idx + 1);
            }
            if exp != 1 {
                bail!("odd generators square to zero; exponent must be 1");
            }
            let bit = 1u32 << idx;
            if word.odds & bit != 0 {
                bail!("repeated odd generator in one term");
            }
            // Koszul sign: count odd generators already present above idx
            let above = (word.odds >> (idx + 1)).count_ones();
            if above % 2 == 1 {
                *coeff = -coeff.clone();
            }
            word.odds |= bit;
        }
        other => bail!("unknown variable kind {other:?} (expected x/t/d)"),
    }
    Ok(())
}

/// Fock states: signed sums of `b(<n>)c(<m>)...|0>` words with optional
/// rational coefficients.
pub fn parse_fock_state(alg: &Arc<VosaBc>, input: &str) -> Result<FockState> {
    let toks = tokenize(input)?;
    let mut i = 0usize;
    let mut out: FockState = Element::zero();
    let mut sign = scalar::one();
    let mut expect_term = true;
    while i < toks.len() {
        match &toks[i] {
            Tok::Plus => {
                sign = scalar::one();
                i += 1;
                expect_term = true;
            }
            Tok::Minus => {
                sign = -scalar::one();
                i += 1;
                expect_term = true;
            }
            _ if expect_term => {
                let mut coeff = sign.clone();
                if let Some(Tok::Num(n)) = toks.get(i) {
                    coeff = coeff * Scalar::from_integer(BigInt::from_str(n)?);
                    i += 1;
                    if toks.get(i) == Some(&Tok::Slash) {
                        let Some(Tok::Num(d)) = toks.get(i + 1) else {
                            bail!("expected denominator");
                        };
                        coeff = coeff / Scalar::from_integer(BigInt::from_str(d)?);
                        i += 2;
                    }
                    if toks.get(i) == Some(&Tok::Star) {
                        i += 1;
                    }
                }
                let mut modes: Vec<(Gen, i64)> = Vec::new();
                loop {
                    match toks.get(i) {
                        Some(Tok::Ident(name)) if name == "b" || name == "c" => {
                            let gen = if name == "b" { Gen::B } else { Gen::C };
                            if toks.get(i + 1) != Some(&Tok::LParen) {
                                bail!("mode {name} needs an index: {name}(<int>)");
                            }
                            let (val, next) = parse_signed_int(&toks, i + 2)?;
                            if toks.get(next) != Some(&Tok::RParen) {
                                bail!("unclosed mode index");
                            }
                            modes.push((gen, val));
                            i = next + 1;
                        }
                        Some(Tok::Vacuum) => {
                            i += 1;
                            break;
                        }
                        other => bail!("expected mode or |0>, found {other:?}"),
                    }
                }
                let state = alg.state_from_modes(&modes).scale(&coeff);
                out = out.add(&state);
                sign = scalar::one();
                expect_term = false;
            }
            other => bail!("unexpected token {other:?} in state {input:?}"),
        }
    }
    Ok(out)
}

fn parse_signed_int(toks: &[Tok], i: usize) -> Result<(i64, usize)> {
    match toks.get(i) {
        Some(Tok::Minus) => {
            let Some(Tok::Num(n)) = toks.get(i + 1) else {
                bail!("expected integer");
            };
            Ok((-n.parse::<i64>()?, i + 2))
        }
        Some(Tok::Num(n)) => Ok((n.parse::<i64>()?, i + 1)),
        other => bail!("expected integer, found {other:?}"),
    }
}

/// Operators on a polynomial superalgebra: sums of composition chains of
/// `dx<i>`, `dt<i>`, `mul(<element>)`, `id`, `euler`, with optional rational
/// coefficients, e.g. `dx1*dt1 + dx2*dt2` or `mul(1 + 2x1)*dx1`.
pub fn parse_poly_op(alg: &Arc<PolyAlgebra>, input: &str) -> Result<LinOp<GradedWord>> {
    let mut acc: Option<LinOp<GradedWord>> = None;
    for (sign, chunk) in split_top_level_sum(input)? {
        let mut chain: Option<LinOp<GradedWord>> = None;
        let mut coeff = scalar::one();
        for factor in split_top_level(&chunk, '*')? {
            let f = factor.trim();
            if f.is_empty() {
                bail!("empty operator factor in {input:?}");
            }
            if let Ok(c) = parse_rational(f) {
                coeff = coeff * c;
                continue;
            }
            let op = parse_poly_op_atom(alg, f)?;
            chain = Some(match chain {
                None => op,
                Some(prev) => prev.compose(&op),
            });
        }
        let mut op = chain.unwrap_or_else(|| LinOp::identity("id"));
        op = op.scale(coeff * sign);
        acc = Some(match acc {
            None => op,
            Some(prev) => prev
                .add(&op)
                .map_err(|e| anyhow!("operator sum: {e}"))?,
        });
    }
    acc.ok_or_else(|| anyhow!("empty operator expression"))
        .map(|op| op.relabel(input.trim().to_string()))
}

fn parse_poly_op_atom(alg: &Arc<PolyAlgebra>, f: &str) -> Result<LinOp<GradedWord>> {
    if f == "id" {
        return Ok(LinOp::identity("id"));
    }
    if f == "euler" {
        return Ok(bvkernel::poly::euler_operator(alg));
    }
    if let Some(rest) = f.strip_prefix("mul(").and_then(|r| r.strip_suffix(')')) {
        let e = parse_poly_element(alg, rest)?;
        return Ok(left_mult(alg, e, format!("mul({rest})")));
    }
    if let Some(v) = f.strip_prefix("dx") {
        let idx: usize = v.parse().map_err(|_| anyhow!("bad index in {f:?}"))?;
        if idx == 0 || idx > alg.n_even() {
            bail!("dx index out of range in {f:?}");
        }
        return Ok(partial_even(alg, idx - 1));
    }
    if let Some(v) = f.strip_prefix("dt").or_else(|| f.strip_prefix("dd")) {
        let idx: usize = v.parse().map_err(|_| anyhow!("bad index in {f:?}"))?;
        if idx == 0 || idx > alg.n_odd() {
            bail!("dt index out of range in {f:?}");
        }
        return Ok(partial_odd(alg, idx - 1));
    }
    bail!("unknown operator atom {f:?} (expected dx<i>, dt<i>, mul(...), id, euler)")
}

/// Operators on a Lie complex: `boundary`, `iota(<i>)`, `eps(<i>)`,
/// `theta(<i>)`, `rho(<i>)`, `pi(<i>)`, in sums and chains like poly ops.
pub fn parse_lie_op(complex: &LieComplex, input: &str) -> Result<LinOp<GradedWord>> {
    let mut acc: Option<LinOp<GradedWord>> = None;
    for (sign, chunk) in split_top_level_sum(input)? {
        let mut chain: Option<LinOp<GradedWord>> = None;
        let mut coeff = scalar::one();
        for factor in split_top_level(&chunk, '*')? {
            let f = factor.trim();
            if let Ok(c) = parse_rational(f) {
                coeff = coeff * c;
                continue;
            }
            let op = parse_lie_op_atom(complex, f)?;
            chain = Some(match chain {
                None => op,
                Some(prev) => prev.compose(&op),
            });
        }
        let mut op = chain.ok_or_else(|| anyhow!("empty factor chain"))?;
        op = op.scale(coeff * sign);
        acc = Some(match acc {
            None => op,
            Some(prev) => prev.add(&op).map_err(|e| anyhow!("operator sum: {e}"))?,
        });
    }
    acc.ok_or_else(|| anyhow!("empty operator expression"))
        .map(|op| op.relabel(input.trim().to_string()))
}

fn parse_lie_op_atom(complex: &LieComplex, f: &str) -> Result<LinOp<GradedWord>> {
    if f == "boundary" || f == "coboundary" || f == "D" {
        return Ok(complex.differential());
    }
    for (name, builder) in [
        ("iota", 0usize),
        ("eps", 1),
        ("theta", 2),
        ("rho", 3),
        ("pi", 4),
    ] {
        if let Some(rest) = f
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
        {
            let idx: usize = rest.trim().parse().map_err(|_| anyhow!("bad index {f:?}"))?;
            if idx == 0 || idx > complex.lie.dim() {
                bail!("generator index out of range in {f:?}");
            }
            let i = idx - 1;
            return Ok(match builder {
                0 => complex.iota(i),
                1 => complex.eps(i),
                2 => complex.theta(i),
                3 => complex.rho(i),
                _ => complex.pi(i),
            });
        }
    }
    bail!("unknown Lie-complex operator {f:?}")
}

/// Mode operators on the bc system: `b@<n>`, `c@<n>`, `L@<n>` in standard
/// indexing (`u_(n)`), plus `b0` as the weight-indexed BV mode `b_(1)`.
pub fn parse_bc_op(alg: &Arc<VosaBc>, input: &str) -> Result<LinOp<FockWord>> {
    let f = input.trim();
    if f == "b0" {
        return Ok(alg.delta_b0());
    }
    if f == "0" {
        return Ok(LinOp::zero("0", 0));
    }
    let toks = tokenize(f)?;
    match toks.as_slice() {
        [Tok::Ident(name), Tok::At, rest @ ..] => {
            let (n, next) = parse_signed_int_slice(rest)?;
            if next != rest.len() {
                bail!("trailing input in mode {f:?}");
            }
            let state = match name.as_str() {
                "b" => alg.b_state(),
                "c" => alg.c_state(),
                "L" => alg.stress_state(),
                other => bail!("unknown field {other:?} (expected b, c, L)"),
            };
            Ok(alg.mode_op(state, n, f.to_string()))
        }
        _ => bail!("expected a mode like b@1 or L@0, found {f:?}"),
    }
}

fn parse_signed_int_slice(toks: &[Tok]) -> Result<(i64, usize)> {
    match toks {
        [Tok::Minus, Tok::Num(n), ..] => Ok((-n.parse::<i64>()?, 2)),
        [Tok::Num(n), ..] => Ok((n.parse::<i64>()?, 1)),
        other => bail!("expected integer, found {other:?}"),
    }
}

fn split_top_level(s: &str, sep: char) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| anyhow!("unbalanced parentheses in {s:?}"))?;
                current.push(c);
            }
            c if c == sep && depth == 0 => {
                out.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if depth != 0 {
        bail!("unbalanced parentheses in {s:?}");
    }
    out.push(current);
    Ok(out)
}

/// Splits `a + b - c` at the top level into signed chunks.
fn split_top_level_sum(s: &str) -> Result<Vec<(Scalar, String)>> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    let mut sign = scalar::one();
    let mut any = false;
    for c in s.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| anyhow!("unbalanced parentheses in {s:?}"))?;
                current.push(c);
            }
            '+' | '-' if depth == 0 => {
                if !current.trim().is_empty() {
                    out.push((sign.clone(), std::mem::take(&mut current)));
                    any = true;
                } else {
                    current.clear();
                }
                sign = if c == '+' { scalar::one() } else { -scalar::one() };
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        out.push((sign, current));
        any = true;
    }
    if !any {
        bail!("empty expression {s:?}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bvkernel::algebra::Superalgebra;
    use bvkernel::poly::make_polynomial_superalgebra;

    #[test]
    fn poly_elements_round_trip() {
        let alg = make_polynomial_superalgebra(2, 2, 6).unwrap();
        let e = parse_poly_element(&alg, "3/2 * x1^2*t1 + x2 - 2*t1*t2").unwrap();
        assert_eq!(e.len(), 3);
        let t21 = parse_poly_element(&alg, "t2*t1").unwrap();
        let t12 = parse_poly_element(&alg, "t1*t2").unwrap();
        assert_eq!(t21, t12.neg());
        assert!(parse_poly_element(&alg, "t1*t1").is_err());
        assert!(parse_poly_element(&alg, "x9").is_err());
    }

    #[test]
    fn multivector_wedge_grammar() {
        let alg = make_polynomial_superalgebra(2, 2, 6).unwrap();
        let w = parse_poly_element(&alg, "x1^2 * d1^d2").unwrap();
        assert_eq!(w.len(), 1);
        let (word, _) = w.iter().next().unwrap();
        assert_eq!(word.evens, vec![2, 0]);
        assert_eq!(word.odds, 0b11);
    }

    #[test]
    fn fock_grammar() {
        let alg = bvkernel::vosa::make_bc_system(4);
        let s = parse_fock_state(&alg, "b(-2)c(-1)|0> - 2*|0>").unwrap();
        assert_eq!(s.len(), 2);
        // reorder signs are applied during normalization
        let a = parse_fock_state(&alg, "c(1)b(-2)|0>").unwrap();
        let b = parse_fock_state(&alg, "b(-2)c(1)|0>").unwrap();
        assert_eq!(a, b.neg());
        assert!(parse_fock_state(&alg, "b(-2)").is_err());
    }

    #[test]
    fn poly_operators() {
        let alg = make_polynomial_superalgebra(2, 2, 6).unwrap();
        let delta = parse_poly_op(&alg, "dx1*dt1 + dx2*dt2").unwrap();
        let x1t1 = parse_poly_element(&alg, "x1*t1").unwrap();
        assert_eq!(delta.apply(&x1t1), alg.unit().unwrap());
        let m = parse_poly_op(&alg, "mul(1 + 2*x1)*dx1").unwrap();
        let x1 = parse_poly_element(&alg, "x1").unwrap();
        let expect = parse_poly_element(&alg, "1 + 2*x1").unwrap();
        assert_eq!(m.apply(&x1), expect);
    }

    #[test]
    fn bc_operators() {
        let alg = bvkernel::vosa::make_bc_system(4);
        let b0 = parse_bc_op(&alg, "b@1").unwrap();
        let alias = parse_bc_op(&alg, "b0").unwrap();
        let w = parse_fock_state(&alg, "b(-2)c(0)|0>").unwrap();
        assert_eq!(b0.apply(&w), alias.apply(&w));
        let l0 = parse_bc_op(&alg, "L@1").unwrap();
        assert_eq!(l0.apply(&w), w.scale(&scalar::int(2)));
    }
}
