//! Group specs (`cyclic:n`, `dihedral:n`, `file:path`) and representation
//! expressions: `gK` is irrep `K`, `*` is the tensor product and `+` the direct sum,
//! with `*` binding tighter and both evaluated left to right.

use std::sync::Arc;

use gasym_core::groups::{cyclic_group, dihedral_group, load_group, tensor_product_rep, GroupWithIrreps, Representation};
use gasym_core::{Error, Result};

pub fn parse_group_spec(spec: &str) -> Result<GroupWithIrreps> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("group spec '{spec}' must look like cyclic:n, dihedral:n or file:path")))?;
    let order = || {
        arg.trim().parse::<usize>().map_err(|_| Error::Parse(format!("'{arg}' is not a group parameter")))
    };
    match kind.trim() {
        "cyclic" => cyclic_group(order()?),
        "dihedral" => dihedral_group(order()?),
        "file" => load_group(arg),
        other => Err(Error::Parse(format!("unknown group kind '{other}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Irrep(usize),
    Plus,
    Star,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some((pos, ch)) = chars.next() {
        match ch {
            c if c.is_whitespace() => {}
            '+' => tokens.push(Token::Plus),
            '*' => tokens.push(Token::Star),
            'g' | 'G' => {
                let mut digits = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    digits.push(d);
                    chars.next();
                }
                let label = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("expected irrep label after 'g' at position {pos}")))?;
                tokens.push(Token::Irrep(label));
            }
            other => return Err(Error::Parse(format!("unexpected '{other}' at position {pos}"))),
        }
    }
    Ok(tokens)
}

/// Parsed expression: a sum of products of irrep labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepExpr(pub Vec<Vec<usize>>);

pub fn parse_rep_expr(src: &str) -> Result<RepExpr> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty representation expression".into()));
    }
    let mut terms = vec![Vec::new()];
    let mut expect_operand = true;
    for t in tokens {
        match (t, expect_operand) {
            (Token::Irrep(k), true) => {
                terms.last_mut().expect("non-empty").push(k);
                expect_operand = false;
            }
            (Token::Plus, false) => {
                terms.push(Vec::new());
                expect_operand = true;
            }
            (Token::Star, false) => expect_operand = true,
            (tok, _) => {
                let shown = match tok {
                    Token::Irrep(k) => format!("g{k}"),
                    Token::Plus => "+".into(),
                    Token::Star => "*".into(),
                };
                return Err(Error::Parse(format!("unexpected '{shown}' in representation expression")));
            }
        }
    }
    if expect_operand {
        return Err(Error::Parse("representation expression ends with an operator".into()));
    }
    Ok(RepExpr(terms))
}

impl RepExpr {
    /// All irreps of the group summed in label order.
    pub fn all_irreps(group: &GroupWithIrreps) -> Self {
        Self(group.labels().into_iter().map(|l| vec![l]).collect())
    }

    pub fn evaluate(&self, group: &Arc<GroupWithIrreps>) -> Result<Representation> {
        let mut terms = Vec::with_capacity(self.0.len());
        for factors in &self.0 {
            let mut rep = Representation::irrep(group.clone(), factors[0])?;
            for &f in &factors[1..] {
                rep = tensor_product_rep(&rep, &Representation::irrep(group.clone(), f)?)?;
            }
            terms.push(rep);
        }
        let refs: Vec<&Representation> = terms.iter().collect();
        Representation::block_sum(&refs)
    }
}
