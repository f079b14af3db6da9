//! Recursive-descent parser for ANF expressions.
//!
//! ```text
//! expr   := term ( '+' term )*
//! term   := factor ( '*'? factor )*        juxtaposition also means AND
//! factor := '1' | '0' | 'x' digits
//! ```
//!
//! `+` is XOR and repeated monomials cancel. Positions in errors are 1-based
//! character columns.

use super::{AnfFunction, Monomial};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok {
    Plus,
    Star,
    One,
    Zero,
    Var(usize),
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {}
            '+' => toks.push((col, Tok::Plus)),
            '*' => toks.push((col, Tok::Star)),
            '1' => toks.push((col, Tok::One)),
            '0' => toks.push((col, Tok::Zero)),
            'x' | 'X' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return Err(Error::Syntax { pos: col, msg: "expected digits after 'x'".into() });
                }
                let digits: String = chars[start..j].iter().collect();
                let index = digits
                    .parse::<usize>()
                    .map_err(|_| Error::Syntax { pos: col, msg: format!("variable index {digits} too large") })?;
                if index == 0 {
                    return Err(Error::Syntax { pos: col, msg: "variables are numbered from x1".into() });
                }
                toks.push((col, Tok::Var(index)));
                i = j;
                continue;
            }
            _ => {
                return Err(Error::Syntax { pos: col, msg: format!("unexpected character {c:?}") });
            }
        }
        i += 1;
    }
    Ok(Lexer { toks, end: chars.len() + 1 })
}

struct Parser {
    lexer: Lexer,
    at: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, Tok)> {
        self.lexer.toks.get(self.at).copied()
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.lexer.end, |(p, _)| p)
    }

    fn expr(&mut self) -> Result<Vec<Monomial>> {
        let mut terms = Vec::new();
        terms.extend(self.term()?);
        while let Some((_, Tok::Plus)) = self.peek() {
            self.at += 1;
            terms.extend(self.term()?);
        }
        if let Some((pos, tok)) = self.peek() {
            return Err(Error::Syntax { pos, msg: format!("unexpected {tok:?}") });
        }
        Ok(terms)
    }

    /// `None` when the term contains the factor `0`.
    fn term(&mut self) -> Result<Option<Monomial>> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.at += 1;
                    let f = self.factor()?;
                    acc = and(acc, f);
                }
                Some((_, Tok::One | Tok::Zero | Tok::Var(_))) => {
                    let f = self.factor()?;
                    acc = and(acc, f);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Option<Monomial>> {
        let pos = self.pos();
        match self.peek() {
            Some((_, Tok::One)) => {
                self.at += 1;
                Ok(Some(Monomial::ONE))
            }
            Some((_, Tok::Zero)) => {
                self.at += 1;
                Ok(None)
            }
            Some((_, Tok::Var(index))) => {
                self.at += 1;
                if index > self.n {
                    return Err(Error::VariableIndex { index, n: self.n });
                }
                Ok(Some(Monomial::from_vars([index])))
            }
            Some((_, tok)) => Err(Error::Syntax { pos, msg: format!("expected a factor, found {tok:?}") }),
            None => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

fn and(a: Option<Monomial>, b: Option<Monomial>) -> Option<Monomial> {
    Some(Monomial::from_mask(a?.mask() | b?.mask()))
}

/// Parses `text` as a function of `n` variables.
pub fn parse_expr(text: &str, n: usize) -> Result<AnfFunction> {
    let lexer = lex(text)?;
    let mut parser = Parser { lexer, at: 0, n };
    let terms = parser.expr()?;
    AnfFunction::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(f: &AnfFunction) -> Vec<Vec<usize>> {
        f.monomials().map(|m| m.vars()).collect()
    }

    #[test]
    fn parses_the_amplifiable_example() {
        let f = parse_expr("x1*x2*x3 + x3*x4 + x1", 4).unwrap();
        assert_eq!(set(&f), vec![vec![1], vec![1, 2, 3], vec![3, 4]]);
    }

    #[test]
    fn parses_the_non_amplifiable_example() {
        let f = parse_expr("x1*x2 + x2*x3 + x4*x5*x6 + x5", 6).unwrap();
        assert_eq!(set(&f), vec![vec![1, 2], vec![2, 3], vec![4, 5, 6], vec![5]]);
    }

    #[test]
    fn duplicate_monomials_cancel() {
        assert!(parse_expr("x1 + x1", 1).unwrap().is_zero());
        assert!(parse_expr("x1*x2 + x2*x1", 2).unwrap().is_zero());
        assert_eq!(parse_expr("x1 + x1 + x1", 1).unwrap(), parse_expr("x1", 1).unwrap());
    }

    #[test]
    fn juxtaposition_and_constants() {
        let a = parse_expr("x1 x2 + x3", 3).unwrap();
        let b = parse_expr("x1x2+x3", 3).unwrap();
        let c = parse_expr("x1*x2 + x3", 3).unwrap();
        assert_eq!(a, c);
        assert_eq!(b, c);
        assert_eq!(parse_expr("1", 2).unwrap(), AnfFunction::one(2).unwrap());
        assert_eq!(parse_expr("1*x2", 2).unwrap(), parse_expr("x2", 2).unwrap());
        assert!(parse_expr("0", 2).unwrap().is_zero());
        assert!(parse_expr("x1*0 + 0", 2).unwrap().is_zero());
        // repeated variables are idempotent under AND
        assert_eq!(parse_expr("x1*x1", 1).unwrap(), parse_expr("x1", 1).unwrap());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(parse_expr("x1 + ", 2), Err(Error::Syntax { pos: 6, msg: "unexpected end of input".into() }));
        assert!(matches!(parse_expr("x1 ⊕ x2", 2), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse_expr("x1 ** x2", 2), Err(Error::Syntax { pos: 5, .. })));
        assert!(matches!(parse_expr("x + x2", 2), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse_expr("x0", 2), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse_expr("", 2), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse_expr("+x1", 2), Err(Error::Syntax { pos: 1, .. })));
    }

    #[test]
    fn variable_beyond_n_is_rejected() {
        assert_eq!(parse_expr("x1*x5", 4), Err(Error::VariableIndex { index: 5, n: 4 }));
    }
}
