use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SExprError {
    #[error("{0}: unexpected ')'")]
    UnexpectedClose(Pos),
    #[error("{0}: '(' is never closed")]
    Unclosed(Pos),
    #[error("empty input")]
    Empty,
    #[error("{0}: trailing input after the top-level form")]
    Trailing(Pos),
}

/// Parse exactly one top-level form. Symbols are lowercased; `;` starts a
/// comment running to the end of the line.
pub fn parse_sexpr(text: &str) -> Result<SExpr, SExprError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut result: Option<SExpr> = None;
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars();
    let mut atom = String::new();
    let mut atom_pos = Pos { line, col };

    let emit = |expr: SExpr, stack: &mut Vec<(Vec<SExpr>, Pos)>, result: &mut Option<SExpr>| -> Result<(), SExprError> {
        match stack.last_mut() {
            Some((items, _)) => items.push(expr),
            None if result.is_none() => *result = Some(expr),
            None => return Err(SExprError::Trailing(expr.pos())),
        }
        Ok(())
    };

    while let Some(c) = chars.next() {
        col += 1;
        let here = Pos { line, col };
        let delimiter = c.is_whitespace() || c == '(' || c == ')' || c == ';';
        if delimiter && !atom.is_empty() {
            let word = core::mem::take(&mut atom);
            emit(SExpr::Atom(word, atom_pos), &mut stack, &mut result)?;
        }
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            '(' => {
                if stack.is_empty() && result.is_some() {
                    return Err(SExprError::Trailing(here));
                }
                stack.push((Vec::new(), here));
            }
            ')' => {
                let (items, open) = stack.pop().ok_or(SExprError::UnexpectedClose(here))?;
                emit(SExpr::List(items, open), &mut stack, &mut result)?;
            }
            c if c.is_whitespace() => {}
            c => {
                if atom.is_empty() {
                    atom_pos = here;
                }
                atom.extend(c.to_lowercase());
            }
        }
    }
    if !atom.is_empty() {
        emit(SExpr::Atom(atom, atom_pos), &mut stack, &mut result)?;
    }
    if let Some((_, open)) = stack.pop() {
        return Err(SExprError::Unclosed(open));
    }
    result.ok_or(SExprError::Empty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_with_positions() {
        let e = parse_sexpr("; header\n(define (Domain bw)\n  (:requirements :strips))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items[0].as_atom(), Some("define"));
        assert_eq!(items[1].as_list().unwrap()[0].as_atom(), Some("domain"));
        assert_eq!(items[2].pos(), Pos { line: 3, col: 3 });
    }

    #[test]
    fn errors() {
        assert_eq!(parse_sexpr("(a (b)"), Err(SExprError::Unclosed(Pos { line: 1, col: 1 })));
        assert_eq!(parse_sexpr("a)"), Err(SExprError::UnexpectedClose(Pos { line: 1, col: 2 })));
        assert_eq!(parse_sexpr(")"), Err(SExprError::UnexpectedClose(Pos { line: 1, col: 1 })));
        assert_eq!(parse_sexpr("  "), Err(SExprError::Empty));
        assert!(matches!(parse_sexpr("(a) (b)"), Err(SExprError::Trailing(_))));
    }
}
