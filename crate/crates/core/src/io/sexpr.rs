use super::{ParseError, ParseErrorKind, Pos};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Sexpr {
    Symbol(String, Pos),
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    pub(crate) fn pos(&self) -> Pos {
        match self {
            Sexpr::Symbol(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub(crate) fn symbol(&self) -> Result<&str, ParseError> {
        match self {
            Sexpr::Symbol(s, p) if s.contains('#') => Err(ParseError::new(
                *p,
                ParseErrorKind::InvalidValue(format!("`{s}`: `#` is reserved for generated names")),
            )),
            Sexpr::Symbol(s, _) => Ok(s),
            Sexpr::List(_, p) => Err(ParseError::syntax(*p, "expected a symbol, found a list")),
        }
    }

    pub(crate) fn list(&self) -> Result<&[Sexpr], ParseError> {
        match self {
            Sexpr::List(items, _) => Ok(items),
            Sexpr::Symbol(s, p) => Err(ParseError::syntax(*p, format!("expected a list, found `{s}`"))),
        }
    }

    /// A list whose first element is the symbol `keyword`; returns the rest.
    pub(crate) fn tagged(&self, keyword: &str) -> Result<&[Sexpr], ParseError> {
        let items = self.list()?;
        match items.first() {
            Some(Sexpr::Symbol(s, _)) if s == keyword => Ok(&items[1..]),
            _ => Err(ParseError::syntax(self.pos(), format!("expected `({keyword} ...)`"))),
        }
    }

    /// Head symbol of a list, if any.
    pub(crate) fn head(&self) -> Option<&str> {
        match self {
            Sexpr::List(items, _) => match items.first() {
                Some(Sexpr::Symbol(s, _)) => Some(s),
                _ => None,
            },
            Sexpr::Symbol(..) => None,
        }
    }
}

/// Reads exactly one top-level expression. `;` starts a comment that runs to
/// the end of the line.
pub(crate) fn read(text: &str) -> Result<Sexpr, ParseError> {
    let mut reader = Reader { chars: text.chars().peekable(), pos: Pos { line: 1, col: 1 } };
    reader.skip_blank();
    let Some(expr) = reader.expr()? else {
        return Err(ParseError::syntax(reader.pos, "empty input"));
    };
    reader.skip_blank();
    if reader.chars.peek().is_some() {
        return Err(ParseError::syntax(reader.pos, "trailing input after the top-level expression"));
    }
    Ok(expr)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    /// `Ok(None)` at a closing parenthesis or end of input.
    fn expr(&mut self) -> Result<Option<Sexpr>, ParseError> {
        self.skip_blank();
        let start = self.pos;
        match self.chars.peek() {
            None | Some(')') => Ok(None),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                while let Some(item) = self.expr()? {
                    items.push(item);
                }
                match self.bump() {
                    Some(')') => Ok(Some(Sexpr::List(items, start))),
                    _ => Err(ParseError::syntax(start, "unclosed `(`")),
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ';') {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(Sexpr::Symbol(s, start)))
            }
        }
    }
}
