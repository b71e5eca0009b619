use super::{ParseDiagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Digits, optionally with a fractional part (`0.75`).
    Number(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Dot,
    DotDot,
    Star,
    Slash,
    Eq,
    Arrow,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`<->`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Splits normalized source text into tokens, dropping whitespace and `//`
/// comments. Stops at the first lexical error.
pub(crate) fn tokenize(text: &str, file: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let (line, col) = (cur.line, cur.col);
        let Some(c) = cur.peek() else { break };
        let span_to = |cur: &Cursor| SourceSpan::new(file, line, col, cur.line, cur.col.saturating_sub(1).max(1));
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                s.push(c);
                cur.bump();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                s.push(c);
                cur.bump();
            }
            if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
                s.push('.');
                cur.bump();
                while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                    s.push(c);
                    cur.bump();
                }
            }
            if cur.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
                cur.bump();
                return Err(ParseDiagnostic::error(
                    span_to(&cur),
                    "identifiers must not start with a digit",
                ));
            }
            Tok::Number(s)
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(ParseDiagnostic::error(span_to(&cur), "unterminated string literal"))
                    }
                    Some('"') => break,
                    Some('\\') => match cur.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        _ => {
                            return Err(ParseDiagnostic::error(
                                span_to(&cur),
                                "invalid escape in string literal",
                            ))
                        }
                    },
                    Some(c) => s.push(c),
                }
            }
            Tok::Str(s)
        } else {
            cur.bump();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '=' => Tok::Eq,
                '.' if cur.peek() == Some('.') => {
                    cur.bump();
                    Tok::DotDot
                }
                '.' => Tok::Dot,
                '<' if cur.peek() == Some('-') && cur.peek2() == Some('>') => {
                    cur.bump();
                    cur.bump();
                    Tok::Arrow
                }
                other => {
                    return Err(ParseDiagnostic::error(
                        span_to(&cur),
                        format!("unexpected character `{other}`"),
                    ))
                }
            }
        };
        out.push(Token {
            tok,
            span: span_to(&cur),
        });
    }
    Ok(out)
}

/// Finds the first brace imbalance: a `}` with nothing open, or else the
/// innermost `{` still open at end of input.
pub(crate) fn brace_imbalance(tokens: &[Token]) -> Option<ParseDiagnostic> {
    let mut open: Vec<&Token> = Vec::new();
    for t in tokens {
        match t.tok {
            Tok::LBrace => open.push(t),
            Tok::RBrace if open.pop().is_none() => {
                return Some(ParseDiagnostic::error(t.span.clone(), "unmatched `}`"));
            }
            _ => {}
        }
    }
    open.pop()
        .map(|t| ParseDiagnostic::error(t.span.clone(), "unclosed `{`"))
}
