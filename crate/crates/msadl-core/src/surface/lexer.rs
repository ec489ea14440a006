//! Tokeniser for both textual surfaces.
//!
//! All keywords are contextual: the lexer only knows identifiers, literals,
//! punctuation and doc-comment lines. `//` line comments and `/* */` block
//! comments are skipped; `///` doc lines are kept as tokens because
//! annotations ride on them.

use crate::diag::{codes, Diagnostic, Location};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Double(f64),
    Char(char),
    /// Contents of a `///` line, leading space stripped.
    DocLine(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    Arrow,
    Pipe,
    At,
    Eq,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Double(d) => format!("number `{d}`"),
            Tok::Char(c) => format!("char literal `'{c}'`"),
            Tok::DocLine(_) => "doc comment".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::LBracket => "`[`".to_string(),
            Tok::RBracket => "`]`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::ColonColon => "`::`".to_string(),
            Tok::Dot => "`.`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::Pipe => "`|`".to_string(),
            Tok::At => "`@`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
    pub end_col: u32,
}

impl Token {
    pub fn location(&self, file: &str) -> Location {
        Location::new(file, self.line, self.col, self.end_col)
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: &'a str,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: String, line: u32, col: u32) -> Diagnostic {
        Diagnostic::error(codes::PARSE_ERROR, msg, Location::new(self.file, line, col, self.col))
    }
}

pub fn lex(text: &str, file: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut lx = Lexer { chars: text.chars().collect(), pos: 0, line: 1, col: 1, file };
    let mut out = Vec::new();

    loop {
        // skip whitespace and plain comments
        loop {
            match lx.peek() {
                Some(c) if c.is_whitespace() => {
                    lx.bump();
                }
                Some('/') if lx.peek2() == Some('/') => {
                    // `///` doc line is a token, `//` is skipped
                    let (line, col) = (lx.line, lx.col);
                    lx.bump();
                    lx.bump();
                    let doc = lx.peek() == Some('/') && {
                        lx.bump();
                        true
                    };
                    let mut content = String::new();
                    while let Some(c) = lx.peek() {
                        if c == '\n' {
                            break;
                        }
                        content.push(c);
                        lx.bump();
                    }
                    if doc {
                        let trimmed = content.strip_prefix(' ').unwrap_or(&content).trim_end().to_string();
                        out.push(Token { tok: Tok::DocLine(trimmed), line, col, end_col: lx.col });
                    }
                }
                Some('/') if lx.peek2() == Some('*') => {
                    let (line, col) = (lx.line, lx.col);
                    lx.bump();
                    lx.bump();
                    let mut closed = false;
                    while let Some(c) = lx.bump() {
                        if c == '*' && lx.peek() == Some('/') {
                            lx.bump();
                            closed = true;
                            break;
                        }
                    }
                    if !closed {
                        return Err(vec![lx.error("unterminated block comment".into(), line, col)]);
                    }
                }
                _ => break,
            }
        }

        let (line, col) = (lx.line, lx.col);
        let Some(c) = lx.peek() else {
            out.push(Token { tok: Tok::Eof, line, col, end_col: col });
            return Ok(out);
        };

        let tok = match c {
            '{' => {
                lx.bump();
                Tok::LBrace
            }
            '}' => {
                lx.bump();
                Tok::RBrace
            }
            '(' => {
                lx.bump();
                Tok::LParen
            }
            ')' => {
                lx.bump();
                Tok::RParen
            }
            '[' => {
                lx.bump();
                Tok::LBracket
            }
            ']' => {
                lx.bump();
                Tok::RBracket
            }
            ',' => {
                lx.bump();
                Tok::Comma
            }
            ';' => {
                lx.bump();
                Tok::Semi
            }
            '.' => {
                lx.bump();
                Tok::Dot
            }
            '|' => {
                lx.bump();
                Tok::Pipe
            }
            '@' => {
                lx.bump();
                Tok::At
            }
            '=' => {
                lx.bump();
                Tok::Eq
            }
            '*' => {
                lx.bump();
                Tok::Star
            }
            ':' => {
                lx.bump();
                if lx.peek() == Some(':') {
                    lx.bump();
                    Tok::ColonColon
                } else {
                    Tok::Colon
                }
            }
            '-' => {
                lx.bump();
                match lx.peek() {
                    Some('>') => {
                        lx.bump();
                        Tok::Arrow
                    }
                    Some(d) if d.is_ascii_digit() => lex_number(&mut lx, true, line, col)?,
                    _ => return Err(vec![lx.error("expected `->` or a number after `-`".into(), line, col)]),
                }
            }
            '"' => lex_string(&mut lx, line, col)?,
            '\'' => lex_char(&mut lx, line, col)?,
            d if d.is_ascii_digit() => lex_number(&mut lx, false, line, col)?,
            a if a.is_ascii_alphabetic() || a == '_' => {
                let mut ident = String::new();
                while let Some(c) = lx.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(ident)
            }
            other => {
                lx.bump();
                return Err(vec![lx.error(format!("unexpected character `{other}`"), line, col)]);
            }
        };
        let end_col = lx.col;
        out.push(Token { tok, line, col, end_col });
    }
}

fn lex_string(lx: &mut Lexer, line: u32, col: u32) -> Result<Tok, Vec<Diagnostic>> {
    lx.bump(); // opening quote
    let mut s = String::new();
    loop {
        match lx.peek() {
            None | Some('\n') => return Err(vec![lx.error("unterminated string literal".into(), line, col)]),
            Some('"') => {
                lx.bump();
                return Ok(Tok::Str(s));
            }
            Some('\\') => {
                lx.bump();
                let esc = lx.bump().ok_or_else(|| vec![lx.error("unterminated escape".into(), line, col)])?;
                match esc {
                    '"' => s.push('"'),
                    '\\' => s.push('\\'),
                    'n' => s.push('\n'),
                    't' => s.push('\t'),
                    'r' => s.push('\r'),
                    other => {
                        return Err(vec![lx.error(format!("unknown escape `\\{other}`"), line, col)]);
                    }
                }
            }
            Some(c) => {
                s.push(c);
                lx.bump();
            }
        }
    }
}

fn lex_char(lx: &mut Lexer, line: u32, col: u32) -> Result<Tok, Vec<Diagnostic>> {
    lx.bump(); // opening quote
    let c = match lx.bump() {
        Some('\\') => match lx.bump() {
            Some('n') => '\n',
            Some('t') => '\t',
            Some('r') => '\r',
            Some('\\') => '\\',
            Some('\'') => '\'',
            _ => return Err(vec![lx.error("unknown char escape".into(), line, col)]),
        },
        Some('\'') | None => return Err(vec![lx.error("empty char literal".into(), line, col)]),
        Some(c) => c,
    };
    if lx.bump() != Some('\'') {
        return Err(vec![lx.error("unterminated char literal".into(), line, col)]);
    }
    Ok(Tok::Char(c))
}

fn lex_number(lx: &mut Lexer, negative: bool, line: u32, col: u32) -> Result<Tok, Vec<Diagnostic>> {
    let mut text = String::new();
    if negative {
        text.push('-');
    }
    while let Some(c) = lx.peek() {
        if c.is_ascii_digit() {
            text.push(c);
            lx.bump();
        } else {
            break;
        }
    }
    let mut is_double = false;
    if lx.peek() == Some('.') && lx.peek2().is_some_and(|c| c.is_ascii_digit()) {
        is_double = true;
        text.push('.');
        lx.bump();
        while let Some(c) = lx.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                lx.bump();
            } else {
                break;
            }
        }
    }
    if matches!(lx.peek(), Some('e') | Some('E')) {
        is_double = true;
        text.push('e');
        lx.bump();
        if matches!(lx.peek(), Some('+') | Some('-')) {
            text.push(lx.bump().unwrap());
        }
        let mut any = false;
        while let Some(c) = lx.peek() {
            if c.is_ascii_digit() {
                any = true;
                text.push(c);
                lx.bump();
            } else {
                break;
            }
        }
        if !any {
            return Err(vec![lx.error("malformed exponent".into(), line, col)]);
        }
    }
    if is_double {
        text.parse::<f64>()
            .map(Tok::Double)
            .map_err(|_| vec![lx.error(format!("malformed number `{text}`"), line, col)])
    } else {
        text.parse::<i64>()
            .map(Tok::Int)
            .map_err(|_| vec![lx.error(format!("integer out of range `{text}`"), line, col)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, "t").unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn idents_and_punctuation() {
        assert_eq!(
            toks("type Person { SSN: string }"),
            vec![
                Tok::Ident("type".into()),
                Tok::Ident("Person".into()),
                Tok::LBrace,
                Tok::Ident("SSN".into()),
                Tok::Colon,
                Tok::Ident("string".into()),
                Tok::RBrace,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn doc_lines_are_tokens_plain_comments_are_not() {
        assert_eq!(
            toks("/// @entity { x }\n// skipped\n/* also\nskipped */ type"),
            vec![Tok::DocLine("@entity { x }".into()), Tok::Ident("type".into()), Tok::Eof]
        );
    }

    #[test]
    fn numbers_chars_strings() {
        assert_eq!(
            toks(r#"3 3.5 -2 -0.5 'c' "hi\n" 1e3"#),
            vec![
                Tok::Int(3),
                Tok::Double(3.5),
                Tok::Int(-2),
                Tok::Double(-0.5),
                Tok::Char('c'),
                Tok::Str("hi\n".into()),
                Tok::Double(1000.0),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn arrow_vs_negative() {
        assert_eq!(toks("-> -1"), vec![Tok::Arrow, Tok::Int(-1), Tok::Eof]);
    }

    #[test]
    fn spans_are_one_based_and_within_bounds() {
        let tokens = lex("ab cd", "t").unwrap();
        assert_eq!((tokens[0].line, tokens[0].col, tokens[0].end_col), (1, 1, 3));
        assert_eq!((tokens[1].line, tokens[1].col, tokens[1].end_col), (1, 4, 6));
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(lex("\"abc", "t").is_err());
    }
}
