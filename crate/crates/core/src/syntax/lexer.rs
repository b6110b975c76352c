use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::ast::Name;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: unexpected character {found:?}")]
pub struct LexError {
    pub pos: Pos,
    pub found: char,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(Name),
    Int(i64),
    Skip,
    Channel,
    Datatype,
    Nametype,
    True,
    False,
    And,
    Or,
    Not,
    /// `->`
    Arrow,
    /// `[]`
    Choice,
    Amp,
    Question,
    Bang,
    Dot,
    DotDot,
    Comma,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    /// `=`
    Assign,
    EqEq,
    NotEq,
    Bar,
    Underscore,
    /// CSP_M syntax that lexes fine but lies outside the supported subset.
    Unsupported(&'static str),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(n) => return write!(f, "identifier `{n}`"),
            TokenKind::Int(i) => return write!(f, "integer `{i}`"),
            TokenKind::Unsupported(op) => return write!(f, "`{op}`"),
            TokenKind::Skip => "`SKIP`",
            TokenKind::Channel => "`channel`",
            TokenKind::Datatype => "`datatype`",
            TokenKind::Nametype => "`nametype`",
            TokenKind::True => "`true`",
            TokenKind::False => "`false`",
            TokenKind::And => "`and`",
            TokenKind::Or => "`or`",
            TokenKind::Not => "`not`",
            TokenKind::Arrow => "`->`",
            TokenKind::Choice => "`[]`",
            TokenKind::Amp => "`&`",
            TokenKind::Question => "`?`",
            TokenKind::Bang => "`!`",
            TokenKind::Dot => "`.`",
            TokenKind::DotDot => "`..`",
            TokenKind::Comma => "`,`",
            TokenKind::Colon => "`:`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::Assign => "`=`",
            TokenKind::EqEq => "`==`",
            TokenKind::NotEq => "`!=`",
            TokenKind::Bar => "`|`",
            TokenKind::Underscore => "`_`",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

/// Lexes the whole input eagerly.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer::new(source);
    let mut out = Vec::new();
    loop {
        let tok = lexer.next_token()?;
        if tok.kind == TokenKind::Eof {
            return Ok(out);
        }
        out.push(tok);
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Checkpoint {
    offset: usize,
    pos: Pos,
}

/// On-demand lexer. Identifiers are interned so that repeated names share
/// one allocation.
pub(crate) struct Lexer<'a> {
    src: &'a str,
    offset: usize,
    pos: Pos,
    names: HashMap<&'a str, Name>,
}

// Longest spellings first so that prefixes do not win.
const SYMBOLS: &[(&str, TokenKind)] = &[
    ("|~|", TokenKind::Unsupported("|~|")),
    ("|||", TokenKind::Unsupported("|||")),
    ("->", TokenKind::Arrow),
    ("[]", TokenKind::Choice),
    ("[|", TokenKind::Unsupported("[|")),
    ("|]", TokenKind::Unsupported("|]")),
    ("[[", TokenKind::Unsupported("[[")),
    ("]]", TokenKind::Unsupported("]]")),
    ("[>", TokenKind::Unsupported("[>")),
    ("/\\", TokenKind::Unsupported("/\\")),
    ("||", TokenKind::Unsupported("||")),
    ("..", TokenKind::DotDot),
    ("==", TokenKind::EqEq),
    ("!=", TokenKind::NotEq),
    ("\\", TokenKind::Unsupported("\\")),
    (";", TokenKind::Unsupported(";")),
    ("&", TokenKind::Amp),
    ("?", TokenKind::Question),
    ("!", TokenKind::Bang),
    (".", TokenKind::Dot),
    (",", TokenKind::Comma),
    (":", TokenKind::Colon),
    ("(", TokenKind::LParen),
    (")", TokenKind::RParen),
    ("{", TokenKind::LBrace),
    ("}", TokenKind::RBrace),
    ("=", TokenKind::Assign),
    ("|", TokenKind::Bar),
];

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "SKIP" => TokenKind::Skip,
        "channel" => TokenKind::Channel,
        "datatype" => TokenKind::Datatype,
        "nametype" => TokenKind::Nametype,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        "and" => TokenKind::And,
        "or" => TokenKind::Or,
        "not" => TokenKind::Not,
        "_" => TokenKind::Underscore,
        "STOP" => TokenKind::Unsupported("STOP"),
        "assert" => TokenKind::Unsupported("assert"),
        "let" => TokenKind::Unsupported("let"),
        "if" => TokenKind::Unsupported("if"),
        _ => return None,
    })
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src,
            offset: 0,
            pos: Pos { line: 1, col: 1 },
            names: HashMap::new(),
        }
    }

    pub(crate) fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            offset: self.offset,
            pos: self.pos,
        }
    }

    pub(crate) fn restore(&mut self, cp: Checkpoint) {
        self.offset = cp.offset;
        self.pos = cp.pos;
    }

    pub(crate) fn intern(&mut self, s: &'a str) -> Name {
        self.names.entry(s).or_insert_with(|| Name::from(s)).clone()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn advance(&mut self, bytes: usize) {
        for c in self.src[self.offset..self.offset + bytes].chars() {
            if c == '\n' {
                self.pos.line += 1;
                self.pos.col = 1;
            } else {
                self.pos.col += 1;
            }
        }
        self.offset += bytes;
    }

    fn skip_trivia(&mut self) {
        loop {
            let rest = self.rest();
            let ws = rest.len() - rest.trim_start().len();
            if ws > 0 {
                self.advance(ws);
                continue;
            }
            if rest.starts_with("--") {
                let len = rest.find('\n').unwrap_or(rest.len());
                self.advance(len);
                continue;
            }
            return;
        }
    }

    pub(crate) fn next_token(&mut self) -> Result<Token, LexError> {
        self.skip_trivia();
        let pos = self.pos;
        let rest = self.rest();
        let Some(c) = rest.chars().next() else {
            return Ok(Token {
                kind: TokenKind::Eof,
                pos,
            });
        };

        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
                .unwrap_or(rest.len());
            let word = &rest[..len];
            self.advance(len);
            let kind = keyword(word).unwrap_or_else(|| TokenKind::Ident(self.intern(word)));
            return Ok(Token { kind, pos });
        }

        if c.is_ascii_digit() {
            let len = rest
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(rest.len());
            let value = rest[..len].parse::<i64>().map_err(|_| LexError { pos, found: c })?;
            self.advance(len);
            return Ok(Token {
                kind: TokenKind::Int(value),
                pos,
            });
        }

        for (spelling, kind) in SYMBOLS {
            if rest.starts_with(spelling) {
                self.advance(spelling.len());
                return Ok(Token {
                    kind: kind.clone(),
                    pos,
                });
            }
        }
        Err(LexError { pos, found: c })
    }
}
