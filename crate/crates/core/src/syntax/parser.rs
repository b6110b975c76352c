use std::collections::HashMap;

use thiserror::Error;

use super::ast::*;
use super::lexer::{Checkpoint, LexError, Lexer, Pos, Token, TokenKind};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{pos}: expected {expected}, found {found}")]
    Unexpected {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("{pos}: unsupported operator {op} (only prefix, input, guard, external choice and SKIP are supported)")]
    Unsupported { pos: Pos, op: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lex(e) => e.pos,
            ParseError::Unexpected { pos, .. } | ParseError::Unsupported { pos, .. } => *pos,
        }
    }
}

type PResult<T> = Result<T, ParseError>;

/// Parses a specification file. The result still contains unresolved
/// names; see [`crate::syntax::validate_spec`].
pub fn parse_spec(source: &str) -> PResult<Spec> {
    let mut p = Parser::new(source)?;
    p.spec()
}

/// Parses a process expression on its own, e.g. `a -> b -> SKIP`.
pub fn parse_process(source: &str) -> PResult<ProcessExpr> {
    let mut p = Parser::new(source)?;
    let e = p.process()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses an expression on its own, e.g. `diff({0..4}, {wp})`.
pub fn parse_expr(source: &str) -> PResult<Expr> {
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// An entry point reference such as `MAIN` or `ROVER({0..4}, Green)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryRef {
    pub name: Name,
    pub args: Vec<Expr>,
}

pub fn parse_entry(source: &str) -> PResult<EntryRef> {
    let mut p = Parser::new(source)?;
    let name = p.ident("a process name")?;
    let args = if p.at(&TokenKind::LParen) {
        p.args()?
    } else {
        Vec::new()
    };
    p.expect_eof()?;
    Ok(EntryRef { name, args })
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Token,
}

impl<'a> Parser<'a> {
    fn new(source: &'a str) -> PResult<Parser<'a>> {
        let mut lex = Lexer::new(source);
        let tok = lex.next_token()?;
        Ok(Parser { lex, tok })
    }

    fn bump(&mut self) -> PResult<Token> {
        let next = self.lex.next_token()?;
        Ok(std::mem::replace(&mut self.tok, next))
    }

    fn save(&self) -> (Checkpoint, Token) {
        (self.lex.checkpoint(), self.tok.clone())
    }

    fn restore(&mut self, (cp, tok): (Checkpoint, Token)) {
        self.lex.restore(cp);
        self.tok = tok;
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.tok.kind == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> PResult<bool> {
        if self.at(kind) {
            self.bump()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        if let TokenKind::Unsupported(op) = &self.tok.kind {
            return Err(ParseError::Unsupported {
                pos: self.tok.pos,
                op: format!("`{op}`"),
            });
        }
        Err(ParseError::Unexpected {
            pos: self.tok.pos,
            expected: expected.to_string(),
            found: self.tok.kind.to_string(),
        })
    }

    fn expect(&mut self, kind: &TokenKind) -> PResult<()> {
        if self.eat(kind)? {
            Ok(())
        } else {
            self.error(&kind.to_string())
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if self.at(&TokenKind::Eof) {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Name> {
        if let TokenKind::Ident(n) = &self.tok.kind {
            let n = n.clone();
            self.bump()?;
            Ok(n)
        } else {
            self.error(what)
        }
    }

    fn spec(&mut self) -> PResult<Spec> {
        let mut spec = Spec::default();
        let mut proc_index: HashMap<Name, usize> = HashMap::new();
        loop {
            match &self.tok.kind {
                TokenKind::Eof => return Ok(spec),
                TokenKind::Datatype => spec.datatypes.push(self.datatype()?),
                TokenKind::Nametype => spec.named_sets.push(self.nametype()?),
                TokenKind::Channel => spec.channels.extend(self.channels()?),
                TokenKind::Ident(_) => {
                    let (name, clause) = self.definition()?;
                    match proc_index.get(&name) {
                        Some(&i) => spec.processes[i].clauses.push(clause),
                        None => {
                            proc_index.insert(name.clone(), spec.processes.len());
                            spec.processes.push(ProcessDef {
                                name,
                                clauses: vec![clause],
                            });
                        }
                    }
                }
                _ => return self.error("a declaration"),
            }
        }
    }

    fn datatype(&mut self) -> PResult<DatatypeDecl> {
        self.expect(&TokenKind::Datatype)?;
        let name = self.ident("a datatype name")?;
        self.expect(&TokenKind::Assign)?;
        let mut constructors = vec![self.ident("a constructor")?];
        while self.eat(&TokenKind::Bar)? {
            constructors.push(self.ident("a constructor")?);
        }
        if self.at(&TokenKind::Dot) {
            return Err(ParseError::Unsupported {
                pos: self.tok.pos,
                op: "constructor fields".into(),
            });
        }
        Ok(DatatypeDecl { name, constructors })
    }

    fn nametype(&mut self) -> PResult<NamedSetDecl> {
        self.expect(&TokenKind::Nametype)?;
        let name = self.ident("a set name")?;
        self.expect(&TokenKind::Assign)?;
        let value = self.expr()?;
        Ok(NamedSetDecl { name, value })
    }

    fn channels(&mut self) -> PResult<Vec<ChannelDecl>> {
        self.expect(&TokenKind::Channel)?;
        let mut names = vec![self.ident("a channel name")?];
        while self.eat(&TokenKind::Comma)? {
            names.push(self.ident("a channel name")?);
        }
        let mut param_types = Vec::new();
        if self.eat(&TokenKind::Colon)? {
            param_types.push(self.type_ref()?);
            while self.eat(&TokenKind::Dot)? {
                param_types.push(self.type_ref()?);
            }
        }
        Ok(names
            .into_iter()
            .map(|name| ChannelDecl {
                name,
                param_types: param_types.clone(),
            })
            .collect())
    }

    fn type_ref(&mut self) -> PResult<TypeRef> {
        match &self.tok.kind {
            TokenKind::Ident(n) => {
                let n = n.clone();
                self.bump()?;
                Ok(TypeRef::Named(n))
            }
            TokenKind::LBrace | TokenKind::LParen => Ok(TypeRef::Inline(self.primary()?)),
            _ => self.error("a type"),
        }
    }

    fn definition(&mut self) -> PResult<(Name, Clause)> {
        let name = self.ident("a process name")?;
        let mut patterns = Vec::new();
        if self.eat(&TokenKind::LParen)? {
            if !self.at(&TokenKind::RParen) {
                patterns.push(self.pattern()?);
                while self.eat(&TokenKind::Comma)? {
                    patterns.push(self.pattern()?);
                }
            }
            self.expect(&TokenKind::RParen)?;
        }
        self.expect(&TokenKind::Assign)?;
        let body = self.process()?;
        Ok((name, Clause { patterns, body }))
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        let pat = match &self.tok.kind {
            TokenKind::Underscore => Pattern::Wildcard,
            TokenKind::Ident(n) => Pattern::Name(n.clone()),
            TokenKind::Int(i) => Pattern::Lit(Value::Int(*i)),
            TokenKind::True => Pattern::Lit(Value::Bool(true)),
            TokenKind::False => Pattern::Lit(Value::Bool(false)),
            TokenKind::LBrace => {
                self.bump()?;
                let mut items = std::collections::BTreeSet::new();
                if !self.at(&TokenKind::RBrace) {
                    loop {
                        match self.tok.kind {
                            TokenKind::Int(i) => {
                                self.bump()?;
                                items.insert(Value::Int(i));
                            }
                            _ => return self.error("an integer in a set pattern"),
                        }
                        if !self.eat(&TokenKind::Comma)? {
                            break;
                        }
                    }
                }
                self.expect(&TokenKind::RBrace)?;
                return Ok(Pattern::Lit(Value::Set(items)));
            }
            _ => return self.error("a pattern"),
        };
        self.bump()?;
        Ok(pat)
    }

    /// `P [] Q [] ...`
    fn process(&mut self) -> PResult<ProcessExpr> {
        let first = self.guarded()?;
        if !self.at(&TokenKind::Choice) {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.eat(&TokenKind::Choice)? {
            operands.push(self.guarded()?);
        }
        Ok(ProcessExpr::choice(operands))
    }

    fn starts_expr(&self) -> bool {
        matches!(
            self.tok.kind,
            TokenKind::Ident(_)
                | TokenKind::Int(_)
                | TokenKind::LParen
                | TokenKind::LBrace
                | TokenKind::True
                | TokenKind::False
                | TokenKind::Not
        )
    }

    /// `g & P`, or a unit.
    fn guarded(&mut self) -> PResult<ProcessExpr> {
        if self.starts_expr() {
            let saved = self.save();
            if let Ok(cond) = self.expr() {
                if self.eat(&TokenKind::Amp)? {
                    let body = self.guarded()?;
                    return Ok(ProcessExpr::guard(cond, body));
                }
            }
            self.restore(saved);
        }
        self.unit()
    }

    fn unit(&mut self) -> PResult<ProcessExpr> {
        match &self.tok.kind {
            TokenKind::Skip => {
                self.bump()?;
                Ok(ProcessExpr::Skip)
            }
            TokenKind::LParen => {
                self.bump()?;
                let p = self.process()?;
                self.expect(&TokenKind::RParen)?;
                Ok(p)
            }
            TokenKind::Ident(name) => {
                let name = name.clone();
                self.bump()?;
                if self.at(&TokenKind::LParen) {
                    let args = self.args()?;
                    return Ok(ProcessExpr::Call(name, args));
                }
                let items = self.event_items()?;
                if self.eat(&TokenKind::Arrow)? {
                    let cont = self.guarded()?;
                    Ok(ProcessExpr::prefix(
                        EventExpr {
                            channel: name,
                            items,
                        },
                        cont,
                    ))
                } else if items.is_empty() {
                    Ok(ProcessExpr::Call(name, Vec::new()))
                } else {
                    self.error("`->`")
                }
            }
            _ => self.error("a process"),
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(&TokenKind::LParen)?;
        let mut args = Vec::new();
        if !self.at(&TokenKind::RParen) {
            args.push(self.expr()?);
            while self.eat(&TokenKind::Comma)? {
                args.push(self.expr()?);
            }
        }
        self.expect(&TokenKind::RParen)?;
        Ok(args)
    }

    fn event_items(&mut self) -> PResult<Vec<EventItem>> {
        let mut items = Vec::new();
        loop {
            match self.tok.kind {
                TokenKind::Dot | TokenKind::Bang => {
                    self.bump()?;
                    items.push(EventItem::Dot(self.primary()?));
                }
                TokenKind::Question => {
                    self.bump()?;
                    let var = self.ident("an input variable")?;
                    if self.eat(&TokenKind::Colon)? {
                        let set = self.primary()?;
                        items.push(EventItem::InputIn(var, set));
                    } else {
                        items.push(EventItem::Input(var));
                    }
                }
                _ => return Ok(items),
            }
        }
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat(&TokenKind::Or)? {
            let rhs = self.and_expr()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat(&TokenKind::And)? {
            let rhs = self.not_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat(&TokenKind::Not)? {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        let lhs = self.primary()?;
        if self.eat(&TokenKind::EqEq)? {
            Ok(Expr::Eq(Box::new(lhs), Box::new(self.primary()?)))
        } else if self.eat(&TokenKind::NotEq)? {
            Ok(Expr::Ne(Box::new(lhs), Box::new(self.primary()?)))
        } else {
            Ok(lhs)
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        match &self.tok.kind {
            TokenKind::Int(i) => {
                let v = Value::Int(*i);
                self.bump()?;
                Ok(Expr::Lit(v))
            }
            TokenKind::True => {
                self.bump()?;
                Ok(Expr::Lit(Value::Bool(true)))
            }
            TokenKind::False => {
                self.bump()?;
                Ok(Expr::Lit(Value::Bool(false)))
            }
            TokenKind::LParen => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(&TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::LBrace => self.set_literal(),
            TokenKind::Ident(n) => {
                let n = n.clone();
                let pos = self.tok.pos;
                self.bump()?;
                if !self.at(&TokenKind::LParen) {
                    return Ok(Expr::Name(n));
                }
                let ctor: fn(Box<Expr>, Box<Expr>) -> Expr = match &*n {
                    "member" => Expr::Member,
                    "diff" => Expr::Diff,
                    "union" => Expr::Union,
                    _ => {
                        return Err(ParseError::Unexpected {
                            pos,
                            expected: "member, diff or union".into(),
                            found: format!("call to `{n}`"),
                        })
                    }
                };
                self.expect(&TokenKind::LParen)?;
                let a = self.expr()?;
                self.expect(&TokenKind::Comma)?;
                let b = self.expr()?;
                self.expect(&TokenKind::RParen)?;
                Ok(ctor(Box::new(a), Box::new(b)))
            }
            _ => self.error("an expression"),
        }
    }

    fn set_literal(&mut self) -> PResult<Expr> {
        self.expect(&TokenKind::LBrace)?;
        if self.eat(&TokenKind::RBrace)? {
            return Ok(Expr::SetEnum(Vec::new()));
        }
        let first = self.expr()?;
        if self.eat(&TokenKind::DotDot)? {
            let hi = self.expr()?;
            self.expect(&TokenKind::RBrace)?;
            return Ok(Expr::Range(Box::new(first), Box::new(hi)));
        }
        let mut items = vec![first];
        while self.eat(&TokenKind::Comma)? {
            items.push(self.expr()?);
        }
        self.expect(&TokenKind::RBrace)?;
        Ok(Expr::SetEnum(items))
    }
}
