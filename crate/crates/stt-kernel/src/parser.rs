//! Recursive-descent parser.
//!
//! Precedence, loosest to tightest:
//!
//! ```text
//!   e ::= \ b+ → e | (pat… : e)+ → e | eq → e        (arrow layer, right assoc)
//!   eq ::= or [= or] | or [=_{e} or]                 (identity type, non assoc)
//!   or ::= and (∨ and)*
//!   and ::= cmp (∧ cmp)*
//!   cmp ::= prod [≡ prod] | prod [≤ prod]            (tope atoms, non assoc)
//!   prod ::= app (× prod)?                           (cube product, right assoc)
//!   app ::= head (atom | [φ ↦ a , …])*               (application & refinement)
//!   head ::= first atom | second atom | atom
//! ```
//!
//! A parenthesized prefix `(x y : A)` or `((t , s) : I × J)` followed by `→`
//! is a dependent-function binder; otherwise `(e : T)` is an ascription,
//! `(a , b)` a pair and `(e)` grouping. One error per parse call, no recovery.

use crate::ast::*;
use crate::span::Span;
use crate::token::{tokenize, Token, TokenKind};
use std::fmt;
use std::rc::Rc;

/// Syntactic error; reported with code `E-PARSE`.
#[derive(Clone, Debug)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.message, self.span)
    }
}

impl From<crate::token::LexError> for ParseError {
    fn from(e: crate::token::LexError) -> ParseError {
        ParseError { span: e.span, message: e.message }
    }
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    file: Rc<str>,
    toks: Vec<Token>,
    pos: usize,
    /// End-of-input position for error spans.
    eof: Span,
}

impl Parser {
    fn new(file: &str, toks: Vec<Token>) -> Parser {
        let file: Rc<str> = Rc::from(file);
        let eof = toks
            .last()
            .map(|t| {
                Span::new(
                    file.clone(),
                    t.span.end_line,
                    t.span.end_col,
                    t.span.end_line,
                    t.span.end_col,
                )
            })
            .unwrap_or_else(|| Span::new(file.clone(), 1, 1, 1, 1));
        Parser { file, toks, pos: 0, eof }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek_span(&self) -> Span {
        self.toks.get(self.pos).map(|t| t.span.clone()).unwrap_or_else(|| self.eof.clone())
    }

    fn prev_span(&self) -> Span {
        self.toks
            .get(self.pos.saturating_sub(1))
            .map(|t| t.span.clone())
            .unwrap_or_else(|| self.eof.clone())
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: &TokenKind) -> PResult<Span> {
        if self.at(kind) {
            let sp = self.peek_span();
            self.pos += 1;
            Ok(sp)
        } else {
            Err(self.err_expected(&kind.describe()))
        }
    }

    fn err_expected(&self, what: &str) -> ParseError {
        let found = match self.peek() {
            Some(k) => k.describe(),
            None => "end of input".into(),
        };
        ParseError {
            span: self.peek_span(),
            message: format!("expected {}, found {}", what, found),
        }
    }

    fn ident(&mut self) -> PResult<(Name, Span)> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let t = self.bump().unwrap();
                match t.kind {
                    TokenKind::Ident(n) => Ok((n, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err_expected("an identifier")),
        }
    }

    // -- patterns ----------------------------------------------------------

    /// `name`, `_`, or `( pattern )` with commas building pairs.
    fn atomic_pattern(&mut self) -> PResult<Pattern> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let (n, _) = self.ident()?;
                Ok(Pattern::Var(n))
            }
            Some(TokenKind::Underscore) => {
                self.bump();
                Ok(Pattern::Wildcard)
            }
            Some(TokenKind::LParen) => {
                self.bump();
                let p = self.full_pattern()?;
                self.expect(&TokenKind::RParen)?;
                Ok(p)
            }
            _ => Err(self.err_expected("a binder pattern")),
        }
    }

    /// Atomic pattern possibly extended with `, pattern` into a pair
    /// (right-nested).
    fn full_pattern(&mut self) -> PResult<Pattern> {
        let first = self.atomic_pattern()?;
        if self.eat(&TokenKind::Comma) {
            let rest = self.full_pattern()?;
            Ok(Pattern::Pair(Box::new(first), Box::new(rest)))
        } else {
            Ok(first)
        }
    }

    fn at_pattern_start(&self) -> bool {
        matches!(
            self.peek(),
            Some(TokenKind::Ident(_)) | Some(TokenKind::Underscore) | Some(TokenKind::LParen)
        )
    }

    /// Inside an already-consumed `(`: patterns, then `: T` (required when
    /// `annotated`), or a bare pair pattern closing the same parenthesis.
    fn binder_group_body(&mut self, annotated: bool) -> PResult<ParamGroup> {
        let start = self.prev_span();
        let mut pats = vec![self.atomic_pattern()?];
        if self.at(&TokenKind::Comma) && pats.len() == 1 {
            // The group parens were actually pair-pattern parens: `(t , s)`.
            self.bump();
            let rest = self.full_pattern()?;
            let pair = Pattern::Pair(Box::new(pats.pop().unwrap()), Box::new(rest));
            if self.eat(&TokenKind::RParen) {
                if annotated {
                    return Err(ParseError {
                        span: self.prev_span(),
                        message: "parameter group needs a type annotation".into(),
                    });
                }
                let span = start.to(&self.prev_span());
                return Ok(ParamGroup { patterns: vec![pair], ty: hole_expr(&span), span });
            }
            self.expect(&TokenKind::Colon)?;
            let ty = self.expr()?;
            self.expect(&TokenKind::RParen)?;
            let span = start.to(&self.prev_span());
            return Ok(ParamGroup { patterns: vec![pair], ty, span });
        }
        while self.at_pattern_start() {
            pats.push(self.atomic_pattern()?);
        }
        if self.eat(&TokenKind::Colon) {
            let ty = self.expr()?;
            self.expect(&TokenKind::RParen)?;
            let span = start.to(&self.prev_span());
            Ok(ParamGroup { patterns: pats, ty, span })
        } else if !annotated && self.eat(&TokenKind::RParen) {
            let span = start.to(&self.prev_span());
            Ok(ParamGroup { patterns: pats, ty: hole_expr(&span), span })
        } else {
            Err(self.err_expected("':' in parameter group"))
        }
    }

    // -- expressions -------------------------------------------------------

    fn expr(&mut self) -> PResult<Rc<Expr>> {
        self.arrow_expr()
    }

    fn arrow_expr(&mut self) -> PResult<Rc<Expr>> {
        if self.at(&TokenKind::Backslash) {
            return self.lambda_expr();
        }
        if self.at(&TokenKind::LParen) {
            if let Some(pi) = self.try_pi_expr()? {
                return Ok(pi);
            }
        }
        let lhs = self.eq_expr()?;
        if self.eat(&TokenKind::Arrow) {
            let cod = self.arrow_expr()?;
            let span = lhs.span.to(&cod.span);
            Ok(Expr::new(
                ExprKind::Pi { binder: Pattern::Wildcard, domain: lhs, codomain: cod },
                span,
            ))
        } else {
            Ok(lhs)
        }
    }

    /// Speculative parse of `(pats : T) (pats : T)… → B`; `None` rolls back.
    fn try_pi_expr(&mut self) -> PResult<Option<Rc<Expr>>> {
        let save = self.pos;
        let mut groups = Vec::new();
        while self.at(&TokenKind::LParen) {
            self.bump();
            match self.binder_group_body(true) {
                Ok(g) => groups.push(g),
                Err(_) => {
                    self.pos = save;
                    return Ok(None);
                }
            }
        }
        if groups.is_empty() || !self.eat(&TokenKind::Arrow) {
            self.pos = save;
            return Ok(None);
        }
        let cod = self.arrow_expr()?;
        Ok(Some(fold_pi(&groups, cod)))
    }

    fn lambda_expr(&mut self) -> PResult<Rc<Expr>> {
        let start = self.expect(&TokenKind::Backslash)?;
        // Binders: bare names/underscores, or parenthesized groups that may be
        // pair patterns and may carry a type annotation.
        let mut binders: Vec<(Pattern, Option<Rc<Expr>>)> = Vec::new();
        loop {
            match self.peek() {
                Some(TokenKind::Ident(_)) => {
                    let (n, _) = self.ident()?;
                    binders.push((Pattern::Var(n), None));
                }
                Some(TokenKind::Underscore) => {
                    self.bump();
                    binders.push((Pattern::Wildcard, None));
                }
                Some(TokenKind::LParen) => {
                    self.bump();
                    let g = self.binder_group_body(false)?;
                    let ann = match g.ty.kind {
                        ExprKind::Hole => None,
                        _ => Some(g.ty.clone()),
                    };
                    for p in g.patterns {
                        binders.push((p, ann.clone()));
                    }
                }
                _ => break,
            }
        }
        if binders.is_empty() {
            return Err(self.err_expected("a lambda binder"));
        }
        self.expect(&TokenKind::Arrow)?;
        let body = self.arrow_expr()?;
        let span = start.to(&body.span);
        let mut out = body;
        for (pat, dom) in binders.into_iter().rev() {
            out = Expr::new(ExprKind::Lambda { binder: pat, domain: dom, body: out }, span.clone());
        }
        Ok(out)
    }

    fn eq_expr(&mut self) -> PResult<Rc<Expr>> {
        let lhs = self.or_expr()?;
        if self.eat(&TokenKind::IdEq) {
            let ty = if self.at(&TokenKind::Underscore) {
                self.bump();
                self.expect(&TokenKind::LBrace)?;
                let t = self.expr()?;
                self.expect(&TokenKind::RBrace)?;
                Some(t)
            } else {
                None
            };
            let rhs = self.or_expr()?;
            let span = lhs.span.to(&rhs.span);
            Ok(Expr::new(ExprKind::IdType { ty, lhs, rhs }, span))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self) -> PResult<Rc<Expr>> {
        let mut lhs = self.and_expr()?;
        while self.eat(&TokenKind::Vee) {
            let rhs = self.and_expr()?;
            let span = lhs.span.to(&rhs.span);
            lhs = Expr::new(ExprKind::TopeOr(lhs, rhs), span);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Rc<Expr>> {
        let mut lhs = self.cmp_expr()?;
        while self.eat(&TokenKind::Wedge) {
            let rhs = self.cmp_expr()?;
            let span = lhs.span.to(&rhs.span);
            lhs = Expr::new(ExprKind::TopeAnd(lhs, rhs), span);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> PResult<Rc<Expr>> {
        let lhs = self.prod_expr()?;
        if self.eat(&TokenKind::TopeEq) {
            let rhs = self.prod_expr()?;
            let span = lhs.span.to(&rhs.span);
            Ok(Expr::new(ExprKind::TopeEqT(lhs, rhs), span))
        } else if self.eat(&TokenKind::TopeLeq) {
            let rhs = self.prod_expr()?;
            let span = lhs.span.to(&rhs.span);
            Ok(Expr::new(ExprKind::TopeLeq(lhs, rhs), span))
        } else {
            Ok(lhs)
        }
    }

    fn prod_expr(&mut self) -> PResult<Rc<Expr>> {
        let lhs = self.app_expr()?;
        if self.eat(&TokenKind::Times) {
            let rhs = self.prod_expr()?;
            let span = lhs.span.to(&rhs.span);
            Ok(Expr::new(ExprKind::CubeProduct(lhs, rhs), span))
        } else {
            Ok(lhs)
        }
    }

    fn app_expr(&mut self) -> PResult<Rc<Expr>> {
        let mut head = match self.peek() {
            Some(TokenKind::KwFirst) => {
                let sp = self.bump().unwrap().span;
                let arg = self.atom()?;
                let span = sp.to(&arg.span);
                Expr::new(ExprKind::First(arg), span)
            }
            Some(TokenKind::KwSecond) => {
                let sp = self.bump().unwrap().span;
                let arg = self.atom()?;
                let span = sp.to(&arg.span);
                Expr::new(ExprKind::Second(arg), span)
            }
            _ => self.atom()?,
        };
        loop {
            if self.at_arg_start() {
                let arg = self.atom()?;
                let span = head.span.to(&arg.span);
                head = Expr::new(ExprKind::App(head, arg), span);
            } else if self.at(&TokenKind::LBracket) {
                self.bump();
                let constraints = self.maps_to_list(&TokenKind::RBracket)?;
                let end = self.expect(&TokenKind::RBracket)?;
                let span = head.span.to(&end);
                head = Expr::new(ExprKind::Refinement { ty: head, constraints }, span);
            } else {
                break;
            }
        }
        Ok(head)
    }

    /// `φ ↦ a , ψ ↦ b , …` up to (not consuming) the closing token.
    fn maps_to_list(&mut self, close: &TokenKind) -> PResult<Vec<(Rc<Expr>, Rc<Expr>)>> {
        let mut out = Vec::new();
        loop {
            let tope = self.or_expr()?;
            self.expect(&TokenKind::MapsTo)?;
            let value = self.arrow_expr()?;
            out.push((tope, value));
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        if !self.at(close) {
            return Err(self.err_expected(&close.describe()));
        }
        Ok(out)
    }

    fn at_arg_start(&self) -> bool {
        matches!(
            self.peek(),
            Some(TokenKind::LParen)
                | Some(TokenKind::LBrace)
                | Some(TokenKind::Ident(_))
                | Some(TokenKind::KwU)
                | Some(TokenKind::KwCube)
                | Some(TokenKind::KwTope)
                | Some(TokenKind::KwTop)
                | Some(TokenKind::KwBot)
                | Some(TokenKind::CubeUnit)
                | Some(TokenKind::CubeTwo)
                | Some(TokenKind::PointStar)
                | Some(TokenKind::PointZero)
                | Some(TokenKind::PointOne)
                | Some(TokenKind::KwRecOr)
                | Some(TokenKind::KwRecBot)
                | Some(TokenKind::KwIdJ)
                | Some(TokenKind::KwRefl)
                | Some(TokenKind::Question)
        )
    }

    fn atom(&mut self) -> PResult<Rc<Expr>> {
        let span = self.peek_span();
        let kind = match self.peek() {
            Some(TokenKind::KwU) => {
                self.bump();
                ExprKind::Universe
            }
            Some(TokenKind::KwCube) => {
                self.bump();
                ExprKind::UniverseCube
            }
            Some(TokenKind::KwTope) => {
                self.bump();
                ExprKind::UniverseTope
            }
            Some(TokenKind::KwTop) => {
                self.bump();
                ExprKind::TopeTop
            }
            Some(TokenKind::KwBot) => {
                self.bump();
                ExprKind::TopeBottom
            }
            Some(TokenKind::CubeUnit) => {
                self.bump();
                ExprKind::CubeUnit
            }
            Some(TokenKind::CubeTwo) => {
                self.bump();
                ExprKind::Cube2
            }
            Some(TokenKind::PointStar) => {
                self.bump();
                ExprKind::PointStar
            }
            Some(TokenKind::PointZero) => {
                self.bump();
                ExprKind::PointZero
            }
            Some(TokenKind::PointOne) => {
                self.bump();
                ExprKind::PointOne
            }
            Some(TokenKind::KwRecBot) => {
                self.bump();
                ExprKind::RecBot
            }
            Some(TokenKind::Question) => {
                self.bump();
                ExprKind::Hole
            }
            Some(TokenKind::Ident(_)) => {
                let (n, _) = self.ident()?;
                ExprKind::Var(n)
            }
            Some(TokenKind::KwRefl) => {
                self.bump();
                let mut ty = None;
                let mut term = None;
                if self.at(&TokenKind::Underscore) {
                    self.bump();
                    self.expect(&TokenKind::LBrace)?;
                    term = Some(self.expr()?);
                    if self.eat(&TokenKind::Colon) {
                        ty = Some(self.expr()?);
                    }
                    self.expect(&TokenKind::RBrace)?;
                }
                let end = self.prev_span();
                return Ok(Expr::new(ExprKind::Refl { ty, term }, span.to(&end)));
            }
            Some(TokenKind::KwRecOr) => {
                self.bump();
                self.expect(&TokenKind::LParen)?;
                let branches = self.maps_to_list(&TokenKind::RParen)?;
                let end = self.expect(&TokenKind::RParen)?;
                return Ok(Expr::new(ExprKind::RecOr(branches), span.to(&end)));
            }
            Some(TokenKind::KwIdJ) => {
                self.bump();
                self.expect(&TokenKind::LParen)?;
                let mut args = Vec::with_capacity(6);
                for i in 0..6 {
                    if i > 0 {
                        self.expect(&TokenKind::Comma)?;
                    }
                    args.push(self.arrow_expr()?);
                }
                let end = self.expect(&TokenKind::RParen)?;
                let mut it = args.into_iter();
                return Ok(Expr::new(
                    ExprKind::IndPath {
                        ty: it.next().unwrap(),
                        base: it.next().unwrap(),
                        motive: it.next().unwrap(),
                        refl_case: it.next().unwrap(),
                        target: it.next().unwrap(),
                        path: it.next().unwrap(),
                    },
                    span.to(&end),
                ));
            }
            Some(TokenKind::KwSigma) => {
                self.bump();
                self.expect(&TokenKind::LParen)?;
                let g = self.binder_group_body(true)?;
                self.expect(&TokenKind::Comma)?;
                let body = self.arrow_expr()?;
                let full = span.to(&body.span);
                let mut out = body;
                for p in g.patterns.into_iter().rev() {
                    out = Expr::new(
                        ExprKind::Sigma { binder: p, domain: g.ty.clone(), codomain: out },
                        full.clone(),
                    );
                }
                return Ok(out);
            }
            Some(TokenKind::LBrace) => {
                self.bump();
                let binder = self.full_pattern()?;
                self.expect(&TokenKind::Colon)?;
                let cube = self.expr()?;
                self.expect(&TokenKind::Pipe)?;
                let tope = self.expr()?;
                let end = self.expect(&TokenKind::RBrace)?;
                return Ok(Expr::new(ExprKind::Shape { binder, cube, tope }, span.to(&end)));
            }
            Some(TokenKind::LParen) => {
                self.bump();
                let first = self.expr()?;
                if self.eat(&TokenKind::Comma) {
                    // Pair; further commas nest to the right.
                    let mut elems = vec![first];
                    loop {
                        elems.push(self.expr()?);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    let end = self.expect(&TokenKind::RParen)?;
                    let full = span.to(&end);
                    let mut out = elems.pop().unwrap();
                    while let Some(e) = elems.pop() {
                        out = Expr::new(ExprKind::Pair(e, out), full.clone());
                    }
                    return Ok(out);
                }
                if self.eat(&TokenKind::Colon) {
                    let ty = self.expr()?;
                    let end = self.expect(&TokenKind::RParen)?;
                    return Ok(Expr::new(ExprKind::Ascription(first, ty), span.to(&end)));
                }
                self.expect(&TokenKind::RParen)?;
                return Ok(first);
            }
            _ => return Err(self.err_expected("an expression")),
        };
        Ok(Expr::new(kind, span))
    }

    // -- declarations ------------------------------------------------------

    fn uses_clause(&mut self) -> PResult<Vec<Name>> {
        if !self.eat(&TokenKind::KwUses) {
            return Ok(Vec::new());
        }
        self.expect(&TokenKind::LParen)?;
        let mut names = Vec::new();
        loop {
            let (n, _) = self.ident()?;
            names.push(n);
            self.eat(&TokenKind::Comma);
            if self.at(&TokenKind::RParen) {
                break;
            }
        }
        self.expect(&TokenKind::RParen)?;
        Ok(names)
    }

    fn param_groups(&mut self) -> PResult<Vec<ParamGroup>> {
        let mut groups = Vec::new();
        while self.at(&TokenKind::LParen) {
            self.bump();
            groups.push(self.binder_group_body(true)?);
        }
        Ok(groups)
    }

    fn declaration(&mut self) -> PResult<Declaration> {
        match self.peek() {
            Some(TokenKind::HashDef) => {
                self.bump();
                let (name, name_span) = self.ident()?;
                let uses = self.uses_clause()?;
                let params = self.param_groups()?;
                self.expect(&TokenKind::Colon)?;
                let result = self.expr()?;
                self.expect(&TokenKind::ColonEq)?;
                let body = self.expr()?;
                Ok(Declaration::Define { name, name_span, uses, params, result, body })
            }
            Some(TokenKind::HashPostulate) => {
                self.bump();
                let (name, name_span) = self.ident()?;
                let uses = self.uses_clause()?;
                let params = self.param_groups()?;
                self.expect(&TokenKind::Colon)?;
                let result = self.expr()?;
                Ok(Declaration::Postulate { name, name_span, uses, params, result })
            }
            Some(TokenKind::HashSection) => {
                let sp = self.bump().unwrap().span;
                let (name, nsp) = self.ident()?;
                Ok(Declaration::SectionBegin { name, span: sp.to(&nsp) })
            }
            Some(TokenKind::HashEnd) => {
                let sp = self.bump().unwrap().span;
                let (name, nsp) = self.ident()?;
                Ok(Declaration::SectionEnd { name, span: sp.to(&nsp) })
            }
            Some(TokenKind::HashVariable) => {
                let sp = self.bump().unwrap().span;
                let (name, nsp) = self.ident()?;
                self.expect(&TokenKind::Colon)?;
                let ty = self.expr()?;
                let span = sp.to(&ty.span);
                Ok(Declaration::Variables { names: vec![(name, nsp)], ty, span })
            }
            Some(TokenKind::HashVariables) => {
                let sp = self.bump().unwrap().span;
                let mut names = Vec::new();
                while let Some(TokenKind::Ident(_)) = self.peek() {
                    names.push(self.ident()?);
                }
                if names.is_empty() {
                    return Err(self.err_expected("at least one variable name"));
                }
                self.expect(&TokenKind::Colon)?;
                let ty = self.expr()?;
                let span = sp.to(&ty.span);
                Ok(Declaration::Variables { names, ty, span })
            }
            _ => Err(self.err_expected("a declaration directive")),
        }
    }
}

fn hole_expr(span: &Span) -> Rc<Expr> {
    Expr::new(ExprKind::Hole, span.clone())
}

/// Fold parameter groups into nested `Pi`s around `cod`.
pub(crate) fn fold_pi(groups: &[ParamGroup], cod: Rc<Expr>) -> Rc<Expr> {
    let mut out = cod;
    for g in groups.iter().rev() {
        for p in g.patterns.iter().rev() {
            let span = g.span.to(&out.span);
            out = Expr::new(
                ExprKind::Pi { binder: p.clone(), domain: g.ty.clone(), codomain: out },
                span,
            );
        }
    }
    out
}

/// Fold parameter groups into nested annotated `Lambda`s around `body`.
pub(crate) fn fold_lambda(groups: &[ParamGroup], body: Rc<Expr>) -> Rc<Expr> {
    let mut out = body;
    for g in groups.iter().rev() {
        for p in g.patterns.iter().rev() {
            let span = g.span.to(&out.span);
            out = Expr::new(
                ExprKind::Lambda { binder: p.clone(), domain: Some(g.ty.clone()), body: out },
                span,
            );
        }
    }
    out
}

/// Parse a whole source file. The `#lang rzk-1` pragma must precede the first
/// declaration; a file with no declarations may omit it. Section begin/end
/// must balance (names are matched during elaboration).
pub fn parse_module(file: &str, input: &str) -> Result<SourceModule, ParseError> {
    let toks = tokenize(file, input)?;
    let mut p = Parser::new(file, toks);
    let mut language = None;

    if p.at(&TokenKind::HashLang) {
        let sp = p.bump().unwrap().span;
        let (name, nsp) = p.ident()?;
        if name != "rzk-1" {
            return Err(ParseError {
                span: sp.to(&nsp),
                message: format!("unsupported language '{}' (expected 'rzk-1')", name),
            });
        }
        language = Some(name);
    }

    let mut decls = Vec::new();
    let mut depth = 0usize;
    while p.peek().is_some() {
        if language.is_none() {
            return Err(ParseError {
                span: p.peek_span(),
                message: "missing '#lang rzk-1' pragma before the first declaration".into(),
            });
        }
        let d = p.declaration()?;
        match &d {
            Declaration::SectionBegin { .. } => depth += 1,
            Declaration::SectionEnd { span, .. } => {
                if depth == 0 {
                    return Err(ParseError {
                        span: span.clone(),
                        message: "'#end' without a matching '#section'".into(),
                    });
                }
                depth -= 1;
            }
            _ => {}
        }
        decls.push(d);
    }
    if depth > 0 {
        return Err(ParseError {
            span: p.eof.clone(),
            message: format!("{} unclosed '#section' block(s) at end of file", depth),
        });
    }
    Ok(SourceModule { file: file.to_string(), language, decls })
}

/// Parse one standalone expression (used by the CLI).
pub fn parse_expr(file: &str, input: &str) -> Result<Rc<Expr>, ParseError> {
    let toks = tokenize(file, input)?;
    let mut p = Parser::new(file, toks);
    let e = p.expr()?;
    if let Some(k) = p.peek() {
        return Err(ParseError {
            span: p.peek_span(),
            message: format!("unexpected trailing {}", k.describe()),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ExprKind as E;

    fn pe(s: &str) -> Rc<Expr> {
        parse_expr("<test>", s).unwrap()
    }

    #[test]
    fn hom_definition_parses_to_shape_pi_with_refinement() {
        let src = "#lang rzk-1\n\
                   #def hom (A : U) (a : A) (b : A) : U\n\
                   \x20 := (t : Δ¹) → A [t ≡ 0₂ ↦ a , t ≡ 1₂ ↦ b]";
        let m = parse_module("<test>", src).unwrap();
        assert_eq!(m.language.as_deref(), Some("rzk-1"));
        assert_eq!(m.decls.len(), 1);
        match &m.decls[0] {
            Declaration::Define { name, params, result, body, uses, .. } => {
                assert_eq!(name, "hom");
                assert!(uses.is_empty());
                assert_eq!(params.len(), 3);
                assert!(matches!(result.kind, E::Universe));
                match &body.kind {
                    E::Pi { binder, domain, codomain } => {
                        assert_eq!(*binder, Pattern::Var("t".into()));
                        assert!(matches!(domain.kind, E::Var(ref n) if n == "Δ¹"));
                        match &codomain.kind {
                            E::Refinement { ty, constraints } => {
                                assert!(matches!(ty.kind, E::Var(ref n) if n == "A"));
                                assert_eq!(constraints.len(), 2);
                                assert!(matches!(constraints[0].0.kind, E::TopeEqT(..)));
                            }
                            k => panic!("expected refinement codomain, got {:?}", k),
                        }
                    }
                    k => panic!("expected Pi body, got {:?}", k),
                }
            }
            d => panic!("expected #def, got {:?}", d),
        }
    }

    #[test]
    fn uses_clause_and_postulate() {
        let src = "#lang rzk-1\n\
                   #postulate funext uses (A B) (f : A → B) : U";
        let m = parse_module("<test>", src).unwrap();
        match &m.decls[0] {
            Declaration::Postulate { name, uses, params, .. } => {
                assert_eq!(name, "funext");
                assert_eq!(uses, &vec!["A".to_string(), "B".to_string()]);
                assert_eq!(params.len(), 1);
            }
            d => panic!("unexpected {:?}", d),
        }
    }

    #[test]
    fn pair_pattern_binders() {
        let e = pe("((t , s) : Δ²) → A");
        match &e.kind {
            E::Pi { binder, .. } => {
                assert_eq!(binder.arity(), 2);
                assert!(matches!(binder, Pattern::Pair(..)));
            }
            k => panic!("unexpected {:?}", k),
        }
        let l = pe("\\ (t , s) → t");
        assert!(matches!(&l.kind, E::Lambda { binder: Pattern::Pair(..), .. }));
    }

    #[test]
    fn multi_binder_groups_desugar() {
        let e = pe("(x y : A) → B");
        match &e.kind {
            E::Pi { codomain, .. } => assert!(matches!(codomain.kind, E::Pi { .. })),
            k => panic!("unexpected {:?}", k),
        }
        let l = pe("\\ x y → x");
        assert!(matches!(&l.kind, E::Lambda { .. }));
    }

    #[test]
    fn ascription_vs_pi() {
        assert!(matches!(pe("(x : A)").kind, E::Ascription(..)));
        assert!(matches!(pe("(x : A) → B").kind, E::Pi { .. }));
        assert!(matches!(pe("(f x : A)").kind, E::Ascription(..)));
        // Non-dependent arrow.
        match &pe("A → B").kind {
            E::Pi { binder, .. } => assert_eq!(*binder, Pattern::Wildcard),
            k => panic!("unexpected {:?}", k),
        }
    }

    #[test]
    fn sigma_pairs_and_projections() {
        let e = pe("Σ (x : A) , B x");
        assert!(matches!(e.kind, E::Sigma { .. }));
        assert!(matches!(pe("(a , b)").kind, E::Pair(..)));
        assert!(matches!(pe("(a , b , c)").kind, E::Pair(..)));
        assert!(matches!(pe("first (second p)").kind, E::First(..)));
        // `first` projects the next atom; the result can be applied.
        assert!(matches!(pe("first f x").kind, E::App(..)));
    }

    #[test]
    fn identity_and_tope_operators() {
        assert!(matches!(pe("a = b").kind, E::IdType { ty: None, .. }));
        assert!(matches!(pe("a =_{A} b").kind, E::IdType { ty: Some(_), .. }));
        assert!(matches!(pe("t ≡ 0₂ ∨ t ≡ 1₂").kind, E::TopeOr(..)));
        assert!(matches!(pe("s ≤ t ∧ ⊤").kind, E::TopeAnd(..)));
        // `=` binds looser than the tope connectives, `→` looser still.
        assert!(matches!(pe("f = g → C").kind, E::Pi { .. }));
        assert!(matches!(pe("{t : 2 | t ≡ 0₂}").kind, E::Shape { .. }));
        assert!(matches!(pe("2 × 2").kind, E::CubeProduct(..)));
    }

    #[test]
    fn refl_and_idj_forms() {
        assert!(matches!(pe("refl").kind, E::Refl { ty: None, term: None }));
        assert!(matches!(pe("refl_{a}").kind, E::Refl { ty: None, term: Some(_) }));
        assert!(matches!(pe("refl_{a : A}").kind, E::Refl { ty: Some(_), term: Some(_) }));
        assert!(matches!(
            pe("idJ (A , a , \\ x p → C , d , b , q)").kind,
            E::IndPath { .. }
        ));
        assert!(matches!(pe("recOR (φ ↦ a , ψ ↦ b)").kind, E::RecOr(..)));
        assert!(matches!(pe("C a refl").kind, E::App(..)));
    }

    #[test]
    fn module_pragma_required_before_declarations() {
        assert!(parse_module("<t>", "").unwrap().decls.is_empty());
        assert!(parse_module("<t>", "#def x : U := U").is_err());
        assert!(parse_module("<t>", "#lang rzk-2\n#def x : U := U").is_err());
    }

    #[test]
    fn unbalanced_sections_are_parse_errors() {
        assert!(parse_module("<t>", "#lang rzk-1\n#section s").is_err());
        assert!(parse_module("<t>", "#lang rzk-1\n#end s").is_err());
        // Name mismatch is *not* a parse error (caught during elaboration).
        assert!(parse_module("<t>", "#lang rzk-1\n#section a\n#end b").is_ok());
    }

    #[test]
    fn trailing_junk_rejected() {
        assert!(parse_expr("<t>", "a b )").is_err());
        assert!(parse_expr("<t>", "").is_err());
    }
}
