//! Tokenizer for the surface language.
//!
//! Unicode operator forms and their fixed ASCII aliases lex to the same token:
//! `->` → `→`, `|->` → `↦`, `===` → `≡`, `<=` → `≤`, `/\` → `∧`, `\/` → `∨`,
//! `TOP`/`BOT` → `⊤`/`⊥`, `Sigma` → `Σ`, `*_1`/`0_2`/`1_2` → `*₁`/`0₂`/`1₂`,
//! `*` → `×`. Identifiers may contain `-`, `′`, digits and Unicode letters
//! (`Δ¹`, `is-pre-∞-category`); a `-` continues an identifier only when the
//! next character could, so binary operators need surrounding whitespace.
//! Comments run from `--` to end of line.

use crate::span::Span;
use std::fmt;
use std::rc::Rc;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TokenKind {
    // Punctuation.
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    ColonEq,
    Pipe,
    Question,
    Underscore,
    Backslash,
    // Operators.
    Arrow,    // →
    MapsTo,   // ↦
    Times,    // × (cube product)
    Wedge,    // ∧
    Vee,      // ∨
    TopeEq,   // ≡
    TopeLeq,  // ≤
    IdEq,     // = (identity type)
    // Keywords and constants.
    KwU,
    KwCube,
    KwTope,
    KwTop,    // ⊤
    KwBot,    // ⊥
    KwSigma,  // Σ
    KwRecOr,
    KwRecBot,
    KwIdJ,
    KwRefl,
    KwFirst,
    KwSecond,
    KwUses,
    CubeUnit,  // 1
    CubeTwo,   // 2
    PointStar, // *₁
    PointZero, // 0₂
    PointOne,  // 1₂
    // Directives.
    HashLang,
    HashDef,
    HashPostulate,
    HashSection,
    HashEnd,
    HashVariable,
    HashVariables,
    Ident(String),
}

impl TokenKind {
    /// Surface rendering used in "expected X, found Y" messages.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::LBracket => "'['".into(),
            TokenKind::RBracket => "']'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Colon => "':'".into(),
            TokenKind::ColonEq => "':='".into(),
            TokenKind::Pipe => "'|'".into(),
            TokenKind::Question => "'?'".into(),
            TokenKind::Underscore => "'_'".into(),
            TokenKind::Backslash => "'\\'".into(),
            TokenKind::Arrow => "'→'".into(),
            TokenKind::MapsTo => "'↦'".into(),
            TokenKind::Times => "'×'".into(),
            TokenKind::Wedge => "'∧'".into(),
            TokenKind::Vee => "'∨'".into(),
            TokenKind::TopeEq => "'≡'".into(),
            TokenKind::TopeLeq => "'≤'".into(),
            TokenKind::IdEq => "'='".into(),
            TokenKind::KwU => "'U'".into(),
            TokenKind::KwCube => "'CUBE'".into(),
            TokenKind::KwTope => "'TOPE'".into(),
            TokenKind::KwTop => "'⊤'".into(),
            TokenKind::KwBot => "'⊥'".into(),
            TokenKind::KwSigma => "'Σ'".into(),
            TokenKind::KwRecOr => "'recOR'".into(),
            TokenKind::KwRecBot => "'recBOT'".into(),
            TokenKind::KwIdJ => "'idJ'".into(),
            TokenKind::KwRefl => "'refl'".into(),
            TokenKind::KwFirst => "'first'".into(),
            TokenKind::KwSecond => "'second'".into(),
            TokenKind::KwUses => "'uses'".into(),
            TokenKind::CubeUnit => "'1'".into(),
            TokenKind::CubeTwo => "'2'".into(),
            TokenKind::PointStar => "'*₁'".into(),
            TokenKind::PointZero => "'0₂'".into(),
            TokenKind::PointOne => "'1₂'".into(),
            TokenKind::HashLang => "'#lang'".into(),
            TokenKind::HashDef => "'#def'".into(),
            TokenKind::HashPostulate => "'#postulate'".into(),
            TokenKind::HashSection => "'#section'".into(),
            TokenKind::HashEnd => "'#end'".into(),
            TokenKind::HashVariable => "'#variable'".into(),
            TokenKind::HashVariables => "'#variables'".into(),
            TokenKind::Ident(s) => format!("identifier '{}'", s),
        }
    }

    pub fn is_directive(&self) -> bool {
        matches!(
            self,
            TokenKind::HashLang
                | TokenKind::HashDef
                | TokenKind::HashPostulate
                | TokenKind::HashSection
                | TokenKind::HashEnd
                | TokenKind::HashVariable
                | TokenKind::HashVariables
        )
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

/// Lexical error; reported with code `E-PARSE`.
#[derive(Clone, Debug)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.message, self.span)
    }
}

/// Characters allowed to start an identifier.
fn ident_start(c: char) -> bool {
    (c.is_alphabetic() && c != 'Σ') || c == '∂' || c == '∞'
}

/// Characters that unconditionally continue an identifier.
fn ident_continue(c: char) -> bool {
    (c.is_alphanumeric() && c != 'Σ') || c == '∂' || c == '∞' || c == '′' || c == '\''
}

struct Scanner {
    file: Rc<str>,
    chars: Vec<char>,
    idx: usize,
    line: u32,
    col: u32,
}

impl Scanner {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.idx + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn span_from(&self, start: (u32, u32)) -> Span {
        Span::new(self.file.clone(), start.0, start.1, self.line, self.col)
    }

    fn error(&self, start: (u32, u32), message: impl Into<String>) -> LexError {
        LexError { span: self.span_from(start), message: message.into() }
    }
}

fn keyword(name: &str) -> Option<TokenKind> {
    Some(match name {
        "U" => TokenKind::KwU,
        "CUBE" => TokenKind::KwCube,
        "TOPE" => TokenKind::KwTope,
        "TOP" => TokenKind::KwTop,
        "BOT" => TokenKind::KwBot,
        "Sigma" => TokenKind::KwSigma,
        "recOR" => TokenKind::KwRecOr,
        "recBOT" => TokenKind::KwRecBot,
        "idJ" => TokenKind::KwIdJ,
        "refl" => TokenKind::KwRefl,
        "first" => TokenKind::KwFirst,
        "second" => TokenKind::KwSecond,
        "uses" => TokenKind::KwUses,
        _ => return None,
    })
}

fn directive(name: &str) -> Option<TokenKind> {
    Some(match name {
        "lang" => TokenKind::HashLang,
        "def" => TokenKind::HashDef,
        "postulate" => TokenKind::HashPostulate,
        "section" => TokenKind::HashSection,
        "end" => TokenKind::HashEnd,
        "variable" => TokenKind::HashVariable,
        "variables" => TokenKind::HashVariables,
        _ => return None,
    })
}

/// Tokenize `input` (UTF-8 text of one file). `file` is used for spans only.
pub fn tokenize(file: &str, input: &str) -> Result<Vec<Token>, LexError> {
    let mut s = Scanner {
        file: Rc::from(file),
        chars: input.chars().collect(),
        idx: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();

    loop {
        // Skip whitespace and comments.
        loop {
            match s.peek() {
                Some(c) if c == ' ' || c == '\t' || c == '\n' || c == '\r' => {
                    s.bump();
                }
                Some('-') if s.peek_at(1) == Some('-') => {
                    while let Some(c) = s.peek() {
                        if c == '\n' {
                            break;
                        }
                        s.bump();
                    }
                }
                _ => break,
            }
        }
        let start = s.pos();
        let c = match s.peek() {
            None => break,
            Some(c) => c,
        };

        let kind = match c {
            '(' => { s.bump(); TokenKind::LParen }
            ')' => { s.bump(); TokenKind::RParen }
            '{' => { s.bump(); TokenKind::LBrace }
            '}' => { s.bump(); TokenKind::RBrace }
            '[' => { s.bump(); TokenKind::LBracket }
            ']' => { s.bump(); TokenKind::RBracket }
            ',' => { s.bump(); TokenKind::Comma }
            '?' => { s.bump(); TokenKind::Question }
            '→' => { s.bump(); TokenKind::Arrow }
            '↦' => { s.bump(); TokenKind::MapsTo }
            '×' => { s.bump(); TokenKind::Times }
            '∧' => { s.bump(); TokenKind::Wedge }
            '∨' => { s.bump(); TokenKind::Vee }
            '≡' => { s.bump(); TokenKind::TopeEq }
            '≤' => { s.bump(); TokenKind::TopeLeq }
            '⊤' => { s.bump(); TokenKind::KwTop }
            '⊥' => { s.bump(); TokenKind::KwBot }
            'Σ' => { s.bump(); TokenKind::KwSigma }
            ':' => {
                s.bump();
                if s.peek() == Some('=') {
                    s.bump();
                    TokenKind::ColonEq
                } else {
                    TokenKind::Colon
                }
            }
            '|' => {
                s.bump();
                if s.peek() == Some('-') && s.peek_at(1) == Some('>') {
                    s.bump();
                    s.bump();
                    TokenKind::MapsTo
                } else {
                    TokenKind::Pipe
                }
            }
            '-' => {
                s.bump();
                if s.peek() == Some('>') {
                    s.bump();
                    TokenKind::Arrow
                } else {
                    return Err(s.error(start, "stray '-' (identifiers may contain '-', but binary operators need whitespace)"));
                }
            }
            '/' => {
                s.bump();
                if s.peek() == Some('\\') {
                    s.bump();
                    TokenKind::Wedge
                } else {
                    return Err(s.error(start, "stray '/' (did you mean '/\\'?)"));
                }
            }
            '\\' => {
                s.bump();
                if s.peek() == Some('/') {
                    s.bump();
                    TokenKind::Vee
                } else {
                    TokenKind::Backslash
                }
            }
            '<' => {
                s.bump();
                if s.peek() == Some('=') {
                    s.bump();
                    TokenKind::TopeLeq
                } else {
                    return Err(s.error(start, "stray '<' (did you mean '<='?)"));
                }
            }
            '=' => {
                let mut n = 0;
                while s.peek() == Some('=') {
                    s.bump();
                    n += 1;
                }
                match n {
                    1 => TokenKind::IdEq,
                    3 => TokenKind::TopeEq,
                    _ => return Err(s.error(start, "expected '=' or '==='")),
                }
            }
            '*' => {
                s.bump();
                if s.peek() == Some('₁') {
                    s.bump();
                    TokenKind::PointStar
                } else if s.peek() == Some('_') && s.peek_at(1) == Some('1') {
                    s.bump();
                    s.bump();
                    TokenKind::PointStar
                } else {
                    TokenKind::Times
                }
            }
            '0' => {
                s.bump();
                if s.peek() == Some('₂') {
                    s.bump();
                    TokenKind::PointZero
                } else if s.peek() == Some('_') && s.peek_at(1) == Some('2') {
                    s.bump();
                    s.bump();
                    TokenKind::PointZero
                } else {
                    return Err(s.error(start, "bare '0' (the interval endpoints are '0₂' and '1₂')"));
                }
            }
            '1' => {
                s.bump();
                if s.peek() == Some('₂') {
                    s.bump();
                    TokenKind::PointOne
                } else if s.peek() == Some('_') && s.peek_at(1) == Some('2') {
                    s.bump();
                    s.bump();
                    TokenKind::PointOne
                } else {
                    TokenKind::CubeUnit
                }
            }
            '2' => {
                s.bump();
                TokenKind::CubeTwo
            }
            '_' => {
                s.bump();
                TokenKind::Underscore
            }
            '#' => {
                s.bump();
                let mut name = String::new();
                while let Some(c) = s.peek() {
                    if c.is_ascii_alphabetic() {
                        name.push(c);
                        s.bump();
                    } else {
                        break;
                    }
                }
                match directive(&name) {
                    Some(kind) => kind,
                    None => return Err(s.error(start, format!("unknown directive '#{}'", name))),
                }
            }
            c if ident_start(c) => {
                let mut name = String::new();
                loop {
                    match s.peek() {
                        Some(c) if ident_continue(c) => {
                            name.push(c);
                            s.bump();
                        }
                        // '-' and '_' continue only when another identifier
                        // character follows, so 'x->y' and 'refl_{' split off.
                        Some(c @ ('-' | '_'))
                            if s.peek_at(1).map_or(false, ident_continue) =>
                        {
                            name.push(c);
                            s.bump();
                        }
                        _ => break,
                    }
                }
                match keyword(&name) {
                    Some(kind) => kind,
                    None => TokenKind::Ident(name),
                }
            }
            c => {
                return Err(s.error(start, format!("unexpected character '{}'", c.escape_default())));
            }
        };
        out.push(Token { kind, span: s.span_from(start) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(input: &str) -> Vec<TokenKind> {
        tokenize("<test>", input).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn hom_codomain_lexes_to_twenty_tokens_ending_with_bracket() {
        let toks = kinds("(t : Δ¹) → A [t ≡ 0₂ ↦ a , t ≡ 1₂ ↦ b]");
        use TokenKind::*;
        let expected = vec![
            LParen,
            Ident("t".into()),
            Colon,
            Ident("Δ¹".into()),
            RParen,
            Arrow,
            Ident("A".into()),
            LBracket,
            Ident("t".into()),
            TopeEq,
            PointZero,
            MapsTo,
            Ident("a".into()),
            Comma,
            Ident("t".into()),
            TopeEq,
            PointOne,
            MapsTo,
            Ident("b".into()),
            RBracket,
        ];
        assert_eq!(toks, expected);
        assert_eq!(toks.len(), 20);
        assert_eq!(*toks.last().unwrap(), RBracket);
    }

    #[test]
    fn ascii_aliases_lex_like_unicode() {
        assert_eq!(kinds("A -> B"), kinds("A → B"));
        assert_eq!(kinds("t === 0_2 \\/ t === 1_2"), kinds("t ≡ 0₂ ∨ t ≡ 1₂"));
        assert_eq!(kinds("s <= t /\\ TOP"), kinds("s ≤ t ∧ ⊤"));
        assert_eq!(kinds("Sigma ( x : A ) , B"), kinds("Σ ( x : A ) , B"));
        assert_eq!(kinds("2 * 2"), kinds("2 × 2"));
        assert_eq!(kinds("*_1"), kinds("*₁"));
        assert_eq!(kinds("phi |-> a"), kinds("phi ↦ a"));
        assert_eq!(kinds("BOT"), kinds("⊥"));
    }

    #[test]
    fn exotic_identifiers() {
        assert_eq!(
            kinds("is-pre-∞-category ∂Δ¹ Λ²₁ x′ rzk-1"),
            vec![
                TokenKind::Ident("is-pre-∞-category".into()),
                TokenKind::Ident("∂Δ¹".into()),
                TokenKind::Ident("Λ²₁".into()),
                TokenKind::Ident("x′".into()),
                TokenKind::Ident("rzk-1".into()),
            ]
        );
    }

    #[test]
    fn arrow_splits_identifier() {
        assert_eq!(
            kinds("x->y"),
            vec![TokenKind::Ident("x".into()), TokenKind::Arrow, TokenKind::Ident("y".into())]
        );
    }

    #[test]
    fn refl_annotation_splits() {
        assert_eq!(
            kinds("refl_{a : A}"),
            vec![
                TokenKind::KwRefl,
                TokenKind::Underscore,
                TokenKind::LBrace,
                TokenKind::Ident("a".into()),
                TokenKind::Colon,
                TokenKind::Ident("A".into()),
                TokenKind::RBrace,
            ]
        );
    }

    #[test]
    fn comments_and_directives() {
        let toks = kinds("#lang rzk-1 -- a comment → with junk\n#def x-y");
        assert_eq!(
            toks,
            vec![
                TokenKind::HashLang,
                TokenKind::Ident("rzk-1".into()),
                TokenKind::HashDef,
                TokenKind::Ident("x-y".into()),
            ]
        );
    }

    #[test]
    fn double_dash_is_comment_even_after_ident() {
        assert_eq!(kinds("a--b\nc"), vec![TokenKind::Ident("a".into()), TokenKind::Ident("c".into())]);
    }

    #[test]
    fn stray_bytes_are_lex_errors() {
        assert!(tokenize("<test>", "a $ b").is_err());
        assert!(tokenize("<test>", "3").is_err());
        assert!(tokenize("<test>", "a - b").is_err());
        assert!(tokenize("<test>", "#weird").is_err());
    }

    #[test]
    fn spans_are_one_based_and_char_counted() {
        let toks = tokenize("<test>", "ab Δ¹\n  c").unwrap();
        assert_eq!(toks[0].span.start_line, 1);
        assert_eq!(toks[0].span.start_col, 1);
        assert_eq!(toks[0].span.end_col, 3);
        assert_eq!(toks[1].span.start_col, 4);
        assert_eq!(toks[1].span.end_col, 6);
        assert_eq!(toks[2].span.start_line, 2);
        assert_eq!(toks[2].span.start_col, 3);
    }
}
