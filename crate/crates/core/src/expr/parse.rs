//! Tokenizer and recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" ["-"] INT)?
//! primary := NUMBER | ident | "u" | "t"
//!          | ("exp" | "sin" | "cos") "(" expr ")"
//!          | "D" "(" expr ("," ident "," INT)+ ")"
//!          | "(" expr ")"
//! ```
//!
//! `D(u, x, 2)` is the symbol for an unknown-function derivative; `D` applied
//! to any other expression differentiates it on the spot.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::{AtomKind, DerivSym, Expr, ExprError, NormalForm, Rational, TIME_VAR, UNKNOWN};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Number(String),
    Ident(String),
    Str(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Equals,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Number(n) => format!("number `{n}`"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Str(s) => format!("string \"{s}\""),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Caret => "'^'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::LBrace => "'{'".into(),
            TokenKind::RBrace => "'}'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Semi => "';'".into(),
            TokenKind::Colon => "':'".into(),
            TokenKind::Equals => "'='".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub struct Lexer;

impl Lexer {
    /// Splits `text` into tokens. `#` starts a comment running to end of line.
    pub fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
        let chars: Vec<char> = text.chars().collect();
        let mut tokens = Vec::new();
        let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
        while i < chars.len() {
            let c = chars[i];
            let span = Span { line, column };
            if c == '\n' {
                i += 1;
                line += 1;
                column = 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
                column += 1;
                continue;
            }
            if c == '#' {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            let start = i;
            let kind = if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                if s.matches('.').count() > 1 {
                    return Err(syntax(span, format!("malformed number `{s}`")));
                }
                TokenKind::Number(s)
            } else if c.is_alphabetic() || c == '_' {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                TokenKind::Ident(chars[start..i].iter().collect())
            } else if c == '"' {
                i += 1;
                while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                    i += 1;
                }
                if i >= chars.len() || chars[i] != '"' {
                    return Err(syntax(span, "unterminated string".into()));
                }
                i += 1;
                TokenKind::Str(chars[start + 1..i - 1].iter().collect())
            } else {
                i += 1;
                match c {
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semi,
                    ':' => TokenKind::Colon,
                    '=' => TokenKind::Equals,
                    other => return Err(syntax(span, format!("unexpected character '{other}'"))),
                }
            };
            column += i - start;
            tokens.push(Token { kind, span });
        }
        tokens.push(Token {
            kind: TokenKind::Eof,
            span: Span { line, column },
        });
        Ok(tokens)
    }
}

fn syntax(span: Span, message: String) -> ExprError {
    ExprError::Syntax {
        line: span.line,
        column: span.column,
        message,
    }
}

/// Exact value of a decimal literal such as `0.25`.
pub(crate) fn parse_decimal(s: &str) -> Option<Rational> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(Rational::new(numer, denom))
}

pub struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    declared: Vec<String>,
}

impl<'a> Parser<'a> {
    pub fn new(tokens: &'a [Token], declared: &[&str]) -> Self {
        Parser {
            tokens,
            pos: 0,
            declared: declared.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    pub fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn expect(&mut self, kind: &TokenKind) -> Result<Span, ExprError> {
        let tok = self.peek().clone();
        if &tok.kind == kind {
            self.advance();
            Ok(tok.span)
        } else {
            Err(syntax(
                tok.span,
                format!("expected {}, found {}", kind.describe(), tok.kind.describe()),
            ))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Span), ExprError> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Ident(name) => {
                self.advance();
                Ok((name, tok.span))
            }
            other => Err(syntax(
                tok.span,
                format!("expected identifier, found {}", other.describe()),
            )),
        }
    }

    /// Parses one expression without canonicalizing it.
    pub fn parse_expression(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.advance();
                    terms.push(self.term()?);
                }
                TokenKind::Minus => {
                    self.advance();
                    terms.push(negate(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.advance();
                    factors.push(self.unary()?);
                }
                TokenKind::Slash => {
                    self.advance();
                    let divisor = self.unary()?;
                    factors.push(Expr::Power(Box::new(divisor), -1));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek().kind == TokenKind::Minus {
            self.advance();
            return Ok(negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek().kind != TokenKind::Caret {
            return Ok(base);
        }
        self.advance();
        let exponent = self.exponent()?;
        Ok(Expr::Power(Box::new(base), exponent))
    }

    fn exponent(&mut self) -> Result<i64, ExprError> {
        let tok = self.peek().clone();
        let negative = tok.kind == TokenKind::Minus;
        if negative {
            self.advance();
        }
        let tok = self.peek().clone();
        let not_integer = ExprError::NonIntegerExponent {
            line: tok.span.line,
            column: tok.span.column,
        };
        let value = match &tok.kind {
            TokenKind::Number(n) => {
                self.advance();
                if n.contains('.') {
                    return Err(not_integer);
                }
                n.parse::<i64>()
                    .map_err(|_| syntax(tok.span, format!("exponent `{n}` out of range")))?
            }
            TokenKind::Ident(_) | TokenKind::LParen => {
                let e = self.primary()?;
                let q = NormalForm::from_expr(&e)?.as_constant().ok_or(not_integer.clone())?;
                if !q.is_integer() {
                    return Err(not_integer);
                }
                q.to_integer().to_i64().ok_or(not_integer)?
            }
            other => {
                return Err(syntax(
                    tok.span,
                    format!("expected integer exponent, found {}", other.describe()),
                ))
            }
        };
        Ok(if negative { -value } else { value })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Number(n) => {
                self.advance();
                let q = parse_decimal(n).ok_or_else(|| syntax(tok.span, format!("malformed number `{n}`")))?;
                Ok(Expr::Rational(q))
            }
            TokenKind::LParen => {
                self.advance();
                let e = self.parse_expression()?;
                self.expect(&TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(name) => {
                self.advance();
                if self.peek().kind == TokenKind::LParen {
                    if let Some(kind) = AtomKind::from_name(name) {
                        self.advance();
                        let arg = self.parse_expression()?;
                        self.expect(&TokenKind::RParen)?;
                        return Ok(Expr::Atom(kind, Box::new(arg)));
                    }
                    if name == "D" {
                        self.advance();
                        return self.derivative();
                    }
                }
                if name == UNKNOWN {
                    Ok(Expr::Deriv(DerivSym::unknown()))
                } else if name == TIME_VAR || self.declared.iter().any(|d| d == name) {
                    Ok(Expr::Var(name.clone()))
                } else {
                    Err(ExprError::UndeclaredIdentifier {
                        name: name.clone(),
                        line: tok.span.line,
                        column: tok.span.column,
                    })
                }
            }
            other => Err(syntax(
                tok.span,
                format!("expected expression, found {}", other.describe()),
            )),
        }
    }

    /// Body of `D(target, var, n, ...)` after the opening parenthesis.
    fn derivative(&mut self) -> Result<Expr, ExprError> {
        let target = self.parse_expression()?;
        let mut orders: Vec<(String, u32)> = Vec::new();
        while self.peek().kind == TokenKind::Comma {
            self.advance();
            let (var, span) = self.expect_ident()?;
            if var != TIME_VAR && !self.declared.iter().any(|d| d == &var) {
                return Err(ExprError::UndeclaredIdentifier {
                    name: var,
                    line: span.line,
                    column: span.column,
                });
            }
            self.expect(&TokenKind::Comma)?;
            let tok = self.peek().clone();
            let n = match &tok.kind {
                TokenKind::Number(n) if !n.contains('.') => {
                    self.advance();
                    n.parse::<u32>()
                        .map_err(|_| syntax(tok.span, format!("derivative order `{n}` out of range")))?
                }
                other => {
                    return Err(syntax(
                        tok.span,
                        format!("expected derivative order, found {}", other.describe()),
                    ))
                }
            };
            orders.push((var, n));
        }
        self.expect(&TokenKind::RParen)?;
        if orders.is_empty() {
            return Err(syntax(self.peek().span, "D(...) needs at least one variable and order".into()));
        }
        if let Expr::Deriv(sym) = &target {
            let mut sym = sym.clone();
            for (v, n) in &orders {
                sym = sym.differentiated(v, *n);
            }
            return Ok(Expr::Deriv(sym));
        }
        let mut nf = NormalForm::from_expr(&target)?;
        for (v, n) in &orders {
            for _ in 0..*n {
                nf = nf.differentiate(v);
            }
        }
        Ok(nf.to_expr())
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Rational(q) => Expr::Rational(-q),
        other => Expr::Product(vec![Expr::Rational(-Rational::one()), other]),
    }
}

/// Parses `text` over the declared spatial variables (`t` and `u` are always
/// available) and returns the canonical expression.
pub fn parse_expr(text: &str, declared_vars: &[&str]) -> Result<Expr, ExprError> {
    let tokens = Lexer::tokenize(text)?;
    let mut parser = Parser::new(&tokens, declared_vars);
    let e = parser.parse_expression()?;
    let tok = parser.peek();
    if tok.kind != TokenKind::Eof {
        return Err(syntax(
            tok.span,
            format!("unexpected {}", tok.kind.describe()),
        ));
    }
    super::simplify(&e)
}
