//! Problem files:
//!
//! ```text
//! pde "ex3" {
//!   vars: x;
//!   equation: D(u,t,2) = x^2*(D(u,x,2)^2 + D(u,x,1)*D(u,x,3)) - x^2*D(u,x,2)^2 - u;
//!   init: 0;  init_t: x^2;  exact: x^2*sin(t);
//! }
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment.

use thiserror::Error;

use crate::engine::{lift, EngineError, PdeSpec};
use crate::expr::{DerivSym, Expr, ExprError, Lexer, Parser, Span, Token, TokenKind, TIME_VAR};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SpecFileError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("line {line}, column {column}: {message}")]
    Semantic {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: {source}")]
    Engine {
        line: usize,
        column: usize,
        #[source]
        source: EngineError,
    },
}

impl SpecFileError {
    fn syntax(span: Span, message: impl Into<String>) -> Self {
        SpecFileError::Syntax {
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }

    fn semantic(span: Span, message: impl Into<String>) -> Self {
        SpecFileError::Semantic {
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }

    fn engine(span: Span, source: EngineError) -> Self {
        SpecFileError::Engine {
            line: span.line,
            column: span.column,
            source,
        }
    }
}

struct Field {
    name: String,
    span: Span,
    /// Tokens between the colon and the semicolon, terminated by `Eof`.
    body: Vec<Token>,
}

fn expect(tokens: &[Token], pos: &mut usize, kind: &TokenKind) -> Result<Span, SpecFileError> {
    let tok = &tokens[*pos];
    if &tok.kind != kind {
        return Err(SpecFileError::syntax(
            tok.span,
            format!("expected {}, found {}", kind.describe(), tok.kind.describe()),
        ));
    }
    *pos += 1;
    Ok(tok.span)
}

fn split_fields(tokens: &[Token]) -> Result<(String, Vec<Field>), SpecFileError> {
    let mut pos = 0;
    match &tokens[pos].kind {
        TokenKind::Ident(kw) if kw == "pde" => pos += 1,
        other => {
            return Err(SpecFileError::syntax(
                tokens[pos].span,
                format!("expected `pde`, found {}", other.describe()),
            ))
        }
    }
    let name = match &tokens[pos].kind {
        TokenKind::Str(s) => s.clone(),
        other => {
            return Err(SpecFileError::syntax(
                tokens[pos].span,
                format!("expected problem name string, found {}", other.describe()),
            ))
        }
    };
    pos += 1;
    expect(tokens, &mut pos, &TokenKind::LBrace)?;
    let mut fields = Vec::new();
    loop {
        let tok = &tokens[pos];
        match &tok.kind {
            TokenKind::RBrace => {
                pos += 1;
                break;
            }
            TokenKind::Ident(field) => {
                pos += 1;
                expect(tokens, &mut pos, &TokenKind::Colon)?;
                let start = pos;
                while !matches!(
                    tokens[pos].kind,
                    TokenKind::Semi | TokenKind::RBrace | TokenKind::Eof
                ) {
                    pos += 1;
                }
                let end_span = expect(tokens, &mut pos, &TokenKind::Semi)?;
                let mut body = tokens[start..pos - 1].to_vec();
                body.push(Token {
                    kind: TokenKind::Eof,
                    span: end_span,
                });
                fields.push(Field {
                    name: field.clone(),
                    span: tok.span,
                    body,
                });
            }
            other => {
                return Err(SpecFileError::syntax(
                    tok.span,
                    format!("expected field name or '}}', found {}", other.describe()),
                ))
            }
        }
    }
    if tokens[pos].kind != TokenKind::Eof {
        return Err(SpecFileError::syntax(
            tokens[pos].span,
            format!("unexpected {} after the problem block", tokens[pos].kind.describe()),
        ));
    }
    Ok((name, fields))
}

fn parse_full(tokens: &[Token], vars: &[&str]) -> Result<Expr, ExprError> {
    let mut parser = Parser::new(tokens, vars);
    let e = parser.parse_expression()?;
    let tok = parser.peek();
    if tok.kind != TokenKind::Eof {
        return Err(ExprError::Syntax {
            line: tok.span.line,
            column: tok.span.column,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    crate::expr::simplify(&e)
}

/// Parses one expression field, turning non-polynomial use of `u` into an
/// unsupported-nonlinearity error located at the field.
fn parse_field_expr(field: &Field, tokens: &[Token], vars: &[&str]) -> Result<Expr, SpecFileError> {
    parse_full(tokens, vars).map_err(|e| match e {
        ExprError::NonPolynomialInUnknown { .. } => SpecFileError::engine(field.span, lift(e)),
        other => SpecFileError::Expr(other),
    })
}

pub fn parse_spec_file(text: &str) -> Result<PdeSpec, SpecFileError> {
    let tokens = Lexer::tokenize(text)?;
    let closing = tokens.last().map(|t| t.span).unwrap_or(Span { line: 1, column: 1 });
    let (name, fields) = split_fields(&tokens)?;

    let mut seen: Vec<&str> = Vec::new();
    for f in &fields {
        if !["vars", "equation", "init", "init_t", "exact"].contains(&f.name.as_str()) {
            return Err(SpecFileError::semantic(f.span, format!("unknown field `{}`", f.name)));
        }
        if seen.contains(&f.name.as_str()) {
            return Err(SpecFileError::semantic(f.span, format!("field `{}` given twice", f.name)));
        }
        seen.push(&f.name);
    }
    let field = |n: &str| fields.iter().find(|f| f.name == n);

    let vars_field = field("vars").ok_or_else(|| SpecFileError::semantic(closing, "`vars:` line required"))?;
    let mut vars: Vec<String> = Vec::new();
    let mut pos = 0;
    loop {
        match &vars_field.body[pos].kind {
            TokenKind::Ident(v) => vars.push(v.clone()),
            other => {
                return Err(SpecFileError::syntax(
                    vars_field.body[pos].span,
                    format!("expected variable name, found {}", other.describe()),
                ))
            }
        }
        pos += 1;
        match vars_field.body[pos].kind {
            TokenKind::Comma => pos += 1,
            TokenKind::Eof => break,
            ref other => {
                return Err(SpecFileError::syntax(
                    vars_field.body[pos].span,
                    format!("expected ',' or ';', found {}", other.describe()),
                ))
            }
        }
    }
    let var_refs: Vec<&str> = vars.iter().map(String::as_str).collect();

    let eq = field("equation").ok_or_else(|| SpecFileError::semantic(closing, "`equation:` line required"))?;
    let split = eq
        .body
        .iter()
        .position(|t| t.kind == TokenKind::Equals)
        .ok_or_else(|| SpecFileError::syntax(eq.span, "equation needs `D(u,t,2) = ...`"))?;
    let mut lhs_tokens = eq.body[..split].to_vec();
    lhs_tokens.push(Token {
        kind: TokenKind::Eof,
        span: eq.body[split].span,
    });
    let lhs = parse_field_expr(eq, &lhs_tokens, &var_refs)?;
    let u_tt = Expr::Deriv(DerivSym::new("u", [(TIME_VAR, 2)]));
    if lhs != u_tt {
        return Err(SpecFileError::engine(
            eq.span,
            EngineError::UnsupportedStructure(format!(
                "left-hand side must be D(u,t,2), found {lhs} (only u_tt is supported)"
            )),
        ));
    }
    let rhs = parse_field_expr(eq, &eq.body[split + 1..], &var_refs)?;

    let init = field("init").ok_or_else(|| SpecFileError::semantic(closing, "first initial condition required (`init:`)"))?;
    let init_u = parse_field_expr(init, &init.body, &var_refs)?;
    let init_t = field("init_t").ok_or_else(|| SpecFileError::semantic(closing, "second initial condition required"))?;
    let init_ut = parse_field_expr(init_t, &init_t.body, &var_refs)?;
    let exact = field("exact")
        .map(|f| parse_field_expr(f, &f.body, &var_refs))
        .transpose()?;

    PdeSpec::new(&name, &var_refs, &rhs, &init_u, &init_ut, exact.as_ref())
        .map_err(|e| SpecFileError::engine(eq.span, e))
}
