//! Built-in wave-like problems with known closed-form solutions.
//!
//! The right-hand sides are stored in compact operator form and expanded
//! mechanically by the parser's `D(...)` operator.

use std::fmt;
use std::str::FromStr;

use crate::engine::PdeSpec;
use crate::expr::{parse_expr, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelId {
    /// Two-dimensional problem with solution `e^{xy} (sin t + cos t)`.
    Ex1,
    /// Quintic nonlinearity with solution `e^{x+t}`.
    Ex2,
    /// Solution `x^2 sin t`.
    Ex3,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::Ex1, ModelId::Ex2, ModelId::Ex3];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Ex1 => "ex1",
            ModelId::Ex2 => "ex2",
            ModelId::Ex3 => "ex3",
        }
    }

    fn definition(self) -> ModelDefinition {
        match self {
            ModelId::Ex1 => ModelDefinition {
                vars: &["x", "y"],
                rhs: "D(D(u,x,2)*D(u,y,2), x,1, y,1) - D(x*y*D(u,x,1)*D(u,y,1), x,1, y,1) - u",
                init_u: "exp(x*y)",
                init_ut: "exp(x*y)",
                exact: "exp(x*y)*(sin(t) + cos(t))",
            },
            ModelId::Ex2 => ModelDefinition {
                vars: &["x"],
                rhs: "u^2*D(D(u,x,1)*D(u,x,2)*D(u,x,3), x,2) + D(u,x,1)^2*D(D(u,x,2)^3, x,2) - 18*u^5 + u",
                init_u: "exp(x)",
                init_ut: "exp(x)",
                exact: "exp(x)*exp(t)",
            },
            ModelId::Ex3 => ModelDefinition {
                vars: &["x"],
                rhs: "x^2*D(D(u,x,1)*D(u,x,2), x,1) - x^2*D(u,x,2)^2 - u",
                init_u: "0",
                init_ut: "x^2",
                exact: "x^2*sin(t)",
            },
        }
    }
}

struct ModelDefinition {
    vars: &'static [&'static str],
    rhs: &'static str,
    init_u: &'static str,
    init_ut: &'static str,
    exact: &'static str,
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ex1" => Ok(ModelId::Ex1),
            "ex2" => Ok(ModelId::Ex2),
            "ex3" => Ok(ModelId::Ex3),
            other => Err(format!("unknown model `{other}` (expected ex1, ex2 or ex3)")),
        }
    }
}

pub fn builtin_model(id: ModelId) -> PdeSpec {
    let d = id.definition();
    PdeSpec::parse(id.name(), d.vars, d.rhs, d.init_u, d.init_ut, Some(d.exact))
        .expect("built-in models are valid")
}

pub fn exact_solution(id: ModelId) -> Expr {
    let d = id.definition();
    parse_expr(d.exact, d.vars).expect("built-in exact solutions parse")
}
