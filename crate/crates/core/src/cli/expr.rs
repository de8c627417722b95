//! Closed expression catalog: numbers, `pi`, the variables `xi`, `theta_i`
//! and `u_i` (1-based), `+ - * / ^` and the functions `pow exp sin cos abs`.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    /// 1-based character column inside the expression.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

/// Variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scope {
    pub xi: bool,
    pub theta: usize,
    pub u: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    Xi,
    Theta(usize),
    U(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Sin,
    Cos,
    Abs,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// Parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
}

impl Expr {
    pub fn parse(src: &str, scope: Scope) -> Result<Self, ExprError> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            scope,
            end: src.chars().count() + 1,
        };
        let root = p.expr()?;
        if let Some((tok, col)) = p.tokens.get(p.pos) {
            return Err(ExprError {
                column: *col,
                message: format!("unexpected {tok:?}"),
            });
        }
        Ok(Self { root })
    }

    pub fn eval(&self, xi: f64, theta: &[f64], u: &[f64]) -> f64 {
        eval(&self.root, xi, theta, u)
    }
}

fn eval(n: &Node, xi: f64, th: &[f64], u: &[f64]) -> f64 {
    match n {
        Node::Const(c) => *c,
        Node::Var(Var::Xi) => xi,
        Node::Var(Var::Theta(i)) => th[*i],
        Node::Var(Var::U(i)) => u[*i],
        Node::Neg(a) => -eval(a, xi, th, u),
        Node::Add(a, b) => eval(a, xi, th, u) + eval(b, xi, th, u),
        Node::Sub(a, b) => eval(a, xi, th, u) - eval(b, xi, th, u),
        Node::Mul(a, b) => eval(a, xi, th, u) * eval(b, xi, th, u),
        Node::Div(a, b) => eval(a, xi, th, u) / eval(b, xi, th, u),
        Node::Pow(a, b) => eval(a, xi, th, u).powf(eval(b, xi, th, u)),
        Node::Call(f, args) => {
            let x = eval(&args[0], xi, th, u);
            match f {
                Func::Exp => x.exp(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Abs => x.abs(),
                Func::Pow => x.powf(eval(&args[1], xi, th, u)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ExprError {
                column: col,
                message: format!("malformed number {text:?}"),
            })?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError {
                column: col,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    scope: Scope,
    end: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected '{op}'"))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // right associative, binds tighter than unary minus on its left
    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let col = self.column();
        let Some((tok, _)) = self.tokens.get(self.pos).cloned() else {
            return self.fail("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Op(c) => Err(ExprError {
                column: col,
                message: format!("unexpected '{c}'"),
            }),
            Tok::Ident(name) => {
                if self.peek_op() == Some('(') {
                    self.pos += 1;
                    return self.call(&name, col);
                }
                self.variable(&name, col)
            }
        }
    }

    fn call(&mut self, name: &str, col: usize) -> Result<Node, ExprError> {
        let (func, arity) = match name {
            "exp" => (Func::Exp, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "abs" => (Func::Abs, 1),
            "pow" => (Func::Pow, 2),
            _ => {
                return Err(ExprError {
                    column: col,
                    message: format!("unknown function {name:?}"),
                })
            }
        };
        let mut args = vec![self.expr()?];
        while self.peek_op() == Some(',') {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect(')')?;
        if args.len() != arity {
            return Err(ExprError {
                column: col,
                message: format!("{name} takes {arity} argument(s), got {}", args.len()),
            });
        }
        Ok(Node::Call(func, args))
    }

    fn variable(&self, name: &str, col: usize) -> Result<Node, ExprError> {
        let err = |message: String| {
            Err(ExprError {
                column: col,
                message,
            })
        };
        if name == "pi" {
            return Ok(Node::Const(std::f64::consts::PI));
        }
        if name == "xi" {
            return if self.scope.xi {
                Ok(Node::Var(Var::Xi))
            } else {
                err("xi is not available here".into())
            };
        }
        let indexed = |prefix: &str, limit: usize| -> Option<Result<usize, String>> {
            let rest = name.strip_prefix(prefix)?;
            Some(match rest.parse::<usize>() {
                Ok(i) if i >= 1 && i <= limit => Ok(i - 1),
                Ok(i) => Err(format!("{name} is out of range (index {i}, have {limit})")),
                Err(_) => Err(format!("unknown variable {name:?}")),
            })
        };
        if let Some(r) = indexed("theta_", self.scope.theta) {
            return r.map(|i| Node::Var(Var::Theta(i))).or_else(err);
        }
        if let Some(r) = indexed("u_", self.scope.u) {
            return r.map(|i| Node::Var(Var::U(i))).or_else(err);
        }
        err(format!("unknown variable {name:?}"))
    }
}
