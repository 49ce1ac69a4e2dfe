//! A small arithmetic grammar for explicit coordinate functions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 't' | 's' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | tan | sec | exp | ln | log | sqrt
//! ```

use crate::error::{Error, Result};
use crate::jets::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Sec,
    Exp,
    Ln,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression in a single variable, written `t` or `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::spec(format!(
                "trailing input in expression {source:?}"
            )));
        }
        Ok(Self {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, t: f64, order: usize) -> Result<Jet> {
        eval(&self.root, t, order)
    }
}

fn constant_value(node: &Node) -> Option<f64> {
    match node {
        Node::Num(v) => Some(*v),
        Node::Var => None,
        Node::Neg(a) => constant_value(a).map(|v| -v),
        Node::Add(a, b) => Some(constant_value(a)? + constant_value(b)?),
        Node::Sub(a, b) => Some(constant_value(a)? - constant_value(b)?),
        Node::Mul(a, b) => Some(constant_value(a)? * constant_value(b)?),
        Node::Div(a, b) => Some(constant_value(a)? / constant_value(b)?),
        Node::Pow(a, b) => Some(constant_value(a)?.powf(constant_value(b)?)),
        Node::Call(f, a) => {
            let v = constant_value(a)?;
            Some(match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Tan => v.tan(),
                Func::Sec => 1.0 / v.cos(),
                Func::Exp => v.exp(),
                Func::Ln => v.ln(),
                Func::Sqrt => v.sqrt(),
            })
        }
    }
}

fn eval(node: &Node, t: f64, order: usize) -> Result<Jet> {
    Ok(match node {
        Node::Num(v) => Jet::constant(t, *v, order),
        Node::Var => Jet::variable(t, order),
        Node::Neg(a) => -eval(a, t, order)?,
        Node::Add(a, b) => eval(a, t, order)? + eval(b, t, order)?,
        Node::Sub(a, b) => eval(a, t, order)? - eval(b, t, order)?,
        Node::Mul(a, b) => eval(a, t, order)? * eval(b, t, order)?,
        Node::Div(a, b) => eval(a, t, order)?.checked_div(&eval(b, t, order)?)?,
        Node::Pow(a, b) => {
            let base = eval(a, t, order)?;
            match constant_value(b) {
                Some(p) => base.powf(p)?,
                None => (base.ln()? * eval(b, t, order)?).exp(),
            }
        }
        Node::Call(f, a) => {
            let x = eval(a, t, order)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan()?,
                Func::Sec => x.sec()?,
                Func::Exp => x.exp(),
                Func::Ln => x.ln()?,
                Func::Sqrt => x.sqrt()?,
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
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
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::spec(format!("bad number {text:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::spec(format!(
                "unexpected character {c:?} in expression"
            )));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::spec(format!("expected {op:?} in expression")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
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

    fn term(&mut self) -> Result<Node> {
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

    fn unary(&mut self) -> Result<Node> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::spec("unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "t" | "s" => return Ok(Node::Var),
                    "pi" => return Ok(Node::Num(std::f64::consts::PI)),
                    "e" => return Ok(Node::Num(std::f64::consts::E)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "tan" => Func::Tan,
                    "sec" => Func::Sec,
                    "exp" => Func::Exp,
                    "ln" | "log" => Func::Ln,
                    "sqrt" => Func::Sqrt,
                    other => return Err(Error::spec(format!("unknown identifier {other:?}"))),
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Node::Call(func, Box::new(arg)))
            }
            Tok::Op(c) => Err(Error::spec(format!("unexpected {c:?} in expression"))),
        }
    }
}
