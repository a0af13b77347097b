use std::collections::HashSet;

use super::ast::{Call, Callee, Expr, Program, Span, Statement};
use super::lexer::{tokenize, Tok, Token};
use super::{Diagnostic, PREBOUND};
use crate::registry::{self, FunctionKind};

const PY_KEYWORDS: &[&str] = &[
    "and", "as", "assert", "async", "await", "break", "continue", "del", "except", "finally", "global", "in", "is",
    "nonlocal", "not", "or", "pass", "raise", "return", "try", "with", "yield",
];

fn forbidden_keyword(word: &str, span: Span) -> Option<Diagnostic> {
    let (code, msg) = match word {
        "import" | "from" => ("forbidden-import", "imports not allowed".to_owned()),
        "def" | "class" | "lambda" => ("forbidden-definition", "function definitions not allowed".to_owned()),
        "for" | "while" => ("forbidden-loop", "loops not allowed".to_owned()),
        "if" | "elif" | "else" => ("forbidden-conditional", "conditionals not allowed".to_owned()),
        w if PY_KEYWORDS.contains(&w) => ("syntax", format!("'{w}' is not supported")),
        _ => return None,
    };
    Some(Diagnostic::error(code, msg, span).with_token(word))
}

fn forbidden_op(op: &str, span: Span) -> Diagnostic {
    let (code, msg) = match op {
        "." => ("forbidden-attribute", "attribute access not allowed"),
        "+" | "*" | "/" | "%" | "**" | "//" | "@" | "-" => ("forbidden-arithmetic", "arithmetic not allowed"),
        "==" | "!=" | "<" | ">" | "<=" | ">=" => ("forbidden-comparison", "comparisons not allowed"),
        "{" | "}" => ("syntax", "dict and set literals are not supported"),
        ";" => ("syntax", "one statement per line"),
        _ => ("syntax", "unexpected token"),
    };
    Diagnostic::error(code, msg, span).with_token(op)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        match &t.tok {
            Tok::Op(op) => forbidden_op(op, t.span),
            Tok::Ident(w) if forbidden_keyword(w, t.span).is_some() => forbidden_keyword(w, t.span).expect("checked"),
            other => Diagnostic::error("syntax", format!("expected {expected}, found {}", other.describe()), t.span)
                .with_token(&other.describe()),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut statements = Vec::new();
        while self.peek().tok != Tok::Eof {
            statements.push(self.statement()?);
            match self.peek().tok {
                Tok::Newline => {
                    self.next();
                }
                Tok::Eof => {}
                _ => return Err(self.unexpected("end of line")),
            }
        }
        Ok(Program { statements })
    }

    fn statement(&mut self) -> PResult<Statement> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Indent => Err(Diagnostic::error("syntax", "unexpected indent", t.span)),
            Tok::Ident(w) => {
                if let Some(d) = forbidden_keyword(w, t.span) {
                    return Err(d);
                }
                if *self.peek_at(1) == Tok::Assign {
                    self.next();
                    self.next();
                    let value = self.expr()?;
                    return Ok(Statement::Assign { name: w.clone(), value, span: t.span });
                }
                if matches!(self.peek_at(1), Tok::Op(op) if op.ends_with('=') && op != "==") {
                    return Err(Diagnostic::error("forbidden-arithmetic", "arithmetic not allowed", t.span));
                }
                match self.expr()? {
                    Expr::Call(c) if matches!(&c.callee, Callee::Function(f) if f == "output_scenario") => {
                        Ok(Statement::Output(*c))
                    }
                    e => Err(Diagnostic::error(
                        "bare-expression",
                        "only output_scenario(...) may appear as a statement; assign other results to a name",
                        e.span(),
                    )),
                }
            }
            _ => Err(self.unexpected("a statement")),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let t = self.next();
        let expr = match t.tok {
            Tok::Str(s) => Expr::Str(s, t.span),
            Tok::Int(i) => Expr::Int(i, t.span),
            Tok::Float(x) => Expr::Float(x, t.span),
            Tok::Minus => match self.next().tok {
                Tok::Int(i) => Expr::Int(-i, t.span),
                Tok::Float(x) => Expr::Float(-x, t.span),
                _ => return Err(forbidden_op("-", t.span)),
            },
            Tok::LBracket => {
                let mut items = Vec::new();
                while self.peek().tok != Tok::RBracket {
                    items.push(self.expr()?);
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else if self.peek().tok != Tok::RBracket {
                        return Err(self.unexpected("',' or ']'"));
                    }
                }
                self.next();
                Expr::List(items, t.span)
            }
            Tok::Ident(name) => {
                if let Some(d) = forbidden_keyword(&name, t.span) {
                    return Err(d);
                }
                match name.as_str() {
                    "True" => Expr::Bool(true, t.span),
                    "False" => Expr::Bool(false, t.span),
                    "None" => Expr::None(t.span),
                    _ if self.peek().tok == Tok::LParen => self.call(name, t.span)?,
                    _ => Expr::Name(name, t.span),
                }
            }
            Tok::Op(op) => return Err(forbidden_op(&op, t.span)),
            other => {
                return Err(Diagnostic::error("syntax", format!("expected an expression, found {}", other.describe()), t.span)
                    .with_token(&other.describe()))
            }
        };
        match &self.peek().tok {
            Tok::Op(op) => Err(forbidden_op(op, self.peek().span)),
            Tok::Minus => Err(forbidden_op("-", self.peek().span)),
            Tok::Ident(w) if forbidden_keyword(w, self.peek().span).is_some() => {
                Err(forbidden_keyword(w, self.peek().span).expect("checked"))
            }
            _ => Ok(expr),
        }
    }

    fn arguments(&mut self) -> PResult<(Vec<Expr>, Vec<(String, Expr)>)> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        let mut kwargs: Vec<(String, Expr)> = Vec::new();
        while self.peek().tok != Tok::RParen {
            let start = self.peek().clone();
            if let (Tok::Ident(k), Tok::Assign) = (&start.tok, self.peek_at(1)) {
                let k = k.clone();
                self.next();
                self.next();
                if kwargs.iter().any(|(n, _)| *n == k) {
                    return Err(Diagnostic::error("syntax", format!("keyword argument {k:?} repeated"), start.span)
                        .with_token(&k));
                }
                kwargs.push((k, self.expr()?));
            } else {
                let e = self.expr()?;
                if !kwargs.is_empty() {
                    return Err(Diagnostic::error("syntax", "positional argument follows keyword argument", e.span()));
                }
                args.push(e);
            }
            if self.peek().tok == Tok::Comma {
                self.next();
            } else if self.peek().tok != Tok::RParen {
                return Err(self.unexpected("',' or ')'"));
            }
        }
        self.next();
        Ok((args, kwargs))
    }

    fn call(&mut self, name: String, span: Span) -> PResult<Expr> {
        let (args, kwargs) = self.arguments()?;
        if self.peek().tok != Tok::LParen {
            return Ok(Expr::Call(Box::new(Call { callee: Callee::Function(name), args, kwargs, span })));
        }
        // wrapper(func)(args)
        let inner = match (args.as_slice(), kwargs.is_empty()) {
            ([Expr::Name(inner, _)], true) => inner.clone(),
            _ => {
                return Err(Diagnostic::error(
                    "syntax",
                    format!("{name}(...) cannot be called again; only scenario_not(func)(...) and reverse_relationship(func)(...) are supported"),
                    span,
                ))
            }
        };
        let (args, kwargs) = self.arguments()?;
        if self.peek().tok == Tok::LParen {
            return Err(Diagnostic::error("syntax", "too many call suffixes", self.peek().span));
        }
        Ok(Expr::Call(Box::new(Call { callee: Callee::Wrapped { wrapper: name, inner }, args, kwargs, span })))
    }
}

/// Name resolution: known functions, bound identifiers, wrapper shapes and the
/// terminal output statement.
fn resolve(program: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut bound: HashSet<String> = PREBOUND.iter().map(|s| s.to_string()).collect();
    let unknown = |name: &str, span: Span| {
        Diagnostic::error(
            "unknown-function",
            format!("unknown function {name:?}; available functions: {}", registry::function_names().join(", ")),
            span,
        )
        .with_token(name)
    };

    fn walk(e: &Expr, bound: &HashSet<String>, diags: &mut Vec<Diagnostic>, unknown: &dyn Fn(&str, Span) -> Diagnostic) {
        match e {
            Expr::Name(n, span) => {
                if !bound.contains(n) {
                    let msg = if registry::lookup(n).is_some() {
                        format!("function {n:?} used as a value; call it or wrap it with scenario_not/reverse_relationship")
                    } else {
                        format!("name {n:?} is not defined")
                    };
                    diags.push(Diagnostic::error("unbound-name", msg, *span).with_token(n));
                }
            }
            Expr::List(items, _) => items.iter().for_each(|i| walk(i, bound, diags, unknown)),
            Expr::Call(c) => {
                match &c.callee {
                    Callee::Function(f) => match registry::lookup(f) {
                        None => diags.push(unknown(f, c.span)),
                        Some(spec) if spec.kind == FunctionKind::Wrapper => diags.push(
                            Diagnostic::error(
                                "syntax",
                                format!("{f} takes a function and must be applied: {f}(func)(args)"),
                                c.span,
                            )
                            .with_token(f),
                        ),
                        Some(spec) if spec.kind == FunctionKind::Output => diags.push(
                            Diagnostic::error("syntax", "output_scenario must be a top-level statement", c.span)
                                .with_token(f),
                        ),
                        Some(_) => {}
                    },
                    Callee::Wrapped { wrapper, inner } => {
                        match registry::lookup(wrapper) {
                            Some(s) if s.kind == FunctionKind::Wrapper => {}
                            Some(_) => diags.push(
                                Diagnostic::error("syntax", format!("{wrapper} does not take a function"), c.span)
                                    .with_token(wrapper),
                            ),
                            None => diags.push(unknown(wrapper, c.span)),
                        }
                        match registry::lookup(inner) {
                            None => diags.push(unknown(inner, c.span)),
                            Some(s)
                                if matches!(
                                    s.kind,
                                    FunctionKind::Wrapper | FunctionKind::Output | FunctionKind::Combinator
                                ) =>
                            {
                                diags.push(
                                    Diagnostic::error("syntax", format!("{inner} cannot be wrapped"), c.span)
                                        .with_token(inner),
                                )
                            }
                            Some(_) => {}
                        }
                    }
                }
                for a in c.args.iter().chain(c.kwargs.iter().map(|(_, v)| v)) {
                    walk(a, bound, diags, unknown);
                }
            }
            _ => {}
        }
    }

    let last = program.statements.len().saturating_sub(1);
    let mut outputs = 0;
    for (i, s) in program.statements.iter().enumerate() {
        match s {
            Statement::Assign { name, value, span } => {
                walk(value, &bound, &mut diags, &unknown);
                if PREBOUND.contains(&name.as_str()) || registry::lookup(name).is_some() {
                    diags.push(
                        Diagnostic::error("reserved-name", format!("cannot assign to reserved name {name:?}"), *span)
                            .with_token(name),
                    );
                }
                bound.insert(name.clone());
            }
            Statement::Output(c) => {
                outputs += 1;
                for a in c.args.iter().chain(c.kwargs.iter().map(|(_, v)| v)) {
                    walk(a, &bound, &mut diags, &unknown);
                }
                if i != last {
                    diags.push(Diagnostic::error("output-not-last", "output_scenario must be the last statement", c.span));
                }
            }
        }
    }
    if outputs == 0 {
        let span = program.statements.last().map(Statement::span).unwrap_or(Span { line: 1, column: 1 });
        diags.push(Diagnostic::error("missing-output", "program must end with output_scenario(...)", span));
    } else if outputs > 1 {
        diags.push(Diagnostic::error(
            "output-not-last",
            "output_scenario must appear exactly once",
            program.statements[last].span(),
        ));
    }
    diags
}

/// Parses and resolves a program. Syntax errors stop at the first problem;
/// resolution errors are all reported.
pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = tokenize(src).map_err(|d| vec![d])?;
    let program = Parser { tokens, pos: 0 }.program().map_err(|d| vec![d])?;
    let diags = resolve(&program);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(diags)
    }
}
