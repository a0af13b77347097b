use std::fmt;

/// Source position, 1-based. Spans never affect AST equality, so a program
/// and its pretty-printed reparse compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String, Span),
    Str(String, Span),
    Int(i64, Span),
    Float(f64, Span),
    Bool(bool, Span),
    None(Span),
    List(Vec<Expr>, Span),
    Call(Box<Call>),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Name(_, s)
            | Expr::Str(_, s)
            | Expr::Int(_, s)
            | Expr::Float(_, s)
            | Expr::Bool(_, s)
            | Expr::None(s)
            | Expr::List(_, s) => *s,
            Expr::Call(c) => c.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Callee {
    Function(String),
    /// `wrapper(inner)(args)`.
    Wrapped { wrapper: String, inner: String },
}

impl Callee {
    /// The function whose parameters the arguments bind to.
    pub fn target(&self) -> &str {
        match self {
            Callee::Function(f) => f,
            Callee::Wrapped { inner, .. } => inner,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Call {
    pub callee: Callee,
    pub args: Vec<Expr>,
    pub kwargs: Vec<(String, Expr)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Assign { name: String, value: Expr, span: Span },
    /// The terminal `output_scenario(...)` call.
    Output(Call),
}

impl Statement {
    pub fn span(&self) -> Span {
        match self {
            Statement::Assign { span, .. } => *span,
            Statement::Output(c) => c.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn output(&self) -> Option<&Call> {
        match self.statements.last() {
            Some(Statement::Output(c)) => Some(c),
            _ => None,
        }
    }

    /// Number of function calls, counting nested ones.
    pub fn call_count(&self) -> usize {
        fn count(e: &Expr) -> usize {
            match e {
                Expr::Call(c) => 1 + c.args.iter().chain(c.kwargs.iter().map(|(_, v)| v)).map(count).sum::<usize>(),
                Expr::List(items, _) => items.iter().map(count).sum(),
                _ => 0,
            }
        }
        self.statements
            .iter()
            .map(|s| match s {
                Statement::Assign { value, .. } => count(value),
                Statement::Output(c) => count(&Expr::Call(Box::new(c.clone()))),
            })
            .sum()
    }
}

fn write_str_literal(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for ch in s.chars() {
        match ch {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(n, _) => f.write_str(n),
            Expr::Str(s, _) => write_str_literal(f, s),
            Expr::Int(i, _) => write!(f, "{i}"),
            // Debug formatting is the shortest representation that reparses exactly.
            Expr::Float(x, _) => write!(f, "{x:?}"),
            Expr::Bool(b, _) => f.write_str(if *b { "True" } else { "False" }),
            Expr::None(_) => f.write_str("None"),
            Expr::List(items, _) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
            Expr::Call(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.callee {
            Callee::Function(name) => write!(f, "{name}(")?,
            Callee::Wrapped { wrapper, inner } => write!(f, "{wrapper}({inner})(")?,
        }
        let mut first = true;
        for a in &self.args {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        for (k, v) in &self.kwargs {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Assign { name, value, .. } => write!(f, "{name} = {value}"),
            Statement::Output(c) => write!(f, "{c}"),
        }
    }
}

/// Canonical source text, one statement per line.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
