use std::collections::{HashMap, HashSet};

use num_complex::Complex64;

use super::ast::*;
use super::error::{ParseError, ParseErrorKind};
use super::lexer::{tokenize, Tok, Token};
use crate::gates::Builtin;

/// Norm tolerance for equality-assertion amplitude blocks.
pub const AMPLITUDE_NORM_TOLERANCE: f64 = 1e-6;

/// Parses the extended OpenQASM 2 dialect.
pub fn parse(text: &str) -> Result<SourceProgram, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        gates: HashMap::new(),
    };
    parser.program()
}

#[derive(Clone, Copy)]
struct GateSig {
    params: usize,
    qubits: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    qregs: HashMap<String, usize>,
    cregs: HashMap<String, usize>,
    gates: HashMap<String, GateSig>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_tok(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, tok: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError::new(tok.line, tok.column, kind)
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        self.err_at(self.peek(), kind)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let t = self.peek();
        self.err_at(
            t,
            ParseErrorKind::Syntax(format!("expected {wanted}, found {}", t.tok.describe())),
        )
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> PResult<Token> {
        if *self.peek_tok() == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<(String, Token)> {
        match self.peek_tok().clone() {
            Tok::Ident(name) => {
                let t = self.advance();
                Ok((name, t))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn int(&mut self) -> PResult<usize> {
        match *self.peek_tok() {
            Tok::Int(v) => {
                self.advance();
                Ok(v as usize)
            }
            _ => Err(self.unexpected("integer")),
        }
    }

    fn program(&mut self) -> PResult<SourceProgram> {
        let mut prog = SourceProgram::default();
        if matches!(self.peek_tok(), Tok::Ident(w) if w == "OPENQASM") {
            let start = self.advance();
            let version = match self.advance().tok {
                Tok::Real(v) => format!("{v:.1}"),
                Tok::Int(v) => format!("{v}.0"),
                _ => return Err(self.err_at(&start, ParseErrorKind::Syntax("malformed version header".into()))),
            };
            if version != "2.0" {
                return Err(self.err_at(
                    &start,
                    ParseErrorKind::Unsupported(format!("OPENQASM {version}; only 2.0 is supported")),
                ));
            }
            self.expect(Tok::Semi, "`;`")?;
            prog.statements.push(Statement::Version(version));
            prog.line_map.push(start.line);
        }
        while *self.peek_tok() != Tok::Eof {
            let line = self.peek().line;
            let stmt = self.statement()?;
            prog.statements.push(stmt);
            prog.line_map.push(line);
        }
        prog.annotations = vec![None; prog.statements.len()];
        Ok(prog)
    }

    fn statement(&mut self) -> PResult<Statement> {
        let start = self.peek().clone();
        match start.tok.clone() {
            Tok::AssertKw(kw) => {
                self.advance();
                self.assertion(&kw, &start)
            }
            Tok::Ident(word) => match word.as_str() {
                "OPENQASM" => Err(self.err_here(ParseErrorKind::Syntax(
                    "version header must be the first statement".into(),
                ))),
                "include" => {
                    self.advance();
                    let file = match self.advance().tok {
                        Tok::Str(s) => s,
                        _ => {
                            return Err(self.err_at(
                                &start,
                                ParseErrorKind::Syntax("expected file name after include".into()),
                            ))
                        }
                    };
                    if file != "qelib1.inc" {
                        return Err(self.err_at(
                            &start,
                            ParseErrorKind::Unsupported(format!("include \"{file}\"; only qelib1.inc is recognized")),
                        ));
                    }
                    self.expect(Tok::Semi, "`;`")?;
                    Ok(Statement::Include(file))
                }
                "qreg" | "creg" => {
                    self.advance();
                    let (name, name_tok) = self.ident()?;
                    self.expect(Tok::LBracket, "`[`")?;
                    let size = self.int()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    self.expect(Tok::Semi, "`;`")?;
                    if size == 0 {
                        return Err(self.err_at(
                            &name_tok,
                            ParseErrorKind::Syntax("register size must be positive".into()),
                        ));
                    }
                    if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
                        return Err(self.err_at(&name_tok, ParseErrorKind::DuplicateRegister(name)));
                    }
                    if word == "qreg" {
                        self.qregs.insert(name.clone(), size);
                        Ok(Statement::QReg { name, size })
                    } else {
                        self.cregs.insert(name.clone(), size);
                        Ok(Statement::CReg { name, size })
                    }
                }
                "gate" => {
                    self.advance();
                    self.gate_def()
                }
                "measure" => {
                    self.advance();
                    let qubit = self.qubit_ref()?;
                    self.expect(Tok::Arrow, "`->`")?;
                    let bit_tok = self.peek().clone();
                    let bit = self.bit_ref()?;
                    self.expect(Tok::Semi, "`;`")?;
                    let qn = self.expand(&qubit, &start)?.len();
                    let bn = self.bit_width(&bit);
                    if qubit.index.is_some() != bit.index.is_some() || qn != bn {
                        return Err(self.err_at(&bit_tok, ParseErrorKind::RegisterSizeMismatch));
                    }
                    Ok(Statement::Measure { qubit, bit })
                }
                "reset" => {
                    self.advance();
                    let q = self.qubit_ref()?;
                    self.expect(Tok::Semi, "`;`")?;
                    Ok(Statement::Reset(q))
                }
                "barrier" => {
                    self.advance();
                    let refs = self.qubit_list()?;
                    self.expect(Tok::Semi, "`;`")?;
                    let mut seen = HashSet::new();
                    for r in &refs {
                        for q in self.expand(r, &start)? {
                            if !seen.insert(q) {
                                return Err(self.err_at(&start, ParseErrorKind::DuplicateQubit(r.to_string())));
                            }
                        }
                    }
                    Ok(Statement::Barrier(refs))
                }
                "if" => Err(self.err_here(ParseErrorKind::Unsupported(
                    "classically controlled `if` statements are not supported".into(),
                ))),
                "opaque" => Err(self.err_here(ParseErrorKind::Unsupported(
                    "opaque gate declarations are not supported".into(),
                ))),
                _ => self.gate_apply(),
            },
            _ => Err(self.unexpected("statement")),
        }
    }

    fn qubit_ref(&mut self) -> PResult<QubitRef> {
        let (name, tok) = self.ident()?;
        let size = match self.qregs.get(&name) {
            Some(s) => *s,
            None => return Err(self.err_at(&tok, ParseErrorKind::UndeclaredRegister(name))),
        };
        self.finish_ref(name, size)
    }

    fn bit_ref(&mut self) -> PResult<QubitRef> {
        let (name, tok) = self.ident()?;
        let size = match self.cregs.get(&name) {
            Some(s) => *s,
            None => return Err(self.err_at(&tok, ParseErrorKind::UndeclaredRegister(name))),
        };
        self.finish_ref(name, size)
    }

    fn finish_ref(&mut self, name: String, size: usize) -> PResult<QubitRef> {
        if self.eat(&Tok::LBracket) {
            let idx_tok = self.peek().clone();
            let index = self.int()?;
            self.expect(Tok::RBracket, "`]`")?;
            if index >= size {
                return Err(self.err_at(
                    &idx_tok,
                    ParseErrorKind::IndexOutOfRange {
                        register: name,
                        index,
                        size,
                    },
                ));
            }
            Ok(QubitRef::indexed(name, index))
        } else {
            Ok(QubitRef::whole(name))
        }
    }

    fn bit_width(&self, r: &QubitRef) -> usize {
        if r.index.is_some() {
            1
        } else {
            self.cregs.get(&r.register).copied().unwrap_or(0)
        }
    }

    fn qubit_list(&mut self) -> PResult<Vec<QubitRef>> {
        let mut refs = vec![self.qubit_ref()?];
        while self.eat(&Tok::Comma) {
            refs.push(self.qubit_ref()?);
        }
        Ok(refs)
    }

    /// Qubit identities as (register, index) pairs, register-order expanded.
    fn expand(&self, r: &QubitRef, at: &Token) -> PResult<Vec<(String, usize)>> {
        let size = *self
            .qregs
            .get(&r.register)
            .ok_or_else(|| self.err_at(at, ParseErrorKind::UndeclaredRegister(r.register.clone())))?;
        Ok(match r.index {
            Some(i) => vec![(r.register.clone(), i)],
            None => (0..size).map(|i| (r.register.clone(), i)).collect(),
        })
    }

    fn gate_apply(&mut self) -> PResult<Statement> {
        let (gate, gate_tok) = self.ident()?;
        let sig = self
            .signature(&gate)
            .ok_or_else(|| self.err_at(&gate_tok, ParseErrorKind::UnknownGate(gate.clone())))?;
        let params = self.param_list(&[])?;
        let operands = self.qubit_list()?;
        self.expect(Tok::Semi, "`;`")?;
        if params.len() != sig.params {
            return Err(self.err_at(
                &gate_tok,
                ParseErrorKind::ParamCount {
                    gate,
                    expected: sig.params,
                    found: params.len(),
                },
            ));
        }
        if operands.len() != sig.qubits {
            return Err(self.err_at(
                &gate_tok,
                ParseErrorKind::GateArity {
                    gate,
                    expected: sig.qubits,
                    found: operands.len(),
                },
            ));
        }
        // Broadcast check: whole-register operands must agree in size, and every
        // broadcast instance must use distinct qubits.
        let expanded: Vec<Vec<(String, usize)>> = operands
            .iter()
            .map(|r| self.expand(r, &gate_tok))
            .collect::<PResult<_>>()?;
        let width = expanded
            .iter()
            .zip(&operands)
            .filter(|(_, r)| r.index.is_none())
            .map(|(e, _)| e.len())
            .collect::<HashSet<_>>();
        if width.len() > 1 {
            return Err(self.err_at(&gate_tok, ParseErrorKind::RegisterSizeMismatch));
        }
        let width = width.into_iter().next().unwrap_or(1);
        for k in 0..width {
            let mut seen = HashSet::new();
            for (e, r) in expanded.iter().zip(&operands) {
                let q = if r.index.is_some() { &e[0] } else { &e[k] };
                if !seen.insert(q.clone()) {
                    return Err(self.err_at(&gate_tok, ParseErrorKind::DuplicateQubit(format!("{}[{}]", q.0, q.1))));
                }
            }
        }
        Ok(Statement::Apply { gate, params, operands })
    }

    fn signature(&self, gate: &str) -> Option<GateSig> {
        Builtin::from_name(gate)
            .map(|b| GateSig {
                params: b.num_params(),
                qubits: b.num_qubits(),
            })
            .or_else(|| self.gates.get(gate).copied())
    }

    fn param_list(&mut self, scope: &[String]) -> PResult<Vec<Expr>> {
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                let tok = self.peek().clone();
                let e = self.expr()?;
                let mut names = Vec::new();
                e.params(&mut names);
                if let Some(bad) = names.into_iter().find(|n| !scope.contains(n)) {
                    return Err(self.err_at(&tok, ParseErrorKind::UnknownParam(bad)));
                }
                params.push(e);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        Ok(params)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_tok() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_tok() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.eat(&Tok::Caret) {
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek_tok().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::Number(v as f64))
            }
            Tok::Real(v) => {
                self.advance();
                Ok(Expr::Number(v))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance();
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "`(`")?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::Call(func, Box::new(e)));
                }
                Ok(Expr::Param(name))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn gate_def(&mut self) -> PResult<Statement> {
        let (name, name_tok) = self.ident()?;
        if Builtin::from_name(&name).is_some() || self.gates.contains_key(&name) {
            return Err(self.err_at(
                &name_tok,
                ParseErrorKind::Syntax(format!("gate `{name}` is already defined")),
            ));
        }
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                params.push(self.ident()?.0);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma, "`,` or `)`")?;
            }
        }
        let mut args = vec![self.ident()?.0];
        while self.eat(&Tok::Comma) {
            args.push(self.ident()?.0);
        }
        let unique: HashSet<_> = args.iter().chain(&params).collect();
        if unique.len() != args.len() + params.len() {
            return Err(self.err_at(&name_tok, ParseErrorKind::Syntax("duplicate gate argument name".into())));
        }
        self.expect(Tok::LBrace, "`{`")?;
        let mut body = Vec::new();
        while !self.eat(&Tok::RBrace) {
            body.push(self.body_stmt(&name, &params, &args)?);
        }
        self.gates.insert(
            name.clone(),
            GateSig {
                params: params.len(),
                qubits: args.len(),
            },
        );
        Ok(Statement::GateDef(GateDef {
            name,
            params,
            args,
            body,
        }))
    }

    fn body_stmt(&mut self, def: &str, params: &[String], args: &[String]) -> PResult<BodyStmt> {
        let start = self.peek().clone();
        let arg = |p: &mut Self| -> PResult<String> {
            let (a, t) = p.ident()?;
            if !args.contains(&a) {
                return Err(p.err_at(
                    &t,
                    ParseErrorKind::Syntax(format!("`{a}` is not an argument of gate `{def}`")),
                ));
            }
            Ok(a)
        };
        let (word, _) = self.ident()?;
        match word.as_str() {
            "barrier" => {
                let mut list = vec![arg(self)?];
                while self.eat(&Tok::Comma) {
                    list.push(arg(self)?);
                }
                self.expect(Tok::Semi, "`;`")?;
                Ok(BodyStmt::Barrier(list))
            }
            "reset" => {
                let a = arg(self)?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(BodyStmt::Reset(a))
            }
            "measure" | "if" => Err(self.err_at(
                &start,
                ParseErrorKind::Unsupported(format!("`{word}` inside a gate body")),
            )),
            _ => {
                let sig = if word == def {
                    None
                } else {
                    Some(
                        self.signature(&word)
                            .ok_or_else(|| self.err_at(&start, ParseErrorKind::UnknownGate(word.clone())))?,
                    )
                };
                let ps = self.param_list(params)?;
                let mut list = vec![arg(self)?];
                while self.eat(&Tok::Comma) {
                    list.push(arg(self)?);
                }
                self.expect(Tok::Semi, "`;`")?;
                if let Some(sig) = sig {
                    if ps.len() != sig.params {
                        return Err(self.err_at(
                            &start,
                            ParseErrorKind::ParamCount {
                                gate: word,
                                expected: sig.params,
                                found: ps.len(),
                            },
                        ));
                    }
                    if list.len() != sig.qubits {
                        return Err(self.err_at(
                            &start,
                            ParseErrorKind::GateArity {
                                gate: word,
                                expected: sig.qubits,
                                found: list.len(),
                            },
                        ));
                    }
                }
                if list.iter().collect::<HashSet<_>>().len() != list.len() {
                    return Err(self.err_at(&start, ParseErrorKind::DuplicateQubit(list.join(", "))));
                }
                Ok(BodyStmt::Apply {
                    gate: word,
                    params: ps,
                    args: list,
                })
            }
        }
    }

    fn assertion(&mut self, kw: &str, start: &Token) -> PResult<Statement> {
        let kind = match kw {
            "assert-eq" => AssertionKind::Equality,
            "assert-sup" => AssertionKind::Superposition,
            _ => AssertionKind::Entanglement,
        };
        let targets = self.qubit_list()?;
        let mut seen = HashSet::new();
        for r in &targets {
            for q in self.expand(r, start)? {
                if !seen.insert(q.clone()) {
                    return Err(self.err_at(start, ParseErrorKind::DuplicateQubit(format!("{}[{}]", q.0, q.1))));
                }
            }
        }
        let count = seen.len();
        let amplitudes = if kind == AssertionKind::Equality {
            let brace = self.expect(Tok::LBrace, "`{` amplitude block")?;
            let amps = self.amplitude_block()?;
            self.eat(&Tok::Semi);
            let expected = 1usize.checked_shl(count as u32).unwrap_or(usize::MAX);
            if amps.len() != expected {
                return Err(self.err_at(
                    &brace,
                    ParseErrorKind::AmplitudeCount {
                        qubits: count,
                        expected,
                        found: amps.len(),
                    },
                ));
            }
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if (norm - 1.0).abs() > AMPLITUDE_NORM_TOLERANCE {
                return Err(self.err_at(&brace, ParseErrorKind::AmplitudeNorm(norm)));
            }
            Some(amps)
        } else {
            if *self.peek_tok() == Tok::LBrace {
                return Err(self.err_here(ParseErrorKind::Syntax(format!("`{kw}` takes no amplitude block"))));
            }
            self.expect(Tok::Semi, "`;`")?;
            if kind == AssertionKind::Entanglement && count < 2 {
                return Err(self.err_at(start, ParseErrorKind::EntanglementArity(count)));
            }
            None
        };
        Ok(Statement::Assertion(AssertionStmt {
            kind,
            targets,
            amplitudes,
        }))
    }

    fn amplitude_block(&mut self) -> PResult<Vec<Complex64>> {
        let mut amps = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(amps);
        }
        loop {
            amps.push(self.complex_literal()?);
            if self.eat(&Tok::RBrace) {
                return Ok(amps);
            }
            self.expect(Tok::Comma, "`,` or `}`")?;
        }
    }

    fn signed_number(&mut self) -> PResult<(f64, bool)> {
        let mut sign = 1.0;
        if self.eat(&Tok::Minus) {
            sign = -1.0;
        } else {
            self.eat(&Tok::Plus);
        }
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(v) => {
                self.advance();
                Ok((sign * *v as f64, false))
            }
            Tok::Real(v) => {
                self.advance();
                Ok((sign * *v, false))
            }
            Tok::Imag(v) => {
                self.advance();
                Ok((sign * *v, true))
            }
            other => Err(self.err_at(&t, ParseErrorKind::AmplitudeLiteral(other.describe()))),
        }
    }

    /// `a`, `a+bi`, `a-bi`, or `bi`, each optionally signed.
    fn complex_literal(&mut self) -> PResult<Complex64> {
        let (first, first_imag) = self.signed_number()?;
        if first_imag {
            return self.literal_end(Complex64::new(0.0, first));
        }
        if matches!(self.peek_tok(), Tok::Plus | Tok::Minus) {
            let (second, imag) = self.signed_number()?;
            if !imag {
                return Err(self.err_here(ParseErrorKind::AmplitudeLiteral(
                    "expected imaginary part like `0.5i`".into(),
                )));
            }
            return self.literal_end(Complex64::new(first, second));
        }
        self.literal_end(Complex64::new(first, 0.0))
    }

    fn literal_end(&self, value: Complex64) -> PResult<Complex64> {
        match self.peek_tok() {
            Tok::Comma | Tok::RBrace => Ok(value),
            other => Err(self.err_here(ParseErrorKind::AmplitudeLiteral(other.describe()))),
        }
    }
}
